//! Piecewise-linear Galerkin forms on a uniform mesh of `[0, 1]`.
//!
//! All forms are stored as full `(N + 1)`-row tridiagonal bands so that the
//! couplings of interior test functions to the two Dirichlet nodes stay
//! available to the time stepper.

use crate::error::{Error, Result};
use crate::problem::{CornerExpansion, ReactionPolynomial, Side};
use crate::special::Diffusivity;

/// Uniform mesh `x_j = j / N`, `j = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformMesh {
    n_segments: usize,
}

impl UniformMesh {
    pub const MIN_SEGMENTS: usize = 4;

    pub fn new(n_segments: usize) -> Result<Self> {
        if n_segments < Self::MIN_SEGMENTS {
            return Err(Error::InvalidData(format!(
                "mesh needs at least {} segments, got {n_segments}",
                Self::MIN_SEGMENTS
            )));
        }
        Ok(Self { n_segments })
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn n_nodes(&self) -> usize {
        self.n_segments + 1
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_segments as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.n_segments as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_segments).map(|j| self.node(j)).collect()
    }
}

/// Tridiagonal band: row `i` reads `lower[i] v[i-1] + diag[i] v[i] + upper[i] v[i+1]`.
/// `lower[0]` and `upper[N]` are unused and kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiagForm {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TriDiagForm {
    pub fn zeros(n_rows: usize) -> Self {
        Self { lower: vec![0.0; n_rows], diag: vec![0.0; n_rows], upper: vec![0.0; n_rows] }
    }

    pub fn n_rows(&self) -> usize {
        self.diag.len()
    }

    #[inline]
    pub fn apply_row(&self, m: usize, v: &[f64]) -> f64 {
        let mut acc = self.diag[m] * v[m];
        if m > 0 {
            acc += self.lower[m] * v[m - 1];
        }
        if m + 1 < self.n_rows() {
            acc += self.upper[m] * v[m + 1];
        }
        acc
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n_rows()).map(|m| self.apply_row(m, v)).collect()
    }

    /// Largest `|A[i][i+1] - A[i+1][i]|` over the band.
    pub fn asymmetry(&self) -> f64 {
        (0..self.n_rows().saturating_sub(1))
            .map(|i| (self.upper[i] - self.lower[i + 1]).abs())
            .fold(0.0, f64::max)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &TriDiagForm, b: f64) -> TriDiagForm {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        TriDiagForm {
            lower: mix(&self.lower, &other.lower),
            diag: mix(&self.diag, &other.diag),
            upper: mix(&self.upper, &other.upper),
        }
    }
}

/// LU factors of the interior block (rows and columns `1..N`) of a
/// tridiagonal form, for repeated solves with the Thomas algorithm.
#[derive(Debug, Clone)]
pub struct InteriorSolver {
    lower: Vec<f64>,
    // modified upper coefficients and pivots
    upper_mod: Vec<f64>,
    pivot: Vec<f64>,
}

impl InteriorSolver {
    pub fn new(form: &TriDiagForm) -> Result<Self> {
        let n = form.n_rows();
        if n < 3 {
            return Err(Error::InvalidData("interior block is empty".into()));
        }
        let m = n - 2;
        let lower: Vec<f64> = (1..n - 1).map(|i| form.lower[i]).collect();
        let mut upper_mod = vec![0.0; m];
        let mut pivot = vec![0.0; m];
        for k in 0..m {
            let row = k + 1;
            let p = form.diag[row] - if k > 0 { lower[k] * upper_mod[k - 1] } else { 0.0 };
            if p.abs() < f64::MIN_POSITIVE || !p.is_finite() {
                return Err(Error::Domain(format!("singular tridiagonal pivot at row {row}")));
            }
            pivot[k] = p;
            upper_mod[k] = if k + 1 < m { form.upper[row] / p } else { 0.0 };
        }
        Ok(Self { lower, upper_mod, pivot })
    }

    /// Solves the interior system; `rhs` and the result are indexed by
    /// interior row `0..N-1` (node `m + 1`).
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.pivot.len();
        debug_assert_eq!(rhs.len(), m);
        let mut y = vec![0.0; m];
        for k in 0..m {
            let prev = if k > 0 { self.lower[k] * y[k - 1] } else { 0.0 };
            y[k] = (rhs[k] - prev) / self.pivot[k];
        }
        for k in (0..m.saturating_sub(1)).rev() {
            y[k] -= self.upper_mod[k] * y[k + 1];
        }
        y
    }
}

/// `(phi_n, phi_m)`: `dx/6 [1, 4, 1]` inside, `dx/3` on the boundary diagonal.
pub fn assemble_mass(mesh: &UniformMesh) -> TriDiagForm {
    let n = mesh.n_nodes();
    let dx = mesh.dx();
    let mut f = TriDiagForm::zeros(n);
    for i in 0..n {
        f.diag[i] = if i == 0 || i == n - 1 { dx / 3.0 } else { 2.0 * dx / 3.0 };
        if i > 0 {
            f.lower[i] = dx / 6.0;
        }
        if i + 1 < n {
            f.upper[i] = dx / 6.0;
        }
    }
    f
}

/// `(phi_n', phi_m')`: `1/dx [-1, 2, -1]` inside, `1/dx` on the boundary diagonal.
pub fn assemble_stiffness(mesh: &UniformMesh) -> TriDiagForm {
    let n = mesh.n_nodes();
    let inv = 1.0 / mesh.dx();
    let mut f = TriDiagForm::zeros(n);
    for i in 0..n {
        f.diag[i] = if i == 0 || i == n - 1 { inv } else { 2.0 * inv };
        if i > 0 {
            f.lower[i] = -inv;
        }
        if i + 1 < n {
            f.upper[i] = -inv;
        }
    }
    f
}

/// Row `m` holds `(phi_n, phi_m')` for `n = m - 1, m, m + 1`: `[1/2, 0, -1/2]`
/// inside; the boundary rows carry the one-sided `-1/2` and `+1/2` diagonals.
pub fn assemble_convection_skew(mesh: &UniformMesh) -> TriDiagForm {
    let n = mesh.n_nodes();
    let mut f = TriDiagForm::zeros(n);
    for i in 0..n {
        if i > 0 {
            f.lower[i] = 0.5;
        }
        if i + 1 < n {
            f.upper[i] = -0.5;
        }
    }
    f.diag[0] = -0.5;
    f.diag[n - 1] = 0.5;
    f
}

/// Gauss-Legendre nodes and weights mapped to the reference element `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub abscissae: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidData("quadrature needs at least one point".into()));
        }
        let (x, w) = gauss_legendre(points);
        Ok(Self {
            abscissae: x.iter().map(|xi| 0.5 * (xi + 1.0)).collect(),
            weights: w.iter().map(|wi| 0.5 * wi).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }
}

/// Gauss-Legendre nodes on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss-Legendre quadrature used for every term involving `S`
/// or the reaction polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    base: GaussRule,
    corner: Option<CornerRefinement>,
}

/// Extra points on the elements next to the corrected corner while the
/// corner layer is thinner than a few elements.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerRefinement {
    rule: GaussRule,
    until: f64,
}

impl QuadratureRule {
    pub const DEFAULT_POINTS: usize = 5;
    pub const REFINE_FACTOR: usize = 4;

    pub fn new(points_per_element: usize) -> Result<Self> {
        if points_per_element < 2 {
            return Err(Error::InvalidData(format!(
                "quadrature needs at least 2 points per element, got {points_per_element}"
            )));
        }
        Ok(Self { base: GaussRule::new(points_per_element)?, corner: None })
    }

    /// Uses `4x` the points on the `ceil(N/8)` elements next to the corrected
    /// corner for `t < until`.
    pub fn with_corner_refinement(mut self, until: f64) -> Self {
        let rule = GaussRule::new(self.base.len() * Self::REFINE_FACTOR).expect("nonzero point count");
        self.corner = Some(CornerRefinement { rule, until });
        self
    }

    pub fn points_per_element(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &GaussRule {
        &self.base
    }

    /// Rule for element `e` (spanning `[x_e, x_{e+1}]`) at time `t`.
    #[inline]
    pub fn element_rule(&self, mesh: &UniformMesh, e: usize, side: Side, t: f64) -> &GaussRule {
        if let Some(c) = &self.corner {
            if t < c.until {
                let band = mesh.n_segments().div_ceil(8);
                let from_corner = match side {
                    Side::Left => e,
                    Side::Right => mesh.n_segments() - 1 - e,
                };
                if from_corner < band {
                    return &c.rule;
                }
            }
        }
        &self.base
    }
}

/// Values of `S` at every quadrature point of every element at one time.
#[derive(Debug, Clone)]
pub(crate) struct SampledField {
    // start of element e's points in `values`; len N + 1
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl SampledField {
    pub(crate) fn new(mesh: &UniformMesh, rule: &QuadratureRule, c: &CornerExpansion, nu: Diffusivity, t: f64) -> Result<Self> {
        if c.is_active() && !(t > 0.0) {
            return Err(Error::Domain(format!("corner series sampled at t = {t}; needs t > 0")));
        }
        let n = mesh.n_segments();
        let dx = mesh.dx();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n * rule.points_per_element());
        for e in 0..n {
            offsets.push(values.len());
            let g = rule.element_rule(mesh, e, c.side, t);
            let x0 = mesh.node(e);
            for &xi in &g.abscissae {
                values.push(c.eval_positive_time(x0 + xi * dx, t, nu));
            }
        }
        offsets.push(values.len());
        Ok(Self { offsets, values })
    }

    #[inline]
    fn element(&self, e: usize) -> &[f64] {
        &self.values[self.offsets[e]..self.offsets[e + 1]]
    }
}

fn check_time(c: &CornerExpansion, t: f64) -> Result<()> {
    if c.is_active() && !(t > 0.0) {
        return Err(Error::Domain(format!("corner quadrature requires t > 0, got {t}")));
    }
    Ok(())
}

/// `r_m = 1/2 int S^2 phi_m'` for interior `m`; entries `0` and `N` are zero.
pub fn quad_s_vector(mesh: &UniformMesh, rule: &QuadratureRule, c: &CornerExpansion, nu: Diffusivity, t: f64) -> Result<Vec<f64>> {
    check_time(c, t)?;
    if !c.is_active() {
        return Ok(vec![0.0; mesh.n_nodes()]);
    }
    let field = SampledField::new(mesh, rule, c, nu, t)?;
    Ok(s_vector_from(mesh, rule, c.side, t, &field))
}

pub(crate) fn s_vector_from(mesh: &UniformMesh, rule: &QuadratureRule, side: Side, t: f64, field: &SampledField) -> Vec<f64> {
    let n = mesh.n_segments();
    let mut r = vec![0.0; n + 1];
    for e in 0..n {
        let g = rule.element_rule(mesh, e, side, t);
        // the element length cancels against phi' = +-1/dx
        let integral: f64 = field.element(e).iter().zip(&g.weights).map(|(s, w)| w * s * s).sum();
        r[e] -= 0.5 * integral;
        r[e + 1] += 0.5 * integral;
    }
    r[0] = 0.0;
    r[n] = 0.0;
    r
}

/// `B[m][n] = int w(x) phi_n phi_m'` for an arbitrary weight `w`.
pub fn quad_weighted_coupling(mesh: &UniformMesh, rule: &QuadratureRule, weight: impl Fn(f64) -> f64) -> TriDiagForm {
    let n = mesh.n_segments();
    let dx = mesh.dx();
    let mut f = TriDiagForm::zeros(n + 1);
    for e in 0..n {
        let g = &rule.base;
        let x0 = mesh.node(e);
        let (mut il, mut ir) = (0.0, 0.0);
        for (&xi, &w) in g.abscissae.iter().zip(&g.weights) {
            let s = weight(x0 + xi * dx);
            il += w * s * (1.0 - xi);
            ir += w * s * xi;
        }
        add_coupling(&mut f, e, il, ir);
    }
    f
}

/// Scatter one element's `int w phi_left`, `int w phi_right` (in reference
/// measure; the `dx` cancels against `phi' = +-1/dx`).
#[inline]
fn add_coupling(f: &mut TriDiagForm, e: usize, il: f64, ir: f64) {
    // test function phi_e has slope -1/dx on this element, phi_{e+1} has +1/dx
    f.diag[e] -= il;
    f.upper[e] -= ir;
    f.lower[e + 1] += il;
    f.diag[e + 1] += ir;
}

/// `B[m][n] = int S phi_n phi_m'` on the tridiagonal overlap pattern.
pub fn quad_s_coupling(mesh: &UniformMesh, rule: &QuadratureRule, c: &CornerExpansion, nu: Diffusivity, t: f64) -> Result<TriDiagForm> {
    check_time(c, t)?;
    if !c.is_active() {
        return Ok(TriDiagForm::zeros(mesh.n_nodes()));
    }
    let field = SampledField::new(mesh, rule, c, nu, t)?;
    Ok(s_coupling_from(mesh, rule, c.side, t, &field))
}

pub(crate) fn s_coupling_from(mesh: &UniformMesh, rule: &QuadratureRule, side: Side, t: f64, field: &SampledField) -> TriDiagForm {
    let n = mesh.n_segments();
    let mut f = TriDiagForm::zeros(n + 1);
    for e in 0..n {
        let g = rule.element_rule(mesh, e, side, t);
        let (mut il, mut ir) = (0.0, 0.0);
        for ((&xi, &w), &s) in g.abscissae.iter().zip(&g.weights).zip(field.element(e)) {
            il += w * s * (1.0 - xi);
            ir += w * s * xi;
        }
        add_coupling(&mut f, e, il, ir);
    }
    f
}

/// `rho_m = int p(v_h + S) phi_m` for interior `m`, with `v_h` the
/// piecewise-linear interpolant of the nodal values `v`.
pub fn quad_reaction(
    mesh: &UniformMesh,
    rule: &QuadratureRule,
    c: &CornerExpansion,
    nu: Diffusivity,
    t: f64,
    v: &[f64],
    p: &ReactionPolynomial,
) -> Result<Vec<f64>> {
    check_time(c, t)?;
    if v.len() != mesh.n_nodes() {
        return Err(Error::InvalidData(format!("nodal vector has {} entries, mesh has {}", v.len(), mesh.n_nodes())));
    }
    let field = if c.is_active() { Some(SampledField::new(mesh, rule, c, nu, t)?) } else { None };
    Ok(reaction_from(mesh, rule, c.side, t, field.as_ref(), v, p))
}

pub(crate) fn reaction_from(
    mesh: &UniformMesh,
    rule: &QuadratureRule,
    side: Side,
    t: f64,
    field: Option<&SampledField>,
    v: &[f64],
    p: &ReactionPolynomial,
) -> Vec<f64> {
    let n = mesh.n_segments();
    let dx = mesh.dx();
    let mut rho = vec![0.0; n + 1];
    if p.is_zero() {
        return rho;
    }
    for e in 0..n {
        let g = rule.element_rule(mesh, e, side, t);
        let (vl, vr) = (v[e], v[e + 1]);
        let (mut il, mut ir) = (0.0, 0.0);
        for (k, (&xi, &w)) in g.abscissae.iter().zip(&g.weights).enumerate() {
            let s = field.map_or(0.0, |f| f.element(e)[k]);
            let pv = p.eval(vl + (vr - vl) * xi + s);
            il += w * pv * (1.0 - xi);
            ir += w * pv * xi;
        }
        rho[e] += il * dx;
        rho[e + 1] += ir * dx;
    }
    rho[0] = 0.0;
    rho[n] = 0.0;
    rho
}

/// Consistent form of the quadratic convection term, `1/2 int v_h^2 phi_m'`,
/// for interior `m`.
pub fn quad_convection_consistent(mesh: &UniformMesh, v: &[f64]) -> Vec<f64> {
    let n = mesh.n_segments();
    let mut r = vec![0.0; n + 1];
    for e in 0..n {
        // int_0^1 (a(1-s) + b s)^2 ds = (a^2 + ab + b^2) / 3
        let (a, b) = (v[e], v[e + 1]);
        let integral = (a * a + a * b + b * b) / 3.0;
        r[e] -= 0.5 * integral;
        r[e + 1] += 0.5 * integral;
    }
    r[0] = 0.0;
    r[n] = 0.0;
    r
}
