//! Method-of-lines integration of the semi-discrete Galerkin systems.
//!
//! Interior equations, for `m = 1..N-1`:
//!
//! ```text
//! sum_n M[m][n] v_n' = E_m(v, t) - nu sum_n K[m][n] v_n
//! ```
//!
//! with `E = sigma (1/2 C v^2 + B(t) v + r(t))` for Burgers (`sigma` the
//! convection sign) and `E = -rho(v, t)` for reaction-diffusion. The two
//! boundary nodes follow the Dirichlet lift `v = g - S` and their mass
//! couplings are moved to the right-hand side with analytic time derivatives.
//! Diffusion is implicit and everything else explicit, so each step is a
//! single tridiagonal solve.

use crate::error::{Error, Result};
use crate::fem::{
    self, assemble_convection_skew, assemble_mass, assemble_stiffness, InteriorSolver, QuadratureRule, SampledField,
    TriDiagForm, UniformMesh,
};
use crate::problem::{self, build_correction_auto, CornerExpansion, CorrectionLevel, EquationKind, ProblemSpec};
use crate::special::{self, SpaceTimePoint};

/// Any nodal value beyond this magnitude aborts the integration.
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

/// Tolerance on boundary rows handed to [`semi_discrete_rhs`].
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

/// Uniform time grid `t_k = k T / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    t_final: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// Rounds `dt` so that a whole number of steps reaches `t_final`.
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidData(format!("time step must be positive, got {dt}")));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidData(format!("final time must be positive, got {t_final}")));
        }
        let n_steps = ((t_final / dt).round() as usize).max(1);
        Self::from_steps(n_steps, t_final)
    }

    pub fn from_steps(n_steps: usize, t_final: f64) -> Result<Self> {
        if n_steps == 0 || !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidData(format!("invalid time grid: {n_steps} steps to {t_final}")));
        }
        Ok(Self { dt: t_final / n_steps as f64, t_final, n_steps })
    }

    /// Same window with each step split into `factor` substeps.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::from_steps(self.n_steps * factor, self.t_final)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_final
        } else {
            k as f64 * self.dt
        }
    }
}

/// Time discretization of the diffusion term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeScheme {
    /// One-step IMEX theta scheme; `theta = 1` is backward Euler on diffusion.
    Theta(f64),
    /// Two-step IMEX BDF2 with linearly extrapolated explicit terms, started
    /// with one backward Euler step.
    Bdf2,
}

/// Treatment of the quadratic Burgers flux `1/2 (v^2, phi')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvectionForm {
    /// Nodal interpolation of `v^2`: `1/2 sum_n v_n^2 (phi_n, phi_m')`.
    Group,
    /// Exact integral of the squared interpolant.
    Consistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub scheme: TimeScheme,
    pub quad_points: usize,
    pub convection: ConvectionForm,
    /// Absorb the corner series into `v` at the first step with `t >= t_off`
    /// and continue uncorrected.
    pub t_off: Option<f64>,
    /// Refine quadrature next to the corrected corner for `t < 10 dt`.
    pub corner_refinement: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::Bdf2,
            quad_points: QuadratureRule::DEFAULT_POINTS,
            convection: ConvectionForm::Group,
            t_off: None,
            corner_refinement: true,
        }
    }
}

impl SolverOptions {
    pub fn quadrature_rule(&self, dt: f64) -> Result<QuadratureRule> {
        let rule = QuadratureRule::new(self.quad_points)?;
        Ok(if self.corner_refinement { rule.with_corner_refinement(10.0 * dt) } else { rule })
    }
}

/// Nodal history of `v_h` and of the reconstruction `u = v_h + S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionHistory {
    pub mesh: UniformMesh,
    pub times: Vec<f64>,
    pub v: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub correction: CornerExpansion,
    /// First stored step integrated without the correction, if it was switched off.
    pub switch_off_step: Option<usize>,
    pub dt: f64,
}

impl SolutionHistory {
    /// Correction in force at stored step `k`.
    pub fn correction_at(&self, k: usize) -> CornerExpansion {
        match self.switch_off_step {
            Some(s) if k >= s => CornerExpansion::NONE,
            _ => self.correction,
        }
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn final_u(&self) -> &[f64] {
        self.u.last().expect("history holds the initial state")
    }
}

/// Dirichlet values of `v` and their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValues {
    pub v0: f64,
    pub vn: f64,
    pub v0_dt: f64,
    pub vn_dt: f64,
}

/// `v(0, t) = g1(t) - S(0, t)`, `v(1, t) = g2(t) - S(1, t)` and their time
/// derivatives. At `t = 0` the limits `S(., 0+)` are used.
pub fn apply_boundary(spec: &ProblemSpec, c: &CornerExpansion, t: f64) -> Result<BoundaryValues> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("boundary lift needs t >= 0, got {t}")));
    }
    let nu = spec.nu();
    let (s0, s1, ds0, ds1) = if t == 0.0 {
        let corner_rate = |x: f64| {
            if c.level == CorrectionLevel::C2 && c.local_x(x) == 0.0 {
                c.alpha1
            } else {
                0.0
            }
        };
        (c.initial_limit(0.0), c.initial_limit(1.0), corner_rate(0.0), corner_rate(1.0))
    } else {
        (
            c.eval_positive_time(0.0, t, nu),
            c.eval_positive_time(1.0, t, nu),
            problem::boundary_dt_positive_time(c, 0.0, t, nu),
            problem::boundary_dt_positive_time(c, 1.0, t, nu),
        )
    };
    Ok(BoundaryValues {
        v0: spec.g1().value(t) - s0,
        vn: spec.g2().value(t) - s1,
        v0_dt: spec.g1().d1(t) - ds0,
        vn_dt: spec.g2().d1(t) - ds1,
    })
}

/// Time-independent forms plus the per-step explicit terms.
struct Discretization<'a> {
    spec: &'a ProblemSpec,
    mesh: UniformMesh,
    rule: QuadratureRule,
    convection: ConvectionForm,
    mass: TriDiagForm,
    stiffness: TriDiagForm,
    skew: TriDiagForm,
}

impl<'a> Discretization<'a> {
    fn new(spec: &'a ProblemSpec, mesh: UniformMesh, rule: QuadratureRule, convection: ConvectionForm) -> Self {
        Self {
            spec,
            mesh,
            rule,
            convection,
            mass: assemble_mass(&mesh),
            stiffness: assemble_stiffness(&mesh),
            skew: assemble_convection_skew(&mesh),
        }
    }

    /// `E(v, t)` on interior rows; boundary entries are zero.
    fn explicit_terms(&self, c: &CornerExpansion, t: f64, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.mesh.n_segments();
        let field = if c.is_active() {
            Some(SampledField::new(&self.mesh, &self.rule, c, self.spec.nu(), t)?)
        } else {
            None
        };
        let mut e = vec![0.0; n + 1];
        match self.spec.kind() {
            EquationKind::Burgers => {
                let sigma = self.spec.convection_sign();
                match self.convection {
                    ConvectionForm::Group => {
                        let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
                        for m in 1..n {
                            e[m] = 0.5 * self.skew.apply_row(m, &sq);
                        }
                    }
                    ConvectionForm::Consistent => {
                        e = fem::quad_convection_consistent(&self.mesh, v);
                    }
                }
                if let Some(field) = &field {
                    let b = fem::s_coupling_from(&self.mesh, &self.rule, c.side, t, field);
                    let r = fem::s_vector_from(&self.mesh, &self.rule, c.side, t, field);
                    for m in 1..n {
                        e[m] += b.apply_row(m, v) + r[m];
                    }
                }
                for x in e.iter_mut() {
                    *x *= sigma;
                }
            }
            EquationKind::ReactionDiffusion => {
                let p = self.spec.reaction().expect("validated reaction-diffusion spec");
                let rho = fem::reaction_from(&self.mesh, &self.rule, c.side, t, field.as_ref(), v, p);
                for m in 1..n {
                    e[m] = -rho[m];
                }
            }
        }
        e[0] = 0.0;
        e[n] = 0.0;
        Ok(e)
    }

    /// `M[m][0] v0' + M[m][N] vN'` on interior rows.
    fn boundary_mass_coupling(&self, m: usize, b: &BoundaryValues) -> f64 {
        let n = self.mesh.n_segments();
        let mut acc = 0.0;
        if m == 1 {
            acc += self.mass.lower[1] * b.v0_dt;
        }
        if m == n - 1 {
            acc += self.mass.upper[n - 1] * b.vn_dt;
        }
        acc
    }
}

/// Right-hand side of the interior mass system `M_II v_I' = F(v, t)`, after
/// subtracting the boundary-node mass couplings. Entries `0` and `N` are zero.
pub fn semi_discrete_rhs(
    spec: &ProblemSpec,
    c: &CornerExpansion,
    mesh: &UniformMesh,
    rule: &QuadratureRule,
    convection: ConvectionForm,
    t: f64,
    v: &[f64],
) -> Result<Vec<f64>> {
    if v.len() != mesh.n_nodes() {
        return Err(Error::InvalidData(format!("nodal vector has {} entries, mesh has {}", v.len(), mesh.n_nodes())));
    }
    let b = apply_boundary(spec, c, t)?;
    let n = mesh.n_segments();
    let deviation = (v[0] - b.v0).abs().max((v[n] - b.vn).abs());
    if !(deviation <= BOUNDARY_TOLERANCE) {
        return Err(Error::InconsistentBoundary { t, deviation });
    }
    let disc = Discretization::new(spec, *mesh, rule.clone(), convection);
    let mut f = disc.explicit_terms(c, t, v)?;
    let nu = spec.nu().value();
    for m in 1..n {
        f[m] -= nu * disc.stiffness.apply_row(m, v) + disc.boundary_mass_coupling(m, &b);
    }
    Ok(f)
}

/// Sum over the interior columns of row `m`.
#[inline]
fn apply_interior(form: &TriDiagForm, m: usize, n: usize, v: &[f64]) -> f64 {
    let mut acc = form.diag[m] * v[m];
    if m > 1 {
        acc += form.lower[m] * v[m - 1];
    }
    if m + 1 < n {
        acc += form.upper[m] * v[m + 1];
    }
    acc
}

/// Sum over the boundary columns of row `m`.
#[inline]
fn apply_boundary_cols(form: &TriDiagForm, m: usize, n: usize, v0: f64, vn: f64) -> f64 {
    let mut acc = 0.0;
    if m == 1 {
        acc += form.lower[1] * v0;
    }
    if m == n - 1 {
        acc += form.upper[n - 1] * vn;
    }
    acc
}

fn reconstruct(mesh: &UniformMesh, c: &CornerExpansion, spec: &ProblemSpec, t: f64, v: &[f64]) -> Vec<f64> {
    let nu = spec.nu();
    v.iter()
        .enumerate()
        .map(|(j, vj)| {
            let x = mesh.node(j);
            let s = if t == 0.0 { c.initial_limit(x) } else { c.eval_positive_time(x, t, nu) };
            vj + s
        })
        .collect()
}

/// Largest stable step for the explicit convection, `dx / max |u(., 0)|`.
pub fn advective_bound(spec: &ProblemSpec, mesh: &UniformMesh) -> Option<f64> {
    if spec.kind() != EquationKind::Burgers {
        return None;
    }
    let scale = mesh
        .nodes()
        .iter()
        .map(|&x| spec.h().value(x).abs())
        .chain([spec.g1().value(0.0).abs(), spec.g2().value(0.0).abs()])
        .fold(0.0, f64::max);
    (scale > 0.0).then(|| mesh.dx() / scale)
}

/// Integrates from the nodal interpolant of `h` to `grid.t_final()`.
pub fn integrate(
    spec: &ProblemSpec,
    correction: &CornerExpansion,
    mesh: &UniformMesh,
    grid: &TimeGrid,
    opts: &SolverOptions,
) -> Result<SolutionHistory> {
    let dt = grid.dt();
    if let Some(bound) = advective_bound(spec, mesh) {
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::StepSize { dt, bound });
        }
    }
    if let TimeScheme::Theta(theta) = opts.scheme {
        if !(0.0..=1.0).contains(&theta) || theta == 0.0 {
            return Err(Error::InvalidData(format!("theta must lie in (0, 1], got {theta}")));
        }
    }
    if correction.level == CorrectionLevel::C2 {
        special::verify_s1_closed_form(spec.nu(), grid.t_final())?;
    }
    let n = mesh.n_segments();
    let nu = spec.nu().value();
    let disc = Discretization::new(spec, *mesh, opts.quadrature_rule(dt)?, opts.convection);

    let theta = match opts.scheme {
        TimeScheme::Theta(th) => th,
        TimeScheme::Bdf2 => 1.0,
    };
    let one_step = InteriorSolver::new(&disc.mass.combine(1.0, &disc.stiffness, theta * dt * nu))?;
    let two_step = match opts.scheme {
        TimeScheme::Bdf2 => Some(InteriorSolver::new(&disc.mass.combine(1.5, &disc.stiffness, dt * nu))?),
        TimeScheme::Theta(_) => None,
    };

    let mut active = *correction;
    let mut switch_off_step = None;

    let b0 = apply_boundary(spec, &active, 0.0)?;
    let mut current: Vec<f64> = mesh.nodes().iter().map(|&x| spec.h().value(x)).collect();
    current[0] = b0.v0;
    current[n] = b0.vn;
    let mut previous: Option<Vec<f64>> = None;

    let mut times = Vec::with_capacity(grid.n_steps() + 1);
    let mut vs = Vec::with_capacity(grid.n_steps() + 1);
    let mut us = Vec::with_capacity(grid.n_steps() + 1);
    times.push(0.0);
    us.push(reconstruct(mesh, &active, spec, 0.0, &current));
    vs.push(current.clone());

    let mut rhs = vec![0.0; n - 1];
    for k in 0..grid.n_steps() {
        let t_new = grid.time(k + 1);
        let b = apply_boundary(spec, &active, t_new)?;
        let use_bdf2 = two_step.is_some() && previous.is_some();

        let explicit = if use_bdf2 {
            let prev = previous.as_ref().unwrap();
            let extrapolated: Vec<f64> = current.iter().zip(prev).map(|(a, b)| 2.0 * a - b).collect();
            disc.explicit_terms(&active, t_new, &extrapolated)?
        } else {
            disc.explicit_terms(&active, t_new, &current)?
        };

        for m in 1..n {
            let history = if use_bdf2 {
                let prev = previous.as_ref().unwrap();
                2.0 * apply_interior(&disc.mass, m, n, &current) - 0.5 * apply_interior(&disc.mass, m, n, prev)
            } else {
                apply_interior(&disc.mass, m, n, &current)
                    - (1.0 - theta) * dt * nu * disc.stiffness.apply_row(m, &current)
            };
            let implicit_weight = if use_bdf2 { 1.0 } else { theta };
            rhs[m - 1] = history + dt * explicit[m]
                - implicit_weight * dt * nu * apply_boundary_cols(&disc.stiffness, m, n, b.v0, b.vn)
                - dt * disc.boundary_mass_coupling(m, &b);
        }

        let interior = if use_bdf2 { two_step.as_ref().unwrap().solve(&rhs) } else { one_step.solve(&rhs) };
        let mut next = Vec::with_capacity(n + 1);
        next.push(b.v0);
        next.extend_from_slice(&interior);
        next.push(b.vn);

        let max_abs = next.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if !(max_abs <= BLOW_UP_THRESHOLD) {
            return Err(Error::Divergence { t: t_new, max_abs });
        }

        let mut prev_state = std::mem::replace(&mut current, next);
        if let Some(t_off) = opts.t_off {
            if active.is_active() && t_new >= t_off {
                absorb(mesh, spec, &active, t_new, &mut current);
                absorb(mesh, spec, &active, grid.time(k), &mut prev_state);
                active = CornerExpansion::NONE;
                switch_off_step = Some(k + 1);
            }
        }
        previous = Some(prev_state);

        times.push(t_new);
        us.push(reconstruct(mesh, &active, spec, t_new, &current));
        vs.push(current.clone());
    }

    Ok(SolutionHistory {
        mesh: *mesh,
        times,
        v: vs,
        u: us,
        correction: *correction,
        switch_off_step,
        dt,
    })
}

/// Folds the nodal values of `S(., t)` into `v`.
fn absorb(mesh: &UniformMesh, spec: &ProblemSpec, c: &CornerExpansion, t: f64, v: &mut [f64]) {
    let s = reconstruct(mesh, c, spec, t, &vec![0.0; v.len()]);
    for (vj, sj) in v.iter_mut().zip(s) {
        *vj += sj;
    }
}

/// [`integrate`] with the correction built for `level` at the incompatible corner.
pub fn integrate_level(
    spec: &ProblemSpec,
    level: CorrectionLevel,
    mesh: &UniformMesh,
    grid: &TimeGrid,
    opts: &SolverOptions,
) -> Result<SolutionHistory> {
    let c = build_correction_auto(spec, level)?;
    integrate(spec, &c, mesh, grid, opts)
}

/// `S(x_j, t_k)` as used in the reconstruction of stored step `k`.
pub fn series_at(history: &SolutionHistory, spec: &ProblemSpec, k: usize, j: usize) -> Result<f64> {
    let c = history.correction_at(k);
    let t = history.times[k];
    let x = history.mesh.node(j);
    if t == 0.0 {
        return Ok(c.initial_limit(x));
    }
    problem::s_eval(&c, SpaceTimePoint::new(x, t)?, spec.nu())
}
