//! Initial-boundary-value problem data and the corner correction series.
//!
//! A correction writes the solution as `u = S + v` where
//! `S = alpha0 S0 (+ alpha1 S1)` absorbs the zeroth (and first) order
//! incompatibility between boundary and initial data at one corner, leaving
//! `v` with compatible data.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::special::{self, Diffusivity, SpaceTimePoint};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const FD_STEP: f64 = 1e-5;
const FD_TOLERANCE: f64 = 1e-5;
const FD_SAMPLES: usize = 50;

/// Defects below this magnitude count as compatible when picking a corner.
pub const DEFECT_TOLERANCE: f64 = 1e-10;

fn check_derivative(name: &str, f: &ScalarFn, df: &ScalarFn, lo: f64, hi: f64) -> Result<()> {
    for i in 0..FD_SAMPLES {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / FD_SAMPLES as f64;
        let exact = df(x);
        let fd = (f(x + FD_STEP) - f(x - FD_STEP)) / (2.0 * FD_STEP);
        if !exact.is_finite() || !f(x).is_finite() {
            return Err(Error::InvalidData(format!("{name} is not finite at {x}")));
        }
        if (fd - exact).abs() > FD_TOLERANCE * exact.abs().max(1.0) {
            return Err(Error::InvalidData(format!(
                "{name} disagrees with finite differences at {x}: analytic {exact}, numeric {fd}"
            )));
        }
    }
    Ok(())
}

/// Initial profile `h` on `[0, 1]` with its first two derivatives.
#[derive(Clone)]
pub struct SmoothProfile {
    value: ScalarFn,
    d1: ScalarFn,
    d2: ScalarFn,
    label: String,
    // Evaluate at 1 - x; toggling keeps double reflection exact.
    reflected: bool,
}

impl SmoothProfile {
    /// Builds a profile from analytic callables, checking the derivatives
    /// against centered finite differences.
    pub fn new(value: ScalarFn, d1: ScalarFn, d2: ScalarFn, label: impl Into<String>) -> Result<Self> {
        check_derivative("h'", &value, &d1, 0.0, 1.0)?;
        check_derivative("h''", &d1, &d2, 0.0, 1.0)?;
        Ok(Self { value, d1, d2, label: label.into(), reflected: false })
    }

    /// `a sin(b pi x + c pi)`.
    pub fn sine(a: f64, b: f64, c: f64) -> Result<Self> {
        let k = b * PI;
        let phase = c * PI;
        Self::new(
            Arc::new(move |x| a * (k * x + phase).sin()),
            Arc::new(move |x| a * k * (k * x + phase).cos()),
            Arc::new(move |x| -a * k * k * (k * x + phase).sin()),
            format!("{a}*sin({b}*pi*x + {c}*pi)"),
        )
    }

    pub fn constant(c: f64) -> Self {
        Self {
            value: Arc::new(move |_| c),
            d1: Arc::new(|_| 0.0),
            d2: Arc::new(|_| 0.0),
            label: format!("{c}"),
            reflected: false,
        }
    }

    #[inline]
    fn arg(&self, x: f64) -> f64 {
        if self.reflected {
            1.0 - x
        } else {
            x
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(self.arg(x))
    }

    pub fn d1(&self, x: f64) -> f64 {
        let d = (self.d1)(self.arg(x));
        if self.reflected {
            -d
        } else {
            d
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        (self.d2)(self.arg(x))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `x -> h(1 - x)`.
    fn reflected(&self) -> Self {
        Self { reflected: !self.reflected, ..self.clone() }
    }
}

impl fmt::Debug for SmoothProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reflected {
            write!(f, "SmoothProfile(reflect {})", self.label)
        } else {
            write!(f, "SmoothProfile({})", self.label)
        }
    }
}

/// Dirichlet boundary signal `g(t)` with its time derivative.
#[derive(Clone)]
pub struct BoundarySignal {
    value: ScalarFn,
    d1: ScalarFn,
    label: String,
}

impl BoundarySignal {
    /// Derivative consistency is checked once the time window is known, in
    /// [`ProblemSpec::new`].
    pub fn new(value: ScalarFn, d1: ScalarFn, label: impl Into<String>) -> Self {
        Self { value, d1, label: label.into() }
    }

    /// `c[0] + c[1] t + c[2] t^2 + ...`
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let c: Vec<f64> = coeffs.to_vec();
        let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, ck)| k as f64 * ck).collect();
        let label = format!("poly{c:?}");
        Self {
            value: Arc::new(move |t| c.iter().rev().fold(0.0, |acc, ck| acc * t + ck)),
            d1: Arc::new(move |t| dc.iter().rev().fold(0.0, |acc, ck| acc * t + ck)),
            label,
        }
    }

    pub fn zero() -> Self {
        Self::polynomial(&[])
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn d1(&self, t: f64) -> f64 {
        (self.d1)(t)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for BoundarySignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundarySignal({})", self.label)
    }
}

/// Reaction term `p(u) = sum c_k u^k` of odd degree with positive leading
/// coefficient. The zero polynomial is also accepted and reduces the
/// reaction-diffusion equation to the heat equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionPolynomial {
    coeffs: Vec<f64>,
}

impl ReactionPolynomial {
    pub fn new(coeffs: &[f64]) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidData("reaction coefficients must be finite".into()));
        }
        let mut coeffs = coeffs.to_vec();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if let Some(&lead) = coeffs.last() {
            let degree = coeffs.len() - 1;
            if degree.is_multiple_of(2) {
                return Err(Error::InvalidData(format!("reaction polynomial has even degree {degree}")));
            }
            if lead <= 0.0 {
                return Err(Error::InvalidData(format!("reaction leading coefficient {lead} is not positive")));
            }
        }
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquationKind {
    /// `u_t + u u_x - nu u_xx = 0`
    Burgers,
    /// `u_t - nu u_xx + p(u) = 0`
    ReactionDiffusion,
}

impl fmt::Display for EquationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationKind::Burgers => f.write_str("burgers"),
            EquationKind::ReactionDiffusion => f.write_str("reaction_diffusion"),
        }
    }
}

/// Full initial-boundary-value problem on `[0, 1] x [0, T]`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    kind: EquationKind,
    nu: Diffusivity,
    g1: BoundarySignal,
    g2: BoundarySignal,
    h: SmoothProfile,
    reaction: Option<ReactionPolynomial>,
    t_final: f64,
    // Set on the spatial reflection of a Burgers problem, whose convection
    // term then reads -u u_x.
    reflected: bool,
}

impl ProblemSpec {
    pub fn new(
        kind: EquationKind,
        nu: Diffusivity,
        g1: BoundarySignal,
        g2: BoundarySignal,
        h: SmoothProfile,
        reaction: Option<ReactionPolynomial>,
        t_final: f64,
    ) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidData(format!("final time must be positive, got {t_final}")));
        }
        match (kind, &reaction) {
            (EquationKind::Burgers, Some(_)) => {
                return Err(Error::InvalidData("Burgers problem must not carry a reaction term".into()))
            }
            (EquationKind::ReactionDiffusion, None) => {
                return Err(Error::InvalidData("reaction-diffusion problem needs a reaction polynomial".into()))
            }
            _ => {}
        }
        check_derivative("g1'", &g1.value, &g1.d1, 0.0, t_final)?;
        check_derivative("g2'", &g2.value, &g2.d1, 0.0, t_final)?;
        Ok(Self { kind, nu, g1, g2, h, reaction, t_final, reflected: false })
    }

    pub fn kind(&self) -> EquationKind {
        self.kind
    }

    pub fn nu(&self) -> Diffusivity {
        self.nu
    }

    pub fn g1(&self) -> &BoundarySignal {
        &self.g1
    }

    pub fn g2(&self) -> &BoundarySignal {
        &self.g2
    }

    pub fn h(&self) -> &SmoothProfile {
        &self.h
    }

    pub fn reaction(&self) -> Option<&ReactionPolynomial> {
        self.reaction.as_ref()
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn with_t_final(&self, t_final: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidData(format!("final time must be positive, got {t_final}")));
        }
        Ok(Self { t_final, ..self.clone() })
    }

    /// `+1` for `u u_x`, `-1` for the reflected Burgers problem.
    pub fn convection_sign(&self) -> f64 {
        if self.reflected {
            -1.0
        } else {
            1.0
        }
    }

    /// The problem solved by `x -> 1 - x`: its left corner is this problem's
    /// right corner. Mirroring twice gives back the original problem.
    pub fn mirrored(&self) -> Self {
        Self {
            kind: self.kind,
            nu: self.nu,
            g1: self.g2.clone(),
            g2: self.g1.clone(),
            h: self.h.reflected(),
            reaction: self.reaction.clone(),
            t_final: self.t_final,
            reflected: !self.reflected,
        }
    }
}

/// Zeroth-order defect at the left corner, `g1(0) - h(0)`.
pub fn alpha0(spec: &ProblemSpec) -> f64 {
    spec.g1.value(0.0) - spec.h.value(0.0)
}

/// First-order defect at the left corner: `g1'(0)` minus the value of `u_t`
/// at the corner obtained from the equation and the initial data.
pub fn alpha1(spec: &ProblemSpec) -> f64 {
    let h0 = spec.h.value(0.0);
    let nu = spec.nu.value();
    let g1t = spec.g1.d1(0.0);
    match spec.kind {
        EquationKind::Burgers => g1t + spec.convection_sign() * h0 * spec.h.d1(0.0) - nu * spec.h.d2(0.0),
        EquationKind::ReactionDiffusion => {
            let p = spec.reaction.as_ref().map_or(0.0, |p| p.eval(h0));
            g1t - nu * spec.h.d2(0.0) + p
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CorrectionLevel {
    None,
    /// Removes the zeroth-order incompatibility with `alpha0 S0`.
    C1,
    /// Removes zeroth and first order with `alpha0 S0 + alpha1 S1`.
    C2,
}

impl CorrectionLevel {
    pub const ALL: [CorrectionLevel; 3] = [CorrectionLevel::None, CorrectionLevel::C1, CorrectionLevel::C2];
}

impl fmt::Display for CorrectionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrectionLevel::None => f.write_str("none"),
            CorrectionLevel::C1 => f.write_str("c1"),
            CorrectionLevel::C2 => f.write_str("c2"),
        }
    }
}

impl std::str::FromStr for CorrectionLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(CorrectionLevel::None),
            "c1" => Ok(CorrectionLevel::C1),
            "c2" => Ok(CorrectionLevel::C2),
            _ => Err(format!("unknown correction level '{s}' (expected none, c1 or c2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Correction series `S(x, t) = alpha0 S0 + alpha1 S1` anchored at one corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerExpansion {
    pub level: CorrectionLevel,
    pub alpha0: f64,
    pub alpha1: f64,
    pub side: Side,
}

impl CornerExpansion {
    pub const NONE: CornerExpansion =
        CornerExpansion { level: CorrectionLevel::None, alpha0: 0.0, alpha1: 0.0, side: Side::Left };

    pub fn is_active(&self) -> bool {
        self.level != CorrectionLevel::None
    }

    /// Distance from the anchoring corner.
    #[inline]
    pub fn local_x(&self, x: f64) -> f64 {
        match self.side {
            Side::Left => x,
            Side::Right => 1.0 - x,
        }
    }

    /// `S` for `t > 0`, no corner checks.
    #[inline]
    pub(crate) fn eval_positive_time(&self, x: f64, t: f64, nu: Diffusivity) -> f64 {
        let y = self.local_x(x);
        match self.level {
            CorrectionLevel::None => 0.0,
            CorrectionLevel::C1 => self.alpha0 * special::s0_positive_time(y, t, nu),
            CorrectionLevel::C2 => {
                self.alpha0 * special::s0_positive_time(y, t, nu) + self.alpha1 * special::s1_positive_time(y, t, nu)
            }
        }
    }

    /// Limit of `S(x, t)` as `t -> 0+`: `alpha0` at the anchoring corner,
    /// zero elsewhere.
    pub fn initial_limit(&self, x: f64) -> f64 {
        if self.is_active() && self.local_x(x) == 0.0 {
            self.alpha0
        } else {
            0.0
        }
    }
}

/// Defects of the requested order at one corner.
pub fn build_correction(spec: &ProblemSpec, level: CorrectionLevel, side: Side) -> CornerExpansion {
    let (a0, a1) = match side {
        Side::Left => (alpha0(spec), alpha1(spec)),
        Side::Right => {
            let m = spec.mirrored();
            (alpha0(&m), alpha1(&m))
        }
    };
    match level {
        CorrectionLevel::None => CornerExpansion { side, ..CornerExpansion::NONE },
        CorrectionLevel::C1 => CornerExpansion { level, alpha0: a0, alpha1: 0.0, side },
        CorrectionLevel::C2 => CornerExpansion { level, alpha0: a0, alpha1: a1, side },
    }
}

/// Picks the incompatible corner for `level`. Fails when both corners carry
/// a defect of the corrected orders, which a single series cannot remove.
pub fn build_correction_auto(spec: &ProblemSpec, level: CorrectionLevel) -> Result<CornerExpansion> {
    if level == CorrectionLevel::None {
        return Ok(CornerExpansion::NONE);
    }
    let left = build_correction(spec, level, Side::Left);
    let right = build_correction(spec, level, Side::Right);
    let defective = |c: &CornerExpansion| c.alpha0.abs() > DEFECT_TOLERANCE || c.alpha1.abs() > DEFECT_TOLERANCE;
    match (defective(&left), defective(&right)) {
        (true, true) => Err(Error::Unsupported(format!(
            "both corners are incompatible (left alpha = ({}, {}), right alpha = ({}, {}))",
            left.alpha0, left.alpha1, right.alpha0, right.alpha1
        ))),
        (false, true) => Ok(right),
        _ => Ok(left),
    }
}

/// `S(x, t)`; zero without touching special functions when the level is `None`.
pub fn s_eval(c: &CornerExpansion, p: SpaceTimePoint, nu: Diffusivity) -> Result<f64> {
    if !c.is_active() {
        return Ok(0.0);
    }
    let q = SpaceTimePoint::at(c.local_x(p.x), p.t);
    let mut s = c.alpha0 * special::s0(q, nu)?;
    if c.level == CorrectionLevel::C2 {
        s += c.alpha1 * special::s1(q, nu)?;
    }
    Ok(s)
}

/// `dS/dt` on the boundary `x in {0, 1}` for `t > 0`.
pub fn s_boundary_dt(c: &CornerExpansion, x: f64, t: f64, nu: Diffusivity) -> Result<f64> {
    if x != 0.0 && x != 1.0 {
        return Err(Error::Domain(format!("s_boundary_dt needs x = 0 or x = 1, got {x}")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("s_boundary_dt requires t > 0, got {t}")));
    }
    Ok(boundary_dt_positive_time(c, x, t, nu))
}

pub(crate) fn boundary_dt_positive_time(c: &CornerExpansion, x: f64, t: f64, nu: Diffusivity) -> f64 {
    let y = c.local_x(x);
    match c.level {
        CorrectionLevel::None => 0.0,
        // S0(0, t) = 1 and S1(0, t) = t at the anchoring corner; elsewhere dS1/dt = S0.
        _ if y == 0.0 => {
            if c.level == CorrectionLevel::C2 {
                c.alpha1
            } else {
                0.0
            }
        }
        CorrectionLevel::C1 => c.alpha0 * special::s0_dt_positive_time(y, t, nu),
        CorrectionLevel::C2 => {
            c.alpha0 * special::s0_dt_positive_time(y, t, nu) + c.alpha1 * special::s0_positive_time(y, t, nu)
        }
    }
}

/// Test cases with a left-corner incompatibility and a compatible right corner.
pub mod presets {
    use super::*;

    pub const BURGERS_PAPER: &str = "burgers_paper";
    pub const RD_CUBIC_PAPER: &str = "rd_cubic_paper";
    pub const HEAT_SINE: &str = "heat_sine";

    pub const NAMES: [&str; 3] = [BURGERS_PAPER, RD_CUBIC_PAPER, HEAT_SINE];

    /// Burgers, `nu = 0.2`, `g1 = g2 = 0`, `h = -sin(5 pi x / 4 + 3 pi / 4)`, `T = 0.05`.
    pub fn burgers_paper() -> ProblemSpec {
        ProblemSpec::new(
            EquationKind::Burgers,
            Diffusivity::new(0.2).unwrap(),
            BoundarySignal::zero(),
            BoundarySignal::zero(),
            SmoothProfile::sine(-1.0, 1.25, 0.75).unwrap(),
            None,
            0.05,
        )
        .unwrap()
    }

    /// Reaction-diffusion with `p(u) = u^3`, `nu = 0.2`, `g1 = g2 = 0`,
    /// `h = sin(7 pi x / 4 + pi / 4)`, `T = 0.05`.
    pub fn rd_cubic_paper() -> ProblemSpec {
        ProblemSpec::new(
            EquationKind::ReactionDiffusion,
            Diffusivity::new(0.2).unwrap(),
            BoundarySignal::zero(),
            BoundarySignal::zero(),
            SmoothProfile::sine(1.0, 1.75, 0.25).unwrap(),
            Some(ReactionPolynomial::new(&[0.0, 0.0, 0.0, 1.0]).unwrap()),
            0.05,
        )
        .unwrap()
    }

    /// Linear heat equation with compatible data: `h = sin(pi x)`, `nu = 0.2`,
    /// `T = 0.1`. Exact solution `exp(-nu pi^2 t) sin(pi x)`.
    pub fn heat_sine() -> ProblemSpec {
        ProblemSpec::new(
            EquationKind::ReactionDiffusion,
            Diffusivity::new(0.2).unwrap(),
            BoundarySignal::zero(),
            BoundarySignal::zero(),
            SmoothProfile::sine(1.0, 1.0, 0.0).unwrap(),
            Some(ReactionPolynomial::zero()),
            0.1,
        )
        .unwrap()
    }

    pub fn by_name(name: &str) -> Option<ProblemSpec> {
        match name {
            BURGERS_PAPER => Some(burgers_paper()),
            RD_CUBIC_PAPER => Some(rd_cubic_paper()),
            HEAT_SINE => Some(heat_sine()),
            _ => None,
        }
    }
}
