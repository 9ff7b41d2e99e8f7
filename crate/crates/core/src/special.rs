//! Complementary error function and the erfc-type corner functions.
//!
//! `S0(x, t) = erfc(x / (2 sqrt(nu t)))` solves the heat equation
//! `S_t = nu S_xx` on `x > 0` with `S0(0, t) = 1` and `S0(x, 0) = 0`, so it
//! carries a unit jump between the boundary and initial data at the corner.
//! `S1 = int_0^t S0 dtau` solves the same equation with `S1(0, t) = t`,
//! carrying a unit jump in the first time derivative instead.

use crate::error::{Error, Result};

/// Beyond this argument `erfc` is below the smallest normal double; corner
/// functions return an exact zero there.
pub const UNDERFLOW_ARGUMENT: f64 = 27.0;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Diffusion coefficient `nu > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Diffusivity(f64);

impl Diffusivity {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu > 0.0 {
            Ok(Self(nu))
        } else {
            Err(Error::InvalidData(format!("diffusivity must be positive, got {nu}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A point `(x, t)` of the space-time strip `[0, 1] x [0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimePoint {
    pub x: f64,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) || !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("point (x = {x}, t = {t}) outside [0,1] x [0,inf)")));
        }
        Ok(Self { x, t })
    }

    /// Unchecked constructor for hot loops where the caller guarantees the range.
    pub(crate) const fn at(x: f64, t: f64) -> Self {
        Self { x, t }
    }
}

// Rational approximations from the FreeBSD msun implementation (s_erf.c).
#[allow(clippy::excessive_precision)]
mod coeffs {
    pub const ERX: f64 = 8.45062911510467529297e-01;

    // erf on [0, 0.84375]
    pub const PP: [f64; 5] = [
        1.28379167095512558561e-01,
        -3.25042107247001499370e-01,
        -2.84817495755985104766e-02,
        -5.77027029648944159157e-03,
        -2.37630166566501626084e-05,
    ];
    pub const QQ: [f64; 5] = [
        3.97917223959155352819e-01,
        6.50222499887672944485e-02,
        5.08130628187576562776e-03,
        1.32494738004321644526e-04,
        -3.96022827877536812320e-06,
    ];

    // erf on [0.84375, 1.25]
    pub const PA: [f64; 7] = [
        -2.36211856075265944077e-03,
        4.14856118683748331666e-01,
        -3.72207876035701323847e-01,
        3.18346619901161753674e-01,
        -1.10894694282396677476e-01,
        3.54783043256182359371e-02,
        -2.16637559486879084300e-03,
    ];
    pub const QA: [f64; 6] = [
        1.06420880400844228286e-01,
        5.40397917702171048937e-01,
        7.18286544141962662868e-02,
        1.26171219808761642112e-01,
        1.36370839120290507362e-02,
        1.19844998467991074170e-02,
    ];

    // erfc on [1.25, 1/0.35]
    pub const RA: [f64; 8] = [
        -9.86494403484714822705e-03,
        -6.93858572707181764372e-01,
        -1.05586262253232909814e+01,
        -6.23753324503260060396e+01,
        -1.62396669462573470355e+02,
        -1.84605092906711035994e+02,
        -8.12874355063065934246e+01,
        -9.81432934416914548592e+00,
    ];
    pub const SA: [f64; 8] = [
        1.96512716674392571292e+01,
        1.37657754143519042600e+02,
        4.34565877475229228821e+02,
        6.45387271733267880336e+02,
        4.29008140027567833386e+02,
        1.08635005541779435134e+02,
        6.57024977031928170135e+00,
        -6.04244152148580987438e-02,
    ];

    // erfc on [1/0.35, 28]
    pub const RB: [f64; 7] = [
        -9.86494292470009928597e-03,
        -7.99283237680523006574e-01,
        -1.77579549177547519889e+01,
        -1.60636384855821916062e+02,
        -6.37566443368389627722e+02,
        -1.02509513161107724954e+03,
        -4.83519191608651397019e+02,
    ];
    pub const SB: [f64; 7] = [
        3.03380607434824582924e+01,
        3.25792512996573918826e+02,
        1.53672958608443695994e+03,
        3.19985821950859553908e+03,
        2.55305040643316442583e+03,
        4.74528541206955367215e+02,
        -2.24409524465858183362e+01,
    ];
}

/// Horner evaluation of `c[0] + c[1] z + ...`.
#[inline]
fn horner(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * z + ci)
}

/// Horner evaluation of `1 + c[0] z + c[1] z^2 + ...`.
#[inline]
fn horner1(c: &[f64], z: f64) -> f64 {
    1.0 + z * horner(c, z)
}

/// Complementary error function, `erfc(z) = 1 - erf(z)`.
///
/// Piecewise rational approximation, accurate to a few ulp over the real
/// line; `erfc(z) = 0` for `z >= 28` and `2` for `z <= -6`.
pub fn erfc(z: f64) -> f64 {
    use coeffs::*;

    if z.is_nan() {
        return f64::NAN;
    }
    let a = z.abs();
    let negative = z < 0.0;

    if a < 0.84375 {
        let temp = if a < 1.0 / (1u64 << 56) as f64 {
            a
        } else {
            let s = a * a;
            let y = horner(&PP, s) / horner1(&QQ, s);
            if a < 0.25 {
                a + a * y
            } else {
                0.5 + (a * y + (a - 0.5))
            }
        };
        return if negative { 1.0 + temp } else { 1.0 - temp };
    }
    if a < 1.25 {
        let s = a - 1.0;
        let q = horner(&PA, s) / horner1(&QA, s);
        return if negative { 1.0 + ERX + q } else { 1.0 - ERX - q };
    }
    if a >= 28.0 {
        return if negative { 2.0 } else { 0.0 };
    }
    if negative && a > 6.0 {
        return 2.0;
    }
    let s = 1.0 / (a * a);
    let (r, sq) = if a < 1.0 / 0.35 {
        (horner(&RA, s), horner1(&SA, s))
    } else {
        (horner(&RB, s), horner1(&SB, s))
    };
    // Split a into a high part with a short mantissa so exp(-a^2) keeps full precision.
    let hi = f64::from_bits(a.to_bits() & 0xffff_ffff_0000_0000);
    let e = (-hi * hi - 0.5625).exp() * ((hi - a) * (hi + a) + r / sq).exp();
    if negative {
        2.0 - e / a
    } else {
        e / a
    }
}

/// Similarity variable `xi = x / (2 sqrt(nu t))`, for `t > 0`.
#[inline]
fn similarity(x: f64, t: f64, nu: Diffusivity) -> f64 {
    x / (2.0 * (nu.0 * t).sqrt())
}

/// First corner function `S0(x, t) = erfc(x / (2 sqrt(nu t)))`.
///
/// At `t = 0` the limit `S0(x, 0) = 0` for `x > 0` is returned. The corner
/// `(0, 0)` itself is a singular point and is rejected.
pub fn s0(p: SpaceTimePoint, nu: Diffusivity) -> Result<f64> {
    if p.t == 0.0 {
        return if p.x == 0.0 { Err(Error::CornerPoint { x: p.x }) } else { Ok(0.0) };
    }
    Ok(s0_positive_time(p.x, p.t, nu))
}

#[inline]
pub(crate) fn s0_positive_time(x: f64, t: f64, nu: Diffusivity) -> f64 {
    let xi = similarity(x, t, nu);
    if xi > UNDERFLOW_ARGUMENT {
        0.0
    } else {
        erfc(xi)
    }
}

/// Time derivative of `S0`: `x exp(-x^2 / (4 nu t)) / (2 sqrt(pi nu) t^{3/2})`.
pub fn s0_dt(p: SpaceTimePoint, nu: Diffusivity) -> Result<f64> {
    if !(p.t > 0.0) {
        return Err(Error::Domain(format!("s0_dt requires t > 0, got {}", p.t)));
    }
    Ok(s0_dt_positive_time(p.x, p.t, nu))
}

#[inline]
pub(crate) fn s0_dt_positive_time(x: f64, t: f64, nu: Diffusivity) -> f64 {
    let xi = similarity(x, t, nu);
    if xi > UNDERFLOW_ARGUMENT {
        return 0.0;
    }
    // xi exp(-xi^2) / (sqrt(pi) t)
    0.5 * FRAC_2_SQRT_PI * xi * (-xi * xi).exp() / t
}

/// Second corner function `S1(x, t) = int_0^t S0(x, tau) dtau`, in closed form
/// `t [(1 + 2 xi^2) erfc(xi) - (2 / sqrt(pi)) xi exp(-xi^2)]`.
///
/// Continuous at the corner with `S1 = 0` along `t = 0`.
pub fn s1(p: SpaceTimePoint, nu: Diffusivity) -> Result<f64> {
    if !(p.t >= 0.0) {
        return Err(Error::Domain(format!("s1 requires t >= 0, got {}", p.t)));
    }
    if p.t == 0.0 {
        return Ok(0.0);
    }
    Ok(s1_positive_time(p.x, p.t, nu))
}

#[inline]
pub(crate) fn s1_positive_time(x: f64, t: f64, nu: Diffusivity) -> f64 {
    let xi = similarity(x, t, nu);
    if xi > UNDERFLOW_ARGUMENT {
        return 0.0;
    }
    let bracket = (1.0 + 2.0 * xi * xi) * erfc(xi) - FRAC_2_SQRT_PI * xi * (-xi * xi).exp();
    // The bracket is positive analytically; cancellation in the tail can leave a
    // tiny negative residue.
    t * bracket.max(0.0)
}

/// Absolute tolerance between the `S1` closed form and quadrature.
pub const S1_CHECK_TOLERANCE: f64 = 1e-8;

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol, depth - 1)
}

/// `int_0^t S0(x, tau) dtau` by adaptive Simpson quadrature in `s = sqrt(tau / t)`.
pub fn s1_by_quadrature(p: SpaceTimePoint, nu: Diffusivity) -> Result<f64> {
    if p.t == 0.0 {
        return Ok(0.0);
    }
    let (x, t) = (p.x, p.t);
    // tau = t s^2, dtau = 2 t s ds
    let f = move |s: f64| if s == 0.0 { 0.0 } else { 2.0 * t * s * s0_positive_time(x, t * s * s, nu) };
    let (fa, fm, fb) = (f(0.0), f(0.5), f(1.0));
    let whole = (fa + 4.0 * fm + fb) / 6.0;
    Ok(simpson(&f, 0.0, 1.0, fa, fm, fb, whole, 1e-14, 30))
}

/// Checks the `S1` closed form against quadrature on `x = 0, 0.05, ..., 1`
/// and ten equally spaced times up to `t_max`. Returns the largest deviation.
pub fn verify_s1_closed_form(nu: Diffusivity, t_max: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        for k in 1..=10 {
            let p = SpaceTimePoint::new(i as f64 * 0.05, t_max * k as f64 / 10.0)?;
            let deviation = (s1(p, nu)? - s1_by_quadrature(p, nu)?).abs();
            if !(deviation <= S1_CHECK_TOLERANCE) {
                return Err(Error::ClosedFormMismatch { x: p.x, t: p.t, deviation });
            }
            worst = worst.max(deviation);
        }
    }
    Ok(worst)
}
