//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `erfc` from the Maclaurin series of `erf`, for `|z| <= 3`.
pub fn erfc_series(z: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        n += 1.0;
        term *= -z * z / n;
        sum += term / (2.0 * n + 1.0);
    }
    1.0 - 2.0 / PI.sqrt() * sum
}

/// `erfc` by the Laplace continued fraction (modified Lentz), for `z >= 2`.
pub fn erfc_continued_fraction(z: f64) -> f64 {
    // erfc z = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    let tiny = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = z + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = z + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / PI.sqrt() / f
}

/// Adaptive Gauss-Kronrod style bisection using 10-point Gauss-Legendre
/// panels compared against their two halves.
pub fn adaptive_integral(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn gl10(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        const X: [f64; 5] = [
            0.148_874_338_981_631_2,
            0.433_395_394_129_247_2,
            0.679_409_568_299_024_4,
            0.865_063_366_688_984_5,
            0.973_906_528_517_171_7,
        ];
        const W: [f64; 5] = [
            0.295_524_224_714_752_9,
            0.269_266_719_309_996_4,
            0.219_086_362_515_982_1,
            0.149_451_349_150_580_6,
            0.066_671_344_308_688_1,
        ];
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        h * X.iter().zip(W).map(|(x, w)| w * (f(c - h * x) + f(c + h * x))).sum::<f64>()
    }
    fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (gl10(f, a, m), gl10(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= tol {
            return l + r;
        }
        go(f, a, m, l, 0.5 * tol.max(1e-17), depth - 1) + go(f, m, b, r, 0.5 * tol.max(1e-17), depth - 1)
    }
    go(f, a, b, gl10(f, a, b), tol, 50)
}

/// Hat function `phi_m` on a uniform mesh of `n` segments, and its slope.
pub fn hat(n: usize, m: usize, x: f64) -> f64 {
    let dx = 1.0 / n as f64;
    (1.0 - (x - m as f64 * dx).abs() / dx).max(0.0)
}

pub fn hat_slope(n: usize, m: usize, x: f64) -> f64 {
    let dx = 1.0 / n as f64;
    let xm = m as f64 * dx;
    if x > xm - dx && x < xm {
        1.0 / dx
    } else if x > xm && x < xm + dx {
        -1.0 / dx
    } else {
        0.0
    }
}

/// Integral over the support of `phi_m`, split at the nodes.
pub fn over_support(n: usize, m: usize, f: &dyn Fn(f64) -> f64, tol: f64) -> f64 {
    let dx = 1.0 / n as f64;
    let xm = m as f64 * dx;
    let mut acc = 0.0;
    if m > 0 {
        acc += adaptive_integral(f, xm - dx, xm, tol);
    }
    if m < n {
        acc += adaptive_integral(f, xm, xm + dx, tol);
    }
    acc
}

pub fn grid_x() -> impl Iterator<Item = f64> {
    (1..=19).map(|i| i as f64 * 0.05)
}

pub fn grid_t() -> impl Iterator<Item = f64> {
    (1..=10).map(|k| k as f64 * 0.005)
}
