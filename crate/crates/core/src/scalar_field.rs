//! The quartic double-well potential, its heteroclinic and the derived constants.

use std::f64::consts::SQRT_2;

/// W(u) = (1 - u^2)^2 / 4.
pub fn potential(u: f64) -> f64 {
    let s = (1.0 - u) * (1.0 + u);
    0.25 * s * s
}

/// W'(u) = u^3 - u.
pub fn potential_d1(u: f64) -> f64 {
    u * (u * u - 1.0)
}

/// W''(u) = 3u^2 - 1.
pub fn potential_d2(u: f64) -> f64 {
    3.0 * u * u - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heteroclinic {
    pub g: f64,
    pub gdot: f64,
    pub gddot: f64,
}

/// g(t) = tanh(t/sqrt2) with its first two derivatives.
///
/// The derivative is evaluated through sech^2 so that it keeps full relative
/// precision in the tails, where 1 - g^2 rounds to zero.
pub fn heteroclinic(t: f64) -> Heteroclinic {
    let a = t / SQRT_2;
    let g = a.tanh();
    let gdot = sech2(a) / SQRT_2;
    Heteroclinic {
        g,
        gdot,
        gddot: -SQRT_2 * g * gdot,
    }
}

/// sech^2(a) without overflow or cancellation.
pub(crate) fn sech2(a: f64) -> f64 {
    let e = (-2.0 * a.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellConstants {
    /// Integral of gdot^2 over the half-line.
    pub sigma0: f64,
    /// gdot(0).
    pub sigma: f64,
    /// Positive zero of W''(g(t)).
    pub kappa0: f64,
}

pub fn well_constants() -> WellConstants {
    WellConstants {
        sigma0: SQRT_2 / 3.0,
        sigma: 1.0 / SQRT_2,
        kappa0: kappa0_root(),
    }
}

/// The energy of one full transition, the integral of sqrt(2W) over [-1, 1].
/// Evaluated by composite Simpson quadrature so it is independent of the
/// closed form 2*sigma0.
pub fn interface_constant() -> f64 {
    let n = 2000;
    let h = 2.0 / n as f64;
    let vals: Vec<f64> = (0..=n)
        .map(|i| (2.0 * potential(-1.0 + i as f64 * h)).sqrt())
        .collect();
    crate::bvp_engine::simpson(&vals, h).expect("grid has enough points")
}

fn kappa0_root() -> f64 {
    let f = |t: f64| {
        let g = heteroclinic(t).g;
        3.0 * g * g - 1.0
    };
    let (mut lo, mut hi) = (0.5_f64, 1.5_f64);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..8 {
        let h = heteroclinic(t);
        let step = (3.0 * h.g * h.g - 1.0) / (6.0 * h.g * h.gdot);
        t -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    t
}
