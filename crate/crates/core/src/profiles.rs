//! Decaying solutions of the linearized heteroclinic equation
//! f'' - W''(g) f = rhs on the half-line, with f(0) = 0.

use std::f64::consts::SQRT_2;

use crate::bvp_engine::{cumulative_integral, simpson, GridFunction};
use crate::error::{Error, Result};
use crate::scalar_field::{heteroclinic, potential_d2, sech2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub t_max: f64,
    pub h: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { t_max: 40.0, h: 1e-3 }
    }
}

impl ProfileOptions {
    pub fn points(&self) -> usize {
        let n = (self.t_max / self.h).round() as usize;
        n + 1
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFunction {
    pub grid: GridFunction,
    /// f' on the same grid.
    pub derivative: Vec<f64>,
    pub rhs: Vec<f64>,
    pub slope0: f64,
    pub a0: f64,
}

impl ProfileFunction {
    pub fn values(&self) -> &[f64] {
        &self.grid.values
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// Sup norm of f'' - W''(g) f - rhs by fourth-order central differences
    /// at the interior points two or more steps from either end.
    pub fn residual(&self) -> f64 {
        let f = &self.grid.values;
        let h = self.h();
        (2..f.len() - 2)
            .map(|i| {
                let d2 = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2])
                    / (12.0 * h * h);
                let g = heteroclinic(self.grid.x(i)).g;
                (d2 - potential_d2(g) * f[i] - self.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Linear interpolation of the samples; `t` must lie in [0, T].
    pub fn at(&self, t: f64) -> f64 {
        let h = self.h();
        let n = self.grid.values.len() - 1;
        let s = (t / h).clamp(0.0, n as f64);
        let j = (s.floor() as usize).min(n - 1);
        let w = s - j as f64;
        (1.0 - w) * self.grid.values[j] + w * self.grid.values[j + 1]
    }
}

pub fn solve_profile(rhs: impl Fn(f64) -> f64) -> Result<ProfileFunction> {
    solve_profile_with(rhs, &ProfileOptions::default())
}

pub fn solve_profile_with(rhs: impl Fn(f64) -> f64, opts: &ProfileOptions) -> Result<ProfileFunction> {
    let samples: Vec<f64> = (0..opts.points()).map(|j| rhs(opts.t(j))).collect();
    solve_profile_sampled(samples, opts)
}

/// Variation of parameters: f = r gdot with r' = B / gdot^2, where the
/// bracket B(t) = -int_t^T rhs gdot is accumulated from the right.
pub fn solve_profile_sampled(rhs: Vec<f64>, opts: &ProfileOptions) -> Result<ProfileFunction> {
    let n = opts.points();
    assert_eq!(rhs.len(), n, "rhs samples must match the profile grid");
    let h = opts.h;
    let last = rhs[n - 1];
    if last.is_nan() || last.abs() > 1e-6 || rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Truncation {
            value: last.abs(),
            t_max: opts.t_max,
        });
    }
    let het: Vec<_> = (0..n).map(|j| heteroclinic(opts.t(j))).collect();
    let integrand: Vec<f64> = rhs.iter().zip(&het).map(|(r, g)| r * g.gdot).collect();
    let bracket: Vec<f64> = cumulative_integral(&integrand, h, true)
        .into_iter()
        .map(|v| -v)
        .collect();
    let a0 = -simpson(&integrand, h)?;
    let ratio: Vec<f64> = bracket
        .iter()
        .zip(&het)
        .map(|(b, g)| b / (g.gdot * g.gdot))
        .collect();
    let r = cumulative_integral(&ratio, h, false);
    let values: Vec<f64> = r.iter().zip(&het).map(|(r, g)| r * g.gdot).collect();
    let derivative: Vec<f64> = (0..n)
        .map(|j| bracket[j] / het[j].gdot + r[j] * het[j].gddot)
        .collect();
    Ok(ProfileFunction {
        grid: GridFunction::new(0.0, opts.h * (n - 1) as f64, values),
        derivative,
        rhs,
        slope0: a0 / het[0].gdot,
        a0,
    })
}

pub fn profile_w() -> Result<ProfileFunction> {
    profile_w_with(&ProfileOptions::default())
}

pub fn profile_w_with(opts: &ProfileOptions) -> Result<ProfileFunction> {
    solve_profile_with(|t| heteroclinic(t).gdot, opts)
}

pub fn profile_rho() -> Result<ProfileFunction> {
    profile_rho_with(&ProfileOptions::default())
}

pub fn profile_rho_with(opts: &ProfileOptions) -> Result<ProfileFunction> {
    let w = profile_w_with(opts)?;
    solve_profile_sampled(w.derivative.clone(), opts)
}

pub fn profile_tau_geom() -> Result<ProfileFunction> {
    profile_tau_geom_with(&ProfileOptions::default())
}

pub fn profile_tau_geom_with(opts: &ProfileOptions) -> Result<ProfileFunction> {
    solve_profile_with(|t| t * heteroclinic(t).gdot, opts)
}

pub fn profile_kappa_ode() -> Result<ProfileFunction> {
    profile_kappa_ode_with(&ProfileOptions::default())
}

pub fn profile_kappa_ode_with(opts: &ProfileOptions) -> Result<ProfileFunction> {
    let w = profile_w_with(opts)?;
    let rhs = (0..opts.points())
        .map(|j| heteroclinic(opts.t(j)).g * w.grid.values[j])
        .collect();
    solve_profile_sampled(rhs, opts)
}

/// d/d lam at lam = 0 of the periodic family member vanishing at t = 0,
/// -(1/8)[2g(5 - 3g^2)/(1 - g^2) + 3(1 - g^2) ln((1+g)/(1-g))], written with
/// 1/(1 - g^2) = cosh^2(a) and ln((1+g)/(1-g)) = 2a, a = t/sqrt2.
pub fn kappa_lambda(t: f64) -> f64 {
    let a = t / SQRT_2;
    let g = a.tanh();
    let c = a.cosh();
    -0.125 * (2.0 * g * (5.0 - 3.0 * g * g) * c * c + 3.0 * SQRT_2 * t * sech2(a))
}

pub fn profile_tau_lambda() -> Result<ProfileFunction> {
    profile_tau_lambda_with(&ProfileOptions::default())
}

pub fn profile_tau_lambda_with(opts: &ProfileOptions) -> Result<ProfileFunction> {
    solve_profile_with(kappa_lambda, opts)
}

pub fn profile_omega() -> Result<ProfileFunction> {
    profile_omega_with(&ProfileOptions::default())
}

pub fn profile_omega_with(opts: &ProfileOptions) -> Result<ProfileFunction> {
    let tau = profile_tau_lambda_with(opts)?;
    let rhs = (0..opts.points())
        .map(|j| {
            let h = heteroclinic(opts.t(j));
            6.0 * h.g * tau.grid.values[j] * h.gdot
        })
        .collect();
    solve_profile_sampled(rhs, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileConstants {
    pub sigma1: f64,
    pub sigma2: f64,
    pub wdot0: f64,
    /// None when the omega profile cannot be built on the truncated domain.
    pub omegadot0: Option<f64>,
}

pub fn profile_constants() -> Result<ProfileConstants> {
    profile_constants_with(&ProfileOptions::default())
}

pub fn profile_constants_with(opts: &ProfileOptions) -> Result<ProfileConstants> {
    let h = opts.h;
    let het: Vec<_> = (0..opts.points()).map(|j| heteroclinic(opts.t(j))).collect();
    let s1: Vec<f64> = het
        .iter()
        .enumerate()
        .map(|(j, g)| opts.t(j) * g.gdot * g.gddot)
        .collect();
    let tau = profile_tau_geom_with(opts)?;
    let s2: Vec<f64> = het
        .iter()
        .zip(&tau.grid.values)
        .map(|(g, tau)| 6.0 * tau * g.g * g.gdot * g.gdot)
        .collect();
    Ok(ProfileConstants {
        sigma1: simpson(&s1, h)?,
        sigma2: simpson(&s2, h)?,
        wdot0: profile_w_with(opts)?.slope0,
        omegadot0: profile_omega_with(opts).ok().map(|p| p.slope0),
    })
}
