//! Positive Dirichlet minimizers on intervals, the 2p-node periodic solutions
//! on the unit circle, and the minimum-energy map in eps.

use std::f64::consts::PI;

use crate::bvp_engine::{
    derivative_4th, newton_semilinear, periodic_residual, simpson, GridFunction, NewtonOptions,
    Scheme,
};
use crate::elliptic_oracle::modulus_for;
use crate::error::{Error, Result};
use crate::scalar_field::potential;

/// Largest eps below which a positive Dirichlet solution exists on an
/// interval of length L: lambda_1 = pi^2 / L^2, so the threshold is L / pi.
pub fn existence_threshold(length: f64) -> f64 {
    assert!(length > 0.0, "interval length must be positive");
    length / PI
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletOptions {
    pub grid_per_eps: usize,
    pub tol: f64,
    pub scheme: Scheme,
    /// Replace the energy by one Richardson step in h (intervals N and 2N).
    pub richardson: bool,
    /// Force the number of grid intervals instead of the h policy.
    pub intervals: Option<usize>,
}

impl Default for DirichletOptions {
    fn default() -> Self {
        Self {
            grid_per_eps: 50,
            tol: 1e-12,
            scheme: Scheme::Numerov,
            richardson: false,
            intervals: None,
        }
    }
}

impl DirichletOptions {
    /// Even interval count for h = min(eps / grid_per_eps, L / 400).
    pub fn intervals_for(&self, length: f64, eps: f64) -> usize {
        if let Some(n) = self.intervals {
            return n;
        }
        let h = (eps / self.grid_per_eps as f64).min(length / 400.0);
        let n = (length / h * (1.0 - 1e-12)).ceil() as usize;
        n + n % 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSolution {
    pub length: f64,
    pub eps: f64,
    pub u: GridFunction,
    pub lam: f64,
    /// d u / d x at the left end, from the conserved quantity.
    pub slope_left: f64,
    pub slope_right: f64,
    /// One-sided fourth-order difference slopes, kept for auditing.
    pub slope_fd: (f64, f64),
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl DirichletSolution {
    pub fn h(&self) -> f64 {
        self.u.h()
    }

    pub fn max_value(&self) -> f64 {
        self.u.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Allen-Cahn energy int (eps/2) u_x^2 + W(u)/eps of grid values with step h.
pub fn energy_of(values: &[f64], h: f64, eps: f64) -> Result<f64> {
    let du = derivative_4th(values, h);
    let density: Vec<f64> = values
        .iter()
        .zip(&du)
        .map(|(&u, &d)| 0.5 * eps * d * d + potential(u) / eps)
        .collect();
    simpson(&density, h)
}

/// Initial guess on [0, L] from the elliptic closed form.
pub fn oracle_guess(length: f64, eps: f64, intervals: usize) -> Result<GridFunction> {
    let m = modulus_for(eps, length)?;
    let scale = m.zero_spacing / length;
    let mut g = GridFunction::from_fn(0.0, length, intervals, |x| m.eval(x * scale));
    g.values[0] = 0.0;
    g.values[intervals] = 0.0;
    Ok(g)
}

pub fn solve_dirichlet(length: f64, eps: f64) -> Result<DirichletSolution> {
    solve_dirichlet_with(length, eps, &DirichletOptions::default())
}

pub fn solve_dirichlet_with(length: f64, eps: f64, opts: &DirichletOptions) -> Result<DirichletSolution> {
    check_admissible(length, eps)?;
    let n = opts.intervals_for(length, eps);
    let guess = oracle_guess(length, eps, n)?;
    let mut sol = solve_dirichlet_from(&guess, eps, opts)?;
    if opts.richardson {
        let fine = oracle_guess(length, eps, 2 * n)?;
        let fine = solve_dirichlet_from(&fine, eps, &DirichletOptions { richardson: false, ..*opts })?;
        sol.energy = (16.0 * fine.energy - sol.energy) / 15.0;
    }
    Ok(sol)
}

fn check_admissible(length: f64, eps: f64) -> Result<()> {
    if !(length > 0.0 && eps > 0.0) {
        return Err(Error::Domain(format!(
            "length and eps must be positive, got L = {length}, eps = {eps}"
        )));
    }
    let threshold = existence_threshold(length);
    if eps >= threshold {
        return Err(Error::NoPositiveSolution {
            eps,
            length,
            threshold,
        });
    }
    Ok(())
}

/// Newton solve from an arbitrary guess on [0, L] with zero Dirichlet data.
pub fn solve_dirichlet_from(guess: &GridFunction, eps: f64, opts: &DirichletOptions) -> Result<DirichletSolution> {
    let length = guess.b - guess.a;
    check_admissible(length, eps)?;
    let newton = NewtonOptions {
        tol: opts.tol,
        scheme: opts.scheme,
        ..NewtonOptions::default()
    };
    let mut out = newton_semilinear(guess, eps, (0.0, 0.0), &newton)?;
    if off_branch(&out.u.values) {
        let flow = NewtonOptions {
            start_with_flow: true,
            ..newton
        };
        out = newton_semilinear(guess, eps, (0.0, 0.0), &flow)?;
        if off_branch(&out.u.values) {
            return Err(Error::NonConvergence {
                iterations: out.iterations,
                residual: out.residual,
            });
        }
    }
    let h = out.u.h();
    let m = out
        .u
        .values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let s = (1.0 - m) * (1.0 + m);
    let lam = 0.25 * s * s;
    let slope = (0.5 - 2.0 * lam).max(0.0).sqrt() / eps;
    let du = derivative_4th(&out.u.values, h);
    let energy = energy_of(&out.u.values, h, eps)?;
    Ok(DirichletSolution {
        length,
        eps,
        lam,
        slope_left: slope,
        slope_right: -slope,
        slope_fd: (du[0], du[du.len() - 1]),
        energy,
        residual: out.residual,
        iterations: out.iterations,
        u: out.u,
    })
}

/// Newton landed on the trivial or a sign-changing solution instead of the
/// positive one.
fn off_branch(values: &[f64]) -> bool {
    let interior = &values[1..values.len() - 1];
    interior.iter().any(|&v| v <= 0.0) || interior.iter().all(|&v| v <= 1e-8)
}

pub fn min_energy(eps: f64, length: f64) -> Result<f64> {
    Ok(solve_dirichlet(length, eps)?.energy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalSolution {
    pub p: usize,
    pub eps: f64,
    /// Samples on [0, 1]; the last value repeats the first.
    pub u: GridFunction,
    pub nodes: Vec<f64>,
    /// |u_x| at every node.
    pub c: f64,
    pub arc: DirichletSolution,
    pub periodic_residual: f64,
}

impl NodalSolution {
    /// One period of samples without the repeated endpoint.
    pub fn period(&self) -> &[f64] {
        &self.u.values[..self.u.values.len() - 1]
    }

    pub fn sign_changes(&self) -> usize {
        let v = self.period();
        let n = v.len();
        (0..n)
            .filter(|&i| {
                let a = v[i];
                let b = v[(i + 1) % n];
                (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)
            })
            .count()
    }
}

pub fn nodal_solution(p: usize, eps: f64) -> Result<NodalSolution> {
    nodal_solution_with(p, eps, &DirichletOptions::default())
}

/// Odd reflection and repetition of the positive solution on [0, 1/(2p)].
pub fn nodal_solution_with(p: usize, eps: f64, opts: &DirichletOptions) -> Result<NodalSolution> {
    if p == 0 {
        return Err(Error::Domain("p must be at least 1".into()));
    }
    let arc = solve_dirichlet_with(1.0 / (2 * p) as f64, eps, opts)?;
    Ok(nodal_from_arc(p, arc, opts.scheme))
}

pub(crate) fn nodal_from_arc(p: usize, arc: DirichletSolution, scheme: Scheme) -> NodalSolution {
    let n = arc.u.intervals();
    let total = 2 * p * n;
    let mut values = Vec::with_capacity(total + 1);
    for j in 0..total {
        let (i, local) = (j / n, j % n);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        values.push(sign * arc.u.values[local]);
    }
    values.push(values[0]);
    let h = 1.0 / total as f64;
    let periodic = periodic_residual(&values[..total], h, arc.eps, scheme)
        .iter()
        .map(|r| r.abs())
        .fold(0.0, f64::max);
    NodalSolution {
        p,
        eps: arc.eps,
        u: GridFunction::new(0.0, 1.0, values),
        nodes: (0..2 * p).map(|i| i as f64 / (2 * p) as f64).collect(),
        c: arc.slope_left,
        arc,
        periodic_residual: periodic,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzScan {
    pub length: f64,
    pub eps: Vec<f64>,
    pub energy: Vec<f64>,
    /// |E(eps_{i+1}) - E(eps_i)| / |eps_{i+1} - eps_i|.
    pub quotients: Vec<f64>,
    pub max_quotient: f64,
    /// Reported only; the energy is not claimed to be monotone.
    pub monotone_decreasing: bool,
}

pub fn lipschitz_scan(length: f64, eps_grid: &[f64]) -> Result<LipschitzScan> {
    use rayon::prelude::*;
    if eps_grid.len() < 2 {
        return Err(Error::Domain("lipschitz scan needs at least two eps values".into()));
    }
    let energy = eps_grid
        .par_iter()
        .map(|&e| min_energy(e, length))
        .collect::<Result<Vec<f64>>>()?;
    let quotients: Vec<f64> = (0..eps_grid.len() - 1)
        .map(|i| ((energy[i + 1] - energy[i]) / (eps_grid[i + 1] - eps_grid[i])).abs())
        .collect();
    let max_quotient = quotients.iter().copied().fold(0.0, f64::max);
    let monotone_decreasing = (0..eps_grid.len() - 1)
        .all(|i| (energy[i + 1] - energy[i]) * (eps_grid[i + 1] - eps_grid[i]) <= 0.0);
    Ok(LipschitzScan {
        length,
        eps: eps_grid.to_vec(),
        energy,
        quotients,
        max_quotient,
        monotone_decreasing,
    })
}

/// n equally spaced points from a to b inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
