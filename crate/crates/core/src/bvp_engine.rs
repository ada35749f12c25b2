//! Grids, quadrature, damped Newton for semilinear two-point problems,
//! tridiagonal solves and Sturm-sequence eigenvalue counting.

use crate::error::{Error, Result};
use crate::scalar_field::{potential_d1, potential_d2};

/// Uniformly sampled function on [a, b]; `values` includes both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub a: f64,
    pub b: f64,
    /// Number of interior points.
    pub n: usize,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Self {
        assert!(b > a, "grid interval must satisfy a < b");
        assert!(values.len() >= 5, "grid needs at least three interior points");
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            a,
            b,
            n: values.len() - 2,
            values,
        }
    }

    pub fn from_fn(a: f64, b: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = (b - a) / intervals as f64;
        Self::new(a, b, (0..=intervals).map(|i| f(a + i as f64 * h)).collect())
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n + 1) as f64
    }

    pub fn intervals(&self) -> usize {
        self.n + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h()
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }
}

/// Discretization of u'' used by the semilinear solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Central differences, second order.
    SecondOrder,
    /// Numerov's compact scheme, fourth order, still tridiagonal.
    Numerov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// Symmetric tridiagonal matrix; `Periodic` adds the corner couplings
/// A[0][n-1] = A[n-1][0] = offdiag[n-1], so `offdiag` then has n entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub boundary: Boundary,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>, boundary: Boundary) -> Self {
        let n = diag.len();
        match boundary {
            Boundary::Dirichlet => assert_eq!(offdiag.len(), n - 1),
            Boundary::Periodic => {
                assert!(n >= 3, "periodic operator needs at least three points");
                assert_eq!(offdiag.len(), n);
            }
        }
        Self {
            diag,
            offdiag,
            boundary,
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out: Vec<f64> = (0..n).map(|i| self.diag[i] * v[i]).collect();
        for i in 0..n - 1 {
            out[i] += self.offdiag[i] * v[i + 1];
            out[i + 1] += self.offdiag[i] * v[i];
        }
        if self.boundary == Boundary::Periodic {
            out[0] += self.offdiag[n - 1] * v[n - 1];
            out[n - 1] += self.offdiag[n - 1] * v[0];
        }
        out
    }

    pub fn inf_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i + 1 < n {
                    s += self.offdiag[i].abs();
                }
                if i > 0 {
                    s += self.offdiag[i - 1].abs();
                }
                if self.boundary == Boundary::Periodic && (i == 0 || i == n - 1) {
                    s += self.offdiag[n - 1].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.diag.iter_mut().for_each(|d| *d += c);
        out
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if self.boundary == Boundary::Periodic && (i == 0 || i == n - 1) {
                r += self.offdiag[n - 1].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma`.
    ///
    /// Dirichlet: the classical LDL^T sign count. Periodic: the last row and
    /// column are treated as a border, and the inertia of the Schur complement
    /// is added to the count of the leading path matrix.
    pub fn sturm_count(&self, sigma: f64) -> usize {
        let n = self.dim();
        let tiny = f64::EPSILON * self.inf_norm().max(f64::MIN_POSITIVE);
        let m = if self.boundary == Boundary::Periodic {
            n - 1
        } else {
            n
        };
        let periodic = self.boundary == Boundary::Periodic;
        let mut count = 0;
        let mut q = 0.0;
        let mut y = 0.0;
        let mut schur = 0.0;
        for i in 0..m {
            let q_prev = q;
            q = if i == 0 {
                self.diag[0] - sigma
            } else {
                self.diag[i] - sigma - self.offdiag[i - 1] * self.offdiag[i - 1] / q_prev
            };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
            if periodic {
                let mut border = 0.0;
                if i == 0 {
                    border += self.offdiag[n - 1];
                }
                if i == m - 1 {
                    border += self.offdiag[m - 1];
                }
                y = if i == 0 {
                    border
                } else {
                    border - self.offdiag[i - 1] / q_prev * y
                };
                schur += y * y / q;
            }
        }
        if periodic {
            let s = self.diag[n - 1] - sigma - schur;
            if s <= 0.0 {
                count += 1;
            }
        }
        count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub zero_threshold: f64,
    pub n_negative: usize,
    pub n_zero: usize,
    pub n_positive: usize,
}

impl SpectrumReport {
    pub fn from_eigenvalues(eigenvalues: Vec<f64>, zero_threshold: f64) -> Self {
        let n_negative = eigenvalues.iter().filter(|&&e| e < -zero_threshold).count();
        let n_zero = eigenvalues
            .iter()
            .filter(|&&e| e.abs() <= zero_threshold)
            .count();
        let n_positive = eigenvalues.len() - n_negative - n_zero;
        Self {
            eigenvalues,
            zero_threshold,
            n_negative,
            n_zero,
            n_positive,
        }
    }
}

/// Lowest `how_many` eigenvalues by Sturm bisection to 1e-10 absolute; the
/// zero threshold defaults to 1e-8 times the largest magnitude returned.
pub fn eig_sturm(op: &TridiagonalOperator, how_many: usize) -> SpectrumReport {
    eig_sturm_with(op, how_many, 1e-10, None)
}

pub fn eig_sturm_with(
    op: &TridiagonalOperator,
    how_many: usize,
    tol: f64,
    zero_threshold: Option<f64>,
) -> SpectrumReport {
    assert!(how_many <= op.dim(), "cannot request more eigenvalues than the dimension");
    let eigenvalues = lowest_eigenvalues(op, how_many, tol);
    let threshold = zero_threshold.unwrap_or_else(|| {
        1e-8 * eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max)
    });
    SpectrumReport::from_eigenvalues(eigenvalues, threshold)
}

pub fn lowest_eigenvalues(op: &TridiagonalOperator, how_many: usize, tol: f64) -> Vec<f64> {
    let (glo, ghi) = op.gershgorin();
    let pad = 1e-12 * (glo.abs() + ghi.abs()) + tol;
    let (glo, ghi) = (glo - pad, ghi + pad);
    let mut out = Vec::with_capacity(how_many);
    let mut lower = glo;
    for k in 0..how_many {
        let mut lo = lower;
        let mut hi = ghi;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if op.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        out.push(value);
        lower = lo;
    }
    out
}

/// Solves a general tridiagonal system by Gaussian elimination without
/// pivoting. `lower[i]` couples row i+1 to column i, `upper[i]` row i to i+1.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n);
    let scale = diag.iter().map(|d| d.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if !pivot.is_finite() || pivot.abs() <= 1e-14 * scale {
        return Err(Error::SingularJacobian { row: 0, pivot });
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if !pivot.is_finite() || pivot.abs() <= 1e-14 * scale {
            return Err(Error::SingularJacobian { row: i, pivot });
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub scheme: Scheme,
    /// Begin with pseudo-transient steps instead of plain Newton.
    pub start_with_flow: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            max_halvings: 40,
            scheme: Scheme::SecondOrder,
            start_with_flow: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub u: GridFunction,
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// The tolerance actually enforced: the requested one, raised to the
    /// rounding floor of the discrete operator when that floor is larger.
    pub effective_tol: f64,
}

/// Interior residual of eps^2 u'' = W'(u) for Dirichlet data.
pub fn semilinear_residual(values: &[f64], h: f64, eps: f64, scheme: Scheme) -> Vec<f64> {
    let s = eps * eps / (h * h);
    let f: Vec<f64> = values.iter().map(|&u| potential_d1(u)).collect();
    (1..values.len() - 1)
        .map(|i| {
            let lap = s * ((values[i + 1] - values[i]) - (values[i] - values[i - 1]));
            match scheme {
                Scheme::SecondOrder => lap - f[i],
                Scheme::Numerov => lap - (f[i - 1] + 10.0 * f[i] + f[i + 1]) / 12.0,
            }
        })
        .collect()
}

/// Residual on a periodic grid; `values` holds one period without repetition.
pub fn periodic_residual(values: &[f64], h: f64, eps: f64, scheme: Scheme) -> Vec<f64> {
    let n = values.len();
    let mut ext = Vec::with_capacity(n + 2);
    ext.push(values[n - 1]);
    ext.extend_from_slice(values);
    ext.push(values[0]);
    semilinear_residual(&ext, h, eps, scheme)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

const PSEUDO_DT_MAX: f64 = 1e8;

/// Damped Newton for eps^2 u'' = W'(u) on the grid of `guess` with Dirichlet
/// data `bc`.
///
/// When the line search cannot reduce the residual, the iteration switches
/// once to pseudo-transient continuation (implicit steps of the gradient flow
/// with doubling time step) and returns to plain Newton afterwards.
pub fn newton_semilinear(
    guess: &GridFunction,
    eps: f64,
    bc: (f64, f64),
    opts: &NewtonOptions,
) -> Result<NewtonOutcome> {
    assert!(opts.tol > 0.0);
    let h = guess.h();
    let s = eps * eps / (h * h);
    let mut u = guess.values.clone();
    let last = u.len() - 1;
    u[0] = bc.0;
    u[last] = bc.1;
    let umax = inf_norm(&u).max(1.0);
    let floor = 16.0 * f64::EPSILON * (4.0 * s + 3.0 * umax * umax) * umax;
    let effective_tol = opts.tol.max(floor);
    let mut r = semilinear_residual(&u, h, eps, opts.scheme);
    let mut rn = inf_norm(&r);
    let mut history = vec![rn];
    let m = u.len() - 2;
    let mut pseudo_dt: Option<f64> = opts.start_with_flow.then_some(1.0);
    let mut fallback_used = opts.start_with_flow;
    for iter in 0..opts.max_iter {
        if rn <= effective_tol {
            return Ok(NewtonOutcome {
                u: GridFunction::new(guess.a, guess.b, u),
                residual: rn,
                iterations: iter,
                residual_history: history,
                effective_tol,
            });
        }
        let q: Vec<f64> = u.iter().map(|&x| potential_d2(x)).collect();
        let (w_side, w_mid) = match opts.scheme {
            Scheme::SecondOrder => (0.0, 1.0),
            Scheme::Numerov => (1.0 / 12.0, 10.0 / 12.0),
        };
        let diag: Vec<f64> = (1..=m).map(|i| -2.0 * s - w_mid * q[i]).collect();
        let lower: Vec<f64> = (2..=m).map(|i| s - w_side * q[i - 1]).collect();
        let upper: Vec<f64> = (1..m).map(|i| s - w_side * q[i + 1]).collect();
        let delta = solve_tridiagonal(&lower, &diag, &upper, &r)?;
        let mut step = 1.0;
        let mut accepted = false;
        if let Some(dt) = pseudo_dt {
            // Implicit gradient-flow step: (J - I/dt) d = r, u <- u - d.
            let shifted: Vec<f64> = diag.iter().map(|d| d - 1.0 / dt).collect();
            let d = solve_tridiagonal(&lower, &shifted, &upper, &r)?;
            for i in 1..last {
                u[i] -= d[i - 1];
            }
            r = semilinear_residual(&u, h, eps, opts.scheme);
            rn = inf_norm(&r);
            history.push(rn);
            pseudo_dt = Some(2.0 * dt).filter(|&t| t < PSEUDO_DT_MAX);
            continue;
        }
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = u
                .iter()
                .enumerate()
                .map(|(i, &x)| if i == 0 || i == last { x } else { x - step * delta[i - 1] })
                .collect();
            let tr = semilinear_residual(&trial, h, eps, opts.scheme);
            let tn = inf_norm(&tr);
            if tn < rn {
                u = trial;
                r = tr;
                rn = tn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if fallback_used {
                break;
            }
            fallback_used = true;
            pseudo_dt = Some(1.0);
            continue;
        }
        history.push(rn);
    }
    if rn <= effective_tol {
        let iterations = history.len() - 1;
        return Ok(NewtonOutcome {
            u: GridFunction::new(guess.a, guess.b, u),
            residual: rn,
            iterations,
            residual_history: history,
            effective_tol,
        });
    }
    Err(Error::NonConvergence {
        iterations: history.len() - 1,
        residual: rn,
    })
}

/// Composite Simpson; an even number of panels is required for pure Simpson,
/// otherwise the last panel is added by the trapezoid rule.
pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(Error::Domain(format!("simpson needs at least 3 points, got {n}")));
    }
    let m = if n % 2 == 1 { n } else { n - 1 };
    let mut acc = Neumaier::default();
    acc.add(values[0]);
    acc.add(values[m - 1]);
    for (i, &v) in values.iter().enumerate().take(m - 1).skip(1) {
        acc.add(if i % 2 == 1 { 4.0 * v } else { 2.0 * v });
    }
    let mut total = acc.sum() * h / 3.0;
    if m < n {
        total += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    Ok(total)
}

/// Running integral F[j] = int_{x_0}^{x_j} f, fourth-order per panel.
/// `from_right` gives instead F[j] = int_{x_j}^{x_last} f.
pub fn cumulative_integral(values: &[f64], h: f64, from_right: bool) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "cumulative integral needs at least four points");
    let panel = |j: usize| -> f64 {
        let f = values;
        if j == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if j == n - 2 {
            h / 24.0 * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1])
        } else {
            h / 24.0 * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2])
        }
    };
    let mut out = vec![0.0; n];
    if from_right {
        let mut acc = Neumaier::default();
        for j in (0..n - 1).rev() {
            acc.add(panel(j));
            out[j] = acc.sum();
        }
    } else {
        let mut acc = Neumaier::default();
        for j in 0..n - 1 {
            acc.add(panel(j));
            out[j + 1] = acc.sum();
        }
    }
    out
}

/// First derivative on a uniform grid: fourth-order central differences in
/// the interior and fourth-order one-sided stencils at the two ends.
pub fn derivative_4th(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 5, "derivative stencil needs at least five points");
    let f = values;
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
        + 3.0 * f[n - 5])
        / (12.0 * h);
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5])
        / (12.0 * h);
    d
}

/// sqrt(eps ||f||^2 + eps^3 ||Df||^2) with trapezoid L2 norms and forward
/// differences.
pub fn norm_h1_eps(f: &GridFunction, eps: f64) -> f64 {
    let h = f.h();
    let v = &f.values;
    let n = v.len();
    let mut l2 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        l2 += w * x * x;
    }
    l2 *= h;
    let d2: f64 = v.windows(2).map(|w| ((w[1] - w[0]) / h).powi(2)).sum::<f64>() * h;
    (eps * l2 + eps.powi(3) * d2).sqrt()
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}
