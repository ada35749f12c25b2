//! The balanced energy of node configurations on the unit circle, its first
//! and second variations, the Dirichlet-to-Neumann quantity v, and the
//! Allen-Cahn spectrum used to cross-check index and nullity.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::bvp_engine::{
    derivative_4th, eig_sturm_with, newton_semilinear, solve_tridiagonal, Boundary, GridFunction,
    NewtonOptions, Scheme, SpectrumReport, TridiagonalOperator,
};
use crate::error::{Error, Result};
use crate::scalar_field::potential_d2;
use crate::solver_1d::{solve_dirichlet_with, DirichletOptions, DirichletSolution, NodalSolution};

/// Strictly increasing node positions spanning less than one turn; arc i runs
/// from node i to node i+1 (the last arc wraps around) and carries sign
/// (-1)^i.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeConfig {
    pub nodes: Vec<f64>,
    pub signs: Vec<i8>,
}

impl NodeConfig {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() % 2 == 1 {
            return Err(Error::InvalidConfig(format!(
                "a separating configuration needs an even number >= 2 of nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("node positions must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("nodes must be strictly increasing".into()));
        }
        if nodes[nodes.len() - 1] - nodes[0] >= 1.0 {
            return Err(Error::InvalidConfig("nodes must span less than one turn".into()));
        }
        let signs = (0..nodes.len()).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        Ok(Self { nodes, signs })
    }

    pub fn equally_spaced(count: usize, offset: f64) -> Result<Self> {
        Self::new((0..count).map(|i| offset + i as f64 / count as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn arc_lengths(&self) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                if i + 1 < m {
                    self.nodes[i + 1] - self.nodes[i]
                } else {
                    1.0 - (self.nodes[m - 1] - self.nodes[0])
                }
            })
            .collect()
    }

    /// Every node i moved by t * f[i].
    pub fn perturbed(&self, f: &[f64], t: f64) -> Result<Self> {
        assert_eq!(f.len(), self.len());
        Self::new(self.nodes.iter().zip(f).map(|(x, d)| x + t * d).collect())
    }

    pub fn check_arcs(&self, eps: f64) -> Result<()> {
        let bound = std::f64::consts::PI * eps;
        for (arc, &length) in self.arc_lengths().iter().enumerate() {
            if length <= bound {
                return Err(Error::ArcTooShort { arc, length, bound });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcPiece {
    pub sign: i8,
    pub start: f64,
    pub solution: DirichletSolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrokenTransition {
    pub config: NodeConfig,
    pub eps: f64,
    pub pieces: Vec<ArcPiece>,
    pub be: f64,
}

impl BrokenTransition {
    pub fn intervals(&self) -> Vec<usize> {
        self.pieces.iter().map(|p| p.solution.u.intervals()).collect()
    }

    /// Glued values at global position x (taken modulo one turn).
    pub fn value_at(&self, x: f64) -> f64 {
        let first = self.config.nodes[0];
        let s = (x - first).rem_euclid(1.0);
        let mut offset = 0.0;
        for piece in &self.pieces {
            let len = piece.solution.length;
            if s <= offset + len {
                let u = &piece.solution.u;
                let local = ((s - offset) / u.h()).clamp(0.0, u.intervals() as f64);
                let j = (local.floor() as usize).min(u.intervals() - 1);
                let w = local - j as f64;
                let v = (1.0 - w) * u.values[j] + w * u.values[j + 1];
                return piece.sign as f64 * v;
            }
            offset += len;
        }
        0.0
    }
}

pub fn broken_transition(config: &NodeConfig, eps: f64) -> Result<BrokenTransition> {
    broken_transition_with(config, eps, &DirichletOptions::default(), None)
}

/// `intervals` pins the grid interval count of every arc, which keeps the
/// discretization fixed while node positions are varied.
pub fn broken_transition_with(
    config: &NodeConfig,
    eps: f64,
    opts: &DirichletOptions,
    intervals: Option<&[usize]>,
) -> Result<BrokenTransition> {
    config.check_arcs(eps)?;
    let lengths = config.arc_lengths();
    let pieces = lengths
        .iter()
        .enumerate()
        .map(|(i, &len)| {
            let arc_opts = DirichletOptions {
                intervals: intervals.map(|n| n[i]).or(opts.intervals),
                ..*opts
            };
            Ok(ArcPiece {
                sign: config.signs[i],
                start: config.nodes[i],
                solution: solve_dirichlet_with(len, eps, &arc_opts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let be = pieces.iter().map(|p| p.solution.energy).sum();
    Ok(BrokenTransition {
        config: config.clone(),
        eps,
        pieces,
        be,
    })
}

/// Derivative of BE along node displacements f (positive = counterclockwise):
/// (eps/2) sum_i f_i [(right-arc slope)^2 - (left-arc slope)^2], evaluated
/// through the conserved quantities as sum_i f_i (lam_left - lam_right)/eps.
pub fn first_variation(config: &NodeConfig, eps: f64, f: &[f64]) -> Result<f64> {
    let bt = broken_transition(config, eps)?;
    Ok(first_variation_of(&bt, f))
}

pub fn first_variation_of(bt: &BrokenTransition, f: &[f64]) -> f64 {
    let m = bt.pieces.len();
    assert_eq!(f.len(), m, "one displacement per node");
    (0..m)
        .map(|i| {
            let left = &bt.pieces[(i + m - 1) % m].solution;
            let right = &bt.pieces[i].solution;
            f[i] * (left.lam - right.lam) / bt.eps
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedSolution {
    pub u: GridFunction,
    /// Slopes in x units from the shooting representation of the DtN map.
    pub slope_left: f64,
    pub slope_right: f64,
    /// One-sided fourth-order difference slopes, kept for auditing.
    pub slope_fd: (f64, f64),
}

/// Value at the far end of the solution of the discrete linearized equation
/// with z(0) = 0 and unit slope, in rescaled units t = x/eps.
///
/// On the symmetric arc the translation mode gives z'(T) = -1, so data (a, b)
/// has Neumann data ((a+b)/z(T), -(a+b)/z(T)) in rescaled units.
pub fn shooting_end(arc: &DirichletSolution) -> f64 {
    let h = arc.h() / arc.eps;
    let u = &arc.u.values;
    let n = u.len() - 1;
    let q: Vec<f64> = u.iter().map(|&x| potential_d2(x)).collect();
    let a: Vec<f64> = q.iter().map(|q| 1.0 - h * h * q / 12.0).collect();
    let b: Vec<f64> = q.iter().map(|q| 2.0 + 10.0 * h * h * q / 12.0).collect();
    let ct2 = (0.5 - 2.0 * arc.lam).max(0.0);
    let mut z_prev = 0.0;
    let mut z = h - h.powi(3) / 6.0 + (1.0 + 18.0 * ct2) * h.powi(5) / 120.0;
    for j in 1..n {
        let next = (b[j] * z - a[j - 1] * z_prev) / a[j + 1];
        z_prev = z;
        z = next;
    }
    z
}

/// Solves eps^2 w'' = W''(u) w on the arc with w = (left, right) at the ends.
pub fn linearized_bvp(arc: &DirichletSolution, left_value: f64, right_value: f64) -> Result<LinearizedSolution> {
    let h = arc.h();
    let eps = arc.eps;
    let s = eps * eps / (h * h);
    let u = &arc.u.values;
    let n = u.len() - 1;
    let m = n - 1;
    let q: Vec<f64> = u.iter().map(|&x| potential_d2(x)).collect();
    let side = |j: usize| s - q[j] / 12.0;
    let diag: Vec<f64> = (1..=m).map(|i| -2.0 * s - 10.0 * q[i] / 12.0).collect();
    let lower: Vec<f64> = (2..=m).map(|i| side(i - 1)).collect();
    let upper: Vec<f64> = (1..m).map(|i| side(i + 1)).collect();
    let mut rhs = vec![0.0; m];
    rhs[0] -= side(0) * left_value;
    rhs[m - 1] -= side(n) * right_value;
    let interior = solve_tridiagonal(&lower, &diag, &upper, &rhs).map_err(|e| match e {
        Error::SingularJacobian { row, pivot } => Error::SingularSystem { row, pivot },
        other => other,
    })?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(left_value);
    values.extend(interior);
    values.push(right_value);
    let z = shooting_end(arc);
    let flux = (left_value + right_value) / (eps * z);
    let d = derivative_4th(&values, h);
    Ok(LinearizedSolution {
        u: GridFunction::new(arc.u.a, arc.u.b, values),
        slope_left: flux,
        slope_right: -flux,
        slope_fd: (d[0], d[n]),
    })
}

/// v = w_x(0) for the linearized solution with data (1, 1), in x units.
pub fn dtn_v(eps: f64, length: f64) -> Result<f64> {
    let arc = solve_dirichlet_with(length, eps, &DirichletOptions::default())?;
    Ok(linearized_bvp(&arc, 1.0, 1.0)?.slope_left)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianReport {
    pub q: DMatrix<f64>,
    pub c: f64,
    pub v: f64,
    pub spectrum: SpectrumReport,
    pub index: usize,
    pub nullity: usize,
}

impl HessianReport {
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(f);
        (v.transpose() * &self.q * &v)[(0, 0)]
    }

    /// Largest entrywise deviation of Q from scale * (cycle Laplacian),
    /// relative to the largest entry of the reference matrix.
    pub fn deviation_from_cycle_laplacian(&self, scale: f64) -> f64 {
        let reference = cycle_laplacian(self.q.nrows()) * scale;
        let norm = reference.iter().map(|x| x.abs()).fold(0.0, f64::max);
        (&self.q - &reference).iter().map(|x| x.abs()).fold(0.0, f64::max) / norm
    }
}

/// The matrix of the quadratic form sum_i (f_i - f_{i+1})^2 on a cycle.
pub fn cycle_laplacian(m: usize) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(m, m);
    for i in 0..m {
        let j = (i + 1) % m;
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
        l[(i, j)] -= 1.0;
        l[(j, i)] -= 1.0;
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianOptions {
    pub critical_tol: f64,
    pub dirichlet: DirichletOptions,
}

impl Default for HessianOptions {
    fn default() -> Self {
        Self {
            critical_tol: 1e-7,
            dirichlet: DirichletOptions::default(),
        }
    }
}

pub fn hessian(config: &NodeConfig, eps: f64) -> Result<HessianReport> {
    hessian_with(config, eps, &HessianOptions::default())
}

/// Second variation of BE over node displacements at a critical config.
///
/// Displacing node x_k by f_k gives each adjacent arc the Dirichlet data
/// w = -u_x f at that end; the arc contributes
/// eps [u_x(a) w_x(a) f_a - u_x(b) w_x(b) f_b].
pub fn hessian_with(config: &NodeConfig, eps: f64, opts: &HessianOptions) -> Result<HessianReport> {
    let bt = broken_transition_with(config, eps, &opts.dirichlet, None)?;
    let m = config.len();
    let max_variation = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            first_variation_of(&bt, &e).abs()
        })
        .fold(0.0, f64::max);
    if max_variation > opts.critical_tol {
        return Err(Error::NotCritical {
            max_variation,
            tolerance: opts.critical_tol,
        });
    }
    let columns = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut col = vec![0.0; m];
            for (i, piece) in bt.pieces.iter().enumerate() {
                let (a, b) = (i, (i + 1) % m);
                if k != a && k != b {
                    continue;
                }
                let sgn = piece.sign as f64;
                let ux_a = sgn * piece.solution.slope_left;
                let ux_b = sgn * piece.solution.slope_right;
                let data_a = if k == a { -ux_a } else { 0.0 };
                let data_b = if k == b { -ux_b } else { 0.0 };
                let lin = linearized_bvp(&piece.solution, data_a, data_b)?;
                col[a] += eps * ux_a * lin.slope_left;
                col[b] -= eps * ux_b * lin.slope_right;
            }
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    let q = DMatrix::from_fn(m, m, |r, k| columns[k][r]);
    let q = (&q + q.transpose()) * 0.5;
    let eig = SymmetricEigen::new(q.clone());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    let qnorm = (0..m)
        .map(|r| (0..m).map(|k| q[(r, k)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let spectrum = SpectrumReport::from_eigenvalues(values, 1e-8 * qnorm);
    let c = bt.pieces[0].solution.slope_left;
    let v = linearized_bvp(&bt.pieces[0].solution, 1.0, 1.0)?.slope_left;
    Ok(HessianReport {
        index: spectrum.n_negative,
        nullity: spectrum.n_zero,
        q,
        c,
        v,
        spectrum,
    })
}

pub fn morse_index(config: &NodeConfig, eps: f64) -> Result<(usize, usize)> {
    let r = hessian(config, eps)?;
    Ok((r.index, r.nullity))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcSpectrum {
    pub report: SpectrumReport,
    /// Rayleigh quotient of the discrete translation mode.
    pub translation_rq: f64,
    pub operator_norm: f64,
    /// Periodic samples of the solution the operator linearizes around.
    pub u: Vec<f64>,
}

impl AcSpectrum {
    pub fn index(&self) -> usize {
        self.report.n_negative
    }

    pub fn nullity(&self) -> usize {
        self.report.n_zero
    }
}

fn repolish(arc: &DirichletSolution) -> Result<GridFunction> {
    let opts = NewtonOptions {
        scheme: Scheme::SecondOrder,
        ..NewtonOptions::default()
    };
    Ok(newton_semilinear(&arc.u, arc.eps, (0.0, 0.0), &opts)?.u)
}

/// Periodic operator -(eps^2 D2 - W''(u)) with second-order differences.
pub fn ac_operator(u: &[f64], h: f64, eps: f64) -> TridiagonalOperator {
    let s = eps * eps / (h * h);
    TridiagonalOperator::new(
        u.iter().map(|&x| 2.0 * s + potential_d2(x)).collect(),
        vec![-s; u.len()],
        Boundary::Periodic,
    )
}

/// Lowest eigenvalues of the linearized Allen-Cahn operator around the
/// nodal solution on the circle.
///
/// The arc is re-solved with the second-order scheme on the same grid, so the
/// operator is the exact linearization of the discrete equation and the
/// translation mode is a discrete kernel vector up to O(h^4).
pub fn ac_spectrum(sol: &NodalSolution, how_many: usize) -> Result<AcSpectrum> {
    let arc = repolish(&sol.arc)?;
    let n = arc.intervals();
    let total = 2 * sol.p * n;
    let u: Vec<f64> = (0..total)
        .map(|j| {
            let sign = if (j / n) % 2 == 0 { 1.0 } else { -1.0 };
            sign * arc.values[j % n]
        })
        .collect();
    let h = 1.0 / total as f64;
    let op = ac_operator(&u, h, sol.eps);
    let ux: Vec<f64> = (0..total)
        .map(|i| {
            let at = |k: isize| u[(i as isize + k).rem_euclid(total as isize) as usize];
            (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h)
        })
        .collect();
    let au = op.apply(&ux);
    let rq = ux.iter().zip(&au).map(|(a, b)| a * b).sum::<f64>()
        / ux.iter().map(|a| a * a).sum::<f64>();
    let norm = op.inf_norm();
    let threshold = (10.0 * rq.abs()).max(64.0 * f64::EPSILON * norm);
    let tol = (threshold * 1e-2).min(1e-10);
    let report = eig_sturm_with(&op, how_many.min(total), tol, Some(threshold));
    Ok(AcSpectrum {
        report,
        translation_rq: rq,
        operator_norm: norm,
        u,
    })
}

/// Smallest Dirichlet eigenvalue of -(eps^2 D2 - W''(u)) on the arc.
pub fn dirichlet_gap(eps: f64, length: f64) -> Result<f64> {
    dirichlet_gap_with_potential(eps, length, potential_d2)
}

/// As `dirichlet_gap` with W'' replaced by an arbitrary function of u.
pub fn dirichlet_gap_with_potential(eps: f64, length: f64, w2: impl Fn(f64) -> f64) -> Result<f64> {
    let arc = solve_dirichlet_with(length, eps, &DirichletOptions::default())?;
    let u = repolish(&arc)?;
    let h = u.h();
    let s = eps * eps / (h * h);
    let inner = &u.values[1..u.values.len() - 1];
    let op = TridiagonalOperator::new(
        inner.iter().map(|&x| 2.0 * s + w2(x)).collect(),
        vec![-s; inner.len() - 1],
        Boundary::Dirichlet,
    );
    Ok(eig_sturm_with(&op, 1, 1e-12, None).eigenvalues[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver_1d::{nodal_solution, solve_dirichlet};

    #[test]
    fn config_validation() {
        assert!(NodeConfig::new(vec![0.0, 0.3, 0.6]).is_err());
        assert!(NodeConfig::new(vec![0.5, 0.2]).is_err());
        assert!(NodeConfig::new(vec![0.0, 1.0]).is_err());
        let c = NodeConfig::new(vec![0.1, 0.4]).unwrap();
        assert_eq!(c.signs, vec![1, -1]);
        let l = c.arc_lengths();
        assert!((l[0] - 0.3).abs() < 1e-15 && (l[1] - 0.7).abs() < 1e-15);
        assert!(matches!(
            c.check_arcs(0.1),
            Err(Error::ArcTooShort { arc: 0, .. })
        ));
    }

    #[test]
    fn symmetric_be_is_twice_arc_energy() {
        let c = NodeConfig::new(vec![0.0, 0.5]).unwrap();
        let bt = broken_transition(&c, 0.02).unwrap();
        let arc = solve_dirichlet(0.5, 0.02).unwrap();
        assert!((bt.be - 2.0 * arc.energy).abs() < 1e-12);
        let rotated = broken_transition(&NodeConfig::new(vec![0.13, 0.63]).unwrap(), 0.02).unwrap();
        assert!((bt.be - rotated.be).abs() < 1e-10);
        assert!(bt.value_at(0.25) > 0.9 && bt.value_at(0.75) < -0.9);
    }

    #[test]
    fn asymmetric_be_bookkeeping() {
        let c = NodeConfig::new(vec![0.0, 0.4]).unwrap();
        let bt = broken_transition(&c, 0.05).unwrap();
        let a = solve_dirichlet(0.4, 0.05).unwrap().energy;
        let b = solve_dirichlet(0.6, 0.05).unwrap().energy;
        assert!((bt.be - a - b).abs() < 1e-12);
    }

    #[test]
    fn first_variation_linear_and_zero_when_symmetric() {
        let sym = NodeConfig::equally_spaced(4, 0.0).unwrap();
        let fv = first_variation(&sym, 0.02, &[0.3, -1.0, 2.0, 0.5]).unwrap();
        assert!(fv.abs() <= 1e-9);
        let c = NodeConfig::new(vec![0.0, 0.4]).unwrap();
        let bt = broken_transition(&c, 0.05).unwrap();
        let f1 = [0.3, -0.7];
        let f2 = [1.1, 0.4];
        let sum = [f1[0] + f2[0], f1[1] + f2[1]];
        let lhs = first_variation_of(&bt, &sum);
        let rhs = first_variation_of(&bt, &f1) + first_variation_of(&bt, &f2);
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        // Moving node 1 forward grows the short arc, which raises the energy.
        assert!(first_variation_of(&bt, &[0.0, 1.0]) > 0.0);
    }

    #[test]
    fn linearized_bvp_basics() {
        let arc = solve_dirichlet(0.5, 0.05).unwrap();
        let zero = linearized_bvp(&arc, 0.0, 0.0).unwrap();
        assert!(zero.u.values.iter().all(|&x| x == 0.0));
        let one = linearized_bvp(&arc, 1.0, 1.0).unwrap();
        let v = &one.u.values;
        let n = v.len() - 1;
        for i in 0..=n {
            assert!((v[i] - v[n - i]).abs() < 1e-9);
        }
        assert!((one.slope_left + one.slope_right).abs() < 1e-15);
        // One-sided differences carry an absolute error near 1e-6 here.
        assert!((one.slope_fd.0 - one.slope_left).abs() < 1e-3 * one.slope_left.abs());
    }

    #[test]
    fn dtn_shooting_matches_difference_slopes_on_short_arc() {
        let arc = solve_dirichlet(0.2, 0.05).unwrap();
        let lin = linearized_bvp(&arc, 1.0, 0.3).unwrap();
        assert!((lin.slope_fd.0 - lin.slope_left).abs() < 1e-6 * lin.slope_left.abs());
        assert!((lin.slope_fd.1 - lin.slope_right).abs() < 1e-6 * lin.slope_right.abs());
    }

    #[test]
    fn hessian_structure_p1() {
        let config = NodeConfig::equally_spaced(2, 0.0).unwrap();
        let r = hessian(&config, 0.05).unwrap();
        assert_eq!((r.index, r.nullity), (1, 1));
        let ones = [1.0, 1.0];
        assert!(r.quadratic_form(&ones).abs() <= r.spectrum.zero_threshold);
        let scale = -0.05 * r.c * r.c * r.v / 2.0;
        assert!(r.deviation_from_cycle_laplacian(scale) < 1e-10);
    }

    #[test]
    fn hessian_rejects_noncritical() {
        let config = NodeConfig::new(vec![0.0, 0.4]).unwrap();
        assert!(matches!(hessian(&config, 0.05), Err(Error::NotCritical { .. })));
    }

    #[test]
    fn ac_spectrum_p1() {
        let sol = nodal_solution(1, 0.05).unwrap();
        let s = ac_spectrum(&sol, 4).unwrap();
        assert_eq!((s.index(), s.nullity()), (1, 1));
        assert!(s.report.eigenvalues[2] > 0.0);
    }

    #[test]
    fn gaps() {
        assert!(dirichlet_gap(0.05, 0.5).unwrap() > 0.0);
        assert!(dirichlet_gap_with_potential(0.05, 0.5, |_| 1.0).unwrap() >= 1.0);
    }
}
