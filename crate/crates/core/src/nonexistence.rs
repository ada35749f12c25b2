//! Absolute-minimizer constructions: the logarithmic cutoff in flat R^n whose
//! energy tends to zero, and the two-node scan on the circle.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::balanced_energy::{broken_transition, broken_transition_with, NodeConfig};
use crate::bvp_engine::simpson;
use crate::error::{Error, Result};
use crate::scalar_field::potential;
use crate::solver_1d::{min_energy, DirichletOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub n: u32,
    pub delta: f64,
    pub k: f64,
    pub eps: f64,
}

impl CutoffSpec {
    pub fn new(n: u32, delta: f64, k: f64, eps: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("cutoff dimension must be >= 2, got {n}")));
        }
        if !(delta > 0.0 && k > 1.0 && eps > 0.0) {
            return Err(Error::Domain(format!(
                "cutoff needs delta > 0, k > 1, eps > 0 (got {delta}, {k}, {eps})"
            )));
        }
        Ok(Self { n, delta, k, eps })
    }

    /// The planar choice delta = 1/(k ln k).
    pub fn planar(k: f64, eps: f64) -> Result<Self> {
        Self::new(2, 1.0 / (k * k.ln()), k, eps)
    }
}

/// Surface area of the unit sphere in R^n.
pub fn sphere_area(n: u32) -> f64 {
    n as f64 * ball_volume(n)
}

/// Volume of the unit ball in R^n.
pub fn ball_volume(n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * ball_volume(n - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffEnergy {
    pub gradient: f64,
    pub potential: f64,
    pub total: f64,
    /// Vol(B_{k delta}) / (4 eps).
    pub potential_bound: f64,
    /// eps * 2|S^{n-1}| / ln k + 2|B^n| / (eps k ln k), defined for n = 2.
    pub stated_bound: Option<f64>,
}

/// E_eps of f(r) = clamp(ln(r/delta)/ln k, 0, 1) in flat R^n.
pub fn cutoff_energy(spec: &CutoffSpec) -> CutoffEnergy {
    let CutoffSpec { n, delta, k, eps } = *spec;
    let lk = k.ln();
    let area = sphere_area(n);
    let radial = if n == 2 {
        lk
    } else {
        let m = (n - 2) as f64;
        delta.powf(m) * (k.powf(m) - 1.0) / m
    };
    let gradient = 0.5 * eps * area / (lk * lk) * radial;
    // r = delta k^s on the ramp, so r^{n-1} dr = delta^n k^{ns} ln k ds.
    let panels = 4000;
    let hs = 1.0 / panels as f64;
    let ramp: Vec<f64> = (0..=panels)
        .map(|i| {
            let s = i as f64 * hs;
            potential(s) * k.powf(n as f64 * s)
        })
        .collect();
    let ramp = simpson(&ramp, hs).expect("enough panels") * area * delta.powi(n as i32) * lk;
    let core = ball_volume(n) * delta.powi(n as i32) * potential(0.0);
    let potential_energy = (core + ramp) / eps;
    let stated_bound = (n == 2).then(|| eps * 2.0 * area / lk + 2.0 * ball_volume(n) / (eps * k * lk));
    CutoffEnergy {
        gradient,
        potential: potential_energy,
        total: gradient + potential_energy,
        potential_bound: ball_volume(n) * (k * delta).powi(n as i32) / (4.0 * eps),
        stated_bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub p: f64,
    pub be: f64,
    /// be - reference.
    pub gap: f64,
    /// Energy of the competitor vanishing on the short side of length
    /// min(p, 1-p): E(1 - delta) + delta/(4 eps).
    pub competitor: f64,
    /// |be - be_richardson|, the discretization error estimate of be.
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoNodeScan {
    pub eps: f64,
    pub rows: Vec<ScanRow>,
    pub dropped: Vec<f64>,
    /// Energy of the single-arc minimizer on an interval of length one.
    pub reference: f64,
    pub infimum: f64,
    pub all_above_reference: bool,
    /// be decreases from p = 1/2 toward both ends of the admissible grid.
    /// Neighbouring rows whose difference is below their combined error
    /// estimates count as ties.
    pub decreasing_toward_boundary: bool,
}

pub fn admissible_split(p: f64, eps: f64) -> bool {
    p > 0.0 && p < 1.0 && p.min(1.0 - p) >= 1.05 * PI * eps
}

pub fn two_node_scan(eps: f64, p_grid: &[f64]) -> Result<TwoNodeScan> {
    let (keep, dropped): (Vec<f64>, Vec<f64>) =
        p_grid.iter().partition(|&&p| admissible_split(p, eps));
    let reference = min_energy(eps, 1.0)?;
    let mut rows = keep
        .par_iter()
        .map(|&p| {
            let config = NodeConfig::new(vec![0.0, p])?;
            let be = broken_transition(&config, eps)?.be;
            let rich = DirichletOptions {
                richardson: true,
                ..DirichletOptions::default()
            };
            let be_rich = broken_transition_with(&config, eps, &rich, None)?.be;
            let short = p.min(1.0 - p);
            let competitor = min_energy(eps, 1.0 - short)? + short / (4.0 * eps);
            Ok(ScanRow {
                p,
                be,
                gap: be - reference,
                competitor,
                error_estimate: (be - be_rich).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.p.partial_cmp(&b.p).expect("finite p"));
    let infimum = rows.iter().map(|r| r.be).fold(f64::INFINITY, f64::min);
    let all_above_reference = rows.iter().all(|r| r.gap > 0.0);
    let left: Vec<&ScanRow> = rows.iter().filter(|r| r.p <= 0.5).collect();
    let right: Vec<&ScanRow> = rows.iter().filter(|r| r.p >= 0.5).collect();
    let falls = |inner: &ScanRow, outer: &ScanRow| {
        outer.be < inner.be + inner.error_estimate + outer.error_estimate
    };
    let ends_below = |inner: Option<&&ScanRow>, outer: Option<&&ScanRow>| match (inner, outer) {
        (Some(i), Some(o)) => o.be < i.be - i.error_estimate - o.error_estimate,
        _ => true,
    };
    let decreasing_toward_boundary = left.windows(2).all(|w| falls(w[1], w[0]))
        && right.windows(2).all(|w| falls(w[0], w[1]))
        && ends_below(left.last(), left.first())
        && ends_below(right.first(), right.last());
    Ok(TwoNodeScan {
        eps,
        rows,
        dropped,
        reference,
        infimum,
        all_above_reference,
        decreasing_toward_boundary,
    })
}
