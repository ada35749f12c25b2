//! Reproducible experiment records and the sweeps behind the `bel` binary.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::Value;

use crate::balanced_energy::{
    ac_spectrum, broken_transition_with, dirichlet_gap, first_variation_of, hessian, NodeConfig,
};
use crate::bvp_engine::simpson;
use crate::elliptic_oracle::modulus_for;
use crate::error::Result;
use crate::nonexistence::{cutoff_energy, two_node_scan, CutoffSpec};
use crate::profiles::{
    kappa_lambda, profile_constants_with, profile_kappa_ode_with, profile_omega_with,
    profile_rho_with, profile_tau_geom_with, profile_tau_lambda_with, profile_w_with,
    ProfileOptions,
};
use crate::scalar_field::{heteroclinic, interface_constant, potential};
use crate::solver_1d::{lipschitz_scan, nodal_solution_with, solve_dirichlet_with, DirichletOptions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A real as a JSON number with 17 significant digits; non-finite values
/// become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str(&format!("{x:.16e}")).expect("formatted float is valid JSON")
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub tag: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub meta: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
}

impl ExperimentRecord {
    pub fn new(experiment: &str) -> Self {
        let mut meta = BTreeMap::new();
        meta.insert("version".into(), Value::String(VERSION.into()));
        Self {
            experiment: experiment.into(),
            params: BTreeMap::new(),
            results: BTreeMap::new(),
            meta,
            assertions: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: Value) -> &mut Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn result(&mut self, key: &str, value: Value) -> &mut Self {
        self.results.insert(key.into(), value);
        self
    }

    pub fn meta(&mut self, key: &str, value: Value) -> &mut Self {
        self.meta.insert(key.into(), value);
        self
    }

    pub fn check(&mut self, tag: &str, passed: bool, detail: impl Into<String>) -> &mut Self {
        self.assertions.push(Assertion {
            tag: tag.into(),
            passed,
            detail: detail.into(),
        });
        self
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    fn dirichlet_meta(&mut self, opts: &DirichletOptions) -> &mut Self {
        self.meta("grid_per_eps", Value::from(opts.grid_per_eps as u64))
            .meta("tol", num(opts.tol))
            .meta("scheme", Value::String(format!("{:?}", opts.scheme)))
    }

    pub fn to_value(&self) -> Value {
        let map = |m: &BTreeMap<String, Value>| Value::Object(m.clone().into_iter().collect());
        let assertions = self
            .assertions
            .iter()
            .map(|a| {
                serde_json::json!({"tag": a.tag, "passed": a.passed, "detail": a.detail})
            })
            .collect();
        serde_json::json!({
            "experiment": self.experiment,
            "params": map(&self.params),
            "results": map(&self.results),
            "meta": map(&self.meta),
            "assertions": Value::Array(assertions),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("record serializes");
        s.push('\n');
        s
    }
}

/// Parses a record and drops the version string, for golden comparisons.
pub fn strip_version(json: &str) -> serde_json::Result<Value> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Some(meta) = v.get_mut("meta").and_then(Value::as_object_mut) {
        meta.remove("version");
    }
    Ok(v)
}

/// Comma-separated table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// Gamma sweep

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSweep {
    pub eps: Vec<f64>,
    pub be: Vec<f64>,
    pub comparator: Vec<f64>,
    /// Two-point Richardson value from the two smallest eps, assuming a
    /// first-order correction in eps.
    pub limit: f64,
    /// node count times the integral of sqrt(2W) over [-1, 1].
    pub target: f64,
    pub deviation: f64,
    pub comparator_ok: bool,
}

/// Smooth step equal to 0 for s <= 0 and 1 for s >= 1, with its derivative.
fn smooth_step(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    let da = a / (s * s);
    let db = -b / ((1.0 - s) * (1.0 - s));
    let v = a / (a + b);
    (v, (da * b - a * db) / ((a + b) * (a + b)))
}

/// Energy of the truncated heteroclinic glued at every node:
/// g(d/eps) chi(d) + (1 - chi(d)) sgn(d), d the signed distance to the nearest
/// node, chi = 1 for |d| < rho/4 and 0 for |d| > rho/2,
/// rho = min(1/4, shortest arc / 2).
pub fn comparator_energy(config: &NodeConfig, eps: f64) -> Result<f64> {
    let arcs = config.arc_lengths();
    let rho = 0.25_f64.min(0.5 * arcs.iter().copied().fold(f64::INFINITY, f64::min));
    let (inner, outer) = (rho / 4.0, rho / 2.0);
    let intervals = ((100.0 / eps).ceil() as usize).max(20_000);
    let intervals = intervals + intervals % 2;
    let h = 1.0 / intervals as f64;
    let x0 = config.nodes[0];
    let density: Vec<f64> = (0..=intervals)
        .map(|j| {
            let x = x0 + j as f64 * h;
            let mut best = (f64::INFINITY, 0usize, 0.0);
            for (i, &node) in config.nodes.iter().enumerate() {
                let d = (x - node + 0.5).rem_euclid(1.0) - 0.5;
                if d.abs() < best.0 {
                    best = (d.abs(), i, d);
                }
            }
            let (_, i, d) = best;
            let orient = config.signs[i] as f64;
            let (chi, dchi) = smooth_step((outer - d.abs()) / (outer - inner));
            let dchi = -dchi * d.signum() / (outer - inner);
            let het = heteroclinic(d / eps);
            let sgn = if d >= 0.0 { 1.0 } else { -1.0 };
            let value = orient * (het.g * chi + (1.0 - chi) * sgn);
            let deriv = orient * (het.gdot / eps * chi + (het.g - sgn) * dchi);
            0.5 * eps * deriv * deriv + potential(value) / eps
        })
        .collect();
    simpson(&density, h)
}

pub fn gamma_sweep(config: &NodeConfig, eps_grid: &[f64], opts: &DirichletOptions) -> Result<GammaSweep> {
    assert!(eps_grid.len() >= 2, "the sweep needs at least two eps values");
    let rows = eps_grid
        .par_iter()
        .map(|&e| {
            let be = broken_transition_with(config, e, opts, None)?.be;
            Ok((be, comparator_energy(config, e)?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let be: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let comparator: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut order: Vec<usize> = (0..eps_grid.len()).collect();
    order.sort_by(|&a, &b| eps_grid[a].partial_cmp(&eps_grid[b]).expect("finite eps"));
    let (i2, i1) = (order[0], order[1]);
    let r = eps_grid[i1] / eps_grid[i2];
    let limit = (r * be[i2] - be[i1]) / (r - 1.0);
    let target = config.len() as f64 * interface_constant();
    Ok(GammaSweep {
        eps: eps_grid.to_vec(),
        comparator_ok: be.iter().zip(&comparator).all(|(b, c)| b <= c),
        be,
        comparator,
        limit,
        target,
        deviation: (limit - target).abs(),
    })
}

// ---------------------------------------------------------------------------
// Index table

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRow {
    pub p: usize,
    pub eps: f64,
    pub be_index: usize,
    pub be_nullity: usize,
    pub ac_index: usize,
    pub ac_nullity: usize,
    pub v: f64,
    pub c: f64,
    pub q_scale: f64,
    pub ac_eigenvalues: Vec<f64>,
    pub ac_threshold: f64,
}

impl IndexRow {
    pub fn matches_theorem(&self) -> bool {
        let expected = (2 * self.p - 1, 1);
        (self.be_index, self.be_nullity) == expected && (self.ac_index, self.ac_nullity) == expected
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRow {
    pub p: usize,
    pub eps: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IndexTable {
    pub rows: Vec<IndexRow>,
    pub skipped: Vec<SkippedRow>,
}

pub fn index_row(p: usize, eps: f64, opts: &DirichletOptions) -> Result<IndexRow> {
    let config = NodeConfig::equally_spaced(2 * p, 0.0)?;
    let h = hessian(&config, eps)?;
    let sol = nodal_solution_with(p, eps, opts)?;
    let ac = ac_spectrum(&sol, 2 * p + 2)?;
    Ok(IndexRow {
        p,
        eps,
        be_index: h.index,
        be_nullity: h.nullity,
        ac_index: ac.index(),
        ac_nullity: ac.nullity(),
        v: h.v,
        c: h.c,
        q_scale: h.q[(0, 0)] / 2.0,
        ac_eigenvalues: ac.report.eigenvalues.clone(),
        ac_threshold: ac.report.zero_threshold,
    })
}

/// All (p, eps) pairs of the two lists; pairs with eps >= 1/(2 p pi) are
/// skipped with a reason.
pub fn index_table(p_list: &[usize], eps_list: &[f64], opts: &DirichletOptions) -> Result<IndexTable> {
    let pairs: Vec<(usize, f64)> = p_list
        .iter()
        .flat_map(|&p| eps_list.iter().map(move |&e| (p, e)))
        .collect();
    index_rows(&pairs, opts)
}

pub fn index_rows(pairs: &[(usize, f64)], opts: &DirichletOptions) -> Result<IndexTable> {
    let mut table = IndexTable::default();
    let mut work = Vec::new();
    for &(p, eps) in pairs {
        if p == 0 || eps >= 1.0 / (2.0 * p as f64 * PI) {
            table.skipped.push(SkippedRow {
                p,
                eps,
                reason: "eps ≥ 1/(2pπ)".into(),
            });
        } else {
            work.push((p, eps));
        }
    }
    table.rows = work
        .par_iter()
        .map(|&(p, eps)| index_row(p, eps, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(table)
}

// ---------------------------------------------------------------------------
// Records for the CLI subcommands

pub fn solve_record(length: f64, eps: f64, opts: &DirichletOptions) -> Result<ExperimentRecord> {
    let sol = solve_dirichlet_with(length, eps, opts)?;
    let m = modulus_for(eps, length)?;
    let scale = m.zero_spacing / length;
    let oracle_err = (0..=sol.u.intervals())
        .map(|i| (sol.u.values[i] - m.eval(sol.u.x(i) * scale)).abs())
        .fold(0.0, f64::max);
    let mut rec = ExperimentRecord::new("solve");
    rec.param("L", num(length)).param("eps", num(eps));
    rec.result("lam", num(sol.lam))
        .result("lam_oracle", num(m.lam()))
        .result("energy", num(sol.energy))
        .result("slope_left", num(sol.slope_left))
        .result("slope_right", num(sol.slope_right))
        .result("slope_fd_left", num(sol.slope_fd.0))
        .result("max_u", num(sol.max_value()))
        .result("newton_residual", num(sol.residual))
        .result("newton_iterations", Value::from(sol.iterations as u64))
        .result("oracle_sup_error", num(oracle_err));
    rec.dirichlet_meta(opts).meta("h", num(sol.h()));
    rec.check(
        "ThmBO",
        sol.u.values[1..sol.u.values.len() - 1].iter().all(|&v| v > 0.0),
        "solution positive in the interior",
    );
    Ok(rec)
}

pub fn be_record(config: &NodeConfig, eps_list: &[f64], opts: &DirichletOptions) -> Result<ExperimentRecord> {
    let be = eps_list
        .par_iter()
        .map(|&e| Ok(broken_transition_with(config, e, opts, None)?.be))
        .collect::<Result<Vec<f64>>>()?;
    let mut rec = ExperimentRecord::new("be");
    rec.param("nodes", nums(&config.nodes)).param("eps", nums(eps_list));
    rec.result("be", nums(&be))
        .result("arc_lengths", nums(&config.arc_lengths()));
    rec.dirichlet_meta(opts);
    Ok(rec)
}

/// First variation along each node displacement, next to a centered
/// difference of BE at step 1e-5 with the arc grids held fixed.
pub fn variation_record(config: &NodeConfig, eps: f64, opts: &DirichletOptions) -> Result<ExperimentRecord> {
    let fd_opts = DirichletOptions {
        richardson: true,
        ..*opts
    };
    let bt = broken_transition_with(config, eps, opts, None)?;
    let base = broken_transition_with(config, eps, &fd_opts, None)?;
    let intervals = base.intervals();
    let m = config.len();
    let step = 1e-5;
    let mut fv = Vec::with_capacity(m);
    let mut fd = Vec::with_capacity(m);
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        fv.push(first_variation_of(&bt, &e));
        let plus = broken_transition_with(&config.perturbed(&e, step)?, eps, &fd_opts, Some(&intervals))?.be;
        let minus = broken_transition_with(&config.perturbed(&e, -step)?, eps, &fd_opts, Some(&intervals))?.be;
        fd.push((plus - minus) / (2.0 * step));
    }
    let mut rec = ExperimentRecord::new("variation");
    rec.param("nodes", nums(&config.nodes)).param("eps", num(eps));
    rec.result("first_variation", nums(&fv))
        .result("finite_difference", nums(&fd))
        .result("be", num(bt.be));
    rec.dirichlet_meta(opts).meta("fd_step", num(step));
    let worst = fv
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).abs() - 1e-5 * b.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    rec.check(
        "FirstVariationFormula",
        worst <= 1e-9,
        "first variation matches the centered difference within 1e-5 relative (1e-9 absolute floor)",
    );
    Ok(rec)
}

pub fn index_record(p_list: &[usize], eps_list: &[f64], opts: &DirichletOptions) -> Result<ExperimentRecord> {
    let table = index_table(p_list, eps_list, opts)?;
    let mut rec = ExperimentRecord::new("index");
    rec.param("p", Value::Array(p_list.iter().map(|&p| Value::from(p as u64)).collect()))
        .param("eps", nums(eps_list));
    if let [row] = table.rows.as_slice() {
        rec.result("index", Value::from(row.be_index as u64))
            .result("nullity", Value::from(row.be_nullity as u64));
    }
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "p": r.p, "eps": num(r.eps),
                "be_index": r.be_index, "be_nullity": r.be_nullity,
                "ac_index": r.ac_index, "ac_nullity": r.ac_nullity,
                "v": num(r.v), "c": num(r.c),
                "ac_eigenvalues": nums(&r.ac_eigenvalues),
                "ac_zero_threshold": num(r.ac_threshold),
            })
        })
        .collect();
    let skipped: Vec<Value> = table
        .skipped
        .iter()
        .map(|s| serde_json::json!({"p": s.p, "eps": num(s.eps), "reason": s.reason}))
        .collect();
    rec.result("rows", Value::Array(rows))
        .result("skipped", Value::Array(skipped));
    rec.dirichlet_meta(opts);
    for r in &table.rows {
        rec.check(
            "S1MorseIndexTheorem",
            (r.be_index, r.be_nullity) == (2 * r.p - 1, 1),
            format!("p = {}, eps = {}: BE index {} nullity {}", r.p, r.eps, r.be_index, r.be_nullity),
        );
        rec.check(
            "EqualityOfIndicesTheorem",
            (r.be_index, r.be_nullity) == (r.ac_index, r.ac_nullity),
            format!("p = {}, eps = {}: AC index {} nullity {}", r.p, r.eps, r.ac_index, r.ac_nullity),
        );
    }
    Ok(rec)
}

pub fn gamma_record(config: &NodeConfig, eps_list: &[f64], opts: &DirichletOptions) -> Result<ExperimentRecord> {
    let sweep = gamma_sweep(config, eps_list, opts)?;
    let mut rec = ExperimentRecord::new("gamma-sweep");
    rec.param("nodes", nums(&config.nodes)).param("eps", nums(eps_list));
    rec.result("be", nums(&sweep.be))
        .result("comparator", nums(&sweep.comparator))
        .result("limit", num(sweep.limit))
        .result("target", num(sweep.target))
        .result("deviation", num(sweep.deviation))
        .result("per_interface_constant", num(interface_constant()))
        .result(
            "printed_constant_limit",
            num(config.len() as f64 * crate::scalar_field::well_constants().sigma0),
        );
    rec.dirichlet_meta(opts).meta("extrapolation", Value::String("richardson-first-order".into()));
    rec.check(
        "GammaConSimple",
        sweep.deviation <= 1e-3,
        format!("limit {} vs {}", sweep.limit, sweep.target),
    );
    rec.check(
        "GammaConSimple",
        sweep.comparator_ok,
        "BE <= comparator energy at every eps",
    );
    Ok(rec)
}

pub fn two_node_record(eps: f64, p_grid: &[f64]) -> Result<ExperimentRecord> {
    let scan = two_node_scan(eps, p_grid)?;
    let mut rec = ExperimentRecord::new("two-node-scan");
    rec.param("eps", num(eps)).param("p", nums(p_grid));
    let p: Vec<f64> = scan.rows.iter().map(|r| r.p).collect();
    let be: Vec<f64> = scan.rows.iter().map(|r| r.be).collect();
    let gap: Vec<f64> = scan.rows.iter().map(|r| r.gap).collect();
    let comp: Vec<f64> = scan.rows.iter().map(|r| r.competitor).collect();
    rec.result("p_admissible", nums(&p))
        .result("be", nums(&be))
        .result("gap", nums(&gap))
        .result("competitor", nums(&comp))
        .result("dropped", nums(&scan.dropped))
        .result("reference", num(scan.reference))
        .result("infimum", num(scan.infimum))
        .result(
            "reference_interpretation",
            Value::String("single-arc minimizer on an interval of length 1".into()),
        );
    rec.check(
        "NoAbsoluteMinimizerS1",
        scan.all_above_reference,
        "BE({0,p}) exceeds the reference at every admissible p",
    );
    rec.check(
        "NoAbsoluteMinimizerS1",
        scan.decreasing_toward_boundary,
        "BE decreases toward the admissibility boundary",
    );
    Ok(rec)
}

pub fn cutoff_record(eps: f64) -> Result<ExperimentRecord> {
    let mut rec = ExperimentRecord::new("cutoff-nd");
    rec.param("eps", num(eps));
    let deltas = [1e-2, 1e-3, 1e-4];
    let three: Vec<f64> = deltas
        .iter()
        .map(|&d| Ok(cutoff_energy(&CutoffSpec::new(3, d, 10.0, eps)?).total))
        .collect::<Result<_>>()?;
    let ks = [1e2, 1e4, 1e6];
    let planar: Vec<_> = ks
        .iter()
        .map(|&k| Ok(cutoff_energy(&CutoffSpec::planar(k, eps)?)))
        .collect::<Result<_>>()?;
    let two: Vec<f64> = planar.iter().map(|e| e.total).collect();
    let bound: Vec<f64> = planar.iter().map(|e| e.stated_bound.unwrap_or(f64::NAN)).collect();
    rec.result("n3_delta", nums(&deltas))
        .result("n3_energy", nums(&three))
        .result("n2_k", nums(&ks))
        .result("n2_energy", nums(&two))
        .result("n2_stated_bound", nums(&bound));
    rec.meta("n3_k", num(10.0));
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    rec.check("NoAbsoluteMinimizergeq2", decreasing(&three), "n = 3 energy decreases as delta -> 0");
    rec.check("NoAbsoluteMinimizergeq2", decreasing(&two), "n = 2 energy decreases as k grows");
    rec.check(
        "NoAbsoluteMinimizergeq2",
        two.iter().zip(&bound).all(|(e, b)| e <= b),
        "n = 2 energy below the stated bound",
    );
    Ok(rec)
}

pub fn gap_record(length: f64, eps_list: &[f64]) -> Result<ExperimentRecord> {
    let gaps = eps_list
        .par_iter()
        .map(|&e| dirichlet_gap(e, length))
        .collect::<Result<Vec<f64>>>()?;
    let mut rec = ExperimentRecord::new("gap-sweep");
    rec.param("L", num(length)).param("eps", nums(eps_list));
    rec.result("gap", nums(&gaps));
    rec.check(
        "LinearizedOperatorInverseThm",
        gaps.iter().all(|&g| g > 0.0),
        "Dirichlet gap positive for every eps",
    );
    Ok(rec)
}

pub fn lipschitz_record(length: f64, eps_grid: &[f64]) -> Result<ExperimentRecord> {
    let scan = lipschitz_scan(length, eps_grid)?;
    let mut rec = ExperimentRecord::new("lipschitz");
    rec.param("L", num(length)).param("eps", nums(eps_grid));
    rec.result("energy", nums(&scan.energy))
        .result("quotients", nums(&scan.quotients))
        .result("max_quotient", num(scan.max_quotient))
        .result("monotone_decreasing", Value::Bool(scan.monotone_decreasing));
    rec.check(
        "MinEnergyContinuousLemma",
        scan.max_quotient.is_finite(),
        "difference quotients finite",
    );
    Ok(rec)
}

/// Profiles sampled every `stride` grid points, followed by a constants block.
pub fn profiles_csv(opts: &ProfileOptions, stride: usize) -> Result<String> {
    let w = profile_w_with(opts)?;
    let rho = profile_rho_with(opts)?;
    let tau = profile_tau_geom_with(opts)?;
    let kode = profile_kappa_ode_with(opts)?;
    let tau_l = profile_tau_lambda_with(opts).ok();
    let omega = profile_omega_with(opts).ok();
    let mut table = Table::new(&[
        "t", "g", "w", "rho", "tau_geom", "tau_lambda", "kappa_lambda", "omega", "kappa_ode",
    ]);
    let opt = |p: &Option<crate::profiles::ProfileFunction>, j: usize| {
        p.as_ref().map(|p| fmt(p.values()[j])).unwrap_or_default()
    };
    for j in (0..opts.points()).step_by(stride.max(1)) {
        let t = opts.t(j);
        table.push(vec![
            fmt(t),
            fmt(heteroclinic(t).g),
            fmt(w.values()[j]),
            fmt(rho.values()[j]),
            fmt(tau.values()[j]),
            opt(&tau_l, j),
            fmt(kappa_lambda(t)),
            opt(&omega, j),
            fmt(kode.values()[j]),
        ]);
    }
    let c = profile_constants_with(opts)?;
    let mut out = table.to_csv();
    out.push('\n');
    out.push_str("constant,value\n");
    out.push_str(&format!("sigma0,{}\n", fmt(crate::scalar_field::well_constants().sigma0)));
    out.push_str(&format!("sigma1,{}\n", fmt(c.sigma1)));
    out.push_str(&format!("sigma2,{}\n", fmt(c.sigma2)));
    out.push_str(&format!("wdot0,{}\n", fmt(c.wdot0)));
    out.push_str(&format!(
        "omegadot0,{}\n",
        c.omegadot0.map(fmt).unwrap_or_default()
    ));
    out.push_str(&format!("kappa0,{}\n", fmt(crate::scalar_field::well_constants().kappa0)));
    out.push_str(&format!("T,{}\n", fmt(opts.t_max)));
    out.push_str(&format!("h,{}\n", fmt(opts.h)));
    Ok(out)
}

pub fn profiles_record(opts: &ProfileOptions) -> Result<ExperimentRecord> {
    let c = profile_constants_with(opts)?;
    let wc = crate::scalar_field::well_constants();
    let mut rec = ExperimentRecord::new("profiles");
    rec.param("T", num(opts.t_max)).param("h", num(opts.h));
    rec.result("sigma0", num(wc.sigma0))
        .result("sigma1", num(c.sigma1))
        .result("sigma2", num(c.sigma2))
        .result("wdot0", num(c.wdot0))
        .result("omegadot0", c.omegadot0.map(num).unwrap_or(Value::Null))
        .result("kappa0", num(wc.kappa0));
    let tau_err = profile_tau_lambda_with(opts).err().map(|e| e.to_string());
    rec.result(
        "tau_lambda_status",
        Value::String(tau_err.clone().unwrap_or_else(|| "ok".into())),
    );
    rec.check(
        "ReducingBE",
        (c.sigma1 + c.sigma2 + wc.sigma0).abs() < 1e-7,
        "sigma1 + sigma2 = -sigma0",
    );
    rec.check(
        "ComputingUdotX",
        c.omegadot0.is_some_and(|x| x < 0.0),
        tau_err.unwrap_or_else(|| "omega'(0) < 0".into()),
    );
    Ok(rec)
}
