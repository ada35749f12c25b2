//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantities underneath. Exits non-zero when any criterion fails.

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use bel_core::balanced_energy::{
    broken_transition_with, dirichlet_gap, dtn_v, first_variation_of, hessian_with,
    HessianOptions, NodeConfig,
};
use bel_core::bvp_engine::{derivative_4th, simpson};
use bel_core::elliptic_oracle::{lambda_of_eps, modulus_for};
use bel_core::experiments::{cutoff_record, gamma_sweep, index_rows, two_node_record};
use bel_core::nonexistence::two_node_scan;
use bel_core::profiles::{
    profile_constants_with, profile_kappa_ode, profile_omega, profile_rho, profile_tau_geom,
    profile_tau_lambda, profile_w, ProfileFunction, ProfileOptions,
};
use bel_core::scalar_field::{heteroclinic, interface_constant, potential, well_constants};
use bel_core::solver_1d::{linspace, lipschitz_scan, solve_dirichlet, DirichletOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Report {
    lines: Vec<String>,
    ok: bool,
}

impl Report {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            ok: true,
        }
    }

    fn check(&mut self, what: &str, pass: bool, detail: String) {
        self.ok &= pass;
        let mark = if pass { "ok  " } else { "FAIL" };
        self.lines.push(format!("    [{mark}] {what}: {detail}"));
    }
}

fn run(id: usize, title: &str, budget: Duration, body: impl FnOnce(&mut Report)) -> bool {
    let start = Instant::now();
    let mut r = Report::new();
    body(&mut r);
    let elapsed = start.elapsed();
    r.check(
        "runtime",
        elapsed <= budget,
        format!("{:.2} s (budget {} s)", elapsed.as_secs_f64(), budget.as_secs()),
    );
    println!("{} criterion {id}: {title}", if r.ok { "PASS" } else { "FAIL" });
    for l in &r.lines {
        println!("{l}");
    }
    r.ok
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fd_opts() -> DirichletOptions {
    DirichletOptions {
        richardson: true,
        ..DirichletOptions::default()
    }
}

fn criterion_1(r: &mut Report) {
    let pairs = [(1, 0.05), (2, 0.02), (3, 0.01)];
    match index_rows(&pairs, &DirichletOptions::default()) {
        Ok(table) => {
            for row in &table.rows {
                let expected = (2 * row.p - 1, 1);
                r.check(
                    &format!("p = {}, eps = {}", row.p, row.eps),
                    row.matches_theorem(),
                    format!(
                        "BE (index, nullity) = ({}, {}), AC = ({}, {}), expected {:?}",
                        row.be_index, row.be_nullity, row.ac_index, row.ac_nullity, expected
                    ),
                );
            }
            r.check("all rows computed", table.rows.len() == 3, format!("{} rows", table.rows.len()));
        }
        Err(e) => r.check("index table", false, e.to_string()),
    }
}

fn criterion_2(r: &mut Report) {
    let wc = well_constants();
    let h = 5e-4;
    let v: Vec<f64> = (0..=80_000).map(|j| heteroclinic(j as f64 * h).gdot.powi(2)).collect();
    let sigma0_q = simpson(&v, h).unwrap();
    let exact = SQRT_2 / 3.0;
    r.check("sigma0", (wc.sigma0 - exact).abs() <= 1e-12, format!("{:.17}", wc.sigma0));
    r.check(
        "sigma0 by quadrature",
        (sigma0_q - exact).abs() <= 1e-12,
        format!("{:.17} (error {:.2e})", sigma0_q, (sigma0_q - exact).abs()),
    );
    let s = -1.0 / (3.0 * SQRT_2);
    match profile_constants_with(&ProfileOptions::default()) {
        Ok(c) => {
            r.check("sigma1", (c.sigma1 - s).abs() <= 1e-7, format!("{:.12} (error {:.2e})", c.sigma1, (c.sigma1 - s).abs()));
            r.check("sigma2", (c.sigma2 - s).abs() <= 1e-7, format!("{:.12} (error {:.2e})", c.sigma2, (c.sigma2 - s).abs()));
            let sum = c.sigma1 + c.sigma2 + wc.sigma0;
            r.check("sigma1 + sigma2 + sigma0", sum.abs() <= 1e-7, format!("{sum:.2e}"));
        }
        Err(e) => r.check("profile constants", false, e.to_string()),
    }
    r.check("kappa0", (wc.kappa0 - 0.93123).abs() <= 1e-4, format!("{:.10}", wc.kappa0));
}

fn criterion_3(r: &mut Report) {
    let (length, eps) = (0.5, 0.02);
    let sol = solve_dirichlet(length, eps).unwrap();
    let h = sol.h();
    r.check("grid step", (h - eps / 50.0).abs() < 1e-15, format!("h = {h}"));
    let m = modulus_for(eps, length).unwrap();
    let scale = m.zero_spacing / length;
    let err = (0..=sol.u.intervals())
        .map(|i| (sol.u.values[i] - m.eval(sol.u.x(i) * scale)).abs())
        .fold(0.0, f64::max);
    r.check("sup error vs elliptic closed form", err <= 1e-8, format!("{err:.3e}"));
    let du = derivative_4th(&sol.u.values, h);
    let q: Vec<f64> = sol
        .u
        .values
        .iter()
        .zip(&du)
        .map(|(&u, &d)| eps * eps * d * d / 2.0 - potential(u))
        .collect();
    let spread = q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - q.iter().copied().fold(f64::INFINITY, f64::min);
    r.check("conserved quantity spread", spread <= 1e-6, format!("{spread:.3e}"));
    let lam = lambda_of_eps(eps, length).unwrap().lam;
    r.check("lam vs oracle", (sol.lam - lam).abs() <= 1e-8, format!("{:.6e} vs {:.6e}", sol.lam, lam));
}

fn criterion_4(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (count, eps) in [(2, 0.02), (4, 0.02), (6, 0.01)] {
        let config = NodeConfig::equally_spaced(count, 0.0).unwrap();
        let bt = broken_transition_with(&config, eps, &DirichletOptions::default(), None).unwrap();
        let worst = (0..5)
            .map(|_| {
                let f: Vec<f64> = (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
                first_variation_of(&bt, &f).abs()
            })
            .fold(0.0, f64::max);
        r.check(&format!("symmetric {count} nodes, eps = {eps}"), worst <= 1e-9, format!("max |FV| = {worst:.2e}"));
    }
    let eps = 0.05;
    let config = NodeConfig::new(vec![0.0, 0.4]).unwrap();
    let bt = broken_transition_with(&config, eps, &DirichletOptions::default(), None).unwrap();
    let base = broken_transition_with(&config, eps, &fd_opts(), None).unwrap();
    let n = base.intervals();
    let step = 1e-5;
    for k in 0..2 {
        let mut f = vec![0.0; 2];
        f[k] = 1.0;
        let fv = first_variation_of(&bt, &f);
        let be = |t: f64| {
            broken_transition_with(&config.perturbed(&f, t).unwrap(), eps, &fd_opts(), Some(&n))
                .unwrap()
                .be
        };
        let fd = (be(step) - be(-step)) / (2.0 * step);
        r.check(
            &format!("{{0, 0.4}}, eps = {eps}, node {k}"),
            rel(fv, fd) <= 1e-5,
            format!("FV = {fv:.10e}, FD = {fd:.10e}, rel {:.2e}", rel(fv, fd)),
        );
    }
}

/// Random unit direction with the rigid-rotation component removed; that
/// component changes neither BE nor the quadratic form.
fn mean_free_direction(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let mut f: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = f.iter().sum::<f64>() / m as f64;
    f.iter_mut().for_each(|x| *x -= mean);
    let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    f.iter_mut().for_each(|x| *x /= norm);
    f
}

fn criterion_5(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (p, eps) in [(1usize, 0.05), (2, 0.04)] {
        let config = NodeConfig::equally_spaced(2 * p, 0.0).unwrap();
        let h = hessian_with(&config, eps, &HessianOptions::default()).unwrap();
        let printed = eps * h.c * h.c * h.v;
        let dev = h.deviation_from_cycle_laplacian(printed);
        let ratio = h.q[(0, 0)] / (2.0 * printed);
        r.check(
            &format!("p = {p}, eps = {eps}: Q vs eps c^2 v * cycle Laplacian"),
            dev <= 1e-5,
            format!("max rel deviation {dev:.3e}; observed Q / (eps c^2 v L) = {ratio:.8}"),
        );
        let base = broken_transition_with(&config, eps, &fd_opts(), None).unwrap();
        let n = base.intervals();
        let step = 1e-4;
        for trial in 0..3 {
            let f = mean_free_direction(&mut rng, 2 * p);
            let be = |t: f64| {
                broken_transition_with(&config.perturbed(&f, t).unwrap(), eps, &fd_opts(), Some(&n))
                    .unwrap()
                    .be
            };
            let fd = (be(step) - 2.0 * base.be + be(-step)) / (step * step);
            let qf = h.quadratic_form(&f);
            r.check(
                &format!("p = {p}, eps = {eps}, direction {trial}: f^T Q f vs second difference"),
                rel(qf, fd) <= 1e-4,
                format!("{qf:.8e} vs {fd:.8e}, rel {:.2e}", rel(qf, fd)),
            );
        }
    }
}

fn criterion_6(r: &mut Report) {
    let length = 0.5;
    let grid = [0.05, 0.03, 0.02, 0.01];
    let v: Vec<f64> = grid.iter().map(|&e| dtn_v(e, length).unwrap()).collect();
    for (e, v) in grid.iter().zip(&v) {
        r.check(&format!("v({e}) < 0"), *v < 0.0, format!("v = {v:.6e}"));
    }
    let decreasing = v.windows(2).all(|w| w[1].abs() < w[0].abs());
    r.check("|v| decreasing", decreasing, format!("{:?}", v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()));
    let eps = grid[grid.len() - 1];
    let lam = lambda_of_eps(eps, length).unwrap().lam;
    match profile_omega() {
        Ok(omega) => {
            let predicted = lam * omega.slope0 / eps;
            r.check(
                "v vs lam * omega'(0) / eps",
                rel(v[v.len() - 1], predicted) <= 0.2,
                format!("{:.4e} vs {predicted:.4e}", v[v.len() - 1]),
            );
        }
        Err(e) => r.check(
            "v vs lam * omega'(0) / eps",
            false,
            format!("omega unavailable ({e}); observed v * eps / lam = {:.6}", v[v.len() - 1] * eps / lam),
        ),
    }
    for &e in &grid {
        let g = dirichlet_gap(e, length).unwrap();
        r.check(&format!("Dirichlet gap eps = {e}"), g > 0.0, format!("{g:.6e}"));
    }
}

fn criterion_7(r: &mut Report) {
    let config = NodeConfig::new(vec![0.0, 0.5]).unwrap();
    let grid = [0.02, 0.01, 0.005];
    let sweep = gamma_sweep(&config, &grid, &DirichletOptions::default()).unwrap();
    let target = 2.0 * interface_constant();
    r.check(
        "extrapolated limit",
        (sweep.limit - target).abs() <= 1e-3,
        format!("{:.9} vs {target:.9} (printed sigma0 * P = {:.6})", sweep.limit, 2.0 * well_constants().sigma0),
    );
    for ((e, b), c) in grid.iter().zip(&sweep.be).zip(&sweep.comparator) {
        r.check(&format!("BE <= E(g_k) at eps = {e}"), b <= c, format!("{b:.9} <= {c:.9}"));
    }
}

fn criterion_8(r: &mut Report) {
    let eps = 0.02;
    let grid = linspace(0.05, 0.95, 37);
    let scan = two_node_scan(eps, &grid).unwrap();
    r.check(
        "BE({0,p}) > E(u_0)",
        scan.all_above_reference,
        format!(
            "{} admissible points, min gap {:.6e}, reference {:.9}",
            scan.rows.len(),
            scan.rows.iter().map(|x| x.gap).fold(f64::INFINITY, f64::min),
            scan.reference
        ),
    );
    r.check(
        "gap decreasing toward the admissibility boundary",
        scan.decreasing_toward_boundary,
        format!("dropped {:?}", scan.dropped),
    );
    let record = two_node_record(eps, &[0.5, 0.9]).unwrap();
    let be = record.results["be"].as_array().unwrap();
    let (b5, b9) = (be[0].as_f64().unwrap(), be[1].as_f64().unwrap());
    r.check("BE({0,0.9}) < BE({0,0.5})", b9 < b5, format!("{b9:.9} < {b5:.9}"));
    let cutoff = cutoff_record(0.1).unwrap();
    for a in &cutoff.assertions {
        r.check(&a.detail, a.passed, a.tag.clone());
    }
}

fn profile_checks(r: &mut Report, name: &str, p: &ProfileFunction) {
    let res = p.residual();
    let last = p.values()[p.values().len() - 1];
    r.check(
        name,
        res <= 1e-6 && p.values()[0] == 0.0 && last.abs() < 1e-8,
        format!("residual {res:.2e}, f(0) = {}, f(T) = {last:.2e}", p.values()[0]),
    );
}

fn criterion_9(r: &mut Report) {
    for (name, p) in [
        ("w", profile_w()),
        ("rho", profile_rho()),
        ("tau_geom", profile_tau_geom()),
        ("kappa_ode", profile_kappa_ode()),
        ("tau_lambda", profile_tau_lambda()),
        ("omega", profile_omega()),
    ] {
        match p {
            Ok(p) => profile_checks(r, name, &p),
            Err(e) => r.check(name, false, e.to_string()),
        }
    }
    match profile_tau_lambda() {
        Ok(t) => {
            let ok = [0.5, 1.0, 3.0].iter().all(|&x| t.at(x) > 0.0);
            r.check("tau_lambda > 0", ok, format!("{:.4e}", t.at(1.0)));
        }
        Err(e) => r.check("tau_lambda > 0", false, e.to_string()),
    }
    match profile_omega() {
        Ok(w) => r.check("omega'(0) < 0", w.slope0 < 0.0, format!("{:.6e}", w.slope0)),
        Err(e) => r.check("omega'(0) < 0", false, e.to_string()),
    }
    let base = profile_constants_with(&ProfileOptions::default()).unwrap();
    let long = profile_constants_with(&ProfileOptions { t_max: 80.0, h: 1e-3 }).unwrap();
    let fine = profile_constants_with(&ProfileOptions { t_max: 40.0, h: 5e-4 }).unwrap();
    let drift = |a: &bel_core::profiles::ProfileConstants, b: &bel_core::profiles::ProfileConstants| {
        let mut d = (a.sigma1 - b.sigma1)
            .abs()
            .max((a.sigma2 - b.sigma2).abs())
            .max((a.wdot0 - b.wdot0).abs());
        if let (Some(x), Some(y)) = (a.omegadot0, b.omegadot0) {
            d = d.max((x - y).abs());
        }
        d
    };
    let dt = drift(&base, &long);
    let dh = drift(&base, &fine);
    r.check("T doubling", dt <= 1e-8, format!("max change {dt:.2e}"));
    r.check("h halving", dh <= 1e-8, format!("max change {dh:.2e}"));
}

fn criterion_10(r: &mut Report) {
    let coarse = lipschitz_scan(0.5, &linspace(0.01, 0.1, 20)).unwrap();
    let fine = lipschitz_scan(0.5, &linspace(0.01, 0.1, 39)).unwrap();
    r.check(
        "quotients bounded",
        coarse.max_quotient.is_finite() && fine.max_quotient.is_finite(),
        format!("max quotient {:.6} (20 points), {:.6} (39 points)", coarse.max_quotient, fine.max_quotient),
    );
    let drift = rel(fine.max_quotient, coarse.max_quotient);
    r.check("drift under refinement", drift < 0.05, format!("{:.3}%", 100.0 * drift));
    let pair = lipschitz_scan(0.5, &[0.05, 0.051]).unwrap();
    let dg = (pair.energy[1] - pair.energy[0]).abs();
    r.check(
        "adjacent eps self-consistency",
        dg <= coarse.max_quotient * 1e-3,
        format!("|dg| = {dg:.3e} <= {:.3e}", coarse.max_quotient * 1e-3),
    );
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run(1, "Morse index and nullity, BE Hessian vs AC spectrum", s(30), criterion_1),
        run(2, "constants", s(5), criterion_2),
        run(3, "oracle equivalence and conserved quantity", s(5), criterion_3),
        run(4, "first variation", s(10), criterion_4),
        run(5, "second variation structure", s(60), criterion_5),
        run(6, "sign results and Dirichlet gap", s(20), criterion_6),
        run(7, "Gamma limit and recovery comparator", s(30), criterion_7),
        run(8, "non-existence", s(20), criterion_8),
        run(9, "profile suite", s(10), criterion_9),
        run(10, "Lipschitz scan", s(20), criterion_10),
    ];
    let passed = results.iter().filter(|&&x| x).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
