//! Acceptance criteria. Runs sequentially, prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use eveguess::analysis::{
    critical_eps_entropy, critical_eps_guessing, scatter, scatter_bound, table1_scan, CriticalOptions,
};
use eveguess::keyrate::binary_entropy;
use eveguess::{
    closed_form_pe_bb84, closed_form_pe_sixstate, maximize_guessing, secure_key_rate, standard_bb84,
    standard_sixstate, OptimizerOptions, ProtocolConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).round() / s
}

/// Largest `|numeric - closed|` over a symmetric-rate grid.
fn oracle_gap(config: &ProtocolConfig, grid: &[f64], closed: fn(f64) -> eveguess::Result<f64>) -> f64 {
    let opts = OptimizerOptions::default();
    grid.iter()
        .map(|&e| {
            let numeric = maximize_guessing(config, &vec![e; config.t()], &opts).unwrap().p_e_star;
            (numeric - closed(e).unwrap()).abs()
        })
        .fold(0.0, f64::max)
}

fn closed_form_grid_match() -> Outcome {
    let start = Instant::now();
    let bb_grid: Vec<f64> = (0..=12).map(|i| 0.02 * i as f64).collect();
    let six_grid: Vec<f64> = (0..=11).map(|i| 0.03 * i as f64).collect();
    let bb = oracle_gap(&standard_bb84(), &bb_grid, closed_form_pe_bb84);
    let six = oracle_gap(&standard_sixstate(), &six_grid, closed_form_pe_sixstate);
    let took = start.elapsed();
    outcome(
        bb < 1e-3 && six < 1e-3 && took < Duration::from_secs(120),
        format!("max |numeric - closed| bb84 {bb:.2e}, six-state {six:.2e} (< 1e-3); {took:.1?} (< 2 min)"),
    )
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let phi1 = [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2];
    let expected = [
        (10.00, 11.00, -1.00, 0.9000),
        (11.06, 11.61, -0.55, 0.8894),
        (14.64, 12.62, 2.02, 0.8536),
        (11.06, 11.61, -0.55, 0.8894),
        (10.00, 11.00, -1.00, 0.9000),
    ];
    let rows = match table1_scan(&phi1, &CriticalOptions::default()) {
        Ok(rows) => rows,
        Err(e) => return outcome(false, format!("scan failed: {e}")),
    };
    let took = start.elapsed();
    let mut worst_pp: f64 = 0.0;
    let mut worst_pe: f64 = 0.0;
    let mut cells = Vec::new();
    for (r, &(cr, tilde, delta, pe)) in rows.iter().zip(&expected) {
        worst_pp = worst_pp
            .max((100.0 * r.eps_cr - cr).abs())
            .max((100.0 * r.eps_tilde_cr - tilde).abs())
            .max((100.0 * r.delta_eps - delta).abs());
        worst_pe = worst_pe.max((r.pe_star_at_crossing - pe).abs());
        cells.push(format!(
            "({:.2}, {:.2}, {:+.2}, {:.4})",
            100.0 * r.eps_cr,
            100.0 * r.eps_tilde_cr,
            100.0 * r.delta_eps,
            r.pe_star_at_crossing
        ));
    }
    let mirror = |a: usize, b: usize| {
        let (x, y) = (&rows[a], &rows[b]);
        [
            x.eps_cr - y.eps_cr,
            x.eps_tilde_cr - y.eps_tilde_cr,
            x.delta_eps - y.delta_eps,
            x.pe_star_at_crossing - y.pe_star_at_crossing,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
    };
    let asym = mirror(0, 4).max(mirror(1, 3));
    outcome(
        worst_pp <= 0.05 && worst_pe <= 5e-4 && asym < 1e-4 && took < Duration::from_secs(600),
        format!(
            "{}; worst {worst_pp:.3} pp (<= 0.05), P_E* {worst_pe:.1e} (<= 5e-4), mirror {asym:.1e} (< 1e-4); {took:.1?} (< 10 min)",
            cells.join(" ")
        ),
    )
}

fn key_rate_reductions() -> Outcome {
    let h = |x: f64| binary_entropy(x).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let e = 0.01 * i as f64;
        let bb = secure_key_rate(&standard_bb84(), &[e, e]).unwrap().rate;
        let six = secure_key_rate(&standard_sixstate(), &[e; 3]).unwrap().rate;
        let x = 1.5 * e;
        worst = worst
            .max((bb - (1.0 - 2.0 * h(e)).max(0.0)).abs())
            .max((six - (1.0 - h(x) - x * 3f64.log2()).max(0.0)).abs());
    }
    let r_bb = secure_key_rate(&standard_bb84(), &[0.1, 0.1]).unwrap().rate;
    let e6 = (5.0 - 2.0 * 3f64.sqrt()) / 13.0;
    let r_six = secure_key_rate(&standard_sixstate(), &[e6; 3]).unwrap().rate;
    outcome(
        worst < 1e-6 && (r_bb - 0.062).abs() <= 1e-3 && (r_six - 0.045).abs() <= 1e-3,
        format!("grid worst {worst:.1e} (< 1e-6); R_bb84(0.10) = {r_bb:.4}, R_six(eps'_cr) = {r_six:.4}"),
    )
}

fn critical_crossings() -> Outcome {
    let opts = CriticalOptions::default();
    let g_bb = critical_eps_guessing(&standard_bb84(), &opts).unwrap();
    let g_six = critical_eps_guessing(&standard_sixstate(), &opts).unwrap();
    let e_bb = critical_eps_entropy(&standard_bb84()).unwrap();
    let e_six = critical_eps_entropy(&standard_sixstate()).unwrap();
    let exact_six = (5.0 - 2.0 * 3f64.sqrt()) / 13.0;
    let roots = (g_bb.eps - 0.1).abs() <= 5e-4
        && (g_six.eps - 0.11815).abs() <= 5e-4
        && (g_six.eps - exact_six).abs() <= 5e-4
        && (e_bb.eps - 0.1100).abs() <= 5e-4
        && (e_six.eps - 0.1262).abs() <= 5e-4;
    let residuals = [g_bb.residual, g_six.residual].iter().all(|r| r.abs() < 1e-6)
        && [e_bb.residual, e_six.residual].iter().all(|r| r.abs() < 1e-8);

    let (pb_bb, pe_bb) = (1.0 - e_bb.eps, closed_form_pe_bb84(e_bb.eps).unwrap());
    let (pb_six, pe_six) = (1.0 - e_six.eps, closed_form_pe_sixstate(e_six.eps).unwrap());
    let gaps = pb_bb < pe_bb
        && round_to(pb_bb, 2) == 0.89
        && round_to(pe_bb, 2) == 0.91
        && pb_six < pe_six
        && round_to(pb_six, 3) == 0.874
        && round_to(pe_six, 2) == 0.89;
    outcome(
        roots && residuals && gaps,
        format!(
            "eps_cr {:.5} / {:.5}, eps~_cr {:.5} / {:.5}; gaps {:.3} < {:.3} and {:.3} < {:.3}",
            g_bb.eps, g_six.eps, e_bb.eps, e_six.eps, pb_bb, pe_bb, pb_six, pe_six
        ),
    )
}

fn scatter_dominance() -> Outcome {
    let count = |config: &ProtocolConfig, n: usize, seed: u64| {
        let points = scatter(config, n, seed).unwrap();
        let above = points.iter().filter(|p| p.p_e > scatter_bound(config, p.p_b).unwrap() + 1e-9).count();
        (points.len(), above)
    };
    let (n_bb, above_bb) = count(&standard_bb84(), 3800, 1);
    let (n_six, above_six) = count(&standard_sixstate(), 2750, 2);
    let end_bb = closed_form_pe_bb84(0.25).unwrap();
    let end_six = closed_form_pe_sixstate(1.0 / 3.0).unwrap();
    let below = closed_form_pe_bb84(0.25 - 1e-6).unwrap() < 1.0 && closed_form_pe_sixstate(1.0 / 3.0 - 1e-6).unwrap() < 1.0;
    let at_points = scatter_bound(&standard_bb84(), 0.75) == Some(end_bb)
        && scatter_bound(&standard_sixstate(), 2.0 / 3.0) == Some(end_six);
    outcome(
        n_bb == 3800 && n_six == 2750 && above_bb == 0 && above_six == 0
            && (end_bb - 1.0).abs() < 1e-12 && (end_six - 1.0).abs() < 1e-12 && below && at_points,
        format!(
            "{above_bb}/{n_bb} bb84 and {above_six}/{n_six} six-state points above the curve; P_E*(3/4) = {end_bb}, P_E*(2/3) = {end_six}"
        ),
    )
}

fn property_suites() -> Outcome {
    let checks = [
        ("symmetry", common::correlation_symmetry(1000, 1), 1e-12),
        ("six-state round trip", common::protocol2_round_trip(1000, 2), 1e-9),
        ("2t-state rate", common::protocol3_vs_reconstruction(1000, 3), 1e-9),
        ("conditional eigenvalues", common::conditional_eigenvalues_vs_brute_force(1000, 4), 1e-9),
        ("purification", common::purification_invariants(300, 5), 1e-10),
        ("haar n=4 column mean", common::haar_column_mean_deviation(4, 10_000, 6), 0.01),
        ("haar n=6 column mean", common::haar_column_mean_deviation(6, 10_000, 7), 0.01),
    ];
    let pass = checks.iter().all(|(_, got, tol)| got < tol);
    let detail = checks.iter().map(|(name, got, tol)| format!("{name} {got:.1e} (< {tol:.0e})")).collect::<Vec<_>>();
    outcome(pass, detail.join(", "))
}

fn run_twice(args: &[&str], dir: &std::path::Path, stem: &str) -> Result<bool, String> {
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.join(format!("{stem}-{i}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_eveguess"))
            .args(args)
            .arg("--out")
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("{stem} exited with {status}"));
        }
        outputs.push(fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(outputs[0] == outputs[1] && !outputs[0].is_empty())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let scatter = run_twice(&["scatter", "--protocol", "bb84", "--samples", "3800", "--seed", "1"], dir.path(), "scatter");
    let table = run_twice(&["table1", "--phi1", "0,0.3927", "--starts", "4", "--seed", "3"], dir.path(), "table1");
    match (scatter, table) {
        (Ok(s), Ok(t)) => outcome(s && t, format!("scatter identical: {s}, table1 identical: {t}")),
        (s, t) => outcome(false, format!("runs failed: {s:?} {t:?}")),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("closed-form oracle match", closed_form_grid_match),
        ("four-state table", table_reproduction),
        ("key-rate reductions", key_rate_reductions),
        ("critical crossings", critical_crossings),
        ("scatter dominance", scatter_dominance),
        ("property suites", property_suites),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let r = check();
        failed += usize::from(!r.pass);
        println!("criterion {} {}: {name}: {}", i + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
