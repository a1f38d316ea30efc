//! Maximization of `P_E` over Eve's basis and, for four-state protocols,
//! over the free eigenvalue `lambda3`.
//!
//! Each local search explores `V = V0 exp(iH(x))` around a seed `V0`, with
//! `H(x)` traceless Hermitian (`n^2 - 1` real parameters) and `x = 0` at the
//! start, so a search never ends below its seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{su_param_count, CMatrix, ExpmWorkspace, C64};
use crate::protocol::{admissible_spectra, Admissible, ProtocolConfig, SpectrumFamily};
use crate::sampling::{haar_unitary, stream_rng};
use crate::states::BellSpectrum;

use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::objective::GuessObjective;
use super::{known_optimal_v, EveBasis};

/// Restarts whose best values differ by more than this are flagged as not
/// converged.
pub const AGREEMENT_TOL: f64 = 1e-4;

/// Stream offset separating the lambda3 scouting seeds from the restart
/// seeds.
const SCOUT_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Independent local searches in the final stage.
    pub starts: usize,
    pub max_evals: usize,
    pub ftol: f64,
    pub xtol: f64,
    pub initial_step: f64,
    /// Grid points for the lambda3 scan (four-state protocols).
    pub lambda3_grid: usize,
    /// Final tolerance of the lambda3 refinement.
    pub lambda3_tol: f64,
    pub seed: u64,
    /// Run restarts on the rayon pool.
    pub parallel: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            max_evals: 20_000,
            ftol: 1e-8,
            xtol: 1e-8,
            initial_step: 0.5,
            lambda3_grid: 33,
            lambda3_tol: 1e-7,
            seed: 0,
            parallel: true,
        }
    }
}

impl OptimizerOptions {
    fn nelder_mead(&self) -> NelderMeadOptions {
        NelderMeadOptions {
            ftol: self.ftol,
            xtol: self.xtol,
            max_evals: self.max_evals,
            initial_step: self.initial_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessResult {
    pub p_e_star: f64,
    pub best_v: EveBasis,
    pub best_lambda3: Option<f64>,
    pub spectrum: BellSpectrum,
    pub starts_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
struct LocalOptimum {
    value: f64,
    v: CMatrix,
}

fn local_maximize(objective: &GuessObjective, seed: &CMatrix, nm: &NelderMeadOptions) -> LocalOptimum {
    let n = seed.nrows();
    let x0 = vec![0.0; su_param_count(n)];
    let mut ws = ExpmWorkspace::new(n);
    // only the first four columns of seed * exp(iH) enter the objective
    let mut cols = vec![C64::default(); 4 * n];
    let result = nelder_mead(
        |x| {
            ws.exp_i_traceless(x);
            for k in 0..4 {
                for e in 0..n {
                    cols[k * n + e] = (0..n).map(|m| seed[(e, m)] * ws.entry(m, k)).sum();
                }
            }
            -objective.evaluate_with(|e, k| cols[k * n + e])
        },
        &x0,
        nm,
    );
    ws.exp_i_traceless(&result.x);
    let v = seed * CMatrix::from_fn(n, n, |i, j| ws.entry(i, j));
    LocalOptimum { value: objective.evaluate(&v), v }
}

fn run_all(objective: &GuessObjective, seeds: &[CMatrix], opts: &OptimizerOptions) -> Vec<LocalOptimum> {
    let nm = opts.nelder_mead();
    if opts.parallel {
        seeds.par_iter().map(|s| local_maximize(objective, s, &nm)).collect()
    } else {
        seeds.iter().map(|s| local_maximize(objective, s, &nm)).collect()
    }
}

/// Seed `i` is the known optimal basis for `i = 0` on a standard
/// configuration and a Haar draw from stream `i` otherwise; the seed list for
/// `k` starts is a prefix of the list for `k + 1`.
fn restart_seeds(config: &ProtocolConfig, opts: &OptimizerOptions) -> Vec<CMatrix> {
    let known = known_optimal_v(config);
    (0..opts.starts.max(1))
        .map(|i| match (&known, i) {
            (Some(v), 0) => v.matrix().clone(),
            _ => haar_unitary(config.eve_dim(), &mut stream_rng(opts.seed, i as u64)).into_matrix(),
        })
        .collect()
}

/// Max-reduction with first-found tie-breaking, plus the agreement flag.
fn reduce(results: Vec<LocalOptimum>) -> (LocalOptimum, bool) {
    let mut sorted: Vec<f64> = results.iter().map(|r| r.value).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let converged = sorted.len() < 2 || sorted[0] - sorted[1] <= AGREEMENT_TOL;
    let mut best: Option<LocalOptimum> = None;
    for r in results {
        if best.as_ref().map_or(true, |b| r.value > b.value) {
            best = Some(r);
        }
    }
    (best.expect("at least one restart"), converged)
}

/// Maximum of `P_E` over Eve's basis at a fixed spectrum.
pub fn maximize_guessing_at(
    spec: &BellSpectrum,
    config: &ProtocolConfig,
    opts: &OptimizerOptions,
) -> Result<GuessResult> {
    let objective = GuessObjective::new(spec, config)?;
    let seeds = restart_seeds(config, opts);
    let (best, converged) = reduce(run_all(&objective, &seeds, opts));
    Ok(GuessResult {
        p_e_star: best.value,
        best_v: EveBasis::new_unchecked(best.v),
        best_lambda3: None,
        spectrum: *spec,
        starts_used: seeds.len(),
        converged,
    })
}

/// `P_E*` for observed error rates `eps` (one per basis).
///
/// Six-state and 2t-state rates fix the spectrum. For four-state protocols
/// `lambda3` is scanned on a grid over its admissible interval (each point
/// warm-started from its neighbour plus one scouting seed), refined by
/// golden-section search, and the full multi-start is run at the best
/// `lambda3`.
pub fn maximize_guessing(config: &ProtocolConfig, eps: &[f64], opts: &OptimizerOptions) -> Result<GuessResult> {
    match admissible_spectra(config, eps)? {
        Admissible::Fixed(spec) => maximize_guessing_at(&spec, config, opts),
        Admissible::Family(family) => maximize_over_family(&family, config, opts),
    }
}

struct Probe {
    lambda3: f64,
    best: LocalOptimum,
}

fn maximize_over_family(
    family: &SpectrumFamily,
    config: &ProtocolConfig,
    opts: &OptimizerOptions,
) -> Result<GuessResult> {
    let (lo, hi) = family.free_range();
    if family.is_point() {
        let mut r = maximize_guessing_at(&family.at(lo)?, config, opts)?;
        r.best_lambda3 = Some(lo);
        return Ok(r);
    }
    let nm = opts.nelder_mead();
    let known = known_optimal_v(config).map(EveBasis::into_matrix);

    let probe = |lambda3: f64, warm: &[&CMatrix]| -> Result<Probe> {
        let objective = GuessObjective::new(&family.at(lambda3)?, config)?;
        let best = warm
            .iter()
            .map(|s| local_maximize(&objective, s, &nm))
            .reduce(|a, b| if b.value > a.value { b } else { a })
            .expect("at least one seed");
        Ok(Probe { lambda3, best })
    };

    // coarse scan
    let points = opts.lambda3_grid.max(2);
    let mut grid: Vec<Probe> = Vec::with_capacity(points);
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let scout = haar_unitary(config.eve_dim(), &mut stream_rng(opts.seed, SCOUT_STREAM + i as u64)).into_matrix();
        let mut seeds: Vec<&CMatrix> = vec![&scout];
        if let Some(p) = &known {
            seeds.push(p);
        }
        let prev = grid.last().map(|p| p.best.v.clone());
        if let Some(w) = &prev {
            seeds.push(w);
        }
        grid.push(probe(x, &seeds)?);
    }
    let ibest = argmax(&grid);
    let mut incumbent = Probe { lambda3: grid[ibest].lambda3, best: grid[ibest].best.clone() };

    // golden-section refinement between the neighbours of the best grid point
    let step = (hi - lo) / (points - 1) as f64;
    let (mut a, mut b) = ((incumbent.lambda3 - step).max(lo), (incumbent.lambda3 + step).min(hi));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut p1 = probe(x1, &[&incumbent.best.v])?;
    let mut p2 = probe(x2, &[&incumbent.best.v])?;
    while b - a > opts.lambda3_tol {
        if p1.best.value >= p2.best.value {
            b = x2;
            x2 = x1;
            p2 = p1;
            x1 = b - ratio * (b - a);
            if p2.best.value > incumbent.best.value {
                incumbent = Probe { lambda3: p2.lambda3, best: p2.best.clone() };
            }
            p1 = probe(x1, &[&incumbent.best.v])?;
        } else {
            a = x1;
            x1 = x2;
            p1 = p2;
            x2 = a + ratio * (b - a);
            if p1.best.value > incumbent.best.value {
                incumbent = Probe { lambda3: p1.lambda3, best: p1.best.clone() };
            }
            p2 = probe(x2, &[&incumbent.best.v])?;
        }
    }
    for p in [p1, p2] {
        if p.best.value > incumbent.best.value {
            incumbent = p;
        }
    }

    // full multi-start at the selected lambda3
    let spec = family.at(incumbent.lambda3)?;
    let objective = GuessObjective::new(&spec, config)?;
    let mut seeds = restart_seeds(config, opts);
    seeds.push(incumbent.best.v.clone());
    let (best, converged) = reduce(run_all(&objective, &seeds, opts));
    Ok(GuessResult {
        p_e_star: best.value,
        best_v: EveBasis::new_unchecked(best.v),
        best_lambda3: Some(incumbent.lambda3),
        spectrum: spec,
        starts_used: seeds.len(),
        converged,
    })
}

fn argmax(probes: &[Probe]) -> usize {
    let mut best = 0;
    for (i, p) in probes.iter().enumerate() {
        if p.best.value > probes[best].best.value {
            best = i;
        }
    }
    best
}
