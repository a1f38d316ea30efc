//! Critical error rates under the symmetric-rate convention (the same `eps`
//! in every basis, so `P_B = 1 - eps`).
//!
//! `critical_eps_guessing` solves `1 - eps = P_E*(eps)`, using the closed
//! forms for the standard configurations and the numerical maximization
//! otherwise. `critical_eps_entropy` solves `R(eps) = 0` on the unclamped
//! rate.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guessing::{closed_form_pe, maximize_guessing, OptimizerOptions};
use crate::keyrate::secure_key_rate;
use crate::protocol::ProtocolConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalOptions {
    pub optimizer: OptimizerOptions,
    /// Spacing of the coarse grid used to bracket the numerical crossing.
    pub grid_step: f64,
    /// First grid point probed for the numerical crossing.
    pub grid_start: f64,
    /// Bracket width at which the numerical bisection stops.
    pub numeric_xtol: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self { optimizer: OptimizerOptions::default(), grid_step: 0.005, grid_start: 0.1, numeric_xtol: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuessingCrossing {
    pub eps: f64,
    pub pe_star: f64,
    /// `1 - eps - P_E*(eps)` at the returned root.
    pub residual: f64,
    /// Whether `P_E*` came from a closed form.
    pub closed_form: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyCrossing {
    pub eps: f64,
    /// Unclamped key rate at the returned root.
    pub residual: f64,
}

fn symmetric(config: &ProtocolConfig, eps: f64) -> Vec<f64> {
    vec![eps; config.t()]
}

/// Plain bisection on `[a, b]`, which must carry a sign change; stops once
/// the bracket is narrower than `xtol` or `|f| <= ftol`.
fn bisect(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    xtol: f64,
    ftol: f64,
) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= xtol {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm.abs() <= ftol {
            return Ok(mid);
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// `eps_cr` with `P_B(eps_cr) = P_E*(eps_cr)`.
pub fn critical_eps_guessing(config: &ProtocolConfig, opts: &CriticalOptions) -> Result<GuessingCrossing> {
    config.validate()?;
    if closed_form_pe(config, 0.0).is_some() {
        let pe = |e: f64| closed_form_pe(config, e).expect("standard configuration");
        let gap = |e: f64| -> Result<f64> { Ok(1.0 - e - pe(e)?) };
        let (fa, fb) = (gap(0.0)?, gap(0.5)?);
        if !(fa > 0.0 && fb < 0.0) {
            return Err(Error::NoCrossing(format!("1 - eps - P_E* is {fa} at 0 and {fb} at 1/2")));
        }
        let eps = bisect(gap, 0.0, 0.5, fa, 1e-14, 1e-13)?;
        let pe_star = pe(eps)?;
        return Ok(GuessingCrossing { eps, pe_star, residual: 1.0 - eps - pe_star, closed_form: true });
    }

    let cache: RefCell<HashMap<u64, f64>> = RefCell::new(HashMap::new());
    let pe = |e: f64| -> Result<f64> {
        if let Some(&v) = cache.borrow().get(&e.to_bits()) {
            return Ok(v);
        }
        let v = maximize_guessing(config, &symmetric(config, e), &opts.optimizer)?.p_e_star;
        cache.borrow_mut().insert(e.to_bits(), v);
        Ok(v)
    };
    let gap = |e: f64| -> Result<f64> { Ok(1.0 - e - pe(e)?) };

    let h = opts.grid_step;
    let max_index = (0.5 / h).floor() as i64;
    let node = |k: i64| k as f64 * h;
    let mut k_prev = ((opts.grid_start / h).round() as i64).clamp(1, max_index - 1);
    let mut f_prev = gap(node(k_prev))?;
    let dir: i64 = if f_prev > 0.0 { 1 } else { -1 };
    let mut k = k_prev + dir;
    let mut f_k = gap(node(k))?;
    while (f_k > 0.0) == (f_prev > 0.0) {
        // jump to the grid node nearest the secant prediction, at least one
        // step further along
        let slope = (f_k - f_prev) / (node(k) - node(k_prev));
        let predicted = if slope != 0.0 { node(k) - f_k / slope } else { node(k + dir) };
        let mut next = (predicted / h).round() as i64;
        if (next - k) * dir < 1 {
            next = k + dir;
        }
        next = next.clamp(k + dir.min(0) * 8, k + dir.max(0) * 8);
        if next < 1 || next > max_index {
            return Err(Error::NoCrossing(format!(
                "1 - eps - P_E* keeps its sign up to eps = {}",
                node(k)
            )));
        }
        k_prev = k;
        f_prev = f_k;
        k = next;
        f_k = gap(node(k))?;
    }
    let (a, fa, b) = if k_prev < k { (node(k_prev), f_prev, node(k)) } else { (node(k), f_k, node(k_prev)) };
    let eps = bisect(gap, a, b, fa, opts.numeric_xtol, 1e-9)?;
    let pe_star = pe(eps)?;
    Ok(GuessingCrossing { eps, pe_star, residual: 1.0 - eps - pe_star, closed_form: false })
}

/// `eps~_cr` with `R(eps~_cr) = 0`.
pub fn critical_eps_entropy(config: &ProtocolConfig) -> Result<EntropyCrossing> {
    config.validate()?;
    let rate = |e: f64| -> Result<f64> { Ok(secure_key_rate(config, &symmetric(config, e))?.unclamped_rate()) };
    let f0 = rate(0.0)?;
    if f0 <= 0.0 {
        return Err(Error::NoCrossing(format!("key rate {f0} at eps = 0")));
    }
    // first feasible grid point with a negative rate
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=50 {
        let e = 0.01 * i as f64;
        match rate(e) {
            Ok(v) if v < 0.0 => {
                hi = Some(e);
                break;
            }
            Ok(_) => lo = e,
            Err(Error::InfeasibleRates(_)) => break,
            Err(other) => return Err(other),
        }
    }
    let hi = hi.ok_or_else(|| Error::NoCrossing("key rate stays positive on the feasible range".into()))?;
    let eps = bisect(rate, lo, hi, rate(lo)?, 1e-13, 1e-12)?;
    Ok(EntropyCrossing { eps, residual: rate(eps)? })
}
