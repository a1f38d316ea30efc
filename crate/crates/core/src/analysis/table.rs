use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::ProtocolConfig;

use super::critical::{critical_eps_entropy, critical_eps_guessing, CriticalOptions};
use super::format::format_significant;

pub const TABLE_HEADER: &str = "phi1,eps_cr_pct,eps_tilde_cr_pct,delta_eps_pct,pe_star";

/// Both critical rates of the four-state protocol with its second direction
/// at `(pi/2, phi1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub phi1: f64,
    pub eps_cr: f64,
    pub eps_tilde_cr: f64,
    /// `eps_cr - eps_tilde_cr`.
    pub delta_eps: f64,
    pub pe_star_at_crossing: f64,
}

/// Critical rates for each `phi1` in `[0, pi/2]`; columns run concurrently.
pub fn table1_scan(phi1_values: &[f64], opts: &CriticalOptions) -> Result<Vec<CriticalReport>> {
    if let Some(bad) = phi1_values.iter().find(|p| !(-1e-12..=FRAC_PI_2 + 1e-12).contains(*p)) {
        return Err(Error::Domain(format!("phi1 = {bad} outside [0, pi/2]")));
    }
    phi1_values
        .par_iter()
        .map(|&phi1| {
            let config = ProtocolConfig::four_state(FRAC_PI_2, phi1.clamp(0.0, FRAC_PI_2))?;
            let guess = critical_eps_guessing(&config, opts)?;
            let entropy = critical_eps_entropy(&config)?;
            Ok(CriticalReport {
                phi1,
                eps_cr: guess.eps,
                eps_tilde_cr: entropy.eps,
                delta_eps: guess.eps - entropy.eps,
                pe_star_at_crossing: guess.pe_star,
            })
        })
        .collect()
}

/// Percent columns with two decimals (signed for `delta_eps`), `P_E*` with
/// four.
pub fn write_table_csv<W: Write>(rows: &[CriticalReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{TABLE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.2},{:.2},{:+.2},{:.4}",
            format_significant(r.phi1, 12),
            100.0 * r.eps_cr,
            100.0 * r.eps_tilde_cr,
            100.0 * r.delta_eps,
            r.pe_star_at_crossing
        )?;
    }
    out.flush()
}
