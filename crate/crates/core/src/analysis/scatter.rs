use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::guessing::{closed_form_pe_bb84, closed_form_pe_sixstate, guessing_probability};
use crate::protocol::ProtocolConfig;
use crate::sampling::{haar_unitary, random_spectrum, stream_rng};
use crate::states::{bob_guess_probability, BellSpectrum};

use super::format::format_significant;

pub const SCATTER_HEADER: &str = "p_b,p_e";

/// One random (spectrum, Eve basis) sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub p_b: f64,
    pub p_e: f64,
    pub spectrum: BellSpectrum,
    /// FNV-1a hash of the sampled unitary's entries.
    pub unitary_hash: u64,
}

fn hash_entries(values: impl Iterator<Item = f64>) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for v in values {
        for byte in v.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

/// `n_samples` points `(P_B, P_E)` with uniformly random spectra and Haar
/// random Eve bases. Sample `i` draws from stream `i` of `seed`.
pub fn scatter(config: &ProtocolConfig, n_samples: usize, seed: u64) -> Result<Vec<ScatterPoint>> {
    config.validate()?;
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let spectrum = random_spectrum(&mut rng);
            let v = haar_unitary(config.eve_dim(), &mut rng);
            let p_b = bob_guess_probability(&spectrum, config)?;
            let p_e = guessing_probability(&spectrum, config, &v)?;
            let unitary_hash = hash_entries(v.matrix().iter().flat_map(|z| [z.re, z.im]));
            Ok(ScatterPoint { p_b, p_e, spectrum, unitary_hash })
        })
        .collect()
}

/// The closed-form `P_E*` curve at `P_B`, for the standard BB84 and
/// six-state configurations. Beyond `eps = 1/2` the bound is 1.
pub fn scatter_bound(config: &ProtocolConfig, p_b: f64) -> Option<f64> {
    let eps = (1.0 - p_b).clamp(0.0, 1.0);
    if eps > 0.5 {
        return (config.is_standard_bb84() || config.is_standard_sixstate()).then_some(1.0);
    }
    if config.is_standard_bb84() {
        closed_form_pe_bb84(eps).ok()
    } else if config.is_standard_sixstate() {
        closed_form_pe_sixstate(eps).ok()
    } else {
        None
    }
}

/// `p_b,p_e` rows with 12 significant digits and LF line endings.
pub fn write_scatter_csv<W: Write>(points: &[ScatterPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{SCATTER_HEADER}")?;
    for p in points {
        writeln!(out, "{},{}", format_significant(p.p_b, 12), format_significant(p.p_e, 12))?;
    }
    out.flush()
}
