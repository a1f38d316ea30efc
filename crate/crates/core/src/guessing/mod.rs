//! Eve's guessing probability.
//!
//! Eve holds the purification `|psi> = sum_k sqrt(lambda_k) |phi_k>_AB |k_V>_E`
//! with `|k_V> = (V^dag)^T |k>`, and reads outcome `2j` (`2j + 1`) as the
//! guess "Alice measured basis `j` and obtained `+` (`-`)".

mod maximize;
mod nelder_mead;
mod objective;

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, unitarity_defect, CMatrix, CVector, C64};
use crate::protocol::ProtocolConfig;
use crate::states::{alice_ket, bell_state, BellSpectrum, Sign};

pub use maximize::{maximize_guessing, maximize_guessing_at, GuessResult, OptimizerOptions};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use objective::GuessObjective;

/// Unitarity tolerance for [`EveBasis`].
pub const UNITARY_TOL: f64 = 1e-9;

/// Eve's measurement basis, given by a unitary `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct EveBasis {
    v: CMatrix,
}

impl EveBasis {
    pub fn new(v: CMatrix) -> Result<Self> {
        if !v.is_square() {
            return Err(Error::DimensionMismatch { expected: v.nrows(), found: v.ncols() });
        }
        let defect = unitarity_defect(&v);
        if defect.is_nan() || defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { v })
    }

    pub(crate) fn new_unchecked(v: CMatrix) -> Self {
        Self { v }
    }

    pub fn identity(n: usize) -> Self {
        Self { v: CMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }

    pub fn into_matrix(self) -> CMatrix {
        self.v
    }

    /// `|k_V> = (V^dag)^T |k>`, i.e. the conjugate of column `k`.
    pub fn rotated_vector(&self, k: usize) -> CVector {
        self.v.column(k).map(|z| z.conj())
    }

    /// Builds the basis from the rotated vectors `|k_V>` themselves.
    pub fn from_rotated_vectors(vectors: &[Vec<C64>]) -> Result<Self> {
        let n = vectors.len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        Self::new(CMatrix::from_fn(n, n, |e, k| vectors[k][e].conj()))
    }
}

/// Rows of `[re, im]` pairs.
impl Serialize for EveBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.v.nrows())
            .map(|i| (0..self.v.ncols()).map(|j| [self.v[(i, j)].re, self.v[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EveBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("Eve basis must be square"));
        }
        let m = CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1]));
        EveBasis::new(m).map_err(serde::de::Error::custom)
    }
}

/// Tripartite pure state; amplitude `(ab, e)` stored at `ab * dim_e + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Purification {
    amplitudes: CVector,
    dim_e: usize,
}

impl Purification {
    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Amplitudes as a `4 x dim_e` matrix (AB rows, E columns).
    pub fn as_matrix(&self) -> CMatrix {
        CMatrix::from_fn(4, self.dim_e, |ab, e| self.amplitudes[ab * self.dim_e + e])
    }

    /// `Tr_E |psi><psi|` in the computational basis.
    pub fn reduced_ab(&self) -> CMatrix {
        let m = self.as_matrix();
        &m * m.adjoint()
    }

    /// `Tr_AB |psi><psi|`.
    pub fn reduced_e(&self) -> CMatrix {
        let m = self.as_matrix();
        m.transpose() * m.map(|z| z.conj())
    }
}

fn check_eve_dim(v: &EveBasis) -> Result<()> {
    if v.dim() < 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: v.dim() });
    }
    Ok(())
}

/// `|psi>_ABE = sum_k sqrt(lambda_k) |phi_k>_AB |k_V>_E`.
pub fn build_purification(spec: &BellSpectrum, v: &EveBasis) -> Result<Purification> {
    check_eve_dim(v)?;
    let n = v.dim();
    let mut amplitudes = CVector::zeros(4 * n);
    for k in 0..4 {
        let w = spec.get(k).sqrt();
        if w == 0.0 {
            continue;
        }
        let phi = bell_state(k)?;
        let kv = v.rotated_vector(k);
        for ab in 0..4 {
            if phi[ab] == C64::default() {
                continue;
            }
            for e in 0..n {
                amplitudes[ab * n + e] += phi[ab] * kv[e] * w;
            }
        }
    }
    Ok(Purification { amplitudes, dim_e: n })
}

/// Eve outcome index for basis `j` and sign `s`.
pub fn eve_outcome(j: usize, s: Sign) -> usize {
    match s {
        Sign::Plus => 2 * j,
        Sign::Minus => 2 * j + 1,
    }
}

/// `P_E = sum_j <psi| (|+n_j><+n_j| (x) I (x) |2j><2j| + |-n_j><-n_j| (x) I (x) |2j+1><2j+1|) |psi>`.
///
/// No basis-choice weights enter this sum.
pub fn guessing_probability(spec: &BellSpectrum, config: &ProtocolConfig, v: &EveBasis) -> Result<f64> {
    config.validate()?;
    if v.dim() != config.eve_dim() {
        return Err(Error::DimensionMismatch { expected: config.eve_dim(), found: v.dim() });
    }
    let psi = build_purification(spec, v)?;
    let n = psi.dim_e;
    let amp = &psi.amplitudes;
    let mut total = 0.0;
    for (j, &dir) in config.directions().iter().enumerate() {
        for s in Sign::BOTH {
            let a = alice_ket(dir, s);
            let e = eve_outcome(j, s);
            for b in 0..2 {
                let proj: C64 = (0..2).map(|ai| a[ai].conj() * amp[(2 * ai + b) * n + e]).sum();
                total += proj.norm_sqr();
            }
        }
    }
    Ok(total)
}

fn bb84_rotated_vectors() -> Vec<Vec<C64>> {
    let h = FRAC_1_SQRT_2;
    let r = |xs: [f64; 4]| xs.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>();
    vec![
        r([0.5, -0.5, 0.5, -0.5]),
        r([h, h, 0.0, 0.0]),
        r([0.0, 0.0, h, h]),
        r([0.5, -0.5, -0.5, 0.5]),
    ]
}

/// A closed-form optimal BB84 basis; attains
/// `1/2 + sqrt(lambda0/2)(sqrt(lambda1) + sqrt(lambda2))`.
pub fn optimal_v_bb84() -> EveBasis {
    EveBasis::from_rotated_vectors(&bb84_rotated_vectors()).expect("orthonormal by construction")
}

/// A closed-form optimal six-state basis, completed by its two
/// auxiliary vectors; attains `1/2 + sqrt(lambda0/3)(sqrt(l1) + sqrt(l2) + sqrt(l3))`.
pub fn optimal_v_sixstate() -> EveBasis {
    let s6 = 1.0 / 6f64.sqrt();
    let h = FRAC_1_SQRT_2;
    let a = 1.0 / (2.0 * 3f64.sqrt());
    let t = 1.0 / 3f64.sqrt();
    let z = c(0.0, 0.0);
    let vectors = vec![
        vec![c(s6, 0.0), c(-s6, 0.0), c(s6, 0.0), c(s6, 0.0), c(0.0, s6), c(s6, 0.0)],
        vec![c(h, 0.0), c(h, 0.0), z, z, z, z],
        vec![z, z, c(h, 0.0), c(-h, 0.0), z, z],
        vec![z, z, z, z, c(h, 0.0), c(0.0, h)],
        vec![c(0.5, 0.0), c(-0.5, 0.0), c(-0.5, 0.0), c(-0.5, 0.0), z, z],
        vec![c(-a, 0.0), c(a, 0.0), c(-a, 0.0), c(-a, 0.0), c(0.0, t), c(t, 0.0)],
    ];
    EveBasis::from_rotated_vectors(&vectors).expect("orthonormal by construction")
}

fn check_closed_form_domain(eps: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::Domain(format!("eps = {eps} outside [0, 1/2]")));
    }
    Ok(())
}

/// `1/2 + sqrt(2 eps (1 - 2 eps))`, equal to one on `[1/4, 1/2]`.
pub fn closed_form_pe_bb84(eps: f64) -> Result<f64> {
    check_closed_form_domain(eps)?;
    if eps >= 0.25 {
        return Ok(1.0);
    }
    Ok(0.5 + (2.0 * eps * (1.0 - 2.0 * eps)).max(0.0).sqrt())
}

/// `1/2 + sqrt(3 eps (2 - 3 eps) / 4)`, equal to one on `[1/3, 1/2]`.
pub fn closed_form_pe_sixstate(eps: f64) -> Result<f64> {
    check_closed_form_domain(eps)?;
    if eps >= 1.0 / 3.0 {
        return Ok(1.0);
    }
    Ok(0.5 + (3.0 * eps * (2.0 - 3.0 * eps) / 4.0).max(0.0).sqrt())
}

/// The closed-form maximum for the standard BB84 and six-state
/// configurations, `None` for any other configuration.
pub fn closed_form_pe(config: &ProtocolConfig, eps: f64) -> Option<Result<f64>> {
    if config.is_standard_bb84() {
        Some(closed_form_pe_bb84(eps))
    } else if config.is_standard_sixstate() {
        Some(closed_form_pe_sixstate(eps))
    } else {
        None
    }
}

/// The closed-form optimal basis for a standard configuration, if any.
pub fn known_optimal_v(config: &ProtocolConfig) -> Option<EveBasis> {
    if config.is_standard_bb84() {
        Some(optimal_v_bb84())
    } else if config.is_standard_sixstate() {
        Some(optimal_v_sixstate())
    } else {
        None
    }
}
