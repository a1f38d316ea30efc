//! Qubit and Bell-state algebra: measurement kets, the Bell basis, the
//! Bell-diagonal spectrum and the correlation statistics it produces.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, kron, CMatrix, CVector, C64};
use crate::protocol::ProtocolConfig;

/// Tolerance for spectrum bounds and normalization.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// Eigenvalues of a Bell-diagonal two-qubit state, in the order
/// `phi0 = (|00>+|11>)/sqrt2`, `phi1 = (|00>-|11>)/sqrt2`,
/// `phi2 = (|01>+|10>)/sqrt2`, `phi3 = (|01>-|10>)/sqrt2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BellSpectrum {
    lambda: [f64; 4],
}

impl BellSpectrum {
    /// Validates bounds and normalization at [`SPECTRUM_TOL`].
    ///
    /// Entries within tolerance of the `[0, 1]` bounds are clamped onto them;
    /// the vector is never renormalized.
    pub fn new(lambda: [f64; 4]) -> Result<Self> {
        for (k, &l) in lambda.iter().enumerate() {
            if !l.is_finite() || l < -SPECTRUM_TOL || l > 1.0 + SPECTRUM_TOL {
                return Err(Error::InvalidSpectrum(format!("lambda{k} = {l} outside [0, 1]")));
            }
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > SPECTRUM_TOL {
            return Err(Error::InvalidSpectrum(format!("eigenvalues sum to {sum}")));
        }
        Ok(Self { lambda: lambda.map(|l| l.clamp(0.0, 1.0)) })
    }

    /// The noiseless channel, `|phi0><phi0|`.
    pub fn ideal() -> Self {
        Self { lambda: [1.0, 0.0, 0.0, 0.0] }
    }

    pub fn lambda(&self) -> [f64; 4] {
        self.lambda
    }

    pub fn get(&self, k: usize) -> f64 {
        self.lambda[k]
    }

    /// `rho_AB = sum_k lambda_k |phi_k><phi_k|` in the computational basis.
    pub fn density_matrix(&self) -> CMatrix {
        let mut rho = CMatrix::zeros(4, 4);
        for (k, &l) in self.lambda.iter().enumerate() {
            let phi = bell_state(k).expect("index in range");
            rho += (&phi * phi.adjoint()) * c(l, 0.0);
        }
        rho
    }
}

impl TryFrom<[f64; 4]> for BellSpectrum {
    type Error = Error;

    fn try_from(value: [f64; 4]) -> Result<Self> {
        Self::new(value)
    }
}

impl From<BellSpectrum> for [f64; 4] {
    fn from(s: BellSpectrum) -> Self {
        s.lambda
    }
}

/// A measuring direction on the Bloch sphere. Alice measures along
/// `(theta, phi)`, Bob along the mirrored `(theta, -phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDirection", into = "RawDirection")]
pub struct Direction {
    theta: f64,
    phi: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDirection {
    theta: f64,
    phi: f64,
}

impl TryFrom<RawDirection> for Direction {
    type Error = Error;

    fn try_from(raw: RawDirection) -> Result<Self> {
        Direction::new(raw.theta, raw.phi)
    }
}

impl From<Direction> for RawDirection {
    fn from(d: Direction) -> Self {
        RawDirection { theta: d.theta, phi: d.phi }
    }
}

impl Direction {
    /// `theta` must lie in `[0, pi]`; `phi` is reduced into `[0, 2pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidDirection(format!("non-finite angles ({theta}, {phi})")));
        }
        if !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(Error::InvalidDirection(format!("theta = {theta} outside [0, pi]")));
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Ok(Self { theta: theta.clamp(0.0, PI), phi })
    }

    /// The `z` axis, `theta = phi = 0`.
    pub const fn z() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// A measurement outcome along a direction: `|+n>` or `|-n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

fn ket(theta: f64, phi: f64, sign: Sign) -> CVector {
    let (s, co) = (theta / 2.0).sin_cos();
    let phase = C64::from_polar(1.0, phi);
    match sign {
        Sign::Plus => CVector::from_vec(vec![c(co, 0.0), phase * s]),
        Sign::Minus => CVector::from_vec(vec![c(s, 0.0), -phase * co]),
    }
}

/// `|+n> = cos(theta/2)|0> + sin(theta/2) e^{i phi}|1>` and its orthogonal
/// partner `|-n> = sin(theta/2)|0> - cos(theta/2) e^{i phi}|1>`.
pub fn alice_ket(dir: Direction, sign: Sign) -> CVector {
    ket(dir.theta, dir.phi, sign)
}

/// Bob's ket: as [`alice_ket`] with `phi -> -phi`.
pub fn bob_ket(dir: Direction, sign: Sign) -> CVector {
    ket(dir.theta, -dir.phi, sign)
}

/// Bell vector `k` in the computational basis `|00>,|01>,|10>,|11>`.
pub fn bell_state(k: usize) -> Result<CVector> {
    let h = FRAC_1_SQRT_2;
    let v = match k {
        0 => [h, 0.0, 0.0, h],
        1 => [h, 0.0, 0.0, -h],
        2 => [0.0, h, h, 0.0],
        3 => [0.0, h, -h, 0.0],
        _ => return Err(Error::BellIndex(k)),
    };
    Ok(CVector::from_iterator(4, v.iter().map(|&x| c(x, 0.0))))
}

/// Probability that Alice and Bob agree along `dir`, unscaled by the basis
/// choice probability.
pub fn delta(spec: &BellSpectrum, dir: Direction) -> f64 {
    let [l0, l1, l2, l3] = spec.lambda;
    let (st, ct) = dir.theta.sin_cos();
    let (sp, cp) = dir.phi.sin_cos();
    let s2 = st * st;
    l0 + l1 * ct * ct + l2 * s2 * cp * cp + l3 * s2 * sp * sp
}

/// Joint outcome probability `P_{a n, b n'}` weighted by the basis choice
/// probability `weight`.
pub fn correlation(spec: &BellSpectrum, dir: Direction, weight: f64, a: Sign, b: Sign) -> f64 {
    let d = delta(spec, dir);
    if a == b {
        0.5 * weight * d
    } else {
        0.5 * weight * (1.0 - d)
    }
}

/// `tr[(|a n><a n| (x) |b n'><b n'|) rho_AB]`, evaluated from the density
/// matrix rather than the closed expression.
pub fn correlation_by_trace(spec: &BellSpectrum, dir: Direction, a: Sign, b: Sign) -> f64 {
    let ka = alice_ket(dir, a);
    let kb = bob_ket(dir, b);
    let pa: CMatrix = &ka * ka.adjoint();
    let pb: CMatrix = &kb * kb.adjoint();
    (kron(&pa, &pb) * spec.density_matrix()).trace().re
}

/// `eps = 1 - delta`.
pub fn error_rate(spec: &BellSpectrum, dir: Direction) -> f64 {
    1.0 - delta(spec, dir)
}

/// `P_B = sum_i p_i (1 - eps_i)`.
pub fn bob_guess_probability(spec: &BellSpectrum, config: &ProtocolConfig) -> Result<f64> {
    config.validate()?;
    Ok(config
        .directions()
        .iter()
        .zip(config.basis_probs())
        .map(|(&d, &p)| p * delta(spec, d))
        .sum())
}
