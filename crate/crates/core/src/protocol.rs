//! Protocol classes and the constraint systems that map observed error
//! rates onto admissible Bell spectra.
//!
//! * four-state (`t = 2`): two rates, one free eigenvalue (`lambda3`);
//! * six-state (`t = 3`): three rates fix the spectrum;
//! * 2t-state (`t > 3`): the first three rates fix the spectrum and the
//!   remaining rates are determined by them.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{error_rate, BellSpectrum, Direction, SPECTRUM_TOL};

/// Smallest admissible `|sin theta|` for a direction entering a denominator.
pub const MIN_SIN_THETA: f64 = 1e-6;
/// Smallest admissible magnitude of the 2t-state denominators.
pub const MIN_DENOMINATOR: f64 = 1e-9;
/// Tolerance used when comparing redundant error rates against the ones
/// implied by the first three.
pub const RATE_CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolClass {
    #[serde(alias = "four_state", alias = "fourstate")]
    FourState,
    #[serde(alias = "six_state", alias = "sixstate")]
    SixState,
    #[serde(alias = "two_t_state", alias = "twotstate")]
    TwoTState,
}

impl ProtocolClass {
    fn admits(self, t: usize) -> bool {
        match self {
            ProtocolClass::FourState => t == 2,
            ProtocolClass::SixState => t == 3,
            ProtocolClass::TwoTState => t > 3,
        }
    }

    pub fn for_basis_count(t: usize) -> Option<Self> {
        match t {
            2 => Some(ProtocolClass::FourState),
            3 => Some(ProtocolClass::SixState),
            t if t > 3 => Some(ProtocolClass::TwoTState),
            _ => None,
        }
    }
}

/// Measuring directions, basis-choice probabilities and protocol class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct ProtocolConfig {
    directions: Vec<Direction>,
    basis_probs: Vec<f64>,
    class: ProtocolClass,
}

/// On-disk JSON layout.
#[derive(Serialize, Deserialize)]
struct RawConfig {
    t: usize,
    directions: Vec<Direction>,
    basis_probs: Vec<f64>,
    class: ProtocolClass,
}

impl TryFrom<RawConfig> for ProtocolConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        if raw.t != raw.directions.len() {
            return Err(Error::InvalidConfig(format!(
                "t = {} but {} directions given",
                raw.t,
                raw.directions.len()
            )));
        }
        ProtocolConfig::new(raw.directions, raw.basis_probs, raw.class)
    }
}

impl From<ProtocolConfig> for RawConfig {
    fn from(c: ProtocolConfig) -> Self {
        RawConfig { t: c.t(), directions: c.directions, basis_probs: c.basis_probs, class: c.class }
    }
}

impl ProtocolConfig {
    pub fn new(directions: Vec<Direction>, basis_probs: Vec<f64>, class: ProtocolClass) -> Result<Self> {
        let cfg = Self { directions, basis_probs, class };
        cfg.validate()?;
        Ok(cfg)
    }

    /// A four-state protocol along `z` and `(theta1, phi1)` with equal basis
    /// probabilities.
    pub fn four_state(theta1: f64, phi1: f64) -> Result<Self> {
        Self::new(vec![Direction::z(), Direction::new(theta1, phi1)?], vec![0.5, 0.5], ProtocolClass::FourState)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.directions.len();
        if t < 2 {
            return Err(Error::InvalidConfig(format!("need at least two bases, got {t}")));
        }
        if !self.class.admits(t) {
            return Err(Error::InvalidConfig(format!("{:?} does not admit t = {t}", self.class)));
        }
        if self.basis_probs.len() != t {
            return Err(Error::InvalidConfig(format!(
                "{} basis probabilities for {t} bases",
                self.basis_probs.len()
            )));
        }
        let d0 = self.directions[0];
        if d0.theta().abs() > 1e-12 || d0.phi().abs() > 1e-12 {
            return Err(Error::InvalidConfig("direction 0 must be the z axis (theta = phi = 0)".into()));
        }
        if self.basis_probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidConfig("basis probabilities must lie in [0, 1]".into()));
        }
        let sum: f64 = self.basis_probs.iter().sum();
        if (sum - 1.0).abs() > SPECTRUM_TOL {
            return Err(Error::InvalidConfig(format!("basis probabilities sum to {sum}")));
        }
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn basis_probs(&self) -> &[f64] {
        &self.basis_probs
    }

    pub fn class(&self) -> ProtocolClass {
        self.class
    }

    /// Eve's dimension, two outcomes per basis.
    pub fn eve_dim(&self) -> usize {
        2 * self.t()
    }

    fn approx_eq(&self, other: &ProtocolConfig) -> bool {
        const TOL: f64 = 1e-12;
        self.class == other.class
            && self.t() == other.t()
            && self.directions.iter().zip(&other.directions).all(|(a, b)| {
                (a.theta() - b.theta()).abs() < TOL && (a.phi() - b.phi()).abs() < TOL
            })
            && self.basis_probs.iter().zip(&other.basis_probs).all(|(a, b)| (a - b).abs() < TOL)
    }

    pub fn is_standard_bb84(&self) -> bool {
        self.approx_eq(&standard_bb84())
    }

    pub fn is_standard_sixstate(&self) -> bool {
        self.approx_eq(&standard_sixstate())
    }

    /// `sum_i p_i eps_i` for a per-basis rate vector.
    pub fn mean_error(&self, eps: &[f64]) -> f64 {
        self.basis_probs.iter().zip(eps).map(|(p, e)| p * e).sum()
    }

    pub(crate) fn check_rates(&self, eps: &[f64]) -> Result<()> {
        if eps.len() != self.t() {
            return Err(Error::DimensionMismatch { expected: self.t(), found: eps.len() });
        }
        if let Some(e) = eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::InfeasibleRates(format!("error rate {e} outside [0, 1]")));
        }
        Ok(())
    }
}

/// BB84: `z` and `x`, each chosen with probability 1/2.
pub fn standard_bb84() -> ProtocolConfig {
    ProtocolConfig {
        directions: vec![Direction::z(), Direction::new(FRAC_PI_2, 0.0).expect("valid")],
        basis_probs: vec![0.5, 0.5],
        class: ProtocolClass::FourState,
    }
}

/// Six-state: `z`, `x`, `y`, each chosen with probability 1/3.
pub fn standard_sixstate() -> ProtocolConfig {
    ProtocolConfig {
        directions: vec![
            Direction::z(),
            Direction::new(FRAC_PI_2, 0.0).expect("valid"),
            Direction::new(FRAC_PI_2, FRAC_PI_2).expect("valid"),
        ],
        basis_probs: vec![1.0 / 3.0; 3],
        class: ProtocolClass::SixState,
    }
}

/// One-parameter family of Bell spectra, affine in `lambda3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFamily {
    intercept: [f64; 4],
    slope: [f64; 4],
    range: (f64, f64),
}

impl SpectrumFamily {
    /// Closed interval of admissible `lambda3`.
    pub fn free_range(&self) -> (f64, f64) {
        self.range
    }

    pub fn is_point(&self) -> bool {
        self.range.1 - self.range.0 <= 0.0
    }

    pub fn coefficients(&self) -> ([f64; 4], [f64; 4]) {
        (self.intercept, self.slope)
    }

    /// The spectrum at `lambda3`, which must lie in [`Self::free_range`].
    pub fn at(&self, lambda3: f64) -> Result<BellSpectrum> {
        let (lo, hi) = self.range;
        if lambda3 < lo - SPECTRUM_TOL || lambda3 > hi + SPECTRUM_TOL {
            return Err(Error::Domain(format!("lambda3 = {lambda3} outside [{lo}, {hi}]")));
        }
        let x = lambda3.clamp(lo, hi);
        BellSpectrum::new(std::array::from_fn(|k| self.intercept[k] + self.slope[k] * x))
    }
}

/// Spectra compatible with a set of observed error rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissible {
    Fixed(BellSpectrum),
    Family(SpectrumFamily),
}

impl Admissible {
    /// Some spectrum from the admissible set, for callers that only need a
    /// representative.
    pub fn representative(&self) -> BellSpectrum {
        match self {
            Admissible::Fixed(s) => *s,
            Admissible::Family(f) => f.at(f.free_range().0).expect("range endpoint admissible"),
        }
    }
}

fn require_class(config: &ProtocolConfig, class: ProtocolClass) -> Result<()> {
    config.validate()?;
    if config.class() != class {
        return Err(Error::InvalidConfig(format!("expected {class:?}, got {:?}", config.class())));
    }
    Ok(())
}

/// Four-state constraint system: `lambda0..lambda2` as affine functions of
/// `lambda3`, with the maximal `lambda3` interval keeping every eigenvalue
/// in `[0, 1]`.
pub fn solve_protocol1(config: &ProtocolConfig, eps0: f64, eps1: f64) -> Result<SpectrumFamily> {
    require_class(config, ProtocolClass::FourState)?;
    config.check_rates(&[eps0, eps1])?;
    let d1 = config.directions()[1];
    let sin_t = d1.theta().sin();
    if sin_t.abs() < MIN_SIN_THETA {
        return Err(Error::SingularDirection(format!("sin(theta1) = {sin_t:e}")));
    }
    let sin2 = sin_t * sin_t;
    let cot2 = (1.0 - sin2) / sin2;
    let cos_p = d1.phi().cos();
    let a0 = 1.0 - (cos_p * cos_p - cot2) * eps0 - eps1 / sin2;
    let mut b0 = (2.0 * d1.phi()).cos();
    if b0.abs() < 1e-12 {
        b0 = 0.0;
    }
    let intercept = [a0, 1.0 - eps0 - a0, eps0, 0.0];
    let slope = [b0, -b0, -1.0, 1.0];

    let range = feasible_interval(&intercept, &slope)
        .ok_or_else(|| Error::InfeasibleRates(format!("no admissible lambda3 for eps = ({eps0}, {eps1})")))?;
    Ok(SpectrumFamily { intercept, slope, range })
}

/// Intersection of `{x : 0 <= a_k + b_k x <= 1}` over `k`. An interval that
/// is empty by no more than the spectrum tolerance collapses to its midpoint.
fn feasible_interval(a: &[f64; 4], b: &[f64; 4]) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for k in 0..4 {
        if b[k] == 0.0 {
            if a[k] < -SPECTRUM_TOL || a[k] > 1.0 + SPECTRUM_TOL {
                return None;
            }
            continue;
        }
        let (x1, x2) = ((0.0 - a[k]) / b[k], (1.0 - a[k]) / b[k]);
        lo = lo.max(x1.min(x2));
        hi = hi.min(x1.max(x2));
    }
    if lo <= hi {
        Some((lo, hi))
    } else if lo - hi <= 2.0 * SPECTRUM_TOL {
        let mid = 0.5 * (lo + hi);
        Some((mid, mid))
    } else {
        None
    }
}

/// Coefficients of `eps = r . (lambda1, lambda2, lambda3)` along `dir`
/// (with `lambda0` eliminated through normalization).
fn rate_row(dir: Direction) -> [f64; 3] {
    let s2 = dir.theta().sin().powi(2);
    let (sp, cp) = dir.phi().sin_cos();
    [s2, 1.0 - s2 * cp * cp, 1.0 - s2 * sp * sp]
}

/// Minimum `|det|` of the three-direction system.
pub const MIN_DETERMINANT: f64 = 1e-9;

fn solve_from_three(dirs: &[Direction], eps: &[f64]) -> Result<BellSpectrum> {
    let rows: Vec<[f64; 3]> = dirs[..3].iter().map(|&d| rate_row(d)).collect();
    let m = Matrix3::from_fn(|i, j| rows[i][j]);
    let det = m.determinant();
    if det.abs() < MIN_DETERMINANT {
        return Err(Error::SingularDirections(det.abs()));
    }
    let rhs = Vector3::new(eps[0], eps[1], eps[2]);
    let sol = m.lu().solve(&rhs).ok_or(Error::SingularDirections(det.abs()))?;
    let l0 = 1.0 - sol.sum();
    BellSpectrum::new([l0, sol[0], sol[1], sol[2]])
        .map_err(|e| Error::InfeasibleRates(format!("eps = {:?}: {e}", &eps[..3])))
}

/// Six-state constraint system: the three rates fix the spectrum.
pub fn solve_protocol2(config: &ProtocolConfig, eps: [f64; 3]) -> Result<BellSpectrum> {
    require_class(config, ProtocolClass::SixState)?;
    config.check_rates(&eps)?;
    solve_from_three(config.directions(), &eps)
}

/// Error rate along direction `k >= 3` of a 2t-state protocol, implied by
/// the first three rates.
pub fn derived_error_rate_protocol3(config: &ProtocolConfig, eps012: [f64; 3], k: usize) -> Result<f64> {
    require_class(config, ProtocolClass::TwoTState)?;
    if !(3..config.t()).contains(&k) {
        return Err(Error::Domain(format!("k = {k} outside 3..{}", config.t())));
    }
    let dirs = config.directions();
    let (t1, p1) = (dirs[1].theta(), dirs[1].phi());
    let (t2, p2) = (dirs[2].theta(), dirs[2].phi());
    let (tk, pk) = (dirs[k].theta(), dirs[k].phi());
    for (name, t) in [("theta1", t1), ("theta2", t2)] {
        if t.sin().abs() < MIN_SIN_THETA {
            return Err(Error::SingularDirection(format!("sin({name}) = {:e}", t.sin())));
        }
    }
    let cross = (p1 - p2).sin() * (p1 + p2).sin();
    if cross.abs() < MIN_DENOMINATOR {
        return Err(Error::SingularDirection(format!("sin(phi1 - phi2) sin(phi1 + phi2) = {cross:e}")));
    }
    let sk2 = tk.sin().powi(2);
    let d1 = sk2 * (p2 - pk).sin() * (p2 + pk).sin() / (t1.sin().powi(2) * cross);
    let d2 = sk2 * (p1 - pk).sin() * (p1 + pk).sin() / (t2.sin().powi(2) * cross);
    let [e0, e1, e2] = eps012;
    Ok((1.0 + d1 - d2) * e0 - d1 * e1 + d2 * e2)
}

/// Admissible spectra for a full rate vector of any protocol class.
pub fn admissible_spectra(config: &ProtocolConfig, eps: &[f64]) -> Result<Admissible> {
    config.validate()?;
    config.check_rates(eps)?;
    match config.class() {
        ProtocolClass::FourState => solve_protocol1(config, eps[0], eps[1]).map(Admissible::Family),
        ProtocolClass::SixState => solve_protocol2(config, [eps[0], eps[1], eps[2]]).map(Admissible::Fixed),
        ProtocolClass::TwoTState => {
            let spec = solve_from_three(config.directions(), eps)?;
            for k in 3..config.t() {
                let implied = error_rate(&spec, config.directions()[k]);
                if (implied - eps[k]).abs() > RATE_CONSISTENCY_TOL {
                    return Err(Error::InfeasibleRates(format!(
                        "eps{k} = {} but the first three rates imply {implied}",
                        eps[k]
                    )));
                }
            }
            Ok(Admissible::Fixed(spec))
        }
    }
}
