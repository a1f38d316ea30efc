//! Entropic security criterion: mutual information, the Holevo quantity of
//! Eve's conditional states and the resulting secure key rate. All
//! logarithms are base 2 with `0 log 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{admissible_spectra, Admissible, ProtocolConfig, SpectrumFamily};
use crate::states::{BellSpectrum, Direction};

/// Grid points of the lambda3 scan preceding golden-section refinement.
pub const CHI_GRID: usize = 65;
/// Final bracket width of the lambda3 refinement.
pub const CHI_TOL: f64 = 1e-10;

#[inline]
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `h(x) = -x log2 x - (1 - x) log2(1 - x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0, 1]")));
    }
    Ok(-xlog2x(x) - xlog2x(1.0 - x))
}

/// Shannon entropy of a probability vector.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

fn h(x: f64) -> f64 {
    binary_entropy(x.clamp(0.0, 1.0)).expect("clamped")
}

/// Returns `(I_AB, I_AB - H(p))`: the full mutual information and the one
/// with the basis information deducted.
pub fn mutual_information(config: &ProtocolConfig, eps: &[f64]) -> Result<(f64, f64)> {
    config.validate()?;
    config.check_rates(eps)?;
    let deducted = 1.0 - config.basis_probs().iter().zip(eps).map(|(p, &e)| p * h(e)).sum::<f64>();
    Ok((deducted + shannon_entropy(config.basis_probs()), deducted))
}

/// Eigenvalues `(lambda+, lambda-)` of Eve's state conditioned on Alice's
/// outcome along `dir` (identical for both outcomes).
pub fn conditional_eigenvalues(spec: &BellSpectrum, dir: Direction) -> (f64, f64) {
    let [l0, l1, l2, l3] = spec.lambda();
    let (mu_p, mu_m) = (l0 + l1, l0 - l1);
    let (nu_p, nu_m) = (l2 + l3, l2 - l3);
    let (st, ct) = dir.theta().sin_cos();
    let xi = (mu_p - nu_p).powi(2) * ct * ct;
    let eta = (mu_m * mu_m + nu_m * nu_m + 2.0 * mu_m * nu_m * (2.0 * dir.phi()).cos()) * st * st;
    let r = (xi + eta).clamp(0.0, 1.0).sqrt();
    (0.5 * (1.0 + r), 0.5 * (1.0 - r))
}

/// `chi_AE = H(lambda) - sum_i p_i h(lambda_i+)`, using `S(rho_E) = S(rho_AB)`
/// and equiprobable outcomes in every basis.
pub fn holevo(spec: &BellSpectrum, config: &ProtocolConfig) -> Result<f64> {
    config.validate()?;
    Ok(holevo_unchecked(spec, config))
}

fn holevo_unchecked(spec: &BellSpectrum, config: &ProtocolConfig) -> f64 {
    let conditional: f64 = config
        .directions()
        .iter()
        .zip(config.basis_probs())
        .map(|(&d, &p)| p * h(conditional_eigenvalues(spec, d).0))
        .sum();
    shannon_entropy(&spec.lambda()) - conditional
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub i_ab: f64,
    pub i_ab_basis_deducted: f64,
    pub chi_ae: f64,
    pub rate: f64,
    pub optimizing_lambda3: Option<f64>,
}

impl EntropyReport {
    /// `I_AB - H(p) - chi_AE` before clamping at zero.
    pub fn unclamped_rate(&self) -> f64 {
        self.i_ab_basis_deducted - self.chi_ae
    }
}

/// Maximum of `chi_AE` over the admissible `lambda3` interval: a grid scan
/// followed by golden-section search between the best point's neighbours.
pub fn max_holevo_over_family(family: &SpectrumFamily, config: &ProtocolConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let (lo, hi) = family.free_range();
    let chi = |x: f64| -> Result<f64> { Ok(holevo_unchecked(&family.at(x)?, config)) };
    if family.is_point() {
        return Ok((chi(lo)?, lo));
    }
    let step = (hi - lo) / (CHI_GRID - 1) as f64;
    let mut best = (f64::NEG_INFINITY, lo);
    for i in 0..CHI_GRID {
        let x = if i == CHI_GRID - 1 { hi } else { lo + step * i as f64 };
        let v = chi(x)?;
        if v > best.0 {
            best = (v, x);
        }
    }
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = ((best.1 - step).max(lo), (best.1 + step).min(hi));
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (chi(x1)?, chi(x2)?);
    while b - a > CHI_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = chi(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = chi(x2)?;
        }
    }
    for (v, x) in [(f1, x1), (f2, x2)] {
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

/// `R = max{I_AB - H(p) - max chi_AE, 0}`. The maximum over `lambda3` is
/// only taken for four-state protocols; other classes fix the spectrum.
pub fn secure_key_rate(config: &ProtocolConfig, eps: &[f64]) -> Result<EntropyReport> {
    let (i_ab, i_ab_basis_deducted) = mutual_information(config, eps)?;
    let (chi_ae, optimizing_lambda3) = match admissible_spectra(config, eps)? {
        Admissible::Fixed(spec) => (holevo_unchecked(&spec, config), None),
        Admissible::Family(family) => {
            let (chi, x) = max_holevo_over_family(&family, config)?;
            (chi, Some(x))
        }
    };
    let mut rate = i_ab_basis_deducted - chi_ae;
    if rate < 0.0 {
        rate = 0.0;
    }
    Ok(EntropyReport { i_ab, i_ab_basis_deducted, chi_ae, rate, optimizing_lambda3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    use crate::protocol::{solve_protocol1, standard_bb84, standard_sixstate};

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // -0.11 log2 0.11 - 0.89 log2 0.89
        assert!((binary_entropy(0.11).unwrap() - 0.499_915_958_164_528_2).abs() < 1e-12);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.01).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let (i, d) = mutual_information(&standard_bb84(), &[0.0, 0.0]).unwrap();
        assert_eq!(d, 1.0);
        assert!((i - 2.0).abs() < 1e-15);
        let (_, d) = mutual_information(&standard_bb84(), &[0.1, 0.1]).unwrap();
        assert!((d - (1.0 - h(0.1))).abs() < 1e-15);
        assert!((d - 0.5310).abs() < 1e-4);
        for eps in [[0.0; 3], [0.1, 0.2, 0.05]] {
            let (i, d) = mutual_information(&standard_sixstate(), &eps).unwrap();
            assert!((i - d - 3f64.log2()).abs() < 1e-14);
        }
    }

    #[test]
    fn conditional_eigenvalue_examples() {
        let s = BellSpectrum::new([0.8, 0.1, 0.1, 0.0]).unwrap();
        let (p, m) = conditional_eigenvalues(&s, Direction::z());
        assert!((p - 0.9).abs() < 1e-15 && (m - 0.1).abs() < 1e-15);
        let (p, m) = conditional_eigenvalues(&BellSpectrum::ideal(), Direction::new(0.7, 2.0).unwrap());
        assert!((p - 1.0).abs() < 1e-15 && m.abs() < 1e-15);
        let six = BellSpectrum::new([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap();
        let (p, _) = conditional_eigenvalues(&six, Direction::new(FRAC_PI_2, 0.0).unwrap());
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn holevo_of_pure_state_vanishes() {
        assert!(holevo(&BellSpectrum::ideal(), &standard_bb84()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn chi_maximum_dominates_probes() {
        let cfg = standard_bb84();
        let fam = solve_protocol1(&cfg, 0.11, 0.11).unwrap();
        let (chi, x) = max_holevo_over_family(&fam, &cfg).unwrap();
        let (lo, hi) = fam.free_range();
        for probe in [lo, hi, 0.055] {
            assert!(chi >= holevo(&fam.at(probe).unwrap(), &cfg).unwrap());
        }
        // the BB84 optimum sits at lambda3 = eps^2
        assert!((x - 0.11 * 0.11).abs() < 1e-6);
    }

    #[test]
    fn key_rate_examples() {
        let r = secure_key_rate(&standard_bb84(), &[0.1, 0.1]).unwrap();
        assert!((r.rate - 0.062).abs() < 1e-3);
        let e = (5.0 - 2.0 * 3f64.sqrt()) / 13.0;
        let r = secure_key_rate(&standard_sixstate(), &[e; 3]).unwrap();
        assert!((r.rate - 0.045).abs() < 1e-3);
        assert!(r.optimizing_lambda3.is_none());
        for cfg in [standard_bb84(), standard_sixstate()] {
            let r = secure_key_rate(&cfg, &vec![0.0; cfg.t()]).unwrap();
            assert!((r.rate - 1.0).abs() < 1e-12);
        }
        let r = secure_key_rate(&standard_bb84(), &[0.2, 0.2]).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(r.unclamped_rate() < 0.0);
    }

    #[test]
    fn infeasible_rates_propagate() {
        assert!(matches!(
            secure_key_rate(&standard_sixstate(), &[0.9, 0.0, 0.0]),
            Err(Error::InfeasibleRates(_))
        ));
    }
}
