//! Seeded random sampling: per-item ChaCha streams, Haar unitaries and
//! uniformly distributed Bell spectra.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::guessing::EveBasis;
use crate::linalg::{c, CMatrix, C64};
use crate::states::BellSpectrum;

pub type SampleRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded by `seed`. Work items
/// that draw from their own stream give results independent of scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Haar-distributed special unitary of size `n`.
///
/// A complex Ginibre matrix is QR-factorized, the phases of `R`'s diagonal
/// are moved into `Q`, and the determinant phase is divided out.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> EveBasis {
    assert!(n >= 1, "dimension must be positive");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    let det = q.determinant();
    let correction = C64::from_polar(1.0, -det.arg() / n as f64);
    q *= correction;
    EveBasis::new_unchecked(q)
}

/// Spectrum drawn uniformly from the probability 3-simplex.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R) -> BellSpectrum {
    let draws: [f64; 4] = std::array::from_fn(|_| rng.sample::<f64, _>(Exp1));
    let total: f64 = draws.iter().sum();
    let mut lambda = draws.map(|x| x / total);
    // fold the rounding residue into the largest entry
    let residue = 1.0 - lambda.iter().sum::<f64>();
    let imax = (0..4).max_by(|&a, &b| lambda[a].total_cmp(&lambda[b])).unwrap_or(0);
    lambda[imax] += residue;
    BellSpectrum::new(lambda).expect("normalized draw")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    #[test]
    fn one_dimensional_haar_is_one() {
        let v = haar_unitary(1, &mut stream_rng(3, 0));
        assert!((v.matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn haar_is_reproducible_special_unitary() {
        let a = haar_unitary(4, &mut stream_rng(11, 2));
        let b = haar_unitary(4, &mut stream_rng(11, 2));
        assert_eq!(a, b);
        assert!(unitarity_defect(a.matrix()) < 1e-12);
        assert!((a.matrix().determinant() - c(1.0, 0.0)).norm() < 1e-12);
        let other = haar_unitary(4, &mut stream_rng(11, 3));
        assert_ne!(a, other);
    }

    #[test]
    fn spectra_are_valid_and_reproducible() {
        let mut rng = stream_rng(5, 0);
        for _ in 0..1000 {
            let s = random_spectrum(&mut rng);
            assert!(s.lambda().iter().all(|l| (0.0..=1.0).contains(l)));
            assert!((s.lambda().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert_eq!(random_spectrum(&mut stream_rng(1, 1)), random_spectrum(&mut stream_rng(1, 1)));
    }
}
