//! Seeded oracle sweeps shared by the property tests and the acceptance
//! suite. Each returns the largest deviation it saw.

#![allow(dead_code)]

use std::f64::consts::PI;

use eveguess::analysis::{haar_unitary, random_spectrum, stream_rng};
use eveguess::guessing::{build_purification, Purification};
use eveguess::linalg::{c, CMatrix, CVector};
use eveguess::protocol::{derived_error_rate_protocol3, solve_protocol2, standard_sixstate, ProtocolClass};
use eveguess::states::{alice_ket, bell_state, correlation, error_rate};
use eveguess::{BellSpectrum, Direction, ProtocolConfig, Sign};
use nalgebra::{Matrix3, Matrix4, Vector4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_direction(rng: &mut ChaCha8Rng) -> Direction {
    Direction::new(rng.random_range(0.0..=PI), rng.random_range(0.0..2.0 * PI)).unwrap()
}

/// `|C(+,+) - C(-,-)|`, `|C(+,-) - C(-,+)|` and the normalization defect.
pub fn correlation_symmetry(cases: usize, seed: u64) -> f64 {
    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let spec = random_spectrum(&mut rng);
        let dir = random_direction(&mut rng);
        let w = rng.random_range(0.0..=1.0);
        let corr = |a, b| correlation(&spec, dir, w, a, b);
        let (pp, mm) = (corr(Sign::Plus, Sign::Plus), corr(Sign::Minus, Sign::Minus));
        let (pm, mp) = (corr(Sign::Plus, Sign::Minus), corr(Sign::Minus, Sign::Plus));
        worst = worst.max((pp - mm).abs()).max((pm - mp).abs()).max((pp + mm + pm + mp - w).abs());
    }
    worst
}

/// Six-state rates of random spectra, solved back and re-evaluated.
pub fn protocol2_round_trip(cases: usize, seed: u64) -> f64 {
    let cfg = standard_sixstate();
    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let spec = random_spectrum(&mut rng);
        let eps: Vec<f64> = cfg.directions().iter().map(|&d| error_rate(&spec, d)).collect();
        let back = solve_protocol2(&cfg, [eps[0], eps[1], eps[2]]).unwrap();
        for (d, e) in cfg.directions().iter().zip(&eps) {
            worst = worst.max((error_rate(&back, *d) - e).abs());
        }
    }
    worst
}

/// Spectrum from the first three rates by a dense solve in all four
/// unknowns, normalization as the fourth equation.
pub fn reconstruct(dirs: &[Direction], eps: [f64; 3]) -> [f64; 4] {
    let row = |d: Direction| {
        let (st, ct) = d.theta().sin_cos();
        let (sp, cp) = d.phi().sin_cos();
        [1.0, ct * ct, st * st * cp * cp, st * st * sp * sp]
    };
    let m = Matrix4::from_fn(|i, j| if i < 3 { row(dirs[i])[j] } else { 1.0 });
    let rhs = Vector4::new(1.0 - eps[0], 1.0 - eps[1], 1.0 - eps[2], 1.0);
    let x = m.lu().solve(&rhs).expect("nonsingular");
    [x[0], x[1], x[2], x[3]]
}

/// Derived fourth-basis rate against the reconstruction oracle over random
/// direction sets, skipping near-singular ones.
pub fn protocol3_vs_reconstruction(cases: usize, seed: u64) -> f64 {
    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < cases {
        let mut dir = || Direction::new(rng.random_range(0.3..PI - 0.3), rng.random_range(0.0..2.0 * PI)).unwrap();
        let dirs = vec![Direction::z(), dir(), dir(), dir()];
        let (p1, p2) = (dirs[1].phi(), dirs[2].phi());
        let cross = (p1 - p2).sin() * (p1 + p2).sin();
        let rows = Matrix3::from_fn(|i, j| {
            let d = dirs[i];
            let s2 = d.theta().sin().powi(2);
            [s2, 1.0 - s2 * d.phi().cos().powi(2), 1.0 - s2 * d.phi().sin().powi(2)][j]
        });
        if cross.abs() < 0.05 || rows.determinant().abs() < 0.05 {
            continue;
        }
        let cfg = ProtocolConfig::new(dirs.clone(), vec![0.25; 4], ProtocolClass::TwoTState).unwrap();
        let eps = [rng.random_range(0.0..0.2), rng.random_range(0.0..0.2), rng.random_range(0.0..0.2)];
        let l = reconstruct(&dirs, eps);
        let (st, ct) = dirs[3].theta().sin_cos();
        let (sp, cp) = dirs[3].phi().sin_cos();
        let oracle = 1.0 - (l[0] + l[1] * ct * ct + l[2] * (st * cp).powi(2) + l[3] * (st * sp).powi(2));
        worst = worst.max((derived_error_rate_protocol3(&cfg, eps, 3).unwrap() - oracle).abs());
        checked += 1;
    }
    worst
}

/// `(p, Tr_AB[(|a><a| x I) psi psi^dag] / p)` from the full purification.
pub fn conditional_state(psi: &Purification, a: &CVector) -> (f64, CMatrix) {
    let n = psi.dim_e();
    let amp = psi.amplitudes();
    let proj = CMatrix::from_fn(2, n, |b, e| (0..2).map(|ai| a[ai].conj() * amp[(2 * ai + b) * n + e]).sum());
    let rho = proj.transpose() * proj.map(|z| z.conj());
    let p = rho.trace().re;
    (p, rho / c(p, 0.0))
}

fn sorted_eigenvalues(m: CMatrix) -> Vec<f64> {
    let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// Closed conditional eigenvalues against brute-force eigenvalues of the
/// explicit conditional Eve state for Haar-random bases of size 4 and 6.
pub fn conditional_eigenvalues_vs_brute_force(cases: usize, seed: u64) -> f64 {
    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let spec = random_spectrum(&mut rng);
        let v = haar_unitary(if i % 2 == 0 { 4 } else { 6 }, &mut rng);
        let dir = random_direction(&mut rng);
        let psi = build_purification(&spec, &v).unwrap();
        let (lp, lm) = eveguess::keyrate::conditional_eigenvalues(&spec, dir);
        for s in Sign::BOTH {
            let (p, rho) = conditional_state(&psi, &alice_ket(dir, s));
            let eig = sorted_eigenvalues(rho);
            worst = worst.max((p - 0.5).abs()).max((eig[0] - lp).abs()).max((eig[1] - lm).abs());
            worst = eig[2..].iter().fold(worst, |w, x| w.max(x.abs()));
        }
    }
    worst
}

/// Norm defect, Bell-basis reduction against `diag(lambda)` and the Eve
/// marginal spectrum against `lambda`.
pub fn purification_invariants(cases: usize, seed: u64) -> f64 {
    let mut rng = stream_rng(seed, 0);
    let bell = CMatrix::from_fn(4, 4, |i, k| bell_state(k).unwrap()[i]);
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let spec: BellSpectrum = random_spectrum(&mut rng);
        let v = haar_unitary(4 + 2 * (i % 3), &mut rng);
        let psi = build_purification(&spec, &v).unwrap();
        worst = worst.max((psi.norm() - 1.0).abs());
        let in_bell = bell.adjoint() * psi.reduced_ab() * &bell;
        for r in 0..4 {
            for s in 0..4 {
                let expect = if r == s { spec.get(r) } else { 0.0 };
                worst = worst.max((in_bell[(r, s)] - c(expect, 0.0)).norm());
            }
        }
        let eig = sorted_eigenvalues(psi.reduced_e());
        let mut lam = spec.lambda().to_vec();
        lam.sort_by(|a, b| b.total_cmp(a));
        lam.resize(eig.len(), 0.0);
        worst = eig.iter().zip(&lam).fold(worst, |w, (a, b)| w.max((a - b).abs()));
    }
    worst
}

/// Largest deviation of the first-column mean `|V_r0|^2` from `1/n`.
pub fn haar_column_mean_deviation(n: usize, draws: u64, seed: u64) -> f64 {
    let mut sum = vec![0.0; n];
    for i in 0..draws {
        let v = haar_unitary(n, &mut stream_rng(seed, i));
        for (r, s) in sum.iter_mut().enumerate() {
            *s += v.matrix()[(r, 0)].norm_sqr();
        }
    }
    sum.iter().map(|s| (s / draws as f64 - 1.0 / n as f64).abs()).fold(0.0, f64::max)
}
