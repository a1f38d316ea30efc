//! Dense complex helpers for the small matrices used throughout the crate
//! (at most 4·2t on a side).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `max |V^dag V - I|` over all entries.
pub fn unitarity_defect(v: &CMatrix) -> f64 {
    let n = v.ncols();
    let g = v.adjoint() * v;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == C64::default() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Number of real parameters of a traceless Hermitian `n x n` matrix.
pub const fn su_param_count(n: usize) -> usize {
    n * n - 1
}

/// Builds the traceless Hermitian matrix described by `params`.
///
/// Layout: the strict upper triangle row by row as (re, im) pairs, then
/// the first `n - 1` diagonal entries; the last diagonal entry is fixed by
/// the trace condition.
pub fn traceless_hermitian(params: &[f64], n: usize) -> CMatrix {
    assert_eq!(params.len(), su_param_count(n), "parameter count");
    let mut h = CMatrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = c(params[idx], params[idx + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            idx += 2;
        }
    }
    let mut trace = 0.0;
    for i in 0..n.saturating_sub(1) {
        h[(i, i)] = c(params[idx], 0.0);
        trace += params[idx];
        idx += 1;
    }
    if n > 0 {
        h[(n - 1, n - 1)] = c(-trace, 0.0);
    }
    h
}

/// Taylor degree of the exponential and the block size of its
/// Paterson-Stockmeyer evaluation (seven products). With the scaled 1-norm
/// at most 1 the truncation error is below `1/19!`.
const EXP_DEGREE: usize = 18;
const EXP_BLOCK: usize = 4;

/// `n x n` complex matrix with split real and imaginary column-major
/// storage, so the small products below vectorize.
#[derive(Debug, Clone)]
struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Split {
    fn zeros(n: usize) -> Self {
        Self { re: vec![0.0; n * n], im: vec![0.0; n * n] }
    }

    fn set_identity(&mut self, n: usize, scale: f64) {
        self.re.fill(0.0);
        self.im.fill(0.0);
        for i in 0..n {
            self.re[i * n + i] = scale;
        }
    }

    fn add_scaled(&mut self, other: &Split, f: f64) {
        for (x, y) in self.re.iter_mut().zip(&other.re) {
            *x += f * y;
        }
        for (x, y) in self.im.iter_mut().zip(&other.im) {
            *x += f * y;
        }
    }
}

/// `out = a * b`.
fn split_mul(n: usize, a: &Split, b: &Split, out: &mut Split) {
    out.re.fill(0.0);
    out.im.fill(0.0);
    for j in 0..n {
        let (ore, oim) = (&mut out.re[j * n..(j + 1) * n], &mut out.im[j * n..(j + 1) * n]);
        for k in 0..n {
            let (br, bi) = (b.re[j * n + k], b.im[j * n + k]);
            let (ar, ai) = (&a.re[k * n..(k + 1) * n], &a.im[k * n..(k + 1) * n]);
            for i in 0..n {
                ore[i] += ar[i] * br - ai[i] * bi;
                oim[i] += ar[i] * bi + ai[i] * br;
            }
        }
    }
}

/// Reusable buffers for `exp(iH)` of `n x n` Hermitian matrices.
#[derive(Debug, Clone)]
pub struct ExpmWorkspace {
    n: usize,
    powers: [Split; EXP_BLOCK],
    top: Split,
    acc: Split,
    tmp: Split,
    col: Vec<f64>,
    inv_fact: [f64; EXP_DEGREE + 1],
}

impl ExpmWorkspace {
    pub fn new(n: usize) -> Self {
        let mut inv_fact = [1.0; EXP_DEGREE + 1];
        for k in 1..=EXP_DEGREE {
            inv_fact[k] = inv_fact[k - 1] / k as f64;
        }
        Self {
            n,
            powers: std::array::from_fn(|_| Split::zeros(n)),
            top: Split::zeros(n),
            acc: Split::zeros(n),
            tmp: Split::zeros(n),
            col: vec![0.0; n],
            inv_fact,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `exp(iH)` for `H = traceless_hermitian(params, n)`; entry `(i, j)` of
    /// the result is then available through [`ExpmWorkspace::entry`].
    pub fn exp_i_traceless(&mut self, params: &[f64]) {
        let n = self.n;
        assert_eq!(params.len(), su_param_count(n), "parameter count");
        // column sums of |re| + |im| bound the 1-norm from above
        let col = &mut self.col;
        col.fill(0.0);
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let m = params[idx].abs() + params[idx + 1].abs();
                col[i] += m;
                col[j] += m;
                idx += 2;
            }
        }
        let diag = &params[idx..];
        let last = -diag.iter().sum::<f64>();
        for (i, c) in col.iter_mut().enumerate() {
            *c += diag.get(i).copied().unwrap_or(last).abs();
        }
        let norm = col.iter().copied().fold(0.0, f64::max);
        let scale = self.scale_for(norm);

        // A = i * scale * H
        let a = &mut self.powers[1];
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let (p, q) = (params[idx] * scale.0, params[idx + 1] * scale.0);
                a.re[j * n + i] = -q;
                a.im[j * n + i] = p;
                a.re[i * n + j] = q;
                a.im[i * n + j] = p;
                idx += 2;
            }
        }
        for i in 0..n {
            a.re[i * n + i] = 0.0;
            a.im[i * n + i] = diag.get(i).copied().unwrap_or(last) * scale.0;
        }
        self.finish(scale.1);
    }

    /// `exp(iH)` for an arbitrary Hermitian `h`.
    pub fn exp_i_hermitian(&mut self, h: &CMatrix) -> CMatrix {
        let n = self.n;
        assert_eq!(h.shape(), (n, n), "matrix size");
        let norm = (0..n).map(|j| (0..n).map(|i| h[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
        let scale = self.scale_for(norm);
        let a = &mut self.powers[1];
        for j in 0..n {
            for i in 0..n {
                let z = h[(i, j)] * scale.0;
                a.re[j * n + i] = -z.im;
                a.im[j * n + i] = z.re;
            }
        }
        self.finish(scale.1);
        CMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    /// Entry `(i, j)` of the last computed exponential.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        let k = j * self.n + i;
        c(self.acc.re[k], self.acc.im[k])
    }

    /// `(2^-s, s)` with `2^-s * norm <= 1`.
    fn scale_for(&self, norm: f64) -> (f64, u32) {
        let mut squarings = 0u32;
        let mut scale = 1.0;
        while norm * scale > 1.0 {
            scale *= 0.5;
            squarings += 1;
        }
        (scale, squarings)
    }

    fn finish(&mut self, squarings: u32) {
        let n = self.n;
        let Self { powers, top, acc, tmp, inv_fact, .. } = self;
        powers[0].set_identity(n, 1.0);
        let (lo, hi) = powers.split_at_mut(2);
        split_mul(n, &lo[1], &lo[1], &mut hi[0]);
        let (p2, p3) = hi.split_at_mut(1);
        split_mul(n, &p2[0], &lo[1], &mut p3[0]);
        split_mul(n, &p2[0], &p2[0], top);

        // block j is sum_i A^i / (4j + i)!
        let block = |j: usize, out: &mut Split| {
            out.set_identity(n, inv_fact[EXP_BLOCK * j]);
            for (i, p) in powers.iter().enumerate().skip(1) {
                if let Some(&f) = inv_fact.get(EXP_BLOCK * j + i) {
                    out.add_scaled(p, f);
                }
            }
        };
        block(EXP_DEGREE / EXP_BLOCK, acc);
        for j in (0..EXP_DEGREE / EXP_BLOCK).rev() {
            split_mul(n, acc, top, tmp);
            block(j, acc);
            acc.add_scaled(tmp, 1.0);
        }
        for _ in 0..squarings {
            split_mul(n, acc, acc, tmp);
            std::mem::swap(acc, tmp);
        }
    }
}

/// `exp(iH)` for Hermitian `H`, by scaling and squaring a Taylor polynomial.
pub fn expm_i_hermitian(h: &CMatrix) -> CMatrix {
    ExpmWorkspace::new(h.nrows()).exp_i_hermitian(h)
}
