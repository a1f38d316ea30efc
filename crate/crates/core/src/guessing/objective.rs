use crate::error::Result;
use crate::linalg::{CMatrix, C64};
use crate::protocol::ProtocolConfig;
use crate::states::{alice_ket, bell_state, BellSpectrum, Sign};

use super::eve_outcome;

/// `P_E` as a function of Eve's basis for a fixed spectrum and protocol.
///
/// Outcome `e` contributes `sum_b |sum_k V[e,k] w[e][b][k]|^2` where
/// `w[e][b][k] = sqrt(lambda_k) sum_a <a_e|a> <a b|phi_k>` conjugated; only
/// the first four columns of `V` enter.
#[derive(Debug, Clone)]
pub struct GuessObjective {
    weights: Vec<[[C64; 4]; 2]>,
}

impl GuessObjective {
    pub fn new(spec: &BellSpectrum, config: &ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let n = config.eve_dim();
        let mut weights = vec![[[C64::default(); 4]; 2]; n];
        let bells: Vec<_> = (0..4).map(|k| bell_state(k)).collect::<Result<_>>()?;
        for (j, &dir) in config.directions().iter().enumerate() {
            for s in Sign::BOTH {
                let a = alice_ket(dir, s);
                let e = eve_outcome(j, s);
                for b in 0..2 {
                    for k in 0..4 {
                        let g: C64 = (0..2).map(|ai| a[ai].conj() * bells[k][2 * ai + b]).sum::<C64>()
                            * spec.get(k).sqrt();
                        weights[e][b][k] = g.conj();
                    }
                }
            }
        }
        Ok(Self { weights })
    }

    pub fn eve_dim(&self) -> usize {
        self.weights.len()
    }

    /// Evaluates at a full unitary (or any matrix with at least four columns
    /// and `eve_dim` rows).
    pub fn evaluate(&self, v: &CMatrix) -> f64 {
        self.evaluate_with(|e, k| v[(e, k)])
    }

    /// Evaluates with `entry(e, k)` supplying `V[e, k]` for `k < 4`.
    #[inline]
    pub fn evaluate_with(&self, entry: impl Fn(usize, usize) -> C64) -> f64 {
        let mut total = 0.0;
        for (e, w) in self.weights.iter().enumerate() {
            let row = [entry(e, 0), entry(e, 1), entry(e, 2), entry(e, 3)];
            for wb in w {
                let z = row[0] * wb[0] + row[1] * wb[1] + row[2] * wb[2] + row[3] * wb[3];
                total += z.norm_sqr();
            }
        }
        total
    }
}
