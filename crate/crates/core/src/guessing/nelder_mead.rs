//! Nelder-Mead simplex minimizer with dimension-adaptive coefficients
//! (Gao & Han, 2012).

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop once the spread of simplex values is below this.
    pub ftol: f64,
    /// ... and every vertex is within this distance (max-norm) of the best.
    pub xtol: f64,
    pub max_evals: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { ftol: 1e-8, xtol: 1e-8, max_evals: 20_000, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`. The returned value never exceeds
/// `f(x0)`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let value = eval(x0, &mut evals);
        return NelderMeadResult { x: Vec::new(), value, evals, converged: true };
    }

    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut converged = false;
    // running sum of all vertices, rebuilt periodically to bound drift
    let mut sum = vec![0.0; n];
    let mut since_rebuild = usize::MAX;

    while evals < opts.max_evals {
        // best, worst and second worst in one pass (first index wins ties)
        let (mut best, mut worst) = (0, 0);
        for i in 1..=n {
            if values[i] < values[best] {
                best = i;
            }
            if values[i] >= values[worst] {
                worst = i;
            }
        }
        let second_worst = (0..=n)
            .filter(|&i| i != worst)
            .fold(None, |acc: Option<usize>, i| match acc {
                Some(j) if values[j] > values[i] => Some(j),
                _ => Some(i),
            })
            .expect("at least two vertices");

        // the diameter is only needed once the values have collapsed
        if values[worst] - values[best] <= opts.ftol {
            let within = simplex
                .iter()
                .all(|p| p.iter().zip(&simplex[best]).all(|(a, b)| (a - b).abs() <= opts.xtol));
            if within {
                converged = true;
                break;
            }
        }

        if since_rebuild > n {
            sum.iter_mut().for_each(|c| *c = 0.0);
            for p in &simplex {
                for (c, x) in sum.iter_mut().zip(p) {
                    *c += x;
                }
            }
            since_rebuild = 0;
        }
        since_rebuild += 1;
        for ((c, s), w) in centroid.iter_mut().zip(&sum).zip(&simplex[worst]) {
            *c = (s - w) / nf;
        }

        let along = |coef: f64, out: &mut Vec<f64>, simplex: &Vec<Vec<f64>>, centroid: &Vec<f64>| {
            for ((o, c), w) in out.iter_mut().zip(centroid).zip(&simplex[worst]) {
                *o = c + coef * (c - w);
            }
        };

        along(alpha, &mut trial, &simplex, &centroid);
        let fr = eval(&trial, &mut evals);
        if fr < values[best] {
            along(alpha * beta, &mut trial2, &simplex, &centroid);
            let fe = eval(&trial2, &mut evals);
            if fe < fr {
                replace_vertex(&mut simplex, &mut sum, worst, &trial2);
                values[worst] = fe;
            } else {
                replace_vertex(&mut simplex, &mut sum, worst, &trial);
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            replace_vertex(&mut simplex, &mut sum, worst, &trial);
            values[worst] = fr;
            continue;
        }
        let (coef, threshold) = if fr < values[worst] { (alpha * gamma, fr) } else { (-gamma, values[worst]) };
        along(coef, &mut trial2, &simplex, &centroid);
        let fc = eval(&trial2, &mut evals);
        if fc <= threshold {
            replace_vertex(&mut simplex, &mut sum, worst, &trial2);
            values[worst] = fc;
            continue;
        }
        // shrink towards the best vertex
        let anchor = simplex[best].clone();
        for i in (0..=n).filter(|&i| i != best) {
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + delta * (*x - a);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
        since_rebuild = usize::MAX;
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("nonempty simplex");
    NelderMeadResult { x: simplex[best].clone(), value: values[best], evals, converged }
}

fn replace_vertex(simplex: &mut [Vec<f64>], sum: &mut [f64], i: usize, new: &[f64]) {
    for ((s, old), x) in sum.iter_mut().zip(&simplex[i]).zip(new) {
        *s += x - old;
    }
    simplex[i].copy_from_slice(new);
}
