//! Derivative-free optimizers: golden-section line search and a Nelder-Mead
//! simplex.

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
///
/// The search stops when the bracket width falls below
/// `rel_tol * max(|a|, |b|, 1e-300)` and returns the bracket midpoint together
/// with the function value there.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let scale = a.abs().max(b.abs()).max(1e-300);
    while (b - a) > rel_tol * scale {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Result of a simplex minimization.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    /// Best point found.
    pub x: Vec<f64>,
    /// Function value at the best point.
    pub fx: f64,
    /// Number of function evaluations spent.
    pub evaluations: usize,
    /// Whether the spread criteria were met before the evaluation budget ran
    /// out.
    pub converged: bool,
}

/// Nelder-Mead downhill simplex with the standard reflection, expansion,
/// contraction, and shrink coefficients.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Evaluation budget.
    pub max_evals: usize,
    /// Convergence threshold on the value spread across the simplex.
    pub f_tol: f64,
    /// Convergence threshold on the vertex spread (max coordinate distance).
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_evals: 400,
            f_tol: 1e-10,
            x_tol: 1e-8,
        }
    }
}

impl NelderMead {
    /// Minimize `f` starting from `x0`; `scale[i]` sets the initial simplex
    /// edge along coordinate `i`.
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64], scale: &[f64]) -> SimplexResult {
        assert_eq!(x0.len(), scale.len());
        let n = x0.len();
        let mut evals = 0usize;
        let eval = |x: &[f64], count: &mut usize| {
            *count += 1;
            f(x)
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += scale[i];
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

        let mut converged = false;
        while evals < self.max_evals {
            // Order the simplex best-to-worst.
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let f_spread = (values[n] - values[0]).abs();
            let x_spread = simplex[1..]
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if f_spread < self.f_tol && x_spread < self.x_tol {
                converged = true;
                break;
            }

            // Centroid of all but the worst vertex.
            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let blend = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let reflected = blend(1.0);
            let fr = eval(&reflected, &mut evals);
            if fr < values[0] {
                let expanded = blend(2.0);
                let fe = eval(&expanded, &mut evals);
                if fe < fr {
                    simplex[n] = expanded;
                    values[n] = fe;
                } else {
                    simplex[n] = reflected;
                    values[n] = fr;
                }
            } else if fr < values[n - 1] {
                simplex[n] = reflected;
                values[n] = fr;
            } else {
                let contracted = if fr < values[n] { blend(0.5) } else { blend(-0.5) };
                let fc = eval(&contracted, &mut evals);
                if fc < values[n].min(fr) {
                    simplex[n] = contracted;
                    values[n] = fc;
                } else {
                    // Shrink every vertex toward the best one.
                    for i in 1..=n {
                        let best = simplex[0].clone();
                        for (x, b) in simplex[i].iter_mut().zip(&best) {
                            *x = b + 0.5 * (*x - b);
                        }
                        values[i] = eval(&simplex[i].clone(), &mut evals);
                    }
                }
            }
        }

        let best = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        SimplexResult {
            x: simplex[best].clone(),
            fx: values[best],
            evaluations: evals,
            converged,
        }
    }
}
