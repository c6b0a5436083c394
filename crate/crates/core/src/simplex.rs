//! Derivative-free simplex minimizer (Nelder–Mead with dimension-adaptive
//! coefficients) used by the convex-roof search.
//!
//! After the simplex collapses the search is rebuilt around the best vertex
//! with a halved step, which guards against the premature collapse Nelder–Mead
//! is prone to in higher dimensions. The best value seen never increases.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Stop once the spread of objective values across the simplex is below this.
    pub tolerance: f64,
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-8,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best value after every iteration.
    pub history: Vec<f64>,
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn build<F: FnMut(&[f64]) -> f64>(center: &[f64], center_value: f64, step: f64, f: &mut F) -> Self {
        let n = center.len();
        let mut points = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        points.push(center.to_vec());
        values.push(center_value);
        for k in 0..n {
            let mut p = center.to_vec();
            p[k] += step;
            values.push(f(&p));
            points.push(p);
        }
        Self { points, values }
    }

    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx.iter().map(|&i| std::mem::take(&mut self.points[i])).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn spread(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimizes `f` starting from `x0`.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };
    let f0 = eval(x0);
    if n == 0 {
        return SimplexOutcome {
            x: Vec::new(),
            value: f0,
            iterations: 0,
            evaluations: 1,
            history: vec![f0],
        };
    }

    let nf = n as f64;
    let (reflect, expand) = (1.0, 1.0 + 2.0 / nf);
    let contract = (0.75 - 0.5 / nf).max(0.5);
    let shrink = (1.0 - 1.0 / nf).max(0.5);

    let mut step = opts.initial_step;
    let mut simplex = Simplex::build(x0, f0, step, &mut eval);
    simplex.order();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut cycle_start_best = simplex.values[0];

    while iterations < opts.max_iterations {
        if simplex.spread() <= opts.tolerance {
            let improved = cycle_start_best - simplex.values[0];
            if improved <= opts.tolerance && iterations > 0 {
                break;
            }
            cycle_start_best = simplex.values[0];
            step *= 0.5;
            let best = simplex.points[0].clone();
            simplex = Simplex::build(&best, simplex.values[0], step, &mut eval);
            simplex.order();
            if simplex.spread() <= opts.tolerance {
                break;
            }
        }
        iterations += 1;

        let worst = n;
        let mut centroid = vec![0.0; n];
        for p in &simplex.points[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / nf;
            }
        }

        let xr = affine(&centroid, &simplex.points[worst], -reflect);
        let fr = eval(&xr);
        if fr < simplex.values[0] {
            let xe = affine(&centroid, &simplex.points[worst], -expand);
            let fe = eval(&xe);
            if fe < fr {
                simplex.points[worst] = xe;
                simplex.values[worst] = fe;
            } else {
                simplex.points[worst] = xr;
                simplex.values[worst] = fr;
            }
        } else if fr < simplex.values[n - 1] {
            simplex.points[worst] = xr;
            simplex.values[worst] = fr;
        } else {
            // outside contraction when the reflection beat the worst vertex
            let toward = if fr < simplex.values[worst] {
                &xr
            } else {
                &simplex.points[worst]
            };
            let xc = affine(&centroid, toward, contract);
            let fc = eval(&xc);
            let target = simplex.values[worst].min(fr);
            if fc < target {
                simplex.points[worst] = xc;
                simplex.values[worst] = fc;
            } else {
                let best = simplex.points[0].clone();
                for k in 1..=n {
                    let p = affine(&best, &simplex.points[k], shrink);
                    simplex.values[k] = eval(&p);
                    simplex.points[k] = p;
                }
            }
        }
        simplex.order();
        history.push(simplex.values[0]);
    }

    SimplexOutcome {
        x: simplex.points[0].clone(),
        value: simplex.values[0],
        iterations,
        evaluations,
        history,
    }
}
