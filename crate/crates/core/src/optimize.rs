//! Derivative-free minimization inside a box.

/// Box constraints; a zero-width interval pins the coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Fold a point back into the box by mirror reflection at the walls.
    pub fn reflect(&self, x: &mut [f64]) {
        for ((xi, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            let width = hi - lo;
            if width <= 0.0 {
                *xi = lo;
                continue;
            }
            let period = 2.0 * width;
            let mut t = (*xi - lo).rem_euclid(period);
            if t > width {
                t = period - t;
            }
            *xi = lo + t;
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Initial simplex edge per coordinate, as a fraction of the box width.
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop when the simplex values spread less than this.
    pub f_tol: f64,
    /// Stop when the simplex extent (relative to box width) is below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.2,
            max_evals: 200,
            f_tol: 1e-10,
            x_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder–Mead with reflection at the box walls. Coordinates with a
/// zero-width range are held fixed and do not enter the simplex.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &NelderMeadOptions,
) -> MinimizeResult {
    let n_all = x0.len();
    let free: Vec<usize> = (0..n_all)
        .filter(|&i| bounds.upper[i] > bounds.lower[i])
        .collect();
    let mut base = x0.to_vec();
    bounds.reflect(&mut base);

    let mut evals = 0usize;
    let mut eval = |y: &[f64], evals: &mut usize| -> (Vec<f64>, f64) {
        let mut full = base.clone();
        for (k, &i) in free.iter().enumerate() {
            full[i] = y[k];
        }
        bounds.reflect(&mut full);
        *evals += 1;
        let v = f(&full);
        (full, if v.is_nan() { f64::INFINITY } else { v })
    };

    if free.is_empty() {
        let (x, value) = eval(&[], &mut evals);
        return MinimizeResult { x, value, evals, converged: true };
    }

    let n = free.len();
    let widths: Vec<f64> = free.iter().map(|&i| bounds.upper[i] - bounds.lower[i]).collect();
    let start: Vec<f64> = free.iter().map(|&i| base[i]).collect();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let (_, v0) = eval(&start, &mut evals);
    simplex.push((start.clone(), v0));
    for k in 0..n {
        let mut p = start.clone();
        let step = opts.initial_step * widths[k];
        p[k] += if p[k] + step <= bounds.upper[free[k]] { step } else { -step };
        let (_, v) = eval(&p, &mut evals);
        simplex.push((p, v));
    }

    let project = |p: &mut Vec<f64>| {
        let mut full = vec![0.0; n_all];
        for (k, &i) in free.iter().enumerate() {
            full[i] = p[k];
        }
        bounds.reflect(&mut full);
        for (k, &i) in free.iter().enumerate() {
            p[k] = full[i];
        }
    };

    let mut converged = false;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let extent = (0..n)
            .map(|k| {
                let (lo, hi) = simplex.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, s| {
                    (acc.0.min(s.0[k]), acc.1.max(s.0[k]))
                });
                (hi - lo) / widths[k]
            })
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread.abs() <= opts.f_tol) || extent <= opts.x_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|s| s.0[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = (0..n).map(|k| centroid[k] + t * (worst.0[k] - centroid[k])).collect();
            project(&mut p);
            p
        };

        let xr = along(-1.0);
        let (_, fr) = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let (_, fe) = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(-0.5);
                let (_, fc) = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let (_, fc) = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let mut p: Vec<f64> = (0..n).map(|k| best[k] + 0.5 * (s.0[k] - best[k])).collect();
                    project(&mut p);
                    let (_, v) = eval(&p, &mut evals);
                    *s = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = {
        let mut full = base.clone();
        for (k, &i) in free.iter().enumerate() {
            full[i] = simplex[0].0[k];
        }
        bounds.reflect(&mut full);
        (full, simplex[0].1)
    };
    MinimizeResult { x, value, evals, converged }
}

/// Evaluate `f` on a regular grid with `per_axis` points per free coordinate
/// and return the best point together with its value.
pub fn grid_scan<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    bounds: &Bounds,
    per_axis: usize,
) -> (Vec<f64>, f64) {
    let n = bounds.dim();
    let axis = |i: usize| -> Vec<f64> {
        let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
        if hi <= lo || per_axis < 2 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..per_axis)
                .map(|k| lo + (hi - lo) * k as f64 / (per_axis - 1) as f64)
                .collect()
        }
    };
    let axes: Vec<Vec<f64>> = (0..n).map(axis).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut best = (Vec::new(), f64::INFINITY);
    for mut idx in 0..total {
        let mut p = vec![0.0; n];
        for i in 0..n {
            let len = axes[i].len();
            p[i] = axes[i][idx % len];
            idx /= len;
        }
        let v = f(&p);
        if v < best.1 || best.0.is_empty() {
            best = (p, v);
        }
    }
    best
}
