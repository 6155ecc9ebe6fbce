//! Derivative-free simplex minimizer.

/// Stopping rules for [`minimize`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop when all vertex values lie within `f_tol_rel·|f_best| + f_tol_abs` of the best.
    pub f_tol_rel: f64,
    pub f_tol_abs: f64,
    /// ... and the simplex diameter is below `x_tol`.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_iter: 10_000, f_tol_rel: 1e-15, f_tol_abs: 1e-40, x_tol: 1e-13 }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value after each iteration.
    pub trace: Vec<f64>,
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of size `step`.
pub fn minimize(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: &[f64], opts: NelderMeadOptions) -> NelderMeadResult {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let y = f(x);
        if y.is_nan() {
            f64::INFINITY
        } else {
            y
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let spread = values[n] - best;
        let diameter = simplex[1..]
            .iter()
            .map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol_rel * best.abs() + opts.f_tol_abs && diameter <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect() };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let x: Vec<f64> = (0..n).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
                    values[i] = eval(&x);
                    simplex[i] = x;
                }
            }
        }
        trace.push(values.iter().copied().fold(f64::INFINITY, f64::min));
    }

    let (bi, _) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty simplex");
    NelderMeadResult { x: simplex[bi].clone(), fx: values[bi], iterations, converged, trace }
}
