//! Lawson–Hanson non-negative least squares.

use nalgebra::{DMatrix, DVector};

/// Solves `min ‖A x − b‖₂` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);

    for _outer in 0..(3 * n + 10) {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else {
            break;
        };
        passive[j] = true;

        for _inner in 0..(3 * n + 10) {
            let z = solve_passive(a, b, &passive);
            let blocked: Vec<usize> = (0..n).filter(|&k| passive[k] && z[k] <= 0.0).collect();
            if blocked.is_empty() {
                x = z;
                break;
            }
            let alpha = blocked
                .iter()
                .map(|&k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k] <= 1e-15 {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    x
}

/// Unconstrained least squares over the passive columns; zero elsewhere.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(&cols);
    let sol = sub
        .svd(true, true)
        .solve(b, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(cols.len()));
    let mut z = DVector::zeros(a.ncols());
    for (k, &j) in cols.iter().enumerate() {
        z[j] = sol[k];
    }
    z
}
