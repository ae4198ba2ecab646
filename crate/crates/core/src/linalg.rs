//! Dense linear solves for the small systems that appear in Newton iterations
//! and normal equations.

/// Solve `A x = b` in place by Gaussian elimination with partial pivoting.
///
/// `a` is row-major `n × n` and is overwritten; `b` holds `nrhs` right-hand
/// sides stored row-major as `n × nrhs` and is replaced by the solution.
/// Returns `false` when a pivot is smaller than `pivot_tol` times the largest
/// absolute entry of `A`.
pub(crate) fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize, nrhs: usize, pivot_tol: f64) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * nrhs);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return false;
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        if a[pivot_row * n + col].abs() <= pivot_tol * scale {
            return false;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            for k in 0..nrhs {
                b.swap(col * nrhs + k, pivot_row * nrhs + k);
            }
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            for k in 0..nrhs {
                b[row * nrhs + k] -= factor * b[col * nrhs + k];
            }
        }
    }
    for col in (0..n).rev() {
        let pivot = a[col * n + col];
        for k in 0..nrhs {
            let mut acc = b[col * nrhs + k];
            for j in col + 1..n {
                acc -= a[col * n + j] * b[j * nrhs + k];
            }
            b[col * nrhs + k] = acc / pivot;
        }
    }
    true
}
