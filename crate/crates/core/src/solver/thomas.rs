use crate::error::{Error, Result};

/// Solves a tridiagonal system in place with the Thomas algorithm.
///
/// `lower[0]` and `upper[n-1]` are ignored. On return `rhs` holds the
/// solution.
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let mut scratch = vec![0.0; rhs.len()];
    thomas_solve_with(lower, diag, upper, rhs, &mut scratch)
}

/// [`thomas_solve`] with caller-provided scratch of at least `rhs.len()`.
pub fn thomas_solve_with(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    if rhs.is_empty() {
        return Ok(());
    }
    thomas_first_row(diag[0], upper[0], lower, diag, upper, rhs, scratch)
}

/// Thomas sweep with the first row's `(diag, upper)` replaced by `(d0, u0)`.
pub(crate) fn thomas_first_row(
    d0: f64,
    u0: f64,
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    let n = rhs.len();
    debug_assert!(lower.len() >= n && diag.len() >= n && upper.len() >= n && scratch.len() >= n);
    if n == 0 {
        return Ok(());
    }
    let mut pivot = d0;
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularPivot { row: 0 });
    }
    rhs[0] /= pivot;
    for i in 1..n {
        let up = if i == 1 { u0 } else { upper[i - 1] };
        scratch[i - 1] = up / pivot;
        pivot = diag[i] - lower[i] * scratch[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularPivot { row: i });
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn multiply(l: &[f64], d: &[f64], u: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = d[i] * x[i];
                if i > 0 {
                    s += l[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += u[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting on the dense matrix.
    fn dense_solve(l: &[f64], d: &[f64], u: &[f64], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            a[i][i] = d[i];
            if i > 0 {
                a[i][i - 1] = l[i];
            }
            if i + 1 < n {
                a[i][i + 1] = u[i];
            }
            a[i][n] = b[i];
        }
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
                .unwrap();
            a.swap(c, p);
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for q in c..=n {
                    a[r][q] -= f * a[c][q];
                }
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|q| a[r][q] * x[q]).sum();
            x[r] = (a[r][n] - s) / a[r][r];
        }
        x
    }

    #[test]
    fn identity_leaves_rhs() {
        let mut b = vec![1.0, -2.0, 3.5];
        thomas_solve(&[0.0; 3], &[1.0; 3], &[0.0; 3], &mut b).unwrap();
        assert_eq!(b, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn laplacian_round_trip() {
        let n = 20;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let (l, d, u) = (vec![-1.0; n], vec![2.0; n], vec![-1.0; n]);
        let mut b = multiply(&l, &d, &u, &x);
        thomas_solve(&l, &d, &u, &mut b).unwrap();
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 50;
            let l: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d: Vec<f64> = (0..n)
                .map(|i| l[i].abs() + u[i].abs() + rng.random_range(0.1..2.0))
                .collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let dense = dense_solve(&l, &d, &u, &b);
            let mut x = b.clone();
            thomas_solve(&l, &d, &u, &mut x).unwrap();
            let diff = x.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-11, "{diff}");
            let res = multiply(&l, &d, &u, &x);
            let r = res.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(r < 1e-10 * scale);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut b = vec![1.0, 1.0];
        let err = thomas_solve(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &mut b).unwrap_err();
        assert_eq!(err, Error::SingularPivot { row: 1 });
    }
}
