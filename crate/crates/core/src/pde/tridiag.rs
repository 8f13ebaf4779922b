/// Thomas algorithm. `lower[0]` and `upper[n-1]` are ignored.
/// `scratch` must have the same length as `diag`.
pub(crate) fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
    scratch: &mut [f64],
    out: &mut [f64],
) {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n && out.len() == n);
    let mut beta = diag[0];
    out[0] = rhs[0] / beta;
    for j in 1..n {
        scratch[j] = upper[j - 1] / beta;
        beta = diag[j] - lower[j] * scratch[j];
        out[j] = (rhs[j] - lower[j] * out[j - 1]) / beta;
    }
    for j in (0..n - 1).rev() {
        out[j] -= scratch[j + 1] * out[j + 1];
    }
}
