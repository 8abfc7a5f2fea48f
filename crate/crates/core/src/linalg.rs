use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `A x = b` for symmetric positive definite `A` (row-major, `d×d`).
///
/// Fails with [`Error::Degenerate`] when a pivot falls below a relative
/// tolerance, i.e. when `A` is singular to working precision.
pub fn cholesky_solve<T: Scalar>(mut a: Vec<T>, b: &[T]) -> Result<Vec<T>> {
    let d = b.len();
    assert_eq!(a.len(), d * d);
    let max_diag = (0..d).map(|i| a[i * d + i].abs()).fold(T::zero(), T::max);
    let tol = T::epsilon() * T::of_usize(d.max(1) * 16) * max_diag.max(T::min_positive_value());
    for j in 0..d {
        let mut s = a[j * d + j];
        for k in 0..j {
            s -= a[j * d + k] * a[j * d + k];
        }
        if !(s > tol) {
            return Err(Error::Degenerate(format!(
                "normal equations are singular (pivot {} at column {j})",
                s
            )));
        }
        let l = s.sqrt();
        a[j * d + j] = l;
        for i in j + 1..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = s / l;
        }
    }
    let mut y = b.to_vec();
    for i in 0..d {
        for k in 0..i {
            let v = a[i * d + k] * y[k];
            y[i] -= v;
        }
        y[i] /= a[i * d + i];
    }
    for i in (0..d).rev() {
        for k in i + 1..d {
            let v = a[k * d + i] * y[k];
            y[i] -= v;
        }
        y[i] /= a[i * d + i];
    }
    Ok(y)
}
