//! Dense Gaussian elimination with partial pivoting for the small systems
//! that show up when fitting blending profiles.

// row/column indices mirror the textbook elimination loops
#![allow(clippy::needless_range_loop)]

use crate::{Error, Real, Result};

/// Solves `a · x = b` in place for a square row-major matrix.
///
/// `a` is destroyed; on success the solution is returned and `b` holds it too.
pub fn solve_in_place<T: Real, const N: usize>(
    a: &mut [[T; N]; N],
    b: &mut [T; N],
) -> Result<[T; N]> {
    // Scale-aware singularity threshold.
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(T::zero(), |m, v| m.max(v.abs()));
    let tiny = T::epsilon() * scale * T::from_usize_lossy(N);

    for col in 0..N {
        let (pivot_row, pivot_abs) =
            (col..N)
                .map(|r| (r, a[r][col].abs()))
                .fold((col, T::neg_infinity()), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                });
        if !(pivot_abs > tiny) {
            return Err(Error::SingularSystem { column: col });
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            b.swap(pivot_row, col);
        }
        let pivot = a[col][col];
        for r in col + 1..N {
            let factor = a[r][col] / pivot;
            if factor == T::zero() {
                continue;
            }
            a[r][col] = T::zero();
            for c in col + 1..N {
                let v = a[col][c];
                a[r][c] -= factor * v;
            }
            let v = b[col];
            b[r] -= factor * v;
        }
    }

    for row in (0..N).rev() {
        let mut acc = b[row];
        for c in row + 1..N {
            acc -= a[row][c] * b[c];
        }
        b[row] = acc / a[row][row];
    }
    Ok(*b)
}
