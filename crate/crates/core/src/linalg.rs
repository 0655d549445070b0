//! Exact row reduction over the base field, sized for desk-scale systems.

use crate::scalar::{FieldSpec, Scalar};

/// Reduces `rows` to reduced row echelon form in place and returns the pivot
/// columns. Zero rows are dropped, so the canonical form of a row space is the
/// resulting matrix itself.
pub fn rref(rows: &mut Vec<Vec<Scalar>>) -> Vec<usize> {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(pr) = (row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(row, pr);
        let inv = rows[row][col].inv().expect("pivot is nonzero");
        for c in col..ncols {
            rows[row][c] = rows[row][c].mul(&inv);
        }
        for r in 0..rows.len() {
            if r != row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..ncols {
                    let delta = factor.mul(&rows[row][c]);
                    rows[r][c] = rows[r][c].sub(&delta);
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows.len() {
            break;
        }
    }
    rows.truncate(row);
    pivots
}

pub fn rank(mut rows: Vec<Vec<Scalar>>) -> usize {
    rref(&mut rows).len()
}

/// Canonical form of the affine system `{linear part . x = rhs}` given rows
/// `[c1, ..., cN, rhs]`. Returns `None` when the system is inconsistent,
/// otherwise the reduced rows together with the rank.
pub fn affine_rref(mut rows: Vec<Vec<Scalar>>) -> Option<(Vec<Vec<Scalar>>, usize)> {
    if rows.is_empty() {
        return Some((rows, 0));
    }
    let ncols = rows[0].len();
    let pivots = rref(&mut rows);
    if pivots.contains(&(ncols - 1)) {
        return None;
    }
    let rank = pivots.len();
    Some((rows, rank))
}

/// A basis of the kernel of the linear map whose matrix has the given columns.
pub fn kernel_basis(field: FieldSpec, columns: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let ncols = columns.len();
    if ncols == 0 {
        return Vec::new();
    }
    let nrows = columns[0].len();
    let mut rows: Vec<Vec<Scalar>> = (0..nrows)
        .map(|r| columns.iter().map(|c| c[r].clone()).collect())
        .collect();
    let pivots = rref(&mut rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut v = vec![field.zero(); ncols];
        v[f] = field.one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = rows[r][f].neg();
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_i64(FieldSpec::Rationals, n)
    }

    #[test]
    fn rank_and_rref() {
        let rows = vec![vec![s(1), s(2)], vec![s(2), s(4)], vec![s(0), s(1)]];
        assert_eq!(rank(rows), 2);
    }

    #[test]
    fn kernel_of_dependent_columns() {
        // x1, x2, x1 + x2 as columns of a 2x3 matrix.
        let cols = vec![vec![s(1), s(0)], vec![s(0), s(1)], vec![s(1), s(1)]];
        let ker = kernel_basis(FieldSpec::Rationals, &cols);
        assert_eq!(ker.len(), 1);
        let v = &ker[0];
        // Verify the kernel vector annihilates the columns.
        for r in 0..2 {
            let mut acc = s(0);
            for (c, col) in cols.iter().enumerate() {
                acc = acc.add(&v[c].mul(&col[r]));
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn inconsistent_affine_system() {
        // x = 0 and x = 1.
        let rows = vec![vec![s(1), s(0)], vec![s(1), s(1)]];
        assert!(affine_rref(rows).is_none());
    }
}
