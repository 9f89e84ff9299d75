//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use crate::scalar::{Rational, Scalar};

/// Least-squares solves used by exact division and related fits.
pub trait LinearSolve: Scalar {
    /// Minimizes `‖A x − b‖` for a full-column-rank `A` given row-wise.
    /// Returns `None` when `A` is rank deficient.
    fn least_squares(a: &[Vec<Self>], b: &[Self]) -> Option<Vec<Self>>;
}

impl LinearSolve for f64 {
    fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
        let rows = a.len();
        let cols = a.first().map_or(0, |r| r.len());
        if cols == 0 {
            return Some(Vec::new());
        }
        if rows < cols {
            return None;
        }
        let m = DMatrix::from_fn(rows, cols, |i, j| a[i][j]);
        let svd = m.svd(true, true);
        let smax = svd.singular_values.max();
        if svd.singular_values.min() <= 1e-13 * smax.max(1e-300) {
            return None;
        }
        let x = svd.solve(&DVector::from_column_slice(b), 0.0).ok()?;
        Some(x.iter().copied().collect())
    }
}

impl LinearSolve for Rational {
    fn least_squares(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
        let cols = a.first().map_or(0, |r| r.len());
        if cols == 0 {
            return Some(Vec::new());
        }
        // normal equations, exact
        let mut ata = vec![vec![Rational::zero(); cols]; cols];
        let mut atb = vec![Rational::zero(); cols];
        for (row, bi) in a.iter().zip(b) {
            for i in 0..cols {
                if row[i].is_zero() {
                    continue;
                }
                atb[i] = &atb[i] + &row[i] * bi;
                for j in 0..cols {
                    if !row[j].is_zero() {
                        ata[i][j] = &ata[i][j] + &row[i] * &row[j];
                    }
                }
            }
        }
        solve_square_exact(ata, atb)
    }
}

/// Orthonormal basis of the approximate null space of `A` (given row-wise):
/// right singular vectors with singular value `≤ rel_tol·σ_max`, smallest first.
pub fn null_space(a: &[Vec<f64>], cols: usize, rel_tol: f64) -> Vec<Vec<f64>> {
    if cols == 0 {
        return Vec::new();
    }
    let rows = a.len().max(cols);
    let m = DMatrix::from_fn(rows, cols, |i, j| a.get(i).map_or(0.0, |r| r[j]));
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max();
    let mut idx: Vec<usize> = (0..cols).filter(|&k| svd.singular_values[k] <= rel_tol * smax).collect();
    idx.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    idx.into_iter().map(|k| vt.row(k).iter().copied().collect()).collect()
}

/// Gaussian elimination over the rationals; `None` if singular.
pub fn solve_square_exact(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let p = m[col][col].clone();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for c in col..n {
                let v = &f * &m[col][c];
                m[r][c] = &m[r][c] - v;
            }
            let v = &f * &rhs[col];
            rhs[r] = &rhs[r] - v;
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// Indices of a maximal linearly independent subset of the rows (exact).
pub fn independent_rows_exact(rows: &[Vec<Rational>]) -> Vec<usize> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut basis: Vec<(usize, Vec<Rational>)> = Vec::new(); // (pivot col, reduced row)
    let mut keep = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut r = row.clone();
        for (pc, b) in &basis {
            if r[*pc].is_zero() {
                continue;
            }
            let f = &r[*pc] / &b[*pc];
            for c in 0..cols {
                if !b[c].is_zero() {
                    r[c] = &r[c] - &f * &b[c];
                }
            }
        }
        if let Some(pc) = (0..cols).find(|&c| !r[c].is_zero()) {
            basis.push((pc, r));
            keep.push(idx);
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn exact_least_squares_consistent_system() {
        let a = vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(1, 1), ratio(1, 1)], vec![ratio(0, 1), ratio(2, 1)]];
        let b = vec![ratio(1, 2), ratio(3, 2), ratio(2, 1)];
        let x = Rational::least_squares(&a, &b).unwrap();
        assert_eq!(x, vec![ratio(1, 2), ratio(1, 1)]);
    }

    #[test]
    fn dependent_rows_dropped() {
        let rows = vec![
            vec![ratio(1, 1), ratio(2, 1)],
            vec![ratio(2, 1), ratio(4, 1)],
            vec![ratio(0, 1), ratio(1, 1)],
        ];
        assert_eq!(independent_rows_exact(&rows), vec![0, 2]);
    }
}
