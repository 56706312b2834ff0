//! Small symbolic and numeric matrix helpers (n <= 4).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::expr::{EvalError, Evaluator, ScalarExpr};

/// Row-major square matrix of expressions.
pub type ExprMatrix = Vec<Vec<ScalarExpr>>;

pub(crate) fn is_square(m: &ExprMatrix, n: usize) -> bool {
    m.len() == n && m.iter().all(|row| row.len() == n)
}

/// Determinant by cofactor expansion along the first row, skipping zeros.
pub(crate) fn det(m: &ExprMatrix) -> ScalarExpr {
    let rows: Vec<usize> = (0..m.len()).collect();
    let cols: Vec<usize> = (0..m.len()).collect();
    minor_det(m, &rows, &cols)
}

fn minor_det(m: &ExprMatrix, rows: &[usize], cols: &[usize]) -> ScalarExpr {
    match rows.len() {
        0 => ScalarExpr::one(),
        1 => m[rows[0]][cols[0]].clone(),
        _ => {
            let r = rows[0];
            let sub_rows = &rows[1..];
            let mut acc = ScalarExpr::zero();
            for (pos, &c) in cols.iter().enumerate() {
                let entry = &m[r][c];
                if entry.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = entry * minor_det(m, sub_rows, &sub_cols);
                acc = if pos % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

/// Symbolic inverse via the adjugate; returns the inverse and the determinant.
pub(crate) fn inverse(m: &ExprMatrix) -> (ExprMatrix, ScalarExpr) {
    let n = m.len();
    let d = det(m);
    let recip = ScalarExpr::one() / &d;
    let all: Vec<usize> = (0..n).collect();
    let mut inv = vec![vec![ScalarExpr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = all.iter().copied().filter(|&x| x != i).collect();
            let cols: Vec<usize> = all.iter().copied().filter(|&x| x != j).collect();
            let cof = minor_det(m, &rows, &cols);
            let cof = if (i + j) % 2 == 0 { cof } else { -cof };
            inv[j][i] = cof * &recip;
        }
    }
    (inv, d)
}

pub(crate) fn matmul(a: &ExprMatrix, b: &ExprMatrix) -> ExprMatrix {
    let n = a.len();
    let inner = b.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..inner).map(|k| &a[i][k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub(crate) fn conj_transpose(a: &ExprMatrix) -> ExprMatrix {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m)
        .map(|j| (0..n).map(|i| a[i][j].conj()).collect())
        .collect()
}

pub(crate) fn identity(n: usize) -> ExprMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        ScalarExpr::one()
                    } else {
                        ScalarExpr::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub(crate) fn eval_matrix(
    ev: &mut Evaluator,
    m: &ExprMatrix,
) -> Result<DMatrix<Complex64>, EvalError> {
    let n = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut out = DMatrix::zeros(n, cols);
    for i in 0..n {
        for j in 0..cols {
            out[(i, j)] = ev.eval(&m[i][j])?;
        }
    }
    Ok(out)
}
