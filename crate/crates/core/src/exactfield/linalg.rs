//! Determinants over a tower field.

use num_rational::BigRational;
use num_traits::Zero;

use super::{Field, FieldElement, Result};

/// Solve `m · x = rhs` over Q for square invertible `m`. None if singular.
pub fn solve_rational(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(p, col);
        rhs.swap(p, col);
        let inv = m[col][col].recip();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
            let t = &f * &rhs[col];
            rhs[r] -= t;
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// Determinant of a square matrix with entries in `field`.
///
/// Cofactor expansion up to 3x3 (no inversions), Gaussian elimination above.
pub fn determinant(field: &Field, mut m: Vec<Vec<FieldElement>>) -> Result<FieldElement> {
    let n = m.len();
    for row in &m {
        assert_eq!(row.len(), n, "matrix is not square");
        for x in row {
            field.check(x)?;
        }
    }
    match n {
        0 => return Ok(field.one()),
        1 => return Ok(m[0][0].clone()),
        2 => {
            let a = field.mul(&m[0][0], &m[1][1])?;
            let b = field.mul(&m[0][1], &m[1][0])?;
            return field.sub(&a, &b);
        }
        3 => {
            let mut acc = field.zero();
            for j in 0..3 {
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                let minor = field.sub(
                    &field.mul(&m[1][j1], &m[2][j2])?,
                    &field.mul(&m[1][j2], &m[2][j1])?,
                )?;
                acc = field.add(&acc, &field.mul(&m[0][j], &minor)?)?;
            }
            return Ok(acc);
        }
        _ => {}
    }
    let mut det = field.one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Ok(field.zero());
        };
        if p != col {
            m.swap(p, col);
            det = field.neg(&det);
        }
        let piv = m[col][col].clone();
        det = field.mul(&det, &piv)?;
        let inv = field.inv(&piv)?;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = field.mul(&m[r][col], &inv)?;
            for c in col..n {
                let t = field.mul(&f, &m[col][c])?;
                m[r][c] = field.sub(&m[r][c], &t)?;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_4x4() {
        let q = Field::rationals();
        let rows = [[2, 0, 1, 3], [1, 1, 0, 0], [0, 4, 1, 2], [3, 0, 0, 1]];
        let m = rows.iter().map(|r| r.iter().map(|&v| q.from_int(v)).collect()).collect();
        // cofactor expansion along the second row
        assert_eq!(determinant(&q, m).unwrap(), q.from_int(3));
    }

    #[test]
    fn elimination_matches_cofactor() {
        let q = Field::rationals();
        let rows = [[1, 2, 3], [4, 5, 6], [7, 8, 10]];
        let m: Vec<Vec<_>> = rows.iter().map(|r| r.iter().map(|&v| q.from_int(v)).collect()).collect();
        let mut big = vec![vec![q.zero(); 4]; 4];
        big[0][0] = q.one();
        for i in 0..3 {
            for j in 0..3 {
                big[i + 1][j + 1] = m[i][j].clone();
            }
        }
        assert_eq!(determinant(&q, m).unwrap(), determinant(&q, big).unwrap());
    }
}
