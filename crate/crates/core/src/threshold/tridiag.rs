//! Tridiagonal matrices: products and partial-pivoting solves.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    /// Entries (i+1, i).
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// Entries (i, i+1).
    pub upper: Vec<f64>,
}

impl Tridiag {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::Grid("tridiagonal band lengths do not match".into()));
        }
        Ok(Tridiag { lower, diag, upper })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn transpose(&self) -> Self {
        Tridiag { lower: self.upper.clone(), diag: self.diag.clone(), upper: self.lower.clone() }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Gaussian elimination with row interchanges; an exactly vanishing pivot is
    /// replaced by a tiny one so near-singular systems still act as inverse iteration.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let scale = self.diag.iter().chain(&self.lower).chain(&self.upper).fold(0.0f64, |a, b| a.max(b.abs()));
        let tiny = scale.max(f64::MIN_POSITIVE) * 1e-18;
        let mut rows: Vec<[f64; 3]> = Vec::with_capacity(n);
        let mut b = rhs.to_vec();
        let mut rb = Vec::with_capacity(n);
        // carried row: entries at columns i, i+1, i+2
        let mut carry = [self.diag[0], if n > 1 { self.upper[0] } else { 0.0 }, 0.0];
        let mut carry_rhs = b[0];
        for i in 0..n - 1 {
            let next = [self.lower[i], self.diag[i + 1], if i + 2 < n { self.upper[i + 1] } else { 0.0 }];
            let next_rhs = b[i + 1];
            if carry[0].abs() >= next[0].abs() {
                let p = if carry[0] == 0.0 { tiny } else { carry[0] };
                let f = next[0] / p;
                rows.push([p, carry[1], carry[2]]);
                rb.push(carry_rhs);
                carry = [next[1] - f * carry[1], next[2] - f * carry[2], 0.0];
                carry_rhs = next_rhs - f * carry_rhs;
            } else {
                let f = carry[0] / next[0];
                rows.push(next);
                rb.push(next_rhs);
                carry = [carry[1] - f * next[1], carry[2] - f * next[2], 0.0];
                carry_rhs -= f * next_rhs;
            }
        }
        rows.push([if carry[0] == 0.0 { tiny } else { carry[0] }, 0.0, 0.0]);
        rb.push(carry_rhs);
        for i in (0..n).rev() {
            let mut v = rb[i];
            if i + 1 < n {
                v -= rows[i][1] * b[i + 1];
            }
            if i + 2 < n {
                v -= rows[i][2] * b[i + 2];
            }
            b[i] = v / rows[i][0];
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn solve_matches_dense() {
        let n = 9;
        let lower: Vec<f64> = (0..n - 1).map(|i| 1.0 + 0.3 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 0.0 } else { 0.5 - 0.1 * i as f64 }).collect();
        let upper: Vec<f64> = (0..n - 1).map(|i| -2.0 + 0.2 * i as f64).collect();
        let t = Tridiag::new(lower, diag, upper).unwrap();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = t.diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = t.lower[i];
                m[(i, i + 1)] = t.upper[i];
            }
        }
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
        let x = t.solve(&rhs);
        let want = m.clone().lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
        for i in 0..n {
            assert!((x[i] - want[i]).abs() < 1e-12 * want.amax());
        }
        let back = t.mul_vec(&x);
        for i in 0..n {
            assert!((back[i] - rhs[i]).abs() < 1e-12);
        }
        let tt = t.transpose().solve(&rhs);
        let want_t = m.transpose().lu().solve(&DVector::from_vec(rhs)).unwrap();
        assert!((DVector::from_vec(tt) - want_t).amax() < 1e-11);
    }
}
