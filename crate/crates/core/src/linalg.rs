//! Exact sparse Gaussian elimination over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::coeff::Rational;

pub type SparseRow = BTreeMap<usize, Rational>;

/// Incrementally reduced system `row . u = rhs`.
///
/// Rows are kept in echelon form keyed by pivot column; each new row is
/// reduced on insertion, so an inconsistency is detected the moment it
/// appears.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    ncols: usize,
    pivots: BTreeMap<usize, (SparseRow, Rational)>,
    inconsistent: Option<Rational>,
}

fn axpy(row: &mut SparseRow, rhs: &mut Rational, factor: &Rational, other: &SparseRow, other_rhs: &Rational) {
    for (c, v) in other {
        let e = row.entry(*c).or_insert_with(Rational::zero);
        *e -= factor * v;
        if e.is_zero() {
            row.remove(c);
        }
    }
    *rhs -= factor * other_rhs;
}

impl LinearSystem {
    pub fn new(ncols: usize) -> Self {
        LinearSystem { ncols, ..Default::default() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Residual `0 = r` of the first inconsistent row, if any.
    pub fn inconsistency(&self) -> Option<&Rational> {
        self.inconsistent.as_ref()
    }

    /// Add an equation; returns false if it made the system inconsistent.
    pub fn push(&mut self, mut row: SparseRow, mut rhs: Rational) -> bool {
        row.retain(|_, v| !v.is_zero());
        loop {
            let Some((&col, lead)) = row.iter().next() else { break };
            let lead = lead.clone();
            match self.pivots.get(&col) {
                Some((prow, prhs)) => {
                    let (prow, prhs) = (prow.clone(), prhs.clone());
                    axpy(&mut row, &mut rhs, &lead, &prow, &prhs);
                }
                None => {
                    let inv = lead.recip();
                    for v in row.values_mut() {
                        *v *= &inv;
                    }
                    rhs *= &inv;
                    self.pivots.insert(col, (row, rhs));
                    return true;
                }
            }
        }
        if !rhs.is_zero() {
            if self.inconsistent.is_none() {
                self.inconsistent = Some(rhs);
            }
            return false;
        }
        true
    }

    /// Back substitution with every free variable set to zero.
    pub fn solve(&self) -> Option<Vec<Rational>> {
        if self.inconsistent.is_some() {
            return None;
        }
        let mut u = vec![Rational::zero(); self.ncols];
        for (&col, (row, rhs)) in self.pivots.iter().rev() {
            let mut v = rhs.clone();
            for (c, a) in row.iter() {
                if *c != col {
                    v -= a * &u[*c];
                }
            }
            debug_assert!(row.get(&col).is_some_and(|a| a.is_one()));
            u[col] = v;
        }
        Some(u)
    }

    /// True iff the solution is unique.
    pub fn is_determined(&self) -> bool {
        self.inconsistent.is_none() && self.pivots.len() == self.ncols
    }
}

/// Determinant of a dense square matrix by fraction-free elimination.
pub fn determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pivot;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, ratio};

    fn row(v: &[(usize, i64)]) -> SparseRow {
        v.iter().map(|&(c, a)| (c, rat(a))).collect()
    }

    #[test]
    fn solves_and_detects_inconsistency() {
        let mut s = LinearSystem::new(2);
        assert!(s.push(row(&[(0, 1), (1, 1)]), rat(3)));
        assert!(s.push(row(&[(0, 1), (1, -1)]), rat(1)));
        assert!(s.push(row(&[(0, 2), (1, 2)]), rat(6)));
        assert!(s.is_determined());
        assert_eq!(s.solve().unwrap(), vec![rat(2), rat(1)]);
        assert!(!s.push(row(&[(0, 1)]), rat(5)));
        assert!(s.solve().is_none());
    }

    #[test]
    fn free_variables_are_zero() {
        let mut s = LinearSystem::new(3);
        s.push(row(&[(0, 2), (2, 4)]), rat(1));
        assert_eq!(s.solve().unwrap(), vec![ratio(1, 2), rat(0), rat(0)]);
        assert!(!s.is_determined());
    }

    #[test]
    fn determinant_small() {
        let m = vec![vec![rat(2), rat(1)], vec![rat(4), rat(3)]];
        assert_eq!(determinant(m), rat(2));
        let m = vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]];
        assert_eq!(determinant(m), rat(-1));
    }
}
