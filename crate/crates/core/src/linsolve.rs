//! Exact Gaussian elimination over complex rationals.

use num_traits::{One, Zero};

use crate::scalar::{cq_int, Cq};

/// One affine equation `Σ coeffs[j]·x_j + constant = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineRow {
    pub coeffs: Vec<Cq>,
    pub constant: Cq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AffineSolution {
    Unique(Vec<Cq>),
    Underdetermined { rank: usize },
    Inconsistent { rank: usize },
}

fn is_zero(c: &Cq) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

/// Row-reduces the system and returns the reduced rows plus pivot columns.
fn reduce(rows: &[AffineRow], nvars: usize) -> (Vec<AffineRow>, Vec<usize>) {
    let mut m: Vec<AffineRow> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..nvars {
        let Some(p) = (r..m.len()).find(|&i| !is_zero(&m[i].coeffs[col])) else {
            continue;
        };
        m.swap(r, p);
        let inv = Cq::new(One::one(), Zero::zero()) / m[r].coeffs[col].clone();
        for c in m[r].coeffs.iter_mut() {
            *c = &*c * &inv;
        }
        m[r].constant = &m[r].constant * &inv;
        for i in 0..m.len() {
            if i == r || is_zero(&m[i].coeffs[col]) {
                continue;
            }
            let f = m[i].coeffs[col].clone();
            for j in 0..nvars {
                let d = &f * &m[r].coeffs[j];
                m[i].coeffs[j] -= d;
            }
            let d = &f * &m[r].constant;
            m[i].constant -= d;
        }
        pivots.push(col);
        r += 1;
    }
    (m, pivots)
}

pub fn solve_affine(rows: &[AffineRow], nvars: usize) -> AffineSolution {
    let (m, pivots) = reduce(rows, nvars);
    let rank = pivots.len();
    if m[rank..].iter().any(|row| !is_zero(&row.constant)) {
        return AffineSolution::Inconsistent { rank };
    }
    if rank < nvars {
        return AffineSolution::Underdetermined { rank };
    }
    let mut x = vec![cq_int(0); nvars];
    for (row, &col) in pivots.iter().enumerate() {
        x[col] = -m[row].constant.clone();
    }
    AffineSolution::Unique(x)
}

/// Rank of the coefficient part of the system.
pub fn rank(rows: &[AffineRow], nvars: usize) -> usize {
    reduce(rows, nvars).1.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cq_rat;

    fn row(c: &[i64], k: i64) -> AffineRow {
        AffineRow {
            coeffs: c.iter().map(|&v| cq_int(v)).collect(),
            constant: cq_int(k),
        }
    }

    #[test]
    fn unique() {
        // x + y - 3 = 0, x - y - 1 = 0
        let s = solve_affine(&[row(&[1, 1], -3), row(&[1, -1], -1)], 2);
        assert_eq!(s, AffineSolution::Unique(vec![cq_int(2), cq_int(1)]));
    }

    #[test]
    fn fractional() {
        let s = solve_affine(&[row(&[2], -1)], 1);
        assert_eq!(s, AffineSolution::Unique(vec![cq_rat(1, 2)]));
    }

    #[test]
    fn inconsistent_and_underdetermined() {
        assert!(matches!(
            solve_affine(&[row(&[1, 1], -1), row(&[2, 2], -3)], 2),
            AffineSolution::Inconsistent { rank: 1 }
        ));
        assert!(matches!(
            solve_affine(&[row(&[1, 1], -1)], 2),
            AffineSolution::Underdetermined { rank: 1 }
        ));
    }
}
