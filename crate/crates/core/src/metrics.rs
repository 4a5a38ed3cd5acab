//! Classification accuracy and Mean Average Distance (MAD).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Split;
use crate::linalg::{dot, norm, Matrix};

/// Cosine distances at or below this count as zero for MAD's indicator.
pub const MAD_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub mad: f64,
    pub split: Split,
    pub epoch: usize,
}

/// Fraction of masked nodes whose prediction equals the label.
pub fn accuracy(pred: &[usize], truth: &[usize], mask: &[bool]) -> Result<f64> {
    if pred.len() != truth.len() || pred.len() != mask.len() {
        return Err(Error::Shape(format!(
            "accuracy over {} predictions, {} labels, {} mask entries",
            pred.len(),
            truth.len(),
            mask.len()
        )));
    }
    let (mut hit, mut total) = (0usize, 0usize);
    for ((p, t), &m) in pred.iter().zip(truth).zip(mask) {
        if m {
            total += 1;
            hit += (p == t) as usize;
        }
    }
    if total == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(hit as f64 / total as f64)
}

/// Row-wise argmax; ties resolve to the lowest class index.
pub fn argmax_rows(m: &Matrix) -> Vec<usize> {
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Mean Average Distance over all ordered pairs of rows with `rows[i]` set.
///
/// `D_ij = 1 − cos(x_i, x_j)`, `D_i` averages the nonzero `D_ij` of row `i`
/// and MAD averages the nonzero `D_i`. Empty averages are 0. Zero-norm rows
/// have cosine 0 with everything.
pub fn mad_masked(reps: &Matrix, rows: &[bool]) -> Result<f64> {
    let idx: Vec<usize> = (0..reps.rows()).filter(|&i| rows[i]).collect();
    if idx.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "MAD needs at least two rows, got {}",
            idx.len()
        )));
    }
    let norms: Vec<f64> = idx.iter().map(|&i| norm(reps.row(i))).collect();
    let mut sum_d = 0.0;
    let mut nonzero_d = 0usize;
    for (a, &i) in idx.iter().enumerate() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (b, &j) in idx.iter().enumerate() {
            if a == b {
                continue;
            }
            let cos = if norms[a] == 0.0 || norms[b] == 0.0 {
                0.0
            } else {
                (dot(reps.row(i), reps.row(j)) / (norms[a] * norms[b])).clamp(-1.0, 1.0)
            };
            let d = 1.0 - cos;
            if d > MAD_ZERO_TOL {
                sum += d;
                count += 1;
            }
        }
        let d_i = if count == 0 { 0.0 } else { sum / count as f64 };
        if d_i > 0.0 {
            sum_d += d_i;
            nonzero_d += 1;
        }
    }
    Ok(if nonzero_d == 0 {
        0.0
    } else {
        sum_d / nonzero_d as f64
    })
}

pub fn mad(reps: &Matrix) -> Result<f64> {
    mad_masked(reps, &vec![true; reps.rows()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accuracy_counts() {
        let mask = [true; 4];
        assert_eq!(accuracy(&[0, 1, 2, 0], &[0, 1, 2, 0], &mask).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 0, 0, 1], &[0, 1, 2, 0], &mask).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 2, 1], &[0, 1, 2, 0], &mask).unwrap(), 0.75);
        assert_eq!(accuracy(&[0, 9], &[0, 1], &[true, false]).unwrap(), 1.0);
        assert!(matches!(
            accuracy(&[0], &[0], &[false]),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn mad_examples() {
        let same = Matrix::from_rows(&[[0.3, 0.7, 0.1]; 4]);
        assert_eq!(mad(&same).unwrap(), 0.0);
        let orth = Matrix::from_rows(&[[1.0, 0.0], [0.0, 2.0]]);
        assert!((mad(&orth).unwrap() - 1.0).abs() < 1e-15);
        let anti = Matrix::from_rows(&[[1.0, -2.0], [-1.0, 2.0]]);
        assert!((mad(&anti).unwrap() - 2.0).abs() < 1e-15);
        assert!(mad(&Matrix::from_rows(&[[1.0]])).is_err());
    }

    #[test]
    fn mad_only_counts_nonzero_distances() {
        // Rows 0 and 1 coincide; row 2 is orthogonal to both.
        let m = Matrix::from_rows(&[[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]]);
        // D_0 = D_1 = 1 (only the distance to row 2 counts), D_2 = 1.
        assert!((mad(&m).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_rows_are_distance_one() {
        let m = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]]);
        assert!((mad(&m).unwrap() - 1.0).abs() < 1e-15);
    }

    fn rows(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), n)
    }

    proptest! {
        #[test]
        fn mad_in_range_and_invariant(
            data in rows(6),
            scales in proptest::collection::vec(0.1f64..10.0, 6),
            shift in 0usize..6,
        ) {
            let m = Matrix::from_rows(&data);
            let base = mad(&m).unwrap();
            prop_assert!((0.0..=2.0).contains(&base));

            let scaled: Vec<Vec<f64>> = data.iter().zip(&scales)
                .map(|(r, s)| r.iter().map(|x| x * s).collect()).collect();
            prop_assert!((mad(&Matrix::from_rows(&scaled)).unwrap() - base).abs() < 1e-9);

            let mut rotated = data.clone();
            rotated.rotate_left(shift);
            prop_assert!((mad(&Matrix::from_rows(&rotated)).unwrap() - base).abs() < 1e-9);
        }
    }
}
