//! Rank-based quantile binning.
//!
//! Boundaries are actual observed values: the boundary between two bins is
//! the smallest value of the upper bin, and a value's bin is the number of
//! boundaries `<= x` (equivalently, the index of the first boundary `> x`).
//! Since cut points are chosen from value ranks and counts only, any
//! strictly increasing transform of a column yields the same bin for every
//! row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Bin boundaries for one feature. A column with no observed values has
/// zero regular bins, and everything maps to the missing bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBins {
    pub boundaries: Vec<f64>,
    pub num_bins: usize,
}

impl FeatureBins {
    /// Index of the reserved missing-value bin, one past the regular bins.
    pub fn missing_bin(&self) -> u16 {
        self.num_bins as u16
    }

    pub fn bin(&self, value: Option<f64>) -> u16 {
        match value {
            Some(x) if self.num_bins > 0 && !x.is_nan() => {
                self.boundaries.partition_point(|b| *b <= x) as u16
            }
            _ => self.missing_bin(),
        }
    }
}

/// Builds bins for one column: at most `max_bin` bins filled as evenly as
/// the value ranks allow, one bin per distinct value when there are few
/// enough, and any bin holding fewer than `min_data_in_bin` rows merged
/// into its smaller neighbour.
pub fn build_bins(column: &[Option<f64>], max_bin: usize, min_data_in_bin: usize) -> FeatureBins {
    let mut values: Vec<f64> = column
        .iter()
        .flatten()
        .copied()
        .filter(|v| !v.is_nan())
        .collect();
    if values.is_empty() {
        return FeatureBins {
            boundaries: Vec::new(),
            num_bins: 0,
        };
    }
    values.sort_by(f64::total_cmp);

    // (first value, count) per distinct value; -0.0 and 0.0 are one value
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for v in values.iter().copied() {
        match distinct.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => distinct.push((v, 1)),
        }
    }

    // groups of consecutive distinct values: (first distinct index, rows)
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let max_bin = max_bin.max(1);
    if distinct.len() <= max_bin {
        groups.extend(distinct.iter().enumerate().map(|(i, &(_, c))| (i, c)));
    } else {
        let mut rest_rows = values.len();
        let mut rest_bins = max_bin;
        let mut start = 0;
        let mut rows = 0;
        for (i, &(_, c)) in distinct.iter().enumerate() {
            rows += c;
            let last = i + 1 == distinct.len();
            if !last && rest_bins > 1 && rows as f64 >= rest_rows as f64 / rest_bins as f64 {
                groups.push((start, rows));
                rest_rows -= rows;
                rest_bins -= 1;
                start = i + 1;
                rows = 0;
            }
        }
        groups.push((start, rows));
    }

    while groups.len() > 1 {
        let Some(i) = groups.iter().position(|&(_, c)| c < min_data_in_bin) else {
            break;
        };
        let into_left = if i == 0 {
            false
        } else if i + 1 == groups.len() {
            true
        } else {
            groups[i - 1].1 <= groups[i + 1].1
        };
        if into_left {
            groups[i - 1].1 += groups[i].1;
            groups.remove(i);
        } else {
            groups[i + 1].0 = groups[i].0;
            groups[i + 1].1 += groups[i].1;
            groups.remove(i);
        }
    }

    FeatureBins {
        boundaries: groups[1..].iter().map(|&(s, _)| distinct[s].0).collect(),
        num_bins: groups.len(),
    }
}

/// Per-feature bin boundaries for a whole matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub features: Vec<FeatureBins>,
}

/// Column-major bin indices of a matrix.
#[derive(Debug, Clone)]
pub struct BinnedData {
    pub columns: Vec<Vec<u16>>,
    pub num_bins: Vec<usize>,
    pub n_rows: usize,
}

impl BinnedData {
    pub fn missing_bin(&self, feature: usize) -> u16 {
        self.num_bins[feature] as u16
    }
}

impl BinMapper {
    pub fn fit(matrix: &FeatureMatrix, max_bin: usize, min_data_in_bin: usize) -> BinMapper {
        BinMapper {
            features: (0..matrix.n_cols())
                .map(|j| build_bins(&matrix.column(j), max_bin, min_data_in_bin))
                .collect(),
        }
    }

    pub fn transform(&self, matrix: &FeatureMatrix) -> Result<BinnedData> {
        if matrix.n_cols() != self.features.len() {
            return Err(Error::Config(format!(
                "matrix has {} columns, bin mapper {}",
                matrix.n_cols(),
                self.features.len()
            )));
        }
        Ok(BinnedData {
            columns: self
                .features
                .iter()
                .enumerate()
                .map(|(j, fb)| matrix.rows.iter().map(|r| fb.bin(r[j])).collect())
                .collect(),
            num_bins: self.features.iter().map(|f| f.num_bins).collect(),
            n_rows: matrix.n_rows(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn somes(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    fn assignments(b: &FeatureBins, v: &[Option<f64>]) -> Vec<u16> {
        v.iter().map(|x| b.bin(*x)).collect()
    }

    #[test]
    fn even_rank_split() {
        let col = somes(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        let b = build_bins(&col, 2, 1);
        assert_eq!(b.num_bins, 2);
        assert_eq!(assignments(&b, &col), [1, 0, 0, 0, 1]);
    }

    #[test]
    fn one_distinct_value() {
        for max_bin in [2, 8, 64] {
            let b = build_bins(&somes(&[7.0, 7.0, 7.0]), max_bin, 1);
            assert_eq!(b.num_bins, 1);
            assert!(b.boundaries.is_empty());
        }
    }

    #[test]
    fn one_bin_per_distinct_when_few() {
        let col = somes(&[3.0, 1.0, 2.0, 1.0, 3.0, 2.0]);
        let b = build_bins(&col, 64, 1);
        assert_eq!(b.num_bins, 3);
        assert_eq!(b.boundaries, [2.0, 3.0]);
        // uneven counts still give one bin each
        let col = somes(&[1.0, 2.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0]);
        assert_eq!(build_bins(&col, 64, 1).num_bins, 3);
    }

    #[test]
    fn small_bins_merge() {
        let mut col = somes(&[0.0; 20]);
        col.push(Some(1.0));
        col.extend(somes(&[2.0; 20]));
        let b = build_bins(&col, 64, 10);
        assert_eq!(b.num_bins, 2);
        // the lone 1.0 joins a neighbour, never straddles
        let a = assignments(&b, &col);
        assert_eq!(a[0], 0);
        assert_eq!(a[40], 1);
    }

    #[test]
    fn missing_values_get_reserved_bin() {
        let col = vec![Some(1.0), None, Some(2.0)];
        let b = build_bins(&col, 64, 1);
        assert_eq!(assignments(&b, &col), [0, 2, 1]);
        assert_eq!(b.bin(Some(f64::NAN)), 2);
    }

    #[test]
    fn all_missing_is_degenerate() {
        let b = build_bins(&[None, None], 64, 1);
        assert_eq!(b.num_bins, 0);
        assert_eq!(b.bin(Some(3.0)), 0);
        assert_eq!(b.bin(None), b.missing_bin());
    }

    #[test]
    fn unseen_values_bin_by_boundaries() {
        let b = build_bins(&somes(&[1.0, 2.0, 3.0]), 64, 1);
        assert_eq!(b.bin(Some(-10.0)), 0);
        assert_eq!(b.bin(Some(1.5)), 0);
        assert_eq!(b.bin(Some(2.0)), 1);
        assert_eq!(b.bin(Some(99.0)), 2);
    }

    fn column() -> impl Strategy<Value = Vec<Option<f64>>> {
        prop::collection::vec(
            prop::option::weighted(0.9, (0u32..200).prop_map(|v| v as f64 / 7.0 + 0.5)),
            1..300,
        )
    }

    proptest! {
        #[test]
        fn bins_are_sound(col in column(), max_bin in 2usize..70, min_data in 1usize..15) {
            let b = build_bins(&col, max_bin, min_data);
            prop_assert!(b.num_bins <= max_bin);
            prop_assert!(b.boundaries.windows(2).all(|w| w[0] < w[1]));
            let present: Vec<f64> = col.iter().flatten().copied().collect();
            if !present.is_empty() {
                prop_assert_eq!(b.boundaries.len() + 1, b.num_bins);
                let mut counts = vec![0usize; b.num_bins];
                for &v in &present {
                    counts[b.bin(Some(v)) as usize] += 1;
                }
                if b.num_bins > 1 {
                    prop_assert!(counts.iter().all(|&c| c >= min_data));
                }
                // equal values never straddle, order is preserved
                for &x in &present {
                    for &y in &present {
                        if x < y {
                            prop_assert!(b.bin(Some(x)) <= b.bin(Some(y)));
                        }
                    }
                }
            }
        }

        #[test]
        fn monotone_transform_keeps_assignments(col in column()) {
            let cubed: Vec<Option<f64>> = col.iter().map(|v| v.map(|x| x * x * x)).collect();
            let expd: Vec<Option<f64>> = col.iter().map(|v| v.map(f64::exp)).collect();
            let base = build_bins(&col, 16, 3);
            let a = assignments(&base, &col);
            prop_assert_eq!(&a, &assignments(&build_bins(&cubed, 16, 3), &cubed));
            prop_assert_eq!(&a, &assignments(&build_bins(&expd, 16, 3), &expd));
        }
    }
}
