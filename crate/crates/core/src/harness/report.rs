use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::TargetInstance;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeSummary {
    pub repeated_targets: usize,
    pub mean_range: f64,
    /// 10th to 90th percentiles of the range (linear interpolation).
    pub deciles: [f64; 9],
}

/// How often targets recur, and how much their gold scores vary when they do.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepetitionReport {
    pub distinct_targets: usize,
    /// (label, distinct targets, percent) for occurrence counts 1..5 and 6+.
    pub occurrence: Vec<(String, usize, f64)>,
    pub ranges: Option<RangeSummary>,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Groups instances by target string and tabulates repetition.
pub fn repetition_report(instances: &[TargetInstance]) -> Result<RepetitionReport> {
    let mut by_target: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for i in instances {
        let gold = i
            .gold
            .ok_or_else(|| Error::Data(format!("{}: repetition report needs gold scores", i.id)))?;
        by_target.entry(i.target_text()).or_default().push(gold);
    }

    let distinct = by_target.len();
    let mut counts = [0usize; 6];
    for golds in by_target.values() {
        counts[golds.len().min(6) - 1] += 1;
    }
    let labels = ["1", "2", "3", "4", "5", "6+"];
    let occurrence = labels
        .iter()
        .zip(counts)
        .map(|(l, c)| {
            let pct = if distinct == 0 {
                0.0
            } else {
                100.0 * c as f64 / distinct as f64
            };
            (l.to_string(), c, pct)
        })
        .collect();

    let mut ranges: Vec<f64> = by_target
        .values()
        .filter(|g| g.len() >= 2)
        .map(|g| {
            let max = g.iter().copied().fold(f64::MIN, f64::max);
            let min = g.iter().copied().fold(f64::MAX, f64::min);
            max - min
        })
        .collect();
    let summary = if ranges.is_empty() {
        None
    } else {
        ranges.sort_by(f64::total_cmp);
        let mut deciles = [0.0; 9];
        for (d, slot) in deciles.iter_mut().enumerate() {
            *slot = quantile(&ranges, (d + 1) as f64 / 10.0);
        }
        Some(RangeSummary {
            repeated_targets: ranges.len(),
            mean_range: ranges.iter().sum::<f64>() / ranges.len() as f64,
            deciles,
        })
    };

    Ok(RepetitionReport {
        distinct_targets: distinct,
        occurrence,
        ranges: summary,
    })
}

impl RepetitionReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("occurrences\ttargets\tpercent\n");
        for (label, c, pct) in &self.occurrence {
            out.push_str(&format!("{label}\t{c}\t{pct:.1}\n"));
        }
        out.push_str(&format!("total\t{}\t100.0\n", self.distinct_targets));
        match &self.ranges {
            Some(r) => {
                out.push_str(&format!("\nrepeated_targets\t{}\n", r.repeated_targets));
                out.push_str(&format!("mean_range\t{:.4}\n", r.mean_range));
                for (d, v) in r.deciles.iter().enumerate() {
                    out.push_str(&format!("p{}\t{v:.4}\n", (d + 1) * 10));
                }
            }
            None => out.push_str("\nrepeated_targets\t0\n"),
        }
        out
    }
}
