//! Per-generation summary statistics.

use serde::{Deserialize, Serialize};

/// Max, mean, median and min of one generation's fitness values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
}

impl GenerationStats {
    /// Summarizes `values`; `None` when empty. The median of an even count is
    /// the mean of the two central values.
    pub fn from_values(generation: usize, values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        let mean = (sorted.iter().sum::<f64>() / n as f64).clamp(sorted[0], sorted[n - 1]);
        Some(Self {
            generation,
            max: sorted[n - 1],
            mean,
            median,
            min: sorted[0],
        })
    }
}
