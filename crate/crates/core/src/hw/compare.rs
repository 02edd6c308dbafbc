use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Headline figures of one chip design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub name: String,
    pub chip_area_mm2: f64,
    pub latency_ms: f64,
    /// Energy efficiency in TOPS/W.
    pub ee_tops_per_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    #[serde(flatten)]
    pub design: DesignPoint,
    /// Baseline latency over this design's latency.
    pub speedup: f64,
    /// This design's EE over the baseline's.
    pub ee_gain: f64,
    /// This design's area over the baseline's.
    pub area_ratio: f64,
}

/// Designs relative to the first (baseline) entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub baseline: String,
    pub rows: Vec<ComparisonRow>,
}

pub fn design_comparison(designs: &[DesignPoint]) -> Result<ComparisonTable> {
    if designs.len() < 2 {
        return Err(config(format!("comparison needs at least 2 designs, got {}", designs.len())));
    }
    for d in designs {
        if !(d.chip_area_mm2 > 0.0 && d.latency_ms > 0.0 && d.ee_tops_per_w > 0.0) {
            return Err(config(format!("design {}: area, latency and EE must be positive", d.name)));
        }
    }
    let base = &designs[0];
    let rows = designs
        .iter()
        .map(|d| ComparisonRow {
            design: d.clone(),
            speedup: base.latency_ms / d.latency_ms,
            ee_gain: d.ee_tops_per_w / base.ee_tops_per_w,
            area_ratio: d.chip_area_mm2 / base.chip_area_mm2,
        })
        .collect();
    Ok(ComparisonTable {
        baseline: base.name.clone(),
        rows,
    })
}

impl ComparisonTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("design,chip_area_mm2,latency_ms,ee_tops_per_w,speedup,ee_gain,area_ratio\n");
        for r in &self.rows {
            let d = &r.design;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                d.name, d.chip_area_mm2, d.latency_ms, d.ee_tops_per_w, r.speedup, r.ee_gain, r.area_ratio
            )
            .unwrap();
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<16}{:>18}{:>14}{:>14}{:>10}{:>10}",
            "Design Type", "Chip area (mm2)", "Latency (ms)", "EE (TOPS/W)", "Speedup", "EE gain"
        )
        .unwrap();
        for r in &self.rows {
            let d = &r.design;
            writeln!(
                out,
                "{:<16}{:>18}{:>14}{:>14}{:>9.1}x{:>9.1}x",
                d.name, d.chip_area_mm2, d.latency_ms, d.ee_tops_per_w, r.speedup, r.ee_gain
            )
            .unwrap();
        }
        out
    }
}
