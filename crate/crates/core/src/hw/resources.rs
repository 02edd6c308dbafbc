use std::fmt;

use serde::{Deserialize, Serialize};

use super::macs::count_macs;
use crate::error::{config, Result};
use crate::snn::NetworkSpec;

/// Bytes in one MB as used in reports.
pub const MB: f64 = (1u64 << 20) as f64;

/// Per-resource multipliers applied on top of the raw linear model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationScale {
    pub lut: f64,
    pub memory: f64,
    pub dsp: f64,
}

impl Default for CalibrationScale {
    fn default() -> Self {
        Self {
            lut: 1.0,
            memory: 1.0,
            dsp: 1.0,
        }
    }
}

/// Linear hardware cost model of a spatially unrolled MAC array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceCostTable {
    pub lut_per_mac_unit: f64,
    pub dsp_per_mac_unit: f64,
    pub mem_bytes_per_weight: f64,
    pub mem_bytes_per_state: f64,
    pub io_base: f64,
    pub io_per_stream: f64,
    /// Number of MAC units working in parallel.
    pub parallel_units: u64,
    pub clock_hz: f64,
    pub fixed_overhead_s: f64,
    /// Calibrated board power for this design.
    pub power_w: f64,
    #[serde(default)]
    pub calibration_scale: CalibrationScale,
}

impl Default for ResourceCostTable {
    fn default() -> Self {
        Self {
            lut_per_mac_unit: 250.0,
            dsp_per_mac_unit: 1.0,
            mem_bytes_per_weight: 1.0,
            mem_bytes_per_state: 1.0,
            io_base: 128.0,
            io_per_stream: 2.0,
            parallel_units: 512,
            clock_hz: 200e6,
            fixed_overhead_s: 0.0,
            power_w: 1.0,
            calibration_scale: CalibrationScale::default(),
        }
    }
}

impl ResourceCostTable {
    /// All coefficients zero (one MAC unit, so latency stays defined).
    pub fn zero() -> Self {
        Self {
            lut_per_mac_unit: 0.0,
            dsp_per_mac_unit: 0.0,
            mem_bytes_per_weight: 0.0,
            mem_bytes_per_state: 0.0,
            io_base: 0.0,
            io_per_stream: 0.0,
            parallel_units: 1,
            clock_hz: 200e6,
            fixed_overhead_s: 0.0,
            power_w: 0.0,
            calibration_scale: CalibrationScale::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let coeffs = [
            ("lut_per_mac_unit", self.lut_per_mac_unit),
            ("dsp_per_mac_unit", self.dsp_per_mac_unit),
            ("mem_bytes_per_weight", self.mem_bytes_per_weight),
            ("mem_bytes_per_state", self.mem_bytes_per_state),
            ("io_base", self.io_base),
            ("io_per_stream", self.io_per_stream),
            ("fixed_overhead_s", self.fixed_overhead_s),
            ("power_w", self.power_w),
            ("calibration_scale.lut", self.calibration_scale.lut),
            ("calibration_scale.memory", self.calibration_scale.memory),
            ("calibration_scale.dsp", self.calibration_scale.dsp),
        ];
        if let Some((name, v)) = coeffs.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(config(format!("cost table {name} = {v} must be finite and >= 0")));
        }
        if self.parallel_units == 0 {
            return Err(config("cost table parallel_units must be >= 1"));
        }
        if !(self.clock_hz > 0.0 && self.clock_hz.is_finite()) {
            return Err(config("cost table clock_hz must be > 0"));
        }
        Ok(())
    }
}

/// Resources available on the target device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformBudget {
    pub name: String,
    pub lut_avail: f64,
    pub mem_avail_bytes: f64,
    pub io_avail: f64,
    pub dsp_avail: f64,
}

impl PlatformBudget {
    /// Zynq UltraScale+ XCZU7EV.
    pub fn xczu7ev() -> Self {
        Self {
            name: "Zynq UltraScale+ XCZU7EV".into(),
            lut_avail: 504_000.0,
            mem_avail_bytes: 38.0 * MB,
            io_avail: 464.0,
            dsp_avail: 1728.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lut_avail", self.lut_avail),
            ("mem_avail_bytes", self.mem_avail_bytes),
            ("io_avail", self.io_avail),
            ("dsp_avail", self.dsp_avail),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config(format!("budget {name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    Lut,
    Memory,
    Io,
    Dsp,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resource::Lut => "LUT",
            Resource::Memory => "Memory",
            Resource::Io => "IO",
            Resource::Dsp => "DSP",
        })
    }
}

/// One utilization line. Memory is in bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub resource: Resource,
    pub used: f64,
    pub available: f64,
    pub percent: f64,
    pub over_budget: bool,
}

impl ResourceRow {
    fn new(resource: Resource, used: f64, available: f64) -> Self {
        Self {
            resource,
            used,
            available,
            percent: 100.0 * used / available,
            over_budget: used > available,
        }
    }

    /// `used` in display units (MB for memory).
    pub fn used_display(&self) -> f64 {
        match self.resource {
            Resource::Memory => self.used / MB,
            _ => self.used,
        }
    }

    pub fn available_display(&self) -> f64 {
        match self.resource {
            Resource::Memory => self.available / MB,
            _ => self.available,
        }
    }
}

/// Quantities of a network the cost model charges for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFootprint {
    pub weights: u64,
    /// LIF neurons, each holding a membrane value and a spike bit.
    pub states: u64,
    /// Input channels plus output classes.
    pub streams: u64,
}

pub fn footprint(spec: &NetworkSpec) -> Result<ModelFootprint> {
    let shapes = spec.shapes()?;
    let states = spec
        .lif_layer_indices()
        .iter()
        .map(|&i| shapes[i + 1].iter().product::<usize>() as u64)
        .sum();
    Ok(ModelFootprint {
        weights: spec.parameter_count() as u64,
        states,
        streams: (spec.input_shape[0] + spec.num_classes) as u64,
    })
}

/// Uncalibrated resource amounts (before `calibration_scale` and rounding).
pub(crate) fn raw_resources(fp: &ModelFootprint, cost: &ResourceCostTable) -> [f64; 4] {
    let p = cost.parallel_units as f64;
    [
        cost.lut_per_mac_unit * p,
        fp.weights as f64 * cost.mem_bytes_per_weight + fp.states as f64 * cost.mem_bytes_per_state,
        cost.io_base + cost.io_per_stream * fp.streams as f64,
        cost.dsp_per_mac_unit * p,
    ]
}

/// LUT, Memory, IO and DSP rows against `budget`.
///
/// LUT = scale_lut * lut_per_mac_unit * P; DSP = ceil(scale_dsp * dsp_per_mac_unit * P);
/// Memory = scale_mem * (weights * bytes_per_weight + states * bytes_per_state);
/// IO = io_base + io_per_stream * streams. Over-budget rows are flagged.
pub fn estimate_resources(spec: &NetworkSpec, cost: &ResourceCostTable, budget: &PlatformBudget) -> Result<Vec<ResourceRow>> {
    cost.validate()?;
    budget.validate()?;
    // Touch the MAC counter so invalid specs fail the same way as the other models.
    count_macs(spec)?;
    let fp = footprint(spec)?;
    let [lut, mem, io, dsp] = raw_resources(&fp, cost);
    let s = &cost.calibration_scale;
    Ok(vec![
        ResourceRow::new(Resource::Lut, s.lut * lut, budget.lut_avail),
        ResourceRow::new(Resource::Memory, s.memory * mem, budget.mem_avail_bytes),
        ResourceRow::new(Resource::Io, io, budget.io_avail),
        ResourceRow::new(Resource::Dsp, (s.dsp * dsp).ceil(), budget.dsp_avail),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_table_uses_nothing() {
        let rows = estimate_resources(
            &NetworkSpec::fcu_mini(16, 16),
            &ResourceCostTable::zero(),
            &PlatformBudget::xczu7ev(),
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.used == 0.0 && r.percent == 0.0 && !r.over_budget));
    }

    #[test]
    fn footprint_of_bcu_mini() {
        let fp = footprint(&NetworkSpec::bcu_mini(16, 16)).unwrap();
        assert_eq!(fp.weights, (8 * 9 + 8) + (512 * 2 + 2));
        assert_eq!(fp.states, 8 * 8 * 8);
        assert_eq!(fp.streams, 3);
    }

    #[test]
    fn over_budget_is_flagged() {
        let cost = ResourceCostTable {
            parallel_units: 10_000,
            ..Default::default()
        };
        let rows = estimate_resources(&NetworkSpec::bcu_mini(16, 16), &cost, &PlatformBudget::xczu7ev()).unwrap();
        assert!(rows[0].over_budget);
        assert!(rows[3].over_budget);
        assert!(!rows[2].over_budget);
    }

    #[test]
    fn negative_coefficient_rejected() {
        let cost = ResourceCostTable {
            io_base: -1.0,
            ..Default::default()
        };
        assert!(estimate_resources(&NetworkSpec::bcu_mini(16, 16), &cost, &PlatformBudget::xczu7ev()).is_err());
    }
}
