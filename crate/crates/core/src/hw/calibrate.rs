//! Fits a cost table to published resource totals.
//!
//! Starting from a base table, each resource scale (LUT, Memory, DSP) is the
//! least-squares multiplier of the raw linear model over all observations;
//! IO is refit as `io_base + io_per_stream * streams`. With a single
//! observation these fits are exact, and the DSP scale is then nudged by
//! single ulps so that the ceiling lands on the target integer. Latency
//! targets set `fixed_overhead_s` and efficiency targets set `power_w`.

use serde::{Deserialize, Serialize};

use super::report::latency_model;
use super::resources::{footprint, raw_resources, ResourceCostTable, MB};
use crate::error::{config, Result};
use crate::hw::count_macs;
use crate::snn::NetworkSpec;

/// Published totals for one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    pub lut: f64,
    pub memory_mb: f64,
    pub io: f64,
    pub dsp: f64,
    #[serde(default)]
    pub latency_ms: Option<f64>,
    #[serde(default)]
    pub power_eff_gops_per_w: Option<f64>,
    /// Reported accuracy (fraction); echoed into reports, not fitted.
    #[serde(default)]
    pub accuracy: Option<f64>,
}

impl CalibrationTargets {
    pub fn validate(&self) -> Result<()> {
        let mut vals = vec![
            ("lut", self.lut),
            ("memory_mb", self.memory_mb),
            ("io", self.io),
            ("dsp", self.dsp),
        ];
        if let Some(l) = self.latency_ms {
            vals.push(("latency_ms", l));
        }
        if let Some(e) = self.power_eff_gops_per_w {
            vals.push(("power_eff_gops_per_w", e));
        }
        if let Some((name, v)) = vals.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(config(format!("target {name} = {v} is infeasible (must be finite and >= 0)")));
        }
        if self.power_eff_gops_per_w == Some(0.0) {
            return Err(config("target power efficiency must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub design: String,
    pub quantity: String,
    pub target: f64,
    pub estimate: f64,
    /// `(estimate - target) / target`, or 0 when both are 0.
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub table: ResourceCostTable,
    pub residuals: Vec<Residual>,
}

impl Calibration {
    pub fn max_abs_rel_error(&self) -> f64 {
        self.residuals.iter().map(|r| r.rel_error.abs()).fold(0.0, f64::max)
    }
}

fn ls_scale(raw: &[f64], targets: &[f64], what: &str) -> Result<f64> {
    let num: f64 = raw.iter().zip(targets).map(|(r, t)| r * t).sum();
    let den: f64 = raw.iter().map(|r| r * r).sum();
    if targets.iter().all(|&t| t == 0.0) {
        return Ok(0.0);
    }
    if den == 0.0 {
        return Err(config(format!("base table gives zero {what}; cannot scale to a nonzero target")));
    }
    Ok(num / den)
}

fn rel(target: f64, estimate: f64) -> f64 {
    if target == 0.0 {
        if estimate == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (estimate - target) / target
    }
}

pub fn calibrate(observations: &[(NetworkSpec, CalibrationTargets)], base: &ResourceCostTable) -> Result<Calibration> {
    if observations.is_empty() {
        return Err(config("calibration needs at least one target"));
    }
    base.validate()?;
    for (_, t) in observations {
        t.validate()?;
    }
    let fps = observations
        .iter()
        .map(|(s, _)| footprint(s))
        .collect::<Result<Vec<_>>>()?;
    let mut table = base.clone();
    table.calibration_scale = Default::default();
    let raws: Vec<[f64; 4]> = fps.iter().map(|fp| raw_resources(fp, &table)).collect();
    let col = |i: usize| raws.iter().map(|r| r[i]).collect::<Vec<_>>();

    let lut_t: Vec<f64> = observations.iter().map(|(_, t)| t.lut).collect();
    let mem_t: Vec<f64> = observations.iter().map(|(_, t)| t.memory_mb * MB).collect();
    let io_t: Vec<f64> = observations.iter().map(|(_, t)| t.io).collect();
    let dsp_t: Vec<f64> = observations.iter().map(|(_, t)| t.dsp).collect();

    table.calibration_scale.lut = ls_scale(&col(0), &lut_t, "LUT")?;
    table.calibration_scale.memory = ls_scale(&col(1), &mem_t, "memory")?;
    let dsp_raw = col(3);
    let mut dsp_scale = ls_scale(&dsp_raw, &dsp_t, "DSP")?;
    if dsp_t.iter().all(|&t| t == dsp_t[0]) && dsp_scale > 0.0 {
        let (raw, target) = (dsp_raw[0], dsp_t[0]);
        while (dsp_scale * raw).ceil() > target {
            dsp_scale = dsp_scale.next_down();
        }
        while (dsp_scale * raw).ceil() < target {
            dsp_scale = dsp_scale.next_up();
        }
    }
    table.calibration_scale.dsp = dsp_scale;

    // IO: exact line through the observations where possible, else least squares.
    let streams: Vec<f64> = fps.iter().map(|fp| fp.streams as f64).collect();
    let n = streams.len() as f64;
    let mean_s = streams.iter().sum::<f64>() / n;
    let mean_t = io_t.iter().sum::<f64>() / n;
    let var_s: f64 = streams.iter().map(|s| (s - mean_s).powi(2)).sum();
    let (mut io_base, mut io_per) = if var_s > 0.0 {
        let cov: f64 = streams.iter().zip(&io_t).map(|(s, t)| (s - mean_s) * (t - mean_t)).sum();
        let per = cov / var_s;
        (mean_t - per * mean_s, per)
    } else {
        (mean_t - table.io_per_stream * mean_s, table.io_per_stream)
    };
    if io_base < 0.0 || io_per < 0.0 {
        // Proportional fit through the origin.
        io_base = 0.0;
        let den: f64 = streams.iter().map(|s| s * s).sum();
        io_per = streams.iter().zip(&io_t).map(|(s, t)| s * t).sum::<f64>() / den;
    }
    table.io_base = io_base;
    table.io_per_stream = io_per;

    // Latency: fixed overhead on top of the MAC-bound term.
    let lat: Vec<(usize, f64)> = observations
        .iter()
        .enumerate()
        .filter_map(|(i, (_, t))| t.latency_ms.map(|l| (i, l * 1e-3)))
        .collect();
    if !lat.is_empty() {
        table.fixed_overhead_s = 0.0;
        let mut sum = 0.0;
        for &(i, target) in &lat {
            let mac_term = latency_model(&observations[i].0, &table)?;
            if mac_term > target {
                return Err(config(format!(
                    "{}: latency target {:.6} s is below the MAC-bound term {:.6} s; raise parallel_units",
                    observations[i].0.name, target, mac_term
                )));
            }
            sum += target - mac_term;
        }
        table.fixed_overhead_s = sum / lat.len() as f64;
    }

    let eff: Vec<(usize, f64)> = observations
        .iter()
        .enumerate()
        .filter_map(|(i, (_, t))| t.power_eff_gops_per_w.map(|e| (i, e)))
        .collect();
    if !eff.is_empty() {
        let mut sum = 0.0;
        for &(i, e) in &eff {
            let spec = &observations[i].0;
            let thr = count_macs(spec)?.total_gop / latency_model(spec, &table)?;
            sum += thr / e;
        }
        table.power_w = sum / eff.len() as f64;
    }

    let budget = super::resources::PlatformBudget::xczu7ev();
    let mut residuals = Vec::new();
    for (spec, t) in observations {
        let rows = super::resources::estimate_resources(spec, &table, &budget)?;
        let mut push = |q: &str, target: f64, estimate: f64| {
            residuals.push(Residual {
                design: spec.name.clone(),
                quantity: q.into(),
                target,
                estimate,
                rel_error: rel(target, estimate),
            })
        };
        push("lut", t.lut, rows[0].used);
        push("memory_mb", t.memory_mb, rows[1].used / MB);
        push("io", t.io, rows[2].used);
        push("dsp", t.dsp, rows[3].used);
        if let Some(l) = t.latency_ms {
            push("latency_ms", l, latency_model(spec, &table)? * 1e3);
        }
        if let Some(e) = t.power_eff_gops_per_w {
            let thr = count_macs(spec)?.total_gop / latency_model(spec, &table)?;
            push("power_eff_gops_per_w", e, thr / table.power_w);
        }
    }
    Ok(Calibration { table, residuals })
}
