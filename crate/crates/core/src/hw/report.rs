use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::macs::{count_macs, MacCount};
use super::resources::{estimate_resources, PlatformBudget, Resource, ResourceCostTable, ResourceRow};
use crate::error::{config, Result};
use crate::snn::NetworkSpec;

/// Clock cycles spent on MACs in one inference: `T * sum_l ceil(macs_l / P)`.
pub fn mac_cycles(spec: &NetworkSpec, parallel_units: u64) -> Result<u64> {
    if parallel_units == 0 {
        return Err(config("parallel_units must be >= 1"));
    }
    let m = count_macs(spec)?;
    let per_step: u64 = m.per_layer.iter().map(|&x| x.div_ceil(parallel_units)).sum();
    Ok(per_step * spec.timesteps as u64)
}

/// `T * sum_l ceil(macs_l / P) / clock_hz + fixed_overhead_s`.
pub fn latency_model(spec: &NetworkSpec, cost: &ResourceCostTable) -> Result<f64> {
    cost.validate()?;
    Ok(mac_cycles(spec, cost.parallel_units)? as f64 / cost.clock_hz + cost.fixed_overhead_s)
}

/// Hardware performance summary of one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub design: String,
    pub platform: String,
    /// Fraction of correct predictions, when measured.
    pub accuracy: Option<f64>,
    pub macs: MacCount,
    pub mac_gop: f64,
    pub latency_s: f64,
    pub throughput_gops: f64,
    pub power_w: f64,
    pub power_eff_gops_per_w: f64,
    pub resources: Vec<ResourceRow>,
    /// Technology node reported alongside the numbers; not modeled.
    pub technology_node: String,
}

pub const TECHNOLOGY_NODE: &str = "16nm";

pub fn perf_report(
    spec: &NetworkSpec,
    cost: &ResourceCostTable,
    budget: &PlatformBudget,
    measured_accuracy: Option<f64>,
) -> Result<PerfReport> {
    if let Some(a) = measured_accuracy {
        if !(0.0..=1.0).contains(&a) {
            return Err(config(format!("accuracy {a} is not a fraction")));
        }
    }
    let macs = count_macs(spec)?;
    let resources = estimate_resources(spec, cost, budget)?;
    let latency_s = latency_model(spec, cost)?;
    if !(latency_s > 0.0) {
        return Err(config("modeled latency is zero; set clock/overhead so throughput is defined"));
    }
    let mac_gop = macs.total_gop;
    let throughput_gops = mac_gop / latency_s;
    let power_eff_gops_per_w = if cost.power_w > 0.0 {
        throughput_gops / cost.power_w
    } else {
        f64::INFINITY
    };
    Ok(PerfReport {
        design: spec.name.clone(),
        platform: budget.name.clone(),
        accuracy: measured_accuracy,
        macs,
        mac_gop,
        latency_s,
        throughput_gops,
        power_w: cost.power_w,
        power_eff_gops_per_w,
        resources,
        technology_node: TECHNOLOGY_NODE.into(),
    })
}

fn fmt_used(row: &ResourceRow) -> String {
    match row.resource {
        Resource::Memory => format!("{:.1}MB", row.used_display()),
        _ => format!("{:.0}", row.used),
    }
}

fn fmt_avail(row: &ResourceRow) -> String {
    match row.resource {
        Resource::Memory => format!("{:.0}MB", row.available_display()),
        _ => format!("{:.0}", row.available),
    }
}

impl PerfReport {
    pub fn resource(&self, r: Resource) -> &ResourceRow {
        self.resources.iter().find(|row| row.resource == r).expect("all four rows present")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned-column text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "design    {}", self.design).unwrap();
        writeln!(out, "platform  {} ({})", self.platform, self.technology_node).unwrap();
        writeln!(out).unwrap();
        writeln!(out, "{:<10}{:>14}{:>10}{:>14}", "Resource", "Used", "%", "Available").unwrap();
        for r in &self.resources {
            writeln!(
                out,
                "{:<10}{:>14}{:>10.2}{:>14}  {}",
                r.resource.to_string(),
                fmt_used(r),
                r.percent,
                fmt_avail(r),
                if r.over_budget { "OVER BUDGET" } else { "" }
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        let acc = self
            .accuracy
            .map(|a| format!("{:.1}", a * 100.0))
            .unwrap_or_else(|| "-".into());
        writeln!(out, "{:<26}{:>14}", "Accuracy (%)", acc).unwrap();
        writeln!(out, "{:<26}{:>14.3}", "MAC (GOP)", self.mac_gop).unwrap();
        writeln!(out, "{:<26}{:>14.3}", "Latency [ms]", self.latency_s * 1e3).unwrap();
        writeln!(out, "{:<26}{:>14.2}", "Throughput (GOP/s)", self.throughput_gops).unwrap();
        writeln!(out, "{:<26}{:>14.3}", "Power (W)", self.power_w).unwrap();
        writeln!(out, "{:<26}{:>14.2}", "Power Eff. (GOP/s/W)", self.power_eff_gops_per_w).unwrap();
        out
    }
}

/// Side-by-side utilization of several designs on one budget.
pub fn utilization_table(reports: &[PerfReport]) -> String {
    let mut out = String::new();
    if reports.is_empty() {
        return out;
    }
    writeln!(out, "{}", reports[0].platform).unwrap();
    write!(out, "{:<10}", "Resource").unwrap();
    for r in reports {
        write!(out, "{:>14}{:>10}", format!("{} used", r.design), "%").unwrap();
    }
    writeln!(out, "{:>14}", "Available").unwrap();
    for (i, row) in reports[0].resources.iter().enumerate() {
        write!(out, "{:<10}", row.resource.to_string()).unwrap();
        for r in reports {
            let row = &r.resources[i];
            write!(out, "{:>14}{:>10.2}", fmt_used(row), row.percent).unwrap();
        }
        writeln!(out, "{:>14}", fmt_avail(row)).unwrap();
    }
    out
}

/// Side-by-side accuracy, work, latency and efficiency of several designs.
pub fn performance_table(reports: &[PerfReport]) -> String {
    let mut out = String::new();
    if reports.is_empty() {
        return out;
    }
    write!(out, "{:<26}", "Metric").unwrap();
    for r in reports {
        write!(out, "{:>14}", r.design).unwrap();
    }
    writeln!(out).unwrap();
    let mut line = |name: &str, cell: &dyn Fn(&PerfReport) -> String| {
        write!(out, "{name:<26}").unwrap();
        for r in reports {
            write!(out, "{:>14}", cell(r)).unwrap();
        }
        writeln!(out).unwrap();
    };
    line("Accuracy (%)", &|r| r.accuracy.map(|a| format!("{:.1}", a * 100.0)).unwrap_or_else(|| "-".into()));
    line("MAC (GOP)", &|r| format!("{:.3}", r.mac_gop));
    line("Latency [ms]", &|r| format!("{:.3}", r.latency_s * 1e3));
    line("Power Eff. (GOP/s/W)", &|r| format!("{:.2}", r.power_eff_gops_per_w));
    line("Technology", &|r| r.technology_node.clone());
    out
}
