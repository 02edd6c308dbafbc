//! Hardware performance model: MAC accounting, FPGA resources, latency,
//! throughput and efficiency, and design comparisons.

mod calibrate;
mod compare;
pub mod fixtures;
mod macs;
mod report;
mod resources;

pub use calibrate::{calibrate, Calibration, CalibrationTargets, Residual};
pub use compare::{design_comparison, ComparisonRow, ComparisonTable, DesignPoint};
pub use fixtures::PaperDesign;
pub use macs::{count_macs, MacCount};
pub use report::{
    latency_model, mac_cycles, perf_report, performance_table, utilization_table, PerfReport, TECHNOLOGY_NODE,
};
pub use resources::{
    estimate_resources, footprint, CalibrationScale, ModelFootprint, PlatformBudget, Resource, ResourceCostTable,
    ResourceRow, MB,
};
