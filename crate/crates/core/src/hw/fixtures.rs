//! Reference designs shipped with the crate (see `fixtures/README.md`).

use super::calibrate::CalibrationTargets;
use super::compare::DesignPoint;
use super::resources::{PlatformBudget, ResourceCostTable};
use crate::snn::NetworkSpec;

macro_rules! fixture {
    ($name:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/", $name))
    };
}

pub const BCU_REF_SPEC: &str = fixture!("bcu-ref.json");
pub const FCU_REF_SPEC: &str = fixture!("fcu-ref.json");
pub const BCU_TARGETS: &str = fixture!("bcu-targets.json");
pub const FCU_TARGETS: &str = fixture!("fcu-targets.json");
pub const BCU_BASE_COST: &str = fixture!("bcu-base-cost.json");
pub const FCU_BASE_COST: &str = fixture!("fcu-base-cost.json");
pub const BCU_COST: &str = fixture!("bcu-cost.json");
pub const FCU_COST: &str = fixture!("fcu-cost.json");
pub const XCZU7EV_BUDGET: &str = fixture!("xczu7ev-budget.json");
pub const DIGITAL_CMOS: &str = fixture!("digital-cmos.json");
pub const MIXED_SIGNAL: &str = fixture!("mixed-signal.json");

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> T {
    serde_json::from_str(text).expect("shipped fixture parses")
}

pub fn bcu_ref_spec() -> NetworkSpec {
    parse(BCU_REF_SPEC)
}

pub fn fcu_ref_spec() -> NetworkSpec {
    parse(FCU_REF_SPEC)
}

pub fn budget() -> PlatformBudget {
    parse(XCZU7EV_BUDGET)
}

/// The two published hardware designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaperDesign {
    Bcu,
    Fcu,
}

impl PaperDesign {
    pub const ALL: [PaperDesign; 2] = [PaperDesign::Bcu, PaperDesign::Fcu];

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bcu" | "bcu-ref" => Some(Self::Bcu),
            "fcu" | "fcu-ref" => Some(Self::Fcu),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Bcu => "BCU",
            Self::Fcu => "FCU",
        }
    }

    pub fn spec(self) -> NetworkSpec {
        match self {
            Self::Bcu => bcu_ref_spec(),
            Self::Fcu => fcu_ref_spec(),
        }
    }

    /// Calibrated cost table.
    pub fn cost(self) -> ResourceCostTable {
        parse(match self {
            Self::Bcu => BCU_COST,
            Self::Fcu => FCU_COST,
        })
    }

    /// Uncalibrated starting point for [`super::calibrate`].
    pub fn base_cost(self) -> ResourceCostTable {
        parse(match self {
            Self::Bcu => BCU_BASE_COST,
            Self::Fcu => FCU_BASE_COST,
        })
    }

    pub fn targets(self) -> CalibrationTargets {
        parse(match self {
            Self::Bcu => BCU_TARGETS,
            Self::Fcu => FCU_TARGETS,
        })
    }
}

/// Digital CMOS baseline followed by the mixed-signal design.
pub fn design_points() -> Vec<DesignPoint> {
    vec![parse(DIGITAL_CMOS), parse(MIXED_SIGNAL)]
}
