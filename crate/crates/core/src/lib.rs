//! Carbon accounting for research computing infrastructure.
//!
//! The total carbon of a period is the carbon of the electricity consumed
//! while running the hardware (active carbon) plus a time-apportioned share
//! of the carbon emitted making it (embodied carbon). This crate ingests
//! energy telemetry and hardware inventories, converts energy to carbon with
//! scalar or time-varying grid intensities, amortizes embodied carbon, and
//! renders scenario reports.
//!
//! All arithmetic is exact (see [`exact::Exact`]); rounding happens only when
//! a report is rendered.

pub mod embodied;
pub mod error;
pub mod exact;
pub mod intensity;
pub mod model;
pub mod report;
pub mod telemetry;
pub mod timestamp;

pub use error::{Error, Result};
pub use exact::Exact;
pub use model::{
    active_carbon, aggregate_active, apply_pue, total_carbon, ActiveBreakdown, CarbonIntensity, CarbonQuantity,
    EnergyQuantity, Inventory, NodeGroup, NodeRole, PueFactor, Site, SnapshotPeriod,
};
