//! Embodied carbon amortization.
//!
//! A node's embodied carbon (manufacture, delivery, installation and
//! decommissioning) is a fixed cost spread linearly over its service life.
//! The share attributed to a window is proportional to the window's length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::model::{CarbonQuantity, Inventory, SnapshotPeriod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AllocationRule {
    #[default]
    LinearByTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmortizationPolicy {
    #[serde(default)]
    pub rule: AllocationRule,
    pub days_per_year: Exact,
}

impl Default for AmortizationPolicy {
    fn default() -> Self {
        Self {
            rule: AllocationRule::LinearByTime,
            days_per_year: "365.25".parse().expect("constant"),
        }
    }
}

impl AmortizationPolicy {
    pub fn with_days_per_year(days_per_year: Exact) -> Result<Self> {
        if !days_per_year.is_positive() {
            return Err(Error::validation(format!(
                "days_per_year must be positive, got {days_per_year}"
            )));
        }
        Ok(Self {
            rule: AllocationRule::LinearByTime,
            days_per_year,
        })
    }

    fn lifespan_days(&self, lifespan_years: &Exact) -> Result<Exact> {
        if !lifespan_years.is_positive() {
            return Err(Error::validation(format!(
                "lifespan must be positive, got {lifespan_years} years"
            )));
        }
        if !self.days_per_year.is_positive() {
            return Err(Error::validation("days_per_year must be positive"));
        }
        Ok(lifespan_years * &self.days_per_year)
    }
}

/// A per-node embodied carbon figure, e.g. a low or high manufacturer
/// estimate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbodiedEstimate {
    pub label: String,
    pub per_node_kg: Exact,
}

impl EmbodiedEstimate {
    pub fn new(label: impl Into<String>, per_node_kg: Exact) -> Result<Self> {
        if per_node_kg.is_negative() {
            return Err(Error::validation(format!(
                "embodied estimate must be non-negative, got {per_node_kg} kg"
            )));
        }
        Ok(Self {
            label: label.into(),
            per_node_kg,
        })
    }
}

/// Embodied carbon per node per day.
pub fn amortize_per_day(
    estimate: &EmbodiedEstimate,
    lifespan_years: &Exact,
    policy: &AmortizationPolicy,
) -> Result<CarbonQuantity> {
    let days = policy.lifespan_days(lifespan_years)?;
    CarbonQuantity::from_kg(&estimate.per_node_kg / &days)
}

/// Embodied carbon for `node_count` nodes over a window of `days` days.
pub fn embodied_for_days(
    estimate: &EmbodiedEstimate,
    lifespan_years: &Exact,
    days: &Exact,
    node_count: u64,
    policy: &AmortizationPolicy,
) -> Result<CarbonQuantity> {
    if days.is_negative() {
        return Err(Error::validation("window length must be non-negative"));
    }
    if node_count == 0 {
        return Err(Error::validation("node count must be at least 1"));
    }
    let lifespan_days = policy.lifespan_days(lifespan_years)?;
    if *days > lifespan_days {
        return Err(Error::validation(format!(
            "window of {} days exceeds the {lifespan_years}-year lifespan",
            days.to_fixed(2)
        )));
    }
    let per_day = amortize_per_day(estimate, lifespan_years, policy)?;
    CarbonQuantity::from_grams(per_day.grams() * days * Exact::from(node_count))
}

/// Embodied carbon for `node_count` nodes over `period`.
pub fn period_embodied(
    estimate: &EmbodiedEstimate,
    lifespan_years: &Exact,
    period: &SnapshotPeriod,
    node_count: u64,
    policy: &AmortizationPolicy,
) -> Result<CarbonQuantity> {
    embodied_for_days(estimate, lifespan_years, &period.duration_days(), node_count, policy)
}

/// Embodied carbon of every node group in the inventory over `period`.
pub fn fleet_embodied(
    inventory: &Inventory,
    period: &SnapshotPeriod,
    policy: &AmortizationPolicy,
) -> Result<CarbonQuantity> {
    inventory
        .node_groups()
        .map(|(site, group)| {
            let estimate = EmbodiedEstimate::new(group.name.clone(), group.embodied_kg_per_node.clone())?;
            period_embodied(&estimate, &group.lifespan_years, period, group.count, policy)
                .map_err(|e| Error::validation(format!("site {:?}, node group {:?}: {e}", site.name, group.name)))
        })
        .sum()
}
