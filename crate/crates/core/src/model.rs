//! Domain quantities and the carbon model itself.
//!
//! Total carbon for a period is active carbon plus embodied carbon. Active
//! carbon sums the node, network and facilities terms, each of which is an
//! energy figure multiplied by a carbon intensity. Facilities energy is
//! normally estimated from IT energy through a PUE factor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::timestamp::serde_utc;

/// The evaluation window. `end` is strictly after `start`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPeriod")]
pub struct SnapshotPeriod {
    #[serde(with = "serde_utc")]
    start: DateTime<Utc>,
    #[serde(with = "serde_utc")]
    end: DateTime<Utc>,
}

#[derive(Deserialize)]
struct RawPeriod {
    #[serde(with = "serde_utc")]
    start: DateTime<Utc>,
    #[serde(with = "serde_utc")]
    end: DateTime<Utc>,
}

impl TryFrom<RawPeriod> for SnapshotPeriod {
    type Error = Error;
    fn try_from(raw: RawPeriod) -> Result<Self> {
        SnapshotPeriod::new(raw.start, raw.end)
    }
}

impl SnapshotPeriod {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self> {
        if end <= start {
            return Err(Error::validation(format!(
                "period end {end} must be after start {start}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.end
    }

    pub fn duration_seconds(&self) -> Exact {
        seconds_between(self.start, self.end)
    }

    pub fn duration_hours(&self) -> Exact {
        self.duration_seconds() / Exact::from_integer(3600)
    }

    pub fn duration_days(&self) -> Exact {
        self.duration_seconds() / Exact::from_integer(86_400)
    }

    /// The intersection with `other`, if it has positive length.
    pub fn overlap(&self, start: DateTime<Utc>, end: DateTime<Utc>) -> Option<SnapshotPeriod> {
        let lo = self.start.max(start);
        let hi = self.end.min(end);
        SnapshotPeriod::new(lo, hi).ok()
    }
}

impl fmt::Display for SnapshotPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} .. {}",
            crate::timestamp::format_utc(&self.start),
            crate::timestamp::format_utc(&self.end)
        )
    }
}

/// Exact signed seconds from `a` to `b`.
pub(crate) fn seconds_between(a: DateTime<Utc>, b: DateTime<Utc>) -> Exact {
    let delta = b - a;
    Exact::from_integer(delta.num_seconds()) + Exact::ratio(i64::from(delta.subsec_nanos()), 1_000_000_000)
}

macro_rules! non_negative {
    ($(#[$meta:meta])* $name:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
        #[serde(try_from = "Exact", into = "Exact")]
        pub struct $name(Exact);

        impl $name {
            pub fn new(value: Exact) -> Result<Self> {
                if value.is_negative() {
                    return Err(Error::validation(format!(
                        concat!($what, " must be non-negative, got {}"),
                        value
                    )));
                }
                Ok(Self(value))
            }

            pub fn zero() -> Self {
                Self(Exact::zero())
            }

            pub fn value(&self) -> &Exact {
                &self.0
            }

            pub fn into_inner(self) -> Exact {
                self.0
            }
        }

        impl TryFrom<Exact> for $name {
            type Error = Error;
            fn try_from(value: Exact) -> Result<Self> {
                $name::new(value)
            }
        }

        impl From<$name> for Exact {
            fn from(q: $name) -> Exact {
                q.0
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                let value: Exact = s.parse().map_err(|e| Error::validation(format!("{e}")))?;
                $name::new(value)
            }
        }

        impl std::ops::Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl<'a> std::ops::Add<&'a $name> for &'a $name {
            type Output = $name;
            fn add(self, rhs: &'a $name) -> $name {
                $name(&self.0 + &rhs.0)
            }
        }

        impl std::iter::Sum for $name {
            fn sum<I: Iterator<Item = $name>>(iter: I) -> $name {
                $name(iter.map(|q| q.0).sum())
            }
        }

        impl<'a> std::iter::Sum<&'a $name> for $name {
            fn sum<I: Iterator<Item = &'a $name>>(iter: I) -> $name {
                $name(iter.map(|q| &q.0).sum())
            }
        }
    };
}

non_negative!(
    /// Energy in kWh.
    EnergyQuantity,
    "energy"
);
non_negative!(
    /// Carbon-equivalent mass, stored in grams.
    CarbonQuantity,
    "carbon"
);
non_negative!(
    /// Grid carbon intensity in gCO2e/kWh.
    CarbonIntensity,
    "carbon intensity"
);

impl EnergyQuantity {
    pub fn kwh(value: i64) -> Result<Self> {
        Self::new(Exact::from_integer(value))
    }

    /// Scales by a non-negative factor.
    pub fn scaled(&self, factor: &Exact) -> Result<Self> {
        Self::new(&self.0 * factor)
    }
}

impl CarbonQuantity {
    pub fn from_grams(grams: Exact) -> Result<Self> {
        Self::new(grams)
    }

    pub fn from_kg(kg: Exact) -> Result<Self> {
        Self::new(kg * Exact::from_integer(1000))
    }

    pub fn grams(&self) -> &Exact {
        &self.0
    }

    pub fn kg(&self) -> Exact {
        &self.0 / &Exact::from_integer(1000)
    }
}

impl CarbonIntensity {
    pub fn grams_per_kwh(value: i64) -> Result<Self> {
        Self::new(Exact::from_integer(value))
    }
}

impl fmt::Display for EnergyQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} kWh", self.0)
    }
}

impl fmt::Display for CarbonQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} kgCO2e", self.kg())
    }
}

impl fmt::Display for CarbonIntensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} gCO2e/kWh", self.0)
    }
}

/// Power usage effectiveness, at least 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Exact", into = "Exact")]
pub struct PueFactor(Exact);

impl PueFactor {
    pub fn new(value: Exact) -> Result<Self> {
        if value < Exact::one() {
            return Err(Error::validation(format!("PUE must be at least 1.0, got {value}")));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> &Exact {
        &self.0
    }

    /// The fraction of IT energy spent on facilities, `pue - 1`.
    pub fn overhead(&self) -> Exact {
        &self.0 - &Exact::one()
    }
}

impl TryFrom<Exact> for PueFactor {
    type Error = Error;
    fn try_from(value: Exact) -> Result<Self> {
        PueFactor::new(value)
    }
}

impl From<PueFactor> for Exact {
    fn from(p: PueFactor) -> Exact {
        p.0
    }
}

impl FromStr for PueFactor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let value: Exact = s.parse().map_err(|e| Error::validation(format!("{e}")))?;
        PueFactor::new(value)
    }
}

/// Named PUE scenarios.
///
/// `High` is 1.5 as stated alongside the published active-carbon table, while
/// the table's own High column is only reproduced by 1.6, shipped as
/// `High-1.6`.
pub fn builtin_pue_scenarios() -> Vec<(&'static str, PueFactor)> {
    [("Low", "1.1"), ("Medium", "1.3"), ("High", "1.5"), ("High-1.6", "1.6")]
        .into_iter()
        .map(|(name, v)| (name, v.parse().expect("builtin PUE")))
        .collect()
}

/// Looks up a built-in PUE scenario by name.
pub fn pue_scenario(name: &str) -> Result<PueFactor> {
    let all = builtin_pue_scenarios();
    all.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| p.clone())
        .ok_or_else(|| Error::UnknownScenario {
            name: name.to_owned(),
            registered: all.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
        })
}

/// What a node group does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Compute,
    Storage,
    Login,
    Service,
    Network,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeGroup {
    pub name: String,
    pub role: NodeRole,
    pub count: u64,
    pub embodied_kg_per_node: Exact,
    pub lifespan_years: Exact,
    /// Informational only; linear amortization ignores elapsed life.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_service: Option<chrono::NaiveDate>,
}

impl NodeGroup {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::validation(format!(
                "node group {:?}: count must be at least 1",
                self.name
            )));
        }
        if self.embodied_kg_per_node.is_negative() {
            return Err(Error::validation(format!(
                "node group {:?}: embodied_kg_per_node must be non-negative",
                self.name
            )));
        }
        if !self.lifespan_years.is_positive() {
            return Err(Error::validation(format!(
                "node group {:?}: lifespan_years must be positive",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub name: String,
    #[serde(default)]
    pub node_groups: Vec<NodeGroup>,
    /// Reserved for building and plant embodied carbon; not consumed by any
    /// calculation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facility_embodied_kg: Option<Exact>,
}

/// Hardware inventory grouped by site.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Inventory {
    pub sites: Vec<Site>,
}

impl Inventory {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        let inventory = Self { sites };
        inventory.validate()?;
        Ok(inventory)
    }

    pub fn validate(&self) -> Result<()> {
        let mut site_names = BTreeSet::new();
        for site in &self.sites {
            if !site_names.insert(site.name.as_str()) {
                return Err(Error::validation(format!("duplicate site name {:?}", site.name)));
            }
            let mut group_names = BTreeSet::new();
            for group in &site.node_groups {
                if !group_names.insert(group.name.as_str()) {
                    return Err(Error::validation(format!(
                        "duplicate node group {:?} in site {:?}",
                        group.name, site.name
                    )));
                }
                group.validate()?;
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inventory: Inventory =
            serde_json::from_str(text).map_err(|e| Error::validation(format!("inventory JSON: {e}")))?;
        inventory.validate()?;
        Ok(inventory)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.in_file(path))
    }

    pub fn node_groups(&self) -> impl Iterator<Item = (&Site, &NodeGroup)> {
        self.sites
            .iter()
            .flat_map(|site| site.node_groups.iter().map(move |g| (site, g)))
    }

    pub fn total_nodes(&self) -> u64 {
        self.node_groups().map(|(_, g)| g.count).sum()
    }
}

/// The three active-carbon terms.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActiveBreakdown {
    pub nodes: CarbonQuantity,
    pub network: CarbonQuantity,
    pub facilities: CarbonQuantity,
}

impl ActiveBreakdown {
    pub fn total(&self) -> CarbonQuantity {
        &(&self.nodes + &self.network) + &self.facilities
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentTag {
    Nodes,
    Network,
    Facilities,
}

impl FromStr for ComponentTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nodes" | "node" => Ok(ComponentTag::Nodes),
            "network" | "networks" => Ok(ComponentTag::Network),
            "facilities" | "facility" => Ok(ComponentTag::Facilities),
            _ => Err(Error::validation(format!(
                "unknown component tag {s:?}; expected nodes, network or facilities"
            ))),
        }
    }
}

/// Carbon from energy at a given intensity: `energy × intensity`.
pub fn active_carbon(energy: &EnergyQuantity, intensity: &CarbonIntensity) -> CarbonQuantity {
    CarbonQuantity(energy.value() * intensity.value())
}

/// IT carbon scaled up to include facilities: `it × pue`.
pub fn apply_pue(it_carbon: &CarbonQuantity, pue: &PueFactor) -> CarbonQuantity {
    CarbonQuantity(it_carbon.grams() * pue.value())
}

/// Splits IT carbon into an [`ActiveBreakdown`] whose facilities term is the
/// PUE overhead `it × (pue − 1)`.
pub fn pue_breakdown(nodes: &CarbonQuantity, network: &CarbonQuantity, pue: &PueFactor) -> ActiveBreakdown {
    let it = nodes + network;
    ActiveBreakdown {
        nodes: nodes.clone(),
        network: network.clone(),
        facilities: CarbonQuantity(it.grams() * &pue.overhead()),
    }
}

/// Sums tagged carbon figures per component. Missing tags contribute zero.
pub fn aggregate_active<I, S>(parts: I) -> Result<ActiveBreakdown>
where
    I: IntoIterator<Item = (S, CarbonQuantity)>,
    S: AsRef<str>,
{
    let mut out = ActiveBreakdown::default();
    for (tag, carbon) in parts {
        let slot = match tag.as_ref().parse::<ComponentTag>()? {
            ComponentTag::Nodes => &mut out.nodes,
            ComponentTag::Network => &mut out.network,
            ComponentTag::Facilities => &mut out.facilities,
        };
        *slot = &*slot + &carbon;
    }
    Ok(out)
}

/// Total carbon for a period: active plus embodied.
pub fn total_carbon(active: &CarbonQuantity, embodied: &CarbonQuantity) -> CarbonQuantity {
    active + embodied
}

/// Directly metered facilities energy for one site, split as cooling, power
/// distribution losses, and general facility load.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FacilityOverhead {
    pub cooling: EnergyQuantity,
    pub power: EnergyQuantity,
    pub facility: EnergyQuantity,
}

impl FacilityOverhead {
    pub fn total(&self) -> EnergyQuantity {
        &(&self.cooling + &self.power) + &self.facility
    }
}

/// Active energy for one site. When `overhead` is present it replaces the PUE
/// estimate for that site.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SiteEnergy {
    pub site: String,
    pub nodes: EnergyQuantity,
    #[serde(default)]
    pub network: EnergyQuantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overhead: Option<FacilityOverhead>,
}

impl SiteEnergy {
    pub fn it_energy(&self) -> EnergyQuantity {
        &self.nodes + &self.network
    }
}

/// Active carbon for a set of sites at one intensity and PUE.
pub fn site_active_breakdown(sites: &[SiteEnergy], intensity: &CarbonIntensity, pue: &PueFactor) -> ActiveBreakdown {
    let mut parts: Vec<(&str, CarbonQuantity)> = Vec::with_capacity(sites.len() * 3);
    for site in sites {
        let nodes = active_carbon(&site.nodes, intensity);
        let network = active_carbon(&site.network, intensity);
        let facilities = match &site.overhead {
            Some(overhead) => active_carbon(&overhead.total(), intensity),
            None => pue_breakdown(&nodes, &network, pue).facilities,
        };
        parts.push(("nodes", nodes));
        parts.push(("network", network));
        parts.push(("facilities", facilities));
    }
    aggregate_active(parts).expect("fixed tags")
}

/// Sums energy per site name.
pub fn energy_by_site(sites: &[SiteEnergy]) -> BTreeMap<&str, EnergyQuantity> {
    let mut out: BTreeMap<&str, EnergyQuantity> = BTreeMap::new();
    for s in sites {
        let entry = out.entry(s.site.as_str()).or_default();
        *entry = &*entry + &s.it_energy();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn ex(s: &str) -> Exact {
        s.parse().unwrap()
    }

    fn kg(s: &str) -> CarbonQuantity {
        CarbonQuantity::from_kg(ex(s)).unwrap()
    }

    #[test]
    fn active_carbon_examples() {
        let e = EnergyQuantity::kwh(19380).unwrap();
        let c = active_carbon(&e, &CarbonIntensity::grams_per_kwh(50).unwrap());
        assert_eq!(*c.grams(), 969_000);
        assert_eq!(c.kg(), 969);
        let c = active_carbon(&e, &CarbonIntensity::grams_per_kwh(300).unwrap());
        assert_eq!(c.kg(), 5814);
        let c = active_carbon(&EnergyQuantity::zero(), &CarbonIntensity::grams_per_kwh(300).unwrap());
        assert!(c.grams().is_zero());
    }

    #[test]
    fn apply_pue_examples() {
        let c = apply_pue(&kg("969"), &"1.1".parse().unwrap());
        assert_eq!(c.kg(), ex("1065.9"));
        assert_eq!(c.kg().round_half_up(0), 1066);
        let c = apply_pue(&kg("3391.5"), &"1.3".parse().unwrap());
        assert_eq!(c.kg(), ex("4408.95"));
        assert_eq!(c.kg().round_half_up(0), 4409);
        let c = apply_pue(&kg("100"), &"1.0".parse().unwrap());
        assert_eq!(c.kg(), 100);
    }

    #[test]
    fn pue_below_one_rejected() {
        assert!(matches!("0.99".parse::<PueFactor>(), Err(Error::Validation(_))));
        assert!(PueFactor::new(Exact::one()).is_ok());
    }

    #[test]
    fn negative_quantities_rejected() {
        assert!("-1".parse::<EnergyQuantity>().is_err());
        assert!(CarbonQuantity::from_kg(ex("-0.001")).is_err());
        assert!(CarbonIntensity::new(ex("-5")).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let out = aggregate_active([("nodes", kg("100")), ("nodes", kg("50")), ("facilities", kg("30"))]).unwrap();
        assert_eq!(out.nodes.kg(), 150);
        assert!(out.network.grams().is_zero());
        assert_eq!(out.facilities.kg(), 30);
        assert_eq!(out.total().kg(), 180);

        let empty = aggregate_active(Vec::<(&str, CarbonQuantity)>::new()).unwrap();
        assert_eq!(empty, ActiveBreakdown::default());

        assert!(matches!(
            aggregate_active([("cooling", kg("1"))]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn aggregate_snapshot_sites() {
        let ci = CarbonIntensity::grams_per_kwh(175).unwrap();
        let parts = [1299, 261, 8154, 3831, 4271, 944]
            .map(|kwh| ("nodes", active_carbon(&EnergyQuantity::kwh(kwh).unwrap(), &ci)));
        let out = aggregate_active(parts).unwrap();
        assert_eq!(out.nodes, active_carbon(&EnergyQuantity::kwh(18760).unwrap(), &ci));
    }

    #[test]
    fn total_examples() {
        assert_eq!(total_carbon(&kg("1066"), &kg("375")).kg(), 1441);
        assert_eq!(total_carbon(&kg("9302"), &kg("2409")).kg(), 11711);
        assert!(total_carbon(&CarbonQuantity::zero(), &CarbonQuantity::zero())
            .grams()
            .is_zero());
    }

    #[test]
    fn breakdown_uses_measured_overhead_when_present() {
        let ci = CarbonIntensity::grams_per_kwh(100).unwrap();
        let pue: PueFactor = "1.5".parse().unwrap();
        let sites = vec![
            SiteEnergy {
                site: "A".into(),
                nodes: EnergyQuantity::kwh(10).unwrap(),
                network: EnergyQuantity::kwh(2).unwrap(),
                overhead: None,
            },
            SiteEnergy {
                site: "B".into(),
                nodes: EnergyQuantity::kwh(10).unwrap(),
                network: EnergyQuantity::zero(),
                overhead: Some(FacilityOverhead {
                    cooling: EnergyQuantity::kwh(1).unwrap(),
                    power: EnergyQuantity::kwh(1).unwrap(),
                    facility: EnergyQuantity::zero(),
                }),
            },
        ];
        let b = site_active_breakdown(&sites, &ci, &pue);
        assert_eq!(*b.nodes.grams(), 2000);
        assert_eq!(*b.network.grams(), 200);
        // A: 12 kWh × 0.5 overhead; B: 2 kWh measured
        assert_eq!(*b.facilities.grams(), 600 + 200);
    }

    #[test]
    fn period_duration_is_exact() {
        let start = Utc.with_ymd_and_hms(2022, 11, 1, 0, 0, 0).unwrap();
        let p = SnapshotPeriod::new(start, start + chrono::Duration::minutes(90)).unwrap();
        assert_eq!(p.duration_hours(), ex("1.5"));
        assert!(SnapshotPeriod::new(start, start).is_err());
        assert!(SnapshotPeriod::new(start, start - chrono::Duration::seconds(1)).is_err());
    }

    #[test]
    fn inventory_validation() {
        let json = r#"{"sites":[{"name":"DUR","node_groups":[
            {"name":"cpu","role":"compute","count":808,"embodied_kg_per_node":"400","lifespan_years":5},
            {"name":"cpu","role":"storage","count":64,"embodied_kg_per_node":"1100","lifespan_years":5}]}]}"#;
        assert!(Inventory::from_json(json)
            .unwrap_err()
            .to_string()
            .contains("duplicate node group"));

        let json = r#"{"sites":[{"name":"A","node_groups":[]},{"name":"A","node_groups":[]}]}"#;
        assert!(Inventory::from_json(json)
            .unwrap_err()
            .to_string()
            .contains("duplicate site"));

        let json = r#"{"sites":[{"name":"A","node_groups":[
            {"name":"g","role":"login","count":0,"embodied_kg_per_node":"1","lifespan_years":"1"}]}]}"#;
        assert!(Inventory::from_json(json).is_err());

        let json = r#"{"sites":[{"name":"A","facility_embodied_kg":"1e6","node_groups":[
            {"name":"g","role":"service","count":3,"embodied_kg_per_node":"1","lifespan_years":"4.5","in_service":"2020-01-01"}]}]}"#;
        let inv = Inventory::from_json(json).unwrap();
        assert_eq!(inv.total_nodes(), 3);
    }

    #[test]
    fn pue_registry() {
        assert_eq!(*pue_scenario("High").unwrap().value(), ex("1.5"));
        assert_eq!(*pue_scenario("High-1.6").unwrap().value(), ex("1.6"));
        assert!(pue_scenario("Perfect").is_err());
    }

    #[test]
    fn values_are_thread_safe() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<CarbonQuantity>();
        assert_send_sync::<Inventory>();
        assert_send_sync::<ActiveBreakdown>();
        assert_send_sync::<SnapshotPeriod>();
    }
}
