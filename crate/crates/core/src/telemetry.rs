//! Energy telemetry ingestion.
//!
//! Sites report energy in different ways: facility meters, rack PDUs,
//! BMC readings over IPMI, and CPU package counters from Turbostat. This
//! module parses pre-aggregated kWh figures and raw power samples, integrates
//! samples to energy, and picks one canonical figure per site.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::model::{EnergyQuantity, FacilityOverhead, SiteEnergy, SnapshotPeriod};
use crate::timestamp::{parse_utc, serde_utc};

/// Measurement channel, ordered from least to most trusted.
///
/// Each step down from facility meters omits some overhead: PDUs miss
/// distribution losses upstream of the rack, IPMI misses PSU losses, and
/// Turbostat only sees the CPU package.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementSource {
    Turbostat,
    Ipmi,
    Pdu,
    Facility,
}

impl MeasurementSource {
    pub const ALL: [MeasurementSource; 4] = [
        MeasurementSource::Facility,
        MeasurementSource::Pdu,
        MeasurementSource::Ipmi,
        MeasurementSource::Turbostat,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MeasurementSource::Facility => "facility",
            MeasurementSource::Pdu => "pdu",
            MeasurementSource::Ipmi => "ipmi",
            MeasurementSource::Turbostat => "turbostat",
        }
    }
}

impl fmt::Display for MeasurementSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasurementSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "facility" => Ok(MeasurementSource::Facility),
            "pdu" => Ok(MeasurementSource::Pdu),
            "ipmi" => Ok(MeasurementSource::Ipmi),
            "turbostat" => Ok(MeasurementSource::Turbostat),
            _ => Err(Error::validation(format!(
                "unknown measurement source {s:?}; expected facility, pdu, ipmi or turbostat"
            ))),
        }
    }
}

/// One energy figure for one site from one channel over one period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyMeasurement {
    pub site: String,
    pub source: MeasurementSource,
    pub period: SnapshotPeriod,
    #[serde(rename = "kwh")]
    pub energy: EnergyQuantity,
    #[serde(rename = "nodes")]
    pub nodes_covered: u64,
}

const MEASUREMENT_COLUMNS: [&str; 6] = ["site", "source", "period_start", "period_end", "kwh", "nodes"];
const SAMPLE_COLUMNS: [&str; 4] = ["site", "node_id", "timestamp", "watts"];
const COMPONENT_COLUMNS: [&str; 5] = ["site", "component", "period_start", "period_end", "kwh"];

/// Row access by column name with line-numbered diagnostics.
struct Rows<R: Read> {
    reader: csv::Reader<R>,
    index: BTreeMap<&'static str, usize>,
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    index: &'a BTreeMap<&'static str, usize>,
    line: u64,
}

impl<R: Read> Rows<R> {
    fn new(input: R, columns: &[&'static str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let headers = reader.headers().map_err(|e| Error::Parse {
            line: 1,
            column: "header".into(),
            message: e.to_string(),
        })?;
        let mut index = BTreeMap::new();
        for &col in columns {
            let pos = headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(col))
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    column: col.into(),
                    message: format!("missing column; header must contain {}", columns.join(",")),
                })?;
            index.insert(col, pos);
        }
        Ok(Self { reader, index })
    }

    fn for_each(mut self, mut f: impl FnMut(Row<'_>) -> Result<()>) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            let more = self.reader.read_record(&mut record).map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                column: "-".into(),
                message: e.to_string(),
            })?;
            if !more {
                return Ok(());
            }
            if record.iter().all(str::is_empty) {
                continue;
            }
            let line = record.position().map_or(0, |p| p.line());
            f(Row {
                record: &record,
                index: &self.index,
                line,
            })?;
        }
    }
}

impl Row<'_> {
    fn get(&self, column: &'static str) -> Result<&str> {
        let value = self.record.get(self.index[column]).unwrap_or("");
        if value.is_empty() {
            return Err(self.error(column, "empty value"));
        }
        Ok(value)
    }

    fn parse<T>(&self, column: &'static str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T> {
        let raw = self.get(column)?;
        f(raw).map_err(|message| self.error(column, message))
    }

    fn error(&self, column: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: column.to_owned(),
            message: message.into(),
        }
    }

    fn exact(&self, column: &'static str) -> Result<Exact> {
        self.parse(column, |s| s.parse::<Exact>().map_err(|e| e.to_string()))
    }

    fn energy(&self, column: &'static str) -> Result<EnergyQuantity> {
        let value = self.exact(column)?;
        EnergyQuantity::new(value).map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("line {}, column {column}: {m}", self.line)),
            other => other,
        })
    }

    fn timestamp(&self, column: &'static str) -> Result<DateTime<Utc>> {
        self.parse(column, parse_utc)
    }

    fn period(&self) -> Result<SnapshotPeriod> {
        let start = self.timestamp("period_start")?;
        let end = self.timestamp("period_end")?;
        SnapshotPeriod::new(start, end).map_err(|e| self.error("period_end", e.to_string()))
    }
}

/// Parses the measurements CSV
/// (`site,source,period_start,period_end,kwh,nodes`).
pub fn parse_measurements<R: Read>(input: R) -> Result<Vec<EnergyMeasurement>> {
    let mut out = Vec::new();
    Rows::new(input, &MEASUREMENT_COLUMNS)?.for_each(|row| {
        let site = row.get("site")?.to_owned();
        let source = row.parse("source", |s| s.parse::<MeasurementSource>().map_err(|e| e.to_string()))?;
        let period = row.period()?;
        let energy = row.energy("kwh")?;
        let nodes_covered = row.parse("nodes", |s| match s.parse::<u64>() {
            Ok(0) => Err("node count must be at least 1".to_owned()),
            Ok(n) => Ok(n),
            Err(e) => Err(format!("invalid node count: {e}")),
        })?;
        out.push(EnergyMeasurement {
            site,
            source,
            period,
            energy,
            nodes_covered,
        });
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerSample {
    #[serde(with = "serde_utc")]
    pub timestamp: DateTime<Utc>,
    pub watts: Exact,
}

/// Power readings for one node, strictly increasing in time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerSampleSeries {
    pub site: String,
    pub node_id: String,
    samples: Vec<PowerSample>,
}

impl PowerSampleSeries {
    pub fn new(site: impl Into<String>, node_id: impl Into<String>, samples: Vec<PowerSample>) -> Result<Self> {
        let series = Self {
            site: site.into(),
            node_id: node_id.into(),
            samples,
        };
        for s in &series.samples {
            if s.watts.is_negative() {
                return Err(Error::Integration(format!(
                    "{}/{}: negative power {} W at {}",
                    series.site, series.node_id, s.watts, s.timestamp
                )));
            }
        }
        for pair in series.samples.windows(2) {
            if pair[1].timestamp <= pair[0].timestamp {
                return Err(Error::Integration(format!(
                    "{}/{}: timestamps not strictly increasing at {}",
                    series.site, series.node_id, pair[1].timestamp
                )));
            }
        }
        Ok(series)
    }

    pub fn samples(&self) -> &[PowerSample] {
        &self.samples
    }

    pub fn span(&self) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        Some((self.samples.first()?.timestamp, self.samples.last()?.timestamp))
    }
}

/// Parses the samples CSV (`site,node_id,timestamp,watts`). Rows may arrive
/// in any order; they are grouped per node and sorted by time.
pub fn parse_samples<R: Read>(input: R) -> Result<Vec<PowerSampleSeries>> {
    let mut groups: BTreeMap<(String, String), Vec<(u64, PowerSample)>> = BTreeMap::new();
    Rows::new(input, &SAMPLE_COLUMNS)?.for_each(|row| {
        let site = row.get("site")?.to_owned();
        let node = row.get("node_id")?.to_owned();
        let timestamp = row.timestamp("timestamp")?;
        let watts = row.exact("watts")?;
        if watts.is_negative() {
            return Err(row.error("watts", "power must be non-negative"));
        }
        groups
            .entry((site, node))
            .or_default()
            .push((row.line, PowerSample { timestamp, watts }));
        Ok(())
    })?;

    let mut out = Vec::with_capacity(groups.len());
    for ((site, node), mut rows) in groups {
        rows.sort_by_key(|(_, s)| s.timestamp);
        for pair in rows.windows(2) {
            if pair[0].1.timestamp == pair[1].1.timestamp {
                let line = pair[0].0.max(pair[1].0);
                return Err(Error::Parse {
                    line,
                    column: "timestamp".into(),
                    message: format!(
                        "duplicate timestamp {} for node {site}/{node}",
                        crate::timestamp::format_utc(&pair[1].1.timestamp)
                    ),
                });
            }
        }
        out.push(PowerSampleSeries::new(
            site,
            node,
            rows.into_iter().map(|(_, s)| s).collect(),
        )?);
    }
    Ok(out)
}

/// An interval between consecutive samples longer than the gap threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleGap {
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Integration {
    pub energy: EnergyQuantity,
    pub gaps: Vec<SampleGap>,
}

/// Default gap threshold as a multiple of the median sample interval.
pub const DEFAULT_GAP_FACTOR: i64 = 10;

/// Trapezoidal integral of a power series in kWh. Gaps are integrated across
/// and reported; intervals longer than `gap_factor` × the median interval
/// are listed in [`Integration::gaps`].
pub fn integrate_power_with(series: &PowerSampleSeries, gap_factor: &Exact) -> Result<Integration> {
    let samples = series.samples();
    if samples.len() < 2 {
        return Err(Error::Integration(format!(
            "{}/{}: at least 2 samples are required, got {}",
            series.site,
            series.node_id,
            samples.len()
        )));
    }
    let mut watt_seconds = Exact::zero();
    let mut intervals = Vec::with_capacity(samples.len() - 1);
    for pair in samples.windows(2) {
        let dt = crate::model::seconds_between(pair[0].timestamp, pair[1].timestamp);
        if !dt.is_positive() {
            return Err(Error::Integration(format!(
                "{}/{}: timestamps not strictly increasing at {}",
                series.site, series.node_id, pair[1].timestamp
            )));
        }
        watt_seconds = watt_seconds + (&pair[0].watts + &pair[1].watts) * &dt / Exact::from_integer(2);
        intervals.push(dt);
    }

    let mut sorted = intervals.clone();
    sorted.sort();
    let median = sorted[sorted.len() / 2].clone();
    let threshold = &median * gap_factor;
    let gaps = samples
        .windows(2)
        .zip(&intervals)
        .filter(|(_, dt)| **dt > threshold)
        .map(|(pair, _)| SampleGap {
            from: pair[0].timestamp,
            to: pair[1].timestamp,
        })
        .collect();

    let kwh = watt_seconds / Exact::from_integer(3_600_000);
    Ok(Integration {
        energy: EnergyQuantity::new(kwh)?,
        gaps,
    })
}

/// Trapezoidal integral of a power series in kWh, warning on long gaps.
pub fn integrate_power(series: &PowerSampleSeries) -> Result<EnergyQuantity> {
    let out = integrate_power_with(series, &Exact::from_integer(DEFAULT_GAP_FACTOR))?;
    for gap in &out.gaps {
        log::warn!(
            "{}/{}: sample gap {} .. {} integrated across",
            series.site,
            series.node_id,
            crate::timestamp::format_utc(&gap.from),
            crate::timestamp::format_utc(&gap.to)
        );
    }
    Ok(out.energy)
}

/// Integrates every series and sums per site, yielding one measurement per
/// site. The period spans the earliest to the latest sample at that site.
pub fn measurements_from_samples(
    series: &[PowerSampleSeries],
    source: MeasurementSource,
) -> Result<Vec<EnergyMeasurement>> {
    struct Acc {
        energy: EnergyQuantity,
        start: DateTime<Utc>,
        end: DateTime<Utc>,
        nodes: BTreeSet<String>,
    }
    let mut sites: BTreeMap<&str, Acc> = BTreeMap::new();
    for s in series {
        let energy = integrate_power(s)?;
        let (start, end) = s.span().expect("integrated series has samples");
        let acc = sites.entry(s.site.as_str()).or_insert_with(|| Acc {
            energy: EnergyQuantity::zero(),
            start,
            end,
            nodes: BTreeSet::new(),
        });
        acc.energy = &acc.energy + &energy;
        acc.start = acc.start.min(start);
        acc.end = acc.end.max(end);
        acc.nodes.insert(s.node_id.clone());
    }
    sites
        .into_iter()
        .map(|(site, acc)| {
            Ok(EnergyMeasurement {
                site: site.to_owned(),
                source,
                period: SnapshotPeriod::new(acc.start, acc.end)?,
                energy: acc.energy,
                nodes_covered: acc.nodes.len() as u64,
            })
        })
        .collect()
}

/// The canonical figure for a site plus every channel's ratio to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconciliationReport {
    pub site: String,
    pub canonical: EnergyMeasurement,
    /// Source energy divided by canonical energy. Absent for a non-zero
    /// source when the canonical figure is zero.
    pub ratios: BTreeMap<MeasurementSource, Exact>,
    pub energies: BTreeMap<MeasurementSource, EnergyQuantity>,
}

impl ReconciliationReport {
    /// `energy(numerator) / energy(denominator)` when both channels are
    /// present and the denominator is non-zero.
    pub fn relative(&self, numerator: MeasurementSource, denominator: MeasurementSource) -> Option<Exact> {
        let n = self.energies.get(&numerator)?;
        let d = self.energies.get(&denominator)?;
        n.value().checked_div(d.value())
    }
}

/// Picks the most trusted channel for one site. Energies are never altered.
pub fn reconcile(site_measurements: &[EnergyMeasurement]) -> Result<ReconciliationReport> {
    let first = site_measurements
        .first()
        .ok_or_else(|| Error::validation("reconcile: no measurements supplied"))?;
    let mut energies = BTreeMap::new();
    for m in site_measurements {
        if m.site != first.site {
            return Err(Error::validation(format!(
                "reconcile: mixed sites {:?} and {:?}",
                first.site, m.site
            )));
        }
        if m.period != first.period {
            return Err(Error::validation(format!(
                "reconcile: site {:?} has measurements over different periods ({} vs {})",
                m.site, first.period, m.period
            )));
        }
        if energies.insert(m.source, m.energy.clone()).is_some() {
            return Err(Error::validation(format!(
                "reconcile: duplicate {} measurement for site {:?}",
                m.source, m.site
            )));
        }
    }
    let canonical = site_measurements
        .iter()
        .max_by_key(|m| m.source)
        .expect("non-empty")
        .clone();
    let base = canonical.energy.value();
    let mut ratios = BTreeMap::new();
    for (source, energy) in &energies {
        let ratio = match energy.value().checked_div(base) {
            Some(r) => r,
            None if energy.value().is_zero() => Exact::one(),
            None => continue,
        };
        ratios.insert(*source, ratio);
    }
    Ok(ReconciliationReport {
        site: first.site.clone(),
        canonical,
        ratios,
        energies,
    })
}

/// Reconciles every site, in site-name order.
pub fn reconcile_all(measurements: &[EnergyMeasurement]) -> Result<Vec<ReconciliationReport>> {
    let mut by_site: BTreeMap<&str, Vec<EnergyMeasurement>> = BTreeMap::new();
    for m in measurements {
        by_site.entry(&m.site).or_default().push(m.clone());
    }
    by_site.values().map(|ms| reconcile(ms)).collect()
}

/// Exact sum of canonical site energies. Each site may appear once.
pub fn snapshot_energy(measurements: &[EnergyMeasurement]) -> Result<EnergyQuantity> {
    let mut seen = BTreeSet::new();
    for m in measurements {
        if !seen.insert(m.site.as_str()) {
            return Err(Error::validation(format!(
                "snapshot: more than one canonical measurement for site {:?}",
                m.site
            )));
        }
    }
    Ok(measurements.iter().map(|m| &m.energy).sum())
}

/// Multiplies each measurement by its source's correction factor. Sources
/// without a factor are left unchanged.
pub fn apply_adjustments(
    measurements: &[EnergyMeasurement],
    multipliers: &BTreeMap<MeasurementSource, Exact>,
) -> Result<Vec<EnergyMeasurement>> {
    measurements
        .iter()
        .map(|m| {
            let mut out = m.clone();
            if let Some(factor) = multipliers.get(&m.source) {
                out.energy = m.energy.scaled(factor)?;
            }
            Ok(out)
        })
        .collect()
}

/// Non-node active energy that can be metered directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Network,
    Cooling,
    Power,
    Facility,
}

impl FromStr for ComponentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "network" => Ok(ComponentKind::Network),
            "cooling" => Ok(ComponentKind::Cooling),
            "power" => Ok(ComponentKind::Power),
            "facility" => Ok(ComponentKind::Facility),
            _ => Err(Error::validation(format!(
                "unknown component {s:?}; expected network, cooling, power or facility"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentMeasurement {
    pub site: String,
    pub component: ComponentKind,
    pub period: SnapshotPeriod,
    #[serde(rename = "kwh")]
    pub energy: EnergyQuantity,
}

/// Parses the optional component CSV
/// (`site,component,period_start,period_end,kwh`).
pub fn parse_components<R: Read>(input: R) -> Result<Vec<ComponentMeasurement>> {
    let mut out = Vec::new();
    Rows::new(input, &COMPONENT_COLUMNS)?.for_each(|row| {
        out.push(ComponentMeasurement {
            site: row.get("site")?.to_owned(),
            component: row.parse("component", |s| s.parse::<ComponentKind>().map_err(|e| e.to_string()))?,
            period: row.period()?,
            energy: row.energy("kwh")?,
        });
        Ok(())
    })?;
    Ok(out)
}

/// Combines canonical node energy with any directly metered network and
/// facilities energy into per-site inputs for the active-carbon model.
pub fn site_energies(canonical: &[EnergyMeasurement], components: &[ComponentMeasurement]) -> Vec<SiteEnergy> {
    let mut sites: BTreeMap<String, SiteEnergy> = BTreeMap::new();
    for m in canonical {
        let entry = sites.entry(m.site.clone()).or_insert_with(|| SiteEnergy {
            site: m.site.clone(),
            ..SiteEnergy::default()
        });
        entry.nodes = &entry.nodes + &m.energy;
    }
    for c in components {
        let entry = sites.entry(c.site.clone()).or_insert_with(|| SiteEnergy {
            site: c.site.clone(),
            ..SiteEnergy::default()
        });
        let slot = match c.component {
            ComponentKind::Network => &mut entry.network,
            kind => {
                let overhead = entry.overhead.get_or_insert_with(FacilityOverhead::default);
                match kind {
                    ComponentKind::Cooling => &mut overhead.cooling,
                    ComponentKind::Power => &mut overhead.power,
                    _ => &mut overhead.facility,
                }
            }
        };
        *slot = &*slot + &c.energy;
    }
    sites.into_values().collect()
}
