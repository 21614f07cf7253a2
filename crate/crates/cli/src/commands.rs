use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dricarbon_core::embodied::AmortizationPolicy;
use dricarbon_core::intensity::{
    time_weighted_carbon, IntensityClient, IntensityField, IntensityScenario, IntensitySeries, ReqwestTransport,
    RetryPolicy, ScenarioRegistry, DEFAULT_ENDPOINT,
};
use dricarbon_core::model::{pue_scenario, SiteEnergy};
use dricarbon_core::report::{
    build_active_matrix_for_sites, build_embodied_matrix, render, AxisPoint, EmbodiedMatrix, EquivalentFactor,
    InputDigest, Presentation, Provenance, RenderFormat, Rounding, ScenarioAxis, ScenarioReport,
};
use dricarbon_core::telemetry::{
    apply_adjustments, measurements_from_samples, parse_components, parse_measurements, parse_samples, reconcile_all,
    snapshot_energy, ComponentMeasurement, EnergyMeasurement, MeasurementSource, ReconciliationReport,
};
use dricarbon_core::timestamp::{format_utc, parse_utc};
use dricarbon_core::{EnergyQuantity, Exact, Inventory, SnapshotPeriod};

use crate::config::{labelled, IntensityMode, LoadedConfig, Scalar};
use crate::error::CliError;

pub const ENDPOINT_ENV: &str = "DRICARBON_INTENSITY_ENDPOINT";

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: dricarbon_core::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::from(e.in_file(path)))
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a sibling temporary file so readers never see a partial
/// file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::invalid(format!("{}: {e}", dir.display())))?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| CliError::invalid(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn emit(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::invalid(format!("stdout: {e}")))
    } else {
        write_atomic(Path::new(path), text.as_bytes())?;
        info!("wrote {path}");
        Ok(())
    }
}

fn exact(what: &str, text: &str) -> Result<Exact> {
    text.parse()
        .map_err(|e| CliError::invalid(format!("{what}: {text:?} is not a decimal ({e})")))
}

fn timestamp(what: &str, text: &str) -> Result<DateTime<Utc>> {
    parse_utc(text).map_err(|e| CliError::invalid(format!("{what}: {e}")))
}

/// The normalized form written by `ingest --out` and accepted back as a
/// measurements input.
#[derive(Debug, Serialize, Deserialize)]
pub struct NormalizedMeasurements {
    pub measurements: Vec<EnergyMeasurement>,
    #[serde(default)]
    pub reconciliation: Vec<ReconciliationReport>,
    #[serde(default)]
    pub total_kwh: Option<EnergyQuantity>,
}

pub struct EnergyInputs<'a> {
    pub measurements: Option<&'a Path>,
    pub samples: Option<&'a Path>,
    pub samples_source: MeasurementSource,
    pub components: Option<&'a Path>,
    pub adjustments: BTreeMap<MeasurementSource, Exact>,
}

pub struct Ingested {
    pub measurements: Vec<EnergyMeasurement>,
    pub reports: Vec<ReconciliationReport>,
    pub components: Vec<ComponentMeasurement>,
    pub digests: Vec<(String, PathBuf, String)>,
}

impl Ingested {
    pub fn canonical(&self) -> Vec<EnergyMeasurement> {
        self.reports.iter().map(|r| r.canonical.clone()).collect()
    }
}

fn load_measurements(path: &Path, bytes: &[u8]) -> Result<Vec<EnergyMeasurement>> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let n: NormalizedMeasurements = serde_json::from_slice(bytes)
            .map_err(|e| CliError::invalid(format!("{}:{}: {e}", path.display(), e.line())))?;
        Ok(n.measurements)
    } else {
        in_file(path, parse_measurements(bytes))
    }
}

pub fn ingest_energy(inputs: &EnergyInputs) -> Result<Ingested> {
    let mut measurements = Vec::new();
    let mut digests = Vec::new();
    if let Some(path) = inputs.measurements {
        let bytes = read(path)?;
        measurements.extend(load_measurements(path, &bytes)?);
        digests.push(("measurements".to_owned(), path.to_path_buf(), sha256(&bytes)));
    }
    if let Some(path) = inputs.samples {
        let bytes = read(path)?;
        let series = in_file(path, parse_samples(bytes.as_slice()))?;
        measurements.extend(in_file(
            path,
            measurements_from_samples(&series, inputs.samples_source),
        )?);
        digests.push(("samples".to_owned(), path.to_path_buf(), sha256(&bytes)));
    }
    let mut components = Vec::new();
    if let Some(path) = inputs.components {
        let bytes = read(path)?;
        components = in_file(path, parse_components(bytes.as_slice()))?;
        digests.push(("components".to_owned(), path.to_path_buf(), sha256(&bytes)));
    }
    let measurements = apply_adjustments(&measurements, &inputs.adjustments)?;
    let reports = reconcile_all(&measurements)?;
    Ok(Ingested {
        measurements,
        reports,
        components,
        digests,
    })
}

pub fn parse_adjustments<'a>(
    entries: impl IntoIterator<Item = (&'a str, String)>,
) -> Result<BTreeMap<MeasurementSource, Exact>> {
    let mut out = BTreeMap::new();
    for (source, factor) in entries {
        let source: MeasurementSource = source.parse()?;
        let factor = exact("adjustment", &factor)?;
        if factor.is_negative() {
            return Err(CliError::invalid(format!(
                "adjustment for {source} must be non-negative"
            )));
        }
        out.insert(source, factor);
    }
    Ok(out)
}

fn ratio_text(r: &ReconciliationReport) -> String {
    r.ratios
        .iter()
        .rev()
        .map(|(s, v)| format!("{s}={}", v.to_fixed(4)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Canonical per-site energy summary plus reconciliation ratios.
pub fn ingest(inputs: &EnergyInputs, out: Option<&Path>) -> Result<()> {
    if inputs.measurements.is_none() && inputs.samples.is_none() {
        return Err(CliError::invalid("ingest needs --measurements and/or --samples"));
    }
    let data = ingest_energy(inputs)?;
    let canonical = data.canonical();
    let total = snapshot_energy(&canonical)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<12} {:<10} {:>14} {:>7}  ratios to canonical",
        "site", "source", "kWh", "nodes"
    );
    for r in &data.reports {
        let c = &r.canonical;
        let _ = writeln!(
            text,
            "{:<12} {:<10} {:>14} {:>7}  {}",
            r.site,
            c.source.as_str(),
            c.energy.value().to_string(),
            c.nodes_covered,
            ratio_text(r)
        );
    }
    let _ = writeln!(text, "total {} kWh over {} site(s)", total.value(), data.reports.len());
    emit("-", &text)?;
    if let Some(path) = out {
        let normalized = NormalizedMeasurements {
            measurements: data.measurements,
            reconciliation: data.reports,
            total_kwh: Some(total),
        };
        let mut json = serde_json::to_string_pretty(&normalized).expect("measurements serialize");
        json.push('\n');
        write_atomic(path, json.as_bytes())?;
    }
    Ok(())
}

pub struct FetchArgs<'a> {
    pub from: &'a str,
    pub to: &'a str,
    pub endpoint: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub out: &'a Path,
    pub csv: Option<&'a Path>,
    pub retry_base_ms: Option<u64>,
    pub max_in_flight: Option<usize>,
}

fn resolve_endpoint(explicit: Option<String>) -> String {
    explicit
        .or_else(|| std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.is_empty()))
        .unwrap_or_else(|| DEFAULT_ENDPOINT.to_owned())
}

fn fetch_series(
    range: &SnapshotPeriod,
    endpoint: &str,
    cache_dir: Option<&Path>,
    retry_base_ms: Option<u64>,
    max_in_flight: Option<usize>,
) -> Result<IntensitySeries> {
    let mut client = IntensityClient::new(endpoint, ReqwestTransport::new()?);
    if let Some(dir) = cache_dir {
        client = client.with_cache_dir(dir);
    }
    if let Some(ms) = retry_base_ms {
        client = client.with_retry(RetryPolicy {
            base_delay: Duration::from_millis(ms),
            ..RetryPolicy::default()
        });
    }
    if let Some(n) = max_in_flight {
        client = client.with_max_in_flight(n);
    }
    Ok(client.fetch(range)?)
}

pub fn fetch_intensity(args: &FetchArgs) -> Result<()> {
    let from = timestamp("--from", args.from)?;
    let to = timestamp("--to", args.to)?;
    let range = SnapshotPeriod::new(from, to)
        .map_err(|_| CliError::invalid(format!("range {} .. {} is empty or inverted", args.from, args.to)))?;
    let endpoint = resolve_endpoint(args.endpoint.clone());
    let series = fetch_series(
        &range,
        &endpoint,
        args.cache_dir.as_deref(),
        args.retry_base_ms,
        args.max_in_flight,
    )?;
    write_atomic(args.out, series.to_api_json().as_bytes())?;
    if let Some(csv) = args.csv {
        write_atomic(csv, series.to_csv().as_bytes())?;
    }
    let mut text = format!(
        "{} period(s) {} .. {}\n",
        series.len(),
        format_utc(&from),
        format_utc(&to)
    );
    match series.stats() {
        Some(s) => {
            let _ = writeln!(text, "{s}");
        }
        None => text.push_str("no intensity data in range\n"),
    }
    emit("-", &text)
}

/// Everything `report` and `validate` need, loaded and checked.
struct Plan {
    inventory: Option<Inventory>,
    sites: Vec<SiteEnergy>,
    base_energy: EnergyQuantity,
    period: SnapshotPeriod,
    intensity_axis: ScenarioAxis,
    pue_axis: ScenarioAxis,
    estimate_axis: Option<ScenarioAxis>,
    lifespan_axis: Option<ScenarioAxis>,
    node_count: Option<u64>,
    policy: AmortizationPolicy,
    equivalents: Vec<EquivalentFactor>,
    presentation: Presentation,
    format: RenderFormat,
    digests: Vec<InputDigest>,
    notes: Vec<String>,
}

fn axis(name: &str, entries: Vec<(String, Exact)>) -> Result<ScenarioAxis> {
    Ok(ScenarioAxis::new(
        name,
        entries
            .into_iter()
            .map(|(label, value)| AxisPoint { label, value })
            .collect(),
    )?)
}

fn scalar_axis(name: &str, entries: &[Scalar]) -> Result<Vec<(String, Exact)>> {
    entries
        .iter()
        .map(|e| {
            let (label, value) = labelled(e);
            Ok((label, exact(name, &value)?))
        })
        .collect()
}

/// Distinct values in first-seen order.
fn distinct(values: impl Iterator<Item = Exact>) -> Vec<(String, Exact)> {
    let mut out: Vec<(String, Exact)> = Vec::new();
    for v in values {
        if !out.iter().any(|(_, x)| *x == v) {
            out.push((v.to_string(), v));
        }
    }
    out
}

fn common_period(measurements: &[EnergyMeasurement]) -> Option<SnapshotPeriod> {
    let first = measurements.first()?;
    measurements
        .iter()
        .all(|m| m.period == first.period)
        .then(|| first.period.clone())
}

fn digest(role: &str, shown: &Path, bytes: &[u8]) -> InputDigest {
    InputDigest {
        role: role.to_owned(),
        path: shown.display().to_string(),
        sha256: sha256(bytes),
    }
}

fn plan(cfg: &LoadedConfig, cache_override: Option<&Path>, offline: bool) -> Result<Plan> {
    let c = &cfg.config;
    let mut notes = cfg.notes.clone();
    let mut digests = Vec::new();
    // Paths in the report are shown as written in the config so that output
    // does not depend on the working directory.
    let shown = |p: &Path| p.to_path_buf();

    let inventory = match &c.inventory {
        Some(p) => {
            let full = cfg.resolve(p);
            let bytes = read(&full)?;
            let text = String::from_utf8_lossy(&bytes);
            let inv = in_file(&full, Inventory::from_json(&text))?;
            digests.push(digest("inventory", &shown(p), &bytes));
            Some(inv)
        }
        None => None,
    };

    let adjustments = parse_adjustments(c.adjustments.iter().map(|(k, v)| (k.as_str(), v.text())))?;
    let samples_source: MeasurementSource = match &c.samples_source {
        Some(s) => s.parse()?,
        None => MeasurementSource::Ipmi,
    };
    let resolved = |p: &Option<PathBuf>| p.as_ref().map(|p| cfg.resolve(p));
    let (m, s, k) = (resolved(&c.measurements), resolved(&c.samples), resolved(&c.components));
    let data = ingest_energy(&EnergyInputs {
        measurements: m.as_deref(),
        samples: s.as_deref(),
        samples_source,
        components: k.as_deref(),
        adjustments,
    })?;
    for (role, _, sha) in &data.digests {
        let written = match role.as_str() {
            "measurements" => &c.measurements,
            "samples" => &c.samples,
            _ => &c.components,
        };
        digests.push(InputDigest {
            role: role.clone(),
            path: written.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            sha256: sha.clone(),
        });
    }
    let canonical = data.canonical();
    let measured = snapshot_energy(&canonical)?;

    let (sites, base_energy) = match &c.base_energy_kwh {
        Some(pin) => {
            let e = EnergyQuantity::new(exact("base_energy_kwh", &pin.text())?)?;
            if !canonical.is_empty() {
                notes.push(format!(
                    "base energy pinned at {} kWh; ingested canonical energy is {} kWh",
                    e.value(),
                    measured.value()
                ));
            }
            let site = SiteEnergy {
                site: "pinned".into(),
                nodes: e.clone(),
                ..SiteEnergy::default()
            };
            (vec![site], e)
        }
        None => {
            if canonical.is_empty() {
                return Err(CliError::invalid(
                    "no energy input: set measurements, samples, or base_energy_kwh",
                ));
            }
            let sites = dricarbon_core::telemetry::site_energies(&canonical, &data.components);
            let it: EnergyQuantity = sites.iter().map(|s| s.it_energy()).sum();
            (sites, it)
        }
    };

    let period = match &c.period {
        Some(p) => {
            let start = timestamp("period.start", &p.start)?;
            let end = match (&p.end, c.paper_compat) {
                (_, true) => start + chrono::Duration::hours(24),
                (Some(e), false) => timestamp("period.end", e)?,
                (None, false) => return Err(CliError::invalid("period.end is required")),
            };
            SnapshotPeriod::new(start, end).map_err(|_| {
                CliError::invalid(format!(
                    "{}: snapshot period {} .. {} has zero or negative length",
                    cfg.path.display(),
                    format_utc(&start),
                    format_utc(&end)
                ))
            })?
        }
        None => common_period(&canonical)
            .ok_or_else(|| CliError::invalid("period is required when measurements do not share one period"))?,
    };

    let intensity_axis = match c.intensity.mode {
        IntensityMode::Api if offline => {
            if c.intensity.series.is_some() || !c.intensity.points.is_empty() {
                return Err(CliError::invalid(
                    "intensity.mode is api but series/points parameters are set",
                ));
            }
            axis("intensity", vec![("api".to_owned(), Exact::zero())])?
        }
        IntensityMode::Scenario => {
            if c.intensity.series.is_some() || c.intensity.endpoint.is_some() {
                return Err(CliError::invalid(
                    "intensity.mode is scenario but series/endpoint parameters are set",
                ));
            }
            let mut registry = ScenarioRegistry::default();
            let entries: Vec<Scalar> = if c.intensity.points.is_empty() {
                registry.names().iter().map(|n| Scalar::Text((*n).to_owned())).collect()
            } else {
                c.intensity.points.clone()
            };
            let mut points = Vec::new();
            for e in &entries {
                let text = e.text();
                if let Some((label, value)) = text.split_once('=') {
                    let (label, value) = (label.trim(), exact("intensity", value.trim())?);
                    match registry.get(label) {
                        Ok(known) if *known.value() == value => {}
                        _ => registry.add(IntensityScenario {
                            name: label.to_owned(),
                            intensity: dricarbon_core::CarbonIntensity::new(value)?,
                        })?,
                    }
                    points.push((label.to_owned(), registry.get(label)?.into_inner()));
                } else {
                    let label = text.trim();
                    points.push((label.to_owned(), registry.get(label)?.into_inner()));
                }
            }
            axis("intensity", points)?
        }
        IntensityMode::Series | IntensityMode::Api => {
            if !c.intensity.points.is_empty() {
                return Err(CliError::invalid("intensity.points only applies to scenario mode"));
            }
            let series = if c.intensity.mode == IntensityMode::Series {
                if c.intensity.endpoint.is_some() {
                    return Err(CliError::invalid("intensity.mode is series but an endpoint is set"));
                }
                let p = c
                    .intensity
                    .series
                    .as_ref()
                    .ok_or_else(|| CliError::invalid("intensity.mode series needs intensity.series"))?;
                let full = cfg.resolve(p);
                let bytes = read(&full)?;
                let series = in_file(&full, IntensitySeries::from_api_json(&bytes))?;
                digests.push(digest("intensity-series", &shown(p), &bytes));
                series
            } else {
                if c.intensity.series.is_some() {
                    return Err(CliError::invalid("intensity.mode is api but a series file is set"));
                }
                let endpoint = resolve_endpoint(c.intensity.endpoint.clone());
                let cache = cache_override
                    .map(Path::to_path_buf)
                    .or_else(|| c.intensity.cache_dir.as_ref().map(|d| cfg.resolve(d)));
                let series = fetch_series(
                    &period,
                    &endpoint,
                    cache.as_deref(),
                    c.intensity.retry_base_ms,
                    c.intensity.max_in_flight,
                )?;
                let body = series.to_api_json();
                digests.push(InputDigest {
                    role: "intensity-api".into(),
                    path: endpoint,
                    sha256: sha256(body.as_bytes()),
                });
                series
            };
            let forecasts = series
                .periods()
                .iter()
                .filter(|p| p.field == IntensityField::Forecast)
                .count();
            if forecasts > 0 {
                notes.push(format!("{forecasts} settlement period(s) used forecast intensity"));
            }
            let label = if c.intensity.mode == IntensityMode::Series {
                "series"
            } else {
                "api"
            };
            let effective =
                effective_intensity(&canonical, &base_energy, c.base_energy_kwh.is_some(), &period, &series)?;
            notes.push(format!(
                "time-weighted intensity {} gCO2e/kWh over the snapshot",
                effective.to_fixed(3)
            ));
            axis("intensity", vec![(label.to_owned(), effective)])?
        }
    };

    let pue_entries: Vec<Scalar> = if c.pue.points.is_empty() {
        ["Low", "Medium", "High"]
            .iter()
            .map(|n| Scalar::Text((*n).to_owned()))
            .collect()
    } else {
        c.pue.points.clone()
    };
    let mut pues = Vec::new();
    for e in &pue_entries {
        let text = e.text();
        let (label, value) = match text.split_once('=') {
            Some((l, v)) => (l.trim().to_owned(), exact("pue", v.trim())?),
            None => (text.trim().to_owned(), pue_scenario(text.trim())?.into()),
        };
        dricarbon_core::PueFactor::new(value.clone())?;
        pues.push((label, value));
    }
    let pue_axis = axis("pue", pues)?;

    let estimates = if c.embodied.estimates.is_empty() {
        inventory
            .as_ref()
            .map(|inv| distinct(inv.node_groups().map(|(_, g)| g.embodied_kg_per_node.clone())))
            .unwrap_or_default()
    } else {
        scalar_axis("embodied.estimates", &c.embodied.estimates)?
    };
    let lifespans = if c.embodied.lifespans.is_empty() {
        inventory
            .as_ref()
            .map(|inv| distinct(inv.node_groups().map(|(_, g)| g.lifespan_years.clone())))
            .unwrap_or_default()
    } else {
        scalar_axis("embodied.lifespans", &c.embodied.lifespans)?
    };
    let (estimate_axis, lifespan_axis) = match (estimates.is_empty(), lifespans.is_empty()) {
        (true, true) => {
            warn!("no embodied estimates or lifespans configured; the embodied table will be empty");
            (None, None)
        }
        (false, false) => (
            Some(axis("embodied_estimate_kg", estimates)?),
            Some(axis("lifespan_years", lifespans)?),
        ),
        _ => {
            return Err(CliError::invalid(
                "embodied estimates and lifespans must be given together",
            ))
        }
    };
    let node_count = c
        .embodied
        .node_count
        .or_else(|| inventory.as_ref().map(Inventory::total_nodes).filter(|n| *n > 0))
        .or_else(|| {
            let n: u64 = canonical.iter().map(|m| m.nodes_covered).sum();
            (n > 0).then_some(n)
        });
    if estimate_axis.is_some() && node_count.is_none() {
        return Err(CliError::invalid(
            "embodied.node_count is required without an inventory",
        ));
    }
    let policy = match &c.embodied.days_per_year {
        Some(d) => AmortizationPolicy::with_days_per_year(exact("embodied.days_per_year", &d.text())?)?,
        None => AmortizationPolicy::default(),
    };
    let rounding = match c.embodied.rounding.as_deref() {
        None | Some("half_up") => Rounding::HalfUp,
        Some("truncate") => Rounding::Truncate,
        Some(other) => {
            return Err(CliError::invalid(format!(
                "embodied.rounding {other:?}; expected half_up or truncate"
            )))
        }
    };

    let mut equivalents = vec![EquivalentFactor::flight()];
    if c.paper_compat {
        equivalents.push(EquivalentFactor::new(
            "24 h flight",
            Exact::from_integer(24 * dricarbon_core::report::FLIGHT_KG_PER_PASSENGER_HOUR),
            "passenger-journeys",
        )?);
    }
    for e in &c.equivalents {
        equivalents.push(EquivalentFactor::new(
            e.name.clone(),
            exact("equivalents.kg_per_unit", &e.kg_per_unit.text())?,
            e.unit.clone(),
        )?);
    }
    let format: RenderFormat = c.output.format.parse()?;

    Ok(Plan {
        inventory,
        sites,
        base_energy,
        period,
        intensity_axis,
        pue_axis,
        estimate_axis,
        lifespan_axis,
        node_count,
        policy,
        equivalents,
        presentation: Presentation {
            embodied_rounding: rounding,
        },
        format,
        digests,
        notes,
    })
}

/// Carbon of the energy profile against the series, per kWh. Canonical
/// measurements supply the profile unless the energy is pinned; an empty or
/// zero-energy profile is treated as uniform use over the snapshot.
fn effective_intensity(
    canonical: &[EnergyMeasurement],
    base: &EnergyQuantity,
    pinned: bool,
    period: &SnapshotPeriod,
    series: &IntensitySeries,
) -> Result<Exact> {
    let mut profile: Vec<(SnapshotPeriod, EnergyQuantity)> = if pinned {
        vec![(period.clone(), base.clone())]
    } else {
        canonical.iter().map(|m| (m.period.clone(), m.energy.clone())).collect()
    };
    let mut total: EnergyQuantity = profile.iter().map(|(_, e)| e).sum();
    if total.value().is_zero() {
        profile = vec![(period.clone(), EnergyQuantity::kwh(1)?)];
        total = EnergyQuantity::kwh(1)?;
    }
    let carbon = time_weighted_carbon(&profile, series)?;
    Ok(carbon.grams() / total.value())
}

fn build_report(cfg: &LoadedConfig, plan: Plan) -> Result<ScenarioReport> {
    let active = build_active_matrix_for_sites(&plan.sites, &plan.intensity_axis, &plan.pue_axis)?;
    let embodied = match (&plan.estimate_axis, &plan.lifespan_axis) {
        (Some(e), Some(l)) => build_embodied_matrix(
            e,
            l,
            &plan.period.duration_days(),
            plan.node_count.expect("checked in plan"),
            &plan.policy,
        )?,
        _ => EmbodiedMatrix {
            period_days: plan.period.duration_days(),
            ..EmbodiedMatrix::default()
        },
    };
    let mut notes = plan.notes;
    if let Some(inv) = &plan.inventory {
        let fleet = dricarbon_core::embodied::fleet_embodied(inv, &plan.period, &plan.policy)?;
        notes.push(format!(
            "inventory: {} node(s), embodied carbon over the snapshot {} kg",
            inv.total_nodes(),
            fleet.kg().to_fixed(1)
        ));
    }
    let mut scenario_axes = vec![plan.intensity_axis, plan.pue_axis];
    scenario_axes.extend(plan.estimate_axis);
    scenario_axes.extend(plan.lifespan_axis);
    let mut inputs = vec![];
    if let Ok(bytes) = fs::read(&cfg.path) {
        let name = cfg.path.file_name().map(PathBuf::from).unwrap_or_default();
        inputs.push(digest("config", &name, &bytes));
    }
    inputs.extend(plan.digests);
    Ok(ScenarioReport::assemble(
        plan.base_energy,
        Some(plan.period),
        active,
        embodied,
        &plan.equivalents,
        plan.presentation,
        Provenance {
            inputs,
            scenario_axes,
            tool_version: format!("dricarbon {}", env!("CARGO_PKG_VERSION")),
            notes,
        },
    ))
}

pub fn report(cfg: &LoadedConfig, cache_dir: Option<&Path>) -> Result<()> {
    let plan = plan(cfg, cache_dir, false)?;
    let format = plan.format;
    let report = build_report(cfg, plan)?;
    emit(&cfg.config.output.path, &render(&report, format))
}

/// Loads and checks every input without contacting the intensity endpoint.
pub fn validate(cfg: &LoadedConfig) -> Result<()> {
    let p = plan(cfg, None, true)?;
    let text = format!(
        "{}: ok\nbase energy {} kWh, period {}, {} intensity x {} PUE scenario(s)\n",
        cfg.path.display(),
        p.base_energy.value(),
        p.period,
        p.intensity_axis.points().len(),
        p.pue_axis.points().len()
    );
    emit("-", &text)
}
