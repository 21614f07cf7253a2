//! Run configuration: a TOML file, `--set key=value` overrides, and the
//! pinned constants behind `--paper-compat`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Scalar {
    pub fn text(&self) -> String {
        match self {
            Scalar::Text(s) => s.clone(),
            Scalar::Int(i) => i.to_string(),
            Scalar::Float(f) => f.to_string(),
        }
    }
}

/// Accepts a list, or a single value holding a comma-separated list.
fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Many(Vec<Scalar>),
        One(Scalar),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::Many(v) => v,
        Raw::One(Scalar::Text(s)) => s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| Scalar::Text(p.to_owned()))
            .collect(),
        Raw::One(other) => vec![other],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntensityMode {
    #[default]
    Scenario,
    Series,
    Api,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodConfig {
    pub start: String,
    pub end: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensityConfig {
    #[serde(default)]
    pub mode: IntensityMode,
    /// Scenario mode: registered names (`Low`) or `label=g/kWh` pairs.
    #[serde(default, deserialize_with = "one_or_many")]
    pub points: Vec<Scalar>,
    /// Series mode: a series file in the API's JSON shape.
    pub series: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub retry_base_ms: Option<u64>,
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PueConfig {
    /// Registered PUE names (`Low`, `High-1.6`) or `label=factor` pairs.
    #[serde(default, deserialize_with = "one_or_many")]
    pub points: Vec<Scalar>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbodiedConfig {
    /// kg per node, as `value` or `label=value`.
    #[serde(default, deserialize_with = "one_or_many")]
    pub estimates: Vec<Scalar>,
    /// Years, as `value` or `label=value`.
    #[serde(default, deserialize_with = "one_or_many")]
    pub lifespans: Vec<Scalar>,
    pub days_per_year: Option<Scalar>,
    pub node_count: Option<u64>,
    /// `half_up` or `truncate`, for the Markdown snapshot column.
    pub rounding: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalentConfig {
    pub name: String,
    pub kg_per_unit: Scalar,
    pub unit: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default = "default_output_path")]
    pub path: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            format: default_format(),
            path: default_output_path(),
        }
    }
}

fn default_format() -> String {
    "json".into()
}

fn default_output_path() -> String {
    "-".into()
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inventory: Option<PathBuf>,
    /// Measurements CSV, or the normalized JSON written by `ingest --out`.
    pub measurements: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    /// Channel that sample-derived energies are attributed to.
    pub samples_source: Option<String>,
    pub components: Option<PathBuf>,
    /// Overrides the ingested IT energy.
    pub base_energy_kwh: Option<Scalar>,
    #[serde(default)]
    pub paper_compat: bool,
    pub period: Option<PeriodConfig>,
    #[serde(default)]
    pub intensity: IntensityConfig,
    #[serde(default)]
    pub pue: PueConfig,
    #[serde(default)]
    pub embodied: EmbodiedConfig,
    /// Per-source energy multipliers applied before reconciliation.
    #[serde(default)]
    pub adjustments: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub equivalents: Vec<EquivalentConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

pub const PAPER_COMPAT_START: &str = "2022-11-01T00:00Z";

/// A config file plus the directory its relative paths are resolved from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub base_dir: PathBuf,
    pub config: RunConfig,
    pub notes: Vec<String>,
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// Reads `path`, applies `key=value` overrides in order, then the
/// paper-compat pins if enabled.
pub fn load(path: &Path, overrides: &[String]) -> Result<LoadedConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let mut value: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {}", path.display(), e.message())))?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let mut config: RunConfig = toml::Value::Table(value)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::invalid(format!("{}: {}", path.display(), e.message())))?;
    let mut notes = Vec::new();
    if config.paper_compat {
        notes = pin_paper_compat(&mut config);
    }
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig {
        path: path.to_path_buf(),
        base_dir,
        config,
        notes,
    })
}

/// Sets a dotted key. The value is read as a TOML literal when it parses as
/// one, as a list of strings when it contains commas, and as a string
/// otherwise.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::invalid(format!("override {assignment:?} is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::invalid(format!("override {assignment:?} has an empty key")));
    }
    let value = parse_override_value(raw.trim());
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields one part");
    let mut cursor = table;
    for part in parts {
        let entry = cursor
            .entry(part.to_owned())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| CliError::invalid(format!("override {key:?}: {part:?} is not a table")))?;
    }
    cursor.insert(last.to_owned(), value);
    Ok(())
}

fn parse_override_value(raw: &str) -> toml::Value {
    if let Ok(mut t) = toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        if let Some(v) = t.remove("v") {
            return v;
        }
    }
    if raw.contains(',') {
        return toml::Value::Array(
            raw.split(',')
                .map(|s| toml::Value::String(s.trim().to_owned()))
                .collect(),
        );
    }
    toml::Value::String(raw.to_owned())
}

fn texts(values: &[&str]) -> Vec<Scalar> {
    values.iter().map(|v| Scalar::Text((*v).to_owned())).collect()
}

/// Pins the constants that reproduce the published scenario tables and
/// returns a note for each.
fn pin_paper_compat(c: &mut RunConfig) -> Vec<String> {
    c.base_energy_kwh = Some(Scalar::Text("19380".into()));
    c.intensity.mode = IntensityMode::Scenario;
    c.intensity.points = texts(&["Low=50", "Medium=175", "High=300"]);
    c.intensity.series = None;
    c.intensity.endpoint = None;
    c.pue.points = texts(&["Low=1.1", "Medium=1.3", "High=1.6"]);
    c.embodied.estimates = texts(&["400", "1100"]);
    c.embodied.lifespans = texts(&["3", "4", "5", "6", "7"]);
    c.embodied.days_per_year = Some(Scalar::Text("365.25".into()));
    c.embodied.node_count = Some(2400);
    c.embodied.rounding = Some("truncate".into());
    let start = c
        .period
        .as_ref()
        .map(|p| p.start.clone())
        .unwrap_or_else(|| PAPER_COMPAT_START.to_owned());
    c.period = Some(PeriodConfig { start, end: None });
    vec![
        "paper-compat: base energy pinned at 19380 kWh; the six measured site totals sum to 18760 kWh".into(),
        "paper-compat: high PUE pinned at 1.6, the value consistent with the published active table; the stated high value is 1.5".into(),
        "paper-compat: embodied snapshot uses 2400 nodes and 365.25 days per year, recovered from the published embodied table".into(),
        "paper-compat: snapshot embodied values are truncated to whole kg in Markdown".into(),
        "paper-compat: snapshot period fixed at 24 hours".into(),
    ]
}

/// Splits `label=value`; a bare entry is its own label.
pub fn labelled(entry: &Scalar) -> (String, String) {
    let text = entry.text();
    match text.split_once('=') {
        Some((l, v)) => (l.trim().to_owned(), v.trim().to_owned()),
        None => (text.trim().to_owned(), text.trim().to_owned()),
    }
}
