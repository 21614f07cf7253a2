//! Scenario matrices, equivalents, and report rendering.
//!
//! A report crosses an intensity axis with a PUE axis for active carbon and
//! an embodied-estimate axis with a lifespan axis for embodied carbon, then
//! brackets the total between the smallest and largest combinations.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embodied::{amortize_per_day, embodied_for_days, AmortizationPolicy, EmbodiedEstimate};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::model::{
    active_carbon, site_active_breakdown, total_carbon, CarbonIntensity, CarbonQuantity, EnergyQuantity, PueFactor,
    SiteEnergy, SnapshotPeriod,
};

/// Serializes a [`CarbonQuantity`] as an exact kg string.
mod kg {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &CarbonQuantity, s: S) -> std::result::Result<S::Ok, S::Error> {
        c.kg().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CarbonQuantity, D::Error> {
        let kg = Exact::deserialize(d)?;
        CarbonQuantity::from_kg(kg).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisPoint {
    pub label: String,
    pub value: Exact,
}

/// An ordered, labelled list of scenario values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAxis")]
pub struct ScenarioAxis {
    name: String,
    points: Vec<AxisPoint>,
}

#[derive(Deserialize)]
struct RawAxis {
    name: String,
    points: Vec<AxisPoint>,
}

impl TryFrom<RawAxis> for ScenarioAxis {
    type Error = Error;
    fn try_from(raw: RawAxis) -> Result<Self> {
        ScenarioAxis::new(raw.name, raw.points)
    }
}

impl ScenarioAxis {
    pub fn new(name: impl Into<String>, points: Vec<AxisPoint>) -> Result<Self> {
        let name = name.into();
        if points.is_empty() {
            return Err(Error::validation(format!("scenario axis {name:?} has no points")));
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].iter().any(|q| q.label == p.label) {
                return Err(Error::validation(format!(
                    "scenario axis {name:?} repeats label {:?}",
                    p.label
                )));
            }
        }
        Ok(Self { name, points })
    }

    /// Builds an axis from `(label, value)` pairs of decimal text.
    pub fn from_pairs(name: impl Into<String>, pairs: &[(&str, &str)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|(label, value)| {
                Ok(AxisPoint {
                    label: (*label).to_owned(),
                    value: value.parse().map_err(|e| Error::validation(format!("{e}")))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, points)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[AxisPoint] {
        &self.points
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseCell {
    pub intensity: String,
    #[serde(rename = "kg", with = "kg")]
    pub carbon: CarbonQuantity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveCell {
    pub intensity: String,
    pub pue: String,
    #[serde(rename = "kg", with = "kg")]
    pub carbon: CarbonQuantity,
}

/// Active carbon per intensity (`base`) and per intensity × PUE
/// (`with_facilities`), in axis order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActiveMatrix {
    pub base: Vec<BaseCell>,
    pub with_facilities: Vec<ActiveCell>,
}

impl ActiveMatrix {
    pub fn base(&self, intensity: &str) -> Option<&CarbonQuantity> {
        self.base.iter().find(|c| c.intensity == intensity).map(|c| &c.carbon)
    }

    pub fn get(&self, intensity: &str, pue: &str) -> Option<&CarbonQuantity> {
        self.with_facilities
            .iter()
            .find(|c| c.intensity == intensity && c.pue == pue)
            .map(|c| &c.carbon)
    }
}

fn intensities_of(axis: &ScenarioAxis) -> Result<Vec<(&str, CarbonIntensity)>> {
    axis.points()
        .iter()
        .map(|p| Ok((p.label.as_str(), CarbonIntensity::new(p.value.clone())?)))
        .collect()
}

fn pues_of(axis: &ScenarioAxis) -> Result<Vec<(&str, PueFactor)>> {
    axis.points()
        .iter()
        .map(|p| Ok((p.label.as_str(), PueFactor::new(p.value.clone())?)))
        .collect()
}

/// Every intensity × PUE cell for a single IT energy figure, unrounded.
pub fn build_active_matrix(
    energy: &EnergyQuantity,
    intensities: &ScenarioAxis,
    pues: &ScenarioAxis,
) -> Result<ActiveMatrix> {
    let site = SiteEnergy {
        site: String::new(),
        nodes: energy.clone(),
        ..SiteEnergy::default()
    };
    build_active_matrix_for_sites(&[site], intensities, pues)
}

/// Like [`build_active_matrix`], but sites with metered facilities energy
/// use it in place of the PUE estimate.
pub fn build_active_matrix_for_sites(
    sites: &[SiteEnergy],
    intensities: &ScenarioAxis,
    pues: &ScenarioAxis,
) -> Result<ActiveMatrix> {
    let intensities = intensities_of(intensities)?;
    let pues = pues_of(pues)?;
    let it_energy: EnergyQuantity = sites.iter().map(|s| s.it_energy()).sum();
    let mut matrix = ActiveMatrix::default();
    for (ci_label, ci) in &intensities {
        matrix.base.push(BaseCell {
            intensity: (*ci_label).to_owned(),
            carbon: active_carbon(&it_energy, ci),
        });
        for (pue_label, pue) in &pues {
            matrix.with_facilities.push(ActiveCell {
                intensity: (*ci_label).to_owned(),
                pue: (*pue_label).to_owned(),
                carbon: site_active_breakdown(sites, ci, pue).total(),
            });
        }
    }
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbodiedCell {
    pub estimate: String,
    pub lifespan: String,
    #[serde(rename = "per_day_per_node_kg", with = "kg")]
    pub per_day: CarbonQuantity,
    #[serde(rename = "snapshot_kg", with = "kg")]
    pub snapshot: CarbonQuantity,
}

/// Embodied carbon per estimate × lifespan for `node_count` notional nodes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EmbodiedMatrix {
    pub node_count: u64,
    pub period_days: Exact,
    pub estimates: Vec<String>,
    pub lifespans: Vec<String>,
    pub cells: Vec<EmbodiedCell>,
}

impl EmbodiedMatrix {
    pub fn get(&self, estimate: &str, lifespan: &str) -> Option<&EmbodiedCell> {
        self.cells
            .iter()
            .find(|c| c.estimate == estimate && c.lifespan == lifespan)
    }
}

/// Every estimate × lifespan cell over a window of `period_days` days.
/// Lifespan axis values are years.
pub fn build_embodied_matrix(
    estimates: &ScenarioAxis,
    lifespans: &ScenarioAxis,
    period_days: &Exact,
    node_count: u64,
    policy: &AmortizationPolicy,
) -> Result<EmbodiedMatrix> {
    let mut matrix = EmbodiedMatrix {
        node_count,
        period_days: period_days.clone(),
        estimates: estimates.points().iter().map(|p| p.label.clone()).collect(),
        lifespans: lifespans.points().iter().map(|p| p.label.clone()).collect(),
        cells: Vec::new(),
    };
    for life in lifespans.points() {
        for est in estimates.points() {
            let estimate = EmbodiedEstimate::new(est.label.clone(), est.value.clone())?;
            matrix.cells.push(EmbodiedCell {
                estimate: est.label.clone(),
                lifespan: life.label.clone(),
                per_day: amortize_per_day(&estimate, &life.value, policy)?,
                snapshot: embodied_for_days(&estimate, &life.value, period_days, node_count, policy)?,
            });
        }
    }
    Ok(matrix)
}

/// A conversion from carbon to some everyday unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalentFactor {
    pub name: String,
    pub kg_per_unit: Exact,
    pub unit: String,
}

impl EquivalentFactor {
    pub fn new(name: impl Into<String>, kg_per_unit: Exact, unit: impl Into<String>) -> Result<Self> {
        if !kg_per_unit.is_positive() {
            return Err(Error::validation("equivalent kg_per_unit must be positive"));
        }
        Ok(Self {
            name: name.into(),
            kg_per_unit,
            unit: unit.into(),
        })
    }

    /// Jet aircraft emissions, 92 kgCO2e per passenger per hour.
    pub fn flight() -> Self {
        Self {
            name: "flight".into(),
            kg_per_unit: Exact::from_integer(FLIGHT_KG_PER_PASSENGER_HOUR),
            unit: "passenger-hours".into(),
        }
    }

    pub fn convert(&self, carbon: &CarbonQuantity) -> Exact {
        carbon.kg() / &self.kg_per_unit
    }
}

pub const FLIGHT_KG_PER_PASSENGER_HOUR: i64 = 92;

/// Passenger-hours of flying with the same emissions.
pub fn flight_equivalent(carbon: &CarbonQuantity) -> Exact {
    EquivalentFactor::flight().convert(carbon)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equivalent {
    pub name: String,
    /// Which total the quantity was derived from: `min` or `max`.
    pub basis: String,
    pub quantity: Exact,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Totals {
    #[serde(rename = "active_min_kg", with = "kg")]
    pub active_min: CarbonQuantity,
    #[serde(rename = "active_max_kg", with = "kg")]
    pub active_max: CarbonQuantity,
    #[serde(rename = "embodied_min_kg", with = "kg")]
    pub embodied_min: CarbonQuantity,
    #[serde(rename = "embodied_max_kg", with = "kg")]
    pub embodied_max: CarbonQuantity,
    #[serde(rename = "min_kg", with = "kg")]
    pub min: CarbonQuantity,
    #[serde(rename = "max_kg", with = "kg")]
    pub max: CarbonQuantity,
}

impl Totals {
    /// Brackets active (facilities-inclusive cells) plus embodied (snapshot
    /// cells). An empty matrix contributes zero.
    pub fn from_matrices(active: &ActiveMatrix, embodied: &EmbodiedMatrix) -> Self {
        let (active_min, active_max) = min_max(active.with_facilities.iter().map(|c| &c.carbon));
        let (embodied_min, embodied_max) = min_max(embodied.cells.iter().map(|c| &c.snapshot));
        Self {
            min: total_carbon(&active_min, &embodied_min),
            max: total_carbon(&active_max, &embodied_max),
            active_min,
            active_max,
            embodied_min,
            embodied_max,
        }
    }
}

fn min_max<'a>(mut it: impl Iterator<Item = &'a CarbonQuantity>) -> (CarbonQuantity, CarbonQuantity) {
    let Some(first) = it.next() else {
        return (CarbonQuantity::zero(), CarbonQuantity::zero());
    };
    it.fold((first.clone(), first.clone()), |(lo, hi), c| {
        (
            if c < &lo { c.clone() } else { lo },
            if c > &hi { c.clone() } else { hi },
        )
    })
}

/// How snapshot embodied figures are rounded in Markdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    #[default]
    HalfUp,
    Truncate,
}

impl Rounding {
    pub fn apply(&self, value: &Exact, places: u32) -> String {
        match self {
            Rounding::HalfUp => value.to_fixed(places),
            Rounding::Truncate => value.truncate(places).to_fixed(places),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Presentation {
    /// Applies to snapshot embodied totals; per-day rates always round
    /// half-up to two places.
    pub embodied_rounding: Rounding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub inputs: Vec<InputDigest>,
    pub scenario_axes: Vec<ScenarioAxis>,
    pub tool_version: String,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    #[serde(rename = "base_energy_kwh")]
    pub base_energy: EnergyQuantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<SnapshotPeriod>,
    pub active_matrix: ActiveMatrix,
    pub embodied_matrix: EmbodiedMatrix,
    pub totals: Totals,
    pub equivalents: Vec<Equivalent>,
    #[serde(default)]
    pub presentation: Presentation,
    pub provenance: Provenance,
}

impl ScenarioReport {
    /// Assembles a report, computing totals and equivalents for each factor.
    pub fn assemble(
        base_energy: EnergyQuantity,
        period: Option<SnapshotPeriod>,
        active_matrix: ActiveMatrix,
        embodied_matrix: EmbodiedMatrix,
        factors: &[EquivalentFactor],
        presentation: Presentation,
        provenance: Provenance,
    ) -> Self {
        let totals = Totals::from_matrices(&active_matrix, &embodied_matrix);
        let equivalents = factors
            .iter()
            .flat_map(|f| {
                [("min", &totals.min), ("max", &totals.max)].map(|(basis, c)| Equivalent {
                    name: f.name.clone(),
                    basis: basis.to_owned(),
                    quantity: f.convert(c),
                    unit: f.unit.clone(),
                })
            })
            .collect();
        Self {
            base_energy,
            period,
            active_matrix,
            embodied_matrix,
            totals,
            equivalents,
            presentation,
            provenance,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation(format!("report JSON: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Json,
    Markdown,
}

impl FromStr for RenderFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(RenderFormat::Json),
            "markdown" | "md" => Ok(RenderFormat::Markdown),
            _ => Err(Error::validation(format!(
                "unknown output format {s:?}; expected json or markdown"
            ))),
        }
    }
}

pub fn render(report: &ScenarioReport, format: RenderFormat) -> String {
    match format {
        RenderFormat::Json => render_json(report),
        RenderFormat::Markdown => render_markdown(report),
    }
}

/// Pretty JSON with lexicographically sorted keys and exact decimal strings.
pub fn render_json(report: &ScenarioReport) -> String {
    // serde_json::Value keeps object keys in a BTreeMap, which sorts them.
    let value = serde_json::to_value(report).expect("report serializes");
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    text
}

fn kg0(c: &CarbonQuantity) -> String {
    c.kg().to_fixed(0)
}

/// Markdown tables laid out like the published active and embodied carbon
/// tables. Active cells round half-up to whole kg.
pub fn render_markdown(report: &ScenarioReport) -> String {
    let mut out = String::new();
    let m = &report.active_matrix;
    let _ = writeln!(out, "# Carbon scenario report\n");
    let _ = writeln!(out, "Base active energy: {} kWh", report.base_energy.value());
    if let Some(p) = &report.period {
        let _ = writeln!(out, "Period: {p} ({} h)", p.duration_hours());
    }
    let _ = writeln!(out);

    let _ = writeln!(out, "## Active carbon estimates (kgCO2e)\n");
    let intensities: Vec<&str> = m.base.iter().map(|c| c.intensity.as_str()).collect();
    let mut pues: Vec<&str> = Vec::new();
    for c in &m.with_facilities {
        if !pues.contains(&c.pue.as_str()) {
            pues.push(&c.pue);
        }
    }
    let mut header = String::from("| Carbon intensity |");
    let mut rule = String::from("| --- |");
    let mut pue_row = String::from("| PUE estimate |");
    let mut base_row = String::from("| Active energy carbon |");
    let mut fac_row = String::from("| Active energy carbon including facilities |");
    for ci in &intensities {
        for (j, pue) in pues.iter().enumerate() {
            let _ = write!(header, " {ci} |");
            rule.push_str(" ---: |");
            let _ = write!(pue_row, " {pue} |");
            if j == 0 {
                let _ = write!(base_row, " {} |", m.base(ci).map(kg0).unwrap_or_default());
            } else {
                base_row.push_str("  |");
            }
            let _ = write!(fac_row, " {} |", m.get(ci, pue).map(kg0).unwrap_or_default());
        }
    }
    for line in [header, rule, pue_row, base_row, fac_row] {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out);

    let e = &report.embodied_matrix;
    let rounding = report.presentation.embodied_rounding;
    let _ = writeln!(
        out,
        "## Embodied carbon estimates (kgCO2e, {} nodes over {} day(s))\n",
        e.node_count, e.period_days
    );
    let mut header = String::from("| Server lifespan (years) |");
    let mut rule = String::from("| --- |");
    for est in &e.estimates {
        let _ = write!(header, " {est} per 24 h per server |");
        rule.push_str(" ---: |");
    }
    for est in &e.estimates {
        let _ = write!(header, " {est} snapshot |");
        rule.push_str(" ---: |");
    }
    let _ = writeln!(out, "{header}\n{rule}");
    for life in &e.lifespans {
        let mut row = format!("| {life} |");
        for est in &e.estimates {
            let v = e.get(est, life).map(|c| c.per_day.kg().to_fixed(2));
            let _ = write!(row, " {} |", v.unwrap_or_default());
        }
        for est in &e.estimates {
            let v = e.get(est, life).map(|c| rounding.apply(&c.snapshot.kg(), 0));
            let _ = write!(row, " {} |", v.unwrap_or_default());
        }
        let _ = writeln!(out, "{row}");
    }
    let _ = writeln!(out);

    let t = &report.totals;
    let _ = writeln!(out, "## Totals (kgCO2e)\n");
    let _ = writeln!(out, "| | Active | Embodied | Total |\n| --- | ---: | ---: | ---: |");
    let _ = writeln!(
        out,
        "| Minimum | {} | {} | {} |",
        kg0(&t.active_min),
        rounding.apply(&t.embodied_min.kg(), 0),
        kg0(&t.min)
    );
    let _ = writeln!(
        out,
        "| Maximum | {} | {} | {} |",
        kg0(&t.active_max),
        rounding.apply(&t.embodied_max.kg(), 0),
        kg0(&t.max)
    );
    let _ = writeln!(out);

    let _ = writeln!(out, "## Equivalents\n");
    let _ = writeln!(
        out,
        "| Equivalent | Basis | Quantity | Unit |\n| --- | --- | ---: | --- |"
    );
    for eq in &report.equivalents {
        let _ = writeln!(
            out,
            "| {} | {} total | {} | {} |",
            eq.name,
            eq.basis,
            eq.quantity.to_fixed(2),
            eq.unit
        );
    }

    if !report.provenance.notes.is_empty() {
        let _ = writeln!(out, "\n## Notes\n");
        for note in &report.provenance.notes {
            let _ = writeln!(out, "- {note}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(s: &str) -> Exact {
        s.parse().unwrap()
    }

    fn intensity_axis() -> ScenarioAxis {
        ScenarioAxis::from_pairs("intensity", &[("Low", "50"), ("Medium", "175"), ("High", "300")]).unwrap()
    }

    fn pue_axis() -> ScenarioAxis {
        ScenarioAxis::from_pairs("pue", &[("Low", "1.1"), ("Medium", "1.3"), ("High", "1.6")]).unwrap()
    }

    #[test]
    fn axis_validation() {
        assert!(ScenarioAxis::new("empty", vec![]).is_err());
        assert!(ScenarioAxis::from_pairs("dup", &[("a", "1"), ("a", "2")]).is_err());
        let json = r#"{"name":"x","points":[]}"#;
        assert!(serde_json::from_str::<ScenarioAxis>(json).is_err());
    }

    #[test]
    fn reference_active_matrix() {
        let m = build_active_matrix(&EnergyQuantity::kwh(19380).unwrap(), &intensity_axis(), &pue_axis()).unwrap();
        assert_eq!(m.with_facilities.len(), 9);
        let expected = [
            ("Low", [1066, 1260, 1550]),
            ("Medium", [3731, 4409, 5426]),
            ("High", [6395, 7558, 9302]),
        ];
        for (ci, row) in expected {
            for (pue, want) in ["Low", "Medium", "High"].iter().zip(row) {
                let got = m.get(ci, pue).unwrap().kg();
                assert!(
                    (got.clone() - Exact::from_integer(want)).abs() <= Exact::one(),
                    "{ci}/{pue}: {got}"
                );
            }
        }
        assert_eq!(m.base("Medium").unwrap().kg(), ex("3391.5"));
    }

    #[test]
    fn single_point_and_zero_energy() {
        let ci = ScenarioAxis::from_pairs("i", &[("Low", "50")]).unwrap();
        let pue = ScenarioAxis::from_pairs("p", &[("Low", "1.1")]).unwrap();
        let m = build_active_matrix(&EnergyQuantity::kwh(19380).unwrap(), &ci, &pue).unwrap();
        assert_eq!(m.with_facilities.len(), 1);
        assert_eq!(m.get("Low", "Low").unwrap().kg(), ex("1065.9"));

        let m = build_active_matrix(&EnergyQuantity::zero(), &intensity_axis(), &pue_axis()).unwrap();
        assert!(m.with_facilities.iter().all(|c| c.carbon.grams().is_zero()));
    }

    #[test]
    fn invalid_axis_values_rejected() {
        let bad_pue = ScenarioAxis::from_pairs("p", &[("bad", "0.9")]).unwrap();
        assert!(build_active_matrix(&EnergyQuantity::zero(), &intensity_axis(), &bad_pue).is_err());
        let bad_ci = ScenarioAxis::from_pairs("i", &[("neg", "-1")]).unwrap();
        assert!(build_active_matrix(&EnergyQuantity::zero(), &bad_ci, &pue_axis()).is_err());
    }

    #[test]
    fn flight_examples() {
        assert_eq!(flight_equivalent(&CarbonQuantity::from_kg(ex("2208")).unwrap()), 24);
        assert!(flight_equivalent(&CarbonQuantity::zero()).is_zero());
        let h = flight_equivalent(&CarbonQuantity::from_kg(ex("9302")).unwrap());
        assert_eq!(h.round_half_up(1), ex("101.1"));
        assert_eq!((h / Exact::from_integer(24)).round_half_up(1), ex("4.2"));
    }

    fn sample_report() -> ScenarioReport {
        let active = build_active_matrix(&EnergyQuantity::kwh(19380).unwrap(), &intensity_axis(), &pue_axis()).unwrap();
        let estimates = ScenarioAxis::from_pairs("estimate", &[("400", "400"), ("1100", "1100")]).unwrap();
        let lifespans = ScenarioAxis::from_pairs("lifespan", &[("3", "3"), ("7", "7")]).unwrap();
        let embodied = build_embodied_matrix(
            &estimates,
            &lifespans,
            &Exact::one(),
            2400,
            &AmortizationPolicy::default(),
        )
        .unwrap();
        ScenarioReport::assemble(
            EnergyQuantity::kwh(19380).unwrap(),
            None,
            active,
            embodied,
            &[EquivalentFactor::flight()],
            Presentation::default(),
            Provenance {
                tool_version: "test".into(),
                scenario_axes: vec![intensity_axis(), pue_axis(), estimates, lifespans],
                ..Provenance::default()
            },
        )
    }

    #[test]
    fn totals_bracket_combinations() {
        let r = sample_report();
        assert_eq!(r.totals.active_min.kg(), ex("1065.9"));
        assert_eq!(r.totals.min.kg().round_half_up(0), 1441);
        // 9302.4 + 2409.3 unrounded; the sum of the rounded maxima is 11711.
        assert_eq!(
            r.totals.max.kg(),
            ex("9302.4") + ex("960000") * ex("1100") / ex("400") / ex("1095.75")
        );
        assert!((r.totals.max.kg() - Exact::from_integer(11711)).abs() <= Exact::one());
        assert_eq!(r.equivalents.len(), 2);
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let r = sample_report();
        let text = render(&r, RenderFormat::Json);
        let parsed = ScenarioReport::from_json(&text).unwrap();
        assert_eq!(parsed, r);
        assert_eq!(render(&parsed, RenderFormat::Json), text);
        assert!(text.contains("\"base_energy_kwh\": \"19380\""));
        // keys sorted at the top level
        let keys: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn markdown_layout() {
        let md = render(&sample_report(), RenderFormat::Markdown);
        let row = md
            .lines()
            .find(|l| l.starts_with("| Active energy carbon including facilities |"))
            .unwrap();
        let cells: Vec<&str> = row
            .split('|')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .skip(1)
            .collect();
        assert_eq!(
            cells,
            ["1066", "1260", "1550", "3731", "4409", "5426", "6395", "7558", "9302"]
        );
        assert!(md.contains("| 3 | 0.37 | 1.00 | 876 | 2409 |"), "{md}");
    }

    #[test]
    fn empty_matrices_render() {
        let r = ScenarioReport::assemble(
            EnergyQuantity::zero(),
            None,
            ActiveMatrix::default(),
            EmbodiedMatrix::default(),
            &[],
            Presentation::default(),
            Provenance::default(),
        );
        let md = render(&r, RenderFormat::Markdown);
        assert!(md.contains("## Active carbon estimates"));
        assert!(md.contains("## Embodied carbon estimates"));
        let json = render(&r, RenderFormat::Json);
        assert_eq!(ScenarioReport::from_json(&json).unwrap(), r);
    }
}
