//! Grid carbon intensity: named scenarios, settlement-period series, and
//! time-weighted carbon for energy profiles.

mod client;

pub use client::{
    fetch_intensity, HttpResponse, IntensityClient, ReqwestTransport, RetryPolicy, Transport, DEFAULT_ENDPOINT,
};

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::model::{seconds_between, CarbonIntensity, CarbonQuantity, EnergyQuantity, SnapshotPeriod};
use crate::timestamp::{format_utc, parse_utc};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntensityScenario {
    pub name: String,
    pub intensity: CarbonIntensity,
}

const BUILTIN_SCENARIOS: [(&str, i64); 3] = [("Low", 50), ("Medium", 175), ("High", 300)];

/// Named intensity scenarios. Always contains the built-in Low, Medium and
/// High values; user scenarios cannot reuse those names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioRegistry {
    scenarios: Vec<IntensityScenario>,
}

impl Default for ScenarioRegistry {
    fn default() -> Self {
        Self {
            scenarios: BUILTIN_SCENARIOS
                .iter()
                .map(|(name, g)| IntensityScenario {
                    name: (*name).to_owned(),
                    intensity: CarbonIntensity::grams_per_kwh(*g).expect("builtin intensity"),
                })
                .collect(),
        }
    }
}

impl ScenarioRegistry {
    pub fn add(&mut self, scenario: IntensityScenario) -> Result<()> {
        if let Some(existing) = self.scenarios.iter().find(|s| s.name == scenario.name) {
            let kind = if BUILTIN_SCENARIOS.iter().any(|(n, _)| *n == existing.name) {
                "built-in"
            } else {
                "registered"
            };
            return Err(Error::validation(format!(
                "scenario {:?} is already {kind}",
                scenario.name
            )));
        }
        self.scenarios.push(scenario);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<CarbonIntensity> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.intensity.clone())
            .ok_or_else(|| Error::UnknownScenario {
                name: name.to_owned(),
                registered: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.scenarios.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &IntensityScenario> {
        self.scenarios.iter()
    }
}

/// Looks up a built-in intensity scenario.
pub fn scenario(name: &str) -> Result<CarbonIntensity> {
    ScenarioRegistry::default().get(name)
}

/// Which API field supplied a period's intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntensityField {
    Actual,
    Forecast,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntensityPeriod {
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
    pub intensity: CarbonIntensity,
    pub field: IntensityField,
    pub index: Option<String>,
}

impl IntensityPeriod {
    pub fn new(from: DateTime<Utc>, to: DateTime<Utc>, intensity: CarbonIntensity) -> Self {
        Self {
            from,
            to,
            intensity,
            field: IntensityField::Actual,
            index: None,
        }
    }
}

/// Time-ordered, non-overlapping intensity periods. Gaps are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntensitySeries {
    periods: Vec<IntensityPeriod>,
}

impl IntensitySeries {
    pub fn new(periods: Vec<IntensityPeriod>) -> Result<Self> {
        for p in &periods {
            if p.to <= p.from {
                return Err(Error::validation(format!(
                    "intensity period {} .. {} is empty or inverted",
                    format_utc(&p.from),
                    format_utc(&p.to)
                )));
            }
        }
        for pair in periods.windows(2) {
            if pair[1].from < pair[0].to {
                return Err(Error::validation(format!(
                    "intensity periods overlap or are out of order at {}",
                    format_utc(&pair[1].from)
                )));
            }
        }
        Ok(Self { periods })
    }

    /// A single period covering `period` at a constant intensity.
    pub fn constant(period: &SnapshotPeriod, intensity: CarbonIntensity) -> Self {
        Self {
            periods: vec![IntensityPeriod::new(period.start(), period.end(), intensity)],
        }
    }

    pub fn periods(&self) -> &[IntensityPeriod] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Minimum, time-weighted mean, and maximum intensity.
    pub fn stats(&self) -> Option<SeriesStats> {
        let first = self.periods.first()?;
        let mut min = first.intensity.value().clone();
        let mut max = min.clone();
        let mut weighted = Exact::zero();
        let mut seconds = Exact::zero();
        for p in &self.periods {
            let v = p.intensity.value();
            if *v < min {
                min = v.clone();
            }
            if *v > max {
                max = v.clone();
            }
            let dt = seconds_between(p.from, p.to);
            weighted = weighted + v * &dt;
            seconds = seconds + dt;
        }
        Some(SeriesStats {
            min,
            mean: weighted / seconds,
            max,
        })
    }

    /// Parses the national intensity API's JSON shape.
    pub fn from_api_json(body: &[u8]) -> Result<Self> {
        let payload: ApiPayload = serde_json::from_slice(body).map_err(|e| payload_error(body, e.to_string()))?;
        let mut periods = Vec::with_capacity(payload.data.len());
        for entry in payload.data {
            let from = parse_utc(&entry.from).map_err(|e| payload_error(body, e))?;
            let to = parse_utc(&entry.to).map_err(|e| payload_error(body, e))?;
            let (value, field) = match (entry.intensity.actual, entry.intensity.forecast) {
                (Some(actual), _) => (actual, IntensityField::Actual),
                (None, Some(forecast)) => (forecast, IntensityField::Forecast),
                (None, None) => {
                    return Err(payload_error(
                        body,
                        format!("period {} has neither actual nor forecast intensity", entry.from),
                    ))
                }
            };
            let intensity = CarbonIntensity::new(value).map_err(|e| payload_error(body, e.to_string()))?;
            periods.push(IntensityPeriod {
                from,
                to,
                intensity,
                field,
                index: entry.intensity.index,
            });
        }
        Self::new(periods).map_err(|e| payload_error(body, e.to_string()))
    }

    /// Serializes in the same API shape accepted by [`Self::from_api_json`].
    pub fn to_api_json(&self) -> String {
        let data: Vec<serde_json::Value> = self
            .periods
            .iter()
            .map(|p| {
                let value = json_number(p.intensity.value());
                let (actual, forecast) = match p.field {
                    IntensityField::Actual => (value, serde_json::Value::Null),
                    IntensityField::Forecast => (serde_json::Value::Null, value),
                };
                serde_json::json!({
                    "from": format_utc(&p.from),
                    "to": format_utc(&p.to),
                    "intensity": {
                        "forecast": forecast,
                        "actual": actual,
                        "index": p.index,
                    }
                })
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&serde_json::json!({ "data": data })).expect("json value");
        text.push('\n');
        text
    }

    /// Writes a CSV (`from,to,intensity,field`) for external plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("from,to,intensity,field\n");
        for p in &self.periods {
            let field = match p.field {
                IntensityField::Actual => "actual",
                IntensityField::Forecast => "forecast",
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_utc(&p.from),
                format_utc(&p.to),
                p.intensity.value(),
                field
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesStats {
    pub min: Exact,
    pub mean: Exact,
    pub max: Exact,
}

impl fmt::Display for SeriesStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "min {} / mean {} / max {} gCO2e/kWh",
            self.min.to_fixed(1),
            self.mean.to_fixed(1),
            self.max.to_fixed(1)
        )
    }
}

fn json_number(value: &Exact) -> serde_json::Value {
    let text = value.to_string();
    if let Ok(i) = text.parse::<i64>() {
        return i.into();
    }
    // Non-integers fall back to the nearest double, which round-trips for
    // any value with 15 or fewer significant digits.
    serde_json::Number::from_f64(value.to_f64())
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

#[derive(Deserialize)]
struct ApiPayload {
    data: Vec<ApiEntry>,
}

#[derive(Deserialize)]
struct ApiEntry {
    from: String,
    to: String,
    intensity: ApiReading,
}

#[derive(Deserialize)]
struct ApiReading {
    #[serde(default)]
    forecast: Option<Exact>,
    #[serde(default)]
    actual: Option<Exact>,
    #[serde(default)]
    index: Option<String>,
}

pub(crate) fn payload_error(body: &[u8], message: impl Into<String>) -> Error {
    let text = String::from_utf8_lossy(body);
    let excerpt: String = text.chars().take(200).collect();
    Error::Payload {
        message: message.into(),
        excerpt,
    }
}

/// Carbon for an energy profile against a time-varying intensity.
///
/// Each profile entry's energy is assumed uniform over its period and split
/// pro rata by time across the settlement periods it overlaps. Every
/// instant of every profile entry must be covered by the series.
pub fn time_weighted_carbon(
    profile: &[(SnapshotPeriod, EnergyQuantity)],
    series: &IntensitySeries,
) -> Result<CarbonQuantity> {
    let periods = series.periods();
    let mut grams = Exact::zero();
    for (window, energy) in profile {
        let (start, end) = (window.start(), window.end());
        let total_seconds = window.duration_seconds();
        let mut cursor = start;
        let mut idx = periods.partition_point(|p| p.to <= start);
        while cursor < end {
            let Some(p) = periods.get(idx) else {
                return Err(Error::Uncovered { from: cursor, to: end });
            };
            if p.from > cursor {
                return Err(Error::Uncovered {
                    from: cursor,
                    to: p.from.min(end),
                });
            }
            let seg_end = p.to.min(end);
            let share = seconds_between(cursor, seg_end);
            grams = grams + energy.value() * &share * p.intensity.value() / &total_seconds;
            cursor = seg_end;
            idx += 1;
        }
    }
    CarbonQuantity::from_grams(grams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone};

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2022, 11, 1, 0, 0, 0).unwrap()
    }

    fn ci(g: i64) -> CarbonIntensity {
        CarbonIntensity::grams_per_kwh(g).unwrap()
    }

    fn half_hours(values: &[i64]) -> IntensitySeries {
        IntensitySeries::new(
            values
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let from = t0() + Duration::minutes(30 * i as i64);
                    IntensityPeriod::new(from, from + Duration::minutes(30), ci(*g))
                })
                .collect(),
        )
        .unwrap()
    }

    fn window(from_min: i64, to_min: i64) -> SnapshotPeriod {
        SnapshotPeriod::new(t0() + Duration::minutes(from_min), t0() + Duration::minutes(to_min)).unwrap()
    }

    #[test]
    fn builtin_scenarios() {
        assert_eq!(scenario("Low").unwrap(), ci(50));
        assert_eq!(scenario("Medium").unwrap(), ci(175));
        assert_eq!(scenario("High").unwrap(), ci(300));
        let err = scenario("Nuclear-only").unwrap_err();
        assert!(err.to_string().contains("Low, Medium, High"), "{err}");
    }

    #[test]
    fn user_scenarios_cannot_shadow() {
        let mut reg = ScenarioRegistry::default();
        let err = reg
            .add(IntensityScenario {
                name: "High".into(),
                intensity: ci(1),
            })
            .unwrap_err();
        assert!(err.to_string().contains("built-in"));
        reg.add(IntensityScenario {
            name: "Coal".into(),
            intensity: ci(900),
        })
        .unwrap();
        assert_eq!(reg.get("Coal").unwrap(), ci(900));
        assert!(reg
            .add(IntensityScenario {
                name: "Coal".into(),
                intensity: ci(1)
            })
            .is_err());
    }

    #[test]
    fn single_period() {
        let series = half_hours(&[100]);
        let c = time_weighted_carbon(&[(window(0, 30), EnergyQuantity::kwh(10).unwrap())], &series).unwrap();
        assert_eq!(*c.grams(), 1000);
    }

    #[test]
    fn spanning_two_periods() {
        let series = half_hours(&[100, 300]);
        let c = time_weighted_carbon(&[(window(0, 60), EnergyQuantity::kwh(10).unwrap())], &series).unwrap();
        assert_eq!(*c.grams(), 2000);
    }

    #[test]
    fn constant_series_matches_scalar() {
        let day = window(0, 24 * 60);
        let series = IntensitySeries::constant(&day, ci(175));
        let energy = EnergyQuantity::kwh(19380).unwrap();
        let c = time_weighted_carbon(&[(day, energy.clone())], &series).unwrap();
        assert_eq!(c.kg(), "3391.5".parse::<Exact>().unwrap());
        assert_eq!(c, crate::model::active_carbon(&energy, &scenario("Medium").unwrap()));
    }

    #[test]
    fn uncovered_intervals_are_named() {
        let mut periods = half_hours(&[100, 100, 100]).periods().to_vec();
        periods.remove(1);
        let series = IntensitySeries::new(periods).unwrap();
        let err = time_weighted_carbon(&[(window(0, 90), EnergyQuantity::kwh(1).unwrap())], &series).unwrap_err();
        match err {
            Error::Uncovered { from, to } => {
                assert_eq!(from, t0() + Duration::minutes(30));
                assert_eq!(to, t0() + Duration::minutes(60));
            }
            e => panic!("{e:?}"),
        }
        let err = time_weighted_carbon(&[(window(60, 120), EnergyQuantity::kwh(1).unwrap())], &series).unwrap_err();
        assert!(matches!(err, Error::Uncovered { .. }));
        let err = time_weighted_carbon(&[(window(-30, 30), EnergyQuantity::kwh(1).unwrap())], &series).unwrap_err();
        assert!(matches!(err, Error::Uncovered { from, .. } if from == t0() - Duration::minutes(30)));
    }

    #[test]
    fn series_invariants() {
        let p = |a: i64, b: i64| IntensityPeriod::new(t0() + Duration::minutes(a), t0() + Duration::minutes(b), ci(1));
        assert!(IntensitySeries::new(vec![p(0, 30), p(15, 45)]).is_err());
        assert!(IntensitySeries::new(vec![p(30, 60), p(0, 30)]).is_err());
        assert!(IntensitySeries::new(vec![p(0, 0)]).is_err());
        assert!(IntensitySeries::new(vec![p(0, 30), p(60, 90)]).is_ok());
    }

    #[test]
    fn api_payload_parsing() {
        let body = br#"{"data":[
            {"from":"2022-11-01T00:00Z","to":"2022-11-01T00:30Z","intensity":{"forecast":210,"actual":203,"index":"moderate"}},
            {"from":"2022-11-01T00:30Z","to":"2022-11-01T01:00Z","intensity":{"forecast":150,"actual":null,"index":"moderate"}}]}"#;
        let series = IntensitySeries::from_api_json(body).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series.periods()[0].intensity, ci(203));
        assert_eq!(series.periods()[0].field, IntensityField::Actual);
        assert_eq!(series.periods()[1].intensity, ci(150));
        assert_eq!(series.periods()[1].field, IntensityField::Forecast);

        let again = IntensitySeries::from_api_json(series.to_api_json().as_bytes()).unwrap();
        assert_eq!(again, series);

        assert!(IntensitySeries::from_api_json(br#"{"data":[]}"#).unwrap().is_empty());
    }

    #[test]
    fn malformed_payload_keeps_excerpt() {
        let err = IntensitySeries::from_api_json(b"<html>Service Unavailable</html>").unwrap_err();
        match err {
            Error::Payload { excerpt, .. } => assert!(excerpt.contains("Service Unavailable")),
            e => panic!("{e:?}"),
        }
        let err = IntensitySeries::from_api_json(
            br#"{"data":[{"from":"2022-11-01T00:00Z","to":"2022-11-01T00:30Z","intensity":{"forecast":null,"actual":null}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Payload { .. }));
    }

    #[test]
    fn stats_are_time_weighted() {
        let series = half_hours(&[100, 200, 300]);
        let stats = series.stats().unwrap();
        assert_eq!(stats.min, 100);
        assert_eq!(stats.mean, 200);
        assert_eq!(stats.max, 300);
        assert!(IntensitySeries::default().stats().is_none());
    }
}
