//! UTC timestamp parsing shared by every input format.
//!
//! Timestamps must carry an explicit UTC designator (`Z` or `+00:00`).
//! Naive or offset local times are rejected.

use chrono::{DateTime, FixedOffset, NaiveDateTime, SecondsFormat, Utc};

/// Parses an ISO-8601 UTC timestamp. Seconds are optional, so the
/// `2022-11-01T00:30Z` form used by the national intensity API is accepted.
pub fn parse_utc(input: &str) -> Result<DateTime<Utc>, String> {
    let s = input.trim();
    if let Ok(dt) = DateTime::<FixedOffset>::parse_from_rfc3339(s) {
        return require_utc(s, dt);
    }
    for fmt in ["%Y-%m-%dT%H:%M%:z", "%Y-%m-%dT%H:%M%#z"] {
        if let Ok(dt) = DateTime::<FixedOffset>::parse_from_str(s, fmt) {
            return require_utc(s, dt);
        }
    }
    if let Some(stripped) = s.strip_suffix(['Z', 'z']) {
        if let Ok(naive) = NaiveDateTime::parse_from_str(stripped, "%Y-%m-%dT%H:%M") {
            return Ok(naive.and_utc());
        }
    }
    if NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").is_ok()
        || NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M").is_ok()
    {
        return Err(format!(
            "timestamp {s:?} has no UTC designator; local times are not accepted"
        ));
    }
    Err(format!("invalid ISO-8601 timestamp {s:?}"))
}

fn require_utc(s: &str, dt: DateTime<FixedOffset>) -> Result<DateTime<Utc>, String> {
    if dt.offset().local_minus_utc() != 0 {
        return Err(format!("timestamp {s:?} is not UTC"));
    }
    Ok(dt.with_timezone(&Utc))
}

/// Formats in the API's minute-resolution style when no seconds are set,
/// RFC 3339 otherwise.
pub fn format_utc(dt: &DateTime<Utc>) -> String {
    use chrono::Timelike;
    if dt.second() == 0 && dt.nanosecond() == 0 {
        dt.format("%Y-%m-%dT%H:%MZ").to_string()
    } else {
        dt.to_rfc3339_opts(SecondsFormat::AutoSi, true)
    }
}

/// Serde adapter applying [`parse_utc`] and [`format_utc`].
pub mod serde_utc {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(dt: &DateTime<Utc>, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&super::format_utc(dt))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(deserializer)?;
        super::parse_utc(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn accepts_utc_forms() {
        let expected = Utc.with_ymd_and_hms(2022, 11, 1, 0, 30, 0).unwrap();
        for s in [
            "2022-11-01T00:30Z",
            "2022-11-01T00:30:00Z",
            "2022-11-01T00:30:00+00:00",
            "2022-11-01T00:30+00:00",
            "2022-11-01T00:30:00.000Z",
        ] {
            assert_eq!(parse_utc(s).unwrap(), expected, "{s}");
        }
    }

    #[test]
    fn rejects_local_and_offset_times() {
        assert!(parse_utc("2022-11-01T00:30:00").unwrap_err().contains("UTC designator"));
        assert!(parse_utc("2022-11-01T00:30:00+01:00").unwrap_err().contains("not UTC"));
        assert!(parse_utc("yesterday").is_err());
    }

    #[test]
    fn formats() {
        let dt = Utc.with_ymd_and_hms(2022, 11, 1, 0, 30, 0).unwrap();
        assert_eq!(format_utc(&dt), "2022-11-01T00:30Z");
        let dt = Utc.with_ymd_and_hms(2022, 11, 1, 0, 30, 15).unwrap();
        assert_eq!(format_utc(&dt), "2022-11-01T00:30:15Z");
    }
}
