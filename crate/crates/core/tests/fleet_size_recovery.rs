//! Recovers the notional fleet size behind the published embodied snapshot
//! table and checks the amortization constants that reproduce it.

use dricarbon_core::embodied::{embodied_for_days, AmortizationPolicy, EmbodiedEstimate};
use dricarbon_core::Exact;

/// (estimate kg, lifespan years, printed snapshot kg)
const CELLS: [(i64, i64, i64); 10] = [
    (400, 3, 876),
    (1100, 3, 2409),
    (400, 4, 657),
    (1100, 4, 1806),
    (400, 5, 526),
    (1100, 5, 1445),
    (400, 6, 438),
    (1100, 6, 1204),
    (400, 7, 375),
    (1100, 7, 1032),
];

fn policy(days_per_year: &str) -> AmortizationPolicy {
    AmortizationPolicy::with_days_per_year(days_per_year.parse().unwrap()).unwrap()
}

/// N implied by a printed cell: snapshot × lifespan days / estimate.
fn implied_n(kg: i64, years: i64, snapshot: i64, days_per_year: &Exact) -> Exact {
    Exact::from_integer(snapshot) * Exact::from_integer(years) * days_per_year / Exact::from_integer(kg)
}

/// Range of N for which the snapshot lands within 1 kg of the printed
/// value.
fn tolerance_window(kg: i64, years: i64, snapshot: i64, days_per_year: &Exact) -> (Exact, Exact) {
    (
        implied_n(kg, years, snapshot - 1, days_per_year),
        implied_n(kg, years, snapshot + 1, days_per_year),
    )
}

fn common_window(days_per_year: &Exact) -> (Exact, Exact) {
    let (mut lo, mut hi) = (Exact::from_integer(i64::MIN), Exact::from_integer(i64::MAX));
    for (kg, years, snapshot) in CELLS {
        let (a, b) = tolerance_window(kg, years, snapshot, days_per_year);
        lo = lo.max(a);
        hi = hi.min(b);
    }
    (lo, hi)
}

fn snapshot(kg: i64, years: i64, n: u64, p: &AmortizationPolicy) -> Exact {
    let est = EmbodiedEstimate::new("e", Exact::from_integer(kg)).unwrap();
    embodied_for_days(&est, &Exact::from_integer(years), &Exact::one(), n, p)
        .unwrap()
        .kg()
}

#[test]
fn every_cell_implies_about_2400_nodes() {
    let dpy: Exact = "365.25".parse().unwrap();
    for (kg, years, snapshot) in CELLS {
        let n = implied_n(kg, years, snapshot, &dpy);
        assert!(
            (Exact::from_integer(2396)..=Exact::from_integer(2402)).contains(&n),
            "{kg} kg / {years} yr implies N = {}",
            n.to_fixed(2)
        );
    }
}

#[test]
fn tolerance_windows_pin_2400() {
    let (lo, hi) = common_window(&"365.25".parse().unwrap());
    assert!(lo <= 2400 && hi >= 2400, "common window [{lo}, {hi}]");
    // Only 2399 and 2400 are admitted by every cell.
    assert!(lo > 2398 && hi < 2401, "common window [{lo}, {hi}]");
}

#[test]
fn n_2400_reproduces_every_cell_within_one_kg() {
    let p = policy("365.25");
    for (kg, years, printed) in CELLS {
        let c = snapshot(kg, years, 2400, &p);
        assert!(
            (&c - Exact::from_integer(printed)).abs() <= 1,
            "{kg} kg / {years} yr: {}",
            c.to_fixed(2)
        );
    }
}

#[test]
fn truncation_matches_more_cells_than_rounding() {
    let p = policy("365.25");
    let hits = |f: &dyn Fn(&Exact) -> Exact| {
        CELLS
            .iter()
            .filter(|(kg, y, s)| f(&snapshot(*kg, *y, 2400, &p)) == *s)
            .count()
    };
    let truncated = hits(&|c| c.truncate(0));
    let rounded = hits(&|c| c.round_half_up(0));
    assert_eq!(truncated, 9);
    assert_eq!(rounded, 6);
    // The one cell truncation misses: 525.67 printed as 526.
    assert_eq!(snapshot(400, 5, 2400, &p).truncate(0), 525);
}

#[test]
fn a_365_day_year_does_not_reproduce_the_table() {
    let dpy: Exact = "365".parse().unwrap();
    let (lo, hi) = common_window(&dpy);
    assert!(lo > hi || !(lo <= 2400 && hi >= 2400));
    let p = policy("365");
    // 1100 × 2400 / (3 × 365) = 2410.96, printed as 2409.
    assert!((snapshot(1100, 3, 2400, &p) - Exact::from_integer(2409)).abs() > 1);
}
