use chrono::{DateTime, FixedOffset, NaiveDate};
use proptest::prelude::*;

use urbanview::solar::{declination, local_mean_offset, solar_noon, sun_direction, sun_schedule, SolarWindow};

/// Declination from the almanac's low-precision solar coordinates, radians;
/// good to about 0.01° between 1950 and 2050.
fn almanac_declination(t: DateTime<FixedOffset>) -> f64 {
    let n = t.timestamp() as f64 / 86400.0 + 2440587.5 - 2451545.0;
    let l = 280.460 + 0.9856474 * n;
    let g = (357.528 + 0.9856003 * n).to_radians();
    let lambda = (l + 1.915 * g.sin() + 0.020 * (2.0 * g).sin()).to_radians();
    let eps = (23.439 - 0.0000004 * n).to_radians();
    (eps.sin() * lambda.sin()).asin()
}

fn date() -> impl Strategy<Value = NaiveDate> {
    (2000i32..2060, 1u32..=365).prop_map(|(y, d)| NaiveDate::from_yo_opt(y, d).unwrap())
}

proptest! {
    #[test]
    fn declination_agrees_with_almanac(d in date(), hour in 0u32..24) {
        let t = DateTime::parse_from_rfc3339(&format!("{d}T{hour:02}:00:00+00:00")).unwrap();
        let ours = declination(&t).to_degrees();
        let theirs = almanac_declination(t).to_degrees();
        prop_assert!((ours - theirs).abs() < 0.05, "{} vs {}", ours, theirs);
    }

    #[test]
    fn noon_elevation_is_ninety_minus_zenith_gap(d in date(), lat in -66.0f64..66.0, lon in -179.0f64..179.0) {
        let noon = solar_noon(lon, d, local_mean_offset(lon)).unwrap();
        let s = sun_direction(lat, lon, noon).unwrap();
        let delta = declination(&noon).to_degrees();
        let expected = 90.0 - (lat - delta).abs();
        prop_assert!((s.elevation.to_degrees() - expected).abs() < 0.05);
        // noon is the day's highest point
        for minutes in [-30i64, 30] {
            let other = sun_direction(lat, lon, noon + chrono::Duration::minutes(minutes)).unwrap();
            prop_assert!(other.elevation <= s.elevation + 1e-9);
        }
    }

    #[test]
    fn schedule_length_matches_window(step in 1u32..120, d in date()) {
        let w = SolarWindow { step_minutes: step, ..SolarWindow::default() };
        let samples = sun_schedule(22.54, 114.05, d, local_mean_offset(114.05), &w).unwrap();
        prop_assert_eq!(samples.len(), 600 / step as usize + 1);
        prop_assert!(samples.windows(2).all(|p| p[0].timestamp < p[1].timestamp));
    }
}

#[test]
fn default_window_has_twenty_one_samples() {
    let d = NaiveDate::from_ymd_opt(2024, 6, 21).unwrap();
    let s = sun_schedule(
        22.54,
        114.05,
        d,
        FixedOffset::east_opt(8 * 3600).unwrap(),
        &SolarWindow::default(),
    )
    .unwrap();
    assert_eq!(s.len(), 21);
    assert!(s.iter().all(|x| !x.is_night()));
}

#[test]
fn polar_night_samples_are_flagged() {
    let d = NaiveDate::from_ymd_opt(2024, 12, 21).unwrap();
    let s = sun_schedule(80.0, 15.0, d, local_mean_offset(15.0), &SolarWindow::default()).unwrap();
    assert!(s.iter().all(|x| x.is_night()));
}

#[test]
fn equinox_sun_rises_east_and_sets_west() {
    let d = NaiveDate::from_ymd_opt(2024, 3, 20).unwrap();
    let s = sun_schedule(0.0, 0.0, d, local_mean_offset(0.0), &SolarWindow::default()).unwrap();
    let (morning, evening) = (s[0], s[20]);
    assert!((morning.azimuth.to_degrees() - 90.0).abs() < 2.0);
    assert!((evening.azimuth.to_degrees() - 270.0).abs() < 2.0);
}
