//! Sun position and the shading sample schedule.
//!
//! Uses the low-order solar coordinates from Meeus' *Astronomical
//! Algorithms* (geometric mean longitude and anomaly, equation of center,
//! apparent longitude, obliquity) to get declination and the equation of
//! time, then converts civil time to a local hour angle. Agreement with the
//! full NREL SPA is well inside half a degree between 1950 and 2100.
//! Refraction is ignored.

use chrono::{DateTime, Datelike, Duration, FixedOffset, NaiveDate, NaiveTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SunSample {
    pub timestamp: DateTime<FixedOffset>,
    /// Radians clockwise from north, in `[0, 2π)`.
    pub azimuth: f64,
    /// Radians above the horizon.
    pub elevation: f64,
}

impl SunSample {
    pub fn is_night(&self) -> bool {
        self.elevation < 0.0
    }

    /// Unit vector pointing at the sun; x east, y north, z up.
    pub fn direction(&self) -> Point3 {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        Point3::new(sa * ce, ca * ce, se)
    }
}

/// Civil time window sampled for shading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolarWindow {
    pub start: NaiveTime,
    pub end: NaiveTime,
    pub step_minutes: u32,
}

impl Default for SolarWindow {
    fn default() -> Self {
        SolarWindow {
            start: NaiveTime::from_hms_opt(8, 0, 0).expect("valid time"),
            end: NaiveTime::from_hms_opt(18, 0, 0).expect("valid time"),
            step_minutes: 30,
        }
    }
}

impl SolarWindow {
    pub fn validate(&self) -> Result<()> {
        if self.start >= self.end {
            return Err(Error::Validation(format!(
                "schedule start {} must precede end {}",
                self.start, self.end
            )));
        }
        if self.step_minutes == 0 {
            return Err(Error::Validation("schedule step must be positive".into()));
        }
        Ok(())
    }

    /// Number of samples, both ends included when the step divides evenly.
    pub fn len(&self) -> usize {
        let span = (self.end - self.start).num_minutes();
        (span / self.step_minutes as i64) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn times(&self) -> Vec<NaiveTime> {
        (0..self.len())
            .map(|k| self.start + Duration::minutes(k as i64 * self.step_minutes as i64))
            .collect()
    }
}

/// Shading schedule settings: the analysis date, the civil-time offset and
/// the sampling window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolarConfig {
    pub date: Option<NaiveDate>,
    /// Offset of civil time from UTC; local mean time when absent.
    pub utc_offset_minutes: Option<i32>,
    pub window: SolarWindow,
}

impl SolarConfig {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if let Some(m) = self.utc_offset_minutes {
            if m.abs() >= 24 * 60 {
                return Err(Error::Validation(format!("utc offset of {m} minutes is out of range")));
            }
        }
        Ok(())
    }

    /// The configured offset, or local mean time at `lon`.
    pub fn offset(&self, lon: f64) -> FixedOffset {
        self.utc_offset_minutes
            .and_then(|m| FixedOffset::east_opt(m * 60))
            .unwrap_or_else(|| local_mean_offset(lon))
    }
}

fn check_location(lat: f64, lon: f64) -> Result<()> {
    if lat.is_nan() || lat.abs() > 90.0 {
        return Err(Error::Validation(format!("latitude {lat} outside [-90, 90]")));
    }
    if lon.is_nan() || lon.abs() > 180.0 {
        return Err(Error::Validation(format!("longitude {lon} outside [-180, 180]")));
    }
    Ok(())
}

fn check_year(t: &DateTime<Utc>) -> Result<()> {
    if !(1950..=2100).contains(&t.year()) {
        return Err(Error::Validation(format!("year {} outside 1950..=2100", t.year())));
    }
    Ok(())
}

fn julian_day(t: &DateTime<Utc>) -> f64 {
    t.timestamp() as f64 / 86_400.0 + t.timestamp_subsec_nanos() as f64 / 86_400e9 + 2_440_587.5
}

/// Declination (radians) and equation of time (minutes) at `t`.
fn declination_and_eot(t: &DateTime<Utc>) -> (f64, f64) {
    let jc = (julian_day(t) - 2_451_545.0) / 36_525.0;
    let l0 = (280.46646 + jc * (36_000.769_83 + 0.000_303_2 * jc))
        .rem_euclid(360.0)
        .to_radians();
    let m = (357.52911 + jc * (35_999.050_29 - 0.000_153_7 * jc)).to_radians();
    let e = 0.016_708_634 - jc * (0.000_042_037 + 0.000_000_126_7 * jc);
    let centre = m.sin() * (1.914_602 - jc * (0.004_817 + 0.000_014 * jc))
        + (2.0 * m).sin() * (0.019_993 - 0.000_101 * jc)
        + (3.0 * m).sin() * 0.000_289;
    let true_long = l0.to_degrees() + centre;
    let omega = (125.04 - 1934.136 * jc).to_radians();
    let apparent = (true_long - 0.005_69 - 0.004_78 * omega.sin()).to_radians();
    let mean_obliquity = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.000_59 - jc * 0.001_813))) / 60.0) / 60.0;
    let obliquity = (mean_obliquity + 0.002_56 * omega.cos()).to_radians();
    let decl = (obliquity.sin() * apparent.sin()).asin();
    let y = (obliquity / 2.0).tan().powi(2);
    let eot = y * (2.0 * l0).sin() - 2.0 * e * m.sin() + 4.0 * e * y * m.sin() * (2.0 * l0).cos()
        - 0.5 * y * y * (4.0 * l0).sin()
        - 1.25 * e * e * (2.0 * m).sin();
    (decl, 4.0 * eot.to_degrees())
}

/// Solar declination in radians at the given instant.
pub fn declination(timestamp: &DateTime<FixedOffset>) -> f64 {
    declination_and_eot(&timestamp.with_timezone(&Utc)).0
}

/// Sun azimuth and elevation seen from `(lat, lon)` degrees at `timestamp`.
pub fn sun_direction(lat: f64, lon: f64, timestamp: DateTime<FixedOffset>) -> Result<SunSample> {
    check_location(lat, lon)?;
    let utc = timestamp.with_timezone(&Utc);
    check_year(&utc)?;
    let (decl, eot) = declination_and_eot(&utc);
    let minutes = utc.time().signed_duration_since(NaiveTime::MIN).num_milliseconds() as f64 / 60_000.0;
    let true_solar = minutes + eot + 4.0 * lon;
    let hour_angle = (true_solar / 4.0 - 180.0).to_radians();
    let phi = lat.to_radians();
    let cos_zenith = (phi.sin() * decl.sin() + phi.cos() * decl.cos() * hour_angle.cos()).clamp(-1.0, 1.0);
    let elevation = std::f64::consts::FRAC_PI_2 - cos_zenith.acos();
    // measured from south, westward positive; shift to north-clockwise
    let az_south = hour_angle
        .sin()
        .atan2(hour_angle.cos() * phi.sin() - decl.tan() * phi.cos());
    let azimuth = crate::geometry::wrap_angle(az_south + std::f64::consts::PI);
    Ok(SunSample {
        timestamp,
        azimuth,
        elevation,
    })
}

/// Civil time of local solar noon on `date`.
pub fn solar_noon(lon: f64, date: NaiveDate, offset: FixedOffset) -> Result<DateTime<FixedOffset>> {
    check_location(0.0, lon)?;
    let midnight_utc = Utc.from_utc_datetime(&date.and_time(NaiveTime::MIN));
    check_year(&midnight_utc)?;
    let mut minutes = 720.0 - 4.0 * lon;
    for _ in 0..3 {
        let t = midnight_utc + Duration::milliseconds((minutes * 60_000.0) as i64);
        minutes = 720.0 - 4.0 * lon - declination_and_eot(&t).1;
    }
    let t = midnight_utc + Duration::milliseconds((minutes * 60_000.0).round() as i64);
    Ok(t.with_timezone(&offset))
}

/// Local mean time offset for a longitude, rounded to the minute.
pub fn local_mean_offset(lon: f64) -> FixedOffset {
    let minutes = (lon * 4.0).round() as i32;
    FixedOffset::east_opt(minutes * 60).expect("|lon| <= 180 keeps the offset in range")
}

/// Sun samples over `window` on `date` in civil time at `offset`.
/// Night-time samples are kept and flagged via [`SunSample::is_night`].
pub fn sun_schedule(
    lat: f64,
    lon: f64,
    date: NaiveDate,
    offset: FixedOffset,
    window: &SolarWindow,
) -> Result<Vec<SunSample>> {
    window.validate()?;
    check_location(lat, lon)?;
    window
        .times()
        .into_iter()
        .map(|t| {
            let local = offset
                .from_local_datetime(&date.and_time(t))
                .single()
                .expect("fixed offsets are unambiguous");
            sun_direction(lat, lon, local)
        })
        .collect()
}
