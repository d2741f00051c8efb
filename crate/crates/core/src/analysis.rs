//! Swimming-performance metrics from head-position traces.

use crate::io::TimeseriesRecord;
use crate::{Error, Result};

/// Head position of the swimmer at one dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwimRecord {
    pub time: f64,
    pub head_x: f64,
    pub head_y: f64,
}

fn check(records: &[SwimRecord], min: usize, body_length: f64, period: f64) -> Result<()> {
    if records.len() < min {
        return Err(Error::InvalidArgument(format!(
            "need at least {min} records, got {}",
            records.len()
        )));
    }
    if !(body_length > 0.0 && period > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "body length and stroke period must be positive (L = {body_length}, T = {period})"
        )));
    }
    if let Some(w) = records.windows(2).find(|w| !(w[1].time > w[0].time)) {
        return Err(Error::InvalidArgument(format!(
            "record times not strictly increasing at t = {}",
            w[1].time
        )));
    }
    Ok(())
}

/// `(t/T, (x − x₀)/L)` for every record.
pub fn distance_vs_strokes(
    records: &[SwimRecord],
    body_length: f64,
    period: f64,
) -> Result<Vec<(f64, f64)>> {
    check(records, 2, body_length, period)?;
    let x0 = records[0].head_x;
    Ok(records
        .iter()
        .map(|r| (r.time / period, (r.head_x - x0) / body_length))
        .collect())
}

/// Head speed in body lengths per stroke: centred differences inside,
/// one-sided at the two ends.
pub fn speed_vs_strokes(
    records: &[SwimRecord],
    body_length: f64,
    period: f64,
) -> Result<Vec<(f64, f64)>> {
    check(records, 3, body_length, period)?;
    let d = distance_vs_strokes(records, body_length, period)?;
    let n = d.len();
    Ok((0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (d[i].0, (d[b].1 - d[a].1) / (d[b].0 - d[a].0))
        })
        .collect())
}

/// `Re = ρVL/μ`.
pub fn reynolds(rho: f64, velocity: f64, length: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "viscosity must be positive, got {mu}"
        )));
    }
    Ok(rho * velocity * length / mu)
}

/// Linear interpolation of a `(stroke, value)` series.
fn at_stroke(series: &[(f64, f64)], s: f64) -> f64 {
    let k = series
        .partition_point(|p| p.0 < s)
        .clamp(1, series.len() - 1);
    let (a, b) = (series[k - 1], series[k]);
    a.1 + (b.1 - a.1) * (s - a.0) / (b.0 - a.0)
}

/// Mean forward speed (body lengths per stroke) after the first stroke.
pub fn average_speed(records: &[SwimRecord], body_length: f64, period: f64) -> Result<f64> {
    let d = distance_vs_strokes(records, body_length, period)?;
    let (s_end, d_end) = *d.last().unwrap();
    let s_start = d[0].0 + 1.0;
    if s_end <= s_start {
        return Err(Error::InvalidArgument(format!(
            "average speed needs more than one stroke of data (have {:.3})",
            s_end - d[0].0
        )));
    }
    Ok((d_end - at_stroke(&d, s_start)) / (s_end - s_start))
}

/// Rows for `timeseries.csv`.
pub fn timeseries(
    records: &[SwimRecord],
    body_length: f64,
    period: f64,
) -> Result<Vec<TimeseriesRecord>> {
    let d = distance_vs_strokes(records, body_length, period)?;
    let v = speed_vs_strokes(records, body_length, period)?;
    Ok(records
        .iter()
        .zip(d.iter().zip(&v))
        .map(|(r, (&(stroke, dist), &(_, speed)))| TimeseriesRecord {
            time: r.time,
            stroke,
            head_x: r.head_x,
            head_y: r.head_y,
            distance_bl: dist,
            speed_bl_per_stroke: speed,
        })
        .collect())
}
