use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveDateTime, TimeDelta, Timelike};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scenario::cell_rng;

/// Length of one trace window in seconds.
pub const WINDOW_SECONDS: i64 = 900;

/// Midnight on which synthetic traces start.
pub const TRACE_EPOCH: NaiveDateTime = match NaiveDate::from_ymd_opt(2024, 1, 1) {
    Some(d) => match d.and_hms_opt(0, 0, 0) {
        Some(t) => t,
        None => unreachable!(),
    },
    None => unreachable!(),
};

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";
const WINDOWS_PER_DAY: usize = (86_400 / WINDOW_SECONDS) as usize;

/// Aggregate uplink volume of one cell over one 15-minute window.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Start of the window.
    pub timestamp: NaiveDateTime,
    /// Identifier of the cell's BS.
    pub cell: String,
    /// Bits offered during the window.
    pub volume: f64,
}

impl TraceRecord {
    fn check(&self) -> std::result::Result<(), String> {
        if !(self.volume.is_finite() && self.volume >= 0.0) {
            return Err(format!(
                "volume {} must be finite and non-negative",
                self.volume
            ));
        }
        let t = self.timestamp.time();
        if t.second() != 0 || t.nanosecond() != 0 || (t.minute() as i64 * 60) % WINDOW_SECONDS != 0
        {
            return Err(format!(
                "timestamp {} is not aligned to a 15-minute window",
                self.timestamp
            ));
        }
        Ok(())
    }
}

/// Shape of a synthetic trace.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceProfile {
    /// `mean · (1 + amplitude·cos(2π·w/96 − φ_c) + noise·U)` with `U` uniform in
    /// `[−1, 1]`, clamped at 0. Phases are drawn uniformly per cell unless given.
    DiurnalOffset {
        mean: f64,
        amplitude: f64,
        noise: f64,
        phases: Option<Vec<f64>>,
    },
    /// Every window carries `volume`.
    Uniform { volume: f64 },
    /// `base` in every window plus, with probability `probability`, a burst uniform in
    /// `[0, burst]`.
    Bursty {
        base: f64,
        burst: f64,
        probability: f64,
    },
}

impl TraceProfile {
    /// The diurnal profile used by the experiments: mean 1000, amplitude 0.8, noise 0.1,
    /// random phases.
    pub fn diurnal() -> Self {
        TraceProfile::DiurnalOffset {
            mean: 1000.0,
            amplitude: 0.8,
            noise: 0.1,
            phases: None,
        }
    }
}

/// Synthesize `days` days of 15-minute aggregates for each named cell, starting at
/// [`TRACE_EPOCH`]. Records are ordered by cell, then time.
pub fn synthesize_trace(
    cells: &[String],
    days: usize,
    profile: &TraceProfile,
    seed: u64,
) -> Result<Vec<TraceRecord>> {
    if let TraceProfile::DiurnalOffset {
        phases: Some(p), ..
    } = profile
    {
        if p.len() != cells.len() {
            return Err(CoreError::InvalidParameter {
                name: "phases",
                reason: format!("{} phases given for {} cells", p.len(), cells.len()),
            });
        }
    }
    let windows = days * WINDOWS_PER_DAY;
    let records = cells
        .par_iter()
        .enumerate()
        .map(|(c, name)| {
            let mut rng = cell_rng(seed, c);
            let phase = match profile {
                TraceProfile::DiurnalOffset {
                    phases: Some(p), ..
                } => p[c],
                TraceProfile::DiurnalOffset { phases: None, .. } => {
                    std::f64::consts::TAU * rng.random::<f64>()
                }
                _ => 0.0,
            };
            (0..windows)
                .map(|w| {
                    let volume = match *profile {
                        TraceProfile::DiurnalOffset {
                            mean,
                            amplitude,
                            noise,
                            ..
                        } => {
                            let angle = std::f64::consts::TAU * (w % WINDOWS_PER_DAY) as f64
                                / WINDOWS_PER_DAY as f64;
                            let jitter = noise * (2.0 * rng.random::<f64>() - 1.0);
                            (mean * (1.0 + amplitude * (angle - phase).cos() + jitter)).max(0.0)
                        }
                        TraceProfile::Uniform { volume } => volume,
                        TraceProfile::Bursty {
                            base,
                            burst,
                            probability,
                        } => {
                            if rng.random::<f64>() < probability {
                                base + burst * rng.random::<f64>()
                            } else {
                                base
                            }
                        }
                    };
                    TraceRecord {
                        timestamp: TRACE_EPOCH + TimeDelta::seconds(w as i64 * WINDOW_SECONDS),
                        cell: name.clone(),
                        volume,
                    }
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect::<Vec<_>>();
    for r in &records {
        r.check().map_err(|reason| CoreError::InvalidParameter {
            name: "profile",
            reason,
        })?;
    }
    Ok(records)
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    timestamp: String,
    cell_id: String,
    volume_bits: f64,
}

/// Write records as CSV with header `timestamp,cell_id,volume_bits`.
pub fn write_trace_csv<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(TraceRow {
            timestamp: r.timestamp.format(TIMESTAMP_FORMAT).to_string(),
            cell_id: r.cell.clone(),
            volume_bits: r.volume,
        })?;
    }
    w.flush().map_err(|source| CoreError::Io {
        path: "<trace csv>".into(),
        source,
    })?;
    Ok(())
}

/// Read and validate a trace CSV, skipping lines that start with `#`. `origin` names the
/// source in error messages.
pub fn read_trace_csv<R: Read>(input: R, origin: &str) -> Result<Vec<TraceRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let headers = r.headers()?.clone();
    let mut out = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fail = |message: String| CoreError::Format {
            path: origin.to_string(),
            line,
            message,
        };
        let row: TraceRow = record.deserialize(Some(&headers))?;
        let timestamp = NaiveDateTime::parse_from_str(&row.timestamp, TIMESTAMP_FORMAT)
            .map_err(|e| fail(format!("bad timestamp `{}`: {e}", row.timestamp)))?;
        let record = TraceRecord {
            timestamp,
            cell: row.cell_id,
            volume: row.volume_bits,
        };
        record.check().map_err(fail)?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|b| format!("bs{b}")).collect()
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn uniform_profile_is_constant() {
        let recs =
            synthesize_trace(&names(2), 1, &TraceProfile::Uniform { volume: 5.0 }, 1).unwrap();
        assert_eq!(recs.len(), 2 * 96);
        assert!(recs.iter().all(|r| r.volume == 5.0));
        assert_eq!(
            recs[95].timestamp,
            TRACE_EPOCH + TimeDelta::minutes(15 * 95)
        );
    }

    #[test]
    fn opposite_phases_decorrelate() {
        let profile = TraceProfile::DiurnalOffset {
            mean: 1000.0,
            amplitude: 0.8,
            noise: 0.1,
            phases: Some(vec![0.0, std::f64::consts::PI]),
        };
        let recs = synthesize_trace(&names(2), 2, &profile, 5).unwrap();
        let series = |c: &str| {
            recs.iter()
                .filter(|r| r.cell == c)
                .map(|r| r.volume)
                .collect::<Vec<_>>()
        };
        assert!(pearson(&series("bs0"), &series("bs1")) < 0.2);
    }

    #[test]
    fn bursty_profile_bursts_sometimes() {
        let profile = TraceProfile::Bursty {
            base: 10.0,
            burst: 100.0,
            probability: 0.2,
        };
        let recs = synthesize_trace(&names(1), 1, &profile, 9).unwrap();
        let bursts = recs.iter().filter(|r| r.volume > 10.0).count();
        assert!(bursts > 0 && bursts < recs.len());
        assert!(recs.iter().all(|r| (10.0..=110.0).contains(&r.volume)));
    }

    #[test]
    fn seeded_and_round_trips_through_csv() {
        let recs = synthesize_trace(&names(3), 1, &TraceProfile::diurnal(), 42).unwrap();
        assert_eq!(
            recs,
            synthesize_trace(&names(3), 1, &TraceProfile::diurnal(), 42).unwrap()
        );
        let mut buf = Vec::new();
        write_trace_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("timestamp,cell_id,volume_bits\n2024-01-01T00:00:00,bs0,"));
        assert_eq!(read_trace_csv(text.as_bytes(), "mem").unwrap(), recs);
    }

    #[test]
    fn rejects_misaligned_or_negative_records() {
        let text = "timestamp,cell_id,volume_bits\n2024-01-01T00:07:00,bs0,1\n";
        assert!(matches!(
            read_trace_csv(text.as_bytes(), "t.csv"),
            Err(CoreError::Format { line: 2, .. })
        ));
        let text = "timestamp,cell_id,volume_bits\n2024-01-01T00:15:00,bs0,-1\n";
        assert!(read_trace_csv(text.as_bytes(), "t.csv").is_err());
    }
}
