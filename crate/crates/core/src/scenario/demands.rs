use std::collections::BTreeMap;

use chrono::NaiveTime;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::model::{DemandSet, Topology};
use crate::scenario::{cell_rng, TraceRecord, WINDOW_SECONDS};

/// How a window's aggregate volume is divided among its demands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitWeights {
    /// Weights drawn uniformly from `(0, 1]` and renormalized to sum to 1.
    #[default]
    Random,
    /// Every demand receives the same share.
    Equal,
}

/// Parameters of [`synthesize_demands`].
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSynthesis {
    /// Demands per cell per window.
    pub splits: usize,
    /// Candidate delays `e − s + 1`, drawn uniformly.
    pub delays: Vec<usize>,
    /// Slot length in seconds.
    pub slot_seconds: i64,
    /// Demand window in seconds; a multiple of the 15-minute trace window that divides a
    /// day. Coarser windows merge consecutive trace records.
    pub window_seconds: i64,
    pub weights: SplitWeights,
    pub seed: u64,
}

impl Default for DemandSynthesis {
    fn default() -> Self {
        Self {
            splits: 120,
            delays: vec![3, 4, 5],
            slot_seconds: 2,
            window_seconds: WINDOW_SECONDS,
            weights: SplitWeights::Random,
            seed: 0,
        }
    }
}

impl DemandSynthesis {
    fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(CoreError::InvalidParameter { name, reason });
        if self.splits == 0 {
            return bad("splits", "must be positive".into());
        }
        if self.delays.is_empty() || self.delays.contains(&0) {
            return bad(
                "delays",
                "must be a non-empty set of positive delays".into(),
            );
        }
        if self.window_seconds <= 0
            || self.window_seconds % WINDOW_SECONDS != 0
            || 86_400 % self.window_seconds != 0
        {
            return bad(
                "window_seconds",
                format!(
                    "{} must be a multiple of {WINDOW_SECONDS} that divides a day",
                    self.window_seconds
                ),
            );
        }
        if self.slot_seconds <= 0 || self.window_seconds % self.slot_seconds != 0 {
            return bad(
                "slot_seconds",
                format!(
                    "{} must divide the window length {}",
                    self.slot_seconds, self.window_seconds
                ),
            );
        }
        Ok(())
    }

    fn slots_per_window(&self) -> usize {
        (self.window_seconds / self.slot_seconds) as usize
    }
}

/// Split each cell's per-window aggregate volume into `splits` demands.
///
/// Slot 1 starts at midnight of the earliest record's day and the horizon covers every
/// day touched by the trace (`86400 / slot_seconds` slots per day). Each demand gets a
/// uniform user of the cell, a uniform start slot within its window and a uniform delay;
/// deadlines past the horizon are clamped to it. Windows with zero volume yield no
/// demands. Demands are ordered by window, then cell, then split index.
pub fn synthesize_demands(
    records: &[TraceRecord],
    topology: &Topology,
    cfg: &DemandSynthesis,
) -> Result<DemandSet> {
    cfg.validate()?;
    let Some(first) = records.iter().map(|r| r.timestamp).min() else {
        return Ok(DemandSet::empty(0));
    };
    let origin = first.date().and_time(NaiveTime::MIN);
    let mut per_cell: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); topology.num_bs()];
    let mut last_window = 0;
    for r in records {
        let b = (0..topology.num_bs())
            .find(|&b| topology.bs_name(b) == r.cell)
            .ok_or_else(|| CoreError::UnknownNode(r.cell.clone()))?;
        let w = ((r.timestamp - origin).num_seconds() / cfg.window_seconds) as usize;
        last_window = last_window.max(w);
        *per_cell[b].entry(w).or_default() += r.volume;
    }
    let windows_per_day = (86_400 / cfg.window_seconds) as usize;
    let days = last_window / windows_per_day + 1;
    let spw = cfg.slots_per_window();
    let horizon = days * windows_per_day * spw;

    let cells = per_cell
        .par_iter()
        .enumerate()
        .map(|(b, windows)| {
            let users = topology.users_of(b);
            let mut rng = cell_rng(cfg.seed, b);
            let mut out = Vec::new();
            for (&w, &volume) in windows.iter().filter(|(_, &v)| v > 0.0) {
                if users.is_empty() {
                    return Err(CoreError::InvalidParameter {
                        name: "trace",
                        reason: format!("cell `{}` has traffic but no users", topology.bs_name(b)),
                    });
                }
                let weights: Vec<f64> = match cfg.weights {
                    SplitWeights::Random => {
                        (0..cfg.splits).map(|_| 1.0 - rng.random::<f64>()).collect()
                    }
                    SplitWeights::Equal => vec![1.0; cfg.splits],
                };
                let total: f64 = weights.iter().sum();
                for (k, weight) in weights.iter().enumerate() {
                    let user = users[rng.random_range(0..users.len())];
                    let start = w * spw + rng.random_range(0..spw) + 1;
                    let delay = cfg.delays[rng.random_range(0..cfg.delays.len())];
                    let end = (start + delay - 1).min(horizon);
                    out.push(((w, b, k), (user, start, end, volume * weight / total)));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<_> = cells.into_iter().flatten().collect();
    all.sort_by_key(|(key, _)| *key);
    DemandSet::new(horizon, all.into_iter().map(|(_, d)| d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TopologyBuilder;
    use crate::scenario::{synthesize_trace, TraceProfile, TRACE_EPOCH};
    use chrono::TimeDelta;

    fn two_cells() -> Topology {
        TopologyBuilder::new()
            .bs("bs0")
            .bs("bs1")
            .user("a", "bs0")
            .user("b", "bs0")
            .user("c", "bs1")
            .link("a", "bs0", 1.0)
            .link("b", "bs0", 1.0)
            .link("c", "bs1", 1.0)
            .build()
            .unwrap()
    }

    fn record(window: i64, cell: &str, volume: f64) -> TraceRecord {
        TraceRecord {
            timestamp: TRACE_EPOCH + TimeDelta::seconds(window * WINDOW_SECONDS),
            cell: cell.into(),
            volume,
        }
    }

    #[test]
    fn equal_split_of_one_window() {
        let cfg = DemandSynthesis {
            weights: SplitWeights::Equal,
            ..DemandSynthesis::default()
        };
        let d = synthesize_demands(&[record(0, "bs0", 120.0)], &two_cells(), &cfg).unwrap();
        assert_eq!(d.len(), 120);
        assert_eq!(d.horizon(), 43_200);
        for x in d.demands() {
            assert!((x.volume - 1.0).abs() < 1e-12);
            assert!(x.user < 2 && (1..=450).contains(&x.start));
            assert!((3..=5).contains(&x.delay()));
        }
    }

    #[test]
    fn conserves_window_volume_and_skips_empty_windows() {
        let recs = [
            record(0, "bs0", 77.5),
            record(1, "bs0", 0.0),
            record(95, "bs1", 10.0),
        ];
        let d = synthesize_demands(&recs, &two_cells(), &DemandSynthesis::default()).unwrap();
        assert_eq!(d.len(), 240);
        let window_sum = |lo: usize, hi: usize| {
            d.demands()
                .iter()
                .filter(|x| (lo..=hi).contains(&x.start))
                .map(|x| x.volume)
                .sum::<f64>()
        };
        assert!((window_sum(1, 450) - 77.5).abs() <= 77.5 * 1e-9);
        assert!((window_sum(42_751, 43_200) - 10.0).abs() <= 10.0 * 1e-9);
        assert!(d.demands().iter().all(|x| x.end <= 43_200));
        assert!(d
            .demands()
            .windows(2)
            .all(|w| w[0].start / 450 <= w[1].start / 450));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let recs = synthesize_trace(
            &["bs0".into(), "bs1".into()],
            1,
            &TraceProfile::diurnal(),
            3,
        )
        .unwrap();
        let cfg = DemandSynthesis {
            splits: 4,
            seed: 99,
            ..DemandSynthesis::default()
        };
        let a = synthesize_demands(&recs, &two_cells(), &cfg).unwrap();
        assert_eq!(a, synthesize_demands(&recs, &two_cells(), &cfg).unwrap());
        let b =
            synthesize_demands(&recs, &two_cells(), &DemandSynthesis { seed: 100, ..cfg }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn coarse_windows_merge_records() {
        let cfg = DemandSynthesis {
            splits: 2,
            slot_seconds: 1800,
            window_seconds: 7200,
            ..DemandSynthesis::default()
        };
        let recs = [
            record(0, "bs1", 1.0),
            record(7, "bs1", 2.0),
            record(8, "bs1", 4.0),
        ];
        let d = synthesize_demands(&recs, &two_cells(), &cfg).unwrap();
        assert_eq!(d.horizon(), 48);
        assert_eq!(d.len(), 4);
        let first: f64 = d.demands()[..2].iter().map(|x| x.volume).sum();
        assert!((first - 3.0).abs() < 1e-12);
        assert!(d.demands()[2..].iter().all(|x| (5..=8).contains(&x.start)));
    }

    #[test]
    fn rejects_unknown_cells_and_bad_windows() {
        let t = two_cells();
        assert!(matches!(
            synthesize_demands(&[record(0, "zz", 1.0)], &t, &DemandSynthesis::default()),
            Err(CoreError::UnknownNode(_))
        ));
        let cfg = DemandSynthesis {
            slot_seconds: 7,
            ..DemandSynthesis::default()
        };
        assert!(synthesize_demands(&[record(0, "bs0", 1.0)], &t, &cfg).is_err());
    }
}
