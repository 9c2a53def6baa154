// SPDX-License-Identifier: Apache-2.0

//! Back-end oracle: a randomized sampling plan over time and sensors, and
//! the loop that turns planned events into measurement transactions.
//!
//! Each metric has its own schedule stream and its own sensor-choice
//! stream, both split from the policy seed, so adding or retuning one
//! metric leaves the others untouched.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contract::case::{SensorRegistry, DAY, WEEK};
use crate::contract::{Call, Measurement};
use crate::data::BuildingDataset;
use crate::ledger::{Address, Ledger, LedgerError, StateDigest, TxStatus};
use crate::metric::Metric;
use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid sampling policy: {0}")]
    InvalidPolicy(String),
    #[error("duration must be positive")]
    EmptyHorizon,
    #[error("no case registered on the contract")]
    NoCase,
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JitterMode {
    /// Gaps drawn uniformly from `[m/2, 3m/2]` whole seconds.
    #[default]
    UniformBounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPolicy {
    /// Mean seconds between events, per sampled metric.
    pub mean_interval: BTreeMap<Metric, u64>,
    #[serde(default)]
    pub jitter: JitterMode,
    #[serde(default)]
    pub seed: u64,
}

const THERMAL: [Metric; 3] = Metric::COMFORT;

impl SamplingPolicy {
    /// Thermal metrics `per_day` times a day each, energy weekly.
    pub fn thermal_per_day(per_day: u64, seed: u64) -> Self {
        let mut mean_interval: BTreeMap<Metric, u64> =
            THERMAL.iter().map(|m| (*m, (DAY as f64 / per_day as f64).round() as u64)).collect();
        mean_interval.insert(Metric::Energy, WEEK);
        SamplingPolicy { mean_interval, jitter: JitterMode::UniformBounded, seed }
    }

    /// About five thermal readings a day, energy weekly.
    pub fn five_per_day(seed: u64) -> Self {
        Self::thermal_per_day(5, seed)
    }

    /// Thermal readings every 15 minutes on average, energy weekly.
    pub fn every_15_minutes(seed: u64) -> Self {
        Self::thermal_per_day(96, seed)
    }

    /// Accelerated two-day test run: 190 thermal readings a day per metric.
    pub fn accelerated(seed: u64) -> Self {
        Self::thermal_per_day(190, seed)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        for (m, i) in &self.mean_interval {
            // m = 1 would allow zero-length gaps
            if *i < 2 {
                return Err(OracleError::InvalidPolicy(format!("{m}: mean_interval must be >= 2 s")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledEvent {
    pub time: u64,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// Seed for sensor selection, split from the policy seed.
    pub seed: u64,
    pub start: u64,
    pub end: u64,
    /// Ordered by time, then metric.
    pub events: Vec<ScheduledEvent>,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self, metric: Metric) -> impl Iterator<Item = u64> + '_ {
        self.events.iter().filter(move |e| e.metric == metric).map(|e| e.time)
    }
}

/// Jittered event times in `[start, end)` for one metric: the first at
/// `start + gap`, each subsequent one a fresh gap later.
pub fn plan_metric<R: Rng + ?Sized>(mean: u64, start: u64, end: u64, rng: &mut R) -> Vec<u64> {
    let lo = mean.div_ceil(2);
    let hi = mean + mean / 2;
    let mut out = Vec::new();
    let mut t = start;
    loop {
        t = t.saturating_add(rng.random_range(lo..=hi));
        if t >= end {
            return out;
        }
        out.push(t);
    }
}

pub fn plan_schedule(policy: &SamplingPolicy, start: u64, duration: u64) -> Result<Schedule, OracleError> {
    policy.validate()?;
    if duration == 0 {
        return Err(OracleError::EmptyHorizon);
    }
    let end = start.saturating_add(duration);
    let mut events = Vec::new();
    for (metric, mean) in &policy.mean_interval {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(policy.seed, &["schedule", metric.name()]));
        events.extend(
            plan_metric(*mean, start, end, &mut rng)
                .into_iter()
                .map(|time| ScheduledEvent { time, metric: *metric }),
        );
    }
    events.sort_by_key(|e| (e.time, e.metric));
    Ok(Schedule { seed: derive_seed(policy.seed, &["select"]), start, end, events })
}

/// Uniform choice from the registered sensors.
pub fn select_sensor<'a, R: Rng + ?Sized>(registered: &'a [String], rng: &mut R) -> Option<&'a str> {
    match registered.len() {
        0 => None,
        n => Some(&registered[rng.random_range(0..n)]),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricCounts {
    pub events: u64,
    pub submitted: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionReport {
    pub events: u64,
    pub submitted: u64,
    pub accepted: u64,
    pub rejected: u64,
    /// Events with no sample at or before the event time, or no sensor to
    /// choose from.
    pub skipped: u64,
    pub per_metric: BTreeMap<Metric, MetricCounts>,
    /// Rejection and skip reasons with their counts.
    pub reasons: BTreeMap<String, u64>,
    /// Hash over every processed event and its outcome, in order.
    pub sequence_digest: String,
}

impl SubmissionReport {
    pub fn rejection_rate(&self) -> f64 {
        if self.submitted == 0 {
            0.0
        } else {
            self.rejected as f64 / self.submitted as f64
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "events     {}\nsubmitted  {}\naccepted   {}\nrejected   {}\nskipped    {}\n",
            self.events, self.submitted, self.accepted, self.rejected, self.skipped
        );
        out.push_str("\nmetric        events  accepted  rejected  skipped\n");
        for (m, c) in &self.per_metric {
            out.push_str(&format!(
                "{:<12} {:>7} {:>9} {:>9} {:>8}\n",
                m.name(),
                c.events,
                c.accepted,
                c.rejected,
                c.skipped
            ));
        }
        if !self.reasons.is_empty() {
            out.push_str("\nreason                count\n");
            for (r, n) in &self.reasons {
                out.push_str(&format!("{r:<20} {n:>6}\n"));
            }
        }
        out.push_str(&format!("\nsequence   {}\n", self.sequence_digest));
        out
    }
}

/// Incremental oracle run over one schedule. Events are processed in order
/// and can be split across several [`Oracle::run_until`] calls without
/// changing any draw.
pub struct Oracle<'a> {
    schedule: &'a Schedule,
    dataset: &'a BuildingDataset,
    address: Address,
    next: usize,
    pickers: BTreeMap<Metric, ChaCha8Rng>,
    counts: BTreeMap<Metric, MetricCounts>,
    reasons: BTreeMap<String, u64>,
    hasher: Sha256,
}

impl<'a> Oracle<'a> {
    pub fn new(schedule: &'a Schedule, dataset: &'a BuildingDataset, address: Address) -> Self {
        let pickers = Metric::ALL
            .iter()
            .map(|m| (*m, ChaCha8Rng::seed_from_u64(derive_seed(schedule.seed, &[m.name()]))))
            .collect();
        Oracle {
            schedule,
            dataset,
            address,
            next: 0,
            pickers,
            counts: BTreeMap::new(),
            reasons: BTreeMap::new(),
            hasher: Sha256::new(),
        }
    }

    /// Index of the next unprocessed event.
    pub fn cursor(&self) -> usize {
        self.next
    }

    /// Skips the first `cursor` events, consuming their sensor draws as a
    /// full run would. Used to resume a run in a later process.
    pub fn fast_forward(&mut self, registry: &SensorRegistry, cursor: usize) {
        while self.next < cursor.min(self.schedule.events.len()) {
            let metric = self.schedule.events[self.next].metric;
            let rng = self.pickers.get_mut(&metric).expect("all metrics seeded");
            let _ = select_sensor(registry.ids(metric), rng);
            self.next += 1;
        }
    }

    fn reason(&mut self, key: &str) {
        *self.reasons.entry(key.to_string()).or_default() += 1;
    }

    /// Processes every remaining event with `time < until`, advancing the
    /// ledger clock to each event's time.
    pub fn run_until(&mut self, ledger: &mut Ledger, until: u64) -> Result<(), OracleError> {
        let contract = ledger.contract().ok_or(OracleError::NoCase)?;
        let registry = contract.case_params().ok_or(OracleError::NoCase)?.sensors.clone();
        let case_id = contract.case_id().ok_or(OracleError::NoCase)?;
        while let Some(ev) = self.schedule.events.get(self.next).copied() {
            if ev.time >= until {
                break;
            }
            self.next += 1;
            let counts = self.counts.entry(ev.metric).or_default();
            counts.events += 1;
            let rng = self.pickers.get_mut(&ev.metric).expect("all metrics seeded");
            let Some(sensor) = select_sensor(registry.ids(ev.metric), rng) else {
                counts.skipped += 1;
                self.reason("NoSensor");
                self.hasher.update(format!("{},{},-,skip\n", ev.time, ev.metric));
                continue;
            };
            let sample = self
                .dataset
                .get(sensor)
                .filter(|s| s.metric() == ev.metric)
                .map(|s| s.sample_at(ev.time));
            let value = match sample {
                Some(Ok(v)) => v,
                other => {
                    counts.skipped += 1;
                    let key = if other.is_none() { "NoSeries" } else { "NoData" };
                    self.reason(key);
                    self.hasher.update(format!("{},{},{sensor},skip\n", ev.time, ev.metric));
                    continue;
                }
            };
            ledger.advance_clock(ev.time)?;
            let measurement = Measurement {
                case_id,
                metric: ev.metric,
                sensor_id: sensor.to_string(),
                timestamp: ev.time,
                value,
            };
            let receipt = ledger.submit(self.address, Call::SubmitMeasurement { measurement })?;
            let counts = self.counts.entry(ev.metric).or_default();
            counts.submitted += 1;
            match &receipt.status {
                TxStatus::Accepted => counts.accepted += 1,
                TxStatus::Rejected(r) => {
                    counts.rejected += 1;
                    self.reason(r.code());
                }
            }
            self.hasher
                .update(format!("{},{},{sensor},{value},{}\n", ev.time, ev.metric, receipt.status));
        }
        Ok(())
    }

    pub fn report(&self) -> SubmissionReport {
        let sum = |f: fn(&MetricCounts) -> u64| self.counts.values().map(f).sum();
        SubmissionReport {
            events: sum(|c| c.events),
            submitted: sum(|c| c.submitted),
            accepted: sum(|c| c.accepted),
            rejected: sum(|c| c.rejected),
            skipped: sum(|c| c.skipped),
            per_metric: self.counts.clone(),
            reasons: self.reasons.clone(),
            sequence_digest: StateDigest(self.hasher.clone().finalize().into()).to_string(),
        }
    }
}

/// Runs the whole schedule.
pub fn run_oracle(
    schedule: &Schedule,
    dataset: &BuildingDataset,
    ledger: &mut Ledger,
    oracle: Address,
) -> Result<SubmissionReport, OracleError> {
    let mut o = Oracle::new(schedule, dataset, oracle);
    o.run_until(ledger, u64::MAX)?;
    Ok(o.report())
}
