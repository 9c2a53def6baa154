// SPDX-License-Identifier: Apache-2.0

//! Sensor time series: CSV ingestion, validation, carry-forward lookup and
//! synthetic generation.
//!
//! CSV schema, one sample per row:
//!
//! ```text
//! timestamp,sensor_id,metric,value
//! 1589414400,bacnet:2101/analog-input:1,temperature,21.250
//! ```
//!
//! `timestamp` is integer Unix seconds, `metric` one of `temperature`,
//! `humidity`, `co2`, `energy` (plus `setpoint`), and `value` a decimal with
//! at most three fractional digits. Every dataset, loaded or generated, is
//! built through [`SensorSeries::push`], which enforces strictly increasing
//! timestamps and the metric's physical range.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::case::{SensorRegistry, DAY, WEEK};
use crate::exec::{self, Mode};
use crate::metric::Metric;
use crate::seed::derive_seed;
use crate::units::Milli;

pub const CSV_HEADER: [&str; 4] = ["timestamp", "sensor_id", "metric", "value"];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: timestamp {timestamp} for {sensor} does not increase")]
    NonMonotone { line: u64, sensor: String, timestamp: u64 },
    #[error("line {line}: {metric} value {value} for {sensor} is out of range")]
    OutOfRange { line: u64, sensor: String, metric: Metric, value: Milli },
    #[error("line {line}: sensor {sensor} already reported as {expected}")]
    MetricConflict { line: u64, sensor: String, expected: Metric },
    #[error("sensor {0} appears twice")]
    DuplicateSensor(String),
    #[error("no sample for {sensor} at or before {t}")]
    NoData { sensor: String, t: u64 },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

/// Why a single sample was refused.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("timestamp does not increase")]
    NonMonotone,
    #[error("value out of range")]
    OutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub timestamp: u64,
    pub value: Milli,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorSeries {
    sensor_id: String,
    metric: Metric,
    samples: Vec<Sample>,
}

impl SensorSeries {
    pub fn new(sensor_id: impl Into<String>, metric: Metric) -> Self {
        Self { sensor_id: sensor_id.into(), metric, samples: Vec::new() }
    }

    /// Appends a sample after checking order and physical range.
    pub fn push(&mut self, timestamp: u64, value: Milli) -> Result<(), SampleError> {
        if self.samples.last().is_some_and(|s| timestamp <= s.timestamp) {
            return Err(SampleError::NonMonotone);
        }
        if !self.metric.in_range(value) {
            return Err(SampleError::OutOfRange);
        }
        self.samples.push(Sample { timestamp, value });
        Ok(())
    }

    pub fn sensor_id(&self) -> &str {
        &self.sensor_id
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Value of the latest sample at or before `t`.
    pub fn sample_at(&self, t: u64) -> Result<Milli, DataError> {
        let idx = self.samples.partition_point(|s| s.timestamp <= t);
        match idx {
            0 => Err(DataError::NoData { sensor: self.sensor_id.clone(), t }),
            i => Ok(self.samples[i - 1].value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildingDataset {
    building_id: String,
    series: BTreeMap<String, SensorSeries>,
}

impl BuildingDataset {
    pub fn new(building_id: impl Into<String>) -> Self {
        Self { building_id: building_id.into(), series: BTreeMap::new() }
    }

    pub fn insert(&mut self, series: SensorSeries) -> Result<(), DataError> {
        if self.series.contains_key(&series.sensor_id) {
            return Err(DataError::DuplicateSensor(series.sensor_id));
        }
        self.series.insert(series.sensor_id.clone(), series);
        Ok(())
    }

    pub fn building_id(&self) -> &str {
        &self.building_id
    }

    pub fn get(&self, sensor_id: &str) -> Option<&SensorSeries> {
        self.series.get(sensor_id)
    }

    pub fn series(&self) -> impl Iterator<Item = &SensorSeries> {
        self.series.values()
    }

    pub fn sensor_count(&self) -> usize {
        self.series.len()
    }

    pub fn sample_count(&self) -> usize {
        self.series.values().map(SensorSeries::len).sum()
    }

    /// Registry listing every sensor in the dataset under its metric.
    pub fn registry(&self) -> SensorRegistry {
        let mut reg = SensorRegistry::default();
        for s in self.series.values() {
            reg.ids_mut(s.metric).push(s.sensor_id.clone());
        }
        reg
    }

    /// Merges another dataset's series into this one.
    pub fn extend(&mut self, other: BuildingDataset) -> Result<(), DataError> {
        for s in other.series.into_values() {
            self.insert(s)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Energy values are cumulative meter readings; convert them to
    /// consumption since the previous reading (the first reading is
    /// dropped).
    pub cumulative_energy: bool,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io { path: path.to_path_buf(), source }
}

pub fn load_csv(path: &Path, building_id: &str) -> Result<BuildingDataset, DataError> {
    load_csv_with(path, building_id, LoadOptions::default())
}

pub fn load_csv_with(
    path: &Path,
    building_id: &str,
    options: LoadOptions,
) -> Result<BuildingDataset, DataError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_csv(file, building_id, options)
}

/// Loads every `*.csv` file in `dir`, in file-name order, into one dataset.
pub fn load_dir(dir: &Path, building_id: &str, options: LoadOptions) -> Result<BuildingDataset, DataError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    let mut out = BuildingDataset::new(building_id);
    for f in files {
        out.extend(load_csv_with(&f, building_id, options)?)?;
    }
    Ok(out)
}

pub fn read_csv<R: Read>(
    reader: R,
    building_id: &str,
    options: LoadOptions,
) -> Result<BuildingDataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut series: BTreeMap<String, (SensorSeries, Vec<u64>)> = BTreeMap::new();
    let mut saw_header = false;
    for record in rdr.records() {
        let record = record.map_err(|e| DataError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if !saw_header {
            if record.iter().ne(CSV_HEADER) {
                return Err(DataError::Malformed {
                    line,
                    message: format!("expected header `{}`", CSV_HEADER.join(",")),
                });
            }
            saw_header = true;
            continue;
        }
        let malformed = |message: String| DataError::Malformed { line, message };
        if record.len() != 4 {
            return Err(malformed(format!("expected 4 fields, found {}", record.len())));
        }
        let timestamp: u64 = record[0]
            .parse()
            .map_err(|_| malformed(format!("bad timestamp `{}`", &record[0])))?;
        let sensor = &record[1];
        if sensor.is_empty() {
            return Err(malformed("empty sensor_id".into()));
        }
        let metric: Metric = record[2].parse().map_err(|e| malformed(format!("{e}")))?;
        let value: Milli = record[3].parse().map_err(|e| malformed(format!("{e}")))?;

        let (s, lines) = series
            .entry(sensor.to_string())
            .or_insert_with(|| (SensorSeries::new(sensor, metric), Vec::new()));
        if s.metric != metric {
            return Err(DataError::MetricConflict { line, sensor: sensor.into(), expected: s.metric });
        }
        push_at_line(s, timestamp, value, line)?;
        lines.push(line);
    }
    if !saw_header {
        return Err(DataError::Malformed { line: 1, message: "missing header".into() });
    }
    let mut out = BuildingDataset::new(building_id);
    for (_, (s, lines)) in series {
        let s = if options.cumulative_energy && s.metric == Metric::Energy {
            differenced(&s, &lines)?
        } else {
            s
        };
        out.insert(s)?;
    }
    Ok(out)
}

fn push_at_line(s: &mut SensorSeries, timestamp: u64, value: Milli, line: u64) -> Result<(), DataError> {
    s.push(timestamp, value).map_err(|e| match e {
        SampleError::NonMonotone => DataError::NonMonotone {
            line,
            sensor: s.sensor_id.clone(),
            timestamp,
        },
        SampleError::OutOfRange => DataError::OutOfRange {
            line,
            sensor: s.sensor_id.clone(),
            metric: s.metric,
            value,
        },
    })
}

fn differenced(raw: &SensorSeries, lines: &[u64]) -> Result<SensorSeries, DataError> {
    let mut out = SensorSeries::new(raw.sensor_id.clone(), raw.metric);
    for (pair, line) in raw.samples.windows(2).zip(&lines[1..]) {
        let delta = Milli::from_thousandths(pair[1].value.thousandths() - pair[0].value.thousandths());
        push_at_line(&mut out, pair[1].timestamp, delta, *line)?;
    }
    Ok(out)
}

/// Writes the dataset in the canonical schema, rows ordered by timestamp
/// then sensor id.
pub fn write_csv_to<W: Write>(dataset: &BuildingDataset, writer: W) -> Result<(), DataError> {
    let to_io = |e: csv::Error| DataError::Io {
        path: PathBuf::from("<writer>"),
        source: std::io::Error::other(e),
    };
    let mut rows: Vec<(u64, &str, Metric, Milli)> = dataset
        .series()
        .flat_map(|s| {
            s.samples
                .iter()
                .map(move |x| (x.timestamp, s.sensor_id.as_str(), s.metric, x.value))
        })
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for (t, sensor, metric, value) in rows {
        w.write_record([t.to_string().as_str(), sensor, metric.name(), &value.to_string()])
            .map_err(to_io)?;
    }
    w.flush().map_err(|source| DataError::Io { path: PathBuf::from("<writer>"), source })
}

pub fn write_csv(dataset: &BuildingDataset, path: &Path) -> Result<(), DataError> {
    let file = File::create(path).map_err(io_err(path))?;
    write_csv_to(dataset, std::io::BufWriter::new(file))
}

/// Conventional BACnet-style id for sensor `i` (1-based) of a metric.
pub fn default_sensor_id(metric: Metric, i: u32) -> String {
    let (device, object) = match metric {
        Metric::Setpoint => (2100, "analog-value"),
        Metric::Temperature => (2101, "analog-input"),
        Metric::Humidity => (2102, "analog-input"),
        Metric::Co2 => (2103, "analog-input"),
        Metric::Energy => (2200, "accumulator"),
    };
    format!("bacnet:{device}/{object}:{i}")
}

/// Generator parameters for one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSynth {
    pub base: f64,
    /// Amplitude of the daily sinusoid.
    pub amplitude: f64,
    pub noise_sd: f64,
    pub sensors: u32,
    /// Sample spacing for this metric; falls back to the spec's
    /// `tick_interval`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tick_interval: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub building_id: String,
    pub start: u64,
    pub duration: u64,
    pub tick_interval: u64,
    pub seed: u64,
    pub metrics: BTreeMap<Metric, MetricSynth>,
}

impl SyntheticSpec {
    /// Two days of readings around the reference comfort targets, four
    /// sensors per indoor metric, one weekly energy meter.
    pub fn reference(start: u64, duration: u64, seed: u64) -> Self {
        let ms = |base, amplitude, noise_sd, sensors, tick| MetricSynth {
            base,
            amplitude,
            noise_sd,
            sensors,
            tick_interval: tick,
        };
        let mut metrics = BTreeMap::new();
        metrics.insert(Metric::Temperature, ms(21.5, 1.5, 0.4, 4, None));
        metrics.insert(Metric::Humidity, ms(38.0, 6.0, 1.5, 4, None));
        metrics.insert(Metric::Co2, ms(850.0, 250.0, 60.0, 4, None));
        metrics.insert(Metric::Setpoint, ms(21.0, 0.0, 0.0, 4, Some(DAY)));
        metrics.insert(Metric::Energy, ms(45.0, 0.0, 6.0, 1, Some(WEEK)));
        SyntheticSpec {
            building_id: "tz2".into(),
            start,
            duration,
            tick_interval: 300,
            seed,
            metrics,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::InvalidSpec(m));
        if self.tick_interval == 0 {
            return bad("tick_interval must be positive".into());
        }
        for (metric, ms) in &self.metrics {
            if !(ms.noise_sd >= 0.0 && ms.noise_sd.is_finite()) {
                return bad(format!("{metric}: noise_sd must be finite and >= 0"));
            }
            if !(ms.base.is_finite() && ms.amplitude.is_finite()) {
                return bad(format!("{metric}: base and amplitude must be finite"));
            }
            if ms.tick_interval == Some(0) {
                return bad(format!("{metric}: tick_interval must be positive"));
            }
        }
        Ok(())
    }

    /// Sensor ids the generator will produce.
    pub fn registry(&self) -> SensorRegistry {
        let mut reg = SensorRegistry::default();
        for (metric, ms) in &self.metrics {
            *reg.ids_mut(*metric) = (1..=ms.sensors).map(|i| default_sensor_id(*metric, i)).collect();
        }
        reg
    }
}

/// Deterministic synthetic readings: `base + amplitude·sin(2πt/86400) +
/// N(0, σ)`, clipped to the metric's physical range and rounded to three
/// decimals. Each sensor draws from its own stream derived from `seed`.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<BuildingDataset, DataError> {
    generate_synthetic_with(spec, seed, Mode::default())
}

pub fn generate_synthetic_with(
    spec: &SyntheticSpec,
    seed: u64,
    mode: Mode,
) -> Result<BuildingDataset, DataError> {
    spec.validate()?;
    let jobs: Vec<(Metric, MetricSynth, u32)> = spec
        .metrics
        .iter()
        .flat_map(|(m, ms)| (1..=ms.sensors).map(move |i| (*m, *ms, i)))
        .collect();
    let series = exec::map(mode, &jobs, |(metric, ms, i)| {
        generate_series(spec, seed, *metric, ms, *i)
    });
    let mut out = BuildingDataset::new(spec.building_id.clone());
    for s in series {
        out.insert(s?)?;
    }
    Ok(out)
}

fn generate_series(
    spec: &SyntheticSpec,
    seed: u64,
    metric: Metric,
    ms: &MetricSynth,
    index: u32,
) -> Result<SensorSeries, DataError> {
    let sensor_id = default_sensor_id(metric, index);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["synthetic", metric.name(), &index.to_string()]));
    let noise = (ms.noise_sd > 0.0)
        .then(|| Normal::new(0.0, ms.noise_sd).expect("validated noise sd"));
    let tick = ms.tick_interval.unwrap_or(spec.tick_interval);
    let mut series = SensorSeries::new(sensor_id, metric);
    let mut t = spec.start;
    let end = spec.start.saturating_add(spec.duration);
    while t <= end {
        let phase = (t % DAY) as f64 / DAY as f64 * std::f64::consts::TAU;
        let mut v = ms.base + ms.amplitude * phase.sin();
        if let Some(n) = &noise {
            v += n.sample(&mut rng);
        }
        let v = metric.clamp_f64(v);
        let value = Milli::from_f64(v)
            .ok_or_else(|| DataError::InvalidSpec(format!("{metric}: value {v} not representable")))?;
        series.push(t, value).map_err(|e| DataError::InvalidSpec(format!("{metric}: {e}")))?;
        t += tick;
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<BuildingDataset, DataError> {
        read_csv(text.as_bytes(), "b", LoadOptions::default())
    }

    #[test]
    fn three_rows_one_sensor() {
        let ds = parse(
            "timestamp,sensor_id,metric,value\n\
             10,s1,temperature,21.5\n\
             20,s1,temperature,21.75\n\
             30,s1,temperature,22\n",
        )
        .unwrap();
        assert_eq!(ds.get("s1").unwrap().len(), 3);
        assert_eq!(ds.sensor_count(), 1);
    }

    #[test]
    fn duplicate_timestamp_reports_line() {
        let err = parse(
            "timestamp,sensor_id,metric,value\n\
             10,s1,temperature,21.5\n\
             10,s1,temperature,21.6\n",
        )
        .unwrap_err();
        assert!(matches!(err, DataError::NonMonotone { line: 3, .. }), "{err}");
    }

    #[test]
    fn humidity_out_of_range() {
        let err = parse("timestamp,sensor_id,metric,value\n5,h,humidity,120\n").unwrap_err();
        assert!(matches!(err, DataError::OutOfRange { line: 2, metric: Metric::Humidity, .. }));
    }

    #[test]
    fn malformed_rows() {
        for (body, line) in [
            ("x,s,temperature,1\n", 2),
            ("1,s,pressure,1\n", 2),
            ("1,s,temperature,1.2345\n", 2),
            ("1,s,temperature\n", 2),
            ("1,,temperature,1\n", 2),
            ("1,s,temperature,1\n2,s,temperature,abc\n", 3),
        ] {
            let text = format!("timestamp,sensor_id,metric,value\n{body}");
            match parse(&text) {
                Err(DataError::Malformed { line: l, .. }) => assert_eq!(l, line, "{body}"),
                other => panic!("{body}: {other:?}"),
            }
        }
        assert!(matches!(parse("a,b,c,d\n"), Err(DataError::Malformed { line: 1, .. })));
        assert!(matches!(parse(""), Err(DataError::Malformed { .. })));
    }

    #[test]
    fn sensor_metric_conflict() {
        let err = parse("timestamp,sensor_id,metric,value\n1,s,temperature,1\n2,s,humidity,1\n")
            .unwrap_err();
        assert!(matches!(err, DataError::MetricConflict { line: 3, .. }));
    }

    #[test]
    fn cumulative_energy_is_differenced() {
        let text = "timestamp,sensor_id,metric,value\n0,e,energy,100\n10,e,energy,145\n20,e,energy,190.5\n";
        let ds = read_csv(text.as_bytes(), "b", LoadOptions { cumulative_energy: true }).unwrap();
        let s = ds.get("e").unwrap();
        let vals: Vec<String> = s.samples().iter().map(|x| x.value.to_string()).collect();
        assert_eq!(vals, ["45.000", "45.500"]);
        let reset = "timestamp,sensor_id,metric,value\n0,e,energy,100\n10,e,energy,5\n";
        let err = read_csv(reset.as_bytes(), "b", LoadOptions { cumulative_energy: true }).unwrap_err();
        assert!(matches!(err, DataError::OutOfRange { line: 3, .. }));
    }

    #[test]
    fn sample_at_lookup() {
        let mut s = SensorSeries::new("s", Metric::Temperature);
        s.push(10, Milli::from_int(20)).unwrap();
        s.push(20, Milli::from_int(22)).unwrap();
        assert_eq!(s.sample_at(10).unwrap(), Milli::from_int(20));
        assert_eq!(s.sample_at(15).unwrap(), Milli::from_int(20));
        assert_eq!(s.sample_at(20).unwrap(), Milli::from_int(22));
        assert_eq!(s.sample_at(1000).unwrap(), Milli::from_int(22));
        assert!(matches!(s.sample_at(9), Err(DataError::NoData { t: 9, .. })));
    }

    fn one_metric(base: f64, amplitude: f64, noise_sd: f64, tick: u64, duration: u64) -> SyntheticSpec {
        let mut metrics = BTreeMap::new();
        metrics.insert(
            Metric::Temperature,
            MetricSynth { base, amplitude, noise_sd, sensors: 1, tick_interval: None },
        );
        SyntheticSpec {
            building_id: "b".into(),
            start: 1_589_414_400,
            duration,
            tick_interval: tick,
            seed: 0,
            metrics,
        }
    }

    fn values(ds: &BuildingDataset) -> Vec<f64> {
        ds.series().next().unwrap().samples().iter().map(|s| s.value.to_f64()).collect()
    }

    #[test]
    fn degenerate_spec_is_constant() {
        let ds = generate_synthetic(&one_metric(21.0, 0.0, 0.0, 600, DAY), 1).unwrap();
        assert!(values(&ds).iter().all(|v| *v == 21.0));
    }

    #[test]
    fn sinusoid_hits_its_bounds() {
        let ds = generate_synthetic(&one_metric(21.0, 1.0, 0.0, 900, DAY), 1).unwrap();
        let v = values(&ds);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((min, max), (20.0, 22.0));
    }

    #[test]
    fn noise_mean_within_standard_error() {
        // 10^4 ticks with the sinusoid off: mean within 4σ/√n of base
        let sigma = 0.5;
        let ds = generate_synthetic(&one_metric(21.0, 0.0, sigma, 1, 9_999), 42).unwrap();
        let v = values(&ds);
        assert_eq!(v.len(), 10_000);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let bound = 4.0 * sigma / (v.len() as f64).sqrt();
        assert!((mean - 21.0).abs() < bound, "mean {mean}, bound {bound}");
    }

    #[test]
    fn generation_is_seed_deterministic_across_modes() {
        let spec = SyntheticSpec::reference(0, 2 * DAY, 7);
        let a = generate_synthetic_with(&spec, 7, Mode::Sequential).unwrap();
        let b = generate_synthetic_with(&spec, 7, Mode::Parallel).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_with(&spec, 8, Mode::Sequential).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.registry(), spec.registry());
    }

    #[test]
    fn clipping_respects_physical_range() {
        let mut spec = one_metric(99.0, 5.0, 3.0, 60, DAY);
        let m = spec.metrics.remove(&Metric::Temperature).unwrap();
        spec.metrics.insert(Metric::Humidity, m);
        let ds = generate_synthetic(&spec, 3).unwrap();
        assert!(values(&ds).iter().all(|v| (0.0..=100.0).contains(v)));
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = one_metric(21.0, 0.0, -1.0, 60, DAY);
        assert!(matches!(generate_synthetic(&spec, 0), Err(DataError::InvalidSpec(_))));
    }
}
