// SPDX-License-Identifier: Apache-2.0

//! Evaluation windows: running sums while a window is open, and the
//! immutable [`IntervalResult`] written when it closes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::case::{CaseParams, WindowKind};
use crate::metric::Metric;
use crate::perf::{self, Ratios, Tier};
use crate::units::{amount_str, Amount, Fraction, Milli};

/// Exact running sum of three-decimal samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSum {
    pub thousandths: i128,
    pub count: u32,
}

impl MetricSum {
    pub fn add(&mut self, v: Milli) {
        self.thousandths += i128::from(v.thousandths());
        self.count += 1;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.thousandths as f64 / f64::from(self.count) / 1000.0)
    }
}

/// Sums per metric for one open window.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowAccumulator {
    sums: BTreeMap<Metric, MetricSum>,
}

impl WindowAccumulator {
    pub fn add(&mut self, metric: Metric, v: Milli) {
        self.sums.entry(metric).or_default().add(v);
    }

    pub fn sum(&self, metric: Metric) -> MetricSum {
        self.sums.get(&metric).copied().unwrap_or_default()
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        self.sum(metric).mean()
    }

    pub fn count(&self, metric: Metric) -> u32 {
        self.sum(metric).count
    }
}

/// Outcome for one payee in one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Award {
    pub tier: Tier,
    pub fraction: Fraction,
    #[serde(with = "amount_str")]
    pub reward: Amount,
}

impl Award {
    fn new(tier: Tier, reduced: Fraction, fee: Amount) -> Self {
        let fraction = tier.fraction(reduced);
        Award { tier, fraction, reward: fraction.apply_floor(fee) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub case_id: u64,
    pub kind: WindowKind,
    pub index: u64,
    pub window: (u64, u64),
    pub ratios: Ratios,
    /// Per-metric comfort tiers (thermal windows only).
    pub tiers: BTreeMap<Metric, Tier>,
    /// Facility-manager award (thermal windows).
    pub fm: Option<Award>,
    /// Contractor award (energy windows).
    pub contractor: Option<Award>,
    pub sample_counts: BTreeMap<Metric, u32>,
}

impl IntervalResult {
    pub fn total_reward(&self) -> Amount {
        self.fm.map_or(0, |a| a.reward) + self.contractor.map_or(0, |a| a.reward)
    }
}

fn ratio(acc: &WindowAccumulator, metric: Metric, params: &CaseParams) -> Option<f64> {
    let baseline = params.baselines.for_metric(metric)?;
    let mean = acc.mean(metric)?;
    Some(match metric {
        Metric::Energy => perf::energy_performance(mean, baseline),
        _ => perf::comfort_ratio(mean, baseline),
    })
}

/// Thermal window: comfort ratios, per-metric tiers and the facility
/// manager's award. A metric with no samples is Fail.
pub fn evaluate_thermal(
    params: &CaseParams,
    case_id: u64,
    index: u64,
    acc: &WindowAccumulator,
) -> IntervalResult {
    let mut ratios = Ratios::default();
    let mut tiers = BTreeMap::new();
    let mut sample_counts = BTreeMap::new();
    for m in Metric::COMFORT {
        let r = ratio(acc, m, params);
        ratios.set(m, r);
        tiers.insert(m, perf::classify_metric(r, &params.bands, m));
        sample_counts.insert(m, acc.count(m));
    }
    let fm_tier = perf::fm_tier([
        tiers[&Metric::Temperature],
        tiers[&Metric::Humidity],
        tiers[&Metric::Co2],
    ]);
    IntervalResult {
        case_id,
        kind: WindowKind::Thermal,
        index,
        window: params.window_bounds(WindowKind::Thermal, index),
        ratios,
        tiers,
        fm: Some(Award::new(fm_tier, params.reduced_fraction, params.fees.fm_fee_per_interval)),
        contractor: None,
        sample_counts,
    }
}

/// Energy window: energy ratio, the temperature ratio over the same span,
/// and the contractor's award.
pub fn evaluate_energy(
    params: &CaseParams,
    case_id: u64,
    index: u64,
    acc: &WindowAccumulator,
) -> IntervalResult {
    let ratios = Ratios {
        ep: ratio(acc, Metric::Energy, params),
        tc_t: ratio(acc, Metric::Temperature, params),
        ..Ratios::default()
    };
    let tier = perf::contractor_tier(ratios.ep, ratios.tc_t, &params.contractor_policy);
    let sample_counts = [Metric::Energy, Metric::Temperature]
        .into_iter()
        .map(|m| (m, acc.count(m)))
        .collect();
    IntervalResult {
        case_id,
        kind: WindowKind::Energy,
        index,
        window: params.window_bounds(WindowKind::Energy, index),
        ratios,
        tiers: BTreeMap::new(),
        fm: None,
        contractor: Some(Award::new(
            tier,
            params.reduced_fraction,
            params.fees.contractor_fee_per_interval,
        )),
        sample_counts,
    }
}

pub fn evaluate(
    params: &CaseParams,
    case_id: u64,
    kind: WindowKind,
    index: u64,
    acc: &WindowAccumulator,
) -> IntervalResult {
    match kind {
        WindowKind::Thermal => evaluate_thermal(params, case_id, index, acc),
        WindowKind::Energy => evaluate_energy(params, case_id, index, acc),
    }
}

/// Order in which closed windows are evaluated: by end time, thermal first
/// on ties, then by index.
pub fn evaluation_order(params: &CaseParams, kind: WindowKind, index: u64) -> (u64, WindowKind, u64) {
    (params.window_bounds(kind, index).1, kind, index)
}

pub const RESULTS_HEADER: &str = "kind,index,begin,end,ep,tc_t,tc_rh,tc_co2,\
tier_t,tier_rh,tier_co2,fm_tier,fm_fraction,fm_reward,\
contractor_tier,contractor_fraction,contractor_reward,\
n_temperature,n_humidity,n_co2,n_energy";

fn fmt_ratio(r: Option<f64>) -> String {
    r.map(|v| format!("{v:.6}")).unwrap_or_default()
}

impl IntervalResult {
    /// One CSV record matching [`RESULTS_HEADER`]; ratios at 6 decimals.
    pub fn export_line(&self) -> String {
        let tier = |m: Metric| self.tiers.get(&m).map(|t| t.name()).unwrap_or_default();
        let award = |a: Option<Award>| match a {
            Some(a) => format!("{},{},{}", a.tier.name(), a.fraction, a.reward),
            None => ",,".to_string(),
        };
        let n = |m: Metric| self.sample_counts.get(&m).map(u32::to_string).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            match self.kind {
                WindowKind::Thermal => "thermal",
                WindowKind::Energy => "energy",
            },
            self.index,
            self.window.0,
            self.window.1,
            fmt_ratio(self.ratios.ep),
            fmt_ratio(self.ratios.tc_t),
            fmt_ratio(self.ratios.tc_rh),
            fmt_ratio(self.ratios.tc_co2),
            tier(Metric::Temperature),
            tier(Metric::Humidity),
            tier(Metric::Co2),
            award(self.fm),
            award(self.contractor),
            n(Metric::Temperature),
            n(Metric::Humidity),
            n(Metric::Co2),
            n(Metric::Energy),
        )
    }
}

pub fn export_results(results: &[IntervalResult]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&r.export_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::COIN;

    fn m(s: &str) -> Milli {
        s.parse().unwrap()
    }

    #[test]
    fn all_baseline_window_is_full() {
        let p = CaseParams::reference(0);
        let mut acc = WindowAccumulator::default();
        acc.add(Metric::Temperature, m("21"));
        acc.add(Metric::Humidity, m("40"));
        acc.add(Metric::Co2, m("1000"));
        acc.add(Metric::Energy, m("45"));
        let r = evaluate_thermal(&p, 1, 0, &acc);
        assert_eq!(r.ratios.tc_t, Some(1.0));
        assert!(r.tiers.values().all(|t| *t == Tier::Full));
        assert_eq!(r.fm.unwrap().fraction, Fraction::ONE);
        assert_eq!(r.fm.unwrap().reward, COIN);
        let e = evaluate_energy(&p, 1, 0, &acc);
        assert_eq!(e.ratios.ep, Some(1.0));
        assert_eq!(e.contractor.unwrap().tier, Tier::Full);
        assert_eq!(e.contractor.unwrap().reward, 5 * COIN);
    }

    #[test]
    fn green_band_mix_pays_both_in_full() {
        // TC ratios (1.0, 1.0, 0.9) and EP 0.95
        let p = CaseParams::reference(0);
        let mut acc = WindowAccumulator::default();
        acc.add(Metric::Temperature, m("21"));
        acc.add(Metric::Humidity, m("40"));
        acc.add(Metric::Co2, m("900"));
        acc.add(Metric::Energy, m("42.75"));
        let t = evaluate_thermal(&p, 1, 0, &acc);
        assert_eq!(t.fm.unwrap().fraction, Fraction::ONE);
        let e = evaluate_energy(&p, 1, 0, &acc);
        assert!((e.ratios.ep.unwrap() - 0.95).abs() < 1e-12);
        assert_eq!(e.contractor.unwrap().fraction, Fraction::ONE);
    }

    #[test]
    fn empty_window_fails_everything() {
        // hand-run: no samples, so every comfort ratio is undefined, each
        // metric is Fail, three reds give a zero payout
        let p = CaseParams::reference(0);
        let acc = WindowAccumulator::default();
        let r = evaluate_thermal(&p, 1, 0, &acc);
        assert_eq!(r.ratios, Ratios::default());
        assert!(r.tiers.values().all(|t| *t == Tier::Fail));
        assert_eq!(r.fm.unwrap().fraction, Fraction::ZERO);
        assert_eq!(r.total_reward(), 0);
        assert!(r.sample_counts.values().all(|c| *c == 0));
        // no energy data: contractor cannot be judged, reduced rate
        let e = evaluate_energy(&p, 1, 0, &acc);
        assert_eq!(e.contractor.unwrap().tier, Tier::Reduced);
        assert_eq!(e.contractor.unwrap().reward, 5 * COIN / 2);
    }

    #[test]
    fn mean_is_exact_on_thousandths() {
        let mut s = MetricSum::default();
        s.add(m("20"));
        s.add(m("22"));
        assert_eq!(s.mean(), Some(21.0));
        assert_eq!(MetricSum::default().mean(), None);
    }

    #[test]
    fn export_line_has_header_arity() {
        let p = CaseParams::reference(0);
        let r = evaluate_thermal(&p, 1, 0, &WindowAccumulator::default());
        let cols = RESULTS_HEADER.split(',').count();
        assert_eq!(r.export_line().split(',').count(), cols);
        let e = evaluate_energy(&p, 1, 0, &WindowAccumulator::default());
        assert_eq!(e.export_line().split(',').count(), cols);
    }
}
