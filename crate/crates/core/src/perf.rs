// SPDX-License-Identifier: Apache-2.0

//! Performance arithmetic: actual-over-baseline ratios, comfort band
//! classification, and the reward rules for the facility manager and the
//! contractor.
//!
//! Everything here is a pure function of its inputs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::Metric;
use crate::units::Fraction;

/// Agreed performance baselines. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// Expected energy consumption per energy interval, kWh.
    #[serde(rename = "E0_kwh")]
    pub energy_kwh: f64,
    /// Set-point temperature, °C.
    #[serde(rename = "T0_c")]
    pub temperature_c: f64,
    /// Target relative humidity, %.
    #[serde(rename = "RH0_pct")]
    pub humidity_pct: f64,
    /// Target CO2 level, ppm.
    #[serde(rename = "CO2_0_ppm")]
    pub co2_ppm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("baseline `{0}` must be finite and strictly positive")]
pub struct InvalidBaseline(pub &'static str);

impl Baselines {
    /// 45 kWh/week, 21 °C, 40 %, 1000 ppm.
    pub const REFERENCE: Baselines = Baselines {
        energy_kwh: 45.0,
        temperature_c: 21.0,
        humidity_pct: 40.0,
        co2_ppm: 1000.0,
    };

    pub fn validate(&self) -> Result<(), InvalidBaseline> {
        let fields = [
            ("E0_kwh", self.energy_kwh),
            ("T0_c", self.temperature_c),
            ("RH0_pct", self.humidity_pct),
            ("CO2_0_ppm", self.co2_ppm),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(InvalidBaseline(name));
            }
        }
        Ok(())
    }

    pub fn for_metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Temperature => Some(self.temperature_c),
            Metric::Humidity => Some(self.humidity_pct),
            Metric::Co2 => Some(self.co2_ppm),
            Metric::Energy => Some(self.energy_kwh),
            Metric::Setpoint => None,
        }
    }
}

/// Per-window performance ratios; `None` where the window had no samples.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Ratios {
    pub ep: Option<f64>,
    pub tc_t: Option<f64>,
    pub tc_rh: Option<f64>,
    pub tc_co2: Option<f64>,
}

impl Ratios {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Temperature => self.tc_t,
            Metric::Humidity => self.tc_rh,
            Metric::Co2 => self.tc_co2,
            Metric::Energy => self.ep,
            Metric::Setpoint => None,
        }
    }

    pub fn set(&mut self, metric: Metric, v: Option<f64>) {
        match metric {
            Metric::Temperature => self.tc_t = v,
            Metric::Humidity => self.tc_rh = v,
            Metric::Co2 => self.tc_co2 = v,
            Metric::Energy => self.ep = v,
            Metric::Setpoint => {}
        }
    }
}

/// Reward band: green, orange, red.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    Full,
    Reduced,
    Fail,
}

impl Tier {
    pub fn fraction(self, reduced: Fraction) -> Fraction {
        match self {
            Tier::Full => Fraction::ONE,
            Tier::Reduced => reduced,
            Tier::Fail => Fraction::ZERO,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Tier::Full => "full",
            Tier::Reduced => "reduced",
            Tier::Fail => "fail",
        }
    }
}

/// One end of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub value: f64,
    pub inclusive: bool,
}

impl Edge {
    pub const fn closed(value: f64) -> Self {
        Self { value, inclusive: true }
    }

    pub const fn open(value: f64) -> Self {
        Self { value, inclusive: false }
    }
}

/// Real interval; a missing edge is unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Interval {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<Edge>,
}

impl Interval {
    pub const ALL: Interval = Interval { lo: None, hi: None };

    pub const fn new(lo: Option<Edge>, hi: Option<Edge>) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = match self.lo {
            None => true,
            Some(e) if e.inclusive => x >= e.value,
            Some(e) => x > e.value,
        };
        let below = match self.hi {
            None => true,
            Some(e) if e.inclusive => x <= e.value,
            Some(e) => x < e.value,
        };
        above && below
    }
}

/// Full and Reduced intervals for one metric; everything else is Fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBands {
    pub full: Vec<Interval>,
    pub reduced: Vec<Interval>,
}

impl MetricBands {
    pub fn classify(&self, ratio: f64) -> Tier {
        if self.full.iter().any(|i| i.contains(ratio)) {
            Tier::Full
        } else if self.reduced.iter().any(|i| i.contains(ratio)) {
            Tier::Reduced
        } else {
            Tier::Fail
        }
    }
}

/// Facility-manager comfort bands per metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComfortBands {
    pub temperature: MetricBands,
    pub humidity: MetricBands,
    pub co2: MetricBands,
}

impl Default for ComfortBands {
    fn default() -> Self {
        use Edge as E;
        let iv = |lo, hi| Interval::new(lo, hi);
        ComfortBands {
            temperature: MetricBands {
                full: vec![iv(Some(E::closed(0.9)), Some(E::closed(1.1)))],
                reduced: vec![
                    iv(Some(E::closed(0.8)), Some(E::open(0.9))),
                    iv(Some(E::open(1.1)), Some(E::closed(1.2))),
                ],
            },
            humidity: MetricBands {
                full: vec![iv(Some(E::closed(0.75)), Some(E::closed(1.5)))],
                reduced: vec![
                    iv(Some(E::closed(0.4)), Some(E::open(0.75))),
                    iv(Some(E::open(1.5)), Some(E::closed(1.8))),
                ],
            },
            co2: MetricBands {
                full: vec![iv(None, Some(E::closed(1.0)))],
                reduced: vec![iv(Some(E::open(1.0)), Some(E::closed(1.1)))],
            },
        }
    }
}

impl ComfortBands {
    pub fn for_metric(&self, metric: Metric) -> Option<&MetricBands> {
        match metric {
            Metric::Temperature => Some(&self.temperature),
            Metric::Humidity => Some(&self.humidity),
            Metric::Co2 => Some(&self.co2),
            Metric::Energy | Metric::Setpoint => None,
        }
    }
}

/// One row of the contractor table: first matching row wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRow {
    pub ep: Interval,
    pub tc_t: Interval,
    pub tier: Tier,
}

/// Contractor reward table keyed on the energy ratio and the facility
/// manager's temperature ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractorPolicy {
    pub rows: Vec<PolicyRow>,
}

impl Default for ContractorPolicy {
    fn default() -> Self {
        use Edge as E;
        let iv = |lo, hi| Interval::new(lo, hi);
        let row = |ep, tc_t, tier| PolicyRow { ep, tc_t, tier };
        let ep_met = iv(None, Some(E::closed(1.0)));
        let ep_over = iv(Some(E::open(1.0)), Some(E::closed(1.5)));
        let ep_far = iv(Some(E::open(1.5)), None);
        ContractorPolicy {
            rows: vec![
                row(ep_met, iv(Some(E::closed(0.8)), None), Tier::Full),
                // energy target hit by letting the building go cold
                row(ep_met, iv(None, Some(E::open(0.8))), Tier::Reduced),
                row(ep_over, Interval::ALL, Tier::Reduced),
                // overheating by the facility manager excuses the contractor
                row(ep_far, iv(Some(E::open(1.2)), None), Tier::Reduced),
                row(ep_far, iv(None, Some(E::closed(1.2))), Tier::Fail),
            ],
        }
    }
}

impl ContractorPolicy {
    /// Tier of the first row containing `(ep, tc_t)`; Fail if none does.
    pub fn tier(&self, ep: f64, tc_t: f64) -> Tier {
        self.rows
            .iter()
            .find(|r| r.ep.contains(ep) && r.tc_t.contains(tc_t))
            .map_or(Tier::Fail, |r| r.tier)
    }
}

/// Linear comfort index coefficients `a·T + b·P_v − c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmvCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Energy performance ratio.
pub fn energy_performance(average_kwh: f64, baseline_kwh: f64) -> f64 {
    average_kwh / baseline_kwh
}

/// Comfort ratio of a window average over its target.
pub fn comfort_ratio(average: f64, baseline: f64) -> f64 {
    average / baseline
}

/// Water vapour partial pressure in hPa from air temperature (°C) and
/// relative humidity (%), Magnus form over water.
pub fn vapor_pressure(temperature_c: f64, rh_pct: f64) -> f64 {
    rh_pct / 100.0 * 6.1094 * (17.625 * temperature_c / (temperature_c + 243.04)).exp()
}

pub fn pmv(temperature_c: f64, vapor_pressure_hpa: f64, k: PmvCoefficients) -> f64 {
    k.a * temperature_c + k.b * vapor_pressure_hpa - k.c
}

/// Tier of one comfort metric. An undefined ratio (no data) is Fail.
pub fn classify_metric(ratio: Option<f64>, bands: &ComfortBands, metric: Metric) -> Tier {
    match (ratio, bands.for_metric(metric)) {
        (Some(r), Some(b)) => b.classify(r),
        _ => Tier::Fail,
    }
}

/// Facility-manager payout level from the temperature, humidity and CO2
/// tiers: two greens pay in full, otherwise two reds pay nothing,
/// otherwise the reduced rate. Order of the tiers does not matter.
pub fn fm_tier(tiers: [Tier; 3]) -> Tier {
    let greens = tiers.iter().filter(|t| **t == Tier::Full).count();
    let reds = tiers.iter().filter(|t| **t == Tier::Fail).count();
    if greens >= 2 {
        Tier::Full
    } else if reds >= 2 {
        Tier::Fail
    } else {
        Tier::Reduced
    }
}

pub fn fm_reward(tiers: [Tier; 3], reduced: Fraction) -> Fraction {
    fm_tier(tiers).fraction(reduced)
}

/// Contractor tier; an undefined energy or temperature ratio yields
/// Reduced.
pub fn contractor_tier(ep: Option<f64>, tc_t: Option<f64>, policy: &ContractorPolicy) -> Tier {
    match (ep, tc_t) {
        (Some(ep), Some(tc)) => policy.tier(ep, tc),
        _ => Tier::Reduced,
    }
}

pub fn contractor_reward(
    ep: Option<f64>,
    tc_t: Option<f64>,
    policy: &ContractorPolicy,
    reduced: Fraction,
) -> Fraction {
    contractor_tier(ep, tc_t, policy).fraction(reduced)
}

/// Arithmetic mean; `None` for an empty slice.
pub fn interval_average(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        None
    } else {
        Some(samples.iter().sum::<f64>() / samples.len() as f64)
    }
}
