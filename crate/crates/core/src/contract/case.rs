// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Rejection;
use crate::data::default_sensor_id;
use crate::metric::Metric;
use crate::perf::{Baselines, ComfortBands, ContractorPolicy};
use crate::units::{amount_str, Amount, Fraction, COIN};

pub const DAY: u64 = 86_400;
pub const WEEK: u64 = 7 * DAY;

/// Sensor ids registered per metric.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorRegistry {
    #[serde(default)]
    pub setpoint: Vec<String>,
    pub temperature: Vec<String>,
    pub humidity: Vec<String>,
    pub co2: Vec<String>,
    pub energy: Vec<String>,
}

impl SensorRegistry {
    pub fn ids(&self, metric: Metric) -> &[String] {
        match metric {
            Metric::Temperature => &self.temperature,
            Metric::Humidity => &self.humidity,
            Metric::Co2 => &self.co2,
            Metric::Energy => &self.energy,
            Metric::Setpoint => &self.setpoint,
        }
    }

    pub fn ids_mut(&mut self, metric: Metric) -> &mut Vec<String> {
        match metric {
            Metric::Temperature => &mut self.temperature,
            Metric::Humidity => &mut self.humidity,
            Metric::Co2 => &mut self.co2,
            Metric::Energy => &mut self.energy,
            Metric::Setpoint => &mut self.setpoint,
        }
    }

    pub fn contains(&self, metric: Metric, sensor_id: &str) -> bool {
        self.ids(metric).iter().any(|s| s == sensor_id)
    }

    pub fn len(&self) -> usize {
        Metric::ALL.iter().map(|m| self.ids(*m).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeeSchedule {
    /// Paid to the facility manager per thermal window, scaled by tier.
    #[serde(with = "amount_str")]
    pub fm_fee_per_interval: Amount,
    /// Paid to the contractor per energy window, scaled by tier.
    #[serde(with = "amount_str")]
    pub contractor_fee_per_interval: Amount,
}

fn default_reduced() -> Fraction {
    Fraction::HALF
}

/// Everything fixed when a case is created.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseParams {
    pub building_id: String,
    pub sensors: SensorRegistry,
    pub baselines: Baselines,
    pub fees: FeeSchedule,
    #[serde(default = "default_reduced")]
    pub reduced_fraction: Fraction,
    pub thermal_interval: u64,
    pub energy_interval: u64,
    pub redemption_interval: u64,
    pub duration: u64,
    pub start_time: u64,
    #[serde(default)]
    pub bands: ComfortBands,
    #[serde(default)]
    pub contractor_policy: ContractorPolicy,
}

impl CaseParams {
    /// The two-day demonstration case: four sensors per metric, weekly
    /// energy baseline of 45 kWh, 21 °C / 40 % / 1000 ppm comfort targets,
    /// daily thermal windows and a single redemption at the end.
    pub fn reference(start_time: u64) -> Self {
        let ids = |m: Metric, n: u32| -> Vec<String> { (1..=n).map(|i| default_sensor_id(m, i)).collect() };
        CaseParams {
            building_id: "tz2".to_string(),
            sensors: SensorRegistry {
                setpoint: ids(Metric::Setpoint, 4),
                temperature: ids(Metric::Temperature, 4),
                humidity: ids(Metric::Humidity, 4),
                co2: ids(Metric::Co2, 4),
                energy: ids(Metric::Energy, 1),
            },
            baselines: Baselines::REFERENCE,
            fees: FeeSchedule {
                fm_fee_per_interval: COIN,
                contractor_fee_per_interval: 5 * COIN,
            },
            reduced_fraction: Fraction::HALF,
            thermal_interval: DAY,
            energy_interval: WEEK,
            redemption_interval: 2 * DAY,
            duration: 2 * DAY,
            start_time,
            bands: ComfortBands::default(),
            contractor_policy: ContractorPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Rejection> {
        let invalid = |f: &str| Err(Rejection::InvalidParams(f.to_string()));
        if self.building_id.trim().is_empty() {
            return invalid("building_id");
        }
        self.baselines
            .validate()
            .map_err(|e| Rejection::InvalidBaseline(e.0.to_string()))?;
        for m in [Metric::Temperature, Metric::Humidity, Metric::Co2, Metric::Energy] {
            if self.sensors.ids(m).is_empty() {
                return Err(Rejection::EmptySensorList(m));
            }
        }
        for m in Metric::ALL {
            let ids = self.sensors.ids(m);
            let unique: BTreeSet<&String> = ids.iter().collect();
            let well_formed = ids.iter().all(|s| {
                !s.trim().is_empty() && !s.contains([',', '\n', '\r', '"'])
            });
            if unique.len() != ids.len() || !well_formed {
                return invalid(&format!("sensors.{m}"));
            }
        }
        if self.duration == 0 {
            return invalid("duration");
        }
        if self.thermal_interval == 0 {
            return invalid("thermal_interval");
        }
        if self.energy_interval == 0 {
            return invalid("energy_interval");
        }
        if self.redemption_interval < self.thermal_interval {
            return invalid("redemption_interval");
        }
        if self.start_time.checked_add(self.duration).is_none() {
            return invalid("start_time");
        }
        if Fraction::proper(self.reduced_fraction.num(), self.reduced_fraction.den()).is_none() {
            return invalid("reduced_fraction");
        }
        Ok(())
    }

    pub fn end_time(&self) -> u64 {
        self.start_time + self.duration
    }

    pub fn thermal_windows(&self) -> u64 {
        self.duration.div_ceil(self.thermal_interval)
    }

    pub fn energy_windows(&self) -> u64 {
        self.duration.div_ceil(self.energy_interval)
    }

    /// Full-payout escrow for the whole term.
    pub fn worst_case_escrow(&self) -> Amount {
        u128::from(self.thermal_windows()) * self.fees.fm_fee_per_interval
            + u128::from(self.energy_windows()) * self.fees.contractor_fee_per_interval
    }

    pub fn window_bounds(&self, kind: WindowKind, index: u64) -> (u64, u64) {
        let step = self.interval(kind);
        let begin = self.start_time + index * step;
        (begin, (begin + step).min(self.end_time()))
    }

    pub fn interval(&self, kind: WindowKind) -> u64 {
        match kind {
            WindowKind::Thermal => self.thermal_interval,
            WindowKind::Energy => self.energy_interval,
        }
    }

    pub fn window_count(&self, kind: WindowKind) -> u64 {
        match kind {
            WindowKind::Thermal => self.thermal_windows(),
            WindowKind::Energy => self.energy_windows(),
        }
    }

    /// Window containing `t`, for `start_time <= t < end_time`.
    pub fn window_of(&self, kind: WindowKind, t: u64) -> u64 {
        (t - self.start_time) / self.interval(kind)
    }

    /// Number of windows of `kind` whose end is at or before `now`.
    pub fn closed_windows(&self, kind: WindowKind, now: u64) -> u64 {
        if now >= self.end_time() {
            self.window_count(kind)
        } else if now < self.start_time {
            0
        } else {
            (now - self.start_time) / self.interval(kind)
        }
    }
}

/// Thermal windows pay the facility manager; energy windows pay the
/// contractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Thermal,
    Energy,
}
