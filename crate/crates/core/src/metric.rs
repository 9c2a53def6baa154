// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::units::Milli;

/// Kind of physical quantity a sensor reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Room air temperature, °C.
    Temperature,
    /// Relative humidity, %.
    Humidity,
    /// CO2 concentration, ppm.
    Co2,
    /// Heating/cooling energy consumption over the meter interval, kWh.
    Energy,
    /// Set-point temperature, °C. Stored but not evaluated.
    Setpoint,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Temperature,
        Metric::Humidity,
        Metric::Co2,
        Metric::Energy,
        Metric::Setpoint,
    ];

    /// The three indoor-comfort metrics the facility manager is paid on.
    pub const COMFORT: [Metric; 3] = [Metric::Temperature, Metric::Humidity, Metric::Co2];

    pub const fn name(self) -> &'static str {
        match self {
            Metric::Temperature => "temperature",
            Metric::Humidity => "humidity",
            Metric::Co2 => "co2",
            Metric::Energy => "energy",
            Metric::Setpoint => "setpoint",
        }
    }

    /// Inclusive physical bounds in thousandths; `None` means unbounded.
    pub const fn bounds(self) -> (Option<Milli>, Option<Milli>) {
        match self {
            Metric::Temperature | Metric::Setpoint => {
                (Some(Milli::from_int(-50)), Some(Milli::from_int(100)))
            }
            Metric::Humidity => (Some(Milli::from_int(0)), Some(Milli::from_int(100))),
            Metric::Co2 | Metric::Energy => (Some(Milli::from_int(0)), None),
        }
    }

    pub fn in_range(self, v: Milli) -> bool {
        let (lo, hi) = self.bounds();
        lo.is_none_or(|lo| v >= lo) && hi.is_none_or(|hi| v <= hi)
    }

    pub fn clamp_f64(self, v: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let v = lo.map_or(v, |lo| v.max(lo.to_f64()));
        hi.map_or(v, |hi| v.min(hi.to_f64()))
    }

    /// Stable small integer used to derive per-metric random streams.
    pub const fn tag(self) -> u64 {
        match self {
            Metric::Temperature => 1,
            Metric::Humidity => 2,
            Metric::Co2 => 3,
            Metric::Energy => 4,
            Metric::Setpoint => 5,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown metric `{0}`")]
pub struct UnknownMetric(pub String);

impl FromStr for Metric {
    type Err = UnknownMetric;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMetric(s.to_string()))
    }
}
