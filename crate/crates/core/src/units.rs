// SPDX-License-Identifier: Apache-2.0

//! Exact number types: three-decimal fixed point for sensor values, token
//! amounts in base units, reward fractions, and scaled decimals for prices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Token base units per coin.
pub const COIN: u128 = 1_000_000_000_000_000_000;
/// Token base units per gigaunit.
pub const GIGA: u128 = 1_000_000_000;

/// Token amount in base units.
pub type Amount = u128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseNumberError {
    #[error("empty number")]
    Empty,
    #[error("invalid number `{0}`")]
    Invalid(String),
    #[error("`{0}` has more than {1} fractional digits")]
    TooPrecise(String, u32),
    #[error("`{0}` is out of range")]
    Overflow(String),
    #[error("fraction `{0}` must be num/den with 0 < num < den")]
    Fraction(String),
}

/// Signed fixed-point value with three fractional digits, stored in
/// thousandths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Milli(i64);

impl Milli {
    pub const fn from_thousandths(raw: i64) -> Self {
        Self(raw)
    }

    pub const fn from_int(v: i64) -> Self {
        Self(v * 1000)
    }

    pub const fn thousandths(self) -> i64 {
        self.0
    }

    /// Rounds half away from zero. Returns `None` for non-finite input or
    /// values outside the representable range.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        let scaled = (v * 1000.0).round();
        if scaled.abs() >= 9.0e15 {
            return None;
        }
        Some(Self(scaled as i64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl fmt::Display for Milli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:03}", abs / 1000, abs % 1000)
    }
}

impl FromStr for Milli {
    type Err = ParseNumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let d = parse_unsigned_scaled(body, 3).map_err(|e| relabel(e, s))?;
        let raw = i64::try_from(d).map_err(|_| ParseNumberError::Overflow(s.to_string()))?;
        Ok(Self(if negative { -raw } else { raw }))
    }
}

impl Serialize for Milli {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Milli {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn relabel(e: ParseNumberError, full: &str) -> ParseNumberError {
    match e {
        ParseNumberError::Invalid(_) => ParseNumberError::Invalid(full.to_string()),
        ParseNumberError::TooPrecise(_, n) => ParseNumberError::TooPrecise(full.to_string(), n),
        ParseNumberError::Overflow(_) => ParseNumberError::Overflow(full.to_string()),
        other => other,
    }
}

/// Parses an unsigned decimal with at most `scale` fractional digits into
/// an integer scaled by `10^scale`.
fn parse_unsigned_scaled(s: &str, scale: u32) -> Result<u128, ParseNumberError> {
    if s.is_empty() {
        return Err(ParseNumberError::Empty);
    }
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let digits_only = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if (int.is_empty() && frac.is_empty()) || !digits_only(int) || !digits_only(frac) {
        return Err(ParseNumberError::Invalid(s.to_string()));
    }
    if s.ends_with('.') {
        return Err(ParseNumberError::Invalid(s.to_string()));
    }
    if frac.len() as u32 > scale {
        return Err(ParseNumberError::TooPrecise(s.to_string(), scale));
    }
    let overflow = || ParseNumberError::Overflow(s.to_string());
    let mut acc: u128 = 0;
    for b in int.bytes().chain(frac.bytes()) {
        acc = acc
            .checked_mul(10)
            .and_then(|v| v.checked_add(u128::from(b - b'0')))
            .ok_or_else(overflow)?;
    }
    let pad = 10u128.pow(scale - frac.len() as u32);
    acc.checked_mul(pad).ok_or_else(overflow)
}

/// Non-negative decimal held as `mantissa / 10^scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decimal {
    mantissa: u128,
    scale: u32,
}

impl Decimal {
    pub const MAX_SCALE: u32 = 18;

    pub const fn new(mantissa: u128, scale: u32) -> Self {
        Self { mantissa, scale }
    }

    pub const fn mantissa(self) -> u128 {
        self.mantissa
    }

    pub const fn scale(self) -> u32 {
        self.scale
    }

    /// Value rescaled to `scale` fractional digits, rounding half up.
    pub fn rescaled(self, scale: u32) -> u128 {
        rescale(self.mantissa, self.scale, scale)
    }

    pub fn to_f64(self) -> f64 {
        self.mantissa as f64 / 10f64.powi(self.scale as i32)
    }
}

/// Rescales an integer `value / 10^from` to `10^to`, rounding half up.
pub fn rescale(value: u128, from: u32, to: u32) -> u128 {
    if to >= from {
        value * 10u128.pow(to - from)
    } else {
        let div = 10u128.pow(from - to);
        (value + div / 2) / div
    }
}

/// Renders `value / 10^scale` with exactly `scale` fractional digits.
pub fn format_scaled(value: u128, scale: u32) -> String {
    if scale == 0 {
        return value.to_string();
    }
    let div = 10u128.pow(scale);
    format!("{}.{:0width$}", value / div, value % div, width = scale as usize)
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_scaled(self.mantissa, self.scale))
    }
}

impl FromStr for Decimal {
    type Err = ParseNumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let frac_len = s.split_once('.').map_or(0, |(_, f)| f.len() as u32);
        if frac_len > Self::MAX_SCALE {
            return Err(ParseNumberError::TooPrecise(s.to_string(), Self::MAX_SCALE));
        }
        let mantissa = parse_unsigned_scaled(s, frac_len)?;
        Ok(Self { mantissa, scale: frac_len })
    }
}

impl Serialize for Decimal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rational payout fraction `num / den` with `0 <= num <= den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };
    pub const HALF: Fraction = Fraction { num: 1, den: 2 };

    /// A strictly-between-zero-and-one fraction, as required for the
    /// reduced payout level.
    pub fn proper(num: u64, den: u64) -> Option<Self> {
        (num > 0 && den > 0 && num < den).then_some(Self { num, den })
    }

    pub const fn num(self) -> u64 {
        self.num
    }

    pub const fn den(self) -> u64 {
        self.den
    }

    /// `floor(self × amount)`, exact.
    pub fn apply_floor(self, amount: Amount) -> Amount {
        amount * u128::from(self.num) / u128::from(self.den)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Fraction {
    type Err = ParseNumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseNumberError::Fraction(s.to_string());
        match s.trim() {
            "0" => return Ok(Self::ZERO),
            "1" => return Ok(Self::ONE),
            _ => {}
        }
        let (n, d) = s.trim().split_once('/').ok_or_else(bad)?;
        let num = n.trim().parse().map_err(|_| bad())?;
        let den = d.trim().parse().map_err(|_| bad())?;
        Self::proper(num, den).ok_or_else(bad)
    }
}

impl Serialize for Fraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing `u128` amounts as decimal strings so JSON readers
/// without big-integer support keep every digit.
pub mod amount_str {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Num(u64),
        }
        match Repr::deserialize(d)? {
            Repr::Str(s) => s.trim().parse().map_err(serde::de::Error::custom),
            Repr::Num(n) => Ok(u128::from(n)),
        }
    }
}

/// Same as [`amount_str`] for maps keyed by a serializable key.
pub mod amount_map_str {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<K, S>(m: &BTreeMap<K, u128>, s: S) -> Result<S::Ok, S::Error>
    where
        K: Serialize + Ord,
        S: Serializer,
    {
        let as_str: BTreeMap<&K, String> = m.iter().map(|(k, v)| (k, v.to_string())).collect();
        as_str.serialize(s)
    }

    pub fn deserialize<'de, K, D>(d: D) -> Result<BTreeMap<K, u128>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        D: Deserializer<'de>,
    {
        let raw = BTreeMap::<K, String>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| v.parse().map(|v| (k, v)).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn milli_parse_and_display() {
        assert_eq!("21".parse::<Milli>().unwrap(), Milli::from_int(21));
        assert_eq!("21.5".parse::<Milli>().unwrap().thousandths(), 21_500);
        assert_eq!("-3.25".parse::<Milli>().unwrap().thousandths(), -3_250);
        assert_eq!("0.001".parse::<Milli>().unwrap().thousandths(), 1);
        assert_eq!(Milli::from_thousandths(-3_250).to_string(), "-3.250");
        assert_eq!(Milli::from_thousandths(5).to_string(), "0.005");
        assert_eq!(Milli::from_thousandths(-5).to_string(), "-0.005");
    }

    #[test]
    fn milli_rejects_bad_input() {
        for bad in ["", "abc", "1.2345", "1e5", "NaN", "1.", ".", "--1", "1,5"] {
            assert!(bad.parse::<Milli>().is_err(), "{bad}");
        }
        assert_eq!(".5".parse::<Milli>().unwrap().thousandths(), 500);
    }

    #[test]
    fn milli_from_f64_rounds() {
        assert_eq!(Milli::from_f64(21.0004).unwrap().thousandths(), 21_000);
        assert_eq!(Milli::from_f64(21.0006).unwrap().thousandths(), 21_001);
        assert_eq!(Milli::from_f64(-0.0005).unwrap().thousandths(), -1);
        assert!(Milli::from_f64(f64::NAN).is_none());
        assert!(Milli::from_f64(f64::INFINITY).is_none());
    }

    #[test]
    fn decimal_parse_and_rescale() {
        let d: Decimal = "89.8".parse().unwrap();
        assert_eq!((d.mantissa(), d.scale()), (898, 1));
        assert_eq!(d.rescaled(9), 89_800_000_000);
        assert_eq!(d.to_string(), "89.8");
        assert_eq!(rescale(413_275_042, 7, 4), 413_275);
        assert_eq!(rescale(15, 1, 0), 2);
        assert_eq!(format_scaled(413_275, 4), "41.3275");
        assert!("1.0000000000000000001".parse::<Decimal>().is_err());
        assert!("-1".parse::<Decimal>().is_err());
    }

    #[test]
    fn fraction_floor_is_exact() {
        let third = Fraction::proper(1, 3).unwrap();
        assert_eq!(third.apply_floor(10), 3);
        assert_eq!(Fraction::ONE.apply_floor(7), 7);
        assert_eq!(Fraction::ZERO.apply_floor(7), 0);
        assert_eq!("1/2".parse::<Fraction>().unwrap(), Fraction::HALF);
        assert!("2/2".parse::<Fraction>().is_err());
        assert!("0/2".parse::<Fraction>().is_err());
        assert!(Fraction::proper(3, 2).is_none());
    }
}
