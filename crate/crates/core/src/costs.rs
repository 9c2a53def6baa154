// SPDX-License-Identifier: Apache-2.0

//! Gas and fiat cost reporting over a transaction log.
//!
//! All money stays in integers until the final formatting step: gas price
//! in base units per gas (price in gigaunits × 10^9), coin cost in base
//! units (10^18 per coin), fiat cost in cents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{gas_totals, Transaction, TxKind};
use crate::units::{format_scaled, rescale, Amount, Decimal};

/// Fixed-point digits of coin amounts in base units.
const COIN_DIGITS: u32 = 18;
const GIGA_DIGITS: u32 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("gas price {0} has more than 9 fractional digits")]
    GasPricePrecision(String),
    #[error("fiat rate {0} has more than 18 fractional digits")]
    FiatRatePrecision(String),
    #[error("cost overflows")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindCost {
    pub gas: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub total_gas: u64,
    pub by_kind: BTreeMap<TxKind, KindCost>,
    /// Gigaunits per gas.
    pub gas_price: Decimal,
    /// `total_gas × gas_price` in base units.
    pub coin_cost_base_units: String,
    /// Coins, 4 decimals, rounded half up.
    pub coin_cost: String,
    /// Currency units per coin.
    pub fiat_rate: Decimal,
    /// Currency units, 2 decimals, rounded half up.
    pub fiat_cost: String,
}

fn base_units_per_gas(gas_price: Decimal) -> Result<Amount, CostError> {
    if gas_price.scale() > GIGA_DIGITS {
        return Err(CostError::GasPricePrecision(gas_price.to_string()));
    }
    Ok(rescale(gas_price.mantissa(), gas_price.scale(), GIGA_DIGITS))
}

/// Report from per-kind gas totals.
pub fn cost_from_totals(
    by_kind: &BTreeMap<TxKind, u64>,
    gas_price: Decimal,
    fiat_rate: Decimal,
) -> Result<CostReport, CostError> {
    let total_gas: u64 = by_kind.values().sum();
    let price = base_units_per_gas(gas_price)?;
    let coin_base = u128::from(total_gas).checked_mul(price).ok_or(CostError::Overflow)?;
    if fiat_rate.scale() > COIN_DIGITS {
        return Err(CostError::FiatRatePrecision(fiat_rate.to_string()));
    }
    // base units × rate mantissa carries 18 + rate.scale digits; keep 2
    let fiat_scaled = coin_base.checked_mul(fiat_rate.mantissa()).ok_or(CostError::Overflow)?;
    let cents = rescale(fiat_scaled, COIN_DIGITS + fiat_rate.scale(), 2);
    let by_kind = by_kind
        .iter()
        .map(|(k, g)| {
            let share = if total_gas == 0 { 0.0 } else { *g as f64 / total_gas as f64 };
            (*k, KindCost { gas: *g, share })
        })
        .collect();
    Ok(CostReport {
        total_gas,
        by_kind,
        gas_price,
        coin_cost_base_units: coin_base.to_string(),
        coin_cost: format_scaled(rescale(coin_base, COIN_DIGITS, 4), 4),
        fiat_rate,
        fiat_cost: format_scaled(cents, 2),
    })
}

pub fn cost_report(log: &[Transaction], gas_price: Decimal, fiat_rate: Decimal) -> Result<CostReport, CostError> {
    let (_, by_kind) = gas_totals(log);
    cost_from_totals(&by_kind, gas_price, fiat_rate)
}

impl CostReport {
    pub fn share(&self, kind: TxKind) -> f64 {
        self.by_kind.get(&kind).map_or(0.0, |k| k.share)
    }

    pub fn coin_cost_f64(&self) -> f64 {
        self.coin_cost.parse().unwrap_or(f64::NAN)
    }

    pub fn fiat_cost_f64(&self) -> f64 {
        self.fiat_cost.parse().unwrap_or(f64::NAN)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("kind                       gas    share\n");
        for (k, c) in &self.by_kind {
            out.push_str(&format!("{:<18} {:>13} {:>7.2}%\n", k.name(), c.gas, c.share * 100.0));
        }
        out.push_str(&format!("{:<18} {:>13}\n\n", "total", self.total_gas));
        out.push_str(&format!("gas price   {} gigaunits/gas\n", self.gas_price));
        out.push_str(&format!("coin cost   {}\n", self.coin_cost));
        out.push_str(&format!("fiat rate   {} per coin\n", self.fiat_rate));
        out.push_str(&format!("fiat cost   {}\n", self.fiat_cost));
        out
    }
}
