// SPDX-License-Identifier: Apache-2.0

//! Building performance contracts on a simulated, gas-metered ledger.
//!
//! Sensor readings are submitted by an oracle, aggregated into evaluation
//! windows, scored against baselines, and paid out of escrow to the
//! facility manager and the energy contractor.

pub mod contract;
pub mod costs;
pub mod data;
pub mod exec;
pub mod ledger;
pub mod metric;
pub mod oracle;
pub mod perf;
pub mod scenario;
pub mod seed;
pub mod units;
pub mod workspace;

pub use contract::{
    Call, CallOutput, CaseParams, IntervalResult, LifecycleState, Measurement, PerformanceContract,
    Rejection, Role, CASE_ID,
};
pub use exec::Mode;
pub use ledger::{Address, Ledger, LedgerError, Receipt, StateDigest, Transaction, TxKind};
pub use metric::Metric;
pub use units::{Amount, Milli, COIN, GIGA};
