// SPDX-License-Identifier: Apache-2.0

//! Gas-metered account ledger with an append-only transaction log.
//!
//! Every interaction with the performance contract is a [`Call`] submitted
//! through [`Ledger::submit`]. The fee (`gas × gas_price`) moves from the
//! sender to the fee sink whether or not the contract accepts the call;
//! a rejected call changes nothing else.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::contract::{Call, CallOutput, PerformanceContract, Rejection, Transfer};
use crate::units::{amount_str, Amount, GIGA};

/// Opaque 32-byte account identifier, rendered as lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address([u8; 32]);

impl Address {
    pub const ZERO: Address = Address([0; 32]);

    pub const fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// Deterministic address for `(domain, n)`.
    pub fn derive(domain: &str, n: u64) -> Self {
        let mut h = Sha256::new();
        h.update(domain.as_bytes());
        h.update([0u8]);
        h.update(n.to_be_bytes());
        Self(h.finalize().into())
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 32]
    }

    pub fn short(&self) -> String {
        hex::encode(&self.0[..4])
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({})", self.short())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid address `{0}`: expected 64 hex characters")]
pub struct ParseAddressError(pub String);

impl FromStr for Address {
    type Err = ParseAddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.strip_prefix("0x").unwrap_or(s);
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|_| ParseAddressError(s.to_string()))?;
        Ok(Self(out))
    }
}

impl Serialize for Address {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// SHA-256 digest, rendered as lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateDigest(pub [u8; 32]);

impl StateDigest {
    /// Digest of the canonical JSON encoding of `value`.
    pub fn of<T: Serialize + ?Sized>(value: &T) -> Self {
        let bytes = serde_json::to_vec(value).expect("state is always serializable");
        Self(Sha256::digest(&bytes).into())
    }
}

impl fmt::Display for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateDigest({self})")
    }
}

impl Serialize for StateDigest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TxKind {
    Deploy,
    AddRole,
    CreateCase,
    FundEscrow,
    RegisterBackend,
    SubmitMeasurement,
    EvaluateInterval,
    Redeem,
    ReleaseEscrow,
    Deactivate,
}

impl TxKind {
    pub const ALL: [TxKind; 10] = [
        TxKind::Deploy,
        TxKind::AddRole,
        TxKind::CreateCase,
        TxKind::FundEscrow,
        TxKind::RegisterBackend,
        TxKind::SubmitMeasurement,
        TxKind::EvaluateInterval,
        TxKind::Redeem,
        TxKind::ReleaseEscrow,
        TxKind::Deactivate,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            TxKind::Deploy => "Deploy",
            TxKind::AddRole => "AddRole",
            TxKind::CreateCase => "CreateCase",
            TxKind::FundEscrow => "FundEscrow",
            TxKind::RegisterBackend => "RegisterBackend",
            TxKind::SubmitMeasurement => "SubmitMeasurement",
            TxKind::EvaluateInterval => "EvaluateInterval",
            TxKind::Redeem => "Redeem",
            TxKind::ReleaseEscrow => "ReleaseEscrow",
            TxKind::Deactivate => "Deactivate",
        }
    }
}

impl fmt::Display for TxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Flat gas cost per transaction kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasSchedule(BTreeMap<TxKind, u64>);

impl Default for GasSchedule {
    /// Deployment and measurement costs follow the reference test run; case
    /// registration and window evaluation are the next most expensive calls,
    /// everything else is cheap.
    fn default() -> Self {
        let mut m = BTreeMap::new();
        for k in TxKind::ALL {
            m.insert(k, 150_000);
        }
        m.insert(TxKind::Deploy, 4_249_797);
        m.insert(TxKind::SubmitMeasurement, 360_000);
        m.insert(TxKind::CreateCase, 4_000_000);
        m.insert(TxKind::EvaluateInterval, 4_000_000);
        GasSchedule(m)
    }
}

impl GasSchedule {
    pub fn new(entries: BTreeMap<TxKind, u64>) -> Result<Self, LedgerError> {
        let s = GasSchedule(entries);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        for k in TxKind::ALL {
            match self.0.get(&k) {
                Some(&g) if g > 0 => {}
                _ => return Err(LedgerError::InvalidGasSchedule(k)),
            }
        }
        Ok(())
    }

    pub fn gas(&self, kind: TxKind) -> u64 {
        self.0[&kind]
    }

    pub fn set(&mut self, kind: TxKind, gas: u64) -> Result<(), LedgerError> {
        if gas == 0 {
            return Err(LedgerError::InvalidGasSchedule(kind));
        }
        self.0.insert(kind, gas);
        Ok(())
    }

    pub fn entries(&self) -> &BTreeMap<TxKind, u64> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum TxStatus {
    Accepted,
    Rejected(Rejection),
}

impl TxStatus {
    pub fn is_accepted(&self) -> bool {
        matches!(self, TxStatus::Accepted)
    }
}

impl fmt::Display for TxStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TxStatus::Accepted => f.write_str("accepted"),
            TxStatus::Rejected(r) => write!(f, "rejected({})", r.code()),
        }
    }
}

/// A logged transaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transaction {
    pub seq: u64,
    pub kind: TxKind,
    pub sender: Address,
    pub call: Call,
    /// Value movements the call caused, in execution order.
    pub transfers: Vec<Transfer>,
    pub gas_used: u64,
    #[serde(with = "amount_str")]
    pub gas_price: Amount,
    pub timestamp: u64,
    #[serde(flatten)]
    pub status: TxStatus,
}

impl Transaction {
    pub fn fee(&self) -> Amount {
        u128::from(self.gas_used) * self.gas_price
    }

    /// `seq,kind,sender,gas_used,fee,status,timestamp`
    pub fn export_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.seq,
            self.kind,
            self.sender,
            self.gas_used,
            self.fee(),
            self.status,
            self.timestamp
        )
    }
}

pub const LOG_HEADER: &str = "seq,kind,sender,gas_used,fee,status,timestamp";

#[derive(Debug, Clone, PartialEq)]
pub struct Receipt {
    pub seq: u64,
    pub kind: TxKind,
    pub status: TxStatus,
    pub gas_used: u64,
    pub fee: Amount,
    pub output: CallOutput,
}

impl Receipt {
    pub fn is_accepted(&self) -> bool {
        self.status.is_accepted()
    }

    pub fn rejection(&self) -> Option<&Rejection> {
        match &self.status {
            TxStatus::Rejected(r) => Some(r),
            TxStatus::Accepted => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("unknown sender {0}")]
    UnknownSender(Address),
    #[error("sender {sender} cannot pay fee {fee} (balance {balance})")]
    InsufficientFunds { sender: Address, fee: Amount, balance: Amount },
    #[error("setup phase closed: accounts created after deployment must start empty")]
    SetupClosed,
    #[error("clock cannot move backwards from {now} to {requested}")]
    ClockRegression { now: u64, requested: u64 },
    #[error("gas schedule entry for {0} missing or zero")]
    InvalidGasSchedule(TxKind),
    #[error("replay diverged at seq {0}")]
    ReplayDiverged(u64),
}

/// Account balances. The contract moves value only through this type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accounts(#[serde(with = "crate::units::amount_map_str")] BTreeMap<Address, Amount>);

impl Accounts {
    pub fn contains(&self, a: &Address) -> bool {
        self.0.contains_key(a)
    }

    pub fn balance(&self, a: &Address) -> Option<Amount> {
        self.0.get(a).copied()
    }

    pub fn total(&self) -> Amount {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, &Amount)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Debits `amount`; returns `false` and changes nothing if the account
    /// is unknown or short.
    #[must_use]
    pub fn debit(&mut self, a: &Address, amount: Amount) -> bool {
        match self.0.get_mut(a) {
            Some(b) if *b >= amount => {
                *b -= amount;
                true
            }
            _ => false,
        }
    }

    /// Credits `amount`; returns `false` if the account is unknown.
    #[must_use]
    pub fn credit(&mut self, a: &Address, amount: Amount) -> bool {
        match self.0.get_mut(a) {
            Some(b) => {
                *b += amount;
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, a: Address, balance: Amount) {
        self.0.insert(a, balance);
    }
}

/// Account creation record, kept so the log can be replayed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenesisEntry {
    pub address: Address,
    #[serde(with = "amount_str")]
    pub balance: Amount,
    /// Log length when the account was created.
    pub at_seq: u64,
}

/// Per-transaction conservation audit results.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checked: u64,
    /// Sequence numbers after which a conservation check failed.
    pub violations: Vec<u64>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const DEFAULT_GAS_PRICE: Amount = 20 * GIGA;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ledger {
    genesis: Vec<GenesisEntry>,
    accounts: Accounts,
    #[serde(with = "amount_str")]
    fee_sink: Amount,
    #[serde(with = "amount_str")]
    supply: Amount,
    log: Vec<Transaction>,
    gas_schedule: GasSchedule,
    #[serde(with = "amount_str")]
    gas_price: Amount,
    clock: u64,
    setup_open: bool,
    contract: Option<PerformanceContract>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    audit: Option<AuditReport>,
}

impl Default for Ledger {
    fn default() -> Self {
        Self::new(GasSchedule::default(), DEFAULT_GAS_PRICE)
    }
}

impl Ledger {
    pub fn new(gas_schedule: GasSchedule, gas_price: Amount) -> Self {
        Self {
            genesis: Vec::new(),
            accounts: Accounts::default(),
            fee_sink: 0,
            supply: 0,
            log: Vec::new(),
            gas_schedule,
            gas_price,
            clock: 0,
            setup_open: true,
            contract: None,
            audit: None,
        }
    }

    pub fn create_account(&mut self, initial_balance: Amount) -> Result<Address, LedgerError> {
        if initial_balance > 0 && !self.setup_open {
            return Err(LedgerError::SetupClosed);
        }
        let address = Address::derive("account", self.genesis.len() as u64);
        self.accounts.insert(address, initial_balance);
        self.supply += initial_balance;
        self.genesis.push(GenesisEntry {
            address,
            balance: initial_balance,
            at_seq: self.log.len() as u64,
        });
        Ok(address)
    }

    /// Moves the logical clock forward; the next transaction is stamped
    /// with it.
    pub fn advance_clock(&mut self, to: u64) -> Result<(), LedgerError> {
        if to < self.clock {
            return Err(LedgerError::ClockRegression { now: self.clock, requested: to });
        }
        self.clock = to;
        Ok(())
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn fee_for(&self, kind: TxKind) -> Amount {
        u128::from(self.gas_schedule.gas(kind)) * self.gas_price
    }

    pub fn submit(&mut self, sender: Address, call: Call) -> Result<Receipt, LedgerError> {
        let balance = self
            .accounts
            .balance(&sender)
            .ok_or(LedgerError::UnknownSender(sender))?;
        let kind = call.kind();
        let gas_used = self.gas_schedule.gas(kind);
        let fee = u128::from(gas_used) * self.gas_price;
        if balance < fee {
            return Err(LedgerError::InsufficientFunds { sender, fee, balance });
        }
        let debited = self.accounts.debit(&sender, fee);
        debug_assert!(debited);
        self.fee_sink += fee;

        let seq = self.log.len() as u64;
        let now = self.clock;
        let result = match (&call, self.contract.as_mut()) {
            (Call::Deploy, None) => {
                let address = Address::derive("contract", seq);
                self.contract = Some(PerformanceContract::deploy(sender, address));
                self.setup_open = false;
                Ok((CallOutput::Deployed(address), Vec::new()))
            }
            (Call::Deploy, Some(_)) => Err(Rejection::AlreadyDeployed),
            (_, None) => Err(Rejection::NoContract),
            (_, Some(c)) => c.execute(&mut self.accounts, sender, now, &call),
        };
        let (status, output, transfers) = match result {
            Ok((out, transfers)) => (TxStatus::Accepted, out, transfers),
            Err(r) => (TxStatus::Rejected(r), CallOutput::None, Vec::new()),
        };
        self.log.push(Transaction {
            seq,
            kind,
            sender,
            call,
            transfers,
            gas_used,
            gas_price: self.gas_price,
            timestamp: now,
            status: status.clone(),
        });
        let ok = self.audit.as_ref().map(|_| self.conservation_holds());
        if let (Some(ok), Some(audit)) = (ok, self.audit.as_mut()) {
            audit.checked += 1;
            if !ok {
                audit.violations.push(seq);
            }
        }
        Ok(Receipt { seq, kind, status, gas_used, fee, output })
    }

    /// Turns on a conservation check after every subsequent transaction.
    pub fn enable_audit(&mut self) {
        self.audit.get_or_insert_with(AuditReport::default);
    }

    pub fn audit_report(&self) -> Option<&AuditReport> {
        self.audit.as_ref()
    }

    /// Ledger-wide and contract escrow conservation, exact.
    pub fn conservation_holds(&self) -> bool {
        let held = self.contract.as_ref().map_or(0, |c| c.holdings());
        let ledger_ok = self.accounts.total() + self.fee_sink + held == self.supply;
        let escrow_ok = self.contract.as_ref().is_none_or(|c| c.escrow_conserved());
        ledger_ok && escrow_ok
    }

    /// `(total_gas, per-kind gas)` over every logged transaction.
    pub fn gas_totals(&self) -> (u64, BTreeMap<TxKind, u64>) {
        gas_totals(&self.log)
    }

    pub fn balance(&self, a: &Address) -> Option<Amount> {
        self.accounts.balance(a)
    }

    pub fn accounts(&self) -> &Accounts {
        &self.accounts
    }

    pub fn fee_sink(&self) -> Amount {
        self.fee_sink
    }

    pub fn supply(&self) -> Amount {
        self.supply
    }

    pub fn log(&self) -> &[Transaction] {
        &self.log
    }

    pub fn genesis(&self) -> &[GenesisEntry] {
        &self.genesis
    }

    pub fn gas_schedule(&self) -> &GasSchedule {
        &self.gas_schedule
    }

    pub fn gas_price(&self) -> Amount {
        self.gas_price
    }

    pub fn contract(&self) -> Option<&PerformanceContract> {
        self.contract.as_ref()
    }

    /// Hash over accounts (sorted), fee sink, log and contract state.
    pub fn state_digest(&self) -> StateDigest {
        #[derive(Serialize)]
        struct View<'a> {
            accounts: &'a Accounts,
            #[serde(with = "amount_str")]
            fee_sink: Amount,
            log: &'a [Transaction],
            contract: Option<StateDigest>,
        }
        StateDigest::of(&View {
            accounts: &self.accounts,
            fee_sink: self.fee_sink,
            log: &self.log,
            contract: self.contract.as_ref().map(|c| c.state_digest()),
        })
    }

    /// Re-executes the log against a fresh ledger with the same genesis.
    pub fn replay(&self) -> Result<Ledger, LedgerError> {
        let mut fresh = Ledger::new(self.gas_schedule.clone(), self.gas_price);
        let mut pending = self.genesis.iter().peekable();
        for tx in &self.log {
            while let Some(g) = pending.next_if(|g| g.at_seq <= tx.seq) {
                let a = fresh.create_account(g.balance)?;
                if a != g.address {
                    return Err(LedgerError::ReplayDiverged(tx.seq));
                }
            }
            fresh.advance_clock(tx.timestamp)?;
            fresh.submit(tx.sender, tx.call.clone())?;
            if fresh.log.last() != Some(tx) {
                return Err(LedgerError::ReplayDiverged(tx.seq));
            }
        }
        for g in pending {
            fresh.create_account(g.balance)?;
        }
        fresh.clock = self.clock;
        Ok(fresh)
    }

    /// Log in `seq,kind,sender,gas_used,fee,status,timestamp` lines, with
    /// header.
    pub fn export_log(&self) -> String {
        let mut out = String::with_capacity(64 * (self.log.len() + 1));
        out.push_str(LOG_HEADER);
        out.push('\n');
        for tx in &self.log {
            out.push_str(&tx.export_line());
            out.push('\n');
        }
        out
    }
}

pub fn gas_totals(log: &[Transaction]) -> (u64, BTreeMap<TxKind, u64>) {
    let mut by_kind: BTreeMap<TxKind, u64> = TxKind::ALL.iter().map(|k| (*k, 0)).collect();
    let mut total = 0;
    for tx in log {
        *by_kind.get_mut(&tx.kind).expect("all kinds present") += tx.gas_used;
        total += tx.gas_used;
    }
    (total, by_kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::Role;
    use crate::units::COIN;

    #[test]
    fn create_account_examples() {
        let mut l = Ledger::default();
        let a = l.create_account(0).unwrap();
        assert_eq!(l.balance(&a), Some(0));
        let b = l.create_account(COIN).unwrap();
        assert_eq!(l.balance(&b), Some(1_000_000_000_000_000_000));
        assert_ne!(a.as_bytes(), b.as_bytes());
    }

    #[test]
    fn setup_closes_at_deploy() {
        let mut l = Ledger::default();
        let a = l.create_account(COIN).unwrap();
        l.submit(a, Call::Deploy).unwrap();
        assert_eq!(l.create_account(1), Err(LedgerError::SetupClosed));
        assert!(l.create_account(0).is_ok());
    }

    #[test]
    fn fee_arithmetic() {
        let mut gs = GasSchedule::default();
        gs.set(TxKind::AddRole, 21_000).unwrap();
        let mut l = Ledger::new(gs, 20 * GIGA);
        let a = l.create_account(COIN).unwrap();
        let b = l.create_account(0).unwrap();
        l.submit(a, Call::Deploy).unwrap();
        let r = l
            .submit(a, Call::AddRole { grantee: b, role: Role::BuildingOwner })
            .unwrap();
        assert!(r.is_accepted());
        assert_eq!(r.fee, 420_000 * GIGA);
    }

    #[test]
    fn rejected_call_still_pays_fee() {
        let mut l = Ledger::default();
        let owner = l.create_account(COIN).unwrap();
        let other = l.create_account(COIN).unwrap();
        l.submit(owner, Call::Deploy).unwrap();
        let before = l.contract().unwrap().state_digest();
        let r = l
            .submit(other, Call::AddRole { grantee: other, role: Role::Contractor })
            .unwrap();
        assert_eq!(r.rejection(), Some(&Rejection::Unauthorized));
        assert_eq!(l.balance(&other), Some(COIN - l.fee_for(TxKind::AddRole)));
        assert_eq!(l.contract().unwrap().state_digest(), before);
        assert_eq!(l.log().len(), 2);
        assert!(l.conservation_holds());
    }

    #[test]
    fn short_balance_is_not_logged() {
        let mut l = Ledger::default();
        let poor = l.create_account(1).unwrap();
        let err = l.submit(poor, Call::Deploy).unwrap_err();
        assert!(matches!(err, LedgerError::InsufficientFunds { .. }));
        assert!(l.log().is_empty());
        let ghost = Address::derive("nobody", 7);
        assert_eq!(l.submit(ghost, Call::Deploy), Err(LedgerError::UnknownSender(ghost)));
    }

    #[test]
    fn gas_totals_examples() {
        let mut l = Ledger::default();
        let (t, by) = l.gas_totals();
        assert_eq!(t, 0);
        assert!(by.values().all(|g| *g == 0));
        let a = l.create_account(10 * COIN).unwrap();
        l.submit(a, Call::Deploy).unwrap();
        let (t, by) = l.gas_totals();
        assert_eq!(t, 4_249_797);
        assert_eq!(by.values().sum::<u64>(), t);
    }

    #[test]
    fn deploy_twice_rejected() {
        let mut l = Ledger::default();
        let a = l.create_account(10 * COIN).unwrap();
        assert!(l.submit(a, Call::Deploy).unwrap().is_accepted());
        let r = l.submit(a, Call::Deploy).unwrap();
        assert_eq!(r.rejection(), Some(&Rejection::AlreadyDeployed));
    }

    #[test]
    fn clock_is_monotone() {
        let mut l = Ledger::default();
        l.advance_clock(10).unwrap();
        assert!(l.advance_clock(9).is_err());
        l.advance_clock(10).unwrap();
    }

    #[test]
    fn address_hex_round_trip() {
        let a = Address::derive("account", 3);
        let s = a.to_string();
        assert_eq!(s.len(), 64);
        assert_eq!(s.parse::<Address>().unwrap(), a);
        assert_eq!(format!("0x{s}").parse::<Address>().unwrap(), a);
        assert!("abc".parse::<Address>().is_err());
    }

    #[test]
    fn default_schedule_is_complete() {
        GasSchedule::default().validate().unwrap();
        let mut m = GasSchedule::default().entries().clone();
        m.remove(&TxKind::Redeem);
        assert_eq!(GasSchedule::new(m), Err(LedgerError::InvalidGasSchedule(TxKind::Redeem)));
    }

    #[test]
    fn export_line_format() {
        let mut l = Ledger::default();
        let a = l.create_account(10 * COIN).unwrap();
        l.advance_clock(42).unwrap();
        l.submit(a, Call::Deploy).unwrap();
        let text = l.export_log();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(LOG_HEADER));
        let fee = 4_249_797u128 * 20 * GIGA;
        assert_eq!(lines.next().unwrap(), format!("0,Deploy,{a},4249797,{fee},accepted,42"));
    }
}
