// SPDX-License-Identifier: Apache-2.0

//! The performance contract state machine.
//!
//! Lifecycle: `Deployed → CaseCreated → Funded → Active → Completed`, with
//! `Deactivated` reachable from anywhere by the contract owner. Every call
//! checks the caller's role first, then state, then arguments, and mutates
//! only after all checks pass, so a rejected call leaves the contract
//! untouched.
//!
//! Money is tracked in four exact buckets: unallocated `escrow`, per-role
//! `accruals`, per-role `redeemed`, and `refunded` to the building owner.
//! Their sum always equals the funded amount.

pub mod batch;
pub mod case;
pub mod window;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use case::{CaseParams, FeeSchedule, SensorRegistry, WindowKind, DAY, WEEK};
pub use window::{Award, IntervalResult, WindowAccumulator};

use crate::ledger::{Accounts, Address, StateDigest, TxKind};
use crate::metric::Metric;
use crate::perf::Tier;
use crate::units::{amount_map_str, amount_str, Amount, Milli};

pub const CASE_ID: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    ContractOwner,
    BuildingOwner,
    Contractor,
    FacilityManager,
    BackendOracle,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Role::ContractOwner,
        Role::BuildingOwner,
        Role::Contractor,
        Role::FacilityManager,
        Role::BackendOracle,
    ];

    /// Roles that earn rewards.
    pub const PAYEES: [Role; 2] = [Role::FacilityManager, Role::Contractor];
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LifecycleState {
    Deployed,
    CaseCreated,
    Funded,
    Active,
    Completed,
    Deactivated,
}

/// Reason a call was rejected. Each has a stable code used in exports.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum Rejection {
    #[error("caller lacks the required role")]
    Unauthorized,
    #[error("role already assigned")]
    AlreadyAssigned,
    #[error("role cannot be granted this way")]
    InvalidRole,
    #[error("zero address")]
    ZeroAddress,
    #[error("address has no ledger account")]
    UnknownAddress,
    #[error("call not allowed in the current lifecycle state")]
    WrongState,
    #[error("role {0} must be assigned first")]
    MissingRole(Role),
    #[error("invalid baseline `{0}`")]
    InvalidBaseline(String),
    #[error("invalid case parameter `{0}`")]
    InvalidParams(String),
    #[error("no sensors registered for {0}")]
    EmptySensorList(Metric),
    #[error("escrow below worst-case payout")]
    InsufficientEscrow,
    #[error("caller balance too low for the transfer")]
    InsufficientBalance,
    #[error("unknown case")]
    UnknownCase,
    #[error("sensor not registered for this metric")]
    UnknownSensor,
    #[error("value outside the metric's physical range")]
    OutOfRange,
    #[error("timestamp earlier than the last stored for this metric")]
    TimestampRegression,
    #[error("timestamp outside the contract term")]
    OutsideTerm,
    #[error("timestamp later than the current block time")]
    FutureTimestamp,
    #[error("measurement falls in an already evaluated window")]
    StaleMeasurement,
    #[error("no closed windows awaiting evaluation")]
    NothingToEvaluate,
    #[error("closed windows must be evaluated first")]
    PendingEvaluation,
    #[error("redemption interval has not elapsed")]
    RedemptionLocked,
    #[error("contract already deployed")]
    AlreadyDeployed,
    #[error("no contract deployed")]
    NoContract,
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::Unauthorized => "Unauthorized",
            Rejection::AlreadyAssigned => "AlreadyAssigned",
            Rejection::InvalidRole => "InvalidRole",
            Rejection::ZeroAddress => "ZeroAddress",
            Rejection::UnknownAddress => "UnknownAddress",
            Rejection::WrongState => "WrongState",
            Rejection::MissingRole(_) => "MissingRole",
            Rejection::InvalidBaseline(_) => "InvalidBaseline",
            Rejection::InvalidParams(_) => "InvalidParams",
            Rejection::EmptySensorList(_) => "EmptySensorList",
            Rejection::InsufficientEscrow => "InsufficientEscrow",
            Rejection::InsufficientBalance => "InsufficientBalance",
            Rejection::UnknownCase => "UnknownCase",
            Rejection::UnknownSensor => "UnknownSensor",
            Rejection::OutOfRange => "OutOfRange",
            Rejection::TimestampRegression => "TimestampRegression",
            Rejection::OutsideTerm => "OutsideTerm",
            Rejection::FutureTimestamp => "FutureTimestamp",
            Rejection::StaleMeasurement => "StaleMeasurement",
            Rejection::NothingToEvaluate => "NothingToEvaluate",
            Rejection::PendingEvaluation => "PendingEvaluation",
            Rejection::RedemptionLocked => "RedemptionLocked",
            Rejection::AlreadyDeployed => "AlreadyDeployed",
            Rejection::NoContract => "NoContract",
        }
    }
}

/// One stored sensor reading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub case_id: u64,
    pub metric: Metric,
    pub sensor_id: String,
    pub timestamp: u64,
    pub value: Milli,
}

/// Contract call payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "call", rename_all = "snake_case")]
pub enum Call {
    Deploy,
    AddRole {
        grantee: Address,
        role: Role,
    },
    CreateCase {
        params: Box<CaseParams>,
    },
    FundEscrow {
        #[serde(with = "amount_str")]
        amount: Amount,
    },
    RegisterBackend {
        backend: Address,
    },
    SubmitMeasurement {
        measurement: Measurement,
    },
    /// Evaluates every window closed at the current block time.
    EvaluateInterval,
    Redeem,
    ReleaseEscrow,
    Deactivate,
}

impl Call {
    pub fn kind(&self) -> TxKind {
        match self {
            Call::Deploy => TxKind::Deploy,
            Call::AddRole { .. } => TxKind::AddRole,
            Call::CreateCase { .. } => TxKind::CreateCase,
            Call::FundEscrow { .. } => TxKind::FundEscrow,
            Call::RegisterBackend { .. } => TxKind::RegisterBackend,
            Call::SubmitMeasurement { .. } => TxKind::SubmitMeasurement,
            Call::EvaluateInterval => TxKind::EvaluateInterval,
            Call::Redeem => TxKind::Redeem,
            Call::ReleaseEscrow => TxKind::ReleaseEscrow,
            Call::Deactivate => TxKind::Deactivate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub from: Address,
    pub to: Address,
    #[serde(with = "amount_str")]
    pub amount: Amount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CallOutput {
    None,
    Deployed(Address),
    CaseId(u64),
    /// Windows evaluated by this call.
    Evaluated(usize),
    Payout(Amount),
    Refund(Amount),
}

/// Read-only view returned by [`PerformanceContract::status`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatusSnapshot {
    pub case_id: u64,
    pub state: LifecycleState,
    #[serde(with = "amount_str")]
    pub funded: Amount,
    #[serde(with = "amount_str")]
    pub escrow: Amount,
    #[serde(with = "amount_map_str")]
    pub accruals: BTreeMap<Role, Amount>,
    #[serde(with = "amount_map_str")]
    pub redeemed: BTreeMap<Role, Amount>,
    #[serde(with = "amount_str")]
    pub refunded: Amount,
    pub measurements: usize,
    pub evaluated_windows: usize,
    pub thermal_windows_evaluated: u64,
    pub energy_windows_evaluated: u64,
    pub last_thermal_tiers: Option<BTreeMap<Metric, Tier>>,
    pub roles: BTreeMap<Role, Address>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Case {
    id: u64,
    params: CaseParams,
    next_thermal: u64,
    next_energy: u64,
    thermal_acc: WindowAccumulator,
    energy_acc: WindowAccumulator,
    last_timestamp: BTreeMap<Metric, u64>,
    /// Timestamp of the latest accepted redemption per payee role.
    last_redemption: BTreeMap<Role, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceContract {
    address: Address,
    state: LifecycleState,
    roles: BTreeMap<Role, Address>,
    case: Option<Case>,
    #[serde(with = "amount_str")]
    funded: Amount,
    #[serde(with = "amount_str")]
    escrow: Amount,
    #[serde(with = "amount_map_str")]
    accruals: BTreeMap<Role, Amount>,
    #[serde(with = "amount_map_str")]
    redeemed: BTreeMap<Role, Amount>,
    #[serde(with = "amount_str")]
    refunded: Amount,
    measurements: Vec<Measurement>,
    results: Vec<IntervalResult>,
}

type CallResult = Result<(CallOutput, Vec<Transfer>), Rejection>;

impl PerformanceContract {
    pub fn deploy(deployer: Address, address: Address) -> Self {
        let mut roles = BTreeMap::new();
        roles.insert(Role::ContractOwner, deployer);
        Self {
            address,
            state: LifecycleState::Deployed,
            roles,
            case: None,
            funded: 0,
            escrow: 0,
            accruals: Role::PAYEES.iter().map(|r| (*r, 0)).collect(),
            redeemed: Role::PAYEES.iter().map(|r| (*r, 0)).collect(),
            refunded: 0,
            measurements: Vec::new(),
            results: Vec::new(),
        }
    }

    /// Dispatches one call at block time `now`.
    pub fn execute(
        &mut self,
        accounts: &mut Accounts,
        sender: Address,
        now: u64,
        call: &Call,
    ) -> CallResult {
        match call {
            Call::Deploy => Err(Rejection::AlreadyDeployed),
            Call::AddRole { grantee, role } => self.add_role(accounts, sender, *grantee, *role),
            Call::CreateCase { params } => self.create_case(sender, params),
            Call::FundEscrow { amount } => self.fund_escrow(accounts, sender, *amount),
            Call::RegisterBackend { backend } => self.register_backend(accounts, sender, *backend),
            Call::SubmitMeasurement { measurement } => {
                self.submit_measurement(sender, now, measurement)
            }
            Call::EvaluateInterval => self.evaluate_pending(sender, now),
            Call::Redeem => self.redeem(accounts, sender, now),
            Call::ReleaseEscrow => self.release_escrow(accounts, sender, now),
            Call::Deactivate => self.deactivate(accounts, sender),
        }
    }

    /// Whether `addr` currently holds `role`.
    pub fn holds(&self, addr: &Address, role: Role) -> bool {
        self.roles.get(&role) == Some(addr)
    }

    fn require(&self, addr: &Address, role: Role) -> Result<(), Rejection> {
        if self.holds(addr, role) {
            Ok(())
        } else {
            Err(Rejection::Unauthorized)
        }
    }

    fn require_state(&self, state: LifecycleState) -> Result<(), Rejection> {
        if self.state == state {
            Ok(())
        } else {
            Err(Rejection::WrongState)
        }
    }

    fn check_grantee(accounts: &Accounts, grantee: &Address) -> Result<(), Rejection> {
        if grantee.is_zero() {
            Err(Rejection::ZeroAddress)
        } else if !accounts.contains(grantee) {
            Err(Rejection::UnknownAddress)
        } else {
            Ok(())
        }
    }

    fn add_role(
        &mut self,
        accounts: &Accounts,
        caller: Address,
        grantee: Address,
        role: Role,
    ) -> CallResult {
        self.require(&caller, Role::ContractOwner)?;
        if matches!(self.state, LifecycleState::Completed | LifecycleState::Deactivated) {
            return Err(Rejection::WrongState);
        }
        if matches!(role, Role::ContractOwner | Role::BackendOracle) {
            return Err(Rejection::InvalidRole);
        }
        Self::check_grantee(accounts, &grantee)?;
        if self.roles.contains_key(&role) {
            return Err(Rejection::AlreadyAssigned);
        }
        self.roles.insert(role, grantee);
        Ok((CallOutput::None, Vec::new()))
    }

    fn create_case(&mut self, caller: Address, params: &CaseParams) -> CallResult {
        self.require(&caller, Role::ContractOwner)?;
        self.require_state(LifecycleState::Deployed)?;
        params.validate()?;
        let id = self.case.as_ref().map_or(0, |c| c.id) + 1;
        self.case = Some(Case {
            id,
            params: params.clone(),
            next_thermal: 0,
            next_energy: 0,
            thermal_acc: WindowAccumulator::default(),
            energy_acc: WindowAccumulator::default(),
            last_timestamp: BTreeMap::new(),
            last_redemption: BTreeMap::new(),
        });
        self.state = LifecycleState::CaseCreated;
        Ok((CallOutput::CaseId(id), Vec::new()))
    }

    fn fund_escrow(&mut self, accounts: &mut Accounts, caller: Address, amount: Amount) -> CallResult {
        self.require(&caller, Role::BuildingOwner)?;
        self.require_state(LifecycleState::CaseCreated)?;
        let case = self.case.as_ref().ok_or(Rejection::UnknownCase)?;
        if amount < case.params.worst_case_escrow() {
            return Err(Rejection::InsufficientEscrow);
        }
        if !accounts.debit(&caller, amount) {
            return Err(Rejection::InsufficientBalance);
        }
        self.funded = amount;
        self.escrow = amount;
        self.state = LifecycleState::Funded;
        let t = Transfer { from: caller, to: self.address, amount };
        Ok((CallOutput::None, vec![t]))
    }

    fn register_backend(&mut self, accounts: &Accounts, caller: Address, backend: Address) -> CallResult {
        self.require(&caller, Role::ContractOwner)?;
        if self.roles.contains_key(&Role::BackendOracle) {
            return Err(Rejection::AlreadyAssigned);
        }
        self.require_state(LifecycleState::Funded)?;
        Self::check_grantee(accounts, &backend)?;
        for role in Role::PAYEES {
            if !self.roles.contains_key(&role) {
                return Err(Rejection::MissingRole(role));
            }
        }
        self.roles.insert(Role::BackendOracle, backend);
        self.state = LifecycleState::Active;
        Ok((CallOutput::None, Vec::new()))
    }

    fn submit_measurement(&mut self, caller: Address, now: u64, m: &Measurement) -> CallResult {
        self.require(&caller, Role::BackendOracle)?;
        self.require_state(LifecycleState::Active)?;
        let case = self.case.as_ref().ok_or(Rejection::UnknownCase)?;
        if m.case_id != case.id {
            return Err(Rejection::UnknownCase);
        }
        let p = &case.params;
        if !p.sensors.contains(m.metric, &m.sensor_id) {
            return Err(Rejection::UnknownSensor);
        }
        if !m.metric.in_range(m.value) {
            return Err(Rejection::OutOfRange);
        }
        if m.timestamp < p.start_time || m.timestamp >= p.end_time() {
            return Err(Rejection::OutsideTerm);
        }
        if m.timestamp > now {
            return Err(Rejection::FutureTimestamp);
        }
        if case.last_timestamp.get(&m.metric).is_some_and(|last| m.timestamp < *last) {
            return Err(Rejection::TimestampRegression);
        }
        for kind in [WindowKind::Thermal, WindowKind::Energy] {
            if p.window_of(kind, m.timestamp) < p.closed_windows(kind, now) {
                return Err(Rejection::StaleMeasurement);
            }
        }

        self.close_windows(now);
        let case = self.case.as_mut().expect("checked above");
        case.thermal_acc.add(m.metric, m.value);
        case.energy_acc.add(m.metric, m.value);
        case.last_timestamp.insert(m.metric, m.timestamp);
        self.measurements.push(m.clone());
        Ok((CallOutput::None, Vec::new()))
    }

    fn pending_count(&self, now: u64) -> u64 {
        match (&self.case, self.state) {
            (Some(c), LifecycleState::Active) => {
                c.params.closed_windows(WindowKind::Thermal, now) - c.next_thermal
                    + c.params.closed_windows(WindowKind::Energy, now)
                    - c.next_energy
            }
            _ => 0,
        }
    }

    /// Windows closed at `now` but not yet evaluated.
    pub fn pending_windows(&self, now: u64) -> u64 {
        self.pending_count(now)
    }

    /// Evaluates every window whose end is at or before `now`, in
    /// end-time order. Returns how many were evaluated.
    fn close_windows(&mut self, now: u64) -> usize {
        let Some(case) = self.case.as_mut() else { return 0 };
        let p = &case.params;
        let thermal_done = p.closed_windows(WindowKind::Thermal, now);
        let energy_done = p.closed_windows(WindowKind::Energy, now);
        let mut evaluated = 0;
        loop {
            let t = (case.next_thermal < thermal_done)
                .then(|| window::evaluation_order(p, WindowKind::Thermal, case.next_thermal));
            let e = (case.next_energy < energy_done)
                .then(|| window::evaluation_order(p, WindowKind::Energy, case.next_energy));
            let next = match (t, e) {
                (Some(t), Some(e)) => t.min(e),
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => break,
            };
            let (_, kind, index) = next;
            let acc = match kind {
                WindowKind::Thermal => std::mem::take(&mut case.thermal_acc),
                WindowKind::Energy => std::mem::take(&mut case.energy_acc),
            };
            let result = window::evaluate(p, case.id, kind, index, &acc);
            match kind {
                WindowKind::Thermal => case.next_thermal += 1,
                WindowKind::Energy => case.next_energy += 1,
            }
            for (role, award) in [
                (Role::FacilityManager, result.fm),
                (Role::Contractor, result.contractor),
            ] {
                if let Some(a) = award {
                    // funding covers every window at full rate, so this
                    // never truncates
                    let paid = a.reward.min(self.escrow);
                    self.escrow -= paid;
                    *self.accruals.entry(role).or_default() += paid;
                }
            }
            self.results.push(result);
            evaluated += 1;
        }
        evaluated
    }

    fn require_any_role(&self, addr: &Address) -> Result<(), Rejection> {
        if self.roles.values().any(|a| a == addr) {
            Ok(())
        } else {
            Err(Rejection::Unauthorized)
        }
    }

    fn evaluate_pending(&mut self, caller: Address, now: u64) -> CallResult {
        self.require_any_role(&caller)?;
        self.require_state(LifecycleState::Active)?;
        if self.pending_count(now) == 0 {
            return Err(Rejection::NothingToEvaluate);
        }
        let n = self.close_windows(now);
        Ok((CallOutput::Evaluated(n), Vec::new()))
    }

    /// Pays out every payee accrual to its role holder.
    fn settle_accruals(&mut self, accounts: &mut Accounts, transfers: &mut Vec<Transfer>, roles: &[Role]) {
        for role in roles {
            let amount = self.accruals.get(role).copied().unwrap_or(0);
            if amount == 0 {
                continue;
            }
            let Some(to) = self.roles.get(role).copied() else { continue };
            let credited = accounts.credit(&to, amount);
            debug_assert!(credited, "role holders always have accounts");
            self.accruals.insert(*role, 0);
            *self.redeemed.entry(*role).or_default() += amount;
            transfers.push(Transfer { from: self.address, to, amount });
        }
    }

    fn refund_escrow(&mut self, accounts: &mut Accounts, transfers: &mut Vec<Transfer>) -> Amount {
        let amount = self.escrow;
        if amount == 0 {
            return 0;
        }
        let Some(to) = self.roles.get(&Role::BuildingOwner).copied() else { return 0 };
        let credited = accounts.credit(&to, amount);
        debug_assert!(credited, "role holders always have accounts");
        self.escrow = 0;
        self.refunded += amount;
        transfers.push(Transfer { from: self.address, to, amount });
        amount
    }

    fn redeem(&mut self, accounts: &mut Accounts, caller: Address, now: u64) -> CallResult {
        let roles: Vec<Role> = Role::PAYEES
            .into_iter()
            .filter(|r| self.holds(&caller, *r))
            .collect();
        if roles.is_empty() {
            return Err(Rejection::Unauthorized);
        }
        self.require_state(LifecycleState::Active)?;
        let case = self.case.as_ref().ok_or(Rejection::UnknownCase)?;
        let p = &case.params;
        if now < p.start_time + p.redemption_interval && now < p.end_time() {
            return Err(Rejection::RedemptionLocked);
        }
        let mut transfers = Vec::new();
        let before: Amount = roles.iter().map(|r| self.redeemed[r]).sum();
        self.settle_accruals(accounts, &mut transfers, &roles);
        let after: Amount = roles.iter().map(|r| self.redeemed[r]).sum();
        let case = self.case.as_mut().expect("checked above");
        for r in roles {
            case.last_redemption.insert(r, now);
        }
        Ok((CallOutput::Payout(after - before), transfers))
    }

    fn release_escrow(&mut self, accounts: &mut Accounts, caller: Address, now: u64) -> CallResult {
        self.require(&caller, Role::BuildingOwner)?;
        self.require_state(LifecycleState::Active)?;
        let case = self.case.as_ref().ok_or(Rejection::UnknownCase)?;
        if now < case.params.end_time() {
            return Err(Rejection::WrongState);
        }
        if self.pending_count(now) > 0 {
            return Err(Rejection::PendingEvaluation);
        }
        let mut transfers = Vec::new();
        self.settle_accruals(accounts, &mut transfers, &Role::PAYEES);
        let refund = self.refund_escrow(accounts, &mut transfers);
        self.state = LifecycleState::Completed;
        Ok((CallOutput::Refund(refund), transfers))
    }

    fn deactivate(&mut self, accounts: &mut Accounts, caller: Address) -> CallResult {
        self.require(&caller, Role::ContractOwner)?;
        if self.state == LifecycleState::Deactivated {
            return Err(Rejection::WrongState);
        }
        let mut transfers = Vec::new();
        self.settle_accruals(accounts, &mut transfers, &Role::PAYEES);
        let refund = self.refund_escrow(accounts, &mut transfers);
        self.state = LifecycleState::Deactivated;
        Ok((CallOutput::Refund(refund), transfers))
    }

    pub fn status(&self, case_id: u64) -> Result<StatusSnapshot, Rejection> {
        let case = self
            .case
            .as_ref()
            .filter(|c| c.id == case_id)
            .ok_or(Rejection::UnknownCase)?;
        Ok(StatusSnapshot {
            case_id,
            state: self.state,
            funded: self.funded,
            escrow: self.escrow,
            accruals: self.accruals.clone(),
            redeemed: self.redeemed.clone(),
            refunded: self.refunded,
            measurements: self.measurements.len(),
            evaluated_windows: self.results.len(),
            thermal_windows_evaluated: case.next_thermal,
            energy_windows_evaluated: case.next_energy,
            last_thermal_tiers: self
                .results
                .iter()
                .rev()
                .find(|r| r.kind == WindowKind::Thermal)
                .map(|r| r.tiers.clone()),
            roles: self.roles.clone(),
        })
    }

    /// Funds held by the contract: unallocated escrow plus unpaid accruals.
    pub fn holdings(&self) -> Amount {
        self.escrow + self.accruals.values().sum::<Amount>()
    }

    /// `funded = escrow + Σ accruals + Σ redeemed + refunded`.
    pub fn escrow_conserved(&self) -> bool {
        self.funded
            == self.escrow
                + self.accruals.values().sum::<Amount>()
                + self.redeemed.values().sum::<Amount>()
                + self.refunded
    }

    pub fn state_digest(&self) -> StateDigest {
        StateDigest::of(self)
    }

    pub fn address(&self) -> Address {
        self.address
    }

    pub fn state(&self) -> LifecycleState {
        self.state
    }

    pub fn role_holder(&self, role: Role) -> Option<Address> {
        self.roles.get(&role).copied()
    }

    pub fn case_params(&self) -> Option<&CaseParams> {
        self.case.as_ref().map(|c| &c.params)
    }

    pub fn case_id(&self) -> Option<u64> {
        self.case.as_ref().map(|c| c.id)
    }

    /// `(thermal, energy)` windows evaluated so far.
    pub fn evaluated_counts(&self) -> (u64, u64) {
        self.case.as_ref().map_or((0, 0), |c| (c.next_thermal, c.next_energy))
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn results(&self) -> &[IntervalResult] {
        &self.results
    }

    pub fn funded(&self) -> Amount {
        self.funded
    }

    pub fn escrow(&self) -> Amount {
        self.escrow
    }

    pub fn accrual(&self, role: Role) -> Amount {
        self.accruals.get(&role).copied().unwrap_or(0)
    }

    pub fn redeemed(&self, role: Role) -> Amount {
        self.redeemed.get(&role).copied().unwrap_or(0)
    }

    pub fn refunded(&self) -> Amount {
        self.refunded
    }
}
