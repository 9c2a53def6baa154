// SPDX-License-Identifier: Apache-2.0

//! Scripted end-to-end runs: deploy, assign roles, create and fund a case,
//! register the oracle, feed measurements, evaluate, redeem and release.
//!
//! Redemption rounds fall at every multiple of the case's redemption
//! interval after its start and once more at its end. Each round first
//! submits the oracle events before it, then evaluates closed windows,
//! then lets both payees redeem.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::contract::{Call, CaseParams, LifecycleState, Role, DAY};
use crate::costs::{cost_report, CostReport};
use crate::data::{self, BuildingDataset, LoadOptions, SyntheticSpec};
use crate::exec::{self, Mode};
use crate::ledger::{Address, AuditReport, GasSchedule, Ledger, Receipt, TxStatus};
use crate::oracle::{plan_schedule, Oracle, SamplingPolicy, SubmissionReport};
use crate::seed::derive_seed;
use crate::units::{amount_map_str, amount_str, Amount, Decimal, COIN};

/// Start of the reference two-day run, 2020-05-14 00:00 UTC.
pub const REFERENCE_START: u64 = 1_589_414_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Setup,
    LoadData,
    Deploy,
    AssignRoles,
    CreateCase,
    FundEscrow,
    RegisterBackend,
    OracleRun,
    Evaluate,
    Redeem,
    ReleaseEscrow,
    Deactivate,
}

impl Step {
    pub fn name(self) -> &'static str {
        match self {
            Step::Setup => "setup",
            Step::LoadData => "load_data",
            Step::Deploy => "deploy",
            Step::AssignRoles => "assign_roles",
            Step::CreateCase => "create_case",
            Step::FundEscrow => "fund_escrow",
            Step::RegisterBackend => "register_backend",
            Step::OracleRun => "oracle_run",
            Step::Evaluate => "evaluate",
            Step::Redeem => "redeem",
            Step::ReleaseEscrow => "release_escrow",
            Step::Deactivate => "deactivate",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step `{step}` failed: {reason}")]
pub struct ScenarioError {
    pub step: Step,
    pub reason: String,
}

impl ScenarioError {
    fn new(step: Step, reason: impl fmt::Display) -> Self {
        Self { step, reason: reason.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    /// A CSV file, or a directory of them.
    Csv {
        path: PathBuf,
        #[serde(default)]
        cumulative_energy: bool,
    },
    /// Generated data; the generator seed is split from the scenario seed.
    Synthetic { spec: SyntheticSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorBalances {
    #[serde(with = "amount_str")]
    pub contract_owner: Amount,
    #[serde(with = "amount_str")]
    pub building_owner: Amount,
    #[serde(with = "amount_str")]
    pub contractor: Amount,
    #[serde(with = "amount_str")]
    pub facility_manager: Amount,
    #[serde(with = "amount_str")]
    pub backend_oracle: Amount,
}

impl Default for ActorBalances {
    fn default() -> Self {
        ActorBalances {
            contract_owner: 100 * COIN,
            building_owner: 100 * COIN,
            contractor: 100 * COIN,
            facility_manager: 100 * COIN,
            backend_oracle: 100 * COIN,
        }
    }
}

/// Addresses of the five actors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actors {
    pub contract_owner: Address,
    pub building_owner: Address,
    pub contractor: Address,
    pub facility_manager: Address,
    pub backend_oracle: Address,
}

impl Actors {
    pub fn get(&self, role: Role) -> Address {
        match role {
            Role::ContractOwner => self.contract_owner,
            Role::BuildingOwner => self.building_owner,
            Role::Contractor => self.contractor,
            Role::FacilityManager => self.facility_manager,
            Role::BackendOracle => self.backend_oracle,
        }
    }

    /// Conventional aliases, one per role.
    pub fn aliases(&self) -> [(&'static str, Address); 5] {
        [
            ("owner", self.contract_owner),
            ("building-owner", self.building_owner),
            ("contractor", self.contractor),
            ("facility-manager", self.facility_manager),
            ("oracle", self.backend_oracle),
        ]
    }

    pub fn create(ledger: &mut Ledger, b: &ActorBalances) -> Result<Self, ScenarioError> {
        let mut acct = |amount| ledger.create_account(amount).map_err(|e| ScenarioError::new(Step::Setup, e));
        Ok(Actors {
            contract_owner: acct(b.contract_owner)?,
            building_owner: acct(b.building_owner)?,
            contractor: acct(b.contractor)?,
            facility_manager: acct(b.facility_manager)?,
            backend_oracle: acct(b.backend_oracle)?,
        })
    }
}

/// Prices used for the cost report (not for ledger fees).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostInputs {
    /// Gigaunits per gas.
    pub gas_price: Decimal,
    /// Currency units per coin.
    pub fiat_rate: Decimal,
}

impl Default for CostInputs {
    fn default() -> Self {
        CostInputs { gas_price: Decimal::new(898, 1), fiat_rate: Decimal::new(3225, 1) }
    }
}

fn default_gas_price() -> Decimal {
    Decimal::new(20, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub case: CaseParams,
    pub dataset: DatasetSource,
    /// Sampling plan; its seed is replaced by one split from `seed`.
    pub sampling: SamplingPolicy,
    #[serde(default)]
    pub actors: ActorBalances,
    pub seed: u64,
    #[serde(default)]
    pub gas_schedule: GasSchedule,
    /// Ledger gas price in gigaunits per gas.
    #[serde(default = "default_gas_price")]
    pub gas_price: Decimal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deactivate_at: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skip_steps: Vec<Step>,
    /// Check conservation after every transaction.
    #[serde(default)]
    pub audit: bool,
    #[serde(default)]
    pub report: CostInputs,
    /// Free text, e.g. how logical time maps to real time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ScenarioConfig {
    /// Two accelerated days with 190 readings per day per thermal metric,
    /// weekly energy and a single redemption at the end.
    pub fn replication(seed: u64) -> Self {
        let case = CaseParams::reference(REFERENCE_START);
        let spec = SyntheticSpec::reference(REFERENCE_START, case.duration, seed);
        ScenarioConfig {
            dataset: DatasetSource::Synthetic { spec },
            sampling: SamplingPolicy::accelerated(seed),
            case,
            actors: ActorBalances::default(),
            seed,
            gas_schedule: GasSchedule::default(),
            gas_price: default_gas_price(),
            deactivate_at: None,
            skip_steps: Vec::new(),
            audit: false,
            report: CostInputs::default(),
            note: Some(
                "two logical days stand in for one six-month redemption period".to_string(),
            ),
        }
    }

    fn skips(&self, step: Step) -> bool {
        self.skip_steps.contains(&step)
    }

    pub fn load_dataset(&self) -> Result<BuildingDataset, ScenarioError> {
        let err = |e: data::DataError| ScenarioError::new(Step::LoadData, e);
        match &self.dataset {
            DatasetSource::Csv { path, cumulative_energy } => {
                let opts = LoadOptions { cumulative_energy: *cumulative_energy };
                if path.is_dir() {
                    data::load_dir(path, &self.case.building_id, opts).map_err(err)
                } else {
                    data::load_csv_with(path, &self.case.building_id, opts).map_err(err)
                }
            }
            DatasetSource::Synthetic { spec } => {
                let seed = derive_seed(self.seed, &["data"]);
                let spec = SyntheticSpec { seed, ..spec.clone() };
                data::generate_synthetic_with(&spec, seed, Mode::Sequential).map_err(err)
            }
        }
    }

    pub fn sampling_policy(&self) -> SamplingPolicy {
        SamplingPolicy { seed: derive_seed(self.seed, &["sampling"]), ..self.sampling.clone() }
    }

    fn ledger_gas_price(&self) -> Result<Amount, ScenarioError> {
        if self.gas_price.scale() > 9 {
            return Err(ScenarioError::new(Step::Setup, "gas_price has more than 9 decimals"));
        }
        Ok(self.gas_price.rescaled(9))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub state_digest: String,
    pub contract_digest: String,
    pub final_state: LifecycleState,
    pub transactions: usize,
    pub measurements: usize,
    pub windows_evaluated: usize,
    #[serde(with = "amount_map_str")]
    pub payouts: BTreeMap<Role, Amount>,
    pub payout_events: u32,
    #[serde(with = "amount_str")]
    pub refund: Amount,
    pub submission: SubmissionReport,
    pub cost: CostReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditReport>,
}

impl ScenarioSummary {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "state        {:?}\ndigest       {}\ntransactions {}\nmeasurements {}\nwindows      {}\n",
            self.final_state, self.state_digest, self.transactions, self.measurements, self.windows_evaluated
        );
        for (role, amount) in &self.payouts {
            out.push_str(&format!("payout       {role:<16} {}\n", crate::units::format_scaled(*amount, 18)));
        }
        out.push_str(&format!("payout events {}\n", self.payout_events));
        out.push_str(&format!("refund       {}\n", crate::units::format_scaled(self.refund, 18)));
        if let Some(a) = &self.audit {
            out.push_str(&format!("audit        {} checked, {} violations\n", a.checked, a.violations.len()));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub summary: ScenarioSummary,
    pub ledger: Ledger,
    pub actors: Actors,
}

fn submit(ledger: &mut Ledger, step: Step, sender: Address, call: Call) -> Result<Receipt, ScenarioError> {
    let r = ledger.submit(sender, call).map_err(|e| ScenarioError::new(step, e))?;
    match &r.status {
        TxStatus::Accepted => Ok(r),
        TxStatus::Rejected(why) => Err(ScenarioError::new(step, why.code())),
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome, ScenarioError> {
    let p = &config.case;
    let start = p.start_time;
    let end = p.end_time();
    if let Some(d) = config.deactivate_at {
        if d < start || d >= end {
            return Err(ScenarioError::new(Step::Setup, "deactivate_at outside the contract term"));
        }
    }
    let dataset = config.load_dataset()?;
    let schedule = plan_schedule(&config.sampling_policy(), start, p.duration)
        .map_err(|e| ScenarioError::new(Step::Setup, e))?;

    let mut ledger = Ledger::new(config.gas_schedule.clone(), config.ledger_gas_price()?);
    config.gas_schedule.validate().map_err(|e| ScenarioError::new(Step::Setup, e))?;
    if config.audit {
        ledger.enable_audit();
    }
    let actors = Actors::create(&mut ledger, &config.actors)?;
    ledger.advance_clock(start).map_err(|e| ScenarioError::new(Step::Setup, e))?;

    let owner = actors.contract_owner;
    let steps: [(Step, Vec<(Address, Call)>); 5] = [
        (Step::Deploy, vec![(owner, Call::Deploy)]),
        (
            Step::AssignRoles,
            [Role::BuildingOwner, Role::Contractor, Role::FacilityManager]
                .into_iter()
                .map(|role| (owner, Call::AddRole { grantee: actors.get(role), role }))
                .collect(),
        ),
        (Step::CreateCase, vec![(owner, Call::CreateCase { params: Box::new(p.clone()) })]),
        (
            Step::FundEscrow,
            vec![(actors.building_owner, Call::FundEscrow { amount: p.worst_case_escrow() })],
        ),
        (
            Step::RegisterBackend,
            vec![(owner, Call::RegisterBackend { backend: actors.backend_oracle })],
        ),
    ];
    for (step, calls) in steps {
        if config.skips(step) {
            continue;
        }
        for (sender, call) in calls {
            submit(&mut ledger, step, sender, call)?;
        }
    }

    let mut boundaries: Vec<u64> = (1..)
        .map(|k| start + k * p.redemption_interval)
        .take_while(|b| *b < end)
        .collect();
    boundaries.push(end);

    let mut oracle = Oracle::new(&schedule, &dataset, actors.backend_oracle);
    let oracle_err = |e| ScenarioError::new(Step::OracleRun, e);
    let mut payout_events = 0;
    for b in boundaries {
        if let Some(d) = config.deactivate_at.filter(|d| *d < b) {
            if !config.skips(Step::OracleRun) {
                oracle.run_until(&mut ledger, d).map_err(oracle_err)?;
            }
            ledger.advance_clock(d).map_err(|e| ScenarioError::new(Step::Deactivate, e))?;
            submit(&mut ledger, Step::Deactivate, owner, Call::Deactivate)?;
            break;
        }
        if !config.skips(Step::OracleRun) {
            oracle.run_until(&mut ledger, b).map_err(oracle_err)?;
        }
        ledger.advance_clock(b).map_err(|e| ScenarioError::new(Step::Evaluate, e))?;
        let pending = ledger.contract().map_or(0, |c| c.pending_windows(b));
        if !config.skips(Step::Evaluate) && pending > 0 {
            submit(&mut ledger, Step::Evaluate, actors.backend_oracle, Call::EvaluateInterval)?;
        }
        if !config.skips(Step::Redeem) {
            for payee in Role::PAYEES {
                submit(&mut ledger, Step::Redeem, actors.get(payee), Call::Redeem)?;
            }
            payout_events += 1;
        }
        if b == end && !config.skips(Step::ReleaseEscrow) {
            submit(&mut ledger, Step::ReleaseEscrow, actors.building_owner, Call::ReleaseEscrow)?;
        }
    }

    let contract = ledger.contract().ok_or_else(|| ScenarioError::new(Step::Deploy, "no contract"))?;
    let cost = cost_report(ledger.log(), config.report.gas_price, config.report.fiat_rate)
        .map_err(|e| ScenarioError::new(Step::Setup, e))?;
    let summary = ScenarioSummary {
        state_digest: ledger.state_digest().to_string(),
        contract_digest: contract.state_digest().to_string(),
        final_state: contract.state(),
        transactions: ledger.log().len(),
        measurements: contract.measurements().len(),
        windows_evaluated: contract.results().len(),
        payouts: Role::PAYEES.iter().map(|r| (*r, contract.redeemed(*r))).collect(),
        payout_events,
        refund: contract.refunded(),
        submission: oracle.report(),
        cost,
        audit: ledger.audit_report().cloned(),
    };
    Ok(ScenarioOutcome { summary, ledger, actors })
}

/// Runs independent scenarios, in parallel under [`Mode::Parallel`].
pub fn run_batch(configs: &[ScenarioConfig], mode: Mode) -> Vec<Result<ScenarioOutcome, ScenarioError>> {
    exec::map(mode, configs, run_scenario)
}

/// A short randomized scenario used for property checks: one day, six-hour
/// thermal windows, twelve-hour energy windows, redemption every six hours.
pub fn small_config(seed: u64) -> ScenarioConfig {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, &["small"]));
    let mut case = CaseParams::reference(REFERENCE_START);
    case.duration = DAY;
    case.thermal_interval = DAY / 4;
    case.energy_interval = DAY / 2;
    case.redemption_interval = DAY / 4;
    let mut spec = SyntheticSpec::reference(REFERENCE_START, case.duration, seed);
    spec.tick_interval = 600;
    // move the building around the bands so every tier shows up
    for (metric, ms) in spec.metrics.iter_mut() {
        let scale = rng.random_range(0.6..1.6);
        ms.base *= scale;
        ms.noise_sd *= rng.random_range(0.0..3.0);
        if *metric == crate::metric::Metric::Energy {
            ms.base = 45.0 * rng.random_range(0.5..2.0);
            ms.tick_interval = Some(case.energy_interval / 4);
        }
    }
    let mut sampling = SamplingPolicy::thermal_per_day(rng.random_range(4..48), seed);
    sampling.mean_interval.insert(crate::metric::Metric::Energy, rng.random_range(3_600..DAY / 2));
    let deactivate_at = rng
        .random_bool(0.3)
        .then(|| REFERENCE_START + rng.random_range(0..DAY));
    ScenarioConfig {
        case,
        dataset: DatasetSource::Synthetic { spec },
        sampling,
        actors: ActorBalances::default(),
        seed,
        gas_schedule: GasSchedule::default(),
        gas_price: default_gas_price(),
        deactivate_at,
        skip_steps: Vec::new(),
        audit: true,
        report: CostInputs::default(),
        note: None,
    }
}
