// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use perfcontract::contract::CaseParams;
use perfcontract::costs::cost_report;
use perfcontract::data::{self, BuildingDataset, LoadOptions, SyntheticSpec};
use perfcontract::ledger::{GasSchedule, Receipt, TxStatus};
use perfcontract::oracle::{plan_schedule, Oracle, SamplingPolicy};
use perfcontract::scenario::{run_scenario, ScenarioConfig, REFERENCE_START};
use perfcontract::units::{format_scaled, Amount, Decimal};
use perfcontract::workspace::{OracleCursor, Workspace};
use perfcontract::{Call, CallOutput, Ledger, Role};

#[derive(Parser)]
#[command(name = "perfcontract", version, about = "Building performance contracts on a simulated ledger")]
struct Cli {
    /// Workspace directory holding the ledger state.
    #[arg(long, global = true, env = "PERFCONTRACT_STATE", default_value = ".perfcontract")]
    state: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Tx {
    /// Sender: an alias or a hex address.
    #[arg(long = "as")]
    sender: String,
    /// Advance the ledger clock to this Unix time first.
    #[arg(long)]
    at: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Create actor accounts (first use) and deploy the contract.
    Deploy {
        #[command(flatten)]
        tx: Tx,
        /// `name=coins`, repeatable; only valid on a fresh workspace.
        #[arg(long = "actor", value_parser = parse_actor)]
        actors: Vec<(String, Amount)>,
        /// Ledger gas price, gigaunits per gas.
        #[arg(long, default_value = "20")]
        gas_price: Decimal,
    },
    /// Role management.
    Role {
        #[command(subcommand)]
        cmd: RoleCmd,
    },
    /// Case management.
    Case {
        #[command(subcommand)]
        cmd: CaseCmd,
    },
    /// Fund the escrow (defaults to the worst-case payout).
    Fund {
        #[command(flatten)]
        tx: Tx,
        /// Amount in coins.
        #[arg(long)]
        amount: Option<Decimal>,
    },
    /// Back-end oracle registration.
    Backend {
        #[command(subcommand)]
        cmd: BackendCmd,
    },
    /// Oracle runs.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Evaluate every window closed at the current time.
    Evaluate {
        #[command(flatten)]
        tx: Tx,
    },
    /// Show contract status (no transaction).
    Status {
        #[arg(long, default_value_t = 1)]
        case: u64,
        #[arg(long)]
        json: bool,
    },
    /// Pay out the caller's accrued rewards.
    Redeem {
        #[command(flatten)]
        tx: Tx,
    },
    /// Release the remaining escrow to the building owner at term end.
    Release {
        #[command(flatten)]
        tx: Tx,
    },
    /// Stop the contract and return unallocated funds.
    Deactivate {
        #[command(flatten)]
        tx: Tx,
    },
    /// Gas and fiat cost report (no transaction).
    Report {
        #[arg(long, default_value = "89.8")]
        gas_price: Decimal,
        #[arg(long, default_value = "322.5")]
        fiat_rate: Decimal,
    },
    /// Generate a synthetic dataset in the canonical CSV schema.
    SynthGen {
        #[arg(long)]
        out: PathBuf,
        /// Generator spec (JSON); defaults to the reference building.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = REFERENCE_START)]
        start: u64,
        #[arg(long, default_value_t = 2 * 86_400)]
        duration: u64,
    },
    /// Scripted runs.
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        cmd: ConfigCmd,
    },
}

#[derive(Subcommand)]
enum RoleCmd {
    Add {
        #[command(flatten)]
        tx: Tx,
        #[arg(long, value_enum)]
        role: GrantableRole,
        #[arg(long)]
        grantee: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GrantableRole {
    BuildingOwner,
    Contractor,
    FacilityManager,
}

impl From<GrantableRole> for Role {
    fn from(r: GrantableRole) -> Self {
        match r {
            GrantableRole::BuildingOwner => Role::BuildingOwner,
            GrantableRole::Contractor => Role::Contractor,
            GrantableRole::FacilityManager => Role::FacilityManager,
        }
    }
}

#[derive(Subcommand)]
enum CaseCmd {
    Create {
        #[command(flatten)]
        tx: Tx,
        /// Case parameters (JSON); defaults to the reference case.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Start time for the reference case; defaults to the ledger clock.
        #[arg(long)]
        start: Option<u64>,
    },
}

#[derive(Subcommand)]
enum BackendCmd {
    Register {
        #[command(flatten)]
        tx: Tx,
        #[arg(long)]
        backend: String,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Submit scheduled measurements up to `--until`.
    Run {
        /// Sender; defaults to the `oracle` alias.
        #[arg(long = "as", default_value = "oracle")]
        sender: String,
        #[arg(long, default_value_t = 1)]
        case: u64,
        /// CSV file or directory of CSV files.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Submit events before this Unix time; defaults to the term end.
        #[arg(long)]
        until: Option<u64>,
        /// Preset name or a policy JSON file.
        #[arg(long, default_value = "five-per-day")]
        sampling: String,
        #[arg(long)]
        cumulative_energy: bool,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    Run {
        /// Scenario config (JSON); defaults to the replication run.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ConfigCmd {
    PrintDefaults {
        #[arg(value_enum, default_value = "scenario")]
        kind: DefaultsKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DefaultsKind {
    Scenario,
    Case,
    Sampling,
    Synthetic,
    GasSchedule,
}

fn parse_actor(s: &str) -> Result<(String, Amount), String> {
    let (name, coins) = s.split_once('=').ok_or("expected name=coins")?;
    let d: Decimal = coins.parse().map_err(|e| format!("{e}"))?;
    Ok((name.to_string(), coins_to_base(d)))
}

fn coins_to_base(d: Decimal) -> Amount {
    d.rescaled(18)
}

fn coins(a: Amount) -> String {
    format_scaled(a, 18)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_vec_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn describe(output: &CallOutput) -> String {
    match output {
        CallOutput::None => String::new(),
        CallOutput::Deployed(a) => format!(" contract {a}"),
        CallOutput::CaseId(id) => format!(" case {id}"),
        CallOutput::Evaluated(n) => format!(" evaluated {n} window(s)"),
        CallOutput::Payout(a) => format!(" payout {}", coins(*a)),
        CallOutput::Refund(a) => format!(" refund {}", coins(*a)),
    }
}

/// Submits one call from the workspace, saves, and reports the receipt.
/// A rejected call is still logged (its fee is charged) and exits 1.
fn transact(ws: &mut Workspace, tx: &Tx, call: Call) -> Result<ExitCode> {
    let sender = ws.resolve(&tx.sender)?;
    if let Some(t) = tx.at {
        ws.state.ledger.advance_clock(t)?;
    }
    let receipt = ws.state.ledger.submit(sender, call);
    let receipt: Receipt = match receipt {
        Ok(r) => r,
        Err(e) => {
            ws.save()?;
            return Err(e.into());
        }
    };
    ws.save()?;
    println!(
        "seq {} {} {} gas {} fee {}{}",
        receipt.seq,
        receipt.kind,
        receipt.status,
        receipt.gas_used,
        coins(receipt.fee),
        describe(&receipt.output)
    );
    Ok(match receipt.status {
        TxStatus::Accepted => ExitCode::SUCCESS,
        TxStatus::Rejected(_) => ExitCode::FAILURE,
    })
}

fn sampling_policy(spec: &str, seed: u64) -> Result<SamplingPolicy> {
    Ok(match spec {
        "five-per-day" => SamplingPolicy::five_per_day(seed),
        "every-15-minutes" => SamplingPolicy::every_15_minutes(seed),
        "accelerated" => SamplingPolicy::accelerated(seed),
        path => SamplingPolicy { seed, ..read_json(Path::new(path))? },
    })
}

fn load_data(path: &Path, building: &str, cumulative_energy: bool) -> Result<BuildingDataset> {
    let opts = LoadOptions { cumulative_energy };
    let ds = if path.is_dir() {
        data::load_dir(path, building, opts)?
    } else {
        data::load_csv_with(path, building, opts)?
    };
    Ok(ds)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::SynthGen { out, spec, seed, start, duration } => {
            let spec = match spec {
                Some(p) => read_json(&p)?,
                None => SyntheticSpec::reference(start, duration, seed),
            };
            let spec = SyntheticSpec { seed, ..spec };
            let ds = data::generate_synthetic(&spec, seed)?;
            data::write_csv(&ds, &out)?;
            let sidecar = out.with_extension("spec.json");
            fs::write(&sidecar, serde_json::to_vec_pretty(&spec)?)?;
            println!("wrote {} samples from {} sensors to {}", ds.sample_count(), ds.sensor_count(), out.display());
            return Ok(ExitCode::SUCCESS);
        }
        Command::Config { cmd: ConfigCmd::PrintDefaults { kind } } => {
            let text = match kind {
                DefaultsKind::Scenario => serde_json::to_string_pretty(&ScenarioConfig::replication(0))?,
                DefaultsKind::Case => serde_json::to_string_pretty(&CaseParams::reference(REFERENCE_START))?,
                DefaultsKind::Sampling => serde_json::to_string_pretty(&SamplingPolicy::five_per_day(0))?,
                DefaultsKind::Synthetic => {
                    serde_json::to_string_pretty(&SyntheticSpec::reference(REFERENCE_START, 2 * 86_400, 0))?
                }
                DefaultsKind::GasSchedule => serde_json::to_string_pretty(&GasSchedule::default())?,
            };
            println!("{text}");
            return Ok(ExitCode::SUCCESS);
        }
        _ => {}
    }

    let mut ws = Workspace::open(&cli.state)?;
    match cli.command {
        Command::Deploy { tx, actors, gas_price } => {
            if !actors.is_empty() {
                if ws.existed() {
                    bail!("accounts can only be created in a fresh workspace");
                }
                if gas_price.scale() > 9 {
                    bail!("gas price has more than 9 decimals");
                }
                ws.state.ledger = Ledger::new(GasSchedule::default(), gas_price.rescaled(9));
                for (name, balance) in actors {
                    let a = ws.state.ledger.create_account(balance)?;
                    println!("account {name} {a} balance {}", coins(balance));
                    ws.state.aliases.insert(name, a);
                }
            }
            transact(&mut ws, &tx, Call::Deploy)
        }
        Command::Role { cmd: RoleCmd::Add { tx, role, grantee } } => {
            let grantee = ws.resolve(&grantee)?;
            transact(&mut ws, &tx, Call::AddRole { grantee, role: role.into() })
        }
        Command::Case { cmd: CaseCmd::Create { tx, file, start } } => {
            let params = match file {
                Some(p) => read_json(&p)?,
                None => CaseParams::reference(start.or(tx.at).unwrap_or(ws.state.ledger.clock())),
            };
            transact(&mut ws, &tx, Call::CreateCase { params: Box::new(params) })
        }
        Command::Fund { tx, amount } => {
            let amount = match amount {
                Some(d) => coins_to_base(d),
                None => ws
                    .state
                    .ledger
                    .contract()
                    .and_then(|c| c.case_params())
                    .map(CaseParams::worst_case_escrow)
                    .context("no case to fund")?,
            };
            transact(&mut ws, &tx, Call::FundEscrow { amount })
        }
        Command::Backend { cmd: BackendCmd::Register { tx, backend } } => {
            let backend = ws.resolve(&backend)?;
            transact(&mut ws, &tx, Call::RegisterBackend { backend })
        }
        Command::Evaluate { tx } => transact(&mut ws, &tx, Call::EvaluateInterval),
        Command::Redeem { tx } => transact(&mut ws, &tx, Call::Redeem),
        Command::Release { tx } => transact(&mut ws, &tx, Call::ReleaseEscrow),
        Command::Deactivate { tx } => transact(&mut ws, &tx, Call::Deactivate),
        Command::Oracle {
            cmd: OracleCmd::Run { sender, case, data: data_path, seed, until, sampling, cumulative_energy },
        } => {
            let oracle_addr = ws.resolve(&sender)?;
            let contract = ws.state.ledger.contract().context("no contract deployed")?;
            if contract.case_id() != Some(case) {
                bail!("case {case} not found");
            }
            let params = contract.case_params().context("no case")?.clone();
            let dataset = load_data(&data_path, &params.building_id, cumulative_energy)?;
            let policy = sampling_policy(&sampling, seed)?;
            let schedule = plan_schedule(&policy, params.start_time, params.duration)?;
            let until = until.unwrap_or(params.end_time());

            let cursor = OracleCursor { policy: policy.clone(), data: data_path.clone(), next_event: 0 };
            let resume = match &ws.state.oracle {
                Some(c) if c.policy == cursor.policy && c.data == cursor.data => c.next_event,
                // a new plan starts at the current clock
                _ => schedule.events.partition_point(|e| e.time < ws.state.ledger.clock()),
            };
            let mut oracle = Oracle::new(&schedule, &dataset, oracle_addr);
            oracle.fast_forward(&params.sensors, resume);
            oracle.run_until(&mut ws.state.ledger, until)?;
            if until > ws.state.ledger.clock() {
                ws.state.ledger.advance_clock(until)?;
            }
            ws.state.oracle = Some(OracleCursor { next_event: oracle.cursor(), ..cursor });
            ws.save()?;
            let report = oracle.report();
            write_json(ws.dir(), "oracle-report.json", &report)?;
            print!("{}", report.to_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Status { case, json } => {
            let contract = ws.state.ledger.contract().context("no contract deployed")?;
            let status = contract.status(case).map_err(|r| anyhow::anyhow!("{}", r.code()))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&status)?);
            } else {
                println!("case         {}", status.case_id);
                println!("state        {:?}", status.state);
                println!("clock        {}", ws.state.ledger.clock());
                println!("funded       {}", coins(status.funded));
                println!("escrow       {}", coins(status.escrow));
                for (role, a) in &status.accruals {
                    println!("accrued      {role:<16} {}", coins(*a));
                }
                for (role, a) in &status.redeemed {
                    println!("redeemed     {role:<16} {}", coins(*a));
                }
                println!("refunded     {}", coins(status.refunded));
                println!("measurements {}", status.measurements);
                println!("windows      {}", status.evaluated_windows);
                for (role, a) in &status.roles {
                    println!("role         {role:<16} {}", ws.name_of(a));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { gas_price, fiat_rate } => {
            let report = cost_report(ws.state.ledger.log(), gas_price, fiat_rate)?;
            let text = report.to_text();
            fs::write(ws.dir().join("report.txt"), &text)?;
            write_json(ws.dir(), "report.json", &report)?;
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Scenario { cmd: ScenarioCmd::Run { config, seed } } => {
            if ws.existed() {
                bail!("scenario runs need a fresh workspace; {} already has state", ws.dir().display());
            }
            let mut config = match config {
                Some(p) => read_json(&p)?,
                None => ScenarioConfig::replication(0),
            };
            if let Some(s) = seed {
                config.seed = s;
            }
            write_json(ws.dir(), "scenario.json", &config)?;
            match run_scenario(&config) {
                Ok(out) => {
                    ws.state.ledger = out.ledger;
                    ws.state.aliases =
                        out.actors.aliases().into_iter().map(|(n, a)| (n.to_string(), a)).collect();
                    ws.save()?;
                    write_json(ws.dir(), "summary.json", &out.summary)?;
                    print!("{}", out.summary.to_text());
                    print!("\n{}", out.summary.submission.to_text());
                    print!("\n{}", out.summary.cost.to_text());
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("scenario aborted at step `{}`: {}", e.step, e.reason);
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::SynthGen { .. } | Command::Config { .. } => unreachable!("handled above"),
    }
}
