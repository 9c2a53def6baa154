// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks, one line per criterion. Exits non-zero if any fails.
//!
//! Run with `cargo test -p perfcontract --test acceptance --release` for
//! representative timings.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use perfcontract::contract::window::IntervalResult;
use perfcontract::contract::{batch, WindowKind};
use perfcontract::costs::cost_from_totals;
use perfcontract::ledger::TxKind;
use perfcontract::oracle::plan_schedule;
use perfcontract::perf::{classify_metric, fm_tier, ComfortBands, Tier};
use perfcontract::scenario::{run_scenario, small_config, ScenarioConfig, REFERENCE_START};
use perfcontract::units::Fraction;
use perfcontract::{
    Address, Amount, Call, CaseParams, Ledger, Measurement, Metric, Mode, Rejection, Role, CASE_ID,
    COIN,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(n: u32, title: &str, tolerance: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let elapsed = t.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    println!(
        "[{}] {n}. {title} | tolerance: {tolerance} | {} | {:.2?} (limit {:?}){}",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed,
        limit,
        if in_time { "" } else { " TIME EXCEEDED" }
    );
    pass
}

// ---- 1 ----

fn band_matrix() -> Outcome {
    use Tier::{Fail as X, Full as F, Reduced as R};
    // (metric, endpoint, tier just below, at, just above)
    let table: [(Metric, f64, [Tier; 3]); 10] = [
        (Metric::Temperature, 0.8, [X, R, R]),
        (Metric::Temperature, 0.9, [R, F, F]),
        (Metric::Temperature, 1.1, [F, F, R]),
        (Metric::Temperature, 1.2, [R, R, X]),
        (Metric::Humidity, 0.4, [X, R, R]),
        (Metric::Humidity, 0.75, [R, F, F]),
        (Metric::Humidity, 1.5, [F, F, R]),
        (Metric::Humidity, 1.8, [R, R, X]),
        (Metric::Co2, 1.0, [F, F, R]),
        (Metric::Co2, 1.1, [R, R, X]),
    ];
    let bands = ComfortBands::default();
    let mut cases = 0;
    let mut wrong = Vec::new();
    for (metric, edge, expect) in table {
        for (x, want) in [edge - 1e-9, edge, edge + 1e-9].into_iter().zip(expect) {
            cases += 1;
            let got = classify_metric(Some(x), &bands, metric);
            if got != want {
                wrong.push(format!("{metric}@{x}: {got:?} != {want:?}"));
            }
        }
    }
    check(wrong.is_empty() && cases == 30, format!("{cases} cases, mismatches {wrong:?}"))
}

// ---- 2 ----

fn fm_rule_table() -> Outcome {
    let tiers = [Tier::Full, Tier::Reduced, Tier::Fail];
    let reduced = Fraction::HALF;
    let mut n = 0;
    let mut bad = Vec::new();
    for a in tiers {
        for b in tiers {
            for c in tiers {
                n += 1;
                let t = [a, b, c];
                let greens = t.iter().filter(|x| **x == Tier::Full).count();
                let reds = t.iter().filter(|x| **x == Tier::Fail).count();
                let want = if greens >= 2 {
                    Fraction::ONE
                } else if reds >= 2 {
                    Fraction::ZERO
                } else {
                    reduced
                };
                let perms = [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]];
                for p in perms {
                    let got = fm_tier(p).fraction(reduced);
                    if got != want {
                        bad.push(format!("{p:?}: {got} != {want}"));
                    }
                }
            }
        }
    }
    check(bad.is_empty() && n == 27, format!("{n} combinations x 6 permutations, mismatches {bad:?}"))
}

// ---- 3 ----

fn cost_arithmetic() -> Outcome {
    // any split of the total will do; put it on two kinds
    let mut by_kind: BTreeMap<TxKind, u64> = TxKind::ALL.iter().map(|k| (*k, 0)).collect();
    by_kind.insert(TxKind::Deploy, 4_249_797);
    by_kind.insert(TxKind::SubmitMeasurement, 460_217_196 - 4_249_797);
    let r = cost_from_totals(&by_kind, "89.8".parse().unwrap(), "322.5".parse().unwrap()).unwrap();
    // independent check: 460217196 × 89.8e-9 coins, × 322.5 fiat
    let coins = 460_217_196.0 * 89.8e-9;
    let fiat = coins * 322.5;
    let c = r.coin_cost_f64();
    let f = r.fiat_cost_f64();
    let ok = r.total_gas == 460_217_196
        && (c - 41.33).abs() <= 0.01
        && (f - 13_327.0).abs() <= 5.0
        && (c - coins).abs() < 1e-4
        && (f - fiat).abs() < 0.01;
    check(ok, format!("coins {} fiat {}", r.coin_cost, r.fiat_cost))
}

// ---- 4 ----

pub const REPLICATION_SEED: u64 = 2020;

fn replication() -> Outcome {
    let c = ScenarioConfig::replication(REPLICATION_SEED);
    let out = match run_scenario(&c) {
        Ok(o) => o,
        Err(e) => return check(false, e.to_string()),
    };
    let s = &out.summary;
    let share = s.cost.share(TxKind::SubmitMeasurement);
    let count_ok = (s.measurements as f64 - 1241.0).abs() <= 0.1 * 1241.0;
    let share_ok = (0.96..=0.98).contains(&share);
    let released = s.final_state == perfcontract::LifecycleState::Completed;
    check(
        count_ok && share_ok && s.payout_events == 1 && released,
        format!(
            "measurements {} (1117..=1365), submit share {share:.4}, payout events {}, final {:?}",
            s.measurements, s.payout_events, s.final_state
        ),
    )
}

// ---- 5 ----

fn conservation() -> Outcome {
    let configs: Vec<ScenarioConfig> = (0..200).map(|s| small_config(10_000 + s)).collect();
    let deactivated = configs.iter().filter(|c| c.deactivate_at.is_some()).count();
    let outcomes = perfcontract::scenario::run_batch(&configs, Mode::Parallel);
    let mut checked = 0u64;
    let mut tiers_seen = [0usize; 3];
    let mut failures = Vec::new();
    for (c, o) in configs.iter().zip(outcomes) {
        let o = match o {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("seed {}: {e}", c.seed));
                continue;
            }
        };
        let audit = o.summary.audit.clone().unwrap_or_default();
        checked += audit.checked;
        let contract = o.ledger.contract().unwrap();
        let paid: Amount = Role::PAYEES.iter().map(|r| contract.redeemed(*r)).sum();
        if !audit.is_clean()
            || audit.checked != o.ledger.log().len() as u64
            || paid + contract.refunded() + contract.holdings() != contract.funded()
        {
            failures.push(format!("seed {}: violations {:?}", c.seed, audit.violations));
        }
        for r in contract.results() {
            for a in r.fm.iter().chain(r.contractor.iter()) {
                tiers_seen[a.tier as usize] += 1;
            }
        }
    }
    check(
        failures.is_empty() && tiers_seen.iter().all(|n| *n > 0),
        format!(
            "200 scenarios ({deactivated} deactivated mid-run), {checked} per-transaction checks, \
             awards Full/Reduced/Fail {tiers_seen:?}, failures {failures:?}"
        ),
    )
}

// ---- 6 ----

/// Brute-force window evaluation straight from the measurement log.
fn brute_force(p: &CaseParams, log: &[Measurement], kind: WindowKind, index: u64) -> (Vec<String>, Vec<Tier>, Vec<Amount>) {
    let step = match kind {
        WindowKind::Thermal => p.thermal_interval,
        WindowKind::Energy => p.energy_interval,
    };
    let lo = p.start_time + index * step;
    let hi = (lo + step).min(p.start_time + p.duration);
    let mean = |m: Metric| -> Option<f64> {
        let xs: Vec<i64> = log
            .iter()
            .filter(|x| x.metric == m && x.timestamp >= lo && x.timestamp < hi)
            .map(|x| x.value.thousandths())
            .collect();
        (!xs.is_empty()).then(|| xs.iter().map(|v| i128::from(*v)).sum::<i128>() as f64 / xs.len() as f64 / 1000.0)
    };
    let b = &p.baselines;
    let fmt = |r: Option<f64>| r.map_or("-".to_string(), |v| format!("{v:.6}"));
    let band = |r: Option<f64>, full: (f64, f64), reduced: (f64, f64)| match r {
        None => Tier::Fail,
        Some(x) if x >= full.0 && x <= full.1 => Tier::Full,
        Some(x) if x >= reduced.0 && x <= reduced.1 => Tier::Reduced,
        Some(_) => Tier::Fail,
    };
    let pay = |t: Tier, fee: Amount| match t {
        Tier::Full => fee,
        Tier::Reduced => fee * u128::from(p.reduced_fraction.num()) / u128::from(p.reduced_fraction.den()),
        Tier::Fail => 0,
    };
    match kind {
        WindowKind::Thermal => {
            let t = mean(Metric::Temperature).map(|m| m / b.temperature_c);
            let rh = mean(Metric::Humidity).map(|m| m / b.humidity_pct);
            let co2 = mean(Metric::Co2).map(|m| m / b.co2_ppm);
            let tiers = vec![
                band(t, (0.9, 1.1), (0.8, 1.2)),
                band(rh, (0.75, 1.5), (0.4, 1.8)),
                band(co2, (f64::NEG_INFINITY, 1.0), (f64::NEG_INFINITY, 1.1)),
            ];
            let greens = tiers.iter().filter(|x| **x == Tier::Full).count();
            let reds = tiers.iter().filter(|x| **x == Tier::Fail).count();
            let fm = if greens >= 2 {
                Tier::Full
            } else if reds >= 2 {
                Tier::Fail
            } else {
                Tier::Reduced
            };
            let reward = pay(fm, p.fees.fm_fee_per_interval);
            let mut all = tiers;
            all.push(fm);
            (vec![fmt(t), fmt(rh), fmt(co2)], all, vec![reward])
        }
        WindowKind::Energy => {
            let ep = mean(Metric::Energy).map(|m| m / b.energy_kwh);
            let t = mean(Metric::Temperature).map(|m| m / b.temperature_c);
            let tier = match (ep, t) {
                (Some(e), Some(t)) if e <= 1.0 && t >= 0.8 => Tier::Full,
                (Some(e), Some(_)) if e <= 1.5 => Tier::Reduced,
                (Some(_), Some(t)) if t > 1.2 => Tier::Reduced,
                (Some(_), Some(_)) => Tier::Fail,
                _ => Tier::Reduced,
            };
            (vec![fmt(ep), fmt(t)], vec![tier], vec![pay(tier, p.fees.contractor_fee_per_interval)])
        }
    }
}

fn observed(r: &IntervalResult) -> (Vec<String>, Vec<Tier>, Vec<Amount>) {
    let fmt = |r: Option<f64>| r.map_or("-".to_string(), |v| format!("{v:.6}"));
    match r.kind {
        WindowKind::Thermal => {
            let fm = r.fm.unwrap();
            let mut tiers: Vec<Tier> = Metric::COMFORT.iter().map(|m| r.tiers[m]).collect();
            tiers.push(fm.tier);
            (vec![fmt(r.ratios.tc_t), fmt(r.ratios.tc_rh), fmt(r.ratios.tc_co2)], tiers, vec![fm.reward])
        }
        WindowKind::Energy => {
            let c = r.contractor.unwrap();
            (vec![fmt(r.ratios.ep), fmt(r.ratios.tc_t)], vec![c.tier], vec![c.reward])
        }
    }
}

fn streaming_batch() -> Outcome {
    let mut windows = 0;
    let mut bad = Vec::new();
    for i in 0..50u64 {
        let mut c = small_config(50_000 + i);
        c.deactivate_at = None;
        c.audit = false;
        let o = match run_scenario(&c) {
            Ok(o) => o,
            Err(e) => {
                bad.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let contract = o.ledger.contract().unwrap();
        let p = contract.case_params().unwrap();
        let log = contract.measurements();
        let streamed = contract.results();
        if streamed.len() as u64 != p.thermal_windows() + p.energy_windows() {
            bad.push(format!("instance {i}: {} windows", streamed.len()));
        }
        for r in streamed {
            windows += 1;
            if observed(r) != brute_force(p, log, r.kind, r.index) {
                bad.push(format!("instance {i} {:?} {}", r.kind, r.index));
            }
        }
        for mode in [Mode::Sequential, Mode::Parallel] {
            if batch::recompute_contract(contract, mode) != streamed {
                bad.push(format!("instance {i}: batch {mode:?} differs"));
            }
        }
    }
    check(bad.is_empty(), format!("50 instances, {windows} windows, mismatches {bad:?}"))
}

// ---- 7 ----

fn access_fuzz() -> Outcome {
    let mut ledger = Ledger::default();
    let mut actor = || ledger.create_account(100_000 * COIN).unwrap();
    let (owner, bo, contractor, fm, oracle, outsider) = (actor(), actor(), actor(), actor(), actor(), actor());
    let everyone = [owner, bo, contractor, fm, oracle, outsider];
    let start = REFERENCE_START;
    ledger.advance_clock(start).unwrap();
    let params = CaseParams::reference(start);
    let setup = [
        (owner, Call::Deploy),
        (owner, Call::AddRole { grantee: bo, role: Role::BuildingOwner }),
        (owner, Call::AddRole { grantee: contractor, role: Role::Contractor }),
        (owner, Call::AddRole { grantee: fm, role: Role::FacilityManager }),
        (owner, Call::CreateCase { params: Box::new(params.clone()) }),
        (bo, Call::FundEscrow { amount: params.worst_case_escrow() }),
        (owner, Call::RegisterBackend { backend: oracle }),
    ];
    for (s, c) in setup {
        assert!(ledger.submit(s, c).unwrap().is_accepted());
    }
    // mid-term with pending windows so role checks are what stops each call
    ledger.advance_clock(start + params.duration).unwrap();
    let measurement = Measurement {
        case_id: CASE_ID,
        metric: Metric::Temperature,
        sensor_id: params.sensors.temperature[0].clone(),
        timestamp: start + 10,
        value: "21".parse().unwrap(),
    };
    let ops: Vec<(Call, Vec<Address>)> = vec![
        (Call::AddRole { grantee: outsider, role: Role::Contractor }, vec![owner]),
        (Call::CreateCase { params: Box::new(params.clone()) }, vec![owner]),
        (Call::FundEscrow { amount: params.worst_case_escrow() }, vec![bo]),
        (Call::RegisterBackend { backend: outsider }, vec![owner]),
        (Call::SubmitMeasurement { measurement }, vec![oracle]),
        (Call::EvaluateInterval, vec![owner, bo, contractor, fm, oracle]),
        (Call::Redeem, vec![contractor, fm]),
        (Call::ReleaseEscrow, vec![bo]),
        (Call::Deactivate, vec![owner]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let digest = ledger.contract().unwrap().state_digest();
    let mut bad = 0;
    let mut per_op = vec![0u32; ops.len()];
    for _ in 0..10_000 {
        let k = rng.random_range(0..ops.len());
        let (call, allowed) = &ops[k];
        let wrong: Vec<Address> = everyone.iter().copied().filter(|a| !allowed.contains(a)).collect();
        let sender = wrong[rng.random_range(0..wrong.len())];
        let r = ledger.submit(sender, call.clone()).unwrap();
        per_op[k] += 1;
        if r.rejection() != Some(&Rejection::Unauthorized)
            || ledger.contract().unwrap().state_digest() != digest
            || !ledger.conservation_holds()
        {
            bad += 1;
        }
    }
    check(bad == 0, format!("10000 calls across {} operations {per_op:?}, {bad} not rejected cleanly", ops.len()))
}

// ---- 8 ----

fn determinism() -> Outcome {
    let c = ScenarioConfig::replication(REPLICATION_SEED);
    let (a, b) = match (run_scenario(&c), run_scenario(&c)) {
        (Ok(a), Ok(b)) => (a.summary, b.summary),
        (Err(e), _) | (_, Err(e)) => return check(false, e.to_string()),
    };
    let bytes = |s: &perfcontract::scenario::ScenarioSummary| {
        (
            s.state_digest.clone(),
            serde_json::to_vec(&s.submission).unwrap(),
            serde_json::to_vec(&s.cost).unwrap(),
        )
    };
    let same = bytes(&a) == bytes(&b);

    let mut other = c.clone();
    other.seed += 1;
    other.audit = true;
    let mut audited = c.clone();
    audited.audit = true;
    let schedule_changed = plan_schedule(&c.sampling_policy(), REFERENCE_START, c.case.duration).unwrap()
        != plan_schedule(&other.sampling_policy(), REFERENCE_START, other.case.duration).unwrap();
    let conserved = [audited, other].iter().all(|cfg| {
        run_scenario(cfg).is_ok_and(|o| {
            o.summary.audit.as_ref().is_some_and(|a| a.is_clean())
                && o.ledger.conservation_holds()
                && o.ledger.replay().is_ok_and(|r| r.state_digest() == o.ledger.state_digest())
        })
    });
    check(
        same && schedule_changed && conserved,
        format!(
            "identical digests/reports {same}, seed change alters schedule {schedule_changed}, \
             conservation and replay hold for both seeds {conserved}"
        ),
    )
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run(1, "comfort band boundary matrix", "exact tier equality, endpoints ±1e-9", s(1), band_matrix),
        run(2, "facility-manager rule table", "exact fraction equality, 27 × 6 permutations", s(1), fm_rule_table),
        run(3, "cost arithmetic", "coins 41.33 ± 0.01, fiat 13327 ± 5", s(1), cost_arithmetic),
        run(
            4,
            "two-day replication scenario",
            "count 1241 ± 10%, submit share in [0.96, 0.98], 1 payout event, released",
            s(30),
            replication,
        ),
        run(5, "conservation suite", "exact integer equality after every transaction", s(300), conservation),
        run(
            6,
            "streaming vs brute-force evaluation",
            "exact ratios at 6 decimals, tiers and rewards",
            s(120),
            streaming_batch,
        ),
        run(7, "access-control fuzz", "all rejected Unauthorized, digest unchanged", s(60), access_fuzz),
        run(8, "determinism", "byte-identical digests and reports", s(120), determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
