// SPDX-License-Identifier: Apache-2.0

//! Offline recomputation of interval results from a stored measurement log.
//!
//! Windows are independent once their samples are bucketed, so evaluation
//! fans out over windows under [`Mode::Parallel`].

use super::case::{CaseParams, WindowKind};
use super::window::{self, IntervalResult, WindowAccumulator};
use super::{Measurement, PerformanceContract};
use crate::exec::{self, Mode};

/// Recomputes the first `thermal` thermal windows and `energy` energy
/// windows of a case from `measurements`, in evaluation order.
pub fn recompute(
    params: &CaseParams,
    case_id: u64,
    measurements: &[Measurement],
    thermal: u64,
    energy: u64,
    mode: Mode,
) -> Vec<IntervalResult> {
    let bucket = |kind: WindowKind, count: u64| -> Vec<WindowAccumulator> {
        let mut accs = vec![WindowAccumulator::default(); count as usize];
        for m in measurements.iter().filter(|m| m.case_id == case_id) {
            if m.timestamp < params.start_time || m.timestamp >= params.end_time() {
                continue;
            }
            let k = params.window_of(kind, m.timestamp);
            if let Some(acc) = accs.get_mut(k as usize) {
                acc.add(m.metric, m.value);
            }
        }
        accs
    };
    let mut jobs: Vec<(WindowKind, u64, WindowAccumulator)> = Vec::new();
    for (kind, count) in [(WindowKind::Thermal, thermal), (WindowKind::Energy, energy)] {
        jobs.extend(
            bucket(kind, count)
                .into_iter()
                .enumerate()
                .map(|(i, acc)| (kind, i as u64, acc)),
        );
    }
    jobs.sort_by_key(|(kind, index, _)| window::evaluation_order(params, *kind, *index));
    exec::map(mode, &jobs, |(kind, index, acc)| {
        window::evaluate(params, case_id, *kind, *index, acc)
    })
}

/// Recomputes exactly the windows `contract` has evaluated so far.
pub fn recompute_contract(contract: &PerformanceContract, mode: Mode) -> Vec<IntervalResult> {
    let (Some(params), Some(case_id)) = (contract.case_params(), contract.case_id()) else {
        return Vec::new();
    };
    let (thermal, energy) = contract.evaluated_counts();
    recompute(params, case_id, contract.measurements(), thermal, energy, mode)
}
