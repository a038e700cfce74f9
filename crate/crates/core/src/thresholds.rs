//! Absolute thresholds, hierarchy tables and the missing-one convergence study.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::cores::{core_subspaces, HierarchySpec};
use crate::exec::Executor;
use crate::measures::CoherenceId;
use crate::opt::{outer_maximize, ObjectiveSpec, SearchConfig, ThresholdResult};
use crate::{Error, Result};

/// Storage for finished threshold searches, keyed by [`cache_key`].
///
/// Implementations must tolerate concurrent readers.
pub trait ThresholdCache: Sync {
    fn get(&self, key: &str) -> Option<ThresholdResult>;
    fn put(&self, key: &str, value: &ThresholdResult);
}

/// Canonical description of everything that can change a threshold.
pub fn cache_key(id: CoherenceId, spec: HierarchySpec, cfg: &SearchConfig) -> String {
    format!("threshold|{id:?}|{spec:?}|{cfg:?}")
}

/// Largest coherence reachable by the free states of `spec`, or the
/// sentinel 1 when the family already contains `(|m⟩ + |n⟩)/√2`.
pub fn absolute_threshold<E: Executor>(
    id: CoherenceId,
    spec: HierarchySpec,
    cfg: &SearchConfig,
    exec: &E,
    cache: Option<&dyn ThresholdCache>,
) -> Result<ThresholdResult> {
    let key = cache_key(id, spec, cfg);
    if let Some(hit) = cache.and_then(|c| c.get(&key)) {
        return Ok(hit);
    }
    let family = core_subspaces(spec, id, &cfg.space()?)?;
    let result = if family.saturates(id) {
        ThresholdResult::sentinel(format!(
            "{spec} contains a core state with both |{}> and |{}>",
            id.m(),
            id.n()
        ))
    } else {
        outer_maximize(&ObjectiveSpec::coherence(id), spec, cfg, exec)?
    };
    if let Some(c) = cache {
        c.put(&key, &result);
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub order: usize,
    pub spec: HierarchySpec,
    pub result: ThresholdResult,
}

/// Thresholds of an ordered family for several orders.
///
/// Families are nested in their order, so a lower-order maximizer is also
/// free at higher order. Rows are computed in ascending order and a row
/// whose search came out below its predecessor inherits the predecessor's
/// result, which keeps the table nondecreasing.
pub fn threshold_table<E: Executor>(
    id: CoherenceId,
    kind: HierarchySpec,
    orders: &[usize],
    cfg: &SearchConfig,
    exec: &E,
    cache: Option<&dyn ThresholdCache>,
) -> Result<Vec<TableRow>> {
    if orders.is_empty() {
        return Err(Error::Spec("order list is empty".into()));
    }
    let mut sorted = orders.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows: Vec<TableRow> = Vec::with_capacity(sorted.len());
    for &order in &sorted {
        let spec = kind.with_order(order);
        let mut result = absolute_threshold(id, spec, cfg, exec, cache)?;
        if let Some(prev) = rows.last() {
            if result.value < prev.result.value {
                let mut carried = prev.result.clone();
                carried.diagnostics.note = Some(format!(
                    "search gave {:.6}; carried over from {}",
                    result.value, prev.spec
                ));
                result = carried;
            }
        }
        rows.push(TableRow {
            order,
            spec,
            result,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_max: usize,
    pub excluded: usize,
    pub one_minus_t: f64,
    /// `1 − T` as searched, before carrying the smaller-`N` value over.
    pub raw_one_minus_t: f64,
}

/// `1 − T` for core states spanning `|0⟩..|N⟩` without `|excluded⟩`, for
/// each `N` in `n_range`. Rows are made nonincreasing in `N` the same way
/// [`threshold_table`] carries results upward.
pub fn convergence_study<E: Executor>(
    id: CoherenceId,
    n_range: &[usize],
    excluded: usize,
    cfg: &SearchConfig,
    exec: &E,
    cache: Option<&dyn ThresholdCache>,
) -> Result<Vec<ConvergenceRow>> {
    if excluded != id.m() && excluded != id.n() {
        return Err(Error::Spec(format!(
            "excluded index {excluded} must be {} or {}",
            id.m(),
            id.n()
        )));
    }
    if n_range.is_empty() {
        return Err(Error::Spec("N range is empty".into()));
    }
    let mut ns = n_range.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for &n_max in &ns {
        let spec = HierarchySpec::MissingOne { n_max, excluded };
        let t = absolute_threshold(id, spec, cfg, exec, cache)?.value;
        let raw = 1.0 - t;
        let one_minus_t = rows.last().map_or(raw, |prev| raw.min(prev.one_minus_t));
        rows.push(ConvergenceRow {
            n_max,
            excluded,
            one_minus_t,
            raw_one_minus_t: raw,
        });
    }
    Ok(rows)
}
