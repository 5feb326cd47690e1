//! Second-order enforcers (sCDC1, sDC1) and the SAC1 and sCPC baselines.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::network::{ConstraintId, ConstraintNetwork, Value, VarId};
use crate::propagation::{deleted_by_var, enforce_gac, propagate, singleton_check, Trail};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EnforceReport {
    pub consistent: bool,
    pub passes: u64,
    pub deleted_values: u64,
    pub deleted_tuples: u64,
    pub added_constraints: u64,
    #[serde(rename = "elapsed_ms", serialize_with = "ser_ms")]
    pub elapsed: Duration,
}

fn ser_ms<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnforceError {
    #[error("sDC1 would need up to {needed} conflict entries, over the budget of {budget}")]
    ResourceExceeded { needed: u128, budget: u64 },
}

#[derive(Debug, Clone)]
pub struct EnforceConfig {
    /// Sweep order; ascending ids when `None`. Must be a permutation of the variables.
    pub var_order: Option<Vec<VarId>>,
    /// Cap on `n(n-1)/2 * d^2` for sDC1.
    pub sdc_budget: u64,
}

impl Default for EnforceConfig {
    fn default() -> Self {
        EnforceConfig { var_order: None, sdc_budget: 100_000_000 }
    }
}

impl EnforceConfig {
    fn order(&self, net: &ConstraintNetwork) -> Vec<VarId> {
        match &self.var_order {
            Some(o) => {
                assert_eq!(o.len(), net.num_vars(), "var_order must list every variable once");
                o.clone()
            }
            None => net.vars().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Learning {
    /// Only tighten existing binary constraints.
    Part,
    /// Also create binary constraints between unconstrained pairs.
    Full,
}

/// Enforces sCDC on binary networks and SAC+CDC on non-binary ones.
pub fn enforce_scdc(net: &mut ConstraintNetwork) -> EnforceReport {
    enforce_scdc_with(net, &EnforceConfig::default())
}

pub fn enforce_scdc_with(net: &mut ConstraintNetwork, cfg: &EnforceConfig) -> EnforceReport {
    second_order(net, cfg, Learning::Part)
}

/// Enforces sDC, which on binary networks is strong path consistency.
pub fn enforce_sdc(net: &mut ConstraintNetwork) -> Result<EnforceReport, EnforceError> {
    enforce_sdc_with(net, &EnforceConfig::default())
}

pub fn enforce_sdc_with(net: &mut ConstraintNetwork, cfg: &EnforceConfig) -> Result<EnforceReport, EnforceError> {
    let n = net.num_vars() as u128;
    let d = net.max_domain_size() as u128;
    let needed = n * n.saturating_sub(1) / 2 * d * d;
    if needed > cfg.sdc_budget as u128 {
        return Err(EnforceError::ResourceExceeded { needed, budget: cfg.sdc_budget });
    }
    Ok(second_order(net, cfg, Learning::Full))
}

#[derive(Default)]
struct Counts {
    values: u64,
    tuples: u64,
    added: u64,
}

fn second_order(net: &mut ConstraintNetwork, cfg: &EnforceConfig, learning: Learning) -> EnforceReport {
    let start = Instant::now();
    let mut trail = Trail::new();
    let mut counts = Counts::default();
    let order = cfg.order(net);
    let n = order.len();

    let finish = |consistent: bool, revisions: u64, counts: &Counts| EnforceReport {
        consistent,
        passes: if n == 0 { 1 } else { revisions.div_ceil(n as u64).max(1) },
        deleted_values: counts.values,
        deleted_tuples: counts.tuples,
        added_constraints: counts.added,
        elapsed: start.elapsed(),
    };

    let out = enforce_gac(net, &mut trail);
    counts.values += out.deleted_values;
    if !out.is_consistent() {
        return finish(false, 0, &counts);
    }
    if n == 0 {
        return finish(true, 0, &counts);
    }

    let mut i = 0;
    let mut marker = 0;
    let mut revisions = 0u64;
    loop {
        revisions += 1;
        if revise_variable(net, &mut trail, order[i], learning, &mut counts) {
            let out = propagate(net, &mut trail);
            counts.values += out.deleted_values;
            if !out.is_consistent() {
                return finish(false, revisions, &counts);
            }
            marker = i;
        }
        i = (i + 1) % n;
        if i == marker {
            break;
        }
    }
    finish(true, revisions, &counts)
}

/// Singleton checks on every value of `x`, learning first- and second-order
/// nogoods. Returns true if anything was deleted or added.
fn revise_variable(
    net: &mut ConstraintNetwork,
    trail: &mut Trail,
    x: VarId,
    learning: Learning,
    counts: &mut Counts,
) -> bool {
    let mut effective = false;
    let values: Vec<Value> = net.domain(x).values().collect();
    for a in values {
        if net.is_failed() {
            break;
        }
        let (out, deleted) = singleton_check(net, trail, x, a, |_, entries, out| {
            if out.is_consistent() {
                deleted_by_var(entries, x)
            } else {
                Vec::new()
            }
        });
        if !out.is_consistent() {
            net.remove_value(x, a, trail);
            counts.values += 1;
            effective = true;
            continue;
        }
        for (y, lost) in deleted {
            match net.binary_between(x, y) {
                Some(c) => {
                    let xpos = net.constraint(c).position(x).expect("x in scope");
                    for b in lost {
                        let t = if xpos == 0 { [a, b] } else { [b, a] };
                        if net.forbid_tuple(c, &t, trail) {
                            counts.tuples += 1;
                            effective = true;
                        }
                    }
                }
                None if learning == Learning::Full => {
                    let pairs: Vec<(Value, Value)> = lost.iter().map(|&b| (a, b)).collect();
                    net.add_binary_conflicts(x, y, &pairs);
                    counts.added += 1;
                    counts.tuples += pairs.len() as u64;
                    effective = true;
                }
                None => {}
            }
        }
    }
    effective
}

/// SAC1: sweeps all values until no singleton check fails.
pub fn enforce_sac1(net: &mut ConstraintNetwork) -> EnforceReport {
    enforce_sac1_with(net, &EnforceConfig::default())
}

pub fn enforce_sac1_with(net: &mut ConstraintNetwork, cfg: &EnforceConfig) -> EnforceReport {
    let start = Instant::now();
    let mut trail = Trail::new();
    let order = cfg.order(net);
    let mut report = EnforceReport { consistent: true, ..Default::default() };
    let out = enforce_gac(net, &mut trail);
    report.deleted_values += out.deleted_values;
    if !out.is_consistent() {
        report.consistent = false;
        report.elapsed = start.elapsed();
        return report;
    }
    'sweeps: loop {
        report.passes += 1;
        let mut changed = false;
        for &x in &order {
            let values: Vec<Value> = net.domain(x).values().collect();
            for a in values {
                if !net.domain(x).contains(a) {
                    continue;
                }
                let (out, ()) = singleton_check(net, &mut trail, x, a, |_, _, _| ());
                if out.is_consistent() {
                    continue;
                }
                net.remove_value(x, a, &mut trail);
                report.deleted_values += 1;
                changed = true;
                let out = propagate(net, &mut trail);
                report.deleted_values += out.deleted_values;
                if !out.is_consistent() {
                    report.consistent = false;
                    break 'sweeps;
                }
            }
        }
        if !changed {
            break;
        }
    }
    report.elapsed = start.elapsed();
    report
}

/// Strong conservative path consistency: GAC plus a witness on the third
/// variable of every triangle of binary constraints.
pub fn enforce_scpc(net: &mut ConstraintNetwork) -> EnforceReport {
    let start = Instant::now();
    let mut trail = Trail::new();
    let mut report = EnforceReport { consistent: true, passes: 1, ..Default::default() };
    let out = enforce_gac(net, &mut trail);
    report.deleted_values += out.deleted_values;
    if !out.is_consistent() {
        report.consistent = false;
        report.elapsed = start.elapsed();
        return report;
    }

    let e = net.num_constraints();
    let n = net.num_vars();
    let mut queued = vec![Vec::new(); e];
    let mut queue: VecDeque<(ConstraintId, VarId)> = VecDeque::new();
    let push = |c: ConstraintId, z: VarId, queue: &mut VecDeque<(ConstraintId, VarId)>, queued: &mut Vec<Vec<bool>>| {
        if queued[c.0].is_empty() {
            queued[c.0] = vec![false; n];
        }
        if !queued[c.0][z.0] {
            queued[c.0][z.0] = true;
            queue.push_back((c, z));
        }
    };
    for c in net.constraint_ids() {
        for z in triangle_apexes(net, c) {
            push(c, z, &mut queue, &mut queued);
        }
    }

    while let Some((c, z)) = queue.pop_front() {
        queued[c.0][z.0] = false;
        let (x, y) = {
            let s = net.constraint(c).scope();
            (s[0], s[1])
        };
        let cxz = net.binary_between(x, z).expect("triangle");
        let cyz = net.binary_between(y, z).expect("triangle");
        let mut removed = Vec::new();
        for a in net.domain(x).values() {
            for b in net.domain(y).values() {
                if !net.constraint(c).allows(&[a, b]) {
                    continue;
                }
                let witnessed = net
                    .domain(z)
                    .values()
                    .any(|w| allows_pair(net, cxz, x, a, w) && allows_pair(net, cyz, y, b, w));
                if !witnessed {
                    removed.push([a, b]);
                }
            }
        }
        if removed.is_empty() {
            continue;
        }
        for t in &removed {
            net.forbid_tuple(c, t, &mut trail);
        }
        report.deleted_tuples += removed.len() as u64;

        let sizes: Vec<usize> = net.domains().iter().map(|d| d.size()).collect();
        let out = propagate(net, &mut trail);
        report.deleted_values += out.deleted_values;
        if !out.is_consistent() {
            report.consistent = false;
            break;
        }
        // c lost tuples: triangles that use c as a side need rechecking
        for w in triangle_apexes(net, c) {
            push(net.binary_between(x, w).unwrap(), y, &mut queue, &mut queued);
            push(net.binary_between(y, w).unwrap(), x, &mut queue, &mut queued);
        }
        // variables that lost values shrink the witness pool of triangles they close
        for v in net.vars() {
            if net.domain(v).size() == sizes[v.0] {
                continue;
            }
            let nbrs: Vec<VarId> = net.binary_neighbors(v).collect();
            for (i, &p) in nbrs.iter().enumerate() {
                for &q in &nbrs[i + 1..] {
                    if let Some(cpq) = net.binary_between(p, q) {
                        push(cpq, v, &mut queue, &mut queued);
                    }
                }
            }
        }
    }
    report.elapsed = start.elapsed();
    report
}

fn allows_pair(net: &ConstraintNetwork, c: ConstraintId, x: VarId, a: Value, b: Value) -> bool {
    let con = net.constraint(c);
    if con.scope()[0] == x {
        con.allows(&[a, b])
    } else {
        con.allows(&[b, a])
    }
}

/// Variables forming a triangle of binary constraints with binary constraint `c`.
fn triangle_apexes(net: &ConstraintNetwork, c: ConstraintId) -> Vec<VarId> {
    let s = net.constraint(c).scope();
    if s.len() != 2 {
        return Vec::new();
    }
    let (x, y) = (s[0], s[1]);
    net.binary_neighbors(x).filter(|&z| z != y && net.binary_between(y, z).is_some()).collect()
}
