//! GAC propagation with residues, a restoration trail and singleton checks.

use std::collections::VecDeque;

use rand::Rng;

use crate::network::{for_each_tuple, ConstraintId, ConstraintNetwork, Polarity, Residues, Tuple, Value, VarId};

/// One recorded deletion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrailEntry {
    Value(VarId, Value),
    Tuple(ConstraintId, Tuple),
}

#[derive(Debug, Clone)]
struct Frame {
    start: usize,
    failed: bool,
    num_constraints: usize,
    pending: (bool, Vec<VarId>, Vec<ConstraintId>),
}

/// Stack of frames recording deletions so they can be undone. Deletions made
/// while no frame is open are permanent and not recorded.
#[derive(Debug, Clone, Default)]
pub struct Trail {
    entries: Vec<TrailEntry>,
    frames: Vec<Frame>,
}

impl Trail {
    pub fn new() -> Self {
        Trail::default()
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub(crate) fn record(&mut self, e: TrailEntry) {
        if !self.frames.is_empty() {
            self.entries.push(e);
        }
    }

    pub fn push(&mut self, net: &ConstraintNetwork) {
        self.frames.push(Frame {
            start: self.entries.len(),
            failed: net.is_failed(),
            num_constraints: net.num_constraints(),
            pending: net.pending.snapshot(),
        });
    }

    /// Undoes every deletion since the matching `push`.
    pub fn pop(&mut self, net: &mut ConstraintNetwork) {
        let frame = self.frames.pop().expect("pop without push");
        assert_eq!(
            frame.num_constraints,
            net.num_constraints(),
            "constraints may not be created inside a trail frame"
        );
        for e in self.entries.drain(frame.start..).rev() {
            match e {
                TrailEntry::Value(x, a) => net.restore_value(x, a),
                TrailEntry::Tuple(c, t) => net.restore_tuple(c, &t),
            }
        }
        net.set_failed(frame.failed);
        net.pending.restore(&frame.pending);
    }

    /// Entries recorded since the innermost frame was pushed.
    pub fn frame_entries(&self) -> &[TrailEntry] {
        match self.frames.last() {
            Some(f) => &self.entries[f.start..],
            None => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationStatus {
    Consistent,
    /// `culprit` is the constraint whose revision emptied a domain, or whose
    /// relation is empty. It is `None` when the failure was already present.
    Wipeout { culprit: Option<ConstraintId> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagationOutcome {
    pub status: PropagationStatus,
    pub deleted_values: u64,
    pub deleted_tuples: u64,
}

impl PropagationOutcome {
    pub fn is_consistent(&self) -> bool {
        self.status == PropagationStatus::Consistent
    }

    pub fn culprit(&self) -> Option<ConstraintId> {
        match self.status {
            PropagationStatus::Wipeout { culprit } => culprit,
            PropagationStatus::Consistent => None,
        }
    }

    fn wipeout(culprit: Option<ConstraintId>, deleted_values: u64) -> Self {
        PropagationOutcome { status: PropagationStatus::Wipeout { culprit }, deleted_values, deleted_tuples: 0 }
    }
}

/// Enforces GAC on the whole network.
pub fn enforce_gac(net: &mut ConstraintNetwork, trail: &mut Trail) -> PropagationOutcome {
    net.schedule_all();
    propagate(net, trail)
}

/// Enforces GAC, revising only constraints affected by changes since the last
/// fixpoint.
pub fn propagate(net: &mut ConstraintNetwork, trail: &mut Trail) -> PropagationOutcome {
    run(net, trail, None)
}

/// Like [`enforce_gac`] but with a randomized revision order.
pub fn enforce_gac_shuffled(net: &mut ConstraintNetwork, trail: &mut Trail, rng: &mut impl Rng) -> PropagationOutcome {
    net.schedule_all();
    let mut pick = |len: usize| rng.gen_range(0..len);
    run(net, trail, Some(&mut pick))
}

fn empty_relation(net: &ConstraintNetwork) -> Option<ConstraintId> {
    net.constraint_ids().find(|&c| net.constraint(c).relation_len() == 0)
}

fn run(net: &mut ConstraintNetwork, trail: &mut Trail, mut pick: Option<&mut dyn FnMut(usize) -> usize>) -> PropagationOutcome {
    if net.is_failed() {
        net.pending.clear();
        return PropagationOutcome::wipeout(empty_relation(net), 0);
    }
    let e = net.num_constraints();
    let mut queued = vec![false; e];
    let mut queue: VecDeque<ConstraintId> = VecDeque::new();
    let enqueue = |c: ConstraintId, queue: &mut VecDeque<ConstraintId>, queued: &mut Vec<bool>| {
        if !queued[c.0] {
            queued[c.0] = true;
            queue.push_back(c);
        }
    };
    if net.pending.full {
        for c in net.constraint_ids() {
            enqueue(c, &mut queue, &mut queued);
        }
    } else {
        let vars = net.pending.vars.clone();
        let cons = net.pending.cons.clone();
        for c in cons {
            enqueue(c, &mut queue, &mut queued);
        }
        for x in vars {
            for &c in net.constraints_of(x) {
                enqueue(c, &mut queue, &mut queued);
            }
        }
    }
    net.pending.clear();

    let mut deleted = 0u64;
    let mut changed: Vec<VarId> = Vec::new();
    loop {
        let c = match pick.as_mut() {
            Some(p) if !queue.is_empty() => {
                let i = p(queue.len());
                queue.swap_remove_back(i).expect("index in range")
            }
            _ => match queue.pop_front() {
                Some(c) => c,
                None => break,
            },
        };
        queued[c.0] = false;
        changed.clear();
        let arity = net.constraint(c).arity();
        for pos in 0..arity {
            let x = net.constraint(c).scope()[pos];
            let removed = revise(net, trail, c, pos);
            if removed > 0 {
                deleted += removed;
                changed.push(x);
                if net.domain(x).is_empty() {
                    net.pending.clear();
                    return PropagationOutcome::wipeout(Some(c), deleted);
                }
            }
        }
        for &x in &changed {
            for &c2 in net.constraints_of(x) {
                if c2 != c {
                    enqueue(c2, &mut queue, &mut queued);
                }
            }
        }
    }
    net.pending.clear();
    PropagationOutcome { status: PropagationStatus::Consistent, deleted_values: deleted, deleted_tuples: 0 }
}

/// Removes values of the variable at `pos` lacking a support on `c`.
fn revise(net: &mut ConstraintNetwork, trail: &mut Trail, c: ConstraintId, pos: usize) -> u64 {
    let x = net.constraint(c).scope()[pos];
    let values: Vec<Value> = net.domain(x).values().collect();
    let mut removed = 0;
    for a in values {
        if !has_support(net, c, pos, a) {
            net.remove_value(x, a, trail);
            removed += 1;
        }
    }
    removed
}

fn valid(net: &ConstraintNetwork, scope: &[VarId], t: &[Value]) -> bool {
    scope.iter().zip(t).all(|(v, &b)| net.domain(*v).contains(b))
}

fn has_support(net: &mut ConstraintNetwork, c: ConstraintId, pos: usize, a: Value) -> bool {
    let con = net.constraint(c);
    if con.arity() == 2 {
        let other = con.scope()[1 - pos];
        if let Residues::Binary(res) = &con.residues {
            if let Some(b) = res[pos][a] {
                if net.domain(other).contains(b) && con.allows_binary(pos, a, b) {
                    return true;
                }
            }
        }
        let found = net.domain(other).values().find(|&b| con.allows_binary(pos, a, b));
        if let Some(b) = found {
            let other_pos = 1 - pos;
            if let Residues::Binary(res) = &mut net.constraint_mut(c).residues {
                res[pos][a] = Some(b);
                res[other_pos][b] = Some(a);
            }
            return true;
        }
        return false;
    }

    let scope = con.scope().to_vec();
    if let Residues::Nary(res) = &con.residues {
        if let Some(t) = &res[pos][a] {
            if valid(net, &scope, t) && con.allows(t) {
                return true;
            }
        }
    }
    let found: Option<Tuple> = match con.polarity() {
        Polarity::Supports => con
            .table()
            .iter()
            .find(|t| t[pos] == a && valid(net, &scope, t))
            .cloned(),
        Polarity::Conflicts => {
            // odometer over the current domains with position `pos` fixed to `a`
            let doms: Vec<Vec<Value>> = scope
                .iter()
                .enumerate()
                .map(|(i, v)| if i == pos { vec![a] } else { net.domain(*v).values().collect() })
                .collect();
            let sizes: Vec<usize> = doms.iter().map(Vec::len).collect();
            let mut hit = None;
            let mut t = vec![0; scope.len()];
            for_each_tuple(&sizes, |idx| {
                for (i, &k) in idx.iter().enumerate() {
                    t[i] = doms[i][k];
                }
                if !con.table().contains(&t) {
                    hit = Some(t.clone());
                    return false;
                }
                true
            });
            hit
        }
    };
    match found {
        Some(t) => {
            if let Residues::Nary(res) = &mut net.constraint_mut(c).residues {
                for (i, &b) in t.iter().enumerate() {
                    res[i][b] = Some(t.clone());
                }
            }
            true
        }
        None => false,
    }
}

/// Runs GAC on `P|x=a` inside a fresh trail frame, hands the reduced network
/// and the frame's deletions to `inspect`, then restores the network.
pub fn singleton_check<R>(
    net: &mut ConstraintNetwork,
    trail: &mut Trail,
    x: VarId,
    a: Value,
    inspect: impl FnOnce(&ConstraintNetwork, &[TrailEntry], &PropagationOutcome) -> R,
) -> (PropagationOutcome, R) {
    debug_assert!(net.domain(x).contains(a));
    trail.push(net);
    net.assign_trailed(x, a, trail);
    let outcome = propagate(net, trail);
    let r = inspect(net, trail.frame_entries(), &outcome);
    trail.pop(net);
    (outcome, r)
}

/// Values deleted from each variable, grouped by variable in first-deletion
/// order, excluding `skip`.
pub fn deleted_by_var(entries: &[TrailEntry], skip: VarId) -> Vec<(VarId, Vec<Value>)> {
    let mut out: Vec<(VarId, Vec<Value>)> = Vec::new();
    for e in entries {
        if let TrailEntry::Value(y, b) = e {
            if *y == skip {
                continue;
            }
            match out.iter_mut().find(|(v, _)| v == y) {
                Some((_, vals)) => vals.push(*b),
                None => out.push((*y, vec![*b])),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ConstraintSpec, NetworkOrdering};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(i: usize) -> VarId {
        VarId(i)
    }

    fn singleton_gap() -> ConstraintNetwork {
        ConstraintNetwork::build(
            &[2, 2, 2, 2],
            vec![
                ConstraintSpec::supports(vec![v(0), v(1), v(2)], vec![vec![0, 0, 0], vec![1, 1, 1]]),
                ConstraintSpec::supports(vec![v(0), v(1), v(3)], vec![vec![0, 1, 0], vec![1, 0, 1]]),
            ],
        )
        .unwrap()
    }

    fn doms(net: &ConstraintNetwork) -> Vec<Vec<Value>> {
        net.domains().iter().map(|d| d.values().collect()).collect()
    }

    #[test]
    fn less_than_example() {
        // values 1,2 encoded as 0,1
        let mut net =
            ConstraintNetwork::build(&[2, 2], vec![ConstraintSpec::supports(vec![v(0), v(1)], vec![vec![0, 1]])])
                .unwrap();
        let out = enforce_gac(&mut net, &mut Trail::new());
        assert!(out.is_consistent());
        assert_eq!(out.deleted_values, 2);
        assert_eq!(doms(&net), vec![vec![0], vec![1]]);
    }

    #[test]
    fn singleton_gap_singleton_checks_on_y_fail() {
        let mut net = singleton_gap();
        let mut trail = Trail::new();
        assert!(enforce_gac(&mut net, &mut trail).is_consistent());
        for a in 0..2 {
            let (out, ()) = singleton_check(&mut net, &mut trail, v(2), a, |_, _, _| ());
            assert!(!out.is_consistent(), "y={a}");
            assert!(out.culprit().is_some());
        }
        assert_eq!(net.total_domain_size(), 8);
    }

    #[test]
    fn singleton_gap_assign_then_gac_wipes() {
        let mut net = singleton_gap();
        net.assign(v(2), 0).unwrap();
        assert!(!enforce_gac(&mut net, &mut Trail::new()).is_consistent());
    }

    #[test]
    fn fixpoint_is_idempotent() {
        let mut net = singleton_gap();
        let mut trail = Trail::new();
        enforce_gac(&mut net, &mut trail);
        let out = enforce_gac(&mut net, &mut trail);
        assert!(out.is_consistent());
        assert_eq!(out.deleted_values, 0);
    }

    #[test]
    fn isolated_singleton_check() {
        let mut net = ConstraintNetwork::build(&[3], vec![]).unwrap();
        let mut trail = Trail::new();
        let (out, deleted) = singleton_check(&mut net, &mut trail, v(0), 1, |_, entries, _| entries.len());
        assert!(out.is_consistent());
        assert_eq!(deleted, 2);
        assert_eq!(net.domain(v(0)).size(), 3);
    }

    #[test]
    fn conflicts_nary_support_seeking() {
        // all-different on three variables over {0,1}
        let tuples: Vec<Tuple> = (0..8)
            .map(|m| vec![m & 1, (m >> 1) & 1, (m >> 2) & 1])
            .filter(|t| t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            .collect();
        let mut net =
            ConstraintNetwork::build(&[2, 2, 2], vec![ConstraintSpec::conflicts(vec![v(0), v(1), v(2)], tuples)])
                .unwrap();
        let out = enforce_gac(&mut net, &mut Trail::new());
        assert!(!out.is_consistent());
        assert_eq!(out.culprit(), Some(ConstraintId(0)));
    }

    #[test]
    fn trail_restores_tuples_and_values() {
        let mut net =
            ConstraintNetwork::build(&[2, 2], vec![ConstraintSpec::conflicts(vec![v(0), v(1)], vec![vec![0, 0]])])
                .unwrap();
        let before = net.clone();
        let mut trail = Trail::new();
        trail.push(&net);
        net.forbid_tuple(ConstraintId(0), &[1, 1], &mut trail);
        net.remove_value(v(0), 0, &mut trail);
        enforce_gac(&mut net, &mut trail);
        assert_ne!(net.compare_raw(&before).unwrap(), NetworkOrdering::Equal);
        trail.pop(&mut net);
        assert_eq!(net.compare_raw(&before).unwrap(), NetworkOrdering::Equal);
        assert!(!net.is_failed());
    }

    #[test]
    fn wipeout_is_restored_by_pop() {
        let mut net = singleton_gap();
        let mut trail = Trail::new();
        trail.push(&net);
        net.assign_trailed(v(2), 0, &mut trail);
        assert!(!propagate(&mut net, &mut trail).is_consistent());
        trail.pop(&mut net);
        assert!(!net.is_failed());
        assert_eq!(net.total_domain_size(), 8);
    }

    #[test]
    fn shuffled_orders_agree() {
        let tuples = vec![vec![0, 1], vec![1, 2], vec![2, 0], vec![0, 0]];
        let base = ConstraintNetwork::build(
            &[3, 3, 3],
            vec![
                ConstraintSpec::supports(vec![v(0), v(1)], tuples.clone()),
                ConstraintSpec::supports(vec![v(1), v(2)], vec![vec![1, 1], vec![2, 2], vec![0, 1]]),
            ],
        )
        .unwrap();
        let mut reference = base.clone();
        enforce_gac(&mut reference, &mut Trail::new());
        for seed in 0..10 {
            let mut net = base.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            enforce_gac_shuffled(&mut net, &mut Trail::new(), &mut rng);
            assert_eq!(net.compare_raw(&reference).unwrap(), NetworkOrdering::Equal);
        }
    }

    #[test]
    fn deleted_by_var_groups() {
        let entries = vec![
            TrailEntry::Value(v(0), 1),
            TrailEntry::Value(v(2), 0),
            TrailEntry::Tuple(ConstraintId(0), vec![0, 0]),
            TrailEntry::Value(v(2), 1),
        ];
        assert_eq!(deleted_by_var(&entries, v(0)), vec![(v(2), vec![0, 1])]);
    }
}
