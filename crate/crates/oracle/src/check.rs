//! Definitional checkers for values and pairs of values.

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;

use secord_core::{ConstraintNetwork, Instantiation, Value, VarId};

use crate::consistency::{ConsistencyId, PairCheck, ValueCheck};
use crate::gac::{current_doms, enumerate_solutions, gac, gac_assigned, has_all_supports, Doms};
use crate::paths::{pair_ok, Walks};
use crate::{check_caps, OracleError};

/// The first value or pair found violating a consistency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    Value { x: VarId, a: Value },
    Pair { x: VarId, a: Value, y: VarId, b: Value },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Value { x, a } => write!(f, "value ({x}, {a})"),
            Violation::Pair { x, a, y, b } => write!(f, "pair {{({x}, {a}), ({y}, {b})}}"),
        }
    }
}

/// Evaluates checks on one fixed network, caching singleton GAC results,
/// walk relations and solution supports.
pub struct Evaluator<'a> {
    net: &'a ConstraintNetwork,
    doms: Doms,
    singles: RefCell<HashMap<(VarId, Value), Option<Doms>>>,
    walks: OnceCell<Result<Walks, OracleError>>,
    in_solution: OnceCell<Vec<Vec<bool>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a ConstraintNetwork) -> Self {
        Evaluator {
            net,
            doms: current_doms(net),
            singles: RefCell::new(HashMap::new()),
            walks: OnceCell::new(),
            in_solution: OnceCell::new(),
        }
    }

    pub fn network(&self) -> &ConstraintNetwork {
        self.net
    }

    /// GAC(P|x=a), `None` for ⊥.
    pub fn singleton(&self, x: VarId, a: Value) -> Option<Doms> {
        if let Some(r) = self.singles.borrow().get(&(x, a)) {
            return r.clone();
        }
        let r = gac_assigned(self.net, &self.doms, &[(x, a)]);
        self.singles.borrow_mut().insert((x, a), r.clone());
        r
    }

    fn survives(&self, x: VarId, a: Value, y: VarId, b: Value) -> bool {
        self.singleton(x, a).is_some_and(|d| d[y.0][b])
    }

    fn walks(&self) -> Result<&Walks, OracleError> {
        self.walks.get_or_init(|| Walks::compute(self.net)).as_ref().map_err(Clone::clone)
    }

    fn in_solution(&self) -> &Vec<Vec<bool>> {
        self.in_solution.get_or_init(|| {
            let mut seen: Vec<Vec<bool>> = self.doms.iter().map(|d| vec![false; d.len()]).collect();
            for s in enumerate_solutions(self.net, usize::MAX) {
                for (x, a) in s.iter() {
                    seen[x.0][a] = true;
                }
            }
            seen
        })
    }

    pub fn check_value(&self, vc: ValueCheck, x: VarId, a: Value) -> bool {
        match vc {
            ValueCheck::Gac => has_all_supports(self.net, &self.doms, x, a),
            ValueCheck::Sac => self.singleton(x, a).is_some(),
            ValueCheck::BiSac => {
                let mut reduced = self.doms.clone();
                for y in self.net.vars().filter(|&y| y != x) {
                    for b in self.net.domain(y).values() {
                        if !self.survives(y, b, x, a) {
                            reduced[y.0][b] = false;
                        }
                    }
                }
                gac_assigned(self.net, &reduced, &[(x, a)]).is_some()
            }
            ValueCheck::Inverse => self.in_solution()[x.0][a],
        }
    }

    fn third_vars(&self, x: VarId, y: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.net.vars().filter(move |&z| z != x && z != y)
    }

    fn path_witness(&self, x: VarId, a: Value, y: VarId, b: Value, z: VarId) -> bool {
        self.net.domain(z).values().any(|c| pair_ok(self.net, x, a, z, c) && pair_ok(self.net, y, b, z, c))
    }

    /// Pair check; the pair must be locally consistent.
    pub fn check_pair(&self, pc: PairCheck, x: VarId, a: Value, y: VarId, b: Value) -> Result<bool, OracleError> {
        let net = self.net;
        let bound = net.binary_between(x, y).is_some();
        if pc.is_conservative() && !bound {
            return Ok(true);
        }
        Ok(match pc {
            PairCheck::Pc => self.third_vars(x, y).all(|z| self.path_witness(x, a, y, b, z)),
            PairCheck::ThreeC | PairCheck::C3c => self.third_vars(x, y).all(|z| {
                net.domain(z).values().any(|c| {
                    let triple = Instantiation::new([(x, a), (y, b), (z, c)]).expect("distinct variables");
                    net.is_locally_consistent(&triple).expect("known variables")
                })
            }),
            PairCheck::Dc | PairCheck::Cdc => self.survives(x, a, y, b) && self.survives(y, b, x, a),
            PairCheck::TwoSac | PairCheck::C2sac => gac_assigned(net, &self.doms, &[(x, a), (y, b)]).is_some(),
            PairCheck::Ppc => self.walks()?.in_every_walk(x, a, y, b),
            PairCheck::Cpc => self
                .third_vars(x, y)
                .filter(|&z| net.binary_between(x, z).is_some() && net.binary_between(y, z).is_some())
                .all(|z| self.path_witness(x, a, y, b, z)),
        })
    }

    /// Locally consistent pairs `{(x, a), (y, b)}` with `x < y`.
    pub fn pairs(&self) -> Vec<(VarId, Value, VarId, Value)> {
        let net = self.net;
        let mut out = Vec::new();
        for x in net.vars() {
            for y in net.vars().filter(|&y| y > x) {
                for a in net.domain(x).values() {
                    for b in net.domain(y).values() {
                        if pair_ok(net, x, a, y, b) {
                            out.push((x, a, y, b));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn value_violations(&self, vc: ValueCheck) -> Vec<(VarId, Value)> {
        self.net
            .vars()
            .flat_map(|x| self.net.domain(x).values().map(move |a| (x, a)))
            .filter(|&(x, a)| !self.check_value(vc, x, a))
            .collect()
    }

    pub fn pair_violations(&self, pc: PairCheck) -> Result<Vec<(VarId, Value, VarId, Value)>, OracleError> {
        let mut out = Vec::new();
        for (x, a, y, b) in self.pairs() {
            if !self.check_pair(pc, x, a, y, b)? {
                out.push((x, a, y, b));
            }
        }
        Ok(out)
    }

    /// First violation of `phi`, values before pairs. ⊥ violates nothing.
    pub fn first_violation(&self, phi: ConsistencyId) -> Result<Option<Violation>, OracleError> {
        if self.net.is_failed() {
            return Ok(None);
        }
        let (vc, pc) = phi.parts();
        if let Some(vc) = vc {
            for x in self.net.vars() {
                for a in self.net.domain(x).values() {
                    if !self.check_value(vc, x, a) {
                        return Ok(Some(Violation::Value { x, a }));
                    }
                }
            }
        }
        if let Some(pc) = pc {
            for (x, a, y, b) in self.pairs() {
                if !self.check_pair(pc, x, a, y, b)? {
                    return Ok(Some(Violation::Pair { x, a, y, b }));
                }
            }
        }
        Ok(None)
    }
}

fn require_pair(net: &ConstraintNetwork, x: VarId, a: Value, y: VarId, b: Value) -> Result<(), OracleError> {
    for v in [x, y] {
        if v.0 >= net.num_vars() {
            return Err(OracleError::Network(secord_core::NetworkError::UnknownVariable(v)));
        }
    }
    if x == y || !pair_ok(net, x, a, y, b) {
        return Err(OracleError::NotLocallyConsistent);
    }
    Ok(())
}

/// Checks the second-order part of `phi` on one locally consistent pair.
/// Consistencies without a pair part accept every pair.
pub fn check_pair(phi: ConsistencyId, net: &ConstraintNetwork, x: VarId, a: Value, y: VarId, b: Value) -> Result<bool, OracleError> {
    check_caps(net)?;
    require_pair(net, x, a, y, b)?;
    match phi.parts().1 {
        Some(pc) => Evaluator::new(net).check_pair(pc, x, a, y, b),
        None => Ok(true),
    }
}

/// Checks the first-order part of `phi` on a value of the current domain.
pub fn check_value(phi: ConsistencyId, net: &ConstraintNetwork, x: VarId, a: Value) -> Result<bool, OracleError> {
    check_caps(net)?;
    if x.0 >= net.num_vars() {
        return Err(OracleError::Network(secord_core::NetworkError::UnknownVariable(x)));
    }
    if !net.domain(x).contains(a) {
        return Err(OracleError::Network(secord_core::NetworkError::ValueNotInDomain { var: x, value: a }));
    }
    match phi.parts().0 {
        Some(vc) => Ok(Evaluator::new(net).check_value(vc, x, a)),
        None => Ok(true),
    }
}

/// `Ok(None)` iff `net` is `phi`-consistent.
pub fn is_consistent(phi: ConsistencyId, net: &ConstraintNetwork) -> Result<Option<Violation>, OracleError> {
    check_caps(net)?;
    Evaluator::new(net).first_violation(phi)
}

/// Every 2-length graph-path is consistent.
pub fn two_length_graph_paths_consistent(net: &ConstraintNetwork) -> Result<bool, OracleError> {
    check_caps(net)?;
    let ev = Evaluator::new(net);
    Ok(ev.pairs().into_iter().all(|(x, a, y, b)| {
        net.vars()
            .filter(|&z| z != x && z != y && net.binary_between(x, z).is_some() && net.binary_between(z, y).is_some())
            .all(|z| ev.path_witness(x, a, y, b, z))
    }))
}

/// Every graph-path (not only closed ones) is consistent, via walk relations.
pub fn graph_paths_consistent(net: &ConstraintNetwork) -> Result<bool, OracleError> {
    check_caps(net)?;
    let ev = Evaluator::new(net);
    let walks = ev.walks()?;
    Ok(ev.pairs().into_iter().all(|(x, a, y, b)| walks.in_every_walk(x, a, y, b)))
}

/// Whether the network's values and relations all agree with `gac` (no value
/// lacks a support).
pub fn is_arc_consistent(net: &ConstraintNetwork) -> bool {
    !net.is_failed() && gac(net, current_doms(net)).is_some_and(|d| d == current_doms(net))
}
