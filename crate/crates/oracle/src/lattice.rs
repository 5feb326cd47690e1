//! The known relationships between consistencies and their sampled verification.

use secord_core::{ConstraintNetwork, NetworkOrdering};

use crate::check::is_consistent;
use crate::closure::oracle_closure;
use crate::consistency::ConsistencyId;
use crate::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Panel {
    /// Claimed for binary networks.
    Binary,
    /// Claimed for networks of any arity.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `left` is strictly stronger than `right`.
    Stronger,
    Incomparable,
    Equivalent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeEdge {
    pub left: ConsistencyId,
    pub right: ConsistencyId,
    pub relation: Relation,
    pub panel: Panel,
}

const BINARY_STRICT: &[(&str, &str)] = &[
    ("2SAC", "DC"),
    ("2SAC", "3C"),
    ("2SAC", "C2SAC"),
    ("DC", "CDC"),
    ("3C", "C3C"),
    ("PC", "PPC"),
    ("PC", "CPC"),
    ("C2SAC", "CDC"),
    ("C2SAC", "C3C"),
    ("CDC", "PPC"),
    ("PPC", "C3C"),
    ("C3C", "CPC"),
    ("PPC", "CPC"),
    ("s2SAC", "sDC"),
    ("s2SAC", "s3C"),
    ("s2SAC", "sC2SAC"),
    ("sDC", "sCDC"),
    ("s3C", "sC3C"),
    ("sPC", "sPPC"),
    ("sC2SAC", "sCDC"),
    ("sC2SAC", "sC3C"),
    ("sCDC", "sPPC"),
    ("sPPC", "sCPC"),
    ("sCDC", "SAC"),
    ("SAC", "GAC"),
    ("BiSAC", "SAC"),
    ("sPC", "BiSAC"),
];

const BINARY_INCOMPARABLE: &[(&str, &str)] = &[
    ("PC", "C2SAC"),
    ("DC", "C2SAC"),
    ("3C", "C2SAC"),
    ("sPC", "sC2SAC"),
    ("sDC", "sC2SAC"),
    ("s3C", "sC2SAC"),
    ("sCDC", "BiSAC"),
];

const BINARY_EQUIVALENT: &[(&str, &str)] = &[
    ("PC", "DC"),
    ("PC", "3C"),
    ("sPC", "sDC"),
    ("sPC", "s3C"),
    ("sC3C", "sCPC"),
    ("sCDC", "SAC+CDC"),
];

const GENERAL_STRICT: &[(&str, &str)] = &[
    ("2SAC", "DC"),
    ("2SAC", "3C"),
    ("DC", "PC"),
    ("3C", "PC"),
    ("2SAC", "C2SAC"),
    ("DC", "CDC"),
    ("3C", "C3C"),
    ("PC", "PPC"),
    ("PC", "CPC"),
    ("C2SAC", "CDC"),
    ("C2SAC", "C3C"),
    ("CDC", "PPC"),
    ("C3C", "CPC"),
    ("PPC", "CPC"),
    ("s2SAC", "sDC"),
    ("s2SAC", "sC2SAC"),
    ("sDC", "sPC"),
    ("sDC", "SAC+CDC"),
    ("sDC", "sCDC"),
    ("SAC+CDC", "sCDC"),
    ("sC2SAC", "sCDC"),
    ("sPC", "sPPC"),
    ("sCDC", "sPPC"),
    ("sPPC", "sCPC"),
    ("SAC", "GAC"),
    ("BiSAC", "SAC"),
];

const GENERAL_INCOMPARABLE: &[(&str, &str)] = &[
    ("3C", "DC"),
    ("PC", "C2SAC"),
    ("DC", "C2SAC"),
    ("3C", "C2SAC"),
    ("CDC", "C3C"),
    ("PPC", "C3C"),
    ("PC", "CDC"),
    ("sPC", "sC2SAC"),
    ("sDC", "sC2SAC"),
    ("sPC", "sCDC"),
];

type EdgeList = &'static [(&'static str, &'static str)];

fn id(s: &str) -> ConsistencyId {
    s.parse().expect("known consistency name")
}

/// Every relationship of both panels.
pub fn lattice_edges() -> Vec<LatticeEdge> {
    let groups: [(EdgeList, Relation, Panel); 5] = [
        (BINARY_STRICT, Relation::Stronger, Panel::Binary),
        (BINARY_INCOMPARABLE, Relation::Incomparable, Panel::Binary),
        (BINARY_EQUIVALENT, Relation::Equivalent, Panel::Binary),
        (GENERAL_STRICT, Relation::Stronger, Panel::General),
        (GENERAL_INCOMPARABLE, Relation::Incomparable, Panel::General),
    ];
    groups
        .iter()
        .flat_map(|(list, relation, panel)| {
            list.iter().map(move |(l, r)| LatticeEdge { left: id(l), right: id(r), relation: *relation, panel: *panel })
        })
        .collect()
}

/// A network on which `hold` is satisfied and `fail` is violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WitnessRequirement {
    pub hold: ConsistencyId,
    pub fail: ConsistencyId,
    /// The witness must be a binary network.
    pub binary: bool,
}

impl WitnessRequirement {
    pub fn file_name(&self) -> String {
        format!("{}_not_{}.json", self.hold, self.fail)
    }
}

/// Witnesses needed for strictness and incomparability, deduplicated; a
/// requirement from the binary panel takes precedence.
pub fn witness_requirements() -> Vec<WitnessRequirement> {
    let mut out: Vec<WitnessRequirement> = Vec::new();
    let mut add = |hold, fail, binary| match out.iter_mut().find(|w| w.hold == hold && w.fail == fail) {
        Some(w) => w.binary |= binary,
        None => out.push(WitnessRequirement { hold, fail, binary }),
    };
    for e in lattice_edges() {
        let binary = e.panel == Panel::Binary;
        match e.relation {
            Relation::Stronger => add(e.right, e.left, binary),
            Relation::Incomparable => {
                add(e.left, e.right, binary);
                add(e.right, e.left, binary);
            }
            Relation::Equivalent => {}
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone)]
pub struct EdgeCheck {
    pub stronger: ConsistencyId,
    pub weaker: ConsistencyId,
    pub samples: usize,
    /// Comparisons actually made (implication checks skip inapplicable samples).
    pub compared: usize,
    /// Sample indices where the relationship failed.
    pub violations: Vec<usize>,
}

/// Checks that `stronger` is at least as strong as `weaker` on every sample:
/// by closure comparison when both have closures, otherwise by checking that
/// `stronger`-consistent networks are `weaker`-consistent.
pub fn verify_lattice_edge(
    stronger: ConsistencyId,
    weaker: ConsistencyId,
    samples: &[ConstraintNetwork],
) -> Result<EdgeCheck, OracleError> {
    let mut check = EdgeCheck { stronger, weaker, samples: samples.len(), compared: 0, violations: Vec::new() };
    for (i, p) in samples.iter().enumerate() {
        let ok = if stronger.is_closurable() && weaker.is_closurable() {
            check.compared += 1;
            let s = oracle_closure(stronger, p)?;
            let w = oracle_closure(weaker, p)?;
            matches!(s.compare(&w)?, NetworkOrdering::Equal | NetworkOrdering::Smaller)
        } else {
            let candidates = if stronger.is_closurable() {
                vec![oracle_closure(stronger, p)?]
            } else {
                vec![p.clone(), oracle_closure(ConsistencyId::Sac, p)?, oracle_closure(ConsistencyId::SPc, p)?]
            };
            let mut ok = true;
            for q in candidates.iter().filter(|q| !q.is_failed()) {
                if is_consistent(stronger, q)?.is_none() {
                    check.compared += 1;
                    ok &= is_consistent(weaker, q)?.is_none();
                }
            }
            ok
        };
        if !ok {
            check.violations.push(i);
        }
    }
    Ok(check)
}

/// Sample indices where the two closures differ.
pub fn verify_equivalence(a: ConsistencyId, b: ConsistencyId, samples: &[ConstraintNetwork]) -> Result<Vec<usize>, OracleError> {
    let mut bad = Vec::new();
    for (i, p) in samples.iter().enumerate() {
        if oracle_closure(a, p)?.compare(&oracle_closure(b, p)?)? != NetworkOrdering::Equal {
            bad.push(i);
        }
    }
    Ok(bad)
}
