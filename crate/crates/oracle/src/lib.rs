//! Brute-force definitional checkers and closures for small networks, used to
//! cross-validate the enforcers and to verify the consistency lattice.

pub mod check;
pub mod closure;
pub mod consistency;
pub mod fixtures;
pub mod gac;
pub mod lattice;
pub mod paths;
pub mod sample;
pub mod witness;

use secord_core::{ConstraintNetwork, NetworkError};

pub use check::{check_pair, check_value, graph_paths_consistent, is_consistent, two_length_graph_paths_consistent, Evaluator, Violation};
pub use closure::{compose, oracle_closure, sweep_budget};
pub use consistency::{ConsistencyId, PairCheck, ValueCheck};
pub use lattice::{lattice_edges, verify_equivalence, verify_lattice_edge, witness_requirements, LatticeEdge, Panel, Relation, WitnessRequirement};
pub use witness::{find_witness, is_witness, WitnessSearch};

pub const MAX_VARS: usize = 8;
pub const MAX_DOMAIN: usize = 5;
pub const MAX_ARITY: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{what} is {value}, oracle cap is {cap}")]
    TooLarge { what: &'static str, value: usize, cap: usize },
    #[error("too many minimal walk relations")]
    WalkCap,
    #[error("a path needs at least two variables and distinct endpoints")]
    InvalidPath,
    #[error("the pair is not locally consistent")]
    NotLocallyConsistent,
    #[error("{0} has no closure in the oracle")]
    NotClosurable(ConsistencyId),
    #[error("closure did not stabilise within the sweep budget")]
    SweepBudget,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Rejects networks beyond the oracle's exhaustive-search limits.
pub fn check_caps(net: &ConstraintNetwork) -> Result<(), OracleError> {
    let checks = [
        ("number of variables", net.num_vars(), MAX_VARS),
        ("domain size", net.max_domain_size(), MAX_DOMAIN),
        ("arity", net.max_arity(), MAX_ARITY),
    ];
    for (what, value, cap) in checks {
        if value > cap {
            return Err(OracleError::TooLarge { what, value, cap });
        }
    }
    Ok(())
}
