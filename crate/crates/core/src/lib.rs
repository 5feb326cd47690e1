//! Constraint networks, GAC propagation, second-order consistency enforcers,
//! MAC search and Model B generation.

pub mod enforce;
pub mod generator;
pub mod network;
pub mod propagation;
pub mod search;

pub use enforce::{
    enforce_sac1, enforce_sac1_with, enforce_scdc, enforce_scdc_with, enforce_scpc, enforce_sdc, enforce_sdc_with,
    EnforceConfig, EnforceError, EnforceReport,
};
pub use generator::{generate_model_b, phase_scan, ModelBParams, PhaseCheck, PhaseScan};
pub use network::{
    Constraint, ConstraintId, ConstraintNetwork, ConstraintSpec, Domain, Instantiation, NetworkError, NetworkOrdering,
    Polarity, Tuple, Value, VarId,
};
pub use propagation::{enforce_gac, propagate, singleton_check, PropagationOutcome, PropagationStatus, Trail, TrailEntry};
pub use search::{mac_solve, select_variable, Heuristic, Preprocessing, SearchConfig, SearchMode, SearchOutcome, SearchResult};
