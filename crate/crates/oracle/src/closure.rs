//! Closures by repeated discarding of inconsistent values and pairs.

use secord_core::{ConstraintNetwork, Instantiation};

use crate::check::Evaluator;
use crate::consistency::ConsistencyId;
use crate::{check_caps, OracleError};

/// Upper bound on effective sweeps: every sweep discards at least one of the
/// finitely many first- or second-order nogoods.
pub fn sweep_budget(net: &ConstraintNetwork) -> usize {
    let n = net.num_vars();
    let d = net.max_domain_size();
    n * d + n * n.saturating_sub(1) / 2 * d * d + 1
}

/// The `phi`-closure of `net`. Each sweep discards every inconsistent value if
/// there is one, otherwise every inconsistent locally consistent pair; the
/// loop stops at the first sweep that finds nothing.
pub fn oracle_closure(phi: ConsistencyId, net: &ConstraintNetwork) -> Result<ConstraintNetwork, OracleError> {
    check_caps(net)?;
    if !phi.is_closurable() {
        return Err(OracleError::NotClosurable(phi));
    }
    let (vc, pc) = phi.parts();
    let mut p = net.clone();
    for _ in 0..sweep_budget(net) {
        if p.is_failed() {
            return Ok(p);
        }
        let nogoods: Vec<Instantiation> = {
            let ev = Evaluator::new(&p);
            let values = match vc {
                Some(vc) => ev.value_violations(vc),
                None => Vec::new(),
            };
            if !values.is_empty() {
                values.into_iter().map(|(x, a)| Instantiation::single(x, a)).collect()
            } else {
                match pc {
                    Some(pc) => ev
                        .pair_violations(pc)?
                        .into_iter()
                        .map(|(x, a, y, b)| Instantiation::pair(x, a, y, b))
                        .collect(),
                    None => Vec::new(),
                }
            }
        };
        if nogoods.is_empty() {
            return Ok(p);
        }
        for ng in &nogoods {
            p.discard_nogood(ng)?;
        }
    }
    Err(OracleError::SweepBudget)
}

/// `psi(phi(net))`.
pub fn compose(psi: ConsistencyId, phi: ConsistencyId, net: &ConstraintNetwork) -> Result<ConstraintNetwork, OracleError> {
    oracle_closure(psi, &oracle_closure(phi, net)?)
}
