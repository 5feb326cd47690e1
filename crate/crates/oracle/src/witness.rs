//! Search for networks separating two consistencies.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use secord_core::{ConstraintNetwork, ConstraintSpec, Polarity, VarId};

use crate::check::is_consistent;
use crate::closure::oracle_closure;
use crate::consistency::ConsistencyId;
use crate::fixtures;
use crate::sample::{random_network, SampleSpec};
use crate::OracleError;

/// `net` satisfies `hold` and violates `fail`. ⊥ is never a witness.
pub fn is_witness(hold: ConsistencyId, fail: ConsistencyId, net: &ConstraintNetwork) -> Result<bool, OracleError> {
    if net.is_failed() {
        return Ok(false);
    }
    Ok(is_consistent(hold, net)?.is_none() && is_consistent(fail, net)?.is_some())
}

#[derive(Debug, Clone)]
pub struct WitnessSearch {
    /// Number of random starting networks.
    pub budget: usize,
    pub seed: u64,
    pub binary_only: bool,
    pub max_n: usize,
    pub max_d: usize,
    pub max_arity: usize,
    /// Tuple flips tried from each `hold`-consistent start.
    pub mutations: usize,
}

impl Default for WitnessSearch {
    fn default() -> Self {
        WitnessSearch { budget: 2000, seed: 0, binary_only: false, max_n: 6, max_d: 3, max_arity: 4, mutations: 12 }
    }
}

/// Some network making `hold` true and `fail` false, if the search finds one.
pub fn find_witness(
    hold: ConsistencyId,
    fail: ConsistencyId,
    cfg: &WitnessSearch,
) -> Result<Option<ConstraintNetwork>, OracleError> {
    let mut fixed = vec![fixtures::triangle(), fixtures::neq_clique(4, 3), fixtures::neq_chain(4, 2), fixtures::eq_chain(3, 3), fixtures::triangle_gadget()];
    if !cfg.binary_only {
        fixed.push(fixtures::singleton_gap());
    }
    for p in &fixed {
        if let Some(w) = try_candidates(hold, fail, p)? {
            return Ok(Some(w));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_n = cfg.max_n.max(3);
    let max_d = cfg.max_d.max(2);
    for i in 0..cfg.budget {
        let mut spec = SampleSpec::binary(3..=max_n, 2..=max_d);
        spec.density = 0.3..=1.0;
        spec.tightness = 0.1..=0.7;
        if !cfg.binary_only && cfg.max_arity >= 3 {
            let top = if i % 2 == 0 { 3 } else { cfg.max_arity };
            spec = spec.with_nary(1..=2, 3..=top);
            spec.density = 0.0..=0.6;
        }
        let p = random_network(&mut rng, &spec);
        if let Some(w) = try_candidates(hold, fail, &p)? {
            return Ok(Some(w));
        }
        let mut q = start_point(hold, &p)?;
        for _ in 0..cfg.mutations {
            let Some(next) = q.as_ref().and_then(|q| flip_random_tuple(&mut rng, q)) else { break };
            if let Some(w) = try_candidates(hold, fail, &next)? {
                return Ok(Some(w));
            }
            q = start_point(hold, &next)?;
        }
    }
    Ok(None)
}

/// `p` and a few of its closures that are likely to satisfy `hold`.
fn try_candidates(hold: ConsistencyId, fail: ConsistencyId, p: &ConstraintNetwork) -> Result<Option<ConstraintNetwork>, OracleError> {
    let mut cands = vec![p.clone()];
    if hold.is_closurable() {
        cands.push(oracle_closure(hold, p)?);
    } else {
        cands.push(oracle_closure(ConsistencyId::Sac, p)?);
        cands.push(oracle_closure(ConsistencyId::SPc, p)?);
    }
    cands.push(oracle_closure(ConsistencyId::Gac, p)?);
    for c in cands {
        if is_witness(hold, fail, &c)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

fn start_point(hold: ConsistencyId, p: &ConstraintNetwork) -> Result<Option<ConstraintNetwork>, OracleError> {
    let q = if hold.is_closurable() { oracle_closure(hold, p)? } else { oracle_closure(ConsistencyId::Gac, p)? };
    Ok((!q.is_failed()).then_some(q))
}

/// Toggles one tuple of a random binary relation (adding a constraint if the
/// chosen pair has none). `None` if the result would have an empty relation.
fn flip_random_tuple(rng: &mut impl Rng, net: &ConstraintNetwork) -> Option<ConstraintNetwork> {
    let n = net.num_vars();
    if n < 2 {
        return None;
    }
    let x = rng.gen_range(0..n);
    let mut y = rng.gen_range(0..n - 1);
    if y >= x {
        y += 1;
    }
    let (x, y) = (VarId(x.min(y)), VarId(x.max(y)));
    let dx: Vec<_> = net.domain(x).values().collect();
    let dy: Vec<_> = net.domain(y).values().collect();
    let a = dx[rng.gen_range(0..dx.len())];
    let b = dy[rng.gen_range(0..dy.len())];
    let (sizes, mut specs) = net.to_specs();
    let allowed = match net.binary_between(x, y) {
        Some(c) => net.constraint(c).allows(&[a, b]),
        None => true,
    };
    if allowed {
        specs.push(ConstraintSpec::conflicts(vec![x, y], vec![vec![a, b]]));
    } else {
        // re-permit (a, b): drop the old relation and restate it without that tuple forbidden
        let c = net.binary_between(x, y).expect("a forbidden pair has a constraint");
        let con = net.constraint(c);
        let mut forbidden = con.forbidden_tuples();
        forbidden.retain(|t| t.as_slice() != [a, b]);
        specs.retain(|s| !(s.scope == con.scope() && s.scope.len() == 2));
        specs.push(ConstraintSpec { scope: con.scope().to_vec(), polarity: Polarity::Conflicts, tuples: forbidden });
    }
    ConstraintNetwork::build(&sizes, specs).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_separates_gac_from_sac() {
        assert!(is_witness(ConsistencyId::Gac, ConsistencyId::Sac, &fixtures::triangle()).unwrap());
        assert!(!is_witness(ConsistencyId::Sac, ConsistencyId::Gac, &fixtures::triangle()).unwrap());
    }

    #[test]
    fn finds_a_binary_witness_quickly() {
        let cfg = WitnessSearch { budget: 50, binary_only: true, ..Default::default() };
        let w = find_witness(ConsistencyId::Sac, ConsistencyId::SPc, &cfg).unwrap().expect("witness");
        assert!(w.is_binary());
        assert!(is_witness(ConsistencyId::Sac, ConsistencyId::SPc, &w).unwrap());
    }

    #[test]
    fn gadget_closure_separates_scdc_from_bisac() {
        let cfg = WitnessSearch { budget: 0, binary_only: true, ..Default::default() };
        let w = find_witness(ConsistencyId::SCdc, ConsistencyId::BiSac, &cfg).unwrap().expect("witness");
        assert!(w.is_binary());
        assert!(is_witness(ConsistencyId::Sac, ConsistencyId::BiSac, &fixtures::triangle_gadget()).unwrap());
    }

    #[test]
    fn flips_change_exactly_one_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = fixtures::neq_chain(4, 3);
        let total = |n: &ConstraintNetwork| n.constraints().iter().map(|c| c.forbidden_tuples().len()).sum::<usize>();
        for _ in 0..20 {
            let m = flip_random_tuple(&mut rng, &net).unwrap();
            assert_eq!(total(&m).abs_diff(total(&net)), 1);
        }
    }
}
