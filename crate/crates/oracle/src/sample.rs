//! Random small networks for cross-validation.

use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use secord_core::{ConstraintNetwork, ConstraintSpec, Polarity, Tuple, VarId};

#[derive(Debug, Clone)]
pub struct SampleSpec {
    pub n: RangeInclusive<usize>,
    pub d: RangeInclusive<usize>,
    /// Probability that a pair of variables gets a binary constraint.
    pub density: RangeInclusive<f64>,
    /// Fraction of forbidden tuples per constraint.
    pub tightness: RangeInclusive<f64>,
    /// Number of non-binary constraints.
    pub nary: RangeInclusive<usize>,
    pub arity: RangeInclusive<usize>,
    /// Store some relations as supports tables instead of conflicts.
    pub mixed_polarity: bool,
}

impl SampleSpec {
    pub fn binary(n: RangeInclusive<usize>, d: RangeInclusive<usize>) -> Self {
        SampleSpec {
            n,
            d,
            density: 0.3..=0.9,
            tightness: 0.1..=0.6,
            nary: 0..=0,
            arity: 3..=3,
            mixed_polarity: true,
        }
    }

    pub fn with_nary(mut self, count: RangeInclusive<usize>, arity: RangeInclusive<usize>) -> Self {
        self.nary = count;
        self.arity = arity;
        self
    }
}

fn pick_f(rng: &mut impl Rng, r: &RangeInclusive<f64>) -> f64 {
    if r.start() >= r.end() {
        *r.start()
    } else {
        rng.gen_range(r.clone())
    }
}

fn random_relation(rng: &mut impl Rng, sizes: &[usize], tightness: f64, mixed: bool) -> (Polarity, Vec<Tuple>) {
    let cells: usize = sizes.iter().product();
    let k = ((tightness * cells as f64).round() as usize).min(cells - 1);
    let mut forbidden: Vec<usize> = sample(rng, cells, k).into_vec();
    forbidden.sort_unstable();
    let decode = |mut i: usize| {
        let mut t = vec![0; sizes.len()];
        for p in (0..sizes.len()).rev() {
            t[p] = i % sizes[p];
            i /= sizes[p];
        }
        t
    };
    if mixed && rng.gen_bool(0.5) {
        let allowed = (0..cells).filter(|i| forbidden.binary_search(i).is_err()).map(decode).collect();
        (Polarity::Supports, allowed)
    } else {
        (Polarity::Conflicts, forbidden.into_iter().map(decode).collect())
    }
}

pub fn random_network(rng: &mut impl Rng, spec: &SampleSpec) -> ConstraintNetwork {
    let n = rng.gen_range(spec.n.clone());
    let d = rng.gen_range(spec.d.clone());
    let density = pick_f(rng, &spec.density);
    let mut specs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(density.clamp(0.0, 1.0)) {
                let t = pick_f(rng, &spec.tightness);
                let (polarity, tuples) = random_relation(rng, &[d, d], t, spec.mixed_polarity);
                specs.push(ConstraintSpec { scope: vec![VarId(i), VarId(j)], polarity, tuples });
            }
        }
    }
    let nary = rng.gen_range(spec.nary.clone());
    for _ in 0..nary {
        let r = rng.gen_range(spec.arity.clone()).min(n);
        if r < 3 {
            break;
        }
        let mut scope: Vec<VarId> = sample(rng, n, r).into_iter().map(VarId).collect();
        scope.sort_unstable();
        let t = pick_f(rng, &spec.tightness);
        let (polarity, tuples) = random_relation(rng, &vec![d; r], t, spec.mixed_polarity);
        specs.push(ConstraintSpec { scope, polarity, tuples });
    }
    ConstraintNetwork::build(&vec![d; n], specs).expect("sampled constraints are well formed")
}

pub fn sample_networks(spec: &SampleSpec, count: usize, seed: u64) -> Vec<ConstraintNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_network(&mut rng, spec)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_networks_respect_the_spec() {
        let spec = SampleSpec::binary(3..=5, 2..=3).with_nary(1..=2, 3..=4);
        for net in sample_networks(&spec, 50, 9) {
            assert!((3..=5).contains(&net.num_vars()));
            assert!(net.max_domain_size() <= 3);
            assert!(net.max_arity() <= 4);
        }
        let a = sample_networks(&spec, 3, 1);
        let b = sample_networks(&spec, 3, 1);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.compare_raw(y).unwrap(), secord_core::NetworkOrdering::Equal);
        }
    }

    #[test]
    fn relations_are_never_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let (p, t) = random_relation(&mut rng, &[2, 2], 1.0, true);
            let allowed = if p == Polarity::Supports { t.len() } else { 4 - t.len() };
            assert!(allowed >= 1);
        }
    }
}
