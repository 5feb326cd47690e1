//! Small hand-built networks used across tests and the verification suites.

use secord_core::{ConstraintNetwork, ConstraintSpec, VarId};

fn v(i: usize) -> VarId {
    VarId(i)
}

/// Four variables `w, x, y, z` over `{a, b}` (encoded 0, 1) with
/// `c_wxy = {(a,a,a), (b,b,b)}` and `c_wxz = {(a,b,a), (b,a,b)}`.
/// GAC, sPC and sCDC hold; both values of `y` fail their singleton check.
pub fn singleton_gap() -> ConstraintNetwork {
    ConstraintNetwork::build(
        &[2, 2, 2, 2],
        vec![
            ConstraintSpec::supports(vec![v(0), v(1), v(2)], vec![vec![0, 0, 0], vec![1, 1, 1]]),
            ConstraintSpec::supports(vec![v(0), v(1), v(3)], vec![vec![0, 1, 0], vec![1, 0, 1]]),
        ],
    )
    .expect("valid fixture")
}

pub const SINGLETON_GAP_NAMES: [&str; 4] = ["w", "x", "y", "z"];

fn neq(x: usize, y: usize, d: usize) -> ConstraintSpec {
    ConstraintSpec::conflicts(vec![v(x), v(y)], (0..d).map(|a| vec![a, a]).collect())
}

/// `k` variables over `0..d`, pairwise different.
pub fn neq_clique(k: usize, d: usize) -> ConstraintNetwork {
    let specs = (0..k).flat_map(|i| ((i + 1)..k).map(move |j| neq(i, j, d))).collect();
    ConstraintNetwork::build(&vec![d; k], specs).expect("valid fixture")
}

/// Three variables over `{0, 1}`, pairwise different.
pub fn triangle() -> ConstraintNetwork {
    neq_clique(3, 2)
}

/// `x0 != x1 != ... != x(n-1)` along a path.
pub fn neq_chain(n: usize, d: usize) -> ConstraintNetwork {
    let specs = (1..n).map(|i| neq(i - 1, i, d)).collect();
    ConstraintNetwork::build(&vec![d; n], specs).expect("valid fixture")
}

/// `x0 = x1 = ... = x(n-1)` along a path, except that `x1` cannot take `d - 1`.
pub fn eq_chain(n: usize, d: usize) -> ConstraintNetwork {
    let mut specs: Vec<ConstraintSpec> = (1..n)
        .map(|i| ConstraintSpec::supports(vec![v(i - 1), v(i)], (0..d).map(|a| vec![a, a]).collect()))
        .collect();
    specs.push(ConstraintSpec::conflicts(vec![v(1)], vec![vec![d - 1]]));
    ConstraintNetwork::build(&vec![d; n], specs).expect("valid fixture")
}

fn table(x: usize, y: usize, dx: usize, dy: usize, f: impl Fn(usize, usize) -> bool) -> ConstraintSpec {
    let tuples = (0..dx).flat_map(|a| (0..dy).map(move |b| (a, b))).filter(|&(a, b)| f(a, b)).map(|(a, b)| vec![a, b]);
    ConstraintSpec::supports(vec![v(x), v(y)], tuples.collect())
}

/// Binary, 8 variables over at most 3 values. `p, q, r` (0..2) form a
/// different-triangle; `z = 1` keeps them in `{0, 1}`. Each gadget variable
/// `g_pq, g_qr, g_rp` (4..6) either fixes its two triangle variables to
/// `(0, 1)` or `(1, 0)`, or takes the free value 2, which excludes one value of
/// the blocker `w` (7). Fixing two triangle variables forces the third to 2,
/// so every fixing value rules out `z = 1`, while `z = 1` alone leaves them
/// all alive. SAC holds and `(z, 1)` is not BiSAC-consistent; its sCDC
/// closure is not ⊥.
pub fn triangle_gadget() -> ConstraintNetwork {
    let mut specs = vec![table(0, 1, 3, 3, |a, b| a != b), table(0, 2, 3, 3, |a, b| a != b), table(1, 2, 3, 3, |a, b| a != b)];
    for t in 0..3 {
        specs.push(table(t, 3, 3, 2, |a, z| z == 0 || a < 2));
    }
    for (k, (x, y)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
        let g = 4 + k;
        specs.push(table(x, g, 3, 3, |a, val| val == 2 || a == val));
        specs.push(table(y, g, 3, 3, |a, val| val == 2 || a == 1 - val));
        specs.push(table(g, 7, 3, 3, move |val, w| !(val == 2 && w == k)));
    }
    ConstraintNetwork::build(&[3, 3, 3, 2, 3, 3, 3, 3], specs).expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(neq_clique(4, 3).num_constraints(), 6);
        assert_eq!(triangle().num_constraints(), 3);
        assert_eq!(neq_chain(4, 2).num_constraints(), 3);
        let eq = eq_chain(3, 3);
        assert_eq!(eq.num_constraints(), 2);
        assert_eq!(eq.domain(VarId(1)).size(), 2);
        assert_eq!(singleton_gap().num_constraints(), 2);
        let g = triangle_gadget();
        assert!(g.is_binary());
        assert_eq!((g.num_vars(), g.max_domain_size(), g.num_constraints()), (8, 3, 15));
    }
}
