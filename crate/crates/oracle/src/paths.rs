//! Paths, path supports and walk relations over binary constraints.

use secord_core::{ConstraintNetwork, Value, VarId};

use crate::OracleError;

/// Whether `{(x, a), (y, b)}` is locally consistent (`x != y`). Only a binary
/// constraint on `{x, y}` can be covered.
pub fn pair_ok(net: &ConstraintNetwork, x: VarId, a: Value, y: VarId, b: Value) -> bool {
    if !net.domain(x).contains(a) || !net.domain(y).contains(b) {
        return false;
    }
    match net.binary_between(x, y) {
        None => true,
        Some(c) => {
            let con = net.constraint(c);
            if con.scope()[0] == x {
                con.allows(&[a, b])
            } else {
                con.allows(&[b, a])
            }
        }
    }
}

/// A sequence of variables; repeats are allowed, the two ends differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    vars: Vec<VarId>,
}

impl Path {
    pub fn new(vars: Vec<VarId>) -> Result<Self, OracleError> {
        if vars.len() < 2 || vars.first() == vars.last() {
            return Err(OracleError::InvalidPath);
        }
        Ok(Path { vars })
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    /// Consecutive variables share a binary constraint.
    pub fn is_graph_path(&self, net: &ConstraintNetwork) -> bool {
        self.vars.windows(2).all(|w| net.binary_between(w[0], w[1]).is_some())
    }

    /// A binary constraint binds the two ends.
    pub fn is_closed(&self, net: &ConstraintNetwork) -> bool {
        net.binary_between(self.vars[0], *self.vars.last().expect("non-empty")).is_some()
    }
}

/// A support for `{(x1, a1), (xk, ak)}` on `path`: one value per position,
/// consecutive pairs locally consistent, equal values on consecutive repeats.
pub fn check_path_support(net: &ConstraintNetwork, path: &Path, a1: Value, ak: Value) -> Option<Vec<Value>> {
    let vars = path.vars();
    let k = vars.len();
    if !net.domain(vars[0]).contains(a1) || !net.domain(vars[k - 1]).contains(ak) {
        return None;
    }
    let step_ok = |i: usize, b: Value, c: Value| {
        if vars[i] == vars[i + 1] {
            b == c
        } else {
            pair_ok(net, vars[i], b, vars[i + 1], c)
        }
    };
    // forward layers of reachable values
    let mut layers: Vec<Vec<bool>> = Vec::with_capacity(k);
    let mut first = vec![false; net.domain(vars[0]).init_size()];
    first[a1] = true;
    layers.push(first);
    for i in 0..k - 1 {
        let next: Vec<bool> = (0..net.domain(vars[i + 1]).init_size())
            .map(|c| {
                net.domain(vars[i + 1]).contains(c)
                    && layers[i].iter().enumerate().any(|(b, &r)| r && step_ok(i, b, c))
            })
            .collect();
        layers.push(next);
    }
    if !layers[k - 1][ak] {
        return None;
    }
    // backward extraction
    let mut tau = vec![0; k];
    tau[k - 1] = ak;
    for i in (0..k - 1).rev() {
        tau[i] = (0..layers[i].len())
            .find(|&b| layers[i][b] && step_ok(i, b, tau[i + 1]))
            .expect("reachable predecessor");
    }
    Some(tau)
}

/// For every ordered pair of variables, the ⊆-minimal relations obtained by
/// composing binary relations along graph-paths between them. A pair of values
/// lies in every walk relation iff it lies in every minimal one.
#[derive(Debug, Clone)]
pub struct Walks {
    stride: usize,
    sets: Vec<Vec<Vec<u32>>>,
}

/// Largest antichain kept for one ordered pair.
pub const WALK_CAP: usize = 20_000;

fn bit(stride: usize, a: Value, b: Value) -> u32 {
    1u32 << (a * stride + b)
}

fn edge_matrix(net: &ConstraintNetwork, u: VarId, v: VarId, stride: usize) -> u32 {
    let mut m = 0;
    for a in net.domain(u).values() {
        for b in net.domain(v).values() {
            if pair_ok(net, u, a, v, b) {
                m |= bit(stride, a, b);
            }
        }
    }
    m
}

fn compose(r: u32, s: u32, stride: usize) -> u32 {
    let row_mask = (1u32 << stride) - 1;
    let mut out = 0;
    for a in 0..stride {
        let row = (r >> (a * stride)) & row_mask;
        if row == 0 {
            continue;
        }
        let mut acc = 0;
        for b in 0..stride {
            if row & (1 << b) != 0 {
                acc |= (s >> (b * stride)) & row_mask;
            }
        }
        out |= acc << (a * stride);
    }
    out
}

/// Inserts `r` into an antichain of minimal sets; false if subsumed.
fn insert_minimal(set: &mut Vec<u32>, r: u32) -> bool {
    if set.iter().any(|&s| s & !r == 0) {
        return false;
    }
    set.retain(|&s| r & !s != 0);
    set.push(r);
    true
}

impl Walks {
    pub fn compute(net: &ConstraintNetwork) -> Result<Self, OracleError> {
        let n = net.num_vars();
        let stride = net.max_domain_size().max(1);
        if stride * stride > 32 {
            return Err(OracleError::TooLarge { what: "domain size for walk relations", value: stride, cap: 5 });
        }
        let nbrs: Vec<Vec<VarId>> = net.vars().map(|x| net.binary_neighbors(x).collect()).collect();
        let mut sets = vec![vec![Vec::new(); n]; n];
        let mut work: Vec<(usize, usize, u32)> = Vec::new();
        for u in net.vars() {
            for &v in &nbrs[u.0] {
                let m = edge_matrix(net, u, v, stride);
                if insert_minimal(&mut sets[u.0][v.0], m) {
                    work.push((u.0, v.0, m));
                }
            }
        }
        while let Some((u, v, r)) = work.pop() {
            if !sets[u][v].contains(&r) {
                continue; // superseded by a smaller relation
            }
            for &w in &nbrs[v] {
                let m = compose(r, edge_matrix(net, VarId(v), w, stride), stride);
                if insert_minimal(&mut sets[u][w.0], m) {
                    if sets[u][w.0].len() > WALK_CAP {
                        return Err(OracleError::WalkCap);
                    }
                    work.push((u, w.0, m));
                }
            }
        }
        Ok(Walks { stride, sets })
    }

    /// `(a, b)` lies in every walk relation from `x` to `y` (true when no
    /// graph-path joins them).
    pub fn in_every_walk(&self, x: VarId, a: Value, y: VarId, b: Value) -> bool {
        let m = bit(self.stride, a, b);
        self.sets[x.0][y.0].iter().all(|&r| r & m != 0)
    }

    /// Number of minimal relations from `x` to `y`; zero iff no graph-path joins them.
    pub fn count(&self, x: VarId, y: VarId) -> usize {
        self.sets[x.0][y.0].len()
    }
}
