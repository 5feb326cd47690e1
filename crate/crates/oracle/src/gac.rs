//! Naive fixpoint GAC over explicit domain vectors, and exhaustive solution
//! enumeration. Deliberately independent of the propagation engine.

use secord_core::{ConstraintNetwork, Instantiation, Value, VarId};

/// `doms[x][a]` is true iff `a` is in the domain of `x`.
pub type Doms = Vec<Vec<bool>>;

pub fn current_doms(net: &ConstraintNetwork) -> Doms {
    net.domains().iter().map(|d| (0..d.init_size()).map(|a| d.contains(a)).collect()).collect()
}

/// Calls `f` on every tuple of the current domains over `scope` with position
/// `pos` fixed to `a`, until `f` returns true.
fn any_tuple(doms: &Doms, scope: &[VarId], pos: usize, a: Value, f: &mut dyn FnMut(&[Value]) -> bool) -> bool {
    let lists: Vec<Vec<Value>> = scope
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if i == pos {
                vec![a]
            } else {
                (0..doms[v.0].len()).filter(|&b| doms[v.0][b]).collect()
            }
        })
        .collect();
    if lists.iter().any(Vec::is_empty) {
        return false;
    }
    let mut idx = vec![0; scope.len()];
    let mut t = vec![0; scope.len()];
    loop {
        for i in 0..scope.len() {
            t[i] = lists[i][idx[i]];
        }
        if f(&t) {
            return true;
        }
        let mut i = scope.len();
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < lists[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Whether `(x, a)` has a support on every constraint involving `x`.
pub fn has_all_supports(net: &ConstraintNetwork, doms: &Doms, x: VarId, a: Value) -> bool {
    net.constraints().iter().filter(|c| c.involves(x)).all(|c| {
        let pos = c.position(x).expect("involves x");
        any_tuple(doms, c.scope(), pos, a, &mut |t| c.allows(t))
    })
}

/// GAC closure of the network with domains replaced by `doms`; `None` is ⊥.
pub fn gac(net: &ConstraintNetwork, mut doms: Doms) -> Option<Doms> {
    if net.constraints().iter().any(|c| c.relation_len() == 0) {
        return None;
    }
    loop {
        if doms.iter().any(|d| !d.iter().any(|&p| p)) {
            return None;
        }
        let mut changed = false;
        for x in 0..doms.len() {
            for a in 0..doms[x].len() {
                if doms[x][a] && !has_all_supports(net, &doms, VarId(x), a) {
                    doms[x][a] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(doms);
        }
    }
}

/// GAC of the network restricted by the given assignments.
pub fn gac_assigned(net: &ConstraintNetwork, base: &Doms, assignment: &[(VarId, Value)]) -> Option<Doms> {
    let mut doms = base.clone();
    for &(x, a) in assignment {
        if !doms[x.0][a] {
            return None;
        }
        for (b, p) in doms[x.0].iter_mut().enumerate() {
            *p = b == a;
        }
    }
    gac(net, doms)
}

/// Solutions in lexicographic order, at most `limit` of them.
pub fn enumerate_solutions(net: &ConstraintNetwork, limit: usize) -> Vec<Instantiation> {
    let mut out = Vec::new();
    if net.is_failed() || limit == 0 {
        return out;
    }
    let n = net.num_vars();
    // constraints checked when their last variable (by id) is assigned
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, c) in net.constraints().iter().enumerate() {
        let last = c.scope().iter().map(|v| v.0).max().expect("non-empty scope");
        closing[last].push(ci);
    }
    let mut values = vec![0; n];
    fn rec(
        net: &ConstraintNetwork,
        closing: &[Vec<usize>],
        i: usize,
        values: &mut Vec<Value>,
        out: &mut Vec<Instantiation>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if i == values.len() {
            let inst = Instantiation::new(values.iter().enumerate().map(|(x, &a)| (VarId(x), a))).expect("distinct");
            out.push(inst);
            return;
        }
        let dom = net.domain(VarId(i));
        for a in dom.values() {
            values[i] = a;
            let ok = closing[i].iter().all(|&ci| {
                let c = &net.constraints()[ci];
                let t: Vec<Value> = c.scope().iter().map(|v| values[v.0]).collect();
                c.allows(&t)
            });
            if ok {
                rec(net, closing, i + 1, values, out, limit);
                if out.len() >= limit {
                    return;
                }
            }
        }
    }
    rec(net, &closing, 0, &mut values, &mut out, limit);
    out
}
