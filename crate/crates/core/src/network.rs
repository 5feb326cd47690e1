//! Extensional constraint networks, instantiations and the nogood partial order.
//!
//! Values are dense indices `0..d` into each variable's initial domain. A
//! network only ever loses values and tuples; the [`Trail`](crate::Trail)
//! is the only way back.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::propagation::{Trail, TrailEntry};

/// Dense index of a variable, `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Dense index of a constraint, `0..e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConstraintId(pub usize);

impl ConstraintId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Index of a value inside its variable's initial domain.
pub type Value = usize;

/// Tuple of values, one per scope position.
pub type Tuple = Vec<Value>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("constraint {constraint}: empty scope")]
    EmptyScope { constraint: usize },
    #[error("constraint {constraint}: variable {var} appears twice in the scope")]
    DuplicateVariable { constraint: usize, var: VarId },
    #[error("constraint {constraint}: unknown variable {var}")]
    UnknownConstraintVariable { constraint: usize, var: VarId },
    #[error("constraint {constraint}: tuple of length {found}, expected {expected}")]
    ArityMismatch { constraint: usize, expected: usize, found: usize },
    #[error("constraint {constraint}: value {value} outside the initial domain of {var}")]
    ValueOutsideDomain { constraint: usize, var: VarId, value: Value },
    #[error("unknown variable {0}")]
    UnknownVariable(VarId),
    #[error("value {value} is not in the initial domain of {var}")]
    ValueOutsideInitialDomain { var: VarId, value: Value },
    #[error("value {value} is not in the current domain of {var}")]
    ValueNotInDomain { var: VarId, value: Value },
    #[error("instantiation gives two values to {0}")]
    ConflictingPairs(VarId),
    #[error("cannot discard the empty instantiation")]
    EmptyInstantiation,
    #[error("networks are defined over different variables or initial domains")]
    VariableMismatch,
}

/// Whether a constraint's table lists the allowed or the forbidden tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Supports,
    Conflicts,
}

/// Current domain of a variable, a subset of `0..init_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    present: Vec<bool>,
    size: usize,
}

impl Domain {
    pub fn full(init_size: usize) -> Self {
        Domain { present: vec![true; init_size], size: init_size }
    }

    pub fn init_size(&self) -> usize {
        self.present.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn contains(&self, a: Value) -> bool {
        self.present.get(a).copied().unwrap_or(false)
    }

    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        self.present.iter().enumerate().filter(|(_, &p)| p).map(|(a, _)| a)
    }

    pub fn removed(&self) -> impl Iterator<Item = Value> + '_ {
        self.present.iter().enumerate().filter(|(_, &p)| !p).map(|(a, _)| a)
    }

    pub fn first(&self) -> Option<Value> {
        self.values().next()
    }

    pub(crate) fn remove(&mut self, a: Value) -> bool {
        if self.contains(a) {
            self.present[a] = false;
            self.size -= 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn restore(&mut self, a: Value) {
        if !self.present[a] {
            self.present[a] = true;
            self.size += 1;
        }
    }
}

/// Last support found for a (position, value) pair.
#[derive(Debug, Clone)]
pub(crate) enum Residues {
    Binary([Vec<Option<Value>>; 2]),
    Nary(Vec<Vec<Option<Tuple>>>),
}

/// An extensional constraint over an ordered scope.
#[derive(Debug, Clone)]
pub struct Constraint {
    scope: Vec<VarId>,
    init_sizes: Vec<usize>,
    polarity: Polarity,
    table: BTreeSet<Tuple>,
    /// Row-major allowed flags for binary constraints, kept in sync with `table`.
    matrix: Option<Vec<bool>>,
    pub(crate) residues: Residues,
    pub(crate) weight: u64,
}

impl Constraint {
    fn new(scope: Vec<VarId>, init_sizes: Vec<usize>, polarity: Polarity, table: BTreeSet<Tuple>) -> Self {
        let residues = if scope.len() == 2 {
            Residues::Binary([vec![None; init_sizes[0]], vec![None; init_sizes[1]]])
        } else {
            Residues::Nary(init_sizes.iter().map(|&s| vec![None; s]).collect())
        };
        let mut c = Constraint { scope, init_sizes, polarity, table, matrix: None, residues, weight: 1 };
        if c.scope.len() == 2 {
            let (d0, d1) = (c.init_sizes[0], c.init_sizes[1]);
            let default = c.polarity == Polarity::Conflicts;
            let mut m = vec![default; d0 * d1];
            for t in &c.table {
                m[t[0] * d1 + t[1]] = !default;
            }
            c.matrix = Some(m);
        }
        c
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// The stored table, in lexicographic order.
    pub fn table(&self) -> &BTreeSet<Tuple> {
        &self.table
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn position(&self, x: VarId) -> Option<usize> {
        self.scope.iter().position(|&v| v == x)
    }

    pub fn involves(&self, x: VarId) -> bool {
        self.scope.contains(&x)
    }

    /// Size of the initial cross product of the scope.
    pub fn cross_product_size(&self) -> usize {
        self.init_sizes.iter().fold(1usize, |acc, &s| acc.saturating_mul(s))
    }

    /// Number of tuples in rel(c).
    pub fn relation_len(&self) -> usize {
        match self.polarity {
            Polarity::Supports => self.table.len(),
            Polarity::Conflicts => self.cross_product_size() - self.table.len(),
        }
    }

    pub fn is_universal(&self) -> bool {
        self.relation_len() == self.cross_product_size()
    }

    /// Membership in rel(c); `t` is ordered like the scope.
    #[inline]
    pub fn allows(&self, t: &[Value]) -> bool {
        if let Some(m) = &self.matrix {
            if t[0] >= self.init_sizes[0] || t[1] >= self.init_sizes[1] {
                return false;
            }
            return m[t[0] * self.init_sizes[1] + t[1]];
        }
        if t.iter().zip(&self.init_sizes).any(|(&v, &s)| v >= s) {
            return false;
        }
        self.table.contains(t) == (self.polarity == Polarity::Supports)
    }

    /// Binary fast path: is `(a at pos, b at the other position)` allowed?
    #[inline]
    pub(crate) fn allows_binary(&self, pos: usize, a: Value, b: Value) -> bool {
        let m = self.matrix.as_ref().expect("binary constraint");
        let d1 = self.init_sizes[1];
        if pos == 0 {
            m[a * d1 + b]
        } else {
            m[b * d1 + a]
        }
    }

    /// Removes `t` from rel(c). Returns false when it was already forbidden.
    pub(crate) fn forbid(&mut self, t: &[Value]) -> bool {
        if !self.allows(t) {
            return false;
        }
        match self.polarity {
            Polarity::Supports => {
                self.table.remove(t);
            }
            Polarity::Conflicts => {
                self.table.insert(t.to_vec());
            }
        }
        if let Some(m) = &mut self.matrix {
            m[t[0] * self.init_sizes[1] + t[1]] = false;
        }
        true
    }

    /// Undoes a previous `forbid`.
    pub(crate) fn permit(&mut self, t: &[Value]) {
        match self.polarity {
            Polarity::Supports => {
                self.table.insert(t.to_vec());
            }
            Polarity::Conflicts => {
                self.table.remove(t);
            }
        }
        if let Some(m) = &mut self.matrix {
            m[t[0] * self.init_sizes[1] + t[1]] = true;
        }
    }

    /// Tuples of the initial cross product that rel(c) excludes, lexicographically.
    pub fn forbidden_tuples(&self) -> Vec<Tuple> {
        match self.polarity {
            Polarity::Conflicts => self.table.iter().cloned().collect(),
            Polarity::Supports => {
                let mut out = Vec::new();
                for_each_tuple(&self.init_sizes, |t| {
                    if !self.table.contains(t) {
                        out.push(t.to_vec());
                    }
                    true
                });
                out
            }
        }
    }

    /// Tuples of rel(c), lexicographically.
    pub fn allowed_tuples(&self) -> Vec<Tuple> {
        match self.polarity {
            Polarity::Supports => self.table.iter().cloned().collect(),
            Polarity::Conflicts => {
                let mut out = Vec::new();
                for_each_tuple(&self.init_sizes, |t| {
                    if !self.table.contains(t) {
                        out.push(t.to_vec());
                    }
                    true
                });
                out
            }
        }
    }

    /// Reorders a tuple given over `vars` into scope order.
    fn orient(&self, inst: &Instantiation) -> Tuple {
        self.scope.iter().map(|&v| inst.value_of(v).expect("covered scope")).collect()
    }
}

/// Visits the cross product `0..sizes[0] x 0..sizes[1] x ...` lexicographically
/// until `f` returns false.
pub fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[Value]) -> bool) {
    if sizes.contains(&0) {
        return;
    }
    let mut t = vec![0; sizes.len()];
    loop {
        if !f(&t) {
            return;
        }
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < sizes[i] {
                break;
            }
            t[i] = 0;
        }
    }
}

/// A set of (variable, value) pairs with distinct variables, sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Instantiation {
    pairs: Vec<(VarId, Value)>,
}

impl Instantiation {
    pub fn new(pairs: impl IntoIterator<Item = (VarId, Value)>) -> Result<Self, NetworkError> {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(NetworkError::ConflictingPairs(w[0].0));
            }
        }
        Ok(Instantiation { pairs })
    }

    pub fn single(x: VarId, a: Value) -> Self {
        Instantiation { pairs: vec![(x, a)] }
    }

    /// `{(x, a), (y, b)}`; panics when `x == y`.
    pub fn pair(x: VarId, a: Value, y: VarId, b: Value) -> Self {
        assert_ne!(x, y, "a pair instantiation needs two distinct variables");
        let mut pairs = vec![(x, a), (y, b)];
        pairs.sort_unstable();
        Instantiation { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, Value)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn value_of(&self, x: VarId) -> Option<Value> {
        self.pairs.binary_search_by_key(&x, |p| p.0).ok().map(|i| self.pairs[i].1)
    }

    pub fn covers(&self, scope: &[VarId]) -> bool {
        scope.iter().all(|&v| self.value_of(v).is_some())
    }

    /// All non-empty sub-instantiations, including `self`.
    fn subsets(&self) -> impl Iterator<Item = Instantiation> + '_ {
        let k = self.pairs.len();
        (1u32..(1u32 << k)).map(move |mask| Instantiation {
            pairs: (0..k).filter(|i| mask & (1 << i) != 0).map(|i| self.pairs[i]).collect(),
        })
    }
}

impl fmt::Display for Instantiation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, a)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({x}, {a})")?;
        }
        write!(f, "}}")
    }
}

/// Input description of one constraint for [`ConstraintNetwork::build`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSpec {
    pub scope: Vec<VarId>,
    pub polarity: Polarity,
    pub tuples: Vec<Tuple>,
}

impl ConstraintSpec {
    pub fn supports(scope: Vec<VarId>, tuples: Vec<Tuple>) -> Self {
        ConstraintSpec { scope, polarity: Polarity::Supports, tuples }
    }

    pub fn conflicts(scope: Vec<VarId>, tuples: Vec<Tuple>) -> Self {
        ConstraintSpec { scope, polarity: Polarity::Conflicts, tuples }
    }
}

/// Result of comparing two networks in the nogood order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkOrdering {
    Equal,
    /// The left network records strictly more nogoods.
    Smaller,
    Greater,
    Incomparable,
}

/// Variables and constraints queued for propagation since the last fixpoint.
#[derive(Debug, Clone, Default)]
pub(crate) struct Pending {
    pub(crate) full: bool,
    pub(crate) vars: Vec<VarId>,
    pub(crate) var_flag: Vec<bool>,
    pub(crate) cons: Vec<ConstraintId>,
    pub(crate) con_flag: Vec<bool>,
}

impl Pending {
    fn new(n: usize, e: usize) -> Self {
        Pending { full: true, vars: Vec::new(), var_flag: vec![false; n], cons: Vec::new(), con_flag: vec![false; e] }
    }

    fn touch_var(&mut self, x: VarId) {
        if !self.var_flag[x.0] {
            self.var_flag[x.0] = true;
            self.vars.push(x);
        }
    }

    fn touch_con(&mut self, c: ConstraintId) {
        if !self.con_flag[c.0] {
            self.con_flag[c.0] = true;
            self.cons.push(c);
        }
    }

    pub(crate) fn clear(&mut self) {
        for x in self.vars.drain(..) {
            self.var_flag[x.0] = false;
        }
        for c in self.cons.drain(..) {
            self.con_flag[c.0] = false;
        }
        self.full = false;
    }

    pub(crate) fn snapshot(&self) -> (bool, Vec<VarId>, Vec<ConstraintId>) {
        (self.full, self.vars.clone(), self.cons.clone())
    }

    pub(crate) fn restore(&mut self, snap: &(bool, Vec<VarId>, Vec<ConstraintId>)) {
        self.clear();
        self.full = snap.0;
        for &x in &snap.1 {
            self.touch_var(x);
        }
        for &c in &snap.2 {
            self.touch_con(c);
        }
    }
}

/// A normalized constraint network.
#[derive(Debug, Clone)]
pub struct ConstraintNetwork {
    domains: Vec<Domain>,
    constraints: Vec<Constraint>,
    var_constraints: Vec<Vec<ConstraintId>>,
    binary_index: HashMap<(VarId, VarId), ConstraintId>,
    scope_sets: HashMap<Vec<VarId>, ConstraintId>,
    failed: bool,
    pub(crate) pending: Pending,
}

fn merge_tables(
    sizes: &[usize],
    (p1, t1): (Polarity, BTreeSet<Tuple>),
    (p2, t2): (Polarity, BTreeSet<Tuple>),
) -> (Polarity, BTreeSet<Tuple>) {
    use Polarity::*;
    let _ = sizes;
    match (p1, p2) {
        (Supports, Supports) => (Supports, t1.intersection(&t2).cloned().collect()),
        (Conflicts, Conflicts) => (Conflicts, t1.union(&t2).cloned().collect()),
        (Supports, Conflicts) => (Supports, t1.difference(&t2).cloned().collect()),
        (Conflicts, Supports) => (Supports, t2.difference(&t1).cloned().collect()),
    }
}

impl ConstraintNetwork {
    /// Builds a normalized network: unary constraints are folded into the
    /// current domains, constraints sharing a scope set are intersected and
    /// universal constraints are dropped.
    pub fn build(domain_sizes: &[usize], specs: Vec<ConstraintSpec>) -> Result<Self, NetworkError> {
        let n = domain_sizes.len();
        let mut domains: Vec<Domain> = domain_sizes.iter().map(|&s| Domain::full(s)).collect();

        // scope set -> (scope order, polarity, table), in first-appearance order
        let mut groups: Vec<(Vec<VarId>, Polarity, BTreeSet<Tuple>)> = Vec::new();
        let mut group_of: HashMap<Vec<VarId>, usize> = HashMap::new();

        for (ci, spec) in specs.into_iter().enumerate() {
            if spec.scope.is_empty() {
                return Err(NetworkError::EmptyScope { constraint: ci });
            }
            let mut seen = HashSet::new();
            for &v in &spec.scope {
                if v.0 >= n {
                    return Err(NetworkError::UnknownConstraintVariable { constraint: ci, var: v });
                }
                if !seen.insert(v) {
                    return Err(NetworkError::DuplicateVariable { constraint: ci, var: v });
                }
            }
            for t in &spec.tuples {
                if t.len() != spec.scope.len() {
                    return Err(NetworkError::ArityMismatch {
                        constraint: ci,
                        expected: spec.scope.len(),
                        found: t.len(),
                    });
                }
                for (&v, &a) in spec.scope.iter().zip(t) {
                    if a >= domain_sizes[v.0] {
                        return Err(NetworkError::ValueOutsideDomain { constraint: ci, var: v, value: a });
                    }
                }
            }

            if spec.scope.len() == 1 {
                let x = spec.scope[0];
                let listed: HashSet<Value> = spec.tuples.iter().map(|t| t[0]).collect();
                for a in 0..domain_sizes[x.0] {
                    let keep = match spec.polarity {
                        Polarity::Supports => listed.contains(&a),
                        Polarity::Conflicts => !listed.contains(&a),
                    };
                    if !keep {
                        domains[x.0].remove(a);
                    }
                }
                continue;
            }

            let mut key = spec.scope.clone();
            key.sort_unstable();
            match group_of.get(&key) {
                None => {
                    group_of.insert(key, groups.len());
                    groups.push((spec.scope, spec.polarity, spec.tuples.into_iter().collect()));
                }
                Some(&gi) => {
                    let (scope0, pol0, table0) = &mut groups[gi];
                    // permute incoming tuples into the first constraint's scope order
                    let perm: Vec<usize> = scope0
                        .iter()
                        .map(|v| spec.scope.iter().position(|w| w == v).expect("same scope set"))
                        .collect();
                    let incoming: BTreeSet<Tuple> =
                        spec.tuples.iter().map(|t| perm.iter().map(|&p| t[p]).collect()).collect();
                    let sizes: Vec<usize> = scope0.iter().map(|v| domain_sizes[v.0]).collect();
                    let (p, t) =
                        merge_tables(&sizes, (*pol0, std::mem::take(table0)), (spec.polarity, incoming));
                    *pol0 = p;
                    *table0 = t;
                }
            }
        }

        let mut net = ConstraintNetwork {
            domains,
            constraints: Vec::new(),
            var_constraints: vec![Vec::new(); n],
            binary_index: HashMap::new(),
            scope_sets: HashMap::new(),
            failed: false,
            pending: Pending::new(n, 0),
        };
        for (scope, polarity, table) in groups {
            let sizes = scope.iter().map(|v| domain_sizes[v.0]).collect();
            let c = Constraint::new(scope, sizes, polarity, table);
            if c.is_universal() {
                continue;
            }
            net.push_constraint(c);
        }
        net.failed = net.domains.iter().any(Domain::is_empty)
            || net.constraints.iter().any(|c| c.relation_len() == 0);
        net.pending.full = true;
        Ok(net)
    }

    fn push_constraint(&mut self, c: Constraint) -> ConstraintId {
        let id = ConstraintId(self.constraints.len());
        for &v in c.scope() {
            self.var_constraints[v.0].push(id);
        }
        let mut key = c.scope().to_vec();
        key.sort_unstable();
        if key.len() == 2 {
            self.binary_index.insert((key[0], key[1]), id);
        }
        self.scope_sets.insert(key, id);
        self.constraints.push(c);
        self.pending.con_flag.push(false);
        self.pending.touch_con(id);
        id
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.domains.len()).map(VarId)
    }

    pub fn domain(&self, x: VarId) -> &Domain {
        &self.domains[x.0]
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn init_sizes(&self) -> Vec<usize> {
        self.domains.iter().map(Domain::init_size).collect()
    }

    /// Largest initial domain size.
    pub fn max_domain_size(&self) -> usize {
        self.domains.iter().map(Domain::init_size).max().unwrap_or(0)
    }

    pub fn max_arity(&self) -> usize {
        self.constraints.iter().map(Constraint::arity).max().unwrap_or(0)
    }

    pub fn is_binary(&self) -> bool {
        self.constraints.iter().all(|c| c.arity() == 2)
    }

    pub fn constraint(&self, c: ConstraintId) -> &Constraint {
        &self.constraints[c.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint_ids(&self) -> impl Iterator<Item = ConstraintId> {
        (0..self.constraints.len()).map(ConstraintId)
    }

    /// Constraints whose scope contains `x`.
    pub fn constraints_of(&self, x: VarId) -> &[ConstraintId] {
        &self.var_constraints[x.0]
    }

    /// The binary constraint on `{x, y}`, if any.
    #[inline]
    pub fn binary_between(&self, x: VarId, y: VarId) -> Option<ConstraintId> {
        let key = if x < y { (x, y) } else { (y, x) };
        self.binary_index.get(&key).copied()
    }

    /// The constraint whose scope is exactly the set `vars`, if any.
    pub fn constraint_on(&self, vars: &[VarId]) -> Option<ConstraintId> {
        if vars.len() == 2 {
            return self.binary_between(vars[0], vars[1]);
        }
        let mut key = vars.to_vec();
        key.sort_unstable();
        self.scope_sets.get(&key).copied()
    }

    /// Variables sharing a binary constraint with `x`.
    pub fn binary_neighbors(&self, x: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.var_constraints[x.0].iter().filter_map(move |&c| {
            let s = self.constraints[c.0].scope();
            (s.len() == 2).then(|| if s[0] == x { s[1] } else { s[0] })
        })
    }

    /// ⊥: some domain or some relation is empty.
    pub fn is_failed(&self) -> bool {
        self.failed
    }

    pub(crate) fn set_failed(&mut self, failed: bool) {
        self.failed = failed;
    }

    /// Sum of current domain sizes.
    pub fn total_domain_size(&self) -> usize {
        self.domains.iter().map(Domain::size).sum()
    }

    fn check_var(&self, x: VarId) -> Result<(), NetworkError> {
        if x.0 < self.domains.len() {
            Ok(())
        } else {
            Err(NetworkError::UnknownVariable(x))
        }
    }

    /// True iff `inst` is valid and satisfies every constraint it covers.
    pub fn is_locally_consistent(&self, inst: &Instantiation) -> Result<bool, NetworkError> {
        for (x, a) in inst.iter() {
            self.check_var(x)?;
            if !self.domains[x.0].contains(a) {
                return Ok(false);
            }
        }
        if inst.len() < 2 {
            return Ok(true);
        }
        let mut checked = HashSet::new();
        for x in inst.vars() {
            for &c in &self.var_constraints[x.0] {
                if !checked.insert(c) {
                    continue;
                }
                let con = &self.constraints[c.0];
                if inst.covers(con.scope()) && !con.allows(&con.orient(inst)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    // ---- mutation, optionally recorded on a trail ----

    /// Deletes `a` from dom(x); sets ⊥ on wipe-out. Returns false if absent.
    pub fn remove_value(&mut self, x: VarId, a: Value, trail: &mut Trail) -> bool {
        if !self.domains[x.0].remove(a) {
            return false;
        }
        trail.record(TrailEntry::Value(x, a));
        self.pending.touch_var(x);
        if self.domains[x.0].is_empty() {
            self.failed = true;
        }
        true
    }

    /// Deletes a tuple (scope order) from rel(c); sets ⊥ on wipe-out.
    pub fn forbid_tuple(&mut self, c: ConstraintId, t: &[Value], trail: &mut Trail) -> bool {
        if !self.constraints[c.0].forbid(t) {
            return false;
        }
        trail.record(TrailEntry::Tuple(c, t.to_vec()));
        self.pending.touch_con(c);
        if self.constraints[c.0].relation_len() == 0 {
            self.failed = true;
        }
        true
    }

    pub(crate) fn restore_value(&mut self, x: VarId, a: Value) {
        self.domains[x.0].restore(a);
    }

    pub(crate) fn restore_tuple(&mut self, c: ConstraintId, t: &[Value]) {
        self.constraints[c.0].permit(t);
    }

    pub(crate) fn constraint_mut(&mut self, c: ConstraintId) -> &mut Constraint {
        &mut self.constraints[c.0]
    }

    /// Marks every constraint for revision by the next propagation.
    pub fn schedule_all(&mut self) {
        self.pending.full = true;
    }

    /// Adds a binary conflicts-constraint on `{x, y}` forbidding `pairs`
    /// (`(value of x, value of y)`). The scope is stored in ascending order.
    pub fn add_binary_conflicts(&mut self, x: VarId, y: VarId, pairs: &[(Value, Value)]) -> ConstraintId {
        debug_assert!(self.binary_between(x, y).is_none());
        let (scope, table): (Vec<VarId>, BTreeSet<Tuple>) = if x < y {
            (vec![x, y], pairs.iter().map(|&(a, b)| vec![a, b]).collect())
        } else {
            (vec![y, x], pairs.iter().map(|&(a, b)| vec![b, a]).collect())
        };
        let sizes = scope.iter().map(|v| self.domains[v.0].init_size()).collect();
        let c = Constraint::new(scope, sizes, Polarity::Conflicts, table);
        if c.relation_len() == 0 {
            self.failed = true;
        }
        self.push_constraint(c)
    }

    fn validate_init(&self, inst: &Instantiation) -> Result<(), NetworkError> {
        for (x, a) in inst.iter() {
            self.check_var(x)?;
            if a >= self.domains[x.0].init_size() {
                return Err(NetworkError::ValueOutsideInitialDomain { var: x, value: a });
            }
        }
        Ok(())
    }

    /// P \ I: records `inst` as an explicit nogood. Returns false if it
    /// already was one.
    pub fn discard_nogood(&mut self, inst: &Instantiation) -> Result<bool, NetworkError> {
        self.validate_init(inst)?;
        let mut trail = Trail::new();
        match inst.len() {
            0 => Err(NetworkError::EmptyInstantiation),
            1 => {
                let (x, a) = inst.iter().next().expect("one pair");
                Ok(self.remove_value(x, a, &mut trail))
            }
            _ => {
                let vars: Vec<VarId> = inst.vars().collect();
                match self.constraint_on(&vars) {
                    Some(c) => {
                        let t = self.constraints[c.0].orient(inst);
                        Ok(self.forbid_tuple(c, &t, &mut trail))
                    }
                    None => {
                        let sizes = vars.iter().map(|v| self.domains[v.0].init_size()).collect();
                        let table = std::iter::once(inst.iter().map(|p| p.1).collect()).collect();
                        let c = Constraint::new(vars, sizes, Polarity::Conflicts, table);
                        if c.relation_len() == 0 {
                            self.failed = true;
                        }
                        self.push_constraint(c);
                        Ok(true)
                    }
                }
            }
        }
    }

    /// P|x=a: removes every other value of x.
    pub fn assign(&mut self, x: VarId, a: Value) -> Result<(), NetworkError> {
        self.check_var(x)?;
        if !self.domains[x.0].contains(a) {
            return Err(NetworkError::ValueNotInDomain { var: x, value: a });
        }
        let mut trail = Trail::new();
        self.assign_trailed(x, a, &mut trail);
        Ok(())
    }

    pub(crate) fn assign_trailed(&mut self, x: VarId, a: Value, trail: &mut Trail) {
        let others: Vec<Value> = self.domains[x.0].values().filter(|&b| b != a).collect();
        for b in others {
            self.remove_value(x, b, trail);
        }
    }

    /// The explicit nogoods: removed values plus forbidden tuples, all
    /// relative to the initial domains.
    pub fn nogood_representation(&self) -> BTreeSet<Instantiation> {
        let mut out = BTreeSet::new();
        for x in self.vars() {
            for a in self.domains[x.0].removed() {
                out.insert(Instantiation::single(x, a));
            }
        }
        for c in &self.constraints {
            for t in c.forbidden_tuples() {
                out.insert(Instantiation { pairs: sorted_pairs(c.scope(), &t) });
            }
        }
        out
    }

    fn same_shape(&self, other: &ConstraintNetwork) -> Result<(), NetworkError> {
        if self.num_vars() != other.num_vars() || self.init_sizes() != other.init_sizes() {
            return Err(NetworkError::VariableMismatch);
        }
        Ok(())
    }

    /// Compares two networks in the nogood order, identifying nogoods that
    /// are subsumed by a smaller explicit nogood of the same network. Every ⊥
    /// network is equal to every other ⊥ and below all others.
    pub fn compare(&self, other: &ConstraintNetwork) -> Result<NetworkOrdering, NetworkError> {
        self.same_shape(other)?;
        match (self.failed, other.failed) {
            (true, true) => return Ok(NetworkOrdering::Equal),
            (true, false) => return Ok(NetworkOrdering::Smaller),
            (false, true) => return Ok(NetworkOrdering::Greater),
            _ => {}
        }
        let mine: HashSet<Instantiation> = self.nogood_representation().into_iter().collect();
        let theirs: HashSet<Instantiation> = other.nogood_representation().into_iter().collect();
        let covered_by = |set: &HashSet<Instantiation>, ng: &Instantiation| ng.subsets().any(|s| set.contains(&s));
        let le = theirs.iter().all(|ng| covered_by(&mine, ng));
        let ge = mine.iter().all(|ng| covered_by(&theirs, ng));
        Ok(ordering_from(le, ge))
    }

    /// Initial domain sizes plus specs that rebuild an equivalent network:
    /// one unary supports spec per reduced domain, then every constraint as stored.
    pub fn to_specs(&self) -> (Vec<usize>, Vec<ConstraintSpec>) {
        let mut specs = Vec::new();
        for x in self.vars() {
            let d = &self.domains[x.0];
            if d.size() < d.init_size() {
                specs.push(ConstraintSpec::supports(vec![x], d.values().map(|a| vec![a]).collect()));
            }
        }
        for c in &self.constraints {
            specs.push(ConstraintSpec {
                scope: c.scope().to_vec(),
                polarity: c.polarity(),
                tuples: c.table().iter().cloned().collect(),
            });
        }
        (self.init_sizes(), specs)
    }

    /// Literal set inclusion of the two nogood representations.
    pub fn compare_raw(&self, other: &ConstraintNetwork) -> Result<NetworkOrdering, NetworkError> {
        self.same_shape(other)?;
        let mine = self.nogood_representation();
        let theirs = other.nogood_representation();
        Ok(ordering_from(mine.is_superset(&theirs), theirs.is_superset(&mine)))
    }
}

fn ordering_from(le: bool, ge: bool) -> NetworkOrdering {
    match (le, ge) {
        (true, true) => NetworkOrdering::Equal,
        (true, false) => NetworkOrdering::Smaller,
        (false, true) => NetworkOrdering::Greater,
        (false, false) => NetworkOrdering::Incomparable,
    }
}

fn sorted_pairs(scope: &[VarId], t: &[Value]) -> Vec<(VarId, Value)> {
    let mut pairs: Vec<_> = scope.iter().copied().zip(t.iter().copied()).collect();
    pairs.sort_unstable();
    pairs
}
