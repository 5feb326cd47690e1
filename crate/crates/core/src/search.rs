//! MAC search with 2-way branching and dom/ddeg or dom/wdeg ordering.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::enforce::{enforce_sac1, enforce_scdc, enforce_scpc, enforce_sdc_with, EnforceConfig, EnforceError, EnforceReport};
use crate::network::{ConstraintNetwork, Instantiation, Value, VarId};
use crate::propagation::{enforce_gac, propagate, PropagationOutcome, Trail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    DomDdeg,
    DomWdeg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preprocessing {
    None,
    Sac1,
    Scpc,
    Scdc1,
    Sdc1,
}

impl Preprocessing {
    pub const ALL: [Preprocessing; 5] =
        [Preprocessing::None, Preprocessing::Sac1, Preprocessing::Scpc, Preprocessing::Scdc1, Preprocessing::Sdc1];

    /// Runs the enforcer in place. `None` only enforces GAC.
    pub fn apply(self, net: &mut ConstraintNetwork, cfg: &EnforceConfig) -> Result<EnforceReport, EnforceError> {
        Ok(match self {
            Preprocessing::None => {
                let start = Instant::now();
                let out = enforce_gac(net, &mut Trail::new());
                EnforceReport {
                    consistent: out.is_consistent(),
                    passes: 1,
                    deleted_values: out.deleted_values,
                    elapsed: start.elapsed(),
                    ..Default::default()
                }
            }
            Preprocessing::Sac1 => enforce_sac1(net),
            Preprocessing::Scpc => enforce_scpc(net),
            Preprocessing::Scdc1 => enforce_scdc(net),
            Preprocessing::Sdc1 => enforce_sdc_with(net, cfg)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    FirstSolution,
    CountAll,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub heuristic: Heuristic,
    pub preprocessing: Preprocessing,
    pub mode: SearchMode,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub enforce: EnforceConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            heuristic: Heuristic::DomWdeg,
            preprocessing: Preprocessing::None,
            mode: SearchMode::FirstSolution,
            node_limit: None,
            time_limit: None,
            enforce: EnforceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Sat(Instantiation),
    Unsat,
    Limit,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    /// Left-branch assignments made by the search.
    pub nodes: u64,
    pub preprocessing_report: EnforceReport,
    /// Solutions found; exact in count-all mode unless the limit was hit.
    pub solution_count: u64,
    pub search_elapsed: Duration,
}

/// Picks the unassigned variable minimizing `|dom| / deg`, where `deg` is the
/// number (dom/ddeg) or total weight (dom/wdeg) of constraints linking it to
/// another unassigned variable. Variables with zero degree rank last; ties go
/// to the smallest id.
pub fn select_variable(net: &ConstraintNetwork, heuristic: Heuristic, assigned: &[bool]) -> Option<VarId> {
    let mut best: Option<(VarId, usize, u64)> = None;
    for x in net.vars() {
        if assigned[x.0] {
            continue;
        }
        let deg: u64 = net
            .constraints_of(x)
            .iter()
            .map(|&c| net.constraint(c))
            .filter(|con| con.scope().iter().any(|&y| y != x && !assigned[y.0]))
            .map(|con| match heuristic {
                Heuristic::DomDdeg => 1,
                Heuristic::DomWdeg => con.weight(),
            })
            .sum();
        let dom = net.domain(x).size();
        let better = match best {
            None => true,
            Some((_, bdom, bdeg)) => match (deg, bdeg) {
                (0, _) => false,
                (_, 0) => true,
                _ => (dom as u128) * (bdeg as u128) < (bdom as u128) * (deg as u128),
            },
        };
        if better {
            best = Some((x, dom, deg));
        }
    }
    best.map(|b| b.0)
}

struct Search<'a> {
    cfg: &'a SearchConfig,
    trail: Trail,
    assigned: Vec<bool>,
    nodes: u64,
    solutions: u64,
    first: Option<Instantiation>,
    start: Instant,
    limit_hit: bool,
}

impl Search<'_> {
    fn out_of_budget(&mut self) -> bool {
        if let Some(l) = self.cfg.node_limit {
            if self.nodes >= l {
                self.limit_hit = true;
            }
        }
        if let Some(t) = self.cfg.time_limit {
            if self.start.elapsed() >= t {
                self.limit_hit = true;
            }
        }
        self.limit_hit
    }

    fn done(&self) -> bool {
        self.limit_hit || (self.cfg.mode == SearchMode::FirstSolution && self.solutions > 0)
    }

    fn note_failure(&mut self, net: &mut ConstraintNetwork, out: &PropagationOutcome) {
        if let Some(c) = out.culprit() {
            net.constraint_mut(c).weight += 1;
        }
    }

    fn explore(&mut self, net: &mut ConstraintNetwork) {
        let Some(x) = select_variable(net, self.cfg.heuristic, &self.assigned) else {
            self.solutions += 1;
            if self.first.is_none() {
                let inst = Instantiation::new(
                    net.vars().map(|v| (v, net.domain(v).first().expect("non-empty domain"))),
                )
                .expect("distinct variables");
                self.first = Some(inst);
            }
            return;
        };
        if self.out_of_budget() {
            return;
        }
        let a: Value = net.domain(x).first().expect("non-empty domain");

        // left branch: x = a
        self.nodes += 1;
        self.trail.push(net);
        net.assign_trailed(x, a, &mut self.trail);
        let out = propagate(net, &mut self.trail);
        if out.is_consistent() {
            self.assigned[x.0] = true;
            self.explore(net);
            self.assigned[x.0] = false;
        } else {
            self.note_failure(net, &out);
        }
        self.trail.pop(net);
        if self.done() {
            return;
        }

        // right branch: x != a, then choose again
        self.trail.push(net);
        net.remove_value(x, a, &mut self.trail);
        let out = propagate(net, &mut self.trail);
        if out.is_consistent() {
            self.explore(net);
        } else {
            self.note_failure(net, &out);
        }
        self.trail.pop(net);
    }
}

/// Preprocesses a copy of `net` with the configured enforcer, then runs MAC.
pub fn mac_solve(net: &ConstraintNetwork, cfg: &SearchConfig) -> Result<SearchResult, EnforceError> {
    let mut work = net.clone();
    for c in work.constraint_ids().collect::<Vec<_>>() {
        work.constraint_mut(c).weight = 1;
    }
    let pre = cfg.preprocessing.apply(&mut work, &cfg.enforce)?;
    let start = Instant::now();
    let mut search = Search {
        cfg,
        trail: Trail::new(),
        assigned: vec![false; work.num_vars()],
        nodes: 0,
        solutions: 0,
        first: None,
        start,
        limit_hit: false,
    };
    if pre.consistent {
        let out = enforce_gac(&mut work, &mut search.trail);
        if out.is_consistent() {
            search.explore(&mut work);
        }
    }
    let outcome = match (search.first.take(), search.limit_hit) {
        (Some(s), _) => SearchOutcome::Sat(s),
        (None, true) => SearchOutcome::Limit,
        (None, false) => SearchOutcome::Unsat,
    };
    // an interrupted count is not a result, even if solutions were seen
    let outcome = match outcome {
        SearchOutcome::Sat(_) if search.limit_hit && cfg.mode == SearchMode::CountAll => SearchOutcome::Limit,
        o => o,
    };
    Ok(SearchResult {
        outcome,
        nodes: search.nodes,
        preprocessing_report: pre,
        solution_count: search.solutions,
        search_elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ConstraintSpec;

    fn v(i: usize) -> VarId {
        VarId(i)
    }

    fn neq(x: usize, y: usize, d: usize) -> ConstraintSpec {
        ConstraintSpec::conflicts(vec![v(x), v(y)], (0..d).map(|a| vec![a, a]).collect())
    }

    fn triangle() -> ConstraintNetwork {
        ConstraintNetwork::build(&[2, 2, 2], vec![neq(0, 1, 2), neq(1, 2, 2), neq(0, 2, 2)]).unwrap()
    }

    fn cfg(h: Heuristic, p: Preprocessing, m: SearchMode) -> SearchConfig {
        SearchConfig { heuristic: h, preprocessing: p, mode: m, ..Default::default() }
    }

    #[test]
    fn triangle_with_and_without_preprocessing() {
        let r = mac_solve(&triangle(), &cfg(Heuristic::DomWdeg, Preprocessing::Sdc1, SearchMode::FirstSolution)).unwrap();
        assert_eq!((r.outcome, r.nodes), (SearchOutcome::Unsat, 0));
        let r = mac_solve(&triangle(), &cfg(Heuristic::DomWdeg, Preprocessing::None, SearchMode::FirstSolution)).unwrap();
        assert_eq!(r.outcome, SearchOutcome::Unsat);
        assert!(r.nodes >= 1);
    }

    #[test]
    fn single_allowed_tuple_counts_one() {
        let net =
            ConstraintNetwork::build(&[2, 2], vec![ConstraintSpec::supports(vec![v(0), v(1)], vec![vec![0, 1]])])
                .unwrap();
        let r = mac_solve(&net, &cfg(Heuristic::DomDdeg, Preprocessing::None, SearchMode::CountAll)).unwrap();
        assert_eq!(r.solution_count, 1);
        assert_eq!(r.outcome, SearchOutcome::Sat(Instantiation::new([(v(0), 0), (v(1), 1)]).unwrap()));
    }

    #[test]
    fn counts_unconstrained_cross_product() {
        let net = ConstraintNetwork::build(&[2, 3], vec![]).unwrap();
        for h in [Heuristic::DomDdeg, Heuristic::DomWdeg] {
            let r = mac_solve(&net, &cfg(h, Preprocessing::None, SearchMode::CountAll)).unwrap();
            assert_eq!(r.solution_count, 6);
        }
    }

    #[test]
    fn ratio_selection() {
        // x0: |dom| 2, one constraint; x1: |dom| 4, four constraints
        let specs = vec![
            neq(0, 2, 2),
            ConstraintSpec::conflicts(vec![v(1), v(3)], vec![vec![0, 0]]),
            ConstraintSpec::conflicts(vec![v(1), v(4)], vec![vec![0, 0]]),
            ConstraintSpec::conflicts(vec![v(1), v(5)], vec![vec![0, 0]]),
            ConstraintSpec::conflicts(vec![v(1), v(6)], vec![vec![0, 0]]),
        ];
        let net = ConstraintNetwork::build(&[2, 4, 9, 9, 9, 9, 9], specs).unwrap();
        let assigned = vec![false; 7];
        assert_eq!(select_variable(&net, Heuristic::DomDdeg, &assigned), Some(v(1)));
        assert_eq!(select_variable(&net, Heuristic::DomWdeg, &assigned), Some(v(1)));
    }

    #[test]
    fn zero_degree_ranks_last_and_ties_take_smallest_id() {
        let net = ConstraintNetwork::build(&[1, 3, 3], vec![neq(1, 2, 3)]).unwrap();
        assert_eq!(select_variable(&net, Heuristic::DomDdeg, &[false; 3]), Some(v(1)));
        assert_eq!(select_variable(&net, Heuristic::DomDdeg, &[false, true, true]), Some(v(0)));
        assert_eq!(select_variable(&net, Heuristic::DomDdeg, &[true; 3]), None);
    }

    #[test]
    fn node_limit_stops_search() {
        let specs = (0..5).flat_map(|i| ((i + 1)..5).map(move |j| neq(i, j, 4))).collect();
        let net = ConstraintNetwork::build(&[4; 5], specs).unwrap();
        let mut c = cfg(Heuristic::DomDdeg, Preprocessing::None, SearchMode::CountAll);
        c.node_limit = Some(2);
        let r = mac_solve(&net, &c).unwrap();
        assert_eq!(r.outcome, SearchOutcome::Limit);
        assert!(r.nodes <= 2);
    }

    #[test]
    fn wipeout_bumps_culprit_weight() {
        let mut net = triangle();
        let mut trail = Trail::new();
        let c = SearchConfig::default();
        let mut s = Search {
            cfg: &c,
            trail: Trail::new(),
            assigned: vec![false; 3],
            nodes: 0,
            solutions: 0,
            first: None,
            start: Instant::now(),
            limit_hit: false,
        };
        trail.push(&net);
        net.assign_trailed(v(0), 0, &mut trail);
        let out = propagate(&mut net, &mut trail);
        let culprit = out.culprit().unwrap();
        s.note_failure(&mut net, &out);
        trail.pop(&mut net);
        for cid in net.constraint_ids() {
            assert_eq!(net.constraint(cid).weight(), if cid == culprit { 2 } else { 1 });
        }
    }
}
