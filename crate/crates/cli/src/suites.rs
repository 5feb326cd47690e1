//! Verification suites run by `secord verify`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use secord_core::{
    enforce_sac1, enforce_scdc, enforce_scpc, enforce_sdc, ConstraintNetwork, ConstraintSpec, Instantiation,
    NetworkOrdering, VarId,
};
use secord_oracle::gac::{current_doms, enumerate_solutions, gac_assigned};
use secord_oracle::paths::{check_path_support, Path as VarPath};
use secord_oracle::sample::{sample_networks, SampleSpec};
use secord_oracle::{
    check_pair, check_value, compose, fixtures, graph_paths_consistent, is_consistent, is_witness, lattice_edges,
    oracle_closure, two_length_graph_paths_consistent, verify_equivalence, verify_lattice_edge,
    witness_requirements, ConsistencyId, OracleError, Panel, Relation,
};
use serde::Serialize;

use crate::report::read_instance;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lattice,
    Fixtures,
    Properties,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult { name: name.into(), passed, detail: detail.into() }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Networks per sampled property.
    pub samples: usize,
    pub seed: u64,
    /// Directory holding `witnesses/<hold>_not_<fail>.json`.
    pub corpus: PathBuf,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { samples: 100, seed: 2024, corpus: PathBuf::from("corpus") }
    }
}

pub fn run(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<CheckResult>, CliError> {
    match suite {
        Suite::Lattice => lattice(cfg),
        Suite::Fixtures => fixture_checks(),
        Suite::Properties => properties(cfg),
    }
}

pub fn binary_samples(count: usize, seed: u64) -> Vec<ConstraintNetwork> {
    sample_networks(&SampleSpec::binary(3..=5, 2..=3), count, seed)
}

pub fn general_samples(count: usize, seed: u64) -> Vec<ConstraintNetwork> {
    let mut spec = SampleSpec::binary(3..=5, 2..=3).with_nary(1..=2, 3..=4);
    spec.density = 0.2..=0.7;
    sample_networks(&spec, count, seed)
}

pub fn witness_path(corpus: &Path, file_name: &str) -> PathBuf {
    corpus.join("witnesses").join(file_name)
}

fn lattice(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, CliError> {
    let binary = binary_samples(cfg.samples, cfg.seed);
    let general = general_samples(cfg.samples, cfg.seed ^ 0x9e37);
    let edges = lattice_edges();

    let mut out: Vec<CheckResult> = edges
        .par_iter()
        .filter(|e| e.relation != Relation::Incomparable)
        .map(|e| -> Result<CheckResult, OracleError> {
            let (samples, panel) = match e.panel {
                Panel::Binary => (&binary, "binary"),
                Panel::General => (&general, "general"),
            };
            Ok(match e.relation {
                Relation::Stronger => {
                    let r = verify_lattice_edge(e.left, e.right, samples)?;
                    check(
                        format!("{panel}: {} stronger than {}", e.left, e.right),
                        r.violations.is_empty(),
                        format!("{} samples, {} comparisons, violations at {:?}", r.samples, r.compared, r.violations),
                    )
                }
                _ => {
                    let bad = verify_equivalence(e.left, e.right, samples)?;
                    check(
                        format!("{panel}: {} equivalent to {}", e.left, e.right),
                        bad.is_empty(),
                        format!("{} samples, differing at {:?}", samples.len(), bad),
                    )
                }
            })
        })
        .collect::<Result<_, _>>()?;

    for req in witness_requirements() {
        let path = witness_path(&cfg.corpus, &req.file_name());
        let name = format!("witness {}", req.file_name());
        let line = match read_instance(&path, true) {
            Err(e) => check(name, false, format!("cannot load: {e}")),
            Ok(input) => {
                let net = &input.instance.network;
                let ok = is_witness(req.hold, req.fail, net)?;
                let shape_ok = !req.binary || net.is_binary();
                check(
                    name,
                    ok && shape_ok,
                    format!(
                        "{} holds and {} fails: {ok}; binary required: {}, binary: {}",
                        req.hold,
                        req.fail,
                        req.binary,
                        net.is_binary()
                    ),
                )
            }
        };
        out.push(line);
    }
    Ok(out)
}

fn v(i: usize) -> VarId {
    VarId(i)
}

fn fixture_checks() -> Result<Vec<CheckResult>, CliError> {
    use ConsistencyId as C;
    let mut out = Vec::new();
    let singleton_gap = fixtures::singleton_gap();
    let (w, x, y, z) = (v(0), v(1), v(2), v(3));

    out.push(check(
        "singleton-gap network has two ternary constraints and no binary one",
        singleton_gap.num_constraints() == 2 && singleton_gap.constraints().iter().all(|c| c.arity() == 3),
        "",
    ));
    let i1 = Instantiation::new([(w, 0), (x, 0), (y, 0)])?;
    let i2 = Instantiation::new([(w, 0), (x, 0), (z, 0)])?;
    out.push(check(
        "singleton-gap network: local consistency of {w=a, x=a, y=a} and {w=a, x=a, z=a}",
        singleton_gap.is_locally_consistent(&i1)? && !singleton_gap.is_locally_consistent(&i2)?,
        "",
    ));
    let base = current_doms(&singleton_gap);
    let both_wipe = (0..2).all(|a| gac_assigned(&singleton_gap, &base, &[(y, a)]).is_none());
    out.push(check("singleton-gap network: GAC(P|y=a) and GAC(P|y=b) are both wipeouts", both_wipe, ""));
    out.push(check("singleton-gap network: (y, a) is SAC-inconsistent", !check_value(C::Sac, &singleton_gap, y, 0)?, ""));
    out.push(check("singleton-gap network: {(y, a), (z, a)} is DC-inconsistent", !check_pair(C::Dc, &singleton_gap, y, 0, z, 0)?, ""));
    out.push(check("singleton-gap network: {(y, a), (z, a)} is path-consistent", check_pair(C::Pc, &singleton_gap, y, 0, z, 0)?, ""));
    for phi in [C::Gac, C::SPc, C::SCdc] {
        out.push(check(format!("singleton-gap network is {phi}-consistent"), is_consistent(phi, &singleton_gap)?.is_none(), ""));
    }
    out.push(check("singleton-gap network is not SAC+CDC-consistent", is_consistent(C::SacCdc, &singleton_gap)?.is_some(), ""));
    let mut a = singleton_gap.clone();
    let mut b = singleton_gap.clone();
    let (ra, rb) = (enforce_scdc(&mut a), enforce_sac1(&mut b));
    out.push(check(
        "singleton-gap network: sCDC1 and SAC1 both report inconsistency",
        !ra.consistent && !rb.consistent,
        format!("scdc1 consistent={}, sac1 consistent={}", ra.consistent, rb.consistent),
    ));

    let t = fixtures::triangle();
    out.push(check("triangle: no solution among the 8 assignments", enumerate_solutions(&t, usize::MAX).is_empty(), ""));
    out.push(check("triangle: sPC closure is a wipeout", oracle_closure(C::SPc, &t)?.is_failed(), ""));
    let p = VarPath::new(vec![v(0), v(2), v(1)])?;
    out.push(check(
        "triangle: no support for {(x, 0), (y, 1)} on <x, z, y>",
        check_path_support(&t, &p, 0, 1).is_none(),
        "",
    ));

    let edge = ConstraintNetwork::build(&[2, 2], vec![ConstraintSpec::supports(vec![v(0), v(1)], vec![vec![0, 1]])])?;
    let p = VarPath::new(vec![v(0), v(1)])?;
    out.push(check(
        "single edge: path support (0, 1) exists and (1, 0) does not",
        check_path_support(&edge, &p, 0, 1) == Some(vec![0, 1]) && check_path_support(&edge, &p, 1, 0).is_none(),
        "",
    ));
    let swap =
        ConstraintNetwork::build(&[2, 2], vec![ConstraintSpec::supports(vec![v(0), v(1)], vec![vec![0, 1], vec![1, 0]])])?;
    out.push(check("two-tuple table has exactly two solutions", enumerate_solutions(&swap, usize::MAX).len() == 2, ""));
    let free = ConstraintNetwork::build(&[2, 2], vec![])?;
    out.push(check("no constraints, n=2, d=2: four solutions", enumerate_solutions(&free, usize::MAX).len() == 4, ""));

    // a chain x - z - y with no triangle: CPC holds vacuously, C3C does not
    let chain = ConstraintNetwork::build(
        &[2, 2, 2],
        vec![
            ConstraintSpec::supports(vec![v(0), v(2)], vec![vec![0, 0], vec![1, 1]]),
            ConstraintSpec::supports(vec![v(2), v(1)], vec![vec![0, 0]]),
        ],
    )?;
    out.push(check(
        "two binary constraints, no triangle: CPC-consistent, not C3C-consistent",
        is_witness(C::Cpc, C::C3c, &chain)?,
        "",
    ));

    let g = fixtures::triangle_gadget();
    out.push(check("triangle gadget is SAC-consistent, not BiSAC-consistent", is_witness(C::Sac, C::BiSac, &g)?, ""));
    let closed = oracle_closure(C::SCdc, &g)?;
    out.push(check(
        "triangle gadget sCDC closure is sCDC-consistent, not BiSAC-consistent",
        is_witness(C::SCdc, C::BiSac, &closed)?,
        "",
    ));
    Ok(out)
}

/// Whether the binary constraint graph is chordal (simplicial elimination).
pub fn is_triangulated(net: &ConstraintNetwork) -> bool {
    let mut alive: Vec<VarId> = net.vars().collect();
    let adj = |a: VarId, b: VarId| net.binary_between(a, b).is_some();
    while !alive.is_empty() {
        let pos = alive.iter().position(|&u| {
            let nb: Vec<VarId> = alive.iter().copied().filter(|&w| w != u && adj(u, w)).collect();
            nb.iter().enumerate().all(|(i, &a)| nb[i + 1..].iter().all(|&b| adj(a, b)))
        });
        match pos {
            Some(i) => {
                alive.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}

pub fn is_connected(net: &ConstraintNetwork) -> bool {
    let n = net.num_vars();
    let mut seen = vec![false; n];
    let mut stack = vec![VarId(0)];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for w in net.vars() {
            if !seen[w.0] && net.binary_between(u, w).is_some() {
                seen[w.0] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn same(a: &ConstraintNetwork, b: &ConstraintNetwork) -> Result<bool, CliError> {
    Ok(a.compare(b)? == NetworkOrdering::Equal)
}

fn count_failures<T: Sync>(
    items: &[T],
    f: impl Fn(&T) -> Result<bool, CliError> + Sync,
) -> Result<(usize, Vec<usize>), CliError> {
    let res: Vec<bool> = items.par_iter().map(&f).collect::<Result<_, _>>()?;
    let bad: Vec<usize> = res.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i).collect();
    Ok((items.len(), bad))
}

fn sampled(name: &str, (total, bad): (usize, Vec<usize>)) -> CheckResult {
    check(name, bad.is_empty() && total > 0, format!("{total} networks, failing at {bad:?}"))
}

/// Arc-consistent, non-failed binary networks: GAC closures of samples.
pub fn arc_consistent_samples(count: usize, seed: u64) -> Result<Vec<ConstraintNetwork>, CliError> {
    let mut out = Vec::new();
    let mut round = 0;
    while out.len() < count && round < 50 {
        for p in binary_samples(count, seed.wrapping_add(round)) {
            let q = oracle_closure(ConsistencyId::Gac, &p)?;
            if !q.is_failed() && out.len() < count {
                out.push(q);
            }
        }
        round += 1;
    }
    Ok(out)
}

fn properties(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, CliError> {
    use ConsistencyId as C;
    let binary = binary_samples(cfg.samples, cfg.seed);
    let general = general_samples(cfg.samples, cfg.seed ^ 0x51);
    let mut out = Vec::new();

    out.push(sampled(
        "binary: 3C closure equals PC closure",
        count_failures(&binary, |p| same(&oracle_closure(C::ThreeC, p)?, &oracle_closure(C::Pc, p)?))?,
    ));
    out.push(sampled(
        "binary: 3C and PC agree on every locally consistent pair",
        count_failures(&binary, |p| {
            let ev = secord_oracle::Evaluator::new(p);
            for (x, a, y, b) in ev.pairs() {
                if ev.check_pair(secord_oracle::PairCheck::ThreeC, x, a, y, b)?
                    != ev.check_pair(secord_oracle::PairCheck::Pc, x, a, y, b)?
                {
                    return Ok(false);
                }
            }
            Ok(true)
        })?,
    ));
    out.push(sampled(
        "binary: AC after PC equals sPC",
        count_failures(&binary, |p| same(&compose(C::Gac, C::Pc, p)?, &oracle_closure(C::SPc, p)?))?,
    ));
    for (inner, strong) in [(C::Dc, C::SDc), (C::Cdc, C::SCdc), (C::TwoSac, C::S2sac), (C::C2sac, C::SC2sac)] {
        for (panel, samples) in [("binary", &binary), ("general", &general)] {
            out.push(sampled(
                &format!("{panel}: GAC after {inner} equals {strong}"),
                count_failures(samples, |p| same(&compose(C::Gac, inner, p)?, &oracle_closure(strong, p)?))?,
            ));
        }
    }

    let ac = arc_consistent_samples(cfg.samples.max(50), cfg.seed ^ 0xac)?;
    out.push(sampled(
        "arc-consistent binary: PC iff every 2-length graph-path is consistent",
        count_failures(&ac, |p| Ok(is_consistent(C::Pc, p)?.is_none() == two_length_graph_paths_consistent(p)?))?,
    ));
    out.push(sampled(
        "arc-consistent binary: sC3C-consistent iff sCPC-consistent",
        count_failures(&ac, |p| Ok(is_consistent(C::SC3c, p)?.is_none() == is_consistent(C::SCpc, p)?.is_none()))?,
    ));
    out.push(sampled(
        "binary: sC3C closure equals sCPC closure",
        count_failures(&binary, |p| same(&oracle_closure(C::SC3c, p)?, &oracle_closure(C::SCpc, p)?))?,
    ));
    let connected: Vec<ConstraintNetwork> = binary.iter().filter(|p| is_connected(p) && !p.is_failed()).cloned().collect();
    out.push(sampled(
        "connected binary: PC iff every graph-path is consistent",
        count_failures(&connected, |p| Ok(is_consistent(C::Pc, p)?.is_none() == graph_paths_consistent(p)?))?,
    ));
    // walks may revisit a variable, so a value without arc support breaks PPC
    // but not CPC; the equivalence is checked on arc-consistent networks
    let chordal: Vec<ConstraintNetwork> = ac.iter().filter(|p| is_triangulated(p)).cloned().collect();
    out.push(sampled(
        "triangulated arc-consistent binary: PPC iff CPC",
        count_failures(&chordal, |p| Ok(is_consistent(C::Ppc, p)?.is_none() == is_consistent(C::Cpc, p)?.is_none()))?,
    ));

    let nary = general_samples(cfg.samples, cfg.seed ^ 0x77);
    out.push(sampled(
        "binary: sDC1 output equals the sPC closure",
        count_failures(&binary, |p| {
            let mut q = p.clone();
            enforce_sdc(&mut q)?;
            same(&q, &oracle_closure(C::SPc, p)?)
        })?,
    ));
    out.push(sampled(
        "binary and general: sCDC1 output equals the SAC+CDC closure",
        count_failures(&[binary.clone(), nary.clone()].concat(), |p| {
            let mut q = p.clone();
            enforce_scdc(&mut q);
            same(&q, &oracle_closure(C::SacCdc, p)?)
        })?,
    ));
    out.push(sampled(
        "SAC1 output equals the SAC closure",
        count_failures(&[binary.clone(), nary.clone()].concat(), |p| {
            let mut q = p.clone();
            enforce_sac1(&mut q);
            same(&q, &oracle_closure(C::Sac, p)?)
        })?,
    ));
    out.push(sampled(
        "binary: sCPC enforcer output equals the sCPC closure",
        count_failures(&binary, |p| {
            let mut q = p.clone();
            enforce_scpc(&mut q);
            same(&q, &oracle_closure(C::SCpc, p)?)
        })?,
    ));
    Ok(out)
}
