//! Command-line definitions and handlers.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use secord_core::generator::{phase_scan, tightness_grid, PhaseCheck};
use secord_core::{
    generate_model_b, mac_solve, EnforceConfig, Heuristic, ModelBParams, Preprocessing, SearchConfig, SearchMode,
    SearchOutcome,
};
use secord_oracle::{find_witness, oracle_closure, witness_requirements, ConsistencyId, WitnessSearch};
use serde_json::{json, Map, Value as Json};

use crate::format::{add_metadata, serialize, Instance};
use crate::report::{emit, read_instance, write_atomic, Record};
use crate::suites::{self, Suite, SuiteConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "secord", version, about = "Second-order consistencies: enforcers, MAC search and a brute-force oracle")]
pub struct Cli {
    /// Accept instance files with unknown fields.
    #[arg(long, global = true)]
    pub lenient: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PreprocessArg {
    Sac1,
    Scpc,
    Scdc1,
    Sdc1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolvePhi {
    None,
    Sac1,
    Scpc,
    Scdc1,
    Sdc1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HeuristicArg {
    Ddeg,
    Wdeg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    First,
    Count,
}

impl From<PreprocessArg> for Preprocessing {
    fn from(p: PreprocessArg) -> Self {
        match p {
            PreprocessArg::Sac1 => Preprocessing::Sac1,
            PreprocessArg::Scpc => Preprocessing::Scpc,
            PreprocessArg::Scdc1 => Preprocessing::Scdc1,
            PreprocessArg::Sdc1 => Preprocessing::Sdc1,
        }
    }
}

impl From<SolvePhi> for Preprocessing {
    fn from(p: SolvePhi) -> Self {
        match p {
            SolvePhi::None => Preprocessing::None,
            SolvePhi::Sac1 => Preprocessing::Sac1,
            SolvePhi::Scpc => Preprocessing::Scpc,
            SolvePhi::Scdc1 => Preprocessing::Scdc1,
            SolvePhi::Sdc1 => Preprocessing::Sdc1,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a Model B instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        tightness: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one enforcer and write the resulting instance.
    Preprocess {
        #[arg(long, value_enum)]
        phi: PreprocessArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Cap on n(n-1)/2 * d^2 for sdc1.
        #[arg(long, default_value_t = EnforceConfig::default().sdc_budget)]
        sdc_budget: u64,
    },
    /// MAC search, optionally after preprocessing.
    Solve {
        #[arg(long, value_enum, default_value_t = HeuristicArg::Wdeg)]
        heuristic: HeuristicArg,
        #[arg(long, value_enum, default_value_t = SolvePhi::None)]
        phi: SolvePhi,
        #[arg(long, value_enum, default_value_t = ModeArg::First)]
        mode: ModeArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        node_limit: Option<u64>,
        #[arg(long)]
        time_limit_ms: Option<u64>,
        #[arg(long, default_value_t = EnforceConfig::default().sdc_budget)]
        sdc_budget: u64,
    },
    /// Oracle closure of a small instance.
    Closure {
        #[arg(long)]
        phi: ConsistencyId,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an oracle verification suite; exit 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value = "corpus")]
        corpus: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Phase-transition scan over tightness, written as CSV.
    Phase {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        t_from: f64,
        #[arg(long)]
        t_to: f64,
        #[arg(long)]
        t_step: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, value_delimiter = ',', default_value = "ac,sac,scdc1,sdc1")]
        checks: Vec<PhaseCheck>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = EnforceConfig::default().sdc_budget)]
        sdc_budget: u64,
    },
    /// Search for a network where `hold` holds and `fail` does not.
    FindWitness {
        #[arg(long, required_unless_present = "all")]
        hold: Option<ConsistencyId>,
        #[arg(long, required_unless_present = "all")]
        fail: Option<ConsistencyId>,
        /// Search every witness the lattice needs, writing `<dir>/<hold>_not_<fail>.json`.
        #[arg(long, conflicts_with_all = ["hold", "fail"])]
        all: bool,
        #[arg(long)]
        binary: bool,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long, default_value_t = 3)]
        max_d: usize,
        /// Output file, or output directory with `--all`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn log(msg: impl AsRef<str>) {
    eprintln!("secord: {}", msg.as_ref());
}

fn enforce_cfg(sdc_budget: u64) -> EnforceConfig {
    EnforceConfig { sdc_budget, ..Default::default() }
}

fn to_json(v: impl serde::Serialize) -> Json {
    serde_json::to_value(v).expect("plain data serializes")
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let strict = !cli.lenient;
    match cli.command {
        Command::Generate { n, d, density, tightness, seed, out } => {
            let params = ModelBParams { n, d, density, tightness, seed };
            let net = generate_model_b(&params).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut inst = Instance::unnamed(net);
            add_metadata(
                &mut inst,
                Map::from_iter([
                    ("generator".to_string(), json!("model-b")),
                    ("rng".to_string(), json!(secord_core::generator::RNG_ID)),
                    ("params".to_string(), json!({"n": n, "d": d, "density": density, "tightness": tightness, "seed": seed})),
                ]),
            );
            write_atomic(out.as_deref(), &serialize(&inst))
        }
        Command::Preprocess { phi, input, out, report, sdc_budget } => {
            let inp = read_instance(&input, strict)?;
            let mut net = inp.instance.network.clone();
            let rep = Preprocessing::from(phi).apply(&mut net, &enforce_cfg(sdc_budget))?;
            write_atomic(out.as_deref(), &serialize(&inp.instance.with_network(net)))?;
            let record = Record {
                command: "preprocess".into(),
                input: Some(input.display().to_string()),
                input_sha256: Some(inp.sha256),
                config: json!({"phi": to_json(Preprocessing::from(phi)), "sdc_budget": sdc_budget, "strict": strict}),
                result: to_json(&rep),
            };
            // with no --out the instance already went to stdout; keep the record off it
            match (&report, &out) {
                (None, None) => {
                    log(serde_json::to_string(&record).expect("records serialize"));
                    Ok(())
                }
                _ => emit(report.as_deref(), &record),
            }
        }
        Command::Solve { heuristic, phi, mode, input, report, node_limit, time_limit_ms, sdc_budget } => {
            let inp = read_instance(&input, strict)?;
            let cfg = SearchConfig {
                heuristic: match heuristic {
                    HeuristicArg::Ddeg => Heuristic::DomDdeg,
                    HeuristicArg::Wdeg => Heuristic::DomWdeg,
                },
                preprocessing: phi.into(),
                mode: match mode {
                    ModeArg::First => SearchMode::FirstSolution,
                    ModeArg::Count => SearchMode::CountAll,
                },
                node_limit,
                time_limit: time_limit_ms.map(Duration::from_millis),
                enforce: enforce_cfg(sdc_budget),
            };
            let res = mac_solve(&inp.instance.network, &cfg)?;
            let inst = &inp.instance;
            let (outcome, solution, verified) = match &res.outcome {
                SearchOutcome::Sat(sol) => {
                    let named: Map<String, Json> = sol
                        .iter()
                        .map(|(x, a)| (inst.var_names[x.0].clone(), to_json(&inst.value_names[x.0][a])))
                        .collect();
                    let all: Vec<_> = inst.network.vars().collect();
                    let ok = sol.covers(&all) && inst.network.is_locally_consistent(sol)?;
                    ("sat", Some(Json::Object(named)), Some(ok))
                }
                SearchOutcome::Unsat => ("unsat", None, None),
                SearchOutcome::Limit => ("limit", None, None),
            };
            let record = Record {
                command: "solve".into(),
                input: Some(input.display().to_string()),
                input_sha256: Some(inp.sha256),
                config: json!({
                    "heuristic": to_json(cfg.heuristic),
                    "phi": to_json(cfg.preprocessing),
                    "mode": to_json(cfg.mode),
                    "node_limit": node_limit,
                    "time_limit_ms": time_limit_ms,
                    "sdc_budget": sdc_budget,
                    "strict": strict,
                }),
                result: json!({
                    "outcome": outcome,
                    "nodes": res.nodes,
                    "solution_count": res.solution_count,
                    "solution": solution,
                    "solution_verified": verified,
                    "preprocessing": to_json(&res.preprocessing_report),
                    "search_ms": res.search_elapsed.as_secs_f64() * 1e3,
                }),
            };
            emit(report.as_deref(), &record)
        }
        Command::Closure { phi, input, out } => {
            let inp = read_instance(&input, strict)?;
            let closed = oracle_closure(phi, &inp.instance.network)?;
            if closed.is_failed() {
                log(format!("{phi} closure is a wipeout"));
            }
            write_atomic(out.as_deref(), &serialize(&inp.instance.with_network(closed)))
        }
        Command::Verify { suite, corpus, samples, seed, report } => {
            let cfg = SuiteConfig { samples, seed, corpus };
            let checks = suites::run(suite, &cfg)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                let record = Record {
                    command: "verify".into(),
                    input: None,
                    input_sha256: None,
                    config: json!({"suite": suite, "samples": samples, "seed": seed, "corpus": cfg.corpus}),
                    result: to_json(c),
                };
                emit(report.as_deref(), &record)?;
            }
            log(format!("{} checks, {} failed", checks.len(), failed));
            if failed > 0 {
                return Err(CliError::Violation(format!("{failed} verification checks failed")));
            }
            Ok(())
        }
        Command::Phase { n, d, density, t_from, t_to, t_step, samples, checks, seed, out, sdc_budget } => {
            if t_step <= 0.0 || t_to < t_from {
                return Err(CliError::Usage("need t_step > 0 and t_to >= t_from".into()));
            }
            let base = ModelBParams { n, d, density, tightness: t_from, seed };
            let grid = tightness_grid(t_from, t_to, t_step);
            let scan = phase_scan(&base, &grid, samples, &checks, &enforce_cfg(sdc_budget))
                .map_err(|e| match e {
                    secord_core::generator::GeneratorError::Enforce(inner) => CliError::Resource(inner.to_string()),
                    other => CliError::Usage(other.to_string()),
                })?;
            for (c, x) in &scan.crossings {
                match x {
                    Some(t) => log(format!("{c}: 50% crossing at t = {t:.4}")),
                    None => log(format!("{c}: no 50% crossing on this grid")),
                }
            }
            write_atomic(out.as_deref(), &scan.to_csv())
        }
        Command::FindWitness { hold, fail, all, binary, budget, seed, max_n, max_d, out } => {
            let base = WitnessSearch { budget, seed, binary_only: binary, max_n, max_d, ..Default::default() };
            if all {
                let dir = out.unwrap_or_else(|| PathBuf::from("corpus/witnesses"));
                std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
                let mut missing = Vec::new();
                for req in witness_requirements() {
                    let cfg = WitnessSearch { binary_only: binary || req.binary, ..base.clone() };
                    let found = find_witness(req.hold, req.fail, &cfg)?;
                    // some separations need larger domains than the default search uses
                    let found = match found {
                        Some(w) => Some(w),
                        None => find_witness(req.hold, req.fail, &WitnessSearch { max_d: cfg.max_d.max(4), ..cfg.clone() })?,
                    };
                    match found {
                        Some(w) => {
                            let path = dir.join(req.file_name());
                            write_witness(&path, w, req.hold, req.fail, &cfg)?;
                            log(format!("wrote {}", path.display()));
                        }
                        None => {
                            log(format!("no witness for {} not {}", req.hold, req.fail));
                            missing.push(req.file_name());
                        }
                    }
                }
                if !missing.is_empty() {
                    return Err(CliError::Violation(format!("no witness found for {}", missing.join(", "))));
                }
                return Ok(());
            }
            let (hold, fail) = (hold.expect("required by clap"), fail.expect("required by clap"));
            match find_witness(hold, fail, &base)? {
                Some(w) => match out {
                    Some(path) => write_witness(&path, w, hold, fail, &base),
                    None => write_atomic(None, &serialize(&witness_instance(w, hold, fail, &base))),
                },
                None => Err(CliError::Violation(format!("no witness for {hold} not {fail} within the budget"))),
            }
        }
    }
}

fn witness_instance(
    net: secord_core::ConstraintNetwork,
    hold: ConsistencyId,
    fail: ConsistencyId,
    cfg: &WitnessSearch,
) -> Instance {
    let mut inst = Instance::unnamed(net);
    add_metadata(
        &mut inst,
        Map::from_iter([
            ("holds".to_string(), json!(hold.to_string())),
            ("fails".to_string(), json!(fail.to_string())),
            ("search_seed".to_string(), json!(cfg.seed)),
            ("binary_only".to_string(), json!(cfg.binary_only)),
        ]),
    );
    inst
}

fn write_witness(
    path: &Path,
    net: secord_core::ConstraintNetwork,
    hold: ConsistencyId,
    fail: ConsistencyId,
    cfg: &WitnessSearch,
) -> Result<(), CliError> {
    write_atomic(Some(path), &serialize(&witness_instance(net, hold, fail, cfg)))
}
