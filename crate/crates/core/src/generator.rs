//! Model B random binary networks and phase-transition scans.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enforce::{enforce_sac1, enforce_scdc, enforce_scpc, enforce_sdc_with, EnforceConfig, EnforceError};
use crate::network::{ConstraintNetwork, ConstraintSpec, VarId};
use crate::propagation::{enforce_gac, Trail};

/// Identifier of the random stream, stored in instance metadata.
pub const RNG_ID: &str = "chacha8-splitmix64";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelBParams {
    pub n: usize,
    pub d: usize,
    pub density: f64,
    pub tightness: f64,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("density {0} outside [0, 1]")]
    Density(f64),
    #[error("tightness {0} outside [0, 1]")]
    Tightness(f64),
    #[error("domain size must be at least 1")]
    EmptyDomain,
    #[error("tightness {t} forbids all {cells} tuples of each constraint")]
    EmptyRelation { t: f64, cells: usize },
    #[error(transparent)]
    Enforce(#[from] EnforceError),
}

/// `floor(x + 0.5)`, for non-negative `x`.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// SplitMix64 finalizer, used to derive independent per-instance seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

impl ModelBParams {
    pub fn num_constraints(&self) -> usize {
        round_half_up(self.density * (self.n * self.n.saturating_sub(1) / 2) as f64)
    }

    pub fn num_forbidden(&self) -> usize {
        round_half_up(self.tightness * (self.d * self.d) as f64)
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        if !(0.0..=1.0).contains(&self.density) {
            return Err(GeneratorError::Density(self.density));
        }
        if !(0.0..=1.0).contains(&self.tightness) {
            return Err(GeneratorError::Tightness(self.tightness));
        }
        if self.d == 0 {
            return Err(GeneratorError::EmptyDomain);
        }
        if self.num_constraints() > 0 && self.num_forbidden() >= self.d * self.d {
            return Err(GeneratorError::EmptyRelation { t: self.tightness, cells: self.d * self.d });
        }
        Ok(())
    }
}

/// The constraint specs of a Model B instance, before normalization.
pub fn model_b_specs(p: &ModelBParams) -> Result<Vec<ConstraintSpec>, GeneratorError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let pairs: Vec<(usize, usize)> = (0..p.n).flat_map(|i| ((i + 1)..p.n).map(move |j| (i, j))).collect();
    let mut chosen = sample(&mut rng, pairs.len(), p.num_constraints()).into_vec();
    chosen.sort_unstable();
    let cells = p.d * p.d;
    let k = p.num_forbidden();
    Ok(chosen
        .into_iter()
        .map(|pi| {
            let (x, y) = pairs[pi];
            let mut cs = sample(&mut rng, cells, k).into_vec();
            cs.sort_unstable();
            let tuples = cs.into_iter().map(|cell| vec![cell / p.d, cell % p.d]).collect();
            ConstraintSpec::conflicts(vec![VarId(x), VarId(y)], tuples)
        })
        .collect())
}

pub fn generate_model_b(p: &ModelBParams) -> Result<ConstraintNetwork, GeneratorError> {
    let specs = model_b_specs(p)?;
    Ok(ConstraintNetwork::build(&vec![p.d; p.n], specs).expect("generated constraints are well formed"))
}

/// A consistency whose unsatisfiability detection a phase scan measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseCheck {
    Ac,
    Sac,
    Scpc,
    Scdc1,
    Sdc1,
}

impl PhaseCheck {
    pub const ALL: [PhaseCheck; 5] = [PhaseCheck::Ac, PhaseCheck::Sac, PhaseCheck::Scpc, PhaseCheck::Scdc1, PhaseCheck::Sdc1];

    pub fn name(self) -> &'static str {
        match self {
            PhaseCheck::Ac => "ac",
            PhaseCheck::Sac => "sac",
            PhaseCheck::Scpc => "scpc",
            PhaseCheck::Scdc1 => "scdc1",
            PhaseCheck::Sdc1 => "sdc1",
        }
    }

    /// Runs the check on a copy; true iff it proves the network inconsistent.
    pub fn detects_unsat(self, net: &ConstraintNetwork, cfg: &EnforceConfig) -> Result<bool, EnforceError> {
        let mut work = net.clone();
        let consistent = match self {
            PhaseCheck::Ac => enforce_gac(&mut work, &mut Trail::new()).is_consistent(),
            PhaseCheck::Sac => enforce_sac1(&mut work).consistent,
            PhaseCheck::Scpc => enforce_scpc(&mut work).consistent,
            PhaseCheck::Scdc1 => enforce_scdc(&mut work).consistent,
            PhaseCheck::Sdc1 => enforce_sdc_with(&mut work, cfg)?.consistent,
        };
        Ok(!consistent)
    }
}

impl fmt::Display for PhaseCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhaseCheck {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ac" | "gac" => Ok(PhaseCheck::Ac),
            "sac" | "sac1" => Ok(PhaseCheck::Sac),
            "scpc" => Ok(PhaseCheck::Scpc),
            "scdc" | "scdc1" => Ok(PhaseCheck::Scdc1),
            "sdc" | "sdc1" => Ok(PhaseCheck::Sdc1),
            other => Err(format!("unknown check '{other}' (expected ac, sac, scpc, scdc1 or sdc1)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseRow {
    pub t: f64,
    pub check: PhaseCheck,
    pub samples: usize,
    pub frac_unsat: f64,
    pub mean_ms: f64,
    /// First grid point where `frac_unsat` reaches one half.
    pub crossing_flag: bool,
}

#[derive(Debug, Clone)]
pub struct PhaseScan {
    pub rows: Vec<PhaseRow>,
    /// Interpolated tightness where detection reaches 50%, per check.
    pub crossings: Vec<(PhaseCheck, Option<f64>)>,
    /// `detections[grid index][sample][check index]`.
    pub detections: Vec<Vec<Vec<bool>>>,
}

pub const PHASE_CSV_HEADER: &str = "t,check,samples,frac_unsat,mean_ms,crossing_flag";

impl PhaseScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(PHASE_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{:.4},{},{},{:.4},{:.3},{}\n",
                r.t,
                r.check,
                r.samples,
                r.frac_unsat,
                r.mean_ms,
                u8::from(r.crossing_flag)
            ));
        }
        out
    }

    pub fn crossing(&self, check: PhaseCheck) -> Option<f64> {
        self.crossings.iter().find(|(c, _)| *c == check).and_then(|(_, x)| *x)
    }
}

/// Linear interpolation of the first point where `fracs` reaches 0.5.
pub fn interpolate_crossing(ts: &[f64], fracs: &[f64]) -> Option<(usize, f64)> {
    let i = fracs.iter().position(|&f| f >= 0.5)?;
    if i == 0 {
        return Some((0, ts[0]));
    }
    let (t0, f0, t1, f1) = (ts[i - 1], fracs[i - 1], ts[i], fracs[i]);
    Some((i, t0 + (0.5 - f0) / (f1 - f0) * (t1 - t0)))
}

/// The tightness grid `from, from+step, ...` up to `to` inclusive.
pub fn tightness_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "step must be positive");
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9).collect()
}

/// For every tightness in `grid`, generates `samples` instances whose seeds
/// depend only on `base.seed` and the sample index, and runs every check.
pub fn phase_scan(
    base: &ModelBParams,
    grid: &[f64],
    samples: usize,
    checks: &[PhaseCheck],
    cfg: &EnforceConfig,
) -> Result<PhaseScan, GeneratorError> {
    for &t in grid {
        ModelBParams { tightness: t, ..*base }.validate()?;
    }
    let cells: Vec<(usize, usize)> = (0..grid.len()).flat_map(|g| (0..samples).map(move |s| (g, s))).collect();
    let results: Vec<Result<Vec<(bool, f64)>, GeneratorError>> = cells
        .par_iter()
        .map(|&(g, s)| {
            let p = ModelBParams { tightness: grid[g], seed: derive_seed(base.seed, s as u64), ..*base };
            let net = generate_model_b(&p)?;
            checks
                .iter()
                .map(|c| {
                    let start = Instant::now();
                    let unsat = c.detects_unsat(&net, cfg)?;
                    Ok((unsat, start.elapsed().as_secs_f64() * 1e3))
                })
                .collect()
        })
        .collect();

    let mut detections = vec![vec![Vec::new(); samples]; grid.len()];
    let mut times = vec![vec![Vec::new(); samples]; grid.len()];
    for (&(g, s), r) in cells.iter().zip(results) {
        let r = r?;
        detections[g][s] = r.iter().map(|x| x.0).collect();
        times[g][s] = r.iter().map(|x| x.1).collect();
    }

    let mut rows = Vec::new();
    let mut crossings = Vec::new();
    let mut flagged = Vec::new();
    for (k, &check) in checks.iter().enumerate() {
        let fracs: Vec<f64> = (0..grid.len())
            .map(|g| {
                let hits = detections[g].iter().filter(|d| d[k]).count();
                if samples == 0 {
                    0.0
                } else {
                    hits as f64 / samples as f64
                }
            })
            .collect();
        let cross = interpolate_crossing(grid, &fracs);
        crossings.push((check, cross.map(|c| c.1)));
        flagged.push(cross.map(|c| c.0));
    }
    for (g, &t) in grid.iter().enumerate() {
        for (k, &check) in checks.iter().enumerate() {
            let hits = detections[g].iter().filter(|d| d[k]).count();
            let total_ms: f64 = times[g].iter().map(|ts| ts[k]).sum();
            rows.push(PhaseRow {
                t,
                check,
                samples,
                frac_unsat: if samples == 0 { 0.0 } else { hits as f64 / samples as f64 },
                mean_ms: if samples == 0 { 0.0 } else { total_ms / samples as f64 },
                crossing_flag: flagged[k] == Some(g),
            });
        }
    }
    Ok(PhaseScan { rows, crossings, detections })
}
