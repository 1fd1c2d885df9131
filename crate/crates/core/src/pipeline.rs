//! End-to-end runs: the linear-cycle branch, the Hodge-cycle branch, and
//! the comparison of their elementary divisors.
//!
//! Stage names in progress messages follow the matrices they build:
//! `A1` (linear cycles), `A2`, `X`, `Psi`, `A3` (Hodge cycles) and `SNF`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::cache::{Cache, Lookup};
use crate::cycles::{self, FermatParams};
use crate::error::{Error, Result};
use crate::hodge;
use crate::lattice::{self, LatticeMeta, LatticeReport, LatticeSource};
use crate::matrix::IntMatrix;
use crate::snf;

/// Rough per-entry footprint of a small arbitrary-precision integer.
const ENTRY_BYTES: u64 = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    FullLinear,
    PrimitiveLinear,
    PrimitiveHodge,
    Verify,
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full-linear" => Ok(Target::FullLinear),
            "primitive-linear" => Ok(Target::PrimitiveLinear),
            "primitive-hodge" => Ok(Target::PrimitiveHodge),
            "verify" => Ok(Target::Verify),
            _ => Err(Error::InvalidParams(format!(
                "unknown target {s:?} (full-linear, primitive-linear, primitive-hodge, verify)"
            ))),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::FullLinear => "full-linear",
            Target::PrimitiveLinear => "primitive-linear",
            Target::PrimitiveHodge => "primitive-hodge",
            Target::Verify => "verify",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Table,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "table" => Ok(OutputFormat::Table),
            _ => Err(Error::InvalidParams(format!("unknown format {s:?} (json, csv, table)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceCaps {
    /// Largest number of linear cycles that will be enumerated.
    pub max_cycles: u64,
    /// Largest number of multi-indices on the Hodge side.
    pub max_mu: u64,
    /// Advisory bound, in bytes, on the estimated matrix footprint.
    pub memory_budget: u64,
}

impl Default for ResourceCaps {
    fn default() -> Self {
        ResourceCaps { max_cycles: 20_000, max_mu: 4096, memory_budget: 1 << 30 }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: u32,
    pub d: u32,
    pub target: Target,
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; 0 means the rayon default.
    pub jobs: usize,
    pub caps: ResourceCaps,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(n: u32, d: u32, target: Target) -> Result<Self> {
        let cfg = RunConfig {
            n,
            d,
            target,
            cache_dir: None,
            jobs: 0,
            caps: ResourceCaps::default(),
            format: OutputFormat::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        FermatParams::new(self.n, self.d)?;
        let c = &self.caps;
        if c.max_cycles == 0 || c.max_mu == 0 || c.memory_budget == 0 {
            return Err(Error::InvalidParams("resource caps must be positive".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> FermatParams {
        FermatParams::new(self.n, self.d).expect("validated")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationFlags {
    pub lists_equal: bool,
    pub table_relation_ok: bool,
    pub condition_eq1: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub n: u32,
    pub d: u32,
    pub full_report: LatticeReport,
    pub linear_report: LatticeReport,
    pub hodge_report: LatticeReport,
    pub verify: VerificationFlags,
}

impl VerificationResult {
    pub fn lists_equal(&self) -> bool {
        self.verify.lists_equal
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Report(LatticeReport),
    Verification(VerificationResult),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageOutcome {
    Computed,
    Cached,
    /// A cache entry existed but failed validation.
    Recomputed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageEvent {
    pub stage: String,
    pub outcome: StageOutcome,
}

/// Estimated bytes for the linear branch: the Gram matrix, the working
/// copy of the reduction and its left transform.
pub fn linear_footprint(cycle_count: &BigInt) -> Option<u64> {
    let n = cycle_count.to_u64()?;
    n.checked_mul(n)?.checked_mul(3 * ENTRY_BYTES)
}

/// Estimated bytes for the Hodge branch: `Psi`, `A2`'s transform, `X` and
/// `A3` are each at most `mu x mu`.
pub fn hodge_footprint(mu: &BigInt) -> Option<u64> {
    let m = mu.to_u64()?;
    m.checked_mul(m)?.checked_mul(4 * ENTRY_BYTES)
}

fn gib(bytes: u64) -> String {
    format!("{:.2} GiB", bytes as f64 / (1u64 << 30) as f64)
}

/// Refuses linear-branch runs beyond the caps before anything is allocated.
pub fn check_linear_caps(p: &FermatParams, caps: &ResourceCaps) -> Result<()> {
    let count = p.cycle_count();
    let refuse = |why: String| {
        Err(Error::ResourceCap(format!(
            "({},{}) linear branch: {why}; full linear-cycle lattices such as (4,6) and (10,3) \
             are out of reach at this scale",
            p.n(),
            p.d()
        )))
    };
    if count > BigInt::from(caps.max_cycles) {
        return refuse(format!("N = {count} linear cycles exceeds the cap of {}", caps.max_cycles));
    }
    match linear_footprint(&count) {
        Some(bytes) if bytes <= caps.memory_budget => Ok(()),
        Some(bytes) => refuse(format!(
            "N = {count} needs an estimated {} against a budget of {}",
            gib(bytes),
            gib(caps.memory_budget)
        )),
        None => refuse(format!("N = {count} overflows the footprint estimate")),
    }
}

pub fn check_hodge_caps(p: &FermatParams, caps: &ResourceCaps) -> Result<()> {
    let mu = p.mu();
    let refuse = |why: String| Err(Error::ResourceCap(format!("({},{}) Hodge branch: {why}", p.n(), p.d())));
    if mu > BigInt::from(caps.max_mu) {
        return refuse(format!("mu = {mu} exceeds the cap of {}", caps.max_mu));
    }
    match hodge_footprint(&mu) {
        Some(bytes) if bytes <= caps.memory_budget => Ok(()),
        Some(bytes) => refuse(format!("mu = {mu} needs an estimated {} against a budget of {}", gib(bytes), gib(caps.memory_budget))),
        None => refuse(format!("mu = {mu} overflows the footprint estimate")),
    }
}

pub struct Pipeline {
    cfg: RunConfig,
    cache: Option<Cache>,
    events: Mutex<Vec<StageEvent>>,
    /// The full Gram matrix, shared by the full and primitive linear runs.
    full: Mutex<Option<IntMatrix>>,
}

fn report_stage(source: LatticeSource) -> String {
    format!("SNF-{source}")
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let cache = cfg.cache_dir.as_ref().map(Cache::open).transpose()?;
        Ok(Pipeline { cfg, cache, events: Mutex::new(Vec::new()), full: Mutex::new(None) })
    }

    /// Uses an explicitly configured cache instead of `cfg.cache_dir`.
    pub fn with_cache(cfg: RunConfig, cache: Cache) -> Result<Self> {
        cfg.validate()?;
        Ok(Pipeline { cfg, cache: Some(cache), events: Mutex::new(Vec::new()), full: Mutex::new(None) })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    /// Stages in the order they finished, with how each was obtained.
    pub fn events(&self) -> Vec<StageEvent> {
        self.events.lock().expect("event log").clone()
    }

    fn record(&self, stage: &str, outcome: StageOutcome) {
        let how = match outcome {
            StageOutcome::Computed => "computed",
            StageOutcome::Cached => "loaded from cache",
            StageOutcome::Recomputed => "recomputed after cache validation failure",
        };
        log::info!("{stage} ({},{}): {how}", self.cfg.n, self.cfg.d);
        self.events.lock().expect("event log").push(StageEvent { stage: stage.to_string(), outcome });
    }

    /// Looks a stage up in the cache, computing and storing it on a miss.
    fn staged<T>(
        &self,
        stage: &str,
        load: impl FnOnce(&Cache) -> Lookup<T>,
        store: impl FnOnce(&Cache, &T) -> Result<()>,
        compute: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        let (n, d) = (self.cfg.n, self.cfg.d);
        let mut outcome = StageOutcome::Computed;
        if let Some(cache) = &self.cache {
            match load(cache) {
                Lookup::Hit(v) => {
                    self.record(stage, StageOutcome::Cached);
                    return Ok(v);
                }
                Lookup::Miss => {}
                Lookup::Invalid(why) => {
                    log::warn!("cache entry for {stage} ({n},{d}) rejected: {why}; recomputing");
                    outcome = StageOutcome::Recomputed;
                }
            }
        }
        let value = compute()?;
        if let Some(cache) = &self.cache {
            if let Err(e) = store(cache, &value) {
                log::warn!("could not cache {stage} ({n},{d}): {e}");
            }
        }
        self.record(stage, outcome);
        Ok(value)
    }

    fn staged_matrix(&self, stage: &str, shape: Option<(usize, usize)>, compute: impl FnOnce() -> Result<IntMatrix>) -> Result<IntMatrix> {
        let (n, d) = (self.cfg.n, self.cfg.d);
        self.staged(
            stage,
            |c| c.load_matrix(n, d, stage, shape),
            |c, m| c.store_matrix(n, d, stage, m),
            compute,
        )
    }

    fn staged_report(&self, source: LatticeSource, gram: impl FnOnce() -> Result<IntMatrix>) -> Result<LatticeReport> {
        let (n, d) = (self.cfg.n, self.cfg.d);
        let stage = report_stage(source);
        self.staged(
            &stage,
            |c| c.load_json(n, d, &stage),
            |c, r| c.store_json(n, d, &stage, r),
            || {
                let a = gram()?;
                log::info!("SNF ({n},{d}): reducing {}x{} {source} Gram matrix", a.rows(), a.cols());
                lattice::nondegenerate_quotient(&a, LatticeMeta { n, d, source })
            },
        )
    }

    /// The full linear-cycle Gram matrix (all cycles, `N x N`).
    fn full_matrix(&self) -> Result<IntMatrix> {
        let mut memo = self.full.lock().expect("full matrix memo");
        if let Some(m) = memo.as_ref() {
            return Ok(m.clone());
        }
        let p = self.cfg.params();
        check_linear_caps(&p, &self.cfg.caps)?;
        let count = p.cycle_count().to_usize().expect("checked against the cap");
        let full = self.staged_matrix("A1-full", Some((count, count)), || {
            let cycles = cycles::enumerate_linear_cycles(&p, self.cfg.caps.max_cycles as usize)?;
            log::info!("A1 ({},{}): assembling {count}x{count} intersection matrix", p.n(), p.d());
            Ok(cycles::full_intersection_matrix(&p, &cycles))
        })?;
        *memo = Some(full.clone());
        Ok(full)
    }

    /// `A1`, the Gram matrix of the primitive cycles `P_i - P_1`.
    fn primitive_matrix(&self) -> Result<IntMatrix> {
        let p = self.cfg.params();
        check_linear_caps(&p, &self.cfg.caps)?;
        let count = p.cycle_count().to_usize().expect("checked against the cap");
        self.staged_matrix("A1", Some((count - 1, count - 1)), || Ok(cycles::primitive_from_full(&self.full_matrix()?)))
    }

    pub fn run_linear_branch(&self, primitive: bool) -> Result<LatticeReport> {
        check_linear_caps(&self.cfg.params(), &self.cfg.caps)?;
        if primitive {
            self.staged_report(LatticeSource::PrimitiveLinear, || self.primitive_matrix())
        } else {
            self.staged_report(LatticeSource::FullLinear, || self.full_matrix())
        }
    }

    /// `A3 = X Psi X^T` with its intermediate matrices cached.
    fn hodge_gram(&self) -> Result<IntMatrix> {
        let p = self.cfg.params();
        let (n, d) = (p.n(), p.d());
        let sets = hodge::build_index_sets(&p);
        let mu = sets.mu();
        log::info!("A2 ({n},{d}): mu = {mu}, |I1| = {}, |I2| = {}", sets.i1.len(), sets.i2.len());
        let x = self.staged_matrix("X", None, || {
            let Some(q) = hodge::q_matrix(&p, &sets) else {
                log::info!("X ({n},{d}): I1 and I2 are empty, every multi-index is a Hodge cycle");
                return Ok(IntMatrix::identity(mu));
            };
            let a2 = self.staged_matrix("A2", None, || hodge::a2_concatenation(&q))?;
            log::info!("SNF ({n},{d}): left kernel of {}x{} A2", a2.rows(), a2.cols());
            let dec = snf::smith_left(&a2)?;
            if let Some(cache) = &self.cache {
                if let Err(e) = cache.store_matrix(n, d, "U2", &dec.u) {
                    log::warn!("could not cache U2 ({n},{d}): {e}");
                }
            }
            Ok(snf::kernel_rows(&dec.u, dec.rank))
        })?;
        if x.cols() != mu {
            return Err(Error::DimensionMismatch(format!("X has {} columns, mu = {mu}", x.cols())));
        }
        let psi = hodge::pham_intersection_matrix(&p, &sets.all);
        self.record("Psi", StageOutcome::Computed);
        let k = x.rows();
        self.staged_matrix("A3", Some((k, k)), || {
            log::info!("A3 ({n},{d}): congruence by {}x{} X", x.rows(), x.cols());
            snf::congruent_transform(&x, &psi)
        })
    }

    pub fn run_hodge_branch(&self) -> Result<LatticeReport> {
        check_hodge_caps(&self.cfg.params(), &self.cfg.caps)?;
        self.staged_report(LatticeSource::PrimitiveHodge, || self.hodge_gram())
    }

    /// Runs both branches, concurrently, and compares their divisors.
    pub fn verify(&self) -> Result<VerificationResult> {
        let p = self.cfg.params();
        check_linear_caps(&p, &self.cfg.caps)?;
        check_hodge_caps(&p, &self.cfg.caps)?;
        let (linear, hodge) = rayon::join(
            || -> Result<_> { Ok((self.run_linear_branch(false)?, self.run_linear_branch(true)?)) },
            || self.run_hodge_branch(),
        );
        let (full_report, linear_report) = linear?;
        let hodge_report = hodge?;
        let lists_equal = linear_report.divisors == hodge_report.divisors;
        let table_relation_ok = lattice::table_relation(&full_report.divisors, p.d())
            .map(|predicted| predicted == linear_report.divisors)
            .unwrap_or(false);
        let verify = VerificationFlags { lists_equal, table_relation_ok, condition_eq1: p.hodge_condition() };
        log::info!(
            "verify ({},{}): lists_equal = {lists_equal}, table_relation_ok = {table_relation_ok}",
            p.n(),
            p.d()
        );
        Ok(VerificationResult { n: p.n(), d: p.d(), full_report, linear_report, hodge_report, verify })
    }

    /// Runs the configured target inside a pool of `cfg.jobs` threads.
    pub fn run(&self) -> Result<Outcome> {
        let go = || match self.cfg.target {
            Target::FullLinear => self.run_linear_branch(false).map(Outcome::Report),
            Target::PrimitiveLinear => self.run_linear_branch(true).map(Outcome::Report),
            Target::PrimitiveHodge => self.run_hodge_branch().map(Outcome::Report),
            Target::Verify => self.verify().map(Outcome::Verification),
        };
        if self.cfg.jobs == 0 {
            return go();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        pool.install(go)
    }
}

pub fn run_linear_branch(cfg: &RunConfig) -> Result<LatticeReport> {
    let primitive = match cfg.target {
        Target::FullLinear => false,
        Target::PrimitiveLinear => true,
        other => return Err(Error::InvalidParams(format!("target {other} is not a linear-branch target"))),
    };
    Pipeline::new(cfg.clone())?.run_linear_branch(primitive)
}

pub fn run_hodge_branch(cfg: &RunConfig) -> Result<LatticeReport> {
    Pipeline::new(cfg.clone())?.run_hodge_branch()
}

pub fn verify(cfg: &RunConfig) -> Result<VerificationResult> {
    Pipeline::new(cfg.clone())?.verify()
}

fn csv_row(r: &LatticeReport) -> String {
    format!("{},{},{},{},{},{}", r.n, r.d, r.source, r.rank, if r.sign < 0 { '-' } else { '+' }, r.divisors)
}

fn table_row(r: &LatticeReport) -> String {
    format!("{:>3} {:>3}  {:<17} {:>6}  {}", r.n, r.d, r.source.to_string(), r.rank, r.signed_divisors())
}

/// Renders an outcome; JSON output is deterministic for identical input.
pub fn render(outcome: &Outcome, format: OutputFormat) -> Result<String> {
    let reports: Vec<&LatticeReport> = match outcome {
        Outcome::Report(r) => vec![r],
        Outcome::Verification(v) => vec![&v.full_report, &v.linear_report, &v.hodge_report],
    };
    Ok(match format {
        OutputFormat::Json => match outcome {
            Outcome::Report(r) => serde_json::to_string_pretty(r)?,
            Outcome::Verification(v) => serde_json::to_string_pretty(v)?,
        },
        OutputFormat::Csv => {
            let mut out = String::from("n,d,source,rank,sign,divisors\n");
            for r in reports {
                out.push_str(&csv_row(r));
                out.push('\n');
            }
            out
        }
        OutputFormat::Table => {
            let mut out = format!("{:>3} {:>3}  {:<17} {:>6}  {}\n", "n", "d", "lattice", "rank", "discriminant");
            for r in reports {
                out.push_str(&table_row(r));
                out.push('\n');
            }
            if let Outcome::Verification(v) = outcome {
                let f = &v.verify;
                out.push_str(&format!(
                    "lists_equal={} table_relation_ok={} condition_eq1={}\n",
                    f.lists_equal, f.table_relation_ok, f.condition_eq1
                ));
            }
            out
        }
    })
}
