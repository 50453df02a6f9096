//! Breakpoint-growth measurement over generated instance families.

use crate::generate::{layered, random_partial_ktree, series_parallel, GeneratedInstance};
use crate::reduction::{reduce_to_terminals, ReductionError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Layered,
    SeriesParallel,
    RandomPartialKtree,
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GeneratorKind::Layered => "layered",
            GeneratorKind::SeriesParallel => "series_parallel",
            GeneratorKind::RandomPartialKtree => "random_partial_ktree",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub generator: GeneratorKind,
    pub n: usize,
    pub width: usize,
    pub seed: u64,
    pub pieces_per_edge: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n < 2 {
            return Err(ExperimentError::InvalidConfig("n must be at least 2".into()));
        }
        if self.width < 1 {
            return Err(ExperimentError::InvalidConfig("w must be at least 1".into()));
        }
        if self.pieces_per_edge < 1 {
            return Err(ExperimentError::InvalidConfig(
                "pieces_per_edge must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Generates the instance for this configuration. Deterministic: the
    /// RNG seed mixes the base seed with `n` and `w` so every row of a
    /// sweep is independent yet reproducible.
    pub fn instance(&self) -> GeneratedInstance {
        let mixed = splitmix(self.seed ^ (self.n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
            ^ ((self.width as u64) << 32));
        let mut rng = ChaCha8Rng::seed_from_u64(mixed);
        match self.generator {
            GeneratorKind::Layered => layered(&mut rng, self.n, self.width, self.pieces_per_edge),
            GeneratorKind::SeriesParallel => {
                series_parallel(&mut rng, self.n, self.pieces_per_edge)
            }
            GeneratorKind::RandomPartialKtree => {
                random_partial_ktree(&mut rng, self.n, self.width, self.pieces_per_edge)
            }
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// One CSV row of the growth experiment. All fields except `wall_time` are
/// deterministic given the config.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub n: usize,
    pub w: usize,
    /// Total linear pieces over all edge arrival functions of the instance.
    pub total_pieces: usize,
    /// Breakpoints of the end-to-end arrival function (0 when infinite).
    pub breakpoints: usize,
    pub star_mesh_count: usize,
    pub parallel_count: usize,
    pub max_degree: usize,
    pub wall_time_secs: f64,
}

pub const CSV_HEADER: &str =
    "n,w,K,breakpoints,star_mesh_count,parallel_count,max_degree,wall_time";

impl ExperimentRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6}",
            self.n,
            self.w,
            self.total_pieces,
            self.breakpoints,
            self.star_mesh_count,
            self.parallel_count,
            self.max_degree,
            self.wall_time_secs
        )
    }
}

/// Generates the configured instance, reduces it, and reports the budget
/// statistics together with the wall-clock time of the reduction.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRow, ReductionError> {
    config.validate().map_err(|e| ReductionError::StepCheck(e.to_string()))?;
    let instance = config.instance();
    let total_pieces = instance.graph.total_pieces();
    let start = Instant::now();
    let reduced = reduce_to_terminals(&instance.graph, &instance.decomposition)?;
    let wall_time_secs = start.elapsed().as_secs_f64();
    Ok(ExperimentRow {
        n: config.n,
        w: config.width,
        total_pieces,
        breakpoints: reduced.forward.breakpoint_count(),
        star_mesh_count: reduced.trace.star_mesh_count,
        parallel_count: reduced.trace.parallel_count,
        max_degree: reduced.trace.max_star_degree,
        wall_time_secs,
    })
}
