use clap::{Args, ValueEnum};
use serde::Serialize;
use zfx_core::{Exec, Mode};

use crate::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyStepup,
    VerifyShift,
    SearchF2,
    ColorShift,
    DisperserCheck,
    UpperBound,
    ProbcoreSelftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyStepup => "verify-stepup",
            Command::VerifyShift => "verify-shift",
            Command::SearchF2 => "search-f2",
            Command::ColorShift => "color-shift",
            Command::DisperserCheck => "disperser-check",
            Command::UpperBound => "upper-bound",
            Command::ProbcoreSelftest => "probcore-selftest",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    #[default]
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum F2Arg {
    Parity,
    Interleaved,
    Prefix,
    Constant,
    Search,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleArg {
    Seeded,
    Adversarial,
    File,
}

/// Parameters shared by every subcommand. Which ones are read depends on
/// the subcommand; the rest are ignored.
#[derive(Clone, Debug, Default, Args, Serialize)]
pub struct RunArgs {
    /// Ground set size.
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n_ground: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Output bits (extractors) or colors (upper-bound oracle).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeArg,
    /// Sample count in sampled mode.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Target error for searched tables.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f2: Option<F2Arg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_candidates: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<f64>,
    /// Size of the restricted set (disperser-check) or target |V| (upper-bound, i = 1).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_file: Option<String>,
    /// Also run the exact decomposition sweep.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub decomposition: bool,
    /// Write the coloring table here (color-shift).
    #[arg(long)]
    #[serde(skip)]
    pub export: Option<String>,
    /// Worker threads; 0 means one per core. Does not affect results.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<String>,
    #[arg(long, value_enum, default_value_t)]
    #[serde(skip)]
    pub format: Format,
    /// Record wall time in the report (breaks byte-determinism).
    #[arg(long)]
    #[serde(skip)]
    pub timing: bool,
}

macro_rules! required {
    ($name:ident, $field:ident, $flag:literal, $ty:ty) => {
        pub fn $name(&self) -> Result<$ty, RunError> {
            self.$field.ok_or_else(|| RunError::Usage(format!("missing --{}", $flag)))
        }
    };
}

impl RunArgs {
    required!(n_ground_req, n_ground, "N", usize);
    required!(k_req, k, "k", usize);
    required!(l_req, l, "l", usize);
    required!(d_req, d, "d", usize);
    required!(p_req, p, "p", usize);
    required!(seed_req, seed, "seed", u64);

    pub fn exec(&self) -> Exec {
        Exec::with_workers(self.workers)
    }

    /// Sampled mode needs an explicit seed.
    pub fn core_mode(&self) -> Result<Mode, RunError> {
        match self.mode {
            ModeArg::Exhaustive => Ok(Mode::Exhaustive),
            ModeArg::Sampled => Ok(Mode::Sampled { count: self.samples, seed: self.seed_req()? }),
        }
    }
}

/// A fully specified run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(flatten)]
    pub args: RunArgs,
}
