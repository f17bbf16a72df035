//! Command-line parsing and dispatch.
//!
//! Values are resolved in the order flag, then config file (`--config`),
//! then built-in default.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use heiskakeya_core::dimest::{self, Metric, PackingParams, ScaleLadder};
use heiskakeya_core::experiments::{self, PipelineReport};
use heiskakeya_core::setgen::{self, Placement, PrimitiveKind, SetSampler};
use serde::{Deserialize, Serialize};

use crate::checks;
use crate::formats::{self, DimSummary};
use crate::parallel;

/// Exit status for invalid flags or configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failures while running.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "heiskakeya", version, about = "Kakeya-set experiments in the first Heisenberg group")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Base seed [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file [default: depends on the command]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Smallest ladder scale [default: depends on the command]
    #[arg(long, global = true)]
    pub delta_min: Option<f64>,
    /// Largest ladder scale [default: depends on the command]
    #[arg(long, global = true)]
    pub delta_max: Option<f64>,
    /// Number of ladder scales [default: ratio closest to sqrt 2]
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Consecutive rejections ending a packing run [default: 2000]
    #[arg(long, global = true)]
    pub stop_k: Option<usize>,
    /// JSON file with default values for any flag (snake_case keys)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Packing-count dimension of a set [default out: dim.csv, summary dim.json;
    /// default ladder 0.3 .. 0.053]
    Dim(DimArgs),
    /// Build or check Kakeya code families
    Kakeya {
        #[command(subcommand)]
        action: KakeyaCmd,
    },
    /// Randomised checks of the duality identities
    Duality {
        #[command(subcommand)]
        action: DualityCmd,
    },
    /// Projected dimensions of an IFS attractor [default out: marstrand.csv,
    /// report marstrand.json; default ladder 1e-2 .. 1e-4]
    Marstrand(MarstrandArgs),
    /// Discrete co-area comparison across the ladder [default out: coarea.csv,
    /// report coarea.json; default ladder 0.3 .. 0.053]
    Coarea(CoareaArgs),
    /// Dimension lower bound from a code family [default out: pipeline.json,
    /// rows pipeline.csv; default ladder 0.04 .. 0.005]
    Pipeline(PipelineArgs),
}

#[derive(Debug, Subcommand)]
pub enum KakeyaCmd {
    /// One segment per direction i pi / m [default out: family.json]
    Build(BuildArgs),
    /// Direction coverage of a family [default out: kakeya_verify.json]
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum DualityCmd {
    /// [default out: duality.json]
    Verify(DualityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetName {
    Plane,
    TAxis,
    XSegment,
    Cube,
}

impl SetName {
    pub fn kind(self) -> PrimitiveKind {
        match self {
            SetName::Plane => PrimitiveKind::PlaneDisc,
            SetName::TAxis => PrimitiveKind::TAxis,
            SetName::XSegment => PrimitiveKind::XAxisSegment,
            SetName::Cube => PrimitiveKind::Cube,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricName {
    Euclidean,
    Heisenberg,
}

impl From<MetricName> for Metric {
    fn from(m: MetricName) -> Metric {
        match m {
            MetricName::Euclidean => Metric::Euclidean,
            MetricName::Heisenberg => Metric::Heisenberg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementName {
    Origin,
    Random,
    Plane,
}

impl From<PlacementName> for Placement {
    fn from(p: PlacementName) -> Placement {
        match p {
            PlacementName::Origin => Placement::Origin,
            PlacementName::Random => Placement::Random,
            PlacementName::Plane => Placement::Plane,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct DimArgs {
    /// Calibration set [default: plane unless --family or --ifs is given]
    #[arg(long, value_enum)]
    pub set: Option<SetName>,
    /// Size parameter of the calibration set [default: 1]
    #[arg(long)]
    pub size: Option<f64>,
    /// [default: heisenberg]
    #[arg(long, value_enum)]
    pub metric: Option<MetricName>,
    /// Union of the segments of a code family (path or inline JSON)
    #[arg(long, conflicts_with_all = ["set", "ifs"])]
    pub family: Option<String>,
    /// IFS attractor (CANTOR2, CANTOR4, path or inline JSON)
    #[arg(long, conflicts_with = "set")]
    pub ifs: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BuildArgs {
    /// Number of directions [default: 64]
    #[arg(long)]
    pub m: Option<usize>,
    /// [default: origin]
    #[arg(long, value_enum)]
    pub placement: Option<PlacementName>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    /// Code family (path or inline JSON)
    #[arg(long)]
    pub family: Option<String>,
    /// Directions j pi / angles to check [default: family size]
    #[arg(long)]
    pub angles: Option<usize>,
    /// Angular tolerance in radians [default: 1e-9]
    #[arg(long)]
    pub ang_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DualityArgs {
    /// Random (c, w) pairs [default: 1000000]
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MarstrandArgs {
    /// IFS attractor (CANTOR2, CANTOR4, path or inline JSON) [default: CANTOR2]
    #[arg(long)]
    pub ifs: Option<String>,
    /// Number of angles 2 pi (k + 1/2) / n [default: 32]
    #[arg(long)]
    pub thetas: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CoareaArgs {
    /// Set to slice [default: cube]
    #[arg(long, value_enum)]
    pub set: Option<SetName>,
    /// [default: 1]
    #[arg(long)]
    pub size: Option<f64>,
    /// Slice exponent [default: 3 for cube, 2 for plane, 0 otherwise]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of slabs across the x-range [default: 16]
    #[arg(long)]
    pub slices: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Code family (path or inline JSON); built from --m and --placement if absent
    #[arg(long)]
    pub family: Option<String>,
    /// Directions of the built family [default: 4096]
    #[arg(long, conflicts_with = "family")]
    pub m: Option<usize>,
    /// Placement of the built family [default: plane]
    #[arg(long, value_enum, conflicts_with = "family")]
    pub placement: Option<PlacementName>,
    /// Sections in the quarter next to c0 [default: 9]
    #[arg(long)]
    pub c_grid: Option<usize>,
}

/// Contents of a `--config` file. Keys mirror the long flags in snake_case.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub levels: Option<usize>,
    pub stop_k: Option<usize>,
    pub set: Option<String>,
    pub size: Option<f64>,
    pub metric: Option<String>,
    pub family: Option<String>,
    pub ifs: Option<String>,
    pub m: Option<usize>,
    pub placement: Option<String>,
    pub angles: Option<usize>,
    pub ang_tol: Option<f64>,
    pub samples: Option<usize>,
    pub thetas: Option<usize>,
    pub alpha: Option<f64>,
    pub slices: Option<usize>,
    pub c_grid: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {path}: {reason}")]
    File { path: PathBuf, reason: String },
    #[error("`{key}`: {reason}")]
    Key { key: &'static str, reason: String },
}

fn key_err(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Key {
        key,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetSource {
    Primitive(PrimitiveKind, f64),
    Family(String),
    Ifs(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySource {
    Load(String),
    Build { m: usize, placement: Placement },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Dim { source: SetSource, metric: Metric },
    KakeyaBuild { m: usize, placement: Placement },
    KakeyaVerify { family: String, angles: Option<usize>, ang_tol: f64 },
    DualityVerify { samples: usize },
    Marstrand { ifs: String, thetas: usize },
    Coarea { kind: PrimitiveKind, size: f64, alpha: f64, slices: usize },
    Pipeline { family: FamilySource, c_grid: usize },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dim { .. } => "dim",
            Command::KakeyaBuild { .. } => "kakeya build",
            Command::KakeyaVerify { .. } => "kakeya verify",
            Command::DualityVerify { .. } => "duality verify",
            Command::Marstrand { .. } => "marstrand",
            Command::Coarea { .. } => "coarea",
            Command::Pipeline { .. } => "pipeline",
        }
    }

    fn default_out(&self) -> &'static str {
        match self {
            Command::Dim { .. } => "dim.csv",
            Command::KakeyaBuild { .. } => "family.json",
            Command::KakeyaVerify { .. } => "kakeya_verify.json",
            Command::DualityVerify { .. } => "duality.json",
            Command::Marstrand { .. } => "marstrand.csv",
            Command::Coarea { .. } => "coarea.csv",
            Command::Pipeline { .. } => "pipeline.json",
        }
    }

    fn default_ladder(&self) -> ScaleLadder {
        match self {
            Command::Marstrand { .. } => experiments::marstrand_ladder(),
            Command::Pipeline { .. } => experiments::pipeline_ladder(),
            _ => ScaleLadder::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub ladder: ScaleLadder,
    pub stop_k: usize,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn params(&self) -> PackingParams {
        PackingParams {
            stop_k: self.stop_k,
            seed: self.seed,
        }
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn parse_enum<E: ValueEnum>(key: &'static str, flag: Option<E>, file: &Option<String>) -> Result<Option<E>, ConfigError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file {
        None => Ok(None),
        Some(s) => E::from_str(s, true).map(Some).map_err(|_| {
            let names: Vec<String> = E::value_variants()
                .iter()
                .filter_map(|v| v.to_possible_value().map(|p| p.get_name().to_owned()))
                .collect();
            key_err(key, format!("unknown value {s:?}, expected one of {}", names.join(", ")))
        }),
    }
}

fn positive(key: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(key_err(key, format!("must be a positive number, got {v}")))
    }
}

fn at_least(key: &'static str, v: usize, min: usize) -> Result<usize, ConfigError> {
    if v >= min {
        Ok(v)
    } else {
        Err(key_err(key, format!("must be at least {min}, got {v}")))
    }
}

pub fn read_file_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let file_err = |reason: String| ConfigError::File {
        path: path.to_owned(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| file_err(e.to_string()))
}

/// Resolves parsed flags against an optional config file.
pub fn resolve(cli: Cli, file: Option<FileConfig>) -> Result<RunConfig, ConfigError> {
    let f = file.unwrap_or_default();
    let c = cli.common;
    let command = match cli.command {
        Cmd::Dim(a) => {
            let family = pick(a.family, f.family.clone());
            let ifs = pick(a.ifs, f.ifs.clone());
            let set = parse_enum("set", a.set, &f.set)?;
            let size = positive("size", pick(a.size, f.size).unwrap_or(1.0))?;
            let source = match (set, family, ifs) {
                (Some(s), None, None) => SetSource::Primitive(s.kind(), size),
                (None, Some(fam), None) => SetSource::Family(fam),
                (None, None, Some(i)) => SetSource::Ifs(i),
                (None, None, None) => SetSource::Primitive(PrimitiveKind::PlaneDisc, size),
                _ => return Err(key_err("set", "give only one of set, family and ifs")),
            };
            let metric = parse_enum("metric", a.metric, &f.metric)?.unwrap_or(MetricName::Heisenberg);
            Command::Dim {
                source,
                metric: metric.into(),
            }
        }
        Cmd::Kakeya { action: KakeyaCmd::Build(a) } => Command::KakeyaBuild {
            m: at_least("m", pick(a.m, f.m).unwrap_or(64), 4)?,
            placement: parse_enum("placement", a.placement, &f.placement)?
                .unwrap_or(PlacementName::Origin)
                .into(),
        },
        Cmd::Kakeya { action: KakeyaCmd::Verify(a) } => Command::KakeyaVerify {
            family: pick(a.family, f.family.clone()).ok_or_else(|| key_err("family", "a code family is required"))?,
            angles: pick(a.angles, f.angles).map(|n| at_least("angles", n, 1)).transpose()?,
            ang_tol: {
                let t = pick(a.ang_tol, f.ang_tol).unwrap_or(1e-9);
                if !(t >= 0.0) {
                    return Err(key_err("ang_tol", format!("must be >= 0, got {t}")));
                }
                t
            },
        },
        Cmd::Duality { action: DualityCmd::Verify(a) } => Command::DualityVerify {
            samples: at_least("samples", pick(a.samples, f.samples).unwrap_or(1_000_000), 1)?,
        },
        Cmd::Marstrand(a) => Command::Marstrand {
            ifs: pick(a.ifs, f.ifs.clone()).unwrap_or_else(|| "CANTOR2".to_owned()),
            thetas: at_least("thetas", pick(a.thetas, f.thetas).unwrap_or(32), 1)?,
        },
        Cmd::Coarea(a) => {
            let set = parse_enum("set", a.set, &f.set)?.unwrap_or(SetName::Cube);
            let alpha = pick(a.alpha, f.alpha).unwrap_or(match set {
                SetName::Cube => 3.0,
                SetName::Plane => 2.0,
                _ => 0.0,
            });
            if !(alpha >= 0.0) || !alpha.is_finite() {
                return Err(key_err("alpha", format!("must be >= 0, got {alpha}")));
            }
            Command::Coarea {
                kind: set.kind(),
                size: positive("size", pick(a.size, f.size).unwrap_or(1.0))?,
                alpha,
                slices: at_least("slices", pick(a.slices, f.slices).unwrap_or(16), 2)?,
            }
        }
        Cmd::Pipeline(a) => {
            let family = match pick(a.family, f.family.clone()) {
                Some(src) => FamilySource::Load(src),
                None => FamilySource::Build {
                    m: at_least("m", pick(a.m, f.m).unwrap_or(4096), 4)?,
                    placement: parse_enum("placement", a.placement, &f.placement)?
                        .unwrap_or(PlacementName::Plane)
                        .into(),
                },
            };
            Command::Pipeline {
                family,
                c_grid: at_least("c_grid", pick(a.c_grid, f.c_grid).unwrap_or(9), 1)?,
            }
        }
    };

    let default = command.default_ladder();
    let d_max = pick(c.delta_max, f.delta_max);
    let d_min = pick(c.delta_min, f.delta_min);
    let levels = pick(c.levels, f.levels);
    let ladder = if d_max.is_none() && d_min.is_none() && levels.is_none() {
        default
    } else {
        let hi = d_max.unwrap_or(default.deltas()[0]);
        let lo = d_min.unwrap_or(*default.deltas().last().expect("nonempty ladder"));
        let n = levels.unwrap_or_else(|| ScaleLadder::levels_for(hi, lo));
        ScaleLadder::geometric(hi, lo, n).map_err(|e| key_err("delta_min/delta_max/levels", e.to_string()))?
    };
    let stop_k = at_least("stop_k", pick(c.stop_k, f.stop_k).unwrap_or(2000), 1)?;
    let out = pick(c.out, f.out).unwrap_or_else(|| PathBuf::from(command.default_out()));
    Ok(RunConfig {
        seed: pick(c.seed, f.seed).unwrap_or(0),
        command,
        ladder,
        stop_k,
        out,
    })
}

/// Parses arguments (including the program name) and the optional config file.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, ParseFailure>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(ParseFailure::Clap)?;
    let file = match &cli.common.config {
        Some(p) => Some(read_file_config(p).map_err(ParseFailure::Config)?),
        None => None,
    };
    resolve(cli, file).map_err(ParseFailure::Config)
}

#[derive(Debug, thiserror::Error)]
pub enum ParseFailure {
    #[error(transparent)]
    Clap(clap::Error),
    #[error(transparent)]
    Config(ConfigError),
}

/// What a finished command reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// One-line summary: command, headline number, output path.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn set_sampler(source: &SetSource) -> anyhow::Result<Box<dyn SetSampler>> {
    Ok(match source {
        SetSource::Primitive(kind, size) => Box::new(setgen::primitive_sampler(*kind, *size)?),
        SetSource::Family(src) => {
            let fam = formats::load_family(src)?;
            Box::new(setgen::union_sampler(&fam).context("union_sampler")?)
        }
        SetSource::Ifs(src) => Box::new(setgen::ifs_sampler(formats::load_ifs(src)?).context("ifs_sampler")?),
    })
}

fn pipeline_csv(report: &PipelineReport) -> String {
    formats::param_csv(report.per_c.iter().map(|s| (s.c, &s.height_dim)))
}

/// Runs a resolved configuration, writing its output files.
pub fn execute(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let threads = parallel::threads_from_env()?;
    parallel::pool(threads)?.install(|| execute_inner(cfg))
}

fn execute_inner(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let out = cfg.out.clone();
    let params = cfg.params();
    match &cfg.command {
        Command::Dim { source, metric } => {
            let sampler = set_sampler(source)?;
            let est = dimest::estimate_dimension(&sampler, &cfg.ladder, *metric, &params)
                .with_context(|| format!("estimate_dimension on {}", sampler.label()))?;
            let summary = DimSummary::new(&est, sampler.label(), cfg.seed);
            let json = formats::sibling(&out, "json");
            formats::write_atomic(&out, formats::dim_csv(&est).as_bytes())?;
            formats::write_atomic(&json, formats::to_json(&summary)?.as_bytes())?;
            Ok(Outcome {
                summary: format!(
                    "dim {} {}: slope={:.4} r2={:.4} out={}",
                    sampler.label(),
                    metric.name(),
                    est.slope,
                    est.r2,
                    out.display()
                ),
                files: vec![out, json],
            })
        }
        Command::KakeyaBuild { m, placement } => {
            let fam = setgen::kakeya_union_builder(*m, *placement, cfg.seed).context("kakeya_union_builder")?;
            formats::write_atomic(&out, formats::to_json(&fam)?.as_bytes())?;
            Ok(Outcome {
                summary: format!("kakeya build {}: codes={} out={}", fam.label, fam.len(), out.display()),
                files: vec![out],
            })
        }
        Command::KakeyaVerify { family, angles, ang_tol } => {
            let fam = formats::load_family(family)?;
            let n = angles.unwrap_or(fam.len().max(1));
            let report = setgen::verify_kakeya(&fam, n, *ang_tol).context("verify_kakeya")?;
            formats::write_atomic(&out, formats::to_json(&report)?.as_bytes())?;
            Ok(Outcome {
                summary: format!(
                    "kakeya verify {}: covered={}/{} missing={} out={}",
                    fam.label,
                    report.covered,
                    report.angles,
                    report.missing.len(),
                    out.display()
                ),
                files: vec![out],
            })
        }
        Command::DualityVerify { samples } => {
            let r = checks::duality_residuals(*samples, cfg.seed);
            formats::write_atomic(&out, formats::to_json(&r)?.as_bytes())?;
            if r.max_residual > 1e-12 {
                bail!(
                    "duality verify: max_residual={:e} exceeds 1e-12 (see {})",
                    r.max_residual,
                    out.display()
                );
            }
            Ok(Outcome {
                summary: format!(
                    "duality verify: samples={} max_residual<=1e-12 ({:e}) out={}",
                    samples,
                    r.max_residual,
                    out.display()
                ),
                files: vec![out],
            })
        }
        Command::Marstrand { ifs, thetas } => {
            let spec = formats::load_ifs(ifs)?;
            let target = spec.similarity_dimension().min(1.0);
            let k = setgen::ifs_sampler(spec).context("ifs_sampler")?;
            let grid = experiments::theta_grid(*thetas);
            let rows = parallel::marstrand(&k, &grid, &cfg.ladder, &params)?;
            let within = rows.iter().filter(|(_, e)| (e.slope - target).abs() <= 0.15).count();
            let json = formats::sibling(&out, "json");
            formats::write_atomic(&out, formats::param_csv(rows.iter().map(|(t, e)| (*t, e))).as_bytes())?;
            let report = MarstrandReport {
                ifs: ifs.clone(),
                predicted: target,
                within_0_15: within,
                seed: cfg.seed,
                deltas: cfg.ladder.deltas().to_vec(),
                stop_k: cfg.stop_k,
                rows: rows
                    .iter()
                    .map(|(t, e)| DimRow {
                        param: *t,
                        slope: e.slope,
                        r2: e.r2,
                        counts: e.counts.clone(),
                    })
                    .collect(),
            };
            formats::write_atomic(&json, formats::to_json(&report)?.as_bytes())?;
            Ok(Outcome {
                summary: format!(
                    "marstrand {ifs}: within={within}/{} of {target:.4} out={}",
                    rows.len(),
                    out.display()
                ),
                files: vec![out, json],
            })
        }
        Command::Coarea { kind, size, alpha, slices } => {
            let f = setgen::primitive_sampler(*kind, *size)?;
            let b = f.bounds();
            let slab = (b.min[0], b.max[0]);
            let rows = cfg
                .ladder
                .deltas()
                .iter()
                .map(|&d| parallel::coarea(&f, *alpha, d, slab, *slices, &params))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let (lo, hi) = rows
                .iter()
                .map(|r| r.ratio())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r), b.max(r)));
            let json = formats::sibling(&out, "json");
            formats::write_atomic(&out, formats::coarea_csv(&rows).as_bytes())?;
            formats::write_atomic(&json, formats::to_json(&rows)?.as_bytes())?;
            Ok(Outcome {
                summary: format!(
                    "coarea {} alpha={alpha}: ratio in [{lo:.3}, {hi:.3}] out={}",
                    f.label(),
                    out.display()
                ),
                files: vec![out, json],
            })
        }
        Command::Pipeline { family, c_grid } => {
            let fam = match family {
                FamilySource::Load(src) => formats::load_family(src)?,
                FamilySource::Build { m, placement } => {
                    setgen::kakeya_union_builder(*m, *placement, cfg.seed).context("kakeya_union_builder")?
                }
            };
            let report = parallel::pipeline(&fam, *c_grid, &cfg.ladder, &params)?;
            let csv = formats::sibling(&out, "csv");
            formats::write_atomic(&out, formats::to_json(&report)?.as_bytes())?;
            formats::write_atomic(&csv, pipeline_csv(&report).as_bytes())?;
            Ok(Outcome {
                summary: format!(
                    "pipeline {}: final_bound={:.4} crossing_ratio={:.3} c0={:.4} out={}",
                    report.label,
                    report.final_bound,
                    report.crossing_ratio,
                    report.c0,
                    out.display()
                ),
                files: vec![out, csv],
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct DimRow {
    param: f64,
    slope: f64,
    r2: f64,
    counts: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
struct MarstrandReport {
    ifs: String,
    predicted: f64,
    within_0_15: usize,
    seed: u64,
    deltas: Vec<f64>,
    stop_k: usize,
    rows: Vec<DimRow>,
}

/// Parses, runs and prints; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_config(args) {
        Ok(c) => c,
        Err(ParseFailure::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
        Err(ParseFailure::Config(e)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = parallel::threads_from_env() {
        eprintln!("error: {e:#}");
        return EXIT_CONFIG;
    }
    match execute(&cfg) {
        Ok(o) => {
            println!("{}", o.summary);
            0
        }
        Err(e) => {
            eprintln!("error: {}: {e:#}", cfg.command.name());
            EXIT_RUNTIME
        }
    }
}
