//! Run configuration: defaults, then `FXPCA_SEED`, then an optional
//! `key=value` config file, then command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use fxpca::experiments::CvMode;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Hill,
    ParetoQq,
    Moments,
    Pca,
    Scree,
    Bounds,
    Recovery,
    ReconstructCv,
    TailMass,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Simulate,
        Command::Hill,
        Command::ParetoQq,
        Command::Moments,
        Command::Pca,
        Command::Scree,
        Command::Bounds,
        Command::Recovery,
        Command::ReconstructCv,
        Command::TailMass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Hill => "hill",
            Command::ParetoQq => "pareto-qq",
            Command::Moments => "moments",
            Command::Pca => "pca",
            Command::Scree => "scree",
            Command::Bounds => "bounds",
            Command::Recovery => "recovery",
            Command::ReconstructCv => "reconstruct-cv",
            Command::TailMass => "tail-mass",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
                CliError::Usage(format!("unknown command '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Simulation models selectable with `--model`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Six-factor multiplicative model.
    SixFactor,
    /// Inverse-square mixture.
    Example3,
    /// Harmonic mixture, not regularly varying.
    Counterexample,
    Spiked,
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "six-factor" | "example1" => Ok(ModelKind::SixFactor),
            "example3" => Ok(ModelKind::Example3),
            "counterexample" => Ok(ModelKind::Counterexample),
            "spiked" => Ok(ModelKind::Spiked),
            _ => Err("expected six-factor, example1, example3, counterexample or spiked".into()),
        }
    }
}

/// Command-line flags. Every setting is also accepted as `key=value` in
/// the file given by `--config`, with the flag name as key.
#[derive(Debug, Parser, Default)]
#[command(name = "fxpca", version, about = "PCA of extreme functional data")]
pub struct Args {
    /// simulate | hill | pareto-qq | moments | pca | scree | bounds | recovery | reconstruct-cv | tail-mass
    pub command: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV file with one curve per row.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub has_header: Option<String>,
    /// Input stores one curve per column.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub transpose: Option<String>,
    /// Take the entrywise square root of the input.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub sqrt: Option<String>,
    #[arg(long)]
    pub grid_weight: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// six-factor (alias example1) | example3 | counterexample | spiked
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub alpha_z: Option<String>,
    #[arg(long)]
    pub alpha_rho: Option<String>,
    /// Grid size of simulated curves.
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub k_min: Option<String>,
    #[arg(long)]
    pub k_max: Option<String>,
    #[arg(long)]
    pub ci_level: Option<String>,
    /// Validation set size.
    #[arg(long)]
    pub v: Option<String>,
    #[arg(long)]
    pub reps: Option<String>,
    /// random | tail
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub d_cut: Option<String>,
    /// Eigen gap for `bounds` when no data is given.
    #[arg(long)]
    pub gap: Option<String>,
    /// CSV of curves spanning the target subspace for `recovery`.
    #[arg(long)]
    pub target: Option<String>,
    /// Also write an SVG rendering of the main series.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub svg: Option<String>,
}

impl Args {
    fn flag_settings(&self) -> Vec<(&'static str, Option<&String>)> {
        vec![
            ("input", self.input.as_ref()),
            ("has-header", self.has_header.as_ref()),
            ("transpose", self.transpose.as_ref()),
            ("sqrt", self.sqrt.as_ref()),
            ("grid-weight", self.grid_weight.as_ref()),
            ("k", self.k.as_ref()),
            ("p", self.p.as_ref()),
            ("delta", self.delta.as_ref()),
            ("seed", self.seed.as_ref()),
            ("out", self.out.as_ref()),
            ("n", self.n.as_ref()),
            ("model", self.model.as_ref()),
            ("alpha", self.alpha.as_ref()),
            ("alpha-z", self.alpha_z.as_ref()),
            ("alpha-rho", self.alpha_rho.as_ref()),
            ("d", self.d.as_ref()),
            ("k-min", self.k_min.as_ref()),
            ("k-max", self.k_max.as_ref()),
            ("ci-level", self.ci_level.as_ref()),
            ("v", self.v.as_ref()),
            ("reps", self.reps.as_ref()),
            ("mode", self.mode.as_ref()),
            ("d-cut", self.d_cut.as_ref()),
            ("gap", self.gap.as_ref()),
            ("target", self.target.as_ref()),
            ("svg", self.svg.as_ref()),
        ]
    }
}

const DEFAULTS: &[(&str, &str)] = &[
    ("has-header", "false"),
    ("transpose", "false"),
    ("sqrt", "false"),
    ("grid-weight", "1"),
    ("k", "100"),
    ("p", "2"),
    ("delta", "0.1"),
    ("seed", "0"),
    ("out", "."),
    ("n", "10000"),
    ("alpha", "1"),
    ("alpha-z", "10"),
    ("alpha-rho", "2"),
    ("d", "48"),
    ("ci-level", "0.95"),
    ("v", "30"),
    ("reps", "300"),
    ("mode", "random"),
    ("d-cut", "20"),
    ("svg", "false"),
];

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub has_header: bool,
    pub transpose: bool,
    pub sqrt_transform: bool,
    pub grid_weight: f64,
    pub k: usize,
    pub p: usize,
    pub delta: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub n: usize,
    pub model: Option<ModelKind>,
    pub alpha: f64,
    pub alpha_z: f64,
    pub alpha_rho: f64,
    pub d: usize,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub ci_level: f64,
    pub v: usize,
    pub reps: usize,
    pub mode: CvMode,
    pub d_cut: usize,
    pub gap: Option<f64>,
    pub target: Option<PathBuf>,
    pub svg: bool,
    /// Every effective setting as text, for the run manifest.
    pub settings: BTreeMap<String, String>,
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let known: Vec<&str> = Args::default().flag_settings().into_iter().map(|(k, _)| k).collect();
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", no + 1)))?;
        let key = key.trim().replace('_', "-");
        if !known.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key '{key}'", no + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

struct Settings(BTreeMap<String, String>);

impl Settings {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("invalid value '{v}' for {key}: {e}"))),
        }
    }

    fn req<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| CliError::Usage(format!("missing setting {key}")))
    }

    fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) if v.is_empty() => Err(CliError::Usage(format!("{key} must be a nonempty path"))),
            Some(v) => Ok(Some(PathBuf::from(v))),
        }
    }
}

fn check(ok: bool, key: &str, domain: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{key} must be {domain}")))
    }
}

/// Merges defaults, the `FXPCA_SEED` value, the config file and flags.
pub fn resolve(args: &Args, env_seed: Option<String>, config_text: Option<&str>) -> Result<RunConfig> {
    let command: Command = args.command.parse()?;
    let mut map: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    if let Some(seed) = env_seed {
        map.insert("seed".into(), seed);
    }
    if let Some(text) = config_text {
        for (k, v) in parse_config_file(text)? {
            map.insert(k, v);
        }
    }
    for (k, v) in args.flag_settings() {
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
    let s = Settings(map);
    let mode = match s.req::<String>("mode")?.as_str() {
        "random" => CvMode::RandomCv,
        "tail" => CvMode::TailHoldout,
        other => return Err(CliError::Usage(format!("invalid value '{other}' for mode: expected random or tail"))),
    };
    let cfg = RunConfig {
        command,
        input: s.path("input")?,
        has_header: s.req("has-header")?,
        transpose: s.req("transpose")?,
        sqrt_transform: s.req("sqrt")?,
        grid_weight: s.req("grid-weight")?,
        k: s.req("k")?,
        p: s.req("p")?,
        delta: s.req("delta")?,
        seed: s.req("seed")?,
        out: s.path("out")?.expect("defaulted"),
        n: s.req("n")?,
        model: s.get("model")?,
        alpha: s.req("alpha")?,
        alpha_z: s.req("alpha-z")?,
        alpha_rho: s.req("alpha-rho")?,
        d: s.req("d")?,
        k_min: s.get("k-min")?,
        k_max: s.get("k-max")?,
        ci_level: s.req("ci-level")?,
        v: s.req("v")?,
        reps: s.req("reps")?,
        mode,
        d_cut: s.req("d-cut")?,
        gap: s.get("gap")?,
        target: s.path("target")?,
        svg: s.req("svg")?,
        settings: s.0.clone(),
    };
    check(cfg.grid_weight > 0.0 && cfg.grid_weight.is_finite(), "grid-weight", "positive")?;
    check(cfg.k >= 1, "k", "at least 1")?;
    check(cfg.p >= 1, "p", "at least 1")?;
    check(cfg.delta > 0.0 && cfg.delta < 1.0, "delta", "in (0, 1)")?;
    check(cfg.n >= 1, "n", "at least 1")?;
    check(cfg.alpha > 0.0 && cfg.alpha.is_finite(), "alpha", "positive")?;
    check(cfg.d >= 2, "d", "at least 2")?;
    check(cfg.ci_level > 0.0 && cfg.ci_level < 1.0, "ci-level", "in (0, 1)")?;
    check(cfg.reps >= 1, "reps", "at least 1")?;
    check(cfg.d_cut >= 1, "d-cut", "at least 1")?;
    if let (Some(a), Some(b)) = (cfg.k_min, cfg.k_max) {
        check(1 <= a && a <= b, "k-min", "between 1 and k-max")?;
    }
    Ok(cfg)
}

/// Parses process arguments into a config, reading `--config` and
/// `FXPCA_SEED`.
pub fn from_args<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => e.exit(),
        _ => CliError::Usage(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or_default()),
    })?;
    let text = match &args.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?,
        ),
        None => None,
    };
    resolve(&args, std::env::var("FXPCA_SEED").ok(), text.as_deref())
}
