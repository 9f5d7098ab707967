//! Command dispatch. Each command writes its CSVs and `manifest.txt` into
//! the output directory.

use std::path::{Path, PathBuf};

use fxpca::bounds::total_deviation_bound;
use fxpca::cov::{empirical_extreme_cov, full_sample_cov, leading_subspace, leading_subspace_of};
use fxpca::diagnostics::{default_test_functions, hill_plot, moment_stability, pareto_qq, TEST_FUNCTION_FREQUENCIES};
use fxpca::experiments::{reconstruction_cv, scree_comparison, CvConfig, CvVariant};
use fxpca::polar::sqrt_transform;
use fxpca::sim::{
    sample_mixture, sample_multiplicative, sample_spiked, tail_mass_beyond, MixtureModel, MixtureWeights,
    MultiplicativeModel, Seed, SpikedProcessModel,
};
use fxpca::{polar_decompose, rho_distance, FunctionalSample, Subspace};

use crate::config::{Command, ModelKind, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{ingest_csv, write_csv, write_manifest, write_sample, Cell};
use crate::svg;

struct Simulated {
    sample: FunctionalSample,
    labels: Option<(Vec<&'static str>, Vec<Vec<Cell>>)>,
}

fn simulate(cfg: &RunConfig, model: ModelKind) -> Result<Simulated> {
    let seed = Seed::from(cfg.seed);
    match model {
        ModelKind::SixFactor => {
            let m = MultiplicativeModel::six_factor(cfg.d)?;
            Ok(Simulated {
                sample: sample_multiplicative(&m, cfg.n, seed)?,
                labels: None,
            })
        }
        ModelKind::Example3 | ModelKind::Counterexample => {
            let weights = if model == ModelKind::Example3 {
                MixtureWeights::InverseSquare
            } else {
                MixtureWeights::Harmonic
            };
            let m = MixtureModel::new(cfg.alpha, weights, cfg.d - 1)?;
            let s = sample_mixture(&m, cfg.n, seed)?;
            let rows = (0..cfg.n)
                .map(|i| {
                    vec![
                        Cell::from(i + 1),
                        Cell::Int(s.indices[i]),
                        Cell::from(s.overflow[i] as usize),
                        Cell::from(s.radii[i]),
                    ]
                })
                .collect();
            Ok(Simulated {
                sample: s.sample,
                labels: Some((vec!["row", "index", "overflow", "radius"], rows)),
            })
        }
        ModelKind::Spiked => {
            let m = SpikedProcessModel::new(cfg.alpha_z, cfg.alpha_rho, cfg.d)?;
            let s = sample_spiked(&m, cfg.n, seed)?;
            let rows = (0..cfg.n)
                .map(|i| {
                    vec![
                        Cell::from(i + 1),
                        Cell::from(s.z[i]),
                        Cell::from(s.rho[i]),
                        Cell::from(s.sup_norm[i]),
                        Cell::from(s.l2_norm[i]),
                        Cell::from(s.support_points[i]),
                    ]
                })
                .collect();
            Ok(Simulated {
                sample: s.sample,
                labels: Some((vec!["row", "z", "rho", "sup_norm", "l2_norm", "support_points"], rows)),
            })
        }
    }
}

fn has_data(cfg: &RunConfig) -> bool {
    cfg.input.is_some() || cfg.model.is_some()
}

/// The sample a data command works on: the input file (square-rooted if
/// asked, with the configured grid weight) or a simulated sample.
pub fn load_sample(cfg: &RunConfig) -> Result<FunctionalSample> {
    if let Some(path) = &cfg.input {
        let mut x = ingest_csv(path, cfg.has_header, cfg.transpose)?;
        if cfg.sqrt_transform {
            x = sqrt_transform(&x)?;
        }
        return Ok(x.with_grid_weight(cfg.grid_weight)?);
    }
    match cfg.model {
        Some(model) => Ok(simulate(cfg, model)?.sample),
        None => Err(CliError::Usage("no data: pass --input or --model".into())),
    }
}

fn k_range(cfg: &RunConfig, default_min: usize) -> (usize, usize) {
    let k_max = cfg.k_max.unwrap_or(cfg.k);
    let k_min = cfg.k_min.unwrap_or(default_min.min(k_max));
    (k_min, k_max)
}

struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
        let path = self.dir.join(name);
        write_csv(&path, header, rows)?;
        self.written.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }
}

/// Runs one command and returns the files it wrote.
pub fn run_command(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.out.display())))?;
    let mut out = Output {
        dir: cfg.out.clone(),
        written: Vec::new(),
    };
    match cfg.command {
        Command::Simulate => cmd_simulate(cfg, &mut out)?,
        Command::Hill => cmd_hill(cfg, &mut out)?,
        Command::ParetoQq => cmd_pareto_qq(cfg, &mut out)?,
        Command::Moments => cmd_moments(cfg, &mut out)?,
        Command::Pca => cmd_pca(cfg, &mut out)?,
        Command::Scree => cmd_scree(cfg, &mut out)?,
        Command::Bounds => cmd_bounds(cfg, &mut out)?,
        Command::Recovery => cmd_recovery(cfg, &mut out)?,
        Command::ReconstructCv => cmd_reconstruct_cv(cfg, &mut out)?,
        Command::TailMass => cmd_tail_mass(cfg, &mut out)?,
    }
    let mut settings = cfg.settings.clone();
    settings.insert("command".into(), cfg.command.name().into());
    settings.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    let manifest = out.dir.join("manifest.txt");
    write_manifest(&manifest, &settings)?;
    out.written.push(manifest);
    Ok(out.written)
}

fn cmd_simulate(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let model = cfg
        .model
        .ok_or_else(|| CliError::Usage("simulate needs --model".into()))?;
    let sim = simulate(cfg, model)?;
    let path = out.dir.join("sample.csv");
    write_sample(&path, &sim.sample)?;
    out.written.push(path);
    if let Some((header, rows)) = sim.labels {
        out.csv("labels.csv", &header, &rows)?;
    }
    Ok(())
}

fn cmd_hill(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let x = load_sample(cfg)?;
    let (k_min, k_max) = k_range(cfg, cfg.k);
    let series = hill_plot(&x.norms(), k_min, k_max, cfg.ci_level)?;
    let rows: Vec<Vec<Cell>> = series
        .iter()
        .map(|h| vec![h.k.into(), h.alpha_hat.into(), h.alpha_ci.0.into(), h.alpha_ci.1.into()])
        .collect();
    out.csv("hill.csv", &["k", "value", "ci_low", "ci_high"], &rows)?;
    if cfg.svg {
        let pts = |f: fn(&fxpca::diagnostics::HillResult) -> f64| series.iter().map(|h| (h.k as f64, f(h))).collect();
        let plot = svg::line_plot(
            "Hill plot",
            &[
                ("alpha".into(), pts(|h| h.alpha_hat)),
                ("ci_low".into(), pts(|h| h.alpha_ci.0)),
                ("ci_high".into(), pts(|h| h.alpha_ci.1)),
            ],
        );
        out.text("hill.svg", &plot)?;
    }
    Ok(())
}

fn cmd_pareto_qq(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let x = load_sample(cfg)?;
    let qq = pareto_qq(&x.norms(), cfg.k)?;
    let rows: Vec<Vec<Cell>> = qq
        .points
        .iter()
        .enumerate()
        .map(|(i, &(t, v))| vec![(i + 1).into(), t.into(), v.into()])
        .collect();
    out.csv("qq.csv", &["k", "theoretical", "value"], &rows)?;
    out.csv(
        "qq_fit.csv",
        &["slope", "intercept", "degenerate"],
        &[vec![qq.slope.into(), qq.intercept.into(), (qq.degenerate as usize).into()]],
    )?;
    if cfg.svg {
        let plot = svg::line_plot("Pareto quantile plot", &[("log radius".into(), qq.points.clone())]);
        out.text("qq.svg", &plot)?;
    }
    Ok(())
}

fn cmd_moments(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let x = load_sample(cfg)?;
    let p = polar_decompose(&x);
    let (k_min, k_max) = k_range(cfg, 1);
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (h, j) in default_test_functions(x.d())?.iter().zip(TEST_FUNCTION_FREQUENCIES) {
        let s = moment_stability(&p, h, k_min, k_max)?;
        rows.extend(s.iter().map(|&(k, v)| vec![(j as usize).into(), k.into(), v.into()]));
        series.push((format!("h{j}"), s.iter().map(|&(k, v)| (k as f64, v)).collect()));
    }
    out.csv("moments.csv", &["frequency", "k", "value"], &rows)?;
    if cfg.svg {
        out.text("moments.svg", &svg::line_plot("First moment of |<angle, h_j>|", &series))?;
    }
    Ok(())
}

fn cmd_pca(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let x = load_sample(cfg)?;
    let p = polar_decompose(&x);
    let c = empirical_extreme_cov(&p, cfg.k)?;
    let lead = leading_subspace(&c, cfg.p)?;
    let total: f64 = lead.eigenvalues.iter().sum();
    let rows: Vec<Vec<Cell>> = lead
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| vec![(i + 1).into(), l.into(), (l / total).into()])
        .collect();
    out.csv("eigenvalues.csv", &["index", "eigenvalue", "share"], &rows)?;
    // coefficient vectors back to curves of unit L2 norm
    let scale = 1.0 / x.grid_weight().sqrt();
    let basis = lead.subspace.basis_vectors();
    let header: Vec<String> = std::iter::once("grid".to_string())
        .chain((1..=cfg.p).map(|j| format!("ef{j}")))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<Cell>> = (0..x.d())
        .map(|i| {
            std::iter::once(Cell::from(i + 1))
                .chain(basis.iter().map(|b| Cell::from(b[i] * scale)))
                .collect()
        })
        .collect();
    out.csv("eigenfunctions.csv", &header, &rows)?;
    out.csv(
        "pca_summary.csv",
        &["k", "p", "threshold", "eigen_gap", "degenerate"],
        &[vec![
            cfg.k.into(),
            cfg.p.into(),
            c.threshold.into(),
            lead.eigen_gap.into(),
            (lead.degenerate as usize).into(),
        ]],
    )?;
    if cfg.svg {
        let series: Vec<(String, Vec<(f64, f64)>)> = basis
            .iter()
            .enumerate()
            .map(|(j, b)| (format!("ef{}", j + 1), b.iter().enumerate().map(|(i, v)| ((i + 1) as f64, v * scale)).collect()))
            .collect();
        out.text("eigenfunctions.svg", &svg::line_plot("Extreme eigenfunctions", &series))?;
    }
    Ok(())
}

fn cmd_scree(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let x = load_sample(cfg)?;
    let s = scree_comparison(&polar_decompose(&x), cfg.k)?;
    let rows: Vec<Vec<Cell>> = s
        .extreme
        .iter()
        .zip(&s.full)
        .enumerate()
        .map(|(i, (&e, &f))| vec![(i + 1).into(), e.into(), f.into()])
        .collect();
    out.csv("scree.csv", &["index", "extreme", "full"], &rows)?;
    if cfg.svg {
        let pts = |v: &[f64]| v.iter().enumerate().map(|(i, &y)| ((i + 1) as f64, y)).collect();
        let plot = svg::line_plot("Scree", &[("extreme".into(), pts(&s.extreme)), ("full".into(), pts(&s.full))]);
        out.text("scree.svg", &plot)?;
    }
    Ok(())
}

fn cmd_bounds(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let (n, gap) = if has_data(cfg) {
        let x = load_sample(cfg)?;
        let c = empirical_extreme_cov(&polar_decompose(&x), cfg.k)?;
        (x.n(), Some(leading_subspace_of(&c.operator, cfg.p)?.eigen_gap))
    } else {
        (cfg.n, cfg.gap)
    };
    let mut report = total_deviation_bound(n, cfg.k, cfg.delta)?;
    if let Some(g) = gap {
        report = report.with_gap(g)?;
    }
    out.csv(
        "bounds.csv",
        &["n", "k", "delta", "b_sampling", "b_threshold", "b_total", "eigen_gap", "rho_bound"],
        &[vec![
            report.n.into(),
            report.k.into(),
            report.delta.into(),
            report.sampling.into(),
            report.threshold.into(),
            report.total.into(),
            report.eigen_gap.into(),
            report.rho_bound.into(),
        ]],
    )
}

fn read_target(path: &Path, d: usize) -> Result<Subspace> {
    let t = ingest_csv(path, false, false)?;
    if t.d() != d {
        return Err(CliError::Data(format!("target curves have {} grid points, data has {d}", t.d())));
    }
    let rows: Vec<Vec<f64>> = t.rows().map(<[f64]>::to_vec).collect();
    Ok(Subspace::from_spanning(&rows)?)
}

fn cmd_recovery(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let x = load_sample(cfg)?;
    let target = match (&cfg.target, cfg.model) {
        (Some(path), _) => read_target(path, x.d())?,
        (None, Some(ModelKind::SixFactor)) if cfg.input.is_none() => {
            Subspace::from_spanning(&MultiplicativeModel::six_factor(cfg.d)?.limit_support())?
        }
        _ => {
            return Err(CliError::Usage(
                "recovery needs --target or the six-factor model, whose limit subspace is known".into(),
            ))
        }
    };
    let p = polar_decompose(&x);
    let extreme = leading_subspace(&empirical_extreme_cov(&p, cfg.k)?, cfg.p)?;
    let full = leading_subspace(&full_sample_cov(&p)?, cfg.p)?;
    out.csv(
        "recovery.csv",
        &["estimator", "rho"],
        &[
            vec!["extreme".into(), rho_distance(&extreme.subspace, &target)?.into()],
            vec!["full".into(), rho_distance(&full.subspace, &target)?.into()],
        ],
    )
}

fn cmd_reconstruct_cv(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let x = load_sample(cfg)?;
    let cv = CvConfig {
        k: cfg.k,
        p: cfg.p,
        v: cfg.v,
        reps: cfg.reps,
        mode: cfg.mode,
        seed: cfg.seed,
    };
    let res = reconstruction_cv(&polar_decompose(&x), &cv)?;
    let mut rows = Vec::new();
    for (r, errs) in res.replication_errors.iter().enumerate() {
        for (variant, &e) in CvVariant::ALL.iter().zip(errs) {
            rows.push(vec![(r + 1).into(), variant.name().into(), e.into()]);
        }
    }
    out.csv("cv.csv", &["replication", "variant", "error"], &rows)?;
    let summary_rows: Vec<Vec<Cell>> = CvVariant::ALL
        .iter()
        .map(|&v| {
            let s = res.summary(v);
            vec![
                v.name().into(),
                s.min.into(),
                s.q1.into(),
                s.median.into(),
                s.q3.into(),
                s.max.into(),
                s.mean.into(),
            ]
        })
        .collect();
    out.csv("cv_summary.csv", &["variant", "min", "q1", "median", "q3", "max", "mean"], &summary_rows)?;
    if cfg.svg {
        let boxes: Vec<(String, _)> = CvVariant::ALL.iter().map(|&v| (v.name().to_string(), *res.summary(v))).collect();
        out.text("cv.svg", &svg::box_plot("Validation reconstruction error", &boxes))?;
    }
    Ok(())
}

fn cmd_tail_mass(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let x = load_sample(cfg)?;
    let p = polar_decompose(&x);
    let (k_min, k_max) = k_range(cfg, cfg.k);
    let rows: Vec<Vec<Cell>> = (k_min..=k_max)
        .map(|k| Ok(vec![k.into(), tail_mass_beyond(&p, cfg.d_cut, k)?.into()]))
        .collect::<Result<_>>()?;
    out.csv("tail_mass.csv", &["k", "value"], &rows)?;
    if cfg.svg {
        let pts = rows
            .iter()
            .map(|r| match (&r[0], &r[1]) {
                (Cell::Int(k), Cell::Float(v)) => (*k as f64, *v),
                _ => unreachable!("rows are (k, value)"),
            })
            .collect();
        out.text("tail_mass.svg", &svg::line_plot("Angular mass beyond d_cut", &[("value".into(), pts)]))?;
    }
    Ok(())
}
