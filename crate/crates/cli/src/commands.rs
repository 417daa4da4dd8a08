//! Subcommand implementations.

use std::fs;
use std::path::Path;

use kteach::datasets::{generate, load_csv, save_teaching_set_csv, Dataset};
use kteach::eval::{
    ball_probes, default_band, direction_similarity, grid_probes, pointwise_gap, risk_gap, sign_agreement, RiskReport,
};
use kteach::pipeline::{self, PipelineConfig, StageError, SweepConfig};
use kteach::teacher::{
    counterexample_target, linear_teaching_set, polynomial_teaching_set, AssumptionReport, GaussianTeachConfig,
    SearchConfig,
};
use kteach::{fit, training_loss, DualModel, Hypothesis, KernelSpec, LearnerConfig, Model, PrimalModel, TeachingSet};
use rand::Rng;
use serde::Serialize;

use crate::{DataArgs, DemoLinear, DemoPoly, Eval, Sweep, TeachArgs, TeachGaussian};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Pipeline(String),
    #[error("{0}")]
    Acceptance(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Acceptance(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Pipeline(_) => 3,
        }
    }
}

impl From<kteach::Error> for CliError {
    fn from(e: kteach::Error) -> Self {
        CliError::Pipeline(e.to_string())
    }
}

impl From<StageError> for CliError {
    fn from(e: StageError) -> Self {
        CliError::Pipeline(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Pipeline(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Pipeline(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| usage(format!("{t:?} is not a finite number")))
        })
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn print_set(ts: &TeachingSet) {
    for it in &ts.items {
        let x: Vec<String> = it.x.iter().map(|v| format!("{v:.6}")).collect();
        println!("  ({}) {:+} {}", x.join(", "), it.y.as_i8(), it.tag.as_str());
    }
}

#[derive(Serialize)]
struct LinearReport<'a> {
    theta: &'a [f64],
    teaching_set: &'a TeachingSet,
    learned: &'a [f64],
    cosine: f64,
    training_loss: f64,
}

pub fn demo_linear(args: &DemoLinear, seed: u64) -> Result<()> {
    let theta = match (&args.theta, args.dim) {
        (Some(t), _) => parse_vector(t)?,
        (None, Some(0)) => return Err(usage("--dim must be positive")),
        (None, Some(d)) => {
            let mut g = kteach::rng::rng(seed);
            (0..d).map(|_| g.random_range(-5.0..5.0)).collect()
        }
        (None, None) => vec![-3.0, 3.0, 5.0],
    };
    if theta.iter().all(|v| *v == 0.0) {
        return Err(usage("target must be nonzero"));
    }
    let ts = linear_teaching_set(&theta)?;
    let cfg = LearnerConfig {
        seed,
        loss_tol: 1e-12,
        ..LearnerConfig::default()
    };
    let f = fit(&ts, KernelSpec::Linear, &cfg)?;
    let learned = f.model.to_primal()?;
    let target = PrimalModel::new(KernelSpec::Linear, theta.len(), theta.clone())?;
    let cosine = direction_similarity(&Model::from(learned.clone()), &Model::from(target))?;
    let loss = training_loss(&f.model, &ts)?;

    println!("target θ* = {theta:?}");
    println!("teaching set ({} points):", ts.len());
    print_set(&ts);
    println!("cosine similarity {cosine:.12}");
    println!("training loss {loss:.3e}");
    if let Some(out) = &args.out {
        write_json(
            out,
            &LinearReport {
                theta: &theta,
                teaching_set: &ts,
                learned: learned.coords(),
                cosine,
                training_loss: loss,
            },
        )?;
    }
    if cosine < 1.0 - 1e-6 {
        return Err(CliError::Acceptance(format!("cosine {cosine} below 1 - 1e-6")));
    }
    Ok(())
}

#[derive(Serialize)]
struct PolyReport<'a> {
    theta: &'a [f64],
    teaching_set: &'a TeachingSet,
    assumptions: &'a AssumptionReport,
    learned: &'a [f64],
    cosine: f64,
    sign_agreement: f64,
    probes: usize,
}

pub fn demo_poly(args: &DemoPoly, seed: u64) -> Result<()> {
    if args.dim == 0 || args.k == 0 {
        return Err(usage("--dim and --k must be positive"));
    }
    let spec = KernelSpec::Polynomial { degree: args.k };
    let theta = if args.theta == "counterexample" {
        counterexample_target(args.dim, args.k)?
    } else {
        PrimalModel::new(spec, args.dim, parse_vector(&args.theta)?).map_err(|e| usage(e.to_string()))?
    };
    if theta.norm() == 0.0 {
        return Err(usage("target must be nonzero"));
    }
    let (ts, report) = match polynomial_teaching_set(&theta, seed, &SearchConfig::default()) {
        Ok(v) => v,
        Err(e @ kteach::Error::BoundarySearch { .. }) => {
            return Err(CliError::Pipeline(format!(
                "assumption 1 fails for this target: {e}; the zero set has too few real points to pin down the boundary"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let f = fit(&ts, spec, &LearnerConfig { seed, ..LearnerConfig::default() })?;
    let learned = f.model.to_primal()?;
    let cosine = direction_similarity(&Model::from(learned.clone()), &Model::from(theta.clone()))?;
    let probes = if args.dim == 2 {
        grid_probes(-1.0, 1.0, 100)
    } else {
        ball_probes(args.dim, 1.0, 10_000, seed)
    };
    let values: Vec<f64> = probes.iter().map(|x| theta.decision_value(x)).collect::<kteach::Result<_>>()?;
    let agreement = sign_agreement(&theta, &learned, &probes, default_band(&values))?;

    println!("target θ̃ = {:?} (d={}, k={})", theta.coords(), args.dim, args.k);
    println!("teaching set ({} points, rank {} of {}):", ts.len(), report.achieved_rank, report.requested_rank);
    print_set(&ts);
    println!("feature-space cosine {cosine:.10}");
    println!("sign agreement {agreement} on {} probes", probes.len());
    if let Some(out) = &args.out {
        write_json(
            out,
            &PolyReport {
                theta: theta.coords(),
                teaching_set: &ts,
                assumptions: &report,
                learned: learned.coords(),
                cosine,
                sign_agreement: agreement,
                probes: probes.len(),
            },
        )?;
    }
    if cosine < 1.0 - 1e-4 || agreement < 1.0 {
        return Err(CliError::Acceptance(format!("cosine {cosine}, sign agreement {agreement}")));
    }
    Ok(())
}

fn load_data(args: &DataArgs, seed: u64) -> Result<Dataset> {
    match (&args.dataset, args.kind) {
        (Some(path), _) => {
            if !path.is_file() {
                return Err(usage(format!("dataset {} does not exist", path.display())));
            }
            Ok(load_csv(path)?)
        }
        (None, Some(kind)) => generate(kind, args.n, args.noise, seed).map_err(|e| usage(e.to_string())),
        (None, None) => Err(usage("one of --dataset or --kind is required")),
    }
}

fn pipeline_config(args: &TeachArgs) -> Result<PipelineConfig> {
    if !(args.sigma > 0.0 && args.sigma.is_finite()) {
        return Err(usage("--sigma must be positive"));
    }
    let epsilon = args.epsilon.unwrap_or(0.1);
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(usage("--epsilon must lie in (0, 1)"));
    }
    if args.s == Some(0) {
        return Err(usage("--s must be positive"));
    }
    if !(args.ball_factor > 0.0 && args.anchor_q > 0.0) {
        return Err(usage("--ball-factor and --anchor-q must be positive"));
    }
    Ok(PipelineConfig {
        sigma: args.sigma,
        teach: GaussianTeachConfig {
            epsilon,
            order: args.s,
            convention: args.r_convention.into(),
            ball_factor: args.ball_factor,
            anchor_q: args.anchor_q,
            ..GaussianTeachConfig::default()
        },
        ..PipelineConfig::default()
    })
}

#[derive(Serialize)]
struct RunConfig<'a> {
    dataset: &'a str,
    n: usize,
    seed: u64,
    pipeline: &'a PipelineConfig,
    approx: &'a kteach::ApproxConfig,
}

#[derive(Serialize)]
struct LearnedSummary {
    loss: f64,
    iterations: usize,
    converged: bool,
    coefficient_l1: f64,
}

pub fn teach_gaussian(args: &TeachGaussian, seed: u64) -> Result<()> {
    let data = load_data(&args.data, seed)?;
    let cfg = pipeline_config(&args.teach)?;
    let o = pipeline::teach_gaussian(&data, &cfg, seed)?;
    let approx = &o.teaching.config;
    let cert_loss = training_loss(&o.certificate.model, &o.teaching.set)?;

    println!("dataset {} ({} points), σ = {}", data.name, data.len(), cfg.sigma);
    match args.teach.s {
        Some(s) => println!("truncation order s = {s} (given)"),
        None => println!("truncation order s = {} (chosen for ε = {})", approx.order, approx.epsilon),
    }
    println!("feature dimension r = {}, teaching set size {}", approx.feature_dim(), o.teaching.set.len());
    println!("reference risk {:.6} (converged: {})", o.reference.err_star, o.reference.converged);
    println!("certificate loss {cert_loss:.3e}, solve residual {:.3e}", o.certificate.solve.residual);
    println!("learner loss {:.3e} (converged: {})", o.learned.loss, o.learned.converged);
    println!("risk gap {:.6}, pointwise gap {:.6}", o.risk.gap, o.pointwise_gap);
    let rep = &o.teaching.report;
    println!(
        "assumptions: rank {}/{} ({}), coherence {:.3} vs {:.4} ({}), anchor ({})",
        rep.achieved_rank,
        rep.requested_rank,
        ok(rep.assumption1_ok),
        rep.max_coherence,
        rep.coherence_bound,
        ok(rep.smoothness_ok),
        ok(rep.anchor_ok)
    );

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        save_teaching_set_csv(&o.teaching.set, dir.join("teaching_set.csv"))?;
        o.reference.model.save(dir.join("reference.json"))?;
        o.certificate.model.save(dir.join("certificate.json"))?;
        o.learned.model.save(dir.join("learned.json"))?;
        write_json(&dir.join("risk.json"), &o.risk)?;
        write_json(&dir.join("assumptions.json"), rep)?;
        write_json(
            &dir.join("learned_summary.json"),
            &LearnedSummary {
                loss: o.learned.loss,
                iterations: o.learned.iterations,
                converged: o.learned.converged,
                coefficient_l1: o.learned.model.coefficient_l1(),
            },
        )?;
        write_json(
            &dir.join("config.json"),
            &RunConfig {
                dataset: &data.name,
                n: data.len(),
                seed,
                pipeline: &cfg,
                approx,
            },
        )?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "violated"
    }
}

pub fn sweep(args: &Sweep, seed: u64) -> Result<()> {
    if args.s_min == 0 || args.s_min > args.s_max {
        return Err(usage("need 1 <= --s-min <= --s-max"));
    }
    if args.trials == 0 || args.restarts == 0 {
        return Err(usage("--trials and --restarts must be positive"));
    }
    let data = load_data(&args.data, seed)?;
    let cfg = pipeline_config(&args.teach)?;
    let sc = SweepConfig {
        s_min: args.s_min,
        s_max: args.s_max,
        sets: args.trials,
        restarts: args.restarts,
    };
    let res = pipeline::sweep(&data, &cfg, &sc, seed)?;
    for f in &res.failures {
        eprintln!("s = {}: no successful trial ({})", f.s, f.reason);
    }
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("sweep.csv"), res.to_csv())?;
            write_json(&dir.join("sweep.json"), &res)?;
            println!("{} rows written to {}", res.rows.len(), dir.display());
        }
        None => print!("{}", res.to_csv()),
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    risk: RiskReport,
    pointwise_gap: f64,
    probe_radius: f64,
    probes: usize,
    direction_similarity: Option<f64>,
}

pub fn eval(args: &Eval, seed: u64) -> Result<()> {
    let load = |p: &Path| -> Result<DualModel> {
        if !p.is_file() {
            return Err(usage(format!("model {} does not exist", p.display())));
        }
        Ok(DualModel::load(p)?)
    };
    let model = load(&args.model)?;
    let reference = load(&args.reference)?;
    let data = load_data(&args.data, seed)?;
    if model.input_dim() != data.d || reference.input_dim() != data.d {
        return Err(usage("model and dataset dimensions differ"));
    }
    let radius = args.radius.unwrap_or_else(|| data.radius());
    if !(radius > 0.0) {
        return Err(usage("--radius must be positive"));
    }
    let risk = risk_gap(&reference, &model, &data.points)?;
    let probes = ball_probes(data.d, radius, args.probes, seed);
    let gap = pointwise_gap(&reference, &model, &probes)?;
    let similarity = if model.spec == reference.spec {
        Some(direction_similarity(&Model::from(model), &Model::from(reference))?)
    } else {
        None
    };
    let report = EvalReport {
        risk,
        pointwise_gap: gap,
        probe_radius: radius,
        probes: probes.len(),
        direction_similarity: similarity,
    };
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(out) = &args.out {
        fs::write(out, json + "\n")?;
    }
    Ok(())
}
