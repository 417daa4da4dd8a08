//! End-to-end approximate teaching of a Gaussian perceptron: train a
//! reference model on data, build its teaching set, refit from the set alone
//! and measure the risk gap. [`sweep`] repeats the last three stages over a
//! range of truncation orders.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{reference_config, train_reference, Dataset, Reference};
use crate::error::{Error, Result};
use crate::eval::{ball_probes, pointwise_gap, risk_gap, RiskReport};
use crate::kernel::KernelSpec;
use crate::learner::{fit, LearnerConfig};
use crate::model::DualModel;
use crate::rng::derive_seed;
use crate::teacher::{
    closed_form_dual, gaussian_teaching_set, Certificate, GaussianTeachConfig, GaussianTeaching,
};

/// Pipeline stage, used to label failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Reference,
    Teach,
    Certificate,
    Learn,
    Evaluate,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Reference => "reference",
            Stage::Teach => "teach",
            Stage::Certificate => "certificate",
            Stage::Learn => "learn",
            Stage::Evaluate => "evaluate",
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{} stage failed: {source}", stage.as_str())]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sigma: f64,
    pub teach: GaussianTeachConfig,
    pub learner: LearnerConfig,
    /// Learner settings for the reference model; its seed is overridden.
    pub reference: LearnerConfig,
    /// Probes drawn from the input ball for the pointwise gap.
    pub probes: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sigma: 0.9,
            teach: GaussianTeachConfig::default(),
            learner: LearnerConfig::default(),
            reference: reference_config(0),
            probes: 10_000,
        }
    }
}

/// Learned model from a teaching set, converged or not.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Learned {
    pub model: DualModel,
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct TeachOutcome {
    pub reference: Reference,
    pub teaching: GaussianTeaching,
    pub certificate: Certificate,
    pub learned: Learned,
    pub risk: RiskReport,
    /// `max |f* − f̂|` over probes in the input ball.
    pub pointwise_gap: f64,
    pub probe_radius: f64,
}

/// Trains the reference model for a dataset.
pub fn reference_model(
    data: &Dataset,
    cfg: &PipelineConfig,
    seed: u64,
) -> std::result::Result<Reference, StageError> {
    let learner = LearnerConfig {
        seed: derive_seed(seed, &[0]),
        ..cfg.reference
    };
    train_reference(data, KernelSpec::Gaussian { sigma: cfg.sigma }, &learner).at(Stage::Reference)
}

/// Runs every stage on `data`.
pub fn teach_gaussian(
    data: &Dataset,
    cfg: &PipelineConfig,
    seed: u64,
) -> std::result::Result<TeachOutcome, StageError> {
    let reference = reference_model(data, cfg, seed)?;
    teach_from_reference(data, reference, cfg, derive_seed(seed, &[1]), derive_seed(seed, &[2]))
}

/// Runs the teaching, learning and evaluation stages for a trained reference.
pub fn teach_from_reference(
    data: &Dataset,
    reference: Reference,
    cfg: &PipelineConfig,
    teach_seed: u64,
    learn_seed: u64,
) -> std::result::Result<TeachOutcome, StageError> {
    let teaching = gaussian_teaching_set(&reference.model, &cfg.teach, teach_seed).at(Stage::Teach)?;
    let certificate = closed_form_dual(&teaching.set, cfg.sigma).at(Stage::Certificate)?;
    let learned = learn(&teaching, cfg, learn_seed)?;
    let risk = risk_gap(&reference.model, &learned.model, &data.points).at(Stage::Evaluate)?;
    let probe_radius = teaching.config.input_radius(cfg.sigma);
    let probes = ball_probes(data.d, probe_radius, cfg.probes, derive_seed(teach_seed, &[9]));
    let gap = pointwise_gap(&reference.model, &learned.model, &probes).at(Stage::Evaluate)?;
    Ok(TeachOutcome {
        reference,
        teaching,
        certificate,
        learned,
        risk,
        pointwise_gap: gap,
        probe_radius,
    })
}

fn learn(
    teaching: &GaussianTeaching,
    cfg: &PipelineConfig,
    seed: u64,
) -> std::result::Result<Learned, StageError> {
    let spec = KernelSpec::Gaussian { sigma: cfg.sigma };
    let learner = LearnerConfig { seed, ..cfg.learner };
    match fit(&teaching.set, spec, &learner) {
        Ok(f) => Ok(Learned {
            model: f.model,
            loss: f.loss,
            iterations: f.iterations,
            converged: true,
        }),
        Err(Error::NotConverged {
            model,
            loss,
            iterations,
        }) => {
            log::warn!("learner stopped at loss {loss:.3e}; using its best iterate");
            Ok(Learned {
                model: *model,
                loss,
                iterations,
                converged: false,
            })
        }
        Err(e) => Err(StageError {
            stage: Stage::Learn,
            source: e,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub s_min: u32,
    pub s_max: u32,
    /// Teaching sets rebuilt per order.
    pub sets: usize,
    /// Learner restarts per teaching set.
    pub restarts: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            s_min: 2,
            s_max: 12,
            sets: 5,
            restarts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: u32,
    pub ts_size: usize,
    pub err_star: f64,
    pub err_hat_mean: f64,
    pub err_hat_std: f64,
    pub gap_mean: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub s: u32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub dataset_name: String,
    pub sigma: f64,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    /// Orders with no successful trial.
    pub failures: Vec<SweepFailure>,
}

impl SweepResult {
    pub fn row(&self, s: u32) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.s == s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,ts_size,err_star,err_hat_mean,err_hat_std,gap_mean\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.s, r.ts_size, r.err_star, r.err_hat_mean, r.err_hat_std, r.gap_mean
            ));
        }
        out
    }
}

/// For each order `s` in the range, rebuilds `sets` teaching sets and fits
/// `restarts` learners on each, all from seeds derived from `(seed, s, set,
/// restart)`. Orders where every trial fails become [`SweepFailure`]s.
pub fn sweep(
    data: &Dataset,
    cfg: &PipelineConfig,
    sweep: &SweepConfig,
    seed: u64,
) -> std::result::Result<SweepResult, StageError> {
    if sweep.s_min > sweep.s_max || sweep.sets == 0 || sweep.restarts == 0 {
        return Err(StageError {
            stage: Stage::Teach,
            source: Error::invalid("sweep needs s_min <= s_max and at least one trial"),
        });
    }
    let reference = reference_model(data, cfg, seed)?;
    let orders: Vec<u32> = (sweep.s_min..=sweep.s_max).collect();
    let outcomes: Vec<(u32, std::result::Result<SweepRow, String>)> = orders
        .par_iter()
        .map(|&s| (s, sweep_order(data, &reference, cfg, sweep, seed, s)))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (s, o) in outcomes {
        match o {
            Ok(row) => rows.push(row),
            Err(reason) => failures.push(SweepFailure { s, reason }),
        }
    }
    Ok(SweepResult {
        dataset_name: data.name.clone(),
        sigma: cfg.sigma,
        seed,
        rows,
        failures,
    })
}

fn sweep_order(
    data: &Dataset,
    reference: &Reference,
    cfg: &PipelineConfig,
    sweep: &SweepConfig,
    seed: u64,
    s: u32,
) -> std::result::Result<SweepRow, String> {
    let mut teach_cfg = cfg.teach;
    teach_cfg.order = Some(s);
    let cfg = PipelineConfig {
        teach: teach_cfg,
        ..*cfg
    };
    let per_set: Vec<std::result::Result<(usize, Vec<f64>), String>> = (0..sweep.sets)
        .into_par_iter()
        .map(|t| {
            let teaching =
                gaussian_teaching_set(&reference.model, &cfg.teach, derive_seed(seed, &[s as u64, t as u64]))
                    .map_err(|e| e.to_string())?;
            let mut errs = Vec::with_capacity(sweep.restarts);
            for u in 0..sweep.restarts {
                let learned = learn(&teaching, &cfg, derive_seed(seed, &[s as u64, t as u64, u as u64, 1]))
                    .map_err(|e| e.to_string())?;
                let risk = crate::eval::perceptron_risk(&learned.model, &data.points)
                    .map_err(|e| e.to_string())?;
                errs.push(risk);
            }
            Ok((teaching.set.len(), errs))
        })
        .collect();
    let mut ts_size = 0;
    let mut errs = Vec::new();
    let mut last_failure = None;
    for r in per_set {
        match r {
            Ok((size, e)) => {
                ts_size = size;
                errs.extend(e);
            }
            Err(e) => last_failure = Some(e),
        }
    }
    if errs.is_empty() {
        return Err(last_failure.unwrap_or_else(|| "no trials ran".into()));
    }
    let n = errs.len() as f64;
    let mean = errs.iter().sum::<f64>() / n;
    let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    let gap_mean = errs.iter().map(|e| (reference.err_star - e).abs()).sum::<f64>() / n;
    Ok(SweepRow {
        s,
        ts_size,
        err_star: reference.err_star,
        err_hat_mean: mean,
        err_hat_std: var.sqrt(),
        gap_mean,
        trials: errs.len(),
    })
}
