//! Synthetic two-dimensional datasets, CSV I/O and reference-model training.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::eval::perceptron_risk;
use crate::kernel::KernelSpec;
use crate::learner::{fit_points, Init, LearnerConfig, StepRule};
use crate::model::DualModel;
use crate::rng::{rng, Rng};
use crate::sample::{Label, Sample, Tag, TeachingItem, TeachingSet};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<Sample>,
    pub d: usize,
    pub name: String,
    pub seed: u64,
}

impl Dataset {
    pub fn new(points: Vec<Sample>, name: impl Into<String>, seed: u64) -> Result<Self> {
        let d = points
            .first()
            .map(|p| p.x.len())
            .ok_or_else(|| Error::invalid("dataset is empty"))?;
        if d == 0 {
            return Err(Error::invalid("input dimension must be >= 1"));
        }
        for p in &points {
            check_dim(d, p.x.len())?;
        }
        Ok(Dataset {
            points,
            d,
            name: name.into(),
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.x.clone()).collect()
    }

    /// Largest input norm.
    pub fn radius(&self) -> f64 {
        self.points
            .iter()
            .map(|p| crate::kernel::norm(&p.x))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Moons,
    Circles,
    Banana,
    Blobs,
    LinearMargin,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 5] = [
        DatasetKind::Moons,
        DatasetKind::Circles,
        DatasetKind::Banana,
        DatasetKind::Blobs,
        DatasetKind::LinearMargin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Moons => "moons",
            DatasetKind::Circles => "circles",
            DatasetKind::Banana => "banana",
            DatasetKind::Blobs => "blobs",
            DatasetKind::LinearMargin => "linear_margin",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DatasetKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s || k.as_str().replace('_', "-") == s)
            .ok_or_else(|| Error::invalid(format!("unknown dataset kind {s:?}")))
    }
}

/// Half-width of the empty band around the `linear_margin` separator.
pub const LINEAR_MARGIN: f64 = 0.1;

/// Generates `n` points, `⌊n/2⌋` labeled `+1` and the rest `−1`.
///
/// * `moons`: unit upper arc (`+1`) and the lower arc shifted by `(1, −0.5)`
///   (`−1`), centered on the origin, plus Gaussian noise.
/// * `circles`: radius 1 (`−1`) around radius 0.5 (`+1`), plus Gaussian noise.
/// * `banana`: two interleaved unit arcs centered at `(0, ∓0.6)`, plus
///   Gaussian noise.
/// * `blobs`: uniform disks of radius 0.6 around `(±1, 0)`, plus Gaussian noise.
/// * `linear_margin`: uniform on `[−1, 1]²` outside a band of half-width
///   [`LINEAR_MARGIN`] around a random line through the origin; `noise` jitters
///   points along the line, so the margin is kept.
pub fn generate(kind: DatasetKind, n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::invalid("a dataset needs at least two points"));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid("noise must be non-negative"));
    }
    let mut g = rng(seed);
    let n_pos = n / 2;
    let mut points = Vec::with_capacity(n);
    let jitter = |g: &mut Rng, x: &mut [f64]| {
        if noise > 0.0 {
            for v in x.iter_mut() {
                let e: f64 = g.sample(StandardNormal);
                *v += noise * e;
            }
        }
    };
    match kind {
        DatasetKind::Moons => {
            for i in 0..n {
                let t = PI * g.random::<f64>();
                let (mut x, y) = if i < n_pos {
                    (vec![t.cos() - 0.5, t.sin() - 0.25], Label::Positive)
                } else {
                    (vec![0.5 - t.cos(), 0.25 - t.sin()], Label::Negative)
                };
                jitter(&mut g, &mut x);
                points.push(Sample::new(x, y));
            }
        }
        DatasetKind::Circles => {
            for i in 0..n {
                let t = 2.0 * PI * g.random::<f64>();
                let (r, y) = if i < n_pos {
                    (0.5, Label::Positive)
                } else {
                    (1.0, Label::Negative)
                };
                let mut x = vec![r * t.cos(), r * t.sin()];
                jitter(&mut g, &mut x);
                points.push(Sample::new(x, y));
            }
        }
        DatasetKind::Banana => {
            for i in 0..n {
                let t = PI * (0.15 + 0.7 * g.random::<f64>());
                let (mut x, y) = if i < n_pos {
                    (vec![t.cos(), t.sin() - 0.6], Label::Positive)
                } else {
                    (vec![t.cos(), 0.6 - t.sin()], Label::Negative)
                };
                jitter(&mut g, &mut x);
                points.push(Sample::new(x, y));
            }
        }
        DatasetKind::Blobs => {
            for i in 0..n {
                let t = 2.0 * PI * g.random::<f64>();
                let r = 0.6 * g.random::<f64>().sqrt();
                let (cx, y) = if i < n_pos {
                    (1.0, Label::Positive)
                } else {
                    (-1.0, Label::Negative)
                };
                let mut x = vec![cx + r * t.cos(), r * t.sin()];
                jitter(&mut g, &mut x);
                points.push(Sample::new(x, y));
            }
        }
        DatasetKind::LinearMargin => {
            let phi = 2.0 * PI * g.random::<f64>();
            let w = [phi.cos(), phi.sin()];
            let along = [-w[1], w[0]];
            let (mut pos, mut neg) = (0usize, 0usize);
            while pos + neg < n {
                let x = [2.0 * g.random::<f64>() - 1.0, 2.0 * g.random::<f64>() - 1.0];
                let m = w[0] * x[0] + w[1] * x[1];
                if m.abs() < LINEAR_MARGIN {
                    continue;
                }
                let y = Label::from_sign(m);
                match y {
                    Label::Positive if pos < n_pos => pos += 1,
                    Label::Negative if neg < n - n_pos => neg += 1,
                    _ => continue,
                }
                let shift = if noise > 0.0 {
                    noise * g.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                points.push(Sample::new(
                    vec![x[0] + shift * along[0], x[1] + shift * along[1]],
                    y,
                ));
            }
        }
    }
    Dataset::new(points, kind.as_str(), seed)
}

/// Learner settings for the reference model: label-initialized coefficients
/// and `c/√t` steps, since the data need not be separable.
pub fn reference_config(seed: u64) -> LearnerConfig {
    LearnerConfig {
        max_iters: 2000,
        step_rule: StepRule::InvSqrt,
        init: Init::Labels,
        seed,
        ..LearnerConfig::default()
    }
}

/// Reference model trained on a full dataset.
#[derive(Debug, Clone)]
pub struct Reference {
    /// Unit-norm model over all dataset inputs.
    pub model: DualModel,
    /// Empirical perceptron risk of `model` on the dataset.
    pub err_star: f64,
    /// Whether the training loss reached the learner tolerance.
    pub converged: bool,
}

/// Fits the target model with every distinct dataset input as a center. A
/// fit that stops above the loss tolerance still yields its best iterate,
/// since non-separable data has no zero-loss solution.
pub fn train_reference(data: &Dataset, spec: KernelSpec, config: &LearnerConfig) -> Result<Reference> {
    if !matches!(spec, KernelSpec::Gaussian { .. }) {
        return Err(Error::invalid("reference models use the Gaussian kernel"));
    }
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(data.len());
    for p in &data.points {
        if !centers.contains(&p.x) {
            centers.push(p.x.clone());
        }
    }
    let (model, converged) = match fit_points(&data.points, centers, spec, config) {
        Ok(fit) => (fit.model, true),
        Err(Error::NotConverged { model, loss, .. }) => {
            log::info!("reference fit stopped at loss {loss:.3e}");
            (*model, false)
        }
        Err(e) => return Err(e),
    };
    let err_star = perceptron_risk(&model, &data.points)?;
    Ok(Reference {
        model,
        err_star,
        converged,
    })
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(d: usize, extra: &[&str]) -> Vec<String> {
    (1..=d)
        .map(|i| format!("x{i}"))
        .chain(extra.iter().map(|s| s.to_string()))
        .collect()
}

pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_path(path)?;
    w.write_record(header(data.d, &["y"]))?;
    for p in &data.points {
        let mut row: Vec<String> = p.x.iter().map(|v| fmt_float(*v)).collect();
        row.push(p.y.as_i8().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `x1,…,xd,y`. A label column containing only 0 and 1 is mapped to
/// `−1` and `+1`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let rows = read_rows(path, 1)?;
    let mut labels = Vec::with_capacity(rows.len());
    for r in &rows {
        let v: f64 = r.extra[0]
            .parse()
            .map_err(|_| parse_error(path, r.line, format!("label {:?} is not a number", r.extra[0])))?;
        labels.push(v);
    }
    let zero_one = labels.iter().all(|v| *v == 0.0 || *v == 1.0) && labels.contains(&0.0);
    let mut points = Vec::with_capacity(rows.len());
    for (r, v) in rows.into_iter().zip(labels) {
        let y = if v == 1.0 {
            Label::Positive
        } else if v == -1.0 || (zero_one && v == 0.0) {
            Label::Negative
        } else {
            return Err(parse_error(path, r.line, format!("label must be -1 or 1, got {v}")));
        };
        points.push(Sample::new(r.x, y));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(points, name, 0)
}

pub fn save_teaching_set_csv(ts: &TeachingSet, path: impl AsRef<Path>) -> Result<()> {
    let d = ts.dim().ok_or_else(|| Error::invalid("teaching set is empty"))?;
    let mut w = csv::WriterBuilder::new().from_path(path)?;
    w.write_record(header(d, &["y", "tag"]))?;
    for it in &ts.items {
        let mut row: Vec<String> = it.x.iter().map(|v| fmt_float(*v)).collect();
        row.push(it.y.as_i8().to_string());
        row.push(it.tag.as_str().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `x1,…,xd,y,tag`.
pub fn load_teaching_set_csv(path: impl AsRef<Path>) -> Result<TeachingSet> {
    let path = path.as_ref();
    let rows = read_rows(path, 2)?;
    let mut items = Vec::with_capacity(rows.len());
    for r in rows {
        let y = match r.extra[0].as_str() {
            "1" | "+1" => Label::Positive,
            "-1" => Label::Negative,
            other => return Err(parse_error(path, r.line, format!("label must be -1 or 1, got {other:?}"))),
        };
        let tag = Tag::parse(&r.extra[1]).map_err(|e| parse_error(path, r.line, e.to_string()))?;
        items.push(TeachingItem { x: r.x, y, tag });
    }
    TeachingSet::new(items)
}

struct Row {
    line: usize,
    x: Vec<f64>,
    /// Trailing non-coordinate columns.
    extra: Vec<String>,
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_rows(path: &Path, n_extra: usize) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let width = rdr.headers()?.len();
    if width < n_extra + 1 {
        return Err(parse_error(path, 1, format!("expected at least {} columns", n_extra + 1)));
    }
    let d = width - n_extra;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(parse_error(path, line, format!("expected {width} fields, found {}", rec.len())));
        }
        let mut x = Vec::with_capacity(d);
        for (i, field) in rec.iter().take(d).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(path, line, format!("column x{}: {field:?} is not a number", i + 1)))?;
            if !v.is_finite() {
                return Err(parse_error(path, line, format!("column x{} is not finite", i + 1)));
            }
            x.push(v);
        }
        let extra = rec.iter().skip(d).map(str::to_string).collect();
        rows.push(Row { line, x, extra });
    }
    if rows.is_empty() {
        return Err(parse_error(path, 1, "no data rows"));
    }
    Ok(rows)
}
