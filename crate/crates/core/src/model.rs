//! Hypotheses in dual form `f(x) = Σ αⱼ K(cⱼ, x)` and primal form
//! `f(x) = θ · Φ(x)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::kernel::{FeatureMap, FeatureVector, KernelSpec};
use crate::linalg::{gram_matrix, GramMatrix};

/// Anything that maps an input to a real decision value.
pub trait Hypothesis {
    fn input_dim(&self) -> usize;

    fn decision_value(&self, x: &[f64]) -> Result<f64>;
}

impl<H: Hypothesis + ?Sized> Hypothesis for &H {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn decision_value(&self, x: &[f64]) -> Result<f64> {
        (**self).decision_value(x)
    }
}

/// Kernel expansion over a set of centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualModel {
    #[serde(rename = "kernel")]
    pub spec: KernelSpec,
    pub centers: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
}

impl DualModel {
    pub fn new(spec: KernelSpec, centers: Vec<Vec<f64>>, coefficients: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        check_dim(centers.len(), coefficients.len())?;
        let first = centers
            .first()
            .ok_or_else(|| Error::invalid("a dual model needs at least one center"))?;
        if first.is_empty() {
            return Err(Error::invalid("input dimension must be >= 1"));
        }
        for c in &centers {
            check_dim(first.len(), c.len())?;
            check_finite(c, "model center")?;
        }
        check_finite(&coefficients, "model coefficients")?;
        Ok(DualModel {
            spec,
            centers,
            coefficients,
        })
    }

    /// `Σ |αⱼ|`.
    pub fn coefficient_l1(&self) -> f64 {
        self.coefficients.iter().map(|a| a.abs()).sum()
    }

    pub fn gram(&self) -> Result<GramMatrix> {
        gram_matrix(&self.spec, &self.centers)
    }

    pub fn rkhs_norm(&self) -> Result<f64> {
        rkhs_norm(self)
    }

    /// Same hypothesis with every coefficient multiplied by `t`.
    pub fn scaled(&self, t: f64) -> DualModel {
        DualModel {
            spec: self.spec,
            centers: self.centers.clone(),
            coefficients: self.coefficients.iter().map(|a| a * t).collect(),
        }
    }

    /// Rescaled to unit RKHS norm.
    pub fn normalized(&self) -> Result<DualModel> {
        let n = self.rkhs_norm()?;
        if !(n > 0.0) {
            return Err(Error::invalid("cannot normalize a zero-norm model"));
        }
        Ok(self.scaled(1.0 / n))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, a)| a * self.spec.eval_unchecked(c, x))
            .sum()
    }

    /// The same hypothesis as an explicit feature-space vector
    /// `θ = Σ αⱼ Φ(cⱼ)`. Only for finite-dimensional kernels.
    pub fn to_primal(&self) -> Result<PrimalModel> {
        let map = FeatureMap::new(self.spec, self.input_dim())?;
        let mut theta = vec![0.0; map.dim()];
        let mut phi = vec![0.0; map.dim()];
        for (c, a) in self.centers.iter().zip(&self.coefficients) {
            map.apply_into(c, &mut phi);
            theta.iter_mut().zip(&phi).for_each(|(t, p)| *t += a * p);
        }
        PrimalModel::from_map(map, theta)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(s)?;
        doc.into_model()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Hypothesis for DualModel {
    fn input_dim(&self) -> usize {
        self.centers[0].len()
    }

    fn decision_value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.input_dim(), x.len())?;
        check_finite(x, "decision input")?;
        Ok(self.eval_unchecked(x))
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Versioned on-disk form of a [`DualModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    #[serde(flatten)]
    pub model: DualModel,
}

impl From<&DualModel> for ModelDocument {
    fn from(model: &DualModel) -> Self {
        ModelDocument {
            version: MODEL_FORMAT_VERSION,
            model: model.clone(),
        }
    }
}

impl ModelDocument {
    pub fn into_model(self) -> Result<DualModel> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {}",
                self.version
            )));
        }
        let m = self.model;
        DualModel::new(m.spec, m.centers, m.coefficients)
    }
}

/// `‖θ‖ = √(αᵀ Λ α)` over the model's own centers.
pub fn rkhs_norm(model: &DualModel) -> Result<f64> {
    let q = model.gram()?.entries.quadratic_form(&model.coefficients);
    let scale = model.coefficient_l1().powi(2).max(1.0);
    if q < -1e-12 * scale {
        return Err(Error::invalid(format!(
            "negative RKHS quadratic form {q:e}; the Gram matrix is not positive semi-definite"
        )));
    }
    Ok(q.max(0.0).sqrt())
}

/// Explicit feature-space parameter vector.
#[derive(Debug, Clone)]
pub struct PrimalModel {
    pub theta: FeatureVector,
    map: FeatureMap,
}

impl PrimalModel {
    pub fn new(spec: KernelSpec, input_dim: usize, coords: Vec<f64>) -> Result<Self> {
        Self::from_map(FeatureMap::new(spec, input_dim)?, coords)
    }

    pub(crate) fn from_map(map: FeatureMap, coords: Vec<f64>) -> Result<Self> {
        check_dim(map.dim(), coords.len())?;
        check_finite(&coords, "primal parameters")?;
        Ok(PrimalModel {
            theta: FeatureVector {
                coords,
                layout: map.layout().clone(),
            },
            map,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        self.map.spec()
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.map
    }

    pub fn coords(&self) -> &[f64] {
        &self.theta.coords
    }

    pub fn norm(&self) -> f64 {
        self.theta.norm()
    }

    pub fn normalized(&self) -> Result<PrimalModel> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Self::from_map(self.map.clone(), self.coords().iter().map(|v| v / n).collect())
    }

    /// `θ · Φ(x)` without validation.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.map.dot_unchecked(self.coords(), x)
    }
}

impl Hypothesis for PrimalModel {
    fn input_dim(&self) -> usize {
        self.map.input_dim()
    }

    fn decision_value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.input_dim(), x.len())?;
        check_finite(x, "decision input")?;
        Ok(self.eval_unchecked(x))
    }
}

/// Either representation.
#[derive(Debug, Clone)]
pub enum Model {
    Dual(DualModel),
    Primal(PrimalModel),
}

impl From<DualModel> for Model {
    fn from(m: DualModel) -> Self {
        Model::Dual(m)
    }
}

impl From<PrimalModel> for Model {
    fn from(m: PrimalModel) -> Self {
        Model::Primal(m)
    }
}

impl Model {
    pub fn spec(&self) -> &KernelSpec {
        match self {
            Model::Dual(m) => &m.spec,
            Model::Primal(m) => m.spec(),
        }
    }
}

impl Hypothesis for Model {
    fn input_dim(&self) -> usize {
        match self {
            Model::Dual(m) => m.input_dim(),
            Model::Primal(m) => m.input_dim(),
        }
    }

    fn decision_value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Dual(m) => m.decision_value(x),
            Model::Primal(m) => m.decision_value(x),
        }
    }
}

/// Free-function form of [`Hypothesis::decision_value`].
pub fn decision_value<H: Hypothesis + ?Sized>(model: &H, x: &[f64]) -> Result<f64> {
    model.decision_value(x)
}
