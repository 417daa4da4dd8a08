//! Labeled points and teaching sets.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Binary label in `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "-1")]
    Negative,
    #[serde(rename = "1")]
    Positive,
}

impl Label {
    pub fn value(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn from_sign(v: f64) -> Label {
        if v < 0.0 {
            Label::Negative
        } else {
            Label::Positive
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(Error::invalid(format!("label must be -1 or 1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Label,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Label) -> Self {
        Sample { x, y }
    }
}

/// Why a point was put into a teaching set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    /// Orthogonal basis vector of the complement of θ* (linear construction).
    Basis,
    /// Negated sum of the basis vectors.
    OppositeSum,
    /// Point fixing the sign of the learned hypothesis.
    Anchor,
    BoundaryPos,
    BoundaryNeg,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Basis => "basis",
            Tag::OppositeSum => "opposite_sum",
            Tag::Anchor => "anchor",
            Tag::BoundaryPos => "boundary_pos",
            Tag::BoundaryNeg => "boundary_neg",
        }
    }

    pub fn parse(s: &str) -> Result<Tag> {
        Ok(match s {
            "basis" => Tag::Basis,
            "opposite_sum" => Tag::OppositeSum,
            "anchor" => Tag::Anchor,
            "boundary_pos" => Tag::BoundaryPos,
            "boundary_neg" => Tag::BoundaryNeg,
            other => return Err(Error::invalid(format!("unknown teaching tag {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeachingItem {
    pub x: Vec<f64>,
    pub y: Label,
    pub tag: Tag,
}

/// Ordered labeled points with provenance tags.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TeachingSet {
    pub items: Vec<TeachingItem>,
}

impl TeachingSet {
    pub fn new(items: Vec<TeachingItem>) -> Result<Self> {
        let ts = TeachingSet { items };
        ts.validate()?;
        Ok(ts)
    }

    /// Boundary pairs `{(z, +1), (z, −1)}` followed by the given anchors.
    pub fn from_boundary(boundary: &[Vec<f64>], anchors: &[(Vec<f64>, Label)]) -> Result<Self> {
        let mut items = Vec::with_capacity(2 * boundary.len() + anchors.len());
        for z in boundary {
            items.push(TeachingItem {
                x: z.clone(),
                y: Label::Positive,
                tag: Tag::BoundaryPos,
            });
            items.push(TeachingItem {
                x: z.clone(),
                y: Label::Negative,
                tag: Tag::BoundaryNeg,
            });
        }
        for (a, y) in anchors {
            items.push(TeachingItem {
                x: a.clone(),
                y: *y,
                tag: Tag::Anchor,
            });
        }
        Self::new(items)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.items.first().map(|i| i.x.len())
    }

    /// Checks dimensions and that every boundary point appears as a
    /// `(+1, −1)` twin pair.
    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.dim() {
            for it in &self.items {
                check_dim(d, it.x.len())?;
            }
        }
        let count = |tag: Tag, x: &[f64]| {
            self.items
                .iter()
                .filter(|it| it.tag == tag && it.x == x)
                .count()
        };
        for it in &self.items {
            let (expected_label, twin) = match it.tag {
                Tag::BoundaryPos => (Label::Positive, Tag::BoundaryNeg),
                Tag::BoundaryNeg => (Label::Negative, Tag::BoundaryPos),
                _ => continue,
            };
            if it.y != expected_label {
                return Err(Error::invalid("boundary item carries the wrong label"));
            }
            if count(twin, &it.x) != count(it.tag, &it.x) {
                return Err(Error::invalid("boundary item without its opposite-label twin"));
            }
        }
        Ok(())
    }

    /// Distinct boundary points, in order of first appearance.
    pub fn boundary_points(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for it in &self.items {
            if it.tag == Tag::BoundaryPos && !out.contains(&it.x) {
                out.push(it.x.clone());
            }
        }
        out
    }

    /// Items that encode the orthogonal complement of the target: boundary
    /// points, or basis vectors for the linear construction.
    pub fn complement_points(&self) -> Vec<Vec<f64>> {
        let boundary = self.boundary_points();
        if !boundary.is_empty() {
            return boundary;
        }
        self.items
            .iter()
            .filter(|it| it.tag == Tag::Basis)
            .map(|it| it.x.clone())
            .collect()
    }

    pub fn anchors(&self) -> Vec<(Vec<f64>, Label)> {
        self.items
            .iter()
            .filter(|it| it.tag == Tag::Anchor)
            .map(|it| (it.x.clone(), it.y))
            .collect()
    }

    pub fn samples(&self) -> Vec<Sample> {
        self.items
            .iter()
            .map(|it| Sample::new(it.x.clone(), it.y))
            .collect()
    }
}
