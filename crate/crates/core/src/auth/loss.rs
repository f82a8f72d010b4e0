use super::{check_dim, squared_distance, Embedding};
use crate::error::{Error, Result};

/// How per-triplet losses combine over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    Mean,
    Sum,
}

impl Reduction {
    fn scale(self, n: usize) -> f64 {
        match self {
            Reduction::Mean => 1.0 / n as f64,
            Reduction::Sum => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedTriplet {
    pub anchor: Embedding,
    pub positive: Embedding,
    pub negative: Embedding,
}

impl EmbeddedTriplet {
    pub fn new(anchor: Vec<f64>, positive: Vec<f64>, negative: Vec<f64>) -> Self {
        Self {
            anchor: Embedding(anchor),
            positive: Embedding(positive),
            negative: Embedding(negative),
        }
    }
}

/// Gradient of the batch loss with respect to each member of one triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletGrad {
    pub anchor: Vec<f64>,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

/// `‖a−p‖² − ‖a−n‖² + α` before clamping.
pub(crate) fn hinge_argument(a: &[f64], p: &[f64], n: &[f64], alpha: f64) -> f64 {
    squared_distance(a, p) - squared_distance(a, n) + alpha
}

/// Accumulates a reduced loss. The mean is a running mean so that a batch
/// of identical losses reduces to exactly that value.
pub(crate) struct LossAccumulator {
    reduction: Reduction,
    value: f64,
    count: usize,
}

impl LossAccumulator {
    pub(crate) fn new(reduction: Reduction) -> Self {
        Self {
            reduction,
            value: 0.0,
            count: 0,
        }
    }

    pub(crate) fn push(&mut self, loss: f64) {
        self.count += 1;
        match self.reduction {
            Reduction::Mean => self.value += (loss - self.value) / self.count as f64,
            Reduction::Sum => self.value += loss,
        }
    }

    pub(crate) fn value(&self) -> f64 {
        self.value
    }
}

fn check_batch(batch: &[EmbeddedTriplet], alpha: f64) -> Result<usize> {
    let first = batch.first().ok_or(Error::EmptyBatch)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("margin must be non-negative, got {alpha}")));
    }
    let dim = first.anchor.dim();
    for t in batch {
        check_dim(dim, t.anchor.dim())?;
        check_dim(dim, t.positive.dim())?;
        check_dim(dim, t.negative.dim())?;
    }
    Ok(dim)
}

/// Hinged triplet margin loss over squared Euclidean distances.
pub fn triplet_loss(batch: &[EmbeddedTriplet], alpha: f64, reduction: Reduction) -> Result<f64> {
    check_batch(batch, alpha)?;
    let mut acc = LossAccumulator::new(reduction);
    for t in batch {
        let h = hinge_argument(&t.anchor.0, &t.positive.0, &t.negative.0, alpha);
        acc.push(h.max(0.0));
    }
    Ok(acc.value())
}

/// Analytic gradients of [`triplet_loss`]; zero for triplets whose hinge is
/// clamped.
pub fn triplet_grad(
    batch: &[EmbeddedTriplet],
    alpha: f64,
    reduction: Reduction,
) -> Result<Vec<TripletGrad>> {
    let dim = check_batch(batch, alpha)?;
    let scale = 2.0 * reduction.scale(batch.len());
    Ok(batch
        .iter()
        .map(|t| {
            let (a, p, n) = (&t.anchor.0, &t.positive.0, &t.negative.0);
            if hinge_argument(a, p, n, alpha) <= 0.0 {
                return TripletGrad {
                    anchor: vec![0.0; dim],
                    positive: vec![0.0; dim],
                    negative: vec![0.0; dim],
                };
            }
            TripletGrad {
                anchor: (0..dim).map(|i| scale * (n[i] - p[i])).collect(),
                positive: (0..dim).map(|i| scale * (p[i] - a[i])).collect(),
                negative: (0..dim).map(|i| scale * (a[i] - n[i])).collect(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: [f64; 2], p: [f64; 2], n: [f64; 2]) -> EmbeddedTriplet {
        EmbeddedTriplet::new(a.to_vec(), p.to_vec(), n.to_vec())
    }

    #[test]
    fn fixed_points() {
        let same = t([0.3, 0.1], [0.3, 0.1], [0.3, 0.1]);
        assert_eq!(triplet_loss(std::slice::from_ref(&same), 0.2, Reduction::Mean).unwrap(), 0.2);
        assert_eq!(triplet_loss(&vec![same; 7], 0.2, Reduction::Mean).unwrap(), 0.2);
        let easy = t([0.0, 0.0], [0.0, 1.0], [0.0, 3.0]);
        assert_eq!(triplet_loss(&[easy], 0.5, Reduction::Mean).unwrap(), 0.0);
        let hard = t([0.0, 0.0], [0.0, 2.0], [0.0, 1.0]);
        assert_eq!(triplet_loss(&[hard], 0.5, Reduction::Mean).unwrap(), 3.5);
    }

    #[test]
    fn sum_reduction() {
        let hard = t([0.0, 0.0], [0.0, 2.0], [0.0, 1.0]);
        assert_eq!(triplet_loss(&[hard.clone(), hard], 0.5, Reduction::Sum).unwrap(), 7.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(triplet_loss(&[], 0.2, Reduction::Mean), Err(Error::EmptyBatch)));
        assert!(matches!(triplet_grad(&[], 0.2, Reduction::Mean), Err(Error::EmptyBatch)));
        let bad = EmbeddedTriplet::new(vec![0.0], vec![0.0, 1.0], vec![0.0]);
        assert!(matches!(triplet_loss(&[bad], 0.2, Reduction::Mean), Err(Error::Dimension { .. })));
    }

    #[test]
    fn inactive_triplet_has_zero_gradient() {
        let easy = t([0.0, 0.0], [0.0, 1.0], [0.0, 3.0]);
        let g = &triplet_grad(&[easy], 0.5, Reduction::Mean).unwrap()[0];
        assert!(g.anchor.iter().chain(&g.positive).chain(&g.negative).all(|&v| v == 0.0));
    }

    #[test]
    fn anchor_equal_positive_zeroes_positive_gradient() {
        let tr = t([0.2, 0.4], [0.2, 0.4], [0.25, 0.4]);
        let g = &triplet_grad(&[tr], 0.5, Reduction::Mean).unwrap()[0];
        assert_eq!(g.positive, vec![0.0, 0.0]);
        assert!(g.anchor.iter().any(|&v| v != 0.0));
    }
}
