use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::{hinge_argument, LossAccumulator, Reduction};
use super::{check_dim, Embedding};
use crate::error::{Error, Result};

const NORM_FLOOR: f64 = 1e-12;

/// Anything that turns a feature vector into an embedding.
pub trait Encoder {
    fn encode(&self, features: &[f64]) -> Result<Embedding>;
    fn input_dim(&self) -> Option<usize>;
    fn output_dim(&self) -> Option<usize>;
    fn normalizes(&self) -> bool;
}

/// Pass-through encoder: features are the embedding, optionally unit-normalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityEncoder {
    pub normalize: bool,
}

impl Encoder for IdentityEncoder {
    fn encode(&self, features: &[f64]) -> Result<Embedding> {
        if !features.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerics("non-finite feature".into()));
        }
        let mut e = features.to_vec();
        if self.normalize {
            normalize_in_place(&mut e);
        }
        Ok(Embedding(e))
    }

    fn input_dim(&self) -> Option<usize> {
        None
    }

    fn output_dim(&self) -> Option<usize> {
        None
    }

    fn normalizes(&self) -> bool {
        self.normalize
    }
}

fn normalize_in_place(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let denom = norm.max(NORM_FLOOR);
    v.iter_mut().for_each(|x| *x /= denom);
    norm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderDims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl EncoderDims {
    pub fn param_count(&self) -> usize {
        self.hidden * self.input + self.hidden + self.output * self.hidden + self.output
    }
}

/// Two dense layers with a rectifier between them:
/// `e = W2·relu(W1·x + b1) + b2`, optionally scaled to unit length.
///
/// All parameters live in one flat vector laid out as `W1` (row-major,
/// hidden × input), `b1`, `W2` (row-major, output × hidden), `b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    pub dims: EncoderDims,
    pub normalize: bool,
    pub theta: Vec<f64>,
}

struct ForwardCache {
    pre: Vec<f64>,
    hidden: Vec<f64>,
    out: Vec<f64>,
    norm: f64,
}

impl EncoderParams {
    pub fn zeros(dims: EncoderDims, normalize: bool) -> Self {
        Self {
            dims,
            normalize,
            theta: vec![0.0; dims.param_count()],
        }
    }

    /// Every parameter drawn from uniform(−0.05, 0.05).
    pub fn init(dims: EncoderDims, normalize: bool, rng: &mut impl Rng) -> Self {
        let theta = (0..dims.param_count())
            .map(|_| rng.random_range(-0.05..0.05))
            .collect();
        Self {
            dims,
            normalize,
            theta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dims.param_count(), self.theta.len())?;
        if !self.theta.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerics("non-finite encoder weight".into()));
        }
        Ok(())
    }

    fn offsets(&self) -> [usize; 4] {
        let d = self.dims;
        let w1 = 0;
        let b1 = w1 + d.hidden * d.input;
        let w2 = b1 + d.hidden;
        let b2 = w2 + d.output * d.hidden;
        [w1, b1, w2, b2]
    }

    pub fn w1(&self) -> &[f64] {
        let [w1, b1, ..] = self.offsets();
        &self.theta[w1..b1]
    }

    pub fn b1(&self) -> &[f64] {
        let [_, b1, w2, _] = self.offsets();
        &self.theta[b1..w2]
    }

    pub fn w2(&self) -> &[f64] {
        let [_, _, w2, b2] = self.offsets();
        &self.theta[w2..b2]
    }

    pub fn b2(&self) -> &[f64] {
        let [.., b2] = self.offsets();
        &self.theta[b2..]
    }

    fn forward_cached(&self, x: &[f64]) -> Result<(Embedding, ForwardCache)> {
        check_dim(self.dims.input, x.len())?;
        let EncoderDims { input, hidden, output } = self.dims;
        let (w1, b1, w2, b2) = (self.w1(), self.b1(), self.w2(), self.b2());

        let pre: Vec<f64> = (0..hidden)
            .map(|j| {
                let row = &w1[j * input..(j + 1) * input];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b1[j]
            })
            .collect();
        let act: Vec<f64> = pre.iter().map(|&v| v.max(0.0)).collect();
        let out: Vec<f64> = (0..output)
            .map(|k| {
                let row = &w2[k * hidden..(k + 1) * hidden];
                row.iter().zip(&act).map(|(w, v)| w * v).sum::<f64>() + b2[k]
            })
            .collect();

        let mut e = out.clone();
        let norm = if self.normalize {
            normalize_in_place(&mut e)
        } else {
            0.0
        };
        let embedding = Embedding(e);
        if !embedding.is_finite() {
            return Err(Error::Numerics("non-finite embedding".into()));
        }
        Ok((
            embedding,
            ForwardCache {
                pre,
                hidden: act,
                out,
                norm,
            },
        ))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Embedding> {
        self.forward_cached(x).map(|(e, _)| e)
    }

    /// Adds the parameter gradient for one input, given `dL/de`, into `grads`.
    fn backward_into(
        &self,
        x: &[f64],
        embedding: &[f64],
        cache: &ForwardCache,
        grad_e: &[f64],
        grads: &mut [f64],
    ) {
        let EncoderDims { input, hidden, output } = self.dims;
        let [o_w1, o_b1, o_w2, o_b2] = self.offsets();

        let grad_out: Vec<f64> = if self.normalize {
            if cache.norm > NORM_FLOOR {
                let dot: f64 = embedding.iter().zip(grad_e).map(|(e, g)| e * g).sum();
                grad_e
                    .iter()
                    .zip(embedding)
                    .map(|(g, e)| (g - e * dot) / cache.norm)
                    .collect()
            } else {
                grad_e.iter().map(|g| g / NORM_FLOOR).collect()
            }
        } else {
            grad_e.to_vec()
        };
        debug_assert_eq!(grad_out.len(), cache.out.len());

        let w2 = self.w2();
        let mut grad_hidden = vec![0.0; hidden];
        for k in 0..output {
            let g = grad_out[k];
            if g == 0.0 {
                continue;
            }
            grads[o_b2 + k] += g;
            for j in 0..hidden {
                grads[o_w2 + k * hidden + j] += g * cache.hidden[j];
                grad_hidden[j] += w2[k * hidden + j] * g;
            }
        }
        for j in 0..hidden {
            if cache.pre[j] <= 0.0 {
                continue;
            }
            let g = grad_hidden[j];
            grads[o_b1 + j] += g;
            for i in 0..input {
                grads[o_w1 + j * input + i] += g * x[i];
            }
        }
    }
}

impl Encoder for EncoderParams {
    fn encode(&self, features: &[f64]) -> Result<Embedding> {
        self.forward(features)
    }

    fn input_dim(&self) -> Option<usize> {
        Some(self.dims.input)
    }

    fn output_dim(&self) -> Option<usize> {
        Some(self.dims.output)
    }

    fn normalizes(&self) -> bool {
        self.normalize
    }
}

/// Loss and exact parameter gradient of the triplet loss applied to the
/// encoder outputs. Each triplet is `[anchor, positive, negative]` features.
pub fn encoder_backward(
    params: &EncoderParams,
    batch: &[[&[f64]; 3]],
    alpha: f64,
    reduction: Reduction,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("margin must be non-negative, got {alpha}")));
    }
    params.validate()?;
    let scale = 2.0
        * match reduction {
            Reduction::Mean => 1.0 / batch.len() as f64,
            Reduction::Sum => 1.0,
        };

    let mut grads = vec![0.0; params.theta.len()];
    let mut loss = LossAccumulator::new(reduction);
    for [xa, xp, xn] in batch {
        let (ea, ca) = params.forward_cached(xa)?;
        let (ep, cp) = params.forward_cached(xp)?;
        let (en, cn) = params.forward_cached(xn)?;
        let (a, p, n) = (&ea.0, &ep.0, &en.0);
        let h = hinge_argument(a, p, n, alpha);
        loss.push(h.max(0.0));
        if h <= 0.0 {
            continue;
        }
        let ga: Vec<f64> = n.iter().zip(p).map(|(n, p)| scale * (n - p)).collect();
        let gp: Vec<f64> = p.iter().zip(a).map(|(p, a)| scale * (p - a)).collect();
        let gn: Vec<f64> = a.iter().zip(n).map(|(a, n)| scale * (a - n)).collect();
        params.backward_into(xa, a, &ca, &ga, &mut grads);
        params.backward_into(xp, p, &cp, &gp, &mut grads);
        params.backward_into(xn, n, &cn, &gn, &mut grads);
    }
    Ok((loss.value(), grads))
}
