//! Three-layer feedforward networks with tanh hidden units.
//!
//! Actor networks end in a softmax over codes; critic networks end in a single
//! linear unit. Gradients are computed by hand-written backpropagation.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Softmax,
    Scalar,
}

impl Head {
    fn name(self) -> &'static str {
        match self {
            Head::Softmax => "softmax",
            Head::Scalar => "scalar",
        }
    }
}

/// Affine layer `y = W x + b`, `W` row-major `rows x cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.cols)
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Dense>,
    pub head: Head,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input followed by each hidden activation.
    activations: Vec<Vec<f64>>,
    /// Pre-head output (logits or value).
    pub raw: Vec<f64>,
}

/// Gradient with the same shape as the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrad {
    pub layers: Vec<Dense>,
}

impl MlpGrad {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| Dense::zeros(l.rows, l.cols))
                .collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &MlpGrad, k: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights
                .iter_mut()
                .zip(&b.weights)
                .for_each(|(x, y)| *x += k * y);
            a.bias
                .iter_mut()
                .zip(&b.bias)
                .for_each(|(x, y)| *x += k * y);
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

fn flatten(layers: &[Dense]) -> Vec<f64> {
    layers
        .iter()
        .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
        .collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases; the output layer is shrunk by 10x.
    pub fn new<R: Rng + ?Sized>(
        input: usize,
        hidden: usize,
        output: usize,
        head: Head,
        rng: &mut R,
    ) -> Self {
        let dims = [(hidden, input), (hidden, hidden), (output, hidden)];
        let layers = dims
            .iter()
            .enumerate()
            .map(|(i, &(rows, cols))| {
                let mut bound = (6.0 / (rows + cols) as f64).sqrt();
                if i == dims.len() - 1 {
                    bound *= 0.1;
                }
                let mut l = Dense::zeros(rows, cols);
                l.weights
                    .iter_mut()
                    .for_each(|w| *w = rng.gen_range(-bound..=bound));
                l
            })
            .collect();
        Self { layers, head }
    }

    pub fn zeros(input: usize, hidden: usize, output: usize, head: Head) -> Self {
        Self {
            layers: vec![
                Dense::zeros(hidden, input),
                Dense::zeros(hidden, hidden),
                Dense::zeros(output, hidden),
            ],
            head,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows)
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        if x.len() != self.input_dim() {
            return Err(Error::invalid(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        let mut activations = vec![x.to_vec()];
        let last = self.layers.len() - 1;
        for layer in &self.layers[..last] {
            let z = layer.apply(activations.last().expect("non-empty"));
            activations.push(z.into_iter().map(f64::tanh).collect());
        }
        let raw = self.layers[last].apply(activations.last().expect("non-empty"));
        Ok(ForwardCache { activations, raw })
    }

    /// Action probabilities (softmax head) or `[value]` (scalar head).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let raw = self.forward_cached(x)?.raw;
        let out = match self.head {
            Head::Softmax => softmax(&raw),
            Head::Scalar => raw,
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("network output is not finite".into()));
        }
        Ok(out)
    }

    /// Gradient of a scalar objective given its gradient `d_raw` w.r.t. the pre-head output.
    pub fn backward(&self, cache: &ForwardCache, d_raw: &[f64]) -> MlpGrad {
        let mut grad = MlpGrad::zeros_like(self);
        self.backward_into(cache, d_raw, 1.0, &mut grad);
        grad
    }

    /// Accumulate `k` times the gradient into `grad`.
    pub fn backward_into(&self, cache: &ForwardCache, d_raw: &[f64], k: f64, grad: &mut MlpGrad) {
        let mut delta: Vec<f64> = d_raw.iter().map(|d| d * k).collect();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.activations[i];
            let g = &mut grad.layers[i];
            for (r, d) in delta.iter().enumerate() {
                g.bias[r] += *d;
                let row = &mut g.weights[r * layer.cols..(r + 1) * layer.cols];
                row.iter_mut().zip(input).for_each(|(w, x)| *w += d * x);
            }
            if i == 0 {
                break;
            }
            // back through W and the tanh that produced `input`
            let mut next = vec![0.0; layer.cols];
            for (r, d) in delta.iter().enumerate() {
                let w = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                next.iter_mut().zip(w).for_each(|(n, w)| *n += d * w);
            }
            next.iter_mut()
                .zip(input)
                .for_each(|(n, a)| *n *= 1.0 - a * a);
            delta = next;
        }
    }

    /// `params += k * grad`.
    pub fn apply(&mut self, grad: &MlpGrad, k: f64) {
        for (a, b) in self.layers.iter_mut().zip(&grad.layers) {
            a.weights
                .iter_mut()
                .zip(&b.weights)
                .for_each(|(x, y)| *x += k * y);
            a.bias
                .iter_mut()
                .zip(&b.bias)
                .for_each(|(x, y)| *x += k * y);
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Mutable access to the `i`-th parameter in [`MlpParams::flat`] order.
    pub fn param_mut(&mut self, mut i: usize) -> &mut f64 {
        for l in &mut self.layers {
            if i < l.weights.len() {
                return &mut l.weights[i];
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return &mut l.bias[i];
            }
            i -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub fn is_finite(&self) -> bool {
        self.flat().iter().all(|v| v.is_finite())
    }
}

const CHECKPOINT_HEADER: &str = "wpt-mlp v1";

fn hex_line(tag: &str, values: &[f64]) -> String {
    let mut s = String::from(tag);
    for v in values {
        let _ = write!(s, " {:016x}", v.to_bits());
    }
    s
}

/// Serialize named networks; values are stored as IEEE-754 bit patterns.
pub fn checkpoint_to_text(nets: &[(String, MlpParams)]) -> String {
    let mut out = format!("{CHECKPOINT_HEADER}\nnetworks {}\n", nets.len());
    for (name, net) in nets {
        let _ = writeln!(
            out,
            "network {name} {} {}",
            net.head.name(),
            net.layers.len()
        );
        for l in &net.layers {
            let _ = writeln!(out, "layer {} {}", l.rows, l.cols);
            out.push_str(&hex_line("w", &l.weights));
            out.push('\n');
            out.push_str(&hex_line("b", &l.bias));
            out.push('\n');
        }
    }
    out
}

pub fn checkpoint_from_text(text: &str) -> Result<Vec<(String, MlpParams)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Config {
            line: 0,
            msg: format!("checkpoint truncated, expected {what}"),
        })
    };
    let bad = |line: usize, msg: &str| Error::Config {
        line,
        msg: format!("checkpoint: {msg}"),
    };
    let (n, header) = next("header")?;
    if header != CHECKPOINT_HEADER {
        return Err(bad(n, "unknown header"));
    }
    let (n, l) = next("network count")?;
    let count: usize = l
        .strip_prefix("networks ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(n, "expected `networks <count>`"))?;
    let mut nets = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, l) = next("network")?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        let [tag, name, head, depth] = parts[..] else {
            return Err(bad(n, "expected `network <name> <head> <layers>`"));
        };
        if tag != "network" {
            return Err(bad(n, "expected `network`"));
        }
        let head = match head {
            "softmax" => Head::Softmax,
            "scalar" => Head::Scalar,
            _ => return Err(bad(n, "unknown head")),
        };
        let depth: usize = depth.parse().map_err(|_| bad(n, "bad layer count"))?;
        let mut layers = Vec::with_capacity(depth);
        for _ in 0..depth {
            let (n, l) = next("layer")?;
            let dims: Vec<usize> = l
                .strip_prefix("layer ")
                .map(|d| {
                    d.split_whitespace()
                        .filter_map(|v| v.parse().ok())
                        .collect()
                })
                .unwrap_or_default();
            let [rows, cols] = dims[..] else {
                return Err(bad(n, "expected `layer <rows> <cols>`"));
            };
            let mut read = |tag: &str, len: usize| -> Result<Vec<f64>> {
                let (n, l) = next(tag)?;
                let mut it = l.split_whitespace();
                if it.next() != Some(tag) {
                    return Err(bad(n, &format!("expected `{tag}` line")));
                }
                let vals = it
                    .map(|h| u64::from_str_radix(h, 16).map(f64::from_bits))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad(n, "bad hex value"))?;
                if vals.len() != len {
                    return Err(bad(n, "wrong value count"));
                }
                Ok(vals)
            };
            let weights = read("w", rows * cols)?;
            let bias = read("b", rows)?;
            layers.push(Dense {
                rows,
                cols,
                weights,
                bias,
            });
        }
        nets.push((name.to_string(), MlpParams { layers, head }));
    }
    Ok(nets)
}

pub fn save_checkpoint(path: &Path, nets: &[(String, MlpParams)]) -> Result<()> {
    std::fs::write(path, checkpoint_to_text(nets))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Vec<(String, MlpParams)>> {
    checkpoint_from_text(&std::fs::read_to_string(path)?)
}
