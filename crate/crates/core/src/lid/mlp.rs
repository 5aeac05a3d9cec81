//! Multi-layer perceptron over sparse inputs.
//!
//! Layer 0 maps the hashed input space to the first hidden layer and is
//! evaluated sparsely: only rows of active input buckets are read or
//! updated. Hidden layers use ReLU and inverted dropout; the output layer is
//! linear and followed by a softmax evaluated in `f64`.

use std::collections::HashMap;
use std::fmt::Debug;
use std::iter::Sum;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::FeatureVector;
use crate::{Error, Result};

pub trait Scalar: Float + Sum + Debug + Send + Sync + 'static {}
impl<T: Float + Sum + Debug + Send + Sync + 'static> Scalar for T {}

fn cast<F: Scalar>(x: f64) -> F {
    F::from(x).unwrap()
}

/// Weights are `inputs x outputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<F> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<F>,
    pub bias: Vec<F>,
}

impl<F: Scalar> Layer<F> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![F::zero(); inputs * outputs],
            bias: vec![F::zero(); outputs],
        }
    }

    fn uniform(inputs: usize, outputs: usize, bound: f64, rng: &mut impl Rng) -> Self {
        let weights = (0..inputs * outputs)
            .map(|_| cast(rng.random_range(-bound..=bound)))
            .collect();
        Layer {
            inputs,
            outputs,
            weights,
            bias: vec![F::zero(); outputs],
        }
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.weights[i * self.outputs..(i + 1) * self.outputs]
    }

    fn forward_dense(&self, x: &[F]) -> Vec<F> {
        let mut out = self.bias.clone();
        for (i, &xi) in x.iter().enumerate() {
            if xi != F::zero() {
                axpy(xi, self.row(i), &mut out);
            }
        }
        out
    }

    fn forward_sparse(&self, fv: &FeatureVector) -> Vec<F> {
        let mut out = self.bias.clone();
        for (&i, &v) in fv.indices.iter().zip(&fv.values) {
            axpy(cast(v), self.row(i as usize), &mut out);
        }
        out
    }
}

#[inline]
fn axpy<F: Scalar>(a: F, x: &[F], y: &mut [F]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

/// Eight independent partial sums so the loop vectorizes.
#[inline]
fn dot<F: Scalar>(x: &[F], y: &[F]) -> F {
    let mut acc = [F::zero(); 8];
    let xs = x.chunks_exact(8);
    let ys = y.chunks_exact(8);
    let tail: F = xs.remainder().iter().zip(ys.remainder()).map(|(&a, &b)| a * b).sum();
    for (a, b) in xs.zip(ys) {
        for k in 0..8 {
            acc[k] = acc[k] + a[k] * b[k];
        }
    }
    acc.iter().copied().sum::<F>() + tail
}

/// Numerically stable softmax in `f64`.
pub fn softmax<F: Scalar>(logits: &[F]) -> Vec<f64> {
    let z: Vec<f64> = logits.iter().map(|l| l.to_f64().unwrap()).collect();
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<F> {
    pub layers: Vec<Layer<F>>,
}

/// Per-layer activations kept for backpropagation.
struct Trace<F> {
    /// Post-activation output of each hidden layer, dropout applied.
    hidden: Vec<Vec<F>>,
    /// Per-unit multiplier of each hidden layer: 0 where ReLU or dropout
    /// zeroed the unit, the dropout scale otherwise.
    gates: Vec<Vec<F>>,
    logits: Vec<F>,
}

/// Accumulated gradient. Rows of layer 0 are kept sparsely.
#[derive(Debug, Clone)]
pub struct Gradient<F> {
    pub input_rows: HashMap<u32, Vec<F>>,
    pub input_bias: Vec<F>,
    /// `(weights, bias)` of layers 1 and up.
    pub dense: Vec<(Vec<F>, Vec<F>)>,
    pub samples: usize,
    pub loss: f64,
}

impl<F: Scalar> Gradient<F> {
    pub fn zeros(mlp: &Mlp<F>) -> Self {
        Gradient {
            input_rows: HashMap::new(),
            input_bias: vec![F::zero(); mlp.layers[0].outputs],
            dense: mlp.layers[1..]
                .iter()
                .map(|l| (vec![F::zero(); l.weights.len()], vec![F::zero(); l.outputs]))
                .collect(),
            samples: 0,
            loss: 0.0,
        }
    }

    /// Adds `other` into `self`. Summation order per parameter is the order
    /// of `add` calls, so a fixed reduction order gives fixed results.
    pub fn add(&mut self, other: &Gradient<F>) {
        for (row, g) in &other.input_rows {
            match self.input_rows.get_mut(row) {
                Some(acc) => axpy(F::one(), g, acc),
                None => {
                    self.input_rows.insert(*row, g.clone());
                }
            }
        }
        axpy(F::one(), &other.input_bias, &mut self.input_bias);
        for ((w, b), (ow, ob)) in self.dense.iter_mut().zip(&other.dense) {
            axpy(F::one(), ow, w);
            axpy(F::one(), ob, b);
        }
        self.samples += other.samples;
        self.loss += other.loss;
    }

    /// Dense copy in the parameter order of [`Mlp::params`].
    pub fn flatten(&self, mlp: &Mlp<F>) -> Vec<F> {
        let l0 = &mlp.layers[0];
        let mut out = vec![F::zero(); l0.weights.len()];
        for (&r, g) in &self.input_rows {
            out[r as usize * l0.outputs..(r as usize + 1) * l0.outputs].copy_from_slice(g);
        }
        out.extend_from_slice(&self.input_bias);
        for (w, b) in &self.dense {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

impl<F: Scalar> Mlp<F> {
    /// Uniform initialization: layer 0 in `[-input_bound, input_bound]`,
    /// later layers in `[-b, b]` with `b = sqrt(6 / fan_in)`. Biases start
    /// at zero.
    pub fn new(dim: usize, hidden: &[usize], outputs: usize, input_bound: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = vec![dim];
        sizes.extend_from_slice(hidden);
        sizes.push(outputs);
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let bound = if i == 0 {
                    input_bound
                } else {
                    (6.0 / w[0] as f64).sqrt()
                };
                Layer::uniform(w[0], w[1], bound, &mut rng)
            })
            .collect();
        Mlp { layers }
    }

    pub fn zeros(dim: usize, hidden: &[usize], outputs: usize) -> Self {
        let mut sizes = vec![dim];
        sizes.extend_from_slice(hidden);
        sizes.push(outputs);
        Mlp {
            layers: sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().unwrap().outputs
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.outputs).collect()
    }

    /// Every parameter: each layer's weights, then its bias.
    pub fn params(&self) -> impl Iterator<Item = &F> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut F> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    fn check_dim(&self, fv: &FeatureVector) -> Result<()> {
        if fv.dim != self.dim() || fv.indices.last().is_some_and(|&i| i as usize >= self.dim()) {
            return Err(Error::contract(format!(
                "feature dimension {} does not match model dimension {}",
                fv.dim,
                self.dim()
            )));
        }
        Ok(())
    }

    /// `dropout` is `(rate, rng)` in training mode and `None` at inference.
    fn trace(&self, fv: &FeatureVector, mut dropout: Option<(f64, &mut ChaCha8Rng)>) -> Trace<F> {
        let n = self.layers.len();
        let mut hidden = Vec::with_capacity(n - 1);
        let mut gates = Vec::with_capacity(n - 1);
        let mut z = self.layers[0].forward_sparse(fv);
        for l in 1..n {
            let mut gate = vec![F::zero(); z.len()];
            let keep_scale = match &dropout {
                Some((rate, _)) => cast::<F>(1.0 / (1.0 - rate)),
                None => F::one(),
            };
            for (j, g) in gate.iter_mut().enumerate() {
                let kept = match &mut dropout {
                    Some((rate, rng)) => rng.random::<f64>() >= *rate,
                    None => true,
                };
                if kept && z[j] > F::zero() {
                    *g = keep_scale;
                }
            }
            let a: Vec<F> = z.iter().zip(&gate).map(|(&v, &g)| v * g).collect();
            z = self.layers[l].forward_dense(&a);
            hidden.push(a);
            gates.push(gate);
        }
        Trace {
            hidden,
            gates,
            logits: z,
        }
    }

    pub fn logits(&self, fv: &FeatureVector) -> Result<Vec<F>> {
        self.check_dim(fv)?;
        Ok(self.trace(fv, None).logits)
    }

    /// Inference-mode class probabilities.
    pub fn predict(&self, fv: &FeatureVector) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(fv)?))
    }

    /// Training-mode probabilities with a dropout mask drawn from `rng`.
    pub fn predict_train(&self, fv: &FeatureVector, rate: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        self.check_dim(fv)?;
        Ok(softmax(&self.trace(fv, Some((rate, rng))).logits))
    }

    /// Hidden activations of inference mode, or of training mode with the
    /// given dropout.
    pub fn hidden_activations(&self, fv: &FeatureVector, dropout: Option<(f64, &mut ChaCha8Rng)>) -> Vec<Vec<F>> {
        self.trace(fv, dropout).hidden
    }

    /// Cross-entropy of one sample; adds its gradient into `grad`.
    pub fn backprop(
        &self,
        fv: &FeatureVector,
        target: usize,
        dropout: Option<(f64, &mut ChaCha8Rng)>,
        grad: &mut Gradient<F>,
    ) -> Result<f64> {
        self.check_dim(fv)?;
        if target >= self.outputs() {
            return Err(Error::contract(format!("label index {target} out of range")));
        }
        let t = self.trace(fv, dropout);
        let p = softmax(&t.logits);
        let loss = -p[target].max(f64::MIN_POSITIVE).ln();
        let mut delta: Vec<F> = p
            .iter()
            .enumerate()
            .map(|(k, &pk)| cast(if k == target { pk - 1.0 } else { pk }))
            .collect();
        for l in (1..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &t.hidden[l - 1];
            let (gw, gb) = &mut grad.dense[l - 1];
            axpy(F::one(), &delta, gb);
            let mut prev = vec![F::zero(); layer.inputs];
            for (i, &ai) in input.iter().enumerate() {
                let gate = t.gates[l - 1][i];
                if gate == F::zero() {
                    continue;
                }
                axpy(ai, &delta, &mut gw[i * layer.outputs..(i + 1) * layer.outputs]);
                prev[i] = dot(layer.row(i), &delta) * gate;
            }
            delta = prev;
        }
        axpy(F::one(), &delta, &mut grad.input_bias);
        let width = self.layers[0].outputs;
        for (&i, &v) in fv.indices.iter().zip(&fv.values) {
            let row = grad.input_rows.entry(i).or_insert_with(|| vec![F::zero(); width]);
            axpy(cast(v), &delta, row);
        }
        grad.samples += 1;
        grad.loss += loss;
        Ok(loss)
    }

    /// Cast every parameter to another float type.
    pub fn cast<G: Scalar>(&self) -> Mlp<G> {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    inputs: l.inputs,
                    outputs: l.outputs,
                    weights: l.weights.iter().map(|w| G::from(*w).unwrap()).collect(),
                    bias: l.bias.iter().map(|w| G::from(*w).unwrap()).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lid::Featurizer;

    fn fv(dim: usize, entries: &[(u32, f64)]) -> FeatureVector {
        FeatureVector {
            indices: entries.iter().map(|e| e.0).collect(),
            values: entries.iter().map(|e| e.1).collect(),
            dim,
        }
    }

    #[test]
    fn zero_output_layer_is_uniform() {
        let mut m = Mlp::<f32>::new(64, &[8, 8], 5, 0.5, 3);
        let last = m.layers.last_mut().unwrap();
        last.weights.iter_mut().for_each(|w| *w = 0.0);
        let p = m
            .predict(&Featurizer::new(64, 1).featurize("some window text"))
            .unwrap();
        assert!(p.iter().all(|&x| (x - 0.2).abs() < 1e-12));
    }

    #[test]
    fn hand_computed_two_label_net() {
        // input dim 2 -> hidden 2 (ReLU) -> 2 logits
        let mut m = Mlp::<f64>::zeros(2, &[2], 2);
        m.layers[0].weights = vec![1.0, -1.0, 0.5, 2.0];
        m.layers[0].bias = vec![0.0, 0.5];
        m.layers[1].weights = vec![1.0, 0.0, -1.0, 1.0];
        m.layers[1].bias = vec![0.0, 0.0];
        // x = (1, 1): z1 = (1.5, 1.5) -> h = (1.5, 1.5); logits = (0, 1.5)
        let p = m.predict(&fv(2, &[(0, 1.0), (1, 1.0)])).unwrap();
        let e = (1.5f64).exp();
        assert!((p[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert!((p[1] - e / (1.0 + e)).abs() < 1e-15);
        // x = (1, 0): z1 = (1, -0.5) -> h = (1, 0); logits = (1, 0)
        let p = m.predict(&fv(2, &[(0, 1.0)])).unwrap();
        assert!((p[0] - 1.0f64.exp() / (1.0f64.exp() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn inference_is_repeatable_and_normalized() {
        let m = Mlp::<f32>::new(500, &[16, 16, 16], 7, 1.0, 11);
        let x = Featurizer::new(500, 2).featurize("abcdefghijklmnopqrstuvwxyz abcdefghijklmnopqrstuvw");
        let a = m.predict(&x).unwrap();
        assert_eq!(a, m.predict(&x).unwrap());
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        assert!(a.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn dimension_mismatch_is_a_contract_violation() {
        let m = Mlp::<f32>::new(10, &[4], 2, 1.0, 0);
        let err = m.predict(&Featurizer::new(20, 0).featurize("abcdef")).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
}
