use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Activation;
use crate::autodiff::{Jet2, Scalar};
use crate::error::{Error, Result};

/// A dense network `N([inputs]; θ)` with a single linear output.
///
/// Parameters are stored flat. For each layer `l` in order the weight
/// matrix `W_l` (shape `n_l × n_{l-1}`, row-major) is followed by the bias
/// `b_l`. This ordering is the one used by gradients and checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    layer_dims: Vec<usize>,
    activation: Activation,
    params: Vec<f64>,
}

fn validate_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 2 {
        return Err(Error::InvalidDims(format!(
            "need at least an input and an output width, got {layer_dims:?}"
        )));
    }
    if layer_dims.contains(&0) {
        return Err(Error::InvalidDims(format!(
            "widths must be positive, got {layer_dims:?}"
        )));
    }
    if layer_dims[layer_dims.len() - 1] != 1 {
        return Err(Error::InvalidDims(format!(
            "output width must be 1, got {layer_dims:?}"
        )));
    }
    Ok(())
}

impl DenseNet {
    /// `Σ_l (n_l·n_{l-1} + n_l)`.
    pub fn param_count_for(layer_dims: &[usize]) -> usize {
        layer_dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }

    pub fn zeros(layer_dims: &[usize], activation: Activation) -> Result<Self> {
        validate_dims(layer_dims)?;
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            activation,
            params: vec![0.0; Self::param_count_for(layer_dims)],
        })
    }

    /// Glorot-uniform weights, zero biases, deterministic in `seed`.
    pub fn init(layer_dims: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(layer_dims, activation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in 0..net.num_layers() {
            let (n_in, n_out) = (net.layer_dims[layer], net.layer_dims[layer + 1]);
            let bound = (6.0 / (n_in + n_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            for w in net.weights_mut(layer) {
                *w = dist.sample(&mut rng);
            }
        }
        Ok(net)
    }

    pub fn from_params(
        layer_dims: &[usize],
        activation: Activation,
        params: Vec<f64>,
    ) -> Result<Self> {
        validate_dims(layer_dims)?;
        let expected = Self::param_count_for(layer_dims);
        if params.len() != expected {
            return Err(Error::WidthMismatch {
                expected,
                got: params.len(),
            });
        }
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            activation,
            params,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_width(&self) -> usize {
        self.layer_dims[0]
    }

    /// Number of affine layers (hidden layers plus the output layer).
    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Offset of layer `l`'s weights in the flat parameter vector.
    pub fn layer_offset(&self, layer: usize) -> usize {
        Self::param_count_for(&self.layer_dims[..=layer])
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        let start = self.layer_offset(layer);
        let len = self.layer_dims[layer] * self.layer_dims[layer + 1];
        &self.params[start..start + len]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let start = self.layer_offset(layer);
        let len = self.layer_dims[layer] * self.layer_dims[layer + 1];
        &mut self.params[start..start + len]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let start = self.layer_offset(layer) + self.layer_dims[layer] * self.layer_dims[layer + 1];
        &self.params[start..start + self.layer_dims[layer + 1]]
    }

    pub fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        let start = self.layer_offset(layer) + self.layer_dims[layer] * self.layer_dims[layer + 1];
        let len = self.layer_dims[layer + 1];
        &mut self.params[start..start + len]
    }

    /// Plain evaluation.
    pub fn forward(&self, inputs: &[f64]) -> Result<f64> {
        if inputs.len() != self.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.input_width(),
                got: inputs.len(),
            });
        }
        let mut act = inputs.to_vec();
        let last = self.num_layers() - 1;
        for layer in 0..self.num_layers() {
            let (n_in, n_out) = (self.layer_dims[layer], self.layer_dims[layer + 1]);
            let w = self.weights(layer);
            let b = self.bias(layer);
            let mut next = Vec::with_capacity(n_out);
            for j in 0..n_out {
                let row = &w[j * n_in..(j + 1) * n_in];
                let mut acc = b[j];
                for (wk, ak) in row.iter().zip(&act) {
                    acc += wk * ak;
                }
                next.push(if layer == last {
                    acc
                } else {
                    self.activation.apply(acc)
                });
            }
            act = next;
        }
        Ok(act[0])
    }

    /// Jet of the output with inputs `t → (t,1,0,0)`, `x → (x,0,1,0)`,
    /// followed by `extra` jets.
    pub fn jet_forward(&self, t: f64, x: f64, extra: &[Jet2]) -> Result<Jet2> {
        let mut inputs = Vec::with_capacity(2 + extra.len());
        inputs.push(Jet2::time(t));
        inputs.push(Jet2::space(x));
        inputs.extend_from_slice(extra);
        eval_jets(&self.layer_dims, self.activation, &self.params, &inputs)
    }

    pub fn to_doc(&self) -> NetDoc {
        NetDoc {
            layer_dims: self.layer_dims.clone(),
            activation: self.activation,
            layers: (0..self.num_layers())
                .map(|l| LayerDoc {
                    weights: self.weights(l).to_vec(),
                    bias: self.bias(l).to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &NetDoc) -> Result<Self> {
        validate_dims(&doc.layer_dims)?;
        if doc.layers.len() != doc.layer_dims.len() - 1 {
            return Err(Error::parse("network", "layer count does not match layer_dims"));
        }
        let mut params = Vec::with_capacity(Self::param_count_for(&doc.layer_dims));
        for (l, layer) in doc.layers.iter().enumerate() {
            let (n_in, n_out) = (doc.layer_dims[l], doc.layer_dims[l + 1]);
            if layer.weights.len() != n_in * n_out || layer.bias.len() != n_out {
                return Err(Error::parse("network", format!("layer {l} has wrong shape")));
            }
            params.extend_from_slice(&layer.weights);
            params.extend_from_slice(&layer.bias);
        }
        Self::from_params(&doc.layer_dims, doc.activation, params)
    }
}

/// Serialized form of a [`DenseNet`]: row-major weights and biases per layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetDoc {
    pub layer_dims: Vec<usize>,
    pub activation: Activation,
    pub layers: Vec<LayerDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerDoc {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Evaluates a network given by `layer_dims` and flat `params` on jet inputs.
///
/// Generic over the scalar so the same code runs on `f64` and on tape
/// variables. The value slot follows exactly the arithmetic of
/// [`DenseNet::forward`].
pub fn eval_jets<T: Scalar>(
    layer_dims: &[usize],
    activation: Activation,
    params: &[T],
    inputs: &[Jet2<T>],
) -> Result<Jet2<T>> {
    if inputs.len() != layer_dims[0] {
        return Err(Error::WidthMismatch {
            expected: layer_dims[0],
            got: inputs.len(),
        });
    }
    let expected = DenseNet::param_count_for(layer_dims);
    if params.len() != expected {
        return Err(Error::WidthMismatch {
            expected,
            got: params.len(),
        });
    }
    if !activation.is_smooth() {
        return Err(Error::NonSmoothActivation(activation));
    }
    let mut act = inputs.to_vec();
    let mut offset = 0;
    let last = layer_dims.len() - 2;
    for layer in 0..=last {
        let (n_in, n_out) = (layer_dims[layer], layer_dims[layer + 1]);
        let w = &params[offset..offset + n_in * n_out];
        let b = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
        offset += n_in * n_out + n_out;
        let mut next = Vec::with_capacity(n_out);
        for j in 0..n_out {
            let mut acc = Jet2::constant(b[j]);
            for k in 0..n_in {
                acc = acc + act[k].scale(w[j * n_in + k]);
            }
            next.push(if layer == last {
                acc
            } else {
                acc.activate(activation)?
            });
        }
        act = next;
    }
    Ok(act[0])
}
