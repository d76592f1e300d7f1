//! Dense feed-forward networks with hand-written backpropagation, the clamped log terms of the
//! adversarial objective, and the Adam optimizer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{self, Tensor};

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before any logarithm.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu { alpha: f64 },
    Sigmoid,
    Tanh,
    Identity,
}

impl Activation {
    pub fn leaky(alpha: f64) -> Self {
        Activation::LeakyRelu { alpha }
    }

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::LeakyRelu { alpha } => {
                if x > 0.0 {
                    x
                } else {
                    alpha * x
                }
            }
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the pre-activation `x` and the activation output `y`.
    #[inline]
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::LeakyRelu { alpha } => {
                if x > 0.0 {
                    1.0
                } else {
                    alpha
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    fn validate(self) -> Result<()> {
        if let Activation::LeakyRelu { alpha } = self {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Argument(format!(
                    "leaky slope must lie in (0, 1), got {alpha}"
                )));
            }
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Affine map `y = act(x·Wᵀ + b)` with `W` stored `[out × in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    weights: Tensor,
    bias: Tensor,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        activation.validate()?;
        if weights.rank() != 2 || bias.rank() != 1 || bias.len() != weights.rows() {
            return Err(Error::Dimension(format!(
                "layer weights {:?} and bias {:?} disagree",
                weights.shape(),
                bias.shape()
            )));
        }
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init(inputs: usize, outputs: usize, activation: Activation, rng: &mut impl Rng) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::Dimension("layer sizes must be positive".into()));
        }
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let w = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        DenseLayer::new(
            Tensor::new(vec![outputs, inputs], w)?,
            Tensor::zeros(&[outputs]),
            activation,
        )
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn bias(&self) -> &Tensor {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn preactivation(&self, x: &Tensor) -> Result<Tensor> {
        tensor::add(&tensor::matmul_nt(x, &self.weights)?, &self.bias)
    }
}

/// Layer shape and activation, without parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    layers: Vec<DenseLayer>,
}

/// Intermediates recorded by [`Network::forward`] for a single backward pass.
#[derive(Debug)]
pub struct GradTape {
    inputs: Vec<Tensor>,
    preacts: Vec<Tensor>,
    output: Tensor,
}

impl GradTape {
    pub fn batch_size(&self) -> usize {
        self.output.rows()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Tensor,
    pub bias: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
    /// Gradient with respect to the network input, `[B × input_dim]`.
    pub input: Tensor,
}

impl Gradients {
    /// Parameter gradients in the same order as [`Network::params`].
    pub fn tensors(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .flat_map(|g| [&g.weights, &g.bias])
            .collect()
    }
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Dimension("a network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::Dimension(format!(
                    "layer {i} emits {} values but layer {} expects {}",
                    pair[0].outputs(),
                    i + 1,
                    pair[1].inputs()
                )));
            }
        }
        Ok(Network { layers })
    }

    pub fn init(specs: &[LayerSpec], rng: &mut impl Rng) -> Result<Self> {
        let layers = specs
            .iter()
            .map(|s| DenseLayer::init(s.inputs, s.outputs, s.activation, rng))
            .collect::<Result<Vec<_>>>()?;
        Network::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers
            .iter()
            .map(|l| LayerSpec {
                inputs: l.inputs(),
                outputs: l.outputs(),
                activation: l.activation,
            })
            .collect()
    }

    /// Parameters as `[W0, b0, W1, b1, ...]`.
    pub fn params(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .flat_map(|l| [&l.weights, &l.bias])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.rank() != 2 || x.cols() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "network expects [B x {}] input, got {:?}",
                self.input_dim(),
                x.shape()
            )));
        }
        Ok(())
    }

    /// Forward pass without recording intermediates.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut h = x.clone();
        for layer in &self.layers {
            let act = layer.activation;
            h = layer.preactivation(&h)?.map(|v| act.apply(v));
        }
        Ok(h)
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, GradTape)> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut preacts = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for layer in &self.layers {
            let act = layer.activation;
            let z = layer.preactivation(&h)?;
            let y = z.map(|v| act.apply(v));
            inputs.push(h);
            preacts.push(z);
            h = y;
        }
        let tape = GradTape {
            inputs,
            preacts,
            output: h.clone(),
        };
        Ok((h, tape))
    }

    fn check_tape(&self, tape: &GradTape, dy: &Tensor) -> Result<()> {
        let consistent = tape.inputs.len() == self.layers.len()
            && tape.preacts.len() == self.layers.len()
            && self.layers.iter().zip(&tape.inputs).all(|(l, x)| x.cols() == l.inputs())
            && self.layers.iter().zip(&tape.preacts).all(|(l, z)| z.cols() == l.outputs());
        if !consistent {
            return Err(Error::State(
                "gradient tape was not recorded by this network".into(),
            ));
        }
        if dy.shape() != tape.output.shape() {
            return Err(Error::State(format!(
                "output gradient {:?} does not match the recorded batch {:?}",
                dy.shape(),
                tape.output.shape()
            )));
        }
        Ok(())
    }

    /// Backpropagates `dL/dy` through the recorded pass. Consumes the tape.
    pub fn backward(&self, tape: GradTape, dy: &Tensor) -> Result<Gradients> {
        self.backprop(tape, dy, true)
    }

    /// Like [`Network::backward`] but only returns `dL/dx`; parameter gradients are skipped.
    pub fn backward_input(&self, tape: GradTape, dy: &Tensor) -> Result<Tensor> {
        Ok(self.backprop(tape, dy, false)?.input)
    }

    fn backprop(&self, tape: GradTape, dy: &Tensor, with_params: bool) -> Result<Gradients> {
        self.check_tape(&tape, dy)?;
        let GradTape {
            inputs,
            preacts,
            output,
        } = tape;
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = dy.clone();
        let n = self.layers.len();
        for i in (0..n).rev() {
            let layer = &self.layers[i];
            let act = layer.activation;
            let y = if i + 1 < n { &inputs[i + 1] } else { &output };
            let mut delta = upstream;
            for ((d, &z), &yv) in delta
                .data_mut()
                .iter_mut()
                .zip(preacts[i].data())
                .zip(y.data())
            {
                *d *= act.derivative(z, yv);
            }
            if with_params {
                grads.push(LayerGrad {
                    weights: tensor::matmul_tn(&delta, &inputs[i])?,
                    bias: delta.sum_rows(),
                });
            }
            upstream = tensor::matmul(&delta, &layer.weights)?;
        }
        grads.reverse();
        Ok(Gradients {
            layers: grads,
            input: upstream,
        })
    }
}

/// Mean of `log p` (`target_is_real`) or `log(1 - p)` over the batch, with clamping.
pub fn bce_terms(p: &Tensor, target_is_real: bool) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Domain("log-likelihood of an empty batch".into()));
    }
    let sum: f64 = p
        .data()
        .iter()
        .map(|&v| {
            let c = v.clamp(PROB_EPS, 1.0 - PROB_EPS);
            if target_is_real {
                c.ln()
            } else {
                (1.0 - c).ln()
            }
        })
        .sum();
    Ok(sum / p.len() as f64)
}

/// Elementwise derivative of [`bce_terms`] with respect to `p`. Zero where the clamp is active.
pub fn bce_terms_grad(p: &Tensor, target_is_real: bool) -> Result<Tensor> {
    if p.is_empty() {
        return Err(Error::Domain("log-likelihood of an empty batch".into()));
    }
    let n = p.len() as f64;
    Ok(p.map(|v| {
        if !(PROB_EPS..=1.0 - PROB_EPS).contains(&v) {
            0.0
        } else if target_is_real {
            1.0 / (n * v)
        } else {
            -1.0 / (n * (1.0 - v))
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && self.lr.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.eps.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "invalid Adam hyperparameters {self:?}"
            )))
        }
    }
}

/// First and second moment estimates for one parameter list.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    /// Number of completed steps.
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &[&Tensor]) -> Self {
        AdamState {
            m: params.iter().map(|p| Tensor::zeros_like(p)).collect(),
            v: params.iter().map(|p| Tensor::zeros_like(p)).collect(),
            t: 0,
        }
    }

    pub fn for_network(net: &Network) -> Self {
        Self::new(&net.params())
    }
}

/// One bias-corrected Adam update. Nothing is modified if any gradient is non-finite.
pub fn adam_step(
    params: &mut [&mut Tensor],
    grads: &[&Tensor],
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<()> {
    cfg.validate()?;
    if params.len() != grads.len() || params.len() != state.m.len() || params.len() != state.v.len()
    {
        return Err(Error::Dimension(format!(
            "adam: {} parameters, {} gradients, {} moment tensors",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for (i, ((p, g), m)) in params.iter().zip(grads).zip(&state.m).enumerate() {
        if p.shape() != g.shape() || p.shape() != m.shape() {
            return Err(Error::Dimension(format!(
                "adam: parameter {i} has shape {:?} but gradient {:?}",
                p.shape(),
                g.shape()
            )));
        }
        if !g.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite gradient for parameter tensor {i} ({})",
                param_name(i)
            )));
        }
    }

    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        for (((pv, &gv), mv), vv) in p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut())
            .zip(v.data_mut())
        {
            *mv = cfg.beta1 * *mv + (1.0 - cfg.beta1) * gv;
            *vv = cfg.beta2 * *vv + (1.0 - cfg.beta2) * gv * gv;
            let m_hat = *mv / c1;
            let v_hat = *vv / c2;
            *pv -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

/// Human name of the i-th tensor in the `[W0, b0, W1, b1, ...]` ordering.
pub fn param_name(i: usize) -> String {
    let kind = if i.is_multiple_of(2) { "weights" } else { "bias" };
    format!("layer {} {kind}", i / 2)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn identity_layer_passes_input_through() {
        let layer = DenseLayer::new(Tensor::identity(3), Tensor::zeros(&[3]), Activation::Identity).unwrap();
        let net = Network::new(vec![layer]).unwrap();
        let x = Tensor::from_rows(&[vec![1.0, -2.0, 3.5], vec![0.0, 4.0, -1.0]]).unwrap();
        assert_eq!(net.forward(&x).unwrap().0, x);
    }

    #[test]
    fn zero_sigmoid_layer_outputs_half() {
        let layer = DenseLayer::new(Tensor::zeros(&[2, 4]), Tensor::zeros(&[2]), Activation::Sigmoid).unwrap();
        let net = Network::new(vec![layer]).unwrap();
        let x = Tensor::full(&[5, 4], 123.0);
        assert!(net.predict(&x).unwrap().data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn two_layer_forward_matches_hand_unrolled() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Network::init(
            &[
                LayerSpec { inputs: 3, outputs: 4, activation: Activation::leaky(0.2) },
                LayerSpec { inputs: 4, outputs: 2, activation: Activation::Tanh },
            ],
            &mut rng,
        )
        .unwrap();
        let x = Tensor::from_rows(&[vec![0.3, -0.7, 1.1], vec![-1.0, 0.5, 0.25]]).unwrap();
        let y = net.predict(&x).unwrap();
        let (l0, l1) = (&net.layers()[0], &net.layers()[1]);
        for b in 0..2 {
            let mut h = [0.0; 4];
            for (o, hv) in h.iter_mut().enumerate() {
                let mut z = l0.bias().data()[o];
                for i in 0..3 {
                    z += l0.weights().get2(o, i) * x.get2(b, i);
                }
                *hv = if z > 0.0 { z } else { 0.2 * z };
            }
            for o in 0..2 {
                let mut z = l1.bias().data()[o];
                for (i, hv) in h.iter().enumerate() {
                    z += l1.weights().get2(o, i) * hv;
                }
                assert!((y.get2(b, o) - z.tanh()).abs() < 1e-12);
            }
        }
        // forward and predict share arithmetic
        assert_eq!(net.forward(&x).unwrap().0, y);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Network::init(
            &[LayerSpec { inputs: 3, outputs: 1, activation: Activation::Sigmoid }],
            &mut rng,
        )
        .unwrap();
        assert!(matches!(net.forward(&Tensor::zeros(&[2, 4])), Err(Error::Dimension(_))));
    }

    #[test]
    fn network_rejects_unchained_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = DenseLayer::init(3, 4, Activation::Identity, &mut rng).unwrap();
        let b = DenseLayer::init(5, 1, Activation::Identity, &mut rng).unwrap();
        assert!(Network::new(vec![a, b]).is_err());
        assert!(DenseLayer::init(3, 4, Activation::leaky(1.5), &mut rng).is_err());
    }

    #[test]
    fn zero_cotangent_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Network::init(
            &[
                LayerSpec { inputs: 4, outputs: 3, activation: Activation::leaky(0.2) },
                LayerSpec { inputs: 3, outputs: 2, activation: Activation::Sigmoid },
            ],
            &mut rng,
        )
        .unwrap();
        let x = Tensor::full(&[3, 4], 0.7);
        let (y, tape) = net.forward(&x).unwrap();
        let g = net.backward(tape, &Tensor::zeros_like(&y)).unwrap();
        assert!(g.tensors().iter().all(|t| t.data().iter().all(|&v| v == 0.0)));
        assert!(g.input.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_layer_mean_loss_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Network::init(
            &[LayerSpec { inputs: 3, outputs: 2, activation: Activation::Identity }],
            &mut rng,
        )
        .unwrap();
        let x = Tensor::from_rows(&[vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 4.0], vec![0.0, 1.0, -2.0], vec![2.0, 2.0, 2.0]])
            .unwrap();
        let (y, tape) = net.forward(&x).unwrap();
        // L = mean over all B*out entries
        let scale = 1.0 / y.len() as f64;
        let g = net.backward(tape, &Tensor::full(y.shape(), scale)).unwrap();
        let col_mean: Vec<f64> = (0..3)
            .map(|j| (0..4).map(|b| x.get2(b, j)).sum::<f64>() * scale)
            .collect();
        for o in 0..2 {
            for (j, m) in col_mean.iter().enumerate() {
                assert!((g.layers[0].weights.get2(o, j) - m).abs() < 1e-15);
            }
            assert!((g.layers[0].bias.data()[o] - 4.0 * scale).abs() < 1e-15);
        }
    }

    #[test]
    fn stale_tape_is_a_state_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = Network::init(&[LayerSpec { inputs: 3, outputs: 2, activation: Activation::Tanh }], &mut rng).unwrap();
        let b = Network::init(&[LayerSpec { inputs: 5, outputs: 2, activation: Activation::Tanh }], &mut rng).unwrap();
        let (_, tape) = a.forward(&Tensor::zeros(&[4, 3])).unwrap();
        assert!(matches!(b.backward(tape, &Tensor::zeros(&[4, 2])), Err(Error::State(_))));
        let (_, tape) = a.forward(&Tensor::zeros(&[4, 3])).unwrap();
        assert!(matches!(a.backward(tape, &Tensor::zeros(&[3, 2])), Err(Error::State(_))));
    }

    #[test]
    fn bce_terms_values() {
        let half = Tensor::full(&[8, 1], 0.5);
        assert!((bce_terms(&half, true).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        assert!((bce_terms(&half, false).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let ones = Tensor::full(&[4, 1], 1.0);
        let v = bce_terms(&ones, true).unwrap();
        assert!(v < 0.0 && v > -2e-12, "{v}");
        // 1 - (1 - eps) is not exactly eps in binary floating point
        assert!((bce_terms(&ones, false).unwrap() - PROB_EPS.ln()).abs() < 1e-3);
        assert!(matches!(bce_terms(&Tensor::zeros(&[0, 1]), true), Err(Error::Domain(_))));
    }

    #[test]
    fn bce_terms_matches_elementwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p: Vec<f64> = (0..50).map(|_| rng.random_range(0.001..0.999)).collect();
        let t = Tensor::vector(p.clone());
        let real: f64 = p.iter().map(|v| v.ln()).sum::<f64>() / 50.0;
        let fake: f64 = p.iter().map(|v| (1.0 - v).ln()).sum::<f64>() / 50.0;
        assert!((bce_terms(&t, true).unwrap() - real).abs() < 1e-12);
        assert!((bce_terms(&t, false).unwrap() - fake).abs() < 1e-12);
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let mut p = Tensor::vector(vec![1.0, -2.0, 3.0]);
        let before = p.clone();
        let g = Tensor::zeros(&[3]);
        let mut st = AdamState::new(&[&p]);
        adam_step(&mut [&mut p], &[&g], &mut st, &AdamConfig::default()).unwrap();
        assert_eq!(p, before);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn adam_first_step_is_signed_lr() {
        let cfg = AdamConfig { lr: 0.01, ..AdamConfig::default() };
        for g in [3.0, -0.25] {
            let mut p = Tensor::vector(vec![0.0]);
            let grad = Tensor::vector(vec![g]);
            let mut st = AdamState::new(&[&p]);
            adam_step(&mut [&mut p], &[&grad], &mut st, &cfg).unwrap();
            assert!((p.data()[0] + 0.01 * f64::signum(g)).abs() < 1e-9);
        }
    }

    #[test]
    fn adam_rejects_non_finite_gradient_without_mutation() {
        let mut p = Tensor::vector(vec![1.0]);
        let mut q = Tensor::vector(vec![2.0]);
        let g_ok = Tensor::vector(vec![1.0]);
        let g_bad = Tensor::vector(vec![f64::NAN]);
        let mut st = AdamState::new(&[&p, &q]);
        let err = adam_step(&mut [&mut p, &mut q], &[&g_ok, &g_bad], &mut st, &AdamConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Numeric(ref m) if m.contains("parameter tensor 1")), "{err}");
        assert_eq!(p.data(), &[1.0]);
        assert_eq!(st.t, 0);
    }
}
