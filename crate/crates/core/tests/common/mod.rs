//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use paygan::data::Label;
use paygan::nn::{Activation, LayerSpec, Network};
use paygan::Tensor;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Plain-loop forward pass. Returns the output rows and every pre-activation value
/// of layers whose activation has a kink (leaky ReLU).
pub fn forward_oracle(net: &Network, x: &Tensor) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows: Vec<Vec<f64>> = (0..x.rows()).map(|r| x.row(r).to_vec()).collect();
    let mut kinks = Vec::new();
    for layer in net.layers() {
        let w = layer.weights();
        let b = layer.bias().data();
        let act = layer.activation();
        rows = rows
            .iter()
            .map(|input| {
                (0..layer.outputs())
                    .map(|o| {
                        let mut pre = b[o];
                        for (i, xi) in input.iter().enumerate() {
                            pre += w.get2(o, i) * xi;
                        }
                        if matches!(act, Activation::LeakyRelu { .. }) {
                            kinks.push(pre);
                        }
                        act.apply(pre)
                    })
                    .collect()
            })
            .collect();
    }
    (rows, kinks)
}

/// Smallest |pre-activation| at a leaky-ReLU kink over a composition of networks.
pub fn kink_margin(nets: &[&Network], x: &Tensor) -> f64 {
    let mut current = x.clone();
    let mut margin = f64::INFINITY;
    for net in nets {
        let (rows, kinks) = forward_oracle(net, &current);
        margin = kinks.iter().fold(margin, |m, v| m.min(v.abs()));
        current = Tensor::from_rows(&rows).unwrap();
    }
    margin
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize], scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

pub fn random_activation(rng: &mut ChaCha8Rng) -> Activation {
    match rng.random_range(0..4) {
        0 => Activation::leaky(rng.random_range(0.05..0.5)),
        1 => Activation::Sigmoid,
        2 => Activation::Tanh,
        _ => Activation::Identity,
    }
}

/// Random network with 1–3 layers and widths ≤ 16; biases are randomized too.
pub fn random_network(rng: &mut ChaCha8Rng, input: usize, output: usize) -> Network {
    let n_layers = rng.random_range(1..=3);
    let mut dims = vec![input];
    for _ in 1..n_layers {
        dims.push(rng.random_range(1..=16));
    }
    dims.push(output);
    let specs: Vec<LayerSpec> = dims
        .windows(2)
        .map(|w| LayerSpec {
            inputs: w[0],
            outputs: w[1],
            activation: random_activation(rng),
        })
        .collect();
    let mut net = Network::init(&specs, rng).unwrap();
    for p in net.params_mut() {
        if p.rank() == 1 {
            for v in p.data_mut() {
                *v = rng.random_range(-0.5..0.5);
            }
        }
    }
    net
}

/// Central difference `(f(θ+h) − f(θ−h)) / 2h` for every entry of the selected parameter tensors.
pub fn finite_difference<N>(
    target: &mut N,
    params: fn(&mut N) -> Vec<&mut Tensor>,
    loss: &dyn Fn(&N) -> f64,
    h: f64,
) -> Vec<Vec<f64>> {
    let sizes: Vec<usize> = params(target).iter().map(|p| p.len()).collect();
    let mut out = Vec::with_capacity(sizes.len());
    for (t, &n) in sizes.iter().enumerate() {
        let mut g = Vec::with_capacity(n);
        for k in 0..n {
            let orig = params(target)[t].data()[k];
            params(target)[t].data_mut()[k] = orig + h;
            let up = loss(target);
            params(target)[t].data_mut()[k] = orig - h;
            let down = loss(target);
            params(target)[t].data_mut()[k] = orig;
            g.push((up - down) / (2.0 * h));
        }
        out.push(g);
    }
    out
}

/// `|a − n| / max(|a|, |n|, floor)`; the floor keeps vanishing gradients from dividing by ~0.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    const FLOOR: f64 = 1e-6;
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

/// Worst relative error between analytic tensors and numeric gradients.
pub fn worst_error(analytic: &[&Tensor], numeric: &[Vec<f64>]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.iter().zip(numeric) {
        assert_eq!(a.len(), n.len());
        for (x, y) in a.data().iter().zip(n) {
            worst = worst.max(relative_error(*x, *y));
        }
    }
    worst
}

/// Mann–Whitney AUC: fraction of (fake, real) pairs where the fake scores higher, ties count ½.
pub fn pair_count_auc(fake_scores: &[f64], labels: &[Label]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in fake_scores.iter().enumerate() {
        if labels[i] != Label::Fake {
            continue;
        }
        for (j, &sj) in fake_scores.iter().enumerate() {
            if labels[j] != Label::Real {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}
