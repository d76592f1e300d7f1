//! Adversarial training of a generator/discriminator pair and discriminator-based detection.
//!
//! The discriminator minimizes `-(mean log D(x) + mean log(1 - D(G(z))))`. The generator
//! minimizes either `mean log(1 - D(G(z)))` (saturating, the literal minimax objective) or
//! `-mean log D(G(z))` (non-saturating). Updates alternate: `d_steps_per_g_step` discriminator
//! steps, then one generator step, each with its own Adam state.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, Split};
use crate::error::{Error, Result};
use crate::nn::{self, Activation, AdamConfig, AdamState, Gradients, LayerSpec, Network, PROB_EPS};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorLoss {
    Saturating,
    NonSaturating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub iterations: u64,
    pub batch_size: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub d_steps_per_g_step: u32,
    pub generator_loss: GeneratorLoss,
    pub seed: u64,
    pub threshold: f64,
    pub latent_dim: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub leaky_slope: f64,
    pub log_every: u64,
    /// Fraction of every discriminator fake minibatch drawn from labeled training-split fakes
    /// instead of the generator. 0 gives the plain two-player objective.
    pub corpus_fake_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            iterations: 10_000,
            batch_size: 64,
            lr_g: adam.lr,
            lr_d: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            eps: adam.eps,
            d_steps_per_g_step: 1,
            generator_loss: GeneratorLoss::NonSaturating,
            seed: 7,
            threshold: 0.5,
            latent_dim: 64,
            generator_hidden: vec![128, 256],
            discriminator_hidden: vec![256, 128],
            leaky_slope: 0.2,
            log_every: 100,
            corpus_fake_fraction: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, why: &str| Err(Error::Config(format!("train.{field}: {why}")));
        if self.batch_size == 0 {
            return fail("batch_size", "must be positive");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return fail("threshold", "must lie in (0, 1)");
        }
        if self.d_steps_per_g_step == 0 {
            return fail("d_steps_per_g_step", "must be at least 1");
        }
        if self.latent_dim == 0 {
            return fail("latent_dim", "must be positive");
        }
        if self.generator_hidden.contains(&0) {
            return fail("generator_hidden", "layer widths must be positive");
        }
        if self.discriminator_hidden.contains(&0) {
            return fail("discriminator_hidden", "layer widths must be positive");
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            return fail("leaky_slope", "must lie in (0, 1)");
        }
        if self.log_every == 0 {
            return fail("log_every", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.corpus_fake_fraction) {
            return fail("corpus_fake_fraction", "must lie in [0, 1]");
        }
        self.adam_g()
            .validate()
            .and(self.adam_d().validate())
            .map_err(|e| Error::Config(format!("train: {e}")))
    }

    pub fn adam_g(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr_g,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }

    pub fn adam_d(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr_d,
            ..self.adam_g()
        }
    }

    /// Number of corpus fakes in each discriminator fake minibatch.
    pub fn corpus_fakes_per_batch(&self) -> usize {
        ((self.batch_size as f64 * self.corpus_fake_fraction).round() as usize).min(self.batch_size)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GanModel {
    generator: Network,
    discriminator: Network,
    latent_dim: usize,
}

impl GanModel {
    pub fn new(generator: Network, discriminator: Network, latent_dim: usize) -> Result<Self> {
        if generator.input_dim() != latent_dim {
            return Err(Error::Dimension(format!(
                "generator takes {} inputs but latent_dim is {latent_dim}",
                generator.input_dim()
            )));
        }
        if generator.output_dim() != discriminator.input_dim() {
            return Err(Error::Dimension(format!(
                "generator emits {} values but discriminator expects {}",
                generator.output_dim(),
                discriminator.input_dim()
            )));
        }
        if discriminator.output_dim() != 1 {
            return Err(Error::Dimension(format!(
                "discriminator must emit one probability, emits {}",
                discriminator.output_dim()
            )));
        }
        Ok(GanModel {
            generator,
            discriminator,
            latent_dim,
        })
    }

    /// Fresh model with the layer widths from `config`, drawn from `rng`.
    pub fn init(image_dim: usize, config: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let hidden = Activation::leaky(config.leaky_slope);
        let chain = |input: usize, widths: &[usize], output: usize, last: Activation| {
            let mut dims = vec![input];
            dims.extend_from_slice(widths);
            dims.push(output);
            dims.windows(2)
                .enumerate()
                .map(|(i, w)| LayerSpec {
                    inputs: w[0],
                    outputs: w[1],
                    activation: if i + 2 == dims.len() { last } else { hidden },
                })
                .collect::<Vec<_>>()
        };
        let generator = Network::init(
            &chain(config.latent_dim, &config.generator_hidden, image_dim, Activation::Tanh),
            rng,
        )?;
        let discriminator = Network::init(
            &chain(image_dim, &config.discriminator_hidden, 1, Activation::Sigmoid),
            rng,
        )?;
        GanModel::new(generator, discriminator, config.latent_dim)
    }

    /// Model initialization depends on the seed only.
    pub fn seeded(image_dim: usize, config: &TrainConfig) -> Result<Self> {
        GanModel::init(image_dim, config, &mut init_rng(config.seed))
    }

    pub fn generator(&self) -> &Network {
        &self.generator
    }

    pub fn discriminator(&self) -> &Network {
        &self.discriminator
    }

    pub fn generator_mut(&mut self) -> &mut Network {
        &mut self.generator
    }

    pub fn discriminator_mut(&mut self) -> &mut Network {
        &mut self.discriminator
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn image_dim(&self) -> usize {
        self.discriminator.input_dim()
    }

    /// `G(z)`.
    pub fn generate(&self, z: &Tensor) -> Result<Tensor> {
        self.generator.predict(z)
    }

    /// Raw discriminator output `D(x)`, shape `[N × 1]`.
    pub fn discriminate(&self, x: &Tensor) -> Result<Tensor> {
        self.discriminator.predict(x)
    }
}

fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn train_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// `[batch × latent_dim]` i.i.d. standard normal draws.
pub fn sample_latent(batch: usize, latent_dim: usize, rng: &mut ChaCha8Rng) -> Result<Tensor> {
    if batch == 0 || latent_dim == 0 {
        return Err(Error::Argument(format!(
            "latent batch must be non-empty, got {batch} x {latent_dim}"
        )));
    }
    let data = (0..batch * latent_dim)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Tensor::new(vec![batch, latent_dim], data)
}

fn check_finite(t: &Tensor, what: &str) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("non-finite values in {what}")))
    }
}

/// `V(G, D) = mean log D(x) + mean log(1 - D(G(z)))`.
pub fn value_function(model: &GanModel, x_real: &Tensor, z: &Tensor) -> Result<f64> {
    let p_real = model.discriminate(x_real)?;
    let p_fake = model.discriminate(&model.generate(z)?)?;
    Ok(nn::bce_terms(&p_real, true)? + nn::bce_terms(&p_fake, false)?)
}

/// Discriminator loss and its gradient with respect to the discriminator parameters.
/// The generator is held constant.
pub fn discriminator_loss(model: &GanModel, x_real: &Tensor, z: &Tensor) -> Result<(f64, Gradients)> {
    let none = Tensor::zeros(&[0, model.image_dim()]);
    let (loss, grads, _) = discriminator_pass(model, x_real, z, &none)?;
    Ok((loss, grads))
}

/// Discriminator loss where the fake minibatch is `G(z)` stacked with known fake images.
/// `z.rows() + known_fakes.rows()` must equal `x_real.rows()`.
pub fn discriminator_loss_mixed(
    model: &GanModel,
    x_real: &Tensor,
    z: &Tensor,
    known_fakes: &Tensor,
) -> Result<(f64, Gradients)> {
    let (loss, grads, _) = discriminator_pass(model, x_real, z, known_fakes)?;
    Ok((loss, grads))
}

/// Returns (loss, gradients, fraction of the batch classified correctly at 0.5).
fn discriminator_pass(
    model: &GanModel,
    x_real: &Tensor,
    z: &Tensor,
    known_fakes: &Tensor,
) -> Result<(f64, Gradients, f64)> {
    if x_real.rows() != z.rows() + known_fakes.rows() {
        return Err(Error::Dimension(format!(
            "real batch has {} rows but fake batch has {} generated + {} known",
            x_real.rows(),
            z.rows(),
            known_fakes.rows()
        )));
    }
    let generated = if z.rows() > 0 {
        model.generate(z)?
    } else {
        Tensor::zeros(&[0, model.image_dim()])
    };
    check_finite(&generated, "generator output")?;
    let batch = Tensor::concat_rows(&[x_real, &generated, known_fakes])?;
    let (p, tape) = model.discriminator.forward(&batch)?;
    check_finite(&p, "discriminator output")?;

    let n = x_real.rows();
    let p_real = p.select_rows(&(0..n).collect::<Vec<_>>());
    let p_fake = p.select_rows(&(n..2 * n).collect::<Vec<_>>());
    let loss = -(nn::bce_terms(&p_real, true)? + nn::bce_terms(&p_fake, false)?);

    let g_real = nn::bce_terms_grad(&p_real, true)?.scale(-1.0);
    let g_fake = nn::bce_terms_grad(&p_fake, false)?.scale(-1.0);
    let dp = Tensor::concat_rows(&[&g_real, &g_fake])?;
    let grads = model.discriminator.backward(tape, &dp)?;

    let correct = p_real.data().iter().filter(|&&v| v >= 0.5).count()
        + p_fake.data().iter().filter(|&&v| v < 0.5).count();
    Ok((loss, grads, correct as f64 / (2 * n) as f64))
}

/// Generator loss and its gradient with respect to the generator parameters, backpropagated
/// through a frozen discriminator.
pub fn generator_loss(model: &GanModel, z: &Tensor, variant: GeneratorLoss) -> Result<(f64, Gradients)> {
    let (fake, g_tape) = model.generator.forward(z)?;
    check_finite(&fake, "generator output")?;
    let (p, d_tape) = model.discriminator.forward(&fake)?;
    check_finite(&p, "discriminator output")?;
    let (loss, dp) = match variant {
        GeneratorLoss::Saturating => (nn::bce_terms(&p, false)?, nn::bce_terms_grad(&p, false)?),
        GeneratorLoss::NonSaturating => (
            -nn::bce_terms(&p, true)?,
            nn::bce_terms_grad(&p, true)?.scale(-1.0),
        ),
    };
    let dx = model.discriminator.backward_input(d_tape, &dp)?;
    let grads = model.generator.backward(g_tape, &dx)?;
    Ok((loss, grads))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u64,
    pub d_loss: f64,
    pub g_loss: f64,
    pub d_accuracy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,d_loss,g_loss,d_accuracy\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.iteration, r.d_loss, r.g_loss, r.d_accuracy
            ));
        }
        out
    }
}

/// Resumable training state: model, both optimizers, the sampling rng and the iteration count.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub model: GanModel,
    pub config: TrainConfig,
    pub adam_g: AdamState,
    pub adam_d: AdamState,
    pub rng: ChaCha8Rng,
    pub iteration: u64,
}

impl Trainer {
    pub fn new(model: GanModel, config: TrainConfig) -> Self {
        Trainer {
            adam_g: AdamState::for_network(&model.generator),
            adam_d: AdamState::for_network(&model.discriminator),
            rng: train_rng(config.seed),
            iteration: 0,
            model,
            config,
        }
    }

    /// One discriminator update on a fresh real minibatch and fresh latent batch.
    /// Returns the loss and the batch accuracy before the update.
    pub fn discriminator_step(&mut self, pools: &TrainingPools) -> Result<(f64, f64)> {
        let b = self.config.batch_size;
        let known = self.config.corpus_fakes_per_batch();
        let picks = index::sample(&mut self.rng, pools.real.rows(), b).into_vec();
        let x_real = pools.real.select_rows(&picks);
        let z = if b > known {
            sample_latent(b - known, self.model.latent_dim, &mut self.rng)?
        } else {
            Tensor::zeros(&[0, self.model.latent_dim])
        };
        let known_fakes = if known > 0 {
            let picks = index::sample(&mut self.rng, pools.fake.rows(), known).into_vec();
            pools.fake.select_rows(&picks)
        } else {
            Tensor::zeros(&[0, self.model.image_dim()])
        };
        let (loss, grads, acc) = discriminator_pass(&self.model, &x_real, &z, &known_fakes)?;
        let cfg = self.config.adam_d();
        nn::adam_step(
            &mut self.model.discriminator.params_mut(),
            &grads.tensors(),
            &mut self.adam_d,
            &cfg,
        )?;
        Ok((loss, acc))
    }

    pub fn generator_step(&mut self) -> Result<f64> {
        let z = sample_latent(self.config.batch_size, self.model.latent_dim, &mut self.rng)?;
        let (loss, grads) = generator_loss(&self.model, &z, self.config.generator_loss)?;
        let cfg = self.config.adam_g();
        nn::adam_step(
            &mut self.model.generator.params_mut(),
            &grads.tensors(),
            &mut self.adam_g,
            &cfg,
        )?;
        Ok(loss)
    }

    /// Runs `iterations` more outer iterations.
    pub fn run(&mut self, pools: &TrainingPools, iterations: u64) -> Result<TrainTrace> {
        self.run_with(pools, iterations, |_| {})
    }

    /// Like [`Trainer::run`], calling `on_log` for every logged record.
    pub fn run_with(
        &mut self,
        pools: &TrainingPools,
        iterations: u64,
        mut on_log: impl FnMut(&TraceRecord),
    ) -> Result<TrainTrace> {
        self.config.validate()?;
        if iterations == 0 {
            return Ok(TrainTrace::default());
        }
        let real = &pools.real;
        if real.rows() == 0 {
            return Err(Error::Data("no real training images".into()));
        }
        if real.rows() < self.config.batch_size {
            return Err(Error::Data(format!(
                "{} real training images, fewer than batch_size {}",
                real.rows(),
                self.config.batch_size
            )));
        }
        let known = self.config.corpus_fakes_per_batch();
        if pools.fake.rows() < known {
            return Err(Error::Data(format!(
                "{} fake training images, but {known} are drawn per discriminator batch \
                 (train.corpus_fake_fraction = {})",
                pools.fake.rows(),
                self.config.corpus_fake_fraction
            )));
        }
        for (pool, what) in [(real, "real"), (&pools.fake, "fake")] {
            if pool.rank() != 2 || (pool.rows() > 0 && pool.cols() != self.model.image_dim()) {
                return Err(Error::Dimension(format!(
                    "{what} training images have shape {:?}, model expects {} values",
                    pool.shape(),
                    self.model.image_dim()
                )));
            }
        }
        let mut trace = TrainTrace::default();
        for _ in 0..iterations {
            let it = self.iteration + 1;
            let mut d_loss = 0.0;
            let mut d_acc = 0.0;
            for _ in 0..self.config.d_steps_per_g_step {
                (d_loss, d_acc) = self
                    .discriminator_step(pools)
                    .map_err(|e| at_iteration(e, it))?;
            }
            let g_loss = self.generator_step().map_err(|e| at_iteration(e, it))?;
            if !d_loss.is_finite() || !g_loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss at iteration {it} (d_loss={d_loss}, g_loss={g_loss})"
                )));
            }
            self.iteration = it;
            if it.is_multiple_of(self.config.log_every) {
                let rec = TraceRecord {
                    iteration: it,
                    d_loss,
                    g_loss,
                    d_accuracy: d_acc,
                };
                on_log(&rec);
                trace.records.push(rec);
            }
        }
        Ok(trace)
    }
}

fn at_iteration(e: Error, it: u64) -> Error {
    match e {
        Error::Numeric(m) => Error::Numeric(format!("iteration {it}: {m}")),
        other => other,
    }
}

/// Flattened training images, `[N × image_dim]` each.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPools {
    pub real: Tensor,
    /// Labeled fakes available to the discriminator; may have zero rows.
    pub fake: Tensor,
}

impl TrainingPools {
    /// Training-split images of `dataset`, separated by label.
    pub fn from_dataset(dataset: &Dataset) -> Self {
        let pick = |label: Label| -> Vec<usize> {
            (0..dataset.len())
                .filter(|&i| dataset.labels[i] == label && dataset.split[i] == Split::Train)
                .collect()
        };
        TrainingPools {
            real: dataset.flat_images(&pick(Label::Real)),
            fake: dataset.flat_images(&pick(Label::Fake)),
        }
    }

    pub fn real_only(real: Tensor) -> Self {
        let fake = Tensor::zeros(&[0, real.cols()]);
        TrainingPools { real, fake }
    }
}

/// Trains `model` on the training split of `dataset`.
pub fn train(model: GanModel, dataset: &Dataset, config: &TrainConfig) -> Result<(GanModel, TrainTrace)> {
    let pools = TrainingPools::from_dataset(dataset);
    if config.iterations > 0 && pools.real.rows() == 0 {
        return Err(Error::Data("train split has no real images".into()));
    }
    let mut trainer = Trainer::new(model, config.clone());
    let trace = trainer.run(&pools, config.iterations)?;
    Ok((trainer.model, trace))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    /// Probability that the image is real, clamped to `[1e-12, 1 - 1e-12]`.
    pub score: f64,
    pub label: Label,
}

/// Scores `images` (`[N × image_dim]`, pixels in [-1, 1]) with the discriminator.
/// An image is labeled real iff its score is at least `threshold`.
pub fn detect(model: &GanModel, images: &Tensor, threshold: f64) -> Result<Vec<Detection>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Argument(format!("threshold {threshold} outside [0, 1]")));
    }
    let p = model.discriminate(images)?;
    check_finite(&p, "discriminator output")?;
    Ok(p.data()
        .iter()
        .map(|&v| {
            let score = v.clamp(PROB_EPS, 1.0 - PROB_EPS);
            Detection {
                score,
                label: if score >= threshold { Label::Real } else { Label::Fake },
            }
        })
        .collect())
}
