//! Binary checkpoint: the full training state needed to resume or reproduce a run.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        8 bytes  "PAYGANCK"
//! version      u32
//! header_len   u64
//! header       header_len bytes of JSON (architecture, config, optimizer and rng state,
//!              tensor names and shapes)
//! payload      f64 values of every tensor listed in the header, in that order
//! ```

use std::fs;
use std::path::Path;

use paygan::gan::{GanModel, TrainConfig, Trainer};
use paygan::nn::{AdamState, DenseLayer, LayerSpec, Network};
use paygan::{Error, Result, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const MAGIC: &[u8; 8] = b"PAYGANCK";
pub const VERSION: u32 = 1;

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RngState {
    /// 32-byte ChaCha key as lowercase hex.
    seed: String,
    stream: u64,
    /// u128 word position, as a decimal string.
    word_pos: String,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    image_height: usize,
    image_width: usize,
    latent_dim: usize,
    iteration: u64,
    generator: Vec<LayerSpec>,
    discriminator: Vec<LayerSpec>,
    train_config: TrainConfig,
    adam_g_t: u64,
    adam_d_t: u64,
    rng: RngState,
    tensors: Vec<TensorEntry>,
}

/// Training state plus the image geometry it was trained on.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub height: usize,
    pub width: usize,
    pub trainer: Trainer,
}

impl Checkpoint {
    /// Freshly initialized model and optimizers for `height × width` images.
    pub fn fresh(height: usize, width: usize, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let model = GanModel::seeded(height * width, config)?;
        Ok(Checkpoint {
            height,
            width,
            trainer: Trainer::new(model, config.clone()),
        })
    }

    pub fn model(&self) -> &GanModel {
        &self.trainer.model
    }

    /// Tensors in payload order, with their names.
    fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        let t = &self.trainer;
        let groups: [(&str, Vec<&Tensor>); 6] = [
            ("generator", t.model.generator().params()),
            ("discriminator", t.model.discriminator().params()),
            ("adam_g.m", t.adam_g.m.iter().collect()),
            ("adam_g.v", t.adam_g.v.iter().collect()),
            ("adam_d.m", t.adam_d.m.iter().collect()),
            ("adam_d.v", t.adam_d.v.iter().collect()),
        ];
        groups
            .into_iter()
            .flat_map(|(prefix, tensors)| {
                tensors
                    .into_iter()
                    .enumerate()
                    .map(move |(i, x)| (tensor_name(prefix, i), x))
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let t = &self.trainer;
        let tensors = self.named_tensors();
        let header = Header {
            image_height: self.height,
            image_width: self.width,
            latent_dim: t.model.latent_dim(),
            iteration: t.iteration,
            generator: t.model.generator().specs(),
            discriminator: t.model.discriminator().specs(),
            train_config: t.config.clone(),
            adam_g_t: t.adam_g.t,
            adam_d_t: t.adam_d.t,
            rng: RngState {
                seed: t.rng.get_seed().iter().map(|b| format!("{b:02x}")).collect(),
                stream: t.rng.get_stream(),
                word_pos: t.rng.get_word_pos().to_string(),
            },
            tensors: tensors
                .iter()
                .map(|(name, x)| TensorEntry {
                    name: name.clone(),
                    shape: x.shape().to_vec(),
                })
                .collect(),
        };
        let json = serde_json::to_vec_pretty(&header).expect("header serializes");
        let mut out = Vec::with_capacity(20 + json.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, x) in &tensors {
            for v in x.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8, "magic")? != MAGIC {
            return Err(Error::Parse {
                offset: 0,
                message: "not a paygan checkpoint (bad magic)".into(),
            });
        }
        let version = u32::from_le_bytes(r.take(4, "version")?.try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(Error::Version {
                found: version,
                expected: VERSION,
            });
        }
        let len_at = r.pos;
        let len = u64::from_le_bytes(r.take(8, "header length")?.try_into().expect("8 bytes"));
        let len = usize::try_from(len).map_err(|_| r.error_at(len_at, "header length out of range"))?;
        let header_at = r.pos;
        let header: Header = serde_json::from_slice(r.take(len, "header")?)
            .map_err(|e| r.error_at(header_at, format!("invalid header: {e}")))?;

        let mut payload = Vec::with_capacity(header.tensors.len());
        for entry in &header.tensors {
            let n: usize = entry.shape.iter().product();
            let raw = r.take(n * 8, &entry.name)?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            payload.push(Tensor::new(entry.shape.clone(), data)?);
        }
        if r.pos != bytes.len() {
            return Err(r.error_at(r.pos, format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        rebuild(header, payload)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Checkpoint::from_bytes(&bytes)
    }
}

fn tensor_name(prefix: &str, i: usize) -> String {
    let kind = if i.is_multiple_of(2) { "weights" } else { "bias" };
    format!("{prefix}.layer{}.{kind}", i / 2)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.error_at(self.bytes.len(), format!("truncated checkpoint while reading {what}"))),
        }
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}

fn parse_seed(hex: &str) -> Result<[u8; 32]> {
    let bad = || Error::Data(format!("checkpoint rng seed {hex:?} is not 64 hex digits"));
    if hex.len() != 64 || !hex.is_ascii() {
        return Err(bad());
    }
    let mut seed = [0u8; 32];
    for (i, b) in seed.iter_mut().enumerate() {
        *b = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
    }
    Ok(seed)
}

fn build_network(specs: &[LayerSpec], params: &mut impl Iterator<Item = Tensor>) -> Result<Network> {
    let mut layers = Vec::with_capacity(specs.len());
    for s in specs {
        let (w, b) = match (params.next(), params.next()) {
            (Some(w), Some(b)) => (w, b),
            _ => return Err(Error::Data("checkpoint is missing parameter tensors".into())),
        };
        if w.shape() != [s.outputs, s.inputs] {
            return Err(Error::Data(format!(
                "checkpoint weights have shape {:?}, layer spec says {}x{}",
                w.shape(),
                s.outputs,
                s.inputs
            )));
        }
        layers.push(DenseLayer::new(w, b, s.activation)?);
    }
    Network::new(layers)
}

fn rebuild(header: Header, payload: Vec<Tensor>) -> Result<Checkpoint> {
    let n_g = 2 * header.generator.len();
    let n_d = 2 * header.discriminator.len();
    if payload.len() != 3 * (n_g + n_d) {
        return Err(Error::Data(format!(
            "checkpoint holds {} tensors, architecture needs {}",
            payload.len(),
            3 * (n_g + n_d)
        )));
    }
    let mut it = payload.into_iter();
    let generator = build_network(&header.generator, &mut it)?;
    let discriminator = build_network(&header.discriminator, &mut it)?;
    let model = GanModel::new(generator, discriminator, header.latent_dim)?;
    if model.image_dim() != header.image_height * header.image_width {
        return Err(Error::Data(format!(
            "checkpoint model emits {} pixels but images are {}x{}",
            model.image_dim(),
            header.image_height,
            header.image_width
        )));
    }
    let mut adam = |n: usize, t: u64, params: Vec<&Tensor>| -> Result<AdamState> {
        let m: Vec<Tensor> = it.by_ref().take(n).collect();
        let v: Vec<Tensor> = it.by_ref().take(n).collect();
        let fits = |s: &[Tensor]| s.len() == n && s.iter().zip(&params).all(|(a, p)| a.shape() == p.shape());
        if !fits(&m) || !fits(&v) {
            return Err(Error::Data("checkpoint optimizer moments do not match parameter shapes".into()));
        }
        Ok(AdamState { m, v, t })
    };
    let adam_g = adam(n_g, header.adam_g_t, model.generator().params())?;
    let adam_d = adam(n_d, header.adam_d_t, model.discriminator().params())?;

    let mut rng = ChaCha8Rng::from_seed(parse_seed(&header.rng.seed)?);
    rng.set_stream(header.rng.stream);
    let word_pos: u128 = header
        .rng
        .word_pos
        .parse()
        .map_err(|_| Error::Data(format!("checkpoint rng word_pos {:?} is not an integer", header.rng.word_pos)))?;
    rng.set_word_pos(word_pos);

    Ok(Checkpoint {
        height: header.image_height,
        width: header.image_width,
        trainer: Trainer {
            model,
            config: header.train_config,
            adam_g,
            adam_d,
            rng,
            iteration: header.iteration,
        },
    })
}
