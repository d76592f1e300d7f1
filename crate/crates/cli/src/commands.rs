//! The four subcommands. Each returns the process exit code on success.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use paygan::data::{self, FakeKind, Label, Split, MANIFEST_FILE};
use paygan::gan::{self, TrainingPools};
use paygan::metrics::MetricsReport;
use paygan::pgm;
use paygan::{Error, Result, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::checkpoint::Checkpoint;
use crate::config::{OutputConfig, RunConfig};

pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const TRACE_FILE: &str = "trace.csv";

/// Rng stream used to draw generator samples during evaluation.
const EVAL_SAMPLE_STREAM: u64 = 3;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn sidecar_json(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json serializes") + "\n"
}

#[derive(Clone, Debug, Default)]
pub struct GenDataArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Renders the corpus, splits it and writes PGM files plus the manifest.
pub fn gen_data(args: &GenDataArgs) -> Result<u8> {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.corpus.seed = seed;
    }
    let cfg = cfg.resolve();
    cfg.validate()?;
    let dir = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());

    let corpus = data::generate_corpus(&cfg.corpus)?;
    let dataset = data::split(&corpus, &cfg.split.fractions(), cfg.split_seed())?;
    create_dir(&dir)?;
    let manifest = data::write_corpus(&dataset, &cfg.corpus, &cfg.split.fractions(), cfg.split_seed(), &dir)?;
    write_file(
        &dir.join(EFFECTIVE_CONFIG_FILE),
        sidecar_json(&json!({ "command": "gen-data", "out": dir, "config": cfg })),
    )?;

    println!(
        "wrote {} images ({}x{}) and {} to {}",
        manifest.entries.len(),
        cfg.corpus.width,
        cfg.corpus.height,
        MANIFEST_FILE,
        dir.display()
    );
    println!("split   real  fake");
    for s in Split::ALL {
        let count = |l: Label| manifest.entries.iter().filter(|e| e.split == s && e.label == l).count();
        println!("{:<5} {:>6} {:>5}", s.as_str(), count(Label::Real), count(Label::Fake));
    }
    Ok(0)
}

#[derive(Clone, Debug, Default)]
pub struct TrainArgs {
    pub config: Option<PathBuf>,
    pub data: PathBuf,
    pub seed: Option<u64>,
    pub iterations: Option<u64>,
    pub resume: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Trains on the corpus in `args.data` and writes checkpoint, trace and effective config.
///
/// With `--resume`, training continues from the checkpoint's exact state (model, optimizers,
/// rng) under the checkpoint's own configuration, up to the requested total iteration count.
pub fn train(args: &TrainArgs) -> Result<u8> {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
    }
    if let Some(n) = args.iterations {
        cfg.train.iterations = n;
    }
    let mut cfg = cfg.resolve();
    cfg.validate()?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());

    let (dataset, _) = data::load_corpus(&args.data)?;
    let mut ck = match &args.resume {
        None => Checkpoint::fresh(dataset.height, dataset.width, &cfg.train)?,
        Some(path) => {
            let mut ck = Checkpoint::load(path)?;
            if (ck.height, ck.width) != (dataset.height, dataset.width) {
                return Err(Error::Data(format!(
                    "checkpoint expects {}x{} images, corpus has {}x{}",
                    ck.width, ck.height, dataset.width, dataset.height
                )));
            }
            ck.trainer.config.iterations = cfg.train.iterations;
            cfg.train = ck.trainer.config.clone();
            ck
        }
    };
    create_dir(&out)?;
    write_file(
        &out.join(EFFECTIVE_CONFIG_FILE),
        sidecar_json(&json!({
            "command": "train",
            "data": args.data,
            "resume": args.resume,
            "out": out,
            "config": cfg,
        })),
    )?;

    let pools = TrainingPools::from_dataset(&dataset);
    let remaining = cfg.train.iterations.saturating_sub(ck.trainer.iteration);
    let trace = ck.trainer.run_with(&pools, remaining, |r| {
        eprintln!(
            "iteration {:>6}  d_loss {:.4}  g_loss {:.4}  d_acc {:.3}",
            r.iteration, r.d_loss, r.g_loss, r.d_accuracy
        );
    })?;

    ck.save(&out.join(CHECKPOINT_FILE))?;
    write_file(&out.join(TRACE_FILE), trace.to_csv())?;
    match trace.records.last() {
        Some(r) => println!(
            "trained to iteration {}; final logged losses: d_loss {:.6} g_loss {:.6}",
            ck.trainer.iteration, r.d_loss, r.g_loss
        ),
        None => println!("trained to iteration {}; no losses logged", ck.trainer.iteration),
    }
    println!("checkpoint written to {}", out.join(CHECKPOINT_FILE).display());
    Ok(0)
}

#[derive(Clone, Debug)]
pub struct EvalArgs {
    pub checkpoint: PathBuf,
    pub data: PathBuf,
    pub split: Split,
    pub threshold: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Scores one split of a corpus and writes the metric reports.
pub fn eval(args: &EvalArgs) -> Result<u8> {
    let ck = Checkpoint::load(&args.checkpoint)?;
    let model = ck.model();
    let threshold = args.threshold.unwrap_or(ck.trainer.config.threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Argument(format!("threshold {threshold} outside [0, 1]")));
    }
    let seed = args.seed.unwrap_or(ck.trainer.config.seed);
    let out = args.out.clone().unwrap_or_else(|| OutputConfig::default().dir);

    let (dataset, manifest) = data::load_corpus(&args.data)?;
    if (ck.height, ck.width) != (dataset.height, dataset.width) {
        return Err(Error::Data(format!(
            "checkpoint expects {}x{} images, corpus has {}x{}",
            ck.width, ck.height, dataset.width, dataset.height
        )));
    }
    let idx = dataset.indices_in(args.split);
    for label in [Label::Real, Label::Fake] {
        if !idx.iter().any(|&i| dataset.labels[i] == label) {
            return Err(Error::Data(format!(
                "split {} has no {} images; evaluation needs both classes",
                args.split.as_str(),
                label.as_str()
            )));
        }
    }
    let detections = gan::detect(model, &dataset.flat_images(&idx), threshold)?;
    let scores: Vec<f64> = detections.iter().map(|d| d.score).collect();
    let labels: Vec<Label> = idx.iter().map(|&i| dataset.labels[i]).collect();
    let kinds: Vec<FakeKind> = idx.iter().map(|&i| dataset.fake_kind[i]).collect();

    // Generator samples, one per corpus fake, only feed the per-kind recall.
    let n_fake = labels.iter().filter(|&&l| l == Label::Fake).count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(EVAL_SAMPLE_STREAM);
    let z = gan::sample_latent(n_fake, model.latent_dim(), &mut rng)?;
    let generated: Vec<(f64, FakeKind)> = gan::detect(model, &model.generate(&z)?, threshold)?
        .iter()
        .map(|d| (d.score, FakeKind::Generated))
        .collect();

    let report = MetricsReport::from_scores(&scores, &labels, &kinds, threshold, &generated)?;
    report.check_invariants()?;

    let mut per_sample = String::from("file,label,fake_kind,score,verdict\n");
    for (k, &i) in idx.iter().enumerate() {
        let e = &manifest.entries[i];
        let kind = serde_json::to_value(e.fake_kind).expect("kind serializes");
        per_sample.push_str(&format!(
            "{},{},{},{},{}\n",
            e.file,
            e.label.as_str(),
            kind.as_str().unwrap_or("?"),
            detections[k].score,
            detections[k].label.as_str()
        ));
    }

    create_dir(&out)?;
    write_file(&out.join("report.json"), report.to_json())?;
    write_file(&out.join("report.csv"), report.to_csv())?;
    write_file(&out.join("roc.csv"), report.roc_csv())?;
    write_file(&out.join("scores.csv"), per_sample)?;
    write_file(
        &out.join(EFFECTIVE_CONFIG_FILE),
        sidecar_json(&json!({
            "command": "eval",
            "checkpoint": args.checkpoint,
            "data": args.data,
            "split": args.split,
            "threshold": threshold,
            "seed": seed,
            "generated_sample_stream": EVAL_SAMPLE_STREAM,
            "out": out,
            "train_config": ck.trainer.config,
        })),
    )?;
    println!(
        "evaluated split {} ({} images) at iteration {}",
        args.split.as_str(),
        idx.len(),
        ck.trainer.iteration
    );
    print!("{}", report.summary());
    Ok(0)
}

#[derive(Clone, Debug)]
pub struct DetectArgs {
    pub checkpoint: PathBuf,
    pub images: Vec<PathBuf>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Prints `<path>\t<score>\t<real|fake>` per image. Exit code 1 if any image is judged fake.
pub fn detect(args: &DetectArgs) -> Result<u8> {
    let ck = Checkpoint::load(&args.checkpoint)?;
    let threshold = args.threshold.unwrap_or(ck.trainer.config.threshold);
    let sidecar = sidecar_json(&json!({
        "command": "detect",
        "checkpoint": args.checkpoint,
        "images": args.images,
        "threshold": threshold,
        "out": args.out,
    }));
    match &args.out {
        Some(dir) => {
            create_dir(dir)?;
            write_file(&dir.join(EFFECTIVE_CONFIG_FILE), sidecar)?;
        }
        None => eprint!("{sidecar}"),
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Argument(format!("threshold {threshold} outside [0, 1]")));
    }
    if args.images.is_empty() {
        return Ok(0);
    }

    let mut pixels = Vec::with_capacity(args.images.len() * ck.height * ck.width);
    for path in &args.images {
        let img = pgm::load_pgm(path).map_err(|e| match e {
            Error::Parse { offset, message } => {
                Error::Data(format!("{}: byte {offset}: {message}", path.display()))
            }
            other => other,
        })?;
        if (img.height, img.width) != (ck.height, ck.width) {
            return Err(Error::Data(format!(
                "{} is {}x{}, checkpoint expects {}x{}",
                path.display(),
                img.width,
                img.height,
                ck.width,
                ck.height
            )));
        }
        pixels.extend(data::normalize(&img.pixels));
    }
    let x = Tensor::new(vec![args.images.len(), ck.height * ck.width], pixels)?;
    let detections = gan::detect(ck.model(), &x, threshold)?;

    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for (path, d) in args.images.iter().zip(&detections) {
        writeln!(lock, "{}\t{}\t{}", path.display(), d.score, d.label.as_str())
            .map_err(io_err(Path::new("<stdout>")))?;
    }
    Ok(u8::from(detections.iter().any(|d| d.label == Label::Fake)))
}
