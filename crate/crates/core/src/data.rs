//! Synthetic payment-card corpus: procedural real templates, seeded manipulations that produce
//! the fake class, byte/model-range conversion, stratified splits, and the on-disk layout
//! (`<split>/<label>_<index>.pgm` plus `manifest.json`).

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pgm::{self, GrayImage};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Real => "real",
            Label::Fake => "fake",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FakeKind {
    Manipulated,
    Generated,
    #[serde(rename = "n/a")]
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::Argument(format!(
                "unknown split {other:?} (expected train, val or test)"
            ))),
        }
    }
}

/// The manipulation applied to a fake sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manipulation {
    PatchSwap,
    PortraitBlur,
    GlyphNoise,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub n_real: usize,
    pub n_fake: usize,
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    pub manipulation_strength: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_real: 2000,
            n_fake: 2000,
            height: 32,
            width: 32,
            seed: 2024,
            manipulation_strength: 0.6,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::Domain(format!(
                "corpus images have zero area ({}x{})",
                self.height, self.width
            )));
        }
        if self.height < 8 || self.width < 8 {
            return Err(Error::Config(format!(
                "corpus.height/width must be at least 8, got {}x{}",
                self.height, self.width
            )));
        }
        if !(self.manipulation_strength > 0.0 && self.manipulation_strength <= 1.0) {
            return Err(Error::Config(format!(
                "corpus.manipulation_strength must lie in (0, 1], got {}",
                self.manipulation_strength
            )));
        }
        Ok(())
    }

    pub fn image_dim(&self) -> usize {
        self.height * self.width
    }
}

/// Labeled image corpus. `images` is `[N × H × W]` with pixels in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub height: usize,
    pub width: usize,
    pub images: Tensor,
    pub labels: Vec<Label>,
    pub fake_kind: Vec<FakeKind>,
    pub split: Vec<Split>,
}

impl Dataset {
    pub fn empty(height: usize, width: usize) -> Self {
        Dataset {
            height,
            width,
            images: Tensor::zeros(&[0, height, width]),
            labels: Vec::new(),
            fake_kind: Vec::new(),
            split: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn indices_in(&self, split: Split) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.split[i] == split).collect()
    }

    /// Flattened `[k × H*W]` images for the given sample indices.
    pub fn flat_images(&self, indices: &[usize]) -> Tensor {
        self.images.select_rows(indices).flatten_rows()
    }

    pub fn image_bytes(&self, i: usize) -> Vec<u8> {
        denormalize(self.images.row(i))
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Maps bytes `0..=255` to `v / 127.5 - 1`, so 0 → -1 and 255 → +1 exactly.
pub fn normalize(raw: &[u8]) -> Vec<f64> {
    raw.iter().map(|&b| normalize_pixel(b)).collect()
}

#[inline]
pub fn normalize_pixel(b: u8) -> f64 {
    b as f64 / 127.5 - 1.0
}

/// Inverse of [`normalize`], rounding to the nearest byte and saturating outside [-1, 1].
pub fn denormalize(values: &[f64]) -> Vec<u8> {
    values
        .iter()
        .map(|&v| ((v + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Axis-aligned pixel rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.top && row < self.top + self.height && col >= self.left && col < self.left + self.width
    }
}

/// Fixed card geometry for a given image size.
#[derive(Clone, Copy, Debug)]
struct Layout {
    h: usize,
    w: usize,
    portrait: Rect,
    glyphs: Rect,
    glyph_h: usize,
}

impl Layout {
    fn new(h: usize, w: usize) -> Self {
        let glyph_h = if h >= 16 { 5 } else { (h / 4).max(1) };
        let strip_top = h - 2 - glyph_h;
        let portrait_h = strip_top.saturating_sub(3).max(1);
        let portrait_w = ((w - 4) * 3 / 5).max(1);
        Layout {
            h,
            w,
            portrait: Rect {
                top: 2,
                left: 2,
                height: portrait_h,
                width: portrait_w,
            },
            glyphs: Rect {
                top: strip_top,
                left: 2,
                height: glyph_h,
                width: w - 4,
            },
            glyph_h,
        }
    }
}

const FONT: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b001, 0b001, 0b001],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];

/// The digit strip printed on every card.
const CARD_DIGITS: [u8; 16] = [4, 0, 1, 2, 8, 8, 8, 8, 1, 8, 8, 1, 5, 5, 6, 9];

/// Per-sample random card parameters.
#[derive(Clone, Debug)]
struct CardParams {
    background: f64,
    tilt_x: f64,
    tilt_y: f64,
    frame: f64,
    ink: f64,
    face_dx: f64,
    face_dy: f64,
    face_sigma: f64,
    face_depth: f64,
    eye_level: f64,
    eye_spread: f64,
    bar_lengths: [f64; 2],
}

impl CardParams {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        CardParams {
            background: rng.random_range(170.0..215.0),
            tilt_x: rng.random_range(-14.0..14.0),
            tilt_y: rng.random_range(-14.0..14.0),
            frame: rng.random_range(25.0..60.0),
            ink: rng.random_range(20.0..70.0),
            face_dx: rng.random_range(-0.12..0.12),
            face_dy: rng.random_range(-0.12..0.12),
            face_sigma: rng.random_range(0.20..0.28),
            face_depth: rng.random_range(60.0..110.0),
            eye_level: rng.random_range(10.0..45.0),
            eye_spread: rng.random_range(0.38..0.52),
            bar_lengths: [rng.random_range(0.4..1.0), rng.random_range(0.3..0.9)],
        }
    }
}

/// Draws a card template. Consumes rng draws for the parameters and the sensor noise.
fn render_card(layout: &Layout, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let p = CardParams::draw(rng);
    let (h, w) = (layout.h, layout.w);
    let mut canvas = vec![0.0f64; h * w];
    for r in 0..h {
        for c in 0..w {
            let u = c as f64 / w as f64 - 0.5;
            let v = r as f64 / h as f64 - 0.5;
            canvas[r * w + c] = p.background + p.tilt_x * u + p.tilt_y * v;
        }
    }
    for r in 0..h {
        for c in 0..w {
            if r == 0 || c == 0 || r == h - 1 || c == w - 1 {
                canvas[r * w + c] = p.frame;
            }
        }
    }

    // Portrait: a dark radial blob with two sharp eyes and a mouth line.
    let pr = layout.portrait;
    let size = pr.height.min(pr.width) as f64;
    let cy = pr.top as f64 + pr.height as f64 / 2.0 + p.face_dy * size;
    let cx = pr.left as f64 + pr.width as f64 / 2.0 + p.face_dx * size;
    let sigma = (p.face_sigma * size).max(0.5);
    for r in pr.top..pr.top + pr.height {
        for c in pr.left..pr.left + pr.width {
            let d2 = (r as f64 - cy).powi(2) + (c as f64 - cx).powi(2);
            canvas[r * w + c] -= p.face_depth * (-d2 / (2.0 * sigma * sigma)).exp();
        }
    }
    let eye_r = (cy - 0.45 * sigma).round() as isize;
    for side in [-1.0, 1.0] {
        let eye_c = (cx + side * p.eye_spread * sigma * 1.6).round() as isize;
        put(&mut canvas, pr, w, eye_r, eye_c, p.eye_level);
    }
    let mouth_r = (cy + 0.75 * sigma).round() as isize;
    let half = (0.5 * sigma).round().max(1.0) as isize;
    for dc in -half..=half {
        put(&mut canvas, pr, w, mouth_r, cx.round() as isize + dc, p.eye_level + 25.0);
    }

    // Two text bars to the right of the portrait.
    let bar_left = pr.left + pr.width + 2;
    if bar_left + 2 < w - 2 {
        let span = (w - 2 - bar_left) as f64;
        for (k, len) in p.bar_lengths.iter().enumerate() {
            let r = pr.top + 2 + 4 * k;
            if r >= pr.top + pr.height {
                break;
            }
            let end = bar_left + (span * len).round() as usize;
            for c in bar_left..end.min(w - 2) {
                canvas[r * w + c] = p.ink + 40.0;
            }
        }
    }

    // Digit strip: 3-wide glyphs with one column of spacing, vertically scaled to the strip.
    let gl = layout.glyphs;
    for (slot, &digit) in CARD_DIGITS.iter().enumerate() {
        let left = gl.left + slot * 4;
        if left + 3 > gl.left + gl.width {
            break;
        }
        for gr in 0..layout.glyph_h {
            let font_row = gr * 5 / layout.glyph_h;
            let bits = FONT[digit as usize][font_row];
            for gc in 0..3 {
                if bits & (0b100 >> gc) != 0 {
                    canvas[(gl.top + gr) * w + left + gc] = p.ink;
                }
            }
        }
    }

    // Fixed-phase security print over the whole card interior.
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            canvas[r * w + c] += if (r + c) % 2 == 0 { SECURITY_PRINT } else { -SECURITY_PRINT };
        }
    }

    canvas
        .iter()
        .map(|&v| (v + rng.random_range(-3.0..3.0)).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Amplitude of the pixel-level checkerboard printed on every genuine card.
const SECURITY_PRINT: f64 = 12.0;

fn put(canvas: &mut [f64], region: Rect, w: usize, r: isize, c: isize, value: f64) {
    if r < 0 || c < 0 {
        return;
    }
    let (r, c) = (r as usize, c as usize);
    if region.contains(r, c) {
        canvas[r * w + c] = value;
    }
}

/// A manipulated sample together with the template it was derived from.
#[derive(Clone, Debug, PartialEq)]
pub struct FakeSample {
    pub image: Vec<u8>,
    pub source: Vec<u8>,
    pub manipulation: Manipulation,
    /// Every changed pixel lies inside this rectangle.
    pub region: Rect,
}

fn sample_rng(seed: u64, index: usize, fake: bool) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * index as u64 + fake as u64);
    rng
}

/// The `index`-th real image of the corpus described by `spec`.
pub fn render_real(spec: &CorpusSpec, index: usize) -> Vec<u8> {
    let layout = Layout::new(spec.height, spec.width);
    render_card(&layout, &mut sample_rng(spec.seed, index, false))
}

/// The `index`-th fake image: a fresh template with one seeded manipulation applied.
pub fn render_fake(spec: &CorpusSpec, index: usize) -> FakeSample {
    let layout = Layout::new(spec.height, spec.width);
    let mut rng = sample_rng(spec.seed, index, true);
    let source = render_card(&layout, &mut rng);
    let strength = spec.manipulation_strength;
    let manipulation = match rng.random_range(0..3u8) {
        0 => Manipulation::PatchSwap,
        1 => Manipulation::PortraitBlur,
        _ => Manipulation::GlyphNoise,
    };
    let mut image = source.clone();
    let region = match manipulation {
        Manipulation::PatchSwap => {
            let donor = render_card(&layout, &mut rng);
            let region = sub_rect(layout.portrait, 0.5, 0.85, &mut rng);
            // The pasted patch is off the pixel grid by an odd number of pixels.
            let (dy, dx) = loop {
                let dy = rng.random_range(-2..=2i64) as isize;
                let dx = rng.random_range(-2..=2i64) as isize;
                if (dy + dx).rem_euclid(2) == 1 {
                    break (dy, dx);
                }
            };
            let (h, w) = (layout.h as isize, layout.w as isize);
            for r in region.top..region.top + region.height {
                for c in region.left..region.left + region.width {
                    let i = r * layout.w + c;
                    let dr = (r as isize + dy).clamp(0, h - 1);
                    let dc = (c as isize + dx).clamp(0, w - 1);
                    let donor_px = donor[(dr * w + dc) as usize] as f64;
                    let mixed = (1.0 - strength) * source[i] as f64 + strength * donor_px;
                    image[i] = mixed.round().clamp(0.0, 255.0) as u8;
                }
            }
            region
        }
        Manipulation::PortraitBlur => {
            let region = sub_rect(layout.portrait, 0.6, 0.9, &mut rng);
            let sigma = 0.6 + 1.4 * strength;
            blur_region(&source, &mut image, layout.w, layout.h, region, sigma);
            region
        }
        Manipulation::GlyphNoise => {
            let strip = layout.glyphs;
            let width = ((strip.width as f64 * rng.random_range(0.3..0.6)).round() as usize).max(1);
            let left = strip.left + rng.random_range(0..=strip.width - width);
            let region = Rect {
                top: strip.top,
                left,
                height: strip.height,
                width,
            };
            let amplitude = 120.0 * strength;
            for r in region.top..region.top + region.height {
                for c in region.left..region.left + region.width {
                    let i = r * layout.w + c;
                    let n: f64 = StandardNormal.sample(&mut rng);
                    image[i] = (source[i] as f64 + amplitude * n).round().clamp(0.0, 255.0) as u8;
                }
            }
            region
        }
    };
    FakeSample {
        image,
        source,
        manipulation,
        region,
    }
}

/// Random sub-rectangle covering a fraction in `[lo, hi)` of each side of `outer`.
fn sub_rect(outer: Rect, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Rect {
    let hgt = ((outer.height as f64 * rng.random_range(lo..hi)).round() as usize).clamp(1, outer.height);
    let wid = ((outer.width as f64 * rng.random_range(lo..hi)).round() as usize).clamp(1, outer.width);
    Rect {
        top: outer.top + rng.random_range(0..=outer.height - hgt),
        left: outer.left + rng.random_range(0..=outer.width - wid),
        height: hgt,
        width: wid,
    }
}

/// Gaussian blur of `src` restricted to `region`; neighbours outside the image are clamped.
fn blur_region(src: &[u8], dst: &mut [u8], w: usize, h: usize, region: Rect, sigma: f64) {
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let at = |r: isize, c: isize| -> f64 {
        let r = r.clamp(0, h as isize - 1) as usize;
        let c = c.clamp(0, w as isize - 1) as usize;
        src[r * w + c] as f64
    };
    for r in region.top..region.top + region.height {
        for c in region.left..region.left + region.width {
            let mut acc = 0.0;
            for (i, kr) in kernel.iter().enumerate() {
                for (j, kc) in kernel.iter().enumerate() {
                    acc += kr * kc * at(r as isize + i as isize - radius, c as isize + j as isize - radius);
                }
            }
            dst[r * w + c] = (acc / (norm * norm)).round().clamp(0.0, 255.0) as u8;
        }
    }
}

/// Builds the full corpus: `n_real` real images followed by `n_fake` manipulated ones, all tagged
/// as training data until [`split`] assigns partitions.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n_real + spec.n_fake;
    let mut pixels = Vec::with_capacity(n * spec.image_dim());
    for i in 0..spec.n_real {
        pixels.extend(normalize(&render_real(spec, i)));
    }
    for j in 0..spec.n_fake {
        pixels.extend(normalize(&render_fake(spec, j).image));
    }
    let mut labels = vec![Label::Real; spec.n_real];
    labels.extend(std::iter::repeat_n(Label::Fake, spec.n_fake));
    let mut fake_kind = vec![FakeKind::NotApplicable; spec.n_real];
    fake_kind.extend(std::iter::repeat_n(FakeKind::Manipulated, spec.n_fake));
    Ok(Dataset {
        height: spec.height,
        width: spec.width,
        images: Tensor::new(vec![n, spec.height, spec.width], pixels)?,
        labels,
        fake_kind,
        split: vec![Split::Train; n],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::Config(format!("split fractions must be non-negative, got {parts:?}")));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions must sum to 1, got {total}")));
        }
        Ok(())
    }

    /// Per-split sample counts for a class of `n` samples.
    pub fn counts(&self, n: usize) -> [usize; 3] {
        let train = ((n as f64 * self.train).round() as usize).min(n);
        let val = ((n as f64 * self.val).round() as usize).min(n - train);
        [train, val, n - train - val]
    }
}

/// Stratified, seeded re-assignment of split tags.
pub fn split(dataset: &Dataset, fractions: &SplitFractions, seed: u64) -> Result<Dataset> {
    fractions.validate()?;
    let active = [fractions.train, fractions.val, fractions.test]
        .iter()
        .filter(|&&f| f > 0.0)
        .count();
    let mut tags = vec![Split::Train; dataset.len()];
    for (stream, label) in [Label::Real, Label::Fake].into_iter().enumerate() {
        let mut members: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels[i] == label).collect();
        if !members.is_empty() && members.len() < active {
            return Err(Error::Data(format!(
                "class {} has {} samples but {active} splits are requested",
                label.as_str(),
                members.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream as u64);
        members.shuffle(&mut rng);
        let [train, val, _] = fractions.counts(members.len());
        for (k, &i) in members.iter().enumerate() {
            tags[i] = if k < train {
                Split::Train
            } else if k < train + val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Ok(Dataset {
        split: tags,
        ..dataset.clone()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub file: String,
    pub index: usize,
    pub label: Label,
    pub fake_kind: FakeKind,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub spec: CorpusSpec,
    pub fractions: SplitFractions,
    pub split_seed: u64,
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sample_file_name(split: Split, label: Label, index: usize) -> String {
    format!("{}/{}_{index:05}.pgm", split.as_str(), label.as_str())
}

/// Writes every image as PGM under `dir` and a `manifest.json` describing them.
pub fn write_corpus(
    dataset: &Dataset,
    spec: &CorpusSpec,
    fractions: &SplitFractions,
    split_seed: u64,
    dir: &Path,
) -> Result<Manifest> {
    for s in Split::ALL {
        let sub = dir.join(s.as_str());
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    }
    let mut entries = Vec::with_capacity(dataset.len());
    for i in 0..dataset.len() {
        let file = sample_file_name(dataset.split[i], dataset.labels[i], i);
        let img = GrayImage::new(dataset.width, dataset.height, dataset.image_bytes(i))?;
        pgm::save_pgm(&img, &dir.join(&file))?;
        entries.push(ManifestEntry {
            file,
            index: i,
            label: dataset.labels[i],
            fake_kind: dataset.fake_kind[i],
            split: dataset.split[i],
        });
    }
    let manifest = Manifest {
        spec: spec.clone(),
        fractions: *fractions,
        split_seed,
        entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Reads a corpus written by [`write_corpus`].
pub fn load_corpus(dir: &Path) -> Result<(Dataset, Manifest)> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let (h, w) = (manifest.spec.height, manifest.spec.width);
    let mut pixels = Vec::with_capacity(manifest.entries.len() * h * w);
    for entry in &manifest.entries {
        let img = pgm::load_pgm(&dir.join(&entry.file)).map_err(|e| match e {
            Error::Parse { offset, message } => {
                Error::Data(format!("{}: byte {offset}: {message}", entry.file))
            }
            other => other,
        })?;
        if img.width != w || img.height != h {
            return Err(Error::Data(format!(
                "{} is {}x{}, manifest says {w}x{h}",
                entry.file, img.width, img.height
            )));
        }
        pixels.extend(normalize(&img.pixels));
    }
    let n = manifest.entries.len();
    let dataset = Dataset {
        height: h,
        width: w,
        images: Tensor::new(vec![n, h, w], pixels)?,
        labels: manifest.entries.iter().map(|e| e.label).collect(),
        fake_kind: manifest.entries.iter().map(|e| e.fake_kind).collect(),
        split: manifest.entries.iter().map(|e| e.split).collect(),
    };
    Ok((dataset, manifest))
}
