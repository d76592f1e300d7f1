//! Corpus generation, splitting and on-disk round trips.

mod common;

use std::fs;
use std::path::Path;

use common::pair_count_auc;
use paygan::data::{
    generate_corpus, load_corpus, render_fake, render_real, split, write_corpus, CorpusSpec, Dataset, FakeKind,
    Label, Split, SplitFractions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mad(a: &[u8], b: &[u8]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x as f64 - *y as f64).abs()).sum::<f64>() / a.len() as f64
}

/// Mean absolute difference between each image and the clean card it was rendered from.
/// Reals are their own template; fakes are compared with their pre-manipulation source.
/// Computed over the whole card because glyph-strip manipulations leave the portrait untouched.
#[test]
fn template_difference_separates_classes() {
    let spec = CorpusSpec {
        n_real: 300,
        n_fake: 300,
        manipulation_strength: 1.0,
        ..CorpusSpec::default()
    };
    let ds = generate_corpus(&spec).unwrap();
    let mut stats = Vec::with_capacity(ds.len());
    for i in 0..ds.len() {
        let img = ds.image_bytes(i);
        let template = match ds.labels[i] {
            Label::Real => render_real(&spec, i),
            Label::Fake => render_fake(&spec, i - spec.n_real).source,
        };
        stats.push(mad(&img, &template));
    }
    let auc = pair_count_auc(&stats, &ds.labels);
    assert!(auc >= 0.9, "template-difference AUC {auc}");
}

#[test]
fn manipulations_stay_inside_their_region() {
    let spec = CorpusSpec::default();
    for j in 0..300 {
        let f = render_fake(&spec, j);
        let mut changed = 0;
        for (i, (a, b)) in f.image.iter().zip(&f.source).enumerate() {
            if a != b {
                changed += 1;
                assert!(f.region.contains(i / spec.width, i % spec.width), "fake {j} pixel {i}");
            }
        }
        assert!(changed > 0, "fake {j} ({:?}) is identical to its source", f.manipulation);
    }
}

#[test]
fn corpus_is_balanced_in_range_and_reproducible() {
    let spec = CorpusSpec {
        n_real: 120,
        n_fake: 80,
        ..CorpusSpec::default()
    };
    let a = generate_corpus(&spec).unwrap();
    assert_eq!(a, generate_corpus(&spec).unwrap());
    assert_eq!(a.count(Label::Real), 120);
    assert_eq!(a.count(Label::Fake), 80);
    assert!(a.images.data().iter().all(|v| (-1.0..=1.0).contains(v)));
    for i in 0..a.len() {
        let expect = if a.labels[i] == Label::Fake { FakeKind::Manipulated } else { FakeKind::NotApplicable };
        assert_eq!(a.fake_kind[i], expect);
    }
    let empty = generate_corpus(&CorpusSpec {
        n_real: 0,
        n_fake: 0,
        ..CorpusSpec::default()
    })
    .unwrap();
    assert!(empty.is_empty());
}

fn count(ds: &Dataset, s: Split, l: Label) -> usize {
    (0..ds.len()).filter(|&i| ds.split[i] == s && ds.labels[i] == l).count()
}

#[test]
fn split_counts_follow_fractions_per_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..20u64 {
        let n_real = rng.random_range(3..60);
        let n_fake = rng.random_range(3..60);
        let train = rng.random_range(0.3..0.9);
        let val = rng.random_range(0.0..(1.0 - train));
        let fractions = SplitFractions {
            train,
            val,
            test: 1.0 - train - val,
        };
        let spec = CorpusSpec {
            n_real,
            n_fake,
            height: 8,
            width: 8,
            seed,
            ..CorpusSpec::default()
        };
        let base = generate_corpus(&spec).unwrap();
        let ds = split(&base, &fractions, seed).unwrap();
        // Same images and labels, only the tags change.
        assert_eq!(ds.images, base.images);
        assert_eq!(ds.labels, base.labels);
        for (label, n) in [(Label::Real, n_real), (Label::Fake, n_fake)] {
            let per_split: Vec<usize> = Split::ALL.iter().map(|&s| count(&ds, s, label)).collect();
            assert_eq!(per_split.iter().sum::<usize>(), n, "partition");
            for (k, f) in [fractions.train, fractions.val, fractions.test].into_iter().enumerate() {
                let expected = f * n as f64;
                assert!(
                    (per_split[k] as f64 - expected).abs() <= 1.0,
                    "seed {seed} {label:?} split {k}: {} vs {expected}",
                    per_split[k]
                );
            }
        }
    }
}

#[test]
fn thousand_samples_split_eight_one_one() {
    let spec = CorpusSpec {
        n_real: 500,
        n_fake: 500,
        height: 8,
        width: 8,
        ..CorpusSpec::default()
    };
    let ds = split(&generate_corpus(&spec).unwrap(), &SplitFractions::default(), 1).unwrap();
    let totals: Vec<usize> = Split::ALL.iter().map(|&s| ds.indices_in(s).len()).collect();
    assert_eq!(totals, vec![800, 100, 100]);
    let all_train = split(
        &ds,
        &SplitFractions {
            train: 1.0,
            val: 0.0,
            test: 0.0,
        },
        1,
    )
    .unwrap();
    assert!(all_train.split.iter().all(|&s| s == Split::Train));
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn written_corpus_round_trips_and_is_byte_stable() {
    let spec = CorpusSpec {
        n_real: 20,
        n_fake: 20,
        ..CorpusSpec::default()
    };
    let fractions = SplitFractions::default();
    let ds = split(&generate_corpus(&spec).unwrap(), &fractions, 9).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let manifest = write_corpus(&ds, &spec, &fractions, 9, a.path()).unwrap();
    write_corpus(&ds, &spec, &fractions, 9, b.path()).unwrap();
    assert_eq!(read_tree(a.path()), read_tree(b.path()));
    assert_eq!(manifest.entries.len(), 40);

    let (loaded, loaded_manifest) = load_corpus(a.path()).unwrap();
    assert_eq!(loaded, ds);
    assert_eq!(loaded_manifest, manifest);
}

#[test]
fn corrupt_corpus_files_are_data_errors() {
    let spec = CorpusSpec {
        n_real: 4,
        n_fake: 4,
        ..CorpusSpec::default()
    };
    let fractions = SplitFractions::default();
    let ds = split(&generate_corpus(&spec).unwrap(), &fractions, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(&ds, &spec, &fractions, 2, dir.path()).unwrap();
    let victim = dir.path().join(&manifest.entries[3].file);
    let bytes = fs::read(&victim).unwrap();
    fs::write(&victim, &bytes[..bytes.len() - 10]).unwrap();
    match load_corpus(dir.path()) {
        Err(paygan::Error::Data(msg)) => assert!(msg.contains(&manifest.entries[3].file), "{msg}"),
        other => panic!("unexpected {other:?}"),
    }
}
