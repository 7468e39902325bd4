#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voqual_harness::synth::{write_mini_corpus, SynthCorpus};
use voqual_harness::ExperimentConfig;

pub fn corpus(dir: &Path) -> SynthCorpus {
    write_mini_corpus(&dir.join("corpus"), 12, 0).unwrap()
}

/// Corpus config with a single-cell grid so tests stay quick.
pub fn quick_config(c: &SynthCorpus, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&c.config).unwrap();
    cfg.grid.n_trees = vec![50];
    cfg.grid.max_depth = vec![6];
    cfg.grid.min_samples_leaf = vec![1];
    cfg.grid.mtry = vec!["sqrt".into()];
    cfg.output.dir = out.to_path_buf();
    cfg
}

/// Pooled random embedding table for the given clips.
pub fn embedding_table(path: &Path, clips: &[String], dim: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = String::from("clip_id");
    for k in 0..dim {
        write!(s, ",e{k}").unwrap();
    }
    s.push('\n');
    for c in clips {
        s.push_str(c);
        for _ in 0..dim {
            write!(s, ",{}", rng.random_range(-1.0..1.0)).unwrap();
        }
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
    path.to_path_buf()
}

/// Every file under `dir`, keyed by relative path.
pub fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}
