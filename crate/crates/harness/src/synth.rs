//! Synthetic mini-corpus: harmonic tones mixed with noise whose acoustic
//! properties drive constructed quality labels.
//!
//! Each clip draws five latent controls, each a shuffled ladder of evenly
//! spaced levels in [0, 1] so every control spans its full range:
//!
//! | latent | acoustic effect | label |
//! |---|---|---|
//! | u0 | F0 100–300 Hz | pitch |
//! | u1 | noise-to-harmonic ratio | breathiness |
//! | u2 | F0 excursions held for 25 ms | roughness |
//! | u3 | harmonic roll-off (brighter when high) | strain |
//! | u4 | period-to-period amplitude perturbation | loudness |
//!
//! Resonance rises with brightness and F0; weight falls with both.
//! Three clinicians rate the five clinical qualities twice; one teacher rates
//! resonance and weight on every clip and a second on the first four; six
//! non-experts rate everything with a +10 bias.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use voqual_core::{ClipRecord, PQVector, PerceptualQuality, RaterClass, RatingRecord};
use voqual_dsp::{write_wav_pcm16, AudioBuffer};

use crate::error::{HarnessError, Result};

pub const DEFAULT_CLIPS: usize = 12;
pub const SAMPLE_RATE_HZ: u32 = 16000;
pub const CLIP_SECONDS: f64 = 1.5;
const WOBBLE_SECONDS: f64 = 0.025;

const CLINICIANS: [&str; 3] = ["clin1", "clin2", "clin3"];
const TEACHERS: [&str; 2] = ["teach1", "teach2"];
const TEACHER2_CLIPS: usize = 4;
const NONEXPERTS: usize = 6;
const EXPERT_NOISE: f64 = 4.0;
const NONEXPERT_NOISE: f64 = 8.0;
const NONEXPERT_BIAS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Latents(pub [f64; 5]);

impl Latents {
    pub fn f0_hz(&self) -> f64 {
        100.0 + 200.0 * self.0[0]
    }
    pub fn noise_ratio(&self) -> f64 {
        0.02 + 0.4 * self.0[1]
    }
    /// Relative F0 excursion, redrawn every `WOBBLE_SECONDS`.
    pub fn wobble(&self) -> f64 {
        0.08 * self.0[2]
    }
    /// Harmonic amplitude falls as k^-tilt.
    pub fn tilt(&self) -> f64 {
        3.0 - 2.5 * self.0[3]
    }
    pub fn shimmer(&self) -> f64 {
        0.5 * self.0[4]
    }

    /// Constructed "true" labels, in canonical quality order.
    pub fn labels(&self) -> [f64; 7] {
        let [u0, u1, u2, u3, u4] = self.0;
        let mut v = [0.0; 7];
        v[PerceptualQuality::Resonance.index()] = 10.0 + 50.0 * u3 + 30.0 * u0;
        v[PerceptualQuality::Weight.index()] = 90.0 - 50.0 * u0 - 30.0 * u3;
        v[PerceptualQuality::Strain.index()] = 10.0 + 80.0 * u3;
        v[PerceptualQuality::Loudness.index()] = 10.0 + 80.0 * u4;
        v[PerceptualQuality::Roughness.index()] = 10.0 + 80.0 * u2;
        v[PerceptualQuality::Breathiness.index()] = 10.0 + 80.0 * u1;
        v[PerceptualQuality::Pitch.index()] = 10.0 + 80.0 * u0;
        v
    }
}

/// Latents for `n` clips; every control visits each of `n` levels once.
pub fn latents(n: usize, seed: u64) -> Vec<Latents> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ladders: Vec<Vec<f64>> = (0..5)
        .map(|_| {
            let mut l: Vec<f64> = (0..n).map(|i| i as f64 / (n.max(2) - 1) as f64).collect();
            l.shuffle(&mut rng);
            l
        })
        .collect();
    (0..n).map(|i| Latents(std::array::from_fn(|k| ladders[k][i]))).collect()
}

/// Renders one clip, period by period.
pub fn render(lat: &Latents, secs: f64, sr: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = (secs * sr as f64) as usize;
    let n_harm = ((0.45 * sr as f64 / lat.f0_hz()) as usize).clamp(1, 30);
    let weights: Vec<f64> = (1..=n_harm).map(|k| (k as f64).powf(-lat.tilt())).collect();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt() / std::f64::consts::SQRT_2;
    let hold = (WOBBLE_SECONDS * sr as f64) as usize;
    let mut out = Vec::with_capacity(n);
    let (mut f, mut next_draw) = (lat.f0_hz(), 0);
    while out.len() < n {
        if out.len() >= next_draw {
            f = lat.f0_hz() * (1.0 + lat.wobble() * rng.random_range(-1.0..1.0));
            next_draw = out.len() + hold;
        }
        let amp = 1.0 + lat.shimmer() * rng.random_range(-1.0..1.0);
        let period = (sr as f64 / f).round().max(2.0) as usize;
        for t in 0..period {
            let phase = 2.0 * PI * t as f64 / period as f64;
            let h: f64 = weights.iter().enumerate().map(|(k, w)| w * ((k + 1) as f64 * phase).sin()).sum();
            out.push(amp * h / norm);
        }
    }
    out.truncate(n);
    let noise = Normal::new(0.0, lat.noise_ratio()).unwrap();
    let peak = out
        .iter_mut()
        .map(|s| {
            *s += noise.sample(rng);
            s.abs()
        })
        .fold(0.0, f64::max);
    out.iter().map(|s| 0.5 * s / peak).collect()
}

fn timestamp(i: usize) -> DateTime<Utc> {
    "2024-01-01T00:00:00Z".parse::<DateTime<Utc>>().unwrap() + Duration::minutes(i as i64)
}

fn rated(truth: &[f64; 7], pqs: &[PerceptualQuality], shift: f64, noise: &Normal<f64>, rng: &mut ChaCha8Rng) -> PQVector {
    let mut v = [None; 7];
    for pq in pqs {
        let x = truth[pq.index()] + shift + noise.sample(rng);
        v[pq.index()] = Some(x.clamp(0.0, 100.0));
    }
    PQVector::new(v).expect("at least one quality")
}

/// All ratings of the corpus, experts first.
pub fn ratings(clips: &[(String, Latents)], seed: u64) -> Vec<RatingRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let clinical: Vec<PerceptualQuality> = PerceptualQuality::ALL.into_iter().filter(|q| !q.gendered()).collect();
    let gendered: Vec<PerceptualQuality> = PerceptualQuality::ALL.into_iter().filter(|q| q.gendered()).collect();
    let expert = Normal::new(0.0, EXPERT_NOISE).unwrap();
    let crowd = Normal::new(0.0, NONEXPERT_NOISE).unwrap();
    let mut out = Vec::new();
    let mut tick = 0;
    let mut push = |out: &mut Vec<RatingRecord>, clip: &str, rater: &str, class, trial, values| {
        out.push(RatingRecord {
            clip_id: clip.to_string(),
            rater_id: rater.to_string(),
            rater_class: class,
            trial,
            values,
            timestamp: timestamp(tick),
        });
        tick += 1;
    };
    for (i, (clip, lat)) in clips.iter().enumerate() {
        let truth = lat.labels();
        for trial in 1..=2 {
            for c in CLINICIANS {
                let v = rated(&truth, &clinical, 0.0, &expert, &mut rng);
                push(&mut out, clip, c, RaterClass::Expert, trial, v);
            }
        }
        for (t, teacher) in TEACHERS.iter().enumerate() {
            if t == 0 || i < TEACHER2_CLIPS {
                let v = rated(&truth, &gendered, 0.0, &expert, &mut rng);
                push(&mut out, clip, teacher, RaterClass::Expert, 1, v);
            }
        }
    }
    for (clip, lat) in clips {
        let truth = lat.labels();
        for w in 0..NONEXPERTS {
            let v = rated(&truth, &PerceptualQuality::ALL, NONEXPERT_BIAS, &crowd, &mut rng);
            push(&mut out, clip, &format!("crowd{}", w + 1), RaterClass::NonExpert, 1, v);
        }
    }
    out
}

/// Paths of a written corpus.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub dir: PathBuf,
    pub clips: PathBuf,
    pub ratings: PathBuf,
    pub anchors: PathBuf,
    pub config: PathBuf,
    pub latents: Vec<(String, Latents)>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn anchors_csv(clips: &[(String, Latents)]) -> String {
    let mut s = voqual_annot::anchors::ANCHORS_HEADER.join(",") + "\n";
    for pq in PerceptualQuality::ALL {
        let by = |a: &&(String, Latents), b: &&(String, Latents)| {
            a.1.labels()[pq.index()].total_cmp(&b.1.labels()[pq.index()])
        };
        let lo = clips.iter().min_by(by).expect("nonempty corpus");
        let hi = clips.iter().max_by(by).expect("nonempty corpus");
        let (lo_word, hi_word) = pq.poles();
        let cap = |w: &str| {
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().collect::<String>() + c.as_str()).unwrap_or_default()
        };
        writeln!(s, "{pq},low,{},{},", lo.0, cap(lo_word)).unwrap();
        writeln!(s, "{pq},high,{},{},", hi.0, cap(hi_word)).unwrap();
    }
    s
}

pub const SYNTH_CONFIG: &str = r#"# Synthetic mini-corpus experiment.
seed = 0

[labels]
clips = "clips.csv"
ratings = "ratings.csv"

[features]
sets = ["compare-lite"]
normalize = true

[split]
train = 0.6
val = 0.2
test = 0.2

# Small-data grid: seven training clips cannot support larger leaves.
[grid]
n_trees = [100, 300]
max_depth = [4, 10]
min_samples_leaf = [1, 2]
mtry = ["sqrt", "third"]

[output]
dir = "out"

[serve]
anchors = "anchors.csv"
log = "annotations.jsonl"
"#;

/// Writes audio, manifest, ratings, anchors and an experiment config under `dir`.
pub fn write_mini_corpus(dir: &Path, n_clips: usize, seed: u64) -> Result<SynthCorpus> {
    if n_clips < 3 {
        return Err(HarnessError::Input(format!("need at least 3 clips, got {n_clips}")));
    }
    let audio_dir = dir.join("audio");
    std::fs::create_dir_all(&audio_dir).map_err(|e| HarnessError::io(&audio_dir, e))?;
    let lats = latents(n_clips, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut clips = Vec::new();
    let mut named = Vec::new();
    for (i, lat) in lats.iter().enumerate() {
        let id = format!("syn{:02}", i + 1);
        let rel = format!("audio/{id}.wav");
        let samples = render(lat, CLIP_SECONDS, SAMPLE_RATE_HZ, &mut rng);
        let buf = AudioBuffer::new(samples, SAMPLE_RATE_HZ, id.clone())?;
        write_wav_pcm16(&dir.join(&rel), &buf)?;
        clips.push(ClipRecord {
            clip_id: id.clone(),
            audio_path: rel,
            duration_s: CLIP_SECONDS,
            sample_rate_hz: SAMPLE_RATE_HZ,
            tags: vec!["synthetic".into()],
        });
        named.push((id, *lat));
    }
    let corpus = SynthCorpus {
        dir: dir.to_path_buf(),
        clips: dir.join("clips.csv"),
        ratings: dir.join("ratings.csv"),
        anchors: dir.join("anchors.csv"),
        config: dir.join("experiment.toml"),
        latents: named,
    };
    let create = |p: &Path| std::fs::File::create(p).map_err(|e| HarnessError::io(p, e));
    voqual_core::labels::write_clips(create(&corpus.clips)?, &clips)?;
    voqual_core::labels::write_ratings(create(&corpus.ratings)?, &ratings(&corpus.latents, seed))?;
    write_text(&corpus.anchors, &anchors_csv(&corpus.latents))?;
    write_text(&corpus.config, SYNTH_CONFIG)?;
    Ok(corpus)
}
