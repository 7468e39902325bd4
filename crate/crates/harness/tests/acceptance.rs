//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! The optional real-data check reads `VOQUAL_PVQD_RATINGS` (a ratings CSV
//! in the ingest schema) and, for the forest comparison, `VOQUAL_PVQD_CONFIG`
//! (an experiment config whose ratings include non-expert rows).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use voqual_annot::{AnnotService, Corpus, NextResponse, RatingSubmission, ServiceConfig, SystemClock};
use voqual_core::split::make_split;
use voqual_core::stats::{anova_two_way, icc21, icc2k, pearson, rmse};
use voqual_core::{AgreementReport, ClipRecord, PerceptualQuality, RaterClass, RatingMatrix, SplitRatios};
use voqual_dsp::functionals::compute as functionals;
use voqual_dsp::{extract_llds, AudioBuffer};
use voqual_forest::{Forest, Hyperparams, Matrix, MeanBaseline, Mtry, Node, RegressionTree};
use voqual_harness::synth::write_mini_corpus;
use voqual_harness::{run_and_write, ExperimentConfig};

type Check = std::result::Result<String, String>;

enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Suite {
    failed: usize,
}

impl Suite {
    fn report(&mut self, verdict: Verdict, name: &str, elapsed: Option<Duration>, detail: &str) {
        let tag = match verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                self.failed += 1;
                "FAIL"
            }
            Verdict::Skip => "SKIP",
        };
        let t = elapsed.map_or(String::new(), |d| format!(" [{:.2}s]", d.as_secs_f64()));
        println!("{tag} {name}{t}: {detail}");
    }

    /// Runs `f`; a panic, an error or a blown time budget is a failure.
    fn run(&mut self, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f));
        let took = start.elapsed();
        let (verdict, detail) = match out {
            Ok(Ok(d)) => match budget {
                Some(b) if took > b => (Verdict::Fail, format!("{d}; over the {:.0}s budget", b.as_secs_f64())),
                _ => (Verdict::Pass, d),
            },
            Ok(Err(e)) => (Verdict::Fail, e),
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                (Verdict::Fail, format!("panicked: {msg}"))
            }
        };
        self.report(verdict, name, Some(took), &detail);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Two-way ANOVA from raw sums (computational formulas), then ICC(2,k) and
/// ICC(2,1); an ICC is `None` where its denominator is not positive.
fn brute_icc(rows: &[Vec<f64>]) -> ([f64; 3], Option<f64>, Option<f64>) {
    let n = rows.len();
    let k = rows[0].len();
    let (nf, kf) = (n as f64, k as f64);
    let total: f64 = rows.iter().flatten().sum();
    let c = total * total / (nf * kf);
    let ss_total = rows.iter().flatten().map(|x| x * x).sum::<f64>() - c;
    let ss_rows = rows.iter().map(|r| r.iter().sum::<f64>().powi(2)).sum::<f64>() / kf - c;
    let ss_cols = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>().powi(2)).sum::<f64>() / nf - c;
    let ss_err = ss_total - ss_rows - ss_cols;
    let msr = ss_rows / (nf - 1.0);
    let msc = ss_cols / (kf - 1.0);
    let mse = ss_err / ((nf - 1.0) * (kf - 1.0));
    let ratio = |den: f64| (den > 0.0).then(|| (msr - mse) / den);
    (
        [msr, msc, mse],
        ratio(msr + (msc - mse) / nf),
        ratio(msr + (kf - 1.0) * mse + kf * (msc - mse) / nf),
    )
}

fn statistics_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let (trials, mut compared, mut undefined) = (300, 0, 0);
    for t in 0..trials {
        let n = rng.random_range(2..=20);
        let k = rng.random_range(2..=6);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.random_range(0.0..100.0)).collect()).collect();
        let m = RatingMatrix::new(rows.clone()).map_err(|e| e.to_string())?;
        let a = anova_two_way(&m);
        let (ms, ik, i1) = brute_icc(&rows);
        let mut pairs = vec![("msr", a.msr, ms[0]), ("msc", a.msc, ms[1]), ("mse", a.mse, ms[2])];
        for (name, got, want) in [("icc2k", icc2k(&m).ok(), ik), ("icc21", icc21(&m).ok(), i1)] {
            match (got, want) {
                (Some(g), Some(w)) => pairs.push((name, g, w)),
                (None, None) => undefined += 1,
                _ => return Err(format!("matrix {t} ({n}x{k}): {name} {got:?} vs oracle {want:?}")),
            }
        }
        for (name, x, y) in pairs {
            let d = (x - y).abs();
            worst = worst.max(d);
            ensure(d <= 1e-9, || format!("matrix {t} ({n}x{k}): {name} {x} vs oracle {y}"))?;
        }
        if ik.is_some() && i1.is_some() {
            compared += 1;
        }
    }
    ensure(compared >= 100, || format!("only {compared} matrices had defined ICCs"))?;
    let worked = RatingMatrix::new(vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0]]).map_err(|e| e.to_string())?;
    let v = icc2k(&worked).map_err(|e| e.to_string())?;
    ensure(v == 0.8, || format!("worked example gives {v}, want 0.8"))?;
    Ok(format!(
        "{compared} matrices with defined ICCs, max |diff| {worst:.1e}; {undefined} undefined ICC(s) agreed; worked example = {v}"
    ))
}

fn metric_identities() -> Check {
    let x = [1.0, 2.0, 3.0, 4.0, 7.5];
    let up: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
    let down: Vec<f64> = x.iter().map(|v| -0.5 * v + 1.0).collect();
    let r_up = pearson(&x, &up).map_err(|e| e.to_string())?;
    let r_down = pearson(&x, &down).map_err(|e| e.to_string())?;
    let r_ex = pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).map_err(|e| e.to_string())?;
    ensure((r_up - 1.0).abs() <= 1e-12, || format!("linear r = {r_up}"))?;
    ensure((r_down + 1.0).abs() <= 1e-12, || format!("anti-linear r = {r_down}"))?;
    ensure((r_ex + 1.0).abs() <= 1e-12, || format!("[1,2,3] vs [6,4,2] r = {r_ex}"))?;
    let e = rmse(&[0.0, 0.0], &[3.0, 4.0]).map_err(|e| e.to_string())?;
    ensure((e - 12.5f64.sqrt()).abs() <= 1e-12, || format!("rmse {e}, want sqrt(12.5)"))?;
    let z = rmse(&x, &x).map_err(|e| e.to_string())?;
    ensure(z == 0.0, || format!("rmse of identical vectors {z}"))?;
    Ok(format!("r = {r_up}, {r_down}, {r_ex}; rmse = {e}"))
}

fn sine(f: f64, secs: f64, sr: u32) -> AudioBuffer {
    let n = (secs * sr as f64) as usize;
    let s = (0..n).map(|i| 0.5 * (2.0 * std::f64::consts::PI * f * i as f64 / sr as f64).sin()).collect();
    AudioBuffer::new(s, sr, "sine").unwrap()
}

fn mean_voiced_f0(buf: &AudioBuffer) -> std::result::Result<(f64, usize), String> {
    let llds = extract_llds(buf).map_err(|e| e.to_string())?;
    let f0 = llds.column_by_name("F0_hz").ok_or("no F0_hz column")?;
    let v: Vec<f64> = f0.iter().zip(llds.voiced()).filter(|(_, v)| **v).map(|(f, _)| *f).collect();
    ensure(!v.is_empty(), || "no voiced frames".into())?;
    Ok((v.iter().sum::<f64>() / v.len() as f64, v.len()))
}

fn dsp_suite() -> Check {
    let (f220, n220) = mean_voiced_f0(&sine(220.0, 1.0, 16000))?;
    ensure((f220 - 220.0).abs() <= 2.0, || format!("220 Hz sine: mean F0 {f220:.3}"))?;
    let (f440, n440) = mean_voiced_f0(&sine(440.0, 1.0, 16000))?;
    ensure((f440 - 440.0).abs() <= 4.0, || format!("440 Hz sine: mean F0 {f440:.3}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = Normal::new(0.0, 0.2).unwrap();
    let noise = AudioBuffer::new((0..16000).map(|_| g.sample(&mut rng)).collect(), 16000, "noise").unwrap();
    let llds = extract_llds(&noise).map_err(|e| e.to_string())?;
    let unvoiced = llds.voiced().iter().filter(|v| !**v).count() as f64 / llds.n_frames() as f64;
    ensure(unvoiced >= 0.9, || format!("white noise: {:.1}% unvoiced", 100.0 * unvoiced))?;

    for (c, n) in [(0.0, 2), (-3.25, 17), (1e6, 250)] {
        let idx: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let f = functionals(&vec![c; n], &idx);
        ensure(f[1] == 0.0 && f[11] == 0.0, || format!("constant {c} over {n}: std {} slope {}", f[1], f[11]))?;
    }
    Ok(format!(
        "F0 {f220:.2} Hz ({n220} frames), {f440:.2} Hz ({n440} frames); noise {:.1}% unvoiced; constant columns exact",
        100.0 * unvoiced
    ))
}

/// Exhaustive root split: every feature, every midpoint, SSE scored directly.
fn oracle_root(rows: &[Vec<f64>], y: &[f64]) -> (usize, f64) {
    let sse = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - m).powi(2)).sum::<f64>()
    };
    let mut best = (usize::MAX, f64::NAN, f64::INFINITY);
    for f in 0..rows[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let l: Vec<f64> = (0..y.len()).filter(|&i| rows[i][f] <= t).map(|i| y[i]).collect();
            let r: Vec<f64> = (0..y.len()).filter(|&i| rows[i][f] > t).map(|i| y[i]).collect();
            let s = sse(&l) + sse(&r);
            if s < best.2 {
                best = (f, t, s);
            }
        }
    }
    (best.0, best.1)
}

fn root_split(rows: &[Vec<f64>], y: &[f64]) -> std::result::Result<(usize, f64), String> {
    let p = Hyperparams {
        n_trees: 1,
        max_depth: 1,
        min_samples_leaf: 1,
        mtry: Mtry::All,
        seed: 0,
        bootstrap: false,
    };
    let x = Matrix::from_rows(rows).map_err(|e| e.to_string())?;
    let idx: Vec<usize> = (0..y.len()).collect();
    let t = RegressionTree::fit(&x, y, &idx, &p, &mut ChaCha8Rng::seed_from_u64(0)).map_err(|e| e.to_string())?;
    match t.nodes()[0] {
        Node::Split { feature, threshold, .. } => Ok((feature, threshold)),
        _ => Err("root is a leaf".into()),
    }
}

fn linear_benchmark(seed: u64) -> (Matrix, Vec<f64>, Matrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..10).map(|_| rng.random_range(0.0..10.0)).collect()).collect();
    let y: Vec<f64> = rows.iter().map(|r| 3.0 * r[0] + noise.sample(&mut rng)).collect();
    (
        Matrix::from_rows(&rows[..160]).unwrap(),
        y[..160].to_vec(),
        Matrix::from_rows(&rows[160..]).unwrap(),
        y[160..].to_vec(),
    )
}

fn forest_correctness() -> Check {
    let step_rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
    let step_y = [0.0, 0.0, 10.0, 10.0];
    let got = root_split(&step_rows, &step_y)?;
    let want = oracle_root(&step_rows, &step_y);
    ensure(got == want && want == (0, 1.5), || format!("step split {got:?}, oracle {want:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for t in 0..50 {
        let rows: Vec<Vec<f64>> = (0..rng.random_range(4..30))
            .map(|_| (0..rng.random_range(1..5)).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let d = rows[0].len();
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|mut r| {
            r.resize(d, 0.0);
            r
        }).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0].sin() * 4.0 + r[d - 1] + rng.random_range(0.0..0.5)).collect();
        let got = root_split(&rows, &y)?;
        let want = oracle_root(&rows, &y);
        ensure(got.0 == want.0 && (got.1 - want.1).abs() <= 1e-12, || {
            format!("random case {t}: split {got:?}, oracle {want:?}")
        })?;
    }

    let (xt, yt, xs, ys) = linear_benchmark(2024);
    let p = Hyperparams { seed: 42, ..Default::default() };
    let a = Forest::fit(&xt, &yt, &p).map_err(|e| e.to_string())?;
    let b = Forest::fit(&xt, &yt, &p).map_err(|e| e.to_string())?;
    let pa = a.predict_matrix(&xs).map_err(|e| e.to_string())?;
    let pb = b.predict_matrix(&xs).map_err(|e| e.to_string())?;
    ensure(pa.iter().zip(&pb).all(|(x, y)| x.to_bits() == y.to_bits()), || "refit predictions differ".into())?;
    ensure(a.trees() == b.trees(), || "refit trees differ".into())?;

    let mut worst: f64 = 0.0;
    for seed in [2024, 1, 2, 3, 4] {
        let (xt, yt, xs, ys) = linear_benchmark(seed);
        let f = Forest::fit(&xt, &yt, &Hyperparams { seed: 1, ..Default::default() }).map_err(|e| e.to_string())?;
        let fr = rmse(&f.predict_matrix(&xs).map_err(|e| e.to_string())?, &ys).map_err(|e| e.to_string())?;
        let base = MeanBaseline::fit(&yt).map_err(|e| e.to_string())?.predict();
        let br = rmse(&vec![base; ys.len()], &ys).map_err(|e| e.to_string())?;
        worst = worst.max(fr / br);
        ensure(fr <= 0.5 * br, || format!("benchmark {seed}: forest {fr:.3} vs baseline {br:.3}"))?;
    }
    let _ = ys;
    Ok(format!("step and 50 random root splits match the oracle; refits bit-identical; worst forest/baseline ratio {worst:.3} over 5 benchmarks"))
}

fn end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = write_mini_corpus(&dir.path().join("corpus"), 12, 0).map_err(|e| e.to_string())?;
    let mut outs = Vec::new();
    let mut table = None;
    for name in ["a", "b"] {
        let mut cfg = ExperimentConfig::load(&corpus.config).map_err(|e| e.to_string())?;
        cfg.output.dir = dir.path().join(name);
        let (run, files) = run_and_write(&cfg).map_err(|e| e.to_string())?;
        let bytes: BTreeMap<String, Vec<u8>> =
            files.iter().map(|f| (f.clone(), std::fs::read(cfg.out_dir().join(f)).unwrap())).collect();
        outs.push(bytes);
        table = Some(run.table);
    }
    ensure(outs[0] == outs[1], || {
        let diff: Vec<&String> = outs[0].keys().filter(|k| outs[1].get(*k) != Some(&outs[0][*k])).collect();
        format!("outputs differ: {diff:?}")
    })?;
    let table = table.unwrap();
    let mut wins = Vec::new();
    let mut losses = Vec::new();
    for r in &table.rows {
        match (r.test_rmse, r.baseline_rmse) {
            (Some(t), Some(b)) if t < b => wins.push(format!("{} {t:.1}<{b:.1}", r.pq)),
            (t, b) => losses.push(format!("{} {t:?} vs {b:?}", r.pq)),
        }
    }
    ensure(wins.len() >= 6, || format!("forest beats baseline on {}/7; misses: {}", wins.len(), losses.join(", ")))?;
    Ok(format!("{} files identical across two runs; forest < baseline on {}/7 ({})", outs[0].len(), wins.len(), wins.join(", ")))
}

fn split_contract() -> Check {
    let ids: Vec<String> = (0..296).map(|i| format!("pvqd{i:03}")).collect();
    let s = make_split(&ids, 0, SplitRatios::default()).map_err(|e| e.to_string())?;
    ensure(s.sizes() == (177, 59, 60), || format!("n = 296 gives {:?}", s.sizes()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let n = rng.random_range(3..=600);
        let seed: u64 = rng.random();
        let ids: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let s = make_split(&ids, seed, SplitRatios::default()).map_err(|e| e.to_string())?;
        let sets: Vec<BTreeSet<&String>> = [&s.train, &s.val, &s.test].iter().map(|p| p.iter().collect()).collect();
        let total = s.train.len() + s.val.len() + s.test.len();
        let union: BTreeSet<&String> = sets.iter().flatten().copied().collect();
        ensure(total == n && union.len() == n && union.iter().all(|id| ids.contains(id)), || {
            format!("n = {n}, seed = {seed}: not a partition")
        })?;
        let want = ((0.6 * n as f64 + 1e-9).floor() as usize, (0.2 * n as f64 + 1e-9).floor() as usize);
        ensure((s.train.len(), s.val.len()) == want, || format!("n = {n}: sizes {:?}", s.sizes()))?;
        let again = make_split(&ids, seed, SplitRatios::default()).map_err(|e| e.to_string())?;
        ensure(again == s, || format!("n = {n}, seed = {seed}: not reproducible"))?;
    }
    Ok("296 -> (177, 59, 60); 1000 random (n, seed) pairs partition exactly".into())
}

const RATERS: usize = 50;
const SUBMISSIONS: usize = 500;

struct ServiceRig {
    dir: tempfile::TempDir,
    clips: Vec<ClipRecord>,
}

impl ServiceRig {
    fn new(n: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let clips = (0..n)
            .map(|i| ClipRecord {
                clip_id: format!("clip{i:03}"),
                audio_path: format!("audio/clip{i:03}.wav"),
                duration_s: 1.0,
                sample_rate_hz: 16000,
                tags: vec![],
            })
            .collect();
        Self { dir, clips }
    }

    fn log(&self) -> std::path::PathBuf {
        self.dir.path().join("ratings.jsonl")
    }

    fn open(&self) -> std::result::Result<AnnotService, String> {
        let corpus = Corpus {
            clips: self.clips.clone(),
            audio_root: self.dir.path().to_path_buf(),
            expert_ratings: vec![],
            anchors: vec![],
        };
        AnnotService::open(corpus, ServiceConfig::new(self.log()), Arc::new(SystemClock)).map_err(|e| e.to_string())
    }
}

type Acked = (String, String, BTreeMap<String, f64>);

/// Drives `budget` submissions from `RATERS` threads; returns the acks.
fn drive(svc: &AnnotService, budget: usize, rater_seed: u64) -> std::result::Result<Vec<Acked>, String> {
    let issued = AtomicUsize::new(0);
    let acks = Mutex::new(Vec::new());
    let errors = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for r in 0..RATERS {
            let (issued, acks, errors) = (&issued, &acks, &errors);
            s.spawn(move || {
                let rater = format!("w{r:02}");
                let mut rng = ChaCha8Rng::seed_from_u64(rater_seed * 1000 + r as u64);
                loop {
                    if issued.fetch_add(1, Ordering::SeqCst) >= budget {
                        return;
                    }
                    let clip = match svc.next_clip(&rater) {
                        Ok(NextResponse::Assigned { clip_id, .. }) => clip_id,
                        Ok(_) => {
                            issued.fetch_sub(1, Ordering::SeqCst);
                            return;
                        }
                        Err(e) => {
                            errors.lock().unwrap().push(format!("{rater} next: {}", e.code()));
                            return;
                        }
                    };
                    if svc.has_rated(&rater, &clip) {
                        errors.lock().unwrap().push(format!("{rater} re-assigned {clip}"));
                    }
                    let values: BTreeMap<String, f64> = PerceptualQuality::ALL
                        .iter()
                        .map(|q| (q.to_string(), rng.random_range(0..=100) as f64))
                        .collect();
                    let sub = RatingSubmission {
                        clip_id: clip.clone(),
                        rater_id: rater.clone(),
                        values: values.clone(),
                        client_duration_ms: None,
                        timestamp: None,
                    };
                    match svc.submit(&sub) {
                        Ok(_) => acks.lock().unwrap().push((clip, rater.clone(), values)),
                        Err(e) => errors.lock().unwrap().push(format!("{rater} submit {clip}: {}", e.code())),
                    }
                }
            });
        }
    });
    let errors = errors.into_inner().unwrap();
    ensure(errors.is_empty(), || format!("{} error(s), first: {}", errors.len(), errors[0]))?;
    Ok(acks.into_inner().unwrap())
}

type LoggedValues = HashMap<(String, String), BTreeMap<String, f64>>;

fn logged(path: &Path) -> std::result::Result<LoggedValues, String> {
    let rec = voqual_annot::log::read_log(path).map_err(|e| e.to_string())?;
    let mut out = HashMap::new();
    for e in rec.entries {
        let r = e.record;
        let v = PerceptualQuality::ALL
            .iter()
            .filter_map(|q| r.values.get(*q).map(|x| (q.to_string(), x)))
            .collect();
        ensure(out.insert((r.clip_id.clone(), r.rater_id.clone()), v).is_none(), || {
            format!("duplicate log record for ({}, {})", r.clip_id, r.rater_id)
        })?;
    }
    Ok(out)
}

fn service_durability() -> Check {
    let rig = ServiceRig::new(120);
    let half = SUBMISSIONS / 2;

    let svc = rig.open()?;
    let mut acks = drive(&svc, half, 1)?;
    drop(svc);
    // A crash mid-append leaves a torn line behind.
    {
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new().append(true).open(rig.log()).map_err(|e| e.to_string())?;
        f.write_all(br#"{"clip_id":"clip000","rater_id":"w00","rater_cl"#).map_err(|e| e.to_string())?;
    }
    let svc = rig.open()?;
    let rep = svc.startup_report();
    ensure(rep.records == half && rep.torn_tail, || format!("restart recovered {} records, torn tail {}", rep.records, rep.torn_tail))?;
    acks.extend(drive(&svc, SUBMISSIONS - half, 2)?);
    ensure(acks.len() == SUBMISSIONS, || format!("{} acks for {SUBMISSIONS} submissions", acks.len()))?;

    let pairs: BTreeSet<(&String, &String)> = acks.iter().map(|(c, r, _)| (c, r)).collect();
    ensure(pairs.len() == acks.len(), || "a rater was acknowledged twice for one clip".into())?;
    let counts = svc.completed_counts();
    let max_load = counts.values().copied().max().unwrap_or(0);
    ensure(max_load <= svc.config().redundancy, || format!("a clip reached {max_load} ratings"))?;

    let log = logged(&rig.log())?;
    let lost = acks.iter().filter(|(c, r, v)| log.get(&(c.clone(), r.clone())) != Some(v)).count();
    ensure(lost == 0 && log.len() == SUBMISSIONS, || format!("{lost} acknowledged rating(s) missing; log has {}", log.len()))?;

    let csv = svc.export_csv().map_err(|e| e.to_string())?;
    let ratings_path = rig.dir.path().join("export.csv");
    std::fs::write(&ratings_path, csv).map_err(|e| e.to_string())?;
    let clips_path = rig.dir.path().join("clips.csv");
    let mut buf = Vec::new();
    voqual_core::labels::write_clips(&mut buf, &rig.clips).map_err(|e| e.to_string())?;
    std::fs::write(&clips_path, buf).map_err(|e| e.to_string())?;
    let labels = voqual_core::labels::ingest_labels(&clips_path, &ratings_path).map_err(|e| e.to_string())?;
    ensure(labels.ratings().len() == SUBMISSIONS, || format!("re-ingest found {}", labels.ratings().len()))?;

    Ok(format!(
        "{RATERS} raters, {SUBMISSIONS} acks, 0 duplicates, 0 lost; restart after {half} kept every ack; export re-ingests {} rows; max clip load {max_load}",
        labels.ratings().len()
    ))
}

const REFERENCE_EXPERT_ICC: [(PerceptualQuality, f64); 5] = [
    (PerceptualQuality::Strain, 0.83),
    (PerceptualQuality::Loudness, 0.87),
    (PerceptualQuality::Roughness, 0.79),
    (PerceptualQuality::Breathiness, 0.83),
    (PerceptualQuality::Pitch, 0.86),
];
const REFERENCE_EXPERT_ICC_AVERAGE: f64 = 0.84;
const REFERENCE_EXPERT_STD: f64 = 10.47;

fn pvqd_agreement(path: &Path) -> Check {
    let ratings = voqual_core::labels::read_ratings_file(path).map_err(|e| e.to_string())?;
    let report = AgreementReport::compute(&ratings, &[RaterClass::Expert]);
    let row = report.row(RaterClass::Expert).ok_or("no expert row")?;
    let mut parts = Vec::new();
    let mut misses = Vec::new();
    for (pq, want) in REFERENCE_EXPERT_ICC {
        let got = row.cells[pq.index()].value;
        parts.push(format!("{pq} {}", got.map_or("-".into(), |v| format!("{v:.3}"))));
        if got.is_none_or(|v| (v - want).abs() > 0.05) {
            misses.push(format!("{pq} {got:?} vs {want}"));
        }
    }
    match row.average {
        Some(a) if (a - REFERENCE_EXPERT_ICC_AVERAGE).abs() <= 0.05 => parts.push(format!("average {a:.3}")),
        a => misses.push(format!("average {a:?} vs {REFERENCE_EXPERT_ICC_AVERAGE}")),
    }
    match report.expert_std {
        Some(s) if (s - REFERENCE_EXPERT_STD).abs() <= 1.5 => parts.push(format!("expert std {s:.2}")),
        s => misses.push(format!("expert std {s:?} vs {REFERENCE_EXPERT_STD}")),
    }
    ensure(misses.is_empty(), || misses.join("; "))?;
    Ok(parts.join(", "))
}

fn pvqd_forest_vs_nonexpert(config: &Path) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::load(config).map_err(|e| e.to_string())?;
    cfg.output.dir = dir.path().to_path_buf();
    let run = voqual_harness::run_experiment(&cfg).map_err(|e| e.to_string())?;
    let mut compared = Vec::new();
    let mut worse = Vec::new();
    for r in run.table.reference.iter().filter(|r| r.method.as_str() == "nonexpert_rmse") {
        let Some(human) = r.value else { continue };
        for row in run.table.rows.iter().filter(|x| x.pq == r.pq) {
            if let Some(t) = row.test_rmse {
                compared.push(format!("{}/{} {t:.1}<{human:.1}", row.feature_set, row.pq));
                if t >= human {
                    worse.push(format!("{}/{} {t:.2} >= {human:.2}", row.feature_set, row.pq));
                }
            }
        }
    }
    ensure(!compared.is_empty(), || "no non-expert reference rows to compare".into())?;
    ensure(worse.is_empty(), || worse.join("; "))?;
    Ok(compared.join(", "))
}

fn main() {
    let mut suite = Suite { failed: 0 };
    suite.run("statistics-oracle", Some(Duration::from_secs(1)), statistics_oracle);
    suite.run("metric-identities", None, metric_identities);
    suite.run("dsp-synthetic-signals", Some(Duration::from_secs(10)), dsp_suite);
    suite.run("forest-correctness", Some(Duration::from_secs(30)), forest_correctness);
    suite.run("end-to-end-mini-corpus", Some(Duration::from_secs(120)), end_to_end);
    match std::env::var_os("VOQUAL_PVQD_RATINGS") {
        Some(p) => suite.run("pvqd-expert-agreement", None, || pvqd_agreement(Path::new(&p))),
        None => suite.report(Verdict::Skip, "pvqd-expert-agreement", None, "VOQUAL_PVQD_RATINGS not set"),
    }
    match std::env::var_os("VOQUAL_PVQD_CONFIG") {
        Some(p) => suite.run("pvqd-forest-vs-nonexpert", None, || pvqd_forest_vs_nonexpert(Path::new(&p))),
        None => suite.report(Verdict::Skip, "pvqd-forest-vs-nonexpert", None, "VOQUAL_PVQD_CONFIG not set"),
    }
    suite.run("split-contract", None, split_contract);
    suite.run("service-durability", None, service_durability);
    if suite.failed > 0 {
        println!("{} criterion/criteria failed", suite.failed);
        std::process::exit(1);
    }
}
