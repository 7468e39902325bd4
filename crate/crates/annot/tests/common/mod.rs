#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use voqual_annot::anchors::ANCHORS_HEADER;
use voqual_annot::{read_anchors, AnnotService, Corpus, ManualClock, RatingSubmission, ServiceConfig};
use voqual_core::{ClipRecord, PQVector, PerceptualQuality, RaterClass, RatingRecord};

pub fn t0() -> DateTime<Utc> {
    "2024-03-01T09:00:00Z".parse().unwrap()
}

pub fn clip_id(i: usize) -> String {
    format!("clip{i:03}")
}

pub fn audio_bytes(i: usize) -> Vec<u8> {
    let mut b = b"RIFF\0\0\0\0WAVE".to_vec();
    b.extend((0..64).map(|k| (i * 7 + k) as u8));
    b
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub clips: Vec<ClipRecord>,
    pub experts: Vec<RatingRecord>,
    pub clock: Arc<ManualClock>,
}

impl Fixture {
    /// `n` clips with distinct audio bytes, one expert rating per clip from
    /// `expert(i)`, and a full anchor file.
    pub fn new(n: usize, expert: impl Fn(usize) -> [f64; 7]) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("audio")).unwrap();
        let mut clips = Vec::new();
        let mut experts = Vec::new();
        for i in 0..n {
            let rel = format!("audio/{}.wav", clip_id(i));
            std::fs::write(dir.path().join(&rel), audio_bytes(i)).unwrap();
            clips.push(ClipRecord {
                clip_id: clip_id(i),
                audio_path: rel,
                duration_s: 1.0,
                sample_rate_hz: 16000,
                tags: vec![],
            });
            experts.push(RatingRecord {
                clip_id: clip_id(i),
                rater_id: "E1".into(),
                rater_class: RaterClass::Expert,
                trial: 1,
                values: PQVector::full(expert(i)).unwrap(),
                timestamp: t0(),
            });
        }
        let mut anchors = ANCHORS_HEADER.join(",") + "\n";
        for pq in PerceptualQuality::ALL {
            let (lo, hi) = pq.poles();
            anchors += &format!("{pq},low,{},Low: {lo},\n{pq},high,{},High: {hi},\n", clip_id(0), clip_id(1 % n));
        }
        std::fs::write(dir.path().join("anchors.csv"), anchors).unwrap();
        Self {
            dir,
            clips,
            experts,
            clock: Arc::new(ManualClock::new(t0())),
        }
    }

    pub fn log_path(&self) -> PathBuf {
        self.dir.path().join("ratings.jsonl")
    }

    pub fn config(&self, redundancy: usize) -> ServiceConfig {
        let mut c = ServiceConfig::new(self.log_path());
        c.redundancy = redundancy;
        c
    }

    pub fn corpus(&self) -> Corpus {
        Corpus {
            clips: self.clips.clone(),
            audio_root: self.dir.path().to_path_buf(),
            expert_ratings: self.experts.clone(),
            anchors: read_anchors(&self.dir.path().join("anchors.csv")).unwrap(),
        }
    }

    pub fn open(&self, redundancy: usize) -> AnnotService {
        AnnotService::open(self.corpus(), self.config(redundancy), self.clock.clone()).unwrap()
    }

    pub fn write_manifest(&self) -> PathBuf {
        let p = self.dir.path().join("clips.csv");
        let f = std::fs::File::create(&p).unwrap();
        voqual_core::labels::write_clips(f, &self.clips).unwrap();
        p
    }
}

pub fn submission(clip: &str, rater: &str, values: [f64; 7]) -> RatingSubmission {
    RatingSubmission {
        clip_id: clip.into(),
        rater_id: rater.into(),
        values: PerceptualQuality::ALL.iter().map(|q| (q.name().to_string(), values[q.index()])).collect(),
        client_duration_ms: Some(5000),
        timestamp: None,
    }
}

pub fn log_lines(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.trim().is_empty()).count()
}
