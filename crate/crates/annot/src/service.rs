//! The annotation service core, independent of HTTP.
//!
//! All mutations (assignment and rating commits) go through one mutex in
//! commit order. Readers take the latest published snapshot of the rating
//! records, which is replaced after every commit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::http::StatusCode;
use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use voqual_core::agreement::paired_means_with;
use voqual_core::{
    aggregate_ratings, AgreementReport, ClipRecord, PQVector, PerceptualQuality, RaterClass,
    RatingRecord,
};

use crate::anchors::{AnchorExample, Pole};
use crate::assign::{
    AssignmentState, NextOutcome, SubmitCheck, DEFAULT_EXPIRY_MINUTES, DEFAULT_REDUNDANCY,
};
use crate::clock::Clock;
use crate::error::{AnnotError, ApiError, Result};
use crate::log::{LogEntry, RatingLog};

/// Trial number written for every non-expert rating.
pub const NONEXPERT_TRIAL: u32 = 1;

const MAX_RATER_ID_LEN: usize = 128;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub log_path: PathBuf,
    pub redundancy: usize,
    pub expiry: Duration,
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(log_path: impl Into<PathBuf>) -> Self {
        Self {
            log_path: log_path.into(),
            redundancy: DEFAULT_REDUNDANCY,
            expiry: Duration::minutes(DEFAULT_EXPIRY_MINUTES),
            static_dir: None,
        }
    }
}

/// Everything the service serves besides the log.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub clips: Vec<ClipRecord>,
    /// Base directory for relative clip audio paths.
    pub audio_root: PathBuf,
    pub expert_ratings: Vec<RatingRecord>,
    pub anchors: Vec<AnchorExample>,
}

/// Body of `POST /api/ratings`. `values` maps each quality name to its
/// rating; all seven are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSubmission {
    pub clip_id: String,
    pub rater_id: String,
    pub values: BTreeMap<String, f64>,
    #[serde(default)]
    pub client_duration_ms: Option<u64>,
    #[serde(default)]
    pub timestamp: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub clip_id: String,
    pub rater_id: String,
    /// 1-based position of the record among accepted log records.
    pub sequence: usize,
    pub recorded_at: DateTime<Utc>,
}

/// Response of `GET /api/session/next`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum NextResponse {
    Assigned {
        clip_id: String,
        audio_url: String,
        issued_at: DateTime<Utc>,
        expires_at: DateTime<Utc>,
        rated_by_rater: usize,
    },
    Wait {
        retry_after_s: u64,
        rated_by_rater: usize,
    },
    Done {
        rated_by_rater: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorView {
    pub pq: PerceptualQuality,
    pub pole: Pole,
    pub clip_id: String,
    pub caption: String,
    pub audio_url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub pq: PerceptualQuality,
    pub clip_id: String,
    pub expert: f64,
    pub nonexpert: f64,
}

/// Response of `GET /api/stats/agreement`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiveAgreement {
    /// Clips with at least one non-expert rating and an expert mean.
    pub count: usize,
    /// Non-expert ratings in the log.
    pub ratings: usize,
    /// Non-expert row: per-quality Pearson r and RMSE against expert means.
    pub report: AgreementReport,
    pub points: Vec<ScatterPoint>,
}

/// Summary of log recovery at startup.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StartupReport {
    pub records: usize,
    pub skipped_lines: Vec<usize>,
    pub rejected_records: usize,
    pub torn_tail: bool,
}

struct Writer {
    log: RatingLog,
    state: AssignmentState,
    records: Vec<RatingRecord>,
    index: HashMap<(String, String), usize>,
}

pub struct AnnotService {
    writer: Mutex<Writer>,
    snapshot: RwLock<Arc<Vec<RatingRecord>>>,
    clips: BTreeMap<String, PathBuf>,
    anchors: Vec<AnchorExample>,
    anchor_audio: HashMap<(PerceptualQuality, Pole), PathBuf>,
    expert_ratings: Vec<RatingRecord>,
    expert_means: Vec<BTreeMap<String, f64>>,
    clock: Arc<dyn Clock>,
    config: ServiceConfig,
    startup: StartupReport,
}

fn resolve(root: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

fn validate_rater(rater_id: &str) -> std::result::Result<(), ApiError> {
    let ok = !rater_id.is_empty()
        && rater_id.len() <= MAX_RATER_ID_LEN
        && rater_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(ApiError::bad_request(
            "invalid_rater",
            "rater id must be 1-128 characters of [A-Za-z0-9._-]",
        ))
    }
}

/// Converts submitted values into a complete vector.
pub fn submission_values(values: &BTreeMap<String, f64>) -> std::result::Result<PQVector, ApiError> {
    let unprocessable = |code: &str, msg: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, msg);
    for key in values.keys() {
        if key.parse::<PerceptualQuality>().is_err() || key.to_ascii_lowercase() != *key {
            return Err(unprocessable("unknown_quality", format!("unknown quality `{key}`")));
        }
    }
    let mut out = [0.0; 7];
    for pq in PerceptualQuality::ALL {
        out[pq.index()] = *values
            .get(pq.name())
            .ok_or_else(|| unprocessable("missing_value", format!("missing value for {pq}")))?;
    }
    PQVector::full(out).map_err(|e| unprocessable("out_of_range", e.to_string()))
}

impl AnnotService {
    /// Opens the log, rebuilds assignment state from it and publishes the
    /// first snapshot.
    pub fn open(corpus: Corpus, config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self> {
        if config.redundancy == 0 {
            return Err(AnnotError::Config("redundancy must be at least 1".into()));
        }
        if config.expiry <= Duration::zero() {
            return Err(AnnotError::Config("assignment expiry must be positive".into()));
        }
        let clips: BTreeMap<String, PathBuf> = corpus
            .clips
            .iter()
            .map(|c| (c.clip_id.clone(), resolve(&corpus.audio_root, &c.audio_path)))
            .collect();
        let mut anchor_audio = HashMap::new();
        for a in &corpus.anchors {
            let path = a.audio_path.clone().or_else(|| clips.get(&a.clip_id).cloned());
            match path {
                Some(p) => {
                    anchor_audio.insert((a.pq, a.pole), p);
                }
                None => log::warn!("anchor {}/{} has no audio: clip {} unknown", a.pq, a.pole, a.clip_id),
            }
        }
        let expert_ratings: Vec<RatingRecord> = corpus
            .expert_ratings
            .into_iter()
            .filter(|r| r.rater_class == RaterClass::Expert)
            .collect();
        let expert_means = PerceptualQuality::ALL
            .iter()
            .map(|pq| aggregate_ratings(&expert_ratings, RaterClass::Expert, *pq))
            .collect();

        let (log, recovered) = RatingLog::open(&config.log_path)?;
        let mut state = AssignmentState::new(clips.keys().cloned(), config.redundancy, config.expiry);
        let mut records = Vec::new();
        let mut index = HashMap::new();
        let mut rejected = 0;
        for entry in recovered.entries {
            let r = entry.record;
            let key = (r.clip_id.clone(), r.rater_id.clone());
            if r.rater_class != RaterClass::NonExpert || index.contains_key(&key) {
                log::warn!("ratings log: ignoring record ({}, {})", r.clip_id, r.rater_id);
                rejected += 1;
                continue;
            }
            if !clips.contains_key(&r.clip_id) {
                log::warn!("ratings log: clip {} is not in the corpus", r.clip_id);
            }
            state.complete(&r.rater_id, &r.clip_id);
            index.insert(key, records.len());
            records.push(r);
        }
        let startup = StartupReport {
            records: records.len(),
            skipped_lines: recovered.skipped_lines,
            rejected_records: rejected,
            torn_tail: recovered.torn_tail,
        };
        Ok(Self {
            snapshot: RwLock::new(Arc::new(records.clone())),
            writer: Mutex::new(Writer {
                log,
                state,
                records,
                index,
            }),
            clips,
            anchors: corpus.anchors,
            anchor_audio,
            expert_ratings,
            expert_means,
            clock,
            config,
            startup,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn startup_report(&self) -> &StartupReport {
        &self.startup
    }

    pub fn clip_ids(&self) -> impl Iterator<Item = &str> {
        self.clips.keys().map(String::as_str)
    }

    /// Latest committed non-expert records, in log order.
    pub fn snapshot(&self) -> Arc<Vec<RatingRecord>> {
        self.snapshot.read().unwrap().clone()
    }

    fn rated_by(records: &[RatingRecord], rater_id: &str) -> usize {
        records.iter().filter(|r| r.rater_id == rater_id).count()
    }

    pub fn next_clip(&self, rater_id: &str) -> std::result::Result<NextResponse, ApiError> {
        validate_rater(rater_id)?;
        let mut w = self.writer.lock().unwrap();
        let now = self.clock.now();
        let rated = Self::rated_by(&w.records, rater_id);
        Ok(match w.state.next(rater_id, now) {
            NextOutcome::Assigned(a) => NextResponse::Assigned {
                audio_url: format!("/api/clips/{}/audio", a.clip_id),
                clip_id: a.clip_id,
                issued_at: a.issued_at,
                expires_at: a.expires_at,
                rated_by_rater: rated,
            },
            NextOutcome::Wait => NextResponse::Wait {
                retry_after_s: 30,
                rated_by_rater: rated,
            },
            NextOutcome::Done => NextResponse::Done { rated_by_rater: rated },
        })
    }

    fn ack(records: &[RatingRecord], i: usize) -> Ack {
        let r = &records[i];
        Ack {
            clip_id: r.clip_id.clone(),
            rater_id: r.rater_id.clone(),
            sequence: i + 1,
            recorded_at: r.timestamp,
        }
    }

    /// Validates, durably appends and acknowledges one rating. A replay of
    /// an already recorded (clip, rater) pair with identical values returns
    /// the original acknowledgment and writes nothing.
    pub fn submit(&self, s: &RatingSubmission) -> std::result::Result<Ack, ApiError> {
        validate_rater(&s.rater_id)?;
        let values = submission_values(&s.values)?;
        let mut w = self.writer.lock().unwrap();
        let key = (s.clip_id.clone(), s.rater_id.clone());
        if let Some(&i) = w.index.get(&key) {
            return if w.records[i].values == values {
                Ok(Self::ack(&w.records, i))
            } else {
                Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "already_rated",
                    format!("rater {} already rated clip {} with different values", s.rater_id, s.clip_id),
                ))
            };
        }
        if !self.clips.contains_key(&s.clip_id) {
            return Err(ApiError::not_found(format!("unknown clip {}", s.clip_id)));
        }
        let now = self.clock.now();
        match w.state.check_submission(&s.rater_id, &s.clip_id, now) {
            SubmitCheck::Ok => {}
            SubmitCheck::NotAssigned => {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "not_assigned",
                    format!("clip {} is not assigned to rater {}", s.clip_id, s.rater_id),
                ))
            }
            SubmitCheck::Expired => {
                w.state.clear_expired(&s.rater_id, now);
                return Err(ApiError::new(
                    StatusCode::GONE,
                    "expired",
                    format!("assignment of clip {} expired; request a new clip", s.clip_id),
                ));
            }
        }
        let record = RatingRecord {
            clip_id: s.clip_id.clone(),
            rater_id: s.rater_id.clone(),
            rater_class: RaterClass::NonExpert,
            trial: NONEXPERT_TRIAL,
            values,
            timestamp: now,
        };
        let entry = LogEntry {
            record,
            client_duration_ms: s.client_duration_ms,
            client_timestamp: s.timestamp,
        };
        if let Err(e) = w.log.append(&entry) {
            log::error!("{e}");
            return Err(ApiError::internal("rating could not be stored"));
        }
        w.state.complete(&s.rater_id, &s.clip_id);
        let i = w.records.len();
        w.records.push(entry.record);
        w.index.insert(key, i);
        *self.snapshot.write().unwrap() = Arc::new(w.records.clone());
        Ok(Self::ack(&w.records, i))
    }

    pub fn anchors(&self) -> Vec<AnchorView> {
        self.anchors
            .iter()
            .map(|a| AnchorView {
                pq: a.pq,
                pole: a.pole,
                clip_id: a.clip_id.clone(),
                caption: a.caption.clone(),
                audio_url: format!("/api/anchors/{}/{}/audio", a.pq, a.pole),
            })
            .collect()
    }

    pub fn clip_audio_path(&self, clip_id: &str) -> Option<&Path> {
        self.clips.get(clip_id).map(PathBuf::as_path)
    }

    pub fn anchor_audio_path(&self, pq: PerceptualQuality, pole: Pole) -> Option<&Path> {
        self.anchor_audio.get(&(pq, pole)).map(PathBuf::as_path)
    }

    /// Non-expert vs expert agreement over the current snapshot.
    pub fn live_agreement(&self) -> LiveAgreement {
        let snap = self.snapshot();
        let mut points = Vec::new();
        for (pq, expert) in PerceptualQuality::ALL.iter().zip(&self.expert_means) {
            for (clip_id, ne, ex) in paired_means_with(&snap, expert, *pq) {
                points.push(ScatterPoint {
                    pq: *pq,
                    clip_id,
                    expert: ex,
                    nonexpert: ne,
                });
            }
        }
        let count = points.iter().map(|p| p.clip_id.as_str()).collect::<BTreeSet<_>>().len();
        let mut all = self.expert_ratings.clone();
        all.extend(snap.iter().cloned());
        LiveAgreement {
            count,
            ratings: snap.len(),
            report: AgreementReport::compute(&all, &[RaterClass::NonExpert]),
            points,
        }
    }

    /// The log's records as a ratings CSV readable by the label ingester.
    pub fn export_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        voqual_core::labels::write_ratings(&mut buf, &self.snapshot())?;
        Ok(buf)
    }

    /// Completed ratings per clip, for progress displays and tests.
    pub fn completed_counts(&self) -> BTreeMap<String, usize> {
        let w = self.writer.lock().unwrap();
        self.clips
            .keys()
            .map(|c| (c.clone(), w.state.completed(c).unwrap_or(0)))
            .collect()
    }

    pub fn has_rated(&self, rater_id: &str, clip_id: &str) -> bool {
        self.writer.lock().unwrap().state.has_rated(rater_id, clip_id)
    }
}
