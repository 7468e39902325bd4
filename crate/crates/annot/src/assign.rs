//! Clip assignment state.
//!
//! Invariants:
//! * a rater holds at most one in-flight assignment;
//! * a rater is never offered a clip they already rated;
//! * completed + unexpired in-flight never exceeds the redundancy target.
//!
//! Clips are ordered by load (completed + unexpired in-flight) then clip id,
//! so concurrent raters are spread over distinct clips whenever a less
//! loaded clip exists.

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::{DateTime, Duration, Utc};
use serde::Serialize;

pub const DEFAULT_REDUNDANCY: usize = 6;
pub const DEFAULT_EXPIRY_MINUTES: i64 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub clip_id: String,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NextOutcome {
    Assigned(Assignment),
    /// Clips remain for this rater but all are at capacity with in-flight work.
    Wait,
    /// Nothing left this rater can rate.
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubmitCheck {
    Ok,
    NotAssigned,
    Expired,
}

#[derive(Debug, Clone)]
pub struct AssignmentState {
    redundancy: usize,
    expiry: Duration,
    completed: BTreeMap<String, usize>,
    rated: HashSet<(String, String)>,
    inflight: HashMap<String, Assignment>,
}

impl AssignmentState {
    pub fn new(clip_ids: impl IntoIterator<Item = String>, redundancy: usize, expiry: Duration) -> Self {
        Self {
            redundancy,
            expiry,
            completed: clip_ids.into_iter().map(|c| (c, 0)).collect(),
            rated: HashSet::new(),
            inflight: HashMap::new(),
        }
    }

    pub fn redundancy(&self) -> usize {
        self.redundancy
    }

    pub fn completed(&self, clip_id: &str) -> Option<usize> {
        self.completed.get(clip_id).copied()
    }

    pub fn has_rated(&self, rater_id: &str, clip_id: &str) -> bool {
        self.rated.contains(&(rater_id.to_string(), clip_id.to_string()))
    }

    pub fn inflight(&self, rater_id: &str) -> Option<&Assignment> {
        self.inflight.get(rater_id)
    }

    fn is_live(a: &Assignment, now: DateTime<Utc>) -> bool {
        now < a.expires_at
    }

    fn loads(&self, now: DateTime<Utc>) -> HashMap<&str, usize> {
        let mut load: HashMap<&str, usize> =
            self.completed.iter().map(|(c, n)| (c.as_str(), *n)).collect();
        for a in self.inflight.values().filter(|a| Self::is_live(a, now)) {
            if let Some(n) = load.get_mut(a.clip_id.as_str()) {
                *n += 1;
            }
        }
        load
    }

    /// Current or new assignment for `rater_id`.
    pub fn next(&mut self, rater_id: &str, now: DateTime<Utc>) -> NextOutcome {
        if let Some(a) = self.inflight.get(rater_id) {
            if Self::is_live(a, now) {
                return NextOutcome::Assigned(a.clone());
            }
            self.inflight.remove(rater_id);
        }
        let open: Vec<&str> = self
            .completed
            .iter()
            .filter(|(c, n)| **n < self.redundancy && !self.has_rated(rater_id, c))
            .map(|(c, _)| c.as_str())
            .collect();
        if open.is_empty() {
            return NextOutcome::Done;
        }
        let load = self.loads(now);
        let pick = open
            .into_iter()
            .map(|c| (load[c], c))
            .filter(|(l, _)| *l < self.redundancy)
            .min();
        match pick {
            None => NextOutcome::Wait,
            Some((_, clip)) => {
                let a = Assignment {
                    clip_id: clip.to_string(),
                    issued_at: now,
                    expires_at: now + self.expiry,
                };
                self.inflight.insert(rater_id.to_string(), a.clone());
                NextOutcome::Assigned(a)
            }
        }
    }

    pub fn check_submission(&self, rater_id: &str, clip_id: &str, now: DateTime<Utc>) -> SubmitCheck {
        match self.inflight.get(rater_id) {
            Some(a) if a.clip_id == clip_id => {
                if Self::is_live(a, now) {
                    SubmitCheck::Ok
                } else {
                    SubmitCheck::Expired
                }
            }
            _ => SubmitCheck::NotAssigned,
        }
    }

    /// Drops an expired assignment so the next request issues a fresh one.
    pub fn clear_expired(&mut self, rater_id: &str, now: DateTime<Utc>) {
        if self.inflight.get(rater_id).is_some_and(|a| !Self::is_live(a, now)) {
            self.inflight.remove(rater_id);
        }
    }

    /// Registers a completed rating and clears the rater's assignment if it
    /// was for this clip. Clips outside the corpus are ignored.
    pub fn complete(&mut self, rater_id: &str, clip_id: &str) {
        if self.inflight.get(rater_id).is_some_and(|a| a.clip_id == clip_id) {
            self.inflight.remove(rater_id);
        }
        if let Some(n) = self.completed.get_mut(clip_id) {
            if self.rated.insert((rater_id.to_string(), clip_id.to_string())) {
                *n += 1;
            }
        }
    }

    /// Clips still below the redundancy target.
    pub fn remaining(&self) -> usize {
        self.completed.values().filter(|n| **n < self.redundancy).count()
    }

    /// Total completed ratings over the corpus.
    pub fn total_completed(&self) -> usize {
        self.completed.values().sum()
    }

    pub fn clip_count(&self) -> usize {
        self.completed.len()
    }
}
