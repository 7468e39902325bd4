//! Seeded train/validation/test partitioning of clip ids.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidRatios(format!("{parts:?} has a negative or non-finite part")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidRatios(format!("{parts:?} sums to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Val,
    Test,
}

impl Partition {
    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Val => "val",
            Partition::Test => "test",
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Partition::Train),
            "val" => Ok(Partition::Val),
            "test" => Ok(Partition::Test),
            other => Err(Error::InvalidInput(format!("unknown partition `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.val.len(), self.test.len())
    }

    pub fn partition_of(&self, clip_id: &str) -> Option<Partition> {
        let has = |v: &[String]| v.iter().any(|c| c == clip_id);
        if has(&self.train) {
            Some(Partition::Train)
        } else if has(&self.val) {
            Some(Partition::Val)
        } else if has(&self.test) {
            Some(Partition::Test)
        } else {
            None
        }
    }

    /// Writes `# seed=<u64>` followed by a `clip_id,partition` table.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |source| Error::Io {
            path: "<split>".into(),
            source,
        };
        writeln!(w, "# seed={}", self.seed).map_err(io)?;
        writeln!(w, "clip_id,partition").map_err(io)?;
        for (part, ids) in [
            (Partition::Train, &self.train),
            (Partition::Val, &self.val),
            (Partition::Test, &self.test),
        ] {
            for id in ids {
                writeln!(w, "{id},{part}").map_err(io)?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let io = |source| Error::Io {
            path: "<split>".into(),
            source,
        };
        let mut seed = None;
        let mut split = DatasetSplit {
            train: Vec::new(),
            val: Vec::new(),
            test: Vec::new(),
            seed: 0,
        };
        let mut header_seen = false;
        let mut seen = HashSet::new();
        for (i, line) in BufReader::new(r).lines().enumerate() {
            let line = line.map_err(io)?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("seed=") {
                    seed = Some(v.trim().parse::<u64>().map_err(|e| {
                        Error::InvalidInput(format!("split file line {}: bad seed: {e}", i + 1))
                    })?);
                }
                continue;
            }
            if !header_seen {
                if line != "clip_id,partition" {
                    return Err(Error::BadHeader {
                        file: "split".into(),
                        message: format!("expected `clip_id,partition`, got `{line}`"),
                    });
                }
                header_seen = true;
                continue;
            }
            let (id, part) = line.split_once(',').ok_or_else(|| {
                Error::InvalidInput(format!("split file line {}: expected two fields", i + 1))
            })?;
            if !seen.insert(id.to_string()) {
                return Err(Error::InvalidInput(format!(
                    "split file line {}: clip `{id}` listed twice",
                    i + 1
                )));
            }
            match part.parse::<Partition>()? {
                Partition::Train => split.train.push(id.to_string()),
                Partition::Val => split.val.push(id.to_string()),
                Partition::Test => split.test.push(id.to_string()),
            }
        }
        split.seed = seed.ok_or_else(|| Error::InvalidInput("split file has no `# seed=` line".into()))?;
        Ok(split)
    }
}

/// Shuffles `clip_ids` with a ChaCha8 stream seeded by `seed`, then takes
/// `floor(train·n)` for train, `floor(val·n)` for validation and the
/// remainder for test.
pub fn make_split(clip_ids: &[String], seed: u64, ratios: SplitRatios) -> Result<DatasetSplit> {
    ratios.validate()?;
    let n = clip_ids.len();
    if n < 3 {
        return Err(Error::SplitTooSmall(n));
    }
    let mut uniq = HashSet::new();
    if let Some(dup) = clip_ids.iter().find(|c| !uniq.insert(c.as_str())) {
        return Err(Error::InvalidInput(format!("duplicate clip id `{dup}` in split input")));
    }
    let mut ids = clip_ids.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    // Guard the floor against products like 0.6 * 5 landing a hair under 3.
    let n_train = ((ratios.train * n as f64) + 1e-9).floor() as usize;
    let n_val = (((ratios.val * n as f64) + 1e-9).floor() as usize).min(n - n_train);
    let test = ids.split_off(n_train + n_val);
    let val = ids.split_off(n_train);
    Ok(DatasetSplit {
        train: ids,
        val,
        test,
        seed,
    })
}
