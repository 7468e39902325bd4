//! Clip manifests, rating tables and the validated [`LabelSet`].
//!
//! Both inputs are CSV:
//!
//! ```text
//! clip_id,audio_path,duration_s,sample_rate_hz,tags
//! clip_id,rater_id,rater_class,trial,resonance,weight,strain,loudness,roughness,breathiness,pitch,timestamp
//! ```
//!
//! Tags are `;`-separated. An empty quality cell means the quality was not
//! rated. Timestamps are RFC 3339.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, RowDiagnostic};
use crate::pq::{PQVector, PerceptualQuality};

pub const CLIPS_HEADER: [&str; 5] = ["clip_id", "audio_path", "duration_s", "sample_rate_hz", "tags"];
pub const RATINGS_HEADER: [&str; 12] = [
    "clip_id",
    "rater_id",
    "rater_class",
    "trial",
    "resonance",
    "weight",
    "strain",
    "loudness",
    "roughness",
    "breathiness",
    "pitch",
    "timestamp",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RaterClass {
    Expert,
    #[serde(rename = "nonexpert")]
    NonExpert,
}

impl RaterClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RaterClass::Expert => "expert",
            RaterClass::NonExpert => "nonexpert",
        }
    }
}

impl fmt::Display for RaterClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RaterClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "expert" => Ok(RaterClass::Expert),
            "nonexpert" | "non-expert" => Ok(RaterClass::NonExpert),
            other => Err(Error::InvalidInput(format!(
                "rater class must be `expert` or `nonexpert`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub audio_path: String,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
    #[serde(default)]
    pub tags: Vec<String>,
}

/// One rater's rating of one clip in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub clip_id: String,
    pub rater_id: String,
    pub rater_class: RaterClass,
    pub trial: u32,
    pub values: PQVector,
    pub timestamp: DateTime<Utc>,
}

impl RatingRecord {
    pub fn key(&self) -> (&str, &str, u32) {
        (&self.clip_id, &self.rater_id, self.trial)
    }
}

/// Validated clips plus ratings. Every rating resolves to a clip and
/// `(clip_id, rater_id, trial)` is unique.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    clips: Vec<ClipRecord>,
    ratings: Vec<RatingRecord>,
}

impl LabelSet {
    pub fn new(clips: Vec<ClipRecord>, ratings: Vec<RatingRecord>) -> Result<Self> {
        let mut ids = HashSet::new();
        for c in &clips {
            validate_clip(c)?;
            if !ids.insert(c.clip_id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate clip id `{}`", c.clip_id)));
            }
        }
        let mut keys = HashSet::new();
        for r in &ratings {
            if !ids.contains(r.clip_id.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "rating references unknown clip `{}`",
                    r.clip_id
                )));
            }
            if r.trial == 0 {
                return Err(Error::InvalidInput("trial must be >= 1".into()));
            }
            if !keys.insert(r.key()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate rating for (`{}`, `{}`, {})",
                    r.clip_id, r.rater_id, r.trial
                )));
            }
        }
        Ok(Self { clips, ratings })
    }

    pub fn clips(&self) -> &[ClipRecord] {
        &self.clips
    }

    pub fn ratings(&self) -> &[RatingRecord] {
        &self.ratings
    }

    pub fn clip(&self, clip_id: &str) -> Option<&ClipRecord> {
        self.clips.iter().find(|c| c.clip_id == clip_id)
    }

    pub fn clip_ids(&self) -> Vec<String> {
        self.clips.iter().map(|c| c.clip_id.clone()).collect()
    }

    /// Clips with at least one rating of `pq` from `class`.
    pub fn coverage(&self, class: RaterClass, pq: PerceptualQuality) -> usize {
        self.ratings
            .iter()
            .filter(|r| r.rater_class == class && r.values.get(pq).is_some())
            .map(|r| r.clip_id.as_str())
            .collect::<HashSet<_>>()
            .len()
    }

    /// Returns a new set with extra ratings merged in, re-validated.
    pub fn with_ratings(&self, extra: impl IntoIterator<Item = RatingRecord>) -> Result<Self> {
        let mut ratings = self.ratings.clone();
        ratings.extend(extra);
        Self::new(self.clips.clone(), ratings)
    }
}

fn validate_clip(c: &ClipRecord) -> Result<()> {
    if c.clip_id.trim().is_empty() {
        return Err(Error::InvalidInput("empty clip id".into()));
    }
    if !(c.duration_s.is_finite() && c.duration_s > 0.0) {
        return Err(Error::InvalidInput(format!(
            "clip `{}`: duration_s must be > 0",
            c.clip_id
        )));
    }
    if c.sample_rate_hz == 0 {
        return Err(Error::InvalidInput(format!(
            "clip `{}`: sample_rate_hz must be > 0",
            c.clip_id
        )));
    }
    Ok(())
}

/// Reads and validates a clip manifest and a ratings table.
///
/// Any rejected row fails the whole ingest with every diagnostic attached.
pub fn ingest_labels(clips_manifest: &Path, ratings_table: &Path) -> Result<LabelSet> {
    let (labels, diagnostics) = ingest_labels_lenient(clips_manifest, ratings_table)?;
    if diagnostics.is_empty() {
        Ok(labels)
    } else {
        Err(Error::Rejected(diagnostics))
    }
}

/// Like [`ingest_labels`] but keeps the valid rows and returns the
/// diagnostics for the rejected ones.
pub fn ingest_labels_lenient(
    clips_manifest: &Path,
    ratings_table: &Path,
) -> Result<(LabelSet, Vec<RowDiagnostic>)> {
    let clips_file = open(clips_manifest)?;
    let ratings_file = open(ratings_table)?;
    let (clips, mut diags) = read_clips(clips_file, &display_name(clips_manifest))?;
    let known: HashSet<&str> = clips.iter().map(|c| c.clip_id.as_str()).collect();
    let (ratings, rdiags) =
        read_ratings_checked(ratings_file, &display_name(ratings_table), Some(&known))?;
    diags.extend(rdiags);
    if ratings.is_empty() {
        return Err(Error::NoRatings);
    }
    Ok((LabelSet::new(clips, ratings)?, diags))
}

/// Reads a ratings table on its own (no manifest); rows are validated for
/// range, format and key uniqueness.
pub fn read_ratings_file(path: &Path) -> Result<Vec<RatingRecord>> {
    let (ratings, diags) = read_ratings_checked(open(path)?, &display_name(path), None)?;
    if !diags.is_empty() {
        return Err(Error::Rejected(diags));
    }
    if ratings.is_empty() {
        return Err(Error::NoRatings);
    }
    Ok(ratings)
}

pub fn read_clips_file(path: &Path) -> Result<Vec<ClipRecord>> {
    let (clips, diags) = read_clips(open(path)?, &display_name(path))?;
    if !diags.is_empty() {
        return Err(Error::Rejected(diags));
    }
    Ok(clips)
}

fn open(path: &Path) -> Result<std::fs::File> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(r)
}

fn check_header(file: &str, got: &csv::StringRecord, want: &[&str]) -> Result<()> {
    let got: Vec<&str> = got.iter().collect();
    if got != want {
        return Err(Error::BadHeader {
            file: file.to_string(),
            message: format!("expected `{}`, got `{}`", want.join(","), got.join(",")),
        });
    }
    Ok(())
}

pub fn read_clips<R: Read>(r: R, file: &str) -> Result<(Vec<ClipRecord>, Vec<RowDiagnostic>)> {
    let mut rdr = csv_reader(r);
    check_header(file, rdr.headers()?, &CLIPS_HEADER)?;
    let mut clips = Vec::new();
    let mut diags = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let diag = |field: &str, message: String| RowDiagnostic {
            file: file.to_string(),
            row,
            field: field.to_string(),
            message,
        };
        if rec.len() != CLIPS_HEADER.len() {
            diags.push(diag(
                "*",
                format!("expected {} fields, got {}", CLIPS_HEADER.len(), rec.len()),
            ));
            continue;
        }
        let clip_id = rec[0].to_string();
        if clip_id.is_empty() {
            diags.push(diag("clip_id", "empty".into()));
            continue;
        }
        let duration_s = match rec[2].parse::<f64>() {
            Ok(d) if d.is_finite() && d > 0.0 => d,
            Ok(d) => {
                diags.push(diag("duration_s", format!("must be > 0, got {d}")));
                continue;
            }
            Err(e) => {
                diags.push(diag("duration_s", e.to_string()));
                continue;
            }
        };
        let sample_rate_hz = match rec[3].parse::<u32>() {
            Ok(sr) if sr > 0 => sr,
            Ok(_) => {
                diags.push(diag("sample_rate_hz", "must be positive".into()));
                continue;
            }
            Err(e) => {
                diags.push(diag("sample_rate_hz", e.to_string()));
                continue;
            }
        };
        if !seen.insert(clip_id.clone()) {
            diags.push(diag("clip_id", format!("duplicate clip id `{clip_id}`")));
            continue;
        }
        let tags = rec[4]
            .split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(String::from)
            .collect();
        clips.push(ClipRecord {
            clip_id,
            audio_path: rec[1].to_string(),
            duration_s,
            sample_rate_hz,
            tags,
        });
    }
    Ok((clips, diags))
}

/// Parses a ratings table. When `known_clips` is given, ratings for clips
/// outside it are rejected.
pub fn read_ratings_checked<R: Read>(
    r: R,
    file: &str,
    known_clips: Option<&HashSet<&str>>,
) -> Result<(Vec<RatingRecord>, Vec<RowDiagnostic>)> {
    let mut rdr = csv_reader(r);
    check_header(file, rdr.headers()?, &RATINGS_HEADER)?;
    let mut out = Vec::new();
    let mut diags = Vec::new();
    let mut keys: HashSet<(String, String, u32)> = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        match parse_rating(&rec) {
            Ok(r) => {
                if let Some(known) = known_clips {
                    if !known.contains(r.clip_id.as_str()) {
                        diags.push(RowDiagnostic {
                            file: file.to_string(),
                            row,
                            field: "clip_id".into(),
                            message: format!("clip `{}` is not in the manifest", r.clip_id),
                        });
                        continue;
                    }
                }
                if !keys.insert((r.clip_id.clone(), r.rater_id.clone(), r.trial)) {
                    diags.push(RowDiagnostic {
                        file: file.to_string(),
                        row,
                        field: "clip_id,rater_id,trial".into(),
                        message: format!(
                            "duplicate rating for (`{}`, `{}`, {})",
                            r.clip_id, r.rater_id, r.trial
                        ),
                    });
                    continue;
                }
                out.push(r);
            }
            Err((field, message)) => diags.push(RowDiagnostic {
                file: file.to_string(),
                row,
                field,
                message,
            }),
        }
    }
    Ok((out, diags))
}

fn parse_rating(rec: &csv::StringRecord) -> std::result::Result<RatingRecord, (String, String)> {
    if rec.len() != RATINGS_HEADER.len() {
        return Err((
            "*".into(),
            format!("expected {} fields, got {}", RATINGS_HEADER.len(), rec.len()),
        ));
    }
    let clip_id = rec[0].to_string();
    if clip_id.is_empty() {
        return Err(("clip_id".into(), "empty".into()));
    }
    let rater_id = rec[1].to_string();
    if rater_id.is_empty() {
        return Err(("rater_id".into(), "empty".into()));
    }
    let rater_class = rec[2]
        .parse::<RaterClass>()
        .map_err(|e| ("rater_class".to_string(), e.to_string()))?;
    let trial = match rec[3].parse::<u32>() {
        Ok(t) if t >= 1 => t,
        Ok(_) => return Err(("trial".into(), "must be >= 1".into())),
        Err(e) => return Err(("trial".into(), e.to_string())),
    };
    let mut values = [None; 7];
    for (i, q) in PerceptualQuality::ALL.into_iter().enumerate() {
        let cell = &rec[4 + i];
        if cell.is_empty() {
            continue;
        }
        let v: f64 = cell
            .parse()
            .map_err(|e: std::num::ParseFloatError| (q.name().to_string(), e.to_string()))?;
        crate::pq::check_range(q, v).map_err(|e| (q.name().to_string(), e.to_string()))?;
        values[i] = Some(v);
    }
    let values = PQVector::new(values).map_err(|e| ("values".to_string(), e.to_string()))?;
    let timestamp = DateTime::parse_from_rfc3339(&rec[11])
        .map_err(|e| ("timestamp".to_string(), e.to_string()))?
        .with_timezone(&Utc);
    Ok(RatingRecord {
        clip_id,
        rater_id,
        rater_class,
        trial,
        values,
        timestamp,
    })
}

pub fn write_clips<W: Write>(w: W, clips: &[ClipRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CLIPS_HEADER)?;
    for c in clips {
        wtr.write_record([
            c.clip_id.as_str(),
            c.audio_path.as_str(),
            &c.duration_s.to_string(),
            &c.sample_rate_hz.to_string(),
            &c.tags.join(";"),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_ratings<W: Write>(w: W, ratings: &[RatingRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(RATINGS_HEADER)?;
    for r in ratings {
        let mut row: Vec<String> = vec![
            r.clip_id.clone(),
            r.rater_id.clone(),
            r.rater_class.to_string(),
            r.trial.to_string(),
        ];
        for v in r.values.as_array() {
            row.push(v.map(|x| x.to_string()).unwrap_or_default());
        }
        row.push(format_timestamp(&r.timestamp));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Writes the manifest and ratings table to the given paths.
pub fn export_labels(labels: &LabelSet, clips_path: &Path, ratings_path: &Path) -> Result<()> {
    let create = |p: &Path| {
        std::fs::File::create(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    write_clips(create(clips_path)?, labels.clips())?;
    write_ratings(create(ratings_path)?, labels.ratings())?;
    Ok(())
}

/// Groups ratings by clip id, preserving input order inside each group.
pub fn by_clip(ratings: &[RatingRecord]) -> BTreeMap<&str, Vec<&RatingRecord>> {
    let mut map: BTreeMap<&str, Vec<&RatingRecord>> = BTreeMap::new();
    for r in ratings {
        map.entry(r.clip_id.as_str()).or_default().push(r);
    }
    map
}

/// Maps rater id to the number of clips rated for `pq`.
pub fn rater_coverage(
    ratings: &[RatingRecord],
    class: RaterClass,
    pq: PerceptualQuality,
) -> HashMap<&str, usize> {
    let mut clips: HashMap<&str, HashSet<&str>> = HashMap::new();
    for r in ratings {
        if r.rater_class == class && r.values.get(pq).is_some() {
            clips
                .entry(r.rater_id.as_str())
                .or_default()
                .insert(r.clip_id.as_str());
        }
    }
    clips.into_iter().map(|(k, v)| (k, v.len())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLIPS: &str = "clip_id,audio_path,duration_s,sample_rate_hz,tags\n\
        a,a.wav,30.0,44100,capev;female\n\
        b,b.wav,28.5,44100,\n";

    fn ratings(rows: &[&str]) -> String {
        let mut s = RATINGS_HEADER.join(",");
        s.push('\n');
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn ingest_valid() {
        let dir = tempfile::tempdir().unwrap();
        let c = write(dir.path(), "clips.csv", CLIPS);
        let r = write(
            dir.path(),
            "r.csv",
            &ratings(&[
                "a,e1,expert,1,,,40,10,20,30,50,2023-01-01T00:00:00Z",
                "a,e1,expert,2,,,42,12,22,32,52,2023-01-02T00:00:00Z",
                "b,t1,expert,1,90,10,,,,,,2023-01-01T00:00:00+02:00",
            ]),
        );
        let set = ingest_labels(&c, &r).unwrap();
        assert_eq!(set.clips().len(), 2);
        assert_eq!(set.ratings().len(), 3);
        assert_eq!(set.clips()[0].tags, vec!["capev", "female"]);
        assert!(set.clips()[1].tags.is_empty());
        assert_eq!(
            set.ratings()[2].values.get(PerceptualQuality::Resonance),
            Some(90.0)
        );
        assert_eq!(set.ratings()[2].values.get(PerceptualQuality::Strain), None);
        assert_eq!(set.coverage(RaterClass::Expert, PerceptualQuality::Weight), 1);
        assert_eq!(set.coverage(RaterClass::Expert, PerceptualQuality::Strain), 1);
    }

    #[test]
    fn empty_ratings_table() {
        let dir = tempfile::tempdir().unwrap();
        let c = write(dir.path(), "clips.csv", CLIPS);
        let r = write(dir.path(), "r.csv", &ratings(&[]));
        let err = ingest_labels(&c, &r).unwrap_err();
        assert_eq!(err.to_string(), "no ratings");
    }

    #[test]
    fn missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let c = write(dir.path(), "clips.csv", CLIPS);
        let err = ingest_labels(&c, &dir.path().join("nope.csv")).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }

    #[test]
    fn out_of_range_row_rejected_with_diagnostic() {
        let dir = tempfile::tempdir().unwrap();
        let c = write(dir.path(), "clips.csv", CLIPS);
        let r = write(
            dir.path(),
            "r.csv",
            &ratings(&[
                "a,e1,expert,1,,,40,,,,,2023-01-01T00:00:00Z",
                "b,e1,expert,1,,,105,,,,,2023-01-01T00:00:00Z",
            ]),
        );
        let Error::Rejected(diags) = ingest_labels(&c, &r).unwrap_err() else {
            panic!("expected rejection");
        };
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].row, 3);
        assert_eq!(diags[0].field, "strain");
        assert!(diags[0].message.contains("outside [0, 100]"), "{}", diags[0]);

        let (set, diags) = ingest_labels_lenient(&c, &r).unwrap();
        assert_eq!(set.ratings().len(), 1);
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn duplicate_and_malformed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let c = write(dir.path(), "clips.csv", CLIPS);
        let r = write(
            dir.path(),
            "r.csv",
            &ratings(&[
                "a,e1,expert,1,,,40,,,,,2023-01-01T00:00:00Z",
                "a,e1,expert,1,,,41,,,,,2023-01-01T00:00:00Z",
                "a,e2,expert,zero,,,41,,,,,2023-01-01T00:00:00Z",
                "a,e3,clinician,1,,,41,,,,,2023-01-01T00:00:00Z",
                "zz,e3,expert,1,,,41,,,,,2023-01-01T00:00:00Z",
                "a,e4,expert,1,,,,,,,,2023-01-01T00:00:00Z",
                "a,e5,expert,1,,,1,,,,,yesterday",
            ]),
        );
        let Error::Rejected(diags) = ingest_labels(&c, &r).unwrap_err() else {
            panic!("expected rejection");
        };
        let fields: Vec<_> = diags.iter().map(|d| (d.row, d.field.as_str())).collect();
        assert_eq!(
            fields,
            vec![
                (3, "clip_id,rater_id,trial"),
                (4, "trial"),
                (5, "rater_class"),
                (6, "clip_id"),
                (7, "values"),
                (8, "timestamp"),
            ]
        );
    }

    #[test]
    fn bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let c = write(dir.path(), "clips.csv", "id,path\nx,y\n");
        let r = write(dir.path(), "r.csv", &ratings(&[]));
        assert!(matches!(
            ingest_labels(&c, &r).unwrap_err(),
            Error::BadHeader { .. }
        ));
    }

    #[test]
    fn export_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = write(dir.path(), "clips.csv", CLIPS);
        let r = write(
            dir.path(),
            "r.csv",
            &ratings(&[
                "a,e1,expert,1,,,40.125,10,20,30,50,2023-01-01T00:00:00.123Z",
                "b,t1,expert,1,90,10,,,,,,2023-01-01T00:00:00+02:00",
            ]),
        );
        let set = ingest_labels(&c, &r).unwrap();
        let c2 = dir.path().join("c2.csv");
        let r2 = dir.path().join("r2.csv");
        export_labels(&set, &c2, &r2).unwrap();
        assert_eq!(ingest_labels(&c2, &r2).unwrap(), set);
    }
}
