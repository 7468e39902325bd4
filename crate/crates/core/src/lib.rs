//! Data model and statistics for seven-dimensional perceptual voice quality
//! (PQ) ratings.
//!
//! The crate covers the label side of the toolkit:
//!
//! * [`pq`]: the seven qualities and the sparse [`PQVector`] that holds a rating.
//! * [`labels`]: clip manifests, rating tables and their CSV ingestion/export.
//! * [`aggregate`]: per-clip rating means and inter-rater spread.
//! * [`split`]: seeded train/validation/test partitions.
//! * [`stats`]: two-way ANOVA, ICC(2,1)/ICC(2,k), Pearson and RMSE.
//! * [`agreement`]: the expert/non-expert agreement report built on top of the above.

pub mod aggregate;
pub mod agreement;
pub mod error;
pub mod labels;
pub mod pq;
pub mod split;
pub mod stats;

pub use aggregate::{aggregate_ratings, per_clip_rater_std, per_clip_rater_std_for, rater_means};
pub use agreement::{AgreementReport, ClassRow, IccForm};
pub use error::{Error, Result, RowDiagnostic};
pub use labels::{ClipRecord, LabelSet, RaterClass, RatingRecord};
pub use pq::{PQVector, PerceptualQuality};
pub use split::{DatasetSplit, Partition, SplitRatios};
pub use stats::{AnovaComponents, RatingMatrix};
