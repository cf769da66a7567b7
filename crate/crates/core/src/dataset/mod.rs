//! Segment storage, label tables, ingestion, splitting and synthetic data.

mod ingest;
mod labels;
mod split;
mod store;
mod synth;

pub use ingest::{ingest_csv, ingest_records, IngestOptions, IngestResult, RawRecord};
pub use labels::{read_labels, write_labels, LabelTable};
pub use split::{make_folds, make_split, make_split_grouped, FoldPlan, SplitFractions, SplitPlan};
pub use store::{read_store, write_store, SegmentStore, STORE_MAGIC, STORE_VERSION};
pub(crate) use store::{write_bytes, Cursor};
pub use synth::{synth_generate, SynthConfig, SynthOutput};
