//! Peak analysis, SBP/DBP/MAP labelling and bad-signal screening.

mod label;
mod peaks;
mod screen;
mod stats;

pub use label::{extract_label, BpTarget, SegmentLabel};
pub use peaks::{detect_peaks, detect_troughs, PeakConfig, PeakSet};
pub use screen::{coefficient_of_variation, screen_segment, Decision, RejectReason, ScreenConfig};
pub use stats::{dataset_statistics, DatasetStatistics, Summary};
