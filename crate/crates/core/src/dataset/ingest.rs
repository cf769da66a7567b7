use std::path::Path;

use log::warn;

use super::store::SegmentStore;
use crate::error::{invalid, Error, Result};
use crate::signal::{resample_to_125, Channel, SEGMENT_LEN};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestOptions {
    /// Sampling rate of the source; 125 Hz is used as is, 1000 Hz is resampled.
    pub input_fs: f64,
    /// ABP column holds volts (100 mmHg/V) rather than mmHg.
    pub abp_in_volts: bool,
    /// Context samples added on each side of every window.
    pub margin: usize,
    pub segment_length: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            input_fs: 125.0,
            abp_in_volts: false,
            margin: 66,
            segment_length: SEGMENT_LEN,
        }
    }
}

/// One continuous multichannel recording.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub name: String,
    pub channels: Vec<Channel>,
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestResult {
    /// Windows of `segment_length + 2 * margin` samples.
    pub store: SegmentStore,
    /// Source record name per segment.
    pub subjects: Vec<String>,
    /// Per segment: the margin ran past the record and was reflected.
    pub edge_filled: Vec<bool>,
    pub warnings: Vec<String>,
}

/// Reads one CSV file, or every `*.csv` in a directory (sorted by name), one
/// record per file. `mapping` pairs column headers with channels.
pub fn ingest_csv(path: &Path, mapping: &[(String, Channel)], opts: &IngestOptions) -> Result<IngestResult> {
    let files = if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    let records = files
        .iter()
        .map(|f| read_record(f, mapping))
        .collect::<Result<Vec<_>>>()?;
    ingest_records(&records, opts)
}

fn read_record(path: &Path, mapping: &[(String, Channel)]) -> Result<RawRecord> {
    if mapping.is_empty() {
        return Err(invalid("channel mapping is empty"));
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut columns = Vec::with_capacity(mapping.len());
    for (name, _) in mapping {
        let col = headers.iter().position(|h| h == name).ok_or_else(|| Error::Ingest {
            row: 1,
            column: 0,
            message: format!("{}: missing column {name:?}", path.display()),
        })?;
        columns.push(col);
    }
    let mut samples = vec![Vec::new(); mapping.len()];
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = r + 2;
        for (k, &col) in columns.iter().enumerate() {
            let cell = rec.get(col).ok_or_else(|| Error::Ingest {
                row,
                column: col + 1,
                message: format!("{}: missing cell", path.display()),
            })?;
            let v: f64 = cell.parse().map_err(|_| Error::Ingest {
                row,
                column: col + 1,
                message: format!("{}: non-numeric cell {cell:?}", path.display()),
            })?;
            if !v.is_finite() {
                return Err(Error::Ingest {
                    row,
                    column: col + 1,
                    message: format!("{}: non-finite value", path.display()),
                });
            }
            samples[k].push(v);
        }
    }
    Ok(RawRecord {
        name: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        channels: mapping.iter().map(|(_, c)| *c).collect(),
        samples,
    })
}

/// Cuts records into consecutive non-overlapping windows. Incomplete tail
/// windows are dropped; margins that run past a record edge are reflected.
pub fn ingest_records(records: &[RawRecord], opts: &IngestOptions) -> Result<IngestResult> {
    let resample = if opts.input_fs == 125.0 {
        false
    } else if opts.input_fs == 1000.0 {
        true
    } else {
        return Err(invalid(format!(
            "unsupported input rate {} Hz (expected 125 or 1000)",
            opts.input_fs
        )));
    };
    let channels = match records.first() {
        Some(r) => r.channels.clone(),
        None => return Err(invalid("no records to ingest")),
    };
    let l = opts.segment_length;
    let m = opts.margin;
    let mut store = SegmentStore::new(l + 2 * m, channels.clone())?;
    let mut subjects = Vec::new();
    let mut edge_filled = Vec::new();
    let mut warnings = Vec::new();
    let mut next_id = 0u64;

    for rec in records {
        if rec.channels != channels {
            return Err(invalid(format!(
                "record {} has channels {:?}, expected {:?}",
                rec.name, rec.channels, channels
            )));
        }
        let mut signals = Vec::with_capacity(channels.len());
        for (c, raw) in channels.iter().zip(&rec.samples) {
            let mut s = if resample { resample_to_125(raw)? } else { raw.clone() };
            if *c == Channel::Abp && opts.abp_in_volts {
                s.iter_mut().for_each(|v| *v *= crate::signal::MMHG_PER_VOLT);
            }
            signals.push(s);
        }
        let n = signals.iter().map(Vec::len).min().unwrap_or(0);
        if n < l {
            let msg = format!(
                "record {} has {n} samples, shorter than one {l}-sample window",
                rec.name
            );
            warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        let padded: Vec<Vec<f64>> = signals.iter().map(|s| reflect_extend(&s[..n], m)).collect();
        for k in 0..n / l {
            // Window k covers [k l, (k + 1) l) of the record, m + k l in padded coordinates.
            let start = k * l;
            let views: Vec<&[f64]> = padded.iter().map(|p| &p[start..start + l + 2 * m]).collect();
            store.push(next_id, &views)?;
            next_id += 1;
            subjects.push(rec.name.clone());
            edge_filled.push(start < m || start + l + m > n);
        }
    }
    Ok(IngestResult {
        store,
        subjects,
        edge_filled,
        warnings,
    })
}

/// Mirror extension by `pad` samples per side; wraps the mirror for records
/// shorter than the pad.
fn reflect_extend(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len() as isize;
    let period = 2 * (n - 1).max(1);
    let at = |i: isize| -> f64 {
        let mut j = i.rem_euclid(period);
        if j >= n {
            j = period - j;
        }
        x[j as usize]
    };
    (-(pad as isize)..n + pad as isize).map(at).collect()
}
