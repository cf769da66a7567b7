use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};
use crate::quality::SegmentLabel;

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    id: u64,
    subject_id: String,
    sbp: f64,
    dbp: f64,
    map: f64,
}

/// Labels keyed by segment id, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelTable {
    pub rows: Vec<(u64, SegmentLabel)>,
}

impl LabelTable {
    pub fn get(&self, id: u64) -> Option<&SegmentLabel> {
        self.rows.iter().find(|(i, _)| *i == id).map(|(_, l)| l)
    }

    /// Labels for `ids`, in that order.
    pub fn lookup(&self, ids: &[u64]) -> Result<Vec<SegmentLabel>> {
        let index: std::collections::HashMap<u64, &SegmentLabel> = self.rows.iter().map(|(i, l)| (*i, l)).collect();
        ids.iter()
            .map(|id| {
                index
                    .get(id)
                    .map(|l| (*l).clone())
                    .ok_or_else(|| Error::Compatibility(format!("no label for segment {id}")))
            })
            .collect()
    }
}

pub fn write_labels(table: &LabelTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (id, l) in &table.rows {
        w.serialize(LabelRow {
            id: *id,
            subject_id: l.subject_id.clone(),
            sbp: l.sbp,
            dbp: l.dbp,
            map: l.map,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<LabelTable> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let expected = ["id", "subject_id", "sbp", "dbp", "map"];
    if headers.iter().ne(expected.iter().copied()) {
        return Err(FormatError::Invalid(format!(
            "label header must be {}, found {}",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        ))
        .into());
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        let row: LabelRow = rec?;
        let label = SegmentLabel {
            sbp: row.sbp,
            dbp: row.dbp,
            map: row.map,
            subject_id: row.subject_id,
        };
        rows.push((row.id, label));
    }
    Ok(LabelTable { rows })
}
