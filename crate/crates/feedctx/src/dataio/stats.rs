use std::io::Write;

use super::SessionRecord;
use crate::DataError;

#[derive(Debug, Clone, PartialEq)]
pub struct PositionRow {
    pub position: usize,
    pub views: u64,
    pub clicks: u64,
    pub ctr: f64,
}

/// Views, clicks and CTR per position.
pub fn position_stats(records: &[SessionRecord]) -> Result<Vec<PositionRow>, DataError> {
    if records.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let depth = records.iter().map(|r| r.events.len()).max().unwrap_or(0);
    let mut views = vec![0u64; depth];
    let mut clicks = vec![0u64; depth];
    for r in records {
        for e in &r.events {
            views[e.pos] += 1;
            clicks[e.pos] += e.click as u64;
        }
    }
    Ok((0..depth)
        .map(|p| PositionRow {
            position: p,
            views: views[p],
            clicks: clicks[p],
            ctr: clicks[p] as f64 / views[p] as f64,
        })
        .collect())
}

pub fn write_stats_csv<W: Write>(mut w: W, rows: &[PositionRow]) -> std::io::Result<()> {
    writeln!(w, "position,views,clicks,ctr")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.position, r.views, r.clicks, r.ctr)?;
    }
    Ok(())
}
