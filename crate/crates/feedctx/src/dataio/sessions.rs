use std::io::Write;
use std::path::Path;

use feedctx_core::{Labels, SessionInput};
use serde::{Deserialize, Serialize};

use crate::DataError;

/// Long-term history beyond this many most recent items is dropped when a
/// record is turned into model input.
pub const MAX_USER_HISTORY: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub pos: usize,
    pub item: usize,
    pub click: u8,
    pub scroll: u8,
}

/// One line of a session log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRecord {
    pub user_id: usize,
    pub user_hist: Vec<usize>,
    pub events: Vec<Event>,
}

impl SessionRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.events.is_empty() {
            return Err("no events".into());
        }
        let last = self.events.len() - 1;
        for (t, e) in self.events.iter().enumerate() {
            if e.pos != t {
                return Err(format!("event {t} has pos {}, expected {t}", e.pos));
            }
            if e.click > 1 || e.scroll > 1 {
                return Err(format!("event {t}: click and scroll must be 0 or 1"));
            }
            if e.scroll == 0 && t != last {
                return Err(format!("scroll=0 at pos {t} is not the last event"));
            }
        }
        Ok(())
    }

    pub fn to_input(&self) -> SessionInput {
        let skip = self.user_hist.len().saturating_sub(MAX_USER_HISTORY);
        let labels = self
            .events
            .iter()
            .map(|e| Labels { click: e.click == 1, scroll: e.scroll == 1 })
            .collect();
        SessionInput::new(self.user_id, self.user_hist[skip..].to_vec(), self.events.iter().map(|e| e.item).collect())
            .with_labels(labels)
    }

    /// A labelled session as a record; unlabelled sessions are rejected.
    pub fn from_input(s: &SessionInput) -> Result<Self, DataError> {
        s.validate()?;
        let labels = s
            .labels
            .as_ref()
            .ok_or_else(|| DataError::Invalid { line: 0, message: "session has no labels".into() })?;
        Ok(Self {
            user_id: s.user,
            user_hist: s.history.clone(),
            events: s
                .items
                .iter()
                .zip(labels)
                .enumerate()
                .map(|(pos, (&item, l))| Event { pos, item, click: l.click as u8, scroll: l.scroll as u8 })
                .collect(),
        })
    }
}

/// Parse a JSON-lines session log. Blank lines are skipped.
pub fn parse_sessions(text: &str) -> Result<Vec<SessionRecord>, DataError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: SessionRecord =
            serde_json::from_str(line).map_err(|e| DataError::Parse { line: i + 1, message: e.to_string() })?;
        record.validate().map_err(|message| DataError::Invalid { line: i + 1, message })?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_sessions(path: impl AsRef<Path>) -> Result<Vec<SessionRecord>, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    parse_sessions(&text)
}

/// Canonical text: one compact record per line, fields in schema order.
pub fn render_sessions(records: &[SessionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records always serialize"));
        out.push('\n');
    }
    out
}

pub fn write_sessions(path: impl AsRef<Path>, records: &[SessionRecord]) -> Result<(), DataError> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| DataError::io(path, e))?;
    f.write_all(render_sessions(records).as_bytes()).map_err(|e| DataError::io(path, e))
}
