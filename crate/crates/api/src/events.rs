//! Mutation events and the sinks that receive them.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventType {
    #[serde(rename = "collection.created")]
    CollectionCreated,
    #[serde(rename = "images.added")]
    ImagesAdded,
    #[serde(rename = "localization.created")]
    LocalizationCreated,
    #[serde(rename = "localization.verified")]
    LocalizationVerified,
    #[serde(rename = "localization.rejected")]
    LocalizationRejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEnvelope {
    #[serde(rename = "type")]
    pub kind: EventType,
    pub subject: Uuid,
    pub timestamp: DateTime<Utc>,
    pub actor: String,
}

impl EventEnvelope {
    pub fn now(kind: EventType, subject: Uuid, actor: impl Into<String>) -> Self {
        Self { kind, subject, timestamp: Utc::now(), actor: actor.into() }
    }
}

/// Receives one envelope per committed mutation. Delivery is at most once:
/// an error is logged by the caller and the event dropped.
pub trait EventSink: Send + Sync {
    fn publish(&self, event: &EventEnvelope) -> Result<(), String>;
}

/// Publishes and logs failures. Never fails the caller.
pub fn emit(sink: &dyn EventSink, event: EventEnvelope) {
    if let Err(e) = sink.publish(&event) {
        tracing::warn!(subject = %event.subject, "event dropped: {e}");
    }
}

/// JSON lines on stdout.
#[derive(Debug, Default)]
pub struct StdoutSink;

impl EventSink for StdoutSink {
    fn publish(&self, event: &EventEnvelope) -> Result<(), String> {
        let line = serde_json::to_string(event).map_err(|e| e.to_string())?;
        let mut out = std::io::stdout().lock();
        writeln!(out, "{line}").map_err(|e| e.to_string())
    }
}

/// JSON lines appended to a file.
#[derive(Debug)]
pub struct FileSink {
    file: Mutex<File>,
}

impl FileSink {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { file: Mutex::new(file) })
    }
}

impl EventSink for FileSink {
    fn publish(&self, event: &EventEnvelope) -> Result<(), String> {
        let mut line = serde_json::to_vec(event).map_err(|e| e.to_string())?;
        line.push(b'\n');
        let mut f = self.file.lock().map_err(|_| "event file lock poisoned".to_string())?;
        f.write_all(&line).map_err(|e| e.to_string())
    }
}

/// Keeps events in memory. Clones share the same buffer.
#[derive(Debug, Clone, Default)]
pub struct CollectorSink {
    events: Arc<Mutex<Vec<EventEnvelope>>>,
}

impl CollectorSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> Vec<EventEnvelope> {
        self.events.lock().map(|v| v.clone()).unwrap_or_default()
    }
}

impl EventSink for CollectorSink {
    fn publish(&self, event: &EventEnvelope) -> Result<(), String> {
        self.events.lock().map_err(|_| "collector lock poisoned".to_string())?.push(event.clone());
        Ok(())
    }
}

/// Discards everything.
#[derive(Debug, Default)]
pub struct NullSink;

impl EventSink for NullSink {
    fn publish(&self, _: &EventEnvelope) -> Result<(), String> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Broken;

    impl EventSink for Broken {
        fn publish(&self, _: &EventEnvelope) -> Result<(), String> {
            Err("broker down".into())
        }
    }

    #[test]
    fn envelope_wire_names() {
        let e = EventEnvelope {
            kind: EventType::LocalizationVerified,
            subject: Uuid::nil(),
            timestamp: DateTime::UNIX_EPOCH,
            actor: "kb".into(),
        };
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["type"], "localization.verified");
        assert_eq!(v["subject"], "00000000-0000-0000-0000-000000000000");
        assert_eq!(serde_json::from_value::<EventEnvelope>(v).unwrap(), e);
        let names: Vec<String> = [EventType::CollectionCreated, EventType::ImagesAdded, EventType::LocalizationRejected]
            .iter()
            .map(|t| serde_json::to_value(t).unwrap().as_str().unwrap().to_string())
            .collect();
        assert_eq!(names, ["collection.created", "images.added", "localization.rejected"]);
    }

    #[test]
    fn emit_swallows_failures() {
        emit(&Broken, EventEnvelope::now(EventType::ImagesAdded, Uuid::nil(), "x"));
    }

    #[test]
    fn file_sink_appends_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let sink = FileSink::open(&path).unwrap();
        for _ in 0..3 {
            emit(&sink, EventEnvelope::now(EventType::ImagesAdded, Uuid::nil(), "x"));
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        for l in text.lines() {
            serde_json::from_str::<EventEnvelope>(l).unwrap();
        }
    }
}
