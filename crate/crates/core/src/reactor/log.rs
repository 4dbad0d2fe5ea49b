use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One successful collision. `new[i]` is false for reactants passed through
/// unchanged into `products`; `rid`/`pid` carry instance ids when lineage
/// tracking is on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionEvent {
    pub t: u64,
    pub reactants: Vec<String>,
    pub products: Vec<String>,
    pub new: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pid: Option<Vec<u64>>,
}

impl ReactionEvent {
    fn check(&self) -> Result<(), String> {
        if self.reactants.is_empty() {
            return Err("event has no reactants".into());
        }
        if self.products.len() != self.new.len() {
            return Err("`products` and `new` differ in length".into());
        }
        if let Some(rid) = &self.rid {
            if rid.len() != self.reactants.len() {
                return Err("`rid` and `reactants` differ in length".into());
            }
        }
        if let Some(pid) = &self.pid {
            if pid.len() != self.products.len() {
                return Err("`pid` and `products` differ in length".into());
            }
        }
        if self.rid.is_some() != self.pid.is_some() {
            return Err("`rid` and `pid` must appear together".into());
        }
        Ok(())
    }

    /// Products that did not exist before this event.
    pub fn new_products(&self) -> impl Iterator<Item = (usize, &str)> {
        self.products
            .iter()
            .zip(&self.new)
            .enumerate()
            .filter(|(_, (_, &n))| n)
            .map(|(i, (k, _))| (i, k.as_str()))
    }

    pub fn has_lineage(&self) -> bool {
        self.rid.is_some() && self.pid.is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub events: Vec<ReactionEvent>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push(&mut self, event: ReactionEvent) {
        self.events.push(event);
    }

    /// Reads one JSON event per line. Blank lines are skipped; line numbers
    /// in errors are 1-based.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, LogError> {
        let mut events: Vec<ReactionEvent> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| LogError::Malformed { line: i + 1, message };
            let event: ReactionEvent = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
            event.check().map_err(malformed)?;
            if events.last().is_some_and(|prev| prev.t > event.t) {
                return Err(malformed("event time decreases".into()));
            }
            events.push(event);
        }
        Ok(EventLog { events })
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.events {
            write_event(&mut out, e)?;
        }
        Ok(())
    }

    pub fn has_lineage(&self) -> bool {
        self.events.iter().all(ReactionEvent::has_lineage)
    }

    /// Applies every event to `initial` species counts: reactants are
    /// consumed and all listed products, pass-throughs included, are added.
    pub fn replay(&self, initial: &BTreeMap<String, u64>) -> Result<BTreeMap<String, u64>, String> {
        let mut counts = initial.clone();
        for (i, e) in self.events.iter().enumerate() {
            for r in &e.reactants {
                let c = counts
                    .get_mut(r)
                    .filter(|c| **c > 0)
                    .ok_or_else(|| format!("event {i} consumes absent species {r}"))?;
                *c -= 1;
                if *c == 0 {
                    counts.remove(r);
                }
            }
            for p in &e.products {
                *counts.entry(p.clone()).or_insert(0) += 1;
            }
        }
        Ok(counts)
    }
}

pub fn write_event<W: Write>(mut out: W, event: &ReactionEvent) -> io::Result<()> {
    serde_json::to_writer(&mut out, event)?;
    out.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_layout_is_stable() {
        let e = ReactionEvent {
            t: 3,
            reactants: vec!["a".into(), "b".into()],
            products: vec!["a".into(), "b".into(), "c".into()],
            new: vec![false, false, true],
            rid: None,
            pid: None,
        };
        let mut buf = Vec::new();
        write_event(&mut buf, &e).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"t\":3,\"reactants\":[\"a\",\"b\"],\"products\":[\"a\",\"b\",\"c\"],\"new\":[false,false,true]}\n"
        );
    }

    #[test]
    fn malformed_lines_are_located() {
        let text = "{\"t\":1,\"reactants\":[\"a\"],\"products\":[],\"new\":[]}\n\nnot json\n";
        match EventLog::read_jsonl(text.as_bytes()) {
            Err(LogError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "{\"t\":1,\"reactants\":[\"a\"],\"products\":[\"b\"],\"new\":[]}\n";
        assert!(matches!(
            EventLog::read_jsonl(text.as_bytes()),
            Err(LogError::Malformed { line: 1, .. })
        ));
        let text = "{\"t\":2,\"reactants\":[\"a\"],\"products\":[],\"new\":[]}\n{\"t\":1,\"reactants\":[\"a\"],\"products\":[],\"new\":[]}\n";
        assert!(matches!(
            EventLog::read_jsonl(text.as_bytes()),
            Err(LogError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn replay_consumes_and_produces() {
        let log = EventLog {
            events: vec![ReactionEvent {
                t: 1,
                reactants: vec!["a".into(), "b".into()],
                products: vec!["c".into()],
                new: vec![true],
                rid: None,
                pid: None,
            }],
        };
        let initial = BTreeMap::from([("a".to_string(), 1), ("b".to_string(), 2)]);
        let out = log.replay(&initial).unwrap();
        assert_eq!(out, BTreeMap::from([("b".to_string(), 1), ("c".to_string(), 1)]));
        assert!(log.replay(&BTreeMap::new()).is_err());
    }
}
