//! TREC run files (`qid Q0 ext_id rank score tag`) and qrels
//! (`qid 0 ext_id rel`).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::storage::{FormatError, FormatErrorKind, Position};
use crate::topk::TopKResult;

/// Ranked lists keyed by query id, best first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    pub queries: BTreeMap<String, Vec<(u64, f64)>>,
}

impl Run {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, qid: impl Into<String>, result: &TopKResult) {
        self.queries.insert(qid.into(), result.hits.iter().map(|h| (h.ext_id, h.score)).collect());
    }

    /// Ext ids ranked for `qid`, best first.
    pub fn ranking(&self, qid: &str) -> Vec<u64> {
        self.queries.get(qid).map(|r| r.iter().map(|p| p.0).collect()).unwrap_or_default()
    }

    pub fn write(&self, mut out: impl Write, tag: &str) -> Result<()> {
        for (qid, hits) in &self.queries {
            for (rank, (ext, score)) in hits.iter().enumerate() {
                writeln!(out, "{qid} Q0 {ext} {} {score} {tag}", rank + 1)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a run, ordering each query's hits by the rank column.
    pub fn read(input: impl BufRead) -> Result<Self> {
        let mut ranked: BTreeMap<String, Vec<(u64, u64, f64)>> = BTreeMap::new();
        let mut seen = HashSet::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let pos = Position::Line(i as u64 + 1);
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            if f.len() != 6 {
                return malformed(pos, format!("expected 6 fields, found {}", f.len()));
            }
            let ext: u64 = parse(pos, f[2], "ext id")?;
            let rank: u64 = parse(pos, f[3], "rank")?;
            let score: f64 = parse(pos, f[4], "score")?;
            if !seen.insert((f[0].to_string(), ext)) {
                return malformed(pos, format!("duplicate document {ext} for query {}", f[0]));
            }
            ranked.entry(f[0].to_string()).or_default().push((rank, ext, score));
        }
        let queries = ranked
            .into_iter()
            .map(|(q, mut hits)| {
                hits.sort_by_key(|h| h.0);
                (q, hits.into_iter().map(|(_, e, s)| (e, s)).collect())
            })
            .collect();
        Ok(Self { queries })
    }
}

/// Graded judgments keyed by query id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    pub judgments: BTreeMap<String, HashMap<u64, i32>>,
}

impl Qrels {
    pub fn relevance(&self, qid: &str, ext_id: u64) -> i32 {
        self.judgments.get(qid).and_then(|j| j.get(&ext_id)).copied().unwrap_or(0)
    }

    pub fn read(input: impl BufRead) -> Result<Self> {
        let mut judgments: BTreeMap<String, HashMap<u64, i32>> = BTreeMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let pos = Position::Line(i as u64 + 1);
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            if f.len() != 4 {
                return malformed(pos, format!("expected 4 fields, found {}", f.len()));
            }
            let ext: u64 = parse(pos, f[2], "ext id")?;
            let rel: i32 = parse(pos, f[3], "relevance")?;
            if judgments.entry(f[0].to_string()).or_default().insert(ext, rel).is_some() {
                return malformed(pos, format!("duplicate judgment of {ext} for query {}", f[0]));
            }
        }
        Ok(Self { judgments })
    }
}

fn malformed<T>(position: Position, msg: String) -> Result<T> {
    Err(Error::Format(FormatError { position, kind: FormatErrorKind::Malformed(msg) }))
}

fn parse<T: std::str::FromStr>(pos: Position, s: &str, what: &str) -> Result<T> {
    s.parse().or_else(|_| malformed(pos, format!("bad {what} `{s}`")))
}
