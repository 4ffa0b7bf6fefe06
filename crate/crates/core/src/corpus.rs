//! Corpus data model and line-delimited ingestion.
//!
//! A corpus file holds one JSON record per line:
//!
//! ```text
//! {"tweet_id":"t1","user_id":"u1","text":"vive la #france","interaction_kind":"post","emotions":[0.1,0.2,0.3,0.1,0.1,0.1,0.1]}
//! ```
//!
//! Records are validated on load; in lenient mode invalid lines are counted
//! and skipped, in strict mode the first invalid line aborts ingestion.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of annotated emotion dimensions per tweet.
pub const EMOTION_COUNT: usize = 7;

/// Tolerance for the sum-to-one check on emotion annotations. Arrays whose
/// sum is within this tolerance are renormalized on load.
pub const EMOTION_SUM_TOLERANCE: f64 = 1e-6;

/// The seven annotated emotion dimensions, in array order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Fear,
    Anger,
    Enjoyment,
    Sadness,
    Disgust,
    Surprise,
    None,
}

impl Emotion {
    pub const ALL: [Emotion; EMOTION_COUNT] = [
        Emotion::Fear,
        Emotion::Anger,
        Emotion::Enjoyment,
        Emotion::Sadness,
        Emotion::Disgust,
        Emotion::Surprise,
        Emotion::None,
    ];

    /// Position of this emotion in an [`EmotionArray`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Emotion::Fear => "Fear",
            Emotion::Anger => "Anger",
            Emotion::Enjoyment => "Enjoyment",
            Emotion::Sadness => "Sadness",
            Emotion::Disgust => "Disgust",
            Emotion::Surprise => "Surprise",
            Emotion::None => "None",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-tweet emotion annotation: seven non-negative reals summing to one,
/// ordered fear, anger, enjoyment, sadness, disgust, surprise, none.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmotionArray(pub [f64; EMOTION_COUNT]);

impl EmotionArray {
    /// Validate ranges and the sum-to-one invariant, then renormalize so the
    /// sum is exactly one. Annotations arrive as floats, so a small deviation
    /// from one is accepted and folded away here.
    pub fn validated(values: [f64; EMOTION_COUNT]) -> std::result::Result<Self, String> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(format!("emotion value {i} is not finite"));
            }
            if *v < 0.0 || *v > 1.0 {
                return Err(format!("emotion value {i} = {v} outside [0, 1]"));
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > EMOTION_SUM_TOLERANCE {
            return Err(format!("emotion values sum to {sum}, expected 1"));
        }
        let mut out = values;
        for v in &mut out {
            *v /= sum;
        }
        Ok(EmotionArray(out))
    }

    pub fn values(&self) -> &[f64; EMOTION_COUNT] {
        &self.0
    }

    pub fn get(&self, emotion: Emotion) -> f64 {
        self.0[emotion.index()]
    }
}

/// How a user produced a tweet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Post,
    Retweet,
    Quote,
    Reply,
}

impl InteractionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Post => "post",
            InteractionKind::Retweet => "retweet",
            InteractionKind::Quote => "quote",
            InteractionKind::Reply => "reply",
        }
    }
}

/// One corpus entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub user_id: String,
    pub text: String,
    pub interaction_kind: InteractionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub referenced_tweet_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotions: Option<EmotionArray>,
}

impl TweetRecord {
    /// Structural validation of a single record (uniqueness is corpus-level).
    fn validate(&self) -> std::result::Result<(), String> {
        if self.tweet_id.is_empty() {
            return Err("empty tweet_id".into());
        }
        if self.user_id.is_empty() {
            return Err("empty user_id".into());
        }
        match (self.interaction_kind, &self.referenced_tweet_id) {
            (InteractionKind::Post, Some(_)) => {
                return Err("post must not carry referenced_tweet_id".into())
            }
            (InteractionKind::Post, None) => {}
            (_, None) => {
                return Err(format!(
                    "{} requires referenced_tweet_id",
                    self.interaction_kind.as_str()
                ))
            }
            (_, Some(r)) if r.is_empty() => return Err("empty referenced_tweet_id".into()),
            _ => {}
        }
        Ok(())
    }
}

/// An ordered, validated collection of tweet records. Record order is the
/// file order, independent of how many workers parsed the file.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<TweetRecord>,
    by_tweet_id: HashMap<String, usize>,
    tweets_per_user: HashMap<String, usize>,
}

impl Corpus {
    /// Build a corpus from already-parsed records, applying the same
    /// validation as strict ingestion.
    pub fn from_records(records: Vec<TweetRecord>) -> Result<Self> {
        let mut corpus = Corpus::default();
        for (i, mut record) in records.into_iter().enumerate() {
            if let Some(e) = record.emotions {
                record.emotions = Some(EmotionArray::validated(e.0).map_err(|reason| {
                    Error::MalformedRecord {
                        path: "<memory>".into(),
                        line: i + 1,
                        reason,
                    }
                })?);
            }
            corpus.push(record).map_err(|reason| Error::MalformedRecord {
                path: "<memory>".into(),
                line: i + 1,
                reason,
            })?;
        }
        Ok(corpus)
    }

    fn push(&mut self, record: TweetRecord) -> std::result::Result<(), String> {
        record.validate()?;
        if self.by_tweet_id.contains_key(&record.tweet_id) {
            return Err(format!("duplicate tweet_id {}", record.tweet_id));
        }
        self.by_tweet_id
            .insert(record.tweet_id.clone(), self.records.len());
        *self
            .tweets_per_user
            .entry(record.user_id.clone())
            .or_insert(0) += 1;
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of distinct authors.
    pub fn user_count(&self) -> usize {
        self.tweets_per_user.len()
    }

    pub fn record_by_tweet_id(&self, tweet_id: &str) -> Option<&TweetRecord> {
        self.by_tweet_id.get(tweet_id).map(|&i| &self.records[i])
    }

    /// Number of records authored by `user`, all interaction kinds counted.
    /// Unknown users have zero tweets.
    pub fn user_tweet_count(&self, user: &str) -> usize {
        self.tweets_per_user.get(user).copied().unwrap_or(0)
    }

    /// Distinct user ids in ascending order.
    pub fn user_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.tweets_per_user.keys().map(String::as_str).collect();
        ids.sort_unstable();
        ids
    }

    /// Write the corpus back out in the line-delimited format.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for record in &self.records {
            serde_json::to_writer(&mut out, record)
                .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Outcome summary of one ingestion run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct IngestReport {
    pub total_lines: usize,
    pub accepted: usize,
    pub skipped: usize,
    /// Skip reasons with the line number of the first occurrence.
    pub reasons: Vec<(usize, String)>,
}

/// Load a corpus from a line-delimited record file.
///
/// In strict mode the first invalid line aborts with an error; in lenient
/// mode invalid lines are skipped and tallied in the report. Blank lines are
/// ignored. Lines are parsed in parallel; the resulting record order is the
/// file order regardless of worker count.
pub fn ingest(path: &Path, strict: bool) -> Result<(Corpus, IngestReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let lines: Vec<String> = reader
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;

    let parsed: Vec<(usize, std::result::Result<TweetRecord, String>)> = lines
        .par_iter()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            let parsed = serde_json::from_str::<TweetRecord>(line)
                .map_err(|e| format!("invalid record: {e}"))
                .and_then(|mut record| {
                    if let Some(e) = record.emotions {
                        record.emotions = Some(EmotionArray::validated(e.0)?);
                    }
                    Ok(record)
                });
            (i + 1, parsed)
        })
        .collect();

    let mut corpus = Corpus::default();
    let mut report = IngestReport {
        total_lines: parsed.len(),
        ..IngestReport::default()
    };
    for (line, outcome) in parsed {
        let failure = match outcome {
            Ok(record) => match corpus.push(record) {
                Ok(()) => {
                    report.accepted += 1;
                    continue;
                }
                Err(reason) => reason,
            },
            Err(reason) => reason,
        };
        if strict {
            return Err(Error::MalformedRecord {
                path: path.to_path_buf(),
                line,
                reason: failure,
            });
        }
        report.skipped += 1;
        report.reasons.push((line, failure));
    }
    Ok((corpus, report))
}

/// Convenience for spec-level code paths that only need the count.
pub fn user_tweet_count(corpus: &Corpus, user: &str) -> usize {
    corpus.user_tweet_count(user)
}
