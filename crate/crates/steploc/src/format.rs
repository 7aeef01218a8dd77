//! Stored file formats: score files, ground truth, predictions, features.
//!
//! All indices in files are 0-based and inclusive on both ends. Masked
//! grid cells (`start > end`) are stored as JSON `null` — never as a
//! float — and become `NaN`/`-inf` only in memory.
//!
//! Score files come in two interchangeable encodings sharing one logical
//! schema and one `format_version`:
//!
//! * **JSON** (default): `{ format_version, videos: [ { video_id,
//!   num_clips, queries: [ { query_id, sentence_scores, phrase_scores?,
//!   importance_logits? } ] } ] }` where each score grid is a row-major
//!   `N×N` array with `null` exactly on masked cells. `phrase_scores` and
//!   `importance_logits` are omitted for pre-fused scores; when phrase
//!   grids are present the logits are mandatory (sentence logit first,
//!   one more entry than there are phrases).
//! * **Binary**: for large tensors. Little-endian throughout:
//!   magic `"S2DSCORE"`, `u32` format version, `u32` video count, then per
//!   video: `u32` id length + UTF-8 id, `u32` num_clips, `u32` query
//!   count, and per query: `u32` id length + id, `u32` phrase count `P`,
//!   `u8` logits flag, `(P+1)` `f64` logits when the flag is 1, then the
//!   sentence grid and `P` phrase grids, each `N×N` row-major `f64` with
//!   `NaN` on masked cells.
//!
//! Readers sniff the magic bytes, so one entry point opens either
//! encoding. Ground truth, predictions, and raw features are JSON-only.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::ClipInterval;
use crate::types::{QueryFeatures, ScoreMap, SelectMethod, TemporalFeatureMap};

pub const FORMAT_VERSION: u32 = 1;
pub const BINARY_MAGIC: &[u8; 8] = b"S2DSCORE";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: unsupported format version {got} (this build reads version {expected})")]
    Version {
        path: String,
        expected: u32,
        got: u32,
    },

    #[error("{path}: not a binary score file (bad magic)")]
    BadMagic { path: String },

    #[error("{path}: truncated binary score file")]
    Truncated { path: String },

    #[error("{path}: {context}: {message}")]
    Invalid {
        path: String,
        context: String,
        message: String,
    },

    /// Refusing to serialize a non-finite number. Computed outputs are
    /// finite by construction, so hitting this means a broken invariant,
    /// not bad user input.
    #[error("{path}: video {video_id}: refusing to write non-finite values")]
    NonFiniteOutput { path: String, video_id: String },
}

impl FormatError {
    fn invalid(path: &str, context: impl Into<String>, message: impl ToString) -> Self {
        FormatError::Invalid {
            path: path.to_string(),
            context: context.into(),
            message: message.to_string(),
        }
    }
}

// ---------------------------------------------------------------------------
// Domain-side dataset structs (validated, ready for computation)

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDataset {
    pub videos: Vec<VideoScores>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoScores {
    pub video_id: String,
    pub num_clips: usize,
    pub queries: Vec<QueryScores>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryScores {
    pub query_id: String,
    pub sentence_scores: ScoreMap,
    pub phrase_scores: Vec<ScoreMap>,
    /// Raw importance logits, sentence first; required when phrase grids
    /// are present.
    pub importance_logits: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthDataset {
    pub videos: Vec<VideoGroundTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoGroundTruth {
    pub video_id: String,
    pub num_clips: usize,
    pub queries: Vec<GroundTruthQuery>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthQuery {
    pub query_id: String,
    pub interval: ClipInterval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionDataset {
    pub videos: Vec<VideoPrediction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoPrediction {
    pub video_id: String,
    pub method: SelectMethod,
    pub fallback_used: bool,
    pub objective: f64,
    pub entries: Vec<PredictionEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionEntry {
    pub query_id: String,
    pub interval: ClipInterval,
    pub log_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    pub videos: Vec<VideoFeatures>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoFeatures {
    pub video_id: String,
    pub features: TemporalFeatureMap,
    pub queries: Vec<NamedQueryFeatures>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedQueryFeatures {
    pub query_id: String,
    pub features: QueryFeatures,
}

// ---------------------------------------------------------------------------
// JSON wire structs

#[derive(Serialize, Deserialize)]
struct WireScoreFile {
    format_version: u32,
    videos: Vec<WireVideoScores>,
}

#[derive(Serialize, Deserialize)]
struct WireVideoScores {
    video_id: String,
    num_clips: usize,
    queries: Vec<WireQueryScores>,
}

#[derive(Serialize, Deserialize)]
struct WireQueryScores {
    query_id: String,
    sentence_scores: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phrase_scores: Option<Vec<Vec<Option<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    importance_logits: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct WireGtFile {
    format_version: u32,
    videos: Vec<WireVideoGt>,
}

#[derive(Serialize, Deserialize)]
struct WireVideoGt {
    video_id: String,
    num_clips: usize,
    queries: Vec<WireGtQuery>,
}

#[derive(Serialize, Deserialize)]
struct WireGtQuery {
    query_id: String,
    start: usize,
    end: usize,
}

#[derive(Serialize, Deserialize)]
struct WirePredFile {
    format_version: u32,
    videos: Vec<WireVideoPred>,
}

#[derive(Serialize, Deserialize)]
struct WireVideoPred {
    video_id: String,
    method: SelectMethod,
    fallback_used: bool,
    objective: f64,
    entries: Vec<WirePredEntry>,
}

#[derive(Serialize, Deserialize)]
struct WirePredEntry {
    query_id: String,
    start: usize,
    end: usize,
    log_prob: f64,
}

#[derive(Serialize, Deserialize)]
struct WireFeatureFile {
    format_version: u32,
    videos: Vec<WireVideoFeatures>,
}

#[derive(Serialize, Deserialize)]
struct WireVideoFeatures {
    video_id: String,
    num_clips: usize,
    dim: usize,
    /// Row-major `N×N×D`; masked cells are never read (zero-fill them).
    features: Vec<f64>,
    queries: Vec<WireQueryFeatures>,
}

#[derive(Serialize, Deserialize)]
struct WireQueryFeatures {
    query_id: String,
    sentence: Vec<f64>,
    #[serde(default)]
    phrases: Vec<Vec<f64>>,
    importance_logits: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Shared plumbing

fn read_file(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    std::fs::write(path, bytes).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T, FormatError> {
    serde_json::from_slice(bytes).map_err(|source| FormatError::Json {
        path: path.display().to_string(),
        source,
    })
}

fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("wire structs always serialize");
    bytes.push(b'\n');
    bytes
}

fn check_version(path: &str, got: u32) -> Result<(), FormatError> {
    if got != FORMAT_VERSION {
        return Err(FormatError::Version {
            path: path.to_string(),
            expected: FORMAT_VERSION,
            got,
        });
    }
    Ok(())
}

fn check_unique<'a>(
    seen: &mut HashSet<&'a str>,
    id: &'a str,
    path: &str,
    context: &str,
) -> Result<(), FormatError> {
    if !seen.insert(id) {
        return Err(FormatError::invalid(
            path,
            context,
            format!("duplicate id {id:?}"),
        ));
    }
    Ok(())
}

fn check_finite(path: &str, context: &str, field: &str, values: &[f64]) -> Result<(), FormatError> {
    if let Some(position) = values.iter().position(|v| !v.is_finite()) {
        return Err(FormatError::invalid(
            path,
            context,
            format!("{field}[{position}] is not a finite number"),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Score files

/// Reads a score file, sniffing the binary magic to pick the decoder.
pub fn read_scores(path: &Path) -> Result<ScoreDataset, FormatError> {
    let bytes = read_file(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        decode_scores_binary(&path.display().to_string(), &bytes)
    } else {
        let wire: WireScoreFile = parse_json(path, &bytes)?;
        validate_scores(&path.display().to_string(), wire)
    }
}

pub fn write_scores_json(path: &Path, dataset: &ScoreDataset) -> Result<(), FormatError> {
    let wire = WireScoreFile {
        format_version: FORMAT_VERSION,
        videos: dataset
            .videos
            .iter()
            .map(|v| WireVideoScores {
                video_id: v.video_id.clone(),
                num_clips: v.num_clips,
                queries: v
                    .queries
                    .iter()
                    .map(|q| WireQueryScores {
                        query_id: q.query_id.clone(),
                        sentence_scores: q.sentence_scores.to_row_major(),
                        phrase_scores: if q.phrase_scores.is_empty() {
                            None
                        } else {
                            Some(q.phrase_scores.iter().map(|m| m.to_row_major()).collect())
                        },
                        importance_logits: q.importance_logits.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    write_file(path, &to_json_bytes(&wire))
}

fn validate_scores(path: &str, wire: WireScoreFile) -> Result<ScoreDataset, FormatError> {
    check_version(path, wire.format_version)?;
    let mut videos = Vec::with_capacity(wire.videos.len());
    let mut video_ids = HashSet::new();
    for video in &wire.videos {
        check_unique(&mut video_ids, &video.video_id, path, "videos")?;
        let ctx_video = format!("video {}", video.video_id);
        if video.num_clips == 0 {
            return Err(FormatError::invalid(
                path,
                &ctx_video,
                "num_clips must be at least 1",
            ));
        }
        if video.queries.is_empty() {
            return Err(FormatError::invalid(
                path,
                &ctx_video,
                "video has no queries",
            ));
        }
        let mut query_ids = HashSet::new();
        let mut queries = Vec::with_capacity(video.queries.len());
        for query in &video.queries {
            check_unique(&mut query_ids, &query.query_id, path, &ctx_video)?;
            let ctx = format!("{ctx_video}, query {}", query.query_id);
            queries.push(validate_query_scores(path, &ctx, video.num_clips, query)?);
        }
        videos.push(VideoScores {
            video_id: video.video_id.clone(),
            num_clips: video.num_clips,
            queries,
        });
    }
    Ok(ScoreDataset { videos })
}

fn validate_query_scores(
    path: &str,
    ctx: &str,
    num_clips: usize,
    query: &WireQueryScores,
) -> Result<QueryScores, FormatError> {
    let sentence_scores = ScoreMap::from_row_major(num_clips, &query.sentence_scores)
        .map_err(|e| FormatError::invalid(path, format!("{ctx}, sentence_scores"), e))?;
    let phrase_wire = query.phrase_scores.as_deref().unwrap_or(&[]);
    let mut phrase_scores = Vec::with_capacity(phrase_wire.len());
    for (i, cells) in phrase_wire.iter().enumerate() {
        phrase_scores
            .push(ScoreMap::from_row_major(num_clips, cells).map_err(|e| {
                FormatError::invalid(path, format!("{ctx}, phrase_scores[{i}]"), e)
            })?);
    }
    if let Some(logits) = &query.importance_logits {
        if logits.len() != phrase_scores.len() + 1 {
            return Err(FormatError::invalid(
                path,
                format!("{ctx}, importance_logits"),
                format!(
                    "expected {} logits (sentence first), got {}",
                    phrase_scores.len() + 1,
                    logits.len()
                ),
            ));
        }
        check_finite(path, ctx, "importance_logits", logits)?;
    } else if !phrase_scores.is_empty() {
        return Err(FormatError::invalid(
            path,
            format!("{ctx}, importance_logits"),
            "required when phrase_scores are present",
        ));
    }
    Ok(QueryScores {
        query_id: query.query_id.clone(),
        sentence_scores,
        phrase_scores,
        importance_logits: query.importance_logits.clone(),
    })
}

// --- binary encoding -------------------------------------------------------

pub fn write_scores_binary(path: &Path, dataset: &ScoreDataset) -> Result<(), FormatError> {
    let mut out = Vec::new();
    out.extend_from_slice(BINARY_MAGIC);
    push_u32(&mut out, FORMAT_VERSION);
    push_u32(&mut out, dataset.videos.len() as u32);
    for video in &dataset.videos {
        push_str(&mut out, &video.video_id);
        push_u32(&mut out, video.num_clips as u32);
        push_u32(&mut out, video.queries.len() as u32);
        for query in &video.queries {
            push_str(&mut out, &query.query_id);
            push_u32(&mut out, query.phrase_scores.len() as u32);
            match &query.importance_logits {
                Some(logits) => {
                    out.push(1);
                    for &v in logits {
                        push_f64(&mut out, v);
                    }
                }
                None => out.push(0),
            }
            push_map(&mut out, &query.sentence_scores);
            for map in &query.phrase_scores {
                push_map(&mut out, map);
            }
        }
    }
    write_file(path, &out)
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_str(out: &mut Vec<u8>, s: &str) {
    push_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn push_map(out: &mut Vec<u8>, map: &ScoreMap) {
    for cell in map.to_row_major() {
        push_f64(out, cell.unwrap_or(f64::NAN));
    }
}

struct Cursor<'a> {
    path: &'a str,
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], FormatError> {
        let end = self
            .offset
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let slice = &self.bytes[self.offset..end];
                self.offset = end;
                Ok(slice)
            }
            None => Err(FormatError::Truncated {
                path: self.path.to_string(),
            }),
        }
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self, context: &str) -> Result<String, FormatError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|e| FormatError::invalid(self.path, context, e))
    }
}

fn decode_scores_binary(path: &str, bytes: &[u8]) -> Result<ScoreDataset, FormatError> {
    if !bytes.starts_with(BINARY_MAGIC) {
        return Err(FormatError::BadMagic {
            path: path.to_string(),
        });
    }
    let mut cur = Cursor {
        path,
        bytes,
        offset: BINARY_MAGIC.len(),
    };
    check_version(path, cur.u32()?)?;
    let video_count = cur.u32()? as usize;
    let mut wire_videos = Vec::with_capacity(video_count);
    for _ in 0..video_count {
        let video_id = cur.string("video id")?;
        let num_clips = cur.u32()? as usize;
        let query_count = cur.u32()? as usize;
        let mut queries = Vec::with_capacity(query_count);
        for _ in 0..query_count {
            let query_id = cur.string("query id")?;
            let phrase_count = cur.u32()? as usize;
            let logits_flag = cur.u8()?;
            let importance_logits = match logits_flag {
                0 => None,
                1 => {
                    let mut logits = Vec::with_capacity(phrase_count + 1);
                    for _ in 0..phrase_count + 1 {
                        logits.push(cur.f64()?);
                    }
                    Some(logits)
                }
                other => {
                    return Err(FormatError::invalid(
                        path,
                        format!("video {video_id}, query {query_id}"),
                        format!("logits flag must be 0 or 1, got {other}"),
                    ))
                }
            };
            let read_grid = |cur: &mut Cursor| -> Result<Vec<Option<f64>>, FormatError> {
                let mut cells = Vec::with_capacity(num_clips * num_clips);
                for _ in 0..num_clips * num_clips {
                    let v = cur.f64()?;
                    cells.push(if v.is_nan() { None } else { Some(v) });
                }
                Ok(cells)
            };
            let sentence_scores = read_grid(&mut cur)?;
            let mut phrase_scores = Vec::with_capacity(phrase_count);
            for _ in 0..phrase_count {
                phrase_scores.push(read_grid(&mut cur)?);
            }
            queries.push(WireQueryScores {
                query_id,
                sentence_scores,
                phrase_scores: if phrase_scores.is_empty() {
                    None
                } else {
                    Some(phrase_scores)
                },
                importance_logits,
            });
        }
        wire_videos.push(WireVideoScores {
            video_id,
            num_clips,
            queries,
        });
    }
    if cur.offset != bytes.len() {
        return Err(FormatError::invalid(
            path,
            "trailer",
            format!("{} unexpected trailing bytes", bytes.len() - cur.offset),
        ));
    }
    validate_scores(
        path,
        WireScoreFile {
            format_version: FORMAT_VERSION,
            videos: wire_videos,
        },
    )
}

// ---------------------------------------------------------------------------
// Ground truth

pub fn read_ground_truth(path: &Path) -> Result<GroundTruthDataset, FormatError> {
    let bytes = read_file(path)?;
    let wire: WireGtFile = parse_json(path, &bytes)?;
    let path = path.display().to_string();
    check_version(&path, wire.format_version)?;
    let mut videos = Vec::with_capacity(wire.videos.len());
    let mut video_ids = HashSet::new();
    for video in &wire.videos {
        check_unique(&mut video_ids, &video.video_id, &path, "videos")?;
        let ctx_video = format!("video {}", video.video_id);
        if video.num_clips == 0 {
            return Err(FormatError::invalid(
                &path,
                &ctx_video,
                "num_clips must be at least 1",
            ));
        }
        if video.queries.is_empty() {
            return Err(FormatError::invalid(
                &path,
                &ctx_video,
                "video has no queries",
            ));
        }
        let mut query_ids = HashSet::new();
        let mut queries = Vec::with_capacity(video.queries.len());
        for query in &video.queries {
            check_unique(&mut query_ids, &query.query_id, &path, &ctx_video)?;
            let ctx = format!("{ctx_video}, query {}", query.query_id);
            let interval = ClipInterval::new(query.start, query.end)
                .map_err(|e| FormatError::invalid(&path, &ctx, e))?;
            if !interval.fits(video.num_clips) {
                return Err(FormatError::invalid(
                    &path,
                    &ctx,
                    format!(
                        "interval [{}, {}] does not fit {} clips",
                        query.start, query.end, video.num_clips
                    ),
                ));
            }
            queries.push(GroundTruthQuery {
                query_id: query.query_id.clone(),
                interval,
            });
        }
        videos.push(VideoGroundTruth {
            video_id: video.video_id.clone(),
            num_clips: video.num_clips,
            queries,
        });
    }
    Ok(GroundTruthDataset { videos })
}

pub fn write_ground_truth(path: &Path, dataset: &GroundTruthDataset) -> Result<(), FormatError> {
    let wire = WireGtFile {
        format_version: FORMAT_VERSION,
        videos: dataset
            .videos
            .iter()
            .map(|v| WireVideoGt {
                video_id: v.video_id.clone(),
                num_clips: v.num_clips,
                queries: v
                    .queries
                    .iter()
                    .map(|q| WireGtQuery {
                        query_id: q.query_id.clone(),
                        start: q.interval.start(),
                        end: q.interval.end(),
                    })
                    .collect(),
            })
            .collect(),
    };
    write_file(path, &to_json_bytes(&wire))
}

// ---------------------------------------------------------------------------
// Predictions

pub fn read_predictions(path: &Path) -> Result<PredictionDataset, FormatError> {
    let bytes = read_file(path)?;
    let wire: WirePredFile = parse_json(path, &bytes)?;
    let path = path.display().to_string();
    check_version(&path, wire.format_version)?;
    let mut videos = Vec::with_capacity(wire.videos.len());
    let mut video_ids = HashSet::new();
    for video in &wire.videos {
        check_unique(&mut video_ids, &video.video_id, &path, "videos")?;
        let ctx_video = format!("video {}", video.video_id);
        if !video.objective.is_finite() {
            return Err(FormatError::invalid(
                &path,
                &ctx_video,
                "objective must be finite",
            ));
        }
        let mut query_ids = HashSet::new();
        let mut entries = Vec::with_capacity(video.entries.len());
        for entry in &video.entries {
            check_unique(&mut query_ids, &entry.query_id, &path, &ctx_video)?;
            let ctx = format!("{ctx_video}, query {}", entry.query_id);
            let interval = ClipInterval::new(entry.start, entry.end)
                .map_err(|e| FormatError::invalid(&path, &ctx, e))?;
            if !entry.log_prob.is_finite() {
                return Err(FormatError::invalid(&path, &ctx, "log_prob must be finite"));
            }
            entries.push(PredictionEntry {
                query_id: entry.query_id.clone(),
                interval,
                log_prob: entry.log_prob,
            });
        }
        videos.push(VideoPrediction {
            video_id: video.video_id.clone(),
            method: video.method,
            fallback_used: video.fallback_used,
            objective: video.objective,
            entries,
        });
    }
    Ok(PredictionDataset { videos })
}

pub fn write_predictions(path: &Path, dataset: &PredictionDataset) -> Result<(), FormatError> {
    for video in &dataset.videos {
        let finite =
            video.objective.is_finite() && video.entries.iter().all(|e| e.log_prob.is_finite());
        if !finite {
            return Err(FormatError::NonFiniteOutput {
                path: path.display().to_string(),
                video_id: video.video_id.clone(),
            });
        }
    }
    let wire = WirePredFile {
        format_version: FORMAT_VERSION,
        videos: dataset
            .videos
            .iter()
            .map(|v| WireVideoPred {
                video_id: v.video_id.clone(),
                method: v.method,
                fallback_used: v.fallback_used,
                objective: v.objective,
                entries: v
                    .entries
                    .iter()
                    .map(|e| WirePredEntry {
                        query_id: e.query_id.clone(),
                        start: e.interval.start(),
                        end: e.interval.end(),
                        log_prob: e.log_prob,
                    })
                    .collect(),
            })
            .collect(),
    };
    write_file(path, &to_json_bytes(&wire))
}

// ---------------------------------------------------------------------------
// Raw features (fuse input)

pub fn read_features(path: &Path) -> Result<FeatureDataset, FormatError> {
    let bytes = read_file(path)?;
    let wire: WireFeatureFile = parse_json(path, &bytes)?;
    let path = path.display().to_string();
    check_version(&path, wire.format_version)?;
    let mut videos = Vec::with_capacity(wire.videos.len());
    let mut video_ids: HashSet<String> = HashSet::new();
    for video in wire.videos {
        if !video_ids.insert(video.video_id.clone()) {
            return Err(FormatError::invalid(
                &path,
                "videos",
                format!("duplicate id {:?}", video.video_id),
            ));
        }
        let video_id = video.video_id.clone();
        let ctx_video = format!("video {video_id}");
        if video.queries.is_empty() {
            return Err(FormatError::invalid(
                &path,
                &ctx_video,
                "video has no queries",
            ));
        }
        let features = TemporalFeatureMap::new(video.num_clips, video.dim, video.features)
            .map_err(|e| FormatError::invalid(&path, format!("{ctx_video}, features"), e))?;
        let mut query_ids = HashSet::new();
        let mut queries = Vec::with_capacity(video.queries.len());
        for query in video.queries {
            if !query_ids.insert(query.query_id.clone()) {
                return Err(FormatError::invalid(
                    &path,
                    &ctx_video,
                    format!("duplicate id {:?}", query.query_id),
                ));
            }
            let ctx = format!("{ctx_video}, query {}", query.query_id);
            let features =
                QueryFeatures::new(query.sentence, query.phrases, query.importance_logits)
                    .map_err(|e| FormatError::invalid(&path, &ctx, e))?;
            queries.push(NamedQueryFeatures {
                query_id: query.query_id,
                features,
            });
        }
        videos.push(VideoFeatures {
            video_id,
            features,
            queries,
        });
    }
    Ok(FeatureDataset { videos })
}

pub fn write_features(path: &Path, dataset: &FeatureDataset) -> Result<(), FormatError> {
    let wire = WireFeatureFile {
        format_version: FORMAT_VERSION,
        videos: dataset
            .videos
            .iter()
            .map(|v| {
                let n = v.features.num_clips();
                let dim = v.features.dim();
                let mut flat = vec![0.0; n * n * dim];
                for start in 0..n {
                    for end in start..n {
                        let base = (start * n + end) * dim;
                        flat[base..base + dim].copy_from_slice(v.features.cell(start, end));
                    }
                }
                WireVideoFeatures {
                    video_id: v.video_id.clone(),
                    num_clips: n,
                    dim,
                    features: flat,
                    queries: v
                        .queries
                        .iter()
                        .map(|q| WireQueryFeatures {
                            query_id: q.query_id.clone(),
                            sentence: q.features.sentence().to_vec(),
                            phrases: q.features.phrases().to_vec(),
                            importance_logits: q.features.importance_logits().to_vec(),
                        })
                        .collect(),
                }
            })
            .collect(),
    };
    write_file(path, &to_json_bytes(&wire))
}
