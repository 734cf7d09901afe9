//! Quality control for crowdsourced direct assessment.
//!
//! Hidden control items are mixed into every task: a verbatim reference
//! (`QcGood`), a degraded copy of the same reference (`QcBad`) and exact
//! repeats of MT items. Reliability compares an annotator's adequacy on the
//! good/bad siblings; consistency compares repeats against their originals.

use std::collections::HashMap;

use rand::seq::{index, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::{ItemKind, Judgment, TaskItem};
use crate::ids::{ItemId, UserId};

/// Fraction of reference tokens replaced when building a bad reference.
pub const DEGRADE_FRACTION: f64 = 0.3;

const PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum QcError {
    #[error("quality-control items requested but no item has a usable reference")]
    NoEligibleItems,
    #[error("reference must have at least 2 tokens")]
    TooShort,
    #[error("substitution vocabulary is empty")]
    EmptyVocab,
    #[error("vocabulary has no substitute for token {0:?}")]
    NoSubstitute(String),
    #[error("ratio {0} outside [0, 1)")]
    InvalidRatio(String),
    #[error("could not place control items without adjacent siblings")]
    Unplaceable,
    #[error("cannot normalize an empty score list")]
    EmptyInput,
}

impl QcError {
    pub fn code(&self) -> &'static str {
        match self {
            QcError::NoEligibleItems => "NoEligibleItems",
            QcError::TooShort => "TooShort",
            QcError::EmptyVocab => "EmptyVocab",
            QcError::NoSubstitute(_) => "NoSubstitute",
            QcError::InvalidRatio(_) => "InvalidRatio",
            QcError::Unplaceable => "Unplaceable",
            QcError::EmptyInput => "EmptyInput",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcThresholds {
    pub min_qc_pairs: usize,
    /// Minimum mean adequacy gap, good minus bad.
    pub delta: f64,
    pub min_frac_ordered: f64,
    /// Consistency is flagged when the mean absolute difference exceeds this.
    pub max_repeat_mad: f64,
}

impl Default for QcThresholds {
    fn default() -> Self {
        Self { min_qc_pairs: 2, delta: 10.0, min_frac_ordered: 0.7, max_repeat_mad: 20.0 }
    }
}

/// `ceil(ratio * n)` tolerant of products like `0.1 * 30 = 3.0000000000000004`.
pub fn ratio_count(ratio: f64, n: usize) -> usize {
    let x = ratio * n as f64;
    (x - 1e-9).ceil().max(0.0) as usize
}

pub fn check_ratio(ratio: f64) -> Result<(), QcError> {
    if (0.0..1.0).contains(&ratio) {
        Ok(())
    } else {
        Err(QcError::InvalidRatio(ratio.to_string()))
    }
}

fn split_ws(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

fn usable_reference(item: &TaskItem) -> Option<&str> {
    item.reference_text
        .as_deref()
        .filter(|r| r.split_whitespace().count() >= 2)
}

/// Replaces `ceil(0.3 * len)` distinct positions with seeded draws from
/// `corpus_vocab`, never drawing the token being replaced. Length is kept.
pub fn degrade_reference(
    reference_tokens: &[String],
    corpus_vocab: &[String],
    seed: u64,
) -> Result<Vec<String>, QcError> {
    if reference_tokens.len() < 2 {
        return Err(QcError::TooShort);
    }
    if corpus_vocab.is_empty() {
        return Err(QcError::EmptyVocab);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = ratio_count(DEGRADE_FRACTION, reference_tokens.len());
    let mut positions = index::sample(&mut rng, reference_tokens.len(), k).into_vec();
    positions.sort_unstable();
    let mut out = reference_tokens.to_vec();
    for pos in positions {
        let original = &reference_tokens[pos];
        let choices: Vec<&String> = corpus_vocab.iter().filter(|t| *t != original).collect();
        let pick = choices
            .choose(&mut rng)
            .ok_or_else(|| QcError::NoSubstitute(original.clone()))?;
        out[pos] = (*pick).clone();
    }
    Ok(out)
}

fn corpus_vocab(items: &[TaskItem]) -> Vec<String> {
    let mut vocab: Vec<String> = items
        .iter()
        .flat_map(|i| {
            i.reference_text
                .iter()
                .flat_map(|r| split_ws(r))
                .chain(split_ws(&i.shown_text))
        })
        .collect();
    vocab.sort();
    vocab.dedup();
    vocab
}

fn placement_ok(items: &[TaskItem]) -> bool {
    let pos: HashMap<&ItemId, usize> = items.iter().enumerate().map(|(i, it)| (&it.item_id, i)).collect();
    items.iter().enumerate().all(|(i, it)| match it.kind {
        ItemKind::QcBad => it
            .sibling_of
            .as_ref()
            .and_then(|g| pos.get(g))
            .is_some_and(|&g| g.abs_diff(i) > 1),
        ItemKind::Repeat => it
            .repeat_of
            .as_ref()
            .and_then(|o| pos.get(o))
            .is_some_and(|&o| i > o + 1),
        _ => true,
    })
}

/// Interleaves control items into `mt_items`.
///
/// Adds `ceil(qc_ratio * n)` good/bad sibling pairs built from items whose
/// reference has at least two tokens, and `ceil(repeat_ratio * n)` repeats.
/// Siblings are never adjacent and a repeat always comes after (and not
/// directly after) its original. Output is a pure function of the inputs.
pub fn generate_qc_items(
    mt_items: &[TaskItem],
    qc_ratio: f64,
    repeat_ratio: f64,
    seed: u64,
) -> Result<Vec<TaskItem>, QcError> {
    check_ratio(qc_ratio)?;
    check_ratio(repeat_ratio)?;
    let n = mt_items.len();
    let n_pairs = ratio_count(qc_ratio, n);
    let n_repeats = ratio_count(repeat_ratio, n);
    if n_pairs == 0 && n_repeats == 0 {
        return Ok(mt_items.to_vec());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extras = Vec::with_capacity(2 * n_pairs + n_repeats);

    if n_pairs > 0 {
        let mut eligible: Vec<&TaskItem> = mt_items.iter().filter(|i| usable_reference(i).is_some()).collect();
        if eligible.is_empty() {
            return Err(QcError::NoEligibleItems);
        }
        eligible.shuffle(&mut rng);
        let vocab = corpus_vocab(mt_items);
        for (j, src) in eligible.iter().cycle().take(n_pairs).enumerate() {
            let reference = usable_reference(src).expect("filtered above");
            let good = TaskItem {
                item_id: ItemId(format!("{}~qc{}g", src.item_id, j)),
                kind: ItemKind::QcGood,
                source_text: src.source_text.clone(),
                shown_text: reference.to_owned(),
                reference_text: Some(reference.to_owned()),
                repeat_of: None,
                sibling_of: None,
            };
            let degraded = degrade_reference(&split_ws(reference), &vocab, rng.next_u64())?;
            let bad = TaskItem {
                item_id: ItemId(format!("{}~qc{}b", src.item_id, j)),
                kind: ItemKind::QcBad,
                source_text: src.source_text.clone(),
                shown_text: degraded.join(" "),
                reference_text: Some(reference.to_owned()),
                repeat_of: None,
                sibling_of: Some(good.item_id.clone()),
            };
            extras.push(good);
            extras.push(bad);
        }
    }

    if n_repeats > 0 {
        let mut originals: Vec<&TaskItem> = mt_items.iter().collect();
        originals.shuffle(&mut rng);
        for (j, src) in originals.iter().cycle().take(n_repeats).enumerate() {
            extras.push(TaskItem {
                item_id: ItemId(format!("{}~rep{}", src.item_id, j)),
                kind: ItemKind::Repeat,
                source_text: src.source_text.clone(),
                shown_text: src.shown_text.clone(),
                reference_text: src.reference_text.clone(),
                repeat_of: Some(src.item_id.clone()),
                sibling_of: None,
            });
        }
    }

    for _ in 0..PLACEMENT_ATTEMPTS {
        let mut order = mt_items.to_vec();
        for extra in &extras {
            let pos = rng.gen_range(0..=order.len());
            order.insert(pos, extra.clone());
        }
        if placement_ok(&order) {
            return Ok(order);
        }
    }
    Err(QcError::Unplaceable)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub annotator: String,
    pub n_pairs: usize,
    pub mean_diff: f64,
    pub frac_ordered: f64,
    pub verdict: Verdict,
}

impl ReliabilityReport {
    /// `pairs` holds `(good_adequacy, bad_adequacy)` per judged sibling pair.
    pub fn from_pairs(annotator: impl Into<String>, pairs: &[(i64, i64)], t: &QcThresholds) -> Self {
        let n_pairs = pairs.len();
        let (mean_diff, frac_ordered) = if n_pairs == 0 {
            (0.0, 0.0)
        } else {
            let diff: i64 = pairs.iter().map(|(g, b)| g - b).sum();
            let ordered = pairs.iter().filter(|(g, b)| g > b).count();
            (diff as f64 / n_pairs as f64, ordered as f64 / n_pairs as f64)
        };
        let verdict = if n_pairs < t.min_qc_pairs {
            Verdict::Insufficient
        } else if mean_diff >= t.delta && frac_ordered >= t.min_frac_ordered {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self { annotator: annotator.into(), n_pairs, mean_diff, frac_ordered, verdict }
    }
}

fn adequacy_by_item<'a>(annotator: &UserId, judgments: &'a [Judgment]) -> HashMap<&'a ItemId, i64> {
    judgments
        .iter()
        .filter(|j| &j.annotator == annotator)
        .map(|j| (&j.item_id, j.adequacy))
        .collect()
}

pub fn reliability_report(
    annotator: &UserId,
    items: &[TaskItem],
    judgments: &[Judgment],
    thresholds: &QcThresholds,
) -> ReliabilityReport {
    let scores = adequacy_by_item(annotator, judgments);
    let pairs: Vec<(i64, i64)> = items
        .iter()
        .filter(|i| i.kind == ItemKind::QcBad)
        .filter_map(|bad| {
            let good = scores.get(bad.sibling_of.as_ref()?)?;
            Some((*good, *scores.get(&bad.item_id)?))
        })
        .collect();
    ReliabilityReport::from_pairs(annotator.as_str(), &pairs, thresholds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub annotator: String,
    pub n_repeats: usize,
    pub mad: f64,
    pub flagged: bool,
}

impl ConsistencyReport {
    /// `pairs` holds `(repeat_adequacy, original_adequacy)`.
    pub fn from_pairs(annotator: impl Into<String>, pairs: &[(i64, i64)], t: &QcThresholds) -> Self {
        let n_repeats = pairs.len();
        let mad = if n_repeats == 0 {
            0.0
        } else {
            pairs.iter().map(|(r, o)| (r - o).abs()).sum::<i64>() as f64 / n_repeats as f64
        };
        Self {
            annotator: annotator.into(),
            n_repeats,
            mad,
            flagged: n_repeats >= 1 && mad > t.max_repeat_mad,
        }
    }
}

pub fn consistency_report(
    annotator: &UserId,
    items: &[TaskItem],
    judgments: &[Judgment],
    thresholds: &QcThresholds,
) -> ConsistencyReport {
    let scores = adequacy_by_item(annotator, judgments);
    let pairs: Vec<(i64, i64)> = items
        .iter()
        .filter(|i| i.kind == ItemKind::Repeat)
        .filter_map(|rep| {
            let original = scores.get(rep.repeat_of.as_ref()?)?;
            Some((*scores.get(&rep.item_id)?, *original))
        })
        .collect();
    ConsistencyReport::from_pairs(annotator.as_str(), &pairs, thresholds)
}

/// Standardizes with the population standard deviation; a zero spread maps
/// every score to 0.
pub fn znormalize(scores: &[f64]) -> Result<Vec<f64>, QcError> {
    if scores.is_empty() {
        return Err(QcError::EmptyInput);
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Ok(vec![0.0; scores.len()]);
    }
    Ok(scores.iter().map(|x| (x - mean) / sd).collect())
}

/// One record of the export's QC audit section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum QcAuditEntry {
    Reliability(ReliabilityReport),
    Consistency(ConsistencyReport),
}
