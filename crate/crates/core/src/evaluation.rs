//! Direct-assessment tasks: upload, blinded sequencing with hidden control
//! items, 1-100 adequacy/fluency judgments, light postediting behind an
//! AI-text gate, per-annotator results and the open dataset export.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::domain::Role;
use crate::error::{PlatformError, Result};
use crate::gamification::{award_badges, AwardContext, Badge};
use crate::ids::{ItemId, JudgmentId, TaskId, UserId};
use crate::qc::{self, generate_qc_items, QcAuditEntry, QcError};
use crate::stats::{EventKind, UsageEvent};
use crate::time::Timestamp;
use crate::Platform;

pub const MIN_SCORE: i64 = 1;
pub const MAX_SCORE: i64 = 100;
pub const EXPORT_LICENSE: &str = "CC0-1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ItemKind {
    #[serde(rename = "MT")]
    Mt,
    #[serde(rename = "QC_GOOD")]
    QcGood,
    #[serde(rename = "QC_BAD")]
    QcBad,
    #[serde(rename = "REPEAT")]
    Repeat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskItem {
    pub item_id: ItemId,
    pub kind: ItemKind,
    pub source_text: String,
    /// MT output, or the good/bad reference for control items.
    pub shown_text: String,
    pub reference_text: Option<String>,
    pub repeat_of: Option<ItemId>,
    /// For `QcBad`: the `QcGood` built from the same reference.
    pub sibling_of: Option<ItemId>,
}

impl TaskItem {
    pub fn mt(item_id: ItemId, source: String, mt_output: String, reference: Option<String>) -> Self {
        Self {
            item_id,
            kind: ItemKind::Mt,
            source_text: source,
            shown_text: mt_output,
            reference_text: reference,
            repeat_of: None,
            sibling_of: None,
        }
    }

    pub fn view(&self) -> ItemView {
        ItemView {
            item_id: self.item_id.clone(),
            source_text: self.source_text.clone(),
            shown_text: self.shown_text.clone(),
        }
    }
}

/// The only shape of an item an annotator ever sees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemView {
    pub item_id: ItemId,
    pub source_text: String,
    pub shown_text: String,
}

impl ItemView {
    pub const FIELDS: [&'static str; 3] = ["item_id", "source_text", "shown_text"];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum NextItem {
    Item { item: ItemView },
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskStatus {
    Open,
    InProgress,
    Completed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QcMode {
    /// Control items were inserted.
    Full,
    /// No pair had a usable reference; the task carries no control items.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationTask {
    pub task_id: TaskId,
    pub researcher: UserId,
    pub source_language: String,
    pub target_language: String,
    pub items: Vec<TaskItem>,
    pub status: TaskStatus,
    pub terms: String,
    pub created_at: Timestamp,
    pub qc_seed: u64,
    pub qc: QcMode,
    /// Annotators in order of their first judgment.
    pub participants: Vec<UserId>,
    pub completed_at: Option<Timestamp>,
}

impl EvaluationTask {
    pub fn mt_items(&self) -> impl Iterator<Item = &TaskItem> {
        self.items.iter().filter(|i| i.kind == ItemKind::Mt)
    }

    pub fn item(&self, id: &ItemId) -> Option<&TaskItem> {
        self.items.iter().find(|i| &i.item_id == id)
    }
}

/// Public listing entry; carries no item contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub task_id: TaskId,
    pub researcher: String,
    pub source_language: String,
    pub target_language: String,
    pub item_count: usize,
    pub status: TaskStatus,
    pub terms: String,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub judgment_id: JudgmentId,
    pub task_id: TaskId,
    pub item_id: ItemId,
    pub annotator: UserId,
    pub adequacy: i64,
    pub fluency: i64,
    pub postedit: Option<String>,
    pub submitted_at: Timestamp,
}

impl Judgment {
    #[cfg(test)]
    pub(crate) fn test_fixture(n: usize, item_id: ItemId, annotator: UserId, adequacy: i64) -> Self {
        Self {
            judgment_id: JudgmentId(format!("j{n}-{annotator}")),
            task_id: TaskId::from("t"),
            item_id,
            annotator,
            adequacy,
            fluency: adequacy,
            postedit: None,
            submitted_at: Timestamp::from_unix(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UploadPair {
    pub source: String,
    pub mt_output: String,
    #[serde(default)]
    pub reference: Option<String>,
}

impl UploadPair {
    pub fn new(source: &str, mt_output: &str, reference: Option<&str>) -> Self {
        Self {
            source: source.to_owned(),
            mt_output: mt_output.to_owned(),
            reference: reference.map(str::to_owned),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewTask {
    pub source_language: String,
    pub target_language: String,
    pub pairs: Vec<UploadPair>,
    #[serde(default)]
    pub terms: String,
    /// Seed for control-item placement; minted when absent.
    #[serde(default)]
    pub qc_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub judged: usize,
    pub total: usize,
    pub fraction: f64,
}

impl Progress {
    pub fn new(judged: usize, total: usize) -> Self {
        let fraction = if total == 0 { 0.0 } else { judged as f64 / total as f64 };
        Self { judged, total, fraction }
    }

    pub fn is_complete(&self) -> bool {
        self.total > 0 && self.judged == self.total
    }
}

// ---------------------------------------------------------------------------
// AI-text detection

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorVerdict {
    pub ai_generated: bool,
    #[serde(default)]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct DetectorUnavailable(pub String);

/// Classifies postedit text as machine- or human-written.
pub trait AiTextDetector: Send + Sync {
    fn classify(&self, text: &str) -> std::result::Result<DetectorVerdict, DetectorUnavailable>;
}

/// Accepts everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct DetectorOff;

impl AiTextDetector for DetectorOff {
    fn classify(&self, _text: &str) -> std::result::Result<DetectorVerdict, DetectorUnavailable> {
        Ok(DetectorVerdict { ai_generated: false, detail: None })
    }
}

/// Table-driven detector for tests and offline deployments: texts in the
/// table get the stored verdict, everything else is human-written.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockDetector {
    pub verdicts: HashMap<String, bool>,
}

impl MockDetector {
    pub fn flagging<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { verdicts: texts.into_iter().map(|t| (t.into(), true)).collect() }
    }
}

impl AiTextDetector for MockDetector {
    fn classify(&self, text: &str) -> std::result::Result<DetectorVerdict, DetectorUnavailable> {
        let ai_generated = self.verdicts.get(text.trim()).copied().unwrap_or(false);
        Ok(DetectorVerdict {
            ai_generated,
            detail: ai_generated.then(|| "mock table".to_owned()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    AiGenerated,
    NoOp,
    Empty,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::AiGenerated => "ai-generated",
            RejectReason::NoOp => "no-op",
            RejectReason::Empty => "empty",
        }
    }
}

/// Proof that a postedit for `item_id` passed [`validate_postedit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedPostedit {
    item_id: ItemId,
    text: String,
}

impl ValidatedPostedit {
    pub fn text(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PosteditDecision {
    Accepted(ValidatedPostedit),
    Rejected(RejectReason),
}

/// Rejects empty and no-op edits before asking the detector, so a detector
/// outage never blocks those verdicts.
pub fn validate_postedit(
    postedit: &str,
    item: &TaskItem,
    detector: &dyn AiTextDetector,
) -> std::result::Result<PosteditDecision, DetectorUnavailable> {
    let text = postedit.trim();
    if text.is_empty() {
        return Ok(PosteditDecision::Rejected(RejectReason::Empty));
    }
    if text == item.shown_text.trim() {
        return Ok(PosteditDecision::Rejected(RejectReason::NoOp));
    }
    let verdict = detector.classify(text)?;
    if verdict.ai_generated {
        return Ok(PosteditDecision::Rejected(RejectReason::AiGenerated));
    }
    Ok(PosteditDecision::Accepted(ValidatedPostedit {
        item_id: item.item_id.clone(),
        text: text.to_owned(),
    }))
}

// ---------------------------------------------------------------------------
// Results and export

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationDelta {
    pub language: String,
    pub display_name: String,
    pub evaluators: usize,
    pub datasets_before: usize,
    pub datasets_after: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsSummary {
    pub task_id: TaskId,
    pub judged: usize,
    pub postedits: usize,
    pub mean_adequacy: f64,
    pub mean_fluency: f64,
    pub new_badges: Vec<Badge>,
    pub representation: RepresentationDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetExport {
    pub task_id: TaskId,
    pub rows: usize,
    /// JSON lines: one record per MT item, then the QC audit record.
    pub jsonl: String,
}

#[derive(Serialize)]
struct ExportJudgment<'a> {
    annotator_pseudonym: String,
    adequacy: i64,
    fluency: i64,
    postedit: Option<&'a str>,
}

#[derive(Serialize)]
struct ExportRow<'a> {
    task_id: &'a str,
    source_lang: &'a str,
    target_lang: &'a str,
    source: &'a str,
    mt_output: &'a str,
    reference: Option<&'a str>,
    judgments: Vec<ExportJudgment<'a>>,
    adequacy_mean: f64,
    fluency_mean: f64,
    adequacy_z_mean: f64,
    fluency_z_mean: f64,
    license: &'static str,
}

#[derive(Serialize)]
struct QcAuditRecord {
    qc_audit: Vec<QcAuditEntry>,
}

pub fn round4(x: f64) -> f64 {
    let r = (x * 10_000.0).round() / 10_000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn pseudonym(index: usize) -> String {
    format!("annotator-{}", index + 1)
}

impl Platform {
    pub fn task(&self, id: &TaskId) -> Result<&EvaluationTask> {
        self.tasks.get(id).ok_or(PlatformError::UnknownTask)
    }

    pub fn judgments(&self, id: &TaskId) -> &[Judgment] {
        self.judgments.get(id).map(Vec::as_slice).unwrap_or_default()
    }

    pub(crate) fn task_summary(&self, t: &EvaluationTask) -> TaskSummary {
        TaskSummary {
            task_id: t.task_id.clone(),
            researcher: self.users.get(&t.researcher).map(|u| u.username.clone()).unwrap_or_default(),
            source_language: t.source_language.clone(),
            target_language: t.target_language.clone(),
            item_count: t.items.len(),
            status: t.status,
            terms: t.terms.clone(),
            created_at: t.created_at,
        }
    }

    pub fn create_task(&mut self, researcher: &UserId, new: NewTask, now: Timestamp) -> Result<EvaluationTask> {
        if self.user(researcher)?.role != Role::Researcher {
            return Err(PlatformError::NotResearcher);
        }
        let source = self.registry.validate_language_tag(&new.source_language)?;
        let target = self.registry.validate_language_tag(&new.target_language)?;
        if new.pairs.is_empty() {
            return Err(PlatformError::EmptyUpload);
        }
        let task_id = TaskId(self.mint_id("t"));
        let qc_seed = new.qc_seed.unwrap_or_else(|| self.next_id.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mt: Vec<TaskItem> = new
            .pairs
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let reference = p.reference.filter(|r| !r.trim().is_empty());
                TaskItem::mt(ItemId(format!("mt{i}")), p.source, p.mt_output, reference)
            })
            .collect();
        let settings = self.settings;
        let (items, qc) = match generate_qc_items(&mt, settings.qc_ratio, settings.repeat_ratio, qc_seed) {
            Ok(items) => {
                let mode = if items.iter().any(|i| i.kind == ItemKind::QcGood) {
                    QcMode::Full
                } else {
                    QcMode::None
                };
                (items, mode)
            }
            Err(QcError::NoEligibleItems) => {
                // repeats still apply; only good/bad pairs need references
                let items = generate_qc_items(&mt, 0.0, settings.repeat_ratio, qc_seed)?;
                (items, QcMode::None)
            }
            Err(e) => return Err(e.into()),
        };
        let items = renumber(&task_id, items);
        let task = EvaluationTask {
            task_id: task_id.clone(),
            researcher: researcher.clone(),
            source_language: source.code,
            target_language: target.code,
            items,
            status: TaskStatus::Open,
            terms: new.terms,
            created_at: now,
            qc_seed,
            qc,
            participants: Vec::new(),
            completed_at: None,
        };
        self.tasks.insert(task_id, task.clone());
        self.push_event(UsageEvent { user_id: researcher.clone(), kind: EventKind::TaskPosted, at: now });
        Ok(task)
    }

    fn require_participant(&self, task: &EvaluationTask, annotator: &UserId) -> Result<()> {
        if self.user(annotator)?.role != Role::Annotator || !self.accepted_between(annotator, &task.researcher) {
            return Err(PlatformError::NotConnected);
        }
        Ok(())
    }

    fn judged_items(&self, task_id: &TaskId, annotator: &UserId) -> HashSet<&ItemId> {
        self.judgments(task_id)
            .iter()
            .filter(|j| &j.annotator == annotator)
            .map(|j| &j.item_id)
            .collect()
    }

    pub fn progress(&self, task_id: &TaskId, annotator: &UserId) -> Result<Progress> {
        let task = self.task(task_id)?;
        self.require_participant(task, annotator)?;
        Ok(Progress::new(self.judged_items(task_id, annotator).len(), task.items.len()))
    }

    /// The first item, in task order, this annotator has not judged yet.
    pub fn next_item(&self, task_id: &TaskId, annotator: &UserId) -> Result<NextItem> {
        let task = self.task(task_id)?;
        self.require_participant(task, annotator)?;
        if task.status == TaskStatus::Completed {
            return Err(PlatformError::TaskCompleted);
        }
        let judged = self.judged_items(task_id, annotator);
        Ok(match task.items.iter().find(|i| !judged.contains(&i.item_id)) {
            Some(item) => NextItem::Item { item: item.view() },
            None => NextItem::Done,
        })
    }

    /// Runs [`validate_postedit`] against the stored item.
    pub fn check_postedit(
        &self,
        task_id: &TaskId,
        item_id: &ItemId,
        postedit: &str,
        detector: &dyn AiTextDetector,
    ) -> Result<PosteditDecision> {
        let item = self.task(task_id)?.item(item_id).ok_or(PlatformError::UnknownItem)?;
        validate_postedit(postedit, item, detector).map_err(|e| PlatformError::DetectorUnavailable(e.0))
    }

    /// Validates any postedit with `detector`, then records the judgment.
    #[allow(clippy::too_many_arguments)]
    pub fn submit_judgment(
        &mut self,
        task_id: &TaskId,
        item_id: &ItemId,
        annotator: &UserId,
        adequacy: i64,
        fluency: i64,
        postedit: Option<&str>,
        detector: &dyn AiTextDetector,
        now: Timestamp,
    ) -> Result<Progress> {
        let validated = match postedit.filter(|p| !p.trim().is_empty()) {
            None => None,
            Some(text) => match self.check_postedit(task_id, item_id, text, detector)? {
                PosteditDecision::Accepted(v) => Some(v),
                PosteditDecision::Rejected(reason) => {
                    return Err(PlatformError::PosteditRejected(reason.as_str().to_owned()))
                }
            },
        };
        self.record_judgment(task_id, item_id, annotator, adequacy, fluency, validated, now)
    }

    /// Records a judgment whose postedit (if any) was validated beforehand.
    #[allow(clippy::too_many_arguments)]
    pub fn record_judgment(
        &mut self,
        task_id: &TaskId,
        item_id: &ItemId,
        annotator: &UserId,
        adequacy: i64,
        fluency: i64,
        postedit: Option<ValidatedPostedit>,
        now: Timestamp,
    ) -> Result<Progress> {
        let task = self.task(task_id)?;
        if task.status == TaskStatus::Completed {
            return Err(PlatformError::TaskCompleted);
        }
        self.require_participant(task, annotator)?;
        if task.item(item_id).is_none() {
            return Err(PlatformError::UnknownItem);
        }
        for score in [adequacy, fluency] {
            if !(MIN_SCORE..=MAX_SCORE).contains(&score) {
                return Err(PlatformError::ScoreOutOfRange(score));
            }
        }
        if let Some(p) = &postedit {
            if &p.item_id != item_id {
                return Err(PlatformError::PosteditRejected("postedit validated for another item".into()));
            }
        }
        if self.judged_items(task_id, annotator).contains(item_id) {
            return Err(PlatformError::DuplicateJudgment);
        }
        let total = task.items.len();

        let judgment = Judgment {
            judgment_id: JudgmentId(self.mint_id("j")),
            task_id: task_id.clone(),
            item_id: item_id.clone(),
            annotator: annotator.clone(),
            adequacy,
            fluency,
            postedit: postedit.map(|p| p.text),
            submitted_at: now,
        };
        self.judgments.entry(task_id.clone()).or_default().push(judgment);
        let task = self.tasks.get_mut(task_id).expect("checked above");
        if !task.participants.contains(annotator) {
            task.participants.push(annotator.clone());
        }
        if task.status == TaskStatus::Open {
            task.status = TaskStatus::InProgress;
        }
        self.push_event(UsageEvent { user_id: annotator.clone(), kind: EventKind::JudgmentSubmitted, at: now });
        Ok(Progress::new(self.judged_items(task_id, annotator).len(), total))
    }

    /// Summary for an annotator who judged every item. Badges are awarded
    /// on the first call; later calls return the same summary.
    pub fn results_summary(&mut self, task_id: &TaskId, annotator: &UserId, now: Timestamp) -> Result<ResultsSummary> {
        let key = format!("{task_id}/{annotator}");
        if let Some(done) = self.results.get(&key) {
            return Ok(done.clone());
        }
        let task = self.task(task_id)?;
        self.require_participant(task, annotator)?;
        let mine: Vec<&Judgment> = self.judgments(task_id).iter().filter(|j| &j.annotator == annotator).collect();
        if mine.len() < task.items.len() {
            return Err(PlatformError::NotFinished);
        }
        let language = task.target_language.clone();
        let task_completed = task.status == TaskStatus::Completed;
        let judged = mine.len();
        let postedits = mine.iter().filter(|j| j.postedit.is_some()).count();
        let mean_adequacy = round4(mean(mine.iter().map(|j| j.adequacy as f64)));
        let mean_fluency = round4(mean(mine.iter().map(|j| j.fluency as f64)));

        let resources = self.language_resources_excluding(&language, annotator, Some(task_id));
        let first_in_language = !self.badges.iter().any(|b| {
            &b.annotator == annotator
                && b.language == language
                && b.cause == crate::gamification::BadgeCause::TaskCompleted
        });
        let postedits_before: usize = self
            .results
            .iter()
            .filter(|(k, _)| k.ends_with(&format!("/{annotator}")))
            .map(|(_, r)| r.postedits)
            .sum();
        let ctx = AwardContext {
            task_id: task_id.clone(),
            language: language.clone(),
            resources,
            first_in_language,
            postedits_before,
            postedits_after: postedits_before + postedits,
        };
        let mut next = self.next_id;
        let new_badges = award_badges(annotator, &ctx, now, || {
            next += 1;
            crate::ids::BadgeId(format!("b-{next:06}"))
        });
        self.next_id = next;
        self.badges.extend(new_badges.iter().cloned());

        let datasets_before = self.language_resources(&language).datasets;
        let datasets_after = if task_completed { datasets_before } else { datasets_before + 1 };
        let evaluators = self.language_resources(&language).evaluators;
        let display_name = self
            .registry
            .get(&language)
            .map(|t| t.display_name.clone())
            .unwrap_or_else(|| language.clone());
        let message = format!(
            "Your {judged} judgments bring {display_name} to {datasets_after} evaluated dataset{} \
             from {evaluators} registered evaluator{}.",
            if datasets_after == 1 { "" } else { "s" },
            if evaluators == 1 { "" } else { "s" },
        );
        let summary = ResultsSummary {
            task_id: task_id.clone(),
            judged,
            postedits,
            mean_adequacy,
            mean_fluency,
            new_badges,
            representation: RepresentationDelta {
                language,
                display_name,
                evaluators,
                datasets_before,
                datasets_after,
                message,
            },
        };
        self.results.insert(key, summary.clone());
        Ok(summary)
    }

    /// Closes the task and publishes its dataset. Only the owning researcher
    /// may do this, once every participant has judged every item. Repeated
    /// calls return the stored artifact.
    pub fn complete_and_export(&mut self, task_id: &TaskId, requester: &UserId, now: Timestamp) -> Result<DatasetExport> {
        let task = self.task(task_id)?;
        if &task.researcher != requester {
            return Err(PlatformError::NotResearcher);
        }
        let rows = task.mt_items().count();
        if let Some(jsonl) = self.exports.get(task_id) {
            return Ok(DatasetExport { task_id: task_id.clone(), rows, jsonl: jsonl.clone() });
        }
        if task.participants.is_empty() {
            return Err(PlatformError::NotFinished);
        }
        for annotator in &task.participants {
            if self.judged_items(task_id, annotator).len() < task.items.len() {
                return Err(PlatformError::NotFinished);
            }
        }
        let jsonl = build_export(task, self.judgments(task_id), &self.settings.thresholds);
        let task = self.tasks.get_mut(task_id).expect("checked above");
        task.status = TaskStatus::Completed;
        task.completed_at = Some(now);
        self.exports.insert(task_id.clone(), jsonl.clone());
        Ok(DatasetExport { task_id: task_id.clone(), rows, jsonl })
    }

    /// Published export of a completed task.
    pub fn export(&self, task_id: &TaskId) -> Option<&str> {
        self.exports.get(task_id).map(String::as_str)
    }

    /// All published exports, by task.
    pub fn exports(&self) -> impl Iterator<Item = (&TaskId, &str)> {
        self.exports.iter().map(|(k, v)| (k, v.as_str()))
    }
}

/// Replaces working ids with positional ones so an id never hints at the
/// item kind.
fn renumber(task_id: &TaskId, items: Vec<TaskItem>) -> Vec<TaskItem> {
    let mapping: HashMap<ItemId, ItemId> = items
        .iter()
        .enumerate()
        .map(|(pos, it)| (it.item_id.clone(), ItemId(format!("{task_id}-{:03}", pos + 1))))
        .collect();
    items
        .into_iter()
        .map(|mut it| {
            it.item_id = mapping[&it.item_id].clone();
            it.repeat_of = it.repeat_of.map(|id| mapping[&id].clone());
            it.sibling_of = it.sibling_of.map(|id| mapping[&id].clone());
            it
        })
        .collect()
}

/// Per-annotator z-scores over that annotator's MT-item scores.
fn zscores(task: &EvaluationTask, judgments: &[Judgment], pick: fn(&Judgment) -> i64) -> HashMap<(UserId, ItemId), f64> {
    let mt_ids: HashSet<&ItemId> = task.mt_items().map(|i| &i.item_id).collect();
    let mut by_annotator: BTreeMap<&UserId, Vec<&Judgment>> = BTreeMap::new();
    for j in judgments.iter().filter(|j| mt_ids.contains(&j.item_id)) {
        by_annotator.entry(&j.annotator).or_default().push(j);
    }
    let mut out = HashMap::new();
    for (annotator, js) in by_annotator {
        let scores: Vec<f64> = js.iter().map(|j| pick(j) as f64).collect();
        let z = qc::znormalize(&scores).expect("nonempty by construction");
        for (j, z) in js.iter().zip(z) {
            out.insert((annotator.clone(), j.item_id.clone()), z);
        }
    }
    out
}

fn build_export(task: &EvaluationTask, judgments: &[Judgment], thresholds: &qc::QcThresholds) -> String {
    let alias: HashMap<&UserId, String> = task
        .participants
        .iter()
        .enumerate()
        .map(|(i, u)| (u, pseudonym(i)))
        .collect();
    let rank: HashMap<&UserId, usize> = task.participants.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let z_adequacy = zscores(task, judgments, |j| j.adequacy);
    let z_fluency = zscores(task, judgments, |j| j.fluency);

    let mut out = String::new();
    for item in task.mt_items() {
        let mut js: Vec<&Judgment> = judgments
            .iter()
            .filter(|j| j.item_id == item.item_id && alias.contains_key(&j.annotator))
            .collect();
        js.sort_by_key(|j| rank[&j.annotator]);
        let key = |j: &Judgment| (j.annotator.clone(), j.item_id.clone());
        let row = ExportRow {
            task_id: task.task_id.as_str(),
            source_lang: &task.source_language,
            target_lang: &task.target_language,
            source: &item.source_text,
            mt_output: &item.shown_text,
            reference: item.reference_text.as_deref(),
            adequacy_mean: round4(mean(js.iter().map(|j| j.adequacy as f64))),
            fluency_mean: round4(mean(js.iter().map(|j| j.fluency as f64))),
            adequacy_z_mean: round4(mean(js.iter().map(|j| z_adequacy[&key(j)]))),
            fluency_z_mean: round4(mean(js.iter().map(|j| z_fluency[&key(j)]))),
            judgments: js
                .iter()
                .map(|j| ExportJudgment {
                    annotator_pseudonym: alias[&j.annotator].clone(),
                    adequacy: j.adequacy,
                    fluency: j.fluency,
                    postedit: j.postedit.as_deref(),
                })
                .collect(),
            license: EXPORT_LICENSE,
        };
        out.push_str(&serde_json::to_string(&row).expect("export rows serialize"));
        out.push('\n');
    }

    let mut audit = Vec::new();
    for annotator in &task.participants {
        let mut r = qc::reliability_report(annotator, &task.items, judgments, thresholds);
        r.annotator = alias[annotator].clone();
        audit.push(QcAuditEntry::Reliability(r));
    }
    for annotator in &task.participants {
        let mut c = qc::consistency_report(annotator, &task.items, judgments, thresholds);
        c.annotator = alias[annotator].clone();
        audit.push(QcAuditEntry::Consistency(c));
    }
    out.push_str(&serde_json::to_string(&QcAuditRecord { qc_audit: audit }).expect("audit serializes"));
    out.push('\n');
    out
}
