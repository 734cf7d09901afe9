//! Badges valued by language scarcity, the leaderboard derived from them,
//! and progress feedback for annotators.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::domain::Role;
use crate::error::{PlatformError, Result};
use crate::ids::{BadgeId, TaskId, UserId};
use crate::time::Timestamp;
use crate::Platform;

pub const BASE_POINTS: f64 = 100.0;
pub const MILESTONE_POINTS: u32 = 25;
pub const POSTEDIT_MILESTONE: usize = 10;

/// How well a language is already covered on the platform.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageResources {
    pub datasets: usize,
    pub evaluators: usize,
}

impl LanguageResources {
    pub fn total(&self) -> usize {
        self.datasets + self.evaluators
    }
}

/// `1 / log2(2 + datasets + evaluators)`: 1 for an uncovered language,
/// strictly decreasing as coverage grows.
pub fn scarcity_weight(resources: LanguageResources) -> f64 {
    1.0 / (2.0 + resources.total() as f64).log2()
}

/// `ceil(100 * scarcity_weight)`.
pub fn badge_points(resources: LanguageResources) -> u32 {
    let raw = BASE_POINTS * scarcity_weight(resources);
    (raw - 1e-9).ceil().max(1.0) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BadgeCause {
    TaskCompleted,
    FirstTaskInLanguage,
    PosteditMilestone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Badge {
    pub badge_id: BadgeId,
    pub name: String,
    pub annotator: UserId,
    pub language: String,
    /// Frozen at award time.
    pub points: u32,
    pub awarded_at: Timestamp,
    pub cause: BadgeCause,
    pub task_id: TaskId,
}

/// Facts about a finished task needed to award badges.
#[derive(Debug, Clone, PartialEq)]
pub struct AwardContext {
    pub task_id: TaskId,
    pub language: String,
    /// Coverage of the task's target language at completion, not counting
    /// this annotator or this task.
    pub resources: LanguageResources,
    pub first_in_language: bool,
    /// Cumulative postedits by the annotator before and after this task.
    pub postedits_before: usize,
    pub postedits_after: usize,
}

pub fn award_badges(
    annotator: &UserId,
    ctx: &AwardContext,
    now: Timestamp,
    mut mint: impl FnMut() -> BadgeId,
) -> Vec<Badge> {
    let points = badge_points(ctx.resources);
    let mut badge = |name: String, points: u32, cause: BadgeCause| Badge {
        badge_id: mint(),
        name,
        annotator: annotator.clone(),
        language: ctx.language.clone(),
        points,
        awarded_at: now,
        cause,
        task_id: ctx.task_id.clone(),
    };
    let mut out = vec![badge(format!("Task completed ({})", ctx.language), points, BadgeCause::TaskCompleted)];
    if ctx.first_in_language {
        out.push(badge(
            format!("First task in {}", ctx.language),
            points,
            BadgeCause::FirstTaskInLanguage,
        ));
    }
    let reached_before = ctx.postedits_before / POSTEDIT_MILESTONE;
    let reached_after = ctx.postedits_after / POSTEDIT_MILESTONE;
    for m in reached_before + 1..=reached_after {
        out.push(badge(
            format!("{} postedits", m * POSTEDIT_MILESTONE),
            MILESTONE_POINTS,
            BadgeCause::PosteditMilestone,
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub username: String,
    pub total_points: u64,
    pub rank: u32,
}

/// Ranks `(username, points)` totals: points descending, dense ranks so
/// ties share the smaller rank, ties listed by username.
pub fn rank_totals(totals: impl IntoIterator<Item = (String, u64)>) -> Vec<LeaderboardEntry> {
    let mut rows: Vec<(String, u64)> = totals.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut out: Vec<LeaderboardEntry> = Vec::with_capacity(rows.len());
    for (username, total_points) in rows {
        let rank = match out.last() {
            None => 1,
            Some(prev) if prev.total_points == total_points => prev.rank,
            Some(prev) => prev.rank + 1,
        };
        out.push(LeaderboardEntry { username, total_points, rank });
    }
    out
}

/// Leaderboard over `badges`, restricted to one language when given.
/// `username_of` resolves annotators; badges of unknown users are skipped.
pub fn leaderboard_from_badges<'a>(
    badges: &[Badge],
    language: Option<&str>,
    username_of: impl Fn(&UserId) -> Option<&'a str>,
) -> Vec<LeaderboardEntry> {
    let mut totals: BTreeMap<&UserId, u64> = BTreeMap::new();
    for b in badges.iter().filter(|b| language.is_none_or(|l| b.language == l)) {
        *totals.entry(&b.annotator).or_default() += u64::from(b.points);
    }
    rank_totals(
        totals
            .into_iter()
            .filter_map(|(id, pts)| Some((username_of(id)?.to_owned(), pts))),
    )
}

/// Badge counts and global ranks, as consumed by profile redaction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GamificationSnapshot {
    badge_counts: HashMap<UserId, usize>,
    ranks: HashMap<String, u32>,
}

impl GamificationSnapshot {
    pub fn new(badge_counts: HashMap<UserId, usize>, board: &[LeaderboardEntry]) -> Self {
        Self {
            badge_counts,
            ranks: board.iter().map(|e| (e.username.clone(), e.rank)).collect(),
        }
    }

    pub fn badge_count(&self, user: &UserId) -> usize {
        self.badge_counts.get(user).copied().unwrap_or(0)
    }

    pub fn rank(&self, username: &str) -> Option<u32> {
        self.ranks.get(username).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressFeedback {
    pub judged: usize,
    pub total: usize,
    pub fraction: f64,
    pub remaining: usize,
    /// Highest of 0, 0.25, 0.5, 0.75, 1 reached.
    pub milestone: f64,
    pub message: String,
}

const MILESTONES: [(f64, &str); 5] = [
    (1.0, "All done! Your judgments are ready to help this language."),
    (0.75, "Almost there, just a few translations left."),
    (0.5, "Halfway through. Keep going!"),
    (0.25, "Great start, a quarter of the task is done."),
    (0.0, "Each translation you rate is one small step. Let's begin."),
];

pub fn progress_feedback(judged: usize, total: usize) -> ProgressFeedback {
    let fraction = if total == 0 { 0.0 } else { judged as f64 / total as f64 };
    let (milestone, message) = MILESTONES
        .iter()
        .find(|(t, _)| if *t == 1.0 { total > 0 && judged >= total } else { fraction >= *t })
        .copied()
        .unwrap_or(MILESTONES[4]);
    ProgressFeedback {
        judged,
        total,
        fraction,
        remaining: total.saturating_sub(judged),
        milestone,
        message: message.to_owned(),
    }
}

impl Platform {
    pub fn badges_of(&self, user: &UserId) -> Vec<&Badge> {
        self.badges.iter().filter(|b| &b.annotator == user).collect()
    }

    pub fn badges(&self) -> &[Badge] {
        &self.badges
    }

    pub fn leaderboard(&self, language: Option<&str>) -> Result<Vec<LeaderboardEntry>> {
        let language = match language {
            Some(raw) => Some(self.registry.validate_language_tag(raw)?.code),
            None => None,
        };
        Ok(leaderboard_from_badges(&self.badges, language.as_deref(), |id| {
            self.users
                .get(id)
                .filter(|u| u.role == Role::Annotator)
                .map(|u| u.username.as_str())
        }))
    }

    pub fn gamification_snapshot(&self) -> GamificationSnapshot {
        let mut counts = HashMap::new();
        for b in &self.badges {
            *counts.entry(b.annotator.clone()).or_default() += 1;
        }
        let board = self.leaderboard(None).unwrap_or_default();
        GamificationSnapshot::new(counts, &board)
    }

    pub fn progress_feedback(&self, task_id: &TaskId, annotator: &UserId) -> Result<ProgressFeedback> {
        let p = self.progress(task_id, annotator)?;
        Ok(progress_feedback(p.judged, p.total))
    }

    pub fn rank_of(&self, username: &str) -> Result<Option<u32>> {
        self.user_by_username(username).map_err(|_| PlatformError::UnknownUser)?;
        Ok(self.gamification_snapshot().rank(username))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(d: usize, e: usize) -> LanguageResources {
        LanguageResources { datasets: d, evaluators: e }
    }

    #[test]
    fn weight_examples() {
        assert_eq!(scarcity_weight(res(0, 0)), 1.0);
        assert_eq!(scarcity_weight(res(1, 1)), 0.5);
        assert_eq!(scarcity_weight(res(7, 7)), 0.25);
    }

    #[test]
    fn points_examples() {
        assert_eq!(badge_points(res(0, 0)), 100);
        assert_eq!(badge_points(res(1, 1)), 50);
        assert_eq!(badge_points(res(7, 7)), 25);
        assert_eq!(badge_points(res(4, 10)), 25);
        // 100 / log2(3) = 63.09..
        assert_eq!(badge_points(res(0, 1)), 64);
    }

    fn ctx(resources: LanguageResources, first: bool, before: usize, after: usize) -> AwardContext {
        AwardContext {
            task_id: TaskId::from("t-1"),
            language: "ceb".into(),
            resources,
            first_in_language: first,
            postedits_before: before,
            postedits_after: after,
        }
    }

    fn award(c: &AwardContext) -> Vec<(BadgeCause, u32)> {
        let mut n = 0;
        award_badges(&UserId::from("u"), c, Timestamp::from_unix(0), || {
            n += 1;
            BadgeId(format!("b{n}"))
        })
        .into_iter()
        .map(|b| (b.cause, b.points))
        .collect()
    }

    #[test]
    fn award_examples() {
        assert_eq!(
            award(&ctx(res(0, 0), true, 0, 3)),
            [(BadgeCause::TaskCompleted, 100), (BadgeCause::FirstTaskInLanguage, 100)]
        );
        assert_eq!(award(&ctx(res(4, 10), false, 0, 0)), [(BadgeCause::TaskCompleted, 25)]);
        assert_eq!(
            award(&ctx(res(4, 10), false, 6, 10)),
            [(BadgeCause::TaskCompleted, 25), (BadgeCause::PosteditMilestone, 25)]
        );
        // crossing two milestones in one task
        let got = award(&ctx(res(4, 10), false, 9, 21));
        assert_eq!(got.iter().filter(|(c, _)| *c == BadgeCause::PosteditMilestone).count(), 2);
        // already past 10 before, not yet 20
        assert_eq!(award(&ctx(res(4, 10), false, 10, 19)).len(), 1);
    }

    #[test]
    fn leaderboard_examples() {
        let board = rank_totals([("ben".to_owned(), 100), ("ana".to_owned(), 150)]);
        assert_eq!(
            board,
            [
                LeaderboardEntry { username: "ana".into(), total_points: 150, rank: 1 },
                LeaderboardEntry { username: "ben".into(), total_points: 100, rank: 2 },
            ]
        );
        let tie = rank_totals([("ben".to_owned(), 100), ("ana".to_owned(), 100)]);
        assert_eq!((tie[0].username.as_str(), tie[0].rank), ("ana", 1));
        assert_eq!((tie[1].username.as_str(), tie[1].rank), ("ben", 1));
        assert!(rank_totals(Vec::new()).is_empty());
        let dense = rank_totals([("a".to_owned(), 5), ("b".to_owned(), 5), ("c".to_owned(), 1)]);
        assert_eq!(dense.iter().map(|e| e.rank).collect::<Vec<_>>(), [1, 1, 2]);
    }

    #[test]
    fn progress_examples() {
        let f = progress_feedback(0, 15);
        assert_eq!((f.fraction, f.remaining, f.milestone), (0.0, 15, 0.0));
        let f = progress_feedback(15, 15);
        assert_eq!((f.fraction, f.remaining, f.milestone), (1.0, 0, 1.0));
        let f = progress_feedback(8, 15);
        assert!((f.fraction - 8.0 / 15.0).abs() < 1e-12);
        assert_eq!(f.milestone, 0.5);
        assert_eq!(progress_feedback(12, 15).milestone, 0.75);
        assert_eq!(progress_feedback(14, 15).milestone, 0.75);
        assert_eq!(progress_feedback(4, 15).milestone, 0.25);
        assert_eq!(progress_feedback(0, 0).milestone, 0.0);
    }
}
