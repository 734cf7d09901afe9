//! Country-level aggregation for the world map, plus usage analytics.
//!
//! Nothing in here serializes usernames, user ids or contact details; the
//! map only ever shows counts.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::domain::{is_country_code, Role};
use crate::error::{PlatformError, Result};
use crate::evaluation::TaskStatus;
use crate::gamification::LanguageResources;
use crate::ids::{TaskId, UserId};
use crate::time::Timestamp;
use crate::Platform;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountryStats {
    pub country_code: String,
    pub evaluators: usize,
    pub languages: usize,
    pub datasets: usize,
}

impl CountryStats {
    pub const FIELDS: [&'static str; 4] = ["country_code", "evaluators", "languages", "datasets"];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageBreakdown {
    pub code: String,
    pub display_name: String,
    pub evaluators: usize,
    pub datasets: usize,
}

impl LanguageBreakdown {
    pub const FIELDS: [&'static str; 4] = ["code", "display_name", "evaluators", "datasets"];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountrySummary {
    #[serde(flatten)]
    pub stats: CountryStats,
    pub breakdown: Vec<LanguageBreakdown>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Registered,
    SessionPing,
    JudgmentSubmitted,
    TaskPosted,
    ConnectionAccepted,
}

impl EventKind {
    /// Counts toward the conversion rate.
    pub fn is_conversion(&self) -> bool {
        matches!(self, EventKind::JudgmentSubmitted | EventKind::TaskPosted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageEvent {
    pub user_id: UserId,
    pub kind: EventKind,
    pub at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub start: Timestamp,
    pub end: Timestamp,
    /// Distinct active users per UTC day (`YYYY-MM-DD`).
    pub dau: BTreeMap<String, usize>,
    pub sessions: usize,
    /// Session lengths in minutes, ordered by session start.
    pub session_minutes: Vec<f64>,
    pub avg_session_minutes: f64,
    /// `Registered` events inside the window.
    pub acquisition: usize,
    pub conversion_rate: f64,
}

/// Splits sorted event times into sessions wherever consecutive events are
/// more than `gap_minutes` apart. Returns `(start, minutes)` per session.
pub fn split_sessions(times: &[Timestamp], gap_minutes: i64) -> Vec<(Timestamp, f64)> {
    let mut out = Vec::new();
    let Some((&first, rest)) = times.split_first() else {
        return out;
    };
    let (mut start, mut last) = (first, first);
    for &t in rest {
        if t.unix() - last.unix() > gap_minutes * 60 {
            out.push((start, (last.unix() - start.unix()) as f64 / 60.0));
            start = t;
        }
        last = t;
    }
    out.push((start, (last.unix() - start.unix()) as f64 / 60.0));
    out
}

impl Platform {
    pub(crate) fn push_event(&mut self, mut event: UsageEvent) {
        if let Some(last) = self.events.last() {
            event.at = event.at.max(last.at);
        }
        self.events.push(event);
    }

    /// Appends to the event log. Events must arrive in time order.
    pub fn record_event(&mut self, event: UsageEvent) -> Result<()> {
        self.user(&event.user_id)?;
        if self.events.last().is_some_and(|last| event.at < last.at) {
            return Err(PlatformError::EventOutOfOrder);
        }
        self.events.push(event);
        Ok(())
    }

    fn evaluators_of<'a>(&'a self, language: &'a str) -> impl Iterator<Item = &'a UserId> + 'a {
        self.users
            .values()
            .filter(move |u| u.role == Role::Annotator && u.languages.contains(language))
            .map(|u| &u.user_id)
    }

    fn completed_datasets_of<'a>(&'a self, language: &'a str) -> impl Iterator<Item = &'a TaskId> + 'a {
        self.tasks
            .values()
            .filter(move |t| t.status == TaskStatus::Completed && t.target_language == language)
            .map(|t| &t.task_id)
    }

    pub fn language_resources(&self, language: &str) -> LanguageResources {
        LanguageResources {
            datasets: self.completed_datasets_of(language).count(),
            evaluators: self.evaluators_of(language).count(),
        }
    }

    /// Coverage of `language` as seen by `annotator` finishing `task`:
    /// neither counts toward the total.
    pub fn language_resources_excluding(
        &self,
        language: &str,
        annotator: &UserId,
        task: Option<&TaskId>,
    ) -> LanguageResources {
        LanguageResources {
            datasets: self.completed_datasets_of(language).filter(|t| Some(*t) != task).count(),
            evaluators: self.evaluators_of(language).filter(|u| *u != annotator).count(),
        }
    }

    pub fn country_summary(&self, country: &str) -> Result<CountrySummary> {
        if !is_country_code(country) {
            return Err(PlatformError::UnknownCountry(country.to_owned()));
        }
        let langs: Vec<_> = self.registry.languages_of_country(country).collect();
        if langs.is_empty() {
            return Err(PlatformError::UnknownCountry(country.to_owned()));
        }
        let mut evaluators: HashSet<&UserId> = HashSet::new();
        let mut datasets = 0;
        let mut breakdown = Vec::with_capacity(langs.len());
        for tag in &langs {
            let evs: Vec<&UserId> = self.evaluators_of(&tag.code).collect();
            let ds = self.completed_datasets_of(&tag.code).count();
            breakdown.push(LanguageBreakdown {
                code: tag.code.clone(),
                display_name: tag.display_name.clone(),
                evaluators: evs.len(),
                datasets: ds,
            });
            evaluators.extend(evs);
            datasets += ds;
        }
        Ok(CountrySummary {
            stats: CountryStats {
                country_code: country.to_owned(),
                evaluators: evaluators.len(),
                languages: langs.len(),
                datasets,
            },
            breakdown,
        })
    }

    /// One entry per country with any registered language.
    pub fn global_summary(&self) -> Vec<CountryStats> {
        self.registry
            .countries()
            .into_iter()
            .map(|c| self.country_summary(c).expect("country comes from the registry").stats)
            .collect()
    }

    pub fn analytics_report(&self, start: Timestamp, end: Timestamp) -> Result<AnalyticsReport> {
        if start >= end {
            return Err(PlatformError::BadWindow);
        }
        let in_window: Vec<&UsageEvent> = self.events.iter().filter(|e| e.at >= start && e.at < end).collect();

        let mut dau: BTreeMap<String, BTreeSet<&UserId>> = BTreeMap::new();
        let mut per_user: BTreeMap<&UserId, Vec<Timestamp>> = BTreeMap::new();
        for e in &in_window {
            dau.entry(e.at.utc_day().to_string()).or_default().insert(&e.user_id);
            per_user.entry(&e.user_id).or_default().push(e.at);
        }

        let mut sessions: Vec<(Timestamp, f64)> = Vec::new();
        for times in per_user.values_mut() {
            times.sort();
            sessions.extend(split_sessions(times, self.settings.session_gap_minutes));
        }
        sessions.sort_by_key(|s| s.0);
        let session_minutes: Vec<f64> = sessions.into_iter().map(|(_, m)| m).collect();
        let avg_session_minutes = if session_minutes.is_empty() {
            0.0
        } else {
            session_minutes.iter().sum::<f64>() / session_minutes.len() as f64
        };

        let acquisition = in_window.iter().filter(|e| e.kind == EventKind::Registered).count();
        let registered: HashSet<&UserId> = self
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Registered && e.at < end)
            .map(|e| &e.user_id)
            .collect();
        let converted: HashSet<&UserId> = in_window
            .iter()
            .filter(|e| e.kind.is_conversion() && registered.contains(&e.user_id))
            .map(|e| &e.user_id)
            .collect();
        let conversion_rate = if registered.is_empty() {
            0.0
        } else {
            converted.len() as f64 / registered.len() as f64
        };

        Ok(AnalyticsReport {
            start,
            end,
            dau: dau.into_iter().map(|(d, users)| (d, users.len())).collect(),
            sessions: session_minutes.len(),
            session_minutes,
            avg_session_minutes,
            acquisition,
            conversion_rate,
        })
    }
}
