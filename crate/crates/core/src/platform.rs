use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{LanguageRegistry, UserProfile};
use crate::error::{PlatformError, Result};
use crate::evaluation::{EvaluationTask, Judgment, ResultsSummary};
use crate::gamification::Badge;
use crate::ids::{ConnectionId, TaskId, UserId};
use crate::qc::{check_ratio, QcThresholds};
use crate::recruitment::{ChatMessage, ConnectionRequest};
use crate::stats::UsageEvent;

/// Tunables that are configuration, not data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformSettings {
    pub qc_ratio: f64,
    pub repeat_ratio: f64,
    pub thresholds: QcThresholds,
    pub session_gap_minutes: i64,
}

impl Default for PlatformSettings {
    fn default() -> Self {
        Self {
            qc_ratio: 0.2,
            repeat_ratio: 0.05,
            thresholds: QcThresholds::default(),
            session_gap_minutes: 30,
        }
    }
}

impl PlatformSettings {
    pub fn validate(&self) -> std::result::Result<(), String> {
        check_ratio(self.qc_ratio).map_err(|e| format!("qc_ratio: {e}"))?;
        check_ratio(self.repeat_ratio).map_err(|e| format!("repeat_ratio: {e}"))?;
        if self.session_gap_minutes <= 0 {
            return Err("session gap must be positive".into());
        }
        Ok(())
    }
}

/// The whole platform state as one value.
///
/// Every mutating operation either returns `Err` without touching `self` or
/// applies all of its writes. Callers that need isolation between
/// concurrent requests wrap this in a transactional store.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Platform {
    pub(crate) registry: LanguageRegistry,
    pub(crate) users: BTreeMap<UserId, UserProfile>,
    pub(crate) usernames: BTreeMap<String, UserId>,
    /// Token digest to owner.
    pub(crate) tokens: BTreeMap<String, UserId>,
    pub(crate) connections: BTreeMap<ConnectionId, ConnectionRequest>,
    pub(crate) messages: BTreeMap<ConnectionId, Vec<ChatMessage>>,
    pub(crate) tasks: BTreeMap<TaskId, EvaluationTask>,
    pub(crate) judgments: BTreeMap<TaskId, Vec<Judgment>>,
    pub(crate) badges: Vec<Badge>,
    /// Keyed by `task_id/user_id`.
    pub(crate) results: BTreeMap<String, ResultsSummary>,
    pub(crate) exports: BTreeMap<TaskId, String>,
    /// Stored separately by persistence backends as an append-only log.
    #[serde(skip)]
    pub(crate) events: Vec<UsageEvent>,
    pub(crate) next_id: u64,
    #[serde(skip)]
    pub(crate) settings: PlatformSettings,
}

impl Platform {
    pub fn new(registry: LanguageRegistry, settings: PlatformSettings) -> Self {
        Self { registry, settings, ..Default::default() }
    }

    /// Platform seeded with the bundled language registry.
    pub fn with_default_registry() -> Self {
        Self::new(LanguageRegistry::seeded(), PlatformSettings::default())
    }

    pub fn settings(&self) -> &PlatformSettings {
        &self.settings
    }

    pub fn set_settings(&mut self, settings: PlatformSettings) {
        self.settings = settings;
    }

    pub fn registry(&self) -> &LanguageRegistry {
        &self.registry
    }

    /// Replaces the language registry. Languages already referenced by
    /// profiles or tasks must remain registered.
    pub fn replace_registry(&mut self, registry: LanguageRegistry) -> Result<()> {
        let in_use = self
            .users
            .values()
            .flat_map(|u| u.languages.iter())
            .chain(self.tasks.values().flat_map(|t| [&t.source_language, &t.target_language]));
        for code in in_use {
            if registry.get(code).is_none() {
                return Err(PlatformError::UnknownTag(code.clone()));
            }
        }
        self.registry = registry;
        Ok(())
    }

    pub(crate) fn mint_id(&mut self, prefix: &str) -> String {
        self.next_id += 1;
        format!("{prefix}-{:06}", self.next_id)
    }

    pub fn user(&self, id: &UserId) -> Result<&UserProfile> {
        self.users.get(id).ok_or(PlatformError::UnknownUser)
    }

    pub fn user_by_username(&self, username: &str) -> Result<&UserProfile> {
        self.usernames
            .get(username)
            .and_then(|id| self.users.get(id))
            .ok_or(PlatformError::UnknownUser)
    }

    pub fn users(&self) -> impl Iterator<Item = &UserProfile> {
        self.users.values()
    }

    /// Associates a token digest with a user. Digests are computed by the
    /// caller; raw tokens never reach the platform state.
    pub fn bind_token(&mut self, digest: String, user: &UserId) -> Result<()> {
        self.user(user)?;
        self.tokens.insert(digest, user.clone());
        Ok(())
    }

    pub fn authenticate(&self, digest: &str) -> Result<&UserProfile> {
        self.tokens
            .get(digest)
            .and_then(|id| self.users.get(id))
            .ok_or(PlatformError::InvalidToken)
    }

    pub fn events(&self) -> &[UsageEvent] {
        &self.events
    }

    /// Reattaches an event log loaded by a persistence backend.
    pub fn restore_events(&mut self, events: Vec<UsageEvent>) {
        self.events = events;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_validation() {
        assert!(PlatformSettings::default().validate().is_ok());
        let bad = PlatformSettings { qc_ratio: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PlatformSettings { session_gap_minutes: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ids_are_unique() {
        let mut p = Platform::default();
        let a = p.mint_id("u");
        let b = p.mint_id("u");
        assert_ne!(a, b);
    }
}
