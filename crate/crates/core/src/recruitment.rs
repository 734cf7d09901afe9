//! Profiles, expertise search, researcher/annotator connections and chat.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::domain::{is_valid_username, redact_profile, PublicProfile, Role, UserProfile};
use crate::error::{PlatformError, Result};
use crate::evaluation::{TaskStatus, TaskSummary};
use crate::ids::{ConnectionId, UserId};
use crate::stats::{EventKind, UsageEvent};
use crate::time::Timestamp;
use crate::Platform;

pub const MAX_MESSAGE_CHARS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConnectionStatus {
    Pending,
    Accepted,
    Denied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Deny,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionRequest {
    pub connection_id: ConnectionId,
    pub from_user: UserId,
    pub to_user: UserId,
    /// Monetary, acknowledgement, authorship... never parsed.
    pub proposed_terms: String,
    pub status: ConnectionStatus,
    pub created_at: Timestamp,
    pub resolved_at: Option<Timestamp>,
}

impl ConnectionRequest {
    pub fn involves(&self, user: &UserId) -> bool {
        &self.from_user == user || &self.to_user == user
    }

    pub fn counterpart(&self, user: &UserId) -> &UserId {
        if &self.from_user == user {
            &self.to_user
        } else {
            &self.from_user
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub connection_id: ConnectionId,
    pub sender: UserId,
    pub body: String,
    pub sent_at: Timestamp,
}

/// Input to [`Platform::create_profile`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewProfile {
    pub username: String,
    pub role: Option<Role>,
    pub languages: Vec<String>,
    #[serde(default)]
    pub certificates: Vec<String>,
    #[serde(default)]
    pub compensation_terms: String,
    #[serde(default)]
    pub contact_private: String,
}

impl NewProfile {
    pub fn new(username: &str, role: Role, languages: &[&str]) -> Self {
        Self {
            username: username.to_owned(),
            role: Some(role),
            languages: languages.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn certificates(mut self, certs: &[&str]) -> Self {
        self.certificates = certs.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn compensation(mut self, terms: &str) -> Self {
        self.compensation_terms = terms.to_owned();
        self
    }

    pub fn contact(mut self, contact: &str) -> Self {
        self.contact_private = contact.to_owned();
        self
    }
}

impl Platform {
    pub fn create_profile(&mut self, new: NewProfile, now: Timestamp) -> Result<UserProfile> {
        let role = new.role.unwrap_or(Role::Annotator);
        if !is_valid_username(&new.username) {
            return Err(PlatformError::InvalidUsername);
        }
        if self.usernames.contains_key(&new.username) {
            return Err(PlatformError::DuplicateUsername(new.username));
        }
        let mut languages = BTreeSet::new();
        for raw in &new.languages {
            languages.insert(self.registry.validate_language_tag(raw)?.code);
        }
        if role == Role::Annotator && languages.is_empty() {
            return Err(PlatformError::EmptyLanguages);
        }
        let user_id = UserId(self.mint_id("u"));
        let profile = UserProfile {
            user_id: user_id.clone(),
            username: new.username,
            role,
            languages,
            certificates: new.certificates,
            compensation_terms: new.compensation_terms,
            contact_private: new.contact_private,
            created_at: now,
        };
        self.usernames.insert(profile.username.clone(), user_id.clone());
        self.users.insert(user_id.clone(), profile.clone());
        self.push_event(UsageEvent { user_id, kind: EventKind::Registered, at: now });
        Ok(profile)
    }

    /// Profiles of `role` listing `language`, best leaderboard rank first,
    /// unranked last, ties broken by username.
    pub fn search_profiles(&self, language: &str, role: Role) -> Result<Vec<PublicProfile>> {
        let tag = self.registry.validate_language_tag(language)?;
        let snapshot = self.gamification_snapshot();
        let mut found: Vec<PublicProfile> = self
            .users
            .values()
            .filter(|u| u.role == role && u.languages.contains(&tag.code))
            .map(|u| redact_profile(u, &snapshot))
            .collect();
        found.sort_by(search_order);
        Ok(found)
    }

    /// Tasks still accepting annotators whose target language is `language`.
    pub fn search_tasks(&self, language: &str) -> Result<Vec<TaskSummary>> {
        let tag = self.registry.validate_language_tag(language)?;
        Ok(self
            .tasks
            .values()
            .filter(|t| t.status != TaskStatus::Completed && t.target_language == tag.code)
            .map(|t| self.task_summary(t))
            .collect())
    }

    pub fn request_connection(
        &mut self,
        from: &UserId,
        to: &UserId,
        proposed_terms: &str,
        now: Timestamp,
    ) -> Result<ConnectionRequest> {
        let from_role = self.user(from)?.role;
        let to_role = self.user(to)?.role;
        if from_role == to_role {
            return Err(PlatformError::SameRolePair);
        }
        let live = self.connections.values().any(|c| {
            c.status != ConnectionStatus::Denied
                && ((&c.from_user == from && &c.to_user == to) || (&c.from_user == to && &c.to_user == from))
        });
        if live {
            return Err(PlatformError::DuplicateConnection);
        }
        let request = ConnectionRequest {
            connection_id: ConnectionId(self.mint_id("c")),
            from_user: from.clone(),
            to_user: to.clone(),
            proposed_terms: proposed_terms.to_owned(),
            status: ConnectionStatus::Pending,
            created_at: now,
            resolved_at: None,
        };
        self.connections.insert(request.connection_id.clone(), request.clone());
        Ok(request)
    }

    pub fn connection(&self, id: &ConnectionId) -> Result<&ConnectionRequest> {
        self.connections.get(id).ok_or(PlatformError::UnknownConnection)
    }

    /// Connections the user is party to, oldest first.
    pub fn connections_of(&self, user: &UserId) -> Vec<&ConnectionRequest> {
        let mut out: Vec<_> = self.connections.values().filter(|c| c.involves(user)).collect();
        out.sort_by(|a, b| a.created_at.cmp(&b.created_at).then(a.connection_id.cmp(&b.connection_id)));
        out
    }

    pub fn respond_connection(
        &mut self,
        id: &ConnectionId,
        responder: &UserId,
        decision: Decision,
        now: Timestamp,
    ) -> Result<ConnectionRequest> {
        let conn = self.connections.get_mut(id).ok_or(PlatformError::UnknownConnection)?;
        if &conn.to_user != responder {
            return Err(PlatformError::NotRecipient);
        }
        if conn.status != ConnectionStatus::Pending {
            return Err(PlatformError::AlreadyResolved);
        }
        conn.status = match decision {
            Decision::Accept => ConnectionStatus::Accepted,
            Decision::Deny => ConnectionStatus::Denied,
        };
        conn.resolved_at = Some(now);
        let conn = conn.clone();
        if decision == Decision::Accept {
            for user in [&conn.from_user, &conn.to_user] {
                self.push_event(UsageEvent { user_id: user.clone(), kind: EventKind::ConnectionAccepted, at: now });
            }
        }
        Ok(conn)
    }

    /// The counterpart's compensation terms, only once the connection is
    /// accepted.
    pub fn counterpart_terms(&self, id: &ConnectionId, user: &UserId) -> Result<Option<&str>> {
        let conn = self.connection(id)?;
        if !conn.involves(user) {
            return Err(PlatformError::NotParticipant);
        }
        if conn.status != ConnectionStatus::Accepted {
            return Ok(None);
        }
        Ok(Some(self.user(conn.counterpart(user))?.compensation_terms.as_str()))
    }

    pub fn post_message(
        &mut self,
        id: &ConnectionId,
        sender: &UserId,
        body: &str,
        now: Timestamp,
    ) -> Result<ChatMessage> {
        let conn = self.connection(id)?;
        if !conn.involves(sender) {
            return Err(PlatformError::NotParticipant);
        }
        if conn.status != ConnectionStatus::Accepted {
            return Err(PlatformError::ConnectionNotAccepted);
        }
        if body.trim().is_empty() {
            return Err(PlatformError::EmptyBody);
        }
        if body.chars().count() > MAX_MESSAGE_CHARS {
            return Err(PlatformError::BodyTooLong(MAX_MESSAGE_CHARS));
        }
        let msg = ChatMessage {
            connection_id: id.clone(),
            sender: sender.clone(),
            body: body.to_owned(),
            sent_at: now,
        };
        self.messages.entry(id.clone()).or_default().push(msg.clone());
        Ok(msg)
    }

    /// Messages in send order.
    pub fn messages(&self, id: &ConnectionId, reader: &UserId) -> Result<&[ChatMessage]> {
        let conn = self.connection(id)?;
        if !conn.involves(reader) {
            return Err(PlatformError::NotParticipant);
        }
        Ok(self.messages.get(id).map(Vec::as_slice).unwrap_or_default())
    }

    pub(crate) fn accepted_between(&self, a: &UserId, b: &UserId) -> bool {
        self.connections.values().any(|c| {
            c.status == ConnectionStatus::Accepted && c.involves(a) && c.involves(b) && a != b
        })
    }
}

/// Rank ascending with unranked last, then username.
pub fn search_order(a: &PublicProfile, b: &PublicProfile) -> std::cmp::Ordering {
    let key = |p: &PublicProfile| p.leaderboard_rank.unwrap_or(u32::MAX);
    key(a).cmp(&key(b)).then_with(|| a.username.cmp(&b.username))
}
