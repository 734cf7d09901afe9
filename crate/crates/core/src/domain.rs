//! Shared entity types: language tags and their registry, user profiles, and
//! the redacted public view of a profile.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{PlatformError, Result};
use crate::gamification::GamificationSnapshot;
use crate::ids::UserId;
use crate::time::Timestamp;

/// Registry shipped with the crate; `lingkod seed --registry` replaces it.
pub const DEFAULT_REGISTRY: &str = include_str!("../data/registry.tsv");

pub const MAX_USERNAME_CHARS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageTag {
    pub code: String,
    pub display_name: String,
    pub country_codes: BTreeSet<String>,
}

/// Checks `[a-z]{2,3}(-[A-Za-z0-9]{2,8})*`.
pub fn is_well_formed_tag(raw: &str) -> bool {
    let mut parts = raw.split('-');
    let primary = parts.next().unwrap_or_default();
    if !(2..=3).contains(&primary.len()) || !primary.bytes().all(|b| b.is_ascii_lowercase()) {
        return false;
    }
    parts.all(|sub| (2..=8).contains(&sub.len()) && sub.bytes().all(|b| b.is_ascii_alphanumeric()))
}

pub fn is_country_code(raw: &str) -> bool {
    raw.len() == 2 && raw.bytes().all(|b| b.is_ascii_uppercase())
}

/// Curated table of languages the platform accepts, each tied to the
/// countries it is counted under on the map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LanguageRegistry {
    tags: BTreeMap<String, LanguageTag>,
}

impl LanguageRegistry {
    /// Parses `code<TAB>display_name<TAB>CC1,CC2` records. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tags = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let malformed = |reason: &str| PlatformError::MalformedRegistry {
                line: lineno,
                reason: reason.to_owned(),
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [code, name, countries] = fields[..] else {
                return Err(malformed("expected three tab-separated fields"));
            };
            if !is_well_formed_tag(code) {
                return Err(malformed("malformed language code"));
            }
            if name.trim().is_empty() {
                return Err(malformed("empty display name"));
            }
            let country_codes: BTreeSet<String> = countries
                .split(',')
                .map(str::trim)
                .filter(|c| !c.is_empty())
                .map(str::to_owned)
                .collect();
            if country_codes.is_empty() {
                return Err(malformed("no country codes"));
            }
            if let Some(bad) = country_codes.iter().find(|c| !is_country_code(c)) {
                return Err(malformed(&format!("bad country code {bad:?}")));
            }
            let tag = LanguageTag {
                code: code.to_owned(),
                display_name: name.trim().to_owned(),
                country_codes,
            };
            if tags.insert(tag.code.clone(), tag).is_some() {
                return Err(malformed("duplicate language code"));
            }
        }
        Ok(Self { tags })
    }

    pub fn seeded() -> Self {
        Self::parse(DEFAULT_REGISTRY).expect("bundled registry is well formed")
    }

    pub fn get(&self, code: &str) -> Option<&LanguageTag> {
        self.tags.get(code)
    }

    pub fn iter(&self) -> impl Iterator<Item = &LanguageTag> {
        self.tags.values()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Every country with at least one registered language.
    pub fn countries(&self) -> BTreeSet<&str> {
        self.iter()
            .flat_map(|t| t.country_codes.iter().map(String::as_str))
            .collect()
    }

    pub fn languages_of_country<'a>(&'a self, country: &'a str) -> impl Iterator<Item = &'a LanguageTag> {
        self.iter().filter(move |t| t.country_codes.contains(country))
    }

    pub fn validate_language_tag(&self, raw: &str) -> Result<LanguageTag> {
        if !is_well_formed_tag(raw) {
            return Err(PlatformError::MalformedTag(raw.to_owned()));
        }
        self.get(raw)
            .cloned()
            .ok_or_else(|| PlatformError::UnknownTag(raw.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Researcher,
    Annotator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: UserId,
    pub username: String,
    pub role: Role,
    /// Registered language codes.
    pub languages: BTreeSet<String>,
    /// Self-declared, free text.
    pub certificates: Vec<String>,
    pub compensation_terms: String,
    /// Persisted, but never part of any outward view.
    #[serde(default)]
    pub contact_private: String,
    pub created_at: Timestamp,
}

pub fn is_valid_username(username: &str) -> bool {
    let n = username.chars().count();
    (1..=MAX_USERNAME_CHARS).contains(&n) && username.trim() == username
}

/// What other users may see of a profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublicProfile {
    pub username: String,
    pub languages: Vec<String>,
    pub certificates: Vec<String>,
    pub badge_count: usize,
    pub leaderboard_rank: Option<u32>,
}

impl PublicProfile {
    pub const FIELDS: [&'static str; 5] = [
        "username",
        "languages",
        "certificates",
        "badge_count",
        "leaderboard_rank",
    ];
}

pub fn redact_profile(profile: &UserProfile, snapshot: &GamificationSnapshot) -> PublicProfile {
    PublicProfile {
        username: profile.username.clone(),
        languages: profile.languages.iter().cloned().collect(),
        certificates: profile.certificates.clone(),
        badge_count: snapshot.badge_count(&profile.user_id),
        leaderboard_rank: snapshot.rank(&profile.username),
    }
}
