//! Core of the lingkod human-evaluation platform for low-resource-language
//! machine translation.
//!
//! The crate is split by concern:
//!
//! - [`domain`]: profiles, language registry, public redaction
//! - [`recruitment`]: profile search, connection requests, chat
//! - [`evaluation`]: task upload, blinded item sequencing, judgments, export
//! - [`qc`]: hidden quality-control items, reliability and consistency reports
//! - [`metrics`]: tokenizer, sentence/corpus BLEU, Pearson/Spearman correlation
//! - [`gamification`]: scarcity-weighted badges, leaderboard, progress feedback
//! - [`stats`]: per-country map aggregation and usage analytics
//!
//! All stateful operations are methods on [`Platform`], a plain in-memory
//! value. Persistence and transactions are layered on top by the server crate.

pub mod domain;
pub mod error;
pub mod evaluation;
pub mod gamification;
pub mod ids;
pub mod metrics;
pub mod platform;
pub mod qc;
pub mod recruitment;
pub mod stats;
pub mod time;

pub use error::{PlatformError, Result};
pub use platform::{Platform, PlatformSettings};
pub use time::Timestamp;
