use thiserror::Error;

use crate::metrics::MetricsError;
use crate::qc::QcError;

pub type Result<T, E = PlatformError> = std::result::Result<T, E>;

/// Errors raised by stateful platform operations.
///
/// [`PlatformError::code`] yields the stable identifier used in API error
/// bodies.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlatformError {
    #[error("language tag {0:?} is malformed")]
    MalformedTag(String),
    #[error("language tag {0:?} is not registered")]
    UnknownTag(String),
    #[error("malformed registry line {line}: {reason}")]
    MalformedRegistry { line: usize, reason: String },
    #[error("username must be 1-64 characters")]
    InvalidUsername,
    #[error("username {0:?} is already taken")]
    DuplicateUsername(String),
    #[error("annotators must list at least one language")]
    EmptyLanguages,
    #[error("unknown user")]
    UnknownUser,

    #[error("connections must pair a researcher with an annotator")]
    SameRolePair,
    #[error("a pending or accepted connection already exists for this pair")]
    DuplicateConnection,
    #[error("unknown connection")]
    UnknownConnection,
    #[error("only the recipient may respond to a connection request")]
    NotRecipient,
    #[error("connection request was already resolved")]
    AlreadyResolved,
    #[error("connection has not been accepted")]
    ConnectionNotAccepted,
    #[error("sender is not a party to this connection")]
    NotParticipant,
    #[error("message body is empty")]
    EmptyBody,
    #[error("message body exceeds {0} characters")]
    BodyTooLong(usize),

    #[error("upload contains no translation pairs")]
    EmptyUpload,
    #[error("only researchers may create tasks")]
    NotResearcher,
    #[error("unknown task")]
    UnknownTask,
    #[error("unknown item")]
    UnknownItem,
    #[error("annotator has no accepted connection with the task owner")]
    NotConnected,
    #[error("task is already completed")]
    TaskCompleted,
    #[error("score {0} outside 1..=100")]
    ScoreOutOfRange(i64),
    #[error("item was already judged by this annotator")]
    DuplicateJudgment,
    #[error("postedit rejected: {0}")]
    PosteditRejected(String),
    #[error("AI-text detector unavailable: {0}")]
    DetectorUnavailable(String),
    #[error("not every item has been judged")]
    NotFinished,

    #[error("unknown country {0:?}")]
    UnknownCountry(String),
    #[error("analytics window start must precede end")]
    BadWindow,
    #[error("event timestamp precedes the last recorded event")]
    EventOutOfOrder,

    #[error("invalid or missing token")]
    InvalidToken,

    #[error(transparent)]
    Qc(#[from] QcError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl PlatformError {
    pub fn code(&self) -> &'static str {
        use PlatformError::*;
        match self {
            MalformedTag(_) => "MalformedTag",
            UnknownTag(_) => "UnknownTag",
            MalformedRegistry { .. } => "MalformedRegistry",
            InvalidUsername => "InvalidUsername",
            DuplicateUsername(_) => "DuplicateUsername",
            EmptyLanguages => "EmptyLanguages",
            UnknownUser => "UnknownUser",
            SameRolePair => "SameRolePair",
            DuplicateConnection => "DuplicateConnection",
            UnknownConnection => "UnknownConnection",
            NotRecipient => "NotRecipient",
            AlreadyResolved => "AlreadyResolved",
            ConnectionNotAccepted => "ConnectionNotAccepted",
            NotParticipant => "NotParticipant",
            EmptyBody => "EmptyBody",
            BodyTooLong(_) => "BodyTooLong",
            EmptyUpload => "EmptyUpload",
            NotResearcher => "NotResearcher",
            UnknownTask => "UnknownTask",
            UnknownItem => "UnknownItem",
            NotConnected => "NotConnected",
            TaskCompleted => "TaskCompleted",
            ScoreOutOfRange(_) => "ScoreOutOfRange",
            DuplicateJudgment => "DuplicateJudgment",
            PosteditRejected(_) => "PosteditRejected",
            DetectorUnavailable(_) => "DetectorUnavailable",
            NotFinished => "NotFinished",
            UnknownCountry(_) => "UnknownCountry",
            BadWindow => "BadWindow",
            EventOutOfOrder => "EventOutOfOrder",
            InvalidToken => "InvalidToken",
            Qc(e) => e.code(),
            Metrics(e) => e.code(),
        }
    }

    /// True for uniqueness-constraint violations.
    pub fn is_conflict(&self) -> bool {
        matches!(
            self,
            PlatformError::DuplicateUsername(_)
                | PlatformError::DuplicateConnection
                | PlatformError::DuplicateJudgment
                | PlatformError::AlreadyResolved
        )
    }
}
