//! String-based automatic evaluation: a fixed tokenizer, clipped n-gram
//! precision BLEU at sentence and corpus level, and correlation against
//! human scores.

mod bleu;
mod correlation;
mod tokenize;

pub use bleu::{
    brevity_penalty, corpus_bleu, ngram_precisions, sentence_bleu, sentence_bleu_tokens,
    sentence_bleu_unsmoothed, BleuScore, NgramPrecisions, Precision, MAX_ORDER,
};
pub use correlation::{average_ranks, correlate, pearson, Correlation};
pub use tokenize::tokenize;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("candidate has no tokens")]
    EmptyCandidate,
    #[error("lengths must be at least 1")]
    ZeroLength,
    #[error("text is empty after tokenization")]
    EmptyAfterTokenization,
    #[error("corpus has no segments")]
    EmptyCorpus,
    #[error("score vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 paired scores, got {0}")]
    TooFewPoints(usize),
    #[error("correlation undefined for constant input")]
    ConstantInput,
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::EmptyCandidate => "EmptyCandidate",
            MetricsError::ZeroLength => "ZeroLength",
            MetricsError::EmptyAfterTokenization => "EmptyAfterTokenization",
            MetricsError::EmptyCorpus => "EmptyCorpus",
            MetricsError::LengthMismatch(..) => "LengthMismatch",
            MetricsError::TooFewPoints(_) => "TooFewPoints",
            MetricsError::ConstantInput => "ConstantInput",
        }
    }
}
