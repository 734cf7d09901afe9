use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{tokenize, MetricsError};

pub const MAX_ORDER: usize = 4;

/// Clipped match count over candidate n-gram count for one order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    pub matches: u64,
    pub total: u64,
}

impl Precision {
    pub fn value(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matches as f64 / self.total as f64
        }
    }

    fn add_one(&self) -> Precision {
        Precision { matches: self.matches + 1, total: self.total + 1 }
    }
}

/// Per-order precisions `p[0]` = unigrams .. `p[3]` = 4-grams. Orders longer
/// than the candidate are absent, so `p.len() == min(4, candidate_len)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramPrecisions {
    pub p: Vec<Precision>,
    pub candidate_len: usize,
    pub reference_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub value: f64,
    pub bp: f64,
    /// Raw clipped counts, before any smoothing.
    pub precisions: NgramPrecisions,
    pub smoothed: bool,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

pub fn ngram_precisions(
    candidate: &[String],
    reference: &[String],
    max_n: usize,
) -> Result<NgramPrecisions, MetricsError> {
    if candidate.is_empty() {
        return Err(MetricsError::EmptyCandidate);
    }
    let p = (1..=max_n.min(candidate.len()))
        .map(|n| {
            let cand = ngram_counts(candidate, n);
            let refs = ngram_counts(reference, n);
            let matches = cand
                .iter()
                .map(|(gram, &c)| c.min(refs.get(gram).copied().unwrap_or(0)))
                .sum();
            Precision { matches, total: (candidate.len() + 1 - n) as u64 }
        })
        .collect();
    Ok(NgramPrecisions {
        p,
        candidate_len: candidate.len(),
        reference_len: reference.len(),
    })
}

pub fn brevity_penalty(candidate_len: usize, reference_len: usize) -> Result<f64, MetricsError> {
    if candidate_len == 0 || reference_len == 0 {
        return Err(MetricsError::ZeroLength);
    }
    if candidate_len >= reference_len {
        Ok(1.0)
    } else {
        Ok((1.0 - reference_len as f64 / candidate_len as f64).exp())
    }
}

/// `bp * geometric_mean(p)`; zero if any precision is zero.
fn combine(bp: f64, precisions: impl Iterator<Item = Precision>) -> f64 {
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for p in precisions {
        if p.matches == 0 {
            return 0.0;
        }
        log_sum += (p.matches as f64 / p.total as f64).ln();
        orders += 1;
    }
    if orders == 0 {
        return 0.0;
    }
    bp * (log_sum / orders as f64).exp()
}

fn sentence_score(candidate: &[String], reference: &[String], smoothed: bool) -> Result<BleuScore, MetricsError> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(MetricsError::EmptyAfterTokenization);
    }
    let precisions = ngram_precisions(candidate, reference, MAX_ORDER)?;
    let bp = brevity_penalty(candidate.len(), reference.len())?;
    let value = combine(
        bp,
        precisions.p.iter().enumerate().map(|(i, p)| {
            // unigrams are never smoothed
            if smoothed && i > 0 {
                p.add_one()
            } else {
                *p
            }
        }),
    );
    Ok(BleuScore { value, bp, precisions, smoothed })
}

/// Sentence BLEU with add-one smoothing on every order above unigrams.
pub fn sentence_bleu(candidate: &str, reference: &str) -> Result<BleuScore, MetricsError> {
    sentence_score(&tokenize(candidate), &tokenize(reference), true)
}

pub fn sentence_bleu_tokens(candidate: &[String], reference: &[String]) -> Result<BleuScore, MetricsError> {
    sentence_score(candidate, reference, true)
}

pub fn sentence_bleu_unsmoothed(candidate: &str, reference: &str) -> Result<BleuScore, MetricsError> {
    sentence_score(&tokenize(candidate), &tokenize(reference), false)
}

/// Unsmoothed corpus BLEU: counts and lengths are summed over segments
/// before the geometric mean and brevity penalty.
pub fn corpus_bleu<C, R>(pairs: &[(C, R)]) -> Result<BleuScore, MetricsError>
where
    C: AsRef<str>,
    R: AsRef<str>,
{
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut sums = [Precision { matches: 0, total: 0 }; MAX_ORDER];
    let (mut cand_len, mut ref_len) = (0usize, 0usize);
    for (cand, refr) in pairs {
        let cand = tokenize(cand.as_ref());
        let refr = tokenize(refr.as_ref());
        if cand.is_empty() || refr.is_empty() {
            return Err(MetricsError::EmptyAfterTokenization);
        }
        let seg = ngram_precisions(&cand, &refr, MAX_ORDER)?;
        for (sum, p) in sums.iter_mut().zip(&seg.p) {
            sum.matches += p.matches;
            sum.total += p.total;
        }
        cand_len += cand.len();
        ref_len += refr.len();
    }
    let p: Vec<Precision> = sums.into_iter().filter(|p| p.total > 0).collect();
    let bp = brevity_penalty(cand_len, ref_len)?;
    let value = combine(bp, p.iter().copied());
    Ok(BleuScore {
        value,
        bp,
        precisions: NgramPrecisions { p, candidate_len: cand_len, reference_len: ref_len },
        smoothed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn brevity_penalty_cases() {
        assert_eq!(brevity_penalty(5, 5).unwrap(), 1.0);
        assert_eq!(brevity_penalty(10, 5).unwrap(), 1.0);
        assert_abs_diff_eq!(brevity_penalty(5, 10).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(brevity_penalty(5, 10).unwrap(), 0.3679, epsilon = 1e-4);
        assert_eq!(brevity_penalty(0, 3), Err(MetricsError::ZeroLength));
        assert_eq!(brevity_penalty(3, 0), Err(MetricsError::ZeroLength));
    }

    #[test]
    fn short_candidate_omits_high_orders() {
        let p = ngram_precisions(&toks("house"), &toks("a house"), 4).unwrap();
        assert_eq!(p.p.len(), 1);
        assert_eq!(p.p[0], Precision { matches: 1, total: 1 });
    }

    #[test]
    fn empty_candidate_rejected() {
        assert_eq!(ngram_precisions(&[], &toks("a"), 4), Err(MetricsError::EmptyCandidate));
        assert_eq!(sentence_bleu("...", "a house"), Err(MetricsError::EmptyAfterTokenization));
        assert_eq!(sentence_bleu("a house", ""), Err(MetricsError::EmptyAfterTokenization));
    }

    #[test]
    fn clipping() {
        let p = ngram_precisions(&toks("the the the the"), &toks("the cat"), 4).unwrap();
        assert_eq!(p.p[0], Precision { matches: 1, total: 4 });
    }

    #[test]
    fn identity_scores_one() {
        let s = sentence_bleu("This is a beautiful house", "this is a beautiful house.").unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(corpus_bleu(&[("a b c", "a b c"), ("d e", "d e")]).unwrap().value, 1.0);
    }

    #[test]
    fn corpus_rejects_empty() {
        let empty: [(&str, &str); 0] = [];
        assert_eq!(corpus_bleu(&empty), Err(MetricsError::EmptyCorpus));
    }
}
