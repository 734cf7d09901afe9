const STRIP: &[char] = &['.', ',', '!', '?', ';', ':', '"', '\'', '(', ')'];

/// Lowercases, splits on Unicode whitespace and strips surrounding
/// `.,!?;:"'()` from each token. Tokens left empty are dropped.
///
/// This tokenizer is part of the metric and export contract; do not swap it
/// per call.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| raw.trim_matches(STRIP).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}
