//! Sentence and corpus BLEU on a word-order example.
//!
//!     cargo run -p lingkod-core --example bleu

use lingkod_core::metrics::{corpus_bleu, ngram_precisions, sentence_bleu, sentence_bleu_unsmoothed, tokenize};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let candidate = "A beautiful house this is";
    let reference = "This is a beautiful house";

    let p = ngram_precisions(&tokenize(candidate), &tokenize(reference), 4)?;
    for (n, prec) in p.p.iter().enumerate() {
        println!("p{} = {}/{}", n + 1, prec.matches, prec.total);
    }
    println!("smoothed   {:.4}", sentence_bleu(candidate, reference)?.value);
    println!("unsmoothed {:.4}", sentence_bleu_unsmoothed(candidate, reference)?.value);

    let corpus = [
        ("the cat sat on the mat", "the cat is on the mat"),
        ("a dog barked", "the dog barked loudly"),
        (candidate, reference),
    ];
    let score = corpus_bleu(&corpus)?;
    println!("corpus     {:.4} (bp {:.4})", score.value, score.bp);
    Ok(())
}
