//! How well a metric tracks human scores.
//!
//!     cargo run -p lingkod-core --example correlation

use lingkod_core::metrics::{correlate, sentence_bleu};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = [
        ("A beautiful house this is", "This is a beautiful house", 82.0),
        ("The house is beautiful", "This is a beautiful house", 90.0),
        ("House beautiful a", "This is a beautiful house", 35.0),
        ("This is a beautiful house", "This is a beautiful house", 97.0),
    ];
    let bleu: Vec<f64> = rows.iter().map(|(c, r, _)| sentence_bleu(c, r).map(|s| s.value)).collect::<Result<_, _>>()?;
    let human: Vec<f64> = rows.iter().map(|r| r.2).collect();
    for ((c, _, h), b) in rows.iter().zip(&bleu) {
        println!("{b:.3}  {h:>5}  {c}");
    }
    let r = correlate(&bleu, &human)?;
    println!("pearson  {:?}", r.pearson);
    println!("spearman {:?}", r.spearman);

    let flat = correlate(&[0.1, 0.2, 0.3], &[50.0, 50.0, 50.0])?;
    println!("constant human scores -> pearson {:?}", flat.pearson);
    Ok(())
}
