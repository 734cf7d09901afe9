//! Control items, annotator reliability and score standardization.
//!
//!     cargo run -p lingkod-core --example quality_control

use lingkod_core::evaluation::{ItemKind, TaskItem};
use lingkod_core::ids::ItemId;
use lingkod_core::qc::{generate_qc_items, znormalize, ConsistencyReport, QcThresholds, ReliabilityReport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mt: Vec<TaskItem> = (0..10)
        .map(|i| {
            TaskItem::mt(
                ItemId(format!("mt{i}")),
                format!("The house number {i} is beautiful."),
                format!("Ang balay numero {i} nindot kaayo ni"),
                Some(format!("Nindot kaayo ang balay numero {i}.")),
            )
        })
        .collect();
    let items = generate_qc_items(&mt, 0.2, 0.05, 42)?;
    for it in &items {
        let tag = match it.kind {
            ItemKind::Mt => "MT     ",
            ItemKind::QcGood => "QC_GOOD",
            ItemKind::QcBad => "QC_BAD ",
            ItemKind::Repeat => "REPEAT ",
        };
        println!("{tag} {:<6} {}", it.item_id.as_str(), it.shown_text);
    }

    let t = QcThresholds::default();
    let careful = ReliabilityReport::from_pairs("careful", &[(80, 30), (85, 40), (90, 35), (75, 45), (88, 20)], &t);
    let sloppy = ReliabilityReport::from_pairs("sloppy", &[(50, 50), (40, 60), (55, 52), (30, 70), (61, 58)], &t);
    for r in [careful, sloppy] {
        println!("{:<8} pairs {} mean_diff {:>5.1} ordered {:.2} -> {:?}", r.annotator, r.n_pairs, r.mean_diff, r.frac_ordered, r.verdict);
    }
    let c = ConsistencyReport::from_pairs("careful", &[(80, 70), (60, 60)], &t);
    println!("repeat mad {:.1}, flagged {}", c.mad, c.flagged);

    let z = znormalize(&[60.0, 70.0, 80.0, 90.0])?;
    println!("z-scores {z:?}");
    Ok(())
}
