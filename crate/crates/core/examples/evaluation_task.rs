//! A full task on the in-process platform: recruit, judge, complete,
//! export, and see the map and leaderboard move.
//!
//!     cargo run -p lingkod-core --example evaluation_task

use lingkod_core::domain::Role;
use lingkod_core::evaluation::{MockDetector, NewTask, NextItem, UploadPair};
use lingkod_core::recruitment::{Decision, NewProfile};
use lingkod_core::{Platform, Timestamp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut clock = 1_714_550_400;
    let mut now = || {
        clock += 5;
        Timestamp::from_unix(clock)
    };
    let mut p = Platform::with_default_registry();
    let rita = p.create_profile(NewProfile::new("rita", Role::Researcher, &["en"]), now())?.user_id;
    let ana = p
        .create_profile(NewProfile::new("ana", Role::Annotator, &["ceb"]).compensation("co-authorship"), now())?
        .user_id;
    let conn = p.request_connection(&rita, &ana, "acknowledgement in the dataset release", now())?;
    p.respond_connection(&conn.connection_id, &ana, Decision::Accept, now())?;
    p.post_message(&conn.connection_id, &rita, "Salamat! The task is up.", now())?;

    let pairs = (0..10)
        .map(|i| {
            UploadPair::new(
                &format!("The house number {i} is beautiful."),
                &format!("Ang balay numero {i} nindot kaayo ni"),
                Some(&format!("Nindot kaayo ang balay numero {i}.")),
            )
        })
        .collect();
    let task = p.create_task(
        &rita,
        NewTask { source_language: "en".into(), target_language: "ceb".into(), pairs, terms: String::new(), qc_seed: Some(42) },
        now(),
    )?;
    println!("task {} has {} items", task.task_id, task.items.len());

    let detector = MockDetector::flagging(["Generated by a language model."]);
    while let NextItem::Item { item } = p.next_item(&task.task_id, &ana)? {
        let edit = format!("{} (gi-edit)", item.shown_text);
        let progress =
            p.submit_judgment(&task.task_id, &item.item_id, &ana, 78, 81, Some(&edit), &detector, now())?;
        println!("{} judged, progress {:.2}", item.item_id, progress.fraction);
    }

    let ph_before = p.country_summary("PH")?.stats.datasets;
    let summary = p.results_summary(&task.task_id, &ana, now())?;
    for b in &summary.new_badges {
        println!("badge: {} ({} points)", b.name, b.points);
    }
    println!("{}", summary.representation.message);
    let export = p.complete_and_export(&task.task_id, &rita, now())?;
    println!("export: {} rows, {} bytes", export.rows, export.jsonl.len());
    println!("PH datasets {} -> {}", ph_before, p.country_summary("PH")?.stats.datasets);
    println!("leaderboard: {:?}", p.leaderboard(None)?);
    Ok(())
}
