mod common;

use std::collections::BTreeSet;

use common::*;
use lingkod_core::domain::Role;
use lingkod_core::evaluation::{
    DetectorOff, ItemKind, ItemView, MockDetector, NewTask, NextItem, QcMode, TaskStatus, UploadPair,
};
use lingkod_core::gamification::BadgeCause;
use lingkod_core::ids::ItemId;
use lingkod_core::recruitment::NewProfile;
use lingkod_core::PlatformError;
use serde_json::Value;

#[test]
fn create_task_inserts_control_items() {
    let mut w = world();
    let id = ceb_task(&mut w, ten_pairs(true));
    let task = w.p.task(&id).unwrap();
    assert_eq!(task.items.len(), 15);
    assert_eq!(task.qc, QcMode::Full);
    assert_eq!(task.status, TaskStatus::Open);
    assert_eq!(task.mt_items().count(), 10);
    let ids: BTreeSet<_> = task.items.iter().map(|i| &i.item_id).collect();
    assert_eq!(ids.len(), 15);
    // upload order preserved for MT items
    let sources: Vec<_> = task.mt_items().map(|i| i.source_text.clone()).collect();
    let expected: Vec<_> = ten_pairs(true).into_iter().map(|p| p.source).collect();
    assert_eq!(sources, expected);
}

#[test]
fn create_task_is_deterministic_given_seed() {
    let mut a = world();
    let mut b = world();
    let ta = ceb_task(&mut a, ten_pairs(true));
    let tb = ceb_task(&mut b, ten_pairs(true));
    assert_eq!(a.p.task(&ta).unwrap().items, b.p.task(&tb).unwrap().items);
}

#[test]
fn create_task_errors() {
    let mut w = world();
    let new = |pairs: Vec<UploadPair>, target: &str| NewTask {
        source_language: "en".into(),
        target_language: target.into(),
        pairs,
        terms: String::new(),
        qc_seed: None,
    };
    assert_eq!(w.p.create_task(&w.researcher, new(vec![], "ceb"), t(5)), Err(PlatformError::EmptyUpload));
    assert_eq!(
        w.p.create_task(&w.researcher, new(ten_pairs(true), "xx"), t(5)),
        Err(PlatformError::UnknownTag("xx".into()))
    );
    let annotator = w.annotator.clone();
    assert_eq!(w.p.create_task(&annotator, new(ten_pairs(true), "ceb"), t(5)), Err(PlatformError::NotResearcher));
}

#[test]
fn no_references_means_no_qc() {
    let mut w = world();
    let pairs: Vec<_> = ten_pairs(false).into_iter().take(4).collect();
    w.p.set_settings(lingkod_core::PlatformSettings { repeat_ratio: 0.0, ..Default::default() });
    let id = ceb_task(&mut w, pairs);
    let task = w.p.task(&id).unwrap();
    assert_eq!(task.items.len(), 4);
    assert_eq!(task.qc, QcMode::None);
}

#[test]
fn next_item_walks_in_order_and_blinds_kind() {
    let mut w = world();
    let id = ceb_task(&mut w, ten_pairs(true));
    let items = w.p.task(&id).unwrap().items.clone();
    let NextItem::Item { item } = w.p.next_item(&id, &w.annotator).unwrap() else { panic!() };
    assert_eq!(item.item_id, items[0].item_id);

    for expected in &items {
        let NextItem::Item { item } = w.p.next_item(&id, &w.annotator).unwrap() else { panic!() };
        assert_eq!(&item.item_id, &expected.item_id);
        let json = serde_json::to_value(&item).unwrap();
        let keys: BTreeSet<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, BTreeSet::from(ItemView::FIELDS));
        let annotator = w.annotator.clone();
        w.p.submit_judgment(&id, &item.item_id, &annotator, 50, 50, None, &DetectorOff, t(20)).unwrap();
    }
    assert_eq!(w.p.next_item(&id, &w.annotator).unwrap(), NextItem::Done);
    assert!(items.iter().any(|i| i.kind == ItemKind::QcBad));
}

#[test]
fn unconnected_annotator_is_refused() {
    let mut w = world();
    let id = ceb_task(&mut w, ten_pairs(true));
    let stranger = w
        .p
        .create_profile(NewProfile::new("sam", Role::Annotator, &["ceb"]), t(4))
        .unwrap()
        .user_id;
    assert_eq!(w.p.next_item(&id, &stranger), Err(PlatformError::NotConnected));
    let item = w.p.task(&id).unwrap().items[0].item_id.clone();
    assert_eq!(
        w.p.submit_judgment(&id, &item, &stranger, 50, 50, None, &DetectorOff, t(5)),
        Err(PlatformError::NotConnected)
    );
    assert_eq!(w.p.progress_feedback(&id, &stranger), Err(PlatformError::NotConnected));
}

#[test]
fn submit_judgment_rules() {
    let mut w = world();
    let id = ceb_task(&mut w, ten_pairs(true));
    let items: Vec<ItemId> = w.p.task(&id).unwrap().items.iter().map(|i| i.item_id.clone()).collect();
    let a = w.annotator.clone();
    for (n, item) in items.iter().take(4).enumerate() {
        w.p.submit_judgment(&id, item, &a, 60, 70, None, &DetectorOff, t(20 + n as i64)).unwrap();
    }
    let progress = w.p.submit_judgment(&id, &items[4], &a, 60, 70, None, &DetectorOff, t(30)).unwrap();
    assert_eq!((progress.judged, progress.total), (5, 15));
    assert!((progress.fraction - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(w.p.task(&id).unwrap().status, TaskStatus::InProgress);

    assert_eq!(
        w.p.submit_judgment(&id, &items[5], &a, 0, 50, None, &DetectorOff, t(31)),
        Err(PlatformError::ScoreOutOfRange(0))
    );
    assert_eq!(
        w.p.submit_judgment(&id, &items[5], &a, 50, 101, None, &DetectorOff, t(31)),
        Err(PlatformError::ScoreOutOfRange(101))
    );
    assert_eq!(
        w.p.submit_judgment(&id, &items[4], &a, 60, 70, None, &DetectorOff, t(31)),
        Err(PlatformError::DuplicateJudgment)
    );
    assert_eq!(
        w.p.submit_judgment(&id, &ItemId::from("nope"), &a, 60, 70, None, &DetectorOff, t(31)),
        Err(PlatformError::UnknownItem)
    );
    // boundary scores are accepted
    w.p.submit_judgment(&id, &items[5], &a, 1, 100, None, &DetectorOff, t(32)).unwrap();
}

#[test]
fn postedit_gate() {
    let mut w = world();
    let id = ceb_task(&mut w, ten_pairs(true));
    let item = w.p.task(&id).unwrap().items[0].clone();
    let a = w.annotator.clone();
    let mock = MockDetector::flagging(["Generated by a language model."]);

    let flagged = w.p.submit_judgment(
        &id, &item.item_id, &a, 70, 70, Some("Generated by a language model."), &mock, t(20),
    );
    assert_eq!(flagged, Err(PlatformError::PosteditRejected("ai-generated".into())));
    let noop = w.p.submit_judgment(&id, &item.item_id, &a, 70, 70, Some(&item.shown_text), &mock, t(20));
    assert_eq!(noop, Err(PlatformError::PosteditRejected("no-op".into())));
    // nothing persisted by the rejected attempts
    assert_eq!(w.p.progress(&id, &a).unwrap().judged, 0);

    w.p.submit_judgment(&id, &item.item_id, &a, 70, 70, Some("This house is beautiful."), &mock, t(21))
        .unwrap();
    let stored = &w.p.judgments(&id)[0];
    assert_eq!(stored.postedit.as_deref(), Some("This house is beautiful."));
}

#[test]
fn progress_reaches_one_exactly_at_the_end() {
    let mut w = world();
    let id = ceb_task(&mut w, ten_pairs(true));
    let a = w.annotator.clone();
    let mut last = 0.0;
    let mut clock = 20;
    while let NextItem::Item { item } = w.p.next_item(&id, &a).unwrap() {
        clock += 1;
        let p = w.p.submit_judgment(&id, &item.item_id, &a, 50, 50, None, &DetectorOff, t(clock)).unwrap();
        assert!(p.fraction >= last);
        assert_eq!(p.fraction == 1.0, p.judged == p.total);
        last = p.fraction;
    }
    assert_eq!(last, 1.0);
    let fb = w.p.progress_feedback(&id, &a).unwrap();
    assert_eq!((fb.fraction, fb.remaining, fb.milestone), (1.0, 0, 1.0));
}

#[test]
fn results_summary_awards_once() {
    let mut w = world();
    let id = ceb_task(&mut w, ten_pairs(true));
    let a = w.annotator.clone();
    assert_eq!(w.p.results_summary(&id, &a, t(50)), Err(PlatformError::NotFinished));

    let items = w.p.task(&id).unwrap().items.clone();
    for (n, item) in items.iter().enumerate() {
        let postedit = (n < 4).then(|| format!("Edited translation {n}"));
        w.p.submit_judgment(&id, &item.item_id, &a, 80, 60, postedit.as_deref(), &DetectorOff, t(60 + n as i64))
            .unwrap();
    }
    let s = w.p.results_summary(&id, &a, t(100)).unwrap();
    assert_eq!((s.judged, s.postedits), (15, 4));
    assert_eq!((s.mean_adequacy, s.mean_fluency), (80.0, 60.0));
    // ana is the only ceb evaluator and no ceb dataset exists yet
    let causes: Vec<_> = s.new_badges.iter().map(|b| (b.cause, b.points)).collect();
    assert_eq!(causes, [(BadgeCause::TaskCompleted, 100), (BadgeCause::FirstTaskInLanguage, 100)]);
    assert_eq!((s.representation.datasets_before, s.representation.datasets_after), (0, 1));
    assert_eq!(s.representation.evaluators, 1);

    let again = w.p.results_summary(&id, &a, t(200)).unwrap();
    assert_eq!(again, s);
    assert_eq!(w.p.badges().len(), 2);

    let board = w.p.leaderboard(None).unwrap();
    assert_eq!(board[0].username, "ana");
    assert_eq!(board[0].total_points, 200);
    assert_eq!(w.p.leaderboard(Some("ceb")).unwrap(), board);
    assert!(w.p.leaderboard(Some("fil")).unwrap().is_empty());
    assert!(matches!(w.p.leaderboard(Some("!!")), Err(PlatformError::MalformedTag(_))));
}

#[test]
fn badge_points_frozen_when_coverage_grows() {
    let mut w = world();
    let id = ceb_task(&mut w, ten_pairs(true));
    let a = w.annotator.clone();
    judge_all(&mut w.p, &id, &a, 70);
    let s = w.p.results_summary(&id, &a, t(300)).unwrap();
    let before: Vec<u32> = s.new_badges.iter().map(|b| b.points).collect();
    for i in 0..20 {
        w.p.create_profile(NewProfile::new(&format!("extra{i}"), Role::Annotator, &["ceb"]), t(400)).unwrap();
    }
    let after: Vec<u32> = w.p.badges_of(&a).iter().map(|b| b.points).collect();
    assert_eq!(before, after);
}

#[test]
fn complete_and_export() {
    let mut w = world();
    let id = ceb_task(&mut w, ten_pairs(true));
    let r = w.researcher.clone();
    assert_eq!(w.p.complete_and_export(&id, &r, t(40)), Err(PlatformError::NotFinished));
    let a = w.annotator.clone();
    judge_all(&mut w.p, &id, &a, 70);
    assert_eq!(w.p.complete_and_export(&id, &a, t(40)), Err(PlatformError::NotResearcher));

    let before = w.p.country_summary("PH").unwrap().stats.datasets;
    let export = w.p.complete_and_export(&id, &r, t(500)).unwrap();
    assert_eq!(export.rows, 10);
    assert_eq!(w.p.country_summary("PH").unwrap().stats.datasets, before + 1);
    assert_eq!(w.p.task(&id).unwrap().status, TaskStatus::Completed);
    assert!(export.jsonl.ends_with('\n'));

    let lines: Vec<Value> = export.jsonl.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 11);
    for row in &lines[..10] {
        assert_eq!(row["license"], "CC0-1.0");
        assert_eq!(row["target_lang"], "ceb");
        assert_eq!(row["judgments"][0]["annotator_pseudonym"], "annotator-1");
        assert_eq!(row["adequacy_mean"], 70.0);
        assert_eq!(row["adequacy_z_mean"], 0.0);
        assert!(row.get("kind").is_none());
        assert!(!row.to_string().contains("ana"));
    }
    let audit = lines[10]["qc_audit"].as_array().unwrap();
    assert_eq!(audit.len(), 2);
    assert_eq!(audit[0]["report"], "reliability");
    assert_eq!(audit[0]["verdict"], "Fail");
    assert_eq!(audit[1]["report"], "consistency");

    // idempotent
    let again = w.p.complete_and_export(&id, &r, t(600)).unwrap();
    assert_eq!(again, export);
    assert_eq!(w.p.country_summary("PH").unwrap().stats.datasets, before + 1);
    assert_eq!(w.p.export(&id), Some(export.jsonl.as_str()));

    assert_eq!(w.p.next_item(&id, &a), Err(PlatformError::TaskCompleted));
    assert!(w.p.search_tasks("ceb").unwrap().is_empty());
}

#[test]
fn search_tasks_lists_open_work() {
    let mut w = world();
    assert!(w.p.search_tasks("ceb").unwrap().is_empty());
    let id = ceb_task(&mut w, ten_pairs(true));
    let found = w.p.search_tasks("ceb").unwrap();
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].task_id, id);
    assert_eq!(found[0].researcher, "rita");
    let json = serde_json::to_string(&found).unwrap();
    assert!(!json.contains("beautiful house"), "summaries carry no item contents");
    assert_eq!(w.p.search_tasks("zzz"), Err(PlatformError::UnknownTag("zzz".into())));
}

#[test]
fn export_z_means_and_pseudonyms_with_two_annotators() {
    let mut w = world();
    let ben = w
        .p
        .create_profile(NewProfile::new("ben", Role::Annotator, &["ceb"]), t(4))
        .unwrap()
        .user_id;
    let r = w.researcher.clone();
    connect(&mut w.p, &r, &ben);
    let pairs: Vec<_> = ten_pairs(true).into_iter().take(2).collect();
    w.p.set_settings(lingkod_core::PlatformSettings { qc_ratio: 0.0, repeat_ratio: 0.0, ..Default::default() });
    let id = ceb_task(&mut w, pairs);
    let items = w.p.task(&id).unwrap().items.clone();
    let a = w.annotator.clone();
    // ben judges first, so he is annotator-1
    w.p.submit_judgment(&id, &items[0].item_id, &ben, 40, 90, None, &DetectorOff, t(20)).unwrap();
    w.p.submit_judgment(&id, &items[1].item_id, &ben, 60, 90, None, &DetectorOff, t(21)).unwrap();
    w.p.submit_judgment(&id, &items[0].item_id, &a, 80, 10, None, &DetectorOff, t(22)).unwrap();
    w.p.submit_judgment(&id, &items[1].item_id, &a, 80, 30, None, &DetectorOff, t(23)).unwrap();
    let export = w.p.complete_and_export(&id, &r, t(30)).unwrap();
    let rows: Vec<Value> = export.jsonl.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows[0]["judgments"][0]["annotator_pseudonym"], "annotator-1");
    assert_eq!(rows[0]["judgments"][0]["adequacy"], 40);
    assert_eq!(rows[0]["judgments"][1]["annotator_pseudonym"], "annotator-2");
    // ben: [40,60] -> z [-1,1]; ana: [80,80] -> z [0,0]
    assert_eq!(rows[0]["adequacy_mean"], 60.0);
    assert_eq!(rows[0]["adequacy_z_mean"], -0.5);
    assert_eq!(rows[1]["adequacy_z_mean"], 0.5);
    // ben fluency constant -> 0; ana [10,30] -> [-1,1]
    assert_eq!(rows[0]["fluency_z_mean"], -0.5);
    assert_eq!(rows[0]["reference"], "This is beautiful house number 0.");
}
