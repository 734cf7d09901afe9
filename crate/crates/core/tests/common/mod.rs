#![allow(dead_code)]

use lingkod_core::domain::Role;
use lingkod_core::evaluation::{DetectorOff, NewTask, NextItem, UploadPair};
use lingkod_core::ids::{TaskId, UserId};
use lingkod_core::recruitment::{Decision, NewProfile};
use lingkod_core::{Platform, Timestamp};

pub fn t(s: i64) -> Timestamp {
    Timestamp::from_unix(1_714_550_400 + s)
}

pub struct World {
    pub p: Platform,
    pub researcher: UserId,
    pub annotator: UserId,
}

pub fn ten_pairs(with_reference: bool) -> Vec<UploadPair> {
    (0..10)
        .map(|i| UploadPair {
            source: format!("Ang ganda ng bahay numero {i}."),
            mt_output: format!("A beautiful house number {i} this is"),
            reference: with_reference.then(|| format!("This is beautiful house number {i}.")),
        })
        .collect()
}

pub fn world() -> World {
    let mut p = Platform::with_default_registry();
    let researcher = p
        .create_profile(NewProfile::new("rita", Role::Researcher, &["en"]), t(0))
        .unwrap()
        .user_id;
    let annotator = p
        .create_profile(NewProfile::new("ana", Role::Annotator, &["ceb"]).certificates(&["BA Linguistics"]), t(1))
        .unwrap()
        .user_id;
    connect(&mut p, &researcher, &annotator);
    World { p, researcher, annotator }
}

pub fn connect(p: &mut Platform, researcher: &UserId, annotator: &UserId) {
    let c = p.request_connection(researcher, annotator, "acknowledgement", t(2)).unwrap();
    p.respond_connection(&c.connection_id, annotator, Decision::Accept, t(3)).unwrap();
}

pub fn ceb_task(w: &mut World, pairs: Vec<UploadPair>) -> TaskId {
    let new = NewTask {
        source_language: "en".into(),
        target_language: "ceb".into(),
        pairs,
        terms: "acknowledgement".into(),
        qc_seed: Some(42),
    };
    w.p.create_task(&w.researcher, new, t(10)).unwrap().task_id
}

/// Judges every remaining item with a fixed score.
pub fn judge_all(p: &mut Platform, task: &TaskId, annotator: &UserId, score: i64) {
    let mut clock = 100;
    while let NextItem::Item { item } = p.next_item(task, annotator).unwrap() {
        clock += 1;
        p.submit_judgment(task, &item.item_id, annotator, score, score, None, &DetectorOff, t(clock))
            .unwrap();
    }
}
