#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use anyhow::{ensure, Context};
use lingkod_server::{DetectorMode, RunningService, ServiceConfig};
use reqwest::{Method, StatusCode};
use serde_json::{json, Value};

/// Postedit the mock detector reports as machine-written.
pub const FLAGGED: &str = "This rewrite was produced by a language model.";

pub fn mock_config() -> ServiceConfig {
    ServiceConfig {
        detector_mode: DetectorMode::Mock,
        detector_mock_table: BTreeMap::from([(FLAGGED.to_owned(), true)]),
        ..ServiceConfig::ephemeral()
    }
}

pub async fn start(config: ServiceConfig) -> RunningService {
    lingkod_server::serve(config).await.expect("service starts")
}

#[derive(Clone)]
pub struct Api {
    pub base: String,
    pub http: reqwest::Client,
}

impl Api {
    pub fn new(service: &RunningService) -> Self {
        Self { base: service.base_url(), http: reqwest::Client::new() }
    }

    pub async fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.expect("request sent");
        let status = resp.status();
        let text = resp.text().await.expect("body read");
        let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        (status, value)
    }

    pub async fn get(&self, path: &str, token: Option<&str>) -> (StatusCode, Value) {
        self.call(Method::GET, path, token, None).await
    }

    pub async fn post(&self, path: &str, token: Option<&str>, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, path, token, Some(body)).await
    }

    pub async fn text(&self, path: &str) -> (StatusCode, String, String) {
        let resp = self.http.get(format!("{}{path}", self.base)).send().await.expect("request sent");
        let status = resp.status();
        let ctype = resp
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or_default()
            .to_owned();
        (status, ctype, resp.text().await.expect("body read"))
    }

    /// Registers a user and returns the bearer token.
    pub async fn register(&self, username: &str, role: &str, languages: &[&str]) -> String {
        let (status, body) = self
            .post(
                "/api/users",
                None,
                json!({
                    "username": username,
                    "role": role,
                    "languages": languages,
                    "certificates": ["BA Linguistics"],
                    "compensation_terms": "co-authorship",
                    "contact_private": format!("{username}@example.org"),
                }),
            )
            .await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["token"].as_str().unwrap().to_owned()
    }
}

pub fn ten_pairs() -> Value {
    let pairs: Vec<Value> = (0..10)
        .map(|i| {
            json!({
                "source": format!("The house number {i} is beautiful."),
                "mt_output": format!("Ang balay numero {i} nindot kaayo ni"),
                "reference": format!("Nindot kaayo ang balay numero {i}."),
            })
        })
        .collect();
    Value::Array(pairs)
}

/// Keys of every object in `v`, recursively, excluding values.
pub fn object_keys(v: &Value) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    if let Value::Object(map) = v {
        out.extend(map.keys().cloned());
    }
    out
}

/// Returns the keys of `v` (or of each element when `v` is an array) that
/// are not in `allowed`.
pub fn stray_keys(v: &Value, allowed: &[&str]) -> BTreeSet<String> {
    let items: Vec<&Value> = match v {
        Value::Array(xs) => xs.iter().collect(),
        other => vec![other],
    };
    items
        .into_iter()
        .flat_map(object_keys)
        .filter(|k| !allowed.contains(&k.as_str()))
        .collect()
}

pub struct Connected {
    pub researcher: String,
    pub annotator: String,
    pub connection_id: String,
}

pub async fn connect(api: &Api, researcher: &str, annotator: &str) -> anyhow::Result<Connected> {
    let r = api.register(researcher, "researcher", &["en"]).await;
    let a = api.register(annotator, "annotator", &["ceb"]).await;
    let (s, conn) = api
        .post("/api/connections", Some(&r), json!({ "to_username": annotator, "proposed_terms": "acknowledgement" }))
        .await;
    ensure!(s == StatusCode::CREATED, "connect: {s} {conn}");
    let id = conn["connection_id"].as_str().context("connection id")?.to_owned();
    let (s, resp) = api.post(&format!("/api/connections/{id}/respond"), Some(&a), json!({ "decision": "accept" })).await;
    ensure!(s == StatusCode::OK && resp["status"] == "Accepted", "respond: {s} {resp}");
    Ok(Connected { researcher: r, annotator: a, connection_id: id })
}

pub async fn post_task(api: &Api, researcher: &str) -> anyhow::Result<(String, usize)> {
    let (s, task) = api
        .post(
            "/api/tasks",
            Some(researcher),
            json!({
                "source_language": "en",
                "target_language": "ceb",
                "pairs": ten_pairs(),
                "terms": "acknowledgement",
                "qc_seed": 42,
            }),
        )
        .await;
    ensure!(s == StatusCode::CREATED, "create task: {s} {task}");
    let id = task["task_id"].as_str().context("task id")?.to_owned();
    Ok((id, task["items"].as_array().context("items")?.len()))
}

#[derive(Debug)]
pub struct Workflow {
    pub items: usize,
    pub judged: usize,
    pub final_fraction: f64,
    pub flagged_rejected: bool,
    pub export_rows: usize,
    pub audit_record: bool,
    pub ph_datasets_before: u64,
    pub ph_datasets_after: u64,
    pub annotator_on_leaderboard: bool,
}

/// Full researcher/annotator round trip over HTTP.
pub async fn workflow(api: &Api) -> anyhow::Result<Workflow> {
    let ph = |v: &Value| v["datasets"].as_u64().unwrap_or(u64::MAX);
    let (_, before) = api.get("/api/map/PH", None).await;

    let c = connect(api, "rita_santos", "ana_reyes").await?;
    let msgs = format!("/api/connections/{}/messages", c.connection_id);
    let (s, _) = api.post(&msgs, Some(&c.researcher), json!({ "body": "Salamat! Task is up." })).await;
    ensure!(s == StatusCode::CREATED, "chat post {s}");
    let (_, read) = api.get(&msgs, Some(&c.annotator)).await;
    ensure!(read.as_array().map(Vec::len) == Some(1), "chat read {read}");

    let (task, items) = post_task(api, &c.researcher).await?;
    let mut flagged_rejected = false;
    let mut judged = 0;
    let mut fraction = 0.0;
    loop {
        let (s, next) = api.get(&format!("/api/tasks/{task}/next-item"), Some(&c.annotator)).await;
        ensure!(s == StatusCode::OK, "next-item {s} {next}");
        if next["status"] == "done" {
            break;
        }
        let item = &next["item"];
        let item_id = item["item_id"].as_str().context("item id")?;
        let url = format!("/api/tasks/{task}/judgments");
        if !flagged_rejected {
            let (s, err) = api
                .post(&url, Some(&c.annotator), json!({ "item_id": item_id, "adequacy": 70, "fluency": 70, "postedit": FLAGGED }))
                .await;
            ensure!(s == StatusCode::UNPROCESSABLE_ENTITY && err["code"] == "PosteditRejected", "flagged: {s} {err}");
            flagged_rejected = true;
        }
        let postedit = format!("{} (gi-edit)", item["shown_text"].as_str().unwrap_or_default());
        let (s, fb) = api
            .post(&url, Some(&c.annotator), json!({ "item_id": item_id, "adequacy": 75, "fluency": 80, "postedit": postedit }))
            .await;
        ensure!(s == StatusCode::CREATED, "judge: {s} {fb}");
        judged += 1;
        fraction = fb["fraction"].as_f64().context("fraction")?;
        ensure!(judged <= items, "next-item never reported done");
    }
    let (_, progress) = api.get(&format!("/api/tasks/{task}/progress"), Some(&c.annotator)).await;
    ensure!(progress["fraction"].as_f64() == Some(fraction), "progress {progress}");

    let (s, results) = api.get(&format!("/api/tasks/{task}/results"), Some(&c.annotator)).await;
    ensure!(s == StatusCode::OK, "results {s} {results}");
    let (s, done) = api.post(&format!("/api/tasks/{task}/complete"), Some(&c.researcher), json!({})).await;
    ensure!(s == StatusCode::OK, "complete {s} {done}");

    let (s, ctype, body) = api.text(&format!("/api/exports/{task}")).await;
    ensure!(s == StatusCode::OK && ctype.starts_with("application/x-ndjson"), "export {s} {ctype}");
    let lines: Vec<Value> = body.lines().map(serde_json::from_str).collect::<Result<_, _>>()?;
    let audit_record = lines.last().is_some_and(|l| l.get("qc_audit").is_some_and(Value::is_array));
    let export_rows = lines.iter().filter(|l| l.get("source").is_some()).count();

    let (_, after) = api.get("/api/map/PH", None).await;
    let (_, board) = api.get("/api/leaderboard", Some(&c.researcher)).await;
    let annotator_on_leaderboard =
        board.as_array().is_some_and(|b| b.iter().any(|e| e["username"] == "ana_reyes" && e["rank"] == 1));

    Ok(Workflow {
        items,
        judged,
        final_fraction: fraction,
        flagged_rejected,
        export_rows,
        audit_record,
        ph_datasets_before: ph(&before),
        ph_datasets_after: ph(&after),
        annotator_on_leaderboard,
    })
}

/// Fires `n` identical judgment submissions at once. Returns the status
/// codes and the number of judgments stored for that item.
pub async fn duplicate_storm(service: &RunningService, n: usize) -> anyhow::Result<(Vec<StatusCode>, usize)> {
    let api = Api::new(service);
    let c = connect(&api, "rosa_cruz", "ben_dela_pena").await?;
    let (task, _) = post_task(&api, &c.researcher).await?;
    let (_, next) = api.get(&format!("/api/tasks/{task}/next-item"), Some(&c.annotator)).await;
    let item_id = next["item"]["item_id"].as_str().context("item")?.to_owned();
    let url = format!("/api/tasks/{task}/judgments");
    let handles: Vec<_> = (0..n)
        .map(|_| {
            let (api, url, token, item) = (api.clone(), url.clone(), c.annotator.clone(), item_id.clone());
            tokio::spawn(async move {
                api.post(&url, Some(&token), json!({ "item_id": item, "adequacy": 50, "fluency": 50 })).await.0
            })
        })
        .collect();
    let mut statuses = Vec::new();
    for h in handles {
        statuses.push(h.await?);
    }
    let stored = service.store.read(|p| {
        p.judgments(&task.as_str().into()).iter().filter(|j| j.item_id.as_str() == item_id).count()
    });
    Ok((statuses, stored))
}
