//! Starts the service in memory on a free port and drives it over HTTP.
//!
//!     cargo run -p lingkod-server --example service_walkthrough

use lingkod_server::{DetectorMode, ServiceConfig};
use serde_json::{json, Value};

async fn call(http: &reqwest::Client, method: reqwest::Method, url: String, token: Option<&str>, body: Option<Value>) -> anyhow::Result<Value> {
    let mut req = http.request(method, url);
    if let Some(t) = token {
        req = req.bearer_auth(t);
    }
    if let Some(b) = body {
        req = req.json(&b);
    }
    let text = req.send().await?.text().await?;
    Ok(serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let config = ServiceConfig { detector_mode: DetectorMode::Mock, ..ServiceConfig::ephemeral() };
    let service = lingkod_server::serve(config).await?;
    let base = service.base_url();
    let http = reqwest::Client::new();
    let url = |p: &str| format!("{base}{p}");
    use reqwest::Method as M;

    let rita = call(&http, M::POST, url("/api/users"), None, Some(json!({ "username": "rita", "role": "researcher", "languages": ["en"] }))).await?;
    let rita = rita["token"].as_str().unwrap().to_owned();
    let ana = call(&http, M::POST, url("/api/users"), None, Some(json!({ "username": "ana", "role": "annotator", "languages": ["ceb"] }))).await?;
    let ana = ana["token"].as_str().unwrap().to_owned();

    let conn = call(&http, M::POST, url("/api/connections"), Some(&rita), Some(json!({ "to_username": "ana" }))).await?;
    let cid = conn["connection_id"].as_str().unwrap().to_owned();
    call(&http, M::POST, url(&format!("/api/connections/{cid}/respond")), Some(&ana), Some(json!({ "decision": "accept" }))).await?;

    let pairs: Vec<Value> = (0..10)
        .map(|i| json!({ "source": format!("Sentence {i}."), "mt_output": format!("Pulong {i} ni"), "reference": format!("Kini ang pulong {i}.") }))
        .collect();
    let task = call(&http, M::POST, url("/api/tasks"), Some(&rita), Some(json!({ "source_language": "en", "target_language": "ceb", "pairs": pairs }))).await?;
    let tid = task["task_id"].as_str().unwrap().to_owned();
    println!("task {tid}: {} items", task["items"].as_array().unwrap().len());

    loop {
        let next = call(&http, M::GET, url(&format!("/api/tasks/{tid}/next-item")), Some(&ana), None).await?;
        if next["status"] == "done" {
            break;
        }
        let item = next["item"]["item_id"].clone();
        let fb = call(&http, M::POST, url(&format!("/api/tasks/{tid}/judgments")), Some(&ana), Some(json!({ "item_id": item, "adequacy": 70, "fluency": 75 }))).await?;
        println!("{}", fb["message"]);
    }
    let results = call(&http, M::GET, url(&format!("/api/tasks/{tid}/results")), Some(&ana), None).await?;
    println!("badges: {}", results["new_badges"]);
    let done = call(&http, M::POST, url(&format!("/api/tasks/{tid}/complete")), Some(&rita), Some(json!({}))).await?;
    println!("completed: {done}");
    let export = http.get(url(&format!("/api/exports/{tid}"))).send().await?.text().await?;
    println!("export has {} lines", export.lines().count());
    println!("PH: {}", call(&http, M::GET, url("/api/map/PH"), None, None).await?);

    service.shutdown().await?;
    Ok(())
}
