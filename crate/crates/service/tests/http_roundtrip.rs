use std::sync::Arc;

use swarmsearch_core::pheromone::DocRef;
use swarmsearch_core::querylog::{read_log, sessionize, DEFAULT_THRESHOLD};
use swarmsearch_service::http::serve;
use swarmsearch_service::log::InteractionLog;
use swarmsearch_service::provider::{FixtureProvider, UpstreamResult};
use swarmsearch_service::{SearchEngine, ServiceConfig};

fn fixture() -> FixtureProvider {
    let mut p = FixtureProvider::new();
    p.insert(
        "ants",
        (1..=10)
            .map(|i| UpstreamResult {
                url: DocRef::new(format!("http://ants{i}.example.org")).unwrap(),
                title: format!("Ants {i}"),
                snippet: "about ants".into(),
            })
            .collect(),
    );
    p
}

#[tokio::test(flavor = "multi_thread")]
async fn search_click_and_replay_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("interactions.tsv");
    let cfg = ServiceConfig { secret: Some("test".into()), ..ServiceConfig::default() };
    let engine = Arc::new(SearchEngine::new(cfg, Box::new(fixture()), InteractionLog::open(&log_path).unwrap()).unwrap());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(serve(engine.clone(), listener, async {
        let _ = stopped.await;
    }));

    let client = reqwest::Client::builder().redirect(reqwest::redirect::Policy::none()).build().unwrap();
    assert_eq!(client.get(format!("{base}/healthz")).send().await.unwrap().status(), 200);

    let page: serde_json::Value =
        client.get(format!("{base}/search?q=ants&p=1&u=42")).send().await.unwrap().json().await.unwrap();
    let results = page["results"].as_array().unwrap();
    assert_eq!(results.len(), 10);
    // recommendation state never reaches the client
    let keys: Vec<Vec<&String>> = results.iter().map(|r| r.as_object().unwrap().keys().collect()).collect();
    assert!(keys.iter().all(|k| *k == keys[0]));
    assert!(!keys[0].iter().any(|k| k.contains("recommend")));

    let token = results[7]["click_token"].as_str().unwrap();
    let resp = client.get(format!("{base}/click?t={token}")).send().await.unwrap();
    assert_eq!(resp.status(), 302);
    assert_eq!(resp.headers()["location"], "http://ants8.example.org");
    let replay = client.get(format!("{base}/click?t={token}")).send().await.unwrap();
    assert_eq!(replay.status(), 404);
    let blank = client.get(format!("{base}/search?q=")).send().await.unwrap();
    assert_eq!(blank.status(), 400);

    let again: serde_json::Value =
        client.get(format!("{base}/search?q=ants&u=42")).send().await.unwrap().json().await.unwrap();
    assert_eq!(again["results"][0]["url"], "http://ants8.example.org");
    assert_eq!(again["results"][7]["url"], "http://ants7.example.org");

    let stats: serde_json::Value = client.get(format!("{base}/stats")).send().await.unwrap().json().await.unwrap();
    assert_eq!(stats["queries"], 2);
    assert_eq!(stats["clicks"], 1);
    assert_eq!(stats["trails"], 1);
    assert!(stats["store_bytes"].as_u64().unwrap() > 0);

    stop.send(()).unwrap();
    server.await.unwrap().unwrap();

    let text = std::fs::read_to_string(&log_path).unwrap();
    let (rows, read) = read_log(text.as_bytes()).unwrap();
    assert_eq!(read.skipped, 0);
    assert_eq!(rows.len(), 3);
    let sessions = sessionize(&rows, DEFAULT_THRESHOLD);
    assert_eq!(sessions.len(), 1);
    assert_eq!(sessions[0].click_ranks(), vec![8]);
    assert!(text.lines().any(|l| l.starts_with("# rejected click token")));
}
