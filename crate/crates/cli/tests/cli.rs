use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tca_core::canonical::format_float;
use tca_core::embedding::HashingProvider;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn golden(rel: &str) -> PathBuf {
    root().join("crates/core/tests/fixtures/golden").join(rel)
}

fn tca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tca"))
        .args(args)
        .current_dir(root())
        .env_remove("TCA_PROVIDER_URL")
        .env_remove("TCA_WORDNET_DIR")
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn tca_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tca"))
        .args(args)
        .current_dir(root())
        .env_remove("TCA_WORDNET_DIR")
        .env(key, value)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn assess_args(pair: &str) -> (PathBuf, PathBuf) {
    (
        golden(&format!("courses/{}_receiving.json", pair)),
        golden(&format!("courses/{}_sending.json", pair)),
    )
}

fn expected() -> Value {
    serde_json::from_str(&std::fs::read_to_string(golden("expected.json")).unwrap()).unwrap()
}

fn same_grid(got: &Value, want: &Value) {
    let got = got["cells"].as_array().unwrap();
    let want = want.as_array().unwrap();
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        let g: Vec<String> = g.as_array().unwrap().iter().map(|x| format_float(x.as_f64().unwrap())).collect();
        let w: Vec<String> = w.as_array().unwrap().iter().map(|x| format_float(x.as_f64().unwrap())).collect();
        assert_eq!(g, w);
    }
}

#[test]
fn assess_reports_match_the_golden_oracle() {
    let exp = expected();
    for want in exp["pairs"].as_array().unwrap() {
        let id = want["id"].as_str().unwrap();
        let (r, s) = assess_args(id);
        let o = tca(&[
            "assess", "--receiving", p(&r), "--sending", p(&s), "--impact", "30", "--sim-threshold", "0.65",
            "--lo-threshold", "0.5",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", id, stderr(&o));
        let got: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(got["decision"], want["decision"], "{}", id);
        assert_eq!(got["provider"], "test");
        same_grid(&got["taxonomic_grid"], &want["taxonomic_grid"]);
        same_grid(&got["semantic_grid"], &want["semantic_grid"]);
        same_grid(&got["final_grid"], &want["final_grid"]);
        let rows: Vec<(&str, &str)> = got["matched_rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|m| (m["receiving_id"].as_str().unwrap(), m["sending_id"].as_str().unwrap()))
            .collect();
        let want_rows: Vec<(&str, &str)> = want["matched_rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|m| (m["receiving_id"].as_str().unwrap(), m["sending_id"].as_str().unwrap()))
            .collect();
        assert_eq!(rows, want_rows, "{}", id);
    }
}

#[test]
fn json_output_is_stable() {
    let (r, s) = assess_args("p3");
    let args = ["assess", "--receiving", p(&r), "--sending", p(&s)];
    let a = stdout(&tca(&args));
    let b = stdout(&tca(&args));
    assert_eq!(a, b);
    // canonical form: compact, keys sorted
    assert!(a.starts_with("{\"config\":{\"impact\":30,\"lo_threshold\":0.5,\"sim_threshold\":0.65},\"decision\":"));
}

#[test]
fn table_format_and_no_decisions_exit_zero() {
    let (r, s) = assess_args("p2");
    let o = tca(&["assess", "--receiving", p(&r), "--sending", p(&s), "--format", "table"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("decision: no"));
}

#[test]
fn input_errors_exit_one() {
    let (r, s) = assess_args("p1");
    let o = tca(&["assess", "--receiving", p(&r), "--sending", p(&s), "--impact", "120"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--impact"), "{}", stderr(&o));

    let o = tca(&["assess", "--receiving", "/no/such.json", "--sending", p(&s)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/no/such.json"));

    // roles swapped
    let o = tca(&["assess", "--receiving", p(&s), "--sending", p(&r)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("receiving.role"));

    let o = tca(&["assess", "--receiving", p(&r)]);
    assert_eq!(o.status.code(), Some(1));
    let o = tca(&["assess", "--receiving", p(&r), "--sending", p(&s), "--provider", "bert"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tca(&["sweep", "--pairs", p(&golden("pairs.json")), "--impact="]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(tca(&["--help"]).status.code(), Some(0));
}

#[test]
fn resource_errors_exit_two() {
    let (r, s) = assess_args("p1");
    let o = tca(&["--wordnet-dir", "/no/wordnet", "assess", "--receiving", p(&r), "--sending", p(&s)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/wordnet"));

    let o = tca(&["assess", "--receiving", p(&r), "--sending", p(&s), "--provider", "cache", "--cache", "/no/x.cache"]);
    assert_eq!(o.status.code(), Some(2));

    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let url = format!("http://127.0.0.1:{}/embed", port);
    let o = tca(&["assess", "--receiving", p(&r), "--sending", p(&s), "--provider", &format!("remote:{}", url)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("semantic pass"));
    // the endpoint can come from the environment alone
    let o = tca_env(&["assess", "--receiving", p(&r), "--sending", p(&s)], "TCA_PROVIDER_URL", &url);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wordnet_dir_from_environment() {
    let (r, s) = assess_args("p1");
    let o = tca_env(&["assess", "--receiving", p(&r), "--sending", p(&s)], "TCA_WORDNET_DIR", "/elsewhere");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/elsewhere"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tca.toml");
    std::fs::write(
        &cfg,
        format!(
            "wordnet_dir = \"{}\"\nformat = \"json\"\n[assessment]\nimpact = 40\nsim_threshold = 0.7\n",
            p(&root().join("data/wordnet-3.0"))
        ),
    )
    .unwrap();
    let (r, s) = assess_args("p1");
    let o = tca(&["--config", p(&cfg), "assess", "--receiving", p(&r), "--sending", p(&s), "--impact", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["impact"], 20);
    assert_eq!(v["config"]["sim_threshold"], 0.7);
}

#[test]
fn sweep_matches_the_oracle() {
    let exp = expected();
    let o = tca(&[
        "sweep", "--pairs", p(&golden("pairs.json")), "--impact", "20,30,40", "--annotations",
        p(&golden("annotations.csv")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let agreement: Vec<String> = v["agreement"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| format!("{:.2}", x.as_f64().unwrap()))
        .collect();
    let want: Vec<String> = serde_json::from_value(exp["sweeps"]["impact"]["agreement"].clone()).unwrap();
    assert_eq!(agreement, want);
    for row in v["rows"].as_array().unwrap() {
        let id = row["pair_id"].as_str().unwrap();
        assert_eq!(row["decisions"], exp["sweeps"]["impact"]["decisions"][id]);
    }

    let o = tca(&[
        "sweep", "--pairs", p(&golden("pairs.json")), "--sim-threshold", "0.60,0.65,0.70", "--format", "table",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let table = stdout(&o);
    assert!(table.starts_with("pair"));
    assert_eq!(table.lines().count(), 8);

    let o = tca(&["sweep", "--pairs", p(&golden("pairs.json")), "--sim-threshold", "0.6,0.65,0.7"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in v["rows"].as_array().unwrap() {
        let counts: Vec<u64> = row["matched_counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{:?}", counts);
    }
}

#[test]
fn eval_verbs_by_hand_and_on_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("three.tsv");
    std::fs::write(&data, "sprint\tjog\tV\t9\tCOHYPONYMS\nwalk\tfly\tV\t6\tCOHYPONYMS\nmove\tthink\tV\t0\tNONE\n").unwrap();
    let forest = root().join("crates/core/tests/fixtures/wordnet/forest");
    let o = tca(&["--wordnet-dir", p(&forest), "eval-verbs", "--dataset", p(&data), "--measures", "wup,wup_max"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // (9, 8, 0) against (9, 6, 0)
    let want = 132.0 / 18396f64.sqrt();
    assert_eq!(format_float(v["rows"][0]["r"].as_f64().unwrap()), format_float(want));
    assert_eq!(v["best_measure"], "wup");

    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    let o = tca(&["--wordnet-dir", p(&forest), "eval-verbs", "--dataset", p(&empty)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty"));

    std::fs::write(&data, "a\tb\tV\t5\tX\nc\td\tV\tlots\tX\n").unwrap();
    let o = tca(&["--wordnet-dir", p(&forest), "eval-verbs", "--dataset", p(&data)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"));

    let o = tca(&["--wordnet-dir", p(&forest), "eval-verbs", "--dataset", p(&data), "--measures", "jaccard"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eval_verbs_on_simverb_ranks_wup_max_first() {
    let o = tca(&["eval-verbs", "--dataset", "data/simverb/SimVerb-3500.tsv", "--format", "table"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("best measure over 3500 pairs: wup_max"), "{}", stdout(&o));
}

/// Embedding endpoint answering with hashing-provider vectors.
fn mock_embedding_server() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/embed", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        let h = HashingProvider::new();
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let req: Value = serde_json::from_slice(&body).unwrap();
            let vectors: Vec<Vec<f64>> = req["texts"]
                .as_array()
                .unwrap()
                .iter()
                .map(|t| h.embed_one(t.as_str().unwrap()).unwrap().values().to_vec())
                .collect();
            let body = serde_json::json!({ "vectors": vectors }).to_string();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                body.len(),
                body
            )
            .unwrap();
        }
    });
    url
}

#[test]
fn cache_fill_then_offline_assessment() {
    let url = mock_embedding_server();
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("emb.cache");
    let o = tca(&[
        "cache", "fill", "--cache", p(&cache), "--provider", &format!("remote:{}", url), "--pairs",
        p(&golden("pairs.json")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("newly embedded"));
    let o = tca(&["cache", "verify", "--cache", p(&cache)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 corrupt"));

    let (r, s) = assess_args("p5");
    let offline = tca(&["assess", "--receiving", p(&r), "--sending", p(&s), "--provider", "cache", "--cache", p(&cache)]);
    assert_eq!(offline.status.code(), Some(0), "{}", stderr(&offline));
    let test = tca(&["assess", "--receiving", p(&r), "--sending", p(&s)]);
    let a: Value = serde_json::from_str(&stdout(&offline)).unwrap();
    let b: Value = serde_json::from_str(&stdout(&test)).unwrap();
    assert_eq!(a["semantic_grid"], b["semantic_grid"]);
    assert_eq!(a["provider"], "remote");

    // damage one record
    let text = std::fs::read_to_string(&cache).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[2] = lines[2].replacen('\t', "\t9", 1);
    std::fs::write(&cache, lines.join("\n") + "\n").unwrap();
    let o = tca(&["cache", "verify", "--cache", p(&cache)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("line 3"));
    let o = tca(&["assess", "--receiving", p(&r), "--sending", p(&s), "--provider", "cache", "--cache", p(&cache)]);
    assert_eq!(o.status.code(), Some(2));
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut s = std::net::TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(s, "GET {} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n", path).ok()?;
    let mut out = String::new();
    s.read_to_string(&mut out).ok()?;
    Some(out)
}

#[test]
fn serve_answers_health_once_loaded() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_tca"))
        .args(["serve", "--port", &port.to_string()])
        .current_dir(root())
        .env_remove("TCA_PROVIDER_URL")
        .env("RUST_LOG", "error")
        .spawn()
        .unwrap();
    let mut last = None;
    for _ in 0..300 {
        std::thread::sleep(std::time::Duration::from_millis(100));
        last = http_get(port, "/health");
        if last.as_deref().is_some_and(|r| r.starts_with("HTTP/1.1 200")) {
            break;
        }
    }
    child.kill().unwrap();
    child.wait().unwrap();
    let resp = last.expect("server never answered");
    assert!(resp.starts_with("HTTP/1.1 200"), "{}", resp);
    assert!(resp.ends_with("{\"provider_kind\":\"test\",\"status\":\"ok\",\"wordnet_loaded\":true}"), "{}", resp);
}
