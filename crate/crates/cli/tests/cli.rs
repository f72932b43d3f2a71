#[path = "../../core/tests/support/fake_server.rs"]
mod fake_server;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fake_server::FakeServer;

const BIN: &str = env!("CARGO_BIN_EXE_lyrecon");

fn lyrecon(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("LYRECON_API_KEY")
        .env_remove("RUST_LOG")
        .output()
        .expect("run lyrecon")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn joined(tracks: usize) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let o = lyrecon(
        &root,
        &[
            "fixture",
            "--out-dir",
            "in",
            "--tracks",
            &tracks.to_string(),
            "--seed",
            "5",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = lyrecon(
        &root,
        &[
            "join",
            "--bow",
            "in/bow.txt",
            "--mood",
            "in/mood.csv",
            "--genre",
            "in/genre.tsv",
            "--meta",
            "in/meta.csv",
            "--mood-table",
            "in/mood_table.txt",
            "--out",
            "records.jsonl",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(&format!("joined: {tracks}\n")));
    (dir, root)
}

#[test]
fn every_command_has_help() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["join", "reconstruct", "evaluate", "report", "fixture"] {
        let o = lyrecon(dir.path(), &[cmd, "--help"]);
        assert!(o.status.success(), "{cmd}");
        assert!(stdout(&o).contains("Usage: lyrecon"), "{cmd}");
    }
}

#[test]
fn join_exit_codes() {
    let (_d, root) = joined(10);
    let o = lyrecon(
        &root,
        &[
            "fixture",
            "--out-dir",
            "other",
            "--tracks",
            "10",
            "--seed",
            "6",
        ],
    );
    assert!(o.status.success());

    let disjoint = lyrecon(
        &root,
        &[
            "join",
            "--bow",
            "in/bow.txt",
            "--mood",
            "other/mood.csv",
            "--genre",
            "in/genre.tsv",
            "--meta",
            "in/meta.csv",
            "--out",
            "none.jsonl",
        ],
    );
    assert_eq!(disjoint.status.code(), Some(3));
    assert!(!root.join("none.jsonl").exists());

    std::fs::write(
        root.join("bad.csv"),
        "track_id,valence,arousal\nTRX,0.1,0.2\nTRY,oops,0.3\n",
    )
    .unwrap();
    let bad = lyrecon(
        &root,
        &[
            "join",
            "--bow",
            "in/bow.txt",
            "--mood",
            "bad.csv",
            "--genre",
            "in/genre.tsv",
            "--meta",
            "in/meta.csv",
            "--out",
            "none.jsonl",
        ],
    );
    assert_eq!(bad.status.code(), Some(2));
    let err = stderr(&bad);
    assert!(err.contains("bad.csv") && err.contains("line 3"), "{err}");
}

#[test]
fn live_backend_without_key_leaves_nothing_behind() {
    let (_d, root) = joined(5);
    let o = lyrecon(
        &root,
        &[
            "reconstruct",
            "--backend",
            "live",
            "--records",
            "records.jsonl",
            "--out",
            "out/c.jsonl",
            "--cache-dir",
            "cache",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("LYRECON_API_KEY"));
    assert!(!root.join("out").exists());
    assert!(!root.join("cache").exists());
    assert!(!root.join("out/c.jsonl.manifest.jsonl").exists());
}

fn live(root: &Path, server: &FakeServer, out: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "reconstruct",
        "--backend",
        "live",
        "--endpoint",
        &server.url,
        "--model",
        "fake",
        "--records",
        "records.jsonl",
        "--out",
        out,
        "--max-attempts",
        "1",
    ];
    args.extend_from_slice(extra);
    Command::new(BIN)
        .args(&args)
        .current_dir(root)
        .env("LYRECON_API_KEY", "test-key")
        .output()
        .unwrap()
}

#[test]
fn live_backend_failures_exit_4_and_rerun_recovers() {
    let (_d, root) = joined(6);
    let server = FakeServer::start();
    server.script(&[400, 400]);
    let o = live(&root, &server, "c.jsonl", &["--max-in-flight", "1"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stdout(&o).contains("failed: 2\n"));
    assert_eq!(
        std::fs::read_to_string(root.join("c.jsonl"))
            .unwrap()
            .lines()
            .count(),
        4
    );

    let o = live(&root, &server, "c.jsonl", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(server.counters.calls(), 8);
    assert_eq!(
        std::fs::read_to_string(root.join("c.jsonl"))
            .unwrap()
            .lines()
            .count(),
        6
    );
}

#[test]
fn config_file_sets_backend_options() {
    let (_d, root) = joined(4);
    let server = FakeServer::start();
    server.set_delay(30);
    std::fs::write(
        root.join("lyrecon.toml"),
        "[backend]\nmax_in_flight = 1\n[backend.retry]\nmax_attempts = 2\nbase_backoff_secs = 0.0\n[prompt]\nmax_vocabulary_words = 3\n",
    )
    .unwrap();
    let o = live(&root, &server, "c.jsonl", &["--config", "lyrecon.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(server.counters.peak(), 1);

    std::fs::write(root.join("broken.toml"), "[backend]\nmax_in_flite = 1\n").unwrap();
    let o = live(&root, &server, "d.jsonl", &["--config", "broken.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("broken.toml"));
}

#[test]
fn evaluate_and_report() {
    let (_d, root) = joined(8);
    let o = lyrecon(
        &root,
        &[
            "reconstruct",
            "--records",
            "records.jsonl",
            "--out",
            "c.jsonl",
        ],
    );
    assert!(o.status.success());
    let o = lyrecon(
        &root,
        &[
            "evaluate",
            "--corpus",
            "c.jsonl",
            "--abstract-lexicon",
            "in/abstract.txt",
            "--concrete-lexicon",
            "in/concrete.txt",
            "--out-dir",
            "e",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("Total Count of Lyrics Sets"));
    assert!(root.join("e/stats.tsv").is_file() && !root.join("e/report.tsv").exists());

    let o = lyrecon(
        &root,
        &[
            "report",
            "--left",
            "e/stats.tsv",
            "--right",
            "e/stats.tsv",
            "--out-dir",
            "r",
            "--left-label",
            "Ours",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("Item"));
    assert!(stdout(&o).contains("Ours"));

    std::fs::write(
        root.join("bad.jsonl"),
        "{\"track_id\":\"A\",\"lyrics\":\"x\"}\nnot json\n",
    )
    .unwrap();
    let o = lyrecon(
        &root,
        &[
            "evaluate",
            "--corpus",
            "bad.jsonl",
            "--abstract-lexicon",
            "in/abstract.txt",
            "--concrete-lexicon",
            "in/concrete.txt",
            "--out-dir",
            "e2",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
}
