use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lanecode::corpus::{self, CorpusSpec, ScriptClass};
use lanecode::{endian, EngineKind, Transcoder};

fn lanecode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lanecode"))
        .args(args)
        .env_remove("LANECODE_ENGINE")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn transcode_valid_file_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    let out = dir.path().join("out.bin");
    let c = corpus::generate(&CorpusSpec::new(ScriptClass::Mixed, 5000, 2));
    fs::write(&input, &c.utf8).unwrap();
    for engine in ["scalar", "emulated:16", "emulated"] {
        let o = lanecode(&[
            "transcode",
            "--from",
            "utf8",
            "--to",
            "utf16le",
            "--engine",
            engine,
            "--in",
            p(&input),
            "--out",
            p(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let (_, words) = Transcoder::new(engine.parse::<EngineKind>().unwrap())
            .unwrap()
            .utf8_to_utf16_vec(&c.utf8);
        assert_eq!(fs::read(&out).unwrap(), endian::words_to_le_bytes(&words));
    }
}

#[test]
fn malformed_input_exits_one_with_offset_and_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.txt");
    let out = dir.path().join("out.bin");
    fs::write(&input, b"abc\xF5def").unwrap();
    let o = lanecode(&[
        "transcode",
        "--from",
        "utf8",
        "--to",
        "utf16le",
        "--in",
        p(&input),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("byte 3"), "{}", stderr(&o));
    assert_eq!(fs::read(&out).unwrap(), [b'a', 0, b'b', 0, b'c', 0]);

    let v = lanecode(&["validate", "--format", "utf8", "--in", p(&input)]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stderr(&v).contains("byte 3"));
}

#[test]
fn utf16be_round_trip_equals_swapped_le() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.txt");
    let le = dir.path().join("le.bin");
    let be = dir.path().join("be.bin");
    let back = dir.path().join("back.txt");
    let text = "x∇𝔓 ±1=𝒪 @§∈𝒪".repeat(40);
    fs::write(&src, &text).unwrap();
    assert!(lanecode(&[
        "transcode",
        "--from",
        "utf8",
        "--to",
        "utf16le",
        "--in",
        p(&src),
        "--out",
        p(&le)
    ])
    .status
    .success());
    assert!(lanecode(&[
        "transcode",
        "--from",
        "utf8",
        "--to",
        "utf16be",
        "--in",
        p(&src),
        "--out",
        p(&be)
    ])
    .status
    .success());
    let mut swapped = fs::read(&le).unwrap();
    swapped.chunks_mut(2).for_each(|c| c.swap(0, 1));
    assert_eq!(swapped, fs::read(&be).unwrap());
    assert!(lanecode(&[
        "transcode",
        "--from",
        "utf16be",
        "--to",
        "utf8",
        "--in",
        p(&be),
        "--out",
        p(&back)
    ])
    .status
    .success());
    assert_eq!(fs::read(&back).unwrap(), text.as_bytes());
}

#[test]
fn utf16_errors_report_word_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.bin");
    fs::write(
        &input,
        endian::words_to_le_bytes(&[0x41, 0x42, 0xDC00, 0x43]),
    )
    .unwrap();
    let o = lanecode(&["validate", "--format", "utf16le", "--in", p(&input)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("word 2"), "{}", stderr(&o));
    // an odd trailing byte is an incomplete word
    fs::write(&input, [0x41, 0x00, 0x42]).unwrap();
    let o = lanecode(&["validate", "--format", "utf16le", "--in", p(&input)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("word 1"));
}

#[test]
fn io_and_usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let out = dir.path().join("out");
    let o = lanecode(&["validate", "--format", "utf8", "--in", p(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    let o = lanecode(&[
        "transcode",
        "--from",
        "utf16le",
        "--to",
        "utf16be",
        "--in",
        p(&missing),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        lanecode(&["transcode", "--engine", "gpu"]).status.code(),
        Some(2)
    );
}

#[test]
fn generate_writes_requested_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.txt");
    let o = lanecode(&[
        "generate",
        "--class",
        "threebyte-heavy",
        "--size",
        "999",
        "--seed",
        "4",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success());
    assert_eq!(
        fs::read(&out).unwrap(),
        corpus::generate(&CorpusSpec::new(ScriptClass::ThreebyteHeavy, 999, 4)).utf8
    );
}

#[test]
fn engine_env_override_is_honored() {
    let o = Command::new(env!("CARGO_BIN_EXE_lanecode"))
        .arg("engines")
        .env("LANECODE_ENGINE", "scalar")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).contains("LANECODE_ENGINE=scalar"));
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "ok").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lanecode"))
        .args(["validate", "--format", "utf8", "--in", p(&input)])
        .env("LANECODE_ENGINE", "bogus")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_reports_json_and_checks_equality() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, b"").unwrap();
    let o = lanecode(&[
        "bench",
        "--in",
        p(&empty),
        "--iterations",
        "1",
        "--warmup",
        "0",
        "--engine",
        "scalar,emulated:64",
        "--no-pin",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let records: Vec<serde_json::Value> = stdout
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 2);
    for r in &records {
        assert_eq!(r["bytes_per_sec"], 0.0);
        assert!(r["min_ns"].as_u64() <= r["mean_ns"].as_u64());
        assert!(r["clock_resolution_ns"].as_u64().unwrap() > 0);
    }

    let report = dir.path().join("report.jsonl");
    let o = lanecode(&[
        "bench",
        "--in",
        "mixed:3000:1",
        "--iterations",
        "3",
        "--warmup",
        "1",
        "--engine",
        "scalar,emulated:8",
        "--report",
        p(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&report).unwrap().lines().count(), 4);
}

#[test]
fn difftest_is_deterministic_and_replays() {
    let a = lanecode(&["difftest", "--seed", "9", "--cases", "1"]);
    let b = lanecode(&["difftest", "--seed", "9", "--cases", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let o = lanecode(&[
        "difftest",
        "--seed",
        "1",
        "--cases",
        "150",
        "--max-len",
        "600",
        "--all-engines",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let repro = dir.path().join("r.txt");
    let r = lanecode::difftest::Repro {
        engine: EngineKind::Emulated(lanecode::LaneCount::N8),
        input: lanecode::difftest::CaseInput::Utf8(b"\xE2\x88".to_vec()),
        origin: None,
    };
    fs::write(&repro, r.to_text()).unwrap();
    let o = lanecode(&["difftest", "--replay", p(&repro)]);
    assert!(o.status.success(), "{}", stderr(&o));
}
