use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lpbk::spectral::{GridSpec, Preset};
use lpbk_cli::input::encode_binary;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn lpbk(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpbk"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("job.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map(|d| {
            d.map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
                .collect()
        })
        .unwrap_or_default();
    names.sort();
    names
}

#[test]
fn fixture_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for (name, code, written) in [
        ("success.json", 0, vec!["verify_lq_monotone.json"]),
        (
            "broken_partition.json",
            1,
            vec![
                "verify_partition_validity.json",
                "verify_reconstruction.json",
            ],
        ),
        ("config_error.json", 2, vec![]),
    ] {
        let out = dir.path().join(name);
        let run = lpbk(&fixture(name), &out, &[]);
        assert_eq!(
            run.status.code(),
            Some(code),
            "{name}: {}",
            String::from_utf8_lossy(&run.stderr)
        );
        assert_eq!(files(&out), written, "{name}");
    }
}

#[test]
fn config_error_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let run = lpbk(&fixture("config_error.json"), dir.path(), &[]);
    assert!(String::from_utf8_lossy(&run.stderr).contains("command"));
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    let run = Command::new(env!("CARGO_BIN_EXE_lpbk")).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_config(
        dir.path(),
        r#"{"command":"verify","family":{"count":6},"checks":["bf_sandwich","fs_maximal"]}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(lpbk(&job, &a, &["--threads", "1"]).status.code(), Some(0));
    let run = Command::new(env!("CARGO_BIN_EXE_lpbk"))
        .args([
            "--config",
            job.to_str().unwrap(),
            "--out",
            b.to_str().unwrap(),
        ])
        .env("LPBK_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    for name in files(&a) {
        assert_eq!(
            std::fs::read(a.join(&name)).unwrap(),
            std::fs::read(b.join(&name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn seed_override_changes_random_input() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_config(
        dir.path(),
        r#"{"command":"norm","preset":"random_bandlimited","seed":1,
            "spaces":[{"s":0,"p":2,"q":2,"kind":"besov_homog"}]}"#,
    );
    let read = |out: &Path| -> Value {
        serde_json::from_slice(&std::fs::read(out.join("norm.json")).unwrap()).unwrap()
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    lpbk(&job, &a, &[]);
    lpbk(&job, &b, &["--seed", "2"]);
    assert_eq!(read(&a)["source"]["params"]["seed"], 1.0);
    assert_eq!(read(&b)["source"]["params"]["seed"], 2.0);
    assert_ne!(read(&a)["norms"], read(&b)["norms"]);
}

#[test]
fn sample_files_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::unit_circle(64).unwrap();
    let f = Preset::RandomBandlimited {
        seed: 4,
        band_lo: 1.0,
        band_hi: 20.0,
    }
    .sample(&grid)
    .unwrap();
    std::fs::write(dir.path().join("f.bin"), encode_binary(&f)).unwrap();
    let csv: String = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{i},{:.17e},{:.17e}\n", v.re, v.im))
        .collect();
    std::fs::write(dir.path().join("f.csv"), csv).unwrap();

    let mut outputs = Vec::new();
    for sample in ["f.bin", "f.csv"] {
        let job = write_config(
            dir.path(),
            &format!(
                r#"{{"command":"norm","grid":{{"n":64}},"sample":"{}",
                    "spaces":[{{"s":0.5,"p":2,"q":2,"kind":"besov_nonhomog"}}],"output":{{"format":"csv"}}}}"#,
                dir.path().join(sample).display()
            ),
        );
        let out = dir.path().join(format!("out_{sample}"));
        assert_eq!(lpbk(&job, &out, &[]).status.code(), Some(0));
        outputs.push(std::fs::read_to_string(out.join("norm.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn unreadable_sample_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_config(
        dir.path(),
        r#"{"command":"op","sample":"/nonexistent/f.bin","op":{"name":"heat","t":0.1}}"#,
    );
    let run = lpbk(&job, &dir.path().join("out"), &[]);
    assert_eq!(run.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let run = lpbk(&fixture("success.json"), &blocker.join("out"), &[]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn bands_csv_is_flat_on_weierstrass() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_config(
        dir.path(),
        r#"{"command":"bands","preset":"weierstrass","params":{"s":0.5},
            "spaces":[{"s":0.5,"p":"inf","q":"inf","kind":"besov_homog"}],
            "partition":{"dump":true},"output":{"format":"csv"}}"#,
    );
    assert_eq!(lpbk(&job, dir.path(), &[]).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("space,j,weighted_norm"));
    let inner: Vec<f64> = text
        .lines()
        .skip(1)
        .filter_map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            let j: i32 = c[1].parse().ok()?;
            (0..=6).contains(&j).then(|| c[2].parse().unwrap())
        })
        .collect();
    assert_eq!(inner.len(), 7);
    assert!(inner.iter().all(|t| (t - 1.0).abs() < 1e-10), "{inner:?}");
    assert!(dir.path().join("partition.csv").exists());
}

#[test]
fn schema_lists_the_accepted_keys() {
    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/job.schema.json"),
        )
        .unwrap(),
    )
    .unwrap();
    let props = schema["properties"].as_object().unwrap();
    let full = r#"{"command":"report","grid":{"dim":1,"n":64,"period":1},"preset":"gaussian","params":{},
        "spaces":[{"s":0,"p":2,"q":2,"kind":"tl_homog"}],"checks":["l2_corridor"],
        "family":{"generator":"harmonics","count":1,"params":{}},
        "partition":{"profile":"exp","zero_bands":[],"dump":false},"seed":0,
        "output":{"name":"r","format":"json"}}"#;
    let doc: Value = serde_json::from_str(full).unwrap();
    assert!(lpbk_cli::parse_config(full).is_ok());
    for key in doc.as_object().unwrap().keys() {
        assert!(props.contains_key(key), "{key}");
    }
    let mut keys: Vec<&String> = props.keys().collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "checks",
            "command",
            "family",
            "grid",
            "op",
            "output",
            "params",
            "partition",
            "preset",
            "sample",
            "seed",
            "spaces"
        ]
    );
    let ids: Vec<&str> = props["checks"]["items"]["oneOf"][0]["enum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(ids, lpbk::verify::CATALOG);
}
