use std::path::Path;
use std::process::{Command, Output};

fn fracheat(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracheat")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn files(dir: &Path) -> Vec<String> {
    match std::fs::read_dir(dir) {
        Ok(rd) => {
            let mut v: Vec<String> = rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
            v.sort();
            v
        }
        Err(_) => Vec::new(),
    }
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "[grid]\nsize = \"large\"\n",
        "[grid]\nsize = 100\n",
        "[heat]\nalpha = 2.0\nr = 1\ns = 3.0\n",
        "[unknown]\nkey = 1\n",
        "this is not toml",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{i}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let out_dir = dir.path().join(format!("out{i}"));
        let o = fracheat(
            &["lipnorm", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out_dir.exists(), "case {i} left output behind");
        let err: serde_json::Value = serde_json::from_slice(&o.stderr).expect("structured error record");
        assert_eq!(err["error"]["exit_code"], 2);
        assert_eq!(err["error"]["kind"], "validation");
    }
    let o = fracheat(&["lipnorm", "--config", "missing.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernel_command_emits_poisson_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracheat(&["kernel", "--alpha", "1", "--n", "1", "--set", "kernel.decay_orders=[]"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &doc["results"]["values"][0];
    assert_eq!(row["x"].as_f64(), Some(0.0));
    assert!((row["value"].as_f64().unwrap() - std::f64::consts::FRAC_1_PI).abs() < 1e-10);
}

#[test]
fn output_is_deterministic_and_inputs_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let text = "seed = 11\n[grid]\nsize = 512\n[time]\noctaves = 5\nper_octave = 4\n\
                [function]\nfamily = \"random-decay\"\ns = 0.5\nseed = 3\n";
    std::fs::write(&cfg, text).unwrap();
    let mut docs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("o{run}"));
        let o = fracheat(
            &["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(files(&out), vec!["sweep.csv", "sweep.json"]);
        docs.push((std::fs::read(out.join("sweep.json")).unwrap(), std::fs::read(out.join("sweep.csv")).unwrap()));
    }
    assert_eq!(docs[0], docs[1]);
    assert_eq!(std::fs::read_to_string(&cfg).unwrap(), text);
    let json = String::from_utf8(docs[0].0.clone()).unwrap();
    assert!(json.contains("\"seed\":11"));
    assert!(json.contains("e-1") || json.contains("e0"), "floats use scientific notation");
}

#[test]
fn csv_function_source() {
    let dir = tempfile::tempdir().unwrap();
    let vals: Vec<String> = (0..64).map(|i| format!("{}", (i as f64 * 0.1).sin())).collect();
    std::fs::write(dir.path().join("f.csv"), vals.join("\n")).unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "[grid]\nsize = 64\n[time]\noctaves = 4\nper_octave = 4\n[function]\ncsv = \"f.csv\"\n",
    )
    .unwrap();
    let o = fracheat(&["lipnorm", "--config", "run.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["results"]["diff_seminorm"].as_f64().unwrap() > 0.0);
    std::fs::write(dir.path().join("short.toml"), "[grid]\nsize = 128\n[function]\ncsv = \"f.csv\"\n").unwrap();
    let o = fracheat(&["lipnorm", "--config", "short.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_reports_violations_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let small = ["--size", "256", "--set", "time.octaves=5", "--set", "time.per_octave=4"];
    let mut args = vec!["verify"];
    args.extend(small);
    let clean = fracheat(&args, dir.path());
    assert_eq!(clean.status.code(), Some(0), "{}", String::from_utf8_lossy(&clean.stderr));
    args.push("--inject-violation");
    let o = fracheat(&args, dir.path());
    assert_eq!(o.status.code(), Some(4));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["results"]["violations_found"], true);
}

#[test]
fn selftest_subset_and_bad_ids() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracheat(&["selftest", "--only", "1,9"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("criterion")).count(), 2);
    assert!(text.contains("2 of 2 criteria passed"));
    let o = fracheat(&["selftest", "--only", "13"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_rejects_parameters_outside_inclusion_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracheat(&["verify", "--alpha", "1", "--r", "1", "--size", "256"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
