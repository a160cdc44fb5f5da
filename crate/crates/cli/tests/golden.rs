// SPDX-License-Identifier: Apache-2.0

//! Preset runs through the binary, compared byte for byte with committed
//! outputs. Set `POLARCHAN_UPDATE_GOLDEN=1` to regenerate them.

use std::path::{Path, PathBuf};
use std::process::Command;

use polarchan_cli::Table;

fn tests_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn configs() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(tests_dir().join("configs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "conf"))
        .collect();
    v.sort();
    v
}

fn mode_of(config: &Path) -> String {
    let text = std::fs::read_to_string(config).unwrap();
    polarchan_cli::parse_config(&text).unwrap().mode.to_string()
}

fn run_binary(config: &Path, jobs: usize) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_polarchan"))
        .arg(mode_of(config))
        .arg("--config")
        .arg(config)
        .arg("--jobs")
        .arg(jobs.to_string())
        .env_remove("POLARCHAN_SEED")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn preset_outputs_match_golden_files() {
    let update = std::env::var_os("POLARCHAN_UPDATE_GOLDEN").is_some();
    for config in configs() {
        let name = config.file_stem().unwrap().to_str().unwrap().to_string();
        let golden_path = tests_dir().join("golden").join(format!("{name}.csv"));
        let serial = run_binary(&config, 1);
        let parallel = run_binary(&config, 4);
        assert_eq!(serial, parallel, "{name}: output depends on --jobs");
        if update {
            std::fs::write(&golden_path, &serial).unwrap();
        }
        let golden = std::fs::read_to_string(&golden_path)
            .unwrap_or_else(|e| panic!("{}: {e}", golden_path.display()));
        assert_eq!(serial, golden, "{name}");

        let table = Table::from_csv(&golden).unwrap();
        assert_eq!(table.to_csv(), golden, "{name}: CSV does not round-trip");
        assert!(!golden.contains('\r'));
        assert!(!golden.contains("-0.000000000000,") && !golden.contains("-0.000000,"));
    }
}

#[test]
fn out_flag_writes_file_and_seed_flag_overrides() {
    let dir = std::env::temp_dir().join(format!("polarchan-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("tomo.csv");
    let config = tests_dir().join("configs/fig1_tomo.conf");
    let status = Command::new(env!("CARGO_BIN_EXE_polarchan"))
        .args(["tomo", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_path)
        .args(["--seed", "7"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("# seed=7\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn environment_seed_is_the_default() {
    let dir = std::env::temp_dir().join(format!("polarchan-env-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("tomo.conf");
    std::fs::write(&config, "mode = tomo\npreset = lyot\nshots = 100\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polarchan"))
        .args(["tomo", "--config"])
        .arg(&config)
        .env("POLARCHAN_SEED", "123")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("# seed=123\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("polarchan-exit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "mode = sweep\npreset = fig1\ntheta2_step = 0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polarchan"))
        .args(["sweep", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 3: degenerate range"), "{stderr}");

    let good = tests_dir().join("configs/region.conf");
    let out = Command::new(env!("CARGO_BIN_EXE_polarchan"))
        .args(["region", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(dir.join("missing-dir/out.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_polarchan"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let help = String::from_utf8(out.stdout).unwrap();
    for word in [
        "simulate",
        "sweep",
        "tomo",
        "feasibility",
        "region",
        "fig1",
        "lyot",
        "two_crystal",
        "rotated_crystals",
    ] {
        assert!(help.contains(word), "{word}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
