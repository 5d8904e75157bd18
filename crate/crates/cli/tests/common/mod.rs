#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn sample(name: &str) -> PathBuf {
    workspace_root().join("samples").join(name)
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Sample documents with the device each is analysed on.
pub const CORPUS: [(&str, &str); 5] = [
    ("checkout.json", "iphone-16"),
    ("editor-toolbar.json", "iphone-se-3"),
    ("login.json", "iphone-15"),
    ("settings.json", "iphone-14"),
    ("single-button.json", "iphone-16"),
];

pub const FORMATS: [(&str, &str); 3] = [("text", "txt"), ("json", "json"), ("csv", "csv")];

pub fn tappy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tappy"))
        .args(args)
        .env_remove("TAPPY_DEVICES")
        .output()
        .expect("tappy runs")
}

pub fn tappy_env(args: &[&str], key: &str, value: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tappy"))
        .args(args)
        .env(key, value)
        .output()
        .expect("tappy runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// `tappy analyze <sample> --device <id> --format <fmt> --reproducible`
pub fn analyze_reproducible(file: &str, device: &str, format: &str) -> Output {
    let path = sample(file);
    tappy(&[
        "analyze",
        path.to_str().unwrap(),
        "--device",
        device,
        "--format",
        format,
        "--reproducible",
    ])
}

pub fn golden_path(file: &str, ext: &str) -> PathBuf {
    golden_dir().join(format!("{}.{ext}", file.trim_end_matches(".json")))
}
