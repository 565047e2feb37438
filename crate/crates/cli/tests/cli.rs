// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Exit codes and setting resolution of the command-line tool.

use std::fs;
use std::process::Command;

fn asnkit() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_asnkit"));
    c.env_remove("ASNKIT_RUN_SEED").env("ASNKIT_LOG", "error");
    c
}

#[test]
fn prints_the_registry() {
    let out = asnkit().arg("print-registry").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("id\tkind\t"));
    assert!(text.lines().any(|l| l.starts_with("gt_clone\texternal")));
}

#[test]
fn bad_settings_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = asnkit()
        .args(["gen-bench", "--repeats", "zero", "-o"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("repeats"));

    let ini = dir.path().join("bad.ini");
    fs::write(&ini, "[benchmark]\nsizez = 50\n").unwrap();
    let out = asnkit().args(["gen-bench", "-c"]).arg(&ini).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = asnkit()
        .args(["gen-bench", "-o"])
        .arg(dir.path())
        .env("ASNKIT_RUN_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stage_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = asnkit()
        .args(["gen-bench", "--sizes", "", "--real-dir"])
        .arg(dir.path().join("missing"))
        .arg("-o")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("out/manifest.json").is_file());
}

#[test]
fn flags_override_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let ini = dir.path().join("run.ini");
    fs::write(
        &ini,
        "[benchmark]\nsizes = 50\nmus = 0.07\nrepeats = 3\nmodes = disjoint\n[run]\nseed = 5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = asnkit()
        .args(["gen-bench", "-c"])
        .arg(&ini)
        .args(["--repeats", "2", "-o"])
        .arg(&out_dir)
        .env("ASNKIT_RUN_SEED", "9")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("networks: 2"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    let config = manifest["config"].to_string();
    assert!(config.contains("\"run.seed\":\"9\""), "{config}");
    assert!(config.contains("\"benchmark.repeats\":\"2\""), "{config}");
}
