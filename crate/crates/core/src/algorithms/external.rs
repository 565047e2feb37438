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

//! Adapter for detectors run as shell commands.

use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::{AlgorithmSpec, ParamSet, RunError};
use crate::graph::{load_cover, write_cover, write_graph, Cover, Graph};

const POLL: Duration = Duration::from_millis(5);

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// Expands `{input}`, `{output}`, `{seed}` and `{<param>}` placeholders.
pub fn expand_template(template: &str, input: &Path, output: &Path, seed: u64, params: &ParamSet) -> String {
    let mut cmd = template
        .replace("{input}", &shell_quote(&input.to_string_lossy()))
        .replace("{output}", &shell_quote(&output.to_string_lossy()))
        .replace("{seed}", &seed.to_string());
    for (name, value) in params {
        cmd = cmd.replace(&format!("{{{name}}}"), &value.to_string());
    }
    cmd
}

/// Runs an external detector in `workdir`. The graph is written to
/// `input.edges`; a planted cover, when given, to `input.edges.gt`. The
/// command must leave a cover file at `{output}` before its timeout.
pub fn run_external(
    spec: &AlgorithmSpec,
    graph: &Graph,
    params: &ParamSet,
    workdir: &Path,
    seed: u64,
    ground_truth: Option<&Cover>,
) -> Result<Cover, RunError> {
    fs::create_dir_all(workdir)?;
    let input = workdir.join("input.edges");
    let output = workdir.join("output.cover");
    let errlog = workdir.join("stderr.log");
    fs::write(&input, write_graph(graph))?;
    let sidecar = workdir.join("input.edges.gt");
    match ground_truth {
        Some(gt) => fs::write(&sidecar, write_cover(gt))?,
        None => {
            let _ = fs::remove_file(&sidecar);
        }
    }
    let _ = fs::remove_file(&output);

    let cmd = expand_template(&spec.command_template, &input, &output, seed, params);
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .current_dir(workdir)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(fs::File::create(&errlog)?)
        .spawn()?;
    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() >= spec.timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(RunError::Timeout(spec.timeout));
        }
        thread::sleep(POLL);
    };
    if !status.success() {
        let stderr = fs::read_to_string(&errlog).unwrap_or_default();
        let tail: String = stderr.lines().rev().take(3).collect::<Vec<_>>().join(" | ");
        return Err(RunError::ExternalFailed(format!("{status}: {tail}")));
    }
    let bytes = fs::read(&output).map_err(|e| RunError::BadOutput(format!("no output file: {e}")))?;
    load_cover(&bytes, graph.node_count()).map_err(|e| RunError::BadOutput(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::super::CategoryFlags;
    use super::*;

    fn spec(template: &str, timeout_ms: u64) -> AlgorithmSpec {
        AlgorithmSpec::external(
            "ext",
            template,
            Duration::from_millis(timeout_ms),
            CategoryFlags::default(),
        )
    }

    fn graph() -> Graph {
        Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn identity_adapter_returns_ground_truth() {
        let dir = tempfile::tempdir().unwrap();
        let gt = Cover::new(4, vec![vec![0, 1], vec![1, 2, 3]]).unwrap();
        let s = spec("cp {input}.gt {output}", 5000);
        let c = run_external(&s, &graph(), &ParamSet::new(), dir.path(), 1, Some(&gt)).unwrap();
        assert!(c.same_as(&gt));
    }

    #[test]
    fn sleeping_command_times_out() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec("sleep 5; cp {input}.gt {output}", 100);
        let start = Instant::now();
        let r = run_external(&s, &graph(), &ParamSet::new(), dir.path(), 1, None);
        assert!(matches!(r, Err(RunError::Timeout(_))));
        assert!(start.elapsed() < Duration::from_secs(3));
    }

    #[test]
    fn out_of_range_output_fails_with_diagnostic() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec("printf '0 1\\n2 9\\n' > {output}", 5000);
        match run_external(&s, &graph(), &ParamSet::new(), dir.path(), 1, None) {
            Err(RunError::BadOutput(msg)) => assert!(msg.contains('9'), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonzero_exit_fails() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec("echo broken >&2; exit 3 # {input} {output}", 5000);
        match run_external(&s, &graph(), &ParamSet::new(), dir.path(), 1, None) {
            Err(RunError::ExternalFailed(msg)) => assert!(msg.contains("broken")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn placeholders_expand() {
        let p: ParamSet = [("k".to_string(), 3.0)].into_iter().collect();
        let cmd = expand_template(
            "run -k {k} -s {seed} {input} {output}",
            Path::new("/a b/in"),
            Path::new("/o"),
            9,
            &p,
        );
        assert_eq!(cmd, "run -k 3 -s 9 '/a b/in' '/o'");
    }
}
