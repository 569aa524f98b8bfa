#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};
use std::time::Duration;

use serde_json::Value;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_histoscope"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn histoscope")
}

pub fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "histoscope {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Value of `key=...` in a line of `key=value` pairs.
pub fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

/// A running `histoscope serve` on an ephemeral port.
pub struct Server {
    child: Child,
    pub base: String,
    agent: ureq::Agent,
}

impl Server {
    pub fn start(config: &Path) -> Server {
        let mut child = bin()
            .args([
                "serve",
                "--config",
                config.to_str().unwrap(),
                "--bind",
                "127.0.0.1:0",
                "--log-level",
                "warn",
            ])
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .expect("spawn server");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected server output {line:?}"))
            .to_string();
        let agent = ureq::Agent::config_builder()
            .proxy(None)
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Server {
            child,
            base: format!("http://{addr}"),
            agent,
        }
    }

    pub fn agent(&self) -> ureq::Agent {
        self.agent.clone()
    }

    /// SIGKILL, no chance to flush anything.
    pub fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }

    pub fn get_json(&self, path: &str) -> Value {
        let mut res = self
            .agent
            .get(format!("{}{path}", self.base))
            .call()
            .unwrap();
        assert!(res.status().is_success(), "GET {path}: {}", res.status());
        res.body_mut().read_json().unwrap()
    }

    pub fn get_bytes(&self, path: &str) -> (String, Vec<u8>) {
        let mut res = self
            .agent
            .get(format!("{}{path}", self.base))
            .call()
            .unwrap();
        assert!(res.status().is_success(), "GET {path}: {}", res.status());
        let digest = res
            .headers()
            .get("x-content-digest")
            .map(|h| {
                h.to_str()
                    .unwrap()
                    .trim_start_matches("sha256=")
                    .to_string()
            })
            .unwrap_or_default();
        let body = res
            .body_mut()
            .with_config()
            .limit(1 << 30)
            .read_to_vec()
            .unwrap();
        (digest, body)
    }

    pub fn post(&self, path: &str, body: &Value) -> (u16, Value) {
        let mut res = self
            .agent
            .post(format!("{}{path}", self.base))
            .send_json(body)
            .unwrap();
        (res.status().as_u16(), res.body_mut().read_json().unwrap())
    }

    pub fn delete(&self, path: &str) -> (u16, Value) {
        let mut res = self
            .agent
            .delete(format!("{}{path}", self.base))
            .call()
            .unwrap();
        (res.status().as_u16(), res.body_mut().read_json().unwrap())
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
