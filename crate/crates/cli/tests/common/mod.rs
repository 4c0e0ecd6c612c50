#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

pub const LFREE: &str = env!("CARGO_BIN_EXE_lfree");

/// The protocol stub lives in the core package; it is normally built next to
/// `lfree` by a workspace test run, otherwise build it on demand.
pub fn stub_path() -> &'static Path {
    static STUB: OnceLock<PathBuf> = OnceLock::new();
    STUB.get_or_init(|| {
        let dir = Path::new(LFREE).parent().unwrap();
        let stub = dir.join(format!("lfree-stub-sampler{}", std::env::consts::EXE_SUFFIX));
        if !stub.exists() {
            let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
            let mut cmd = Command::new(cargo);
            cmd.args(["build", "-p", "lfree-core", "--bin", "lfree-stub-sampler"])
                .current_dir(env!("CARGO_MANIFEST_DIR"));
            if dir.ends_with("release") {
                cmd.arg("--release");
            }
            assert!(cmd.status().unwrap().success(), "building the stub sampler failed");
        }
        stub
    })
}

/// `--external` value for the stub in the given mode.
pub fn stub_cmd(args: &str) -> String {
    format!("'{}' {args}", stub_path().display())
}

pub fn lfree(args: &[&str]) -> Output {
    Command::new(LFREE).args(args).output().unwrap()
}

pub fn lfree_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    Command::new(LFREE).args(args).envs(env.iter().copied()).output().unwrap()
}

/// Runs `lfree` and parses its JSON report, panicking with stderr on failure.
pub fn lfree_json(args: &[&str]) -> Value {
    let out = lfree(args);
    assert!(
        out.status.success(),
        "lfree {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

pub struct Fixtures {
    pub dir: tempfile::TempDir,
}

impl Fixtures {
    pub fn new() -> Self {
        Fixtures {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    pub fn write(&self, name: &str, contents: &str) -> String {
        let p = self.dir.path().join(name);
        std::fs::write(&p, contents).unwrap();
        p.display().to_string()
    }

    pub fn pmf(&self, name: &str, outcomes: &[&[u32]], probs: &[f64]) -> String {
        let v = serde_json::json!({"outcomes": outcomes, "probs": probs});
        self.write(name, &v.to_string())
    }

    pub fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

fn read_schema(name: &str) -> Value {
    let text = std::fs::read_to_string(schema_dir().join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Validates `instance` against `docs/schemas/<command>.schema.json`.
pub fn assert_matches_schema(command: &str, instance: &Value) {
    let common = read_schema("common.schema.json");
    let id = common["$id"].as_str().unwrap().to_string();
    let registry = jsonschema::Registry::new().add(id, common).unwrap().prepare().unwrap();
    let schema = read_schema(&format!("{command}.schema.json"));
    let validator = jsonschema::options().with_registry(&registry).build(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{command} output violates schema: {errors:?}\n{instance}");
}

/// Total variation between two pmfs given as outcome → probability maps.
pub fn tv<K: Ord>(p: &std::collections::BTreeMap<K, f64>, q: &std::collections::BTreeMap<K, f64>) -> f64 {
    let mut keys: Vec<&K> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}
