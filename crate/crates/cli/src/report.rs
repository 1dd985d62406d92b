use std::fs;
use std::path::Path;

use ordwalk_core::suite::{digest, Outcome};
use ordwalk_core::Error;
use serde_json::{json, Map, Value};

pub const EXIT_INPUT: i32 = 3;

/// Per-invocation state: global flags and every byte read from input files.
pub struct Ctx {
    pub seed: u64,
    pub fuel: u64,
    inputs: Vec<Vec<u8>>,
}

impl Ctx {
    pub fn new(seed: u64, fuel: u64, args: &[String]) -> Self {
        Ctx { seed, fuel, inputs: args.iter().map(|a| a.as_bytes().to_vec()).collect() }
    }

    pub fn read_json(&mut self, path: &Path) -> Result<Value, Error> {
        let bytes = fs::read(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        let v = serde_json::from_slice(&bytes).map_err(|e| Error::invalid(format!("{} is not valid JSON: {e}", path.display())))?;
        self.inputs.push(bytes);
        Ok(v)
    }

    pub fn digest(&self) -> String {
        digest(self.inputs.iter().map(Vec::as_slice))
    }
}

/// What a command computed, before the common envelope is added.
pub struct Report {
    pub outcome: Outcome,
    pub result: Value,
    pub witnesses: Vec<Value>,
    pub text: String,
    /// Overrides the exit code implied by the outcome.
    pub exit_code: Option<i32>,
}

impl Report {
    pub fn pass(result: Value, text: impl Into<String>) -> Self {
        Report { outcome: Outcome::Pass, result, witnesses: vec![], text: text.into(), exit_code: None }
    }

    pub fn with(outcome: Outcome, result: Value, witnesses: Vec<Value>, text: impl Into<String>) -> Self {
        Report { outcome, result, witnesses, text: text.into(), exit_code: None }
    }

    pub fn exit_code(&self) -> i32 {
        self.exit_code.unwrap_or_else(|| self.outcome.exit_code())
    }
}

/// Library errors become reports: violated properties exit 1, spent fuel 2, bad input 3.
pub fn from_error(e: &Error) -> (i32, Value) {
    match e {
        Error::Incoherent { tuple, detail } => (1, json!({"tuple": tuple.iter().map(|x| x.to_string()).collect::<Vec<_>>(), "detail": detail})),
        Error::NotExact(block) => (1, json!({"located": block})),
        Error::FuelExhausted(n) => (2, json!({"fuel_spent": n})),
        other => (EXIT_INPUT, json!({"error": other.to_string()})),
    }
}

pub fn envelope(command: &str, ctx: &Ctx, body: Map<String, Value>) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(ctx.seed));
    m.insert("fuel".into(), json!(ctx.fuel));
    m.insert("inputs_digest".into(), json!(ctx.digest()));
    m.extend(body);
    Value::Object(m)
}
