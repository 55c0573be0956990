use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use serde::Serialize;

use crate::checks::{self, BasisChoice, Check, Context, SpectrumRow, Suite};
use crate::config::{ConfigError, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyAlgebra,
    VerifyFusion,
    Basis(BasisChoice),
    Spectrum,
    Baxter,
    Qop,
    All,
}

impl Command {
    pub fn label(self) -> String {
        match self {
            Command::VerifyAlgebra => "verify-algebra".into(),
            Command::VerifyFusion => "verify-fusion".into(),
            Command::Basis(kind) => format!("basis {}", kind.name()),
            Command::Spectrum => "spectrum".into(),
            Command::Baxter => "baxter".into(),
            Command::Qop => "qop".into(),
            Command::All => "all".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Library {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub suites: BTreeMap<String, f64>,
}

/// Everything except `timing` is a function of the configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub library: Library,
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<SpectrumRow>>,
    pub timing: Timing,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

type SuiteFn = Box<dyn Fn(&Context) -> Suite>;

fn plan(command: Command) -> Vec<(String, SuiteFn)> {
    let basis = |k: BasisChoice| -> (String, SuiteFn) { (format!("basis-{}", k.name()), Box::new(move |c| checks::basis(c, k))) };
    let algebra = || -> (String, SuiteFn) { ("algebra".into(), Box::new(checks::algebra)) };
    let fusion = || -> (String, SuiteFn) { ("fusion".into(), Box::new(checks::fusion)) };
    let spectrum = || -> (String, SuiteFn) { ("spectrum".into(), Box::new(checks::spectrum)) };
    let baxter = || -> (String, SuiteFn) { ("baxter".into(), Box::new(checks::baxter)) };
    let qop = || -> (String, SuiteFn) { ("qop".into(), Box::new(checks::qop)) };
    match command {
        Command::VerifyAlgebra => vec![algebra()],
        Command::VerifyFusion => vec![fusion()],
        Command::Basis(k) => vec![basis(k)],
        Command::Spectrum => vec![spectrum()],
        Command::Baxter => vec![baxter()],
        Command::Qop => vec![qop()],
        Command::All => vec![
            algebra(),
            fusion(),
            basis(BasisChoice::Sklyanin),
            basis(BasisChoice::Sov1),
            basis(BasisChoice::Sov2),
            basis(BasisChoice::Q),
            spectrum(),
            baxter(),
            qop(),
        ],
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "numerical routine aborted".into())
}

/// Runs the suites of `command`. Numerical failures, including panics inside
/// the library, become failed checks.
pub fn run(command: Command, config: &RunConfig) -> Result<Report, ConfigError> {
    let chain = config.chain.build()?;
    let ctx = Context { chain: &chain, samples: config.samples, seed: config.chain.seed };
    let start = Instant::now();
    let mut all_checks = Vec::new();
    let mut spectrum = None;
    let mut suites = BTreeMap::new();
    for (name, f) in plan(command) {
        let t0 = Instant::now();
        let suite = catch_unwind(AssertUnwindSafe(|| f(&ctx))).unwrap_or_else(|payload| {
            let mut s = Suite::new(name.clone());
            s.fail("suite", panic_message(payload));
            s
        });
        suites.insert(name, t0.elapsed().as_secs_f64());
        all_checks.extend(suite.checks);
        if suite.spectrum.is_some() {
            spectrum = suite.spectrum;
        }
    }
    let passed = all_checks.iter().filter(|c| c.pass).count();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        library: Library { name: "sovchain", version: sovchain::VERSION },
        command: command.label(),
        config: config.clone(),
        summary: Summary { total: all_checks.len(), passed, failed: all_checks.len() - passed },
        checks: all_checks,
        spectrum,
        timing: Timing { total_seconds: start.elapsed().as_secs_f64(), suites },
    })
}
