//! One module per subcommand plus the shared plumbing: failure kinds mapped
//! to exit codes, parameter validation, name tables and the artifact
//! envelope every JSON output carries.

pub mod crosscheck;
pub mod evolve;
pub mod resolvent;
pub mod riesz;
pub mod spectrum;
pub mod theta;
pub mod weyl;

use std::path::Path;

use guide_spectra::params::Params;
use guide_spectra::spectrum::{BranchTag, StripTag};
use guide_spectra::Regime;

use crate::json::Value;

/// Usage failures exit 2, numerical ones exit 1.
pub enum Failure {
    Usage(String),
    Numerical(String),
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn numerical(e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(e.to_string())
}

/// Parameter validation is a usage concern: the message names the violated
/// constraint and the exit code is 2.
pub fn validated(a: f64, b: f64, ell: f64) -> Result<Params<f64>, Failure> {
    Params::new(a, b, ell).map_err(|e| Failure::Usage(e.to_string()))
}

pub fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Decoupled => "decoupled",
        Regime::NeumannPlusDamped => "neumann-plus-damped",
        Regime::RealDistinct => "real-distinct",
        Regime::Degenerate => "degenerate",
        Regime::ComplexPair => "complex-pair",
    }
}

pub fn branch_name(t: BranchTag) -> &'static str {
    match t {
        BranchTag::Minus => "minus",
        BranchTag::Plus => "plus",
        BranchTag::Decoupled => "decoupled",
    }
}

pub fn strip_name(t: StripTag) -> String {
    match t {
        StripTag::Strip(n) => format!("strip-{n}"),
        StripTag::LineRe(n) => format!("line-{n}"),
        StripTag::LowFrequency => "axis".to_string(),
    }
}

pub fn envelope(command: &str, config: Vec<(&'static str, Value)>, results: Value) -> Value {
    Value::Obj(vec![
        ("artifact_version", Value::Int(1)),
        ("command", Value::Str(command.to_string())),
        ("config", Value::Obj(config)),
        ("results", results),
    ])
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Numerical(format!("writing {}: {e}", path.display())))
}
