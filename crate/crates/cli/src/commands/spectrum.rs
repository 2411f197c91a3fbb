use std::path::PathBuf;

use guide_spectra::spectrum::{compute_spectrum, spectral_gap, SpectrumError};

use super::{
    branch_name, envelope, numerical, regime_name, strip_name, usage, validated, write_file,
    Failure,
};
use crate::json::{render, Value};

#[derive(clap::Args)]
pub struct Args {
    /// Boundary coupling diagonal entry
    #[arg(long)]
    a: f64,
    /// Boundary coupling off-diagonal entry
    #[arg(long)]
    b: f64,
    /// Interval length
    #[arg(long)]
    ell: f64,
    /// Largest strip index searched
    #[arg(long, default_value_t = 40)]
    n_max: u32,
    /// Output JSON path
    #[arg(long, default_value = "spectrum.json")]
    out: PathBuf,
}

pub fn run(args: &Args) -> Result<(), Failure> {
    if args.n_max < 5 {
        return Err(usage("--n-max must be at least 5"));
    }
    let p = validated(args.a, args.b, args.ell)?;
    let s = compute_spectrum(&p, args.n_max).map_err(numerical)?;

    let eigenvalues: Vec<Value> = s
        .eigenvalues
        .iter()
        .map(|ev| {
            Value::Obj(vec![
                ("re_lambda", Value::Num(ev.lambda.re)),
                ("im_lambda", Value::Num(ev.lambda.im)),
                ("re_z", Value::Num(ev.z.re)),
                ("im_z", Value::Num(ev.z.im)),
                ("branch", Value::Str(branch_name(ev.branch).to_string())),
                ("strip", Value::Str(strip_name(ev.strip))),
                ("alg_mult", Value::Int(ev.alg_mult as i64)),
                ("geo_mult", Value::Int(ev.geo_mult as i64)),
                ("residual", Value::Num(ev.phi_residual)),
            ])
        })
        .collect();

    let gap = match spectral_gap(&s) {
        Ok(c) => Value::Obj(vec![
            ("gamma1", Value::Num(c.gamma1)),
            ("high_freq_limit", Value::Num(c.high_freq_limit)),
            ("limit_binding", Value::Bool(c.limit_binding)),
        ]),
        Err(SpectrumError::GapUndefined { .. }) => Value::Null,
        Err(e) => return Err(numerical(e)),
    };

    let results = Value::Obj(vec![
        (
            "params",
            Value::Obj(vec![
                ("a", Value::Num(p.a())),
                ("b", Value::Num(p.b())),
                ("ell", Value::Num(p.ell())),
                ("nu", Value::Num(p.nu())),
                ("regime", Value::Str(regime_name(p.classify()).to_string())),
            ]),
        ),
        ("effective_n0", Value::Int(s.effective_n0 as i64)),
        ("eigenvalues", Value::Arr(eigenvalues)),
        ("gap", gap),
    ]);

    let doc = envelope(
        "spectrum",
        vec![
            ("a", Value::Num(args.a)),
            ("b", Value::Num(args.b)),
            ("ell", Value::Num(args.ell)),
            ("n_max", Value::Int(args.n_max as i64)),
            ("out", Value::Str(args.out.display().to_string())),
        ],
        results,
    );
    write_file(&args.out, &render(&doc))
}
