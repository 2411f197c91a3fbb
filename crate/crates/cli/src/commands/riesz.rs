use std::path::PathBuf;

use guide_spectra::riesz::{build_family, riesz_condition};
use guide_spectra::spectrum::compute_spectrum;

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
    /// Family size (members in ascending Re(lambda) order)
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Truncation the family is drawn from; default covers n with margin
    #[arg(long)]
    n_max: Option<u32>,
    /// Output JSON path
    #[arg(long, default_value = "riesz.json")]
    out: PathBuf,
}

pub fn run(args: &Args) -> Result<(), Failure> {
    if args.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let n_max = args
        .n_max
        .unwrap_or(((args.n / 2) as u32 + 4).max(8));
    if n_max < 5 {
        return Err(usage("--n-max must be at least 5"));
    }
    let p = validated(args.a, args.b, args.ell)?;
    let s = compute_spectrum(&p, n_max).map_err(numerical)?;
    let family = build_family(&s, args.n).map_err(numerical)?;
    let (lambda_min, lambda_max) = riesz_condition(&family).map_err(numerical)?;

    let members: Vec<Value> = family
        .members
        .iter()
        .map(|m| {
            Value::Obj(vec![
                ("index", Value::Int(m.index as i64)),
                ("branch", Value::Str(branch_name(m.branch).to_string())),
                ("strip", Value::Str(strip_name(m.strip))),
                ("re_lambda", Value::Num(m.lambda.re)),
                ("im_lambda", Value::Num(m.lambda.im)),
                ("norm", Value::Num(m.norm)),
                ("residual", Value::Num(m.residual)),
                (
                    "partner",
                    m.partner.map_or(Value::Null, |k| Value::Int(k as i64)),
                ),
            ])
        })
        .collect();

    let results = Value::Obj(vec![
        ("regime", Value::Str(regime_name(p.classify()).to_string())),
        (
            "family",
            Value::Obj(vec![
                ("size", Value::Int(family.size() as i64)),
                ("c1", Value::Num(family.c1)),
                ("members", Value::Arr(members)),
            ]),
        ),
        (
            "condition",
            Value::Obj(vec![
                ("lambda_min", Value::Num(lambda_min)),
                ("lambda_max", Value::Num(lambda_max)),
                ("ratio", Value::Num(lambda_max / lambda_min)),
            ]),
        ),
    ]);

    let doc = envelope(
        "riesz",
        vec![
            ("a", Value::Num(args.a)),
            ("b", Value::Num(args.b)),
            ("ell", Value::Num(args.ell)),
            ("n", Value::Int(args.n as i64)),
            ("n_max", Value::Int(n_max as i64)),
            ("out", Value::Str(args.out.display().to_string())),
        ],
        results,
    );
    write_file(&args.out, &render(&doc))
}
