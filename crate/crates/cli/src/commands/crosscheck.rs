use std::path::PathBuf;

use guide_spectra::oracle::{cross_agreement, CellAgreement, ShootingConfig};
use guide_spectra::params::Params;
use guide_spectra::sampling::{self, ALL_REGIMES};
use guide_spectra::spectrum::compute_spectrum;
use guide_spectra::Regime;
use rayon::prelude::*;

use super::{envelope, numerical, regime_name, usage, validated, write_file, Failure};
use crate::json::{render, Value};

#[derive(clap::Args)]
pub struct Args {
    /// Regime to sample: decoupled, neumann-plus-damped, real-distinct,
    /// degenerate, complex-pair, or all
    #[arg(long, default_value = "all")]
    regime: String,
    /// Parameter draws per regime
    #[arg(long, default_value_t = 5)]
    draws: usize,
    /// Base seed; each regime offsets it by its fixed index
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Interval length
    #[arg(long, default_value_t = std::f64::consts::PI)]
    ell: f64,
    /// Highest midpoint cell checked (cells 0..=n-top)
    #[arg(long, default_value_t = 5)]
    n_top: u32,
    /// Grid intervals per component for the contour counts
    #[arg(long, default_value_t = 400)]
    n_h: usize,
    /// RK4 steps for the shooting determinant (power of two, at least 256)
    #[arg(long, default_value_t = 2048)]
    steps: usize,
    /// Largest accepted drift between independently refined zeros
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Output JSON path
    #[arg(long, default_value = "crosscheck.json")]
    out: PathBuf,
}

fn parse_regimes(sel: &str) -> Result<Vec<Regime>, Failure> {
    if sel == "all" {
        return Ok(ALL_REGIMES.to_vec());
    }
    for r in ALL_REGIMES {
        if sel == regime_name(r) {
            return Ok(vec![r]);
        }
    }
    Err(usage(format!(
        "unknown regime {sel:?}; expected all, decoupled, neumann-plus-damped, \
         real-distinct, degenerate or complex-pair"
    )))
}

pub fn run(args: &Args) -> Result<(), Failure> {
    let regimes = parse_regimes(&args.regime)?;
    if args.draws < 1 {
        return Err(usage("--draws must be at least 1"));
    }
    if args.steps < 256 || !args.steps.is_power_of_two() {
        return Err(usage("--steps must be a power of two, at least 256"));
    }
    if args.n_h < 200 {
        return Err(usage("--n-h must be at least 200"));
    }
    if !(args.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    if args.n_top < 1 {
        return Err(usage("--n-top must be at least 1"));
    }
    validated(0.0, 0.0, args.ell)?;
    let cfg = ShootingConfig { steps: args.steps };
    let n_max = (args.n_top + 1).max(5);

    let mut tasks: Vec<(Regime, Params<f64>)> = Vec::new();
    for &regime in &regimes {
        let index = ALL_REGIMES.iter().position(|&r| r == regime).unwrap() as u64;
        for p in sampling::draws(regime, args.ell, args.draws, args.seed + index) {
            tasks.push((regime, p));
        }
    }

    let reports: Vec<Vec<CellAgreement>> = tasks
        .par_iter()
        .map(|(_, p)| {
            let s = compute_spectrum(p, n_max).map_err(numerical)?;
            cross_agreement(&s, args.n_top, args.n_h, &cfg).map_err(|e| {
                Failure::Numerical(format!("a = {}, b = {}: {e}", p.a(), p.b()))
            })
        })
        .collect::<Result<_, Failure>>()?;

    let mut regime_values = Vec::new();
    let mut mismatches = 0usize;
    let mut worst_drift = 0.0f64;
    for (ri, &regime) in regimes.iter().enumerate() {
        let mut draw_values = Vec::new();
        for di in 0..args.draws {
            let k = ri * args.draws + di;
            let (_, p) = tasks[k];
            let cells = &reports[k];
            let ok = cells
                .iter()
                .all(|c| c.counts_agree() && c.drift <= args.tol);
            if !ok {
                mismatches += 1;
            }
            let cell_values: Vec<Value> = cells
                .iter()
                .map(|c| {
                    worst_drift = worst_drift.max(c.drift);
                    Value::Obj(vec![
                        ("cell", Value::Int(c.cell as i64)),
                        ("phi_count", Value::Int(c.phi_count as i64)),
                        (
                            "predicted_discrete",
                            Value::Int(c.predicted_discrete() as i64),
                        ),
                        ("discrete_count", Value::Int(c.discrete_count as i64)),
                        ("drift", Value::Num(c.drift)),
                    ])
                })
                .collect();
            draw_values.push(Value::Obj(vec![
                ("a", Value::Num(p.a())),
                ("b", Value::Num(p.b())),
                ("cells", Value::Arr(cell_values)),
                ("ok", Value::Bool(ok)),
            ]));
        }
        regime_values.push(Value::Obj(vec![
            ("regime", Value::Str(regime_name(regime).to_string())),
            ("draws", Value::Arr(draw_values)),
        ]));
    }

    let total = tasks.len();
    let results = Value::Obj(vec![
        ("regimes", Value::Arr(regime_values)),
        ("draws_total", Value::Int(total as i64)),
        ("draws_failed", Value::Int(mismatches as i64)),
        ("worst_drift", Value::Num(worst_drift)),
        ("all_ok", Value::Bool(mismatches == 0)),
    ]);

    let doc = envelope(
        "crosscheck",
        vec![
            ("regime", Value::Str(args.regime.clone())),
            ("draws", Value::Int(args.draws as i64)),
            ("seed", Value::Int(args.seed as i64)),
            ("ell", Value::Num(args.ell)),
            ("n_top", Value::Int(args.n_top as i64)),
            ("n_h", Value::Int(args.n_h as i64)),
            ("steps", Value::Int(args.steps as i64)),
            ("tol", Value::Num(args.tol)),
            ("out", Value::Str(args.out.display().to_string())),
        ],
        results,
    );
    write_file(&args.out, &render(&doc))?;
    if mismatches > 0 {
        return Err(Failure::Numerical(format!(
            "{mismatches} of {total} draws disagree beyond tolerance (see {})",
            args.out.display()
        )));
    }
    Ok(())
}
