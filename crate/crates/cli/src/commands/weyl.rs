use std::fmt::Write;
use std::path::PathBuf;

use guide_spectra::spectrum::{compute_spectrum, weyl_count};

use super::{numerical, usage, validated, write_file, Failure};
use crate::json::num;

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
    /// Upper end of the logarithmic grid in Re(lambda)
    #[arg(long, default_value_t = 1600.0)]
    r_max: f64,
    /// Grid points between 1 and r-max
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Output CSV path
    #[arg(long, default_value = "weyl.csv")]
    out: PathBuf,
}

pub fn run(args: &Args) -> Result<(), Failure> {
    if !(args.r_max > 1.0 && args.r_max.is_finite()) {
        return Err(usage("--r-max must be a finite value above 1"));
    }
    if args.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let p = validated(args.a, args.b, args.ell)?;
    // Truncation comfortably past the grid top so every count is exact.
    let n_max = ((args.r_max.sqrt() / p.nu()).ceil() as u32 + 2).max(8);
    let s = compute_spectrum(&p, n_max).map_err(numerical)?;

    let mut csv = String::new();
    let _ = writeln!(csv, "# guide-spectra weyl");
    let _ = writeln!(csv, "# a = {}, b = {}, ell = {}", args.a, args.b, args.ell);
    let _ = writeln!(
        csv,
        "# r_max = {}, points = {}, n_max = {}, effective_n0 = {}",
        args.r_max, args.points, n_max, s.effective_n0
    );
    let _ = writeln!(csv, "r,count,lower_bound,upper_bound");

    let mut violation = None;
    for j in 0..args.points {
        let t = j as f64 / (args.points - 1) as f64;
        let r = args.r_max.powf(t);
        let count = weyl_count(&s, r).map_err(numerical)?;
        let base = 2.0 * r.sqrt() / p.nu();
        let lower = base - 1.0;
        let upper = (2.0 * s.effective_n0 as f64).max(base + 3.0);
        let _ = writeln!(csv, "{},{},{},{}", num(r), count, num(lower), num(upper));
        if ((count as f64) < lower || (count as f64) > upper) && violation.is_none() {
            violation = Some((r, count, lower, upper));
        }
    }
    write_file(&args.out, &csv)?;
    if let Some((r, count, lower, upper)) = violation {
        return Err(Failure::Numerical(format!(
            "counting bound violated at r = {r:.6e}: N = {count} outside [{lower:.6e}, {upper:.6e}]"
        )));
    }
    Ok(())
}
