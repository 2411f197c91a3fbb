use std::fmt::Write;
use std::path::PathBuf;

use guide_spectra::oracle::resolvent_norm_estimate;
use guide_spectra::spectrum::{compute_spectrum, dist_to_sigma, max_multiplicity, s_bracket_m};
use guide_spectra::C64;
use rayon::prelude::*;

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
    /// Grid intervals per component for the norm estimate
    #[arg(long, default_value_t = 800)]
    n_h: usize,
    /// Truncation used for spectral distances
    #[arg(long, default_value_t = 40)]
    n_max: u32,
    /// Real part of the first grid column
    #[arg(long, default_value_t = 0.5)]
    re_min: f64,
    /// Real part of the last grid column
    #[arg(long, default_value_t = 80.0)]
    re_max: f64,
    /// Grid columns
    #[arg(long, default_value_t = 7)]
    re_points: usize,
    /// Imaginary part of the first grid row
    #[arg(long, default_value_t = 0.25)]
    im_min: f64,
    /// Imaginary part of the last grid row
    #[arg(long, default_value_t = 2.0)]
    im_max: f64,
    /// Grid rows
    #[arg(long, default_value_t = 3)]
    im_points: usize,
    /// Output CSV path
    #[arg(long, default_value = "resolvent.csv")]
    out: PathBuf,
}

fn axis(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    (0..points)
        .map(|j| min + (max - min) * j as f64 / (points - 1) as f64)
        .collect()
}

pub fn run(args: &Args) -> Result<(), Failure> {
    if args.re_points < 1 || args.im_points < 1 {
        return Err(usage("--re-points and --im-points must be at least 1"));
    }
    if (args.re_points > 1 && !(args.re_max > args.re_min))
        || (args.im_points > 1 && !(args.im_max > args.im_min))
    {
        return Err(usage("grid maxima must exceed minima when points > 1"));
    }
    if args.n_max < 5 {
        return Err(usage("--n-max must be at least 5"));
    }
    if args.n_h < 8 {
        return Err(usage("--n-h must be at least 8"));
    }
    let p = validated(args.a, args.b, args.ell)?;
    let s = compute_spectrum(&p, args.n_max).map_err(numerical)?;
    let m = max_multiplicity(&s);

    let mut zetas = Vec::new();
    for &y in &axis(args.im_min, args.im_max, args.im_points) {
        for &x in &axis(args.re_min, args.re_max, args.re_points) {
            zetas.push(C64::new(x, y));
        }
    }

    let rows: Vec<(f64, f64)> = zetas
        .par_iter()
        .map(|&zeta| {
            let dist = dist_to_sigma(&s, zeta).map_err(numerical)?;
            let est = resolvent_norm_estimate(&p, zeta, args.n_h).map_err(|e| {
                Failure::Numerical(format!("zeta = {} + {}i: {e}", zeta.re, zeta.im))
            })?;
            Ok((dist, est))
        })
        .collect::<Result<_, Failure>>()?;

    let mut csv = String::new();
    let _ = writeln!(csv, "# guide-spectra resolvent");
    let _ = writeln!(csv, "# a = {}, b = {}, ell = {}", args.a, args.b, args.ell);
    let _ = writeln!(
        csv,
        "# n_h = {}, n_max = {}, max_multiplicity = {m}",
        args.n_h, args.n_max
    );
    let _ = writeln!(
        csv,
        "re_zeta,im_zeta,dist,estimate,est_times_dist,est_times_bracket"
    );
    for (zeta, (dist, est)) in zetas.iter().zip(&rows) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            num(zeta.re),
            num(zeta.im),
            num(*dist),
            num(*est),
            num(est * dist),
            num(est * s_bracket_m(*dist, m))
        );
    }
    write_file(&args.out, &csv)
}
