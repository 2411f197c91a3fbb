use std::fmt::Write;
use std::path::PathBuf;

use guide_spectra::exceptional::theta_points;

use super::{numerical, usage, validated, write_file, Failure};
use crate::json::num;

#[derive(clap::Args)]
pub struct Args {
    /// Interval length
    #[arg(long)]
    ell: f64,
    /// Largest exceptional index tabulated (rows k = 0..=k-max)
    #[arg(long, default_value_t = 4)]
    k_max: u32,
    /// Output CSV path
    #[arg(long, default_value = "theta.csv")]
    out: PathBuf,
}

pub fn run(args: &Args) -> Result<(), Failure> {
    if args.k_max < 1 {
        return Err(usage("--k-max must be at least 1"));
    }
    validated(0.0, 0.0, args.ell)?;
    let pts = theta_points(args.k_max, args.ell).map_err(numerical)?;

    let mut csv = String::new();
    let _ = writeln!(csv, "# guide-spectra theta");
    let _ = writeln!(csv, "# ell = {}, k_max = {}", args.ell, args.k_max);
    let _ = writeln!(
        csv,
        "k,xi,kappa,a_k,b_k,re_z,im_z,res_xi,res_kappa,res_raw,phi_abs,phi_prime_abs"
    );

    let mut worst = 0.0f64;
    for pt in &pts {
        let (res_xi, res_kappa) = pt.system_residuals();
        let (phi_abs, phi_prime_abs) = pt.double_zero_certificate();
        worst = worst.max(phi_abs).max(phi_prime_abs);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            pt.k,
            num(pt.xi),
            num(pt.kappa),
            num(pt.a_k),
            num(pt.b_k),
            num(pt.z.re),
            num(pt.z.im),
            num(res_xi),
            num(res_kappa),
            num(pt.raw_residual()),
            num(phi_abs),
            num(phi_prime_abs)
        );
    }
    write_file(&args.out, &csv)?;
    if worst > 1e-8 {
        return Err(Failure::Numerical(format!(
            "double-zero certificate failed: worst residual {worst:.3e} exceeds 1e-8"
        )));
    }
    Ok(())
}
