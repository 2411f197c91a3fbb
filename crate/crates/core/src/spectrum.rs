//! Assembly of the transverse spectrum from located characteristic zeros:
//! multiplicities, per-strip completeness certificates, spectral gap, Weyl
//! counts, asymptotic residuals, and distance to the half-line set Sigma.

use crate::charfn::{self, Branch, ScaledPhi};
use crate::params::{Params, Regime};
use crate::rootfind::{self, IsolateOptions, LocatedZero, Rect, RootFindError};
use crate::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("truncation too small: n_max = {n_max} < 5")]
    TruncationTooSmall { n_max: u32 },
    #[error("zero search failed in cell {cell} ({branch:?}): {source}")]
    RootFind {
        cell: u32,
        branch: Branch,
        source: RootFindError,
    },
    #[error("strip {strip} holds multiplicity {sum} beyond the stabilized range")]
    IncompleteCertificate { strip: u32, sum: u32 },
    #[error("spectral gap undefined for a = {a}, b = {b}: real eigenvalues exist")]
    GapUndefined { a: f64, b: f64 },
    #[error("query at {requested} exceeds the certified range {certified}")]
    OutOfCertifiedRange { requested: f64, certified: f64 },
    #[error("operation requires a coupled regime, got {0:?}")]
    WrongRegime(Regime),
}

/// Branch bookkeeping for an assembled eigenvalue; `Decoupled` marks the
/// a = b = 0 lattice where both components carry the same Neumann spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchTag {
    Minus,
    Plus,
    Decoupled,
}

/// Horizontal location class: inside an open strip (n nu, (n+1) nu), exactly
/// on a line Re z = n nu, or on the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StripTag {
    Strip(u32),
    LineRe(u32),
    LowFrequency,
}

impl StripTag {
    /// Strip index the zero is attributed to for completeness counting;
    /// line zeros count toward the strip on their right, axis zeros to none.
    pub fn bin(&self) -> Option<u32> {
        match *self {
            StripTag::Strip(n) | StripTag::LineRe(n) => Some(n),
            StripTag::LowFrequency => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransverseEigenvalue {
    /// Square root with Re z >= 0 (ties: Im z <= 0).
    pub z: C64,
    pub lambda: C64,
    pub branch: BranchTag,
    pub strip: StripTag,
    pub alg_mult: u32,
    pub geo_mult: u32,
    /// |phi_branch(z)| at the refined point (0 for the decoupled lattice).
    pub phi_residual: f64,
    /// |eta_branch(z)|; None at z = 0 where eta is undefined.
    pub eta_abs: Option<f64>,
    /// |eta| fell in the ambiguous band [1e-6, 1e-3]: multiplicity is
    /// reported simple but the point is near the exceptional set.
    pub ill_conditioned: bool,
}

#[derive(Debug, Clone)]
pub struct SpectrumTruncation {
    pub params: Params<f64>,
    /// Ordered by Re(lambda).
    pub eigenvalues: Vec<TransverseEigenvalue>,
    pub n_max: u32,
    /// Smallest strip index from which per-strip sums stabilize at 2.
    pub effective_n0: u32,
    /// (strip n, algebraic multiplicity sum including line zeros).
    pub certificate: Vec<(u32, u32)>,
    /// Validated vertical search window.
    pub window: (f64, f64),
}

const AXIS_TOL: f64 = 1e-9;

/// Horizontal classification of a point: open strip, boundary line, or
/// imaginary axis. Tolerances are absolute: refined zeros carry ~1e-13
/// error, while interior zeros approach the lines no closer than
/// O(mu^2 / n^3). Line zeros exist only for b = 0 (at n nu exactly) or in
/// the complex-mu regime (integer theta), so the line test is suppressed
/// elsewhere: with real distinct mu the approach distance itself can sink
/// below any fixed tolerance without ever reaching the line.
pub fn strip_tag(p: &Params<f64>, z: C64) -> StripTag {
    let nu = p.nu();
    if z.re.abs() <= AXIS_TOL && z.im.abs() > AXIS_TOL {
        return StripTag::LowFrequency;
    }
    let (a, b) = (p.a(), p.b());
    let line_tol = if b == 0.0 {
        Some(1e-6)
    } else if a * a < 4.0 * b * b {
        Some(1e-9)
    } else {
        None
    };
    if let Some(tol) = line_tol {
        let n = (z.re / nu).round();
        if n >= 0.0 && (z.re - n * nu).abs() <= tol {
            return StripTag::LineRe(n as u32);
        }
    }
    StripTag::Strip((z.re / nu).floor() as u32)
}

/// All zeros of phi_minus phi_plus with Re z in [0, (n_max+1) nu), assembled
/// into eigenvalues with multiplicities and a per-strip completeness
/// certificate. The search tiles midpoint cells [(j-1/2) nu, (j+1/2) nu]
/// whose edges stay half a strip away from the lines the zeros accumulate
/// on; strip membership is decided afterwards by binning Re z.
pub fn compute_spectrum(
    p: &Params<f64>,
    n_max: u32,
) -> Result<SpectrumTruncation, SpectrumError> {
    if n_max < 5 {
        return Err(SpectrumError::TruncationTooSmall { n_max });
    }
    if p.classify() == Regime::Decoupled {
        return Ok(decoupled_spectrum(p, n_max));
    }
    let (mut im_lo, im_hi) = rootfind::default_window(p);
    let mut last_err = None;
    for _attempt in 0..3 {
        match assemble(p, n_max, im_lo, im_hi) {
            Ok(t) => return Ok(t),
            Err(e @ SpectrumError::IncompleteCertificate { .. }) => {
                last_err = Some(e);
                im_lo *= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

fn decoupled_spectrum(p: &Params<f64>, n_max: u32) -> SpectrumTruncation {
    let nu = p.nu();
    let eigenvalues: Vec<TransverseEigenvalue> = (0..=n_max)
        .map(|n| {
            let z = C64::new(n as f64 * nu, 0.0);
            TransverseEigenvalue {
                z,
                lambda: z * z,
                branch: BranchTag::Decoupled,
                strip: StripTag::LineRe(n),
                alg_mult: 2,
                geo_mult: 2,
                phi_residual: 0.0,
                eta_abs: None,
                ill_conditioned: false,
            }
        })
        .collect();
    let certificate: Vec<(u32, u32)> = (0..=n_max).map(|n| (n, 2)).collect();
    SpectrumTruncation {
        params: p.clone(),
        eigenvalues,
        n_max,
        effective_n0: 0,
        certificate,
        window: (0.0, 0.0),
    }
}

fn assemble(
    p: &Params<f64>,
    n_max: u32,
    im_lo: f64,
    im_hi: f64,
) -> Result<SpectrumTruncation, SpectrumError> {
    let nu = p.nu();
    let regime = p.classify();
    let branches: &[Branch] = if regime == Regime::Degenerate {
        // phi_+ = phi_-: one search, doubled multiplicities.
        &[Branch::Minus]
    } else {
        &[Branch::Minus, Branch::Plus]
    };
    let opts = IsolateOptions::default();
    let mut found: Vec<(Branch, LocatedZero<f64>)> = Vec::new();
    for j in 0..=(n_max + 1) {
        let c = j as f64 * nu;
        let cell = Rect::new(c - 0.5 * nu, c + 0.5 * nu, im_lo, im_hi);
        for &branch in branches {
            let f = ScaledPhi {
                params: p.clone(),
                branch,
            };
            let zs = rootfind::isolate_zeros_with(&f, &cell, 60, &opts).map_err(|source| {
                SpectrumError::RootFind {
                    cell: j,
                    branch,
                    source,
                }
            })?;
            for z in zs {
                found.push((branch, z));
            }
        }
    }

    // Normalize representatives to Re z >= 0 and drop mirrors: the zero set
    // of each branch is invariant under z -> -z and both roots give the
    // same lambda.
    found.retain(|(_, lz)| {
        if lz.z.re < -AXIS_TOL {
            return false;
        }
        if lz.z.re.abs() <= AXIS_TOL && lz.z.im > AXIS_TOL {
            return false;
        }
        true
    });
    // Adjacent inflated cells can both report a zero near a shared edge.
    found.sort_by(|l, r| {
        (l.0 as u8, l.1.z.re, l.1.z.im)
            .partial_cmp(&(r.0 as u8, r.1.z.re, r.1.z.im))
            .unwrap()
    });
    found.dedup_by(|a, b| a.0 == b.0 && (a.1.z - b.1.z).norm() < 1e-7);

    let mut eigenvalues = Vec::new();
    for (branch, lz) in found {
        let tag = strip_tag(p, lz.z);
        if let Some(n) = tag.bin() {
            if n > n_max {
                continue;
            }
        }
        let (alg_from_engine, z_mult) = (lz.multiplicity, lz.multiplicity);
        let mut ill = false;
        let mut eta_abs = None;
        let alg_mult;
        let is_origin = lz.z.norm() < 1e-12;
        if is_origin {
            // z = 0 happens only for b = 0: the two opposite simple roots
            // collapse, so the z-multiplicity double-counts lambda = 0.
            alg_mult = (z_mult / 2).max(1);
        } else {
            let eta = charfn::eta(p, branch, lz.z).expect("eta defined off the origin");
            let ea = eta.norm();
            eta_abs = Some(ea);
            if regime == Regime::Degenerate {
                alg_mult = 2 * alg_from_engine;
            } else if alg_from_engine >= 2 || ea < 1e-6 {
                alg_mult = 2;
            } else {
                alg_mult = 1;
                if ea < 1e-3 {
                    ill = true;
                }
            }
        }
        let phi_residual = charfn::phi(p, branch, lz.z).norm();
        eigenvalues.push(TransverseEigenvalue {
            z: lz.z,
            lambda: lz.z * lz.z,
            branch: match branch {
                Branch::Minus => BranchTag::Minus,
                Branch::Plus => BranchTag::Plus,
            },
            strip: tag,
            alg_mult,
            geo_mult: 1,
            phi_residual,
            eta_abs,
            ill_conditioned: ill,
        });
    }
    eigenvalues.sort_by(|l, r| {
        (l.lambda.re, l.lambda.im)
            .partial_cmp(&(r.lambda.re, r.lambda.im))
            .unwrap()
    });

    let mut sums = vec![0u32; (n_max + 1) as usize];
    for ev in &eigenvalues {
        if let Some(n) = ev.strip.bin() {
            sums[n as usize] += ev.alg_mult;
        }
    }
    let certificate: Vec<(u32, u32)> = sums
        .iter()
        .enumerate()
        .map(|(n, &s)| (n as u32, s))
        .collect();
    let mut effective_n0 = 0u32;
    for (n, &s) in sums.iter().enumerate() {
        if s != 2 {
            effective_n0 = n as u32 + 1;
        }
    }
    // The pattern must visibly stabilize inside the truncation.
    if effective_n0 + 4 > n_max + 1 {
        let strip = effective_n0 - 1;
        return Err(SpectrumError::IncompleteCertificate {
            strip,
            sum: sums[strip as usize],
        });
    }
    Ok(SpectrumTruncation {
        params: p.clone(),
        eigenvalues,
        n_max,
        effective_n0,
        certificate,
        window: (im_lo, im_hi),
    })
}

/// Gap certificate: the minimum damping over the truncation compared with
/// the high-frequency limit 2 min Re(mu) / l the tail approaches.
#[derive(Debug, Clone, Copy)]
pub struct GapCertificate {
    pub gamma1: f64,
    pub high_freq_limit: f64,
    /// The limit, not a computed eigenvalue, is the binding candidate.
    pub limit_binding: bool,
}

pub fn spectral_gap(s: &SpectrumTruncation) -> Result<GapCertificate, SpectrumError> {
    let (a, b) = (s.params.a(), s.params.b());
    if a <= 0.0 || b == 0.0 {
        return Err(SpectrumError::GapUndefined { a, b });
    }
    let computed = s
        .eigenvalues
        .iter()
        .map(|ev| -ev.lambda.im)
        .fold(f64::INFINITY, f64::min);
    let mu = s.params.mu_pair();
    let limit = 2.0 * mu.mu_minus.re.min(mu.mu_plus.re) / s.params.ell();
    let limit_binding = limit < computed;
    Ok(GapCertificate {
        gamma1: computed.min(limit),
        high_freq_limit: limit,
        limit_binding,
    })
}

/// Eigenvalue count (with algebraic multiplicity) with Re(lambda) < r.
pub fn weyl_count(s: &SpectrumTruncation, r: f64) -> Result<u32, SpectrumError> {
    let certified = (s.n_max as f64 * s.params.nu()).powi(2);
    if r >= certified {
        return Err(SpectrumError::OutOfCertifiedRange {
            requested: r,
            certified,
        });
    }
    Ok(s.eigenvalues
        .iter()
        .filter(|ev| ev.lambda.re < r)
        .map(|ev| ev.alg_mult)
        .sum())
}

/// Per-eigenvalue deviation from the first-order high-frequency expansion
/// z = n nu - i mu / (n pi), scaled by n^2; boundedness of the table
/// certifies the O(n^-2) remainder empirically.
pub fn asymptotics_residual(
    s: &SpectrumTruncation,
) -> Result<Vec<(u32, BranchTag, f64)>, SpectrumError> {
    if s.params.classify() == Regime::Decoupled {
        return Err(SpectrumError::WrongRegime(Regime::Decoupled));
    }
    let nu = s.params.nu();
    let mu = s.params.mu_pair();
    let mut table = Vec::new();
    for ev in &s.eigenvalues {
        // Index by the nearest lattice line, not the strip: a complex pair
        // pushes minus-branch zeros left of Re z = n nu into strip n - 1.
        let nf = (ev.z.re / nu).round();
        if nf < 1.0 {
            continue;
        }
        let n = nf as u32;
        let m = match ev.branch {
            BranchTag::Minus => mu.mu_minus,
            BranchTag::Plus => mu.mu_plus,
            BranchTag::Decoupled => unreachable!(),
        };
        let nf = n as f64;
        let predicted = C64::new(nf * nu, 0.0) - C64::i() * m / (nf * std::f64::consts::PI);
        let residual = (ev.z - predicted).norm();
        table.push((n, ev.branch, residual * nf * nf));
    }
    Ok(table)
}

/// Distance from zeta to the set of half-lines lambda + [0, +inf).
pub fn dist_to_sigma(s: &SpectrumTruncation, zeta: C64) -> Result<f64, SpectrumError> {
    let certified = (s.n_max as f64 * s.params.nu()).powi(2);
    if zeta.re >= certified {
        return Err(SpectrumError::OutOfCertifiedRange {
            requested: zeta.re,
            certified,
        });
    }
    let mut best = f64::INFINITY;
    for ev in &s.eigenvalues {
        let l = ev.lambda;
        let d = if zeta.re <= l.re {
            (zeta - l).norm()
        } else {
            (zeta.im - l.im).abs()
        };
        best = best.min(d);
    }
    Ok(best)
}

/// min(s, s^m): the bracket appearing in the resolvent bound.
pub fn s_bracket_m(srange: f64, m: u32) -> f64 {
    assert!(srange > 0.0 && m >= 1);
    srange.min(srange.powi(m as i32))
}

/// Largest algebraic multiplicity in the truncation: the constant m of the
/// resolvent bound, reported from the data rather than from the regime.
pub fn max_multiplicity(s: &SpectrumTruncation) -> u32 {
    s.eigenvalues.iter().map(|ev| ev.alg_mult).max().unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p64(a: f64, b: f64, ell: f64) -> Params<f64> {
        Params::new(a, b, ell).unwrap()
    }

    fn theta_coupling(a: f64, theta: f64, nu: f64) -> f64 {
        let ln = ((2.0 * theta * nu + a) / (2.0 * theta * nu - a)).ln();
        0.5 * a * (1.0 + ln * ln / (4.0 * theta * theta * PI * PI)).sqrt()
    }

    #[test]
    fn decoupled_lattice_is_direct() {
        let s = compute_spectrum(&p64(0.0, 0.0, PI), 10).unwrap();
        assert_eq!(s.eigenvalues.len(), 11);
        for (n, ev) in s.eigenvalues.iter().enumerate() {
            let expect = (n * n) as f64;
            assert_eq!(ev.lambda, C64::new(expect, 0.0));
            assert_eq!(ev.alg_mult, 2);
            assert_eq!(ev.geo_mult, 2);
            assert_eq!(ev.strip, StripTag::LineRe(n as u32));
        }
        assert_eq!(s.effective_n0, 0);
        assert!(matches!(
            spectral_gap(&s),
            Err(SpectrumError::GapUndefined { .. })
        ));
    }

    #[test]
    fn real_distinct_two_simple_per_strip() {
        let p = p64(1.0, 0.3, PI);
        let s = compute_spectrum(&p, 9).unwrap();
        assert_eq!(s.effective_n0, 0, "certificate {:?}", s.certificate);
        for &(_, sum) in &s.certificate {
            assert_eq!(sum, 2);
        }
        for ev in &s.eigenvalues {
            assert_eq!(ev.alg_mult, 1);
            assert_eq!(ev.geo_mult, 1);
            assert!(ev.lambda.im < 0.0, "dissipative: {:?}", ev.lambda);
            assert!(
                ev.phi_residual <= 1e-10 * ev.z.norm().max(1.0),
                "residual {} at {}",
                ev.phi_residual,
                ev.z
            );
        }
        // Each strip holds one zero per branch.
        for n in 0..=9u32 {
            let branches: Vec<BranchTag> = s
                .eigenvalues
                .iter()
                .filter(|ev| ev.strip.bin() == Some(n))
                .map(|ev| ev.branch)
                .collect();
            assert_eq!(branches.len(), 2, "strip {n}: {branches:?}");
            assert!(branches.contains(&BranchTag::Minus));
            assert!(branches.contains(&BranchTag::Plus));
        }
        // Ordered by Re(lambda).
        for w in s.eigenvalues.windows(2) {
            assert!(w[0].lambda.re <= w[1].lambda.re);
        }
    }

    #[test]
    fn degenerate_one_double_per_strip() {
        let p = p64(2.0, 1.0, PI);
        let s = compute_spectrum(&p, 8).unwrap();
        for &(_, sum) in &s.certificate {
            assert_eq!(sum, 2);
        }
        for ev in &s.eigenvalues {
            assert_eq!(ev.alg_mult, 2);
            assert_eq!(ev.geo_mult, 1);
            assert!(ev.lambda.im < 0.0);
        }
        for n in 0..=8u32 {
            let in_strip = s
                .eigenvalues
                .iter()
                .filter(|ev| ev.strip.bin() == Some(n))
                .count();
            assert_eq!(in_strip, 1, "strip {n}");
        }
    }

    #[test]
    fn neumann_component_stays_on_lines() {
        let p = p64(1.0, 0.0, PI);
        let s = compute_spectrum(&p, 9).unwrap();
        for &(_, sum) in &s.certificate {
            assert_eq!(sum, 2);
        }
        let mut line_count = 0;
        for ev in &s.eigenvalues {
            match (ev.branch, ev.strip) {
                (BranchTag::Minus, StripTag::LineRe(n)) => {
                    line_count += 1;
                    // Undamped component: lambda = (n nu)^2 on the real axis.
                    let expect = (n as f64 * p.nu()).powi(2);
                    assert!((ev.lambda - C64::new(expect, 0.0)).norm() < 1e-9);
                }
                (BranchTag::Plus, StripTag::Strip(_)) => {
                    assert!(ev.lambda.im < 0.0, "damped branch: {:?}", ev.lambda);
                }
                other => panic!("unexpected placement {other:?}"),
            }
        }
        assert_eq!(line_count, 10);
        // lambda = 0 present exactly because b = 0, with multiplicity 1.
        let zero = s
            .eigenvalues
            .iter()
            .find(|ev| ev.lambda.norm() < 1e-12)
            .expect("lambda = 0 present");
        assert_eq!(zero.alg_mult, 1);
    }

    #[test]
    fn no_zero_eigenvalue_with_coupling() {
        for (a, b) in [(1.0, 0.3), (2.0, 1.0), (0.5, 0.9)] {
            let s = compute_spectrum(&p64(a, b, PI), 6).unwrap();
            let closest = s
                .eigenvalues
                .iter()
                .map(|ev| ev.lambda.norm())
                .fold(f64::INFINITY, f64::min);
            assert!(closest > 1e-3, "(a,b)=({a},{b}): |lambda|={closest}");
        }
    }

    #[test]
    fn complex_pair_strip_anomaly_matches_table() {
        // theta = 1.5: strip 1 holds three zeros, every other strip two, and
        // the total over strips 0..9 is 21.
        let b = theta_coupling(1.0, 1.5, 1.0);
        let p = p64(1.0, b, PI);
        let s = compute_spectrum(&p, 9).unwrap();
        let mut total = 0;
        for &(n, sum) in &s.certificate {
            let expect = if n == 1 { 3 } else { 2 };
            assert_eq!(sum, expect, "strip {n}");
            total += sum;
        }
        assert_eq!(total, 21);
        assert_eq!(s.effective_n0, 2);
    }

    #[test]
    fn selfadjoint_spectrum_is_real() {
        let p = p64(0.0, 1.0, PI);
        let s = compute_spectrum(&p, 7).unwrap();
        assert!(!s.eigenvalues.is_empty());
        for ev in &s.eigenvalues {
            assert!(
                ev.lambda.im.abs() <= 1e-10 * ev.lambda.norm().max(1.0),
                "lambda {} should be real",
                ev.lambda
            );
        }
        // One negative eigenvalue below -b^2 appears on the imaginary axis:
        // only one branch satisfies the axis equation for a = 0.
        let neg: Vec<&TransverseEigenvalue> = s
            .eigenvalues
            .iter()
            .filter(|ev| ev.lambda.re < 0.0)
            .collect();
        assert_eq!(neg.len(), 1);
        for ev in neg {
            assert_eq!(ev.strip, StripTag::LowFrequency);
            assert!(ev.lambda.re < -0.99, "below -b^2: {:?}", ev.lambda);
        }
        assert!(matches!(
            spectral_gap(&s),
            Err(SpectrumError::GapUndefined { .. })
        ));
    }

    #[test]
    fn gap_certificate_matches_limit_bound() {
        let p = p64(1.0, 0.3, PI);
        let s = compute_spectrum(&p, 40).unwrap();
        let g = spectral_gap(&s).unwrap();
        let mu = p.mu_pair();
        let bound = 2.0 * mu.mu_minus.re.min(mu.mu_plus.re) / PI;
        assert!(g.gamma1 > 0.0);
        assert!(g.gamma1 <= bound + 0.05, "gamma1={} bound={bound}", g.gamma1);
        for ev in &s.eigenvalues {
            assert!(ev.lambda.im <= -g.gamma1 + 1e-12);
        }

        let p2 = p64(2.0, 1.0, PI);
        let s2 = compute_spectrum(&p2, 20).unwrap();
        let g2 = spectral_gap(&s2).unwrap();
        assert!(g2.gamma1 > 0.0);
    }

    #[test]
    fn weyl_counts_match_examples() {
        let s = compute_spectrum(&p64(0.0, 0.0, PI), 10).unwrap();
        assert_eq!(weyl_count(&s, 10.0).unwrap(), 8);
        assert_eq!(weyl_count(&s, 0.5).unwrap(), 2);
        assert!(matches!(
            weyl_count(&s, 101.0),
            Err(SpectrumError::OutOfCertifiedRange { .. })
        ));

        let s2 = compute_spectrum(&p64(1.0, 1.0, PI), 21).unwrap();
        let n = weyl_count(&s2, 400.0).unwrap();
        assert!((39..=43).contains(&n), "N(400) = {n}");
    }

    #[test]
    fn asymptotic_residuals_decay_quadratically() {
        let p = p64(1.0, 0.3, PI);
        let s = compute_spectrum(&p, 40).unwrap();
        let table = asymptotics_residual(&s).unwrap();
        for &branch in &[BranchTag::Minus, BranchTag::Plus] {
            let at = |n: u32| -> f64 {
                table
                    .iter()
                    .filter(|(m, b, _)| *m == n && *b == branch)
                    .map(|&(_, _, r)| r)
                    .fold(0.0, f64::max)
            };
            let r10 = at(10);
            assert!(r10 > 0.0);
            let worst = (10..=40).map(at).fold(0.0, f64::max);
            assert!(
                worst <= 2.0 * r10,
                "{branch:?}: worst {worst} vs n=10 value {r10}"
            );
        }
        assert!(matches!(
            asymptotics_residual(&compute_spectrum(&p64(0.0, 0.0, PI), 6).unwrap()),
            Err(SpectrumError::WrongRegime(Regime::Decoupled))
        ));
    }

    #[test]
    fn degenerate_lambda_expansion() {
        // lambda_n = n^2 nu^2 - 2 i mu / l + O(1/n) for the double branch.
        let p = p64(2.0, 1.0, PI);
        let s = compute_spectrum(&p, 30).unwrap();
        let mu = p.mu_pair().mu_minus;
        for ev in &s.eigenvalues {
            let n = match ev.strip.bin() {
                Some(n) if n >= 10 => n as f64,
                _ => continue,
            };
            let predicted = C64::new(n * n, 0.0) - C64::i() * mu * 2.0 / PI;
            let r = (ev.lambda - predicted).norm() * n;
            assert!(r < 5.0, "n={n}: scaled residual {r}");
        }
    }

    #[test]
    fn distance_to_half_lines() {
        let s = compute_spectrum(&p64(0.0, 0.0, PI), 10).unwrap();
        assert!((dist_to_sigma(&s, C64::new(-1.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((dist_to_sigma(&s, C64::new(2.0, 1.0)).unwrap() - 1.0).abs() < 1e-12);

        let s2 = compute_spectrum(&p64(1.0, 0.3, PI), 8).unwrap();
        let d = dist_to_sigma(&s2, C64::new(1.0, 0.0)).unwrap();
        assert!(d > 0.0);
        let g = spectral_gap(&s2).unwrap();
        assert!(d >= 0.9 * g.gamma1.min(1.0), "d={d}");
    }

    #[test]
    fn bracket_function() {
        assert_eq!(s_bracket_m(0.5, 2), 0.25);
        assert_eq!(s_bracket_m(2.0, 2), 2.0);
        for m in 1..=4 {
            assert_eq!(s_bracket_m(1.0, m), 1.0);
        }
    }

    #[test]
    fn branch_disjointness_off_degenerate() {
        let p = p64(1.0, 0.3, PI);
        let s = compute_spectrum(&p, 9).unwrap();
        for ev in &s.eigenvalues {
            let other = match ev.branch {
                BranchTag::Minus => Branch::Plus,
                BranchTag::Plus => Branch::Minus,
                BranchTag::Decoupled => continue,
            };
            let v = charfn::phi(&p, other, ev.z).norm();
            assert!(
                v > 1e-6 * ev.z.norm().max(1.0),
                "z={} nearly shared between branches",
                ev.z
            );
        }
    }

    #[test]
    fn multiplicity_flags_near_exceptional_points() {
        // Generic ComplexPair draws are simple and un-flagged.
        let b = theta_coupling(1.0, 2.5, 1.0);
        let s = compute_spectrum(&p64(1.0, b, PI), 8).unwrap();
        for ev in &s.eigenvalues {
            assert_eq!(ev.alg_mult, 1, "z={}", ev.z);
        }
    }
}
