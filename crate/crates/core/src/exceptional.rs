//! The exceptional coefficient set: parameter pairs with a genuine double
//! eigenvalue, characteristic zeros pinned on the lines Re z = n nu, and the
//! theta parameter that predicts how the zeros distribute over strips.

use crate::charfn::{self, Branch};
use crate::params::{Params, Regime};
use crate::C64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExceptionalError {
    #[error("no sign change on the bisection bracket [{lo}, {hi}]")]
    BisectionFailure { lo: f64, hi: f64 },
    #[error("coefficient out of range: {what}")]
    InvalidCoefficient { what: String },
    #[error("operation requires the complex-pair regime, got {0:?}")]
    WrongRegime(Regime),
}

/// A coefficient pair (a_k, b_k) whose minus-branch characteristic function
/// has a double zero at z_k, together with the scaled solve variables:
/// 2 z l = xi + i kappa.
#[derive(Debug, Clone)]
pub struct ThetaPoint {
    pub k: u32,
    pub xi: f64,
    pub kappa: f64,
    pub ell: f64,
    pub z: C64,
    pub mu: C64,
    pub a_k: f64,
    pub b_k: f64,
}

impl ThetaPoint {
    /// Residuals of cosh(kappa) sin(xi) + xi and sinh(kappa) cos(xi) + kappa.
    pub fn system_residuals(&self) -> (f64, f64) {
        (
            (self.kappa.cosh() * self.xi.sin() + self.xi).abs(),
            (self.kappa.sinh() * self.xi.cos() + self.kappa).abs(),
        )
    }

    /// |sin(2 z l) + 2 z l| at the solved point.
    pub fn raw_residual(&self) -> f64 {
        let w = C64::new(self.xi, self.kappa);
        (w.sin() + w).norm()
    }

    /// (|phi_-(z)|, |phi_-'(z)|) for Params(a_k, b_k, l): both must vanish
    /// at a double zero.
    pub fn double_zero_certificate(&self) -> (f64, f64) {
        let p = Params::new(self.a_k, self.b_k, self.ell).expect("valid params");
        (
            charfn::phi(&p, Branch::Minus, self.z).norm(),
            charfn::phi_prime(&p, Branch::Minus, self.z).norm(),
        )
    }
}

/// Bisection for a continuous function with certified sign change f(lo) < 0
/// < f(hi); lo itself may evaluate to -inf.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64, ExceptionalError> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo < 0.0 && fhi >= 0.0) {
        return Err(ExceptionalError::BisectionFailure { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// k-th double-eigenvalue coefficient pair. The scaled variable xi solves
/// cos(xi) sqrt(xi^2/sin(xi)^2 - 1) + argch(-xi/sin(xi)) = 0 on the interval
/// ((2k+1) pi, (2k+3/2) pi], where the left end diverges to -inf and the
/// right end is positive; kappa, z and mu follow in closed form.
pub fn theta_point(k: u32, ell: f64) -> Result<ThetaPoint, ExceptionalError> {
    if ell <= 0.0 {
        return Err(ExceptionalError::InvalidCoefficient {
            what: format!("ell = {ell} must be positive"),
        });
    }
    let kf = k as f64;
    let lo = (2.0 * kf + 1.0) * PI;
    let hi = (2.0 * kf + 1.5) * PI;
    let f = |xi: f64| {
        let s = xi.sin();
        let x = -xi / s;
        xi.cos() * (x * x - 1.0).sqrt() + x.acosh()
    };
    // Step inside the interval: sin -> 0 at the left end.
    let xi = bisect(lo + lo * 1e-13, hi, f)?;
    let kappa = -(-xi / xi.sin()).acosh();
    let z = C64::new(xi, kappa) / (2.0 * ell);
    let e = (C64::i() * z * 2.0 * ell).exp();
    let mu = z * (e - 1.0) / (e + 1.0);
    assert!(mu.re > 0.0, "damping coefficient must come out positive");
    Ok(ThetaPoint {
        k,
        xi,
        kappa,
        ell,
        z,
        mu,
        a_k: 2.0 * mu.re,
        b_k: mu.norm(),
    })
}

/// First k_max + 1 double-eigenvalue pairs.
pub fn theta_points(k_max: u32, ell: f64) -> Result<Vec<ThetaPoint>, ExceptionalError> {
    (0..=k_max).map(|k| theta_point(k, ell)).collect()
}

/// The minus-branch zero with Re z = n nu, when one exists: for b = 0 the
/// zero sits at n nu itself; with complex mu the line is hit exactly when
/// exp(2 n pi sqrt(4b^2/a^2 - 1)) = (2 n nu + a)/(2 n nu - a).
pub fn line_zero(p: &Params<f64>, n: u32) -> Option<C64> {
    assert!(n >= 1, "line index must be positive");
    let (a, b, nu) = (p.a(), p.b(), p.nu());
    let nnu = n as f64 * nu;
    if b == 0.0 && a > 0.0 {
        return Some(C64::new(nnu, 0.0));
    }
    if !(a > 0.0 && a * a < 4.0 * b * b) || a >= 2.0 * nnu {
        return None;
    }
    let root = (4.0 * b * b / (a * a) - 1.0).sqrt();
    let lhs = (2.0 * n as f64 * PI * root).exp();
    let rhs = (2.0 * nnu + a) / (2.0 * nnu - a);
    if ((lhs - rhs) / rhs).abs() > 1e-12 {
        return None;
    }
    Some(C64::new(nnu, -nnu * root))
}

/// The unique b > a/2 placing a minus-branch zero on Re z = n nu.
pub fn solve_b_for_line_zero(a: f64, n: u32, ell: f64) -> Result<f64, ExceptionalError> {
    assert!(n >= 1);
    let nu = PI / ell;
    let nnu = n as f64 * nu;
    if !(a > 0.0 && a < 2.0 * nnu) {
        return Err(ExceptionalError::InvalidCoefficient {
            what: format!("need 0 < a < 2 n nu = {}, got {a}", 2.0 * nnu),
        });
    }
    let t = ((2.0 * nnu + a) / (2.0 * nnu - a)).ln() / (2.0 * n as f64 * PI);
    Ok(0.5 * a * (1.0 + t * t).sqrt())
}

/// The strip-placement parameter theta: the unique solution in
/// (a/(2 nu), inf) of 4 b^2 = a^2 (1 + ln^2((2 theta nu + a)/(2 theta nu - a))
/// / (4 theta^2 pi^2)). The right side decreases strictly in theta, so the
/// gap 4b^2 - rhs(theta) is monotone and bisection applies.
pub fn theta_parameter(p: &Params<f64>) -> Result<f64, ExceptionalError> {
    let (a, b, nu) = (p.a(), p.b(), p.nu());
    if a <= 0.0 {
        return Err(ExceptionalError::InvalidCoefficient {
            what: format!("need a > 0, got {a}"),
        });
    }
    if a * a >= 4.0 * b * b {
        return Err(ExceptionalError::WrongRegime(p.classify()));
    }
    let g = |theta: f64| {
        let ln = ((2.0 * theta * nu + a) / (2.0 * theta * nu - a)).ln();
        4.0 * b * b - a * a - a * a * ln * ln / (4.0 * theta * theta * PI * PI)
    };
    let lo = (a / (2.0 * nu)) * (1.0 + 1e-14);
    if g(lo) >= 0.0 {
        // theta is below floating resolution of the bracket endpoint.
        return Ok(lo);
    }
    let mut hi = (a / nu).max(1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e18 {
            return Err(ExceptionalError::BisectionFailure { lo, hi });
        }
    }
    bisect(lo, hi, g)
}

/// Expected minus-branch zero placement for the strip (n nu, (n+1) nu):
/// interior count and count on the left boundary line Re z = n nu.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpectedCount {
    pub count_minus: u32,
    pub on_line: u32,
}

const THETA_LINE_TOL: f64 = 1e-9;

/// Predicted zero counts for phi_minus around strip n. In the complex-pair
/// regime with a > 0 the strip holding theta gains a second interior zero,
/// and an integer theta pins one zero on the line instead; every other
/// regime keeps one zero per strip, on the line itself when b = 0.
pub fn strip_count_expected(p: &Params<f64>, n: u32) -> ExpectedCount {
    let regime = p.classify();
    match regime {
        Regime::Decoupled | Regime::NeumannPlusDamped => ExpectedCount {
            count_minus: 0,
            on_line: 1,
        },
        Regime::RealDistinct | Regime::Degenerate => ExpectedCount {
            count_minus: 1,
            on_line: 0,
        },
        Regime::ComplexPair => {
            if p.a() == 0.0 {
                // Selfadjoint coupling: real zeros strictly inside strips.
                return ExpectedCount {
                    count_minus: 1,
                    on_line: 0,
                };
            }
            let theta = theta_parameter(p).expect("complex pair with a > 0");
            let nf = n as f64;
            if (theta - nf).abs() < THETA_LINE_TOL {
                ExpectedCount {
                    count_minus: 1,
                    on_line: 1,
                }
            } else if nf < theta && theta < nf + 1.0 {
                ExpectedCount {
                    count_minus: 2,
                    on_line: 0,
                }
            } else {
                ExpectedCount {
                    count_minus: 1,
                    on_line: 0,
                }
            }
        }
    }
}

/// When theta sits on an integer within tolerance, the two open-strip
/// readings for strip n obtained by perturbing theta to either side; the
/// line configuration is structurally unstable so both are reported.
pub fn line_interpretations(p: &Params<f64>, n: u32) -> Option<[ExpectedCount; 2]> {
    if p.classify() != Regime::ComplexPair || p.a() <= 0.0 {
        return None;
    }
    let theta = theta_parameter(p).ok()?;
    let m = theta.round();
    if (theta - m).abs() >= THETA_LINE_TOL {
        return None;
    }
    let nf = n as f64;
    let count = |th: f64| -> u32 {
        if nf < th && th < nf + 1.0 {
            2
        } else {
            1
        }
    };
    Some([
        ExpectedCount {
            count_minus: count(m - 0.5 * THETA_LINE_TOL),
            on_line: 0,
        },
        ExpectedCount {
            count_minus: count(m + 0.5 * THETA_LINE_TOL),
            on_line: 0,
        },
    ])
}
