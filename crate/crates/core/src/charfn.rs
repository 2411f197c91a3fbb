//! Characteristic functions, interval modes and closed-form inner products.
//!
//! A nonzero z with phi_minus(z) phi_plus(z) = 0 squares to an eigenvalue
//! z^2; the two branches are
//!
//! ```text
//! phi_sigma(z) = (z - mu_sigma) e^{2 i z l} - (z + mu_sigma)
//! ```
//!
//! and the eigenfunctions are coefficient vectors times the scalar mode
//! e_z(x) = e^{i z x} + e^{2 i z l} e^{-i z x}. The generalized mode
//! e~_z complements e_z in a Jordan chain at degenerate coupling. Inner
//! products of e and e~ modes have closed forms used throughout the Gram
//! computations; each has a removable-singularity locus near which the
//! evaluator refuses and callers fall back to quadrature.
//!
//! Identities relied on here and checked in the tests:
//! - phi_sigma(-z) = e^{-2 i z l} phi_sigma(z): each branch's zero set is
//!   symmetric under z -> -z, so searches may be confined to Re z >= 0.
//! - phi_sigma(z) e^{-i z l} = (z - mu) e^{i z l} - (z + mu) e^{-i z l}:
//!   same zeros, bounded magnitude on deep rectangles. The contour engine
//!   always evaluates this rescaled form.
//! - det[(1 + e^{2izl}) M + (1 - e^{2izl}) z] = phi_minus(z) phi_plus(z).

use crate::params::{Params, Regime};
use crate::rootfind::AnalyticFn;
use crate::scalar::Real;
use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

/// Which factor of the characteristic product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Minus, Branch::Plus];
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharFnError {
    #[error("arguments too close to the removable singularity of the closed form")]
    NearSingular,
    #[error("z = 0 is outside the domain of this function")]
    ZeroFrequency,
    #[error("x = {0} outside the interval [0, l]")]
    OutOfDomain(f64),
    #[error("operation not defined in regime {0:?}")]
    WrongRegime(Regime),
    #[error("eigenvector (mu_sigma, -b) vanishes for this branch; use the Neumann substitute")]
    DegenerateEigenvector,
}

/// mu of the requested branch.
pub fn mu<T: Real>(p: &Params<T>, branch: Branch) -> Complex<T> {
    let pair = p.mu_pair();
    match branch {
        Branch::Minus => pair.mu_minus,
        Branch::Plus => pair.mu_plus,
    }
}

fn i_times<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

/// phi_sigma(z) = (z - mu) e^{2 i z l} - (z + mu).
pub fn phi<T: Real>(p: &Params<T>, branch: Branch, z: Complex<T>) -> Complex<T> {
    let m = mu(p, branch);
    let e = (i_times(T::c(2.0) * p.ell()) * z).exp();
    (z - m) * e - (z + m)
}

/// phi_sigma'(z) = e^{2 i z l} - 1 + 2 i l (z - mu) e^{2 i z l}.
pub fn phi_prime<T: Real>(p: &Params<T>, branch: Branch, z: Complex<T>) -> Complex<T> {
    let m = mu(p, branch);
    let e = (i_times(T::c(2.0) * p.ell()) * z).exp();
    e - Complex::<T>::one() + i_times(T::c(2.0) * p.ell()) * (z - m) * e
}

/// phi_sigma(z) e^{-i z l}: identical zero set, bounded on deep rectangles
/// where the plain form overflows.
pub fn phi_scaled<T: Real>(p: &Params<T>, branch: Branch, z: Complex<T>) -> Complex<T> {
    let m = mu(p, branch);
    let ep = (i_times(p.ell()) * z).exp();
    let em = (i_times(-p.ell()) * z).exp();
    (z - m) * ep - (z + m) * em
}

/// d/dz of [`phi_scaled`].
pub fn phi_scaled_prime<T: Real>(p: &Params<T>, branch: Branch, z: Complex<T>) -> Complex<T> {
    let m = mu(p, branch);
    let il = i_times(p.ell());
    let ep = (il * z).exp();
    let em = (-il * z).exp();
    (Complex::<T>::one() + il * (z - m)) * ep + (-Complex::<T>::one() + il * (z + m)) * em
}

/// The rescaled characteristic function of one branch as a contour-engine
/// problem.
#[derive(Debug, Clone, Copy)]
pub struct ScaledPhi<T> {
    pub params: Params<T>,
    pub branch: Branch,
}

impl<T: Real> AnalyticFn<T> for ScaledPhi<T> {
    fn eval(&self, z: Complex<T>) -> Complex<T> {
        phi_scaled(&self.params, self.branch, z)
    }

    fn deriv(&self, z: Complex<T>) -> Complex<T> {
        phi_scaled_prime(&self.params, self.branch, z)
    }
}

/// eta_sigma(z) = (mu + i l (z^2 - mu^2)) / (2 z^2), z != 0.
///
/// At a zero of phi_sigma, eta_sigma vanishes exactly when phi_sigma' does,
/// so |eta| is the multiplicity detector; eta -> i l / 2 as z grows.
pub fn eta<T: Real>(p: &Params<T>, branch: Branch, z: Complex<T>) -> Result<Complex<T>, CharFnError> {
    if z.norm() == T::zero() {
        return Err(CharFnError::ZeroFrequency);
    }
    let m = mu(p, branch);
    let num = m + i_times(p.ell()) * (z * z - m * m);
    Ok(num / (z * z).scale(T::c(2.0)))
}

fn check_domain<T: Real>(x: T, ell: T) -> Result<(), CharFnError> {
    if x < T::zero() || x > ell {
        Err(CharFnError::OutOfDomain(x.to_f64().unwrap_or(f64::NAN)))
    } else {
        Ok(())
    }
}

/// e_z(x) = e^{i z x} + e^{i z (2l - x)}; satisfies -e'' = z^2 e, e'(l) = 0.
pub fn e_mode<T: Real>(z: Complex<T>, x: T, ell: T) -> Result<Complex<T>, CharFnError> {
    check_domain(x, ell)?;
    Ok((z * i_times(x)).exp() + (z * i_times(T::c(2.0) * ell - x)).exp())
}

/// e_z'(x).
pub fn e_mode_deriv<T: Real>(z: Complex<T>, x: T, ell: T) -> Result<Complex<T>, CharFnError> {
    check_domain(x, ell)?;
    let d = (z * i_times(x)).exp() - (z * i_times(T::c(2.0) * ell - x)).exp();
    Ok(i_times(T::one()) * z * d)
}

/// e~_z(x) = (l - x)(e^{i z x} - e^{i z (2l - x)}) / (2 i z); satisfies
/// -e~'' - z^2 e~ = e_z with e~(l) = e~'(l) = 0.
pub fn e_tilde_mode<T: Real>(z: Complex<T>, x: T, ell: T) -> Result<Complex<T>, CharFnError> {
    check_domain(x, ell)?;
    if z.norm() == T::zero() {
        return Err(CharFnError::ZeroFrequency);
    }
    let d = (z * i_times(x)).exp() - (z * i_times(T::c(2.0) * ell - x)).exp();
    Ok(d.scale(ell - x) / (i_times(T::c(2.0)) * z))
}

/// e~_z'(x).
pub fn e_tilde_mode_deriv<T: Real>(
    z: Complex<T>,
    x: T,
    ell: T,
) -> Result<Complex<T>, CharFnError> {
    check_domain(x, ell)?;
    if z.norm() == T::zero() {
        return Err(CharFnError::ZeroFrequency);
    }
    let d = (z * i_times(x)).exp() - (z * i_times(T::c(2.0) * ell - x)).exp();
    let s = (z * i_times(x)).exp() + (z * i_times(T::c(2.0) * ell - x)).exp();
    Ok((-d + (i_times(T::one()) * z * s).scale(ell - x)) / (i_times(T::c(2.0)) * z))
}

/// Distance below which the closed-form inner products refuse to evaluate.
fn near_singular<T: Real>(d: Complex<T>) -> bool {
    d.norm() < T::c(1e-6)
}

/// Closed form of the L^2(0, l) product <e_z, e_zeta> (conjugate-linear in
/// the second slot). Refuses near z = +- conj(zeta); use [`norm_e_sq`] on
/// the diagonal and quadrature otherwise.
pub fn inner_e_e<T: Real>(
    z: Complex<T>,
    zeta: Complex<T>,
    ell: T,
) -> Result<Complex<T>, CharFnError> {
    let cz = zeta.conj();
    let w = z - cz;
    let s = z + cz;
    if near_singular(w) || near_singular(s) {
        return Err(CharFnError::NearSingular);
    }
    let i = i_times(T::one());
    let ew = (i_times(T::c(2.0) * ell) * w).exp();
    let ez = (i_times(T::c(2.0) * ell) * z).exp();
    let ec = (i_times(-T::c(2.0) * ell) * cz).exp();
    Ok((ew - Complex::<T>::one()) / (i * w) + (ez - ec) / (i * s))
}

/// Closed form of <e_z, e~_zeta>. Same refusal loci plus zeta != 0.
pub fn inner_e_etilde<T: Real>(
    z: Complex<T>,
    zeta: Complex<T>,
    ell: T,
) -> Result<Complex<T>, CharFnError> {
    let cz = zeta.conj();
    if cz.norm() < T::c(1e-6) {
        return Err(CharFnError::ZeroFrequency);
    }
    let w = z - cz;
    let s = z + cz;
    if near_singular(w) || near_singular(s) {
        return Err(CharFnError::NearSingular);
    }
    let i = i_times(T::one());
    let two = T::c(2.0);
    let ew = (i_times(two * ell) * w).exp();
    let ez = (i_times(two * ell) * z).exp();
    let ec = (i_times(-two * ell) * cz).exp();
    let t1 = -(ew + Complex::<T>::one()).scale(ell) / (cz * w).scale(two);
    let t2 = (ew - Complex::<T>::one()) / (i * cz * w * w).scale(two);
    let t3 = (ez + ec).scale(ell) / (cz * s).scale(two);
    let t4 = -(ez - ec) / (i * cz * s * s).scale(two);
    Ok(t1 + t2 + t3 + t4)
}

/// K(alpha) = int_0^L u^2 e^{-i alpha u} du; series below |alpha| L = 1e-2
/// keeps full precision through the removable singularity at alpha = 0.
fn quadratic_exp_integral<T: Real>(alpha: Complex<T>, l: T) -> Complex<T> {
    if alpha.norm() * l < T::c(1e-2) {
        // sum_m (-i alpha)^m L^{m+3} / (m! (m+3)); eight terms leave a
        // remainder below 1e-16 L^3 at the cutoff.
        let step = -i_times(l) * alpha;
        let mut term = Complex::new(l * l * l / T::c(3.0), T::zero());
        let mut acc = term;
        for m in 1..8u32 {
            let mf = T::from_u32(m).unwrap();
            term = term * step * ((mf + T::c(2.0)) / (mf * (mf + T::c(3.0))));
            acc += term;
        }
        return acc;
    }
    let beta = -i_times(T::one()) * alpha;
    let ll = Complex::new(l, T::zero());
    let inv = Complex::<T>::one() / beta;
    let two = T::c(2.0);
    (beta * l).exp() * (ll * ll * inv - ll.scale(two) * inv * inv + (inv * inv * inv).scale(two))
        - (inv * inv * inv).scale(two)
}

/// Closed form of <e~_z, e~_zeta>: both frequencies must be nonzero, but
/// there are no other refusal loci (the kernel integral is entire in the
/// frequency differences).
pub fn inner_etilde_etilde<T: Real>(
    z: Complex<T>,
    zeta: Complex<T>,
    ell: T,
) -> Result<Complex<T>, CharFnError> {
    if z.norm() == T::zero() || zeta.norm() == T::zero() {
        return Err(CharFnError::ZeroFrequency);
    }
    let cz = zeta.conj();
    let w = z - cz;
    let s = z + cz;
    let j = |alpha: Complex<T>| (i_times(ell) * alpha).exp() * quadratic_exp_integral(alpha, ell);
    let two_l = T::c(2.0) * ell;
    let num = j(w) - (i_times(-two_l) * cz).exp() * j(s) - (i_times(two_l) * z).exp() * j(-s)
        + (i_times(two_l) * w).exp() * j(-w);
    Ok(num / (z * cz).scale(T::c(4.0)))
}

fn sinc<T: Real>(t: T) -> T {
    if t.abs() < T::c(1e-8) {
        T::one() - t * t / T::c(6.0)
    } else {
        t.sin() / t
    }
}

fn sinhc<T: Real>(t: T) -> T {
    if t.abs() < T::c(1e-8) {
        T::one() + t * t / T::c(6.0)
    } else {
        t.sinh() / t
    }
}

/// ||e_z||^2 = e^{-2 Im z l} (sinh(2 Im z l)/Im z + sin(2 Re z l)/Re z),
/// stable through both removable singularities. Equals 2l at z = n nu and
/// 4l at z = 0.
pub fn norm_e_sq<T: Real>(z: Complex<T>, ell: T) -> T {
    let two_l = T::c(2.0) * ell;
    let damp = (-two_l * z.im).exp();
    damp * (two_l * sinhc(two_l * z.im) + two_l * sinc(two_l * z.re))
}

/// (1 + e^{2izl}) M + (1 - e^{2izl}) z: the boundary matrix whose kernel
/// holds the coefficient vector of an eigenfunction. Its determinant equals
/// phi_minus(z) phi_plus(z).
pub fn boundary_matrix<T: Real>(p: &Params<T>, z: Complex<T>) -> [[Complex<T>; 2]; 2] {
    let e = (i_times(T::c(2.0) * p.ell()) * z).exp();
    let one_plus = Complex::<T>::one() + e;
    let one_minus = Complex::<T>::one() - e;
    let m = p.coupling_matrix().entries;
    [
        [
            one_plus.scale(m[0][0]) + one_minus * z,
            one_plus.scale(m[0][1]),
        ],
        [
            one_plus.scale(m[1][0]),
            one_plus.scale(m[1][1]) + one_minus * z,
        ],
    ]
}

/// A two-component interval function built from the scalar modes: either a
/// coefficient vector times e_z, or a Jordan partner combining e~_z and e_z.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeVector<T> {
    Pure {
        coeff: [Complex<T>; 2],
        z: Complex<T>,
    },
    Generalized {
        coeff_tilde: [Complex<T>; 2],
        coeff_e: [Complex<T>; 2],
        z: Complex<T>,
    },
}

impl<T: Real> ModeVector<T> {
    pub fn frequency(&self) -> Complex<T> {
        match self {
            ModeVector::Pure { z, .. } => *z,
            ModeVector::Generalized { z, .. } => *z,
        }
    }

    pub fn is_generalized(&self) -> bool {
        matches!(self, ModeVector::Generalized { .. })
    }

    pub fn eval(&self, x: T, ell: T) -> Result<[Complex<T>; 2], CharFnError> {
        match self {
            ModeVector::Pure { coeff, z } => {
                let e = e_mode(*z, x, ell)?;
                Ok([coeff[0] * e, coeff[1] * e])
            }
            ModeVector::Generalized {
                coeff_tilde,
                coeff_e,
                z,
            } => {
                let e = e_mode(*z, x, ell)?;
                let t = e_tilde_mode(*z, x, ell)?;
                Ok([
                    coeff_tilde[0] * t + coeff_e[0] * e,
                    coeff_tilde[1] * t + coeff_e[1] * e,
                ])
            }
        }
    }

    pub fn eval_deriv(&self, x: T, ell: T) -> Result<[Complex<T>; 2], CharFnError> {
        match self {
            ModeVector::Pure { coeff, z } => {
                let e = e_mode_deriv(*z, x, ell)?;
                Ok([coeff[0] * e, coeff[1] * e])
            }
            ModeVector::Generalized {
                coeff_tilde,
                coeff_e,
                z,
            } => {
                let e = e_mode_deriv(*z, x, ell)?;
                let t = e_tilde_mode_deriv(*z, x, ell)?;
                Ok([
                    coeff_tilde[0] * t + coeff_e[0] * e,
                    coeff_tilde[1] * t + coeff_e[1] * e,
                ])
            }
        }
    }

    /// Domain-membership defect: |Phi'(0) + i M Phi(0)| + |Phi'(l)|. The
    /// interior eigen-equation holds identically for these modes, so this
    /// is the whole eigen-equation residual.
    pub fn boundary_residual(&self, p: &Params<T>) -> Result<T, CharFnError> {
        let ell = p.ell();
        let v0 = self.eval(T::zero(), ell)?;
        let d0 = self.eval_deriv(T::zero(), ell)?;
        let dl = self.eval_deriv(ell, ell)?;
        let mv = p.coupling_matrix().apply(v0);
        let i = i_times(T::one());
        let r0 = [d0[0] + i * mv[0], d0[1] + i * mv[1]];
        Ok(vec2_norm(r0) + vec2_norm(dl))
    }

    pub fn scaled(&self, s: Complex<T>) -> ModeVector<T> {
        match self {
            ModeVector::Pure { coeff, z } => ModeVector::Pure {
                coeff: [coeff[0] * s, coeff[1] * s],
                z: *z,
            },
            ModeVector::Generalized {
                coeff_tilde,
                coeff_e,
                z,
            } => ModeVector::Generalized {
                coeff_tilde: [coeff_tilde[0] * s, coeff_tilde[1] * s],
                coeff_e: [coeff_e[0] * s, coeff_e[1] * s],
                z: *z,
            },
        }
    }
}

pub fn vec2_norm<T: Real>(v: [Complex<T>; 2]) -> T {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// Eigenmode (mu_sigma, -b) e_z. Rejects the decoupled regime (both
/// coefficients vanish) and the branch whose eigenvector degenerates at
/// b = 0; callers substitute [`neumann_mode`] there.
pub fn make_pure_mode<T: Real>(
    p: &Params<T>,
    branch: Branch,
    z: Complex<T>,
) -> Result<ModeVector<T>, CharFnError> {
    let regime = p.classify();
    if regime == Regime::Decoupled {
        return Err(CharFnError::WrongRegime(regime));
    }
    let m = mu(p, branch);
    let coeff = [m, Complex::new(-p.b(), T::zero())];
    let scale = T::one() + m.norm() + p.b().abs();
    if vec2_norm(coeff) <= T::c(1e-14) * scale {
        return Err(CharFnError::DegenerateEigenvector);
    }
    Ok(ModeVector::Pure { coeff, z })
}

/// The undamped-component eigenmode (0, 1) e_z used in place of the
/// degenerate (mu_minus, -b) = (0, 0) when b = 0.
pub fn neumann_mode<T: Real>(z: Complex<T>) -> ModeVector<T> {
    ModeVector::Pure {
        coeff: [Complex::<T>::zero(), Complex::<T>::one()],
        z,
    }
}

/// Jordan partner A_1 e~_z + A_2 e_z at degenerate coupling, with
/// A_1 = (a/2, -b) and A_2 = (eta(z), 0); (M - mu) A_2 = eta A_1 holds by
/// construction.
pub fn make_generalized<T: Real>(
    p: &Params<T>,
    z: Complex<T>,
) -> Result<ModeVector<T>, CharFnError> {
    let regime = p.classify();
    if regime != Regime::Degenerate {
        return Err(CharFnError::WrongRegime(regime));
    }
    let half_a = T::c(0.5) * p.a();
    let coeff_tilde = [
        Complex::new(half_a, T::zero()),
        Complex::new(-p.b(), T::zero()),
    ];
    let ev = eta(p, Branch::Minus, z)?;
    let coeff_e = [ev, Complex::<T>::zero()];
    Ok(ModeVector::Generalized {
        coeff_tilde,
        coeff_e,
        z,
    })
}
