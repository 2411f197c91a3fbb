//! Parameter triple, regime classification and the boundary-matrix
//! eigenvalue pair.
//!
//! The operator on [0, l] is minus the second derivative on both components
//! with boundary conditions U'(0) + i M U(0) = 0 and U'(l) = 0, where
//! M = [[a, b], [-b, 0]]. Everything downstream is driven by the two
//! eigenvalues mu of M, mu_{+-} = (a +- delta) / 2 with
//! delta = sqrt(a^2 - 4 b^2) (taken as i sqrt(4 b^2 - a^2) when the radicand
//! is negative), so mu_+ + mu_- = a and mu_+ mu_- = b^2.

use crate::scalar::Real;
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("interval length must be positive and finite")]
    InvalidLength,
    #[error("coupling coefficients must be finite")]
    NonFinite,
}

/// Sign structure of a^2 - 4 b^2 plus the two decoupled special cases.
///
/// The comparison of a^2 against 4 b^2 is exact: the degenerate branch is a
/// measure-zero set that callers opt into by constructing b = +-a/2 exactly,
/// and nearby parameters are flagged as ill-conditioned downstream instead
/// of being silently reclassified here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// a = b = 0: two independent Neumann half-problems.
    Decoupled,
    /// b = 0, a != 0: an undamped Neumann component next to a damped one.
    NeumannPlusDamped,
    /// a^2 > 4 b^2, b != 0: two distinct real mu.
    RealDistinct,
    /// a^2 = 4 b^2 != 0: one real mu of algebraic multiplicity two.
    Degenerate,
    /// a^2 < 4 b^2: complex-conjugate mu pair.
    ComplexPair,
}

impl Regime {
    pub fn is_degenerate(self) -> bool {
        self == Regime::Degenerate
    }
}

/// The two eigenvalues of the coupling matrix together with the discriminant
/// square root used to build them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuPair<T> {
    pub delta: Complex<T>,
    pub mu_minus: Complex<T>,
    pub mu_plus: Complex<T>,
}

/// The boundary coupling matrix M = [[a, b], [-b, 0]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix<T> {
    pub entries: [[T; 2]; 2],
}

impl<T: Real> CouplingMatrix<T> {
    pub fn trace(&self) -> T {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> T {
        self.entries[0][0] * self.entries[1][1] - self.entries[0][1] * self.entries[1][0]
    }

    /// M v for a complex 2-vector v.
    pub fn apply(&self, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
        [
            v[0].scale(self.entries[0][0]) + v[1].scale(self.entries[0][1]),
            v[0].scale(self.entries[1][0]) + v[1].scale(self.entries[1][1]),
        ]
    }
}

/// Validated parameter triple (a, b, l); nu = pi / l is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T> {
    a: T,
    b: T,
    ell: T,
}

impl<T: Real> Params<T> {
    pub fn new(a: T, b: T, ell: T) -> Result<Self, ParamError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(ParamError::NonFinite);
        }
        if !(ell.is_finite() && ell > T::zero()) {
            return Err(ParamError::InvalidLength);
        }
        Ok(Params { a, b, ell })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn ell(&self) -> T {
        self.ell
    }

    /// Half-line frequency spacing nu = pi / l.
    pub fn nu(&self) -> T {
        T::PI() / self.ell
    }

    pub fn coupling_matrix(&self) -> CouplingMatrix<T> {
        CouplingMatrix {
            entries: [[self.a, self.b], [-self.b, T::zero()]],
        }
    }

    pub fn classify(&self) -> Regime {
        let z = T::zero();
        if self.b == z {
            return if self.a == z {
                Regime::Decoupled
            } else {
                Regime::NeumannPlusDamped
            };
        }
        let a2 = self.a * self.a;
        let b24 = (self.b * self.b) * T::c(4.0);
        if a2 > b24 {
            Regime::RealDistinct
        } else if a2 == b24 {
            Regime::Degenerate
        } else {
            Regime::ComplexPair
        }
    }

    /// mu_{+-} = (a +- delta)/2 with the discriminant branch fixed so that
    /// delta >= 0 when real and Im delta >= 0 when imaginary.
    pub fn mu_pair(&self) -> MuPair<T> {
        let a2 = self.a * self.a;
        let b24 = (self.b * self.b) * T::c(4.0);
        let half = T::c(0.5);
        let delta = if a2 >= b24 {
            Complex::new((a2 - b24).sqrt(), T::zero())
        } else {
            Complex::new(T::zero(), (b24 - a2).sqrt())
        };
        let a = Complex::new(self.a, T::zero());
        MuPair {
            delta,
            mu_minus: (a - delta).scale(half),
            mu_plus: (a + delta).scale(half),
        }
    }
}
