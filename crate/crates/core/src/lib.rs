//! Spectral toolkit for a two-component Schrodinger operator on an interval
//! whose components couple only through a first-order boundary condition at
//! the left endpoint. The operator acts as minus the second derivative on
//! both components; the boundary matrix mixes them and damps the first one,
//! so the spectrum is complex and the eigenfunction family is a Riesz basis
//! rather than an orthonormal one.
//!
//! Module map:
//! - [`params`]: parameter triple (a, b, l), regime classification, the
//!   boundary-matrix eigenvalue pair mu.
//! - [`charfn`]: characteristic functions phi whose zeros square to the
//!   eigenvalues, mode functions and closed-form inner products.
//! - [`rootfind`]: argument-principle contour counting and zero isolation.
//! - [`spectrum`]: assembled, certified spectral truncations and derived
//!   quantities (gap, counting function, asymptotics, distance to the
//!   spectral rays).
//! - [`exceptional`]: the countable set of coefficient pairs with a double
//!   eigenvalue, line-zero constructions and per-strip count predictions.
//! - [`riesz`]: the eigen/root-vector family, Gram matrices, frame bounds,
//!   expansion of grid data.
//! - [`oracle`]: independent checks (shooting determinant, finite-difference
//!   discretization, discrete counting, resolvent norm estimation).
//! - [`evolve`]: Crank-Nicolson time stepping, energy balance, decay rates.
//!
//! The analytic kernels (`params`, `charfn`, `rootfind`) are generic over the
//! floating scalar via [`scalar::Real`]; everything downstream is pinned to
//! f64 through the aliases below because the certification tolerances are
//! absolute double-precision quantities.

pub mod charfn;
pub mod evolve;
pub mod exceptional;
pub mod linalg;
pub mod oracle;
pub mod params;
pub mod quad;
pub mod riesz;
pub mod rootfind;
pub mod sampling;
pub mod scalar;
pub mod spectrum;

/// Complex double used by the assembled pipeline.
pub type C64 = num_complex::Complex<f64>;
/// Double-precision parameter triple.
pub type Params64 = params::Params<f64>;
/// Double-precision mu pair.
pub type MuPair64 = params::MuPair<f64>;
/// Double-precision boundary coupling matrix.
pub type CouplingMatrix64 = params::CouplingMatrix<f64>;
/// Double-precision search rectangle.
pub type Rect64 = rootfind::Rect<f64>;
/// Double-precision located zero.
pub type LocatedZero64 = rootfind::LocatedZero<f64>;
/// Double-precision mode vector.
pub type ModeVector64 = charfn::ModeVector<f64>;

pub use charfn::Branch;
pub use params::Regime;
