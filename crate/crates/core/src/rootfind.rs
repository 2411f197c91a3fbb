//! Contour-based zero counting and isolation for analytic functions.
//!
//! Counting is the argument principle evaluated by trapezoidal quadrature of
//! f'/f along rectangle edges; isolation is recursive quadrisection driven by
//! those counts, finished by multiplicity-aware Newton polishing. Counts are
//! exact integers when the quadrature resolves the contour, so every located
//! zero carries the winding number of its final isolating cell as a
//! certificate.

use crate::scalar::Real;
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootFindError {
    /// |f| nearly vanishes on the contour itself; counts are meaningless.
    #[error("zero on or too near contour: min |f| = {min_abs:.3e} vs max {max_abs:.3e}")]
    BoundaryZero { min_abs: f64, max_abs: f64 },
    /// The quadrature did not settle within 0.25 of an integer.
    #[error("winding number {re:.6} + {im:.6}i not within 0.25 of a nonnegative integer")]
    NonIntegerWinding { re: f64, im: f64 },
    /// Subdivision hit the depth limit before isolating.
    #[error("subdivision depth exhausted near ({re:.6}, {im:.6})")]
    DepthExceeded { re: f64, im: f64 },
    /// A cell at minimal size still reports more zeros than the cap.
    #[error("cluster of {count} zeros (cap {cap}) in minimal cell at ({re:.6}, {im:.6})")]
    MultiplicityCap {
        count: u32,
        cap: u32,
        re: f64,
        im: f64,
    },
    /// Child counts did not sum to the parent count after retries.
    #[error("child counts {got} != parent count {expected} after split retries")]
    Inconsistent { expected: u32, got: u32 },
    /// Newton polishing failed to certify the residual bound.
    #[error("newton polish failed in cell at ({re:.6}, {im:.6}): residual {residual:.3e}")]
    PolishFailed { re: f64, im: f64, residual: f64 },
}

/// Analytic function with a derivative; the default derivative is a central
/// difference, adequate for Newton and for f'/f quadrature of smooth oracle
/// determinants.
pub trait AnalyticFn<T: Real> {
    fn eval(&self, z: Complex<T>) -> Complex<T>;

    fn deriv(&self, z: Complex<T>) -> Complex<T> {
        let h = T::c(1e-5) * z.norm().max(T::one());
        let dh = Complex::new(h, T::zero());
        (self.eval(z + dh) - self.eval(z - dh)).unscale(h + h)
    }
}

/// Closure pair with an explicit derivative.
pub struct WithDeriv<F, G> {
    pub f: F,
    pub df: G,
}

impl<T, F, G> AnalyticFn<T> for WithDeriv<F, G>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T>,
    G: Fn(Complex<T>) -> Complex<T>,
{
    fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.f)(z)
    }

    fn deriv(&self, z: Complex<T>) -> Complex<T> {
        (self.df)(z)
    }
}

/// Closure with the default numeric derivative.
pub struct NumericDeriv<F>(pub F);

impl<T, F> AnalyticFn<T> for NumericDeriv<F>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T>,
{
    fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.0)(z)
    }
}

/// Axis-aligned closed rectangle in the z plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

impl<T: Real> Rect<T> {
    pub fn new(re_min: T, re_max: T, im_min: T, im_max: T) -> Self {
        assert!(re_min < re_max && im_min < im_max, "empty rect");
        Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn center(&self) -> Complex<T> {
        let half = T::c(0.5);
        Complex::new(
            (self.re_min + self.re_max) * half,
            (self.im_min + self.im_max) * half,
        )
    }

    /// Diagonal length; the subdivision size measure.
    pub fn diameter(&self) -> T {
        let w = self.re_max - self.re_min;
        let h = self.im_max - self.im_min;
        (w * w + h * h).sqrt()
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Counterclockwise corner cycle starting at the lower-left one.
    pub fn corners(&self) -> [Complex<T>; 4] {
        [
            Complex::new(self.re_min, self.im_min),
            Complex::new(self.re_max, self.im_min),
            Complex::new(self.re_max, self.im_max),
            Complex::new(self.re_min, self.im_max),
        ]
    }

    /// Four subcells split at the given interior fractions.
    pub fn split(&self, fx: T, fy: T) -> [Rect<T>; 4] {
        let xm = self.re_min + (self.re_max - self.re_min) * fx;
        let ym = self.im_min + (self.im_max - self.im_min) * fy;
        [
            Rect::new(self.re_min, xm, self.im_min, ym),
            Rect::new(xm, self.re_max, self.im_min, ym),
            Rect::new(self.re_min, xm, ym, self.im_max),
            Rect::new(xm, self.re_max, ym, self.im_max),
        ]
    }

    fn inflated(&self, amount: T) -> Rect<T> {
        Rect {
            re_min: self.re_min - amount,
            re_max: self.re_max + amount,
            im_min: self.im_min - amount,
            im_max: self.im_max + amount,
        }
    }
}

/// One isolated zero with its certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatedZero<T> {
    pub z: Complex<T>,
    pub multiplicity: u32,
    /// |f| at the polished point.
    pub newton_residual: T,
    /// Winding number of the final isolating cell.
    pub count_certificate: u32,
}

/// Largest phase step accepted along the contour; beyond this the sampling
/// cannot tell a passing zero from a winding increment.
const MAX_PHASE_JUMP: f64 = 1.0;

/// Number of zeros (with multiplicity) inside `rect` by the argument
/// principle, evaluated as a phase continuation: the winding is the sum of
/// principal arguments of consecutive sample ratios, which telescopes to an
/// exact multiple of 2 pi when every step is resolved. A step jumping by
/// more than [`MAX_PHASE_JUMP`] is unresolved, and the caller should retry
/// with more points or a perturbed contour.
pub fn count_zeros<T: Real, F: AnalyticFn<T>>(
    f: &F,
    rect: &Rect<T>,
    quad_points: usize,
) -> Result<u32, RootFindError> {
    assert!(quad_points >= 2);
    let corners = rect.corners();
    let n = T::from_usize(quad_points).unwrap();
    let mut total = T::zero();
    let mut prev = f.eval(corners[0]);
    let mut mags = Vec::with_capacity(4 * quad_points);
    mags.push(prev.norm());
    for e in 0..4 {
        let p = corners[e];
        let q = corners[(e + 1) % 4];
        let dz = (q - p).unscale(n);
        for k in 1..=quad_points {
            let z = p + dz.scale(T::from_usize(k).unwrap());
            let fv = f.eval(z);
            mags.push(fv.norm());
            if fv.norm() == T::zero() || prev.norm() == T::zero() {
                return Err(RootFindError::BoundaryZero {
                    min_abs: 0.0,
                    max_abs: mags.iter().fold(T::zero(), |a, &b| a.max(b)).to_f64().unwrap_or(f64::NAN),
                });
            }
            let jump = (fv / prev).arg();
            if jump.abs() >= T::c(MAX_PHASE_JUMP) {
                return Err(RootFindError::NonIntegerWinding {
                    re: jump.to_f64().unwrap_or(f64::NAN),
                    im: f64::NAN,
                });
            }
            total += jump;
            prev = fv;
        }
    }
    // A node vastly smaller than its neighbours means the contour grazes a
    // zero; the comparison is local because |f| may legitimately span many
    // orders of magnitude along a deep rectangle.
    let m = mags.len();
    for k in 0..m {
        let local = mags[(k + m - 1) % m].max(mags[(k + 1) % m]);
        if mags[k] < T::c(1e-12) * local {
            return Err(RootFindError::BoundaryZero {
                min_abs: mags[k].to_f64().unwrap_or(f64::NAN),
                max_abs: local.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let w = total / (T::c(2.0) * T::PI());
    let nearest = w.round();
    if (w - nearest).abs() > T::c(0.25) || nearest < T::zero() {
        return Err(RootFindError::NonIntegerWinding {
            re: w.to_f64().unwrap_or(f64::NAN),
            im: 0.0,
        });
    }
    Ok(nearest.to_u32().unwrap())
}

/// Tuning for [`isolate_zeros`]. Defaults implement the quadrisection recipe:
/// count, split until cells are smaller than `newton_cell`, polish with
/// z <- z - m f / f'. Cells holding an apparent cluster keep splitting below
/// `newton_cell` (down to `sep_cell`) so that near-double pairs separate;
/// genuine multiple zeros take the Newton fast path instead.
#[derive(Debug, Clone, Copy)]
pub struct IsolateOptions<T> {
    /// Cell diameter below which Newton polishing is attempted.
    pub newton_cell: T,
    /// Cell diameter below which an unresolved cluster is an error.
    pub sep_cell: T,
    /// Maximum multiplicity accepted in a minimal cell.
    pub cap: u32,
    /// Initial trapezoid intervals per edge; doubled until `max_quad`.
    pub base_quad: usize,
    pub max_quad: usize,
}

impl<T: Real> Default for IsolateOptions<T> {
    fn default() -> Self {
        IsolateOptions {
            newton_cell: T::c(1e-3),
            sep_cell: T::c(1e-9),
            cap: 2,
            base_quad: 256,
            max_quad: 4096,
        }
    }
}

/// Count with quadrature doubling and contour inflation when a zero sits on
/// (or within rounding of) an edge. The largest inflation exceeds the node
/// spacing at `max_quad`, so an exactly-on-edge zero is eventually pulled
/// strictly inside a resolvable contour.
fn count_robust<T: Real, F: AnalyticFn<T>>(
    f: &F,
    rect: &Rect<T>,
    opts: &IsolateOptions<T>,
) -> Result<u32, RootFindError> {
    let mut last = RootFindError::NonIntegerWinding {
        re: f64::NAN,
        im: f64::NAN,
    };
    for &rel in &[0.0, 1e-7, 1e-5, 2e-3] {
        let r = rect.inflated(rect.diameter() * T::c(rel));
        let mut qp = opts.base_quad;
        loop {
            match count_zeros(f, &r, qp) {
                Ok(c) => return Ok(c),
                Err(e @ RootFindError::BoundaryZero { .. }) => {
                    last = e;
                    break;
                }
                Err(e) => {
                    last = e;
                    if qp >= opts.max_quad {
                        break;
                    }
                    qp *= 2;
                }
            }
        }
    }
    Err(last)
}

fn newton_polish<T: Real, F: AnalyticFn<T>>(
    f: &F,
    cell: &Rect<T>,
    m: u32,
    opts: &IsolateOptions<T>,
) -> Option<LocatedZero<T>> {
    let mut z = cell.center();
    let mult = Complex::new(T::from_u32(m).unwrap(), T::zero());
    for _ in 0..80 {
        let fv = f.eval(z);
        let fp = f.deriv(z);
        if fp.norm() == T::zero() {
            break;
        }
        let step = mult * fv / fp;
        z -= step;
        if step.norm() <= T::c(1e-16) * z.norm().max(T::one()) {
            break;
        }
    }
    if m == 2 {
        // |f| bottoms out at sqrt(eps) away from a double zero; the same
        // point is a simple zero of f', so Newton there reaches full
        // precision. The derivative of f' comes from a central difference
        // of the exact f'.
        let h = Complex::new(T::c(1e-5) * z.norm().max(T::one()), T::zero());
        for _ in 0..40 {
            let g = f.deriv(z);
            let gp = (f.deriv(z + h) - f.deriv(z - h)) / (h + h);
            if gp.norm() == T::zero() {
                break;
            }
            let step = g / gp;
            z -= step;
            if step.norm() <= T::c(1e-15) * z.norm().max(T::one()) {
                break;
            }
        }
    }
    let residual = f.eval(z).norm();
    let tol = T::c(1e-10) * z.norm().max(T::one());
    if residual <= tol && (z - cell.center()).norm() < cell.diameter() {
        if m >= 2 {
            // Multiple-zero Newton can stall between members of a close pair
            // with a deceptively small residual. Accept only if a contour
            // around the polished point recounts exactly m zeros; the window
            // is wide enough to hold the rounding-split halves of a genuine
            // multiple zero and too narrow for a resolvable pair.
            let r = T::c(1e-6) * z.norm().max(T::one());
            let check = Rect::new(z.re - r, z.re + r, z.im - r, z.im + r);
            match count_robust(f, &check, opts) {
                Ok(c) if c == m => {}
                _ => return None,
            }
        }
        Some(LocatedZero {
            z,
            multiplicity: m,
            newton_residual: residual,
            count_certificate: m,
        })
    } else {
        None
    }
}

fn isolate_rec<T: Real, F: AnalyticFn<T>>(
    f: &F,
    cell: &Rect<T>,
    count: u32,
    depth: usize,
    max_depth: usize,
    opts: &IsolateOptions<T>,
    out: &mut Vec<LocatedZero<T>>,
) -> Result<(), RootFindError> {
    if count == 0 {
        return Ok(());
    }
    let diam = cell.diameter();
    let c = cell.center();
    if diam < opts.newton_cell {
        if count > opts.cap {
            return Err(RootFindError::MultiplicityCap {
                count,
                cap: opts.cap,
                re: c.re.to_f64().unwrap_or(f64::NAN),
                im: c.im.to_f64().unwrap_or(f64::NAN),
            });
        }
        if let Some(lz) = newton_polish(f, cell, count, opts) {
            out.push(lz);
            return Ok(());
        }
        // A count >= 2 cell that Newton cannot certify is usually a pair of
        // nearby simple zeros; keep splitting to separate them.
        if diam < opts.sep_cell {
            let residual = f.eval(c).norm().to_f64().unwrap_or(f64::NAN);
            return Err(RootFindError::PolishFailed {
                re: c.re.to_f64().unwrap_or(f64::NAN),
                im: c.im.to_f64().unwrap_or(f64::NAN),
                residual,
            });
        }
    }
    if depth >= max_depth {
        return Err(RootFindError::DepthExceeded {
            re: c.re.to_f64().unwrap_or(f64::NAN),
            im: c.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    const SPLITS: [(f64, f64); 4] = [(0.5, 0.5), (0.53, 0.47), (0.46, 0.55), (0.515, 0.485)];
    let mut got = 0;
    for &(fx, fy) in &SPLITS {
        let children = cell.split(T::c(fx), T::c(fy));
        let mut counts = [0u32; 4];
        let mut ok = true;
        for (i, ch) in children.iter().enumerate() {
            match count_robust(f, ch, opts) {
                Ok(c) => counts[i] = c,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        got = counts.iter().sum::<u32>();
        if got != count {
            continue;
        }
        let mark = out.len();
        let mut descent = Ok(());
        for (i, ch) in children.iter().enumerate() {
            descent = isolate_rec(f, ch, counts[i], depth + 1, max_depth, opts, out);
            if descent.is_err() {
                break;
            }
        }
        match descent {
            Ok(()) => return Ok(()),
            Err(RootFindError::DepthExceeded { .. })
            | Err(RootFindError::MultiplicityCap { .. })
            | Err(RootFindError::PolishFailed { .. }) => return descent,
            Err(_) => {
                // Tainted split (a zero rides a child edge); retry offsets.
                out.truncate(mark);
                continue;
            }
        }
    }
    Err(RootFindError::Inconsistent {
        expected: count,
        got,
    })
}

/// Isolate all zeros of `f` in `rect` with multiplicities. The sum of the
/// returned multiplicities equals the rectangle's winding count.
pub fn isolate_zeros<T: Real, F: AnalyticFn<T>>(
    f: &F,
    rect: &Rect<T>,
    max_depth: usize,
) -> Result<Vec<LocatedZero<T>>, RootFindError> {
    isolate_zeros_with(f, rect, max_depth, &IsolateOptions::default())
}

pub fn isolate_zeros_with<T: Real, F: AnalyticFn<T>>(
    f: &F,
    rect: &Rect<T>,
    max_depth: usize,
    opts: &IsolateOptions<T>,
) -> Result<Vec<LocatedZero<T>>, RootFindError> {
    let count = count_robust(f, rect, opts)?;
    let mut out = Vec::new();
    isolate_rec(f, rect, count, 0, max_depth, opts, &mut out)?;
    Ok(out)
}

/// Vertical strip rectangle C_n x [im_min, im_max] with C_n = (n nu, (n+1) nu).
pub fn strip_rect<T: Real>(
    p: &crate::params::Params<T>,
    n: u32,
    im_min: T,
    im_max: T,
) -> Rect<T> {
    let nu = p.nu();
    let lo = T::from_u32(n).unwrap() * nu;
    Rect::new(lo, lo + nu, im_min, im_max)
}

/// Default vertical search extents: deep enough for every zero depth the
/// localization bound allows at the given damping, with a thin margin above
/// the real axis. Mirrored when a < 0 (the adjoint case, zeros in the upper
/// half plane).
pub fn default_window<T: Real>(p: &crate::params::Params<T>) -> (T, T) {
    let depth =
        (p.a().abs() + T::one()) * (T::c(2.0) / p.ell()).max(T::one()) + T::one();
    if p.a() >= T::zero() {
        (-depth, T::c(0.5))
    } else {
        (-T::c(0.5), depth)
    }
}
