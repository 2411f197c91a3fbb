//! Composite Gauss-Legendre quadrature on [0, l].
//!
//! Used as the independent route for inner products: closed forms in
//! `charfn` are always cross-checked against (and near removable
//! singularities replaced by) panel quadrature of the pointwise mode
//! products. Eight nodes per panel; panel counts double until the requested
//! functional is self-consistent.

use crate::C64;

/// Abscissae/weights for 8-point Gauss-Legendre on [-1, 1] (positive half;
/// the rule is symmetric).
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Fixed composite grid: `panels` panels of 8 Gauss-Legendre nodes on [0, l].
#[derive(Debug, Clone)]
pub struct QuadGrid {
    pub ell: f64,
    pub panels: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadGrid {
    pub fn new(ell: f64, panels: usize) -> Self {
        assert!(ell > 0.0 && panels > 0);
        let width = ell / panels as f64;
        let mut nodes = Vec::with_capacity(8 * panels);
        let mut weights = Vec::with_capacity(8 * panels);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            let half = 0.5 * width;
            for k in (0..4).rev() {
                nodes.push(mid - half * GL8_X[k]);
                weights.push(half * GL8_W[k]);
            }
            for k in 0..4 {
                nodes.push(mid + half * GL8_X[k]);
                weights.push(half * GL8_W[k]);
            }
        }
        QuadGrid {
            ell,
            panels,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> C64>(&self, mut f: F) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(x) * w;
        }
        acc
    }

    /// Discrete inner product of sampled vector data, conjugate-linear in the
    /// second argument.
    pub fn inner_sampled(&self, f: &[[C64; 2]], g: &[[C64; 2]]) -> C64 {
        assert_eq!(f.len(), self.len());
        assert_eq!(g.len(), self.len());
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..f.len() {
            acc += (f[i][0] * g[i][0].conj() + f[i][1] * g[i][1].conj()) * self.weights[i];
        }
        acc
    }
}

/// Integrate with panel doubling until two successive refinements agree to
/// `rel_tol` (relative to the larger magnitude, floored at 1).
pub fn integrate_adaptive<F: FnMut(f64) -> C64>(
    ell: f64,
    mut f: F,
    rel_tol: f64,
) -> C64 {
    let mut panels = 64;
    let mut prev = QuadGrid::new(ell, panels).integrate(&mut f);
    loop {
        panels *= 2;
        let next = QuadGrid::new(ell, panels).integrate(&mut f);
        let scale = prev.norm().max(next.norm()).max(1.0);
        if (next - prev).norm() <= rel_tol * scale || panels >= 4096 {
            return next;
        }
        prev = next;
    }
}
