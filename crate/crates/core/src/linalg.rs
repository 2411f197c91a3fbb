//! Banded complex linear algebra: LU with partial pivoting, solves with the
//! matrix and its conjugate transpose, and a log-determinant with the phase
//! reduced to (-pi, pi]. Storage is LAPACK-style band layout with kl extra
//! superdiagonal rows reserved for pivoting fill.
//!
//! Also hosts the Hermitian power iteration used for operator-norm and Gram
//! extremal-eigenvalue estimates.

use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("zero pivot in column {col}: matrix is singular to working precision")]
    Singular { col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Band matrix of order `dim` with `kl` subdiagonals and `ku` superdiagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    pub dim: usize,
    pub kl: usize,
    pub ku: usize,
    ldab: usize,
    // Column j occupies data[j*ldab .. (j+1)*ldab]; entry (i, j) sits at row
    // offset kl + ku + i - j. Offsets [0, kl) are pivoting fill.
    data: Vec<C64>,
}

impl BandedMatrix {
    pub fn zeros(dim: usize, kl: usize, ku: usize) -> Self {
        assert!(dim > 0);
        let ldab = 2 * kl + ku + 1;
        BandedMatrix {
            dim,
            kl,
            ku,
            ldab,
            data: vec![C64::new(0.0, 0.0); ldab * dim],
        }
    }

    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.dim || j >= self.dim {
            return None;
        }
        let lo = j.saturating_sub(self.ku);
        let hi = (j + self.kl).min(self.dim - 1);
        if i < lo || i > hi {
            return None;
        }
        Some(j * self.ldab + self.kl + self.ku + i - j)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        self.offset(i, j).is_some()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self.offset(i, j) {
            Some(k) => self.data[k],
            None => C64::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let k = self
            .offset(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band"));
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let k = self
            .offset(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band"));
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for j in 0..self.dim {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.dim - 1);
            for i in lo..=hi {
                y[i] += self.data[j * self.ldab + self.kl + self.ku + i - j] * x[j];
            }
        }
        y
    }

    /// In-place LU with partial pivoting. Fill stays within kl + ku
    /// superdiagonals, which the layout reserves.
    pub fn factor(mut self) -> Result<BandedLu, LinalgError> {
        let n = self.dim;
        let (kl, ku, ldab) = (self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let mut ipiv = vec![0usize; n];
        let mut swaps = 0usize;
        for j in 0..n {
            let jlen = kl.min(n - 1 - j);
            // Pivot search down column j.
            let mut p = 0usize;
            let mut best = self.data[j * ldab + kv].norm_sqr();
            for i in 1..=jlen {
                let cand = self.data[j * ldab + kv + i].norm_sqr();
                if cand > best {
                    best = cand;
                    p = i;
                }
            }
            ipiv[j] = j + p;
            if best == 0.0 {
                return Err(LinalgError::Singular { col: j });
            }
            let jend = (j + kv).min(n - 1);
            if p != 0 {
                swaps += 1;
                for col in j..=jend {
                    let a = col * ldab + kv + j - col;
                    let b = a + p;
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[j * ldab + kv];
            for i in 1..=jlen {
                let k = j * ldab + kv + i;
                self.data[k] /= pivot;
            }
            for col in j + 1..=jend {
                let u = self.data[col * ldab + kv + j - col];
                if u.norm_sqr() == 0.0 {
                    continue;
                }
                for i in 1..=jlen {
                    let m = self.data[j * ldab + kv + i];
                    let k = col * ldab + kv + j + i - col;
                    self.data[k] -= m * u;
                }
            }
        }
        Ok(BandedLu {
            dim: n,
            kl,
            ku,
            ldab,
            data: self.data,
            ipiv,
            swaps,
        })
    }
}

/// Factored form P A = L U (row swaps recorded in `ipiv`).
#[derive(Debug, Clone)]
pub struct BandedLu {
    dim: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<C64>,
    ipiv: Vec<usize>,
    swaps: usize,
}

impl BandedLu {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
        if b.len() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                got: b.len(),
            });
        }
        let n = self.dim;
        let kv = self.kl + self.ku;
        let mut x = b.to_vec();
        // L^{-1} P b.
        for j in 0..n {
            if self.ipiv[j] != j {
                x.swap(j, self.ipiv[j]);
            }
            let jlen = self.kl.min(n - 1 - j);
            let xj = x[j];
            for i in 1..=jlen {
                let l = self.data[j * self.ldab + kv + i];
                x[j + i] -= l * xj;
            }
        }
        // U^{-1}.
        for j in (0..n).rev() {
            let u = self.data[j * self.ldab + kv];
            x[j] /= u;
            let xj = x[j];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                let uij = self.data[j * self.ldab + kv + i - j];
                x[i] -= uij * xj;
            }
        }
        Ok(x)
    }

    /// Solve A^H x = b via U^H (lower) then L^H (unit upper), then the
    /// permutation applied in reverse.
    pub fn solve_conj_transpose(&self, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
        if b.len() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                got: b.len(),
            });
        }
        let n = self.dim;
        let kv = self.kl + self.ku;
        let mut x = b.to_vec();
        // U^H y = b: forward substitution; column j of U is rows j-kv..=j.
        for j in 0..n {
            let lo = j.saturating_sub(kv);
            let mut s = x[j];
            for i in lo..j {
                let uij = self.data[j * self.ldab + kv + i - j];
                s -= uij.conj() * x[i];
            }
            x[j] = s / self.data[j * self.ldab + kv].conj();
        }
        // With pivoting the factorization is the product
        // A = P_0^T L_0 ... P_{n-1}^T L_{n-1} U, so the L^H substitution and
        // the reverse permutation must interleave step by step.
        for j in (0..n).rev() {
            let jlen = self.kl.min(n - 1 - j);
            let mut s = x[j];
            for i in 1..=jlen {
                let l = self.data[j * self.ldab + kv + i];
                s -= l.conj() * x[j + i];
            }
            x[j] = s;
            if self.ipiv[j] != j {
                x.swap(j, self.ipiv[j]);
            }
        }
        Ok(x)
    }

    /// log det A with Re = sum of log |U_jj| and Im reduced to (-pi, pi].
    /// Callers tracking a continuous phase along a path unwrap externally.
    pub fn log_det(&self) -> C64 {
        let kv = self.kl + self.ku;
        let mut log_abs = 0.0f64;
        let mut phase = 0.0f64;
        for j in 0..self.dim {
            let u = self.data[j * self.ldab + kv];
            log_abs += u.norm().ln();
            phase += u.arg();
        }
        if self.swaps % 2 == 1 {
            phase += std::f64::consts::PI;
        }
        let reduced = phase.rem_euclid(2.0 * std::f64::consts::PI);
        let reduced = if reduced > std::f64::consts::PI {
            reduced - 2.0 * std::f64::consts::PI
        } else {
            reduced
        };
        C64::new(log_abs, reduced)
    }
}

pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator given by
/// `apply`, by power iteration from a seeded random start. Returns the
/// Rayleigh quotient and the final unit iterate.
pub fn hermitian_top_eigenvalue<F>(
    dim: usize,
    iters: usize,
    seed: u64,
    mut apply: F,
) -> (f64, Vec<C64>)
where
    F: FnMut(&[C64]) -> Vec<C64>,
{
    assert!(dim > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n0 = norm(&v);
    for c in v.iter_mut() {
        *c /= n0;
    }
    let mut lambda = 0.0f64;
    for _ in 0..iters {
        let w = apply(&v);
        let nw = norm(&w);
        if nw == 0.0 {
            return (0.0, v);
        }
        lambda = dot(&v, &w).re;
        v = w;
        for c in v.iter_mut() {
            *c /= nw;
        }
    }
    let w = apply(&v);
    lambda = dot(&v, &w).re.max(lambda);
    (lambda, v)
}
