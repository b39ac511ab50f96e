// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random operators.
//!
//! All randomness flows through [`SeededRng`], a ChaCha8 stream seeded from a
//! single `u64` (`rand_chacha::ChaCha8Rng::seed_from_u64`). The stream is
//! platform independent, so every fixture built from a seed is
//! bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{c, hermitize_unchecked, CMatrix, CVector, DensityMatrix, Hermitian, C64};

#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.random::<f64>()
    }

    /// Uniform integer on `[lo, hi]`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        self.0.random_range(lo..=hi)
    }

    /// Raw 64-bit draw, used to derive child seeds.
    pub fn next_u64(&mut self) -> u64 {
        self.0.random()
    }

    /// Standard complex normal, `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c(s * self.normal(), s * self.normal())
    }

    /// Matrix of i.i.d. standard complex normals.
    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMatrix {
        // Fill row by row so the draw order is independent of storage layout.
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.complex_normal();
            }
        }
        m
    }

    /// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
    /// `diag(R)` absorbed into `Q`, so that `R` has a positive real diagonal.
    pub fn haar_unitary(&mut self, dim: usize) -> CMatrix {
        let qr = self.ginibre(dim, dim).qr();
        let (mut q, r) = qr.unpack();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c(1.0, 0.0)
            };
            q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
        q
    }

    /// Hermitian matrix from the Gaussian unitary ensemble, scaled by `1/sqrt(dim)`.
    pub fn hermitian(&mut self, dim: usize) -> Hermitian {
        let g = self.ginibre(dim, dim);
        hermitize_unchecked(g).scale(1.0 / (dim as f64).sqrt())
    }

    pub fn unit_vector(&mut self, dim: usize) -> CVector {
        let v = CVector::from_iterator(dim, (0..dim).map(|_| self.complex_normal()));
        let n = v.norm();
        v / c(n, 0.0)
    }

    /// Full-rank mixed state `G G^dag / tr(G G^dag)`.
    pub fn density(&mut self, dim: usize) -> DensityMatrix {
        let g = self.ginibre(dim, dim);
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new_unchecked(hermitize_unchecked(m / c(tr, 0.0)).into_inner())
    }

    /// Probability vector drawn uniformly from the simplex.
    pub fn simplex(&mut self, len: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..len)
            .map(|_| -self.uniform(f64::MIN_POSITIVE, 1.0).ln())
            .collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{identity, validate_density};

    #[test]
    fn haar_is_unitary_and_deterministic() {
        for dim in 1..=8 {
            let u = SeededRng::new(7).haar_unitary(dim);
            assert!((u.adjoint() * &u - identity(dim)).norm() < 1e-13);
            assert_eq!(u, SeededRng::new(7).haar_unitary(dim));
        }
    }

    #[test]
    fn random_density_is_valid() {
        let mut rng = SeededRng::new(3);
        for dim in 1..=6 {
            assert!(validate_density(rng.density(dim).matrix()).passed());
        }
    }

    #[test]
    fn simplex_sums_to_one() {
        let p = SeededRng::new(1).simplex(5);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x > 0.0));
    }
}
