// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! State functionals: von Neumann, Rényi and linear entropies (in nats),
//! and the α-expectation `tr(Q rho^α) / tr(rho^α)`.
//!
//! Spectra are clipped per [`clip_spectrum`]: eigenvalues in `[-floor, 0)`
//! count as zero, with `0 ln 0 = 0` and `0^α = 0`.

use crate::error::{Error, Result};
use crate::operator::{
    clip_spectrum, expectation, same_dim, spectral_decompose, trace_product, DensityMatrix,
    Hermitian,
};
use crate::tolerance;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Rényi index must be positive, got {alpha}"
        )))
    }
}

pub(crate) fn near_unit_alpha(alpha: f64) -> bool {
    (alpha - 1.0).abs() < tolerance::RENYI_UNIT_WINDOW
}

pub(crate) fn von_neumann_of_spectrum(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

pub(crate) fn power_trace_of_spectrum(p: &[f64], alpha: f64) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| x.powf(alpha)).sum()
}

/// Rényi entropy of a clipped spectrum; `alpha` must already be validated.
pub(crate) fn renyi_of_spectrum(p: &[f64], alpha: f64) -> f64 {
    if near_unit_alpha(alpha) {
        von_neumann_of_spectrum(p)
    } else {
        power_trace_of_spectrum(p, alpha).ln() / (1.0 - alpha)
    }
}

fn clipped_spectrum(rho: &DensityMatrix, floor: f64) -> Result<Vec<f64>> {
    clip_spectrum(&rho.spectrum()?, floor)
}

/// `S = -tr(rho ln rho)`.
pub fn von_neumann(rho: &DensityMatrix) -> Result<f64> {
    von_neumann_with(rho, tolerance::CLIP_FLOOR)
}

pub fn von_neumann_with(rho: &DensityMatrix, clip_floor: f64) -> Result<f64> {
    Ok(von_neumann_of_spectrum(&clipped_spectrum(rho, clip_floor)?))
}

/// `S_α = ln(tr rho^α) / (1 - α)`; `|α - 1| < 1e-6` returns the von Neumann entropy.
pub fn renyi(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    renyi_with(rho, alpha, tolerance::CLIP_FLOOR)
}

pub fn renyi_with(rho: &DensityMatrix, alpha: f64, clip_floor: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(renyi_of_spectrum(
        &clipped_spectrum(rho, clip_floor)?,
        alpha,
    ))
}

/// `1 - tr(rho^2)`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - trace_product(rho.matrix(), rho.matrix()).re
}

/// `<Q>_α = tr(Q rho^α) / tr(rho^α)`.
pub fn alpha_expectation(rho: &DensityMatrix, q: &Hermitian, alpha: f64) -> Result<f64> {
    alpha_expectation_with(rho, q, alpha, tolerance::CLIP_FLOOR)
}

pub fn alpha_expectation_with(
    rho: &DensityMatrix,
    q: &Hermitian,
    alpha: f64,
    clip_floor: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    same_dim("alpha expectation", rho.dim(), q.matrix())?;
    if alpha == 1.0 {
        return expectation(rho, q);
    }
    let spec = spectral_decompose(rho.as_hermitian())?;
    let p = clip_spectrum(&spec.eigenvalues, clip_floor)?;
    let norm = power_trace_of_spectrum(&p, alpha);
    if norm < tolerance::POWER_TRACE_FLOOR {
        return Err(Error::Underflow(format!("tr rho^{alpha} = {norm:e}")));
    }
    // tr(Q U diag(p^α) U^dag) = sum_k p_k^α <u_k|Q|u_k>
    let u = &spec.eigenvectors;
    let qu = q.matrix() * u;
    let weighted: f64 = p
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(k, &x)| x.powf(alpha) * u.column(k).dotc(&qu.column(k)).re)
        .sum();
    Ok(weighted / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;
    use crate::random::SeededRng;

    #[test]
    fn von_neumann_examples() {
        assert_eq!(
            von_neumann(&DensityMatrix::basis(2, 0).unwrap()).unwrap(),
            0.0
        );
        let mixed = von_neumann(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((mixed - 2f64.ln()).abs() < 1e-15);
        let s = von_neumann(&DensityMatrix::diagonal(&[0.75, 0.25]).unwrap()).unwrap();
        let expected = -0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
        assert!((s - expected).abs() < 1e-15);
        assert!((s - 0.562335).abs() < 1e-6);
    }

    #[test]
    fn von_neumann_rejects_negative_spectrum() {
        let bad = DensityMatrix::new_unchecked(
            Hermitian::from_real_diagonal(&[1.0 + 1e-8, -1e-8]).into_inner(),
        );
        assert!(matches!(
            von_neumann(&bad),
            Err(Error::NegativeEigenvalue { .. })
        ));
        assert!(von_neumann_with(&bad, 1e-7).is_ok());
    }

    #[test]
    fn renyi_examples() {
        for d in 2..5 {
            let rho = DensityMatrix::maximally_mixed(d);
            for alpha in [0.5, 2.0, 3.0] {
                assert!((renyi(&rho, alpha).unwrap() - (d as f64).ln()).abs() < 1e-14);
            }
        }
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        assert!((renyi(&rho, 2.0).unwrap() + 0.625f64.ln()).abs() < 1e-15);

        let rho = SeededRng::new(8).density(4);
        let s = von_neumann(&rho).unwrap();
        for alpha in [1.0 - 1e-4, 1.0 + 1e-4] {
            assert!((renyi(&rho, alpha).unwrap() - s).abs() < 1e-3);
        }
        assert_eq!(renyi(&rho, 1.0 + 1e-7).unwrap(), s);
    }

    #[test]
    fn renyi_domain() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(renyi(&rho, 0.0), Err(Error::Domain(_))));
        assert!(matches!(renyi(&rho, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn linear_entropy_examples() {
        assert!(linear_entropy(&DensityMatrix::basis(3, 1).unwrap()).abs() < 1e-15);
        assert!((linear_entropy(&DensityMatrix::maximally_mixed(2)) - 0.5).abs() < 1e-15);
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        assert!((linear_entropy(&rho) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn alpha_expectation_examples() {
        let rho = SeededRng::new(2).density(3);
        let q = SeededRng::new(3).hermitian(3);
        assert_eq!(
            alpha_expectation(&rho, &q, 1.0).unwrap(),
            expectation(&rho, &q).unwrap()
        );
        for alpha in [0.3, 1.7, 2.0] {
            let one = alpha_expectation(&rho, &Hermitian::identity(3), alpha).unwrap();
            assert!((one - 1.0).abs() < 1e-14);
        }
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        let v = alpha_expectation(&rho, &pauli::z(), 2.0).unwrap();
        assert!((v - 0.8).abs() < 1e-15);
    }

    #[test]
    fn alpha_expectation_domain() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(alpha_expectation(&rho, &pauli::z(), 0.0).is_err());
    }
}
