//! Pure-state q- and α-concurrences, h_q, concurrence, and the two-qubit mixed formula.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{hermitian_eigen, singular_values, ComplexMatrix, C64};
use crate::states::{schmidt_spectrum, DensityMatrix, PureState, SchmidtSpectrum};

/// Outputs in [−NEG_CLAMP, 0) are reported as exact zeros.
pub const NEG_CLAMP: f64 = 1e-12;

thread_local! {
    static MU_PERTURBATION: Cell<f64> = const { Cell::new(0.0) };
}

/// Adds `delta` to every normalization factor computed on this thread. Only
/// meant for mutation smoke tests of the acceptance suite.
#[doc(hidden)]
pub fn set_mu_perturbation(delta: f64) {
    MU_PERTURBATION.with(|c| c.set(delta));
}

#[doc(hidden)]
pub fn mu_perturbation() -> f64 {
    MU_PERTURBATION.with(|c| c.get())
}

/// μ(d, q) = d − d^{1−q}(1 + (d−1)^q), the maximum of C^t_q over d-level spectra.
pub fn mu(d: usize, q: f64) -> f64 {
    let df = d as f64;
    df - df.powf(1.0 - q) * (1.0 + (df - 1.0).powf(q)) + mu_perturbation()
}

pub(crate) fn clamp_small_negative(x: f64) -> f64 {
    if (-NEG_CLAMP..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Q,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    pub family: Family,
    pub exponent: f64,
    pub normalized: bool,
}

impl MeasureParams {
    pub fn new(family: Family, exponent: f64, normalized: bool) -> Result<Self> {
        match family {
            Family::Q => check_q(exponent)?,
            Family::Alpha => check_alpha(exponent)?,
        }
        if family == Family::Alpha && normalized {
            return Err(Error::BadExponent {
                value: exponent,
                reason: "the alpha family has no normalization",
            });
        }
        Ok(Self {
            family,
            exponent,
            normalized,
        })
    }

    pub fn q(q: f64) -> Result<Self> {
        Self::new(Family::Q, q, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub value: f64,
    pub params: MeasureParams,
    pub effective_dim: usize,
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() || q < 2.0 {
        return Err(Error::BadExponent {
            value: q,
            reason: "q must be a finite number >= 2",
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::BadExponent {
            value: alpha,
            reason: "alpha must lie in [0, 1/2]",
        });
    }
    Ok(())
}

/// x^a with 0^a := 0 for every a, including a = 0.
fn pow0(x: f64, a: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(a)
    }
}

/// 1 − Σλ^q.
pub fn q_concurrence_pure(lambda: &SchmidtSpectrum, q: f64) -> Result<f64> {
    check_q(q)?;
    let s: f64 = lambda.values().iter().map(|l| l.powf(q)).sum();
    Ok(clamp_small_negative(1.0 - s))
}

/// d − Σλ^q − Σ(1−λ)^q over a spectrum already of length d.
pub fn total_concurrence_values(lambda: &[f64], q: f64) -> f64 {
    let d = lambda.len() as f64;
    let s: f64 = lambda
        .iter()
        .map(|&l| l.powf(q) + (1.0 - l).powf(q))
        .sum();
    clamp_small_negative(d - s)
}

/// Unnormalized C^t_q with the spectrum padded to length `d`.
pub fn total_concurrence_pure(lambda: &SchmidtSpectrum, q: f64, d: usize) -> Result<f64> {
    check_q(q)?;
    if d == 0 || lambda.rank() > d {
        return Err(Error::BadDimension(d));
    }
    Ok(total_concurrence_values(&lambda.padded(d), q))
}

/// ∂C^t_q/∂λ_i = q[(1−λ_i)^{q−1} − λ_i^{q−1}].
pub fn total_concurrence_gradient(lambda: &[f64], q: f64) -> Vec<f64> {
    lambda
        .iter()
        .map(|&l| q * ((1.0 - l).powf(q - 1.0) - l.powf(q - 1.0)))
        .collect()
}

/// Normalized total q-concurrence of a bipartite pure state.
pub fn ctq_pure(psi: &PureState, q: f64) -> Result<MeasureValue> {
    measure_pure(psi, &MeasureParams::q(q)?)
}

/// Evaluates either family on a pure state.
pub fn measure_pure(psi: &PureState, params: &MeasureParams) -> Result<MeasureValue> {
    let d = psi.effective_dim();
    let lambda = schmidt_spectrum(psi);
    let value = match params.family {
        Family::Q => {
            let raw = total_concurrence_pure(&lambda, params.exponent, d)?;
            if params.normalized {
                clamp_small_negative(raw / mu(d, params.exponent))
            } else {
                raw
            }
        }
        Family::Alpha => ct_alpha_values(&lambda.padded(d), params.exponent)?,
    };
    Ok(MeasureValue {
        value,
        params: *params,
        effective_dim: d,
    })
}

fn ct_alpha_values(lambda: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let d = lambda.len() as f64;
    let a: f64 = lambda.iter().map(|&l| pow0(l, alpha)).sum();
    let b: f64 = lambda.iter().map(|&l| pow0(1.0 - l, alpha)).sum();
    Ok(clamp_small_negative(a - 1.0 + b - (d - 1.0)))
}

/// Σλ^α − 1 + Σ(1−λ)^α − (d−1) with 0^0 := 0.
pub fn ct_alpha_pure(psi: &PureState, alpha: f64) -> Result<f64> {
    ct_alpha_values(&schmidt_spectrum(psi).padded(psi.effective_dim()), alpha)
}

/// 2Σ p_i(1 − p_i).
pub fn classical_total_c2(p: &[f64]) -> Result<f64> {
    if p.is_empty()
        || p.iter().any(|&x| !(0.0..=1.0).contains(&x))
        || (p.iter().sum::<f64>() - 1.0).abs() > 1e-10
    {
        return Err(Error::NotADistribution);
    }
    Ok(2.0 * p.iter().map(|&x| x * (1.0 - x)).sum::<f64>())
}

/// [1 − ((1+√(1−x²))/2)^q − ((1−√(1−x²))/2)^q] / (1 − 2^{1−q}).
pub fn h_q(x: f64, q: f64) -> Result<f64> {
    if !(-NEG_CLAMP..=1.0 + NEG_CLAMP).contains(&x) || x.is_nan() {
        return Err(Error::DomainError(x));
    }
    let x = x.clamp(0.0, 1.0);
    let r = (1.0 - x * x).sqrt();
    let num = 1.0 - ((1.0 + r) / 2.0).powf(q) - ((1.0 - r) / 2.0).powf(q);
    Ok(clamp_small_negative(num / (1.0 - 2f64.powf(1.0 - q))))
}

/// √(2(1 − tr ρ_A²)).
pub fn concurrence_pure(psi: &PureState) -> f64 {
    let purity: f64 = schmidt_spectrum(psi).values().iter().map(|l| l * l).sum();
    (2.0 * (1.0 - purity)).max(0.0).sqrt()
}

/// Hill–Wootters concurrence of a two-qubit density matrix.
///
/// Uses the singular values of τ = Wᵀ(σy⊗σy)W with ρ = WW†, which avoids
/// the square-root amplification of eigenvalue noise near rank-deficient ρ.
pub fn wootters_concurrence_2qubit(rho: &DensityMatrix) -> Result<f64> {
    if rho.sig().dims() != [2, 2] {
        return Err(Error::WrongDimensions(rho.sig().dims().to_vec()));
    }
    let (values, vectors) = hermitian_eigen(rho.matrix())?;
    let roots: Vec<f64> = values
        .iter()
        .map(|&p| if p < 1e-13 { 0.0 } else { p.sqrt() })
        .collect();
    let w = ComplexMatrix::from_fn(4, 4, |i, k| vectors.get(i, k) * roots[k]);
    // σy⊗σy is real with entries ±1 on the anti-diagonal.
    let yy = ComplexMatrix::from_fn(4, 4, |i, j| {
        if i + j == 3 {
            C64::new(if i == 0 || i == 3 { -1.0 } else { 1.0 }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let tau = w.transpose().matmul(&yy).matmul(&w);
    let l = singular_values(&tau);
    Ok(clamp_small_negative((l[0] - l[1] - l[2] - l[3]).max(0.0)))
}

fn check_theorem3_q(q: f64) -> Result<()> {
    if !(2.0..=4.0).contains(&q) {
        return Err(Error::ExponentOutsideTheoremRange { q, range: "2 <= q <= 4" });
    }
    Ok(())
}

/// h_q of a caller-supplied qubit-qudit concurrence, 2 ≤ q ≤ 4.
pub fn ctq_from_concurrence(c: f64, q: f64) -> Result<MeasureValue> {
    check_theorem3_q(q)?;
    Ok(MeasureValue {
        value: h_q(c, q)?,
        params: MeasureParams::q(q)?,
        effective_dim: 2,
    })
}

/// Normalized C^t_q of a two-qubit mixed state via its Wootters concurrence.
pub fn ctq_two_qubit_mixed(rho: &DensityMatrix, q: f64) -> Result<MeasureValue> {
    check_theorem3_q(q)?;
    ctq_from_concurrence(wootters_concurrence_2qubit(rho)?, q)
}

/// F^t_q(ρ) = n − tr ρ^q − tr(I−ρ)^q over the full n-dimensional spectrum.
pub fn spectral_functional(rho: &DensityMatrix, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(total_concurrence_values(&rho.spectrum(), q))
}
