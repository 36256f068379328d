//! Trace-norm lower bounds, the exponent-monotonicity bound, and the threshold s.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{check_q, mu};
use crate::qlinalg::{partial_transpose, realign, trace_norm};
use crate::states::DensityMatrix;

/// Trace norms above 1 + this certify entanglement.
pub const CRITERION_TOL: f64 = 1e-9;

/// Bracket searched for the d = 2 root of the stationary second derivative.
pub const S_BRACKET: (f64, f64) = (3.0, 3.6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub ppt_norm: f64,
    pub realign_norm: f64,
    /// In normalized units.
    pub lower_bound: f64,
    pub q: f64,
    pub d: usize,
    pub entangled_by_ppt: bool,
    pub entangled_by_realignment: bool,
}

/// Normalized lower bound on C^t_q from N = max(‖ρ^Γ‖₁, ‖R(ρ)‖₁).
///
/// d ≥ 3 or q ≥ 4: (N−1)²/(d−1)².  d = 2, s ≤ q < 4: (N−1)²/(2(1−2^{1−s})).
pub fn lower_bound_thm2(rho: &DensityMatrix, q: f64) -> Result<BoundReport> {
    check_q(q)?;
    let (da, db) = rho
        .sig()
        .as_bipartite()
        .ok_or_else(|| Error::WrongDimensions(rho.sig().dims().to_vec()))?;
    if da != db {
        return Err(Error::UnequalLocalDims { da, db });
    }
    let d = da;
    let s = s_threshold()?;
    if d == 2 && q < s {
        return Err(Error::ExponentOutsideTheoremRange {
            q,
            range: "q >= s (about 3.339) for d = 2",
        });
    }
    let ppt_norm = trace_norm(&partial_transpose(rho.matrix(), rho.sig())?);
    let realign_norm = trace_norm(&realign(rho.matrix(), rho.sig())?);
    let n = ppt_norm.max(realign_norm);
    let excess = (n - 1.0).max(0.0);
    let lower_bound = if d >= 3 || q >= 4.0 {
        excess * excess / ((d - 1) as f64).powi(2)
    } else {
        excess * excess / (2.0 * (1.0 - 2f64.powf(1.0 - s)))
    };
    Ok(BoundReport {
        ppt_norm,
        realign_norm,
        lower_bound,
        q,
        d,
        entangled_by_ppt: ppt_norm > 1.0 + CRITERION_TOL,
        entangled_by_realignment: realign_norm > 1.0 + CRITERION_TOL,
    })
}

/// [μ(d,q)/μ(d,h)]·ct_h for unnormalized C^t_h.
pub fn corollary1_bound(ct_h: f64, q: f64, h: f64, d: usize) -> Result<f64> {
    check_q(h)?;
    if q < h {
        return Err(Error::ExponentOrderViolated { q, h });
    }
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    if d == 2 && h < s_threshold()? {
        return Err(Error::ExponentOutsideTheoremRange {
            q: h,
            range: "h >= s (about 3.339) for d = 2",
        });
    }
    if q == h {
        return Ok(ct_h);
    }
    Ok(mu(d, q) / mu(d, h) * ct_h)
}

/// Numerator M_dq of ∂f/∂q for the normalized pure-state measure f(q).
pub fn monotonicity_numerator(lambda: &[f64], q: f64) -> f64 {
    let d = lambda.len() as f64;
    let xlnx = |t: f64| if t > 0.0 { t.powf(q) * t.ln() } else { 0.0 };
    let a = d.powf(q) - (d - 1.0).powf(q) - 1.0;
    let b = d.powf(1.0 - q) * ((d - 1.0).powf(q) * (d.ln() - (d - 1.0).ln()) + d.ln());
    let logs: f64 = lambda.iter().map(|&l| xlnx(1.0 - l) + xlnx(l)).sum();
    let total: f64 = d - lambda
        .iter()
        .map(|&l| (1.0 - l).powf(q) + l.powf(q))
        .sum::<f64>();
    -a * logs - b * total
}

/// The exact numerator of ∂f/∂q: same as [`monotonicity_numerator`] without
/// the d^{1−q} factor on the second term. Vanishes at λ = 1/d.
pub fn monotonicity_numerator_exact(lambda: &[f64], q: f64) -> f64 {
    let d = lambda.len() as f64;
    let b = (d - 1.0).powf(q) * (d.ln() - (d - 1.0).ln()) + d.ln();
    let total: f64 = d - lambda
        .iter()
        .map(|&l| (1.0 - l).powf(q) + l.powf(q))
        .sum::<f64>();
    monotonicity_numerator(lambda, q) + (d.powf(1.0 - q) - 1.0) * b * total
}

/// ∂²M_dq/∂λ_i² at the stationary point λ = 1/d.
pub fn stationary_second_derivative(q: f64, d: usize) -> f64 {
    let df = d as f64;
    let x = 1.0 / df;
    // second derivative of t ↦ t^q ln t
    let g2 = |t: f64| q * (q - 1.0) * t.powf(q - 2.0) * t.ln() + (2.0 * q - 1.0) * t.powf(q - 2.0);
    let a = df.powf(q) - (df - 1.0).powf(q) - 1.0;
    let b = df.powf(1.0 - q) * ((df - 1.0).powf(q) * (df.ln() - (df - 1.0).ln()) + df.ln());
    -a * (g2(x) + g2(1.0 - x)) + b * q * (q - 1.0) * (x.powf(q - 2.0) + (1.0 - x).powf(q - 2.0))
}

fn bisect_s() -> Result<f64> {
    let (mut lo, mut hi) = S_BRACKET;
    let (flo, fhi) = (
        stationary_second_derivative(lo, 2),
        stationary_second_derivative(hi, 2),
    );
    if flo.signum() == fhi.signum() {
        return Err(Error::RootNotBracketed { lo, hi });
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if stationary_second_derivative(mid, 2).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root in q of the d = 2 stationary second derivative.
pub fn s_threshold() -> Result<f64> {
    static S: OnceLock<Result<f64>> = OnceLock::new();
    S.get_or_init(bisect_s).clone()
}
