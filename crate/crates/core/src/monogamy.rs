//! Monogamy of C^t_q on multi-qubit pure states and the chain-network example.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{check_q, h_q, mu, wootters_concurrence_2qubit};
use crate::states::{MultipartiteState, INPUT_SLACK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonogamyReport {
    /// C^t_q across the A₁ | A₂…A_k cut.
    pub lhs: f64,
    /// C^t_q of each ρ_{A₁A_i}, i = 2…k.
    pub pairwise: Vec<f64>,
    /// lhs^γ − Σ pairwise^γ.
    pub residual: f64,
    pub q: f64,
    pub gamma: f64,
    /// True only when the theorem covers the case: 2 ≤ q ≤ 3 and γ = 1.
    pub guaranteed: bool,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::BadExponent {
            value: gamma,
            reason: "gamma must be positive",
        });
    }
    Ok(())
}

/// Pairwise terms come from the Wootters concurrence of each two-qubit marginal.
pub fn monogamy_check(psi: &MultipartiteState, q: f64, gamma: f64) -> Result<MonogamyReport> {
    check_q(q)?;
    check_gamma(gamma)?;
    let dims = psi.sig().dims();
    if dims.iter().any(|&d| d != 2) {
        return Err(Error::NotAllQubits(dims.to_vec()));
    }
    let purity = psi.reduced(&[0])?.purity();
    let c_cut = (2.0 * (1.0 - purity)).clamp(0.0, 1.0).sqrt();
    let lhs = h_q(c_cut, q)?;
    let pairwise = (1..dims.len())
        .map(|i| h_q(wootters_concurrence_2qubit(&psi.reduced(&[0, i])?)?, q))
        .collect::<Result<Vec<_>>>()?;
    let residual = lhs.powf(gamma) - pairwise.iter().map(|p| p.powf(gamma)).sum::<f64>();
    Ok(MonogamyReport {
        lhs,
        pairwise,
        residual,
        q,
        gamma,
        guaranteed: (2.0..=3.0).contains(&q) && gamma == 1.0,
    })
}

/// Closed-form (C_{A|BC}, C_AB, C_AC) for the generalized-Schmidt example.
pub fn example2_concurrences(nu: [f64; 5]) -> Result<(f64, f64, f64)> {
    let n2: f64 = nu.iter().map(|v| v * v).sum();
    if (n2 - 1.0).abs() > INPUT_SLACK {
        return Err(Error::NotNormalized { norm_sq: n2 });
    }
    let tail = (nu[2] * nu[2] + nu[3] * nu[3] + nu[4] * nu[4]).sqrt();
    Ok((2.0 * nu[0] * tail, 2.0 * nu[0] * nu[2], 2.0 * nu[0] * nu[3]))
}

/// K1 = h_q(C_{A|BC})^α, K2 = h_q(C_AB)^α + h_q(C_AC)^α.
pub fn example2_k(nu: [f64; 5], q: f64, alpha_exp: f64) -> Result<(f64, f64)> {
    if !(2.0..=3.0).contains(&q) {
        return Err(Error::ExponentOutsideTheoremRange { q, range: "2 <= q <= 3" });
    }
    if !(1.0..=4.0).contains(&alpha_exp) {
        return Err(Error::ParameterOutOfRange {
            name: "alpha exponent",
            value: alpha_exp,
        });
    }
    let (abc, ab, ac) = example2_concurrences(nu)?;
    let k1 = h_q(abc.min(1.0), q)?.powf(alpha_exp);
    let k2 = h_q(ab.min(1.0), q)?.powf(alpha_exp) + h_q(ac.min(1.0), q)?.powf(alpha_exp);
    Ok((k1, k2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainValues {
    pub a_bc: f64,
    pub ab: f64,
    pub ac: f64,
}

/// Normalized C^t_q of the chain state across A|BC, and of ρ_AB and ρ_AC.
pub fn chain_ctq(theta: f64, q: f64) -> Result<ChainValues> {
    check_q(q)?;
    let (b, a) = theta.sin_cos();
    let (a2, b2) = (a * a, b * b);
    let num = 4.0
        - 2f64.powf(1.0 - q)
            * (a2.powf(q) + (2.0 - a2).powf(q) + b2.powf(q) + (2.0 - b2).powf(q));
    let den = 4.0 - 4f64.powf(1.0 - q) * (3f64.powf(q) + 1.0);
    let ab = (1.0 - a2.powf(q) - b2.powf(q)) / (1.0 - 2f64.powf(1.0 - q));
    Ok(ChainValues {
        a_bc: (num / den).max(0.0),
        ab: ab.max(0.0),
        ac: 1.0,
    })
}

/// (C_{A|BC}, C_AB, C_AC) of the chain state.
pub fn chain_concurrences(theta: f64) -> (f64, f64, f64) {
    let (b, a) = theta.sin_cos();
    let (a4, b4) = (a.powi(4), b.powi(4));
    (
        (2.0 - a4 - b4).max(0.0).sqrt(),
        (2.0 - 2.0 * a4 - 2.0 * b4).max(0.0).sqrt(),
        1.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualKind {
    Ctq,
    Concurrence,
}

/// lhs^γ − term₁^γ − term₂^γ for the chain state.
pub fn residual_tau(theta: f64, q: f64, gamma: f64, which: ResidualKind) -> Result<f64> {
    check_gamma(gamma)?;
    let (lhs, t1, t2) = match which {
        ResidualKind::Ctq => {
            let v = chain_ctq(theta, q)?;
            (v.a_bc, v.ab, v.ac)
        }
        ResidualKind::Concurrence => chain_concurrences(theta),
    };
    Ok(lhs.powf(gamma) - t1.powf(gamma) - t2.powf(gamma))
}

/// μ(4, q) in the form used by the chain's A|BC closed form.
pub fn chain_normalization(q: f64) -> f64 {
    mu(4, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{concurrence_pure, ctq_pure};
    use crate::qlinalg::DimensionSignature;
    use crate::states::{chain_state, gen_schmidt_3qubit, ghz, random_multipartite_with, w_state};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn reference_nu() -> [f64; 5] {
        let a = (2.0f64 / 7.0).sqrt();
        [a, 0.0, (1.0f64 / 7.0).sqrt(), a, a]
    }

    #[test]
    fn ghz_and_w() {
        for q in [2.0, 2.5, 3.0] {
            let r = monogamy_check(&ghz(3).unwrap(), q, 1.0).unwrap();
            assert!((r.lhs - 1.0).abs() < 1e-12);
            assert!(r.pairwise.iter().all(|p| p.abs() < 1e-12));
            assert!((r.residual - 1.0).abs() < 1e-12);
            assert!(r.guaranteed);
        }
        let r = monogamy_check(&w_state(3).unwrap(), 2.0, 1.0).unwrap();
        assert!((r.lhs - 8.0 / 9.0).abs() < 1e-12);
        for p in &r.pairwise {
            assert!((p - 4.0 / 9.0).abs() < 1e-10);
        }
        assert!(r.residual.abs() < 1e-10);
    }

    #[test]
    fn example2_state_level() {
        let psi = gen_schmidt_3qubit(reference_nu(), 0.7).unwrap();
        let r = monogamy_check(&psi, 2.0, 1.0).unwrap();
        assert!((r.lhs - 40.0 / 49.0).abs() < 1e-12);
        assert!((r.pairwise.iter().sum::<f64>() - 24.0 / 49.0).abs() < 1e-10);
        assert!((r.residual - 16.0 / 49.0).abs() < 1e-10);
        // the state's marginals carry 2ν₀ν₃ on AB and 2ν₀ν₂ on AC
        let nu = reference_nu();
        let ab = wootters_concurrence_2qubit(&psi.reduced(&[0, 1]).unwrap()).unwrap();
        let ac = wootters_concurrence_2qubit(&psi.reduced(&[0, 2]).unwrap()).unwrap();
        assert!((ab - 2.0 * nu[0] * nu[3]).abs() < 1e-10);
        assert!((ac - 2.0 * nu[0] * nu[2]).abs() < 1e-10);
    }

    #[test]
    fn example2_closed_form_values() {
        let (abc, ab, ac) = example2_concurrences(reference_nu()).unwrap();
        assert!((abc - 2.0 * 10f64.sqrt() / 7.0).abs() < 1e-12);
        assert!((ab - 2.0 * 2f64.sqrt() / 7.0).abs() < 1e-12);
        assert!((ac - 4.0 / 7.0).abs() < 1e-12);
        let (k1, k2) = example2_k(reference_nu(), 2.0, 1.0).unwrap();
        assert!((k1 - k2 - 16.0 / 49.0).abs() < 1e-12);
        let (k1, k2) = example2_k([1.0, 0.0, 0.0, 0.0, 0.0], 2.5, 2.0).unwrap();
        assert_eq!((k1, k2), (0.0, 0.0));
        assert!(matches!(
            example2_k([0.5, 0.0, 0.0, 0.0, 0.0], 2.0, 1.0),
            Err(Error::NotNormalized { .. })
        ));
        assert!(example2_k(reference_nu(), 3.5, 1.0).is_err());
    }

    #[test]
    fn theorem4_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for n in [3usize, 4] {
            let sig = DimensionSignature::new(vec![2; n]).unwrap();
            for _ in 0..100 {
                let psi = random_multipartite_with(&sig, &mut rng).unwrap();
                let r2 = monogamy_check(&psi, 2.0, 1.0).unwrap();
                let r3 = monogamy_check(&psi, 3.0, 1.0).unwrap();
                assert!((r2.residual - r3.residual).abs() < 1e-12);
                for q in [2.0, 2.5, 3.0] {
                    assert!(monogamy_check(&psi, q, 1.0).unwrap().residual >= -1e-9);
                }
            }
        }
    }

    #[test]
    fn flags_and_errors() {
        let psi = ghz(3).unwrap();
        assert!(!monogamy_check(&psi, 3.5, 1.0).unwrap().guaranteed);
        assert!(!monogamy_check(&psi, 2.0, 2.0).unwrap().guaranteed);
        assert!(monogamy_check(&psi, 2.0, 0.0).is_err());
        assert_eq!(
            monogamy_check(&chain_state(0.3), 2.0, 1.0),
            Err(Error::NotAllQubits(vec![4, 2, 2]))
        );
    }

    #[test]
    fn superadditivity_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let a: f64 = rng.random();
            let b: f64 = rng.random::<f64>() * (1.0 - a * a).sqrt();
            let q = 2.0 + rng.random::<f64>();
            let lhs = h_q((a * a + b * b).sqrt(), q).unwrap();
            assert!(lhs >= h_q(a, q).unwrap() + h_q(b, q).unwrap() - 1e-10);
            for q in [2.0, 3.0] {
                let gap = h_q((a * a + b * b).sqrt(), q).unwrap() - h_q(a, q).unwrap() - h_q(b, q).unwrap();
                assert!(gap.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn squared_concurrence_monogamy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sig = DimensionSignature::new(vec![2; 3]).unwrap();
        for _ in 0..100 {
            let psi = random_multipartite_with(&sig, &mut rng).unwrap();
            let c_cut = concurrence_pure(&psi.bipartition(1).unwrap());
            let pair: f64 = (1..3)
                .map(|i| wootters_concurrence_2qubit(&psi.reduced(&[0, i]).unwrap()).unwrap().powi(2))
                .sum();
            assert!(c_cut * c_cut >= pair - 1e-9);
        }
    }

    #[test]
    fn chain_identities() {
        for k in 0..20 {
            let theta = k as f64 * 0.157;
            for q in [2.0, 3.0, 4.5] {
                let v = chain_ctq(theta, q).unwrap();
                let direct = ctq_pure(&chain_state(theta).bipartition(1).unwrap(), q).unwrap();
                assert_eq!(direct.effective_dim, 4);
                assert!((v.a_bc - direct.value).abs() < 1e-10, "θ={theta} q={q}");
                assert_eq!(v.ac, 1.0);
            }
        }
        for q in [2.0, 3.0, 7.0] {
            let v = chain_ctq(FRAC_PI_4, q).unwrap();
            assert!((v.a_bc - 1.0).abs() < 1e-12 && (v.ab - 1.0).abs() < 1e-12);
            assert_eq!(chain_ctq(0.0, q).unwrap().ab, 0.0);
        }
        // the closed-form denominator is the qudit normalization μ(4, q)
        assert!((4.0 - 4f64.powf(-2.0) * 28.0 - chain_normalization(3.0)).abs() < 1e-12);
    }

    #[test]
    fn chain_concurrence_triple_matches_state() {
        for k in 0..10 {
            let theta = 0.1 + 0.13 * k as f64;
            let (abc, _, _) = chain_concurrences(theta);
            let direct = concurrence_pure(&chain_state(theta).bipartition(1).unwrap());
            assert!((abc - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn residual_examples() {
        let t = residual_tau(FRAC_PI_4, 2.0, 2.0, ResidualKind::Concurrence).unwrap();
        assert!((t + 0.5).abs() < 1e-12);
        let t = residual_tau(FRAC_PI_4, 4.0, 1.0, ResidualKind::Ctq).unwrap();
        assert!((t + 1.0).abs() < 1e-12);
        let a = residual_tau(std::f64::consts::FRAC_PI_3, 4.0, 5.0, ResidualKind::Ctq).unwrap();
        let b = residual_tau(std::f64::consts::FRAC_PI_3 + 1e-7, 4.0, 5.0, ResidualKind::Ctq).unwrap();
        assert!(a.is_finite() && (a - b).abs() < 1e-5);
        assert!(residual_tau(0.3, 2.0, -1.0, ResidualKind::Ctq).is_err());
    }
}
