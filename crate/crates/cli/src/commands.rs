use std::fs;
use std::path::Path;

use serde::Serialize;

use ctq_core::bounds::{lower_bound_thm2, BoundReport};
use ctq_core::closedform::{
    ctq_isotropic_with_step, isotropic_curve, werner_curve, CurveRow, DEFAULT_GRID_STEP,
};
use ctq_core::measures::{
    concurrence_pure, ct_alpha_pure, ctq_from_concurrence, measure_pure, mu, q_concurrence_pure,
    wootters_concurrence_2qubit, Family, MeasureParams,
};
use ctq_core::monogamy::{
    chain_ctq, example2_concurrences, example2_k, monogamy_check, residual_tau, MonogamyReport,
    ResidualKind,
};
use ctq_core::qlinalg::{hermitian_eigen, ComplexMatrix};
use ctq_core::states::{
    gen_schmidt_3qubit, isotropic, max_entangled, pure_from_amplitudes, random_multipartite_with,
    schmidt_spectrum, State, StateFile,
};
use ctq_core::{DensityMatrix, DimensionSignature, PureState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};

pub const GRID_STEP_ENV: &str = "CTQ_GRID_STEP";

/// Envelope resolution: `CTQ_GRID_STEP` if set, else the library default.
pub fn envelope_step() -> Result<f64> {
    match std::env::var(GRID_STEP_ENV) {
        Ok(v) => {
            let step: f64 = v.trim().parse().map_err(|_| CliError::Parse {
                what: GRID_STEP_ENV.into(),
                detail: v.clone(),
            })?;
            check_step(step)?;
            Ok(step)
        }
        Err(_) => Ok(DEFAULT_GRID_STEP),
    }
}

pub fn check_step(step: f64) -> Result<()> {
    if !(1e-6..=1e-1).contains(&step) {
        return Err(CliError::Config(format!("grid step {step} outside [1e-6, 1e-1]")));
    }
    Ok(())
}

pub fn read_state_file(path: &Path) -> Result<State> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file = StateFile::from_json(&text).map_err(|e| CliError::Parse {
        what: path.display().to_string(),
        detail: e.to_string(),
    })?;
    Ok(file.to_state()?)
}

pub fn write_state_file(path: &Path, state: &State) -> Result<()> {
    crate::output::write_atomic(path, StateFile::from_state(state).to_json().as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub dims: Vec<usize>,
    pub kind: &'static str,
    pub method: &'static str,
    pub q: f64,
    pub alpha: f64,
    pub normalized: bool,
    /// The headline number: normalized or raw C^t_q per the request.
    pub value: Option<f64>,
    pub lower_bound_only: bool,
    pub effective_dim: Option<usize>,
    pub c_q: Option<f64>,
    pub ctq: Option<f64>,
    pub ctq_raw: Option<f64>,
    pub ct_alpha: Option<f64>,
    pub concurrence: Option<f64>,
    pub wootters: Option<f64>,
    pub bound: Option<BoundReport>,
    pub note: Option<String>,
}

impl MeasureReport {
    fn empty(dims: Vec<usize>, kind: &'static str, q: f64, alpha: f64, normalized: bool) -> Self {
        Self {
            dims,
            kind,
            method: "",
            q,
            alpha,
            normalized,
            value: None,
            lower_bound_only: false,
            effective_dim: None,
            c_q: None,
            ctq: None,
            ctq_raw: None,
            ct_alpha: None,
            concurrence: None,
            wootters: None,
            bound: None,
            note: None,
        }
    }

    fn finish(mut self) -> Self {
        self.value = if self.normalized { self.ctq } else { self.ctq_raw };
        self
    }
}

fn fill_pure(report: &mut MeasureReport, psi: &PureState) -> Result<()> {
    let q = report.q;
    let norm = measure_pure(psi, &MeasureParams::new(Family::Q, q, true)?)?;
    let raw = measure_pure(psi, &MeasureParams::new(Family::Q, q, false)?)?;
    report.method = "schmidt";
    report.effective_dim = Some(norm.effective_dim);
    report.c_q = Some(q_concurrence_pure(&schmidt_spectrum(psi), q)?);
    report.ctq = Some(norm.value);
    report.ctq_raw = Some(raw.value);
    report.ct_alpha = Some(ct_alpha_pure(psi, report.alpha)?);
    report.concurrence = Some(concurrence_pure(psi));
    Ok(())
}

/// Rank-one densities are handled as the pure state they represent.
fn as_pure(rho: &DensityMatrix) -> Result<Option<PureState>> {
    if (rho.purity() - 1.0).abs() > 1e-10 || rho.sig().parts() != 2 {
        return Ok(None);
    }
    let (_, vectors) = hermitian_eigen(rho.matrix())?;
    let amps = (0..rho.dim()).map(|i| vectors.get(i, 0)).collect();
    Ok(Some(pure_from_amplitudes(amps, rho.sig().clone())?))
}

/// Fidelity F when ρ is exactly the isotropic state of that fidelity.
pub fn isotropic_fidelity(rho: &DensityMatrix) -> Option<(f64, usize)> {
    let (da, db) = rho.sig().as_bipartite()?;
    if da != db {
        return None;
    }
    let phi = ComplexMatrix::projector(&max_entangled(da));
    let f = phi.matmul(rho.matrix()).trace().re;
    let reference = isotropic(f.clamp(0.0, 1.0), da).ok()?;
    (reference.matrix().sub(rho.matrix()).max_abs() < 1e-9).then_some((f, da))
}

fn fill_bound(report: &mut MeasureReport, rho: &DensityMatrix) {
    match lower_bound_thm2(rho, report.q) {
        Ok(b) => report.bound = Some(b),
        Err(e) => report.note = Some(format!("no trace-norm bound: {e}")),
    }
}

/// Every measure that applies to the state; mixed states without a closed
/// form fall back to the trace-norm bound and say so.
pub fn cmd_measure(state: &State, q: f64, alpha: f64, normalized: bool) -> Result<MeasureReport> {
    MeasureParams::new(Family::Q, q, true)?;
    MeasureParams::new(Family::Alpha, alpha, false)?;
    match state {
        State::Pure(psi) => {
            let mut r = MeasureReport::empty(psi.sig().dims().to_vec(), "pure", q, alpha, normalized);
            fill_pure(&mut r, psi)?;
            Ok(r.finish())
        }
        State::Multipartite(psi) => {
            let mut r =
                MeasureReport::empty(psi.sig().dims().to_vec(), "multipartite", q, alpha, normalized);
            fill_pure(&mut r, &psi.bipartition(1)?)?;
            r.note = Some("measured across the first-party cut".into());
            Ok(r.finish())
        }
        State::Density(rho) => {
            let dims = rho.sig().dims().to_vec();
            let mut r = MeasureReport::empty(dims.clone(), "density", q, alpha, normalized);
            if let Some(psi) = as_pure(rho)? {
                fill_pure(&mut r, &psi)?;
                r.method = "schmidt (rank-one density)";
                return Ok(r.finish());
            }
            if dims == [2, 2] {
                let c = wootters_concurrence_2qubit(rho)?;
                r.wootters = Some(c);
                r.concurrence = Some(c);
                r.effective_dim = Some(2);
                if (2.0..=4.0).contains(&q) {
                    let v = ctq_from_concurrence(c, q)?.value;
                    r.method = "wootters";
                    r.ctq = Some(v);
                    r.ctq_raw = Some(v * mu(2, q));
                    fill_bound(&mut r, rho);
                    return Ok(r.finish());
                }
            }
            if let Some((f, d)) = isotropic_fidelity(rho) {
                let v = ctq_isotropic_with_step(f, q, d, envelope_step()?)?;
                r.method = "isotropic-envelope";
                r.effective_dim = Some(d);
                r.ctq = Some(v);
                r.ctq_raw = Some(v * mu(d, q));
                fill_bound(&mut r, rho);
                return Ok(r.finish());
            }
            r.method = "lower_bound_only";
            r.lower_bound_only = true;
            fill_bound(&mut r, rho);
            Ok(r.finish())
        }
    }
}

pub fn cmd_bound(state: &State, q: f64) -> Result<BoundReport> {
    let rho = match state {
        State::Pure(p) => p.density(),
        State::Multipartite(_) => {
            return Err(CliError::Config("bounds need a bipartite state".into()));
        }
        State::Density(rho) => rho.clone(),
    };
    Ok(lower_bound_thm2(&rho, q)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFamily {
    Isotropic,
    Werner,
}

/// Points `from, from + step, …, to`.
pub fn grid_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    check_step(step)?;
    if from > to || !from.is_finite() || !to.is_finite() {
        return Err(CliError::Config(format!("bad range [{from}, {to}]")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| (from + k as f64 * step).min(to)).collect())
}

pub struct Curve {
    pub header: Vec<&'static str>,
    pub rows: Vec<CurveRow>,
}

impl Curve {
    pub fn to_csv(&self) -> Result<String> {
        let with_eof = self.header.len() == 5;
        let cells: Vec<Vec<Option<f64>>> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![Some(r.x), Some(r.raw), Some(r.envelope), r.lower_bound];
                if with_eof {
                    v.push(r.eof);
                }
                v
            })
            .collect();
        crate::output::to_csv(&self.header, &cells)
    }
}

/// Figure data for a family: raw ζ, its envelope, and the trace-norm bound.
pub fn cmd_curve(
    family: CurveFamily,
    d: usize,
    q: f64,
    xs: &[f64],
    envelope_step: f64,
    normalized: bool,
) -> Result<Curve> {
    if xs.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(CliError::Config("curve parameters must lie in [0, 1]".into()));
    }
    let (header, mut rows, dim) = match family {
        CurveFamily::Isotropic => (
            vec!["F", "raw", "envelope", "lower_bound"],
            isotropic_curve(q, d, xs, envelope_step)?,
            d,
        ),
        CurveFamily::Werner => {
            if d != 2 {
                return Err(CliError::Config("Werner curves are two-qubit only (d = 2)".into()));
            }
            (
                vec!["w", "raw", "envelope", "lower_bound", "eof"],
                werner_curve(q, xs, envelope_step)?,
                2,
            )
        }
    };
    if !normalized {
        let m = mu(dim, q);
        for r in &mut rows {
            r.raw *= m;
            r.envelope *= m;
            r.lower_bound = r.lower_bound.map(|b| b * m);
        }
    }
    Ok(Curve { header, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example2Report {
    pub nu: [f64; 5],
    pub concurrences: (f64, f64, f64),
    pub q: f64,
    pub alpha_exp: f64,
    pub k1: f64,
    pub k2: f64,
    pub state_report: MonogamyReport,
}

/// The generalized-Schmidt example with the given ν and exponents.
pub fn cmd_example2(nu: [f64; 5], q: f64, alpha_exp: f64) -> Result<Example2Report> {
    let (k1, k2) = example2_k(nu, q, alpha_exp)?;
    let psi = gen_schmidt_3qubit(nu, 0.0)?;
    Ok(Example2Report {
        nu,
        concurrences: example2_concurrences(nu)?,
        q,
        alpha_exp,
        k1,
        k2,
        state_report: monogamy_check(&psi, q, alpha_exp)?,
    })
}

pub fn cmd_monogamy_state(state: &State, q: f64, gamma: f64) -> Result<MonogamyReport> {
    match state {
        State::Multipartite(psi) => Ok(monogamy_check(psi, q, gamma)?),
        _ => Err(CliError::Config("monogamy needs a pure state on three or more qubits".into())),
    }
}

pub fn cmd_monogamy_random(qubits: usize, count: usize, q: f64, gamma: f64, seed: u64) -> Result<Vec<MonogamyReport>> {
    if qubits < 3 {
        return Err(CliError::Config("need at least three qubits".into()));
    }
    let sig = DimensionSignature::new(vec![2; qubits])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Ok(monogamy_check(&random_multipartite_with(&sig, &mut rng)?, q, gamma)?))
        .collect()
}

/// Chain-state sweep over θ: the three C^t_q values and both residuals.
pub type Table = (Vec<&'static str>, Vec<Vec<Option<f64>>>);

pub fn cmd_chain(thetas: &[f64], q: f64, gamma: f64) -> Result<Table> {
    let header = vec!["theta", "ctq_a_bc", "ctq_ab", "ctq_ac", "tau_ctq", "tau_concurrence"];
    let rows = thetas
        .iter()
        .map(|&t| {
            let v = chain_ctq(t, q)?;
            Ok(vec![
                Some(t),
                Some(v.a_bc),
                Some(v.ab),
                Some(v.ac),
                Some(residual_tau(t, q, gamma, ResidualKind::Ctq)?),
                Some(residual_tau(t, q, gamma, ResidualKind::Concurrence)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctq_core::states::{random_density, werner};

    #[test]
    fn measure_dispatch() {
        let bell = pure_from_amplitudes(max_entangled(2), DimensionSignature::bipartite(2, 2).unwrap()).unwrap();
        let r = cmd_measure(&State::Pure(bell.clone()), 2.0, 0.5, true).unwrap();
        assert!((r.value.unwrap() - 1.0).abs() < 1e-12);
        let r = cmd_measure(&State::Density(bell.density()), 3.0, 0.5, false).unwrap();
        assert_eq!(r.method, "schmidt (rank-one density)");
        assert!((r.value.unwrap() - mu(2, 3.0)).abs() < 1e-12);

        let r = cmd_measure(&State::Density(werner(0.9, 2).unwrap()), 2.0, 0.5, true).unwrap();
        assert_eq!(r.method, "wootters");
        assert!((r.value.unwrap() - 0.64).abs() < 1e-10);

        let r = cmd_measure(&State::Density(isotropic(0.9, 3).unwrap()), 3.0, 0.5, true).unwrap();
        assert_eq!(r.method, "isotropic-envelope");
        assert!((r.value.unwrap() - (2.25 * 0.9 - 1.25)).abs() < 1e-3);

        let sig = DimensionSignature::bipartite(3, 3).unwrap();
        let r = cmd_measure(&State::Density(random_density(&sig, 9, 1).unwrap()), 3.0, 0.5, true).unwrap();
        assert!(r.lower_bound_only && r.value.is_none() && r.bound.is_some());
    }

    #[test]
    fn grid_points_cover_range() {
        let xs = grid_points(0.5, 1.0, 0.1).unwrap();
        assert_eq!(xs.len(), 6);
        assert_eq!(*xs.last().unwrap(), 1.0);
        assert!(grid_points(0.0, 1.0, 0.5).is_err());
    }
}
