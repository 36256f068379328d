//! State types and constructors for every family the measures are evaluated on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{
    hermitian_spectrum, partial_trace, singular_values, ComplexMatrix, DimensionSignature, C64,
    HERMITIAN_TOL,
};

/// Slack accepted on user-supplied norms and parameters before projecting.
pub const INPUT_SLACK: f64 = 1e-6;
/// Tolerance on stored state invariants.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues below this magnitude are treated as exact zeros.
pub const SPECTRUM_CLIP: f64 = 1e-12;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn normalize_amplitudes(mut amps: Vec<C64>, expected_len: usize) -> Result<Vec<C64>> {
    if amps.len() != expected_len {
        return Err(Error::DimensionMismatch {
            expected: expected_len,
            actual: amps.len(),
        });
    }
    if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n2 = norm_sq(&amps);
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let norm = n2.sqrt();
    if (norm - 1.0).abs() > INPUT_SLACK + 1e-12 {
        return Err(Error::NotNormalized { norm_sq: n2 });
    }
    for z in &mut amps {
        *z /= norm;
    }
    Ok(amps)
}

/// Clips eigenvalues of magnitude below [`SPECTRUM_CLIP`] to zero and clamps
/// the rest into [0, 1].
pub fn clamp_probabilities(values: &mut [f64]) {
    for v in values.iter_mut() {
        if v.abs() < SPECTRUM_CLIP {
            *v = 0.0;
        }
        *v = v.clamp(0.0, 1.0);
    }
}

/// Normalized bipartite pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    sig: DimensionSignature,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn sig(&self) -> &DimensionSignature {
        &self.sig
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn local_dims(&self) -> (usize, usize) {
        self.sig.as_bipartite().expect("pure states are bipartite")
    }

    /// Smaller local dimension; the length of the Schmidt spectrum.
    pub fn effective_dim(&self) -> usize {
        let (da, db) = self.local_dims();
        da.min(db)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            sig: self.sig.clone(),
            matrix: ComplexMatrix::projector(&self.amplitudes),
        }
    }

    /// dA × dB coefficient matrix ψ_{ij}.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        let (_, db) = self.local_dims();
        let (da, _) = self.local_dims();
        ComplexMatrix::from_fn(da, db, |i, j| self.amplitudes[i * db + j])
    }

    /// Applies U_A ⊗ U_B.
    pub fn apply_local(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Result<PureState> {
        let (da, db) = self.local_dims();
        if ua.rows() != da || ub.rows() != db {
            return Err(Error::DimensionMismatch {
                expected: da * db,
                actual: ua.rows() * ub.rows(),
            });
        }
        let amps = ua.kron(ub).apply(&self.amplitudes);
        pure_from_amplitudes(amps, self.sig.clone())
    }
}

/// Builds a bipartite pure state; norms within 1e-6 of one are renormalized.
pub fn pure_from_amplitudes(amps: Vec<C64>, sig: DimensionSignature) -> Result<PureState> {
    if sig.parts() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: sig.parts(),
        });
    }
    let amplitudes = normalize_amplitudes(amps, sig.total())?;
    Ok(PureState { sig, amplitudes })
}

/// Normalized pure state on three or more parties.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipartiteState {
    sig: DimensionSignature,
    amplitudes: Vec<C64>,
}

impl MultipartiteState {
    pub fn new(amps: Vec<C64>, sig: DimensionSignature) -> Result<Self> {
        if sig.parts() < 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                actual: sig.parts(),
            });
        }
        let amplitudes = normalize_amplitudes(amps, sig.total())?;
        Ok(Self { sig, amplitudes })
    }

    pub fn sig(&self) -> &DimensionSignature {
        &self.sig
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            sig: self.sig.clone(),
            matrix: ComplexMatrix::projector(&self.amplitudes),
        }
    }

    /// Reduced state on the listed parties.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let rho = ComplexMatrix::projector(&self.amplitudes);
        let matrix = partial_trace(&rho, &self.sig, keep)?;
        let dims = keep.iter().map(|&k| self.sig.dims()[k]).collect();
        Ok(DensityMatrix {
            sig: DimensionSignature::new(dims)?,
            matrix,
        })
    }

    /// Regroups parties `[0, cut)` against `[cut, n)` as a bipartite pure state.
    pub fn bipartition(&self, cut: usize) -> Result<PureState> {
        let dims = self.sig.dims();
        if cut == 0 || cut >= dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: cut,
                parts: dims.len(),
            });
        }
        let da = dims[..cut].iter().product();
        let db = dims[cut..].iter().product();
        Ok(PureState {
            sig: DimensionSignature::bipartite(da, db)?,
            amplitudes: self.amplitudes.clone(),
        })
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    sig: DimensionSignature,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, sig: DimensionSignature) -> Result<Self> {
        sig.check_square(&matrix)?;
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::ParameterOutOfRange {
                name: "trace",
                value: tr,
            });
        }
        let min_eig = hermitian_spectrum(&matrix)?.last().copied().unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::ParameterOutOfRange {
                name: "min eigenvalue",
                value: min_eig,
            });
        }
        Ok(Self { sig, matrix })
    }

    /// Like [`DensityMatrix::new`] but renormalizes a trace within 1e-6 of one.
    pub fn new_lenient(matrix: ComplexMatrix, sig: DimensionSignature) -> Result<Self> {
        sig.check_square(&matrix)?;
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > INPUT_SLACK || tr <= 0.0 {
            return Err(Error::ParameterOutOfRange {
                name: "trace",
                value: tr,
            });
        }
        Self::new(matrix.scale(1.0 / tr), sig)
    }

    pub fn sig(&self) -> &DimensionSignature {
        &self.sig
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Eigenvalues, descending, clipped and clamped into [0, 1].
    pub fn spectrum(&self) -> Vec<f64> {
        let mut values = hermitian_spectrum(&self.matrix).expect("density matrices are Hermitian");
        clamp_probabilities(&mut values);
        values
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let matrix = partial_trace(&self.matrix, &self.sig, keep)?;
        let dims = keep.iter().map(|&k| self.sig.dims()[k]).collect();
        Ok(DensityMatrix {
            sig: DimensionSignature::new(dims)?,
            matrix,
        })
    }

    /// U ρ U†.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        if u.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: u.rows(),
            });
        }
        Ok(DensityMatrix {
            sig: self.sig.clone(),
            matrix: u.matmul(&self.matrix).matmul(&u.adjoint()).hermitian_part(),
        })
    }

    /// Σ p_i ρ_i; all inputs must share one signature.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<DensityMatrix> {
        let first = states.first().ok_or(Error::NotADistribution)?;
        if weights.len() != states.len()
            || weights.iter().any(|&p| p < 0.0)
            || (weights.iter().sum::<f64>() - 1.0).abs() > STATE_TOL
        {
            return Err(Error::NotADistribution);
        }
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for (p, s) in weights.iter().zip(states) {
            if s.sig != first.sig {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    actual: s.dim(),
                });
            }
            acc = acc.add(&s.matrix.scale(*p));
        }
        Ok(DensityMatrix {
            sig: first.sig.clone(),
            matrix: acc.hermitian_part(),
        })
    }
}

/// Descending squared Schmidt coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    values: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite() || *v < -STATE_TOL) {
            return Err(Error::NotADistribution);
        }
        if (values.iter().sum::<f64>() - 1.0).abs() > STATE_TOL {
            return Err(Error::NotADistribution);
        }
        clamp_probabilities(&mut values);
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Zero-padded (or zero-truncated) to length `d`.
    pub fn padded(&self, d: usize) -> Vec<f64> {
        let mut v = self.values.clone();
        v.resize(d.max(v.len()), 0.0);
        while v.len() > d && v.last() == Some(&0.0) {
            v.pop();
        }
        v
    }

    /// Schmidt rank (number of nonzero coefficients).
    pub fn rank(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }
}

/// Squared singular values of the coefficient matrix, length min(dA, dB).
pub fn schmidt_spectrum(psi: &PureState) -> SchmidtSpectrum {
    let mut values: Vec<f64> = singular_values(&psi.coefficient_matrix())
        .into_iter()
        .map(|s| s * s)
        .collect();
    values.truncate(psi.effective_dim());
    clamp_probabilities(&mut values);
    let total: f64 = values.iter().sum();
    for v in &mut values {
        *v /= total;
    }
    SchmidtSpectrum { values }
}

/// |Φ+⟩ = Σ_k |kk⟩/√d.
pub fn max_entangled(d: usize) -> Vec<C64> {
    let mut v = vec![zero(); d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for k in 0..d {
        v[k * d + k] = real(amp);
    }
    v
}

fn project_parameter(value: f64, name: &'static str) -> Result<f64> {
    if !(-INPUT_SLACK..=1.0 + INPUT_SLACK).contains(&value) || value.is_nan() {
        return Err(Error::ParameterOutOfRange { name, value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Isotropic state (1−F)/(d²−1)(I − |Φ+⟩⟨Φ+|) + F|Φ+⟩⟨Φ+|.
pub fn isotropic(fidelity: f64, d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    if !(-INPUT_SLACK..=1.0 + INPUT_SLACK).contains(&fidelity) || fidelity.is_nan() {
        return Err(Error::FidelityOutOfRange(fidelity));
    }
    let f = fidelity.clamp(0.0, 1.0);
    let n = d * d;
    let phi = ComplexMatrix::projector(&max_entangled(d));
    let noise = (1.0 - f) / (n as f64 - 1.0);
    let matrix = ComplexMatrix::identity(n)
        .sub(&phi)
        .scale(noise)
        .add(&phi.scale(f));
    Ok(DensityMatrix {
        sig: DimensionSignature::bipartite(d, d)?,
        matrix,
    })
}

/// SWAP on C^d ⊗ C^d.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        if c == j * d + i {
            real(1.0)
        } else {
            zero()
        }
    })
}

/// Projector onto the antisymmetric subspace, Σ_{l<k} |Φ−_lk⟩⟨Φ−_lk|.
pub fn antisymmetric_projector(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d * d).sub(&swap_operator(d)).scale(0.5)
}

/// Werner state with antisymmetric weight `w`.
pub fn werner(w: f64, d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    let w = project_parameter(w, "w")?;
    let df = d as f64;
    let sym = ComplexMatrix::identity(d * d).add(&swap_operator(d)).scale(0.5);
    let anti = antisymmetric_projector(d);
    let matrix = sym
        .scale(2.0 * (1.0 - w) / (df * (df + 1.0)))
        .add(&anti.scale(2.0 * w / (df * (df - 1.0))));
    Ok(DensityMatrix {
        sig: DimensionSignature::bipartite(d, d)?,
        matrix,
    })
}

/// (α|000⟩ + β|110⟩ + α|201⟩ + β|311⟩)/√2 on 4 ⊗ 2 ⊗ 2, α = cos θ, β = sin θ.
pub fn chain_state(theta: f64) -> MultipartiteState {
    let (beta, alpha) = theta.sin_cos();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![zero(); 16];
    // |abc⟩ → 4a + 2b + c
    amps[0] = real(alpha * s);
    amps[4 + 2] = real(beta * s);
    amps[8 + 1] = real(alpha * s);
    amps[12 + 2 + 1] = real(beta * s);
    MultipartiteState::new(amps, DimensionSignature::new(vec![4, 2, 2]).unwrap())
        .expect("chain state is normalized")
}

/// ν₀|000⟩ + ν₁e^{iφ}|100⟩ + ν₂|101⟩ + ν₃|110⟩ + ν₄|111⟩.
pub fn gen_schmidt_3qubit(nu: [f64; 5], phi: f64) -> Result<MultipartiteState> {
    if let Some(&v) = nu.iter().find(|v| **v < 0.0 || !v.is_finite()) {
        return Err(Error::ParameterOutOfRange { name: "nu", value: v });
    }
    let n2: f64 = nu.iter().map(|v| v * v).sum();
    if (n2 - 1.0).abs() > INPUT_SLACK {
        return Err(Error::NotNormalized { norm_sq: n2 });
    }
    let mut amps = vec![zero(); 8];
    amps[0] = real(nu[0]);
    amps[4] = C64::from_polar(nu[1], phi);
    amps[5] = real(nu[2]);
    amps[6] = real(nu[3]);
    amps[7] = real(nu[4]);
    MultipartiteState::new(amps, DimensionSignature::new(vec![2, 2, 2])?)
}

/// (|0…0⟩ + |1…1⟩)/√2 on `n` qubits.
pub fn ghz(n: usize) -> Result<MultipartiteState> {
    let dim = 1usize << n;
    let mut amps = vec![zero(); dim];
    amps[0] = real(std::f64::consts::FRAC_1_SQRT_2);
    amps[dim - 1] = real(std::f64::consts::FRAC_1_SQRT_2);
    MultipartiteState::new(amps, DimensionSignature::new(vec![2; n])?)
}

/// Uniform superposition of the `n` single-excitation basis states.
pub fn w_state(n: usize) -> Result<MultipartiteState> {
    let dim = 1usize << n;
    let mut amps = vec![zero(); dim];
    let a = 1.0 / (n as f64).sqrt();
    for k in 0..n {
        amps[1 << k] = real(a);
    }
    MultipartiteState::new(amps, DimensionSignature::new(vec![2; n])?)
}

fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Haar-random normalized amplitude vector.
pub fn random_amplitudes<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<C64> {
    let mut v = gaussian_vector(len, rng);
    let norm = norm_sq(&v).sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

pub fn random_pure_with<R: Rng + ?Sized>(sig: &DimensionSignature, rng: &mut R) -> Result<PureState> {
    pure_from_amplitudes(random_amplitudes(sig.total(), rng), sig.clone())
}

/// Haar-random bipartite pure state, deterministic in `seed`.
pub fn random_pure(sig: &DimensionSignature, seed: u64) -> Result<PureState> {
    random_pure_with(sig, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_multipartite_with<R: Rng + ?Sized>(
    sig: &DimensionSignature,
    rng: &mut R,
) -> Result<MultipartiteState> {
    MultipartiteState::new(random_amplitudes(sig.total(), rng), sig.clone())
}

pub fn random_density_with<R: Rng + ?Sized>(
    sig: &DimensionSignature,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let dim = sig.total();
    if rank > dim {
        return Err(Error::RankTooLarge { rank, dim });
    }
    if rank == 0 {
        return Err(Error::BadDimension(0));
    }
    let g = gaussian_vector(dim * rank, rng);
    let g = ComplexMatrix::new(dim, rank, g)?;
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    DensityMatrix::new(w.scale(1.0 / tr).hermitian_part(), sig.clone())
}

/// Normalized Wishart density of the given rank, deterministic in `seed`.
pub fn random_density(sig: &DimensionSignature, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(sig, rank, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Haar-random unitary (QR of a Ginibre matrix with phase fix).
pub fn random_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::new(n, n, gaussian_vector(n * n, rng)).expect("finite gaussian entries");
    let qr = g.into_inner().qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                real(1.0)
            }
        })
        .collect();
    ComplexMatrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j])
}

pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    random_unitary_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Any state the file format can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(PureState),
    Multipartite(MultipartiteState),
    Density(DensityMatrix),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Density,
}

/// On-disk JSON representation: amplitude vectors for pure states,
/// row-major entries for densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub kind: StateKind,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl StateFile {
    fn from_entries(dims: Vec<usize>, kind: StateKind, entries: &[C64]) -> Self {
        Self {
            dims,
            kind,
            re: entries.iter().map(|z| z.re).collect(),
            im: entries.iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_state(state: &State) -> Self {
        match state {
            State::Pure(p) => Self::from_entries(p.sig.dims().to_vec(), StateKind::Pure, &p.amplitudes),
            State::Multipartite(m) => {
                Self::from_entries(m.sig.dims().to_vec(), StateKind::Pure, &m.amplitudes)
            }
            State::Density(rho) => Self::from_entries(
                rho.sig.dims().to_vec(),
                StateKind::Density,
                &rho.matrix.row_major(),
            ),
        }
    }

    pub fn to_state(&self) -> Result<State> {
        if self.re.len() != self.im.len() {
            return Err(Error::StateFile(format!(
                "re has {} entries but im has {}",
                self.re.len(),
                self.im.len()
            )));
        }
        let sig = DimensionSignature::new(self.dims.clone())?;
        let entries: Vec<C64> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| C64::new(re, im))
            .collect();
        match self.kind {
            StateKind::Pure if sig.parts() == 2 => Ok(State::Pure(pure_from_amplitudes(entries, sig)?)),
            StateKind::Pure if sig.parts() >= 3 => {
                Ok(State::Multipartite(MultipartiteState::new(entries, sig)?))
            }
            StateKind::Pure => Err(Error::StateFile("pure states need at least two parts".into())),
            StateKind::Density => {
                let n = sig.total();
                let m = ComplexMatrix::new(n, n, entries)?;
                Ok(State::Density(DensityMatrix::new_lenient(m, sig)?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::StateFile(e.to_string()))
    }
}
