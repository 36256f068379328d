//! Closed-form C^t_q curves for isotropic and Werner states, their convex
//! envelopes, and a brute-force check of the isotropic minimization.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::lower_bound_thm2;
use crate::error::{Error, Result};
use crate::measures::{check_q, h_q, mu, total_concurrence_values};
use crate::states::{isotropic, werner, INPUT_SLACK};

/// Default envelope grid spacing on [0, 1].
pub const DEFAULT_GRID_STEP: f64 = 1e-4;
/// raw − envelope above this marks a chord.
pub const CHORD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSigma {
    pub chi: f64,
    pub sigma: f64,
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    Ok(())
}

fn check_unit(x: f64, fidelity: bool) -> Result<f64> {
    if x.is_nan() || !(-INPUT_SLACK..=1.0 + INPUT_SLACK).contains(&x) {
        return Err(if fidelity {
            Error::FidelityOutOfRange(x)
        } else {
            Error::ParameterOutOfRange { name: "w", value: x }
        });
    }
    Ok(x.clamp(0.0, 1.0))
}

/// √λ of the dominant and the d−1 degenerate Schmidt coefficients of the minimizer.
pub fn chi_sigma(fidelity: f64, d: usize) -> Result<ChiSigma> {
    check_dim(d)?;
    let f = check_unit(fidelity, true)?;
    let df = d as f64;
    if f < 1.0 / df {
        return Err(Error::FidelityBelowSeparableBoundary { fidelity: f, d });
    }
    let chi = (f.sqrt() + ((df - 1.0) * (1.0 - f)).sqrt()) / df.sqrt();
    let sigma = (f.sqrt() - (1.0 - f).sqrt() / (df - 1.0).sqrt()) / df.sqrt();
    Ok(ChiSigma {
        chi,
        sigma: sigma.max(0.0),
    })
}

/// ζ(F, q, d) = d − (χ^{2q} + (1−χ²)^q) − (d−1)(σ^{2q} + (1−σ²)^q), zero for F ≤ 1/d.
pub fn zeta_isotropic(fidelity: f64, q: f64, d: usize, normalized: bool) -> Result<f64> {
    check_q(q)?;
    check_dim(d)?;
    let f = check_unit(fidelity, true)?;
    let df = d as f64;
    if f <= 1.0 / df {
        return Ok(0.0);
    }
    let ChiSigma { chi, sigma } = chi_sigma(f, d)?;
    let (c2, s2) = (chi * chi, sigma * sigma);
    let raw = df - (c2.powf(q) + (1.0 - c2).powf(q)) - (df - 1.0) * (s2.powf(q) + (1.0 - s2).powf(q));
    let raw = raw.max(0.0);
    Ok(if normalized { raw / mu(d, q) } else { raw })
}

/// Greatest convex minorant of a sampled curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCurve {
    pub grid: Vec<f64>,
    pub raw: Vec<f64>,
    pub values: Vec<f64>,
    /// Hull edges `(i, j)` along which the envelope lies strictly below the raw curve.
    pub chords: Vec<(usize, usize)>,
    /// Left endpoint of each chord: the last grid index where envelope = raw.
    pub breakpoints: Vec<usize>,
}

impl ConvexCurve {
    /// Linear interpolation of the envelope.
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g[0] {
            return self.values[0];
        }
        if x >= g[g.len() - 1] {
            return self.values[g.len() - 1];
        }
        let k = g.partition_point(|&t| t <= x) - 1;
        let t = (x - g[k]) / (g[k + 1] - g[k]);
        self.values[k] + t * (self.values[k + 1] - self.values[k])
    }

    /// Chord whose open span contains `x`.
    pub fn chord_containing(&self, x: f64) -> Option<(usize, usize)> {
        self.chords
            .iter()
            .copied()
            .find(|&(i, j)| self.grid[i] < x && x < self.grid[j])
    }

    /// (slope, intercept) of chord `(i, j)`.
    pub fn chord_line(&self, (i, j): (usize, usize)) -> (f64, f64) {
        let slope = (self.raw[j] - self.raw[i]) / (self.grid[j] - self.grid[i]);
        (slope, self.raw[i] - slope * self.grid[i])
    }

    pub fn breakpoint_positions(&self) -> Vec<f64> {
        self.breakpoints.iter().map(|&i| self.grid[i]).collect()
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Lower hull by monotone chain, interpolated back onto the grid.
pub fn convex_envelope(grid: &[f64], raw: &[f64]) -> Result<ConvexCurve> {
    if grid.len() != raw.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            actual: raw.len(),
        });
    }
    if grid.len() < 3 {
        return Err(Error::GridTooCoarse(grid.len()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..grid.len() {
        let p = (grid[k], raw[k]);
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if cross((grid[a], raw[a]), (grid[b], raw[b]), p) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut values = raw.to_vec();
    let mut chords = Vec::new();
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let slope = (raw[j] - raw[i]) / (grid[j] - grid[i]);
        let mut gap: f64 = 0.0;
        for k in i + 1..j {
            let line = raw[i] + slope * (grid[k] - grid[i]);
            values[k] = line.min(raw[k]);
            gap = gap.max(raw[k] - line);
        }
        if gap > CHORD_TOL {
            chords.push((i, j));
        }
    }
    let breakpoints = chords.iter().map(|&(i, _)| i).collect();
    Ok(ConvexCurve {
        grid: grid.to_vec(),
        raw: raw.to_vec(),
        values,
        chords,
        breakpoints,
    })
}

/// Uniform grid on [0, 1] with spacing as close to `step` as divides 1.
pub fn unit_grid(step: f64) -> Result<Vec<f64>> {
    if !(1e-6..=1e-1).contains(&step) {
        return Err(Error::ParameterOutOfRange {
            name: "grid step",
            value: step,
        });
    }
    let n = (1.0 / step).round() as usize;
    Ok((0..=n).map(|k| k as f64 / n as f64).collect())
}

type CurveKey = (u8, u64, usize, u64);

fn cached_curve(key: CurveKey, build: impl FnOnce() -> Result<ConvexCurve>) -> Result<Arc<ConvexCurve>> {
    static CACHE: OnceLock<Mutex<HashMap<CurveKey, Arc<ConvexCurve>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().expect("cache lock").get(&key) {
        return Ok(c.clone());
    }
    let curve = Arc::new(build()?);
    cache.lock().expect("cache lock").insert(key, curve.clone());
    Ok(curve)
}

fn perturbation_key() -> u64 {
    crate::measures::mu_perturbation().to_bits()
}

/// Envelope of the normalized isotropic ζ on a uniform grid over [0, 1].
pub fn isotropic_envelope(q: f64, d: usize, step: f64) -> Result<Arc<ConvexCurve>> {
    check_q(q)?;
    check_dim(d)?;
    let key = (0, q.to_bits() ^ perturbation_key(), d, step.to_bits());
    cached_curve(key, || {
        let grid = unit_grid(step)?;
        let raw = grid
            .iter()
            .map(|&f| zeta_isotropic(f, q, d, true))
            .collect::<Result<Vec<_>>>()?;
        convex_envelope(&grid, &raw)
    })
}

/// Normalized C^t_q of the isotropic state: ζ off chords, the chord line on them.
pub fn ctq_isotropic(fidelity: f64, q: f64, d: usize) -> Result<f64> {
    ctq_isotropic_with_step(fidelity, q, d, DEFAULT_GRID_STEP)
}

pub fn ctq_isotropic_with_step(fidelity: f64, q: f64, d: usize, step: f64) -> Result<f64> {
    check_q(q)?;
    check_dim(d)?;
    let f = check_unit(fidelity, true)?;
    if f <= 1.0 / d as f64 {
        return Ok(0.0);
    }
    let curve = isotropic_envelope(q, d, step)?;
    match curve.chord_containing(f) {
        Some(chord) => {
            let (slope, intercept) = curve.chord_line(chord);
            Ok(slope * f + intercept)
        }
        None => zeta_isotropic(f, q, d, true),
    }
}

/// Largest F < 1 where the normalized ζ switches from convex (left) to
/// concave (right); the natural "connect to F = 1" point when drawing by eye.
pub fn concavity_onset(q: f64, d: usize, step: f64) -> Result<Option<f64>> {
    let grid = unit_grid(step)?;
    let raw = grid
        .iter()
        .map(|&f| zeta_isotropic(f, q, d, true))
        .collect::<Result<Vec<_>>>()?;
    let lo = 1.0 / d as f64;
    for k in (1..grid.len() - 2).rev() {
        if grid[k] <= lo + step {
            break;
        }
        let here = raw[k + 1] - 2.0 * raw[k] + raw[k - 1];
        let right = raw[k + 2] - 2.0 * raw[k + 1] + raw[k];
        if here >= 0.0 && right < 0.0 {
            return Ok(Some(grid[k]));
        }
    }
    Ok(None)
}

/// ζ for two-qubit Werner states: 2(1 − ((1+G)/2)^q − ((1−G)/2)^q), G = 2√(w(1−w)).
pub fn zeta_werner(w: f64, q: f64, normalized: bool) -> Result<f64> {
    check_q(q)?;
    let w = check_unit(w, false)?;
    if w <= 0.5 {
        return Ok(0.0);
    }
    let g = 2.0 * (w * (1.0 - w)).sqrt();
    let raw = (2.0 * (1.0 - ((1.0 + g) / 2.0).powf(q) - ((1.0 - g) / 2.0).powf(q))).max(0.0);
    Ok(if normalized { raw / mu(2, q) } else { raw })
}

pub fn werner_envelope(q: f64, step: f64) -> Result<Arc<ConvexCurve>> {
    check_q(q)?;
    let key = (1, q.to_bits() ^ perturbation_key(), 2, step.to_bits());
    cached_curve(key, || {
        let grid = unit_grid(step)?;
        let raw = grid
            .iter()
            .map(|&w| zeta_werner(w, q, true))
            .collect::<Result<Vec<_>>>()?;
        convex_envelope(&grid, &raw)
    })
}

/// Normalized C^t_q of the two-qubit Werner state (envelope of ζ_w).
pub fn ctq_werner(w: f64, q: f64) -> Result<f64> {
    ctq_werner_with_step(w, q, DEFAULT_GRID_STEP)
}

pub fn ctq_werner_with_step(w: f64, q: f64, step: f64) -> Result<f64> {
    let w = check_unit(w, false)?;
    if w <= 0.5 {
        check_q(q)?;
        return Ok(0.0);
    }
    let curve = werner_envelope(q, step)?;
    match curve.chord_containing(w) {
        Some(chord) => {
            let (slope, intercept) = curve.chord_line(chord);
            Ok(slope * w + intercept)
        }
        None => zeta_werner(w, q, true),
    }
}

fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation of the two-qubit Werner state.
pub fn eof_werner(w: f64) -> Result<f64> {
    let w = check_unit(w, false)?;
    if w <= 0.5 {
        return Ok(0.0);
    }
    let c = 2.0 * w - 1.0;
    Ok(binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0))
}

/// C^t_q of n copies of χ² and m copies of σ² with n, m treated as continuous.
pub fn two_level_ctq(n: f64, m: f64, fidelity: f64, q: f64, d: usize) -> f64 {
    let fd = fidelity * d as f64;
    let root = (n * m * (n + m - fd)).max(0.0).sqrt();
    let chi = (n * fd.sqrt() + root) / (n * (n + m));
    let sigma = (m * fd.sqrt() - root) / (m * (n + m));
    let (c2, s2) = (chi * chi, sigma * sigma);
    m + n - n * (c2.powf(q) + (1.0 - c2).powf(q)) - m * (s2.powf(q) + (1.0 - s2).powf(q))
}

fn two_level_minimum(fd: f64, q: f64, d: usize) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut consider = |v: f64| best = Some(best.map_or(v, |b: f64| b.min(v)));
    let eps = 1e-12;
    for n in 1..=d {
        if n as f64 > fd + eps {
            break;
        }
        for m in 0..=(d - n) {
            if ((n + m) as f64) < fd - eps {
                continue;
            }
            let spectrum: Vec<f64> = if m == 0 {
                if (n as f64 - fd).abs() > eps {
                    continue;
                }
                vec![1.0 / n as f64; n]
            } else {
                let root = ((n * m) as f64 * ((n + m) as f64 - fd)).max(0.0).sqrt();
                let chi = (n as f64 * fd.sqrt() + root) / (n * (n + m)) as f64;
                let sigma = (m as f64 * fd.sqrt() - root) / (m * (n + m)) as f64;
                if sigma < -eps {
                    continue;
                }
                let sigma = sigma.max(0.0);
                let mut v = vec![chi * chi; n];
                v.extend(std::iter::repeat_n(sigma * sigma, m));
                v
            };
            let mut padded = spectrum;
            padded.resize(d, 0.0);
            consider(total_concurrence_values(&padded, q));
        }
    }
    best
}

/// Projected-gradient descent on {x ≥ 0, Σx² = 1, Σx = c} for the objective in x = √λ.
struct SphereSlice {
    d: usize,
    c: f64,
    radius: f64,
    q: f64,
}

impl SphereSlice {
    fn objective(&self, x: &[f64]) -> f64 {
        let l: Vec<f64> = x.iter().map(|v| v * v).collect();
        total_concurrence_values(&l, self.q)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let q = self.q;
        x.iter()
            .map(|&v| {
                let l = v * v;
                -2.0 * q * v.powf(2.0 * q - 1.0) + 2.0 * q * v * (1.0 - l).powf(q - 1.0)
            })
            .collect()
    }

    /// Maps onto the plane, then radially onto the circle around the center.
    fn retract(&self, x: &mut [f64]) -> bool {
        let center = self.c / self.d as f64;
        let shift = (self.c - x.iter().sum::<f64>()) / self.d as f64;
        let mut norm = 0.0;
        for v in x.iter_mut() {
            *v += shift - center;
            norm += *v * *v;
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return false;
        }
        for v in x.iter_mut() {
            *v = center + self.radius * *v / norm;
        }
        x.iter().all(|&v| v >= 0.0)
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
        for _ in 0..100_000 {
            let mut x: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
            if self.retract(&mut x) {
                return Some(x);
            }
        }
        None
    }

    fn descend(&self, mut x: Vec<f64>) -> f64 {
        let mut value = self.objective(&x);
        let mut step = 0.1;
        for _ in 0..2000 {
            let g = self.gradient(&x);
            // project onto the tangent space of the slice
            let center = self.c / self.d as f64;
            let mean = g.iter().sum::<f64>() / self.d as f64;
            let mut dir: Vec<f64> = g.iter().map(|v| v - mean).collect();
            let r: Vec<f64> = x.iter().map(|v| v - center).collect();
            let rr: f64 = r.iter().map(|v| v * v).sum();
            if rr > 0.0 {
                let proj = dir.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / rr;
                for (a, b) in dir.iter_mut().zip(&r) {
                    *a -= proj * b;
                }
            }
            let gnorm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm < 1e-13 {
                break;
            }
            let mut improved = false;
            while step > 1e-15 {
                let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a - step * b).collect();
                if self.retract(&mut trial) {
                    let v = self.objective(&trial);
                    if v < value - 1e-4 * step * gnorm * gnorm {
                        x = trial;
                        value = v;
                        improved = true;
                        step *= 2.0;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        value
    }
}

/// Independent minimization of C^t_q over Schmidt vectors with Σλ = 1 and
/// (Σ√λ)² = Fd: every two-level profile plus randomized local descent.
pub fn oracle_min_schmidt(fidelity: f64, q: f64, d: usize) -> Result<f64> {
    check_q(q)?;
    check_dim(d)?;
    if d > 5 {
        return Err(Error::BadDimension(d));
    }
    let f = check_unit(fidelity, true)?;
    if f <= 1.0 / d as f64 {
        return Err(Error::InfeasibleConstraint("fidelity must exceed 1/d"));
    }
    let fd = f * d as f64;
    let mut best = two_level_minimum(fd, q, d)
        .ok_or(Error::InfeasibleConstraint("no two-level profile satisfies the constraints"))?;
    if d > 2 && f < 1.0 {
        let slice = SphereSlice {
            d,
            c: fd.sqrt(),
            radius: (1.0 - f).max(0.0).sqrt(),
            q,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (d as u64) ^ f.to_bits() ^ q.to_bits());
        for _ in 0..100 {
            if let Some(x) = slice.random_point(&mut rng) {
                best = best.min(slice.descend(x));
            }
        }
    }
    Ok(best)
}

/// One line of a figure-data CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x: f64,
    pub raw: f64,
    pub envelope: f64,
    pub lower_bound: Option<f64>,
    pub eof: Option<f64>,
}

/// Points `from, from+step, …, to` (inclusive up to rounding).
pub fn sweep(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(1e-6..=1e-1).contains(&step) {
        return Err(Error::ParameterOutOfRange {
            name: "grid step",
            value: step,
        });
    }
    if !(0.0..=1.0).contains(&from) || !(0.0..=1.0).contains(&to) || from > to {
        return Err(Error::ParameterOutOfRange {
            name: "range",
            value: from,
        });
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| (from + k as f64 * step).min(to)).collect())
}

/// Isotropic curve rows: normalized ζ, envelope, and the trace-norm bound where it applies.
pub fn isotropic_curve(q: f64, d: usize, xs: &[f64], envelope_step: f64) -> Result<Vec<CurveRow>> {
    xs.iter()
        .map(|&f| {
            let lower_bound = lower_bound_thm2(&isotropic(f, d)?, q).ok().map(|r| r.lower_bound);
            Ok(CurveRow {
                x: f,
                raw: zeta_isotropic(f, q, d, true)?,
                envelope: ctq_isotropic_with_step(f, q, d, envelope_step)?,
                lower_bound,
                eof: None,
            })
        })
        .collect()
}

/// Two-qubit Werner curve rows with the EoF comparison column.
pub fn werner_curve(q: f64, xs: &[f64], envelope_step: f64) -> Result<Vec<CurveRow>> {
    xs.iter()
        .map(|&w| {
            let lower_bound = lower_bound_thm2(&werner(w, 2)?, q).ok().map(|r| r.lower_bound);
            Ok(CurveRow {
                x: w,
                raw: zeta_werner(w, q, true)?,
                envelope: ctq_werner_with_step(w, q, envelope_step)?,
                lower_bound,
                eof: Some(eof_werner(w)?),
            })
        })
        .collect()
}

/// ζ_w as a function of w, to compare with h_q(2w−1).
pub fn werner_via_hq(w: f64, q: f64) -> Result<f64> {
    if w <= 0.5 {
        return Ok(0.0);
    }
    h_q(2.0 * w - 1.0, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_sigma_examples() {
        for d in [2usize, 3, 4] {
            let cs = chi_sigma(1.0, d).unwrap();
            let u = 1.0 / (d as f64).sqrt();
            assert!((cs.chi - u).abs() < 1e-15 && (cs.sigma - u).abs() < 1e-15);
            let cs = chi_sigma(1.0 / d as f64, d).unwrap();
            assert!((cs.chi - 1.0).abs() < 1e-15 && cs.sigma.abs() < 1e-15);
            for k in 1..10 {
                let f = 1.0 / d as f64 + (1.0 - 1.0 / d as f64) * k as f64 / 10.0;
                let cs = chi_sigma(f, d).unwrap();
                let df = d as f64;
                assert!((cs.chi * cs.chi + (df - 1.0) * cs.sigma * cs.sigma - 1.0).abs() < 1e-10);
                assert!((cs.chi + (df - 1.0) * cs.sigma - (f * df).sqrt()).abs() < 1e-10);
                assert!(0.0 <= cs.sigma && cs.sigma <= cs.chi && cs.chi <= 1.0);
            }
        }
        let cs = chi_sigma(0.8, 2).unwrap();
        let s2 = 2f64.sqrt();
        assert!((cs.chi - (0.8f64.sqrt() + 0.2f64.sqrt()) / s2).abs() < 1e-15);
        assert!((cs.sigma - (0.8f64.sqrt() - 0.2f64.sqrt()) / s2).abs() < 1e-15);
        assert!(matches!(
            chi_sigma(0.2, 3),
            Err(Error::FidelityBelowSeparableBoundary { .. })
        ));
    }

    #[test]
    fn zeta_examples() {
        for d in [2usize, 3, 5] {
            for q in [2.0, 3.0, 4.0] {
                assert!((zeta_isotropic(1.0, q, d, false).unwrap() - mu(d, q)).abs() < 1e-12);
                assert!((zeta_isotropic(1.0, q, d, true).unwrap() - 1.0).abs() < 1e-12);
                assert_eq!(zeta_isotropic(0.9 / d as f64, q, d, true).unwrap(), 0.0);
            }
        }
        for k in 1..20 {
            let f = 0.5 + 0.025 * k as f64;
            let z3 = zeta_isotropic(f, 3.0, 2, true).unwrap();
            assert!((z3 - (2.0 * f - 1.0).powi(2)).abs() < 1e-12);
            let z4 = zeta_isotropic(f, 4.0, 2, true).unwrap();
            let expected = (7.0 + 4.0 * f * (1.0 - f)) / 7.0 * (2.0 * f - 1.0).powi(2);
            assert!((z4 - expected).abs() < 1e-12);
        }
        assert!(zeta_isotropic(0.8, 1.0, 2, true).is_err());
    }

    #[test]
    fn envelope_of_convex_input_is_identity() {
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let raw: Vec<f64> = grid.iter().map(|x| x * x).collect();
        let c = convex_envelope(&grid, &raw).unwrap();
        assert!(c.chords.is_empty() && c.breakpoints.is_empty());
        for (a, b) in c.values.iter().zip(&raw) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(
            convex_envelope(&[0.0, 1.0], &[0.0, 1.0]),
            Err(Error::GridTooCoarse(2))
        );
    }

    #[test]
    fn envelope_is_convex_below_and_idempotent() {
        let grid: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
        let raw: Vec<f64> = grid.iter().map(|x| (7.0 * x).sin() + x).collect();
        let c = convex_envelope(&grid, &raw).unwrap();
        for w in c.values.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-9);
        }
        for (e, r) in c.values.iter().zip(&raw) {
            assert!(*e <= r + 1e-12);
        }
        let again = convex_envelope(&grid, &c.values).unwrap();
        for (a, b) in again.values.iter().zip(&c.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(!c.chords.is_empty());
    }

    #[test]
    fn isotropic_envelope_structure() {
        let c = isotropic_envelope(3.0, 3, DEFAULT_GRID_STEP).unwrap();
        assert_eq!(c.chords.len(), 1);
        let (i, j) = c.chords[0];
        assert_eq!(c.grid[j], 1.0);
        let (slope, intercept) = c.chord_line((i, j));
        // tangent from (1, 1) touches at F = 8/9 with slope 9/4
        assert!((c.grid[i] - 8.0 / 9.0).abs() < 2e-4);
        assert!((slope - 2.25).abs() < 1e-3 && slope <= 2.25 + 1e-12);
        assert!((slope + intercept - 1.0).abs() < 1e-12);
        let v = ctq_isotropic(0.97, 3.0, 3).unwrap();
        assert!((v - (2.23 * 0.97 - 1.23)).abs() < 2e-3);
        for q in [3.0, 4.0] {
            let c = isotropic_envelope(q, 2, DEFAULT_GRID_STEP).unwrap();
            assert!(c.chords.is_empty());
        }
    }

    #[test]
    fn ctq_isotropic_examples() {
        assert!((ctq_isotropic(0.75, 3.0, 2).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(ctq_isotropic(1.0 / 3.0, 3.0, 3).unwrap(), 0.0);
        assert!((ctq_isotropic(1.0, 4.0, 3).unwrap() - 1.0).abs() < 1e-12);
        let a = ctq_isotropic(0.9, 4.0, 3).unwrap();
        assert!(a <= zeta_isotropic(0.9, 4.0, 3, true).unwrap());
    }

    #[test]
    fn concavity_onset_sits_inside_the_chord() {
        let on3 = concavity_onset(3.0, 3, DEFAULT_GRID_STEP).unwrap().unwrap();
        let on4 = concavity_onset(4.0, 3, DEFAULT_GRID_STEP).unwrap().unwrap();
        assert!((on3 - 0.936).abs() < 2e-3, "{on3}");
        assert!((on4 - 0.904).abs() < 2e-3, "{on4}");
        assert!(concavity_onset(3.0, 2, 1e-3).unwrap().is_none());
    }

    #[test]
    fn zeta_is_increasing() {
        for (q, d) in [(3.0, 3), (4.0, 3)] {
            let mut prev = 0.0;
            for k in 0..=10_000 {
                let f = 1.0 / 3.0 + (2.0 / 3.0) * k as f64 / 10_000.0;
                let v = zeta_isotropic(f, q, d, true).unwrap();
                assert!(v - prev > -1e-10);
                prev = v;
            }
        }
    }

    #[test]
    fn werner_examples() {
        for q in [2.0, 3.0, 8.0] {
            assert!((zeta_werner(1.0, q, false).unwrap() - mu(2, q)).abs() < 1e-12);
            assert!((zeta_werner(1.0, q, true).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(zeta_werner(0.5, q, true).unwrap(), 0.0);
        }
        for k in 1..20 {
            let w = 0.5 + 0.025 * k as f64;
            let z = zeta_werner(w, 3.0, true).unwrap();
            assert!((z - (2.0 * w - 1.0).powi(2)).abs() < 1e-12);
            for q in [2.0, 2.7, 3.5, 4.0, 6.0] {
                let a = zeta_werner(w, q, true).unwrap();
                assert!((a - werner_via_hq(w, q).unwrap()).abs() < 1e-12);
            }
        }
        assert!((ctq_werner(0.8, 3.0).unwrap() - 0.36).abs() < 1e-12);
    }

    #[test]
    fn eof_examples() {
        assert!((eof_werner(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(eof_werner(0.5).unwrap(), 0.0);
        let e = eof_werner(0.85).unwrap();
        assert!(ctq_werner(0.85, 2.0).unwrap() < e && e < ctq_werner(0.85, 8.0).unwrap());
        for k in 1..50 {
            let w = 0.5 + 0.01 * k as f64;
            let e = eof_werner(w).unwrap();
            assert!(ctq_werner(w, 2.0).unwrap() <= e + 1e-12);
            if w >= 0.62 {
                assert!(e <= ctq_werner(w, 8.0).unwrap() + 1e-12);
            }
        }
        // close to the separable boundary the ordering with q = 8 reverses
        assert!(eof_werner(0.55).unwrap() > ctq_werner(0.55, 8.0).unwrap() + 1e-3);
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        for d in [2usize, 3, 4] {
            for q in [2.0, 3.0, 4.0] {
                for k in 1..=10 {
                    let f = 1.0 / d as f64 + (1.0 - 1.0 / d as f64) * k as f64 / 10.0;
                    let o = oracle_min_schmidt(f, q, d).unwrap();
                    let z = zeta_isotropic(f, q, d, false).unwrap();
                    assert!((o - z).abs() < 1e-6, "F={f} q={q} d={d}: {o} vs {z}");
                }
            }
        }
        assert!((oracle_min_schmidt(1.0, 3.0, 3).unwrap() - mu(3, 3.0)).abs() < 1e-12);
        assert!(oracle_min_schmidt(1.0 / 3.0 + 1e-7, 3.0, 3).unwrap() < 1e-5);
        assert!(matches!(
            oracle_min_schmidt(0.3, 3.0, 3),
            Err(Error::InfeasibleConstraint(_))
        ));
    }

    #[test]
    fn vertex_profile_is_not_minimal_at_large_q() {
        let (f, q, d) = (14.0 / 15.0, 7.0, 3);
        let o = oracle_min_schmidt(f, q, d).unwrap();
        let z = zeta_isotropic(f, q, d, false).unwrap();
        assert!(z - o > 0.01, "{z} vs {o}");
    }

    fn parallelogram_samples(q: f64) -> Vec<(f64, f64, f64, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(q.to_bits());
        let mut out = Vec::new();
        while out.len() < 3000 {
            let d = rng.random_range(2..=5usize);
            let f = rng.random_range(1.0 / d as f64 + 1e-3..1.0 - 1e-3);
            let fd = f * d as f64;
            let n = rng.random_range(1.0..fd);
            let v = rng.random_range(fd..d as f64);
            let m = v - n;
            let margin = 2e-6;
            if m > margin && n > 1.0 + margin && n < fd - margin && v > fd + margin && v < d as f64 - margin {
                out.push((n, m, f, d));
            }
        }
        out
    }

    #[test]
    fn two_level_derivative_signs() {
        let h = 1e-6;
        for q in [2.0, 3.0, 4.0] {
            for (n, m, f, d) in parallelogram_samples(q) {
                let c = |n: f64, m: f64| two_level_ctq(n, m, f, q, d);
                let dm = (c(n, m + h) - c(n, m - h)) / (2.0 * h);
                let du = (c(n - h / 2.0, m + h / 2.0) - c(n + h / 2.0, m - h / 2.0)) / (2.0 * h);
                assert!(dm <= 1e-9, "dm={dm} at n={n} m={m} F={f} d={d} q={q}");
                assert!(du <= 1e-9, "du={du} at n={n} m={m} F={f} d={d} q={q}");
            }
        }
    }

    #[test]
    fn u_derivative_turns_positive_at_q6() {
        let (n, m, f, q, d) = (1.1932649661389205, 1.8028609272577634, 0.9783323332879774, 6.0, 3);
        let h = 1e-6;
        let c = |n: f64, m: f64| two_level_ctq(n, m, f, q, d);
        let du = (c(n - h / 2.0, m + h / 2.0) - c(n + h / 2.0, m - h / 2.0)) / (2.0 * h);
        assert!(du > 1e-4);
    }

    #[test]
    fn curve_rows() {
        let xs = sweep(0.0, 1.0, 0.05).unwrap();
        assert_eq!(xs.len(), 21);
        let rows = isotropic_curve(4.0, 2, &xs, 1e-3).unwrap();
        for r in &rows {
            let b = r.lower_bound.unwrap();
            assert!(r.envelope - b >= -1e-9);
        }
        assert!((rows[10].envelope - rows[10].lower_bound.unwrap()).abs() < 1e-9);
        assert!((rows[20].envelope - rows[20].lower_bound.unwrap()).abs() < 1e-9);
        let rows = isotropic_curve(3.0, 2, &xs, 1e-3).unwrap();
        assert!(rows.iter().all(|r| r.lower_bound.is_none()));
        let rows = werner_curve(8.0, &xs, 1e-3).unwrap();
        assert!(rows
            .iter()
            .filter(|r| r.x >= 0.62)
            .all(|r| r.eof.unwrap() <= r.envelope + 1e-12));
    }
}
