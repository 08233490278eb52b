//! Regularity of the alloy-type potential as a random field: the bounded-support
//! counterexample to conditional Hölder continuity, and the exact conditional
//! laws for Gaussian disorder with two-site potential u(0) = 1, u(−1) = u₋₁.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::onedim::profile;
use crate::potential::SingleSitePotential;
use crate::rng;

/// Constants of the interval-arithmetic counterexample on Θ = {0, …, n−1}.
#[derive(Clone, Debug)]
pub struct NegexampleConstants {
    pub n: usize,
    /// profile u(0), …, u(n−1)
    pub values: Vec<f64>,
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
    /// sites k whose ω_{−k} is pinned near 1 by the conditioning
    pub theta1: Vec<usize>,
    /// sites k whose ω_{−k} is pinned near 0
    pub theta0: Vec<usize>,
    /// Σ over the positive part
    pub s_plus: f64,
    /// centre of the forced window for V(0)
    pub m: f64,
    /// half-width factor n·u_max/u_min
    pub c: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// n = 1: both conditioned sites coincide with or are unrelated to V(0)
    pub degenerate: bool,
}

/// Constants for a one-dimensional potential with connected, zero-free support.
pub fn negexample_constants(u: &SingleSitePotential) -> Result<NegexampleConstants> {
    let values = profile(u)?;
    if values.contains(&0.0) {
        return invalid("all values on the support interval must be nonzero");
    }
    let n = values.len();
    let positive: Vec<usize> = (0..n).filter(|&k| values[k] > 0.0).collect();
    let negative: Vec<usize> = (0..n).filter(|&k| values[k] < 0.0).collect();
    let shifted = positive.iter().map(|&k| k + 1);
    let mut theta1: Vec<usize> =
        if positive.contains(&(n - 1)) { shifted.filter(|&k| k < n).chain(std::iter::once(0)).collect() } else { shifted.collect() };
    theta1.sort_unstable();
    theta1.dedup();
    let theta0 = (0..n).filter(|k| !theta1.contains(k)).collect();
    let abs = values.iter().map(|v| v.abs());
    let u_min = abs.clone().fold(f64::INFINITY, f64::min);
    let u_max = abs.fold(0.0, f64::max);
    Ok(NegexampleConstants {
        n,
        s_plus: positive.iter().map(|&k| values[k]).sum(),
        m: theta1.iter().map(|&k| values[k]).sum(),
        c: n as f64 * u_max / u_min,
        values,
        positive,
        negative,
        theta1,
        theta0,
        u_min,
        u_max,
        degenerate: n == 1,
    })
}

/// Outcome of the conditioned sampling run.
#[derive(Clone, Debug)]
pub struct NegexampleReport {
    pub constants: NegexampleConstants,
    pub delta: f64,
    pub delta_prime: f64,
    /// attempts per block
    pub attempts: usize,
    pub accepted_left: usize,
    pub accepted_right: usize,
    /// paired accepted configurations that were tested
    pub pairs: usize,
    pub violations: usize,
    /// smaller of the two per-block acceptance rates
    pub acceptance_rate: f64,
    /// max |V(0) − m| / c over the pairs
    pub max_scaled_deviation: f64,
}

impl NegexampleReport {
    pub fn violation_fraction(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.violations as f64 / self.pairs as f64
        }
    }
}

/// Rejection-sample uniform(0,1) configurations with V(−1), V(n−1) ∈ [s⁺ − δ′, s⁺] and
/// test V(0) ∈ [m − cδ, m + cδ].
///
/// V(−1) depends on ω_{−n..−1} and V(n−1) on ω_{0..n−1}; the two blocks are
/// independent, so each is sampled by its own rejection loop and accepted blocks
/// are paired in order.
pub fn negexample_check(u: &SingleSitePotential, delta: f64, delta_prime: f64, attempts: usize, seed: u64) -> Result<NegexampleReport> {
    if !(delta_prime > 0.0 && delta >= delta_prime) {
        return invalid(format!("need δ ≥ δ′ > 0, got δ = {delta}, δ′ = {delta_prime}"));
    }
    if attempts == 0 {
        return invalid("at least one attempt required");
    }
    let k = negexample_constants(u)?;
    let n = k.n;
    // block[j] = ω_{offset + j}; V(x) = Σ_t u(t) ω_{x−t}
    let window =
        |block: &[f64], offset: i64, x: i64| -> f64 { (0..n).map(|t| k.values[t] * block[(x - t as i64 - offset) as usize]).sum::<f64>() };
    let accept = |v: f64| v >= k.s_plus - delta_prime && v <= k.s_plus;
    let sample_block = |key: u64, offset: i64, site: i64| -> Vec<Vec<f64>> {
        let mut r = rng::stream(seed, 0, key);
        let mut kept = Vec::new();
        let mut block = vec![0.0; n];
        for _ in 0..attempts {
            block.iter_mut().for_each(|w| *w = r.random::<f64>());
            if accept(window(&block, offset, site)) {
                kept.push(block.clone());
            }
        }
        kept
    };
    let left = sample_block(0x4E_0001, -(n as i64), -1);
    let right = sample_block(0x4E_0002, 0, n as i64 - 1);
    let acceptance_rate = left.len().min(right.len()) as f64 / attempts as f64;
    if acceptance_rate < 1e-6 || left.is_empty() || right.is_empty() {
        return Err(Error::Inconclusive(format!(
            "acceptance too low: {} / {} left, {} / {} right",
            left.len(),
            attempts,
            right.len(),
            attempts
        )));
    }
    let pairs = left.len().min(right.len());
    let mut violations = 0;
    let mut max_scaled_deviation: f64 = 0.0;
    let mut joint = vec![0.0; 2 * n];
    for (l, r) in left.iter().zip(&right) {
        joint[..n].copy_from_slice(l);
        joint[n..].copy_from_slice(r);
        let v0 = window(&joint, -(n as i64), 0);
        let dev = (v0 - k.m).abs();
        max_scaled_deviation = max_scaled_deviation.max(dev / k.c);
        if dev > k.c * delta {
            violations += 1;
        }
    }
    Ok(NegexampleReport {
        constants: k,
        delta,
        delta_prime,
        attempts,
        accepted_left: left.len(),
        accepted_right: right.len(),
        pairs,
        violations,
        acceptance_rate,
        max_scaled_deviation,
    })
}

/// s_l = Σ_{i=0..l} u₋₁^{2i}, the determinant of A_lA_lᵀ (s₀ = 1).
pub fn s_sum(u: f64, l: usize) -> f64 {
    (0..=l).map(|i| u.powi(2 * i as i32)).sum()
}

/// The l × (l+1) bidiagonal matrix mapping (ω_x, …, ω_{x+l}) to (V(x), …, V(x+l−1)).
pub fn a_matrix(u: f64, l: usize) -> DMatrix<f64> {
    DMatrix::from_fn(l, l + 1, |i, j| {
        if j == i {
            1.0
        } else if j == i + 1 {
            u
        } else {
            0.0
        }
    })
}

/// Determinant and corner inverse entries of A_lA_lᵀ against the closed forms.
#[derive(Clone, Copy, Debug)]
pub struct DeterminantCheck {
    pub l: usize,
    pub det: f64,
    pub s_l: f64,
    /// (A_lA_lᵀ)⁻¹(1,1)
    pub corner_first: f64,
    /// (A_lA_lᵀ)⁻¹(l,l)
    pub corner_last: f64,
    /// s_{l−1}/s_l
    pub corner_expected: f64,
}

impl DeterminantCheck {
    /// Largest relative discrepancy of the three identities.
    pub fn discrepancy(&self) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        rel(self.det, self.s_l).max(rel(self.corner_first, self.corner_expected)).max(rel(self.corner_last, self.corner_expected))
    }
}

pub fn a_l_determinants(u: f64, l: usize) -> Result<DeterminantCheck> {
    if l == 0 {
        return invalid("l ≥ 1 required");
    }
    if !u.is_finite() {
        return invalid("u₋₁ must be finite");
    }
    let a = a_matrix(u, l);
    let g = &a * a.transpose();
    let lu = g.clone().lu();
    let det = lu.determinant();
    let inv = lu.try_inverse().ok_or_else(|| Error::Singular("A_lA_lᵀ".into()))?;
    Ok(DeterminantCheck {
        l,
        det,
        s_l: s_sum(u, l),
        corner_first: inv[(0, 0)],
        corner_last: inv[(l - 1, l - 1)],
        corner_expected: s_sum(u, l - 1) / s_sum(u, l),
    })
}

/// Conditional law of V(0) given V(−m..−1) = v⁻ and V(1..l) = v⁺.
#[derive(Clone, Debug)]
pub struct GaussianConditional {
    pub l: usize,
    pub m: usize,
    pub u: f64,
    pub sigma: f64,
    /// closed-form conditional variance
    pub variance: f64,
    /// closed-form conditional mean
    pub mean: f64,
    /// coefficients of v⁻ in the mean: u₋₁ · last row of (A_mA_mᵀ)⁻¹
    pub left_coeffs: Vec<f64>,
    /// coefficients of v⁺ in the mean: u₋₁ · first row of (A_lA_lᵀ)⁻¹
    pub right_coeffs: Vec<f64>,
    /// Schur-complement values from the full covariance matrices
    pub oracle_variance: f64,
    pub oracle_mean: f64,
}

impl GaussianConditional {
    pub fn discrepancy(&self) -> (f64, f64) {
        ((self.variance - self.oracle_variance).abs(), (self.mean - self.oracle_mean).abs())
    }

    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// γ = σ²(u₋₁² − 1 + 1/s_m + 1/s_l); one-sided cases follow from s₀ = 1.
pub fn conditional_variance(u: f64, sigma: f64, l: usize, m: usize) -> f64 {
    sigma * sigma * (u * u - 1.0 + 1.0 / s_sum(u, m) + 1.0 / s_sum(u, l))
}

fn inverse_gram(u: f64, l: usize) -> Result<DMatrix<f64>> {
    let a = a_matrix(u, l);
    (&a * a.transpose()).try_inverse().ok_or_else(|| Error::Singular("A_lA_lᵀ".into()))
}

pub fn gaussian_conditional(u: f64, sigma: f64, l: usize, m: usize, v_minus: &[f64], v_plus: &[f64]) -> Result<GaussianConditional> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return invalid("σ must be positive");
    }
    if !u.is_finite() {
        return invalid("u₋₁ must be finite");
    }
    if v_minus.len() != m || v_plus.len() != l {
        return invalid(format!("expected {m} left and {l} right values, got {} and {}", v_minus.len(), v_plus.len()));
    }
    let left_coeffs: Vec<f64> = if m == 0 { Vec::new() } else { inverse_gram(u, m)?.row(m - 1).iter().map(|c| u * c).collect() };
    let right_coeffs: Vec<f64> = if l == 0 { Vec::new() } else { inverse_gram(u, l)?.row(0).iter().map(|c| u * c).collect() };
    let dot = |c: &[f64], v: &[f64]| c.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mean = dot(&left_coeffs, v_minus) + dot(&right_coeffs, v_plus);

    // oracle: X = (ω_{−m}, …, ω_{l+1}) i.i.d. N(0, σ²); Y = ω₀ + u₋₁ω₁; W = B X
    let dim = m + l + 2;
    let col = |k: i64| (k + m as i64) as usize;
    let mut a = DMatrix::zeros(1, dim);
    a[(0, col(0))] = 1.0;
    a[(0, col(1))] = u;
    let rows: Vec<i64> = (-(m as i64)..0).chain(1..=l as i64).collect();
    let mut b = DMatrix::zeros(rows.len(), dim);
    for (r, &k) in rows.iter().enumerate() {
        b[(r, col(k))] = 1.0;
        b[(r, col(k + 1))] = u;
    }
    let s2 = sigma * sigma;
    let cov_yy = (&a * a.transpose())[(0, 0)] * s2;
    let (oracle_variance, oracle_mean) = if rows.is_empty() {
        (cov_yy, 0.0)
    } else {
        let cov_yw = &a * b.transpose() * s2;
        let cov_ww = &b * b.transpose() * s2;
        let inv = cov_ww.try_inverse().ok_or_else(|| Error::Singular("cov(W, W)".into()))?;
        let gain = &cov_yw * inv;
        let v = DMatrix::from_iterator(rows.len(), 1, v_minus.iter().chain(v_plus).copied());
        (cov_yy - (&gain * cov_yw.transpose())[(0, 0)], (&gain * v)[(0, 0)])
    };
    Ok(GaussianConditional {
        l,
        m,
        u,
        sigma,
        variance: conditional_variance(u, sigma, l, m),
        mean,
        left_coeffs,
        right_coeffs,
        oracle_variance,
        oracle_mean,
    })
}

/// Worst conditional spread over a box Λ_L = {−L, …, L}.
#[derive(Clone, Copy, Debug)]
pub struct HolderRow {
    pub half_width: usize,
    /// min over x ∈ Λ_L of the conditional std of V(x) given the rest of the box
    pub min_std: f64,
    pub argmin: i64,
    /// Lipschitz (τ = 1) constant 1/(√(2π)·min_std) of the conditional law
    pub constant: f64,
}

/// Per-box Hölder constants with the uniform floor σ√|u₋₁² − 1|.
#[derive(Clone, Debug)]
pub struct HolderProbe {
    pub u: f64,
    pub sigma: f64,
    pub rows: Vec<HolderRow>,
    pub uniform_floor: f64,
}

impl HolderProbe {
    /// Whether every box keeps its min std at or above the uniform floor.
    pub fn uniformly_bounded(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.min_std >= self.uniform_floor - tol)
    }

    /// Whether the min std strictly decreases along the probed boxes.
    pub fn decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].min_std < w[0].min_std)
    }
}

pub fn holder_constant_probe(u: f64, sigma: f64, half_widths: &[usize]) -> Result<HolderProbe> {
    if !(sigma > 0.0) {
        return invalid("σ must be positive");
    }
    if half_widths.is_empty() || half_widths.contains(&0) {
        return invalid("box half-widths must be positive");
    }
    let rows = half_widths
        .iter()
        .map(|&big_l| {
            let (argmin, min_std) = (-(big_l as i64)..=big_l as i64)
                .map(|x| {
                    let m = (x + big_l as i64) as usize;
                    let l = (big_l as i64 - x) as usize;
                    (x, conditional_variance(u, sigma, l, m).sqrt())
                })
                .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
            HolderRow { half_width: big_l, min_std, argmin, constant: 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * min_std) }
        })
        .collect();
    Ok(HolderProbe { u, sigma, rows, uniform_floor: sigma * (u * u - 1.0).abs().sqrt() })
}
