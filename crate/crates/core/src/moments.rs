//! Monte Carlo fractional moments E|G_Γ(z; x, y)|^s, decay profiles, the
//! finite-volume criterion sum and a-priori trend checks.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{invalid, precondition, Error, Result};
use crate::green::{annulus, green_column};
use crate::lattice::{BoxGeometry, Site};
use crate::mc::{estimate_vectors, run_trials, summarize, Estimate};
use crate::model::{assemble_hamiltonian, ModelConfig};

/// Monte Carlo estimate of a fractional moment.
#[derive(Clone, Debug)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub exponent: f64,
    pub x: Site,
    pub y: Site,
    pub z: Complex64,
}

impl MomentEstimate {
    fn from(e: Estimate, exponent: f64, x: &Site, y: &Site, z: Complex64) -> Self {
        Self { mean: e.mean, stderr: e.stderr, trials: e.trials, exponent, x: x.clone(), y: y.clone(), z }
    }

    /// mean + k·stderr
    pub fn upper(&self, k: f64) -> f64 {
        self.mean + k * self.stderr
    }
}

fn check_inputs(z: Complex64, s_exp: f64) -> Result<()> {
    if z.im == 0.0 {
        return invalid("energy must have non-zero imaginary part");
    }
    if !(s_exp > 0.0 && s_exp < 1.0) {
        return invalid(format!("exponent {s_exp} outside (0, 1)"));
    }
    Ok(())
}

/// Column G_Γ(z; ·, x) for one disorder trial. A failed solve is retried once
/// with a slightly enlarged imaginary part; a second failure aborts.
fn trial_column(model: &ModelConfig, gamma: &BoxGeometry, z: Complex64, x: &Site, seed: u64, trial: u64) -> Result<DVector<Complex64>> {
    let omega = model.sample_for(gamma, seed, trial);
    let h = assemble_hamiltonian(model, &omega, gamma)?;
    green_column(&h, z, x).or_else(|_| {
        let nudged = Complex64::new(z.re, z.im * (1.0 + 1e-6));
        green_column(&h, nudged, x).map_err(|e| Error::Singular(format!("trial {trial}: {e}")))
    })
}

/// E|G_Γ(z; x, y)|^{s_exp} over the disorder, deterministic for a fixed seed.
#[allow(clippy::too_many_arguments)]
pub fn estimate_moment(
    model: &ModelConfig,
    gamma: &BoxGeometry,
    z: Complex64,
    s_exp: f64,
    x: &Site,
    y: &Site,
    trials: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    check_inputs(z, s_exp)?;
    if !gamma.contains(x) || !gamma.contains(y) {
        return precondition("x and y must lie in the box");
    }
    if trials == 0 {
        return invalid("at least one trial required");
    }
    let iy = gamma.index_of(y).expect("checked");
    let samples = run_trials(trials, |t| Ok(trial_column(model, gamma, z, x, seed, t)?[iy].norm().powf(s_exp)))?;
    Ok(MomentEstimate::from(summarize(&samples), s_exp, x, y, z))
}

/// E|G_Γ(z; x, y)|^{s_exp} for every y ∈ Γ from the same trials.
pub fn estimate_row(
    model: &ModelConfig,
    gamma: &BoxGeometry,
    z: Complex64,
    s_exp: f64,
    x: &Site,
    trials: usize,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    check_inputs(z, s_exp)?;
    if !gamma.contains(x) {
        return precondition("x must lie in the box");
    }
    if trials == 0 {
        return invalid("at least one trial required");
    }
    let samples =
        run_trials(trials, |t| Ok(trial_column(model, gamma, z, x, seed, t)?.iter().map(|g| g.norm().powf(s_exp)).collect::<Vec<f64>>()))?;
    Ok(estimate_vectors(&samples).into_iter().zip(gamma.sites()).map(|(e, y)| MomentEstimate::from(e, s_exp, x, y, z)).collect())
}

/// Weighted least-squares fit of ln(mean) = intercept − slope·dist.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    /// fitted decay rate μ̂
    pub slope: f64,
    pub intercept: f64,
    /// weighted RMS residual of the log fit
    pub residual: f64,
    pub dist_min: i64,
    pub dist_max: i64,
}

/// Fits ln(mean) against ℓ∞ distance with weights (mean/stderr)², the inverse
/// variance of the log by the delta method; points with zero stderr get unit weight.
pub fn fit_decay(points: &[(i64, f64, f64)]) -> Option<DecayFit> {
    let pts: Vec<_> = points.iter().filter(|(_, m, _)| *m > 0.0 && m.is_finite()).collect();
    if pts.len() < 2 {
        return None;
    }
    let any_noise = pts.iter().any(|(_, _, e)| *e > 0.0);
    let w: Vec<f64> = pts.iter().map(|(_, m, e)| if any_noise && *e > 0.0 { (m / e).powi(2) } else { 1.0 }).collect();
    let sw: f64 = w.iter().sum();
    let mx = pts.iter().zip(&w).map(|((d, _, _), w)| w * *d as f64).sum::<f64>() / sw;
    let my = pts.iter().zip(&w).map(|((_, m, _), w)| w * m.ln()).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().zip(&w).map(|((d, _, _), w)| w * (*d as f64 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().zip(&w).map(|((d, m, _), w)| w * (*d as f64 - mx) * (m.ln() - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let res = (pts.iter().zip(&w).map(|((d, m, _), w)| w * (m.ln() - a - b * *d as f64).powi(2)).sum::<f64>() / sw).sqrt();
    Some(DecayFit {
        slope: -b,
        intercept: a,
        residual: res,
        dist_min: pts.iter().map(|p| p.0).min().expect("non-empty"),
        dist_max: pts.iter().map(|p| p.0).max().expect("non-empty"),
    })
}

/// Moments from a fixed site x to every site of the box, with a decay fit.
#[derive(Clone, Debug)]
pub struct DecayProfile {
    pub estimates: Vec<MomentEstimate>,
    /// ℓ∞ distance of each estimate from x
    pub distances: Vec<i64>,
    /// fit over distances ≥ 1; `None` when the data are degenerate
    pub fit: Option<DecayFit>,
}

impl DecayProfile {
    /// Compares mean + k·stderr with `bound(dist)` for every dist ≥ `from`.
    pub fn compare(&self, from: i64, k: f64, bound: impl Fn(usize) -> f64) -> Vec<BoundComparison> {
        self.estimates
            .iter()
            .zip(&self.distances)
            .filter(|(_, d)| **d >= from)
            .map(|(e, d)| {
                let b = bound(*d as usize);
                BoundComparison { dist: *d, y: e.y.clone(), upper: e.upper(k), bound: b, pass: e.upper(k) <= b }
            })
            .collect()
    }
}

/// One point of a profile-versus-bound comparison.
#[derive(Clone, Debug)]
pub struct BoundComparison {
    pub dist: i64,
    pub y: Site,
    pub upper: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn decay_profile(
    model: &ModelConfig,
    gamma: &BoxGeometry,
    x: &Site,
    z: Complex64,
    s_exp: f64,
    trials: usize,
    seed: u64,
) -> Result<DecayProfile> {
    let estimates = estimate_row(model, gamma, z, s_exp, x, trials, seed)?;
    let distances: Vec<i64> = estimates.iter().map(|e| e.y.dist_inf(x)).collect();
    let pts: Vec<(i64, f64, f64)> =
        estimates.iter().zip(&distances).filter(|(_, d)| **d >= 1).map(|(e, d)| (*d, e.mean, e.stderr)).collect();
    Ok(DecayProfile { fit: fit_decay(&pts), estimates, distances })
}

/// Ξ_s(λ) = max{λ^{−s/(2|Θ|)}, λ^{−2s}}
pub fn xi(s: f64, lambda: f64, theta_size: usize) -> f64 {
    lambda.powf(-s / (2.0 * theta_size as f64)).max(lambda.powf(-2.0 * s))
}

/// The B_s-free part of the finite-volume criterion.
#[derive(Clone, Debug)]
pub struct FiniteVolumeSum {
    /// Σ_{w ∈ ∂ᵒW_x} E|G_{Λ∖W_x}(z; x, w)|^{s/(2|Θ|)}
    pub raw_sum: f64,
    pub raw_stderr: f64,
    /// raw_sum · L^{3(d−1)} Ξ_s(λ) / λ^{2s/(2|Θ|)}
    pub scaled: f64,
    pub scaled_stderr: f64,
    pub xi: f64,
    pub terms: Vec<MomentEstimate>,
    pub exterior: BoxGeometry,
}

#[allow(clippy::too_many_arguments)]
pub fn finite_volume_sum(
    model: &ModelConfig,
    lambda_box: &BoxGeometry,
    x: &Site,
    z: Complex64,
    s: f64,
    radius: i64,
    trials: usize,
    seed: u64,
) -> Result<FiniteVolumeSum> {
    if !(model.lambda > 0.0) {
        return invalid("coupling must be positive");
    }
    if !lambda_box.contains(x) {
        return precondition("x must lie in Λ");
    }
    let theta = model.potential.theta();
    let t = s / (2.0 * theta.len() as f64);
    check_inputs(z, t)?;
    let ann = annulus(lambda_box, x, radius, &theta)?;
    let inner = lambda_box.minus(&ann.w);
    if !inner.contains(x) {
        return precondition("x lies inside the annulus");
    }
    let exterior = if ann.w.is_empty() { ann.w.clone() } else { ann.w.exterior_boundary()? };
    let row = estimate_row(model, &inner, z, t, x, trials, seed)?;
    // G_{Λ∖W}(x, w) vanishes for w outside Λ∖W, in particular across components.
    let terms: Vec<MomentEstimate> = exterior
        .sites()
        .iter()
        .map(|w| match inner.index_of(w) {
            Some(i) => row[i].clone(),
            None => MomentEstimate { mean: 0.0, stderr: 0.0, trials, exponent: t, x: x.clone(), y: w.clone(), z },
        })
        .collect();
    let raw_sum: f64 = terms.iter().map(|e| e.mean).sum();
    // terms share trials, so bound the sum's stderr by the sum of stderrs
    let raw_stderr: f64 = terms.iter().map(|e| e.stderr).sum();
    let xi = xi(s, model.lambda, theta.len());
    let factor = (radius as f64).powi(3 * (model.dim as i32 - 1)) * xi / model.lambda.powf(2.0 * t);
    Ok(FiniteVolumeSum { raw_sum, raw_stderr, scaled: raw_sum * factor, scaled_stderr: raw_stderr * factor, xi, terms, exterior })
}

/// Empirical a-priori boundedness: the moment over an energy grid and along a
/// coupling ladder.
#[derive(Clone, Debug)]
pub struct AprioriTrend {
    pub by_energy: Vec<MomentEstimate>,
    pub by_coupling: Vec<(f64, MomentEstimate)>,
    /// max over the energy grid of mean + 3σ
    pub max_upper: f64,
    /// every ladder step satisfies next.mean ≤ prev.mean + 3(σ_prev + σ_next)
    pub nonincreasing: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn apriori_trend(
    model: &ModelConfig,
    gamma: &BoxGeometry,
    x: &Site,
    y: &Site,
    energies: &[Complex64],
    couplings: &[f64],
    s_exp: f64,
    trials: usize,
    seed: u64,
) -> Result<AprioriTrend> {
    let by_energy = energies.iter().map(|z| estimate_moment(model, gamma, *z, s_exp, x, y, trials, seed)).collect::<Result<Vec<_>>>()?;
    let z0 = *energies.first().ok_or_else(|| Error::Invalid("empty energy grid".into()))?;
    let by_coupling = couplings
        .iter()
        .map(|l| Ok((*l, estimate_moment(&model.with_lambda(*l), gamma, z0, s_exp, x, y, trials, seed)?)))
        .collect::<Result<Vec<_>>>()?;
    let max_upper = by_energy.iter().map(|e| e.upper(3.0)).fold(0.0, f64::max);
    let nonincreasing = by_coupling.windows(2).all(|w| w[1].1.mean <= w[0].1.mean + 3.0 * (w[0].1.stderr + w[1].1.stderr));
    Ok(AprioriTrend { by_energy, by_coupling, max_upper, nonincreasing })
}
