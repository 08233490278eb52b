//! Spectra of finite-volume Hamiltonians: eigenvalue counting, Monte Carlo
//! Wegner checks, (m, E)-regularity of cubes and eigenfunction decay fits.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, precondition, Result};
use crate::lattice::{build_box, BoxGeometry, Site};
use crate::mc::{run_trials, summarize};
use crate::model::{assemble_hamiltonian, HamiltonianMatrix, ModelConfig};
use crate::moments::estimate_moment;
use crate::poscomb::WegnerCoefficients;
use crate::potential::Configuration;

/// Eigenvalues of a symmetric matrix, ascending.
pub fn eigenvalues(h: &HamiltonianMatrix) -> Vec<f64> {
    sorted_eigen(&h.matrix).0
}

/// Eigenvalues ascending with matching eigenvector columns.
fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Number of eigenvalues in the closed interval [a, b].
pub fn count_in_interval(eigs: &[f64], a: f64, b: f64) -> Result<usize> {
    if a > b {
        return invalid("interval endpoints out of order");
    }
    Ok(eigs.iter().filter(|e| **e >= a && **e <= b).count())
}

/// Monte Carlo Wegner check on the cube Λ_l.
#[derive(Clone, Debug)]
pub struct WegnerReport {
    pub interval: (f64, f64),
    pub l: i64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    /// (1/2λ)‖ρ‖_Var |I| Σ_j ‖t_{j,l}‖₁
    pub abstract_bound: f64,
    pub bound_satisfied: bool,
}

/// (1/2λ) ‖ρ‖_Var |I| Σ_j ‖t_{j,l}‖₁
pub fn abstract_wegner_bound(model: &ModelConfig, coeffs: &WegnerCoefficients, width: f64) -> f64 {
    model.density.norm_var() * width * coeffs.total_l1 / (2.0 * model.lambda)
}

fn cube_counts(model: &ModelConfig, l: i64, intervals: &[(f64, f64)], trials: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let cube = build_box(l, &Site::origin(model.dim))?;
    run_trials(trials, |t| {
        let omega = model.sample_for(&cube, seed, t);
        let eigs = eigenvalues(&assemble_hamiltonian(model, &omega, &cube)?);
        intervals.iter().map(|(a, b)| Ok(count_in_interval(&eigs, *a, *b)? as f64)).collect()
    })
}

pub fn wegner_mc(model: &ModelConfig, coeffs: &WegnerCoefficients, a: f64, b: f64, trials: usize, seed: u64) -> Result<WegnerReport> {
    if a > b {
        return invalid("interval endpoints out of order");
    }
    if !(model.lambda > 0.0) {
        return invalid("coupling must be positive");
    }
    let counts = cube_counts(model, coeffs.l, &[(a, b)], trials, seed)?;
    let est = summarize(&counts.iter().map(|c| c[0]).collect::<Vec<_>>());
    let abstract_bound = abstract_wegner_bound(model, coeffs, b - a);
    Ok(WegnerReport {
        interval: (a, b),
        l: coeffs.l,
        mean: est.mean,
        stderr: est.stderr,
        trials,
        abstract_bound,
        bound_satisfied: est.upper(3.0) <= abstract_bound,
    })
}

/// Mean counts for [E − w, E + w] and [E − w/2, E + w/2] from the same trials.
#[derive(Clone, Copy, Debug)]
pub struct LinearityCheck {
    pub wide: (f64, f64),
    pub narrow: (f64, f64),
    pub ratio: f64,
    /// both means exceed 20 standard errors
    pub conclusive: bool,
}

pub fn wegner_linearity(model: &ModelConfig, l: i64, energy: f64, half_width: f64, trials: usize, seed: u64) -> Result<LinearityCheck> {
    let ivs = [(energy - half_width, energy + half_width), (energy - half_width / 2.0, energy + half_width / 2.0)];
    let counts = cube_counts(model, l, &ivs, trials, seed)?;
    let wide = summarize(&counts.iter().map(|c| c[0]).collect::<Vec<_>>());
    let narrow = summarize(&counts.iter().map(|c| c[1]).collect::<Vec<_>>());
    Ok(LinearityCheck {
        wide: (wide.mean, wide.stderr),
        narrow: (narrow.mean, narrow.stderr),
        ratio: wide.mean / narrow.mean,
        conclusive: wide.mean > 20.0 * wide.stderr && narrow.mean > 20.0 * narrow.stderr,
    })
}

/// (4C/π)|b − a|^s |Λ|
pub fn apriori_wegner_bound(c: f64, s: f64, volume: usize, width: f64) -> f64 {
    4.0 * c / std::f64::consts::PI * width.powf(s) * volume as f64
}

/// Empirical diagonal-moment constant: max over x ∈ Λ, a grid of E ∈ [a, b] and
/// the given ε of mean + 3σ of E|G(E + iε; x, x)|^s.
#[allow(clippy::too_many_arguments)]
pub fn fitted_diagonal_constant(
    model: &ModelConfig,
    cube: &BoxGeometry,
    a: f64,
    b: f64,
    energies: usize,
    epsilons: &[f64],
    s: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut c: f64 = 0.0;
    for i in 0..energies.max(1) {
        let e = if energies <= 1 { 0.5 * (a + b) } else { a + (b - a) * i as f64 / (energies - 1) as f64 };
        for eps in epsilons {
            for x in cube.sites() {
                let m = estimate_moment(model, cube, Complex64::new(e, *eps), s, x, x, trials, seed)?;
                c = c.max(m.upper(3.0));
            }
        }
    }
    Ok(c)
}

/// Spectral data of a cube used to evaluate real-energy Green functions.
pub struct CubeSpectrum {
    pub cube: BoxGeometry,
    pub center: Site,
    pub radius: i64,
    eigs: Vec<f64>,
    vecs: DMatrix<f64>,
    center_index: usize,
    boundary: Vec<usize>,
    scale: f64,
}

/// Outcome of the (m, E)-regularity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularity {
    Regular(f64),
    NotRegular(f64),
    /// E is (numerically) an eigenvalue
    Singular,
}

impl Regularity {
    pub fn is_regular(&self) -> bool {
        matches!(self, Regularity::Regular(_))
    }
}

impl CubeSpectrum {
    pub fn new(model: &ModelConfig, omega: &Configuration, radius: i64, center: &Site) -> Result<Self> {
        let cube = build_box(radius, center)?;
        let h = assemble_hamiltonian(model, omega, &cube)?;
        let (eigs, vecs) = sorted_eigen(&h.matrix);
        let boundary = cube.interior_boundary()?.sites().iter().map(|w| cube.index_of(w).expect("subset")).collect();
        let scale = 1.0 + eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let center_index = cube.index_of(center).expect("center in cube");
        Ok(Self { cube, center: center.clone(), radius, eigs, vecs, center_index, boundary, scale })
    }

    /// max_{w ∈ ∂ⁱΛ} |G(E; x, w)| via the eigendecomposition, or `None` at an eigenvalue.
    pub fn boundary_green(&self, e: f64) -> Option<f64> {
        if self.eigs.iter().any(|ev| (ev - e).abs() <= 1e-12 * self.scale) {
            return None;
        }
        let x = self.center_index;
        let weights: Vec<f64> = (0..self.eigs.len()).map(|k| self.vecs[(x, k)] / (self.eigs[k] - e)).collect();
        Some(
            self.boundary
                .iter()
                .map(|&w| (0..self.eigs.len()).map(|k| weights[k] * self.vecs[(w, k)]).sum::<f64>().abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn regularity(&self, e: f64, m: f64) -> Regularity {
        match self.boundary_green(e) {
            None => Regularity::Singular,
            Some(g) if g <= (-m * self.radius as f64).exp() => Regularity::Regular(g),
            Some(g) => Regularity::NotRegular(g),
        }
    }
}

/// Is Λ_{L,x} (m, E)-regular for the configuration ω?
pub fn regularity_check(model: &ModelConfig, omega: &Configuration, radius: i64, x: &Site, e: f64, m: f64) -> Result<Regularity> {
    Ok(CubeSpectrum::new(model, omega, radius, x)?.regularity(e, m))
}

/// Frequency with which, for every grid energy, at least one of two distant cubes is regular.
#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub radius: i64,
    pub x: Site,
    pub y: Site,
    pub m: f64,
    pub energies: Vec<f64>,
    pub grid_spacing: f64,
    /// per energy: frequency of "x-cube or y-cube regular"
    pub per_energy: Vec<f64>,
    /// frequency of "for all grid energies, x-cube or y-cube regular"
    pub all_energies: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl RegularityReport {
    pub const LIMITATION: &'static str = "grid approximation of a for-all-energies event; overestimates the probability";
}

#[allow(clippy::too_many_arguments)]
pub fn pair_regularity_probability(
    model: &ModelConfig,
    radius: i64,
    x: &Site,
    y: &Site,
    interval: (f64, f64),
    grid_points: usize,
    m: f64,
    trials: usize,
    seed: u64,
) -> Result<RegularityReport> {
    let need = 2 * radius + model.potential.diam_inf() + 1;
    if x.dist_inf(y) < need {
        return precondition(format!("cubes must be at ℓ∞ distance ≥ {need}"));
    }
    if grid_points == 0 || interval.0 > interval.1 {
        return invalid("empty energy grid");
    }
    let energies: Vec<f64> = if grid_points == 1 {
        vec![0.5 * (interval.0 + interval.1)]
    } else {
        (0..grid_points).map(|i| interval.0 + (interval.1 - interval.0) * i as f64 / (grid_points - 1) as f64).collect()
    };
    let both = build_box(radius, x)?.union(&build_box(radius, y)?);
    let rows = run_trials(trials, |t| {
        let omega = model.sample_for(&both, seed, t);
        let cx = CubeSpectrum::new(model, &omega, radius, x)?;
        let cy = CubeSpectrum::new(model, &omega, radius, y)?;
        Ok(energies
            .iter()
            .map(|e| if cx.regularity(*e, m).is_regular() || cy.regularity(*e, m).is_regular() { 1.0 } else { 0.0 })
            .collect::<Vec<f64>>())
    })?;
    let per_energy = (0..energies.len()).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / trials as f64).collect();
    let all = summarize(&rows.iter().map(|r| if r.iter().all(|v| *v == 1.0) { 1.0 } else { 0.0 }).collect::<Vec<_>>());
    let grid_spacing = if energies.len() > 1 { energies[1] - energies[0] } else { 0.0 };
    Ok(RegularityReport {
        radius,
        x: x.clone(),
        y: y.clone(),
        m,
        energies,
        grid_spacing,
        per_energy,
        all_energies: all.mean,
        stderr: all.stderr,
        trials,
    })
}

/// Decay fit of one eigenvector.
#[derive(Clone, Debug)]
pub struct EigenDecay {
    pub energy: f64,
    pub peak: Site,
    /// slope of ln|ψ| against ℓ∞ distance from the peak; `None` if too few points
    pub slope: Option<f64>,
}

/// For every eigenpair with energy in the window, the least-squares slope of
/// ln|ψ(y)| against |y − peak|_∞ over the outer half of the distances at which
/// |ψ| is above the numerical noise floor (10⁻¹² of its maximum).
pub fn eigenfunction_decay(model: &ModelConfig, omega: &Configuration, gamma: &BoxGeometry, window: (f64, f64)) -> Result<Vec<EigenDecay>> {
    let h = assemble_hamiltonian(model, omega, gamma)?;
    let (eigs, vecs) = sorted_eigen(&h.matrix);
    let picked: Vec<usize> = (0..eigs.len()).filter(|&k| eigs[k] >= window.0 && eigs[k] <= window.1).collect();
    if picked.is_empty() {
        return invalid("energy window does not meet the spectrum");
    }
    Ok(picked
        .into_iter()
        .map(|k| {
            let psi: DVector<f64> = vecs.column(k).into_owned();
            let (imax, pmax) = psi.iter().enumerate().fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            let peak = gamma.site(imax).clone();
            let floor = 1e-12 * pmax;
            let pts: Vec<(f64, f64)> = gamma
                .sites()
                .iter()
                .zip(psi.iter())
                .filter(|(_, v)| v.abs() >= floor)
                .map(|(y, v)| (y.dist_inf(&peak) as f64, v.abs().ln()))
                .collect();
            let dmax = pts.iter().map(|p| p.0).fold(0.0, f64::max);
            let outer: Vec<(f64, f64)> = pts.into_iter().filter(|(d, _)| *d >= 1.0 && *d >= dmax / 2.0).collect();
            EigenDecay { energy: eigs[k], peak, slope: ls_slope(&outer) }
        })
        .collect())
}

fn ls_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DisorderDensity;
    use crate::lattice::interval;
    use crate::model::free_path_spectrum;
    use crate::onedim::one_d_constants;
    use crate::poscomb::{find_i0, wegner_coefficients};
    use crate::potential::SingleSitePotential;
    use crate::rng::aux;
    use rand::Rng;

    fn delta_model(lambda: f64) -> ModelConfig {
        ModelConfig::new(lambda, SingleSitePotential::delta(1), DisorderDensity::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn free_spectra_and_trivial_cases() {
        for n in [2usize, 7, 30] {
            let h = HamiltonianMatrix::from_diagonal(&interval(1, n as i64), &vec![0.0; n]);
            let ev = eigenvalues(&h);
            for (a, b) in ev.iter().zip(free_path_spectrum(n)) {
                assert!((a - b).abs() < 1e-10);
            }
            assert_eq!(count_in_interval(&ev, f64::NEG_INFINITY, f64::INFINITY).unwrap(), n);
            assert_eq!(count_in_interval(&ev, -10.0, -5.0).unwrap(), 0);
        }
        let one = HamiltonianMatrix::from_diagonal(&interval(0, 0), &[3.5]);
        assert_eq!(eigenvalues(&one), vec![3.5]);
        assert!(count_in_interval(&[0.0], 1.0, 0.0).is_err());
    }

    /// Number of eigenvalues below x of a symmetric tridiagonal matrix by Sturm sequence.
    fn sturm_count(diag: &[f64], x: f64) -> usize {
        let mut q = 1.0;
        let mut count = 0;
        for (i, d) in diag.iter().enumerate() {
            q = d - x - if i == 0 { 0.0 } else { 1.0 / q };
            if q == 0.0 {
                q = 1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn eigenvalues_against_sturm_counts() {
        let mut rng = aux(4, 4);
        let diag: Vec<f64> = (0..20).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
        let h = HamiltonianMatrix::from_diagonal(&interval(0, 19), &diag);
        let ev = eigenvalues(&h);
        for probe in [-3.1, -1.0, 0.05, 0.9, 2.7] {
            assert_eq!(ev.iter().filter(|e| **e < probe).count(), sturm_count(&diag, probe));
        }
        let (vals, vecs) = sorted_eigen(&h.matrix);
        let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in [0, 7, 19] {
            let v = vecs.column(k);
            assert!((&h.matrix * v - v * vals[k]).norm() <= 1e-8 * norm);
        }
    }

    #[test]
    fn wegner_bound_formula_and_point_interval() {
        let m = delta_model(2.0);
        let lead = find_i0(&m.potential, 2).unwrap();
        let c = wegner_coefficients(&m.potential, &lead, 3).unwrap();
        let b1 = abstract_wegner_bound(&m, &c, 0.1);
        assert!((abstract_wegner_bound(&m, &c, 0.2) - 2.0 * b1).abs() < 1e-15);
        let r = wegner_mc(&m, &c, 0.5, 0.5, 200, 1).unwrap();
        assert_eq!(r.mean, 0.0);
        let r = wegner_mc(&m, &c, 0.0, 0.5, 400, 1).unwrap();
        assert!(r.bound_satisfied && r.mean > 0.0);
    }

    #[test]
    fn apriori_wegner_examples() {
        assert!((apriori_wegner_bound(std::f64::consts::PI / 4.0, 1.0, 1, 1.0) - 1.0).abs() < 1e-15);
        assert!((apriori_wegner_bound(1.3, 0.5, 10, 0.2) * 2.0 - apriori_wegner_bound(1.3, 0.5, 20, 0.2)).abs() < 1e-12);
    }

    #[test]
    fn regularity_examples() {
        let m = delta_model(1e4);
        let cube = build_box(4, &Site::d1(0)).unwrap();
        let omega = m.sample_for(&cube, 3, 0);
        // far below the spectrum with m = 0: |G| ≤ 1/dist < 1
        assert!(regularity_check(&m, &omega, 4, &Site::d1(0), -10.0, 0.0).unwrap().is_regular());
        let spec = CubeSpectrum::new(&m, &omega, 4, &Site::d1(0)).unwrap();
        assert_eq!(spec.regularity(spec.eigs[3], 0.1), Regularity::Singular);
        // large disorder, energy between far-separated levels
        let gap_mid = {
            let mut best = (0.0, 0.0);
            for w in spec.eigs.windows(2) {
                if w[1] - w[0] > best.0 {
                    best = (w[1] - w[0], 0.5 * (w[0] + w[1]));
                }
            }
            best.1
        };
        assert!(spec.regularity(gap_mid, 0.5).is_regular());
        // monotone in m
        let g = spec.boundary_green(gap_mid).unwrap();
        let m_star = -g.ln() / 4.0;
        assert!(spec.regularity(gap_mid, m_star * 0.99).is_regular());
        assert!(!spec.regularity(gap_mid, m_star * 1.01).is_regular());
    }

    #[test]
    fn pair_regularity_large_disorder() {
        let m = delta_model(1e4);
        let k = one_d_constants(&m.potential, &m.density, 1e4, 0.5).unwrap();
        let (x, y) = (Site::d1(0), Site::d1(20));
        let r = pair_regularity_probability(&m, 5, &x, &y, (-1.0, 1.0), 21, k.mu / 8.0, 200, 5).unwrap();
        assert!(r.all_energies >= 0.9);
        let coarse = pair_regularity_probability(&m, 5, &x, &y, (-1.0, 1.0), 5, k.mu / 8.0, 200, 5).unwrap();
        assert!(r.all_energies <= coarse.all_energies);
        assert!(pair_regularity_probability(&m, 5, &x, &Site::d1(10), (-1.0, 1.0), 5, 0.1, 10, 5).is_err());
    }

    #[test]
    fn eigenfunction_slopes() {
        let g = interval(0, 40);
        let free = delta_model(0.0);
        let omega = free.sample_for(&g, 1, 0);
        let fits = eigenfunction_decay(&free, &omega, &g, (-3.0, 3.0)).unwrap();
        let mut s: Vec<f64> = fits.iter().filter_map(|f| f.slope).collect();
        s.sort_by(f64::total_cmp);
        assert!(s[s.len() / 2].abs() < 0.2, "median {}", s[s.len() / 2]);
        let strong = delta_model(100.0);
        let omega = strong.sample_for(&g, 1, 0);
        let fits = eigenfunction_decay(&strong, &omega, &g, (-1e3, 1e3)).unwrap();
        let mut s: Vec<f64> = fits.iter().filter_map(|f| f.slope).collect();
        s.sort_by(f64::total_cmp);
        assert!(s[s.len() / 2] < -1.0, "median {}", s[s.len() / 2]);
        let one = interval(0, 0);
        let fit = eigenfunction_decay(&strong, &strong.sample_for(&one, 1, 0), &one, (-1e3, 1e3)).unwrap();
        assert!(fit[0].slope.is_none());
    }
}
