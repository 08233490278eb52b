//! Model configuration, disorder sampling and finite-volume Hamiltonians.

use nalgebra::DMatrix;

use crate::density::DisorderDensity;
use crate::error::{invalid, precondition, Result};
use crate::lattice::BoxGeometry;
use crate::potential::{Configuration, SingleSitePotential};
use crate::rng::site_uniform;

/// H_ω = −Δ + λV_ω with V_ω(x) = Σ_k ω_k u(x − k).
#[derive(Clone, Debug)]
pub struct ModelConfig {
    pub dim: usize,
    pub lambda: f64,
    pub potential: SingleSitePotential,
    pub density: DisorderDensity,
}

impl ModelConfig {
    pub fn new(lambda: f64, potential: SingleSitePotential, density: DisorderDensity) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return invalid("coupling must be finite and non-negative");
        }
        Ok(Self { dim: potential.dim(), lambda, potential, density })
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    /// Draws ω on Λ₊(Γ) for trial `trial`.
    pub fn sample_for(&self, gamma: &BoxGeometry, seed: u64, trial: u64) -> Configuration {
        sample_configuration(&self.density, &self.potential.lambda_plus(gamma), seed, trial)
    }
}

/// Independent draws from ρ, one per site, each a pure function of (seed, trial, site).
pub fn sample_configuration(density: &DisorderDensity, sites: &BoxGeometry, seed: u64, trial: u64) -> Configuration {
    let mut c = Configuration::new(sites.sites().iter().map(|s| (s.clone(), density.quantile(site_uniform(seed, trial, s)))));
    c.provenance = Some((seed, trial));
    c
}

/// Dense real symmetric H_Γ indexed by a geometry.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    pub geometry: BoxGeometry,
    pub matrix: DMatrix<f64>,
}

impl HamiltonianMatrix {
    /// −Δ_Γ + diag(diagonal): off-diagonal −1 on ℓ¹-adjacent pairs inside Γ.
    pub fn from_diagonal(geometry: &BoxGeometry, diagonal: &[f64]) -> Self {
        let n = geometry.len();
        assert_eq!(diagonal.len(), n);
        let mut m = DMatrix::zeros(n, n);
        for (i, s) in geometry.sites().iter().enumerate() {
            m[(i, i)] = diagonal[i];
            for nb in s.neighbors() {
                if let Some(j) = geometry.index_of(&nb) {
                    m[(i, j)] = -1.0;
                }
            }
        }
        Self { geometry: geometry.clone(), matrix: m }
    }

    pub fn len(&self) -> usize {
        self.geometry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geometry.is_empty()
    }

    /// Restriction P_Λ H_Γ P_Λ* to a subset (equals H_Λ for the alloy model).
    pub fn restrict(&self, sub: &BoxGeometry) -> Result<Self> {
        let idx = indices(&self.geometry, sub)?;
        let m = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])]);
        Ok(Self { geometry: sub.clone(), matrix: m })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.matrix[(i, i)]).collect()
    }
}

/// Positions of `sub`'s sites inside `geometry`.
pub fn indices(geometry: &BoxGeometry, sub: &BoxGeometry) -> Result<Vec<usize>> {
    sub.sites().iter().map(|s| geometry.index_of(s).ok_or_else(|| crate::Error::Precondition(format!("{s:?} not in the box")))).collect()
}

/// The potential λV_ω on Γ.
pub fn potential_on(model: &ModelConfig, omega: &Configuration, gamma: &BoxGeometry) -> Result<Vec<f64>> {
    gamma.sites().iter().map(|x| Ok(model.lambda * model.potential.potential_value(omega, x)?)).collect()
}

/// H_Γ = P_Γ H_ω P_Γ*.
pub fn assemble_hamiltonian(model: &ModelConfig, omega: &Configuration, gamma: &BoxGeometry) -> Result<HamiltonianMatrix> {
    if gamma.dim() != model.dim {
        return precondition("box dimension differs from model dimension");
    }
    Ok(HamiltonianMatrix::from_diagonal(gamma, &potential_on(model, omega, gamma)?))
}

/// Free path spectrum −2cos(πk/(n+1)), k = 1..n, ascending.
pub fn free_path_spectrum(n: usize) -> Vec<f64> {
    (1..=n).map(|k| -2.0 * (std::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos()).collect()
}

/// Convenience: sites of a 1-d model needed for Γ.
pub fn needs(model: &ModelConfig, gamma: &BoxGeometry) -> BoxGeometry {
    model.potential.lambda_plus(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, interval, Site};

    fn uniform_model(lambda: f64, u: SingleSitePotential) -> ModelConfig {
        ModelConfig::new(lambda, u, DisorderDensity::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn two_site_free_matrix() {
        let m = uniform_model(0.0, SingleSitePotential::delta(1));
        let g = interval(0, 1);
        let h = assemble_hamiltonian(&m, &Configuration::constant(&needs(&m, &g), 0.3), &g).unwrap();
        assert_eq!(h.matrix, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));
    }

    #[test]
    fn one_site_value_and_missing() {
        let m = uniform_model(2.0, SingleSitePotential::delta(1));
        let g = interval(0, 0);
        let h = assemble_hamiltonian(&m, &Configuration::new([(Site::d1(0), 1.5)]), &g).unwrap();
        assert_eq!(h.matrix[(0, 0)], 3.0);
        assert!(assemble_hamiltonian(&m, &Configuration::default(), &g).is_err());
    }

    #[test]
    fn five_by_five_tridiagonal() {
        let m = uniform_model(1.7, SingleSitePotential::delta(1));
        let g = interval(-2, 2);
        let w = m.sample_for(&g, 3, 0);
        let h = assemble_hamiltonian(&m, &w, &g).unwrap();
        for i in 0..5 {
            let x = g.site(i);
            assert_eq!(h.matrix[(i, i)], 1.7 * w.get(x).unwrap());
            for j in 0..5 {
                let expect = if (i as i64 - j as i64).abs() == 1 {
                    -1.0
                } else if i == j {
                    h.matrix[(i, i)]
                } else {
                    0.0
                };
                assert_eq!(h.matrix[(i, j)], expect);
            }
        }
    }

    #[test]
    fn bond_count_matches_minus_ones() {
        let g = build_box(3, &Site::origin(2)).unwrap();
        let h = HamiltonianMatrix::from_diagonal(&g, &vec![0.5; g.len()]);
        let minus = h.matrix.iter().filter(|v| **v == -1.0).count();
        assert_eq!(minus, 2 * g.bond_count());
        assert_eq!(h.matrix, h.matrix.transpose());
    }

    #[test]
    fn sampling_is_deterministic_and_uniform() {
        let rho = DisorderDensity::uniform(0.0, 1.0).unwrap();
        let g = interval(0, 99_999);
        let a = sample_configuration(&rho, &g, 11, 0);
        let b = sample_configuration(&rho, &interval(50_000, 50_001), 11, 0);
        assert_eq!(a.get(&Site::d1(50_000)).unwrap().to_bits(), b.get(&Site::d1(50_000)).unwrap().to_bits());
        let mean: f64 = g.sites().iter().map(|s| a.get(s).unwrap()).sum::<f64>() / g.len() as f64;
        assert!((mean - 0.5).abs() < 0.01);
    }
}
