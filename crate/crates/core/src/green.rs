//! Green functions, depleted operators, Schur complements and the annulus
//! geometry used by the finite-volume criterion.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, precondition, Error, Result};
use crate::lattice::{build_box, BoxGeometry, Site};
pub use crate::linalg::CMatrix;
use crate::linalg::{block, complexify, invert, max_abs_diff, shifted};
use crate::model::{indices, HamiltonianMatrix};

/// (H_Γ − z)^{-1} together with its geometry and energy.
#[derive(Clone, Debug)]
pub struct GreenMatrix {
    pub geometry: BoxGeometry,
    pub z: Complex64,
    pub entries: CMatrix,
}

impl GreenMatrix {
    /// G_Γ(z; x, y), with the convention that it vanishes off Γ.
    pub fn get(&self, x: &Site, y: &Site) -> Complex64 {
        match (self.geometry.index_of(x), self.geometry.index_of(y)) {
            (Some(i), Some(j)) => self.entries[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// max-abs entry of (H − z)G − 1.
    pub fn residual(&self, h: &HamiltonianMatrix) -> f64 {
        let prod = shifted(&h.matrix, self.z) * &self.entries;
        max_abs_diff(&prod, &CMatrix::identity(prod.nrows(), prod.ncols()))
    }

    /// Operator 2-norm of G.
    pub fn norm(&self) -> f64 {
        self.entries.clone().svd(false, false).singular_values.max()
    }
}

/// G_Γ(z) = (H_Γ − z)^{-1} by dense LU.
pub fn green(h: &HamiltonianMatrix, z: Complex64) -> Result<GreenMatrix> {
    let entries = invert(&shifted(&h.matrix, z)).map_err(|_| Error::Singular(format!("H − z singular at z = {z}")))?;
    Ok(GreenMatrix { geometry: h.geometry.clone(), z, entries })
}

/// One column G_Γ(z; ·, y) by a single LU solve.
pub fn green_column(h: &HamiltonianMatrix, z: Complex64, y: &Site) -> Result<DVector<Complex64>> {
    let j = h.geometry.index_of(y).ok_or_else(|| Error::Precondition(format!("{y:?} not in box")))?;
    let mut rhs = DVector::zeros(h.len());
    rhs[j] = Complex64::new(1.0, 0.0);
    let sol = shifted(&h.matrix, z).lu().solve(&rhs).ok_or_else(|| Error::Singular(format!("H − z singular at z = {z}")))?;
    if sol.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(sol)
    } else {
        Err(Error::Singular("non-finite solution".into()))
    }
}

/// H_Γ^Λ (bonds crossing ∂Λ removed) and T_Γ^Λ = Δ_Γ − Δ_Γ^Λ, so that H_Γ = H_Γ^Λ − T_Γ^Λ.
#[derive(Clone, Debug)]
pub struct DepletedOperators {
    pub gamma: BoxGeometry,
    pub lambda: BoxGeometry,
    pub depleted: DMatrix<f64>,
    pub coupling: DMatrix<f64>,
}

pub fn depleted(h: &HamiltonianMatrix, lambda: &BoxGeometry) -> Result<DepletedOperators> {
    if !lambda.is_subset_of(&h.geometry) {
        return invalid("Λ must be a subset of Γ");
    }
    let n = h.len();
    let mut dep = h.matrix.clone();
    let mut t = DMatrix::zeros(n, n);
    let inside: Vec<bool> = h.geometry.sites().iter().map(|s| lambda.contains(s)).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && h.matrix[(i, j)] != 0.0 && inside[i] != inside[j] {
                dep[(i, j)] = 0.0;
                t[(i, j)] = -h.matrix[(i, j)];
            }
        }
    }
    Ok(DepletedOperators { gamma: h.geometry.clone(), lambda: lambda.clone(), depleted: dep, coupling: t })
}

/// B_Γ^Λ = P_Λ Δ (H_{Γ∖Λ} − z)^{-1} Δ P_Λ*, as a matrix on Λ.
pub fn schur_b(h: &HamiltonianMatrix, lambda: &BoxGeometry, z: Complex64) -> Result<CMatrix> {
    if !lambda.is_subset_of(&h.geometry) {
        return invalid("Λ must be a subset of Γ");
    }
    let li = indices(&h.geometry, lambda)?;
    let ext = h.geometry.minus(lambda);
    if ext.is_empty() {
        return Ok(CMatrix::zeros(li.len(), li.len()));
    }
    let ei = indices(&h.geometry, &ext)?;
    let hm = complexify(&h.matrix);
    let g_ext = invert(&shifted(&block(&h.matrix, &ei, &ei), z))?;
    Ok(block(&hm, &li, &ei) * g_ext * block(&hm, &ei, &li))
}

/// max |P_Λ G_Γ P_Λ* − (H_Λ − B_Γ^Λ − z)^{-1}| over Λ × Λ.
pub fn verify_schur_identity(h: &HamiltonianMatrix, lambda: &BoxGeometry, z: Complex64) -> Result<f64> {
    let g = green(h, z)?;
    let li = indices(&h.geometry, lambda)?;
    let lhs = block(&g.entries, &li, &li);
    let h_l = block(&h.matrix, &li, &li);
    let rhs = invert(&(shifted(&h_l, z) - schur_b(h, lambda, z)?))?;
    Ok(max_abs_diff(&lhs, &rhs))
}

/// Nested complement for Λ₁ ⊆ Λ₂ ⊆ Γ with ∂ⁱΛ₂ ∩ Λ₁ = ∅:
/// P_{Λ₁} G_Γ P_{Λ₁}* = [H_{Λ₁} − z − Δ (H_{Λ₂∖Λ₁} − z − B_Γ^{Λ₂}|)^{-1} Δ]^{-1}.
pub fn verify_two_step_schur(h: &HamiltonianMatrix, lambda1: &BoxGeometry, lambda2: &BoxGeometry, z: Complex64) -> Result<f64> {
    if !lambda1.is_subset_of(lambda2) || !lambda2.is_subset_of(&h.geometry) {
        return precondition("need Λ₁ ⊆ Λ₂ ⊆ Γ");
    }
    if !lambda2.is_empty() && !lambda2.interior_boundary()?.intersect(lambda1).is_empty() {
        return precondition("interior boundary of Λ₂ meets Λ₁");
    }
    let g = green(h, z)?;
    let i1 = indices(&h.geometry, lambda1)?;
    let lhs = block(&g.entries, &i1, &i1);

    let b2 = schur_b(h, lambda2, z)?;
    let ring = lambda2.minus(lambda1);
    let r_in_2 = indices(lambda2, &ring)?;
    let ri = indices(&h.geometry, &ring)?;
    let hm = complexify(&h.matrix);
    let inner = shifted(&block(&h.matrix, &ri, &ri), z) - block(&b2, &r_in_2, &r_in_2);
    let coupling = block(&hm, &i1, &ri) * invert(&inner)? * block(&hm, &ri, &i1);
    let rhs = invert(&(shifted(&block(&h.matrix, &i1, &i1), z) - coupling))?;
    Ok(max_abs_diff(&lhs, &rhs))
}

/// Residuals of G = G^Λ + G^Λ T G (first order, checked in both orders) and
/// G = G^Λ + G^Λ T G^Λ + G^Λ T G T G^Λ (second order).
pub fn verify_resolvent_identities(h: &HamiltonianMatrix, lambda: &BoxGeometry, z: Complex64) -> Result<(f64, f64)> {
    let dep = depleted(h, lambda)?;
    let g = green(h, z)?.entries;
    let gl = invert(&shifted(&dep.depleted, z))?;
    let t = complexify(&dep.coupling);
    let first_a = &gl + &gl * &t * &g;
    let first_b = &gl + &g * &t * &gl;
    let first = max_abs_diff(&g, &first_a).max(max_abs_diff(&g, &first_b));
    let second = &gl + &gl * &t * &gl + &gl * &t * &g * &t * &gl;
    Ok((first, max_abs_diff(&g, &second)))
}

/// Sets B_x, Ŵ_x, W_x, Λ̂_x, Λ_x of the finite-volume criterion.
#[derive(Clone, Debug)]
pub struct AnnulusGeometry {
    pub center: Site,
    pub radius: i64,
    pub b: BoxGeometry,
    pub hat_w: BoxGeometry,
    pub w: BoxGeometry,
    pub hat_lambda: BoxGeometry,
    pub lambda: BoxGeometry,
}

fn translates_in(gamma: &BoxGeometry, base: &BoxGeometry, theta: &[Site]) -> BoxGeometry {
    let pts = base.sites().iter().flat_map(|b| theta.iter().map(move |t| t + b)).filter(|k| gamma.contains(k));
    BoxGeometry::from_sites(gamma.dim(), pts).expect("same dimension")
}

/// Builds the annulus around x for box radius L; requires L ≥ diam_∞ Θ + 2.
pub fn annulus(gamma: &BoxGeometry, x: &Site, radius: i64, theta: &[Site]) -> Result<AnnulusGeometry> {
    let diam = theta.iter().flat_map(|a| theta.iter().map(move |b| a.dist_inf(b))).max().unwrap_or(0);
    if radius < diam + 2 {
        return invalid(format!("L = {radius} is below diam Θ + 2 = {}", diam + 2));
    }
    let cube = build_box(radius, x)?;
    let b = cube.interior_boundary()?;
    let hat_w = translates_in(gamma, &b, theta);
    let hat_lambda = translates_in(gamma, &cube, theta);
    let w = if hat_w.is_empty() { hat_w.clone() } else { hat_w.thicken().intersect(gamma) };
    let lambda = if hat_lambda.is_empty() { hat_lambda.clone() } else { hat_lambda.thicken().intersect(gamma) };
    Ok(AnnulusGeometry { center: x.clone(), radius, b, hat_w, w, hat_lambda, lambda })
}

/// Residuals of all exact identities on one operator.
#[derive(Clone, Copy, Debug)]
pub struct IdentityResiduals {
    pub schur: f64,
    pub two_step: f64,
    pub first_order: f64,
    pub second_order: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.schur.max(self.two_step).max(self.first_order).max(self.second_order)
    }
}

/// Checks every identity for Λ₂ and Λ₁ = Λ₂ ∖ ∂ⁱΛ₂.
pub fn identity_residuals(h: &HamiltonianMatrix, lambda2: &BoxGeometry, z: Complex64) -> Result<IdentityResiduals> {
    let lambda1 = lambda2.minus(&lambda2.interior_boundary()?);
    let (first_order, second_order) = verify_resolvent_identities(h, lambda2, z)?;
    Ok(IdentityResiduals {
        schur: verify_schur_identity(h, lambda2, z)?,
        two_step: verify_two_step_schur(h, &lambda1, lambda2, z)?,
        first_order,
        second_order,
    })
}

/// Random operators for the identity checks.
pub mod instances {
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// A random operator with a sub-box Λ and an energy.
    #[derive(Clone, Debug)]
    pub struct IdentityInstance {
        pub h: HamiltonianMatrix,
        pub lambda: BoxGeometry,
        pub z: Complex64,
    }

    /// d ∈ {1, 2}, |Γ| ≤ 200, diagonal in [−3, 3], Im z ∈ [0.1, 2], Λ a clipped cube of radius ≥ 2.
    pub fn identity_instance(rng: &mut ChaCha8Rng) -> IdentityInstance {
        let d = rng.random_range(1..=2usize);
        let gamma = if d == 1 {
            let n = rng.random_range(8..=200i64);
            crate::lattice::interval(0, n - 1)
        } else {
            build_box(rng.random_range(3..=6i64), &Site::origin(2)).expect("valid radius")
        };
        let diag: Vec<f64> = (0..gamma.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let h = HamiltonianMatrix::from_diagonal(&gamma, &diag);
        let center = gamma.site(rng.random_range(0..gamma.len())).clone();
        let lambda = build_box(rng.random_range(2..=4i64), &center).expect("valid radius").intersect(&gamma);
        let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(0.1..=2.0));
        IdentityInstance { h, lambda, z }
    }
}
