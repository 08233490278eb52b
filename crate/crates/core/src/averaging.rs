//! Spectral-averaging bounds checked as (integral, closed-form bound) pairs.
//!
//! One-dimensional integrals are done by singularity-aware quadrature, cut at
//! the real parts of the points where the integrand blows up; the
//! multi-variable determinant average is done by Monte Carlo.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::density::DisorderDensity;
use crate::error::{invalid, precondition, Result};
use crate::linalg::{det, eigenvalues, imag_part_min_eig, invert, op_norm, sigma_min, singular_values, CMatrix};
use crate::mc::{run_trials, summarize};
use crate::quadrature::integrate;
use crate::rng::stream;

const QUAD_TOL: f64 = 1e-9;

/// An integral next to the closed-form bound it should not exceed.
#[derive(Clone, Copy, Debug)]
pub struct AverageCheck {
    pub integral: f64,
    /// Quadrature error estimate, or 3σ for Monte Carlo.
    pub error: f64,
    pub bound: f64,
    pub margin: f64,
}

impl AverageCheck {
    fn new(integral: f64, error: f64, bound: f64) -> Self {
        Self { integral, error, bound, margin: bound - integral }
    }

    /// integral ≤ bound + error
    pub fn holds(&self) -> bool {
        self.integral <= self.bound + self.error
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return invalid(format!("exponent {s} outside (0, 1)"));
    }
    Ok(())
}

/// 2^s s^{−s}/(1−s)
pub fn graf_constant(s: f64) -> f64 {
    2f64.powf(s) * s.powf(-s) / (1.0 - s)
}

fn cuts(rho: &DisorderDensity, roots: &[Complex64]) -> Vec<f64> {
    let mut b = rho.breakpoints();
    b.extend(roots.iter().map(|r| r.re));
    b
}

/// ∫|ξ − β|^{−s} ρ(ξ) dξ against ‖ρ‖_∞^s ‖ρ‖₁^{1−s} 2^s s^{−s}/(1−s).
pub fn graf_check(rho: &DisorderDensity, s: f64, beta: Complex64) -> Result<AverageCheck> {
    check_s(s)?;
    let (lo, hi) = rho.support();
    let q = integrate(|x| (Complex64::new(x, 0.0) - beta).norm().powf(-s) * rho.pdf(x), lo, hi, &cuts(rho, &[beta]), s, QUAD_TOL);
    let bound = rho.norm_inf().powf(s) * rho.norm_l1().powf(1.0 - s) * graf_constant(s);
    Ok(AverageCheck::new(q.value, q.error.max(1e-12), bound))
}

/// Roots of r ↦ det(A + rV): eigenvalues of −V^{-1}A.
pub fn pencil_roots(a: &CMatrix, v: &CMatrix) -> Result<Vec<Complex64>> {
    let vinv = invert(v).map_err(|_| crate::Error::Invalid("V is singular".into()))?;
    eigenvalues(&(-(vinv * a)))
}

fn require_invertible(v: &CMatrix) -> Result<Complex64> {
    let d = det(v);
    let scale = op_norm(v).powi(v.nrows() as i32);
    if !(d.norm() > 1e-13 * scale.max(1e-300)) {
        return invalid("V is singular");
    }
    Ok(d)
}

/// ∫|det(A + rV)|^{−s/n} ρ(r) dr against |det V|^{−s/n} ‖ρ‖₁^{1−s}‖ρ‖_∞^s 2^s s^{−s}/(1−s).
pub fn det_average_check(a: &CMatrix, v: &CMatrix, rho: &DisorderDensity, s: f64) -> Result<AverageCheck> {
    check_s(s)?;
    let n = a.nrows();
    let dv = require_invertible(v)?;
    let roots = pencil_roots(a, v)?;
    let e = s / n as f64;
    let (lo, hi) = rho.support();
    let f = |r: f64| det(&(a + v * Complex64::new(r, 0.0))).norm().powf(-e) * rho.pdf(r);
    let q = integrate(f, lo, hi, &cuts(rho, &roots), s, QUAD_TOL);
    let bound = dv.norm().powf(-e) * rho.norm_l1().powf(1.0 - s) * rho.norm_inf().powf(s) * graf_constant(s);
    Ok(AverageCheck::new(q.value, q.error.max(1e-12), bound))
}

/// Monte Carlo estimate of ∫|det(A + Σ r_i V_i)|^{−t/n} Π ρ(r_i) dr_i against the
/// multi-variable bound with the α-ratio and (2R)^{Nt} factors.
pub fn detgen_check(
    a: &CMatrix,
    vs: &[CMatrix],
    alpha: &[f64],
    rho: &DisorderDensity,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<AverageCheck> {
    check_s(t)?;
    if vs.is_empty() || vs.len() != alpha.len() {
        return invalid("need one α per matrix V_k");
    }
    if alpha[0] == 0.0 {
        return invalid("α₀ must be non-zero");
    }
    let n = a.nrows() as f64;
    let big_n = (vs.len() - 1) as i32;
    let combo = vs.iter().zip(alpha).fold(CMatrix::zeros(a.nrows(), a.ncols()), |acc, (v, &al)| acc + v * Complex64::new(al, 0.0));
    let dc = require_invertible(&combo)?;
    let ratio = alpha[1..].iter().map(|x| x.abs() / alpha[0].abs()).fold(0.0, f64::max);
    let r = rho.support_radius();
    let bound = dc.norm().powf(-t / n)
        * alpha[0].abs().powf(t)
        * (1.0 + ratio).powf(big_n as f64 * t)
        * graf_constant(t)
        * (2.0 * r).powf(big_n as f64 * t)
        * rho.norm_inf().powf((big_n + 1) as f64 * t);
    let samples = run_trials(trials, |trial| {
        let mut rng = stream(seed, trial, 0xDE7);
        let mut m = a.clone();
        for v in vs {
            let x = rho.quantile(rng.random::<f64>());
            m += v * Complex64::new(x, 0.0);
        }
        Ok(det(&m).norm().powf(-t / n))
    })?;
    let est = summarize(&samples);
    Ok(AverageCheck::new(est.mean, 3.0 * est.stderr, bound))
}

/// (‖V^{-1}‖, ‖V‖^{n−1}/|det V|)
pub fn norm_inverse_check(v: &CMatrix) -> Result<(f64, f64)> {
    let sv = singular_values(v);
    let n = v.nrows() as i32;
    let (smin, smax) = (sv[0], sv[sv.len() - 1]);
    if !(smin > 0.0) {
        return invalid("V is singular");
    }
    let lhs = 1.0 / smin;
    // |det V| = Π σ_i, taken from the same SVD for consistency.
    let rhs = smax.powi(n - 1) / sv.iter().product::<f64>();
    Ok((lhs, rhs))
}

/// ∫_{−R}^{R} ‖(A + rV)^{-1}‖^{s/n} ρ(r) dr against the resolvent-norm bound.
pub fn resolvent_average_check(a: &CMatrix, v: &CMatrix, rho: &DisorderDensity, s: f64) -> Result<AverageCheck> {
    check_s(s)?;
    let n = a.nrows() as f64;
    let dv = require_invertible(v)?;
    let roots = pencil_roots(a, v)?;
    let r = rho.support_radius();
    let (lo, hi) = rho.support();
    let f = |x: f64| sigma_min(&(a + v * Complex64::new(x, 0.0))).powf(-s / n) * rho.pdf(x);
    let q = integrate(f, lo, hi, &cuts(rho, &roots), s, QUAD_TOL);
    let bound = rho.norm_l1().powf(1.0 - s) * rho.norm_inf().powf(s) * (op_norm(a) + r * op_norm(v)).powf(s * (n - 1.0) / n)
        / (s.powf(s) * 2f64.powf(-s) * (1.0 - s) * dv.norm().powf(s / n));
    Ok(AverageCheck::new(q.value, q.error.max(1e-12), bound))
}

/// Fitted weak-L¹ constant for the dissipative average.
#[derive(Clone, Copy, Debug)]
pub struct DissipativeFit {
    pub integral: f64,
    pub error: f64,
    /// ‖M₁V^{−1/2}‖·‖M₂V^{−1/2}‖
    pub weight: f64,
    /// smallest c with integral ≤ (n c weight ‖ρ‖_∞)^s/(1−s)
    pub constant: f64,
}

/// ∫‖M₁(A + rV)^{-1}M₂‖^s ρ(r) dr for dissipative A and positive diagonal V.
pub fn dissipative_average_check(
    a: &CMatrix,
    v_diag: &[f64],
    m1: &CMatrix,
    m2: &CMatrix,
    rho: &DisorderDensity,
    s: f64,
) -> Result<DissipativeFit> {
    check_s(s)?;
    let n = a.nrows();
    if v_diag.len() != n || v_diag.iter().any(|v| !(*v > 0.0)) {
        return invalid("V must be diagonal and strictly positive");
    }
    if imag_part_min_eig(a) < -1e-12 * (1.0 + op_norm(a)) {
        return precondition("A is not dissipative");
    }
    let v = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, v_diag.iter().map(|x| Complex64::new(*x, 0.0))));
    let v_half_inv = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, v_diag.iter().map(|x| Complex64::new(x.powf(-0.5), 0.0))));
    let weight = op_norm(&(m1 * &v_half_inv)) * op_norm(&(m2 * &v_half_inv));
    let roots = pencil_roots(a, &v)?;
    let (lo, hi) = rho.support();
    let f = |x: f64| match invert(&(a + &v * Complex64::new(x, 0.0))) {
        Ok(g) => op_norm(&(m1 * g * m2)).powf(s) * rho.pdf(x),
        Err(_) => 0.0,
    };
    let q = integrate(f, lo, hi, &cuts(rho, &roots), s, QUAD_TOL);
    let constant = if weight > 0.0 { (q.value * (1.0 - s)).powf(1.0 / s) / (n as f64 * weight * rho.norm_inf()) } else { 0.0 };
    Ok(DissipativeFit { integral: q.value, error: q.error, weight, constant })
}

/// ∫|⟨δ_x, (A + tW − z)^{-1} δ_y⟩|^s ρ(t) dt against 8·4^{−s}[W(x)W(y)]^{−s/2}‖ρ‖_∞^s 2^s s^{−s}/(1−s),
/// for Im A ≥ 0, W > 0 diagonal and Im z < 0.
pub fn nonmonotone_average_check(
    a: &CMatrix,
    w_diag: &[f64],
    z: Complex64,
    rho: &DisorderDensity,
    s: f64,
    x: usize,
    y: usize,
) -> Result<AverageCheck> {
    check_s(s)?;
    let n = a.nrows();
    if w_diag.len() != n || w_diag.iter().any(|w| !(*w > 0.0)) {
        return invalid("W must be a strictly positive multiplication operator");
    }
    if !(z.im < 0.0) {
        return invalid("z must lie in the lower half-plane");
    }
    if imag_part_min_eig(a) < -1e-12 * (1.0 + op_norm(a)) {
        return precondition("Im A must be non-negative");
    }
    if x >= n || y >= n {
        return invalid("site index out of range");
    }
    let w = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, w_diag.iter().map(|v| Complex64::new(*v, 0.0))));
    let shifted = a - CMatrix::identity(n, n) * z;
    let roots = pencil_roots(&shifted, &w)?;
    let (lo, hi) = rho.support();
    let f = |t: f64| match invert(&(&shifted + &w * Complex64::new(t, 0.0))) {
        Ok(g) => g[(x, y)].norm().powf(s) * rho.pdf(t),
        Err(_) => 0.0,
    };
    let q = integrate(f, lo, hi, &cuts(rho, &roots), s, QUAD_TOL);
    let bound = 8.0 * 4f64.powf(-s) * (w_diag[x] * w_diag[y]).powf(-s / 2.0) * rho.norm_inf().powf(s) * graf_constant(s);
    Ok(AverageCheck::new(q.value, q.error.max(1e-12), bound))
}

/// Random instance generators shared by the CLI and the acceptance suite.
pub mod instances {
    use super::*;

    pub fn cgauss(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
    }

    pub fn cmatrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| cgauss(rng))
    }

    /// A random Hermitian matrix.
    pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let m = cmatrix(rng, n);
        (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// A random positive semidefinite matrix B B*.
    pub fn psd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
        let b = cmatrix(rng, n);
        &b * b.adjoint() * Complex64::new(scale, 0.0)
    }

    pub fn density(rng: &mut ChaCha8Rng) -> DisorderDensity {
        let a = rng.random::<f64>() * 2.0 - 1.0;
        let w = 0.3 + 2.0 * rng.random::<f64>();
        match rng.random_range(0..3) {
            0 => DisorderDensity::uniform(a, a + w).expect("valid"),
            1 => DisorderDensity::raised_cosine(a, a + w).expect("valid"),
            _ => {
                let peak = a + w * (0.1 + 0.8 * rng.random::<f64>());
                DisorderDensity::piecewise_linear(vec![(a, 0.0), (peak, 1.0), (a + w, 0.3 * rng.random::<f64>())]).expect("valid")
            }
        }
    }

    /// A smooth density, as needed by the non-monotone average.
    pub fn smooth_density(rng: &mut ChaCha8Rng) -> DisorderDensity {
        let a = rng.random::<f64>() * 2.0 - 1.0;
        let w = 0.3 + 2.0 * rng.random::<f64>();
        if rng.random::<bool>() {
            DisorderDensity::raised_cosine(a, a + w).expect("valid")
        } else {
            let peak = a + w * (0.1 + 0.8 * rng.random::<f64>());
            DisorderDensity::piecewise_linear(vec![(a, 0.0), (peak, 1.0), (a + w, 0.0)]).expect("valid")
        }
    }

    pub fn exponent(rng: &mut ChaCha8Rng) -> f64 {
        0.1 + 0.8 * rng.random::<f64>()
    }

    /// Real diagonal matrix with entries bounded away from zero, as a complex matrix.
    pub fn real_diag(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
            let mag = 0.2 + rng.random::<f64>();
            Complex64::new(if rng.random::<bool>() { mag } else { -mag }, 0.0)
        }))
    }

    /// The inequalities exercised by [`random_check`].
    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub enum Inequality {
        Det,
        ResolventNorm,
        Graf,
        Detgen,
        NonMonotone,
    }

    impl Inequality {
        pub const ALL: [Inequality; 5] = [Self::Det, Self::ResolventNorm, Self::Graf, Self::Detgen, Self::NonMonotone];

        pub fn name(self) -> &'static str {
            match self {
                Self::Det => "det",
                Self::ResolventNorm => "resolvent-norm",
                Self::Graf => "graf",
                Self::Detgen => "detgen",
                Self::NonMonotone => "non-monotone",
            }
        }
    }

    /// One randomized instance of the chosen inequality (matrix size 1..=4).
    pub fn random_check(which: Inequality, rng: &mut ChaCha8Rng, mc_trials: usize, seed: u64) -> Result<AverageCheck> {
        let n = rng.random_range(1..=4usize);
        match which {
            Inequality::Det => det_average_check(&cmatrix(rng, n), &cmatrix(rng, n), &density(rng), exponent(rng)),
            Inequality::ResolventNorm => resolvent_average_check(&cmatrix(rng, n), &cmatrix(rng, n), &density(rng), exponent(rng)),
            Inequality::Graf => {
                let beta = Complex64::new(3.0 * rng.random::<f64>() - 1.5, if rng.random::<bool>() { 0.0 } else { rng.random::<f64>() });
                graf_check(&density(rng), exponent(rng), beta)
            }
            Inequality::Detgen => {
                let count = rng.random_range(1..=3usize);
                let vs: Vec<CMatrix> = (0..count).map(|_| cmatrix(rng, n)).collect();
                let alpha: Vec<f64> = (0..count).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
                let t = 0.05 + 0.4 * rng.random::<f64>();
                detgen_check(&cmatrix(rng, n), &vs, &alpha, &density(rng), t, mc_trials, seed)
            }
            Inequality::NonMonotone => {
                let a = hermitian(rng, n) + psd(rng, n, 0.2) * Complex64::new(0.0, 1.0);
                let w: Vec<f64> = (0..n).map(|_| 0.2 + 1.8 * rng.random::<f64>()).collect();
                let z = Complex64::new(4.0 * rng.random::<f64>() - 2.0, -(0.05 + rng.random::<f64>()));
                let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
                nonmonotone_average_check(&a, &w, z, &smooth_density(rng), exponent(rng), x, y)
            }
        }
    }
}
