//! Explicit one-dimensional decay constants: the connected-support constants
//! and disorder threshold, the gap construction for supports with holes, and
//! the polynomial-root test for extracting a non-negative building block.

use nalgebra::DMatrix;
use rand::Rng;

use crate::averaging::graf_constant;
use crate::density::DisorderDensity;
use crate::error::{invalid, Error, Result};
use crate::potential::SingleSitePotential;
use crate::rng::aux;

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return invalid(format!("exponent {s} outside (0, 1)"));
    }
    Ok(())
}

/// Values u(0), …, u(n−1) of a 1-d potential shifted so that min Θ = 0.
pub fn profile(u: &SingleSitePotential) -> Result<Vec<f64>> {
    if u.dim() != 1 {
        return invalid("one-dimensional potential required");
    }
    if u.tail().is_some() {
        return invalid("finitely supported potential required");
    }
    let sup = u.support();
    let lo = sup.first().expect("support is non-empty").0 .0[0];
    let hi = sup.last().expect("support is non-empty").0 .0[0];
    let mut v = vec![0.0; (hi - lo + 1) as usize];
    for (k, x) in sup {
        v[(k.0[0] - lo) as usize] = *x;
    }
    Ok(v)
}

/// Constants of the connected-support decay bound.
#[derive(Clone, Copy, Debug)]
pub struct OneDConstants {
    /// |Θ|, the number of sites in the (connected) support
    pub n: usize,
    pub s: f64,
    pub lambda: f64,
    pub c_u: f64,
    pub c_rho: f64,
    /// C_u C_ρ / λ^s
    pub c: f64,
    pub c_u_plus: f64,
    pub c_rho_plus: f64,
    pub c_plus: f64,
    /// −ln C
    pub mu: f64,
    /// couplings above this value give C < 1
    pub disorder_threshold: f64,
}

impl OneDConstants {
    /// C⁺ exp(−μ⌊dist/n⌋), valid for dist ≥ 2n.
    pub fn bound(&self, dist: usize) -> f64 {
        self.c_plus * (-self.mu * (dist / self.n) as f64).exp()
    }

    /// Exponent of the fractional moment the bound controls.
    pub fn moment_exponent(&self) -> f64 {
        self.s / self.n as f64
    }
}

pub fn one_d_constants(u: &SingleSitePotential, rho: &DisorderDensity, lambda: f64, s: f64) -> Result<OneDConstants> {
    check_s(s)?;
    if !(lambda > 0.0) {
        return invalid("coupling must be positive");
    }
    let p = profile(u)?;
    if p.contains(&0.0) {
        return invalid("support is not connected; use the gap constants");
    }
    let n = p.len();
    let nf = n as f64;
    let prod: f64 = p.iter().product();
    let c_u = prod.abs().powf(-s / nf);
    let g = graf_constant(s);
    let c_rho = rho.norm_inf().powf(s) * g;
    let c = c_u * c_rho * lambda.powf(-s);
    let mut partial = 1.0;
    let mut c_u_plus: f64 = 0.0;
    for v in &p {
        partial *= v;
        c_u_plus = c_u_plus.max(partial.abs().powf(-s / nf));
    }
    let c_rho_plus = rho.norm_inf().powf(s).max(rho.norm_inf().powf(s / nf)) * g;
    let c_plus = c_u_plus * c_rho_plus * lambda.powf(-s).max(lambda.powf(-s / nf));
    // ‖ρ‖∞/λ < (1−s)^{1/s} s/2 · |Πu|^{1/n}
    let disorder_threshold = rho.norm_inf() * (2.0 / s) * (1.0 - s).powf(-1.0 / s) / prod.abs().powf(1.0 / nf);
    Ok(OneDConstants { n, s, lambda, c_u, c_rho, c, c_u_plus, c_rho_plus, c_plus, mu: -c.ln(), disorder_threshold })
}

/// Largest run of consecutive integers strictly inside [0, n−1] missing from Θ.
pub fn largest_gap(profile: &[f64]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for v in profile {
        if *v == 0.0 {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Constants of the decay bound for supports with gaps.
#[derive(Clone, Debug)]
pub struct GapConstants {
    /// span of Θ: min Θ = 0, max Θ = n − 1
    pub n: usize,
    /// largest gap in Θ
    pub r: usize,
    /// weight vector in [0,1]^{r+1} far from every degeneracy hyperplane
    pub alpha: Vec<f64>,
    /// its minimum Euclidean distance to those hyperplanes
    pub min_distance: f64,
    /// acceptance level d₀/2 = (2(n+r)(r+1)^{r/2})⁻¹
    pub accept_distance: f64,
    /// D evaluated at `alpha`
    pub d: f64,
    /// worst-case closed form of D over all admissible weight vectors
    pub d_closed: f64,
    /// max over l of D⁺(l) evaluated at `alpha`
    pub d_plus: f64,
    /// −ln D
    pub m: f64,
}

impl GapConstants {
    /// D⁺ exp(−m⌊dist/(n+r)⌋), valid for dist ≥ 2(n+r).
    pub fn bound(&self, dist: usize) -> f64 {
        self.d_plus * (-self.m * (dist / (self.n + self.r)) as f64).exp()
    }

    pub fn moment_exponent(&self, s: f64) -> f64 {
        s / (self.n + self.r) as f64
    }
}

/// Rows (u(i−k))_{k=0..r} for i = 0..n−1+r.
fn hyperplane_normals(p: &[f64], r: usize) -> Vec<Vec<f64>> {
    let n = p.len();
    let at = |j: i64| if j >= 0 && (j as usize) < n { p[j as usize] } else { 0.0 };
    (0..n + r).map(|i| (0..=r).map(|k| at(i as i64 - k as i64)).collect()).collect()
}

fn min_hyperplane_distance(normals: &[Vec<f64>], alpha: &[f64]) -> f64 {
    normals
        .iter()
        .map(|w| {
            let dot: f64 = w.iter().zip(alpha).map(|(a, b)| a * b).sum();
            dot.abs() / w.iter().map(|x| x * x).sum::<f64>().sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// D_α (full window) or D⁺_α(l) for the window {0..l}.
#[allow(clippy::too_many_arguments)]
fn d_alpha(p: &[f64], r: usize, alpha: &[f64], rho: &DisorderDensity, lambda: f64, s: f64, l: usize, full: bool) -> f64 {
    let nr = (p.len() + r) as f64;
    // exponent t = s(l+1)/(n+r) of the detgen lemma; equals s for the full window
    let t = if full { s } else { s * (l + 1) as f64 / nr };
    let ratio = alpha[1..].iter().map(|a| a.abs() / alpha[0].abs()).fold(0.0, f64::max);
    let normals = hyperplane_normals(p, r);
    let prod: f64 = normals[..=l]
        .iter()
        .map(|w| {
            let v: f64 = w.iter().zip(alpha).map(|(a, b)| a * b).sum();
            (v * lambda).abs().powf(-s / nr)
        })
        .product();
    let rr = r as f64;
    rho.norm_inf().powf((rr + 1.0) * t)
        * (2.0 * rho.support_radius()).powf(rr * t)
        * graf_constant(s)
        * alpha[0].abs().powf(t)
        * (1.0 + ratio).powf(rr * s)
        * prod
}

/// Gap construction: r, a well-separated weight vector found by seeded random
/// search, and the resulting bounds D, D⁺.
pub fn gap_constants(u: &SingleSitePotential, rho: &DisorderDensity, lambda: f64, s: f64, seed: u64) -> Result<GapConstants> {
    check_s(s)?;
    if !(lambda > 0.0) {
        return invalid("coupling must be positive");
    }
    let p = profile(u)?;
    let n = p.len();
    let r = largest_gap(&p);
    let nr = n + r;
    let normals = hyperplane_normals(&p, r);
    if normals.iter().any(|w| w.iter().all(|x| *x == 0.0)) {
        return invalid("degenerate hyperplane; gap size inconsistent with support");
    }
    let d0 = 1.0 / (nr as f64 * ((r + 1) as f64).powf(r as f64 / 2.0));
    let mut rng = aux(seed, 0x6A9);
    let mut best = vec![1.0; r + 1];
    let mut best_dist = min_hyperplane_distance(&normals, &best);
    for _ in 0..10_000 {
        let cand: Vec<f64> = (0..=r).map(|_| rng.random::<f64>()).collect();
        let dist = min_hyperplane_distance(&normals, &cand);
        if dist > best_dist {
            best = cand;
            best_dist = dist;
        }
    }
    if best_dist < d0 / 2.0 {
        return Err(Error::SearchFailed(format!("best separation {best_dist:.3e} below {:.3e}", d0 / 2.0)));
    }
    let d = d_alpha(&p, r, &best, rho, lambda, s, nr - 1, true);
    let d_plus = (0..nr).map(|l| d_alpha(&p, r, &best, rho, lambda, s, l, false)).fold(0.0, f64::max);
    let inv = 2.0 * nr as f64 * ((r + 1) as f64).powf(r as f64 / 2.0);
    let sq: f64 = normals.iter().map(|w| w.iter().map(|x| x * x).sum::<f64>()).product();
    let rr = r as f64;
    let d_closed = rho.norm_inf().powf((rr + 1.0) * s)
        * (2.0 * rho.support_radius()).powf(rr * s)
        * graf_constant(s)
        * (1.0 + inv).powf(rr * s)
        * inv.powf(s)
        / (sq.powf(s / (2.0 * nr as f64)) * lambda.powf(s));
    Ok(GapConstants { n, r, alpha: best, min_distance: best_dist, accept_distance: d0 / 2.0, d, d_closed, d_plus, m: -d.ln() })
}

/// Outcome of the root test for p_u(x) = Σ u(k) x^k on [0, ∞).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootVerdict {
    /// certified by an explicit positive combination
    NoRoot,
    /// certified by a sign change around this point
    Root(f64),
    /// a near-real root without sign change, or one touching 0, at this point
    Ambiguous(f64),
}

/// A non-negative building block w = u ∗ α.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub alpha: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RootCriterion {
    pub verdict: RootVerdict,
    pub roots: Vec<num_complex::Complex64>,
    pub extraction: Option<Extraction>,
}

impl RootCriterion {
    pub fn no_root(&self) -> bool {
        self.verdict == RootVerdict::NoRoot
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of a polynomial from its coefficients (ascending), via companion-matrix eigenvalues.
pub fn poly_roots(c: &[f64]) -> Vec<num_complex::Complex64> {
    let deg = c.iter().rposition(|v| *v != 0.0).unwrap_or(0);
    if deg == 0 {
        return vec![];
    }
    let lead = c[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    comp.complex_eigenvalues().iter().copied().collect()
}

const MAX_MULTIPLIER_DEGREE: usize = 4000;

/// Tests p_u for roots on [0, ∞); when there are none, also extracts a positive
/// combination w = u ∗ α with all coefficients strictly positive, α ∝ binomial((1+x)/2)^N.
pub fn polynomial_root_criterion(u: &SingleSitePotential) -> Result<RootCriterion> {
    let p = profile(u)?;
    let roots = poly_roots(&p);
    let mut extraction = None;
    let sign = if p[0] < 0.0 { -1.0 } else { 1.0 };
    let lead_ok = p.last().is_some_and(|v| v * sign > 0.0);
    if lead_ok {
        // Pólya: ((1+x)/2)^N p has strictly positive coefficients for large N
        // iff p > 0 on [0, ∞) (given positive end coefficients).
        let mut mult = vec![1.0];
        for _ in 0..=MAX_MULTIPLIER_DEGREE {
            let w: Vec<f64> = convolve(&p, &mult).iter().map(|v| v * sign).collect();
            let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if w.iter().all(|v| *v > 1e-13 * scale) {
                extraction = Some(Extraction { alpha: mult.iter().map(|a| a * sign).collect(), w });
                break;
            }
            mult = convolve(&mult, &[0.5, 0.5]);
        }
    }
    if extraction.is_some() {
        return Ok(RootCriterion { verdict: RootVerdict::NoRoot, roots, extraction });
    }
    let mut verdict = None;
    let mut ambiguous = None;
    for z in &roots {
        let x = z.re;
        if z.im.abs() > 1e-6 * (1.0 + z.norm()) || x < -1e-9 {
            continue;
        }
        if x.abs() <= 1e-9 {
            ambiguous.get_or_insert(x);
            continue;
        }
        let h = 1e-7 * (1.0 + x.abs());
        if horner(&p, x - h).signum() * horner(&p, x + h).signum() < 0.0 {
            verdict.get_or_insert(x);
        } else {
            ambiguous.get_or_insert(x);
        }
    }
    let verdict = match (verdict, ambiguous) {
        (Some(x), _) => RootVerdict::Root(x),
        (None, Some(x)) => RootVerdict::Ambiguous(x),
        // no real root found yet extraction failed within the degree cap
        (None, None) => RootVerdict::Ambiguous(f64::NAN),
    };
    Ok(RootCriterion { verdict, roots, extraction: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unif() -> DisorderDensity {
        DisorderDensity::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn delta_constants() {
        let k = one_d_constants(&SingleSitePotential::delta(1), &unif(), 64.0, 0.5).unwrap();
        assert!((k.c_u - 1.0).abs() < 1e-14);
        assert!((k.c_rho - 4.0).abs() < 1e-12);
        assert!((k.c - 0.5).abs() < 1e-12);
        assert!((k.mu - 2f64.ln()).abs() < 1e-12);
        assert!((k.disorder_threshold - 16.0).abs() < 1e-12);
        let big = one_d_constants(&SingleSitePotential::delta(1), &unif(), 1e12, 0.5).unwrap();
        assert!(big.c < 1e-5 && big.mu > 10.0);
    }

    #[test]
    fn sign_changing_pair() {
        let u = SingleSitePotential::from_1d(&[1.0, -0.5]).unwrap();
        let k = one_d_constants(&u, &unif(), 50.0, 0.5).unwrap();
        assert_eq!(k.n, 2);
        // ‖ρ‖∞·(2/s)(1−s)^{−1/s}/|Πu|^{1/n} = 1·4·4/√0.5
        assert!((k.disorder_threshold - 4.0 * 4.0 / 0.5f64.sqrt()).abs() < 1e-12);
        assert!((k.c - 0.5f64.powf(-0.25) * 4.0 / 50f64.sqrt()).abs() < 1e-12);
        assert!((k.c_plus - 0.5f64.powf(-0.25) * 4.0 * 50f64.powf(-0.25)).abs() < 1e-12);
        assert!(k.mu > 0.0);
        assert!(one_d_constants(&SingleSitePotential::from_1d(&[1.0, 0.0, 1.0]).unwrap(), &unif(), 50.0, 0.5).is_err());
    }

    #[test]
    fn threshold_consistency() {
        let u = SingleSitePotential::from_1d(&[2.0, -0.7, 1.3]).unwrap();
        let rho = DisorderDensity::raised_cosine(-0.5, 0.5).unwrap();
        for s in [0.2, 0.5, 0.8] {
            let t = one_d_constants(&u, &rho, 1.0, s).unwrap().disorder_threshold;
            assert!(one_d_constants(&u, &rho, t * 1.001, s).unwrap().c < 1.0);
            assert!(one_d_constants(&u, &rho, t * 0.999, s).unwrap().c > 1.0);
        }
    }

    #[test]
    fn gap_sizes() {
        assert_eq!(largest_gap(&[1.0, 2.0, 3.0]), 0);
        assert_eq!(largest_gap(&[1.0, 0.0, -1.0]), 1);
        assert_eq!(largest_gap(&[1.0, 0.0, 0.0, 1.0]), 2);
        assert_eq!(largest_gap(&[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]), 2);
    }

    #[test]
    fn gap_constants_connected_reduce() {
        let u = SingleSitePotential::from_1d(&[1.0, -0.5, 0.8]).unwrap();
        let g = gap_constants(&u, &unif(), 40.0, 0.5, 1).unwrap();
        let k = one_d_constants(&u, &unif(), 40.0, 0.5).unwrap();
        assert_eq!(g.r, 0);
        assert!((g.d - k.c).abs() < 1e-12 * k.c);
    }

    #[test]
    fn gap_constants_with_hole() {
        let u = SingleSitePotential::from_1d(&[1.0, 0.0, -1.0]).unwrap();
        let g = gap_constants(&u, &unif(), 100.0, 0.5, 1).unwrap();
        assert_eq!((g.n, g.r), (3, 1));
        let d0_half = 1.0 / (2.0 * 4.0 * 2f64.sqrt());
        assert!((g.accept_distance - d0_half).abs() < 1e-15);
        assert!(g.alpha[0] >= d0_half && g.min_distance >= d0_half);
        assert!(g.d.is_finite() && g.d_plus.is_finite());
        // the closed form bounds D over every admissible α, hence also at α′
        assert!(g.d <= g.d_closed);
        let g3 = gap_constants(&SingleSitePotential::from_1d(&[1.0, 0.0, 0.0, 2.0]).unwrap(), &unif(), 10.0, 0.5, 1).unwrap();
        assert_eq!(g3.r, 2);
    }

    #[test]
    fn root_examples() {
        let one = polynomial_root_criterion(&SingleSitePotential::from_1d(&[1.0]).unwrap()).unwrap();
        assert!(one.no_root());
        assert_eq!(one.extraction.unwrap().alpha, vec![1.0]);
        let r1 = polynomial_root_criterion(&SingleSitePotential::from_1d(&[1.0, -1.0]).unwrap()).unwrap();
        assert!(matches!(r1.verdict, RootVerdict::Root(x) if (x - 1.0).abs() < 1e-9));
        let r2 = polynomial_root_criterion(&SingleSitePotential::from_1d(&[2.0, -1.0]).unwrap()).unwrap();
        assert!(matches!(r2.verdict, RootVerdict::Root(x) if (x - 2.0).abs() < 1e-9));
        assert!(polynomial_root_criterion(&SingleSitePotential::from_1d(&[1.0, 1.0]).unwrap()).unwrap().no_root());
        // double root at 1: touches zero without crossing
        let dbl = polynomial_root_criterion(&SingleSitePotential::from_1d(&[1.0, -2.0, 1.0]).unwrap()).unwrap();
        assert!(matches!(dbl.verdict, RootVerdict::Ambiguous(_)));
    }

    #[test]
    fn extraction_is_positive_combination() {
        // 1 − x + x² has complex roots only; sign-changing coefficients
        let u = SingleSitePotential::from_1d(&[1.0, -1.0, 1.0]).unwrap();
        let c = polynomial_root_criterion(&u).unwrap();
        let e = c.extraction.expect("extraction");
        let w = convolve(&[1.0, -1.0, 1.0], &e.alpha);
        assert!(w.iter().all(|v| *v > 0.0));
        assert!(e.alpha.len() > 1);
        let neg = polynomial_root_criterion(&SingleSitePotential::from_1d(&[-1.0, 0.5, -1.0]).unwrap()).unwrap();
        assert!(neg.no_root());
        assert!(neg.extraction.unwrap().w.iter().all(|v| *v > 0.0));
    }
}
