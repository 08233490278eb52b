//! Positive combinations of translated single-site potentials: derivatives of
//! the generating function F(z) = Σ u(−k) z^k at z = 1, the leading multi-index
//! I₀ with value c_u, the moment identities, the exhaustion radius R_l and the
//! coefficient vectors t_{j,l} entering the Wegner bound.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::lattice::{build_box, Site};
use crate::potential::SingleSitePotential;

/// A multi-index I ∈ ℕ₀^d.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |I| = Σ i_j
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// J ≤ I componentwise
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// J ≤ I and J ≠ I
    pub fn lt(&self, other: &Self) -> bool {
        self.le(other) && self != other
    }

    /// All multi-indices of order n in dimension d, lexicographically ascending.
    pub fn of_order(d: usize, n: u32) -> Vec<Self> {
        fn rec(d: usize, n: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == d {
                prefix.push(n);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for i in 0..=n {
                prefix.push(i);
                rec(d, n - i, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(d, n, &mut Vec::new(), &mut out);
        out
    }

    /// All J < I (componentwise), in lexicographic order.
    pub fn below(&self) -> Vec<Self> {
        let mut out = vec![MultiIndex(Vec::new())];
        for &m in &self.0 {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..=m).map(move |i| {
                        let mut q = p.0.clone();
                        q.push(i);
                        MultiIndex(q)
                    })
                })
                .collect();
        }
        out.retain(|j| j != self);
        out
    }

    /// k^I = Π k_j^{i_j}, with 0⁰ = 1.
    pub fn power(&self, k: &Site) -> f64 {
        self.0.iter().zip(&k.0).map(|(&i, &c)| (c as f64).powi(i as i32)).product()
    }

    /// Π_j k_j(k_j − 1)···(k_j − i_j + 1)
    pub fn falling(&self, k: &Site) -> f64 {
        self.0.iter().zip(&k.0).map(|(&i, &c)| (0..i as i64).map(|m| (c - m) as f64).product::<f64>()).product()
    }
}

/// D^I F(1) = Σ_k u(−k) Π_j (k_j)_{i_j} over the effective support.
pub fn generating_derivative(u: &SingleSitePotential, i: &MultiIndex) -> f64 {
    u.support().iter().map(|(t, v)| v * i.falling(&-t)).sum()
}

/// Scale of the terms of D^I F(1): Σ|u| · max |falling factorial|.
fn derivative_scale(u: &SingleSitePotential, i: &MultiIndex) -> f64 {
    let ff = u.support().iter().map(|(t, _)| i.falling(&-t).abs()).fold(0.0, f64::max).max(1.0);
    u.norm1() * ff
}

/// Bound on Σ_{|k|_∞ > T} C e^{−α|k|₁} Π|(k_j)_{i_j}| for the truncated tail.
pub fn derivative_tail_bound(u: &SingleSitePotential, order: u32) -> f64 {
    let Some(t) = u.tail() else { return 0.0 };
    let d = u.dim() as i32;
    let start = u.truncation_radius() + 1;
    // sites with |k|_∞ > T have |k|₁ ≥ T + 1; #{|k|₁ = r} ≤ 2^d (r+1)^{d−1}
    let mut total = 0.0;
    let mut r = start;
    loop {
        let rf = r as f64;
        let term = 2f64.powi(d) * (rf + 1.0).powi(d - 1) * t.amplitude * (-t.rate * rf).exp() * (rf + order as f64).powi(order as i32);
        total += term;
        if (term < 1e-18 * total.max(1e-300) && rf * t.rate > order as f64 + d as f64) || r > start + 1_000_000 {
            break;
        }
        r += 1;
    }
    total
}

/// The leading derivative (I₀, c_u) of the generating function.
#[derive(Clone, Debug)]
pub struct LeadingDerivative {
    pub i0: MultiIndex,
    pub c_u: f64,
    pub degree_cap: u32,
    /// vanishing threshold used at the order of I₀
    pub tolerance: f64,
    /// tail contribution bound of the truncated potential at the order of I₀
    pub truncation_error: f64,
}

/// Smallest order with a non-vanishing derivative; lexicographically smallest I within it.
pub fn find_i0(u: &SingleSitePotential, degree_cap: u32) -> Result<LeadingDerivative> {
    let d = u.dim();
    for n in 0..=degree_cap {
        let trunc = derivative_tail_bound(u, n);
        for i in MultiIndex::of_order(d, n) {
            let v = generating_derivative(u, &i);
            let tol = 1e-9 * derivative_scale(u, &i);
            if v.abs() > tol.max(trunc) {
                if v.abs() <= 10.0 * tol {
                    return Err(Error::Inconclusive(format!("|D^{:?}F(1)| = {v:.3e} is within 10× the vanishing tolerance", i.0)));
                }
                return Ok(LeadingDerivative { i0: i, c_u: v, degree_cap, tolerance: tol, truncation_error: trunc });
            }
        }
    }
    Err(Error::Inconclusive(format!("all derivatives vanish up to order {degree_cap}")))
}

/// Σ_k k^I u(x − k) over the effective support.
pub fn prop1_sum(u: &SingleSitePotential, i: &MultiIndex, x: &Site) -> f64 {
    u.support().iter().map(|(t, v)| v * i.power(&(x - t))).sum()
}

/// R_l = max{2l + (2/α) ln(2·3^d C/(|c_u|(1 − e^{−α/2}))), 8(d + |I₀|)²/α²}
pub fn compute_r_l(dim: usize, amplitude: f64, rate: f64, c_u: f64, i0_order: u32, l: i64) -> Result<(f64, i64)> {
    if c_u == 0.0 || !(rate > 0.0) || !(amplitude > 0.0) {
        return invalid("R_l needs c_u ≠ 0 and positive tail parameters");
    }
    let log_term =
        2.0 * l as f64 + (2.0 / rate) * (2.0 * 3f64.powi(dim as i32) * amplitude / (c_u.abs() * (1.0 - (-rate / 2.0).exp()))).ln();
    let poly_term = 8.0 * ((dim as u32 + i0_order) as f64).powi(2) / rate.powi(2);
    let r = log_term.max(poly_term);
    Ok((r, r.ceil() as i64))
}

/// Exhaustion radius for Λ_l: ⌈R_l⌉ with a tail, else l plus the support radius.
pub fn exhaustion_radius(u: &SingleSitePotential, lead: &LeadingDerivative, l: i64) -> Result<i64> {
    match u.tail() {
        Some(t) => Ok(compute_r_l(u.dim(), t.amplitude, t.rate, lead.c_u, lead.i0.order(), l)?.1),
        None => Ok(l + u.radius_inf()),
    }
}

/// u(k) = C e^{−α|k|₁} truncated so that Λ_l + Λ_{R_l} and a further e^{−30} of
/// tail decay fit inside: T = ⌈R_l⌉ + l + ⌈30/α⌉.
pub fn truncated_exponential(dim: usize, amplitude: f64, rate: f64, l: i64) -> Result<SingleSitePotential> {
    if l < 0 {
        return invalid("l must be non-negative");
    }
    // positive u: I₀ = 0 and c_u = Σ_k u(k) = C((1 + e^{−α})/(1 − e^{−α}))^d
    let q = (-rate).exp();
    let c_u = amplitude * ((1.0 + q) / (1.0 - q)).powi(dim as i32);
    let (_, r) = compute_r_l(dim, amplitude, rate, c_u, 0, l)?;
    SingleSitePotential::exponential(dim, amplitude, rate, r + l + (30.0 / rate).ceil() as i64)
}

/// Outcome of the uniform-positivity check on Λ_l.
#[derive(Clone, Debug)]
pub struct Prop2Report {
    pub l: i64,
    pub radius: i64,
    /// min over x ∈ Λ_l of (2/c_u) Σ_{k ∈ Λ_R} k^{I₀} u(x − k)
    pub min: f64,
    pub argmin: Site,
    /// bound on the neglected tail mass beyond the truncation, relative to |c_u|
    pub truncation_bound: f64,
}

pub fn prop2_min(u: &SingleSitePotential, lead: &LeadingDerivative, l: i64) -> Result<Prop2Report> {
    if l < 0 {
        return invalid("l must be non-negative");
    }
    let radius = exhaustion_radius(u, lead, l)?;
    let d = u.dim();
    let inner = build_box(l, &Site::origin(d))?;
    let outer = build_box(radius, &Site::origin(d))?;
    let scale = 2.0 / lead.c_u;
    let vals: Vec<(f64, Site)> = inner
        .sites()
        .par_iter()
        .map(|x| {
            let s: f64 = outer
                .sites()
                .iter()
                .map(|k| {
                    let v = u.value(&(x - k));
                    if v == 0.0 {
                        0.0
                    } else {
                        v * lead.i0.power(k)
                    }
                })
                .sum();
            (scale * s, x.clone())
        })
        .collect();
    let (min, argmin) = vals.into_iter().fold((f64::INFINITY, Site::origin(d)), |acc, v| if v.0 < acc.0 { v } else { acc });
    let truncation_bound = match u.tail() {
        None => 0.0,
        Some(_) => {
            // the sum misses u(x − k) with |x − k|_∞ > T; weight |k^{I₀}| ≤ (R)^{|I₀|}
            let w = (radius.max(1) as f64).powi(lead.i0.order() as i32);
            2.0 * w * u.truncation_mass() / lead.c_u.abs()
        }
    };
    Ok(Prop2Report { l, radius, min, argmin, truncation_bound })
}

/// The coefficient vectors t_{j,l}(k) = 2k^{I₀}/c_u on Λ_R (independent of j).
#[derive(Clone, Debug)]
pub struct WegnerCoefficients {
    pub l: i64,
    pub radius: i64,
    pub i0: MultiIndex,
    pub c_u: f64,
    pub t: Vec<(Site, f64)>,
    /// ‖t_{j,l}‖₁
    pub per_site_l1: f64,
    /// Σ_{j ∈ Λ_l} ‖t_{j,l}‖₁ = (2l+1)^d ‖t‖₁
    pub total_l1: f64,
}

pub fn wegner_coefficients(u: &SingleSitePotential, lead: &LeadingDerivative, l: i64) -> Result<WegnerCoefficients> {
    let radius = exhaustion_radius(u, lead, l)?;
    let d = u.dim();
    let t: Vec<(Site, f64)> =
        build_box(radius, &Site::origin(d))?.sites().iter().map(|k| (k.clone(), 2.0 * lead.i0.power(k) / lead.c_u)).collect();
    let per_site_l1: f64 = t.iter().map(|(_, v)| v.abs()).sum();
    let total_l1 = ((2 * l + 1) as f64).powi(d as i32) * per_site_l1;
    Ok(WegnerCoefficients { l, radius, i0: lead.i0.clone(), c_u: lead.c_u, t, per_site_l1, total_l1 })
}

/// n ≥ 8M²/α², together with a numerical check of n^M < e^{αn/2} when it holds.
pub fn nexp_guard(m: f64, alpha: f64, n: u64) -> Result<(bool, Option<bool>)> {
    if !(m > 0.0 && alpha > 0.0) {
        return invalid("M and α must be positive");
    }
    let nf = n as f64;
    if nf >= 8.0 * m * m / (alpha * alpha) {
        // compare logarithms to avoid overflow
        Ok((true, Some(m * nf.ln() < alpha * nf / 2.0)))
    } else {
        Ok((false, None))
    }
}

/// Random finitely supported potentials with prescribed vanishing moments,
/// built as a random core hit by a few discrete derivatives.
pub mod instances {
    use super::*;

    pub fn random_potential(rng: &mut ChaCha8Rng, dim: usize) -> SingleSitePotential {
        loop {
            let derivs = rng.random_range(0..3usize);
            let core_radius = if derivs == 2 { 0 } else { 1 };
            let mut vals = std::collections::BTreeMap::new();
            for k in build_box(core_radius, &Site::origin(dim)).expect("radius ≥ 0").sites() {
                if rng.random::<f64>() < 0.7 {
                    let mag = 0.1 + 1.9 * rng.random::<f64>();
                    vals.insert(k.clone(), if rng.random::<bool>() { mag } else { -mag });
                }
            }
            for _ in 0..derivs {
                let axis = rng.random_range(0..dim);
                let mut e = vec![0; dim];
                e[axis] = 1;
                let e = Site::new(e);
                let mut next = vals.clone();
                for (k, v) in &vals {
                    *next.entry(k + &e).or_insert(0.0) -= v;
                }
                vals = next;
            }
            vals.retain(|_, v| *v != 0.0);
            if !vals.contains_key(&Site::origin(dim)) || vals.keys().any(|k| k.norm_inf() > 3) {
                continue;
            }
            if let Ok(u) = SingleSitePotential::finite(dim, vals) {
                return u;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::aux;

    fn u1(v: &[f64]) -> SingleSitePotential {
        SingleSitePotential::from_1d(v).unwrap()
    }

    #[test]
    fn multi_index_orders() {
        let o = MultiIndex::of_order(2, 2);
        assert_eq!(o, vec![MultiIndex(vec![0, 2]), MultiIndex(vec![1, 1]), MultiIndex(vec![2, 0])]);
        assert_eq!(MultiIndex::of_order(3, 2).len(), 6);
        let i = MultiIndex(vec![1, 2]);
        assert_eq!(i.below().len(), 5);
        assert!(MultiIndex(vec![0, 2]).lt(&i) && !i.lt(&i) && !MultiIndex(vec![2, 0]).le(&i));
        assert_eq!(MultiIndex(vec![0]).power(&Site::d1(0)), 1.0);
        assert_eq!(MultiIndex(vec![3]).falling(&Site::d1(-2)), -24.0);
    }

    #[test]
    fn derivatives_against_symbolic() {
        let delta = SingleSitePotential::delta(1);
        assert_eq!(generating_derivative(&delta, &MultiIndex(vec![0])), 1.0);
        assert_eq!(generating_derivative(&delta, &MultiIndex(vec![2])), 0.0);
        // F(z) = 1 − z^{−1}: F(1) = 0, F'(1) = 1
        let d1 = u1(&[1.0, -1.0]);
        assert_eq!(generating_derivative(&d1, &MultiIndex(vec![0])), 0.0);
        assert_eq!(generating_derivative(&d1, &MultiIndex(vec![1])), 1.0);
        // F = 1 − z^{−2}: F'(1) = 2, F''(1) = −6
        let d2 = u1(&[1.0, 0.0, -1.0]);
        assert_eq!(generating_derivative(&d2, &MultiIndex(vec![1])), 2.0);
        assert_eq!(generating_derivative(&d2, &MultiIndex(vec![2])), -6.0);
    }

    #[test]
    fn leading_derivative_examples() {
        let l = find_i0(&SingleSitePotential::delta(2), 4).unwrap();
        assert_eq!((l.i0, l.c_u), (MultiIndex(vec![0, 0]), 1.0));
        let l = find_i0(&u1(&[1.0, -1.0]), 4).unwrap();
        assert_eq!((l.i0, l.c_u), (MultiIndex(vec![1]), 1.0));
        let e = SingleSitePotential::exponential(1, 1.0, 1.0, 30).unwrap();
        let l = find_i0(&e, 4).unwrap();
        let q = (-1f64).exp();
        assert_eq!(l.i0, MultiIndex(vec![0]));
        assert!((l.c_u - (1.0 + 2.0 * q / (1.0 - q))).abs() < 1e-12);
        assert!(l.truncation_error < 1e-11);
        assert!(find_i0(&u1(&[1.0, -2.0, 1.0]), 1).is_err());
    }

    #[test]
    fn prop1_examples() {
        let i1 = MultiIndex(vec![1]);
        assert_eq!(prop1_sum(&SingleSitePotential::delta(1), &MultiIndex(vec![0]), &Site::d1(5)), 1.0);
        let d1 = u1(&[1.0, -1.0]);
        assert_eq!(prop1_sum(&d1, &i1, &Site::d1(0)), 1.0);
        assert_eq!(prop1_sum(&d1, &i1, &Site::d1(7)), 1.0);
        let d2 = u1(&[1.0, 0.0, -1.0]);
        assert_eq!(prop1_sum(&d2, &i1, &Site::d1(-4)), 2.0);
    }

    #[test]
    fn r_l_examples() {
        let c_u = 1.0 + 2.0 * (-1f64).exp() / (1.0 - (-1f64).exp());
        let (r, ri) = compute_r_l(1, 1.0, 1.0, c_u, 0, 5).unwrap();
        let expect = 10.0 + 2.0 * (6.0 / (c_u * (1.0 - (-0.5f64).exp()))).ln();
        assert!((r - expect).abs() < 1e-12 && (r - 13.905).abs() < 1e-3);
        assert_eq!(ri, 14);
        let (r0, _) = compute_r_l(1, 1.0, 1.0, c_u, 0, 0).unwrap();
        assert!((r0 - 8.0).abs() < 1e-12);
        let (big, _) = compute_r_l(1, 1.0, 50.0, c_u, 0, 40).unwrap();
        assert!((big - 80.0).abs() < 0.5);
    }

    #[test]
    fn prop2_examples() {
        let delta = SingleSitePotential::delta(1);
        let p = prop2_min(&delta, &find_i0(&delta, 2).unwrap(), 3).unwrap();
        assert_eq!(p.min, 2.0);
        let d1 = u1(&[1.0, -1.0]);
        let p = prop2_min(&d1, &find_i0(&d1, 2).unwrap(), 4).unwrap();
        assert!((p.min - 2.0).abs() < 1e-12);
        let e = SingleSitePotential::exponential(1, 1.0, 1.0, 60).unwrap();
        let p = prop2_min(&e, &find_i0(&e, 2).unwrap(), 5).unwrap();
        assert_eq!(p.radius, 14);
        assert!(p.min >= 1.0 - 1e-6, "{}", p.min);
    }

    #[test]
    fn truncated_exponential_radius() {
        let u = truncated_exponential(1, 1.0, 1.0, 6).unwrap();
        assert_eq!(u.truncation_radius(), 16 + 6 + 30);
        let lead = find_i0(&u, 2).unwrap();
        assert!((lead.c_u - (1.0 + (-1f64).exp()) / (1.0 - (-1f64).exp())).abs() < 1e-12);
        assert_eq!(exhaustion_radius(&u, &lead, 6).unwrap(), 16);
    }

    #[test]
    fn wegner_coefficient_sums() {
        let delta = SingleSitePotential::delta(1);
        let w = wegner_coefficients(&delta, &find_i0(&delta, 2).unwrap(), 1).unwrap();
        assert_eq!(w.radius, 1);
        assert_eq!(w.per_site_l1, 2.0 * 3.0);
        assert_eq!(w.total_l1, 3.0 * 6.0);
        let u = u1(&[1.0, -0.5, 0.2]);
        let w1 = wegner_coefficients(&u, &find_i0(&u, 2).unwrap(), 2).unwrap();
        let u2 = u.scaled(2.0).unwrap();
        let l2 = find_i0(&u2, 2).unwrap();
        assert_eq!(l2.c_u, 2.0 * find_i0(&u, 2).unwrap().c_u);
        let w2 = wegner_coefficients(&u2, &l2, 2).unwrap();
        assert!((w2.total_l1 * 2.0 - w1.total_l1).abs() < 1e-12);
    }

    #[test]
    fn nexp_examples() {
        assert_eq!(nexp_guard(1.0, 1.0, 8).unwrap(), (true, Some(true)));
        assert_eq!(nexp_guard(1.0, 1.0, 7).unwrap(), (false, None));
        assert_eq!(nexp_guard(2.0, 2.0, 8).unwrap(), (true, Some(true)));
        assert!(nexp_guard(0.0, 1.0, 8).is_err());
    }

    #[test]
    fn random_instances_have_exact_moments() {
        let mut rng = aux(17, 3);
        let mut higher = 0;
        for i in 0..30 {
            let u = instances::random_potential(&mut rng, 1 + i % 2);
            let lead = find_i0(&u, 6).unwrap();
            if lead.i0.order() > 0 {
                higher += 1;
            }
            let x = Site::new(vec![3; u.dim()]);
            assert!((prop1_sum(&u, &lead.i0, &x) - lead.c_u).abs() < 1e-9);
            for j in lead.i0.below() {
                assert!(prop1_sum(&u, &j, &x).abs() < 1e-9);
            }
        }
        assert!(higher > 5);
    }
}
