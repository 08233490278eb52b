//! Non-local a-priori bound for potentials with non-zero mean ū = Σ u(k):
//! the explicit constant and the exponentially weighted averages W^{x,y}.

use std::collections::BTreeMap;

use crate::density::DisorderDensity;
use crate::error::{invalid, Result};
use crate::lattice::{BoxGeometry, Site};
use crate::potential::SingleSitePotential;

/// Ingredients and value of the non-local a-priori bound.
#[derive(Clone, Copy, Debug)]
pub struct UbarBound {
    /// |ū| (the sign is flipped to make it positive when needed)
    pub ubar: f64,
    pub flipped: bool,
    pub norm1: f64,
    /// diam₁ Θ
    pub n: i64,
    /// decay rate c = ln(1 + ū/(2‖u‖₁))/n of the weights α^{x,y}
    pub rate: f64,
    /// ‖α^{x,y}‖₁ bound C = ((e^c+1)/(e^c−1))^d
    pub weight_sum: f64,
    pub bound: f64,
}

/// ū > 0 after an optional sign flip, and the decay rate c.
fn rate(u: &SingleSitePotential) -> Result<(f64, bool, i64, f64)> {
    if u.tail().is_some() {
        return invalid("finitely supported potential required");
    }
    let sum = u.sum();
    if sum == 0.0 {
        return invalid("ū = 0 is not covered");
    }
    let n = u.diam1();
    if n == 0 {
        return invalid("single-site support: use the rank-one averaging path");
    }
    let ubar = sum.abs();
    Ok((ubar, sum < 0.0, n, (1.0 + ubar / (2.0 * u.norm1())).ln() / n as f64))
}

/// 8/ū^s · s^{−s}/(1−s) · ‖ρ′‖₁^s · C^s · λ^{−s}
pub fn nonlocal_apriori_bound(u: &SingleSitePotential, rho: &DisorderDensity, lambda: f64, s: f64) -> Result<UbarBound> {
    if !(s > 0.0 && s < 1.0) {
        return invalid(format!("exponent {s} outside (0, 1)"));
    }
    if !(lambda > 0.0) {
        return invalid("coupling must be positive");
    }
    let Some(dl1) = rho.deriv_l1() else {
        return invalid("density needs an integrable derivative");
    };
    let (ubar, flipped, n, c) = rate(u)?;
    let weight_sum = ((c.exp() + 1.0) / (c.exp() - 1.0)).powi(u.dim() as i32);
    let bound = 8.0 / ubar.powf(s) * s.powf(-s) / (1.0 - s) * dl1.powf(s) * weight_sum.powf(s) * lambda.powf(-s);
    Ok(UbarBound { ubar, flipped, norm1: u.norm1(), n, rate: c, weight_sum, bound })
}

/// α^{x,y}(k) = ½(e^{−c|k−x|₁} + e^{−c|k−y|₁})
pub fn alpha_xy(c: f64, x: &Site, y: &Site, k: &Site) -> f64 {
    0.5 * ((-c * k.dist1(x) as f64).exp() + (-c * k.dist1(y) as f64).exp())
}

/// W^{x,y} on a window, with the positivity margins.
#[derive(Clone, Debug)]
pub struct WxyReport {
    pub values: BTreeMap<Site, f64>,
    /// min over the window of W^{x,y}(k) − α^{x,y}(k)ū/2
    pub min_margin: f64,
    pub w_x: f64,
    pub w_y: f64,
    /// ū/4
    pub quarter: f64,
}

impl WxyReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_margin >= -tol && self.w_x >= self.quarter - tol && self.w_y >= self.quarter - tol
    }
}

/// W^{x,y}(k) = Σ_j α^{x,y}(j) u(k − j), computed with u flipped to ū > 0 if needed.
pub fn w_xy(u: &SingleSitePotential, x: &Site, y: &Site, window: &BoxGeometry) -> Result<WxyReport> {
    let (ubar, flipped, _, c) = rate(u)?;
    let sign = if flipped { -1.0 } else { 1.0 };
    let w_at = |k: &Site| -> f64 { u.support().iter().map(|(t, v)| sign * v * alpha_xy(c, x, y, &(k - t))).sum() };
    let mut values = BTreeMap::new();
    let mut min_margin = f64::INFINITY;
    for k in window.sites() {
        let w = w_at(k);
        min_margin = min_margin.min(w - alpha_xy(c, x, y, k) * ubar / 2.0);
        values.insert(k.clone(), w);
    }
    Ok(WxyReport { values, min_margin, w_x: w_at(x), w_y: w_at(y), quarter: ubar / 4.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, interval};

    #[test]
    fn constants_for_two_examples() {
        let rho = DisorderDensity::raised_cosine(0.0, 1.0).unwrap();
        let plus = nonlocal_apriori_bound(&SingleSitePotential::from_1d(&[1.0, 1.0]).unwrap(), &rho, 1.0, 0.5).unwrap();
        assert!((plus.rate - 1.5f64.ln()).abs() < 1e-14);
        assert!((plus.weight_sum - 5.0).abs() < 1e-12);
        let minus = nonlocal_apriori_bound(&SingleSitePotential::from_1d(&[1.0, -0.25]).unwrap(), &rho, 10.0, 1.0 / 3.0).unwrap();
        assert!((minus.ubar - 0.75).abs() < 1e-15);
        assert!((minus.rate - 1.3f64.ln()).abs() < 1e-14);
        assert!((minus.weight_sum - 2.3 / 0.3).abs() < 1e-12);
        // 8/ū^s s^{-s}/(1−s) ‖ρ′‖^s C^s λ^{-s} with ‖ρ′‖₁ = 4
        let s: f64 = 1.0 / 3.0;
        let expect = 8.0 / 0.75f64.powf(s) * s.powf(-s) / (1.0 - s) * (4.0 * (2.3 / 0.3) / 10.0f64).powf(s);
        assert!((minus.bound - expect).abs() < 1e-12 * expect);
        let far = nonlocal_apriori_bound(&SingleSitePotential::from_1d(&[1.0, -0.25]).unwrap(), &rho, 1e12, 1.0 / 3.0).unwrap();
        assert!(far.bound < 1e-2);
    }

    #[test]
    fn rejections() {
        let rho = DisorderDensity::raised_cosine(0.0, 1.0).unwrap();
        assert!(nonlocal_apriori_bound(&SingleSitePotential::delta(1), &rho, 1.0, 0.5).is_err());
        assert!(nonlocal_apriori_bound(&SingleSitePotential::from_1d(&[1.0, -1.0]).unwrap(), &rho, 1.0, 0.5).is_err());
        let unif = DisorderDensity::uniform(0.0, 1.0).unwrap();
        assert!(nonlocal_apriori_bound(&SingleSitePotential::from_1d(&[1.0, 1.0]).unwrap(), &unif, 1.0, 0.5).is_err());
        assert!(w_xy(&SingleSitePotential::delta(1).scaled(3.0).unwrap(), &Site::d1(0), &Site::d1(0), &interval(-2, 2)).is_err());
    }

    #[test]
    fn positivity_window() {
        let u = SingleSitePotential::from_1d(&[1.0, 1.0]).unwrap();
        let r = w_xy(&u, &Site::d1(0), &Site::d1(0), &interval(-5, 5)).unwrap();
        assert!(r.holds(1e-12) && r.min_margin >= 0.0);
        assert!(r.w_x >= 0.5);
    }

    #[test]
    fn swap_symmetry_and_flip() {
        let u = SingleSitePotential::from_1d(&[-1.0, 0.25]).unwrap();
        let (x, y) = (Site::d1(-7), Site::d1(11));
        let win = interval(-15, 15);
        let a = w_xy(&u, &x, &y, &win).unwrap();
        let b = w_xy(&u, &y, &x, &win).unwrap();
        assert_eq!(a.values, b.values);
        assert!(a.holds(1e-12));
        let u2 =
            SingleSitePotential::finite(2, [(Site::origin(2), 1.0), (Site::new(vec![1, 0]), -0.3), (Site::new(vec![0, 1]), 0.4)]).unwrap();
        let r = w_xy(&u2, &Site::new(vec![1, -2]), &Site::new(vec![-3, 2]), &build_box(4, &Site::origin(2)).unwrap()).unwrap();
        assert!(r.holds(1e-12));
    }
}
