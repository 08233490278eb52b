//! Compactly supported disorder densities ρ.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum DensityKind {
    Uniform {
        a: f64,
        b: f64,
    },
    /// ρ(t) = (1 − cos(2π(t−a)/(b−a)))/(b−a) on [a, b].
    RaisedCosine {
        a: f64,
        b: f64,
    },
    /// Linear interpolation of (t, value) knots, normalised to unit mass.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
}

/// A probability density with compact support and its norms.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderDensity {
    kind: DensityKind,
    lo: f64,
    hi: f64,
    norm_inf: f64,
    norm_var: f64,
    deriv_l1: Option<f64>,
}

impl DisorderDensity {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        let h = 1.0 / (b - a);
        Ok(Self { kind: DensityKind::Uniform { a, b }, lo: a, hi: b, norm_inf: h, norm_var: 2.0 * h, deriv_l1: None })
    }

    pub fn raised_cosine(a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        let w = b - a;
        Ok(Self { kind: DensityKind::RaisedCosine { a, b }, lo: a, hi: b, norm_inf: 2.0 / w, norm_var: 4.0 / w, deriv_l1: Some(4.0 / w) })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return invalid("piecewise-linear density needs at least two knots");
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return invalid("knots must be strictly increasing");
        }
        if knots.iter().any(|k| !(k.1 >= 0.0) || !k.0.is_finite() || !k.1.is_finite()) {
            return invalid("density values must be finite and non-negative");
        }
        let mass: f64 = knots.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
        if !(mass > 0.0) {
            return invalid("density has zero mass");
        }
        let knots: Vec<(f64, f64)> = knots.into_iter().map(|(t, v)| (t, v / mass)).collect();
        let norm_inf = knots.iter().map(|k| k.1).fold(0.0, f64::max);
        let jumps: f64 = knots.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum();
        let (first, last) = (knots[0].1, knots[knots.len() - 1].1);
        let deriv_l1 = (first == 0.0 && last == 0.0).then_some(jumps);
        Ok(Self {
            lo: knots[0].0,
            hi: knots[knots.len() - 1].0,
            kind: DensityKind::PiecewiseLinear { knots },
            norm_inf,
            norm_var: jumps + first + last,
            deriv_l1,
        })
    }

    /// Builds a density from a kind name and parameter list, as used in configs.
    pub fn from_spec(kind: &str, params: &[f64]) -> Result<Self> {
        match kind {
            "uniform" | "raised_cosine" => {
                let [a, b] = params else {
                    return invalid(format!("{kind} takes two parameters [a, b]"));
                };
                if kind == "uniform" {
                    Self::uniform(*a, *b)
                } else {
                    Self::raised_cosine(*a, *b)
                }
            }
            "piecewise_linear" => {
                if !params.len().is_multiple_of(2) {
                    return invalid("piecewise_linear takes a flat list t0, v0, t1, v1, ...");
                }
                Self::piecewise_linear(params.chunks(2).map(|c| (c[0], c[1])).collect())
            }
            "discrete" | "atomic" | "bernoulli" => invalid("atomic disorder measures are not supported; every bound needs a density"),
            other => invalid(format!("unknown density kind '{other}'")),
        }
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Smallest R with supp ρ ⊆ [−R, R].
    pub fn support_radius(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn norm_inf(&self) -> f64 {
        self.norm_inf
    }

    /// ‖ρ‖_{L¹}; equal to 1 by construction.
    pub fn norm_l1(&self) -> f64 {
        1.0
    }

    /// Total variation of ρ on ℝ, including jumps at the support ends.
    pub fn norm_var(&self) -> f64 {
        self.norm_var
    }

    /// ‖ρ′‖_{L¹} when ρ is absolutely continuous on ℝ.
    pub fn deriv_l1(&self) -> Option<f64> {
        self.deriv_l1
    }

    /// Points where ρ is not smooth (support ends and interior knots).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            DensityKind::PiecewiseLinear { knots } => knots.iter().map(|k| k.0).collect(),
            _ => vec![self.lo, self.hi],
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < self.lo || t > self.hi {
            return 0.0;
        }
        match &self.kind {
            DensityKind::Uniform { a, b } => 1.0 / (b - a),
            DensityKind::RaisedCosine { a, b } => {
                let w = b - a;
                (1.0 - (2.0 * PI * (t - a) / w).cos()) / w
            }
            DensityKind::PiecewiseLinear { knots } => {
                let i = knots.partition_point(|k| k.0 <= t).clamp(1, knots.len() - 1);
                let (t0, v0) = knots[i - 1];
                let (t1, v1) = knots[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        if t >= self.hi {
            return 1.0;
        }
        match &self.kind {
            DensityKind::Uniform { a, b } => (t - a) / (b - a),
            DensityKind::RaisedCosine { a, b } => {
                let x = (t - a) / (b - a);
                x - (2.0 * PI * x).sin() / (2.0 * PI)
            }
            DensityKind::PiecewiseLinear { knots } => {
                let mut acc = 0.0;
                for w in knots.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if t >= t1 {
                        acc += 0.5 * (v0 + v1) * (t1 - t0);
                    } else {
                        let vt = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                        acc += 0.5 * (v0 + vt) * (t - t0);
                        break;
                    }
                }
                acc.min(1.0)
            }
        }
    }

    /// Inverse-CDF transform of a uniform variate in [0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        if let DensityKind::Uniform { a, b } = self.kind {
            return a + (b - a) * p;
        }
        let (mut lo, mut hi) = (self.lo, self.hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return invalid("density support must be a finite interval with a < b");
    }
    Ok(())
}
