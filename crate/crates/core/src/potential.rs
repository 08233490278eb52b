//! Single-site potentials u: ℤ^d → ℝ and the alloy-type potential V_ω.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{invalid, precondition, Result};
use crate::lattice::{cube_offsets, BoxGeometry, Site};

/// Sign rule applied to the exponential tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailSign {
    Positive,
    /// (−1)^{|k|₁}
    Alternating,
}

/// Exponential tail u(k) = sign(k)·C·e^{−α|k|₁} outside the explicit core.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tail {
    pub amplitude: f64,
    pub rate: f64,
    pub sign: TailSign,
}

impl Tail {
    pub fn value(&self, k: &Site) -> f64 {
        let sgn = match self.sign {
            TailSign::Positive => 1.0,
            TailSign::Alternating => {
                if k.norm1() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        sgn * self.amplitude * (-self.rate * k.norm1() as f64).exp()
    }

    /// Σ_{|k|_∞ > radius} C e^{−α|k|₁} in closed form.
    pub fn mass_beyond(&self, dim: usize, radius: i64) -> f64 {
        let q = (-self.rate).exp();
        let full = (1.0 + q) / (1.0 - q);
        let inside = 1.0 + 2.0 * q * (1.0 - q.powi(radius as i32)) / (1.0 - q);
        self.amplitude * (full.powi(dim as i32) - inside.powi(dim as i32)).max(0.0)
    }
}

/// A single-site potential: explicit core values plus an optional exponential
/// tail truncated to the cube of radius `truncation_radius`.
#[derive(Clone, Debug)]
pub struct SingleSitePotential {
    dim: usize,
    core: BTreeMap<Site, f64>,
    tail: Option<Tail>,
    truncation_radius: i64,
    support: Vec<(Site, f64)>,
    lookup: HashMap<Site, f64>,
}

impl SingleSitePotential {
    /// Finitely supported potential from (site, value) pairs; zero values are dropped.
    pub fn finite(dim: usize, values: impl IntoIterator<Item = (Site, f64)>) -> Result<Self> {
        Self::build(dim, values.into_iter().collect(), None, 0)
    }

    /// One-dimensional potential with u(k) = values[k] for k = 0..len.
    pub fn from_1d(values: &[f64]) -> Result<Self> {
        Self::finite(1, values.iter().enumerate().map(|(k, &v)| (Site::d1(k as i64), v)))
    }

    /// u = δ₀ in dimension d.
    pub fn delta(dim: usize) -> Self {
        Self::finite(dim, [(Site::origin(dim), 1.0)]).expect("valid delta")
    }

    /// Core values plus exponential tail, truncated at `radius` in ℓ∞.
    pub fn with_tail(dim: usize, core: impl IntoIterator<Item = (Site, f64)>, tail: Tail, radius: i64) -> Result<Self> {
        if !(tail.amplitude > 0.0 && tail.rate > 0.0) {
            return invalid("tail amplitude and rate must be positive");
        }
        if radius < 0 {
            return invalid("truncation radius must be non-negative");
        }
        Self::build(dim, core.into_iter().collect(), Some(tail), radius)
    }

    /// u(k) = C e^{−α|k|₁} truncated at `radius`.
    pub fn exponential(dim: usize, amplitude: f64, rate: f64, radius: i64) -> Result<Self> {
        let tail = Tail { amplitude, rate, sign: TailSign::Positive };
        Self::with_tail(dim, [], tail, radius)
    }

    fn build(dim: usize, core: BTreeMap<Site, f64>, tail: Option<Tail>, radius: i64) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        if core.keys().any(|k| k.dim() != dim) {
            return invalid("support site of wrong dimension");
        }
        if core.values().any(|v| !v.is_finite()) {
            return invalid("non-finite potential value");
        }
        let mut values: BTreeMap<Site, f64> = BTreeMap::new();
        if let Some(t) = &tail {
            for k in cube_offsets(dim, radius) {
                let v = t.value(&k);
                values.insert(k, v);
            }
            for (k, &v) in &core {
                if v.abs() > t.value(k).abs() * (1.0 + 1e-12) {
                    return invalid(format!("core value at {k:?} exceeds the tail envelope"));
                }
            }
        }
        for (k, &v) in &core {
            values.insert(k.clone(), v);
        }
        let support: Vec<(Site, f64)> = values.into_iter().filter(|(_, v)| *v != 0.0).collect();
        if support.is_empty() {
            return invalid("potential has empty support");
        }
        if !support.iter().any(|(k, _)| *k == Site::origin(dim)) {
            return invalid("0 must belong to the support");
        }
        let lookup = support.iter().cloned().collect();
        Ok(Self { dim, core, tail, truncation_radius: radius, support, lookup })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    pub fn truncation_radius(&self) -> i64 {
        self.truncation_radius
    }

    pub fn core(&self) -> &BTreeMap<Site, f64> {
        &self.core
    }

    /// Effective (truncated) value u(k).
    pub fn value(&self, k: &Site) -> f64 {
        self.lookup.get(k).copied().unwrap_or(0.0)
    }

    /// Effective support Θ with values, in lexicographic order.
    pub fn support(&self) -> &[(Site, f64)] {
        &self.support
    }

    pub fn theta(&self) -> Vec<Site> {
        self.support.iter().map(|(k, _)| k.clone()).collect()
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    /// ū = Σ u(k).
    pub fn sum(&self) -> f64 {
        self.support.iter().map(|(_, v)| v).sum()
    }

    pub fn norm1(&self) -> f64 {
        self.support.iter().map(|(_, v)| v.abs()).sum()
    }

    /// max_{i,j ∈ Θ} |i − j|₁
    pub fn diam1(&self) -> i64 {
        self.pair_max(|a, b| a.dist1(b))
    }

    /// max_{i,j ∈ Θ} |i − j|_∞
    pub fn diam_inf(&self) -> i64 {
        self.pair_max(|a, b| a.dist_inf(b))
    }

    /// max_{k ∈ Θ} |k|_∞
    pub fn radius_inf(&self) -> i64 {
        self.support.iter().map(|(k, _)| k.norm_inf()).max().unwrap_or(0)
    }

    fn pair_max(&self, f: impl Fn(&Site, &Site) -> i64) -> i64 {
        // Extremes along each axis suffice for both norms only in special cases,
        // so do the quadratic scan; supports are small.
        let mut best = 0;
        for (a, _) in &self.support {
            for (b, _) in &self.support {
                best = best.max(f(a, b));
            }
        }
        best
    }

    /// ℓ¹ mass of the tail rule beyond the truncation cube (0 for finite potentials).
    pub fn truncation_mass(&self) -> f64 {
        self.tail.map_or(0.0, |t| t.mass_beyond(self.dim, self.truncation_radius))
    }

    /// c·u, keeping the tail envelope consistent.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 {
            return invalid("scaling by zero");
        }
        let values = self.support.iter().map(|(k, v)| (k.clone(), c * v));
        let mut out = Self::build(self.dim, values.collect(), None, 0)?;
        out.tail = self.tail.map(|t| Tail { amplitude: t.amplitude * c.abs(), ..t });
        out.truncation_radius = self.truncation_radius;
        Ok(out)
    }

    /// Λ₊ = {k : u(x − k) ≠ 0 for some x ∈ Γ}.
    pub fn lambda_plus(&self, gamma: &BoxGeometry) -> BoxGeometry {
        let set: BTreeSet<Site> = gamma.sites().iter().flat_map(|x| self.support.iter().map(move |(t, _)| x - t)).collect();
        BoxGeometry::from_sites(self.dim, set).expect("same dimension")
    }

    /// V_ω(x) = Σ_k ω_k u(x − k).
    pub fn potential_value(&self, omega: &Configuration, x: &Site) -> Result<f64> {
        let mut acc = 0.0;
        for (t, v) in &self.support {
            let k = x - t;
            match omega.get(&k) {
                Some(w) => acc += w * v,
                None => return precondition(format!("coupling at {k:?} not sampled")),
            }
        }
        Ok(acc)
    }
}

/// Couplings ω_k on a finite index set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Configuration {
    values: HashMap<Site, f64>,
    /// (seed, trial) that produced the values, if sampled.
    pub provenance: Option<(u64, u64)>,
}

impl Configuration {
    pub fn new(values: impl IntoIterator<Item = (Site, f64)>) -> Self {
        Self { values: values.into_iter().collect(), provenance: None }
    }

    /// ω ≡ c on the given sites.
    pub fn constant(sites: &BoxGeometry, c: f64) -> Self {
        Self::new(sites.sites().iter().map(|s| (s.clone(), c)))
    }

    pub fn get(&self, k: &Site) -> Option<f64> {
        self.values.get(k).copied()
    }

    pub fn set(&mut self, k: Site, v: f64) {
        self.values.insert(k, v);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn covers(&self, sites: &BoxGeometry) -> bool {
        sites.sites().iter().all(|s| self.values.contains_key(s))
    }
}
