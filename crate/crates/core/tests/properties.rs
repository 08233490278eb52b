//! Property tests of structural invariants over randomized inputs.

use alloylab::averaging::{det_average_check, graf_check, instances as mat};
use alloylab::density::DisorderDensity;
use alloylab::gaussian::{a_l_determinants, gaussian_conditional, negexample_check};
use alloylab::green::{annulus, depleted, green, schur_b, CMatrix};
use alloylab::lattice::{build_box, interval, BoxGeometry, Site};
use alloylab::linalg::{complexify, invert, shifted};
use alloylab::model::{assemble_hamiltonian, sample_configuration, HamiltonianMatrix, ModelConfig};
use alloylab::onedim::one_d_constants;
use alloylab::poscomb::{find_i0, instances::random_potential, prop1_sum};
use alloylab::potential::{Configuration, SingleSitePotential};
use alloylab::rng::aux;
use alloylab::spectra::{count_in_interval, eigenvalues, CubeSpectrum};
use alloylab::ubar::w_xy;
use alloylab::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

fn geometry(seed: u64) -> BoxGeometry {
    let mut rng = aux(seed, 900);
    if rng.random::<bool>() {
        interval(0, rng.random_range(1..40))
    } else {
        build_box(rng.random_range(1..4), &Site::new(vec![rng.random_range(-3..3), rng.random_range(-3..3)])).unwrap()
    }
}

fn diagonal_operator(seed: u64) -> HamiltonianMatrix {
    let g = geometry(seed);
    let mut rng = aux(seed, 901);
    let diag: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
    HamiltonianMatrix::from_diagonal(&g, &diag)
}

fn uniform() -> DisorderDensity {
    DisorderDensity::uniform(0.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn hamiltonian_symmetric_with_bond_count(seed in any::<u64>(), lambda in 0.0f64..20.0) {
        let g = geometry(seed);
        let u = random_potential(&mut aux(seed, 1), g.dim());
        let model = ModelConfig::new(lambda, u, uniform()).unwrap();
        let h = assemble_hamiltonian(&model, &model.sample_for(&g, seed, 0), &g).unwrap();
        prop_assert_eq!(&h.matrix, &h.matrix.transpose());
        let minus_ones = h.matrix.iter().enumerate().filter(|(k, v)| k % (h.len() + 1) != 0 && **v == -1.0).count();
        prop_assert_eq!(minus_ones, 2 * g.bond_count());
        prop_assert_eq!(count_in_interval(&eigenvalues(&h), f64::NEG_INFINITY, f64::INFINITY).unwrap(), g.len());
    }

    #[test]
    fn potential_is_bilinear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut rng = aux(seed, 2);
        let d = 1 + (seed % 2) as usize;
        let (u1, u2) = (random_potential(&mut rng, d), random_potential(&mut rng, d));
        let x = Site::new((0..d).map(|_| rng.random_range(-5..5)).collect());
        let sites = build_box(8, &Site::origin(d)).unwrap();
        let w1 = sample_configuration(&uniform(), &sites, seed, 0);
        let w2 = sample_configuration(&uniform(), &sites, seed, 1);
        let mix = Configuration::new(sites.sites().iter().map(|k| (k.clone(), a * w1.get(k).unwrap() + b * w2.get(k).unwrap())));
        let lhs = u1.potential_value(&mix, &x).unwrap();
        let rhs = a * u1.potential_value(&w1, &x).unwrap() + b * u1.potential_value(&w2, &x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        // additivity in u over the union of supports
        let sum = SingleSitePotential::finite(d, sites.sites().iter().map(|k| (k.clone(), u1.value(k) + u2.value(k)))
            .filter(|(_, v)| *v != 0.0));
        if let Ok(sum) = sum {
            let l = sum.potential_value(&w1, &x).unwrap();
            let r = u1.potential_value(&w1, &x).unwrap() + u2.potential_value(&w1, &x).unwrap();
            prop_assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs()));
        }
    }

    #[test]
    fn sampling_is_reproducible_and_local(seed in any::<u64>(), trial in 0u64..1000) {
        let small = interval(-3, 3);
        let big = interval(-20, 20);
        let a = sample_configuration(&uniform(), &small, seed, trial);
        let b = sample_configuration(&uniform(), &big, seed, trial);
        for k in small.sites() {
            prop_assert_eq!(a.get(k).unwrap().to_bits(), b.get(k).unwrap().to_bits());
        }
    }

    #[test]
    fn depleted_green_decouples(seed in any::<u64>(), re in -3.0f64..3.0, im in 0.1f64..2.0) {
        let h = diagonal_operator(seed);
        let mut rng = aux(seed, 3);
        let c = h.geometry.site(rng.random_range(0..h.len())).clone();
        let lambda = build_box(rng.random_range(0..3), &c).unwrap().intersect(&h.geometry);
        let z = Complex64::new(re, im);
        let dep = depleted(&h, &lambda).unwrap();
        let g_dep = invert(&shifted(&dep.depleted, z)).unwrap();
        let g_box = green(&h.restrict(&lambda).unwrap(), z).unwrap();
        for x in lambda.sites() {
            for y in lambda.sites() {
                let i = h.geometry.index_of(x).unwrap();
                let j = h.geometry.index_of(y).unwrap();
                prop_assert!((g_dep[(i, j)] - g_box.get(x, y)).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn schur_feedback_ignores_inside(seed in any::<u64>(), im in 0.1f64..2.0, bump in -5.0f64..5.0) {
        let h = diagonal_operator(seed);
        let mut rng = aux(seed, 4);
        let c = h.geometry.site(rng.random_range(0..h.len())).clone();
        let lambda = build_box(1, &c).unwrap().intersect(&h.geometry);
        let z = Complex64::new(0.3, im);
        let mut diag = h.matrix.diagonal().iter().copied().collect::<Vec<f64>>();
        for s in lambda.sites() {
            diag[h.geometry.index_of(s).unwrap()] += bump;
        }
        let h2 = HamiltonianMatrix::from_diagonal(&h.geometry, &diag);
        prop_assert_eq!(schur_b(&h, &lambda, z).unwrap(), schur_b(&h2, &lambda, z).unwrap());
    }

    #[test]
    fn annulus_separates(seed in any::<u64>()) {
        let mut rng = aux(seed, 5);
        let d = 1 + (seed % 2) as usize;
        let u = random_potential(&mut rng, d);
        let theta = u.theta();
        let diam = theta.iter().flat_map(|a| theta.iter().map(move |b| a.dist_inf(b))).max().unwrap();
        let radius = diam + 2 + rng.random_range(0..2);
        let gamma = build_box(radius + diam + 4, &Site::origin(d)).unwrap();
        let x = Site::new((0..d).map(|_| rng.random_range(-2..=2)).collect());
        let ann = annulus(&gamma, &x, radius, &theta).unwrap();
        let rest = gamma.minus(&ann.w);
        let comp = rest.component_of(&x).unwrap();
        prop_assert!(comp.is_subset_of(&ann.lambda), "component of x leaves Λ_x");
    }

    #[test]
    fn green_is_relabeling_invariant(seed in any::<u64>(), im in 0.1f64..2.0) {
        let h = diagonal_operator(seed);
        let n = h.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut aux(seed, 6));
        let permuted = nalgebra::DMatrix::from_fn(n, n, |i, j| h.matrix[(perm[i], perm[j])]);
        let z = Complex64::new(-0.4, im);
        let g = green(&h, z).unwrap().entries;
        let gp = invert(&shifted(&permuted, z)).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((gp[(i, j)] - g[(perm[i], perm[j])]).norm() <= 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn det_average_unitary_invariance(seed in any::<u64>(), s in 0.1f64..0.9) {
        let mut rng = aux(seed, 7);
        let n = rng.random_range(1..=3usize);
        let (a, v) = (mat::cmatrix(&mut rng, n), mat::cmatrix(&mut rng, n));
        let q = mat::cmatrix(&mut rng, n).qr().q();
        let rho = mat::density(&mut rng);
        let base = det_average_check(&a, &v, &rho, s).unwrap();
        let conj = |m: &CMatrix| &q * m * q.adjoint();
        let rot = det_average_check(&conj(&a), &conj(&v), &rho, s).unwrap();
        prop_assert!((base.integral - rot.integral).abs() <= 1e-8 * base.integral.max(1.0));
        prop_assert!(base.holds());
    }

    #[test]
    fn graf_ratio_inside_support(seed in any::<u64>(), s in 0.05f64..0.95, t in 0.05f64..0.95) {
        let rho = mat::density(&mut aux(seed, 8));
        let (lo, hi) = rho.support();
        let g = graf_check(&rho, s, Complex64::new(lo + t * (hi - lo), 0.0)).unwrap();
        let ratio = g.integral / g.bound;
        prop_assert!(ratio > 0.1 && ratio <= 1.0 + g.error / g.bound, "ratio {}", ratio);
    }

    #[test]
    fn moment_sums_independent_of_x(seed in any::<u64>()) {
        let mut rng = aux(seed, 9);
        let u = random_potential(&mut rng, 1 + (seed % 2) as usize);
        let lead = find_i0(&u, 6).unwrap();
        let d = u.dim();
        let v0 = prop1_sum(&u, &lead.i0, &Site::origin(d));
        for _ in 0..5 {
            let x = Site::new((0..d).map(|_| rng.random_range(-50..=50)).collect());
            prop_assert!((prop1_sum(&u, &lead.i0, &x) - v0).abs() <= 1e-9);
        }
        let doubled = find_i0(&u.scaled(2.0).unwrap(), 6).unwrap();
        prop_assert_eq!(doubled.c_u, 2.0 * lead.c_u);
        prop_assert_eq!(&find_i0(&u.scaled(0.37).unwrap(), 6).unwrap().i0, &lead.i0);
    }

    #[test]
    fn regularity_monotone_in_rate(seed in any::<u64>(), e in -3.0f64..3.0, m in 0.0f64..2.0, f in 0.0f64..1.0) {
        let model = ModelConfig::new(5.0, SingleSitePotential::from_1d(&[1.0, -0.5]).unwrap(), uniform()).unwrap();
        let cube = build_box(4, &Site::d1(0)).unwrap();
        let spec = CubeSpectrum::new(&model, &model.sample_for(&model.potential.lambda_plus(&cube), seed, 0), 4, &Site::d1(0)).unwrap();
        if spec.regularity(e, m).is_regular() {
            prop_assert!(spec.regularity(e, m * f).is_regular());
        }
    }

    #[test]
    fn one_d_bound_is_monotone(a in 0.2f64..2.0, b in -2.0f64..-0.2, lambda in 1.0f64..200.0, s in 0.1f64..0.9) {
        let u = SingleSitePotential::from_1d(&[a, b]).unwrap();
        let k = one_d_constants(&u, &uniform(), lambda, s).unwrap();
        prop_assert!(k.c_plus >= k.c * (1.0 - 1e-12) || lambda < 1.0);
        if k.mu > 0.0 {
            for d in 4..40usize {
                prop_assert!(k.bound(d + 1) <= k.bound(d));
            }
        }
        prop_assert_eq!(k.mu > 0.0, lambda > k.disorder_threshold);
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn gaussian_formula_matches_oracle(
        u in -3.0f64..3.0,
        sigma in 0.2f64..2.0,
        l in 0usize..8,
        m in 0usize..8,
        vals in prop::collection::vec(-3.0f64..3.0, 16),
    ) {
        let g = gaussian_conditional(u, sigma, l, m, &vals[..m], &vals[8..8 + l]).unwrap();
        let (dv, dm) = g.discrepancy();
        let scale = 1.0 + g.variance.abs() + vals.iter().map(|v| v.abs()).sum::<f64>() * u.abs().max(1.0);
        prop_assert!(dv <= 1e-10 * scale && dm <= 1e-10 * scale, "dv {} dm {}", dv, dm);
        prop_assert!(g.variance > 0.0);
    }

    #[test]
    fn determinant_identity_all_l(u in -2.0f64..2.0, l in 1usize..12) {
        prop_assert!(a_l_determinants(u, l).unwrap().discrepancy() <= 1e-10);
    }

    #[test]
    fn weighted_average_positivity(vals in prop::collection::vec(-2.0f64..2.0, 2..5), x in -10i64..10, y in -10i64..10) {
        let sum: f64 = vals.iter().sum();
        prop_assume!(vals[0] != 0.0 && sum.abs() > 0.05);
        let u = SingleSitePotential::from_1d(&vals).unwrap();
        let r = w_xy(&u, &Site::d1(x), &Site::d1(y), &interval(-25, 25)).unwrap();
        prop_assert!(r.holds(1e-12), "margin {}", r.min_margin);
    }
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn counterexample_has_no_violations(
        vals in prop::collection::vec(prop_oneof![0.3f64..1.5, -1.5f64..-0.3], 2..4),
        dp in 0.05f64..0.2,
        extra in 0.0f64..0.2,
        seed in any::<u64>(),
    ) {
        let u = SingleSitePotential::from_1d(&vals).unwrap();
        match negexample_check(&u, dp + extra, dp, 50_000, seed) {
            Ok(r) => prop_assert_eq!(r.violations, 0),
            Err(alloylab::Error::Inconclusive(_)) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}

#[test]
fn free_operator_complexify_roundtrip() {
    let h = HamiltonianMatrix::from_diagonal(&interval(0, 3), &[0.0; 4]);
    let c = complexify(&h.matrix);
    assert!(c.iter().zip(h.matrix.iter()).all(|(a, b)| a.re == *b && a.im == 0.0));
}
