//! One function per subcommand: run the library check, fill a [`Report`].

use clap::Args;
use num_complex::Complex64;

use alloylab::averaging::graf_check;
use alloylab::averaging::instances::{random_check, Inequality};
use alloylab::density::DisorderDensity;
use alloylab::gaussian::{a_l_determinants, gaussian_conditional, holder_constant_probe, negexample_check};
use alloylab::green::identity_residuals;
use alloylab::green::instances::identity_instance;
use alloylab::lattice::{build_box, interval, Site};
use alloylab::model::{assemble_hamiltonian, free_path_spectrum, potential_on, ModelConfig};
use alloylab::moments::{apriori_trend, decay_profile, estimate_row, finite_volume_sum};
use alloylab::onedim::{gap_constants, one_d_constants};
use alloylab::poscomb::{find_i0, prop2_min, wegner_coefficients};
use alloylab::potential::SingleSitePotential;
use alloylab::rng::aux;
use alloylab::spectra::{eigenvalues, pair_regularity_probability, wegner_linearity, wegner_mc, RegularityReport};
use alloylab::ubar::{nonlocal_apriori_bound, w_xy};

use crate::report::{num, Check, Report};
use crate::{Context, Failure};

type Out = Result<Report, Failure>;

fn model_with(ctx: &Context, lambda: Option<f64>) -> Result<ModelConfig, Failure> {
    let m = &ctx.model_config()?.model;
    Ok(match lambda {
        Some(l) => m.with_lambda(l),
        None => m.clone(),
    })
}

fn site_label(s: &Site) -> String {
    s.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

fn origin_box(model: &ModelConfig, radius: i64) -> Result<alloylab::lattice::BoxGeometry, Failure> {
    Ok(build_box(radius, &Site::origin(model.dim))?)
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// Override the coupling λ of the configuration.
    #[arg(long)]
    lambda: Option<f64>,
    /// Cube radius (the cube has 2R+1 sites per axis).
    #[arg(long, default_value_t = 10)]
    radius: i64,
    /// Disorder trial index.
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

pub fn spectrum(ctx: &Context, a: &SpectrumArgs) -> Out {
    let model = model_with(ctx, a.lambda)?;
    let seed = if model.lambda == 0.0 { ctx.seed.unwrap_or(0) } else { ctx.seed()? };
    let cube = origin_box(&model, a.radius)?;
    let omega = model.sample_for(&cube, seed, a.trial);
    let h = assemble_hamiltonian(&model, &omega, &cube)?;
    let eigs = eigenvalues(&h);
    let mut r = Report::new("spectrum of the finite-volume operator; free path spectrum at zero coupling", &["index", "eigenvalue"]);
    for (i, e) in eigs.iter().enumerate() {
        r.row(vec![i.to_string(), num(*e)]);
    }
    let v_max = potential_on(&model, &omega, &cube)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let e_max = eigs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    r.checks.push(Check::at_most("gershgorin", e_max, 2.0 * model.dim as f64 + model.lambda * v_max));
    if model.lambda == 0.0 && model.dim == 1 {
        let dev = eigs.iter().zip(free_path_spectrum(eigs.len())).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.checks.push(Check::at_most("free_path_spectrum", dev, 1e-10));
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct IdentityArgs {
    /// Number of random operators.
    #[arg(long, default_value_t = 100)]
    instances: usize,
    /// Tolerance on the largest residual.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

pub fn green_identities(ctx: &Context, a: &IdentityArgs) -> Out {
    let mut rng = aux(ctx.seed()?, 1);
    let mut r = Report::new(
        "Schur complement, two-step Schur complement, first- and second-order resolvent identities",
        &["instance", "dim", "sites", "re_z", "im_z", "schur", "two_step", "first_order", "second_order"],
    );
    let mut worst: f64 = 0.0;
    for i in 0..a.instances {
        let inst = identity_instance(&mut rng);
        let res = identity_residuals(&inst.h, &inst.lambda, inst.z)?;
        worst = worst.max(res.max());
        r.row(vec![
            i.to_string(),
            inst.h.geometry.dim().to_string(),
            inst.h.len().to_string(),
            num(inst.z.re),
            num(inst.z.im),
            num(res.schur),
            num(res.two_step),
            num(res.first_order),
            num(res.second_order),
        ]);
    }
    r.checks.push(Check::at_most("max_residual", worst, a.tol));
    Ok(r)
}

#[derive(Args, Debug)]
pub struct AveragingArgs {
    /// Random instances per inequality.
    #[arg(long, default_value_t = 200)]
    instances: usize,
    /// Monte Carlo trials for the multi-variable average.
    #[arg(long, default_value_t = 2000)]
    mc_trials: usize,
}

pub fn averaging(ctx: &Context, a: &AveragingArgs) -> Out {
    let seed = ctx.seed()?;
    let mut r = Report::new(
        "averaging lemmas: determinant, resolvent norm, Graf bound, multi-variable determinant, non-monotone average",
        &["inequality", "instance", "integral", "error", "bound", "margin", "pass"],
    );
    for (k, which) in Inequality::ALL.into_iter().enumerate() {
        let mut rng = aux(seed, 40 + k as u64);
        let mut failures = 0;
        for i in 0..a.instances {
            let c = random_check(which, &mut rng, a.mc_trials, seed.wrapping_add(i as u64))?;
            failures += usize::from(!c.holds());
            r.row(vec![
                which.name().into(),
                i.to_string(),
                num(c.integral),
                num(c.error),
                num(c.bound),
                num(c.margin),
                c.holds().to_string(),
            ]);
        }
        r.checks.push(Check::at_most(format!("{}_failures", which.name()), failures as f64, 0.0));
    }
    let spot = graf_check(&DisorderDensity::uniform(0.0, 1.0)?, 0.5, Complex64::new(0.5, 0.0))?;
    r.checks.push(Check::at_most("graf_spot_deviation", (spot.integral - 2.0 * 2f64.sqrt()).abs(), 1e-8));
    r.checks.push(Check::at_most("graf_spot", spot.integral, spot.bound));
    Ok(r)
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    /// Disorder coupling λ; overrides the configuration.
    #[arg(long)]
    lambda: Option<f64>,
    /// Moment exponent s ∈ (0, 1).
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Cube radius.
    #[arg(long, default_value_t = 10)]
    radius: i64,
    /// Real part of the spectral parameter z.
    #[arg(long, default_value_t = 0.0)]
    re: f64,
    /// Imaginary part of the spectral parameter z.
    #[arg(long, default_value_t = 0.5)]
    im: f64,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Coupling multipliers for the monotonicity trend.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 4.0])]
    ladder: Vec<f64>,
}

pub fn moments(ctx: &Context, a: &MomentsArgs) -> Out {
    let seed = ctx.seed()?;
    let model = model_with(ctx, a.lambda)?;
    let cube = origin_box(&model, a.radius)?;
    let x = Site::origin(model.dim);
    let z = Complex64::new(a.re, a.im);
    let row = estimate_row(&model, &cube, z, a.s, &x, a.trials, seed)?;
    let mut r = Report::new("fractional moments E|G(z;x,y)|^s and their decrease with the coupling", &["y", "distance", "mean", "stderr"]);
    let far = row.iter().max_by_key(|e| e.y.dist_inf(&x)).map(|e| e.y.clone()).unwrap_or_else(|| x.clone());
    for e in &row {
        r.row(vec![site_label(&e.y), e.y.dist_inf(&x).to_string(), num(e.mean), num(e.stderr)]);
    }
    let couplings: Vec<f64> = a.ladder.iter().map(|k| k * model.lambda).collect();
    let trend = apriori_trend(&model, &cube, &x, &far, &[z], &couplings, a.s, a.trials, seed)?;
    for (lam, e) in &trend.by_coupling {
        r.note(format!("coupling {lam}: E|G(x,far)|^s = {} ± {}", num(e.mean), num(e.stderr)));
    }
    r.checks.push(Check::at_least("coupling_trend_nonincreasing", f64::from(u8::from(trend.nonincreasing)), 1.0));
    Ok(r)
}

#[derive(Args, Debug)]
pub struct DecayArgs {
    /// Disorder coupling λ; overrides the configuration.
    #[arg(long)]
    lambda: Option<f64>,
    /// Exponent s of the bound; the moment measured is s/n (s/(n+r) with gaps).
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Number of sites of the one-dimensional box.
    #[arg(long, default_value_t = 60)]
    sites: i64,
    /// Real part of the spectral parameter z.
    #[arg(long, default_value_t = 0.0)]
    re: f64,
    /// Imaginary part of the spectral parameter z.
    #[arg(long, default_value_t = 0.5)]
    im: f64,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 5000)]
    trials: usize,
}

pub fn decay(ctx: &Context, a: &DecayArgs) -> Out {
    let seed = ctx.seed()?;
    let model = model_with(ctx, a.lambda)?;
    if model.dim != 1 {
        return Err(Failure::Usage("decay needs a one-dimensional model".into()));
    }
    if a.sites < 2 {
        return Err(Failure::Usage("--sites must be at least 2".into()));
    }
    let (u, rho) = (&model.potential, &model.density);
    let mut r = Report::new("exponential decay of fractional moments in one dimension", &["distance", "mean", "stderr", "bound", "pass"]);
    let (exponent, from, bound): (f64, i64, Box<dyn Fn(usize) -> f64>) = match one_d_constants(u, rho, model.lambda, a.s) {
        Ok(k) => {
            r.note(format!(
                "connected support: C = {}, C+ = {}, mu = {}, threshold = {}",
                num(k.c),
                num(k.c_plus),
                num(k.mu),
                num(k.disorder_threshold)
            ));
            if model.lambda <= k.disorder_threshold {
                r.note("coupling at or below the threshold: mu <= 0, the bound does not decay");
            }
            (k.moment_exponent(), 2 * k.n as i64, Box::new(move |d| k.bound(d)))
        }
        Err(_) => {
            let g = gap_constants(u, rho, model.lambda, a.s, seed)?;
            r.note(format!("support with gap r = {}: D = {}, D+ = {}, m = {}", g.r, num(g.d), num(g.d_plus), num(g.m)));
            let span = (g.n + g.r) as i64;
            (g.moment_exponent(a.s), 2 * span, Box::new(move |d| g.bound(d)))
        }
    };
    let gamma = interval(0, a.sites - 1);
    let prof = decay_profile(&model, &gamma, &Site::d1(0), Complex64::new(a.re, a.im), exponent, a.trials, seed)?;
    let cmp = prof.compare(from, 3.0, &bound);
    for (e, d) in prof.estimates.iter().zip(&prof.distances) {
        let b = bound(*d as usize);
        let pass = if *d >= from { (e.upper(3.0) <= b).to_string() } else { String::new() };
        r.row(vec![d.to_string(), num(e.mean), num(e.stderr), num(b), pass]);
    }
    let worst = cmp.iter().map(|c| c.upper / c.bound).fold(0.0, f64::max);
    r.checks.push(Check::at_most("max_ratio_to_bound", worst, 1.0));
    if let Some(fit) = prof.fit {
        r.checks.push(Check::at_least("fitted_rate_positive", fit.slope, 0.0));
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct FiniteVolumeArgs {
    /// Disorder coupling λ; overrides the configuration.
    #[arg(long)]
    lambda: Option<f64>,
    /// Moment exponent s ∈ (0, 1).
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Radius of the cube Λ.
    #[arg(long, default_value_t = 12)]
    box_radius: i64,
    /// Radius L of the annulus around x.
    #[arg(long, default_value_t = 3)]
    radius: i64,
    /// Real part of the spectral parameter z.
    #[arg(long, default_value_t = 0.0)]
    re: f64,
    /// Imaginary part of the spectral parameter z.
    #[arg(long, default_value_t = 0.5)]
    im: f64,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Coupling multipliers for the trend.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 4.0])]
    ladder: Vec<f64>,
}

pub fn finite_volume(ctx: &Context, a: &FiniteVolumeArgs) -> Out {
    let seed = ctx.seed()?;
    let base = model_with(ctx, a.lambda)?;
    let cube = origin_box(&base, a.box_radius)?;
    let x = Site::origin(base.dim);
    let z = Complex64::new(a.re, a.im);
    let mut r = Report::new(
        "boundary sum of the finite-volume localization criterion",
        &["lambda", "raw_sum", "raw_stderr", "scaled", "scaled_stderr", "xi", "terms"],
    );
    let mut prev: Option<(f64, f64)> = None;
    let mut worst_rise = f64::NEG_INFINITY;
    for k in &a.ladder {
        let model = base.with_lambda(k * base.lambda);
        let f = finite_volume_sum(&model, &cube, &x, z, a.s, a.radius, a.trials, seed)?;
        r.row(vec![
            num(model.lambda),
            num(f.raw_sum),
            num(f.raw_stderr),
            num(f.scaled),
            num(f.scaled_stderr),
            num(f.xi),
            f.terms.len().to_string(),
        ]);
        if let Some((p, pe)) = prev {
            worst_rise = worst_rise.max(f.scaled - p - 3.0 * (pe + f.scaled_stderr));
        }
        prev = Some((f.scaled, f.scaled_stderr));
    }
    if a.ladder.len() > 1 {
        r.checks.push(Check::at_most("scaled_sum_rise_beyond_3sigma", worst_rise, 0.0));
    }
    r.note("the non-explicit prefactor of the criterion is not included");
    Ok(r)
}

#[derive(Args, Debug)]
pub struct WegnerArgs {
    /// Disorder coupling λ; overrides the configuration.
    #[arg(long)]
    lambda: Option<f64>,
    /// Cube radius l.
    #[arg(long, default_value_t = 6)]
    l: i64,
    /// Lower end of the energy interval.
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    a: f64,
    /// Upper end of the energy interval.
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    b: f64,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    /// Centre energy of the linearity test.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    energy: f64,
    /// Half-width of the linearity test interval.
    #[arg(long, default_value_t = 0.5)]
    half_width: f64,
    /// Largest derivative order searched for the leading derivative.
    #[arg(long, default_value_t = 6)]
    degree_cap: u32,
}

pub fn wegner(ctx: &Context, a: &WegnerArgs) -> Out {
    let seed = ctx.seed()?;
    let model = model_with(ctx, a.lambda)?;
    let lead = find_i0(&model.potential, a.degree_cap)?;
    let coeffs = wegner_coefficients(&model.potential, &lead, a.l)?;
    let w = wegner_mc(&model, &coeffs, a.a, a.b, a.trials, seed)?;
    let lin = wegner_linearity(&model, a.l, a.energy, a.half_width, a.trials, seed)?;
    let mut r = Report::new(
        "Wegner estimate from uniformly positive combinations of single-site potentials",
        &["interval_a", "interval_b", "mean_count", "stderr", "bound"],
    );
    r.row(vec![num(a.a), num(a.b), num(w.mean), num(w.stderr), num(w.abstract_bound)]);
    let (e, h) = (a.energy, a.half_width);
    r.row(vec![num(e - h), num(e + h), num(lin.wide.0), num(lin.wide.1), String::new()]);
    r.row(vec![num(e - h / 2.0), num(e + h / 2.0), num(lin.narrow.0), num(lin.narrow.1), String::new()]);
    r.note(format!("I0 = {:?}, c_u = {}, R = {}, total l1 = {}", lead.i0.0, num(lead.c_u), coeffs.radius, num(coeffs.total_l1)));
    r.checks.push(Check::at_most("mean_plus_3sigma", w.mean + 3.0 * w.stderr, w.abstract_bound));
    if lin.conclusive {
        r.checks.push(Check::at_least("linearity_ratio_low", lin.ratio, 1.5));
        r.checks.push(Check::at_most("linearity_ratio_high", lin.ratio, 2.5));
    } else {
        r.note(format!("linearity inconclusive (means within 20 stderr), ratio {}", num(lin.ratio)));
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct PoscombArgs {
    /// Inner cube radius l.
    #[arg(long, default_value_t = 5)]
    l: i64,
    /// Largest derivative order searched.
    #[arg(long, default_value_t = 6)]
    degree_cap: u32,
}

pub fn poscomb(ctx: &Context, a: &PoscombArgs) -> Out {
    let u = &ctx.model_config()?.model.potential;
    let lead = find_i0(u, a.degree_cap)?;
    let p = prop2_min(u, &lead, a.l)?;
    let mut r = Report::new(
        "leading derivative of the generating function and uniform positivity of the combination",
        &["l", "i0", "c_u", "radius", "min", "argmin", "truncation_bound"],
    );
    let i0 = lead.i0.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    r.row(vec![
        a.l.to_string(),
        i0.clone(),
        num(lead.c_u),
        p.radius.to_string(),
        num(p.min),
        site_label(&p.argmin),
        num(p.truncation_bound),
    ]);
    r.note(format!("I0 = ({i0}), c_u = {}, R_l = {}, min = {}", num(lead.c_u), p.radius, num(p.min)));
    r.checks.push(Check::at_least("uniform_positivity", p.min, 1.0 - 10.0 * p.truncation_bound));
    Ok(r)
}

#[derive(Args, Debug)]
pub struct RegularityArgs {
    /// Disorder coupling λ; overrides the configuration.
    #[arg(long)]
    lambda: Option<f64>,
    /// Cube radius.
    #[arg(long, default_value_t = 5)]
    radius: i64,
    /// ℓ∞ distance between the two cube centres [default: the minimum allowed].
    #[arg(long)]
    separation: Option<i64>,
    /// Lowest energy of the grid.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    e_min: f64,
    /// Highest energy of the grid.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    e_max: f64,
    /// Number of grid energies.
    #[arg(long, default_value_t = 21)]
    grid: usize,
    /// Decay rate m of the regularity condition.
    #[arg(long, default_value_t = 0.1)]
    m: f64,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 200)]
    trials: usize,
}

pub fn regularity(ctx: &Context, a: &RegularityArgs) -> Out {
    let seed = ctx.seed()?;
    let model = model_with(ctx, a.lambda)?;
    let sep = a.separation.unwrap_or(2 * a.radius + model.potential.diam_inf() + 1);
    let x = Site::origin(model.dim);
    let mut y = x.clone();
    y.0[0] = sep;
    let rep = pair_regularity_probability(&model, a.radius, &x, &y, (a.e_min, a.e_max), a.grid, a.m, a.trials, seed)?;
    let mut r = Report::new("probability that one of two distant cubes is (m, E)-regular", &["energy", "frequency"]);
    for (e, f) in rep.energies.iter().zip(&rep.per_energy) {
        r.row(vec![num(*e), num(*f)]);
    }
    r.note(format!("all grid energies: {} ± {} (grid spacing {})", num(rep.all_energies), num(rep.stderr), num(rep.grid_spacing)));
    r.note(RegularityReport::LIMITATION);
    let min_per = rep.per_energy.iter().copied().fold(f64::INFINITY, f64::min);
    r.checks.push(Check::at_most("joint_not_above_marginal", rep.all_energies, min_per));
    Ok(r)
}

#[derive(Args, Debug)]
pub struct ConditionalArgs {
    /// Largest one-sided window for the formula/oracle grid.
    #[arg(long, default_value_t = 6)]
    max_window: usize,
    /// Values of u(−1) on the grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0], allow_hyphen_values = true)]
    u: Vec<f64>,
    /// Standard deviations σ on the grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0])]
    sigma: Vec<f64>,
    /// Rejection attempts per block for the bounded-support counterexample.
    #[arg(long, default_value_t = 100_000)]
    attempts: usize,
    /// Half-width δ = δ′ of the conditioning intervals in the counterexample.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

pub fn conditional(ctx: &Context, a: &ConditionalArgs) -> Out {
    let seed = ctx.seed()?;
    let mut r = Report::new(
        "Gaussian conditional laws against the covariance oracle; determinant identity; bounded-support counterexample",
        &["l", "m", "u", "sigma", "variance", "oracle_variance", "mean", "oracle_mean"],
    );
    let (mut dv, mut dm) = (0.0f64, 0.0f64);
    for l in 0..=a.max_window {
        for m in 0..=a.max_window {
            for &u in &a.u {
                for &sigma in &a.sigma {
                    let vm: Vec<f64> = (0..m).map(|i| 0.3 * i as f64 - 0.7).collect();
                    let vp: Vec<f64> = (0..l).map(|i| 1.1 - 0.4 * i as f64).collect();
                    let g = gaussian_conditional(u, sigma, l, m, &vm, &vp)?;
                    let (v, mn) = g.discrepancy();
                    dv = dv.max(v);
                    dm = dm.max(mn);
                    r.row(vec![
                        l.to_string(),
                        m.to_string(),
                        num(u),
                        num(sigma),
                        num(g.variance),
                        num(g.oracle_variance),
                        num(g.mean),
                        num(g.oracle_mean),
                    ]);
                }
            }
        }
    }
    r.checks.push(Check::at_most("variance_vs_oracle", dv, 1e-10));
    r.checks.push(Check::at_most("mean_vs_oracle", dm, 1e-10));
    let mut dd: f64 = 0.0;
    for l in 1..=8 {
        for &u in &a.u {
            dd = dd.max(a_l_determinants(u, l)?.discrepancy());
        }
    }
    r.checks.push(Check::at_most("determinant_identity", dd, 1e-10));
    for &u in &a.u {
        let p = holder_constant_probe(u, 1.0, &[2, 4, 8, 16])?;
        let stds: Vec<String> = p.rows.iter().map(|row| num(row.min_std)).collect();
        r.note(format!("u(-1) = {u}: min conditional std for L = 2,4,8,16: {}; floor {}", stds.join(" "), num(p.uniform_floor)));
    }
    let neg = negexample_check(&SingleSitePotential::from_1d(&[1.0, -1.0])?, a.delta, a.delta, a.attempts, seed)?;
    r.note(format!(
        "counterexample u = (1, -1): m = {}, c = {}, s+ = {}, {} paired samples",
        num(neg.constants.m),
        num(neg.constants.c),
        num(neg.constants.s_plus),
        neg.pairs
    ));
    r.checks.push(Check::at_most("counterexample_violations", neg.violations as f64, 0.0));
    Ok(r)
}

#[derive(Args, Debug)]
pub struct AprioriArgs {
    /// Disorder coupling λ; overrides the configuration.
    #[arg(long)]
    lambda: Option<f64>,
    /// Moment exponent s ∈ (0, 1).
    #[arg(long, default_value_t = 1.0 / 3.0)]
    s: f64,
    /// Largest box size (one-dimensional) or cube radius (higher dimensions).
    #[arg(long, default_value_t = 40)]
    size: i64,
    /// Imaginary parts of the spectral parameter z.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.5, 1.0])]
    im: Vec<f64>,
    /// Real part of the spectral parameter z.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    re: f64,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 400)]
    trials: usize,
}

pub fn apriori(ctx: &Context, a: &AprioriArgs) -> Out {
    let seed = ctx.seed()?;
    let model = model_with(ctx, a.lambda)?;
    let b = nonlocal_apriori_bound(&model.potential, &model.density, model.lambda, a.s)?;
    let gamma = if model.dim == 1 { interval(0, a.size - 1) } else { origin_box(&model, a.size)? };
    let x = gamma.site(gamma.len() / 2).clone();
    let mut r = Report::new(
        "non-local a-priori bound for single-site potentials with non-zero mean",
        &["y", "re_z", "im_z", "mean", "stderr", "bound", "pass"],
    );
    let mut worst = f64::NEG_INFINITY;
    for &im in &a.im {
        let z = Complex64::new(a.re, im);
        for e in estimate_row(&model, &gamma, z, a.s, &x, a.trials, seed)? {
            let excess = e.mean - 3.0 * e.stderr - b.bound;
            worst = worst.max(excess);
            r.row(vec![site_label(&e.y), num(a.re), num(im), num(e.mean), num(e.stderr), num(b.bound), (excess <= 0.0).to_string()]);
        }
    }
    r.note(format!("bound = {}, mean of u = {}, weight sum = {}", num(b.bound), num(b.ubar), num(b.weight_sum)));
    r.checks.push(Check::at_most("mean_minus_3sigma_minus_bound", worst, 0.0));
    let wx = w_xy(&model.potential, &x, &x, &gamma)?;
    r.checks.push(Check::at_least("weighted_average_margin", wx.min_margin, -1e-12));
    Ok(r)
}
