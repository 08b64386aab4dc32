//! Acceptance suite. Runs without the libtest harness so that every check
//! prints exactly one PASS/FAIL line; exits non-zero if any check fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use aplorder::canonicalize::canonicalize_discrete;
use aplorder::estimation::{
    breiman_ratio, empirical_gamma_ratio, sample_comonotone_pareto, sample_gumbel_pareto,
    sample_independent_pareto, tail_ratio_series, MomentSource,
};
use aplorder::models::elliptical_value;
use aplorder::spectral::g_value;
use aplorder::{
    bivariate_grid, diversification_curve, diversification_curve_on, extreme_risk_index, galambos_bivariate,
    gumbel_bivariate, marginal_weights, psi_comonotone, psi_independent, random_simplex_grid,
    validate_canonical, CovarianceMatrix, Portfolio, QuadConfig, TailIndex,
};
use common::{elliptical_mc, random_balanced, random_canonical, rng, sum_pow};
use rand::Rng;

type Check = std::result::Result<String, String>;

fn alpha(a: f64) -> TailIndex {
    TailIndex::new(a).unwrap()
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn extreme_case_curves() -> Check {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let quad = QuadConfig::default();
    let mut worst: f64 = 0.0;
    for d in [2, 3, 5] {
        let grid =
            if d == 2 { bivariate_grid(201).unwrap() } else { random_simplex_grid(d, 201, 7).unwrap() };
        let indep = psi_independent(d).unwrap();
        let comon = psi_comonotone(d).unwrap();
        for a in [0.5, 1.0, 2.0, 8.0] {
            let ci = diversification_curve_on(&indep, alpha(a), &grid, &quad).unwrap();
            let cc = diversification_curve_on(&comon, alpha(a), &grid, &quad).unwrap();
            for (xi, (vi, vc)) in grid.iter().zip(ci.values.iter().zip(&cc.values)) {
                worst = worst.max((vi - sum_pow(xi, a)).abs()).max((vc - 1.0).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(
        worst <= TOL && elapsed < Duration::from_secs(1),
        format!("max error {worst:.2e} (tol {TOL:.0e}), {} ms (limit 1000)", elapsed.as_millis()),
    )
}

fn unit_index_indifference() -> Check {
    const QUAD_TOL: f64 = 1e-6;
    const EXACT: f64 = 1e-12;
    let grid = bivariate_grid(201).unwrap();
    let quad = QuadConfig::default();
    let mut worst_quad: f64 = 0.0;
    let models = [
        gumbel_bivariate(1.4).unwrap(),
        gumbel_bivariate(2.0).unwrap(),
        galambos_bivariate(0.5).unwrap(),
        galambos_bivariate(1.0).unwrap(),
    ];
    for m in &models {
        let c = diversification_curve_on(m, alpha(1.0), &grid, &quad).unwrap();
        for v in &c.values {
            worst_quad = worst_quad.max((v - 1.0).abs());
        }
    }
    let mut r = rng(11);
    let mut worst_exact: f64 = 0.0;
    for _ in 0..100 {
        let m = random_canonical(&mut r, 2, 12);
        let c = diversification_curve_on(&m, alpha(1.0), &grid, &quad).unwrap();
        for v in &c.values {
            worst_exact = worst_exact.max((v - 1.0).abs());
        }
    }
    ensure(
        worst_quad <= QUAD_TOL && worst_exact <= EXACT,
        format!(
            "copula curves max |v-1| {worst_quad:.2e} (tol {QUAD_TOL:.0e}), 100 discrete measures {worst_exact:.2e} (tol {EXACT:.0e})"
        ),
    )
}

fn dependence_sandwich() -> Check {
    const TOL: f64 = 1e-9;
    let grid = bivariate_grid(201).unwrap();
    let quad = QuadConfig::default();
    let mut r = rng(13);
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let m = random_canonical(&mut r, 2, 12);
        for a in [2.0, 0.5] {
            let c = diversification_curve_on(&m, alpha(a), &grid, &quad).unwrap();
            for (xi, v) in grid.iter().zip(&c.values) {
                let (lo, hi) = if a >= 1.0 { (sum_pow(xi, a), 1.0) } else { (1.0, sum_pow(xi, a)) };
                let gap = (lo - v).max(v - hi);
                worst = worst.max(gap);
                if gap > TOL {
                    violations += 1;
                }
            }
        }
    }
    ensure(
        violations == 0,
        format!("{violations} violations beyond {TOL:.0e} over 1000 measures x 2 tail indices (worst gap {worst:.2e})"),
    )
}

fn copula_monotonicity() -> Check {
    const TOL: f64 = 1e-8;
    let grid = bivariate_grid(201).unwrap();
    let thetas = [1.0, 1.4, 2.0, 3.0, 10.0];
    let curves = |a: f64| -> Vec<Vec<f64>> {
        thetas
            .iter()
            .map(|&t| diversification_curve(&gumbel_bivariate(t).unwrap(), alpha(a), 201).unwrap().values)
            .collect()
    };
    let (c4, c05) = (curves(4.0), curves(0.5));
    let mut worst: f64 = 0.0;
    for w in 0..thetas.len() - 1 {
        for i in 0..grid.len() {
            worst = worst.max(c4[w][i] - c4[w + 1][i]);
            worst = worst.max(c05[w + 1][i] - c05[w][i]);
        }
    }
    // sign of (θ=2 curve − independence curve) flips between α=2 and α=0.5
    let theta2 = gumbel_bivariate(2.0).unwrap();
    let indep = psi_independent(2).unwrap();
    let diff = |a: f64| -> Vec<f64> {
        let g = diversification_curve(&theta2, alpha(a), 201).unwrap().values;
        let i = diversification_curve(&indep, alpha(a), 201).unwrap().values;
        g.iter().zip(&i).map(|(x, y)| x - y).collect()
    };
    let (d2, d05) = (diff(2.0), diff(0.5));
    let flips = (1..grid.len() - 1).filter(|&i| d2[i] > TOL && d05[i] < -TOL).count();
    let interior = grid.len() - 2;
    ensure(
        worst <= TOL && flips == interior,
        format!(
            "max monotonicity violation {worst:.2e} (tol {TOL:.0e}); sign flip at {flips}/{interior} interior points"
        ),
    )
}

fn elliptical_closed_form() -> Check {
    const N: usize = 1_000_000;
    const SE_GATE: f64 = 3.0;
    let x1 = [0.1, 0.25, 0.5, 0.75, 0.9];
    let rhos = [-0.5, 0.0, 0.5, 0.9];
    let alphas = [0.5, 1.0, 2.0, 8.0];
    let mut worst_z: f64 = 0.0;
    let mut seed = 100;
    for &a in &alphas {
        for &rho in &rhos {
            let c = CovarianceMatrix::bivariate(rho).unwrap();
            let mc = elliptical_mc(rho, a, &x1, N, seed);
            seed += 1;
            for (&x, (m, se)) in x1.iter().zip(mc) {
                let v = elliptical_value(&c, alpha(a), &Portfolio::bivariate(x).unwrap()).unwrap();
                worst_z = worst_z.max((v - m).abs() / se);
            }
        }
    }
    // ordering in ρ holds in the same direction for every α
    let grid = bivariate_grid(201).unwrap();
    let mut ordered = true;
    for &a in &alphas {
        let curves: Vec<Vec<f64>> = rhos
            .iter()
            .map(|&r| {
                let c = CovarianceMatrix::bivariate(r).unwrap();
                grid.iter().map(|xi| elliptical_value(&c, alpha(a), xi).unwrap()).collect()
            })
            .collect();
        for w in curves.windows(2) {
            ordered &= w[0].iter().zip(&w[1]).all(|(lo, hi)| lo <= hi);
        }
    }
    let e1 = Portfolio::unit(2, 0).unwrap();
    let at_e1 = rhos.iter().all(|&r| {
        alphas.iter().all(|&a| {
            elliptical_value(&CovarianceMatrix::bivariate(r).unwrap(), alpha(a), &e1).unwrap() == 0.5
        })
    });
    ensure(
        worst_z <= SE_GATE && ordered && at_e1,
        format!(
            "max |closed form - MC| {worst_z:.2} SE (gate {SE_GATE}); ordered in rho for all alpha: {ordered}; value at e1 == 0.5: {at_e1}"
        ),
    )
}

fn canonicalization_consistency() -> Check {
    const TOL: f64 = 1e-12;
    let quad = QuadConfig::default();
    let grid = bivariate_grid(21).unwrap();
    let mut r = rng(17);
    let mut worst_gamma: f64 = 0.0;
    let mut worst_moment: f64 = 0.0;
    let mut all_pass = true;
    for i in 0..100 {
        let a = r.random_range(0.3..5.0);
        let m = random_balanced(&mut r, 2, a, i % 2 == 1);
        let nu = marginal_weights(&m, alpha(a)).unwrap();
        let canonical = canonicalize_discrete(&m, alpha(a)).unwrap();
        let report = validate_canonical(&canonical, TOL, &quad).unwrap();
        all_pass &= report.pass;
        worst_moment = worst_moment.max(report.max_deviation());
        for xi in &grid {
            let gamma = extreme_risk_index(&m, xi, alpha(a)).unwrap();
            let g = canonical.integrate(|s| g_value(xi.weights(), a, s), &quad).unwrap();
            worst_gamma = worst_gamma.max((gamma - nu.values()[0] * g).abs());
        }
    }
    ensure(
        worst_gamma <= TOL && all_pass,
        format!(
            "max |gamma - nu_1 * canonical g| {worst_gamma:.2e} (tol {TOL:.0e}); canonical moments max dev {worst_moment:.2e}"
        ),
    )
}

fn estimation_pipeline() -> Check {
    const SE_GATE: f64 = 3.0;
    const ANALYTIC: [(f64, f64); 3] =
        [(0.25, 0.942_704_906_797_742_2), (0.5, 0.923_606_542_396_989_5), (0.75, 0.942_704_906_797_742_2)];
    let start = Instant::now();
    let cloud = sample_gumbel_pareto(2.0, 2.0, 2, 1_000_000, 2024).unwrap();
    let mut worst_z: f64 = 0.0;
    let mut detail = Vec::new();
    for (x, target) in ANALYTIC {
        let est = empirical_gamma_ratio(&cloud, &Portfolio::bivariate(x).unwrap(), 1000).unwrap();
        let z = (est.value - target).abs() / est.se;
        worst_z = worst_z.max(z);
        detail.push(format!("{x}: {:.4}+-{:.4} vs {target:.4}", est.value, est.se));
    }
    let elapsed = start.elapsed();
    ensure(
        worst_z <= SE_GATE && elapsed < Duration::from_secs(60),
        format!(
            "{}; max {worst_z:.2} SE (gate {SE_GATE}); {:.1} s (limit 60)",
            detail.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn dependence_extremes_empirical() -> Check {
    const N: usize = 1_000_000;
    const LEVEL: f64 = 0.999;
    let xi = Portfolio::uniform(2).unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for (a, below) in [(2.0, true), (0.5, false)] {
        let x = sample_independent_pareto(a, 2, N, 31).unwrap();
        let y = sample_comonotone_pareto(a, 2, N, 32).unwrap();
        let s = tail_ratio_series(&x, &y, &xi, &[LEVEL]).unwrap();
        let p = &s.points[0];
        let (r, se) = (p.ratio.unwrap_or(f64::NAN), p.se.unwrap_or(f64::NAN));
        ok &= if below { r + 3.0 * se < 1.0 } else { r - 3.0 * se > 1.0 };
        detail.push(format!("alpha {a}: ratio {r:.3}+-{se:.3}"));
    }
    ensure(ok, format!("{} (independent vs comonotone, top 0.1%)", detail.join(", ")))
}

fn breiman_ratios() -> Check {
    const N: usize = 1_000_000;
    const REL: f64 = 0.01;
    let mut r = rng(41);
    let uniform: Vec<f64> = (0..N).map(|_| r.random::<f64>()).collect();
    let ones = vec![1.0; N];
    let twos = vec![2.0; N];
    let cases: [(&str, MomentSource, MomentSource, f64, f64); 4] = [
        ("constant 1/2, alpha 2", MomentSource::Sample(&ones), MomentSource::Sample(&twos), 2.0, 0.25),
        ("uniform/1, alpha 2", MomentSource::Sample(&uniform), MomentSource::Analytic(1.0), 2.0, 1.0 / 3.0),
        ("uniform/1, alpha 0.5", MomentSource::Sample(&uniform), MomentSource::Sample(&ones), 0.5, 2.0 / 3.0),
        (
            "uniform/constant 2, alpha 3",
            MomentSource::Sample(&uniform),
            MomentSource::Analytic(8.0),
            3.0,
            1.0 / 32.0,
        ),
    ];
    let mut worst: f64 = 0.0;
    for (_, v1, v2, a, target) in cases {
        let b = breiman_ratio(v1, v2, alpha(a)).unwrap();
        worst = worst.max((b.value / target - 1.0).abs());
    }
    ensure(worst <= REL, format!("max relative error {worst:.2e} over 4 cases (limit {REL})"))
}

fn run_cli(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_aplorder"))
        .args(args)
        .env("APLORDER_OUTPUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn cli_determinism() -> Check {
    let invocations: [&[&str]; 6] = [
        &[
            "simulate",
            "--model",
            "gumbel:2",
            "--alpha",
            "2",
            "--n",
            "20000",
            "--seed",
            "5",
            "--out",
            "cloud.csv",
        ],
        &[
            "estimate", "--model", "gumbel:2", "--alpha", "2", "--n", "20000", "--seed", "5", "--out",
            "est.csv",
        ],
        &["curve", "--preset", "figure1b", "--grid", "51", "--out", "fig.csv"],
        &["order", "--left", "gumbel:1.4", "--right", "gumbel:2", "--alpha", "8", "--out", "order.json"],
        &["canonicalize", "--model", "galambos:1", "--alpha", "2", "--atoms", "256", "--out", "canon.json"],
        &["bounds", "--model", "gumbel:3", "--alpha", "0.5,2", "--out", "bounds.json"],
    ];
    let mut identical = 0;
    let mut failures = Vec::new();
    for args in invocations {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (ra, rb) = (run_cli(args, a.path()), run_cli(args, b.path()));
        let name = args.last().unwrap();
        let same = ra.status.success()
            && rb.status.success()
            && std::fs::read(a.path().join(name)).ok() == std::fs::read(b.path().join(name)).ok()
            && a.path().join(name).exists();
        if same {
            identical += 1;
        } else {
            failures.push(args[0]);
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "{identical}/{} subcommands wrote byte-identical files across reruns {failures:?}",
            invocations.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let checks: [Criterion; 10] = [
        ("extreme_case_curves", extreme_case_curves),
        ("unit_index_indifference", unit_index_indifference),
        ("dependence_sandwich", dependence_sandwich),
        ("copula_monotonicity_and_phase_change", copula_monotonicity),
        ("elliptical_closed_form", elliptical_closed_form),
        ("canonicalization_consistency", canonicalization_consistency),
        ("estimation_pipeline", estimation_pipeline),
        ("dependence_extremes_empirical", dependence_extremes_empirical),
        ("breiman_ratios", breiman_ratios),
        ("cli_determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(msg) => println!("acceptance {:>2} {name}: PASS: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("acceptance {:>2} {name}: FAIL: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
