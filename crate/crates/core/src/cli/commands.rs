use std::path::PathBuf;

use serde_json::{json, Value};

use super::output::{curve_csv, table_csv, write_text};
use super::{resolve_out, RunConfig};
use crate::canonicalize::{
    balanced_rescale, canonicalize as canonicalize_measure, marginal_weights_with, validate_canonical,
    CanonicalizeConfig, DEFAULT_DISCRETIZATION,
};
use crate::error::{Error, Result};
use crate::estimation::{
    default_k, empirical_gamma, empirical_gamma_ratio, hill_estimator, sample_comonotone_pareto,
    sample_elliptical_t, sample_gumbel_pareto, sample_independent_pareto, stop_loss_check, tail_ratio_series,
    SampleCloud,
};
use crate::grid::{bivariate_grid, simplex_lattice};
use crate::models::{CovarianceMatrix, Model};
use crate::ordering::{
    apl_verdict, dependence_bounds_check, galpha_check, verdict_from_curves, MarginalTailRelation,
    OrderConfig,
};
use crate::quadrature::QuadConfig;
use crate::spectral::{DiscreteMeasure, Portfolio, SpectralMeasure, TailIndex, EXACT_TOL, QUADRATURE_TOL};

type Outcome = Result<(Value, Vec<PathBuf>)>;

const DEFAULT_GRID: usize = 201;
const DEFAULT_LATTICE: usize = 10;
const DEFAULT_SAMPLE_SIZE: usize = 100_000;

fn quad(cfg: &RunConfig) -> Result<QuadConfig> {
    match cfg.quad_tol {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            Err(Error::invalid("quadrature tolerance must be positive"))
        }
        Some(t) => Ok(QuadConfig::with_tol(t)),
        None => Ok(QuadConfig::default()),
    }
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::invalid(format!("missing required flag --{flag}")))
}

fn alphas(cfg: &RunConfig) -> Result<Vec<TailIndex>> {
    if cfg.alpha.is_empty() {
        return Err(Error::invalid("missing required flag --alpha"));
    }
    cfg.alpha.iter().map(|&a| TailIndex::new(a)).collect()
}

fn single_alpha(cfg: &RunConfig) -> Result<TailIndex> {
    match alphas(cfg)?.as_slice() {
        [a] => Ok(*a),
        _ => Err(Error::invalid("exactly one --alpha is expected")),
    }
}

/// Model from `--model` plus `--theta`, `--rho` and `--d`.
fn model_from(cfg: &RunConfig) -> Result<Model> {
    let spec = need(&cfg.model, "model")?;
    if spec.contains(':') {
        return spec.parse();
    }
    let model = match spec.to_ascii_lowercase().as_str() {
        "gumbel" => Model::Gumbel { theta: need(&cfg.theta, "theta")? },
        "galambos" => Model::Galambos { theta: need(&cfg.theta, "theta")? },
        "independent" | "independence" => Model::Independent { d: cfg.d.unwrap_or(2) },
        "comonotone" => Model::Comonotone { d: cfg.d.unwrap_or(2) },
        "elliptical" => {
            Model::Elliptical { covariance: CovarianceMatrix::bivariate(need(&cfg.rho, "rho")?)? }
        }
        other => return Err(Error::invalid(format!("unknown model family '{other}'"))),
    };
    model.validate()?;
    Ok(model)
}

fn grid_for(d: usize, cfg: &RunConfig) -> Result<Vec<Portfolio>> {
    if d == 2 {
        bivariate_grid(cfg.grid.unwrap_or(DEFAULT_GRID))
    } else {
        if cfg.grid.is_some() {
            return Err(Error::invalid("--grid applies to d = 2; use --lattice for d >= 3"));
        }
        simplex_lattice(d, cfg.lattice.unwrap_or(DEFAULT_LATTICE))
    }
}

fn model_tolerance(m: &Model) -> f64 {
    if m.is_quadrature_backed() {
        QUADRATURE_TOL
    } else {
        EXACT_TOL
    }
}

fn write_out(path: Option<PathBuf>, text: &str) -> Result<Vec<PathBuf>> {
    match path {
        Some(p) => {
            write_text(&p, text)?;
            Ok(vec![p])
        }
        None => Ok(Vec::new()),
    }
}

/// Curve families of the figure presets: (label, model, alpha).
fn preset_columns(name: &str) -> Result<Vec<(String, Model, f64)>> {
    let gumbel = |theta: f64, alpha: f64| {
        (format!("gumbel_theta{theta}_alpha{alpha}"), Model::Gumbel { theta }, alpha)
    };
    let elliptical = |rho: f64, alpha: f64| -> Result<(String, Model, f64)> {
        Ok((
            format!("elliptical_rho{rho}_alpha{alpha}"),
            Model::Elliptical { covariance: CovarianceMatrix::bivariate(rho)? },
            alpha,
        ))
    };
    let alpha_sweep = [0.5, 1.0, 2.0, 4.0, 8.0];
    let theta_sweep = [1.0, 1.4, 2.0, 3.0, 10.0];
    let rho_sweep = [-0.5, 0.0, 0.5, 0.9];
    Ok(match name {
        "figure1a" => alpha_sweep.iter().map(|&a| gumbel(1.4, a)).collect(),
        "figure1b" => alpha_sweep.iter().map(|&a| gumbel(2.0, a)).collect(),
        "figure1c" => theta_sweep.iter().map(|&t| gumbel(t, 2.0)).collect(),
        "figure1d" => theta_sweep.iter().map(|&t| gumbel(t, 0.5)).collect(),
        "figure2a" => rho_sweep.iter().map(|&r| elliptical(r, 0.5)).collect::<Result<_>>()?,
        "figure2b" => rho_sweep.iter().map(|&r| elliptical(r, 1.0)).collect::<Result<_>>()?,
        "figure2c" => rho_sweep.iter().map(|&r| elliptical(r, 2.0)).collect::<Result<_>>()?,
        "figure2d" => rho_sweep.iter().map(|&r| elliptical(r, 8.0)).collect::<Result<_>>()?,
        other => return Err(Error::invalid(format!("unknown preset '{other}'"))),
    })
}

pub(super) fn curve(cfg: &RunConfig) -> Outcome {
    let quad = quad(cfg)?;
    if let Some(preset) = &cfg.preset {
        let columns = preset_columns(preset)?;
        let grid = grid_for(2, cfg)?;
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for (label, model, alpha) in columns {
            let c = model.curve(TailIndex::new(alpha)?, &grid, &quad)?;
            labels.push(label);
            values.push(c.values);
        }
        let text = table_csv(&grid, &labels, &values);
        let outputs = write_out(resolve_out(cfg.out.as_deref(), &format!("{preset}.csv")), &text)?;
        return Ok((json!({ "preset": preset, "grid_points": grid.len(), "columns": labels }), outputs));
    }
    let model = model_from(cfg)?;
    let alphas = alphas(cfg)?;
    let grid = grid_for(model.dim(), cfg)?;
    let curves = alphas.iter().map(|&a| model.curve(a, &grid, &quad)).collect::<Result<Vec<_>>>()?;
    let text = if curves.len() == 1 {
        curve_csv(&curves[0])
    } else {
        let labels: Vec<String> = alphas.iter().map(|a| format!("alpha{}", a.value())).collect();
        let values: Vec<Vec<f64>> = curves.iter().map(|c| c.values.clone()).collect();
        table_csv(&grid, &labels, &values)
    };
    let outputs = write_out(resolve_out(cfg.out.as_deref(), "curve.csv"), &text)?;
    let summary: Vec<Value> = curves
        .iter()
        .map(|c| json!({ "alpha": c.alpha, "non_canonical": c.non_canonical, "values": c.values }))
        .collect();
    Ok((
        json!({
            "model": model.to_string(),
            "grid_points": grid.len(),
            "curves": summary,
        }),
        outputs,
    ))
}

pub(super) fn order(cfg: &RunConfig) -> Outcome {
    let quad = quad(cfg)?;
    let left: Model = need(&cfg.left, "left")?.parse()?;
    let right: Model = need(&cfg.right, "right")?.parse()?;
    if left.dim() != right.dim() {
        return Err(Error::DimensionMismatch { expected: left.dim(), found: right.dim() });
    }
    let alpha = single_alpha(cfg)?;
    let grid = grid_for(left.dim(), cfg)?;
    let ocfg = OrderConfig { tol: cfg.tol, quad };
    let wants_apl = cfg.alpha_right.is_some() || !cfg.lambda.is_empty();

    let (verdict, apl) = match (left.measure(&quad)?, right.measure(&quad)?) {
        (Some(lm), Some(rm)) => {
            let verdict = galpha_check(&lm, &rm, alpha, &grid, &ocfg)?;
            let apl = if wants_apl {
                let alpha_right = TailIndex::new(cfg.alpha_right.unwrap_or(alpha.value()))?;
                let margins = if cfg.lambda.is_empty() {
                    MarginalTailRelation::balanced(left.dim())
                } else {
                    MarginalTailRelation::new(cfg.lambda.clone())?
                };
                Some(apl_verdict(&lm, &rm, alpha, alpha_right, &margins, &grid, &ocfg)?)
            } else {
                None
            };
            (verdict, apl)
        }
        _ => {
            if wants_apl {
                return Err(Error::Unsupported(
                    "portfolio loss verdicts need spectral measures; elliptical models only have closed-form curves".into(),
                ));
            }
            let tol = cfg.tol.unwrap_or_else(|| model_tolerance(&left).max(model_tolerance(&right)));
            let lc = left.curve(alpha, &grid, &quad)?;
            let rc = right.curve(alpha, &grid, &quad)?;
            (verdict_from_curves(&lc.values, &rc.values, &grid, tol)?, None)
        }
    };
    let result = json!({
        "left": left.to_string(),
        "right": right.to_string(),
        "alpha": alpha,
        "verdict": verdict.relation,
        "order": verdict,
        "apl": apl,
    });
    let text = serde_json::to_string_pretty(&result)? + "\n";
    let outputs = write_out(resolve_out(cfg.out.as_deref(), "order.json"), &text)?;
    Ok((result, outputs))
}

pub(super) fn canonicalize(cfg: &RunConfig) -> Outcome {
    let quad = quad(cfg)?;
    let alpha = single_alpha(cfg)?;
    let measure = match &cfg.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            SpectralMeasure::Discrete(serde_json::from_str::<DiscreteMeasure>(&text)?)
        }
        None => model_from(cfg)?.measure(&quad)?.ok_or_else(|| {
            Error::Unsupported("the elliptical model has no explicit spectral measure".into())
        })?,
    };
    let nu = marginal_weights_with(&measure, alpha, &quad)?;
    let rescale = balanced_rescale(&nu, alpha)?;
    let ccfg = CanonicalizeConfig { atoms: cfg.atoms.unwrap_or(DEFAULT_DISCRETIZATION), quad };
    let canonical = canonicalize_measure(&measure, alpha, &ccfg)?;
    let tol = cfg.tol.unwrap_or(EXACT_TOL);
    let report = validate_canonical(&canonical, tol, &quad)?;
    let atoms = match &canonical {
        SpectralMeasure::Discrete(d) => d.clone(),
        _ => unreachable!("canonicalize returns atoms"),
    };
    let text = serde_json::to_string_pretty(&atoms)? + "\n";
    let outputs = write_out(resolve_out(cfg.out.as_deref(), "canonical.json"), &text)?;
    Ok((
        json!({
            "input_kind": measure.kind(),
            "marginal_weights": nu.values(),
            "balanced_rescale": rescale.values(),
            "atoms": atoms.atoms().len(),
            "total_mass": canonical.total_mass(),
            "validation": report,
        }),
        outputs,
    ))
}

fn simulate_cloud(cfg: &RunConfig, model: &Model, alpha: f64) -> Result<SampleCloud> {
    simulate_seeded(cfg, model, alpha, cfg.seed.unwrap_or(0))
}

fn simulate_seeded(cfg: &RunConfig, model: &Model, alpha: f64, seed: u64) -> Result<SampleCloud> {
    let n = cfg.n.unwrap_or(DEFAULT_SAMPLE_SIZE);
    match model {
        Model::Gumbel { theta } => sample_gumbel_pareto(*theta, alpha, cfg.d.unwrap_or(2), n, seed),
        Model::Independent { d } => sample_independent_pareto(alpha, *d, n, seed),
        Model::Comonotone { d } => sample_comonotone_pareto(alpha, *d, n, seed),
        Model::Elliptical { covariance } => sample_elliptical_t(covariance, alpha, n, seed),
        Model::Galambos { .. } => Err(Error::Unsupported("no sampler for the Galambos family".into())),
    }
}

pub(super) fn simulate(cfg: &RunConfig) -> Outcome {
    let model = model_from(cfg)?;
    let alpha = single_alpha(cfg)?;
    let path = resolve_out(cfg.out.as_deref(), "cloud.csv")
        .ok_or_else(|| Error::invalid("simulate needs --out (or APLORDER_OUTPUT_DIR)"))?;
    let cloud = simulate_cloud(cfg, &model, alpha.value())?;
    cloud.save(&path)?;
    Ok((
        json!({
            "model": cloud.model(),
            "n": cloud.n(),
            "d": cloud.d(),
            "seed": cloud.seed(),
        }),
        vec![path],
    ))
}

pub(super) fn estimate(cfg: &RunConfig) -> Outcome {
    if cfg.left.is_some() || cfg.right.is_some() {
        return compare_clouds(cfg);
    }
    let quad = quad(cfg)?;
    let model = cfg.model.as_ref().map(|_| model_from(cfg)).transpose()?;
    let cloud = match (&cfg.input, &model) {
        (Some(path), _) => SampleCloud::load(path, path.display().to_string(), cfg.seed.unwrap_or(0))?,
        (None, Some(m)) => simulate_cloud(cfg, m, single_alpha(cfg)?.value())?,
        (None, None) => return Err(Error::invalid("estimate needs --input or --model")),
    };
    let k = cfg.k.unwrap_or_else(|| default_k(cloud.n()));
    let portfolios: Vec<Portfolio> = if cloud.d() == 2 {
        let xs = if cfg.xi.is_empty() { vec![0.25, 0.5, 0.75] } else { cfg.xi.clone() };
        xs.into_iter().map(Portfolio::bivariate).collect::<Result<_>>()?
    } else {
        if !cfg.xi.is_empty() {
            return Err(Error::invalid("--xi lists bivariate portfolios; the cloud has d != 2"));
        }
        vec![Portfolio::uniform(cloud.d())?]
    };

    // analytic Ψ*g ratios when the generating model has a curve in this dimension
    let analytic = match (&model, cfg.alpha.first()) {
        (Some(m), Some(&a)) if m.dim() == cloud.d() => {
            let mut pts = portfolios.clone();
            pts.push(Portfolio::unit(cloud.d(), 0)?);
            let c = m.curve(TailIndex::new(a)?, &pts, &quad)?;
            let base = *c.values.last().expect("grid is non-empty");
            Some(c.values[..portfolios.len()].iter().map(|v| v / base).collect::<Vec<_>>())
        }
        _ => None,
    };

    let mut rows = Vec::new();
    let mut columns = vec![Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for (i, xi) in portfolios.iter().enumerate() {
        let g = empirical_gamma(&cloud, xi, k)?;
        let r = empirical_gamma_ratio(&cloud, xi, k)?;
        columns[0].push(g.value);
        columns[1].push(g.se);
        columns[2].push(r.value);
        columns[3].push(r.se);
        rows.push(json!({
            "xi": xi,
            "gamma": g,
            "ratio_to_e1": r,
            "analytic_ratio": analytic.as_ref().map(|a| a[i]),
        }));
    }
    let mut labels: Vec<String> =
        ["gamma", "gamma_se", "ratio", "ratio_se"].iter().map(|s| s.to_string()).collect();
    if let Some(a) = &analytic {
        labels.push("analytic_ratio".into());
        columns.push(a.clone());
    }
    let hill = (0..cloud.d()).map(|j| hill_estimator(&cloud.column(j)?, k)).collect::<Result<Vec<_>>>()?;
    let text = table_csv(&portfolios, &labels, &columns);
    let outputs = write_out(resolve_out(cfg.out.as_deref(), "estimate.csv"), &text)?;
    Ok((
        json!({
            "cloud": { "model": cloud.model(), "n": cloud.n(), "d": cloud.d(), "seed": cloud.seed() },
            "k": k,
            "estimates": rows,
            "hill_inverse_alpha": hill,
        }),
        outputs,
    ))
}

/// Tail ratios and stop-loss comparisons between clouds simulated from
/// `--left` (seed) and `--right` (seed + 1).
fn compare_clouds(cfg: &RunConfig) -> Outcome {
    let left: Model = need(&cfg.left, "left")?.parse()?;
    let right: Model = need(&cfg.right, "right")?.parse()?;
    let alpha = single_alpha(cfg)?;
    let seed = cfg.seed.unwrap_or(0);
    let x = simulate_seeded(cfg, &left, alpha.value(), seed)?;
    let y = simulate_seeded(cfg, &right, alpha.value(), seed.wrapping_add(1))?;
    check_same_dim(&x, &y)?;
    let portfolios: Vec<Portfolio> = if x.d() == 2 {
        let xs = if cfg.xi.is_empty() { vec![0.5] } else { cfg.xi.clone() };
        xs.into_iter().map(Portfolio::bivariate).collect::<Result<_>>()?
    } else {
        vec![Portfolio::uniform(x.d())?]
    };
    let levels = if cfg.levels.is_empty() { vec![0.99, 0.999] } else { cfg.levels.clone() };
    let comparisons = portfolios
        .iter()
        .map(|xi| {
            let ratios = tail_ratio_series(&x, &y, xi, &levels)?;
            let stop_loss =
                if cfg.u.is_empty() { None } else { Some(stop_loss_check(&x, &y, xi, &cfg.u, alpha)?) };
            Ok(json!({ "xi": xi, "tail_ratios": ratios, "stop_loss": stop_loss }))
        })
        .collect::<Result<Vec<_>>>()?;
    let result = json!({
        "left": { "model": x.model(), "n": x.n(), "seed": x.seed() },
        "right": { "model": y.model(), "n": y.n(), "seed": y.seed() },
        "alpha": alpha.value(),
        "comparisons": comparisons,
    });
    let text = serde_json::to_string_pretty(&result)? + "\n";
    let outputs = write_out(resolve_out(cfg.out.as_deref(), "compare.json"), &text)?;
    Ok((result, outputs))
}

fn check_same_dim(x: &SampleCloud, y: &SampleCloud) -> Result<()> {
    if x.d() == y.d() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: x.d(), found: y.d() })
    }
}

pub(super) fn bounds(cfg: &RunConfig) -> Outcome {
    let quad = quad(cfg)?;
    let model = model_from(cfg)?;
    let measure = model.measure(&quad)?.ok_or_else(|| {
        Error::Unsupported("dependence bounds need a measure on the nonnegative orthant".into())
    })?;
    let tol = cfg.tol.unwrap_or(measure.default_tolerance());
    let grid = grid_for(model.dim(), cfg)?;
    let reports = alphas(cfg)?
        .into_iter()
        .map(|a| {
            let r = dependence_bounds_check(&measure, a, &grid, tol, &quad)?;
            Ok(json!({ "alpha": a, "report": r }))
        })
        .collect::<Result<Vec<_>>>()?;
    let all_pass = reports.iter().all(|r| r["report"]["pass"].as_bool().unwrap_or(false));
    let result = json!({ "model": model.to_string(), "pass": all_pass, "checks": reports });
    let text = serde_json::to_string_pretty(&result)? + "\n";
    let outputs = write_out(resolve_out(cfg.out.as_deref(), "bounds.json"), &text)?;
    Ok((result, outputs))
}
