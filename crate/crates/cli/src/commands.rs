//! Subcommand implementations. Every CSV starts with a `config_hash` column.

use plantlab::duality::{
    random_matrix_fn, random_restriction_check, run_duality_lab_with, verify_duality, DYKSTRA_MAX_ITER, DYKSTRA_TOL,
    RATIO_FLOOR,
};
use plantlab::hypergraph::{load_count_cache, save_count_cache};
use plantlab::ldlr::{ldlr_advantage, spca_norm_analytic, tpca_norm_analytic, LdlrReport, Method, MAX_T_CAP};
use plantlab::models::{sample_planted, sample_uniform, write_instances_binary, write_instances_csv, InstanceHeader, PlantedModel};
use plantlab::pseudocal::{PseudoCalibration, PSD_TOL};
use plantlab::rng::{mix64, par_map, trial_rng};
use plantlab::robust::{default_config, default_scheme_kind, estimate_epsilon, SchemeKind, SubsampleScheme};
use plantlab::sos::{expected_kernel_dim, min_nonzero_eigenvalue, solution_moment_matrix, spectral_richness_fit, DistKind, RANK_TOL};
use serde_json::json;

use crate::config::Config;
use crate::output::OutDir;
use crate::CliError;

pub struct Ctx<'a> {
    pub cfg: &'a Config,
    pub seed: u64,
    pub hash: String,
    pub out: OutDir,
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// The model's `k`-like size parameter for sweep rows.
fn model_k(model: &PlantedModel) -> usize {
    match model {
        PlantedModel::Clique(p) => p.size,
        PlantedModel::Csp(p) => p.k,
        PlantedModel::Sbm(_) => 2,
        PlantedModel::Dks(p) => p.k,
        PlantedModel::Tpca(p) => p.k,
        PlantedModel::Spca(p) => p.k,
    }
}

fn model_lambda(model: &PlantedModel) -> f64 {
    match model {
        PlantedModel::Tpca(p) => p.lambda,
        PlantedModel::Spca(p) => p.lambda,
        _ => f64::NAN,
    }
}

pub fn ldlr_sweep(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let ns = cfg.require("n", cfg.usize_list("n")?)?;
    let ds = cfg.usize_list("d")?.unwrap_or(vec![4]);
    let method: Method = cfg.str("method")?.as_deref().unwrap_or("analytic").parse()?;
    let trials = cfg.u64("trials")?.unwrap_or(10_000);
    let t_cap = cfg.usize("t_cap")?;
    if let Some(t) = t_cap {
        if t > MAX_T_CAP {
            return Err(plantlab::Error::SpaceTooLarge { what: "t_cap".into(), size: t as f64, limit: MAX_T_CAP as f64 }.into());
        }
    }
    let exponents = cfg.f64_list("lambda_exponent")?;
    let lambdas = cfg.f64_list("lambda")?.unwrap_or(vec![1.0]);
    if exponents.is_some() && cfg.has("lambda") {
        return Err(CliError::Config("set either `lambda` or `lambda_exponent`, not both".into()));
    }
    let cache = cfg.str("count_cache")?;
    if let Some(path) = &cache {
        if std::path::Path::new(path).exists() {
            load_count_cache(path.as_ref())?;
        }
    }
    // build and validate every cell before running any of them
    let mut cells = Vec::new();
    for &n in &ns {
        let grid: Vec<f64> = match &exponents {
            Some(es) => es.iter().map(|e| (n as f64).powf(*e)).collect(),
            None => lambdas.clone(),
        };
        for &lambda in &grid {
            for &d in &ds {
                cells.push((cfg.model(n, Some(lambda))?, d));
            }
        }
    }
    let seed = ctx.seed;
    let reports: Vec<Result<LdlrReport, plantlab::Error>> = par_map(cells.len(), |i| {
        let (model, d) = &cells[i];
        match (method, t_cap, model) {
            (Method::Analytic, Some(t), PlantedModel::Tpca(_)) => tpca_norm_analytic(model, *d, t),
            (Method::Analytic, Some(t), PlantedModel::Spca(_)) => spca_norm_analytic(model, *d, t),
            _ => ldlr_advantage(model, *d, method, trials, mix64(seed ^ i as u64)),
        }
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &cache {
        save_count_cache(path.as_ref())?;
    }
    let mut rows = Vec::new();
    for r in &reports {
        for (t, c) in &r.per_t {
            rows.push(vec![
                ctx.hash.clone(),
                r.model.name().to_string(),
                r.model.n().to_string(),
                model_k(&r.model).to_string(),
                fmt(model_lambda(&r.model)),
                r.degree.to_string(),
                fmt(r.norm_sq),
                r.method.as_str().to_string(),
                t.to_string(),
                fmt(*c),
            ]);
        }
    }
    ctx.out.csv(
        "ldlr_sweep.csv",
        &["config_hash", "problem", "n", "k", "lambda", "d", "norm_sq", "method", "t", "contribution"],
        &rows,
    )?;
    ctx.out.json("ldlr_sweep.json", &json!({ "config_hash": ctx.hash, "reports": reports }))
}

pub fn pseudocal_check(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let n = cfg.require("n", cfg.usize("n")?)?;
    let d = cfg.usize("d")?.unwrap_or(1);
    let big_d = cfg.usize("big_d")?.unwrap_or(4);
    let samples = cfg.usize("samples")?.unwrap_or(50);
    let psd_tol = cfg.f64("psd_tol")?.unwrap_or(PSD_TOL);
    let model = cfg.model(n, None)?;
    let pc = PseudoCalibration::new(&model, d, big_d)?;
    let seed = ctx.seed;
    let reports = par_map(samples, |t| {
        let inst = sample_uniform(&model, &mut trial_rng(seed, t as u64));
        pc.check(&inst, psd_tol)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(t, r)| {
            vec![
                ctx.hash.clone(),
                t.to_string(),
                fmt(r.min_eig),
                fmt(r.min_eig_rel),
                fmt(r.lambda_00),
                fmt(r.objective),
                fmt(r.residual),
                r.certified_value.map(fmt).unwrap_or_default(),
            ]
        })
        .collect();
    ctx.out.csv(
        "pseudocal_check.csv",
        &["config_hash", "sample", "min_eig", "min_eig_rel", "lambda_00", "objective", "residual", "certified_value"],
        &rows,
    )?;
    if cfg.bool("dump_matrix")?.unwrap_or(false) && samples > 0 {
        let inst = sample_uniform(&model, &mut trial_rng(seed, 0));
        let m = pc.eval(&inst)?.matrix;
        let tuple = |r: usize| {
            let parts: Vec<String> = m.index.tuple(r).iter().map(u32::to_string).collect();
            format!("({})", parts.join(" "))
        };
        let mut rows = Vec::new();
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                rows.push(vec![ctx.hash.clone(), tuple(i), tuple(j), fmt(m.data[(i, j)])]);
            }
        }
        ctx.out.csv("moment_matrix.csv", &["config_hash", "row", "col", "value"], &rows)?;
    }
    let failures = reports.iter().filter(|r| r.certified_value.is_none()).count();
    ctx.out.json(
        "pseudocal_check.json",
        &json!({
            "config_hash": ctx.hash,
            "model": model,
            "d": d,
            "big_d": big_d,
            "psd_tol": psd_tol,
            "psd_failures": failures,
            "entries": reports,
        }),
    )
}

fn scheme_from(cfg: &Config, model: &PlantedModel, default: Option<SubsampleScheme>) -> Result<SubsampleScheme, CliError> {
    let kind: SchemeKind = match cfg.str("scheme")? {
        Some(s) => s.parse()?,
        None => default.map(|s| s.kind).unwrap_or_else(|| default_scheme_kind(model)),
    };
    // a rho grid is swept by the caller; the scheme carries its first point
    let first = cfg.f64_list("rho")?.and_then(|v| v.first().copied());
    let rho = first.or(default.map(|s| s.rho)).unwrap_or(0.5);
    let scheme = SubsampleScheme::new(kind, rho)?;
    scheme.check_compatible(&model.scheme())?;
    Ok(scheme)
}

pub fn duality_lab(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let n = cfg.require("n", cfg.usize("n")?)?;
    let d = cfg.usize("d")?.unwrap_or(1);
    let big_d = cfg.usize("big_d")?.unwrap_or(2);
    let model = cfg.model(n, None)?;
    let scheme = scheme_from(cfg, &model, None)?;
    let max_iter = cfg.usize("max_iter")?.unwrap_or(DYKSTRA_MAX_ITER);
    let tol = cfg.f64("tol")?.unwrap_or(DYKSTRA_TOL);
    let (build, primal, _dual, report) = run_duality_lab_with(&model, &scheme, d, big_d, max_iter, tol)?;
    let verdict = verify_duality(primal.opt, report.dual_value, RATIO_FLOOR);
    let draws = cfg.usize("samples")?.unwrap_or(0);
    let mut restrictions = Vec::new();
    for i in 0..draws {
        let r = random_matrix_fn(&build.lambda, mix64(ctx.seed ^ i as u64));
        restrictions.push(random_restriction_check(&build.pieces, &r, &model, &scheme, big_d)?);
    }
    let rows: Vec<Vec<String>> = primal
        .trace
        .iter()
        .map(|t| vec![ctx.hash.clone(), t.iteration.to_string(), fmt(t.primal_residual), fmt(t.psd_residual)])
        .collect();
    ctx.out.csv("duality_trace.csv", &["config_hash", "iteration", "primal_residual", "psd_residual"], &rows)?;
    ctx.out.json(
        "duality_report.json",
        &json!({
            "config_hash": ctx.hash,
            "model": model,
            "scheme": scheme,
            "d": d,
            "big_d": big_d,
            "report": report,
            "verdict": verdict,
            "restrictions": restrictions,
        }),
    )
}

pub fn robust_check(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let problem = cfg.require("problem", cfg.str("problem")?)?;
    let base = default_config(&problem).ok();
    let model = match (cfg.usize("n")?, &base) {
        (None, Some(b)) => b.model.clone(),
        (n, _) => cfg.model(cfg.require("n", n)?, None)?,
    };
    let scheme = scheme_from(cfg, &model, base.as_ref().map(|b| b.scheme))?;
    let threshold = cfg.require("threshold", cfg.f64("threshold")?.or(base.as_ref().map(|b| b.threshold)))?;
    let trials = cfg.u64("trials")?.or(base.as_ref().map(|b| b.trials)).unwrap_or(1000);
    let target = cfg.f64("target")?.or(base.as_ref().map(|b| b.target));
    let rhos = cfg.f64_list("rho")?.unwrap_or(vec![scheme.rho]);
    let mut reports = Vec::new();
    for rho in rhos {
        let s = SubsampleScheme::new(scheme.kind, rho)?;
        reports.push(estimate_epsilon(&model, &s, threshold, trials, ctx.seed)?);
    }
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                ctx.hash.clone(),
                r.model.name().to_string(),
                r.model.n().to_string(),
                fmt(r.scheme.rho),
                fmt(r.threshold),
                r.trials.to_string(),
                r.failures.to_string(),
                fmt(r.eps_hat),
                fmt(r.ci_lo),
                fmt(r.ci_hi),
            ]
        })
        .collect();
    ctx.out.csv(
        "robust_check.csv",
        &["config_hash", "problem", "n", "rho", "threshold", "trials", "failures", "eps_hat", "ci_lo", "ci_hi"],
        &rows,
    )?;
    let below: Vec<Option<bool>> = reports.iter().map(|r| target.map(|t| r.eps_hat <= t)).collect();
    ctx.out.json(
        "robust_check.json",
        &json!({ "config_hash": ctx.hash, "target": target, "below_target": below, "reports": reports }),
    )
}

pub fn moments_check(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let kind: DistKind = cfg.require("kind", cfg.str("kind")?)?.parse()?;
    let ns = cfg.require("n", cfg.usize_list("n")?)?;
    let d = cfg.usize("d")?.unwrap_or(1);
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for &n in &ns {
        let dist = kind.at(n);
        let x = solution_moment_matrix(&dist, d)?;
        let s = min_nonzero_eigenvalue(&x, RANK_TOL)?;
        rows.push(vec![
            ctx.hash.clone(),
            cfg.str("kind")?.unwrap_or_default(),
            n.to_string(),
            dist.k().map(|k| k.to_string()).unwrap_or_default(),
            d.to_string(),
            fmt(s.min_nonzero),
            s.kernel_dim.to_string(),
        ]);
        entries.push(json!({
            "distribution": dist,
            "spectrum": s,
            "expected_kernel_dim": expected_kernel_dim(&dist, d),
        }));
    }
    ctx.out.csv(
        "moments_check.csv",
        &["config_hash", "kind", "n", "k", "d", "lambda_min_nonzero", "kernel_dim"],
        &rows,
    )?;
    let mut distinct = ns.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let fit = if distinct.len() >= 3 { Some(spectral_richness_fit(kind, d, &ns)?) } else { None };
    ctx.out.json("moments_check.json", &json!({ "config_hash": ctx.hash, "entries": entries, "fit": fit }))
}

pub fn sample(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let n = cfg.require("n", cfg.usize("n")?)?;
    let count = cfg.usize("samples")?.unwrap_or(1);
    let planted = cfg.bool("planted")?.unwrap_or(false);
    let format = cfg.str("format")?.unwrap_or_else(|| "csv".into());
    let model = cfg.model(n, None)?;
    let seed = ctx.seed;
    let drawn = par_map(count, |t| {
        let mut rng = trial_rng(seed, t as u64);
        if planted {
            sample_planted(&model, &mut rng).map(|(i, s)| (i, Some(s)))
        } else {
            Ok((sample_uniform(&model, &mut rng), None))
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let header = InstanceHeader::for_model(&model);
    let instances: Vec<_> = drawn.iter().map(|(i, _)| i.clone()).collect();
    match format.as_str() {
        "csv" => ctx.out.write("instances.csv", |w| Ok(write_instances_csv(w, &header, &instances)?))?,
        "binary" => ctx.out.write("instances.bin", |w| Ok(write_instances_binary(w, &header, &instances)?))?,
        other => return Err(CliError::Config(format!("unknown format `{other}` (csv or binary)"))),
    }
    if planted {
        let rows: Vec<Vec<String>> = drawn
            .iter()
            .enumerate()
            .map(|(t, (_, s))| {
                let x: Vec<String> = s.as_ref().map(|s| s.x.iter().map(|v| v.to_string()).collect()).unwrap_or_default();
                vec![ctx.hash.clone(), t.to_string(), x.join(" ")]
            })
            .collect();
        ctx.out.csv("solutions.csv", &["config_hash", "sample", "x"], &rows)?;
    }
    ctx.out.json(
        "sample_manifest.json",
        &json!({ "config_hash": ctx.hash, "seed": seed, "count": count, "planted": planted, "header": header }),
    )
}
