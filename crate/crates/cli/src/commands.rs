//! One function per subcommand. Each returns a [`CmdOutput`]; exit-code
//! policy lives in `main`.

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Map, Value};

use foldcrest_core::asymptotics::{
    f_mu_expansion, fold_distance, hopf_estimate, predict_first_pd, SectionPoint,
};
use foldcrest_core::bifurcation::{
    auto_bracket, compare_table_config, locate_pd_config, verification_config, PDSearchConfig,
    TABLE1_EPS,
};
use foldcrest_core::dynamics::{
    first_return, integrate, trajectory_csv, IntegratorConfig, SectionSpec, TrajectoryCsv,
};
use foldcrest_core::normalform::{
    closed_alpha2, closed_beta1, closed_beta2, eta_on_section, final_coeffs, nf_vector_field,
    staged_coeffs, MuQuadraticCoeffs, NormalFormCoeffs, E_INV,
};
use foldcrest_core::systems::{
    builtin_fhn, check_conditions, check_system, jet_analytic_fhn, jet_from_json, ConditionReport,
    Jet3,
};

use crate::output::{comparison_csv, format_eps, CmdOutput, RunManifest};
use crate::CliError;

/// Where the jet (and hence the coefficients) comes from.
pub struct SystemSource {
    pub label: String,
    pub jet: Jet3,
    pub report: ConditionReport,
}

pub fn resolve_source(system: &str, jet_path: Option<&PathBuf>) -> Result<SystemSource, CliError> {
    if let Some(path) = jet_path {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let (jet, file_report) = jet_from_json(&text)?;
        if !file_report.missing.is_empty() {
            eprintln!(
                "warning: jet fields defaulted to 0: {}",
                file_report.missing.join(", ")
            );
        }
        if !file_report.unknown.is_empty() {
            eprintln!("warning: unknown jet fields ignored: {}", file_report.unknown.join(", "));
        }
        Ok(SystemSource {
            label: format!("jet:{}", path.display()),
            report: check_conditions(&jet),
            jet,
        })
    } else if system == "fhn" {
        let jet = jet_analytic_fhn();
        Ok(SystemSource {
            label: "fhn".to_string(),
            report: check_system(&builtin_fhn(), &jet),
            jet,
        })
    } else {
        Err(CliError::Usage(format!(
            "unknown system '{system}' (built-in systems: fhn; or pass --jet <file>)"
        )))
    }
}

fn conditions_json(report: &ConditionReport) -> Value {
    let mut map = Map::new();
    for (name, c) in &report.conditions {
        map.insert(
            name.clone(),
            json!({"value": c.value, "passes": c.passes, "tolerance": c.tolerance}),
        );
    }
    Value::Object(map)
}

/// Applies `--set name=value` overrides to the final and order-mu^2
/// coefficient sets.
pub fn apply_overrides(
    coeffs: &mut NormalFormCoeffs,
    quad: &mut MuQuadraticCoeffs,
    sets: &[String],
) -> Result<(), CliError> {
    for spec in sets {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects name=value, got '{spec}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("--set {name}: '{value}' is not a number")))?;
        if !coeffs.set_by_name(name, value) && !quad.set_by_name(name, value) {
            return Err(CliError::Usage(format!("--set: unknown coefficient '{name}'")));
        }
    }
    Ok(())
}

pub fn coeffs_for(source: &SystemSource, sets: &[String]) -> Result<(NormalFormCoeffs, MuQuadraticCoeffs), CliError> {
    let mut coeffs = final_coeffs(&source.jet)?;
    let mut quad = MuQuadraticCoeffs::default();
    apply_overrides(&mut coeffs, &mut quad, sets)?;
    Ok((coeffs, quad))
}

pub fn cmd_coeffs(source: &SystemSource) -> Result<CmdOutput, CliError> {
    let manifest = RunManifest::new("coeffs").input("source", &source.label);
    let mut doc = Map::new();
    doc.insert("conditions".into(), conditions_json(&source.report));
    doc.insert("conditions_pass".into(), json!(source.report.passes()));
    doc.insert("D".into(), json!(source.jet.d()));

    if source.report.passes() {
        let staged = staged_coeffs(&source.jet, 1.0)?;
        let c = final_coeffs(&source.jet)?;
        doc.insert("scaling".into(), json!(staged.scaling));
        doc.insert("stage2".into(), json!(staged.stage2));
        doc.insert("stage3".into(), json!(staged.stage3));
        doc.insert("gamma".into(), json!(c.gamma));
        doc.insert("alpha1".into(), json!(c.alpha1));
        doc.insert("alpha2".into(), json!(c.alpha2));
        doc.insert("beta1".into(), json!(c.beta1));
        doc.insert("beta2".into(), json!(c.beta2));
        doc.insert("kappa".into(), json!(c.kappa));
        doc.insert("nu".into(), json!(c.nu));
        doc.insert(
            "closed_forms".into(),
            json!({
                "alpha2": closed_alpha2(&source.jet)?,
                "beta1": closed_beta1(&source.jet)?,
                "beta2": closed_beta2(&source.jet)?,
            }),
        );
    }
    Ok(CmdOutput { json: Some(Value::Object(doc)), csv: None, manifest })
}

pub fn cmd_predict(source: &SystemSource, eps: f64, sets: &[String]) -> Result<CmdOutput, CliError> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(CliError::Usage(format!("--eps {eps} out of range (0, 0.1)")));
    }
    let (coeffs, _) = coeffs_for(source, sets)?;
    let p = predict_first_pd(eps, &coeffs)?;
    let rho = fold_distance(p.delta_star, &source.jet)?;
    let manifest = RunManifest::new("predict")
        .input("source", &source.label)
        .input("eps", format_eps(eps));
    let doc = json!({
        "eps": eps,
        "zeta0_star": p.zeta0_star,
        "j0_star": p.j0_star,
        "delta_star": p.delta_star,
        "a_star": p.a_star,
        "fold_distance": rho,
        "hopf_estimate": hopf_estimate(eps),
        "coefficients": coeffs,
    });
    Ok(CmdOutput { json: Some(doc), csv: None, manifest })
}

pub fn cmd_verify(
    source: &SystemSource,
    eps: f64,
    bracket: Option<(f64, f64)>,
    param_tol: f64,
    rel_tol: Option<f64>,
    force: bool,
) -> Result<CmdOutput, CliError> {
    if source.label != "fhn" {
        return Err(CliError::Usage(
            "verify integrates the built-in FitzHugh-Nagumo system; only --system fhn is supported"
                .into(),
        ));
    }
    if !(eps > 0.0 && eps < 0.1) {
        return Err(CliError::Usage(format!("--eps {eps} out of range (0, 0.1)")));
    }
    if eps < 1e-4 && !force {
        return Err(CliError::Usage(format!(
            "--eps {eps} is below the numerical feasibility gate 1e-4; pass --force to override"
        )));
    }
    let (lo, hi) = match bracket {
        Some(b) => b,
        None => auto_bracket(eps)?,
    };
    let mut config = verification_config();
    if let Some(rel) = rel_tol {
        config = config.with_rel_tol(rel).with_abs_tol(rel * 1e-2);
    }
    config.validate()?;
    let search = PDSearchConfig { param_tol, ..PDSearchConfig::with_bracket(lo, hi) };
    let result = locate_pd_config(eps, &search, &config)?;
    let a_asym = predict_first_pd(eps, &NormalFormCoeffs::fhn())?.a_star;
    let diff = result.a_num - a_asym;

    let manifest = RunManifest::new("verify")
        .input("source", &source.label)
        .input("eps", format_eps(eps))
        .input("bracket", format!("{lo}:{hi}"))
        .input("param_tol", format!("{param_tol:e}"))
        .input("rel_tol", format!("{:e}", config.rel_tol));
    let doc = json!({
        "eps": eps,
        "a_num": result.a_num,
        "a_asym": a_asym,
        "diff": diff,
        "bracket": [lo, hi],
        "iterations": result.iterations,
        "multipliers": result.multipliers_at_a,
        "orbit": {
            "anchor": result.orbit.anchor,
            "period": result.orbit.period,
            "residual": result.orbit.residual,
        },
    });
    let csv = format!(
        "eps,a_num,a_asym,diff\n{},{:.14},{:.14},{:.6e}\n",
        format_eps(eps),
        result.a_num,
        a_asym,
        diff
    );
    Ok(CmdOutput { json: Some(doc), csv: Some(csv), manifest })
}

pub fn cmd_table1(numeric: bool, extra_eps: &[f64]) -> Result<CmdOutput, CliError> {
    let mut eps: Vec<f64> = TABLE1_EPS.to_vec();
    for &e in extra_eps {
        if !eps.contains(&e) {
            eps.push(e);
        }
    }
    eps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let numeric_upto = if numeric { 1e-2 } else { f64::INFINITY };
    let rows = compare_table_config(&eps, numeric_upto, &verification_config())?;
    let manifest = RunManifest::new("table1")
        .input("numeric", numeric)
        .input("eps", eps.iter().map(|e| format_eps(*e)).collect::<Vec<_>>().join(","));
    Ok(CmdOutput { json: Some(json!({ "rows": rows })), csv: Some(comparison_csv(&rows)), manifest })
}

pub fn cmd_sweep(eps_list: &[f64], numeric_upto: f64) -> Result<CmdOutput, CliError> {
    if eps_list.is_empty() {
        return Err(CliError::Usage("--eps-list must name at least one epsilon".into()));
    }
    let rows = compare_table_config(eps_list, numeric_upto, &verification_config())?;
    let manifest = RunManifest::new("sweep")
        .input("numeric_upto", format!("{numeric_upto:e}"))
        .input(
            "eps",
            eps_list.iter().map(|e| format_eps(*e)).collect::<Vec<_>>().join(","),
        );
    Ok(CmdOutput { json: Some(json!({ "rows": rows })), csv: Some(comparison_csv(&rows)), manifest })
}

pub fn cmd_simulate_nf(
    source: &SystemSource,
    mu: f64,
    sigma: f64,
    zeta0: f64,
    j0: f64,
    sets: &[String],
    traj_out: Option<&PathBuf>,
) -> Result<CmdOutput, CliError> {
    if !(j0 > 0.0 && j0 < E_INV) {
        return Err(CliError::Usage(format!("--j0 {j0} out of range (0, exp(-1))")));
    }
    let (coeffs, quad) = coeffs_for(source, sets)?;
    let field = nf_vector_field(coeffs, quad, mu, sigma);
    let eta0 = eta_on_section(j0)?;
    let start = [0.0, eta0, zeta0];
    let config = IntegratorConfig::default();

    let half = first_return(field, &SectionSpec::nf_s_plus(), start, &config, 0)?;
    let full = first_return(field, &SectionSpec::nf_s_minus(), start, &config, 0)?;
    let half_chart = SectionSpec::nf_s_plus().to_chart(&half.endpoint);
    let full_chart = SectionSpec::nf_s_minus().to_chart(&full.endpoint);

    let expansion = f_mu_expansion(SectionPoint::new(zeta0, j0), &coeffs, sigma)?;
    let manifest = RunManifest::new("simulate-nf")
        .input("source", &source.label)
        .input("mu", mu)
        .input("sigma", sigma)
        .input("zeta0", zeta0)
        .input("j0", j0);
    let doc = json!({
        "mu": mu,
        "sigma": sigma,
        "zeta0": zeta0,
        "j0": j0,
        "numeric": {
            "s_plus": {
                "dzeta": half_chart[0] - zeta0,
                "dj": half_chart[1] - j0,
                "time": half.return_time,
            },
            "s_minus_return": {
                "dzeta": full_chart[0] - zeta0,
                "dj": full_chart[1] - j0,
                "time": full.return_time,
            },
        },
        "asymptotic": {
            "k": expansion.k,
            "zeta1_3": expansion.zeta1_3,
            "j1_3": expansion.j1_3,
            "zeta2_3": expansion.zeta2_3,
            "j2_3": expansion.j2_3,
            "s_plus_dzeta": mu * expansion.zeta1_3 + mu * mu * expansion.zeta2_3,
            "s_plus_dj": mu * expansion.j1_3 + mu * mu * expansion.j2_3,
        },
    });

    if let Some(path) = traj_out {
        let traj = integrate(field, start, (0.0, full.return_time), &config)?;
        let csv = trajectory_csv(&traj, TrajectoryCsv::NormalForm);
        fs::write(path, &csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let sidecar = crate::output::sidecar_path(path);
        let m = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        fs::write(&sidecar, m + "\n")
            .map_err(|e| CliError::Io(format!("{}: {e}", sidecar.display())))?;
    }

    Ok(CmdOutput { json: Some(doc), csv: None, manifest })
}
