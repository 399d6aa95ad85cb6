//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test -p foldcrest-cli --test acceptance`
//! (add `-- --nocapture` to see the lines as they go).

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use foldcrest_core::asymptotics::{a_of, predict_first_pd};
use foldcrest_core::bifurcation::{hopf_locate, nf_pd_check};
use foldcrest_core::dynamics::{first_return, integrate, IntegratorConfig, SectionSpec};
use foldcrest_core::normalform::{
    closed_alpha2, closed_beta1, closed_beta2, eta_on_section, final_coeffs, j_of,
    nf_vector_field, sample_admissible_jet, MuQuadraticCoeffs, NormalFormCoeffs,
};
use foldcrest_core::systems::builtin_fhn;

fn foldcrest(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_foldcrest"))
        .args(args)
        .output()
        .expect("binary runs")
}

struct Criterion {
    id: usize,
    name: &'static str,
}

impl Criterion {
    fn new(id: usize, name: &'static str) -> Self {
        Self { id, name }
    }

    fn check(&self, label: &str, ok: bool, detail: String) {
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("[acceptance] criterion {}: {verdict} — {} [{label}] {detail}", self.id, self.name);
        assert!(ok, "criterion {} [{label}]: {detail}", self.id);
    }
}

#[test]
fn criterion_1_table1_asymptotics() {
    let c = Criterion::new(1, "table1 reproduces the reference a_asym column to 1e-12");
    let out = foldcrest(&["table1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let reference = [
        (1e-2, 0.99094938062714),
        (1e-4, 0.99986822927480),
        (1e-6, 0.99999828163419),
        (1e-8, 0.99999997885883),
        (1e-10, 0.99999999974928),
        (1e-12, 0.99999999999710),
    ];
    for (eps, a_ref) in reference {
        let prefix = format!("{eps:e},");
        let row = text.lines().find(|l| l.starts_with(&prefix)).expect("row present");
        let a: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        let delta = (a - a_ref).abs();
        c.check(&format!("eps={eps:e}"), delta < 1e-12, format!("a_asym={a:.14}, |delta|={delta:.2e}"));
    }
}

#[test]
fn criterion_2_numeric_pd_at_desk_scale() {
    let c = Criterion::new(2, "verify at eps=1e-2 matches the reference a_num to 1e-6");
    let out = foldcrest(&["verify", "--system", "fhn", "--eps", "1e-2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let a_num = doc["a_num"].as_f64().unwrap();
    let diff = doc["diff"].as_f64().unwrap();
    let da = (a_num - 0.99092058501692).abs();
    c.check("a_num", da < 1e-6, format!("a_num={a_num:.14}, |delta|={da:.2e}"));
    // The reference table prints the magnitude of the difference column.
    let dd = (diff.abs() - 2.8796e-5).abs();
    c.check("diff", dd < 1e-6, format!("a_num-a_asym={diff:.6e}, |delta|={dd:.2e}"));
}

/// Stretch target: numeric location at eps = 1e-4 within 1e-7. Expect up to
/// an hour of runtime; run explicitly with
/// `cargo test -p foldcrest-cli --test acceptance --release -- --ignored`.
#[test]
#[ignore]
fn criterion_2_stretch_numeric_pd_at_eps_1e4() {
    let c = Criterion::new(2, "stretch: verify at eps=1e-4 matches the reference a_num to 1e-7");
    let out = foldcrest(&["verify", "--system", "fhn", "--eps", "1e-4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let a_num = doc["a_num"].as_f64().unwrap();
    let da = (a_num - 0.99986818929447).abs();
    c.check("a_num", da < 1e-7, format!("a_num={a_num:.14}, |delta|={da:.2e}"));
}

#[test]
fn criterion_3_coefficient_pipeline_exact() {
    let c = Criterion::new(3, "FitzHugh-Nagumo coefficients are exact");
    let coeffs = final_coeffs(&foldcrest_core::jet_analytic_fhn()).unwrap();
    let checks = [
        ("gamma", coeffs.gamma, -1.0 / 3.0),
        ("alpha1", coeffs.alpha1, -0.5),
        ("alpha2", coeffs.alpha2, -0.5),
        ("beta1", coeffs.beta1, -0.5),
        ("beta2", coeffs.beta2, -0.5),
        ("kappa", coeffs.kappa, 2.0),
        ("nu", coeffs.nu, 0.0),
        ("gamma0_of(1)", coeffs.gamma0_of(1.0), 2.0),
        ("gamma0_of(0.37)", coeffs.gamma0_of(0.37), 0.74),
    ];
    for (name, got, want) in checks {
        let delta = (got - want).abs();
        c.check(name, delta < 1e-14, format!("{got} vs {want}"));
    }
}

#[test]
fn criterion_4_closed_form_cross_check() {
    let c = Criterion::new(4, "pipeline equals closed determinant forms on 1000 random jets");
    let mut rng = ChaCha8Rng::seed_from_u64(0xf01d_c4e5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let jet = sample_admissible_jet(|| rng.gen_range(-2.0..2.0));
        let coeffs = final_coeffs(&jet).expect("admissible jet");
        let pairs = [
            (coeffs.beta1, closed_beta1(&jet).unwrap()),
            (coeffs.alpha2, closed_alpha2(&jet).unwrap()),
            (coeffs.beta2, closed_beta2(&jet).unwrap()),
        ];
        for (pipeline, closed) in pairs {
            let rel = (pipeline - closed).abs() / pipeline.abs().max(1e-12);
            worst = worst.max(rel);
        }
    }
    c.check("1000 jets", worst < 1e-10, format!("worst relative mismatch {worst:.3e}"));
}

#[test]
fn criterion_5_conservation_and_symmetry() {
    let c = Criterion::new(5, "J conservation, flow symmetry, unperturbed identity map");
    let coeffs = NormalFormCoeffs::fhn();
    let quad = MuQuadraticCoeffs::default();
    let config = IntegratorConfig::default();

    // J drift over one full return at mu = 0.
    let field0 = nf_vector_field(coeffs, quad, 0.0, 0.0);
    let start = [0.0, -0.5, 0.0];
    let j0 = j_of(start.into());
    let ret = first_return(field0, &SectionSpec::nf_s_minus(), start, &config, 0).unwrap();
    let drift = (j_of(ret.endpoint.into()) - j0).abs();
    c.check("J drift", drift < 1e-9, format!("{drift:.3e}"));

    // Flow symmetry under (xi, tau, mu) -> (-xi, -tau, -mu).
    let (mu, sigma, t_end) = (0.05, 0.4, 5.0);
    let fwd = integrate(nf_vector_field(coeffs, quad, mu, sigma), [0.3, -0.4, 0.2], (0.0, t_end), &config).unwrap();
    let bwd = integrate(nf_vector_field(coeffs, quad, -mu, sigma), [-0.3, -0.4, 0.2], (0.0, -t_end), &config).unwrap();
    let a = fwd.end_state();
    let b = bwd.end_state();
    let sym = (a[0] + b[0]).abs().max((a[1] - b[1]).abs()).max((a[2] - b[2]).abs());
    c.check("symmetry", sym < 1e-7, format!("max mismatch {sym:.3e}"));

    // P(0) = identity on (zeta, J).
    let section = SectionSpec::nf_s_minus();
    let start = section.from_chart([0.7, 0.2]).unwrap();
    let ret = first_return(field0, &section, start, &config, 0).unwrap();
    let chart = section.to_chart(&ret.endpoint);
    let idstat = (chart[0] - 0.7).abs().max((chart[1] - 0.2).abs());
    c.check("P(0)=id", idstat < 1e-8, format!("max chart deviation {idstat:.3e}"));
}

#[test]
fn criterion_6_asymptotic_map_convergence() {
    let c = Criterion::new(6, "numeric dJ/mu converges to A(zeta0) as mu shrinks");
    let a_expected = a_of(0.0, &NormalFormCoeffs::fhn(), 0.0);
    let mut errors = Vec::new();
    for mu in ["1e-2", "3e-3", "1e-3"] {
        let out = foldcrest(&["simulate-nf", "--mu", mu, "--sigma", "0", "--zeta0", "0", "--j0", "1e-3"]);
        assert!(out.status.success());
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let dj = doc["numeric"]["s_plus"]["dj"].as_f64().unwrap();
        let mu_val: f64 = mu.parse().unwrap();
        errors.push(((dj / mu_val) - a_expected).abs() / a_expected);
    }
    let monotone = errors[0] >= errors[1] - 1e-9 && errors[1] >= errors[2] - 1e-9;
    c.check(
        "monotone",
        monotone,
        format!("errors {:.4}, {:.4}, {:.4}", errors[0], errors[1], errors[2]),
    );
    c.check("final error", errors[2] < 0.25, format!("{:.4} (O(k) budget 0.25)", errors[2]));
}

#[test]
fn criterion_7_normal_form_pd_cross_validation() {
    let c = Criterion::new(7, "normal-form sigma_pd agrees with delta* to 15%");
    let mu = 0.1;
    let result = nf_pd_check(mu, &NormalFormCoeffs::fhn()).unwrap();
    let delta_star = predict_first_pd(mu * mu, &NormalFormCoeffs::fhn()).unwrap().delta_star;
    let delta_num = result.a_num * mu * mu;
    let rel = (delta_num / delta_star - 1.0).abs();
    c.check(
        "sigma_pd",
        rel < 0.15,
        format!("sigma_pd*mu^2 = {delta_num:.6e} vs delta* = {delta_star:.6e} ({rel:.3} rel)"),
    );
}

#[test]
fn criterion_8_hopf_onset() {
    let c = Criterion::new(8, "numeric oscillation onset within 5e-4 of a_H = 0.9975");
    let a_hopf = hopf_locate(&builtin_fhn(), 1e-2).unwrap();
    let delta = (a_hopf - 0.9975).abs();
    c.check("hopf", delta < 5e-4, format!("a_H = {a_hopf:.8}, |delta| = {delta:.2e}"));
}

// Sanity for the eta solve used throughout the suite.
#[test]
fn section_inverse_sanity() {
    let eta0 = eta_on_section(1e-3).unwrap();
    assert!((j_of([0.0, eta0, 0.0].into()) - 1e-3).abs() < 1e-15);
}
