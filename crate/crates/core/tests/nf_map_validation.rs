//! Cross-validation of the numerically integrated normal form against the
//! asymptotic map machinery.

use foldcrest_core::asymptotics::{a_of, predict_first_pd, solve_fixed_point};
use foldcrest_core::bifurcation::{nf_pd_check, nf_pd_check_windowed};
use foldcrest_core::dynamics::{
    find_periodic_orbit, first_return, integrate, return_map_jacobian, IntegratorConfig,
    SectionSpec,
};
use foldcrest_core::error::Error;
use foldcrest_core::normalform::{
    eta_on_section, j_of, nf_fhn_exact_vector_field, nf_vector_field, MuQuadraticCoeffs,
    NormalFormCoeffs,
};

fn fhn() -> NormalFormCoeffs {
    NormalFormCoeffs::fhn()
}

fn nf_field(mu: f64, sigma: f64) -> impl Fn(f64, [f64; 3]) -> [f64; 3] + Copy {
    nf_vector_field(fhn(), MuQuadraticCoeffs::default(), mu, sigma)
}

#[test]
fn numeric_orbit_matches_asymptotic_fixed_point() {
    // sigma moderate enough that k stays small but the orbit is cheap.
    let mu = 0.1;
    let sigma = 0.75;
    let p = solve_fixed_point(sigma, &fhn()).unwrap();
    let orbit = find_periodic_orbit(
        nf_field(mu, sigma),
        &SectionSpec::nf_s_minus(),
        [p.zeta0, p.j0],
        &IntegratorConfig::default(),
    )
    .unwrap();
    assert!(orbit.residual < 1e-9, "residual {:e}", orbit.residual);
    // Agreement within 30% relative, in (zeta, ln 1/J) coordinates; the gap
    // is governed by the dropped O(k) remainders.
    let zeta_rel = (orbit.anchor_chart[0] / p.zeta0 - 1.0).abs();
    let l_num = (1.0 / orbit.anchor_chart[1]).ln();
    let l_asym = (1.0 / p.j0).ln();
    let l_rel = (l_num / l_asym - 1.0).abs();
    assert!(zeta_rel < 0.3, "zeta mismatch {zeta_rel}");
    assert!(l_rel < 0.3, "ln(1/J) mismatch {l_rel}");
}

#[test]
fn return_jacobian_determinant_approaches_one() {
    // det DP = 1 + O(mu): the defect must shrink as mu does.
    let section = SectionSpec::nf_s_minus();
    let config = IntegratorConfig::default();
    let mut defects = Vec::new();
    for mu in [0.1, 0.05, 0.025] {
        let jac = return_map_jacobian(nf_field(mu, 0.3), &section, [0.2, 0.05], &config, 1).unwrap();
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        defects.push((det - 1.0).abs());
    }
    assert!(
        defects[0] > defects[1] && defects[1] > defects[2] - 1e-6,
        "det defects not shrinking: {defects:?}"
    );
    assert!(defects[2] < 0.2);
}

#[test]
fn flow_respects_the_mu_reversal_symmetry() {
    // Integrating forward with +mu from (xi0, eta0, zeta0) and backward with
    // -mu from (-xi0, eta0, zeta0) lands on xi-mirrored states.
    let config = IntegratorConfig::default();
    let t_end = 5.0;
    let (mu, sigma) = (0.05, 0.4);
    let fwd = integrate(nf_field(mu, sigma), [0.3, -0.4, 0.2], (0.0, t_end), &config).unwrap();
    let bwd = integrate(nf_field(-mu, sigma), [-0.3, -0.4, 0.2], (0.0, -t_end), &config).unwrap();
    let a = fwd.end_state();
    let b = bwd.end_state();
    assert!((a[0] + b[0]).abs() < 1e-7, "xi: {} vs {}", a[0], b[0]);
    assert!((a[1] - b[1]).abs() < 1e-7, "eta: {} vs {}", a[1], b[1]);
    assert!((a[2] - b[2]).abs() < 1e-7, "zeta: {} vs {}", a[2], b[2]);
}

#[test]
fn half_map_j_increment_converges_to_a() {
    // (J(S+) - J0)/mu approaches A(zeta0) from the expansion as mu shrinks;
    // the residual error is the O(k) remainder at J0 = 1e-3.
    let s_plus = SectionSpec::nf_s_plus();
    let config = IntegratorConfig::default();
    let j0 = 1e-3;
    let eta0 = eta_on_section(j0).unwrap();
    let a_expected = a_of(0.0, &fhn(), 0.0);
    let mut errors = Vec::new();
    for mu in [1e-2, 3e-3, 1e-3] {
        let ret = first_return(nf_field(mu, 0.0), &s_plus, [0.0, eta0, 0.0], &config, 0).unwrap();
        let dj_per_mu = (j_of(ret.endpoint.into()) - j0) / mu;
        errors.push((dj_per_mu - a_expected).abs() / a_expected.abs());
    }
    assert!(
        errors[0] >= errors[1] - 1e-9 && errors[1] >= errors[2] - 1e-9,
        "error sequence not monotone: {errors:?}"
    );
    assert!(errors[2] < 0.25, "final error {} above the O(k) budget", errors[2]);
}

#[test]
fn half_map_identity_at_mu_zero() {
    let s_plus = SectionSpec::nf_s_plus();
    let s_minus = SectionSpec::nf_s_minus();
    let config = IntegratorConfig::default();
    let start = s_minus.from_chart([0.4, 1e-3]).unwrap();
    // Full return at mu = 0: both chart deltas vanish.
    let ret = first_return(nf_field(0.0, 0.0), &s_minus, start, &config, 0).unwrap();
    let chart = s_minus.to_chart(&ret.endpoint);
    assert!((chart[0] - 0.4).abs() < 1e-8);
    assert!((chart[1] - 1e-3).abs() < 1e-8);
    // The half map keeps J at mu = 0 too (J is the integral of motion).
    let half = first_return(nf_field(0.0, 0.0), &s_plus, start, &config, 0).unwrap();
    assert!((j_of(half.endpoint.into()) - 1e-3).abs() < 1e-9);
}

#[test]
fn nf_pd_location_matches_closed_form_prediction() {
    // Criterion core: sigma_pd * mu^2 within 15% of delta*.
    let mu = 0.1;
    let result = nf_pd_check(mu, &fhn()).unwrap();
    let delta_star = predict_first_pd(mu * mu, &fhn()).unwrap().delta_star;
    let delta_num = result.a_num * mu * mu;
    let rel = (delta_num / delta_star - 1.0).abs();
    assert!(rel < 0.15, "sigma_pd*mu^2 = {delta_num} vs delta* = {delta_star} ({rel:.3} rel)");
    // The located orbit is a genuine fixed point with a multiplier at -1.
    assert!(result.orbit.residual < 1e-9);
    let crit = result
        .multipliers_at_a
        .iter()
        .map(|m| m.re)
        .fold(f64::INFINITY, f64::min);
    assert!((crit + 1.0).abs() < 1e-3, "critical multiplier {crit}");
}

#[test]
fn exact_and_truncated_normal_forms_agree_to_order_mu() {
    // The exact reduction keeps the -mu^2 sigma xi^2 term, which destroys the
    // orbit not far past its doubling; keep the search window below that.
    let mu = 0.1;
    let truncated = nf_pd_check(mu, &fhn()).unwrap().a_num;
    let exact =
        nf_pd_check_windowed(mu, &fhn(), (0.8, 1.05), |sigma| nf_fhn_exact_vector_field(mu, sigma))
            .unwrap()
            .a_num;
    let rel = (truncated / exact - 1.0).abs();
    assert!(rel < 0.35, "sigma_pd truncated {truncated} vs exact {exact} ({rel:.3} rel)");
}

#[test]
fn nf_pd_check_rejects_degenerate_coefficients() {
    let mut c = fhn();
    c.alpha2 = 0.0;
    assert!(matches!(
        nf_pd_check(0.1, &c),
        Err(Error::DegenerateCoefficients { name: "alpha2", .. })
    ));
}

#[test]
fn orbit_search_fails_cleanly_below_separatrix() {
    // Plane chart (eta, zeta) on xi = 0 admits guesses below the separatrix,
    // where no closed orbit exists.
    let section = SectionSpec::plane_x(0.0);
    let res = find_periodic_orbit(
        nf_field(0.05, 0.4),
        &section,
        [-1.5, 0.0],
        &IntegratorConfig::default(),
    );
    assert!(
        matches!(
            res,
            Err(Error::NoReturn { .. })
                | Err(Error::NoConvergence { .. })
                | Err(Error::TangentialCrossing { .. })
        ),
        "got {res:?}"
    );
}
