//! Analysis toolkit for slow-fast systems whose equilibrium sits near a fold
//! of the slow manifold.
//!
//! The crate computes the normal-form coefficients of such a system from the
//! jet of its right-hand side at the equilibrium, evaluates the asymptotic
//! Poincaré map near the separatrix of the unperturbed normal form, predicts
//! the first period-doubling bifurcation in closed form, and verifies the
//! prediction by direct numerical integration, Floquet analysis and
//! parameter bisection. The FitzHugh-Nagumo system ships as the built-in
//! example.
//!
//! Modules follow the pipeline order:
//!
//! * [`systems`] — system definitions, jets, admissibility conditions;
//! * [`normalform`] — staged coefficient pipeline and the normal-form field;
//! * [`asymptotics`] — asymptotic half map, fixed points, the closed-form
//!   period-doubling predictor;
//! * [`dynamics`] — adaptive integration, sections, return maps, Floquet
//!   multipliers;
//! * [`bifurcation`] — parameter bisection and numeric/asymptotic
//!   comparison tables.

pub mod asymptotics;
pub mod bifurcation;
pub mod dynamics;
pub mod error;
pub mod normalform;
pub mod systems;

pub use asymptotics::{
    a_of, asymptotic_p_first_order, f_mu_expansion, fold_distance, hopf_estimate,
    predict_first_pd, solve_fixed_point, trace_df2, MapExpansion, PDPrediction, SectionPoint,
};
pub use bifurcation::{
    auto_bracket, compare_table, critical_multiplier, hopf_locate, locate_pd, nf_pd_check,
    ComparisonRow, PDResult, PDSearchConfig, TABLE1_EPS,
};
pub use dynamics::{
    find_periodic_orbit, first_return, integrate, return_map_jacobian, trajectory_csv,
    IntegratorConfig, OrbitResult, ReturnResult, SectionChart, SectionSpec, Trajectory,
    TrajectoryCsv,
};
pub use error::{Error, Result};
pub use normalform::{
    closed_alpha2, closed_beta1, closed_beta2, compute_d, eta_on_section, final_coeffs, j_of,
    nf_rhs, nf_rhs_fhn_exact, stage2, stage3, staged_coeffs, MuQuadraticCoeffs, NFState,
    NormalFormCoeffs, StagedCoeffs,
};
pub use systems::{
    builtin_fhn, builtin_fhn_fast, check_conditions, check_system, jet_analytic_fhn,
    jet_finite_difference, jet_from_json, ConditionReport, Jet3, SlowFastSystem,
};
