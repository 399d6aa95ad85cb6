//! Slow-fast systems with one fast and two slow variables.
//!
//! A system is a right-hand-side callback together with its equilibrium
//! location; the jet of partial derivatives at the equilibrium is the single
//! input of the coefficient pipeline. The FitzHugh-Nagumo example ships
//! built in, both as a callback and as an analytic jet, and a
//! finite-difference jet extractor covers user-supplied systems.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for the "= 0" / "!= 0" clauses of the fold and
/// stability conditions. Well above finite-difference noise, well below any
/// genuine coefficient.
pub const TOL_FOLD: f64 = 1e-8;

/// Central-difference step for first derivatives.
pub const FD_STEP_FIRST: f64 = 5e-6;
/// Central-difference step for second derivatives.
pub const FD_STEP_SECOND: f64 = 1e-4;
/// Central-difference step for third derivatives.
pub const FD_STEP_THIRD: f64 = 5e-4;

type RhsFn = dyn Fn(f64, f64, f64, f64) -> (f64, f64, f64) + Send + Sync;
type EquilibriumFn = dyn Fn(f64) -> (f64, f64, f64) + Send + Sync;

/// A slow-fast system `eps * dx/dt = F`, `dy/dt = G1`, `dz/dt = G2`
/// depending on a real parameter `delta`.
///
/// The callback convention is dimensionless slow time: `rhs(x, y, z, delta)`
/// returns `(F, G1, G2)`. Callbacks must be re-entrant; the struct is cheap
/// to clone and safe to share across threads.
#[derive(Clone)]
pub struct SlowFastSystem {
    name: String,
    rhs: Arc<RhsFn>,
    equilibrium: Arc<EquilibriumFn>,
}

impl SlowFastSystem {
    pub fn new(
        name: impl Into<String>,
        rhs: impl Fn(f64, f64, f64, f64) -> (f64, f64, f64) + Send + Sync + 'static,
        equilibrium: impl Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            rhs: Arc::new(rhs),
            equilibrium: Arc::new(equilibrium),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rhs(&self, x: f64, y: f64, z: f64, delta: f64) -> (f64, f64, f64) {
        (self.rhs)(x, y, z, delta)
    }

    pub fn equilibrium(&self, delta: f64) -> (f64, f64, f64) {
        (self.equilibrium)(delta)
    }

    /// Largest component of `rhs` at the equilibrium for the given `delta`.
    pub fn equilibrium_residual(&self, delta: f64) -> f64 {
        let (x0, y0, z0) = self.equilibrium(delta);
        let (f, g1, g2) = self.rhs(x0, y0, z0, delta);
        f.abs().max(g1.abs()).max(g2.abs())
    }
}

impl std::fmt::Debug for SlowFastSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SlowFastSystem")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// The shifted FitzHugh-Nagumo system
/// `F = -x^3/3 + x^2 (1 - delta) + x (2 delta - delta^2) - y - z`,
/// `G1 = x`, `G2 = x - z`, with the equilibrium at the origin for every
/// `delta`. The original neuron model maps onto it via `delta = 1 - a`.
pub fn builtin_fhn() -> SlowFastSystem {
    SlowFastSystem::new(
        "fhn",
        |x, y, z, delta| {
            let f = -x * x * x / 3.0 + x * x * (1.0 - delta) + x * (2.0 * delta - delta * delta)
                - y
                - z;
            (f, x, x - z)
        },
        |_delta| (0.0, 0.0, 0.0),
    )
}

/// The FitzHugh-Nagumo right-hand side in fast time: `x' = F`,
/// `y' = eps G1`, `z' = eps G2`. This is the form the verification
/// integrator uses; it removes the `1/eps` stiffness from the fast equation.
pub fn builtin_fhn_fast(delta: f64, eps: f64) -> impl Fn(f64, [f64; 3]) -> [f64; 3] + Copy {
    move |_t, s| {
        let [x, y, z] = s;
        let f =
            -x * x * x / 3.0 + x * x * (1.0 - delta) + x * (2.0 * delta - delta * delta) - y - z;
        [f, eps * x, eps * (x - z)]
    }
}

/// All partial derivatives of `F`, `G1`, `G2` at the equilibrium
/// `(0, 0, 0; 0)` that the coefficient pipeline consumes.
///
/// Serialized as a flat JSON object keyed by the derivative names
/// (`"F_x"`, `"F_xdelta"`, `"G1_xx"`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet3 {
    #[serde(rename = "F_x", default)]
    pub f_x: f64,
    #[serde(rename = "F_y", default)]
    pub f_y: f64,
    #[serde(rename = "F_z", default)]
    pub f_z: f64,
    #[serde(rename = "F_xx", default)]
    pub f_xx: f64,
    #[serde(rename = "F_xxx", default)]
    pub f_xxx: f64,
    #[serde(rename = "F_xy", default)]
    pub f_xy: f64,
    #[serde(rename = "F_xz", default)]
    pub f_xz: f64,
    #[serde(rename = "F_xdelta", default)]
    pub f_xdelta: f64,
    #[serde(rename = "G1_x", default)]
    pub g1_x: f64,
    #[serde(rename = "G1_y", default)]
    pub g1_y: f64,
    #[serde(rename = "G1_z", default)]
    pub g1_z: f64,
    #[serde(rename = "G1_xx", default)]
    pub g1_xx: f64,
    #[serde(rename = "G2_x", default)]
    pub g2_x: f64,
    #[serde(rename = "G2_y", default)]
    pub g2_y: f64,
    #[serde(rename = "G2_z", default)]
    pub g2_z: f64,
    #[serde(rename = "G2_xx", default)]
    pub g2_xx: f64,
}

/// JSON field names of [`Jet3`], in declaration order.
pub const JET_FIELD_NAMES: [&str; 16] = [
    "F_x", "F_y", "F_z", "F_xx", "F_xxx", "F_xy", "F_xz", "F_xdelta", "G1_x", "G1_y", "G1_z",
    "G1_xx", "G2_x", "G2_y", "G2_z", "G2_xx",
];

impl Jet3 {
    /// `D = F_y G1_x + F_z G2_x`, the stability discriminant.
    pub fn d(&self) -> f64 {
        self.f_y * self.g1_x + self.f_z * self.g2_x
    }

    /// `D_x = F_xy G1_x + F_y G1_xx + F_xz G2_x + F_z G2_xx`, the
    /// x-derivative of `D` along the fast fibre.
    pub fn d_x(&self) -> f64 {
        self.f_xy * self.g1_x + self.f_y * self.g1_xx + self.f_xz * self.g2_x + self.f_z * self.g2_xx
    }
}

/// Exact jet of the built-in FitzHugh-Nagumo system.
pub fn jet_analytic_fhn() -> Jet3 {
    Jet3 {
        f_y: -1.0,
        f_z: -1.0,
        f_xx: 2.0,
        f_xxx: -2.0,
        f_xdelta: 2.0,
        g1_x: 1.0,
        g2_x: 1.0,
        g2_z: -1.0,
        ..Jet3::default()
    }
}

/// Warnings produced while reading a jet file.
#[derive(Debug, Clone, Default, Serialize)]
pub struct JetFileReport {
    /// Fields absent from the file; they defaulted to zero.
    pub missing: Vec<String>,
    /// Keys in the file that are not jet fields.
    pub unknown: Vec<String>,
}

/// Parses a jet from its flat JSON representation. Missing fields default to
/// zero and are listed in the returned report so callers can warn about them.
pub fn jet_from_json(text: &str) -> Result<(Jet3, JetFileReport)> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::JetFile(e.to_string()))?;
    let map = value
        .as_object()
        .ok_or_else(|| Error::JetFile("expected a flat JSON object".into()))?;

    let mut report = JetFileReport::default();
    for name in JET_FIELD_NAMES {
        match map.get(name) {
            None => report.missing.push(name.to_string()),
            Some(v) if !v.is_number() => {
                return Err(Error::JetFile(format!("field {name} is not a number")))
            }
            Some(_) => {}
        }
    }
    for key in map.keys() {
        if !JET_FIELD_NAMES.contains(&key.as_str()) {
            report.unknown.push(key.clone());
        }
    }

    let jet: Jet3 = serde_json::from_value(value).map_err(|e| Error::JetFile(e.to_string()))?;
    Ok((jet, report))
}

/// Central-difference estimate of every [`Jet3`] field from a system's
/// right-hand side, evaluated at the `delta = 0` equilibrium.
pub fn jet_finite_difference(system: &SlowFastSystem) -> Result<Jet3> {
    let (x0, y0, z0) = system.equilibrium(0.0);
    let eval = |dx: f64, dy: f64, dz: f64, dd: f64| -> Result<(f64, f64, f64)> {
        let (f, g1, g2) = system.rhs(x0 + dx, y0 + dy, z0 + dz, dd);
        if f.is_finite() && g1.is_finite() && g2.is_finite() {
            Ok((f, g1, g2))
        } else {
            Err(Error::NonFiniteEvaluation {
                x: x0 + dx,
                y: y0 + dy,
                z: z0 + dz,
                delta: dd,
            })
        }
    };

    let h1 = FD_STEP_FIRST;
    let h2 = FD_STEP_SECOND;
    let h3 = FD_STEP_THIRD;

    // First derivatives of all three components.
    let d1 = |i: usize| -> Result<(f64, f64, f64)> {
        let mut p = [0.0; 3];
        p[i] = h1;
        let (fp, g1p, g2p) = eval(p[0], p[1], p[2], 0.0)?;
        let (fm, g1m, g2m) = eval(-p[0], -p[1], -p[2], 0.0)?;
        Ok((
            (fp - fm) / (2.0 * h1),
            (g1p - g1m) / (2.0 * h1),
            (g2p - g2m) / (2.0 * h1),
        ))
    };
    let (f_x, g1_x, g2_x) = d1(0)?;
    let (f_y, g1_y, g2_y) = d1(1)?;
    let (f_z, g1_z, g2_z) = d1(2)?;

    // Pure second derivatives in x.
    let (f0, g10, g20) = eval(0.0, 0.0, 0.0, 0.0)?;
    let (fp, g1p, g2p) = eval(h2, 0.0, 0.0, 0.0)?;
    let (fm, g1m, g2m) = eval(-h2, 0.0, 0.0, 0.0)?;
    let f_xx = (fp - 2.0 * f0 + fm) / (h2 * h2);
    let g1_xx = (g1p - 2.0 * g10 + g1m) / (h2 * h2);
    let g2_xx = (g2p - 2.0 * g20 + g2m) / (h2 * h2);

    // Third derivative of F in x.
    let (fp2, _, _) = eval(2.0 * h3, 0.0, 0.0, 0.0)?;
    let (fp1, _, _) = eval(h3, 0.0, 0.0, 0.0)?;
    let (fm1, _, _) = eval(-h3, 0.0, 0.0, 0.0)?;
    let (fm2, _, _) = eval(-2.0 * h3, 0.0, 0.0, 0.0)?;
    let f_xxx = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h3 * h3 * h3);

    // Mixed second derivatives of F.
    let mixed = |dy: f64, dz: f64, dd: f64| -> Result<f64> {
        let (fpp, _, _) = eval(h2, dy, dz, dd)?;
        let (fpm, _, _) = eval(h2, -dy, -dz, -dd)?;
        let (fmp, _, _) = eval(-h2, dy, dz, dd)?;
        let (fmm, _, _) = eval(-h2, -dy, -dz, -dd)?;
        Ok((fpp - fpm - fmp + fmm) / (4.0 * h2 * h2))
    };
    let f_xy = mixed(h2, 0.0, 0.0)?;
    let f_xz = mixed(0.0, h2, 0.0)?;
    let f_xdelta = mixed(0.0, 0.0, h2)?;

    Ok(Jet3 {
        f_x,
        f_y,
        f_z,
        f_xx,
        f_xxx,
        f_xy,
        f_xz,
        f_xdelta,
        g1_x,
        g1_y,
        g1_z,
        g1_xx,
        g2_x,
        g2_y,
        g2_z,
        g2_xx,
    })
}

/// One checked clause of the admissibility conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub value: f64,
    pub passes: bool,
    pub tolerance: f64,
}

/// Evaluation of the admissibility conditions: equilibrium residual (when a
/// right-hand side is available), fold tangency `F_x = 0`, fold
/// non-degeneracy `F_xx != 0`, gradient `grad F != 0`, and stability `D < 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Clause name -> outcome, in check order.
    pub conditions: Vec<(String, Condition)>,
}

impl ConditionReport {
    pub fn passes(&self) -> bool {
        self.conditions.iter().all(|(_, c)| c.passes)
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|(_, c)| !c.passes)
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

/// Checks the jet-level admissibility conditions: `|F_x| < tol`,
/// `|F_xx| > tol`, `grad F != 0` and `D < 0`.
pub fn check_conditions(jet: &Jet3) -> ConditionReport {
    let grad = jet.f_x.abs().max(jet.f_y.abs()).max(jet.f_z.abs());
    let d = jet.d();
    let conditions = vec![
        (
            "fold_tangency".to_string(),
            Condition {
                value: jet.f_x,
                passes: jet.f_x.abs() < TOL_FOLD,
                tolerance: TOL_FOLD,
            },
        ),
        (
            "fold_nondegeneracy".to_string(),
            Condition {
                value: jet.f_xx,
                passes: jet.f_xx.abs() > TOL_FOLD,
                tolerance: TOL_FOLD,
            },
        ),
        (
            "gradient_nonzero".to_string(),
            Condition {
                value: grad,
                passes: grad > TOL_FOLD,
                tolerance: TOL_FOLD,
            },
        ),
        (
            "stability".to_string(),
            Condition {
                value: d,
                passes: d < -TOL_FOLD,
                tolerance: TOL_FOLD,
            },
        ),
    ];
    ConditionReport { conditions }
}

/// Full admissibility report for a system with a callback: prepends the
/// equilibrium condition (max residual of `rhs` at the equilibrium over a
/// small grid of `delta` values) to the jet-level checks.
pub fn check_system(system: &SlowFastSystem, jet: &Jet3) -> ConditionReport {
    let mut residual = 0.0f64;
    for i in -5..=5 {
        let delta = 0.02 * i as f64;
        residual = residual.max(system.equilibrium_residual(delta));
    }
    let mut report = check_conditions(jet);
    report.conditions.insert(
        0,
        (
            "equilibrium".to_string(),
            Condition {
                value: residual,
                passes: residual < 1e-12,
                tolerance: 1e-12,
            },
        ),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fhn_rhs_values() {
        let fhn = builtin_fhn();
        let (f, g1, g2) = fhn.rhs(1.0, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(f, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g1, 1.0);
        assert_abs_diff_eq!(g2, 1.0);
        let (f, g1, g2) = fhn.rhs(0.0, 1.0, 0.0, 0.0);
        assert_abs_diff_eq!(f, -1.0);
        assert_abs_diff_eq!(g1, 0.0);
        assert_abs_diff_eq!(g2, 0.0);
        assert_eq!(fhn.rhs(0.0, 0.0, 0.0, 0.3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn fhn_equilibrium_at_origin_for_random_delta() {
        let fhn = builtin_fhn();
        // Multiplicative congruential sweep, deterministic.
        let mut s = 12345u64;
        for _ in 0..100 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let delta = ((s >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.2;
            assert!(fhn.equilibrium_residual(delta) < 1e-14);
        }
    }

    #[test]
    fn analytic_jet_values() {
        let jet = jet_analytic_fhn();
        assert_eq!(jet.f_xx, 2.0);
        assert_eq!(jet.f_xdelta, 2.0);
        assert_eq!(jet.d(), -2.0);
        assert_eq!(jet.d_x(), 0.0);
    }

    #[test]
    fn finite_difference_jet_matches_analytic() {
        let jet = jet_finite_difference(&builtin_fhn()).unwrap();
        let exact = jet_analytic_fhn();
        // First derivatives.
        assert_abs_diff_eq!(jet.f_x, exact.f_x, epsilon = 1e-6);
        assert_abs_diff_eq!(jet.f_y, exact.f_y, epsilon = 1e-6);
        assert_abs_diff_eq!(jet.f_z, exact.f_z, epsilon = 1e-6);
        assert_abs_diff_eq!(jet.g1_x, exact.g1_x, epsilon = 1e-6);
        assert_abs_diff_eq!(jet.g1_y, exact.g1_y, epsilon = 1e-6);
        assert_abs_diff_eq!(jet.g1_z, exact.g1_z, epsilon = 1e-6);
        assert_abs_diff_eq!(jet.g2_x, exact.g2_x, epsilon = 1e-6);
        assert_abs_diff_eq!(jet.g2_y, exact.g2_y, epsilon = 1e-6);
        assert_abs_diff_eq!(jet.g2_z, exact.g2_z, epsilon = 1e-6);
        // Second derivatives, including the mixed ones.
        assert_abs_diff_eq!(jet.f_xx, exact.f_xx, epsilon = 1e-5);
        assert_abs_diff_eq!(jet.f_xy, exact.f_xy, epsilon = 1e-5);
        assert_abs_diff_eq!(jet.f_xz, exact.f_xz, epsilon = 1e-5);
        assert_abs_diff_eq!(jet.f_xdelta, exact.f_xdelta, epsilon = 1e-5);
        assert_abs_diff_eq!(jet.g1_xx, exact.g1_xx, epsilon = 1e-5);
        assert_abs_diff_eq!(jet.g2_xx, exact.g2_xx, epsilon = 1e-5);
        // Third derivative.
        assert_abs_diff_eq!(jet.f_xxx, exact.f_xxx, epsilon = 1e-4);
    }

    #[test]
    fn finite_difference_positive_d_still_returns_jet() {
        // F = x^2 - y, G1 = -x, G2 = 0 has D = (-1)(-1) = 1 > 0; the jet is
        // computed anyway and the failure surfaces in check_conditions.
        let sys = SlowFastSystem::new(
            "unstable",
            |x, y, _z, _d| (x * x - y, -x, 0.0),
            |_d| (0.0, 0.0, 0.0),
        );
        let jet = jet_finite_difference(&sys).unwrap();
        assert_abs_diff_eq!(jet.d(), 1.0, epsilon = 1e-6);
        assert!(!check_conditions(&jet).passes());
        assert!(!check_conditions(&jet).get("stability").unwrap().passes);
    }

    #[test]
    fn finite_difference_reports_non_finite_rhs() {
        let sys = SlowFastSystem::new(
            "singular",
            |x, _y, _z, _d| (1.0 / x, 0.0, 0.0),
            |_d| (0.0, 0.0, 0.0),
        );
        match jet_finite_difference(&sys) {
            Err(Error::NonFiniteEvaluation { .. }) => {}
            other => panic!("expected NonFiniteEvaluation, got {other:?}"),
        }
    }

    #[test]
    fn conditions_pass_for_fhn() {
        let report = check_conditions(&jet_analytic_fhn());
        assert!(report.passes());
        assert_eq!(report.get("stability").unwrap().value, -2.0);
        let full = check_system(&builtin_fhn(), &jet_analytic_fhn());
        assert!(full.passes());
        assert_eq!(full.conditions.len(), 5);
    }

    #[test]
    fn conditions_flag_degenerate_jets() {
        let mut jet = jet_analytic_fhn();
        jet.f_y = 0.0;
        jet.f_z = 0.0;
        let report = check_conditions(&jet);
        assert_eq!(report.get("stability").unwrap().value, 0.0);
        assert!(!report.get("stability").unwrap().passes);

        let mut jet = jet_analytic_fhn();
        jet.f_xx = 0.0;
        assert!(!check_conditions(&jet).get("fold_nondegeneracy").unwrap().passes);
    }

    #[test]
    fn jet_json_missing_fields_default_and_warn() {
        let (jet, report) = jet_from_json(r#"{"F_y": -1.0, "F_z": -1.0, "F_xx": 2.0}"#).unwrap();
        assert_eq!(jet.f_xx, 2.0);
        assert_eq!(jet.f_xxx, 0.0);
        assert_eq!(report.missing.len(), 13);
        assert!(report.missing.contains(&"F_xxx".to_string()));
        assert!(report.unknown.is_empty());

        let (_, report) = jet_from_json(r#"{"F_q": 1.0}"#).unwrap();
        assert_eq!(report.unknown, vec!["F_q".to_string()]);

        assert!(jet_from_json("[1, 2]").is_err());
        assert!(jet_from_json(r#"{"F_x": "zero"}"#).is_err());
    }

    #[test]
    fn jet_json_round_trip() {
        let jet = jet_analytic_fhn();
        let text = serde_json::to_string(&jet).unwrap();
        assert!(text.contains("\"F_xdelta\":2.0"));
        let (back, report) = jet_from_json(&text).unwrap();
        assert_eq!(back, jet);
        assert!(report.missing.is_empty());
    }
}
