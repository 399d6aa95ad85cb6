//! Normal-form coefficients and vector field near an equilibrium-fold pair.
//!
//! The pipeline maps a [`Jet3`] through two staged coefficient sets onto the
//! final normal form
//!
//! ```text
//! xi'   = xi^2 - eta + mu (gamma0 xi + gamma xi^3) + mu^2 g1
//! eta'  = 2 xi + mu (alpha1 eta + alpha2 zeta)     + mu^2 g2
//! zeta' = mu (beta1 eta + beta2 zeta)              + mu^2 g3
//! ```
//!
//! with `gamma0 = kappa sigma + nu` affine in the parameter ratio
//! `sigma = delta / eps`. Three closed determinant expressions for `beta1`,
//! `alpha2`, `beta2` give an independent route to the same numbers and are
//! kept as a cross-check, never substituted for the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::{check_conditions, Jet3};

/// `exp(-1)`, the supremum of `J` on the Poincaré section.
pub const E_INV: f64 = 0.36787944117144233;

/// A point of the normal-form phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NFState {
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
}

impl NFState {
    pub fn new(xi: f64, eta: f64, zeta: f64) -> Self {
        Self { xi, eta, zeta }
    }
}

impl From<[f64; 3]> for NFState {
    fn from(s: [f64; 3]) -> Self {
        Self::new(s[0], s[1], s[2])
    }
}

impl From<NFState> for [f64; 3] {
    fn from(s: NFState) -> [f64; 3] {
        [s.xi, s.eta, s.zeta]
    }
}

/// Coefficients after the integral-adapted linear change of variables,
/// evaluated per unit `sigma` in the `gamma0` slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2Coeffs {
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

/// Same coefficient names after the fold-normalizing rescale.
pub type Stage3Coeffs = Stage2Coeffs;

/// The rescale factors fixed by the quadratic fold term:
/// `m = D / F_xx`, `k_scale = sqrt(-2D) / F_xx`, `n = sqrt(2 / -D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFactors {
    pub m: f64,
    pub k_scale: f64,
    pub n: f64,
}

/// Both coefficient stages plus the scaling that links them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagedCoeffs {
    pub stage2: Stage2Coeffs,
    pub stage3: Stage3Coeffs,
    pub scaling: ScalingFactors,
}

/// Final normal-form coefficients. `gamma0` is not stored: it follows the
/// affine law [`NormalFormCoeffs::gamma0_of`] through `kappa` and `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormCoeffs {
    #[serde(rename = "D")]
    pub d: f64,
    pub kappa: f64,
    pub nu: f64,
    pub gamma: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl NormalFormCoeffs {
    /// `gamma0 = kappa * sigma + nu`.
    pub fn gamma0_of(&self, sigma: f64) -> f64 {
        self.kappa * sigma + self.nu
    }

    /// The exact coefficients of the FitzHugh-Nagumo reduction.
    pub fn fhn() -> Self {
        Self {
            d: -2.0,
            kappa: 2.0,
            nu: 0.0,
            gamma: -1.0 / 3.0,
            alpha1: -0.5,
            alpha2: -0.5,
            beta1: -0.5,
            beta2: -0.5,
        }
    }

    /// Overrides one coefficient by its symbol name. Returns false for an
    /// unknown name.
    pub fn set_by_name(&mut self, name: &str, value: f64) -> bool {
        match name {
            "D" | "d" => self.d = value,
            "kappa" => self.kappa = value,
            "nu" => self.nu = value,
            "gamma" => self.gamma = value,
            "alpha1" => self.alpha1 = value,
            "alpha2" => self.alpha2 = value,
            "beta1" => self.beta1 = value,
            "beta2" => self.beta2 = value,
            _ => return false,
        }
        true
    }
}

/// Coefficients of the order-`mu^2` polynomials `g1`, `g2`, `g3`. They do not
/// enter any prediction and default to zero; they stay settable for
/// normal-form experiments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MuQuadraticCoeffs {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    pub gamma6: f64,
    pub gamma7: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub alpha5: f64,
    pub beta3: f64,
    pub beta4: f64,
    pub beta5: f64,
}

impl MuQuadraticCoeffs {
    pub fn set_by_name(&mut self, name: &str, value: f64) -> bool {
        match name {
            "gamma1" => self.gamma1 = value,
            "gamma2" => self.gamma2 = value,
            "gamma3" => self.gamma3 = value,
            "gamma4" => self.gamma4 = value,
            "gamma5" => self.gamma5 = value,
            "gamma6" => self.gamma6 = value,
            "gamma7" => self.gamma7 = value,
            "alpha3" => self.alpha3 = value,
            "alpha4" => self.alpha4 = value,
            "alpha5" => self.alpha5 = value,
            "beta3" => self.beta3 = value,
            "beta4" => self.beta4 = value,
            "beta5" => self.beta5 = value,
            _ => return false,
        }
        true
    }
}

/// `D = F_y G1_x + F_z G2_x`.
pub fn compute_d(jet: &Jet3) -> f64 {
    jet.d()
}

fn require_stable(d: f64) -> Result<()> {
    if d < 0.0 {
        Ok(())
    } else {
        Err(Error::StabilityViolation { d })
    }
}

fn require_fold(f_xx: f64) -> Result<()> {
    if f_xx != 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateFold { fxx_abs: f_xx.abs() })
    }
}

/// Stage-2 coefficients of the jet at parameter ratio `sigma`.
pub fn stage2(jet: &Jet3, sigma: f64) -> Result<Stage2Coeffs> {
    let d = jet.d();
    require_stable(d)?;
    Ok(Stage2Coeffs {
        gamma0: sigma * jet.f_xdelta,
        gamma1: (jet.f_xy * jet.g1_x + jet.f_xz * jet.g2_x) / d,
        gamma2: (jet.f_xz * jet.f_y - jet.f_xy * jet.f_z) / d,
        gamma3: jet.f_xxx / 6.0,
        alpha1: (jet.f_y * jet.g1_x * jet.g1_y
            + jet.f_y * jet.g1_z * jet.g2_x
            + jet.f_z * jet.g1_x * jet.g2_y
            + jet.f_z * jet.g2_x * jet.g2_z)
            / d,
        alpha2: (jet.f_y * jet.f_y * jet.g1_z - jet.f_z * jet.f_z * jet.g2_y
            + jet.f_y * jet.f_z * jet.g2_z
            - jet.f_y * jet.f_z * jet.g1_y)
            / d,
        alpha3: 0.5 * (jet.f_y * jet.g1_xx + jet.f_z * jet.g2_xx),
        beta1: (jet.g1_x * jet.g1_x * jet.g2_y - jet.g1_x * jet.g2_x * jet.g1_y
            + jet.g1_x * jet.g2_x * jet.g2_z
            - jet.g2_x * jet.g2_x * jet.g1_z)
            / d,
        beta2: (-jet.f_z * jet.g1_x * jet.g2_y
            + jet.f_z * jet.g2_x * jet.g1_y
            + jet.f_y * jet.g1_x * jet.g2_z
            - jet.f_y * jet.g2_x * jet.g1_z)
            / d,
        beta3: 0.5 * (jet.g1_x * jet.g2_xx - jet.g2_x * jet.g1_xx),
    })
}

/// Stage-3 coefficients: the stage-2 set pushed through the fold-normalizing
/// rescale with factors `m`, `k_scale`, `n`.
pub fn stage3(s2: &Stage2Coeffs, d: f64, f_xx: f64) -> Result<(ScalingFactors, Stage3Coeffs)> {
    require_stable(d)?;
    require_fold(f_xx)?;
    let n = (2.0 / -d).sqrt();
    let k_scale = (-2.0 * d).sqrt() / f_xx;
    let scaling = ScalingFactors { m: d / f_xx, k_scale, n };
    let cubic = 2.0 * (-2.0 * d).sqrt() / (f_xx * f_xx);
    let s3 = Stage3Coeffs {
        gamma0: n * s2.gamma0,
        gamma1: -k_scale * s2.gamma1,
        gamma2: n * s2.gamma2,
        gamma3: cubic * s2.gamma3,
        alpha1: n * s2.alpha1,
        alpha2: n * (f_xx / d) * s2.alpha2,
        alpha3: -(2.0 * std::f64::consts::SQRT_2 / (f_xx * (-d).sqrt())) * s2.alpha3,
        beta1: -k_scale * s2.beta1,
        beta2: n * s2.beta2,
        beta3: cubic * s2.beta3,
    };
    Ok((scaling, s3))
}

/// Both stages at once, per unit `sigma`.
pub fn staged_coeffs(jet: &Jet3, sigma: f64) -> Result<StagedCoeffs> {
    let s2 = stage2(jet, sigma)?;
    let (scaling, s3) = stage3(&s2, jet.d(), jet.f_xx)?;
    Ok(StagedCoeffs { stage2: s2, stage3: s3, scaling })
}

/// Runs the whole pipeline:
/// `gamma = gamma3`, `alpha1 = alpha1 + alpha3 - gamma1`,
/// `alpha2 = alpha2 - gamma2`, `beta1 = beta1 + beta3`, `beta2 = beta2`
/// (all stage-3), plus the affine `gamma0` law
/// `kappa = sqrt(2/-D) F_xdelta`, `nu = sqrt(2/-D) D_x / F_xx`.
pub fn final_coeffs(jet: &Jet3) -> Result<NormalFormCoeffs> {
    let report = check_conditions(jet);
    if !report.passes() {
        return Err(Error::ConditionsFailed { failing: report.failing().join(", ") });
    }
    let d = jet.d();
    let staged = staged_coeffs(jet, 0.0)?;
    let s3 = staged.stage3;
    let n = staged.scaling.n;
    Ok(NormalFormCoeffs {
        d,
        kappa: n * jet.f_xdelta,
        nu: n * jet.d_x() / jet.f_xx,
        gamma: s3.gamma3,
        alpha1: s3.alpha1 + s3.alpha3 - s3.gamma1,
        alpha2: s3.alpha2 - s3.gamma2,
        beta1: s3.beta1 + s3.beta3,
        beta2: s3.beta2,
    })
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Closed determinant expression for `beta1`.
///
/// The prefactor carries `F_xx^-2`; with `F_xx^-1` the expansion disagrees
/// with the staged pipeline by a factor `F_xx` (see the cross-check tests).
pub fn closed_beta1(jet: &Jet3) -> Result<f64> {
    let d = jet.d();
    require_stable(d)?;
    require_fold(jet.f_xx)?;
    let d1 = det3([
        [jet.f_xx, jet.g1_xx, jet.g2_xx],
        [0.0, jet.g1_x, jet.g2_x],
        [jet.f_y, jet.g1_y, jet.g2_y],
    ]);
    let d2 = det3([
        [jet.f_xx, jet.g1_xx, jet.g2_xx],
        [0.0, jet.g1_x, jet.g2_x],
        [jet.f_z, jet.g1_z, jet.g2_z],
    ]);
    Ok(std::f64::consts::SQRT_2 / (jet.f_xx * jet.f_xx * (-d).sqrt())
        * (jet.g1_x * d1 + jet.g2_x * d2))
}

/// Closed determinant expression for `alpha2`.
pub fn closed_alpha2(jet: &Jet3) -> Result<f64> {
    let d = jet.d();
    require_stable(d)?;
    let d1 = det3([
        [jet.f_xx, jet.f_xy, jet.f_xz],
        [0.0, jet.f_y, jet.f_z],
        [jet.g1_x, jet.g1_y, jet.g1_z],
    ]);
    let d2 = det3([
        [jet.f_xx, jet.f_xy, jet.f_xz],
        [0.0, jet.f_y, jet.f_z],
        [jet.g2_x, jet.g2_y, jet.g2_z],
    ]);
    Ok(std::f64::consts::SQRT_2 / (-d).powf(2.5) * (jet.f_y * d1 + jet.f_z * d2))
}

/// Closed determinant expression for `beta2`.
pub fn closed_beta2(jet: &Jet3) -> Result<f64> {
    let d = jet.d();
    require_stable(d)?;
    let det = det3([
        [0.0, jet.f_y, jet.f_z],
        [jet.g1_x, jet.g1_y, jet.g1_z],
        [jet.g2_x, jet.g2_y, jet.g2_z],
    ]);
    Ok(std::f64::consts::SQRT_2 / (-d).powf(1.5) * det)
}

/// The normal-form vector field at a point.
pub fn nf_rhs(
    state: NFState,
    mu: f64,
    c: &NormalFormCoeffs,
    sigma: f64,
    q: &MuQuadraticCoeffs,
) -> NFState {
    let NFState { xi, eta, zeta } = state;
    let gamma0 = c.gamma0_of(sigma);
    let f1 = gamma0 * xi + c.gamma * xi * xi * xi;
    let f2 = c.alpha1 * eta + c.alpha2 * zeta;
    let f3 = c.beta1 * eta + c.beta2 * zeta;
    let g1 = q.gamma1 * eta
        + q.gamma2 * eta * eta
        + q.gamma3 * zeta * zeta
        + q.gamma4 * eta * zeta
        + xi * xi * (q.gamma5 * eta + q.gamma6 * zeta)
        + q.gamma7 * xi.powi(4);
    let g2 = xi * (q.alpha3 * eta + q.alpha4 * zeta) + q.alpha5 * xi * xi * xi;
    let g3 = xi * (q.beta3 * eta + q.beta4 * zeta) + q.beta5 * xi * xi * xi;
    NFState {
        xi: xi * xi - eta + mu * f1 + mu * mu * g1,
        eta: 2.0 * xi + mu * f2 + mu * mu * g2,
        zeta: mu * f3 + mu * mu * g3,
    }
}

/// The exact (untruncated) transformed FitzHugh-Nagumo equations, including
/// the `-mu^2 sigma xi^2` and `-mu^3 sigma^2 xi` terms the normal form drops.
pub fn nf_rhs_fhn_exact(state: NFState, mu: f64, sigma: f64) -> NFState {
    let NFState { xi, eta, zeta } = state;
    let slow = -0.5 * eta - 0.5 * zeta;
    NFState {
        xi: xi * xi - eta + mu * (2.0 * sigma * xi - xi * xi * xi / 3.0)
            - mu * mu * sigma * xi * xi
            - mu * mu * mu * sigma * sigma * xi,
        eta: 2.0 * xi + mu * slow,
        zeta: mu * slow,
    }
}

/// Closure adapter for the integrator: the truncated normal form as an
/// autonomous `[f64; 3]` vector field.
pub fn nf_vector_field(
    c: NormalFormCoeffs,
    q: MuQuadraticCoeffs,
    mu: f64,
    sigma: f64,
) -> impl Fn(f64, [f64; 3]) -> [f64; 3] + Copy {
    move |_t, s| nf_rhs(s.into(), mu, &c, sigma, &q).into()
}

/// Closure adapter for the exact transformed FitzHugh-Nagumo field.
pub fn nf_fhn_exact_vector_field(
    mu: f64,
    sigma: f64,
) -> impl Fn(f64, [f64; 3]) -> [f64; 3] + Copy {
    move |_t, s| nf_rhs_fhn_exact(s.into(), mu, sigma).into()
}

/// The second integral `J = (eta + 1 - xi^2) exp(-(eta + 1))` of the
/// unperturbed normal form.
pub fn j_of(state: NFState) -> f64 {
    let w = state.eta + 1.0 - state.xi * state.xi;
    w * (-(state.eta + 1.0)).exp()
}

/// Solves `(eta0 + 1) exp(-(eta0 + 1)) = J0` for the section branch
/// `eta0 in (-1, 0]`, i.e. `w = eta0 + 1 in (0, 1]` where `w e^-w` is
/// monotone. Safeguarded Newton with initial guess `w = J0`.
pub fn eta_on_section(j0: f64) -> Result<f64> {
    if !(j0 > 0.0) || j0 > E_INV * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            what: "J0",
            value: j0,
            range: "(0, exp(-1)]",
        });
    }
    if j0 >= E_INV {
        return Ok(0.0);
    }
    let f = |w: f64| w * (-w).exp() - j0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut w = j0;
    for _ in 0..200 {
        let fw = f(w);
        if fw > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        let dfw = (1.0 - w) * (-w).exp();
        let mut next = w - fw / dfw;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() < 1e-15 {
            return Ok(next - 1.0);
        }
        w = next;
    }
    Err(Error::NoConvergence {
        what: "eta_on_section",
        iterations: 200,
        residual: f(w).abs(),
    })
}

/// Draws jet entries from a caller-supplied uniform sampler on [-2, 2],
/// rejecting until `D < -0.1` and `|F_xx| > 0.1`. Stays clear of the
/// pipeline's singular denominators; `F_x` is left at zero so the fold
/// tangency condition holds exactly.
pub fn sample_admissible_jet(mut uniform: impl FnMut() -> f64) -> Jet3 {
    loop {
        let jet = Jet3 {
            f_x: 0.0,
            f_y: uniform(),
            f_z: uniform(),
            f_xx: uniform(),
            f_xxx: uniform(),
            f_xy: uniform(),
            f_xz: uniform(),
            f_xdelta: uniform(),
            g1_x: uniform(),
            g1_y: uniform(),
            g1_z: uniform(),
            g1_xx: uniform(),
            g2_x: uniform(),
            g2_y: uniform(),
            g2_z: uniform(),
            g2_xx: uniform(),
        };
        if jet.d() < -0.1 && jet.f_xx.abs() > 0.1 {
            return jet;
        }
    }
}
