//! Asymptotics of the half-return map near the separatrix and the
//! closed-form period-doubling predictor.
//!
//! Everything here is remainder-free evaluation of the leading asymptotic
//! terms in the small parameter `k = 1 / ln(1/J0)`; the dropped remainders
//! set the tolerances of the cross-validation tests, not any code path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalform::{NormalFormCoeffs, E_INV};
use crate::systems::Jet3;

const SQRT_PI: f64 = 1.7724538509055159;

/// A point `(zeta0, J0)` of the Poincaré section, `0 < J0 <= exp(-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub zeta0: f64,
    pub j0: f64,
}

impl SectionPoint {
    pub fn new(zeta0: f64, j0: f64) -> Self {
        Self { zeta0, j0 }
    }

    /// `k = 1 / ln(1/J0)`, the logarithmic expansion parameter.
    pub fn k(&self) -> f64 {
        1.0 / (1.0 / self.j0).ln()
    }
}

/// First- and second-order components of the half map at a section point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapExpansion {
    pub zeta1_3: f64,
    pub zeta2_3: f64,
    pub j1_3: f64,
    pub j2_3: f64,
    pub k: f64,
}

/// Closed-form location of the first period doubling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PDPrediction {
    pub zeta0_star: f64,
    pub j0_star: f64,
    pub delta_star: f64,
    /// FitzHugh-Nagumo convenience, `a* = 1 - delta*`.
    pub a_star: f64,
}

fn check_j0(j0: f64) -> Result<f64> {
    if j0 > 0.0 && j0 < E_INV {
        Ok(1.0 / (1.0 / j0).ln())
    } else {
        Err(Error::OutOfRange { what: "J0", value: j0, range: "(0, exp(-1))" })
    }
}

fn require_nonzero(name: &'static str, value: f64) -> Result<()> {
    if value.abs() > 1e-12 {
        Ok(())
    } else {
        Err(Error::DegenerateCoefficients { name, value })
    }
}

/// `A(zeta0) = (sqrt(pi)/2) (-(3/2) gamma + alpha2 zeta0 - (1/2) alpha1 - gamma0)`,
/// the coefficient every first-order `J` term carries.
pub fn a_of(zeta0: f64, c: &NormalFormCoeffs, sigma: f64) -> f64 {
    SQRT_PI / 2.0
        * (-1.5 * c.gamma + c.alpha2 * zeta0 - 0.5 * c.alpha1 - c.gamma0_of(sigma))
}

/// Leading terms of the half map `F(mu)` at a section point, without the
/// `O(.)` remainders:
///
/// ```text
/// zeta1 = k^-3/2 [ b1/3 + b2 k z0 + (b1 + b2 k z0) k (ln k^-1 + ln 4)/2 - b1 k ]
/// J1    = A(z0)
/// zeta2 = -A(z0) k^-1/2 (b1 + b2 k z0) / (2 J0)
/// J2    = -A(z0) k^-3/2 (a1/3 + a2 k z0 - gamma)
/// ```
pub fn f_mu_expansion(p: SectionPoint, c: &NormalFormCoeffs, sigma: f64) -> Result<MapExpansion> {
    let k = check_j0(p.j0)?;
    let u = (1.0 / k).ln() + 4.0f64.ln();
    let a = a_of(p.zeta0, c, sigma);
    let bkz = c.beta1 + c.beta2 * k * p.zeta0;
    let zeta1_3 = k.powf(-1.5)
        * (c.beta1 / 3.0 + c.beta2 * k * p.zeta0 + 0.5 * bkz * k * u - c.beta1 * k);
    let zeta2_3 = -a * k.powf(-0.5) * bkz / (2.0 * p.j0);
    let j2_3 = -a * k.powf(-1.5) * (c.alpha1 / 3.0 + c.alpha2 * k * p.zeta0 - c.gamma);
    Ok(MapExpansion { zeta1_3, zeta2_3, j1_3: a, j2_3, k })
}

/// Leading fixed-point residual of the full return map: by the symmetry
/// `P = F(-mu)^-1 o F(mu)`, the map `P - id` has no `O(mu)` term at points
/// where the first-order half map vanishes, so the residual
/// `F(mu) - F(-mu) = 2 mu (zeta1, J1)` is what a fixed point must kill.
pub fn asymptotic_p_first_order(
    p: SectionPoint,
    c: &NormalFormCoeffs,
    sigma: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    let ex = f_mu_expansion(p, c, sigma)?;
    Ok((2.0 * mu * ex.zeta1_3, 2.0 * mu * ex.j1_3))
}

/// `zeta0` solving the retained-order `zeta1 = 0` equation at a given
/// `L = ln(1/J0)`.
fn zeta0_of_l(c: &NormalFormCoeffs, l: f64) -> f64 {
    let k = 1.0 / l;
    let u = l.ln() + 4.0f64.ln();
    -(c.beta1 / (c.beta2 * k)) * (1.0 / 3.0 + 0.5 * k * u - k) / (1.0 + 0.5 * k * u)
}

/// Solves the two leading-order fixed-point conditions for a section point:
/// `A(zeta0) = 0` pins `zeta0` in terms of `sigma`, and the retained-order
/// `zeta1 = 0` equation then determines `L = ln(1/J0)` by fixed-point
/// iteration starting from its leading term.
pub fn solve_fixed_point(sigma: f64, c: &NormalFormCoeffs) -> Result<SectionPoint> {
    require_nonzero("kappa", c.kappa)?;
    require_nonzero("alpha2", c.alpha2)?;
    require_nonzero("beta1", c.beta1)?;
    require_nonzero("beta2", c.beta2)?;

    let zeta0 = (c.kappa * sigma + c.nu + 1.5 * c.gamma + 0.5 * c.alpha1) / c.alpha2;
    // Leading term of L: zeta0 ~ -(beta1 / 3 beta2) L.
    let t = -3.0 * c.beta2 * zeta0 / c.beta1;
    if !(t > 1.2) {
        return Err(Error::OutOfRange {
            what: "sigma",
            value: sigma,
            range: "large enough that the predicted J0 falls below exp(-1)",
        });
    }
    let mut l = t;
    let mut converged = false;
    for _ in 0..200 {
        let u = l.ln() + 4.0f64.ln();
        let next = (t * (1.0 + 0.5 * u / l) - 1.5 * u + 3.0).max(1.05);
        if !next.is_finite() || next > 1e9 {
            break;
        }
        if (next - l).abs() <= 1e-14 * l.max(1.0) {
            l = next;
            converged = true;
            break;
        }
        l = next;
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "solve_fixed_point",
            iterations: 200,
            residual: (zeta0_of_l(c, l) - zeta0).abs(),
        });
    }
    if l <= 1.0 + 1e-9 {
        return Err(Error::OutOfRange {
            what: "sigma",
            value: sigma,
            range: "large enough that the predicted J0 falls below exp(-1)",
        });
    }
    Ok(SectionPoint { zeta0, j0: (-l).exp() })
}

/// Leading term of the trace of the second-order tangent map,
/// `-(sqrt(pi) k^-1/2 / 4 J0) alpha2 (beta1 + beta2 k zeta0)`.
pub fn trace_df2(p: SectionPoint, c: &NormalFormCoeffs) -> Result<f64> {
    let k = check_j0(p.j0)?;
    Ok(-(SQRT_PI * k.powf(-0.5) / (4.0 * p.j0)) * c.alpha2 * (c.beta1 + c.beta2 * k * p.zeta0))
}

/// Closed-form first period doubling:
///
/// ```text
/// B      = ln(1/eps) + ln(ln(1/eps))/2 - ln(sqrt(pi) alpha2 beta1 e^3 / 24)
/// zeta0* = -(beta1 / 3 beta2) B
/// J0*    = sqrt(pi) (alpha2 beta1 / 6) eps sqrt(ln(1/eps))
/// delta* = -(alpha2 beta1 / 3 beta2 kappa) eps B - (3 gamma + alpha1 + 2 nu)/(2 kappa) eps
/// ```
pub fn predict_first_pd(eps: f64, c: &NormalFormCoeffs) -> Result<PDPrediction> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::OutOfRange { what: "eps", value: eps, range: "(0, 0.1)" });
    }
    require_nonzero("kappa", c.kappa)?;
    require_nonzero("alpha2", c.alpha2)?;
    require_nonzero("beta1", c.beta1)?;
    require_nonzero("beta2", c.beta2)?;
    let product = c.alpha2 * c.beta1;
    if product <= 0.0 {
        return Err(Error::NegativeDiscriminant { product });
    }

    let l = (1.0 / eps).ln();
    let bracket = l + 0.5 * l.ln() - (SQRT_PI * product * (3.0f64).exp() / 24.0).ln();
    let zeta0_star = -(c.beta1 / (3.0 * c.beta2)) * bracket;
    let j0_star = SQRT_PI * (product / 6.0) * eps * l.sqrt();
    let delta_star = -(product / (3.0 * c.beta2 * c.kappa)) * eps * bracket
        - (3.0 * c.gamma + c.alpha1 + 2.0 * c.nu) / (2.0 * c.kappa) * eps;
    Ok(PDPrediction { zeta0_star, j0_star, delta_star, a_star: 1.0 - delta_star })
}

/// Leading-order distance between the equilibrium and the fold,
/// `rho = delta F_xdelta sqrt((F_y^2 + F_z^2) / ((F_y F_xz)^2 + F_xx^2 (F_y^2 + F_z^2)))`.
pub fn fold_distance(delta: f64, jet: &Jet3) -> Result<f64> {
    let grad_sq = jet.f_y * jet.f_y + jet.f_z * jet.f_z;
    let denom = (jet.f_y * jet.f_xz) * (jet.f_y * jet.f_xz) + jet.f_xx * jet.f_xx * grad_sq;
    if denom <= 0.0 {
        return Err(Error::DegenerateFold { fxx_abs: jet.f_xx.abs() });
    }
    Ok(delta * jet.f_xdelta * (grad_sq / denom).sqrt())
}

/// Leading-order Andronov-Hopf point of the FitzHugh-Nagumo family,
/// `a_H = 1 - eps/4`.
pub fn hopf_estimate(eps: f64) -> f64 {
    1.0 - 0.25 * eps
}
