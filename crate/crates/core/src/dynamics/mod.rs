//! Adaptive integration, Poincaré sections with dense-output event
//! localization, numerical return maps and Floquet multipliers.
//!
//! Everything operates on 3-dimensional autonomous fields given as plain
//! closures `Fn(t, [f64; 3]) -> [f64; 3]`. Trajectories are strictly
//! sequential; distinct trajectories share nothing and may run in parallel.

mod dopri5;

pub use dopri5::{DenseStep, Dopri5};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalform::{self, E_INV};

type V3 = [f64; 3];

/// States beyond this norm count as escaped (no return possible).
const ESCAPE_BOUND: f64 = 1e8;
/// Transversality threshold for section crossings.
const TANGENT_TOL: f64 = 1e-8;
/// Relative finite-difference step for return-map Jacobians. Near a
/// period doubling the return map's transverse curvature is large enough
/// that a 1e-5 step biases the multipliers by O(0.3); 1e-6 keeps the h^2
/// truncation below the event/integration noise floor.
const H_JAC: f64 = 1e-6;
const MAX_NEWTON: usize = 30;

/// Integrator tolerances and budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Budget in the integration time variable.
    pub max_time: f64,
    /// Tolerance on the section function at a localized crossing.
    pub event_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            max_time: 1e7,
            event_tol: 1e-12,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && self.max_time > 0.0
            && self.event_tol > 0.0;
        if !positive {
            return Err(Error::OutOfRange {
                what: "integrator config",
                value: f64::NAN,
                range: "all fields positive",
            });
        }
        if self.rel_tol < 1e-13 {
            return Err(Error::OutOfRange {
                what: "rel_tol",
                value: self.rel_tol,
                range: "[1e-13, inf)",
            });
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Which two coordinates chart the section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectionChart {
    /// `(zeta, J)` on the normal-form section `xi = 0`.
    NormalFormZetaJ,
    /// Two orthonormal in-plane coordinates.
    Plane,
}

/// An oriented planar Poincaré section `normal . y = offset`, crossed in the
/// direction where `d/dt (normal . y)` has the sign of `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub normal: V3,
    pub offset: f64,
    pub direction: f64,
    pub chart: SectionChart,
}

impl SectionSpec {
    /// The normal-form section `S-`: `xi = 0` crossed with `xi` increasing,
    /// charted by `(zeta, J)`.
    pub fn nf_s_minus() -> Self {
        Self {
            normal: [1.0, 0.0, 0.0],
            offset: 0.0,
            direction: 1.0,
            chart: SectionChart::NormalFormZetaJ,
        }
    }

    /// The auxiliary section `S+`: `xi = 0` crossed with `xi` decreasing
    /// (the top of the loop), charted by `(zeta, J)`.
    pub fn nf_s_plus() -> Self {
        Self { direction: -1.0, ..Self::nf_s_minus() }
    }

    /// A general plane section with in-plane chart coordinates.
    pub fn plane(normal: V3, offset: f64, direction: f64) -> Result<Self> {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::OutOfRange {
                what: "section normal",
                value: 0.0,
                range: "nonzero vector",
            });
        }
        Ok(Self { normal, offset, direction: direction.signum(), chart: SectionChart::Plane })
    }

    /// The plane `x = offset` crossed with `x` increasing; chart `(y, z)`.
    /// This is the verification section for the FitzHugh-Nagumo system.
    pub fn plane_x(offset: f64) -> Self {
        Self {
            normal: [1.0, 0.0, 0.0],
            offset,
            direction: 1.0,
            chart: SectionChart::Plane,
        }
    }

    /// Signed distance-like section function `normal . y - offset`.
    pub fn value(&self, y: &V3) -> f64 {
        self.normal[0] * y[0] + self.normal[1] * y[1] + self.normal[2] * y[2] - self.offset
    }

    fn basis(&self) -> (V3, V3, V3) {
        let n = self.normal;
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let nh = [n[0] / norm, n[1] / norm, n[2] / norm];
        // Seed with the canonical axis least aligned with the normal.
        let (a0, a1, a2) = (nh[0].abs(), nh[1].abs(), nh[2].abs());
        let seed: V3 = if a0 <= a1 && a0 <= a2 {
            [1.0, 0.0, 0.0]
        } else if a1 <= a2 {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let dot = seed[0] * nh[0] + seed[1] * nh[1] + seed[2] * nh[2];
        let mut e1 = [seed[0] - dot * nh[0], seed[1] - dot * nh[1], seed[2] - dot * nh[2]];
        let e1n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
        for v in &mut e1 {
            *v /= e1n;
        }
        let e2 = [
            nh[1] * e1[2] - nh[2] * e1[1],
            nh[2] * e1[0] - nh[0] * e1[2],
            nh[0] * e1[1] - nh[1] * e1[0],
        ];
        (nh, e1, e2)
    }

    /// Chart coordinates of a state lying on the section.
    pub fn to_chart(&self, y: &V3) -> [f64; 2] {
        match self.chart {
            SectionChart::NormalFormZetaJ => [y[2], normalform::j_of((*y).into())],
            SectionChart::Plane => {
                let (nh, e1, e2) = self.basis();
                // The plane passes through (offset / |normal|) nh.
                let norm = (self.normal[0] * nh[0] + self.normal[1] * nh[1] + self.normal[2] * nh[2]).abs();
                let d = self.offset / norm;
                let p = [y[0] - d * nh[0], y[1] - d * nh[1], y[2] - d * nh[2]];
                [
                    p[0] * e1[0] + p[1] * e1[1] + p[2] * e1[2],
                    p[0] * e2[0] + p[1] * e2[1] + p[2] * e2[2],
                ]
            }
        }
    }

    /// The section state with the given chart coordinates.
    pub fn from_chart(&self, chart: [f64; 2]) -> Result<V3> {
        match self.chart {
            SectionChart::NormalFormZetaJ => {
                let eta0 = normalform::eta_on_section(chart[1])?;
                Ok([0.0, eta0, chart[0]])
            }
            SectionChart::Plane => {
                let (nh, e1, e2) = self.basis();
                let norm = (self.normal[0] * nh[0] + self.normal[1] * nh[1] + self.normal[2] * nh[2]).abs();
                let d = self.offset / norm;
                let mut y = [0.0; 3];
                for i in 0..3 {
                    y[i] = d * nh[i] + chart[0] * e1[i] + chart[1] * e2[i];
                }
                Ok(y)
            }
        }
    }
}

/// A stored trajectory with dense output; sample it anywhere inside its span.
#[derive(Debug, Clone)]
pub struct Trajectory {
    steps: Vec<DenseStep>,
    /// Sign of integration: +1 forward, -1 backward in the caller's time.
    sign: f64,
    t0: f64,
    /// Requested span; the last step may reach past it.
    span: f64,
    end_y: V3,
}

impl Trajectory {
    pub fn start_time(&self) -> f64 {
        self.t0
    }

    pub fn end_time(&self) -> f64 {
        self.t0 + self.sign * self.span
    }

    pub fn end_state(&self) -> V3 {
        self.end_y
    }

    /// Interpolated state at time `t` (clamped to the span).
    pub fn sample(&self, t: f64) -> V3 {
        let s = (self.sign * (t - self.t0)).clamp(0.0, self.span);
        let idx = self
            .steps
            .partition_point(|step| step.t1() < s)
            .min(self.steps.len().saturating_sub(1));
        self.steps[idx].eval(s)
    }

    pub fn steps(&self) -> &[DenseStep] {
        &self.steps
    }
}

/// Integrates `y' = f(t, y)` over `t_span` (either orientation) and returns
/// the dense trajectory.
pub fn integrate<F>(f: F, y0: V3, t_span: (f64, f64), config: &IntegratorConfig) -> Result<Trajectory>
where
    F: Fn(f64, V3) -> V3,
{
    config.validate()?;
    let (t0, t1) = t_span;
    let span = (t1 - t0).abs();
    if span > config.max_time {
        return Err(Error::MaxTimeExceeded { max_time: config.max_time });
    }
    let sign = if t1 >= t0 { 1.0 } else { -1.0 };
    // Internal clock s >= 0; backward spans integrate the reversed field.
    let g = |s: f64, y: V3| -> V3 {
        let v = f(t0 + sign * s, y);
        [sign * v[0], sign * v[1], sign * v[2]]
    };
    let mut stepper = Dopri5::new(g, 0.0, y0, config.rel_tol, config.abs_tol, config.max_step);
    let mut steps = Vec::new();
    while stepper.t() < span {
        let step = stepper.step()?;
        let done = step.t1() >= span;
        steps.push(step);
        if done {
            break;
        }
    }
    let end_y = steps.last().map_or(y0, |last| last.eval(span));
    Ok(Trajectory { steps, sign, t0, span, end_y })
}

/// Flavour of a trajectory CSV dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryCsv {
    /// Header `t,x,y,z`.
    Original,
    /// Header `tau,xi,eta,zeta,J`, with the second integral appended.
    NormalForm,
}

/// Renders a trajectory as CSV at the integrator's own step resolution,
/// 17 significant digits per value.
pub fn trajectory_csv(traj: &Trajectory, flavour: TrajectoryCsv) -> String {
    let mut out = String::from(match flavour {
        TrajectoryCsv::Original => "t,x,y,z\n",
        TrajectoryCsv::NormalForm => "tau,xi,eta,zeta,J\n",
    });
    let mut row = |t: f64, y: V3| {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}", t, y[0], y[1], y[2]));
        if flavour == TrajectoryCsv::NormalForm {
            out.push_str(&format!(",{:.16e}", crate::normalform::j_of(y.into())));
        }
        out.push('\n');
    };
    let t_end = traj.end_time();
    let t0 = traj.start_time();
    let sign = if t_end >= t0 { 1.0 } else { -1.0 };
    if let Some(first) = traj.steps().first() {
        row(t0, first.y0);
    }
    for step in traj.steps() {
        let t = t0 + sign * step.t1();
        if sign * (t - t_end) < 0.0 {
            row(t, step.y1);
        } else {
            row(t_end, traj.end_state());
            break;
        }
    }
    out
}

/// Outcome of a directed first-return computation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReturnResult {
    pub endpoint: V3,
    pub return_time: f64,
    pub crossings_skipped: usize,
}

/// Integrates from `state0` until the `(skip + 1)`-th directed transversal
/// crossing of `section`, localizing the crossing on the dense interpolant
/// (bisection to `event_tol`, one Newton polish).
///
/// Grazing encounters (sign change with the transversal derivative below
/// threshold) are not usable returns; they are skipped, and only if the time
/// budget runs out with nothing but grazes seen does the error report the
/// last tangency.
pub fn first_return<F>(
    f: F,
    section: &SectionSpec,
    state0: V3,
    config: &IntegratorConfig,
    skip: usize,
) -> Result<ReturnResult>
where
    F: Fn(f64, V3) -> V3,
{
    config.validate()?;
    let mut stepper = Dopri5::new(&f, 0.0, state0, config.rel_tol, config.abs_tol, config.max_step);
    let mut s_prev = section.value(&state0);
    let mut crossings = 0usize;
    let mut grazes = 0usize;
    let mut last_graze: Option<(f64, f64)> = None;

    let no_return = |last_graze: Option<(f64, f64)>| match last_graze {
        Some((t, derivative)) => Err(Error::TangentialCrossing { t, derivative }),
        None => Err(Error::NoReturn { max_time: config.max_time }),
    };

    loop {
        if stepper.t() > config.max_time || grazes > 64 {
            return no_return(last_graze);
        }
        let step = match stepper.step() {
            Ok(step) => step,
            // A trajectory that blows up never returns; report it as such.
            Err(Error::StepUnderflow { .. }) => return no_return(last_graze),
            Err(e) => return Err(e),
        };
        if step.y1.iter().any(|v| v.abs() > ESCAPE_BOUND) {
            return no_return(last_graze);
        }
        let s_new = section.value(&step.y1);
        let crossed = if section.direction > 0.0 {
            s_prev < 0.0 && s_new >= 0.0
        } else {
            s_prev > 0.0 && s_new <= 0.0
        };
        if crossed {
            match localize_crossing(&f, section, &step, config)? {
                Localized::Crossing(t_star, y_star) => {
                    crossings += 1;
                    if crossings > skip {
                        return Ok(ReturnResult {
                            endpoint: y_star,
                            return_time: t_star,
                            crossings_skipped: skip,
                        });
                    }
                }
                Localized::Graze { t, derivative } => {
                    grazes += 1;
                    last_graze = Some((t, derivative));
                }
            }
        }
        s_prev = s_new;
    }
}

enum Localized {
    Crossing(f64, V3),
    Graze { t: f64, derivative: f64 },
}

fn localize_crossing<F>(
    f: &F,
    section: &SectionSpec,
    step: &DenseStep,
    config: &IntegratorConfig,
) -> Result<Localized>
where
    F: Fn(f64, V3) -> V3,
{
    let g = |theta: f64| section.value(&step.eval_theta(theta));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let g_hi = g(hi);
    // Bisect on the interpolant until the section residual or the bracket
    // is resolved.
    let mut theta = hi;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 || gm.signum() == g_hi.signum() {
            hi = mid;
        } else {
            lo = mid;
        }
        theta = 0.5 * (lo + hi);
        if g(theta).abs() < config.event_tol || hi - lo < 1e-15 {
            break;
        }
    }
    // One Newton polish in theta using the true field.
    let mut y = step.eval_theta(theta);
    let mut t = step.t0 + theta * step.h;
    let n = section.normal;
    for _ in 0..2 {
        let v = f(t, y);
        let ds_dt = n[0] * v[0] + n[1] * v[1] + n[2] * v[2];
        let fnorm = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if ds_dt.abs() <= TANGENT_TOL * (1.0 + fnorm) {
            return Ok(Localized::Graze { t, derivative: ds_dt });
        }
        let resid = section.value(&y);
        if resid.abs() < config.event_tol {
            return Ok(Localized::Crossing(t, y));
        }
        let dt = -resid / ds_dt;
        theta = (theta + dt / step.h).clamp(0.0, 1.0);
        t = step.t0 + theta * step.h;
        y = step.eval_theta(theta);
    }
    let resid = section.value(&y);
    if resid.abs() < config.event_tol {
        Ok(Localized::Crossing(t, y))
    } else {
        Err(Error::NoConvergence {
            what: "section crossing localization",
            iterations: 82,
            residual: resid.abs(),
        })
    }
}

/// First return expressed in section chart coordinates, plus the return time.
pub fn return_map<F>(
    f: F,
    section: &SectionSpec,
    chart: [f64; 2],
    config: &IntegratorConfig,
    n_returns: usize,
) -> Result<([f64; 2], f64)>
where
    F: Fn(f64, V3) -> V3,
{
    let state = section.from_chart(chart)?;
    let mut total_t = 0.0;
    let mut y = state;
    for _ in 0..n_returns.max(1) {
        let ret = first_return(&f, section, y, config, 0)?;
        total_t += ret.return_time;
        y = ret.endpoint;
    }
    Ok((section.to_chart(&y), total_t))
}

/// Central-difference Jacobian of the in-chart return map, base step
/// `1e-6 (1 + |coordinate|)` per coordinate.
///
/// Near a separatrix the probe displacement can carry a trajectory clean out
/// of the oscillatory region (on the FitzHugh-Nagumo chart the integral J
/// moves by 2h/eps); when a probe return fails, the step shrinks until both
/// one-sided returns come back.
pub fn return_map_jacobian<F>(
    f: F,
    section: &SectionSpec,
    anchor: [f64; 2],
    config: &IntegratorConfig,
    n_returns: usize,
) -> Result<[[f64; 2]; 2]>
where
    F: Fn(f64, V3) -> V3,
{
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let mut h = H_JAC * (1.0 + anchor[j].abs());
        // Keep J strictly positive on the normal-form chart.
        if section.chart == SectionChart::NormalFormZetaJ && j == 1 {
            h = h.min(0.4 * anchor[1]);
        }
        let mut column = None;
        let mut last_err = None;
        for _ in 0..5 {
            let mut plus = anchor;
            plus[j] += h;
            let mut minus = anchor;
            minus[j] -= h;
            match (
                return_map(&f, section, plus, config, n_returns),
                return_map(&f, section, minus, config, n_returns),
            ) {
                (Ok((rp, _)), Ok((rm, _))) => {
                    column = Some([(rp[0] - rm[0]) / (2.0 * h), (rp[1] - rm[1]) / (2.0 * h)]);
                    break;
                }
                (Err(e), _) | (_, Err(e)) => {
                    last_err = Some(e);
                    h *= 0.1;
                }
            }
        }
        match column {
            Some(col) => {
                jac[0][j] = col[0];
                jac[1][j] = col[1];
            }
            None => return Err(last_err.expect("probe failure recorded")),
        }
    }
    Ok(jac)
}

/// A located periodic orbit of the return map.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OrbitResult {
    /// Section state of the fixed point.
    pub anchor: V3,
    /// The same point in chart coordinates.
    pub anchor_chart: [f64; 2],
    pub period: f64,
    /// Nontrivial Floquet multipliers: eigenvalues of the 2x2 return-map
    /// Jacobian, so either both real or a conjugate pair.
    pub multipliers: [Complex64; 2],
    pub residual: f64,
}

fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex64::new((tr - r) / 2.0, 0.0), Complex64::new((tr + r) / 2.0, 0.0)]
    } else {
        let im = (-disc).sqrt() / 2.0;
        [Complex64::new(tr / 2.0, -im), Complex64::new(tr / 2.0, im)]
    }
}

fn solve_2x2(a: &[[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-300 {
        return None;
    }
    Some([
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ])
}

/// Newton iteration on `(return map - id)` in chart coordinates, seeded at
/// `guess`. Steps are damped and capped to half the anchor scale so the
/// iteration cannot tunnel to the equilibrium's degenerate fixed point.
pub fn find_periodic_orbit<F>(
    f: F,
    section: &SectionSpec,
    guess: [f64; 2],
    config: &IntegratorConfig,
) -> Result<OrbitResult>
where
    F: Fn(f64, V3) -> V3,
{
    find_periodic_orbit_n(f, section, guess, config, 1)
}

/// Same as [`find_periodic_orbit`] for the `n_returns`-th iterate of the
/// return map (n_returns = 2 locates period-doubled points).
pub fn find_periodic_orbit_n<F>(
    f: F,
    section: &SectionSpec,
    guess: [f64; 2],
    config: &IntegratorConfig,
    n_returns: usize,
) -> Result<OrbitResult>
where
    F: Fn(f64, V3) -> V3,
{
    let nf_chart = section.chart == SectionChart::NormalFormZetaJ;
    // Component-wise step caps. Asymptotic seeds can start far from the
    // orbit (their J underestimates by O(k) factors), so the iteration must
    // crawl rather than jump; large steps tunnel to the equilibrium or
    // through the separatrix.
    let cap_for = |p: &[f64; 2]| -> [f64; 2] {
        if nf_chart {
            [0.4 * (1.0 + 0.25 * p[0].abs()), 0.3 * p[1].abs().max(1e-4)]
        } else {
            let s = 0.25 * p[0].abs().max(p[1].abs()).max(1e-6);
            [s, s]
        }
    };
    let tol = |p: &[f64; 2]| 1e-11 * (1.0 + p[0].abs().max(p[1].abs()));
    // Return-map evaluations carry integration/event noise; once the
    // residual stalls below this bound, the point is the orbit to within
    // the achievable accuracy.
    let stall_tol = |p: &[f64; 2]| 1e-6 * (1.0 + p[0].abs().max(p[1].abs()));

    let mut p = guess;
    let (mut r, mut period) = return_map(&f, section, p, config, n_returns)?;
    let mut res = [r[0] - p[0], r[1] - p[1]];
    let mut res_norm = res[0].abs().max(res[1].abs());
    let mut best = (p, res_norm, period);
    let mut stalled = 0usize;
    let mut iterations = 0;
    while res_norm > tol(&p) {
        iterations += 1;
        if iterations > MAX_NEWTON {
            return Err(Error::NoConvergence {
                what: "periodic orbit Newton",
                iterations: MAX_NEWTON,
                residual: res_norm,
            });
        }
        let jac = return_map_jacobian(&f, section, p, config, n_returns)?;
        let a = [[jac[0][0] - 1.0, jac[0][1]], [jac[1][0], jac[1][1] - 1.0]];
        let mut d = solve_2x2(&a, [-res[0], -res[1]]).ok_or(Error::NoConvergence {
            what: "periodic orbit Newton (singular Jacobian)",
            iterations,
            residual: res_norm,
        })?;
        let cap = cap_for(&p);
        for i in 0..2 {
            if d[i].abs() > cap[i] {
                let scale = cap[i] / d[i].abs();
                d[0] *= scale;
                d[1] *= scale;
            }
        }
        // Take the capped step; halve only if it leaves the chart domain.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..6 {
            let mut cand = [p[0] + lambda * d[0], p[1] + lambda * d[1]];
            if nf_chart {
                cand[1] = cand[1].clamp(1e-12, 0.96 * E_INV);
            }
            match return_map(&f, section, cand, config, n_returns) {
                Ok((rc, tc)) => {
                    p = cand;
                    r = rc;
                    res = [rc[0] - cand[0], rc[1] - cand[1]];
                    res_norm = res[0].abs().max(res[1].abs());
                    period = tc;
                    accepted = true;
                    break;
                }
                Err(_) => lambda *= 0.5,
            }
        }
        if !accepted {
            return Err(Error::NoConvergence {
                what: "periodic orbit Newton (no acceptable step)",
                iterations,
                residual: res_norm,
            });
        }
        if res_norm < 0.6 * best.1 {
            best = (p, res_norm, period);
            stalled = 0;
        } else {
            stalled += 1;
            // Stagnating at the evaluation noise floor counts as converged.
            if stalled >= 3 && best.1 < stall_tol(&p) {
                p = best.0;
                res_norm = best.1;
                period = best.2;
                break;
            }
        }
    }
    let _ = r;
    let jac = return_map_jacobian(&f, section, p, config, n_returns)?;
    Ok(OrbitResult {
        anchor: section.from_chart(p)?,
        anchor_chart: p,
        period,
        multipliers: eigenvalues_2x2(&jac),
        residual: res_norm,
    })
}
