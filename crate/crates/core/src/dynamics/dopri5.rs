//! Dormand-Prince 5(4) embedded pair for 3-dimensional autonomous fields,
//! with the classic 4th-order dense-output interpolant (Hairer's
//! coefficients). First-same-as-last: 6 field evaluations per accepted step.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// b - b_hat, the embedded error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type V3 = [f64; 3];

fn axpy(y: &V3, h: f64, terms: &[(f64, &V3)]) -> V3 {
    let mut out = *y;
    for i in 0..3 {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// One accepted step together with its dense-output polynomial on
/// `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    pub y0: V3,
    pub y1: V3,
    rcont: [V3; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Evaluates the interpolant at `t` (clamped to the step interval).
    pub fn eval(&self, t: f64) -> V3 {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        self.eval_theta(theta)
    }

    pub fn eval_theta(&self, theta: f64) -> V3 {
        let theta1 = 1.0 - theta;
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + theta1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + theta1 * self.rcont[4][i])));
        }
        out
    }
}

/// Adaptive stepper. Drive it with [`Dopri5::step`]; each call returns the
/// next accepted step (after internal rejections).
pub struct Dopri5<F> {
    f: F,
    t: f64,
    y: V3,
    k1: V3,
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    just_rejected: bool,
}

impl<F: Fn(f64, V3) -> V3> Dopri5<F> {
    pub fn new(f: F, t0: f64, y0: V3, rel_tol: f64, abs_tol: f64, max_step: f64) -> Self {
        let k1 = f(t0, y0);
        // Crude initial step from the field magnitude; the controller fixes
        // it up within a few steps.
        let fnorm = k1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ynorm = y0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h0 = (1e-2 * (ynorm + 1.0) / (fnorm + 1e-8)).min(max_step).max(1e-10);
        Self {
            f,
            t: t0,
            y: y0,
            k1,
            h: h0,
            rel_tol,
            abs_tol,
            max_step,
            just_rejected: false,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> V3 {
        self.y
    }

    /// Advances one accepted step and returns it with dense output.
    pub fn step(&mut self) -> Result<DenseStep> {
        loop {
            let h = self.h;
            if !(h > 1e-14 * self.t.abs().max(1.0)) {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            let (t, y, k1) = (self.t, self.y, self.k1);
            let f = &self.f;
            let k2 = f(t + C2 * h, axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * h,
                axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y1 = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + h, y1);

            let mut err_sq = 0.0;
            let mut finite = true;
            for i in 0..3 {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y1[i].abs());
                let r = e / sc;
                err_sq += r * r;
                finite &= y1[i].is_finite() && e.is_finite();
            }
            let err = (err_sq / 3.0).sqrt();

            if !finite || err > 1.0 {
                let shrink = if finite { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
                self.h = h * shrink;
                self.just_rejected = true;
                continue;
            }

            let dy = [y1[0] - y[0], y1[1] - y[1], y1[2] - y[2]];
            let mut rcont = [[0.0; 3]; 5];
            for i in 0..3 {
                let bspl = h * k1[i] - dy[i];
                rcont[0][i] = y[i];
                rcont[1][i] = dy[i];
                rcont[2][i] = bspl;
                rcont[3][i] = dy[i] - h * k7[i] - bspl;
                rcont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let step = DenseStep { t0: t, h, y0: y, y1, rcont };

            let mut grow = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            if self.just_rejected {
                grow = grow.min(1.0);
            }
            self.just_rejected = false;
            self.h = (h * grow).min(self.max_step);
            self.t = t + h;
            self.y = y1;
            self.k1 = k7;
            return Ok(step);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_t: f64, s: V3) -> V3 {
        [s[1], -s[0], 0.0]
    }

    #[test]
    fn harmonic_oscillator_closes_after_two_pi() {
        let mut stepper = Dopri5::new(harmonic, 0.0, [1.0, 0.0, 0.0], 1e-10, 1e-12, 0.1);
        let target = 2.0 * std::f64::consts::PI;
        let mut last = None;
        while stepper.t() < target {
            last = Some(stepper.step().unwrap());
        }
        let end = last.unwrap().eval(target);
        assert!((end[0] - 1.0).abs() < 1e-9, "x(2pi) = {}", end[0]);
        assert!(end[1].abs() < 1e-9, "y(2pi) = {}", end[1]);
    }

    #[test]
    fn dense_output_matches_analytic_solution() {
        let mut stepper = Dopri5::new(harmonic, 0.0, [1.0, 0.0, 0.0], 1e-10, 1e-12, 0.2);
        for _ in 0..60 {
            let step = stepper.step().unwrap();
            for j in 1..5 {
                let t = step.t0 + step.h * j as f64 / 5.0;
                let y = step.eval(t);
                assert!((y[0] - t.cos()).abs() < 1e-9);
                assert!((y[1] + t.sin()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn step_underflow_is_reported() {
        // A field that blows up in finite time keeps shrinking the step once
        // the state overflows to non-finite values.
        let blowup = |_t: f64, s: V3| {
            [s[0] * s[0], 0.0, 0.0]
        };
        let mut stepper = Dopri5::new(blowup, 0.0, [1e3, 0.0, 0.0], 1e-10, 1e-12, 10.0);
        let mut result = Ok(());
        for _ in 0..100_000 {
            match stepper.step() {
                Ok(step) => {
                    if !step.y1.iter().all(|v| v.is_finite()) {
                        panic!("accepted a non-finite step");
                    }
                }
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        assert!(matches!(result, Err(Error::StepUnderflow { .. })));
    }
}
