//! Dormand-Prince 5(4) pair with first-same-as-last stages and a PI step controller.

use nalgebra::SVector;

pub type State6 = SVector<f64, 6>;

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

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One trial step from `y` with `k1 = f(y)`. Returns the fifth-order
/// solution, the embedded error estimate and `f(y_new)`.
pub fn step<F: Fn(&State6) -> State6>(f: &F, y: &State6, k1: &State6, h: f64) -> (State6, State6, State6) {
    let k2 = f(&(y + h * A21 * k1));
    let k3 = f(&(y + h * (A31 * k1 + A32 * k2)));
    let k4 = f(&(y + h * (A41 * k1 + A42 * k2 + A43 * k3)));
    let k5 = f(&(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)));
    let k6 = f(&(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)));
    let y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    let k7 = f(&y_new);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    (y_new, err, k7)
}

/// Scaled RMS norm of the error estimate.
pub fn error_norm(err: &State6, y: &State6, y_new: &State6, rtol: f64, atol: f64) -> f64 {
    let sum: f64 = (0..6)
        .map(|i| {
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / 6.0).sqrt()
}

/// Starting step from the two-derivative heuristic of Hairer, Norsett and Wanner.
pub fn initial_step<F: Fn(&State6) -> State6>(f: &F, y: &State6, k1: &State6, rtol: f64, atol: f64, max_step: f64) -> f64 {
    let scale = |i: usize| atol + rtol * y[i].abs();
    let norm = |v: &State6| ((0..6).map(|i| (v[i] / scale(i)).powi(2)).sum::<f64>() / 6.0).sqrt();
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(max_step);
    let k2 = f(&(y + h0 * k1));
    let d2 = norm(&(k2 - k1)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(max_step)
}

/// PI step-size controller (exponents 0.17 / 0.04).
#[derive(Debug, Clone)]
pub struct Controller {
    err_old: f64,
    rejected_last: bool,
}

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

impl Default for Controller {
    fn default() -> Self {
        Self { err_old: 1e-4, rejected_last: false }
    }
}

impl Controller {
    /// Next step size after an accepted step with error `err <= 1`.
    pub fn accept(&mut self, h: f64, err: f64) -> f64 {
        let err = err.max(1e-10);
        let fac = (SAFETY * err.powf(-EXPO1) * self.err_old.powf(BETA)).clamp(FAC_MIN, FAC_MAX);
        let fac = if self.rejected_last { fac.min(1.0) } else { fac };
        self.err_old = err;
        self.rejected_last = false;
        h * fac
    }

    /// Retry step size after a rejected step with error `err > 1`.
    pub fn reject(&mut self, h: f64, err: f64) -> f64 {
        self.rejected_last = true;
        h * (SAFETY * err.powf(-EXPO1)).max(FAC_MIN)
    }
}
