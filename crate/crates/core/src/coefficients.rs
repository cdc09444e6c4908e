//! Quadrature weights for the exponential-integrator update.
//!
//! Per mode, with half angle `theta = delta^± * tau / (2 eps^2)`:
//!
//! ```text
//! p(tau) = -i tau e^{-i theta} sinc(theta)
//! q(tau) = -(tau eps^2 / delta^±) (1 - e^{-i theta} sinc(theta))
//! ```
//!
//! `p` comes from freezing the source over the step and integrating the
//! oscillator exactly; `q` is the companion weight for the linear-in-time
//! source term, so `p = O(tau)` and `q = O(tau^2)` uniformly in `eps`.
//! Both reduce to `p = -i tau`, `q = -i tau^2/2` as the mode's beat
//! frequency vanishes; the closed form for `q` divides by `delta^±` and is
//! replaced by a series in `theta` near that limit.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::modes::ModeTable;

/// `sin(s)/s` with a series branch near zero.
pub fn sinc(s: f64) -> f64 {
    if s.abs() < 1e-4 {
        let s2 = s * s;
        1.0 - s2 / 6.0 + s2 * s2 / 120.0
    } else {
        s.sin() / s
    }
}

fn p_weight(theta: f64, tau: f64) -> Complex64 {
    Complex64::new(0.0, -tau) * Complex64::from_polar(sinc(theta), -theta)
}

/// `rate` is `delta^±/eps^2`, so the prefactor `tau eps^2 / delta^±` is
/// `tau / rate` and never touches `eps` directly.
fn q_weight(theta: f64, tau: f64, rate: f64) -> Complex64 {
    if theta.abs() <= 5e-4 {
        // 1 - e^{-i theta} sinc(theta) = i theta + 2/3 theta^2 - i/3 theta^3
        //                                - 2/15 theta^4 + O(theta^5)
        let t2 = tau * tau;
        Complex64::new(
            t2 * (-theta / 3.0 + theta * theta * theta / 15.0),
            t2 * (-0.5 + theta * theta / 6.0),
        )
    } else {
        let e = Complex64::from_polar(sinc(theta), -theta);
        -(tau / rate) * (Complex64::new(1.0, 0.0) - e)
    }
}

/// Per-mode weights and phases for one time step of size `tau`.
#[derive(Debug, Clone)]
pub struct StepCoefficients {
    tau: f64,
    eps: f64,
    p_minus: Vec<Complex64>,
    q_minus: Vec<Complex64>,
    p_plus: Vec<Complex64>,
    q_plus: Vec<Complex64>,
    /// `e^{-i delta^- tau / eps^2}` per slot; the `+` branch is its conjugate.
    phase_minus: Vec<Complex64>,
    /// Derivative filter `2 sin(omega tau / 2) / tau` per slot, the
    /// standard sinc-filtered stand-in for the beat frequency
    /// `omega = delta^-/eps^2` in the derivative proxies. Bounded by
    /// `2/tau` where the raw frequency grows like `mu^2`, which is what
    /// keeps high modes from polluting the quadrature terms.
    filter: Vec<f64>,
    /// Carrier phase `e^{-i tau / eps^2}` used in the recombination.
    carrier: Complex64,
}

impl StepCoefficients {
    pub fn new(table: &ModeTable, tau: f64) -> Result<StepCoefficients> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(CoreError::InvalidTimeStep(tau));
        }
        let eps = table.eps();
        let n = table.len();
        let mut c = StepCoefficients {
            tau,
            eps,
            p_minus: Vec::with_capacity(n),
            q_minus: Vec::with_capacity(n),
            p_plus: Vec::with_capacity(n),
            q_plus: Vec::with_capacity(n),
            phase_minus: Vec::with_capacity(n),
            filter: Vec::with_capacity(n),
            carrier: Complex64::from_polar(1.0, -tau / (eps * eps)),
        };
        for k in 0..n {
            let rate_minus = table.reduced_minus()[k];
            let rate_plus = table.reduced_plus()[k];
            let theta_minus = 0.5 * rate_minus * tau;
            let theta_plus = 0.5 * rate_plus * tau;
            c.p_minus.push(p_weight(theta_minus, tau));
            c.q_minus.push(q_weight(theta_minus, tau, rate_minus));
            c.p_plus.push(p_weight(theta_plus, tau));
            c.q_plus.push(q_weight(theta_plus, tau, rate_plus));
            c.phase_minus
                .push(Complex64::from_polar(1.0, -rate_minus * tau));
            c.filter.push(2.0 * (rate_minus * tau / 2.0).sin() / tau);
        }
        Ok(c)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn p_minus(&self) -> &[Complex64] {
        &self.p_minus
    }

    pub fn q_minus(&self) -> &[Complex64] {
        &self.q_minus
    }

    pub fn p_plus(&self) -> &[Complex64] {
        &self.p_plus
    }

    pub fn q_plus(&self) -> &[Complex64] {
        &self.q_plus
    }

    pub fn phase_minus(&self) -> &[Complex64] {
        &self.phase_minus
    }

    pub fn filter(&self) -> &[f64] {
        &self.filter
    }

    pub fn carrier(&self) -> Complex64 {
        self.carrier
    }
}
