//! Multiscale exponential-integrator time stepping.
//!
//! One step advances the spinor through four Fourier-space components, the
//! projections of the carrier-split ansatz
//!
//! ```text
//! phi(t_n + s) = e^{-is/eps^2} (psi_+^1 + psi_-^1) + e^{is/eps^2} (psi_+^2 + psi_-^2)
//! ```
//!
//! where `psi_+^1` and `psi_-^2` start at the projected state and the other
//! two start at zero. Each component's oscillator phase is integrated
//! exactly; the potential term enters through the `p`/`q` quadrature
//! weights with derivative proxies built through the sinc filter. The small
//! components are updated first, and their finite-difference time
//! derivatives feed the update of the large components.

use num_complex::Complex64;

use crate::coefficients::StepCoefficients;
use crate::error::{CoreError, Result};
use crate::field::SpinorField;
use crate::grid::Grid;
use crate::modes::{Branch, ModeTable};
use crate::potential::{NodalPotential, PotentialSampler};
use crate::spectral::{ModeCoefficients, Spectral};

/// Time-stepping state: current field, time, and completed step count.
#[derive(Debug, Clone)]
pub struct MtiState {
    pub field: SpinorField,
    pub t: f64,
    pub step_index: usize,
}

impl MtiState {
    pub fn new(field: SpinorField) -> MtiState {
        MtiState {
            field,
            t: 0.0,
            step_index: 0,
        }
    }
}

/// Callback receiving the state at configured step intervals.
pub trait Observer {
    fn observe(&mut self, step: usize, t: f64, field: &SpinorField);
}

impl<F: FnMut(usize, f64, &SpinorField)> Observer for F {
    fn observe(&mut self, step: usize, t: f64, field: &SpinorField) {
        self(step, t, field)
    }
}

/// An observer plus its firing cadence: fires every `every` steps when
/// `every > 0`; the initial and final states always fire.
pub struct ObserverSlot<'a> {
    pub every: usize,
    pub observer: &'a mut dyn Observer,
}

/// `buf <- transform(scale * W * inverse_transform(buf))` using the two
/// real-space scratch fields.
fn sandwich_in_place(
    spectral: &mut Spectral,
    w: &NodalPotential,
    ra: &mut SpinorField,
    rb: &mut SpinorField,
    buf: &mut ModeCoefficients,
    scale: f64,
) -> Result<()> {
    spectral.inverse_into(buf, ra)?;
    w.apply_w((ra.up(), ra.dn()), rb.components_mut(), scale);
    spectral.forward_into(rb, buf)
}

/// Workspace and coefficients for repeated steps of one fixed size.
pub struct MtiIntegrator<'a> {
    table: &'a ModeTable,
    coeffs: StepCoefficients,
    sampler: &'a dyn PotentialSampler,
    spectral: Spectral,
    time_independent: bool,
    w: NodalPotential,
    w_dt: NodalPotential,
    w_sampled: bool,
    // spectral buffers; phi_hat doubles as the recombination output
    phi_hat: ModeCoefficients,
    psi_p1: ModeCoefficients,
    psi_m2: ModeCoefficients,
    f1: ModeCoefficients,
    f2: ModeCoefficients,
    g1: ModeCoefficients,
    g2: ModeCoefficients,
    fd_p1: ModeCoefficients,
    fd_m1: ModeCoefficients,
    fd_p2: ModeCoefficients,
    fd_m2: ModeCoefficients,
    fs_m1: ModeCoefficients,
    fs_p2: ModeCoefficients,
    small_m1: ModeCoefficients,
    small_p2: ModeCoefficients,
    // real-space buffers
    psi1_r: SpinorField,
    psi2_r: SpinorField,
    ra: SpinorField,
    rb: SpinorField,
}

impl<'a> MtiIntegrator<'a> {
    pub fn new(
        table: &'a ModeTable,
        sampler: &'a dyn PotentialSampler,
        tau: f64,
    ) -> Result<MtiIntegrator<'a>> {
        let grid = *table.grid();
        let coeffs = StepCoefficients::new(table, tau)?;
        let n = grid.len();
        Ok(MtiIntegrator {
            table,
            coeffs,
            sampler,
            spectral: Spectral::new(grid),
            time_independent: sampler.is_time_independent(),
            w: NodalPotential::zeros(n),
            w_dt: NodalPotential::zeros(n),
            w_sampled: false,
            phi_hat: ModeCoefficients::zeros(grid),
            psi_p1: ModeCoefficients::zeros(grid),
            psi_m2: ModeCoefficients::zeros(grid),
            f1: ModeCoefficients::zeros(grid),
            f2: ModeCoefficients::zeros(grid),
            g1: ModeCoefficients::zeros(grid),
            g2: ModeCoefficients::zeros(grid),
            fd_p1: ModeCoefficients::zeros(grid),
            fd_m1: ModeCoefficients::zeros(grid),
            fd_p2: ModeCoefficients::zeros(grid),
            fd_m2: ModeCoefficients::zeros(grid),
            fs_m1: ModeCoefficients::zeros(grid),
            fs_p2: ModeCoefficients::zeros(grid),
            small_m1: ModeCoefficients::zeros(grid),
            small_p2: ModeCoefficients::zeros(grid),
            psi1_r: SpinorField::zeros(grid),
            psi2_r: SpinorField::zeros(grid),
            ra: SpinorField::zeros(grid),
            rb: SpinorField::zeros(grid),
        })
    }

    pub fn grid(&self) -> &Grid {
        self.table.grid()
    }

    pub fn coefficients(&self) -> &StepCoefficients {
        &self.coeffs
    }

    pub fn tau(&self) -> f64 {
        self.coeffs.tau()
    }

    fn sample_potentials(&mut self, t: f64) {
        if self.time_independent {
            if !self.w_sampled {
                self.w.sample_into(self.sampler, self.table.grid(), t);
                self.w_sampled = true;
            }
        } else {
            self.w.sample_into(self.sampler, self.table.grid(), t);
            self.w_dt.sample_dt_into(self.sampler, self.table.grid(), t);
        }
    }

    /// Advance the state by one step of size `tau`.
    pub fn step(&mut self, state: &mut MtiState) -> Result<()> {
        if state.field.grid() != self.table.grid() {
            return Err(CoreError::GridMismatch(
                "state grid does not match integrator".into(),
            ));
        }
        self.sample_potentials(state.t);
        let n = self.table.len();
        let tau = self.coeffs.tau();
        let plus = self.table.projector(Branch::Plus);
        let minus = self.table.projector(Branch::Minus);

        // Split the transformed state into the two nonzero components.
        self.spectral.forward_into(&state.field, &mut self.phi_hat)?;
        for k in 0..n {
            let v = [self.phi_hat.up()[k], self.phi_hat.dn()[k]];
            let vp = plus[k].apply(v);
            let vm = minus[k].apply(v);
            self.psi_p1.up_mut()[k] = vp[0];
            self.psi_p1.dn_mut()[k] = vp[1];
            self.psi_m2.up_mut()[k] = vm[0];
            self.psi_m2.dn_mut()[k] = vm[1];
        }

        // Potential term of each nonzero component. The real-space copies
        // stay live for the time-derivative products.
        self.spectral.inverse_into(&self.psi_p1, &mut self.psi1_r)?;
        self.spectral.inverse_into(&self.psi_m2, &mut self.psi2_r)?;
        self.w.apply_w(
            (self.psi1_r.up(), self.psi1_r.dn()),
            self.rb.components_mut(),
            1.0,
        );
        self.spectral.forward_into(&self.rb, &mut self.f1)?;
        self.w.apply_w(
            (self.psi2_r.up(), self.psi2_r.dn()),
            self.rb.components_mut(),
            1.0,
        );
        self.spectral.forward_into(&self.rb, &mut self.f2)?;

        // Potential-derivative terms; the g buffers stay zero for
        // time-independent potentials and drop out of the updates.
        if !self.time_independent {
            self.w_dt.apply_w(
                (self.psi1_r.up(), self.psi1_r.dn()),
                self.rb.components_mut(),
                1.0,
            );
            self.spectral.forward_into(&self.rb, &mut self.g1)?;
            self.w_dt.apply_w(
                (self.psi2_r.up(), self.psi2_r.dn()),
                self.rb.components_mut(),
                1.0,
            );
            self.spectral.forward_into(&self.rb, &mut self.g2)?;
        }

        // Filtered derivative proxies of all four components.
        let filt = self.coeffs.filter();
        let mi = Complex64::new(0.0, -1.0);
        for k in 0..n {
            let f1k = [self.f1.up()[k], self.f1.dn()[k]];
            let f2k = [self.f2.up()[k], self.f2.dn()[k]];
            let pf1 = plus[k].apply(f1k);
            let mf1 = minus[k].apply(f1k);
            let pf2 = plus[k].apply(f2k);
            let mf2 = minus[k].apply(f2k);
            let fk = filt[k];
            self.fd_p1.up_mut()[k] = mi * (fk * self.psi_p1.up()[k] + pf1[0]);
            self.fd_p1.dn_mut()[k] = mi * (fk * self.psi_p1.dn()[k] + pf1[1]);
            self.fd_m1.up_mut()[k] = mi * mf1[0];
            self.fd_m1.dn_mut()[k] = mi * mf1[1];
            self.fd_p2.up_mut()[k] = mi * pf2[0];
            self.fd_p2.dn_mut()[k] = mi * pf2[1];
            self.fd_m2.up_mut()[k] = mi * (-fk * self.psi_m2.up()[k] + mf2[0]);
            self.fd_m2.dn_mut()[k] = mi * (-fk * self.psi_m2.dn()[k] + mf2[1]);
        }

        // fd_* <- transform(W * proxy).
        sandwich_in_place(
            &mut self.spectral,
            &self.w,
            &mut self.ra,
            &mut self.rb,
            &mut self.fd_p1,
            1.0,
        )?;
        sandwich_in_place(
            &mut self.spectral,
            &self.w,
            &mut self.ra,
            &mut self.rb,
            &mut self.fd_m1,
            1.0,
        )?;
        sandwich_in_place(
            &mut self.spectral,
            &self.w,
            &mut self.ra,
            &mut self.rb,
            &mut self.fd_p2,
            1.0,
        )?;
        sandwich_in_place(
            &mut self.spectral,
            &self.w,
            &mut self.ra,
            &mut self.rb,
            &mut self.fd_m2,
            1.0,
        )?;

        // Small components at the next level.
        let pp = self.coeffs.p_plus();
        let qp = self.coeffs.q_plus();
        for k in 0..n {
            let g1k = [self.g1.up()[k], self.g1.dn()[k]];
            let g2k = [self.g2.up()[k], self.g2.dn()[k]];
            let su = -pp[k].conj() * self.f1.up()[k]
                - qp[k].conj() * (g1k[0] + self.fd_p1.up()[k] + self.fd_m1.up()[k]);
            let sd = -pp[k].conj() * self.f1.dn()[k]
                - qp[k].conj() * (g1k[1] + self.fd_p1.dn()[k] + self.fd_m1.dn()[k]);
            let v = minus[k].apply([su, sd]);
            self.small_m1.up_mut()[k] = v[0];
            self.small_m1.dn_mut()[k] = v[1];

            let tu = pp[k] * self.f2.up()[k]
                + qp[k] * (g2k[0] + self.fd_p2.up()[k] + self.fd_m2.up()[k]);
            let td = pp[k] * self.f2.dn()[k]
                + qp[k] * (g2k[1] + self.fd_p2.dn()[k] + self.fd_m2.dn()[k]);
            let v = plus[k].apply([tu, td]);
            self.small_p2.up_mut()[k] = v[0];
            self.small_p2.dn_mut()[k] = v[1];
        }

        // Finite-difference derivatives of the small components:
        // (1/tau) W psi^{n+1}, transformed.
        self.spectral.inverse_into(&self.small_m1, &mut self.ra)?;
        self.w.apply_w(
            (self.ra.up(), self.ra.dn()),
            self.rb.components_mut(),
            1.0 / tau,
        );
        self.spectral.forward_into(&self.rb, &mut self.fs_m1)?;
        self.spectral.inverse_into(&self.small_p2, &mut self.ra)?;
        self.w.apply_w(
            (self.ra.up(), self.ra.dn()),
            self.rb.components_mut(),
            1.0 / tau,
        );
        self.spectral.forward_into(&self.rb, &mut self.fs_p2)?;

        // Large components, then recombination with the carrier phases.
        let pm = self.coeffs.p_minus();
        let qm = self.coeffs.q_minus();
        let phase = self.coeffs.phase_minus();
        let carrier = self.coeffs.carrier();
        for k in 0..n {
            let g1k = [self.g1.up()[k], self.g1.dn()[k]];
            let g2k = [self.g2.up()[k], self.g2.dn()[k]];

            let au = pm[k] * self.f1.up()[k]
                + qm[k] * (g1k[0] + self.fd_p1.up()[k] + self.fs_m1.up()[k]);
            let ad = pm[k] * self.f1.dn()[k]
                + qm[k] * (g1k[1] + self.fd_p1.dn()[k] + self.fs_m1.dn()[k]);
            let a = plus[k].apply([au, ad]);
            let large_p1 = [
                phase[k] * self.psi_p1.up()[k] + a[0],
                phase[k] * self.psi_p1.dn()[k] + a[1],
            ];

            let bu = -pm[k].conj() * self.f2.up()[k]
                - qm[k].conj() * (g2k[0] + self.fs_p2.up()[k] + self.fd_m2.up()[k]);
            let bd = -pm[k].conj() * self.f2.dn()[k]
                - qm[k].conj() * (g2k[1] + self.fs_p2.dn()[k] + self.fd_m2.dn()[k]);
            let b = minus[k].apply([bu, bd]);
            let large_m2 = [
                phase[k].conj() * self.psi_m2.up()[k] + b[0],
                phase[k].conj() * self.psi_m2.dn()[k] + b[1],
            ];

            self.phi_hat.up_mut()[k] = carrier * (large_p1[0] + self.small_m1.up()[k])
                + carrier.conj() * (self.small_p2.up()[k] + large_m2[0]);
            self.phi_hat.dn_mut()[k] = carrier * (large_p1[1] + self.small_m1.dn()[k])
                + carrier.conj() * (self.small_p2.dn()[k] + large_m2[1]);
        }

        self.spectral.inverse_into(&self.phi_hat, &mut state.field)?;
        state.step_index += 1;
        state.t += tau;
        if !state.field.is_finite() {
            return Err(CoreError::NonFinite {
                step: state.step_index,
                t: state.t,
            });
        }
        Ok(())
    }
}

/// Number of whole steps of size `tau` in `[0, t_final]` plus the length of
/// the shortened final step, if any.
pub(crate) fn step_plan(tau: f64, t_final: f64) -> (usize, Option<f64>) {
    let ratio = t_final / tau;
    let nearest = ratio.round();
    if nearest >= 1.0 && (ratio - nearest).abs() <= nearest * 1e-12 {
        (nearest as usize, None)
    } else {
        let n = ratio.floor() as usize;
        let rem = t_final - n as f64 * tau;
        if rem > tau * 1e-12 {
            (n, Some(rem))
        } else {
            (n, None)
        }
    }
}

/// Run the integrator from `t = 0` to `t = t_final`.
///
/// If `t_final` is not a whole number of steps, one shortened final step
/// with freshly computed coefficients closes the gap. Observers fire at
/// `t = 0`, every `every` steps, and at `t = t_final`.
pub fn evolve(
    initial: &SpinorField,
    sampler: &dyn PotentialSampler,
    eps: f64,
    tau: f64,
    t_final: f64,
    observers: &mut [ObserverSlot<'_>],
) -> Result<MtiState> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(CoreError::InvalidFinalTime(t_final));
    }
    let table = ModeTable::new(*initial.grid(), eps)?;
    let mut state = MtiState::new(initial.clone());
    for slot in observers.iter_mut() {
        slot.observer.observe(0, 0.0, &state.field);
    }
    if t_final == 0.0 {
        return Ok(state);
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(CoreError::InvalidTimeStep(tau));
    }

    let (full_steps, partial) = step_plan(tau, t_final);
    let total = full_steps + usize::from(partial.is_some());
    if full_steps > 0 {
        let mut integrator = MtiIntegrator::new(&table, sampler, tau)?;
        for i in 1..=full_steps {
            integrator.step(&mut state)?;
            state.t = i as f64 * tau;
            let last = i == total;
            for slot in observers.iter_mut() {
                if last || (slot.every > 0 && i % slot.every == 0) {
                    slot.observer.observe(i, state.t, &state.field);
                }
            }
        }
    }
    if let Some(rem) = partial {
        let mut integrator = MtiIntegrator::new(&table, sampler, rem)?;
        integrator.step(&mut state)?;
        state.t = t_final;
        for slot in observers.iter_mut() {
            slot.observer.observe(total, state.t, &state.field);
        }
    }
    Ok(state)
}
