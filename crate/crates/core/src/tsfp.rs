//! Strang-splitting reference integrator.
//!
//! Each step composes a half potential step, a full kinetic step and
//! another half potential step. The potential factor is an exact pointwise
//! matrix exponential,
//!
//! ```text
//! e^{-is W_j} = e^{-is V_j} (cos(s A1_j) I + i sin(s A1_j) sigma1),
//! ```
//!
//! and the kinetic factor multiplies mode `l` by the unitary
//! `K_l(s) = e^{-is delta_l/eps^2} Pi_l^+ + e^{is delta_l/eps^2} Pi_l^-`.
//! Every substep is unitary, so the discrete mass is conserved to
//! roundoff. For time-independent potentials adjacent half steps merge
//! into full steps across a run.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::field::SpinorField;
use crate::grid::Grid;
use crate::modes::{Branch, ModeTable};
use crate::mti::{step_plan, MtiState, ObserverSlot};
use crate::potential::{NodalPotential, PotentialSampler};
use crate::spectral::Spectral;

/// Complex symmetric 2x2 matrix (both the kinetic and potential factors
/// have equal off-diagonal entries).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CSym2 {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a22: Complex64,
}

impl CSym2 {
    #[inline]
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a12 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn mul(&self, other: &CSym2) -> [[Complex64; 2]; 2] {
        [
            [
                self.a11 * other.a11 + self.a12 * other.a12,
                self.a11 * other.a12 + self.a12 * other.a22,
            ],
            [
                self.a12 * other.a11 + self.a22 * other.a12,
                self.a12 * other.a12 + self.a22 * other.a22,
            ],
        ]
    }
}

/// Kinetic multiplier `K_l(s)` for storage slot `k`.
pub fn kinetic_symbol(table: &ModeTable, k: usize, s: f64) -> CSym2 {
    let phase = table.delta()[k] * s / (table.eps() * table.eps());
    let em = Complex64::from_polar(1.0, -phase);
    let ep = Complex64::from_polar(1.0, phase);
    let p = table.projector(Branch::Plus)[k];
    let m = table.projector(Branch::Minus)[k];
    CSym2 {
        a11: em * p.a11 + ep * m.a11,
        a12: em * p.a12 + ep * m.a12,
        a22: em * p.a22 + ep * m.a22,
    }
}

/// Pointwise potential multiplier `e^{-is W}` for `W = V I - A1 sigma1`.
pub fn potential_symbol(v: f64, a1: f64, s: f64) -> CSym2 {
    let ev = Complex64::from_polar(1.0, -s * v);
    let (sin_a, cos_a) = (s * a1).sin_cos();
    CSym2 {
        a11: ev * cos_a,
        a12: Complex64::new(0.0, 1.0) * ev * sin_a,
        a22: ev * cos_a,
    }
}

fn apply_pointwise(field: &mut SpinorField, mats: &[CSym2]) {
    let (up, dn) = field.components_mut();
    for j in 0..mats.len() {
        let v = mats[j].apply([up[j], dn[j]]);
        up[j] = v[0];
        dn[j] = v[1];
    }
}

/// Splitting integrator with per-step-size caches.
pub struct TsfpIntegrator<'a> {
    table: &'a ModeTable,
    sampler: &'a dyn PotentialSampler,
    spectral: Spectral,
    tau: f64,
    time_independent: bool,
    kinetic: Vec<CSym2>,
    pot_half: Vec<CSym2>,
    pot_full: Vec<CSym2>,
    w: NodalPotential,
    scratch: Vec<CSym2>,
}

impl<'a> TsfpIntegrator<'a> {
    pub fn new(
        table: &'a ModeTable,
        sampler: &'a dyn PotentialSampler,
        tau: f64,
    ) -> Result<TsfpIntegrator<'a>> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(CoreError::InvalidTimeStep(tau));
        }
        let grid = *table.grid();
        let n = grid.len();
        let kinetic = (0..n).map(|k| kinetic_symbol(table, k, tau)).collect();
        let time_independent = sampler.is_time_independent();
        let mut integ = TsfpIntegrator {
            table,
            sampler,
            spectral: Spectral::new(grid),
            tau,
            time_independent,
            kinetic,
            pot_half: Vec::new(),
            pot_full: Vec::new(),
            w: NodalPotential::zeros(n),
            scratch: Vec::new(),
        };
        if time_independent {
            integ.w.sample_into(sampler, &grid, 0.0);
            integ.pot_half = (0..n)
                .map(|j| potential_symbol(integ.w.v[j], integ.w.a1[j], tau / 2.0))
                .collect();
            integ.pot_full = (0..n)
                .map(|j| potential_symbol(integ.w.v[j], integ.w.a1[j], tau))
                .collect();
        } else {
            integ.scratch = vec![
                CSym2 {
                    a11: Complex64::ZERO,
                    a12: Complex64::ZERO,
                    a22: Complex64::ZERO
                };
                n
            ];
        }
        Ok(integ)
    }

    pub fn grid(&self) -> &Grid {
        self.table.grid()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kinetic(&self) -> &[CSym2] {
        &self.kinetic
    }

    fn kinetic_step(&mut self, field: &mut SpinorField) {
        let (up, dn) = field.components_mut();
        self.spectral.forward_plane(up);
        self.spectral.forward_plane(dn);
        for k in 0..self.kinetic.len() {
            let v = self.kinetic[k].apply([up[k], dn[k]]);
            up[k] = v[0];
            dn[k] = v[1];
        }
        self.spectral.inverse_plane(up);
        self.spectral.inverse_plane(dn);
    }

    /// Pointwise half potential step sampled at the substep midpoint
    /// (time-dependent path only).
    fn sampled_half(&mut self, field: &mut SpinorField, t_mid: f64) {
        self.w.sample_into(self.sampler, self.table.grid(), t_mid);
        for j in 0..self.scratch.len() {
            self.scratch[j] = potential_symbol(self.w.v[j], self.w.a1[j], self.tau / 2.0);
        }
        apply_pointwise(field, &self.scratch);
    }

    /// One plain splitting step (no cross-step merging).
    pub fn step(&mut self, state: &mut MtiState) -> Result<()> {
        if state.field.grid() != self.table.grid() {
            return Err(CoreError::GridMismatch(
                "state grid does not match integrator".into(),
            ));
        }
        if self.time_independent {
            apply_pointwise(&mut state.field, &self.pot_half);
            self.kinetic_step(&mut state.field);
            apply_pointwise(&mut state.field, &self.pot_half);
        } else {
            let t = state.t;
            self.sampled_half(&mut state.field, t + 0.25 * self.tau);
            self.kinetic_step(&mut state.field);
            self.sampled_half(&mut state.field, t + 0.75 * self.tau);
        }
        state.step_index += 1;
        state.t += self.tau;
        if !state.field.is_finite() {
            return Err(CoreError::NonFinite {
                step: state.step_index,
                t: state.t,
            });
        }
        Ok(())
    }

    /// Run `segments` of consecutive steps, invoking `on_segment` after
    /// each. For time-independent potentials the half potential steps of
    /// adjacent steps inside a segment merge into full steps.
    pub fn run(
        &mut self,
        state: &mut MtiState,
        segments: &[usize],
        mut on_segment: impl FnMut(&MtiState),
    ) -> Result<()> {
        for &len in segments {
            if len == 0 {
                on_segment(state);
                continue;
            }
            if self.time_independent {
                let t0 = state.t;
                apply_pointwise(&mut state.field, &self.pot_half);
                for i in 0..len {
                    self.kinetic_step(&mut state.field);
                    if i + 1 < len {
                        apply_pointwise(&mut state.field, &self.pot_full);
                    }
                }
                apply_pointwise(&mut state.field, &self.pot_half);
                state.step_index += len;
                state.t = t0 + len as f64 * self.tau;
                if !state.field.is_finite() {
                    return Err(CoreError::NonFinite {
                        step: state.step_index,
                        t: state.t,
                    });
                }
            } else {
                for _ in 0..len {
                    self.step(state)?;
                }
            }
            on_segment(state);
        }
        Ok(())
    }
}

/// Exact solution of the free equation (`W = 0`) after time `t`: mode `l`
/// picks up `e^{-it delta_l/eps^2}` on the plus branch and the conjugate
/// phase on the minus branch.
pub fn free_propagator(field: &SpinorField, table: &ModeTable, t: f64) -> Result<SpinorField> {
    if field.grid() != table.grid() {
        return Err(CoreError::GridMismatch(
            "field grid does not match mode table".into(),
        ));
    }
    let mut spectral = Spectral::new(*field.grid());
    let mut out = field.clone();
    let (up, dn) = out.components_mut();
    spectral.forward_plane(up);
    spectral.forward_plane(dn);
    for k in 0..table.len() {
        let sym = kinetic_symbol(table, k, t);
        let v = sym.apply([up[k], dn[k]]);
        up[k] = v[0];
        dn[k] = v[1];
    }
    spectral.inverse_plane(up);
    spectral.inverse_plane(dn);
    Ok(out)
}

/// Run the splitting integrator from `t = 0` to `t = t_final`, with the
/// same observer and shortened-final-step semantics as [`crate::mti::evolve`].
pub fn tsfp_evolve(
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

    // Segment boundaries: union of all observer firing steps.
    let mut fire: Vec<usize> = Vec::new();
    for slot in observers.iter() {
        if slot.every > 0 {
            let mut s = slot.every;
            while s < full_steps {
                fire.push(s);
                s += slot.every;
            }
        }
    }
    fire.push(full_steps);
    fire.sort_unstable();
    fire.dedup();

    if full_steps > 0 {
        let mut integrator = TsfpIntegrator::new(&table, sampler, tau)?;
        let mut segments = Vec::with_capacity(fire.len());
        let mut prev = 0;
        for &s in &fire {
            segments.push(s - prev);
            prev = s;
        }
        let observers = &mut *observers;
        integrator.run(&mut state, &segments, |st| {
            let last = st.step_index == total;
            for slot in observers.iter_mut() {
                if last || (slot.every > 0 && st.step_index % slot.every == 0) {
                    slot.observer.observe(st.step_index, st.t, &st.field);
                }
            }
        })?;
    }
    if let Some(rem) = partial {
        let mut integrator = TsfpIntegrator::new(&table, sampler, rem)?;
        integrator.step(&mut state)?;
        state.t = t_final;
        for slot in observers.iter_mut() {
            slot.observer.observe(total, state.t, &state.field);
        }
    }
    Ok(state)
}
