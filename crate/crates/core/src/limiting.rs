//! Limiting-model solvers and the error functionals comparing them with
//! the full two-component dynamics.
//!
//! Two approximations of the solution for small `eps` are implemented:
//!
//! - a pair of free-carrier Schroedinger equations for the scalar
//!   amplitudes `(phi_e, phi_p)`, solved by Strang splitting; the
//!   recombination `e^{-it/eps^2} phi_e e1 + e^{it/eps^2} phi_p e2` is
//!   accurate to first order in `eps`;
//! - a Pauli-type pair for the projected spinors `(psi_e, psi_p)` with the
//!   bounded dispersion symbol `delta^-/eps^2 = mu^2/(delta+1)`, solved by
//!   the same second-order exponential integrator machinery as the full
//!   scheme; its recombination is accurate to second order.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::field::{ScalarField, SpinorField};
use crate::modes::{Branch, ModeTable};
use crate::mti::step_plan;
use crate::coefficients::StepCoefficients;
use crate::potential::{NodalPotential, PotentialSampler};
use crate::spectral::{ModeCoefficients, Spectral};

/// Scalar amplitude pair of the first-order model.
#[derive(Debug, Clone)]
pub struct SchrodingerPair {
    pub electron: ScalarField,
    pub positron: ScalarField,
    pub t: f64,
}

/// Projected spinor pair of the second-order model.
#[derive(Debug, Clone)]
pub struct PauliState {
    pub electron: SpinorField,
    pub positron: SpinorField,
    pub t: f64,
}

/// Projected initial data `psi_e = Pi^+ phi0`, `psi_p = Pi^- phi0`.
pub fn pauli_initial(phi0: &SpinorField, table: &ModeTable) -> Result<PauliState> {
    let mut spectral = Spectral::new(*phi0.grid());
    let hat = spectral.forward(phi0)?;
    let e_hat = table.project(&hat, Branch::Plus)?;
    let p_hat = table.project(&hat, Branch::Minus)?;
    Ok(PauliState {
        electron: spectral.inverse(&e_hat)?,
        positron: spectral.inverse(&p_hat)?,
        t: 0.0,
    })
}

/// Strang splitting for the scalar pair. The electron amplitude sees the
/// kinetic phase `e^{-is mu^2/2}`, the positron amplitude the conjugate;
/// the potential factor is the pointwise phase `e^{-is V}` for both.
/// Observers fire at `t = 0`, every `every` steps, and at `t = t_final`.
pub fn schrodinger_evolve(
    phi_e0: &ScalarField,
    phi_p0: &ScalarField,
    sampler: &dyn PotentialSampler,
    tau: f64,
    t_final: f64,
    every: usize,
    mut on_sample: impl FnMut(usize, f64, &ScalarField, &ScalarField),
) -> Result<SchrodingerPair> {
    if phi_e0.grid() != phi_p0.grid() {
        return Err(CoreError::GridMismatch(
            "scalar pair lives on different grids".into(),
        ));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(CoreError::InvalidFinalTime(t_final));
    }
    let grid = *phi_e0.grid();
    let mut pair = SchrodingerPair {
        electron: phi_e0.clone(),
        positron: phi_p0.clone(),
        t: 0.0,
    };
    on_sample(0, 0.0, &pair.electron, &pair.positron);
    if t_final == 0.0 {
        return Ok(pair);
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(CoreError::InvalidTimeStep(tau));
    }

    let (full_steps, partial) = step_plan(tau, t_final);
    let total = full_steps + usize::from(partial.is_some());
    let mut spectral = Spectral::new(grid);
    let time_independent = sampler.is_time_independent();
    let n = grid.len();
    let mut v = vec![0.0; n];

    let run_step = |pair: &mut SchrodingerPair,
                        spectral: &mut Spectral,
                        v: &mut Vec<f64>,
                        s: f64|
     -> Result<()> {
        let kin_e: Vec<Complex64> = (0..n)
            .map(|k| {
                let mu = grid.frequency(k);
                Complex64::from_polar(1.0, -s * mu * mu / 2.0)
            })
            .collect();
        let half = |values: &mut [Complex64], v: &[f64], s_half: f64| {
            for j in 0..values.len() {
                values[j] *= Complex64::from_polar(1.0, -s_half * v[j]);
            }
        };
        let sample_v = |v: &mut Vec<f64>, t: f64| {
            for (j, x) in grid.nodes().enumerate() {
                v[j] = sampler.sample(t, x).0;
            }
        };
        if time_independent {
            if pair.t == 0.0 {
                sample_v(v, 0.0);
            }
        } else {
            sample_v(v, pair.t + 0.25 * s);
        }
        half(pair.electron.values_mut(), v, s / 2.0);
        half(pair.positron.values_mut(), v, s / 2.0);
        for (field, kin_conj) in [(&mut pair.electron, false), (&mut pair.positron, true)] {
            spectral.forward_plane(field.values_mut());
            for (k, c) in field.values_mut().iter_mut().enumerate() {
                *c *= if kin_conj { kin_e[k].conj() } else { kin_e[k] };
            }
            spectral.inverse_plane(field.values_mut());
        }
        if !time_independent {
            sample_v(v, pair.t + 0.75 * s);
        }
        half(pair.electron.values_mut(), v, s / 2.0);
        half(pair.positron.values_mut(), v, s / 2.0);
        if !(pair.electron.is_finite() && pair.positron.is_finite()) {
            return Err(CoreError::NonFinite {
                step: 0,
                t: pair.t + s,
            });
        }
        Ok(())
    };

    for i in 1..=full_steps {
        run_step(&mut pair, &mut spectral, &mut v, tau)?;
        pair.t = i as f64 * tau;
        if i == total || (every > 0 && i % every == 0) {
            on_sample(i, pair.t, &pair.electron, &pair.positron);
        }
    }
    if let Some(rem) = partial {
        run_step(&mut pair, &mut spectral, &mut v, rem)?;
        pair.t = t_final;
        on_sample(total, pair.t, &pair.electron, &pair.positron);
    }
    Ok(pair)
}

/// Exponential-integrator solver for the Pauli-type pair.
///
/// The electron component evolves under the bounded symbol
/// `delta^-/eps^2` with the `Pi^+`-projected potential term; the positron
/// component mirrors it with the opposite symbol sign, `Pi^-`, and
/// conjugate quadrature weights. The derivative proxy uses the same sinc
/// filter as the full scheme.
pub fn pauli_evolve(
    initial: &PauliState,
    sampler: &dyn PotentialSampler,
    table: &ModeTable,
    tau: f64,
    t_final: f64,
    every: usize,
    mut on_sample: impl FnMut(usize, f64, &SpinorField, &SpinorField),
) -> Result<PauliState> {
    if initial.electron.grid() != table.grid() || initial.positron.grid() != table.grid() {
        return Err(CoreError::GridMismatch(
            "state grid does not match mode table".into(),
        ));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(CoreError::InvalidFinalTime(t_final));
    }
    let grid = *table.grid();
    let mut out = initial.clone();
    out.t = 0.0;
    on_sample(0, 0.0, &out.electron, &out.positron);
    if t_final == 0.0 {
        return Ok(out);
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(CoreError::InvalidTimeStep(tau));
    }

    let (full_steps, partial) = step_plan(tau, t_final);
    let total = full_steps + usize::from(partial.is_some());
    let mut spectral = Spectral::new(grid);
    let n = grid.len();
    let time_independent = sampler.is_time_independent();
    let mut w = NodalPotential::zeros(n);
    let mut w_dt = NodalPotential::zeros(n);
    w.sample_into(sampler, &grid, 0.0);

    let mut e_hat = spectral.forward(&out.electron)?;
    let mut p_hat = spectral.forward(&out.positron)?;
    let mut f_hat = ModeCoefficients::zeros(grid);
    let mut fd_hat = ModeCoefficients::zeros(grid);
    let mut g_hat = ModeCoefficients::zeros(grid);
    let mut ra = SpinorField::zeros(grid);
    let mut rb = SpinorField::zeros(grid);

    let step = |e_hat: &mut ModeCoefficients,
                    p_hat: &mut ModeCoefficients,
                    spectral: &mut Spectral,
                    w: &mut NodalPotential,
                    w_dt: &mut NodalPotential,
                    f_hat: &mut ModeCoefficients,
                    fd_hat: &mut ModeCoefficients,
                    g_hat: &mut ModeCoefficients,
                    ra: &mut SpinorField,
                    rb: &mut SpinorField,
                    t: f64,
                    s: f64|
     -> Result<()> {
        let coeffs = StepCoefficients::new(table, s)?;
        if !time_independent {
            w.sample_into(sampler, &grid, t);
            w_dt.sample_dt_into(sampler, &grid, t);
        }
        let filt = coeffs.filter();
        let mi = Complex64::new(0.0, -1.0);
        for (branch, hat, conj) in [
            (Branch::Plus, &mut *e_hat, false),
            (Branch::Minus, &mut *p_hat, true),
        ] {
            let proj = table.projector(branch);
            // f = W psi
            spectral.inverse_into(hat, ra)?;
            w.apply_w((ra.up(), ra.dn()), rb.components_mut(), 1.0);
            spectral.forward_into(rb, f_hat)?;
            if !time_independent {
                w_dt.apply_w((ra.up(), ra.dn()), rb.components_mut(), 1.0);
                spectral.forward_into(rb, g_hat)?;
            }
            // filtered derivative proxy, then fd = W * proxy
            for k in 0..n {
                let pf = proj[k].apply([f_hat.up()[k], f_hat.dn()[k]]);
                let sign = if conj { -1.0 } else { 1.0 };
                fd_hat.up_mut()[k] = mi * (sign * filt[k] * hat.up()[k] + pf[0]);
                fd_hat.dn_mut()[k] = mi * (sign * filt[k] * hat.dn()[k] + pf[1]);
            }
            spectral.inverse_into(fd_hat, ra)?;
            w.apply_w((ra.up(), ra.dn()), rb.components_mut(), 1.0);
            spectral.forward_into(rb, fd_hat)?;

            let p = coeffs.p_minus();
            let q = coeffs.q_minus();
            let phase = coeffs.phase_minus();
            for k in 0..n {
                let gk = [g_hat.up()[k], g_hat.dn()[k]];
                let (ph, pw, qw) = if conj {
                    (phase[k].conj(), -p[k].conj(), -q[k].conj())
                } else {
                    (phase[k], p[k], q[k])
                };
                let su = pw * f_hat.up()[k] + qw * (gk[0] + fd_hat.up()[k]);
                let sd = pw * f_hat.dn()[k] + qw * (gk[1] + fd_hat.dn()[k]);
                let v = proj[k].apply([su, sd]);
                hat.up_mut()[k] = ph * hat.up()[k] + v[0];
                hat.dn_mut()[k] = ph * hat.dn()[k] + v[1];
            }
        }
        Ok(())
    };

    let materialize = |out: &mut PauliState,
                           e_hat: &ModeCoefficients,
                           p_hat: &ModeCoefficients,
                           spectral: &mut Spectral|
     -> Result<()> {
        spectral.inverse_into(e_hat, &mut out.electron)?;
        spectral.inverse_into(p_hat, &mut out.positron)?;
        if !(out.electron.is_finite() && out.positron.is_finite()) {
            return Err(CoreError::NonFinite {
                step: 0,
                t: out.t,
            });
        }
        Ok(())
    };

    for i in 1..=full_steps {
        let t = (i - 1) as f64 * tau;
        step(
            &mut e_hat, &mut p_hat, &mut spectral, &mut w, &mut w_dt, &mut f_hat, &mut fd_hat,
            &mut g_hat, &mut ra, &mut rb, t, tau,
        )?;
        out.t = i as f64 * tau;
        if i == total || (every > 0 && i % every == 0) {
            materialize(&mut out, &e_hat, &p_hat, &mut spectral)?;
            on_sample(i, out.t, &out.electron, &out.positron);
        }
    }
    if let Some(rem) = partial {
        let t = full_steps as f64 * tau;
        step(
            &mut e_hat, &mut p_hat, &mut spectral, &mut w, &mut w_dt, &mut f_hat, &mut fd_hat,
            &mut g_hat, &mut ra, &mut rb, t, rem,
        )?;
        out.t = t_final;
        materialize(&mut out, &e_hat, &p_hat, &mut spectral)?;
        on_sample(total, out.t, &out.electron, &out.positron);
    } else {
        materialize(&mut out, &e_hat, &p_hat, &mut spectral)?;
    }
    Ok(out)
}

/// First-order model error
/// `|| phi - e^{-it/eps^2} phi_e e1 - e^{it/eps^2} phi_p e2 ||_{l2}`.
pub fn e_sch(
    phi: &SpinorField,
    phi_e: &ScalarField,
    phi_p: &ScalarField,
    t: f64,
    eps: f64,
) -> Result<f64> {
    if phi.grid() != phi_e.grid() || phi.grid() != phi_p.grid() {
        return Err(CoreError::GridMismatch(
            "fields live on different grids".into(),
        ));
    }
    let carrier = Complex64::from_polar(1.0, -t / (eps * eps));
    let mut s = 0.0;
    for j in 0..phi.len() {
        let du = phi.up()[j] - carrier * phi_e.values()[j];
        let dd = phi.dn()[j] - carrier.conj() * phi_p.values()[j];
        s += du.norm_sqr() + dd.norm_sqr();
    }
    Ok((phi.grid().h() * s).sqrt())
}

/// Second-order model error
/// `|| phi - e^{-it/eps^2} psi_e - e^{it/eps^2} psi_p ||_{l2}`.
pub fn e_pau(
    phi: &SpinorField,
    psi_e: &SpinorField,
    psi_p: &SpinorField,
    t: f64,
    eps: f64,
) -> Result<f64> {
    if phi.grid() != psi_e.grid() || phi.grid() != psi_p.grid() {
        return Err(CoreError::GridMismatch(
            "fields live on different grids".into(),
        ));
    }
    let carrier = Complex64::from_polar(1.0, -t / (eps * eps));
    let mut s = 0.0;
    for j in 0..phi.len() {
        let du = phi.up()[j] - carrier * psi_e.up()[j] - carrier.conj() * psi_p.up()[j];
        let dd = phi.dn()[j] - carrier * psi_e.dn()[j] - carrier.conj() * psi_p.dn()[j];
        s += du.norm_sqr() + dd.norm_sqr();
    }
    Ok((phi.grid().h() * s).sqrt())
}
