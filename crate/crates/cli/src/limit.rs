//! Joint study of the limiting models: runs the full solver alongside the
//! scalar pair and the projected pair on one grid, and tabulates the error
//! functionals over time for each eps.

use dirac_mti_core::diagnostics::boundary_mass;
use dirac_mti_core::field::{ScalarField, SpinorField};
use dirac_mti_core::limiting::{e_pau, e_sch, pauli_evolve, pauli_initial, schrodinger_evolve};
use dirac_mti_core::modes::ModeTable;
use dirac_mti_core::mti::{evolve, ObserverSlot};

use crate::config::ResolvedConfig;

#[derive(Debug, thiserror::Error)]
pub enum LimitError {
    #[error("limit study config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerics(#[from] dirac_mti_core::CoreError),
    #[error(
        "boundary-mass guard tripped for eps={eps} at t={t}: {mass:.3e} (domain too small for this run)"
    )]
    BoundaryMass { eps: f64, t: f64, mass: f64 },
}

/// Time series of both error functionals for one eps.
#[derive(Debug, Clone)]
pub struct LimitSeries {
    pub eps: f64,
    /// `(t, E_sch(t), E_pau(t))` per observer sample.
    pub samples: Vec<(f64, f64, f64)>,
}

const BOUNDARY_FRACTION: f64 = 0.1;
const BOUNDARY_TOLERANCE: f64 = 1e-10;

/// Run the three solvers for one eps and evaluate the functionals at the
/// shared sample times.
pub fn run_single_eps(resolved: &ResolvedConfig, eps: f64) -> Result<LimitSeries, LimitError> {
    let grid = resolved.grids[0];
    let tau = resolved.taus[0];
    let t_final = resolved.final_time;
    let every = if resolved.observer_every == 0 {
        // default to ~80 samples over the run
        (((t_final / tau).round() as usize) / 80).max(1)
    } else {
        resolved.observer_every
    };
    let sampler = resolved.case.sampler();

    let phi0 = resolved.case.initial_spinor(grid);
    let guard0 = boundary_mass(&phi0, BOUNDARY_FRACTION);
    if guard0 > BOUNDARY_TOLERANCE {
        return Err(LimitError::BoundaryMass {
            eps,
            t: 0.0,
            mass: guard0,
        });
    }

    // Full solver with snapshot recording.
    let mut dirac_samples: Vec<(f64, SpinorField)> = Vec::new();
    {
        let mut recorder = |_step: usize, t: f64, field: &SpinorField| {
            dirac_samples.push((t, field.clone()));
        };
        let mut slots = [ObserverSlot {
            every,
            observer: &mut recorder,
        }];
        evolve(&phi0, sampler, eps, tau, t_final, &mut slots)?;
    }
    if let Some((t, field)) = dirac_samples.last() {
        let guard = boundary_mass(field, BOUNDARY_FRACTION);
        if guard > BOUNDARY_TOLERANCE {
            return Err(LimitError::BoundaryMass {
                eps,
                t: *t,
                mass: guard,
            });
        }
    }

    // Scalar pair.
    let mut sch_samples: Vec<(f64, ScalarField, ScalarField)> = Vec::new();
    let (phi_e0, phi_p0) = resolved.case.initial_scalars(grid);
    schrodinger_evolve(
        &phi_e0,
        &phi_p0,
        sampler,
        tau,
        t_final,
        every,
        |_step, t, e, p| {
            sch_samples.push((t, e.clone(), p.clone()));
        },
    )?;

    // Projected pair.
    let table = ModeTable::new(grid, eps)?;
    let pauli0 = pauli_initial(&phi0, &table)?;
    let mut pau_samples: Vec<(f64, SpinorField, SpinorField)> = Vec::new();
    pauli_evolve(
        &pauli0,
        sampler,
        &table,
        tau,
        t_final,
        every,
        |_step, t, e, p| {
            pau_samples.push((t, e.clone(), p.clone()));
        },
    )?;

    assert_eq!(dirac_samples.len(), sch_samples.len());
    assert_eq!(dirac_samples.len(), pau_samples.len());

    let mut samples = Vec::with_capacity(dirac_samples.len());
    for ((t, phi), ((_, se, sp), (_, pe, pp))) in dirac_samples
        .iter()
        .zip(sch_samples.iter().zip(pau_samples.iter()))
    {
        let es = e_sch(phi, se, sp, *t, eps)?;
        let ep = e_pau(phi, pe, pp, *t, eps)?;
        samples.push((*t, es, ep));
    }
    Ok(LimitSeries { eps, samples })
}

/// Run the study for every configured eps. Cells run in parallel; results
/// keep config order.
pub fn run_limit_study(resolved: &ResolvedConfig) -> Result<Vec<LimitSeries>, LimitError> {
    if resolved.grids.len() != 1 {
        return Err(LimitError::Config(format!(
            "limit study needs exactly one grid, got {}",
            resolved.grids.len()
        )));
    }
    if resolved.taus.len() != 1 {
        return Err(LimitError::Config(format!(
            "limit study needs exactly one tau, got {}",
            resolved.taus.len()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolved.threads)
        .build()
        .expect("thread pool");
    let results: Vec<Result<LimitSeries, LimitError>> = pool.install(|| {
        use rayon::prelude::*;
        resolved
            .epsilons
            .par_iter()
            .map(|&eps| run_single_eps(resolved, eps))
            .collect()
    });
    results.into_iter().collect()
}
