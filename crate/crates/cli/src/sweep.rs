//! Parameter sweep over `(eps, h, tau)` cells with restartable caching,
//! the reference-validity gate, and order fitting.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dirac_mti_core::diagnostics::l2_distance;
use dirac_mti_core::field::SpinorField;
use dirac_mti_core::grid::Grid;
use dirac_mti_core::limiting::{e_pau, e_sch, pauli_evolve, pauli_initial, schrodinger_evolve};
use dirac_mti_core::modes::ModeTable;
use dirac_mti_core::mti::evolve;
use dirac_mti_core::tsfp::tsfp_evolve;

use crate::config::{Method, ResolvedConfig, RunConfig};
use crate::refcache::{Reference, ReferenceStore, RefError};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Reference(#[from] RefError),
    #[error("sweep io error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("order fit needs at least {needed} tau points, have {have}")]
    InsufficientPoints { needed: usize, have: usize },
    #[error("sweep requires a reference spec in the config")]
    MissingReference,
}

/// One `(eps, h, tau)` cell of the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRow {
    pub eps: f64,
    pub h: f64,
    pub tau: f64,
    /// Measured error; `None` when the cell failed or was gated.
    pub error: Option<f64>,
    /// Raw measured error before gating (kept for diagnostics).
    pub raw_error: Option<f64>,
    /// True when the raw error fell below the reference-validity floor.
    pub gated: bool,
    /// The validity floor `10 x` reference self-convergence discrepancy.
    pub floor: Option<f64>,
    /// Failure message for cells that did not produce a value.
    pub failure: Option<String>,
    /// Order `log2(e(2 tau) / e(tau))` against the adjacent coarser tau.
    pub order: Option<f64>,
}

/// Sweep output: rows in deterministic `(eps, h, tau)` order plus header
/// metadata for the CSV.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub method: Method,
    pub t_final: f64,
    pub rows: Vec<CellRow>,
    pub reference_notes: Vec<String>,
    pub any_gated: bool,
    pub any_failed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct CachedCell {
    raw_error: Option<f64>,
    failure: Option<String>,
}

fn config_hash(config: &RunConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config.numeric_identity().as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::new();
    for b in digest.iter().take(8) {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

fn cell_cache_path(dir: &Path, hash: &str, eps: f64, m: usize, tau: f64) -> PathBuf {
    dir.join("cells")
        .join(hash)
        .join(format!("eps{eps}_M{m}_tau{tau}.json"))
}

/// Compute one cell: run the configured method on `(grid, eps, tau)` and
/// measure against the restricted reference.
fn compute_cell(
    resolved: &ResolvedConfig,
    grid: Grid,
    eps: f64,
    tau: f64,
    reference: &SpinorField,
) -> Result<f64, String> {
    let case = &resolved.case;
    let sampler = case.sampler();
    let t_final = resolved.final_time;
    let restricted = reference
        .restrict_to(grid)
        .map_err(|e| format!("restriction failed: {e}"))?;
    match resolved.method {
        Method::Mti => {
            let initial = case.initial_spinor(grid);
            let state = evolve(&initial, sampler, eps, tau, t_final, &mut [])
                .map_err(|e| e.to_string())?;
            l2_distance(&state.field, &restricted).map_err(|e| e.to_string())
        }
        Method::Tsfp => {
            let initial = case.initial_spinor(grid);
            let state = tsfp_evolve(&initial, sampler, eps, tau, t_final, &mut [])
                .map_err(|e| e.to_string())?;
            l2_distance(&state.field, &restricted).map_err(|e| e.to_string())
        }
        Method::Schrodinger => {
            let (phi_e, phi_p) = case.initial_scalars(grid);
            let pair = schrodinger_evolve(&phi_e, &phi_p, sampler, tau, t_final, 0, |_, _, _, _| {})
                .map_err(|e| e.to_string())?;
            e_sch(&restricted, &pair.electron, &pair.positron, t_final, eps)
                .map_err(|e| e.to_string())
        }
        Method::Pauli => {
            let table = ModeTable::new(grid, eps).map_err(|e| e.to_string())?;
            let initial = case.initial_spinor(grid);
            let pauli0 = pauli_initial(&initial, &table).map_err(|e| e.to_string())?;
            let out = pauli_evolve(&pauli0, sampler, &table, tau, t_final, 0, |_, _, _, _| {})
                .map_err(|e| e.to_string())?;
            e_pau(&restricted, &out.electron, &out.positron, t_final, eps)
                .map_err(|e| e.to_string())
        }
    }
}

/// Build (or load) the per-eps references, then run every cell. Cells are
/// independent; failures are recorded per cell. Results merge by key, so
/// output does not depend on completion order.
pub fn run_sweep(
    config: &RunConfig,
    resolved: &ResolvedConfig,
    store: &ReferenceStore,
    out_dir: &Path,
) -> Result<ErrorReport, SweepError> {
    let spec = resolved
        .reference
        .as_ref()
        .ok_or_else(|| SweepError::MissingReference)?;
    // References are built serially per eps.
    let mut references: BTreeMap<usize, Reference> = BTreeMap::new();
    let mut reference_notes = Vec::new();
    for (i, &eps) in resolved.epsilons.iter().enumerate() {
        let initial = resolved.case.initial_spinor(spec.grid);
        let refs = store.ensure(
            spec.grid,
            eps,
            spec.tau,
            &spec.snapshot_times,
            resolved.case.sampler(),
            &initial,
        )?;
        let at_final = refs
            .iter()
            .find(|r| r.t == resolved.final_time)
            .expect("final-time snapshot requested")
            .clone();
        match at_final.discrepancy {
            Some(d) => reference_notes.push(format!(
                "eps={eps}: self-convergence discrepancy {d:.3e}, validity floor {:.3e}",
                10.0 * d
            )),
            None => reference_notes.push(format!(
                "eps={eps}: no self-convergence sidecar; validity gate skipped"
            )),
        }
        references.insert(i, at_final);
    }

    let hash = config_hash(config);
    let cells: Vec<(usize, usize, usize)> = (0..resolved.epsilons.len())
        .flat_map(|e| {
            (0..resolved.grids.len())
                .flat_map(move |g| (0..resolved.taus.len()).map(move |t| (e, g, t)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolved.threads)
        .build()
        .expect("thread pool");
    let computed: Vec<CachedCell> = pool.install(|| {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|&(ei, gi, ti)| {
                let eps = resolved.epsilons[ei];
                let grid = resolved.grids[gi];
                let tau = resolved.taus[ti];
                let cache_path = cell_cache_path(out_dir, &hash, eps, grid.len(), tau);
                if let Ok(text) = std::fs::read_to_string(&cache_path) {
                    if let Ok(cell) = serde_json::from_str::<CachedCell>(&text) {
                        return cell;
                    }
                }
                let reference = &references[&ei];
                let cell = match compute_cell(resolved, grid, eps, tau, &reference.field) {
                    Ok(err) => CachedCell {
                        raw_error: Some(err),
                        failure: None,
                    },
                    Err(msg) => CachedCell {
                        raw_error: None,
                        failure: Some(msg),
                    },
                };
                if let Some(parent) = cache_path.parent() {
                    let _ = std::fs::create_dir_all(parent);
                }
                let _ = std::fs::write(&cache_path, serde_json::to_string(&cell).unwrap());
                cell
            })
            .collect()
    });

    // Assemble rows in key order and apply the validity gate.
    let mut rows = Vec::with_capacity(cells.len());
    let mut any_gated = false;
    let mut any_failed = false;
    for (&(ei, gi, ti), cell) in cells.iter().zip(&computed) {
        let eps = resolved.epsilons[ei];
        let grid = resolved.grids[gi];
        let tau = resolved.taus[ti];
        let floor = references[&ei].discrepancy.map(|d| 10.0 * d);
        let mut row = CellRow {
            eps,
            h: grid.h(),
            tau,
            error: cell.raw_error,
            raw_error: cell.raw_error,
            gated: false,
            floor,
            failure: cell.failure.clone(),
            order: None,
        };
        if let (Some(err), Some(floor)) = (cell.raw_error, floor) {
            if err < floor {
                row.gated = true;
                row.error = None;
                any_gated = true;
            }
        }
        if row.failure.is_some() {
            any_failed = true;
        }
        rows.push(row);
    }

    // Orders from adjacent tau pairs within the same (eps, h) row.
    let n_tau = resolved.taus.len();
    for chunk in rows.chunks_mut(n_tau) {
        for ti in 1..n_tau {
            let coarse_tau = chunk[ti - 1].tau;
            let fine_tau = chunk[ti].tau;
            if (coarse_tau / fine_tau - 2.0).abs() > 1e-9 {
                continue;
            }
            if let (Some(e_coarse), Some(e_fine)) = (chunk[ti - 1].error, chunk[ti].error) {
                if e_fine > 0.0 {
                    chunk[ti].order = Some((e_coarse / e_fine).log2());
                }
            }
        }
    }

    Ok(ErrorReport {
        method: resolved.method,
        t_final: resolved.final_time,
        rows,
        reference_notes,
        any_gated,
        any_failed,
    })
}

/// Per-(eps, h) order sequences and the uniform log-log slope of the
/// worst-case-over-eps error against tau.
#[derive(Debug, Clone)]
pub struct FitSummary {
    /// `(eps, h, orders)` with one entry per tau (first always `None`).
    pub per_row_orders: Vec<(f64, f64, Vec<Option<f64>>)>,
    /// Least-squares slope of `log(max_eps error)` vs `log(tau)`.
    pub uniform_slope: f64,
}

pub fn fit_order(report: &ErrorReport, taus: &[f64]) -> Result<FitSummary, SweepError> {
    if taus.len() < 3 {
        return Err(SweepError::InsufficientPoints {
            needed: 3,
            have: taus.len(),
        });
    }
    let n_tau = taus.len();
    let mut per_row_orders = Vec::new();
    for chunk in report.rows.chunks(n_tau) {
        per_row_orders.push((
            chunk[0].eps,
            chunk[0].h,
            chunk.iter().map(|r| r.order).collect(),
        ));
    }

    // Worst error over eps (and h) per tau, from raw errors.
    let mut max_per_tau = vec![f64::NEG_INFINITY; n_tau];
    for chunk in report.rows.chunks(n_tau) {
        for (ti, row) in chunk.iter().enumerate() {
            if let Some(e) = row.raw_error {
                max_per_tau[ti] = max_per_tau[ti].max(e);
            }
        }
    }
    let points: Vec<(f64, f64)> = taus
        .iter()
        .zip(&max_per_tau)
        .filter(|(_, &e)| e.is_finite() && e > 0.0)
        .map(|(&tau, &e)| (tau.ln(), e.ln()))
        .collect();
    if points.len() < 3 {
        return Err(SweepError::InsufficientPoints {
            needed: 3,
            have: points.len(),
        });
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let uniform_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    Ok(FitSummary {
        per_row_orders,
        uniform_slope,
    })
}
