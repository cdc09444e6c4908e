//! Reference snapshot cache.
//!
//! One binary file per snapshot time, little-endian throughout:
//! magic `DMTIREF1`, then `M: u32`, `eps: f64`, `t: f64`, `a: f64`,
//! `b: f64`, followed by `4*M` doubles (`re1, im1, re2, im2` per node).
//! Filename pattern `ref_eps{eps}_M{M}_t{t}.bin`.
//!
//! Next to every snapshot a small JSON sidecar records the self-convergence
//! discrepancy against a companion run with a doubled step, which feeds the
//! sweep's reference-validity gate. A snapshot without a sidecar still
//! loads (the gate is then skipped for it).

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use dirac_mti_core::diagnostics::l2_distance;
use dirac_mti_core::field::SpinorField;
use dirac_mti_core::grid::Grid;
use dirac_mti_core::modes::ModeTable;
use dirac_mti_core::mti::MtiState;
use dirac_mti_core::potential::PotentialSampler;
use dirac_mti_core::tsfp::TsfpIntegrator;

const MAGIC: &[u8; 8] = b"DMTIREF1";

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "DIRAC_MTI_CACHE";

#[derive(Debug, thiserror::Error)]
pub enum RefError {
    #[error("reference cache io error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("corrupt reference file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("snapshot time {t} is not a whole number of reference steps (tau = {tau})")]
    OffLattice { t: f64, tau: f64 },
    #[error("reference build failed: {0}")]
    Numerics(#[from] dirac_mti_core::CoreError),
}

/// A loaded reference snapshot plus its validity information.
#[derive(Debug, Clone)]
pub struct Reference {
    pub field: SpinorField,
    pub eps: f64,
    pub t: f64,
    /// Self-convergence discrepancy of the reference at this time, if known.
    pub discrepancy: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    tau: f64,
    companion_tau: f64,
    discrepancy: f64,
}

#[derive(Debug, Clone)]
pub struct ReferenceStore {
    dir: PathBuf,
}

impl ReferenceStore {
    /// Cache directory resolution: `DIRAC_MTI_CACHE`, then the explicit
    /// directory, then `./ref-cache`.
    pub fn resolve(explicit: Option<&Path>) -> ReferenceStore {
        let dir = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .or_else(|| explicit.map(Path::to_path_buf))
            .unwrap_or_else(|| PathBuf::from("ref-cache"));
        ReferenceStore { dir }
    }

    pub fn at(dir: impl Into<PathBuf>) -> ReferenceStore {
        ReferenceStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn stem(eps: f64, m: usize, t: f64) -> String {
        format!("ref_eps{eps}_M{m}_t{t}")
    }

    pub fn snapshot_path(&self, eps: f64, m: usize, t: f64) -> PathBuf {
        self.dir.join(format!("{}.bin", Self::stem(eps, m, t)))
    }

    fn sidecar_path(&self, eps: f64, m: usize, t: f64) -> PathBuf {
        self.dir.join(format!("{}.check.json", Self::stem(eps, m, t)))
    }

    fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RefError + '_ {
        move |source| RefError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn write_snapshot(&self, grid: Grid, eps: f64, t: f64, field: &SpinorField) -> Result<(), RefError> {
        fs::create_dir_all(&self.dir).map_err(Self::io_err(&self.dir))?;
        let path = self.snapshot_path(eps, grid.len(), t);
        let tmp = path.with_extension("bin.tmp");
        {
            let mut w = std::io::BufWriter::new(fs::File::create(&tmp).map_err(Self::io_err(&tmp))?);
            w.write_all(MAGIC).map_err(Self::io_err(&tmp))?;
            w.write_all(&(grid.len() as u32).to_le_bytes())
                .map_err(Self::io_err(&tmp))?;
            for v in [eps, t, grid.a(), grid.b()] {
                w.write_all(&v.to_le_bytes()).map_err(Self::io_err(&tmp))?;
            }
            for j in 0..grid.len() {
                let [u, d] = field.value(j);
                for v in [u.re, u.im, d.re, d.im] {
                    w.write_all(&v.to_le_bytes()).map_err(Self::io_err(&tmp))?;
                }
            }
            w.flush().map_err(Self::io_err(&tmp))?;
        }
        fs::rename(&tmp, &path).map_err(Self::io_err(&path))?;
        Ok(())
    }

    pub fn read_snapshot(&self, eps: f64, m: usize, t: f64) -> Result<Option<Reference>, RefError> {
        let path = self.snapshot_path(eps, m, t);
        let mut file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Self::io_err(&path)(e)),
        };
        let corrupt = |reason: &str| RefError::Corrupt {
            path: path.clone(),
            reason: reason.into(),
        };
        let mut header = [0u8; 8 + 4 + 8 * 4];
        file.read_exact(&mut header).map_err(Self::io_err(&path))?;
        if &header[0..8] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let m_file = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let (eps_file, t_file, a, b) = (f64_at(12), f64_at(20), f64_at(28), f64_at(36));
        if m_file != m || eps_file != eps || t_file != t {
            return Err(corrupt("header does not match requested snapshot"));
        }
        let grid = Grid::new(a, b, m).map_err(|e| corrupt(&format!("bad grid: {e}")))?;
        let mut payload = vec![0u8; 4 * m * 8];
        file.read_exact(&mut payload).map_err(Self::io_err(&path))?;
        let mut up = Vec::with_capacity(m);
        let mut dn = Vec::with_capacity(m);
        for j in 0..m {
            let at = |o: usize| {
                f64::from_le_bytes(payload[j * 32 + o..j * 32 + o + 8].try_into().unwrap())
            };
            up.push(Complex64::new(at(0), at(8)));
            dn.push(Complex64::new(at(16), at(24)));
        }
        let field = SpinorField::from_components(grid, up, dn)
            .map_err(|e| corrupt(&format!("bad payload: {e}")))?;

        let discrepancy = match fs::read_to_string(self.sidecar_path(eps, m, t)) {
            Ok(text) => serde_json::from_str::<Sidecar>(&text)
                .ok()
                .map(|s| s.discrepancy),
            Err(_) => None,
        };
        Ok(Some(Reference {
            field,
            eps,
            t,
            discrepancy,
        }))
    }

    /// Load the snapshots at `times`, building them (and their validity
    /// sidecars) if any is missing. Building is deterministic: given the
    /// same parameters the written files are bit-identical.
    pub fn ensure(
        &self,
        grid: Grid,
        eps: f64,
        tau: f64,
        times: &[f64],
        sampler: &dyn PotentialSampler,
        initial: &SpinorField,
    ) -> Result<Vec<Reference>, RefError> {
        let mut missing = false;
        for &t in times {
            if self.read_snapshot(eps, grid.len(), t).unwrap_or(None).is_none() {
                missing = true;
                break;
            }
        }
        if missing {
            self.build(grid, eps, tau, times, sampler, initial)?;
        }
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            match self.read_snapshot(eps, grid.len(), t)? {
                Some(r) => out.push(r),
                None => {
                    return Err(RefError::Corrupt {
                        path: self.snapshot_path(eps, grid.len(), t),
                        reason: "snapshot missing after build".into(),
                    })
                }
            }
        }
        Ok(out)
    }

    fn build(
        &self,
        grid: Grid,
        eps: f64,
        tau: f64,
        times: &[f64],
        sampler: &dyn PotentialSampler,
        initial: &SpinorField,
    ) -> Result<(), RefError> {
        let mut times = times.to_vec();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut steps = Vec::with_capacity(times.len());
        for &t in &times {
            let n = (t / tau).round();
            if n < 1.0 || (t / tau - n).abs() > 1e-9 * n.max(1.0) {
                return Err(RefError::OffLattice { t, tau });
            }
            steps.push(n as usize);
        }

        let fine = self.run_with_snapshots(grid, eps, tau, &steps, sampler, initial)?;

        // Companion run with a doubled (or, off the even lattice, halved)
        // step for the self-convergence discrepancy.
        let all_even = steps.iter().all(|s| s % 2 == 0);
        let (companion_tau, companion_steps): (f64, Vec<usize>) = if all_even {
            (2.0 * tau, steps.iter().map(|s| s / 2).collect())
        } else {
            (0.5 * tau, steps.iter().map(|s| s * 2).collect())
        };
        let coarse =
            self.run_with_snapshots(grid, eps, companion_tau, &companion_steps, sampler, initial)?;

        fs::create_dir_all(&self.dir).map_err(Self::io_err(&self.dir))?;
        for (i, &t) in times.iter().enumerate() {
            self.write_snapshot(grid, eps, t, &fine[i])?;
            let discrepancy = l2_distance(&fine[i], &coarse[i])?;
            let sidecar = Sidecar {
                tau,
                companion_tau,
                discrepancy,
            };
            let path = self.sidecar_path(eps, grid.len(), t);
            let tmp = path.with_extension("json.tmp");
            fs::write(&tmp, serde_json::to_string_pretty(&sidecar).unwrap())
                .map_err(Self::io_err(&tmp))?;
            fs::rename(&tmp, &path).map_err(Self::io_err(&path))?;
        }
        Ok(())
    }

    fn run_with_snapshots(
        &self,
        grid: Grid,
        eps: f64,
        tau: f64,
        snapshot_steps: &[usize],
        sampler: &dyn PotentialSampler,
        initial: &SpinorField,
    ) -> Result<Vec<SpinorField>, RefError> {
        let table = ModeTable::new(grid, eps)?;
        let mut integ = TsfpIntegrator::new(&table, sampler, tau)?;
        let mut state = MtiState::new(initial.clone());
        let mut segments = Vec::with_capacity(snapshot_steps.len());
        let mut prev = 0usize;
        for &s in snapshot_steps {
            segments.push(s - prev);
            prev = s;
        }
        let mut snapshots = Vec::with_capacity(snapshot_steps.len());
        integ.run(&mut state, &segments, |st| {
            snapshots.push(st.field.clone());
        })?;
        Ok(snapshots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dirac_mti_core::cases::{gaussian_initial, RationalPotential};

    #[test]
    fn round_trip_and_determinism() {
        let dir = std::env::temp_dir().join(format!("dmti-refcache-test-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let store = ReferenceStore::at(&dir);
        let grid = Grid::new(-16.0, 16.0, 64).unwrap();
        let eps = 0.5;
        let initial = gaussian_initial(grid);
        let refs = store
            .ensure(grid, eps, 1e-3, &[0.25], &RationalPotential, &initial)
            .unwrap();
        assert_eq!(refs.len(), 1);
        assert!(refs[0].discrepancy.unwrap() > 0.0);

        let bytes_a = fs::read(store.snapshot_path(eps, 64, 0.25)).unwrap();
        // wipe and rebuild: bit-identical
        fs::remove_file(store.snapshot_path(eps, 64, 0.25)).unwrap();
        store
            .ensure(grid, eps, 1e-3, &[0.25], &RationalPotential, &initial)
            .unwrap();
        let bytes_b = fs::read(store.snapshot_path(eps, 64, 0.25)).unwrap();
        assert_eq!(bytes_a, bytes_b);

        // loaded field equals a fresh run
        let reloaded = store.read_snapshot(eps, 64, 0.25).unwrap().unwrap();
        let direct = dirac_mti_core::tsfp::tsfp_evolve(
            &initial,
            &RationalPotential,
            eps,
            1e-3,
            0.25,
            &mut [],
        )
        .unwrap();
        assert!(l2_distance(&reloaded.field, &direct.field).unwrap() < 1e-14);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn rejects_off_lattice_snapshot_times() {
        let dir = std::env::temp_dir().join(format!("dmti-offlattice-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let store = ReferenceStore::at(&dir);
        let grid = Grid::new(-16.0, 16.0, 64).unwrap();
        let initial = gaussian_initial(grid);
        let err = store
            .ensure(grid, 0.5, 1e-3, &[0.25037], &RationalPotential, &initial)
            .unwrap_err();
        assert!(matches!(err, RefError::OffLattice { .. }));
        let _ = fs::remove_dir_all(&dir);
    }
}
