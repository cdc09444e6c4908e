use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};
use crate::field::{ScalarField, SpinorField};
use crate::grid::Grid;

/// Fourier coefficients of a two-component field.
///
/// Storage is in natural FFT order (slot `k` holds mode `l = k` for
/// `k < m/2` and `l = k - m` otherwise); [`ModeCoefficients::mode`] gives
/// l-indexed access. Coefficients carry the `1/m` normalization, so the
/// coefficient of a pure plane wave of unit amplitude is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    grid: Grid,
    up: Vec<Complex64>,
    dn: Vec<Complex64>,
}

impl ModeCoefficients {
    pub fn zeros(grid: Grid) -> ModeCoefficients {
        let n = grid.len();
        ModeCoefficients {
            grid,
            up: vec![Complex64::ZERO; n],
            dn: vec![Complex64::ZERO; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn up(&self) -> &[Complex64] {
        &self.up
    }

    pub fn dn(&self) -> &[Complex64] {
        &self.dn
    }

    pub fn up_mut(&mut self) -> &mut [Complex64] {
        &mut self.up
    }

    pub fn dn_mut(&mut self) -> &mut [Complex64] {
        &mut self.dn
    }

    fn slot(&self, l: i64) -> usize {
        let half = self.grid.len() as i64 / 2;
        assert!(l >= -half && l < half, "mode index {l} out of range");
        if l >= 0 {
            l as usize
        } else {
            (l + self.grid.len() as i64) as usize
        }
    }

    /// Coefficient of mode `l` for `l = -m/2 .. m/2 - 1`.
    pub fn mode(&self, l: i64) -> [Complex64; 2] {
        let k = self.slot(l);
        [self.up[k], self.dn[k]]
    }

    pub fn set_mode(&mut self, l: i64, v: [Complex64; 2]) {
        let k = self.slot(l);
        self.up[k] = v[0];
        self.dn[k] = v[1];
    }

    /// Squared coefficient-space norm `sum_l |c_l|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.up
            .iter()
            .chain(self.dn.iter())
            .map(|c| c.norm_sqr())
            .sum()
    }
}

/// Forward/inverse discrete Fourier transforms for fields on one grid.
///
/// Plans are shared; the scratch buffer is per instance, so clone one
/// handle per thread for concurrent use on distinct fields.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    pub fn new(grid: Grid) -> Spectral {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.len());
        let inv = planner.plan_fft_inverse(grid.len());
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Spectral {
            grid,
            fwd,
            inv,
            scratch: vec![Complex64::ZERO; scratch_len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn check(&self, other: &Grid) -> Result<()> {
        if *other != self.grid {
            return Err(CoreError::GridMismatch(
                "field grid does not match transform grid".into(),
            ));
        }
        Ok(())
    }

    /// In-place forward DFT of one component plane, with 1/m scaling.
    pub fn forward_plane(&mut self, plane: &mut [Complex64]) {
        debug_assert_eq!(plane.len(), self.grid.len());
        self.fwd.process_with_scratch(plane, &mut self.scratch);
        let scale = 1.0 / self.grid.len() as f64;
        for c in plane.iter_mut() {
            *c *= scale;
        }
    }

    /// In-place inverse DFT of one component plane (no scaling).
    pub fn inverse_plane(&mut self, plane: &mut [Complex64]) {
        debug_assert_eq!(plane.len(), self.grid.len());
        self.inv.process_with_scratch(plane, &mut self.scratch);
    }

    pub fn forward_into(&mut self, field: &SpinorField, out: &mut ModeCoefficients) -> Result<()> {
        self.check(field.grid())?;
        out.up.copy_from_slice(field.up());
        out.dn.copy_from_slice(field.dn());
        self.forward_plane(&mut out.up);
        self.forward_plane(&mut out.dn);
        Ok(())
    }

    pub fn inverse_into(&mut self, coeffs: &ModeCoefficients, out: &mut SpinorField) -> Result<()> {
        self.check(coeffs.grid())?;
        let (up, dn) = out.components_mut();
        up.copy_from_slice(&coeffs.up);
        dn.copy_from_slice(&coeffs.dn);
        self.inverse_plane(up);
        self.inverse_plane(dn);
        Ok(())
    }

    pub fn forward(&mut self, field: &SpinorField) -> Result<ModeCoefficients> {
        let mut out = ModeCoefficients::zeros(self.grid);
        self.forward_into(field, &mut out)?;
        Ok(out)
    }

    pub fn inverse(&mut self, coeffs: &ModeCoefficients) -> Result<SpinorField> {
        let mut out = SpinorField::zeros(self.grid);
        self.inverse_into(coeffs, &mut out)?;
        Ok(out)
    }

    pub fn forward_scalar(&mut self, field: &ScalarField) -> Result<Vec<Complex64>> {
        self.check(field.grid())?;
        let mut plane = field.values().to_vec();
        self.forward_plane(&mut plane);
        Ok(plane)
    }

    pub fn inverse_scalar_into(&mut self, coeffs: &[Complex64], out: &mut ScalarField) -> Result<()> {
        let grid = *out.grid();
        self.check(&grid)?;
        out.values_mut().copy_from_slice(coeffs);
        self.inverse_plane(out.values_mut());
        Ok(())
    }
}
