use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::Grid;

/// Two-component complex field sampled at the grid nodes.
///
/// Components are stored as separate planes so transforms and pointwise
/// 2x2 matrix action run on contiguous data. Periodicity is implicit:
/// the sample at `b` equals the one at `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    up: Vec<Complex64>,
    dn: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(grid: Grid) -> SpinorField {
        let n = grid.len();
        SpinorField {
            grid,
            up: vec![Complex64::ZERO; n],
            dn: vec![Complex64::ZERO; n],
        }
    }

    /// Sample `(f1(x), f2(x))` at every node.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> (Complex64, Complex64)) -> SpinorField {
        let mut field = SpinorField::zeros(grid);
        for j in 0..grid.len() {
            let (u, d) = f(grid.node(j));
            field.up[j] = u;
            field.dn[j] = d;
        }
        field
    }

    pub fn from_components(grid: Grid, up: Vec<Complex64>, dn: Vec<Complex64>) -> Result<SpinorField> {
        if up.len() != grid.len() || dn.len() != grid.len() {
            return Err(CoreError::GridMismatch(format!(
                "component length {}/{} does not match grid size {}",
                up.len(),
                dn.len(),
                grid.len()
            )));
        }
        Ok(SpinorField { grid, up, dn })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
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

    pub fn components_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.up, &mut self.dn)
    }

    /// Value at node `j` as a complex 2-vector.
    pub fn value(&self, j: usize) -> [Complex64; 2] {
        [self.up[j], self.dn[j]]
    }

    pub fn set_value(&mut self, j: usize, v: [Complex64; 2]) {
        self.up[j] = v[0];
        self.dn[j] = v[1];
    }

    pub fn is_finite(&self) -> bool {
        self.up
            .iter()
            .chain(self.dn.iter())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Restrict to a coarser grid whose nodes are a subset of this one.
    pub fn restrict_to(&self, coarse: Grid) -> Result<SpinorField> {
        if !coarse.is_subgrid_of(&self.grid) {
            return Err(CoreError::GridMismatch(format!(
                "grid with {} nodes is not a refinement of target with {} nodes",
                self.grid.len(),
                coarse.len()
            )));
        }
        let stride = self.grid.len() / coarse.len();
        let up = self.up.iter().step_by(stride).copied().collect();
        let dn = self.dn.iter().step_by(stride).copied().collect();
        SpinorField::from_components(coarse, up, dn)
    }
}

/// Single-component complex field on the grid (used by the scalar limiting
/// equations).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> ScalarField {
        ScalarField {
            values: vec![Complex64::ZERO; grid.len()],
            grid,
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> Complex64) -> ScalarField {
        let mut field = ScalarField::zeros(grid);
        for j in 0..grid.len() {
            field.values[j] = f(grid.node(j));
        }
        field
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<ScalarField> {
        if values.len() != grid.len() {
            return Err(CoreError::GridMismatch(format!(
                "value length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}
