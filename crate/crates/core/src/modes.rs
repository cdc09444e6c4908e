use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::spectral::ModeCoefficients;

/// Real symmetric 2x2 matrix stored as three scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 {
        a11: 1.0,
        a12: 0.0,
        a22: 1.0,
    };

    #[inline]
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a12 * v[0] + self.a22 * v[1],
        ]
    }
}

/// Branch selector for the spectral projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Per-mode symbols of the free operator and its eigenprojectors.
///
/// For mode `l` with frequency `mu_l = 2*pi*l/(b-a)`:
///
/// - `delta_l = sqrt(1 + eps^2 mu_l^2)`, the dispersion symbol;
/// - `delta_l^± = delta_l ± 1`;
/// - `Pi_l^± = (delta_l I ± T_l) / (2 delta_l)` with the 2x2 symbol
///   `T_l = eps*mu_l*sigma1 + sigma3`, so `Pi^+ + Pi^- = I`,
///   `Pi^± Pi^± = Pi^±` and `Pi^+ Pi^- = 0`.
///
/// `delta_l^-` is evaluated as `eps^2 mu_l^2 / (delta_l + 1)`, which is
/// exact at `l = 0` and cancellation-free for small `eps*mu_l`; the same
/// goes for the reduced symbol `delta_l^-/eps^2 = mu_l^2/(delta_l + 1)`,
/// which stays bounded as `eps -> 0` and feeds the oscillator phases.
///
/// All arrays are in natural FFT slot order, matching [`ModeCoefficients`].
#[derive(Debug, Clone)]
pub struct ModeTable {
    grid: Grid,
    eps: f64,
    mu: Vec<f64>,
    delta: Vec<f64>,
    delta_plus: Vec<f64>,
    delta_minus: Vec<f64>,
    /// `delta^-/eps^2 = mu^2/(delta+1)`, computed without the eps division.
    reduced_minus: Vec<f64>,
    /// `delta^+/eps^2`.
    reduced_plus: Vec<f64>,
    proj_plus: Vec<Sym2>,
    proj_minus: Vec<Sym2>,
}

impl ModeTable {
    pub fn new(grid: Grid, eps: f64) -> Result<ModeTable> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(CoreError::InvalidEpsilon(eps));
        }
        let m = grid.len();
        let mut table = ModeTable {
            grid,
            eps,
            mu: Vec::with_capacity(m),
            delta: Vec::with_capacity(m),
            delta_plus: Vec::with_capacity(m),
            delta_minus: Vec::with_capacity(m),
            reduced_minus: Vec::with_capacity(m),
            reduced_plus: Vec::with_capacity(m),
            proj_plus: Vec::with_capacity(m),
            proj_minus: Vec::with_capacity(m),
        };
        for k in 0..m {
            let mu = grid.frequency(k);
            let em = eps * mu;
            let delta = (1.0 + em * em).sqrt();
            let delta_plus = delta + 1.0;
            let delta_minus = em * em / delta_plus;
            let reduced_minus = mu * mu / delta_plus;
            let reduced_plus = delta_plus / (eps * eps);
            // Pi^+ = (delta I + T)/(2 delta), T = em*sigma1 + sigma3.
            let plus = Sym2 {
                a11: (delta + 1.0) / (2.0 * delta),
                a12: em / (2.0 * delta),
                a22: delta_minus / (2.0 * delta),
            };
            let minus = Sym2 {
                a11: delta_minus / (2.0 * delta),
                a12: -em / (2.0 * delta),
                a22: (delta + 1.0) / (2.0 * delta),
            };
            table.mu.push(mu);
            table.delta.push(delta);
            table.delta_plus.push(delta_plus);
            table.delta_minus.push(delta_minus);
            table.reduced_minus.push(reduced_minus);
            table.reduced_plus.push(reduced_plus);
            table.proj_plus.push(plus);
            table.proj_minus.push(minus);
        }
        Ok(table)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn delta_plus(&self) -> &[f64] {
        &self.delta_plus
    }

    pub fn delta_minus(&self) -> &[f64] {
        &self.delta_minus
    }

    /// `delta^-/eps^2` per slot, bounded uniformly in `eps`.
    pub fn reduced_minus(&self) -> &[f64] {
        &self.reduced_minus
    }

    /// `delta^+/eps^2` per slot.
    pub fn reduced_plus(&self) -> &[f64] {
        &self.reduced_plus
    }

    pub fn projector(&self, branch: Branch) -> &[Sym2] {
        match branch {
            Branch::Plus => &self.proj_plus,
            Branch::Minus => &self.proj_minus,
        }
    }

    fn check(&self, coeffs: &ModeCoefficients) -> Result<()> {
        if coeffs.grid() != &self.grid {
            return Err(CoreError::GridMismatch(
                "coefficient grid does not match mode table".into(),
            ));
        }
        Ok(())
    }

    /// Multiply every mode by the selected projector, in place.
    pub fn project_in_place(&self, coeffs: &mut ModeCoefficients, branch: Branch) -> Result<()> {
        self.check(coeffs)?;
        let proj = self.projector(branch);
        project_planes(coeffs, proj);
        Ok(())
    }

    /// Projected copy of the coefficients.
    pub fn project(&self, coeffs: &ModeCoefficients, branch: Branch) -> Result<ModeCoefficients> {
        let mut out = coeffs.clone();
        self.project_in_place(&mut out, branch)?;
        Ok(out)
    }
}

pub(crate) fn project_planes(coeffs: &mut ModeCoefficients, proj: &[Sym2]) {
    let n = proj.len();
    for k in 0..n {
        let p = proj[k];
        let v = p.apply([coeffs.up()[k], coeffs.dn()[k]]);
        coeffs.up_mut()[k] = v[0];
        coeffs.dn_mut()[k] = v[1];
    }
}
