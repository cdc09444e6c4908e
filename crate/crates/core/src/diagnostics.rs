//! Conserved-quantity diagnostics and error norms.

use crate::error::{CoreError, Result};
use crate::field::SpinorField;
use crate::modes::ModeTable;
use crate::spectral::Spectral;

/// Discrete total mass `h * sum_j |phi_j|^2`.
pub fn mass(field: &SpinorField) -> f64 {
    let h = field.grid().h();
    let s: f64 = field
        .up()
        .iter()
        .chain(field.dn().iter())
        .map(|c| c.norm_sqr())
        .sum();
    h * s
}

/// Discrete energy for time-independent potentials sampled at the nodes.
///
/// The free part is evaluated spectrally as
/// `(b-a) * sum_l coeff_l^* (T_l/eps^2) coeff_l` with
/// `T_l = eps*mu_l*sigma1 + sigma3`; the potential part is the nodal
/// quadrature `h * sum_j (V_j |phi_j|^2 - A1_j phi_j^* sigma1 phi_j)`.
pub fn energy(field: &SpinorField, v: &[f64], a1: &[f64], table: &ModeTable) -> Result<f64> {
    let grid = *field.grid();
    if grid != *table.grid() {
        return Err(CoreError::GridMismatch(
            "field grid does not match mode table".into(),
        ));
    }
    if v.len() != grid.len() || a1.len() != grid.len() {
        return Err(CoreError::GridMismatch(
            "potential arrays do not match grid size".into(),
        ));
    }
    let eps = table.eps();
    let mut spectral = Spectral::new(grid);
    let coeffs = spectral.forward(field)?;

    let mut free = 0.0;
    for k in 0..grid.len() {
        let u = coeffs.up()[k];
        let d = coeffs.dn()[k];
        // coeff^* (T/eps^2) coeff with T/eps^2 = (mu/eps) sigma1 + (1/eps^2) sigma3
        let cross = 2.0 * (u.conj() * d).re;
        free += table.mu()[k] / eps * cross + (u.norm_sqr() - d.norm_sqr()) / (eps * eps);
    }
    free *= grid.length();

    let mut pot = 0.0;
    for j in 0..grid.len() {
        let u = field.up()[j];
        let d = field.dn()[j];
        let density = u.norm_sqr() + d.norm_sqr();
        let cross = 2.0 * (u.conj() * d).re;
        pot += v[j] * density - a1[j] * cross;
    }
    pot *= grid.h();

    Ok(free + pot)
}

/// Weighted l2 distance `sqrt(h * sum_j |f_j - g_j|^2)`.
pub fn l2_distance(f: &SpinorField, g: &SpinorField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(CoreError::GridMismatch(
            "fields live on different grids".into(),
        ));
    }
    let mut s = 0.0;
    for j in 0..f.len() {
        s += (f.up()[j] - g.up()[j]).norm_sqr() + (f.dn()[j] - g.dn()[j]).norm_sqr();
    }
    Ok((f.grid().h() * s).sqrt())
}

/// Weighted l2 norm `sqrt(h * sum_j |f_j|^2)`.
pub fn l2_norm(f: &SpinorField) -> f64 {
    mass(f).sqrt()
}

/// Mass contained in the outer `fraction` of the domain (split evenly
/// between both ends); used to confirm that truncation to the periodic box
/// does not interact with the solution.
pub fn boundary_mass(field: &SpinorField, fraction: f64) -> f64 {
    let grid = field.grid();
    let lo = grid.a() + 0.5 * fraction * grid.length();
    let hi = grid.b() - 0.5 * fraction * grid.length();
    let mut s = 0.0;
    for j in 0..field.len() {
        let x = grid.node(j);
        if x < lo || x > hi {
            s += field.up()[j].norm_sqr() + field.dn()[j].norm_sqr();
        }
    }
    grid.h() * s
}
