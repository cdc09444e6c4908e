//! Independent reference implementations used to cross-check the optimized
//! pipeline, plus the invariant suite behind `dirac-mti validate`.
//!
//! Everything here is deliberately written along a different route than
//! the production code: direct `O(M^2)` transform sums instead of the FFT,
//! eigendecomposition instead of the closed-form projectors, adaptive
//! quadrature instead of the closed-form step weights, and a straight-line
//! transcription of the update instead of the buffered pipeline. Keep it
//! that way; the value of these checks is that they share no code with
//! what they verify.

use num_complex::Complex64;

use crate::cases::{gaussian_initial, RationalPotential};
use crate::coefficients::StepCoefficients;
use crate::diagnostics::{l2_distance, l2_norm, mass};
use crate::field::SpinorField;
use crate::grid::Grid;
use crate::limiting::{e_pau, e_sch, pauli_initial};
use crate::modes::{Branch, ModeTable};
use crate::mti::{evolve, MtiIntegrator, MtiState};
use crate::potential::ZeroPotential;
use crate::spectral::Spectral;
use crate::tsfp::{free_propagator, kinetic_symbol, potential_symbol, TsfpIntegrator};

pub type Mat2 = [[Complex64; 2]; 2];

pub fn mat_vec(m: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Deterministic generator for reproducible pseudo-random fields, kept
/// local so the library needs no RNG dependency.
#[derive(Debug, Clone)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
    }

    pub fn next_complex(&mut self) -> Complex64 {
        Complex64::new(self.next_f64(), self.next_f64())
    }

    pub fn random_field(&mut self, grid: Grid) -> SpinorField {
        let mut f = SpinorField::zeros(grid);
        for j in 0..grid.len() {
            f.set_value(j, [self.next_complex(), self.next_complex()]);
        }
        f
    }
}

/// Direct `O(M^2)` forward transform; slot `r` holds mode `l = r - m/2`.
pub fn naive_dft(field: &SpinorField) -> Vec<[Complex64; 2]> {
    let m = field.len();
    let half = m as i64 / 2;
    let mut out = Vec::with_capacity(m);
    for r in 0..m {
        let l = r as i64 - half;
        let mut acc = [Complex64::ZERO; 2];
        for j in 0..m {
            let angle = -2.0 * std::f64::consts::PI * (l * j as i64) as f64 / m as f64;
            let tw = Complex64::from_polar(1.0, angle);
            acc[0] += field.up()[j] * tw;
            acc[1] += field.dn()[j] * tw;
        }
        acc[0] /= m as f64;
        acc[1] /= m as f64;
        out.push(acc);
    }
    out
}

/// Direct evaluation of the interpolant at the nodes (inverse of
/// [`naive_dft`]).
pub fn naive_idft(coeffs: &[[Complex64; 2]], grid: Grid) -> SpinorField {
    let m = grid.len();
    let half = m as i64 / 2;
    let mut out = SpinorField::zeros(grid);
    for j in 0..m {
        let mut acc = [Complex64::ZERO; 2];
        for (r, c) in coeffs.iter().enumerate() {
            let l = r as i64 - half;
            let angle = 2.0 * std::f64::consts::PI * (l * j as i64) as f64 / m as f64;
            let tw = Complex64::from_polar(1.0, angle);
            acc[0] += c[0] * tw;
            acc[1] += c[1] * tw;
        }
        out.set_value(j, acc);
    }
    out
}

/// Nodal derivative through the differentiated interpolant, `O(M^2)`.
pub fn naive_derivative(field: &SpinorField) -> SpinorField {
    let grid = *field.grid();
    let m = grid.len();
    let half = m as i64 / 2;
    let mut coeffs = naive_dft(field);
    for (r, c) in coeffs.iter_mut().enumerate() {
        let l = r as i64 - half;
        let mu = 2.0 * std::f64::consts::PI * l as f64 / grid.length();
        let factor = Complex64::new(0.0, mu);
        c[0] *= factor;
        c[1] *= factor;
    }
    naive_idft(&coeffs, grid)
}

/// Eigenprojectors of the real symmetric matrix `[[a, b], [b, c]]`,
/// returned as `(lambda_plus, p_plus, p_minus)` with
/// `P_± = (A - lambda_∓ I) / (lambda_± - lambda_∓)`.
pub fn eig_projectors(a: f64, b: f64, c: f64) -> (f64, Mat2, Mat2) {
    let mean = 0.5 * (a + c);
    let gap = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let lp = mean + gap;
    let lm = mean - gap;
    let re = |x: f64| Complex64::new(x, 0.0);
    let p_plus = [
        [re((a - lm) / (lp - lm)), re(b / (lp - lm))],
        [re(b / (lp - lm)), re((c - lm) / (lp - lm))],
    ];
    let p_minus = [
        [re((a - lp) / (lm - lp)), re(b / (lm - lp))],
        [re(b / (lm - lp)), re((c - lp) / (lm - lp))],
    ];
    (lp, p_plus, p_minus)
}

/// 2x2 matrix exponential by scaling and squaring with a Taylor series.
pub fn expm2(m: &Mat2) -> Mat2 {
    let norm: f64 = m
        .iter()
        .flatten()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    let scalings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scale = (0.5f64).powi(scalings as i32);
    let a = [
        [m[0][0] * scale, m[0][1] * scale],
        [m[1][0] * scale, m[1][1] * scale],
    ];
    let mut result: Mat2 = [
        [Complex64::new(1.0, 0.0), Complex64::ZERO],
        [Complex64::ZERO, Complex64::new(1.0, 0.0)],
    ];
    let mut term = result;
    for k in 1..=16 {
        term = mat_mul(&term, &a);
        let f = 1.0 / (1..=k).map(|i| i as f64).product::<f64>();
        for i in 0..2 {
            for j in 0..2 {
                result[i][j] += term[i][j] * f;
            }
        }
    }
    for _ in 0..scalings {
        result = mat_mul(&result, &result);
    }
    result
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive complex quadrature with an oscillation-aware initial panel
/// split: the interval is cut so each panel spans at most about pi of
/// phase, then each panel is integrated by adaptive Simpson.
pub fn integrate_oscillatory(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    max_phase: f64,
    tol: f64,
) -> Complex64 {
    let panels = ((max_phase / std::f64::consts::PI).ceil() as usize).max(1);
    let mut acc = Complex64::ZERO;
    let width = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == panels {
            b
        } else {
            a + (i + 1) as f64 * width
        };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        acc += adaptive_simpson(
            &f,
            lo,
            hi,
            flo,
            fmid,
            fhi,
            whole,
            tol / panels as f64,
            40,
        );
    }
    acc
}

/// Step weights from their defining oscillatory integrals:
/// `p = -i ∫_0^tau e^{-i rate (tau - w)} dw`,
/// `q = -i ∫_0^tau e^{-i rate (tau - w)} w dw`.
pub fn pq_by_quadrature(rate: f64, tau: f64, tol: f64) -> (Complex64, Complex64) {
    let mi = Complex64::new(0.0, -1.0);
    let phase = (rate * tau).abs();
    let p = mi * integrate_oscillatory(
        |w| Complex64::from_polar(1.0, -rate * (tau - w)),
        0.0,
        tau,
        phase,
        tol,
    );
    let q = mi * integrate_oscillatory(
        |w| w * Complex64::from_polar(1.0, -rate * (tau - w)),
        0.0,
        tau,
        phase,
        tol * tau,
    );
    (p, q)
}

/// Nodal potential data for the straight-line step below.
pub struct NodalW<'a> {
    pub v: &'a [f64],
    pub a1: &'a [f64],
    /// Analytic time derivative `(dV/dt, dA1/dt)` at the step's start, or
    /// `None` for time-independent potentials.
    pub dt: Option<(&'a [f64], &'a [f64])>,
}

/// Straight-line transcription of one update, `O(M^2)`.
///
/// Every quantity is rebuilt locally: l-indexed direct transforms, printed
/// projector entries, closed-form weights with the zero-frequency special
/// case. Used to pin down the algebra of the optimized step.
pub fn reference_scheme_step(
    phi: &SpinorField,
    eps: f64,
    tau: f64,
    w: &NodalW<'_>,
    grid: Grid,
) -> SpinorField {
    let m = grid.len();
    let half = m as i64 / 2;
    let cz = Complex64::ZERO;
    let i_ = Complex64::new(0.0, 1.0);

    // Mode tables, l-indexed.
    let mut mu = vec![0.0; m];
    let mut delta = vec![0.0; m];
    let mut dm = vec![0.0; m];
    let mut dp = vec![0.0; m];
    let mut pip: Vec<Mat2> = Vec::with_capacity(m);
    let mut pim: Vec<Mat2> = Vec::with_capacity(m);
    for r in 0..m {
        let l = r as i64 - half;
        mu[r] = 2.0 * std::f64::consts::PI * l as f64 / grid.length();
        delta[r] = (1.0 + eps * eps * mu[r] * mu[r]).sqrt();
        dm[r] = delta[r] - 1.0;
        dp[r] = delta[r] + 1.0;
        let d = delta[r];
        let re = |x: f64| Complex64::new(x, 0.0);
        pip.push([
            [re((1.0 + d) / (2.0 * d)), re(eps * mu[r] / (2.0 * d))],
            [
                re(eps * mu[r] / (2.0 * d)),
                re(eps * eps * mu[r] * mu[r] / (2.0 * d * (d + 1.0))),
            ],
        ]);
        pim.push([
            [
                re(eps * eps * mu[r] * mu[r] / (2.0 * d * (d + 1.0))),
                re(-eps * mu[r] / (2.0 * d)),
            ],
            [re(-eps * mu[r] / (2.0 * d)), re((1.0 + d) / (2.0 * d))],
        ]);
    }

    // Closed-form weights; sinc(0) = 1, and the zero mode uses the exact
    // limits p = -i tau, q = -i tau^2/2. The derivative filter is the
    // sinc-filtered beat frequency, 2 sin(omega tau/2)/tau with
    // omega = delta^-/eps^2.
    let sinc = |s: f64| if s == 0.0 { 1.0 } else { s.sin() / s };
    let e2 = eps * eps;
    let mut p_m = vec![cz; m];
    let mut q_m = vec![cz; m];
    let mut p_p = vec![cz; m];
    let mut q_p = vec![cz; m];
    let mut phase_m = vec![cz; m];
    let mut filt = vec![0.0; m];
    for r in 0..m {
        let theta_m = dm[r] * tau / (2.0 * e2);
        let theta_p = dp[r] * tau / (2.0 * e2);
        p_m[r] = -i_ * tau * Complex64::from_polar(1.0, -theta_m) * sinc(theta_m);
        p_p[r] = -i_ * tau * Complex64::from_polar(1.0, -theta_p) * sinc(theta_p);
        q_m[r] = if dm[r] == 0.0 {
            -i_ * tau * tau / 2.0
        } else {
            -(tau * e2 / dm[r])
                * (Complex64::new(1.0, 0.0)
                    - Complex64::from_polar(1.0, -theta_m) * sinc(theta_m))
        };
        q_p[r] = -(tau * e2 / dp[r])
            * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -theta_p) * sinc(theta_p));
        phase_m[r] = Complex64::from_polar(1.0, -dm[r] * tau / e2);
        filt[r] = 2.0 * (dm[r] * tau / (2.0 * e2)).sin() / tau;
    }
    let carrier = Complex64::from_polar(1.0, -tau / e2);

    let apply_w_nodal = |input: &SpinorField, vt: &[f64], at: &[f64], scale: f64| {
        SpinorField::from_components(
            grid,
            (0..m)
                .map(|j| scale * (vt[j] * input.up()[j] - at[j] * input.dn()[j]))
                .collect(),
            (0..m)
                .map(|j| scale * (vt[j] * input.dn()[j] - at[j] * input.up()[j]))
                .collect(),
        )
        .unwrap()
    };

    let phi_t = naive_dft(phi);
    let pick = |t: &[[Complex64; 2]], p: &[Mat2]| -> Vec<[Complex64; 2]> {
        (0..m).map(|r| mat_vec(&p[r], t[r])).collect()
    };
    let psi_p1_t = pick(&phi_t, &pip);
    let psi_m2_t = pick(&phi_t, &pim);
    let psi_p1 = naive_idft(&psi_p1_t, grid);
    let psi_m2 = naive_idft(&psi_m2_t, grid);

    let f1 = apply_w_nodal(&psi_p1, w.v, w.a1, 1.0);
    let f2 = apply_w_nodal(&psi_m2, w.v, w.a1, 1.0);
    let f1_t = naive_dft(&f1);
    let f2_t = naive_dft(&f2);

    let (g1_t, g2_t) = match w.dt {
        Some((vt, at)) => (
            naive_dft(&apply_w_nodal(&psi_p1, vt, at, 1.0)),
            naive_dft(&apply_w_nodal(&psi_m2, vt, at, 1.0)),
        ),
        None => (vec![[cz; 2]; m], vec![[cz; 2]; m]),
    };

    let mut psid_p1_t = vec![[cz; 2]; m];
    let mut psid_m1_t = vec![[cz; 2]; m];
    let mut psid_p2_t = vec![[cz; 2]; m];
    let mut psid_m2_t = vec![[cz; 2]; m];
    for r in 0..m {
        let pf1 = mat_vec(&pip[r], f1_t[r]);
        let mf1 = mat_vec(&pim[r], f1_t[r]);
        let pf2 = mat_vec(&pip[r], f2_t[r]);
        let mf2 = mat_vec(&pim[r], f2_t[r]);
        for c in 0..2 {
            psid_p1_t[r][c] = -i_ * filt[r] * psi_p1_t[r][c] - i_ * pf1[c];
            psid_m1_t[r][c] = -i_ * mf1[c];
            psid_p2_t[r][c] = -i_ * pf2[c];
            psid_m2_t[r][c] = i_ * filt[r] * psi_m2_t[r][c] - i_ * mf2[c];
        }
    }
    let fd = |t: &Vec<[Complex64; 2]>| {
        naive_dft(&apply_w_nodal(&naive_idft(t, grid), w.v, w.a1, 1.0))
    };
    let fd1p_t = fd(&psid_p1_t);
    let fd1m_t = fd(&psid_m1_t);
    let fd2p_t = fd(&psid_p2_t);
    let fd2m_t = fd(&psid_m2_t);

    let mut small_m1_t = vec![[cz; 2]; m];
    let mut small_p2_t = vec![[cz; 2]; m];
    for r in 0..m {
        let mf1 = mat_vec(&pim[r], f1_t[r]);
        let mg1 = mat_vec(&pim[r], g1_t[r]);
        let md1 = mat_vec(
            &pim[r],
            [
                fd1p_t[r][0] + fd1m_t[r][0],
                fd1p_t[r][1] + fd1m_t[r][1],
            ],
        );
        let pf2 = mat_vec(&pip[r], f2_t[r]);
        let pg2 = mat_vec(&pip[r], g2_t[r]);
        let pd2 = mat_vec(
            &pip[r],
            [
                fd2p_t[r][0] + fd2m_t[r][0],
                fd2p_t[r][1] + fd2m_t[r][1],
            ],
        );
        for c in 0..2 {
            small_m1_t[r][c] =
                -p_p[r].conj() * mf1[c] - q_p[r].conj() * mg1[c] - q_p[r].conj() * md1[c];
            small_p2_t[r][c] = p_p[r] * pf2[c] + q_p[r] * pg2[c] + q_p[r] * pd2[c];
        }
    }

    let fstar_m1_t = naive_dft(&apply_w_nodal(
        &naive_idft(&small_m1_t, grid),
        w.v,
        w.a1,
        1.0 / tau,
    ));
    let fstar_p2_t = naive_dft(&apply_w_nodal(
        &naive_idft(&small_p2_t, grid),
        w.v,
        w.a1,
        1.0 / tau,
    ));

    let mut out_t = vec![[cz; 2]; m];
    for r in 0..m {
        let pf1 = mat_vec(&pip[r], f1_t[r]);
        let pg1 = mat_vec(&pip[r], g1_t[r]);
        let pd1 = mat_vec(
            &pip[r],
            [
                fd1p_t[r][0] + fstar_m1_t[r][0],
                fd1p_t[r][1] + fstar_m1_t[r][1],
            ],
        );
        let mf2 = mat_vec(&pim[r], f2_t[r]);
        let mg2 = mat_vec(&pim[r], g2_t[r]);
        let md2 = mat_vec(
            &pim[r],
            [
                fstar_p2_t[r][0] + fd2m_t[r][0],
                fstar_p2_t[r][1] + fd2m_t[r][1],
            ],
        );
        for c in 0..2 {
            let large_p1 =
                phase_m[r] * psi_p1_t[r][c] + p_m[r] * pf1[c] + q_m[r] * pg1[c] + q_m[r] * pd1[c];
            let large_m2 = phase_m[r].conj() * psi_m2_t[r][c]
                - p_m[r].conj() * mf2[c]
                - q_m[r].conj() * mg2[c]
                - q_m[r].conj() * md2[c];
            out_t[r][c] = carrier * (large_p1 + small_m1_t[r][c])
                + carrier.conj() * (small_p2_t[r][c] + large_m2);
        }
    }
    naive_idft(&out_t, grid)
}

/// Outcome of one invariant check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, measured: f64, bound: f64) -> CheckResult {
    CheckResult {
        name,
        pass: measured.is_finite() && measured <= bound,
        detail: format!("max residual {measured:.3e} (bound {bound:.1e})"),
    }
}

/// Run the built-in invariant battery. Fast (seconds) and deterministic;
/// every check pairs the optimized implementation with an independent
/// route from this module.
pub fn run_invariant_suite() -> Vec<CheckResult> {
    let mut results = Vec::new();
    let grid = Grid::new(-16.0, 16.0, 64).unwrap();
    let mut rng = SplitMix64(0x5eed_1dea);

    // Projector algebra and eigen-decomposition cross-check.
    let mut alg = 0.0f64;
    let mut eig = 0.0f64;
    let mut normres = 0.0f64;
    for &eps in &[1.0, 0.5, 1e-2] {
        let table = ModeTable::new(grid, eps).unwrap();
        for k in 0..table.len() {
            let p = table.projector(Branch::Plus)[k];
            let mm = table.projector(Branch::Minus)[k];
            // completeness
            alg = alg
                .max((p.a11 + mm.a11 - 1.0).abs())
                .max((p.a12 + mm.a12).abs())
                .max((p.a22 + mm.a22 - 1.0).abs());
            // idempotence and orthogonality
            let pp = [
                p.a11 * p.a11 + p.a12 * p.a12,
                p.a11 * p.a12 + p.a12 * p.a22,
                p.a12 * p.a12 + p.a22 * p.a22,
            ];
            alg = alg
                .max((pp[0] - p.a11).abs())
                .max((pp[1] - p.a12).abs())
                .max((pp[2] - p.a22).abs());
            let pm = [
                p.a11 * mm.a11 + p.a12 * mm.a12,
                p.a11 * mm.a12 + p.a12 * mm.a22,
                p.a12 * mm.a12 + p.a22 * mm.a22,
            ];
            alg = alg.max(pm[0].abs()).max(pm[1].abs()).max(pm[2].abs());

            // eigen oracle on T = [[1, em], [em, -1]]
            let em = eps * table.mu()[k];
            let (lam, e_plus, e_minus) = eig_projectors(1.0, em, -1.0);
            eig = eig.max((lam - table.delta()[k]).abs());
            eig = eig
                .max((e_plus[0][0].re - p.a11).abs())
                .max((e_plus[0][1].re - p.a12).abs())
                .max((e_plus[1][1].re - p.a22).abs())
                .max((e_minus[0][0].re - mm.a11).abs());

            // norm preservation of the split
            let v = [rng.next_complex(), rng.next_complex()];
            let vp = p.apply(v);
            let vm = mm.apply(v);
            let lhs = vp[0].norm_sqr() + vp[1].norm_sqr() + vm[0].norm_sqr() + vm[1].norm_sqr();
            let rhs = v[0].norm_sqr() + v[1].norm_sqr();
            normres = normres.max((lhs - rhs).abs());
        }
    }
    results.push(check("projector algebra", alg, 1e-13));
    results.push(check("projector eigen decomposition", eig, 1e-12));
    results.push(check("projection preserves norm", normres, 1e-13));

    // Transforms: round trip, direct-sum oracle, Parseval.
    {
        let mut spectral = Spectral::new(grid);
        let f = rng.random_field(grid);
        let coeffs = spectral.forward(&f).unwrap();
        let back = spectral.inverse(&coeffs).unwrap();
        let rt = l2_distance(&f, &back).unwrap() / l2_norm(&f);
        results.push(check("transform round trip", rt, 1e-12));

        let direct = naive_dft(&f);
        let mut dd = 0.0f64;
        for r in 0..grid.len() {
            let l = r as i64 - grid.len() as i64 / 2;
            let c = coeffs.mode(l);
            dd = dd.max((c[0] - direct[r][0]).norm()).max((c[1] - direct[r][1]).norm());
        }
        results.push(check("transform matches direct sum", dd, 1e-12));

        let pars = (coeffs.norm_sqr() * grid.length()).sqrt() - l2_norm(&f);
        results.push(check("coefficient norm identity", pars.abs(), 1e-12));
    }

    // Quadrature weights.
    {
        let table = ModeTable::new(grid, 0.3).unwrap();
        let mut worst = 0.0f64;
        for &tau in &[0.05, 1e-3] {
            let coeffs = StepCoefficients::new(&table, tau).unwrap();
            for k in (0..table.len()).step_by(7) {
                let (pq_m, qq_m) = pq_by_quadrature(table.reduced_minus()[k], tau, 1e-13);
                let (pq_p, qq_p) = pq_by_quadrature(table.reduced_plus()[k], tau, 1e-13);
                worst = worst
                    .max((coeffs.p_minus()[k] - pq_m).norm())
                    .max((coeffs.q_minus()[k] - qq_m).norm())
                    .max((coeffs.p_plus()[k] - pq_p).norm())
                    .max((coeffs.q_plus()[k] - qq_p).norm());
            }
        }
        results.push(check("weights match defining integrals", worst, 1e-10));

        let coeffs = StepCoefficients::new(&table, 0.02).unwrap();
        let exact = (coeffs.p_minus()[0] - Complex64::new(0.0, -0.02)).norm()
            + (coeffs.q_minus()[0] - Complex64::new(0.0, -0.0002)).norm();
        results.push(check("zero-mode weight limits", exact, 0.0));
    }

    // Free evolution is exact for the multiscale step.
    {
        let mut worst = 0.0f64;
        for &eps in &[1.0, 1e-2] {
            let f0 = gaussian_initial(grid);
            let table = ModeTable::new(grid, eps).unwrap();
            let state = evolve(&f0, &ZeroPotential, eps, 0.01, 1.0, &mut []).unwrap();
            let exact = free_propagator(&f0, &table, 1.0).unwrap();
            worst = worst.max(l2_distance(&state.field, &exact).unwrap());
        }
        results.push(check("free evolution exactness", worst, 1e-11));
    }

    // One optimized step against the straight-line transcription.
    {
        let small = Grid::new(-16.0, 16.0, 32).unwrap();
        let f0 = SplitMix64(42).random_field(small);
        let mut worst = 0.0f64;
        let v: Vec<f64> = small.nodes().map(|x| (1.0 - x) / (1.0 + x * x)).collect();
        let a1: Vec<f64> = small
            .nodes()
            .map(|x| (x + 1.0) * (x + 1.0) / (1.0 + x * x))
            .collect();
        for &eps in &[1.0, 0.25] {
            let table = ModeTable::new(small, eps).unwrap();
            let tau = 1e-3;
            let mut integ = MtiIntegrator::new(&table, &RationalPotential, tau).unwrap();
            let mut state = MtiState::new(f0.clone());
            integ.step(&mut state).unwrap();
            let reference = reference_scheme_step(
                &f0,
                eps,
                tau,
                &NodalW {
                    v: &v,
                    a1: &a1,
                    dt: None,
                },
                small,
            );
            worst = worst.max(l2_distance(&state.field, &reference).unwrap());
        }
        results.push(check("step matches transcription", worst, 1e-13));
    }

    // Splitting integrator structure.
    {
        let table = ModeTable::new(grid, 0.5).unwrap();
        let mut worst = 0.0f64;
        for k in (0..table.len()).step_by(5) {
            let k1 = kinetic_symbol(&table, k, 0.013);
            let k2 = kinetic_symbol(&table, k, 0.021);
            let k12 = kinetic_symbol(&table, k, 0.034);
            let prod = k1.mul(&k2);
            worst = worst
                .max((prod[0][0] - k12.a11).norm())
                .max((prod[0][1] - k12.a12).norm())
                .max((prod[1][1] - k12.a22).norm());
            // unitarity: columns orthonormal
            let n0 = k1.a11.norm_sqr() + k1.a12.norm_sqr();
            let n1 = k1.a12.norm_sqr() + k1.a22.norm_sqr();
            let cross = (k1.a11.conj() * k1.a12 + k1.a12.conj() * k1.a22).norm();
            worst = worst.max((n0 - 1.0).abs()).max((n1 - 1.0).abs()).max(cross);
            // dense exponential oracle for the kinetic factor
            let eps = table.eps();
            let em = eps * table.mu()[k];
            let s = 0.013;
            let factor = Complex64::new(0.0, -s / (eps * eps));
            let a: Mat2 = [
                [factor, em * factor],
                [em * factor, -factor],
            ];
            let exp = expm2(&a);
            worst = worst
                .max((exp[0][0] - k1.a11).norm())
                .max((exp[0][1] - k1.a12).norm())
                .max((exp[1][1] - k1.a22).norm());
        }
        // potential factor against the dense exponential
        let (v, a1, s) = (2.0, 3.0, 0.1);
        let factor = Complex64::new(0.0, -s);
        let wmat: Mat2 = [
            [v * factor, -a1 * factor],
            [-a1 * factor, v * factor],
        ];
        let exp = expm2(&wmat);
        let sym = potential_symbol(v, a1, s);
        worst = worst
            .max((exp[0][0] - sym.a11).norm())
            .max((exp[0][1] - sym.a12).norm())
            .max((exp[1][1] - sym.a22).norm());
        results.push(check("splitting factors", worst, 1e-12));

        // mass conservation over a run
        let f0 = gaussian_initial(grid);
        let m0 = mass(&f0);
        let mut integ = TsfpIntegrator::new(&table, &RationalPotential, 1e-2).unwrap();
        let mut state = MtiState::new(f0);
        integ.run(&mut state, &[100], |_| {}).unwrap();
        let drift = (mass(&state.field) - m0).abs() / m0;
        results.push(check("splitting conserves mass", drift, 1e-12));
    }

    // Limiting-model functionals vanish at t = 0 and the reduced symbol
    // identity holds.
    {
        let table = ModeTable::new(grid, 0.125).unwrap();
        let phi0 = gaussian_initial(grid);
        let pauli = pauli_initial(&phi0, &table).unwrap();
        let ep = e_pau(&phi0, &pauli.electron, &pauli.positron, 0.0, 0.125).unwrap();
        let es = e_sch(
            &phi0,
            &crate::cases::gaussian_initial_up(grid),
            &crate::cases::gaussian_initial_dn(grid),
            0.0,
            0.125,
        )
        .unwrap();
        results.push(check("model errors vanish initially", ep.max(es), 1e-13));

        let mut worst = 0.0f64;
        for &eps in &[1.0, 0.5] {
            let t = ModeTable::new(grid, eps).unwrap();
            for k in 0..t.len() {
                let naive = (t.delta()[k] - 1.0) / (eps * eps);
                let stable = t.reduced_minus()[k];
                let scale = stable.abs().max(1.0);
                worst = worst.max((naive - stable).abs() / scale);
            }
        }
        results.push(check("reduced symbol identity", worst, 1e-12));
    }

    // Energy: spectral route against the dense-derivative route.
    {
        let energy_grid = Grid::new(-16.0, 16.0, 256).unwrap();
        let f = gaussian_initial(energy_grid);
        let eps = 0.5;
        let table = ModeTable::new(energy_grid, eps).unwrap();
        let v: Vec<f64> = energy_grid
            .nodes()
            .map(|x| (1.0 - x) / (1.0 + x * x))
            .collect();
        let a1: Vec<f64> = energy_grid
            .nodes()
            .map(|x| (x + 1.0) * (x + 1.0) / (1.0 + x * x))
            .collect();
        let spectral_route = crate::diagnostics::energy(&f, &v, &a1, &table).unwrap();
        let deriv = naive_derivative(&f);
        let mut dense = 0.0;
        for j in 0..energy_grid.len() {
            let u = f.value(j);
            let du = deriv.value(j);
            // -(i/eps) phi* sigma1 phi' + (1/eps^2) phi* sigma3 phi
            let sigma1 = u[0].conj() * du[1] + u[1].conj() * du[0];
            let kinetic = (-Complex64::new(0.0, 1.0) / eps * sigma1).re;
            let rest = (u[0].norm_sqr() - u[1].norm_sqr()) / (eps * eps);
            let density = u[0].norm_sqr() + u[1].norm_sqr();
            let cross = 2.0 * (u[0].conj() * u[1]).re;
            dense += kinetic + rest + v[j] * density - a1[j] * cross;
        }
        dense *= energy_grid.h();
        results.push(check(
            "energy routes agree",
            (spectral_route - dense).abs(),
            1e-10,
        ));
    }

    results
}
