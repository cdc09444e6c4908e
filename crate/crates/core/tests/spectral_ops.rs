//! Transform and mode-table behavior against independent oracles.

use num_complex::Complex64;
use proptest::prelude::*;

use dirac_mti_core::diagnostics::{l2_distance, l2_norm};
use dirac_mti_core::grid::Grid;
use dirac_mti_core::modes::{Branch, ModeTable};
use dirac_mti_core::spectral::Spectral;
use dirac_mti_core::validate::{eig_projectors, naive_dft, naive_idft, SplitMix64};
use dirac_mti_core::SpinorField;

#[test]
fn dc_mode_of_constant_field() {
    let grid = Grid::new(-16.0, 16.0, 32).unwrap();
    let f = SpinorField::from_fn(grid, |_| (Complex64::new(1.0, 0.0), Complex64::ZERO));
    let mut spectral = Spectral::new(grid);
    let coeffs = spectral.forward(&f).unwrap();
    for l in -16i64..16 {
        let c = coeffs.mode(l);
        if l == 0 {
            assert!((c[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        } else {
            assert!(c[0].norm() < 1e-14);
        }
        assert!(c[1].norm() < 1e-14);
    }
}

#[test]
fn single_plane_wave_lands_in_one_slot() {
    let grid = Grid::new(-16.0, 16.0, 32).unwrap();
    let mu1 = grid.frequency(1);
    let a = grid.a();
    let f = SpinorField::from_fn(grid, |x| {
        (Complex64::from_polar(1.0, mu1 * (x - a)), Complex64::ZERO)
    });
    let mut spectral = Spectral::new(grid);
    let coeffs = spectral.forward(&f).unwrap();
    assert!((coeffs.mode(1)[0] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
    for l in -16i64..16 {
        if l != 1 {
            assert!(coeffs.mode(l)[0].norm() < 1e-13, "leak into mode {l}");
        }
    }
}

#[test]
fn forward_matches_direct_sum() {
    let grid = Grid::new(-4.0, 9.0, 48).unwrap();
    let f = SplitMix64(7).random_field(grid);
    let mut spectral = Spectral::new(grid);
    let coeffs = spectral.forward(&f).unwrap();
    let direct = naive_dft(&f);
    for r in 0..grid.len() {
        let l = r as i64 - grid.len() as i64 / 2;
        let c = coeffs.mode(l);
        assert!((c[0] - direct[r][0]).norm() < 1e-12);
        assert!((c[1] - direct[r][1]).norm() < 1e-12);
    }
}

#[test]
fn inverse_matches_direct_evaluation() {
    let grid = Grid::new(-4.0, 9.0, 48).unwrap();
    let f = SplitMix64(11).random_field(grid);
    let mut spectral = Spectral::new(grid);
    let coeffs = spectral.forward(&f).unwrap();
    let direct = naive_dft(&f);

    let reconstructed = spectral.inverse(&coeffs).unwrap();
    let by_summation = naive_idft(&direct, grid);
    assert!(l2_distance(&reconstructed, &by_summation).unwrap() < 1e-12);

    // single DC coefficient -> constant field
    let mut dc = dirac_mti_core::ModeCoefficients::zeros(grid);
    dc.set_mode(0, [Complex64::new(0.5, -0.25), Complex64::ZERO]);
    let constant = spectral.inverse(&dc).unwrap();
    for j in 0..grid.len() {
        assert!((constant.up()[j] - Complex64::new(0.5, -0.25)).norm() < 1e-14);
    }
}

#[test]
fn zero_mode_table_entries() {
    let grid = Grid::new(-16.0, 16.0, 32).unwrap();
    for &eps in &[1.0, 0.3, 1e-3] {
        let table = ModeTable::new(grid, eps).unwrap();
        assert_eq!(table.delta()[0], 1.0);
        assert_eq!(table.delta_minus()[0], 0.0);
        assert_eq!(table.delta_plus()[0], 2.0);
        let p = table.projector(Branch::Plus)[0];
        let m = table.projector(Branch::Minus)[0];
        assert_eq!((p.a11, p.a12, p.a22), (1.0, 0.0, 0.0));
        assert_eq!((m.a11, m.a12, m.a22), (0.0, 0.0, 1.0));
    }
}

#[test]
fn mode_table_rejects_bad_eps() {
    let grid = Grid::new(-16.0, 16.0, 32).unwrap();
    assert!(ModeTable::new(grid, 0.0).is_err());
    assert!(ModeTable::new(grid, -0.5).is_err());
    assert!(ModeTable::new(grid, 1.5).is_err());
    assert!(ModeTable::new(grid, f64::NAN).is_err());
}

#[test]
fn projectors_match_eigen_oracle() {
    let grid = Grid::new(-16.0, 16.0, 128).unwrap();
    for &eps in &[1.0, 0.125, 0.01] {
        let table = ModeTable::new(grid, eps).unwrap();
        for k in 0..table.len() {
            let em = eps * table.mu()[k];
            let (lam, oplus, ominus) = eig_projectors(1.0, em, -1.0);
            assert!((lam - table.delta()[k]).abs() < 1e-12);
            let p = table.projector(Branch::Plus)[k];
            let m = table.projector(Branch::Minus)[k];
            assert!((oplus[0][0].re - p.a11).abs() < 1e-12);
            assert!((oplus[0][1].re - p.a12).abs() < 1e-12);
            assert!((oplus[1][1].re - p.a22).abs() < 1e-12);
            assert!((ominus[0][0].re - m.a11).abs() < 1e-12);
            assert!((ominus[0][1].re - m.a12).abs() < 1e-12);
            assert!((ominus[1][1].re - m.a22).abs() < 1e-12);
        }
    }
}

#[test]
fn delta_entries_are_ordered_and_cancellation_free() {
    let grid = Grid::new(-16.0, 16.0, 256).unwrap();
    for &eps in &[1.0, 1e-2] {
        let table = ModeTable::new(grid, eps).unwrap();
        for k in 0..table.len() {
            assert!(table.delta()[k] >= 1.0);
            assert!(table.delta_plus()[k] >= 2.0);
            assert!(table.delta_minus()[k] >= 0.0);
            // identity delta^- = eps^2 mu^2 / (delta + 1) holds exactly by
            // construction; cross-check against the subtractive route
            let naive = table.delta()[k] - 1.0;
            let scale = naive.abs().max(1e-30);
            if naive > 1e-10 {
                assert!((table.delta_minus()[k] - naive).abs() / scale < 1e-10);
            }
        }
    }
}

#[test]
fn projection_idempotent_complete_orthogonal() {
    let grid = Grid::new(-16.0, 16.0, 64).unwrap();
    let table = ModeTable::new(grid, 0.4).unwrap();
    let mut spectral = Spectral::new(grid);
    let f = SplitMix64(3).random_field(grid);
    let coeffs = spectral.forward(&f).unwrap();

    let plus = table.project(&coeffs, Branch::Plus).unwrap();
    let twice = table.project(&plus, Branch::Plus).unwrap();
    let minus = table.project(&coeffs, Branch::Minus).unwrap();
    let cross = table.project(&plus, Branch::Minus).unwrap();

    let mut max_idem = 0.0f64;
    let mut max_complete = 0.0f64;
    let mut max_orth = 0.0f64;
    for k in 0..grid.len() {
        max_idem = max_idem
            .max((twice.up()[k] - plus.up()[k]).norm())
            .max((twice.dn()[k] - plus.dn()[k]).norm());
        max_complete = max_complete
            .max((plus.up()[k] + minus.up()[k] - coeffs.up()[k]).norm())
            .max((plus.dn()[k] + minus.dn()[k] - coeffs.dn()[k]).norm());
        max_orth = max_orth.max(cross.up()[k].norm()).max(cross.dn()[k].norm());
    }
    assert!(max_idem < 1e-13, "idempotence {max_idem}");
    assert!(max_complete < 1e-13, "completeness {max_complete}");
    assert!(max_orth < 1e-13, "orthogonality {max_orth}");

    // grid mismatch is rejected
    let other = ModeTable::new(Grid::new(-8.0, 8.0, 64).unwrap(), 0.4).unwrap();
    assert!(other.project(&coeffs, Branch::Plus).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_is_identity(seed in any::<u64>()) {
        let grid = Grid::new(-16.0, 16.0, 64).unwrap();
        let f = SplitMix64(seed).random_field(grid);
        let mut spectral = Spectral::new(grid);
        let coeffs = spectral.forward(&f).unwrap();
        let back = spectral.inverse(&coeffs).unwrap();
        prop_assert!(l2_distance(&f, &back).unwrap() <= 1e-12 * l2_norm(&f).max(1.0));
    }

    #[test]
    fn parseval_identity(seed in any::<u64>()) {
        let grid = Grid::new(-16.0, 16.0, 64).unwrap();
        let f = SplitMix64(seed).random_field(grid);
        let mut spectral = Spectral::new(grid);
        let coeffs = spectral.forward(&f).unwrap();
        let lhs = (coeffs.norm_sqr() * grid.length()).sqrt();
        let rhs = l2_norm(&f);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn projector_algebra_over_eps(eps in 1e-6f64..=1.0, k in 0usize..64) {
        let grid = Grid::new(-16.0, 16.0, 64).unwrap();
        let table = ModeTable::new(grid, eps).unwrap();
        let p = table.projector(Branch::Plus)[k];
        let m = table.projector(Branch::Minus)[k];
        prop_assert!((p.a11 + m.a11 - 1.0).abs() < 1e-13);
        prop_assert!((p.a12 + m.a12).abs() < 1e-13);
        prop_assert!((p.a22 + m.a22 - 1.0).abs() < 1e-13);
        let idem = (p.a11 * p.a11 + p.a12 * p.a12 - p.a11).abs()
            .max((p.a11 * p.a12 + p.a12 * p.a22 - p.a12).abs())
            .max((p.a12 * p.a12 + p.a22 * p.a22 - p.a22).abs());
        prop_assert!(idem < 1e-13);
        let orth = (p.a11 * m.a11 + p.a12 * m.a12).abs()
            .max((p.a11 * m.a12 + p.a12 * m.a22).abs())
            .max((p.a12 * m.a12 + p.a22 * m.a22).abs());
        prop_assert!(orth < 1e-13);
    }
}
