//! Mass, energy and norm diagnostics against quadrature and dense oracles.

use num_complex::Complex64;

use dirac_mti_core::cases::{gaussian_initial, RationalPotential};
use dirac_mti_core::diagnostics::{energy, l2_distance, mass};
use dirac_mti_core::grid::Grid;
use dirac_mti_core::modes::ModeTable;
use dirac_mti_core::potential::PotentialSampler;
use dirac_mti_core::tsfp::free_propagator;
use dirac_mti_core::validate::{integrate_oscillatory, naive_derivative, SplitMix64};
use dirac_mti_core::SpinorField;

#[test]
fn mass_of_zero_and_constant_fields() {
    let grid = Grid::new(-16.0, 16.0, 64).unwrap();
    assert_eq!(mass(&SpinorField::zeros(grid)), 0.0);
    let ones = SpinorField::from_fn(grid, |_| (Complex64::new(1.0, 0.0), Complex64::ZERO));
    assert!((mass(&ones) - 32.0).abs() < 1e-12);
}

#[test]
fn gaussian_mass_matches_quadrature() {
    let grid = Grid::new(-16.0, 16.0, 1024).unwrap();
    let f = gaussian_initial(grid);
    // integrand |phi1|^2 + |phi2|^2 = e^{-x^2} + e^{-(x-1)^2}, integral 2 sqrt(pi)
    let by_quadrature = integrate_oscillatory(
        |x| {
            Complex64::new(
                (-x * x).exp() + (-(x - 1.0) * (x - 1.0)).exp(),
                0.0,
            )
        },
        -16.0,
        16.0,
        64.0,
        1e-13,
    )
    .re;
    assert!((by_quadrature - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
    assert!((mass(&f) - by_quadrature).abs() < 1e-8);
}

#[test]
fn energy_of_constant_state() {
    let grid = Grid::new(-16.0, 16.0, 64).unwrap();
    let table = ModeTable::new(grid, 1.0).unwrap();
    let f = SpinorField::from_fn(grid, |_| (Complex64::new(1.0, 0.0), Complex64::ZERO));
    let zeros = vec![0.0; grid.len()];
    let e = energy(&f, &zeros, &zeros, &table).unwrap();
    assert!((e - 32.0).abs() < 1e-10, "energy {e}");
}

#[test]
fn free_energy_constant_over_one_period() {
    let grid = Grid::new(-16.0, 16.0, 64).unwrap();
    let eps = 1.0;
    let table = ModeTable::new(grid, eps).unwrap();
    // single mode on the plus branch: period 2*pi*eps^2/delta_1
    let mu1 = grid.frequency(1);
    let a = grid.a();
    let f = SpinorField::from_fn(grid, |x| {
        (
            Complex64::from_polar(1.0, mu1 * (x - a)),
            Complex64::from_polar(0.3, mu1 * (x - a)),
        )
    });
    let zeros = vec![0.0; grid.len()];
    let e0 = energy(&f, &zeros, &zeros, &table).unwrap();
    let delta1 = (1.0 + eps * eps * mu1 * mu1).sqrt();
    let period = 2.0 * std::f64::consts::PI * eps * eps / delta1;
    let evolved = free_propagator(&f, &table, period).unwrap();
    let e1 = energy(&evolved, &zeros, &zeros, &table).unwrap();
    assert!((e1 - e0).abs() < 1e-12 * e0.abs().max(1.0), "{e0} vs {e1}");
    // and the state itself returns to where it started
    assert!(l2_distance(&f, &evolved).unwrap() < 1e-12);
}

#[test]
fn energy_matches_dense_derivative_route() {
    let grid = Grid::new(-16.0, 16.0, 1024).unwrap();
    let eps = 0.5;
    let table = ModeTable::new(grid, eps).unwrap();
    let f = gaussian_initial(grid);
    let pot = RationalPotential;
    let mut v = vec![0.0; grid.len()];
    let mut a1 = vec![0.0; grid.len()];
    for (j, x) in grid.nodes().enumerate() {
        let (vj, aj) = pot.sample(0.0, x);
        v[j] = vj;
        a1[j] = aj;
    }
    let spectral_route = energy(&f, &v, &a1, &table).unwrap();

    let deriv = naive_derivative(&f);
    let mut dense = 0.0;
    for j in 0..grid.len() {
        let u = f.value(j);
        let du = deriv.value(j);
        let sigma1 = u[0].conj() * du[1] + u[1].conj() * du[0];
        dense += (-Complex64::new(0.0, 1.0) / eps * sigma1).re
            + (u[0].norm_sqr() - u[1].norm_sqr()) / (eps * eps)
            + v[j] * (u[0].norm_sqr() + u[1].norm_sqr())
            - a1[j] * 2.0 * (u[0].conj() * u[1]).re;
    }
    dense *= grid.h();
    assert!(
        (spectral_route - dense).abs() < 1e-10,
        "{spectral_route} vs {dense}"
    );
}

#[test]
fn l2_distance_examples() {
    let grid = Grid::new(-16.0, 16.0, 64).unwrap();
    let f = SplitMix64(23).random_field(grid);
    assert_eq!(l2_distance(&f, &f).unwrap(), 0.0);

    let shifted = {
        let mut g = f.clone();
        for j in 0..grid.len() {
            let v = g.value(j);
            g.set_value(j, [v[0] + Complex64::new(1.0, 0.0), v[1]]);
        }
        g
    };
    assert!((l2_distance(&f, &shifted).unwrap() - 32.0f64.sqrt()).abs() < 1e-12);

    // independent accumulation oracle
    let g = SplitMix64(24).random_field(grid);
    let mut acc = 0.0;
    for j in 0..grid.len() {
        let (a, b) = (f.value(j), g.value(j));
        acc += (a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr();
    }
    let direct = (grid.h() * acc).sqrt();
    assert!((l2_distance(&f, &g).unwrap() - direct).abs() < 1e-14);

    let other = SpinorField::zeros(Grid::new(-8.0, 8.0, 64).unwrap());
    assert!(l2_distance(&f, &other).is_err());
}
