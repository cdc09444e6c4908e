//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured numbers (run with `--nocapture` to see them).
//!
//! Reference snapshots are built once into `CARGO_TARGET_TMPDIR` (or
//! `DIRAC_MTI_CACHE` when set) and reused across runs; the first run
//! spends several minutes building them, later runs are fast.

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dirac_mti::config::{CaseSpec, Domain, Method, RunConfig};
use dirac_mti::limit::run_limit_study;
use dirac_mti::refcache::{Reference, ReferenceStore, CACHE_ENV};
use dirac_mti_core::cases::{gaussian_initial, RationalPotential};
use dirac_mti_core::coefficients::StepCoefficients;
use dirac_mti_core::diagnostics::{l2_distance, mass};
use dirac_mti_core::grid::Grid;
use dirac_mti_core::modes::ModeTable;
use dirac_mti_core::mti::{evolve, MtiIntegrator, MtiState, ObserverSlot};
use dirac_mti_core::potential::{ClosurePotential, PotentialSampler, ZeroPotential};
use dirac_mti_core::tsfp::{free_propagator, tsfp_evolve};
use dirac_mti_core::validate::{pq_by_quadrature, reference_scheme_step, NodalW, SplitMix64};
use dirac_mti_core::SpinorField;

const REFERENCE_TAU: f64 = 1e-6;

fn study_grid() -> Grid {
    Grid::new(-16.0, 16.0, 1024).unwrap()
}

fn store() -> ReferenceStore {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) => ReferenceStore::at(PathBuf::from(dir)),
        None => ReferenceStore::at(PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ref-cache")),
    }
}

static BUILD_LOCK: Mutex<()> = Mutex::new(());

/// Reference snapshot for the bundled case on the fine study grid.
/// Epsilons used by the final-time-2 criteria get both t = 1 and t = 2 in
/// one build so the cache is shared across tests regardless of ordering.
fn reference(eps: f64, t: f64) -> Reference {
    let times: &[f64] = if eps == 1.0 || eps == 0.25 || eps == 0.125 {
        &[1.0, 2.0]
    } else {
        &[1.0]
    };
    assert!(times.contains(&t));
    let grid = study_grid();
    let initial = gaussian_initial(grid);
    let _guard = BUILD_LOCK.lock().unwrap();
    let refs = store()
        .ensure(grid, eps, REFERENCE_TAU, times, &RationalPotential, &initial)
        .expect("reference build");
    refs.into_iter().find(|r| r.t == t).expect("requested time")
}

fn mti_error_vs_reference(grid: Grid, eps: f64, tau: f64, t_final: f64) -> f64 {
    let initial = gaussian_initial(grid);
    let state = evolve(&initial, &RationalPotential, eps, tau, t_final, &mut []).unwrap();
    let reference = reference(eps, t_final);
    let restricted = reference.field.restrict_to(grid).unwrap();
    l2_distance(&state.field, &restricted).unwrap()
}

#[test]
fn criterion_1_free_field_exactness() {
    let start = Instant::now();
    let grid = Grid::new(-16.0, 16.0, 128).unwrap();
    let initial = gaussian_initial(grid);
    let tau = 0.01;
    let steps = 100;
    let mut worst = 0.0f64;
    for &eps in &[1.0, 0.1, 0.01] {
        let table = ModeTable::new(grid, eps).unwrap();
        let state = evolve(
            &initial,
            &ZeroPotential,
            eps,
            tau,
            tau * steps as f64,
            &mut [],
        )
        .unwrap();
        assert_eq!(state.step_index, steps);
        let exact = free_propagator(&initial, &table, tau * steps as f64).unwrap();
        worst = worst.max(l2_distance(&state.field, &exact).unwrap());
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-11, "free-field error {worst:.3e} above 1e-11");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!("criterion 1 PASS: free-field error {worst:.3e} <= 1e-11 in {elapsed:?}");
}

#[test]
fn criterion_2_quadrature_coefficient_oracle() {
    let start = Instant::now();
    let grid = study_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let mut worst = 0.0f64;
    let mut near_resonant = 0usize;
    for i in 0..200 {
        // the last 30 triples aim at the small-beat branch
        let (eps, tau, k) = if i < 170 {
            (
                10f64.powf(rng.gen_range(-2.0..=0.0)),
                10f64.powf(rng.gen_range(-4.0..=-1.0)),
                rng.gen_range(0..grid.len()),
            )
        } else {
            (
                10f64.powf(rng.gen_range(-2.0..=0.0)),
                10f64.powf(rng.gen_range(-6.0..=-5.0)),
                rng.gen_range(0..3usize),
            )
        };
        let table = ModeTable::new(grid, eps).unwrap();
        if table.reduced_minus()[k] * tau < 1e-6 {
            near_resonant += 1;
        }
        let coeffs = StepCoefficients::new(&table, tau).unwrap();
        let (p_m, q_m) = pq_by_quadrature(table.reduced_minus()[k], tau, 1e-13);
        let (p_p, q_p) = pq_by_quadrature(table.reduced_plus()[k], tau, 1e-13);
        worst = worst
            .max((coeffs.p_minus()[k] - p_m).norm())
            .max((coeffs.q_minus()[k] - q_m).norm())
            .max((coeffs.p_plus()[k] - p_p).norm())
            .max((coeffs.q_plus()[k] - q_p).norm());
    }
    let elapsed = start.elapsed();
    assert!(near_resonant >= 20, "only {near_resonant} near-resonant triples");
    assert!(worst <= 1e-10, "worst weight deviation {worst:.3e}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    println!(
        "criterion 2 PASS: 200 triples ({near_resonant} near-resonant), worst deviation {worst:.3e} <= 1e-10 in {elapsed:?}"
    );
}

#[test]
fn criterion_3_temporal_row_at_unit_eps() {
    let grid = study_grid();
    let expected = [3.69e-2, 9.18e-3, 2.29e-3, 5.73e-4, 1.43e-4, 3.58e-5];
    let mut errors = Vec::new();
    for k in 0..expected.len() {
        let tau = 0.1 / (1u32 << k) as f64;
        errors.push(mti_error_vs_reference(grid, 1.0, tau, 2.0));
    }
    for (k, (&e, &x)) in errors.iter().zip(&expected).enumerate() {
        let ratio = e / x;
        assert!(
            (1.0 / 1.5..=1.5).contains(&ratio),
            "tau index {k}: error {e:.3e} vs published {x:.3e} (ratio {ratio:.3})"
        );
    }
    let mut orders = Vec::new();
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(
            (1.90..=2.10).contains(&order),
            "order {order:.3} outside [1.90, 2.10] ({errors:?})"
        );
        orders.push(order);
    }
    println!(
        "criterion 3 PASS: errors {} | orders {}",
        errors
            .iter()
            .map(|e| format!("{e:.3e}"))
            .collect::<Vec<_>>()
            .join(" "),
        orders
            .iter()
            .map(|o| format!("{o:.2}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
}

#[test]
fn criterion_4_uniform_accuracy() {
    let grid = study_grid();
    let epsilons: Vec<f64> = (0..7).map(|k| 1.0 / (1u32 << k) as f64).collect();
    let taus: Vec<f64> = (0..6).map(|k| 0.1 / (1u32 << k) as f64).collect();
    let mut table = vec![vec![0.0f64; taus.len()]; epsilons.len()];
    for (ei, &eps) in epsilons.iter().enumerate() {
        for (ti, &tau) in taus.iter().enumerate() {
            table[ei][ti] = mti_error_vs_reference(grid, eps, tau, 1.0);
        }
    }
    let max_per_tau: Vec<f64> = (0..taus.len())
        .map(|ti| epsilons.iter().enumerate().map(|(ei, _)| table[ei][ti]).fold(0.0, f64::max))
        .collect();

    // least-squares slope of log(max error) vs log(tau)
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(&max_per_tau)
        .map(|(&t, &e)| (t.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!(
        (0.9..=2.1).contains(&slope),
        "uniform slope {slope:.3} outside [0.9, 2.1] (max errors {max_per_tau:?})"
    );

    // linear bound with C fixed from the coarsest column
    let c_bound = 2.0
        * epsilons
            .iter()
            .enumerate()
            .map(|(ei, _)| table[ei][0] / taus[0])
            .fold(0.0, f64::max);
    for (ei, &eps) in epsilons.iter().enumerate() {
        for (ti, &tau) in taus.iter().enumerate() {
            assert!(
                table[ei][ti] <= c_bound * tau,
                "cell eps={eps} tau={tau}: {:.3e} above C tau = {:.3e}",
                table[ei][ti],
                c_bound * tau
            );
        }
    }
    println!(
        "criterion 4 PASS: uniform slope {slope:.3} in [0.9, 2.1], all 42 cells under C tau with C = {c_bound:.3}"
    );
}

#[test]
fn criterion_5_degeneracy_diagonal() {
    let grid = study_grid();
    let eps = 0.125;
    let taus: Vec<f64> = (0..7).map(|k| 0.1 / (1u32 << k) as f64).collect();
    let errors: Vec<f64> = taus
        .iter()
        .map(|&tau| mti_error_vs_reference(grid, eps, tau, 2.0))
        .collect();
    let orders: Vec<f64> = errors
        .windows(2)
        .map(|p| (p[0] / p[1]).log2())
        .collect();
    // some order near tau ~ eps^2 dips below 0.7 ...
    let eps_sq = eps * eps;
    let k_last = orders
        .iter()
        .enumerate()
        .filter(|(_, &o)| o < 0.7)
        .map(|(k, _)| k)
        .next_back()
        .expect("no degenerate order found");
    let tau_at_dip = taus[k_last + 1];
    assert!(
        (eps_sq / 4.0..=eps_sq * 4.0).contains(&tau_at_dip),
        "dip at tau {tau_at_dip} not near eps^2 = {eps_sq}"
    );
    // ... and the order recovers two halvings later
    assert!(
        k_last + 2 < orders.len(),
        "tau range too short to observe recovery"
    );
    let recovered = orders[k_last + 2];
    assert!(
        recovered >= 1.9,
        "order {recovered:.3} two halvings after the dip, expected >= 1.9 ({orders:?})"
    );
    println!(
        "criterion 5 PASS: orders {} | dip at tau={tau_at_dip}, recovery {recovered:.2}",
        orders
            .iter()
            .map(|o| format!("{o:.2}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
}

#[test]
fn criterion_6_spatial_spectral_accuracy() {
    let tau = 1e-4;
    let t_final = 2.0;
    let m_values = [16usize, 32, 64, 128, 256];
    let published_unit_eps = [1.65, 5.74e-1, 7.08e-2, 7.00e-5];
    let mut all = Vec::new();
    for &eps in &[1.0, 0.25] {
        let mut errors = Vec::new();
        for &m in &m_values {
            let grid = Grid::new(-16.0, 16.0, m).unwrap();
            errors.push(mti_error_vs_reference(grid, eps, tau, t_final));
        }
        // >= 10x reduction per halving of h in the resolved range (error
        // meaningfully below the O(1) saturation), up to h = 1/4
        for w in 0..3 {
            if errors[w] < 0.5 {
                assert!(
                    errors[w + 1] <= errors[w] / 10.0,
                    "eps={eps}: halving h gave {:.3e} -> {:.3e} (<10x)",
                    errors[w],
                    errors[w + 1]
                );
            }
        }
        // the finest cell sits at the error floor, far below the coarser one
        assert!(
            errors[4] <= 1e-5,
            "eps={eps}: finest-grid error {:.3e} above floor bound 1e-5",
            errors[4]
        );
        all.push((eps, errors));
    }
    let unit = &all[0].1;
    for (e, x) in unit.iter().zip(&published_unit_eps) {
        let ratio = e / x;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "error {e:.3e} vs published {x:.3e} (ratio {ratio:.2})"
        );
    }
    println!(
        "criterion 6 PASS: eps=1 spatial errors {} (published-matched within 2x), eps=1/4 floor {:.2e}",
        unit.iter()
            .map(|e| format!("{e:.3e}"))
            .collect::<Vec<_>>()
            .join(" "),
        all[1].1[4]
    );
}

fn linear_fit_residual(samples: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let sx: f64 = samples.iter().map(|p| p.0).sum();
    let sy: f64 = samples.iter().map(|p| p.1).sum();
    let sxx: f64 = samples.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = samples.iter().map(|p| p.0 * p.1).sum();
    let mut b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let mut a = (sy - b * sx) / n;
    if a < 0.0 {
        // nonnegative-intercept fit
        a = 0.0;
        b = sxy / sxx;
    }
    let ss_res: f64 = samples.iter().map(|&(t, v)| (v - a - b * t).powi(2)).sum();
    let ss_tot: f64 = samples.iter().map(|&(_, v)| v * v).sum();
    (a, b, (ss_res / ss_tot).sqrt())
}

#[test]
fn criterion_7_limiting_model_rates() {
    let config = RunConfig {
        domain: Domain { a: -64.0, b: 64.0 },
        case: CaseSpec::Builtin("nm".into()),
        epsilons: vec![0.25, 0.125, 0.0625, 0.03125],
        h_values: vec![],
        m_values: vec![2048],
        taus: vec![1e-4],
        final_time: 2.0,
        method: Method::Mti,
        reference: None,
        observer_every: 250,
        output_dir: None,
        threads: 2,
        emit_plot_data: false,
    };
    let resolved = config.resolve().unwrap();
    let series = run_limit_study(&resolved).unwrap();

    let at = |s: &dirac_mti::limit::LimitSeries, t: f64| {
        s.samples
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .copied()
            .unwrap()
    };
    // eps-halving ratios at t = 1
    let mut sch_ratios = Vec::new();
    let mut pau_ratios = Vec::new();
    for pair in series.windows(2) {
        let (coarse, fine) = (at(&pair[0], 1.0), at(&pair[1], 1.0));
        sch_ratios.push(coarse.1 / fine.1);
        pau_ratios.push(coarse.2 / fine.2);
    }
    for r in &sch_ratios {
        assert!(
            (1.4..=2.6).contains(r),
            "first-order ratio {r:.3} outside 2 +- 30% ({sch_ratios:?})"
        );
    }
    for r in &pau_ratios {
        assert!(
            (2.8..=5.2).contains(r),
            "second-order ratio {r:.3} outside 4 +- 30% ({pau_ratios:?})"
        );
    }
    // linear-in-t growth with small residual over [0.25, 2]
    for s in &series {
        let window: Vec<(f64, f64)> = s
            .samples
            .iter()
            .filter(|(t, _, _)| (0.25..=2.0).contains(t))
            .map(|&(t, es, _)| (t, es))
            .collect();
        let (_, b, res) = linear_fit_residual(&window);
        assert!(b > 0.0, "eps={}: first-order growth slope {b}", s.eps);
        assert!(
            res <= 0.20,
            "eps={}: first-order fit residual {res:.3} above 20%",
            s.eps
        );
        let window: Vec<(f64, f64)> = s
            .samples
            .iter()
            .filter(|(t, _, _)| (0.25..=2.0).contains(t))
            .map(|&(t, _, ep)| (t, ep))
            .collect();
        let (_, b, res) = linear_fit_residual(&window);
        assert!(b > 0.0, "eps={}: second-order growth slope {b}", s.eps);
        assert!(
            res <= 0.20,
            "eps={}: second-order fit residual {res:.3} above 20%",
            s.eps
        );
    }
    // the second-order model dominates the first-order one for small eps
    for s in series.iter().filter(|s| s.eps <= 0.125) {
        let (_, es, ep) = at(s, 1.0);
        assert!(ep < es, "eps={}: E_pau {ep:.3e} not below E_sch {es:.3e}", s.eps);
    }
    println!(
        "criterion 7 PASS: E_sch(1) ratios {:?}, E_pau(1) ratios {:?}, all fit residuals <= 20%",
        sch_ratios
            .iter()
            .map(|r| format!("{r:.2}"))
            .collect::<Vec<_>>(),
        pau_ratios
            .iter()
            .map(|r| format!("{r:.2}"))
            .collect::<Vec<_>>()
    );
}

#[test]
fn criterion_8_conservation_diagnostics() {
    let grid = study_grid();
    let initial = gaussian_initial(grid);
    let m0 = mass(&initial);

    // splitting integrator conserves mass to roundoff over full runs
    let mut worst_tsfp = 0.0f64;
    for &eps in &[1.0, 0.0625] {
        let mut track = |_s: usize, _t: f64, f: &SpinorField| {
            let drift = (mass(f) - m0).abs() / m0;
            worst_tsfp = worst_tsfp.max(drift);
        };
        let mut slots = [ObserverSlot {
            every: 200,
            observer: &mut track,
        }];
        tsfp_evolve(&initial, &RationalPotential, eps, 1e-3, 2.0, &mut slots).unwrap();
    }
    assert!(
        worst_tsfp <= 1e-12,
        "splitting mass drift {worst_tsfp:.3e} above 1e-12"
    );

    // multiscale integrator: small drift, shrinking ~4x per tau halving
    let drift_at = |tau: f64| {
        let state = evolve(&initial, &RationalPotential, 1.0, tau, 2.0, &mut []).unwrap();
        (mass(&state.field) - m0).abs() / m0
    };
    let d1 = drift_at(1e-3);
    let d2 = drift_at(5e-4);
    assert!(d1 <= 1e-4, "drift {d1:.3e} above 1e-4");
    let ratio = d1 / d2;
    assert!(
        (2.5..=6.0).contains(&ratio),
        "drift ratio {ratio:.2} not near 4 ({d1:.3e} / {d2:.3e})"
    );
    println!(
        "criterion 8 PASS: splitting drift {worst_tsfp:.2e} <= 1e-12; multiscale drift {d1:.2e} <= 1e-4, halving ratio {ratio:.2}"
    );
}

#[test]
fn criterion_9_independent_transcription_oracle() {
    let grid = Grid::new(-16.0, 16.0, 64).unwrap();
    let tau = 1e-3;
    let eps_cycle = [1.0, 0.5, 0.25, 0.1];
    let nm_v: Vec<f64> = grid
        .nodes()
        .map(|x| RationalPotential.sample(0.0, x).0)
        .collect();
    let nm_a1: Vec<f64> = grid
        .nodes()
        .map(|x| RationalPotential.sample(0.0, x).1)
        .collect();
    let td = ClosurePotential {
        value: |t: f64, x: f64| {
            let d = 1.0 + x * x;
            (t.cos() * (1.0 - x) / d, (2.0 * t).sin() * (x + 1.0) / d)
        },
        time_derivative: |t: f64, x: f64| {
            let d = 1.0 + x * x;
            (-t.sin() * (1.0 - x) / d, 2.0 * (2.0 * t).cos() * (x + 1.0) / d)
        },
        time_independent: false,
    };
    let t0 = 0.3;
    let (mut tv, mut ta, mut tvt, mut tat) = (
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
    );
    for (j, x) in grid.nodes().enumerate() {
        let (v, a) = td.sample(t0, x);
        let (vt, at) = td.sample_dt(t0, x);
        tv[j] = v;
        ta[j] = a;
        tvt[j] = vt;
        tat[j] = at;
    }

    let mut worst = 0.0f64;
    for i in 0..20 {
        let eps = eps_cycle[i % eps_cycle.len()];
        let table = ModeTable::new(grid, eps).unwrap();
        let f0 = SplitMix64(0x900d + i as u64).random_field(grid);
        if i < 10 {
            let mut integ = MtiIntegrator::new(&table, &RationalPotential, tau).unwrap();
            let mut state = MtiState::new(f0.clone());
            integ.step(&mut state).unwrap();
            let oracle = reference_scheme_step(
                &f0,
                eps,
                tau,
                &NodalW {
                    v: &nm_v,
                    a1: &nm_a1,
                    dt: None,
                },
                grid,
            );
            worst = worst.max(l2_distance(&state.field, &oracle).unwrap());
        } else {
            let mut integ = MtiIntegrator::new(&table, &td, tau).unwrap();
            let mut state = MtiState::new(f0.clone());
            state.t = t0;
            integ.step(&mut state).unwrap();
            let oracle = reference_scheme_step(
                &f0,
                eps,
                tau,
                &NodalW {
                    v: &tv,
                    a1: &ta,
                    dt: Some((&tvt, &tat)),
                },
                grid,
            );
            worst = worst.max(l2_distance(&state.field, &oracle).unwrap());
        }
    }
    assert!(
        worst <= 1e-13,
        "transcription disagreement {worst:.3e} above 1e-13"
    );
    println!("criterion 9 PASS: 20 random states (10 time-dependent), worst deviation {worst:.3e} <= 1e-13");
}
