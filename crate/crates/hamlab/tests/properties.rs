//! Property-based invariants: structural facts that must hold across the
//! whole parameter space, not just at the reference points.

use hamlab::integrate::{
    first_integral_drift, integrate, midpoint_step, IntegrationConfig, Termination,
};
use hamlab::isochrony::{isochrony_condition_residual, period_quadrature, period_return};
use hamlab::linalg::{eigenstructure, DEFAULT_CLUSTER_TOL};
use hamlab::phase::{norm, PhaseState};
use hamlab::probe::{asymptotic_residual, certify_no_asymptotic, default_cascade, time_grid, CertificateVerdict, ClosedFormMotion};
use hamlab::{GFunction, HamiltonianSystem};
use proptest::prelude::*;

/// Catalog systems with randomized parameters.
fn arb_system() -> impl Strategy<Value = HamiltonianSystem> {
    prop_oneof![
        Just(HamiltonianSystem::free_particle()),
        Just(HamiltonianSystem::l4_linear()),
        (0.1_f64..3.0).prop_map(|s| HamiltonianSystem::cherry(s).unwrap()),
        arb_g().prop_map(HamiltonianSystem::variation_like),
    ]
}

/// Wells with g'(0) in [0.5, 4] and bounded higher coefficients.
fn arb_g() -> impl Strategy<Value = GFunction> {
    (0.5_f64..4.0, -1.5_f64..1.5, -1.0_f64..1.0).prop_map(|(c1, c2, c3)| {
        GFunction::parse(&format!("{c1},{c2},{c3}")).unwrap()
    })
}

fn arb_state(dim: usize, radius: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-radius..radius, dim)
}

/// Central-difference gradient of the Hamiltonian.
fn grad_h_fd(sys: &HamiltonianSystem, x: &[f64], step: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += step;
            xm[i] -= step;
            (sys.hamiltonian(&xp) - sys.hamiltonian(&xm)) / (2.0 * step)
        })
        .collect()
}

/// Applies the canonical structure J (dq/dt = dH/dp, dp/dt = -dH/dq).
fn apply_j(grad: &[f64]) -> Vec<f64> {
    let n = grad.len() / 2;
    let mut out = vec![0.0; grad.len()];
    for i in 0..n {
        out[i] = grad[n + i];
        out[n + i] = -grad[i];
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_is_the_symplectic_gradient(sys in arb_system(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let field = sys.field(&x);
        let expected = apply_j(&grad_h_fd(&sys, &x, 1e-5));
        for (a, b) in field.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-7, "field {a} vs J grad H {b}");
        }
    }

    #[test]
    fn energy_gradient_is_orthogonal_to_the_field(sys in arb_system(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let field = sys.field(&x);
        // grad H = -J field exactly, so the inner product cancels pairwise
        let grad = apply_j(&field).iter().map(|v| -v).collect::<Vec<_>>();
        let dot: f64 = grad.iter().zip(&field).map(|(a, b)| a * b).sum();
        prop_assert!(dot.abs() < 1e-12, "dH/dt = {dot}");
    }

    #[test]
    fn spectra_close_under_conjugation_and_negation(sys in arb_system()) {
        let jac = sys.jacobian(&vec![0.0; sys.dim()]);
        let spec = eigenstructure(&jac, DEFAULT_CLUSTER_TOL).unwrap();
        prop_assert!(spec.residual_bound < 1e-9, "residual {}", spec.residual_bound);
        let scale = spec
            .eigenvalues
            .iter()
            .fold(1.0_f64, |m, e| m.max(e.re.hypot(e.im)));
        for e in &spec.eigenvalues {
            // structural sanity of the multiplicities
            prop_assert!(e.geometric >= 1 && e.geometric <= e.algebraic);
            prop_assert_eq!(e.blocks.iter().sum::<usize>(), e.algebraic);
            prop_assert_eq!(e.blocks.len(), e.geometric);
            // conjugation is exact by construction
            if e.im != 0.0 {
                prop_assert!(spec
                    .eigenvalues
                    .iter()
                    .any(|f| f.re == e.re && f.im == -e.im && f.algebraic == e.algebraic));
            }
            // negation holds within tolerance (canonical structure)
            prop_assert!(
                spec.eigenvalues.iter().any(|f| {
                    (f.re + e.re).abs() <= 1e-9 * scale && (f.im + e.im).abs() <= 1e-9 * scale
                }),
                "no mirror of ({}, {})",
                e.re,
                e.im
            );
        }
    }

    #[test]
    fn trace_and_determinant_match_the_spectrum(sys in arb_system()) {
        use num::complex::Complex64;
        let jac = sys.jacobian(&vec![0.0; sys.dim()]);
        let spec = eigenstructure(&jac, DEFAULT_CLUSTER_TOL).unwrap();
        let trace_sum: f64 = spec
            .eigenvalues
            .iter()
            .map(|e| e.algebraic as f64 * e.re)
            .sum();
        prop_assert!((trace_sum - jac.trace()).abs() < 1e-9);
        let det_prod = spec.eigenvalues.iter().fold(Complex64::new(1.0, 0.0), |p, e| {
            p * Complex64::new(e.re, e.im).powu(e.algebraic as u32)
        });
        prop_assert!((det_prod.re - jac.determinant()).abs() < 1e-9);
        prop_assert!(det_prod.im.abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn midpoint_reverses_to_the_start(
        sys in arb_system(),
        x0 in arb_state(4, 0.3),
        h in 1e-3_f64..1e-2,
        n in 10_usize..80,
    ) {
        let x0 = &x0[..sys.dim()];
        let mut x = x0.to_vec();
        for _ in 0..n {
            match midpoint_step(&sys, &x, h) {
                Some(next) => x = next,
                None => return Ok(()),
            }
        }
        for _ in 0..n {
            match midpoint_step(&sys, &x, -h) {
                Some(next) => x = next,
                None => return Ok(()),
            }
        }
        let err = x
            .iter()
            .zip(x0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        prop_assert!(err < 1e-11, "round trip error {err} after {n} steps at h={h}");
    }

    #[test]
    fn quadratic_invariants_do_not_drift(
        h in 2e-3_f64..1e-2,
        span in 20.0_f64..100.0,
        x0 in arb_state(4, 0.4),
    ) {
        let sys = HamiltonianSystem::l4_linear();
        let cfg = IntegrationConfig::new(0.0, span, h);
        let x = PhaseState { coords: x0 };
        let traj = integrate(&sys, &x, &cfg).unwrap();
        let h_drift = first_integral_drift(&traj, |s| sys.hamiltonian(s));
        let q_drift = first_integral_drift(&traj, |s| s[0] * s[0] + s[1] * s[1]);
        prop_assert!(h_drift < 1e-10, "H drift {h_drift}");
        prop_assert!(q_drift < 1e-10, "|q|^2 drift {q_drift}");
    }

    #[test]
    fn escape_reports_the_first_crossing(eps in 0.05_f64..0.8) {
        let sys = HamiltonianSystem::free_particle();
        let x0 = PhaseState { coords: vec![0.0, eps] };
        let cfg = IntegrationConfig::new(0.0, 1e3, 1e-3)
            .with_escape_radius(1.0)
            .with_store_every(1);
        let traj = integrate(&sys, &x0, &cfg).unwrap();
        prop_assert_eq!(traj.termination, Termination::Escape);
        let t_esc = traj.escape_time.unwrap();
        // every state strictly before the crossing stays inside the ball
        for (t, s) in traj.times.iter().zip(&traj.states) {
            if *t < t_esc - 1e-3 {
                prop_assert!(norm(&s.coords) < 1.0);
            }
        }
        let expect = (1.0 / (eps * eps) - 1.0).sqrt();
        prop_assert!(
            (t_esc - expect).abs() <= 0.05 * expect,
            "escape {t_esc} vs closed form {expect}"
        );
    }

    #[test]
    fn certification_is_monotone_in_tolerance(
        lo_exp in -12.0_f64..-5.0,
        factor in 1.0_f64..6.0,
        which in 0_usize..2,
    ) {
        let sys = match which {
            0 => HamiltonianSystem::l4_linear(),
            _ => HamiltonianSystem::variation_like(GFunction::parse("1,1").unwrap()),
        };
        let stages_lo = default_cascade(&sys).unwrap();
        let stages_hi = default_cascade(&sys).unwrap();
        let lo = 10f64.powf(lo_exp);
        let hi = 10f64.powf(lo_exp + factor);
        let cert_lo = certify_no_asymptotic(&sys, &stages_lo, 120, lo, 11).unwrap();
        let cert_hi = certify_no_asymptotic(&sys, &stages_hi, 120, hi, 11).unwrap();
        let ok_lo = cert_lo.verdict == CertificateVerdict::CertifiedNoAsymptoticMotion;
        let ok_hi = cert_hi.verdict == CertificateVerdict::CertifiedNoAsymptoticMotion;
        prop_assert!(!ok_lo || ok_hi, "certified at {lo} but not at {hi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn return_time_matches_quadrature_everywhere(a in 0.05_f64..0.42) {
        let g = GFunction::parse("1,1").unwrap();
        let ret = period_return(&g, a, 1e-3).unwrap();
        let quad = period_quadrature(&g, a).unwrap();
        prop_assert!((ret - quad).abs() < 1e-6, "gap {}", (ret - quad).abs());
    }

    #[test]
    fn small_amplitudes_approach_the_harmonic_period(g in arb_g()) {
        let c1 = g.coefficients()[0];
        let t = period_quadrature(&g, 1e-3).unwrap();
        let harmonic = std::f64::consts::TAU / c1.sqrt();
        prop_assert!(
            (t - harmonic).abs() <= 1e-4 * harmonic,
            "T(1e-3) = {t} vs harmonic {harmonic}"
        );
    }

    #[test]
    fn linear_wells_are_amplitude_independent(c in 0.25_f64..9.0, a in 0.1_f64..1.5) {
        let g = GFunction::parse(&format!("{c}")).unwrap();
        let t = period_quadrature(&g, a).unwrap();
        let expect = std::f64::consts::TAU / c.sqrt();
        prop_assert!((t - expect).abs() < 1e-8, "T = {t}, expect {expect}");
    }
}

#[test]
fn equilibria_are_fixed_points() {
    for sys in [
        HamiltonianSystem::free_particle(),
        HamiltonianSystem::l4_linear(),
        HamiltonianSystem::cherry(1.7).unwrap(),
        HamiltonianSystem::variation_like(GFunction::parse("2,1,-0.3").unwrap()),
    ] {
        let f = sys.field(&vec![0.0; sys.dim()]);
        assert!(norm(&f) < 1e-14, "{} field at equilibrium: {f:?}", sys.name());
    }
}

#[test]
fn sigma_zero_cherry_is_exactly_its_linearization() {
    let sys = HamiltonianSystem::cherry(0.0).unwrap();
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = sys.field(&x);
        let linear = [x[2], -2.0 * x[3], -x[0], 2.0 * x[1]];
        for (a, b) in f.iter().zip(linear) {
            assert!((a - b).abs() < 1e-14, "field {a} vs linear part {b}");
        }
    }
}

#[test]
fn variation_linear_part_is_the_stated_matrix() {
    let g = GFunction::parse("3,1,0.5").unwrap();
    let gp0 = 3.0;
    let sys = HamiltonianSystem::variation_like(g);
    let jac = sys.jacobian(&[0.0; 4]);
    let expected = [
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, -gp0, 0.0, 0.0],
        [-gp0, 0.0, 0.0, 0.0],
    ];
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(jac.get(i, j), expected[i][j], "entry ({i},{j})");
        }
    }
}

#[test]
fn residual_is_stable_under_grid_refinement() {
    let motion = ClosedFormMotion::PastAsymptoticOrbit { sigma: 1.0 };
    let sys = motion.system();
    let r = |points| {
        asymptotic_residual(&sys, &motion, &time_grid(-100.0, -1.0, points)).unwrap()
    };
    let (r500, r1000, r2000) = (r(500), r(1000), r(2000));
    assert!((r1000 - r500).abs() <= 0.1 * r500.max(1e-15), "500 -> 1000: {r500} vs {r1000}");
    assert!((r2000 - r1000).abs() <= 0.1 * r1000.max(1e-15), "1000 -> 2000: {r1000} vs {r2000}");
}

#[test]
fn obstruction_is_bit_reproducible() {
    let g = GFunction::parse("1,7/3,-2/5").unwrap();
    let a = isochrony_condition_residual(&g);
    let b = isochrony_condition_residual(&g.clone());
    assert_eq!(a, b);
    assert_eq!(a.to_string(), b.to_string());
}

#[test]
fn full_system_and_subsystem_stay_in_lockstep() {
    // the (q1, p2) pair of the 4D flow obeys the planar well autonomously:
    // matching starts must agree for the whole span
    let g = GFunction::parse("1,1").unwrap();
    let full_sys = HamiltonianSystem::variation_like(g.clone());
    let well = HamiltonianSystem::planar_well(g);
    let full0 = PhaseState { coords: vec![0.3, 0.1, -0.05, 0.2] };
    let well0 = PhaseState { coords: vec![0.3, 0.2] };
    let cfg_full = IntegrationConfig::new(0.0, 50.0, 1e-3).with_store_every(50);
    let traj_full = integrate(&full_sys, &full0, &cfg_full).unwrap();
    let traj_well = integrate(&well, &well0, &cfg_full).unwrap();
    assert_eq!(traj_full.times.len(), traj_well.times.len());
    let mut worst = 0.0_f64;
    for (xf, xw) in traj_full.states.iter().zip(&traj_well.states) {
        worst = worst.max((xf.coords[0] - xw.coords[0]).abs());
        worst = worst.max((xf.coords[3] - xw.coords[1]).abs());
    }
    assert!(worst < 1e-9, "subsystem separation violated by {worst}");
}
