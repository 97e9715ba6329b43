use hypstab_core::calibration::calibrate;
use hypstab_core::front_tracking::{ft_solve_with, TrackingOptions};
use hypstab_core::functionals::{glimm_values, remove_values, stability_phi};
use hypstab_core::riemann::{psi_compose, riemann_fan, shock_compose};
use hypstab_core::sampling::{random_step, random_step_pair, rng, StepSpec};
use hypstab_core::wave_measures::{xi_hat, BVFunction, SignedMeasure1D};
use hypstab_core::{
    builtin, solve_shock_strengths, solve_strengths, FluxModel, ModelId, StabilityConstants, State, WaveStrengths,
};
use proptest::prelude::*;

fn p_system() -> FluxModel {
    builtin(&ModelId::PSystem { gamma: 1.4 }).unwrap()
}

fn burgers() -> FluxModel {
    builtin(&ModelId::Burgers).unwrap()
}

fn consts() -> StabilityConstants {
    StabilityConstants {
        c0: 4.0,
        kappa1: 1.0,
        kappa2: 3.1,
        delta: 0.1,
    }
}

fn state2() -> impl Strategy<Value = State> {
    (-0.1..0.1f64, -0.1..0.1f64).prop_map(|(a, b)| State::from_vec(vec![a, b]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jordan_parts_recombine(
        atoms in prop::collection::vec((-2.0..2.0f64, -1.0..1.0f64), 0..6),
        cells in prop::collection::vec((-2.0..2.0f64, 0.01..1.0f64, -1.0..1.0f64), 0..4),
        x in -3.0..3.0f64,
    ) {
        // overlapping cells are not allowed, so lay them out end to end
        let mut start = -2.5;
        let cells: Vec<(f64, f64, f64)> = cells.iter().map(|&(_, len, d)| {
            let c = (start, start + len, d);
            start += len + 0.1;
            c
        }).collect();
        let m = SignedMeasure1D::new(atoms, cells).unwrap();
        let (p, n, a) = (m.positive_part(), m.negative_part(), m.total_variation_measure());
        prop_assert!((p.cdf(x) - n.cdf(x) - m.cdf(x)).abs() < 1e-12);
        prop_assert!((p.cdf(x) + n.cdf(x) - a.cdf(x)).abs() < 1e-12);
        prop_assert!(p.cdf(x) >= 0.0 && n.cdf(x) >= 0.0);
        prop_assert!((m.cdf_open(x) + m.right_of(x) - m.total()).abs() < 1e-12);
    }

    #[test]
    fn strengths_round_trip(um in state2(), s1 in -0.1..0.1f64, s2 in -0.1..0.1f64) {
        let m = p_system();
        let sigma = WaveStrengths::new(vec![s1, s2]);
        let up = psi_compose(&m, &sigma, &um).unwrap();
        prop_assert!(solve_strengths(&m, &um, &up).unwrap().max_abs_diff(&sigma) < 1e-9);
        let us = shock_compose(&m, &sigma, &um).unwrap();
        prop_assert!(solve_shock_strengths(&m, &um, &us).unwrap().max_abs_diff(&sigma) < 1e-9);
    }

    #[test]
    fn fans_chain_and_order(um in state2(), up in state2(), eps in 0.002..0.05f64) {
        let m = p_system();
        let fan = riemann_fan(&m, &um, &up, eps).unwrap();
        if let (Some(first), Some(last)) = (fan.waves.first(), fan.waves.last()) {
            prop_assert_eq!(&first.left, &um);
            prop_assert_eq!(&last.right, &up);
        } else {
            prop_assert!((&up - &um).norm() < 1e-12);
        }
        for w in fan.waves.windows(2) {
            prop_assert_eq!(&w[0].right, &w[1].left);
            prop_assert!(w[0].speed <= w[1].speed + 1e-12);
        }
    }

    #[test]
    fn tangency_of_strengths(u in state2(), d in state2(), i in 0usize..2) {
        prop_assume!(d.norm() > 1e-3);
        let m = p_system();
        let e = m.eigen_at(&u).unwrap();
        let h = 1e-3;
        let sigma = solve_strengths(&m, &u, &(&u + &d * h)).unwrap();
        let linear = e.left_vecs[i].dot(&d) * h;
        prop_assert!((sigma.sigma[i] - linear).abs() <= 10.0 * h * h * (1.0 + d.norm_squared()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coarsening_never_increases_glimm(seed in any::<u64>(), mask in prop::collection::vec(any::<bool>(), 8)) {
        let m = p_system();
        let u = random_step(&m, &mut rng(seed), &StepSpec { pieces: 8, ..Default::default() }, 4.0).unwrap();
        let (g, gc) = (glimm_values(&m, &u, 4.0).unwrap(), glimm_values(&m, &remove_values(&u, &mask).unwrap(), 4.0).unwrap());
        prop_assert!(gc.q <= g.q + 1e-10);
        prop_assert!(gc.upsilon <= g.upsilon + 1e-10);
    }

    #[test]
    fn step_functions_give_the_same_functional(seed in any::<u64>()) {
        for m in [burgers(), p_system()] {
            let (v, vt) = random_step_pair(&m, &mut rng(seed), &StepSpec::default(), 4.0).unwrap();
            let phi = stability_phi(&m, &v, &vt, &consts()).unwrap();
            let xi = xi_hat(&m, &BVFunction::from_pcf(&v), &BVFunction::from_pcf(&vt), &consts()).unwrap();
            prop_assert!((xi - phi).abs() <= 1e-8 * phi.max(1.0), "{} vs {}", xi, phi);
            prop_assert_eq!(stability_phi(&m, &v, &v, &consts()).unwrap(), 0.0);
        }
    }

    #[test]
    fn phi_is_comparable_to_l1(seed in any::<u64>()) {
        let m = p_system();
        let (v, vt) = random_step_pair(&m, &mut rng(seed), &StepSpec::default(), 4.0).unwrap();
        let phi = stability_phi(&m, &v, &vt, &consts()).unwrap();
        let l1 = v.l1_distance(&vt);
        // twice the largest observed ratio between Σ|q_i| and |Δu|
        let c = 3.4;
        prop_assert!(phi <= 2.0 * c * l1 + 1e-14);
        prop_assert!(phi >= l1 / c - 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tracking_keeps_states_chained_and_non_physical_bounded(seed in any::<u64>(), eps in prop::sample::select(vec![0.02, 0.01])) {
        let m = p_system();
        let u = random_step(&m, &mut rng(seed), &StepSpec::default(), 4.0).unwrap();
        let opts = TrackingOptions::new(eps, 0.5);
        let traj = ft_solve_with(&m, &u, &opts, &consts()).unwrap();
        prop_assert!(traj.max_non_physical() <= opts.np_budget * eps * (1.0 + 1e-9));
        let mut times: Vec<f64> = traj.collisions().map(|e| e.time).collect();
        times.push(0.0);
        times.push(0.5);
        for t in times {
            let fronts = traj.fronts_at(t);
            for w in fronts.windows(2) {
                prop_assert!((&w[0].right - &w[1].left).norm() < 1e-12, "gap at t={}", t);
            }
            // no front reaches the far field by this time
            let s = traj.snapshot(t).unwrap();
            prop_assert_eq!(s.value_at(-1e3), u.value_at(-1e3));
            prop_assert_eq!(s.value_at(1e3), u.value_at(1e3));
        }
        let jumps = traj.snapshot(0.0).unwrap();
        prop_assert!(jumps.l1_distance(&u) < 1e-12);
    }
}

#[test]
fn p_system_calibration_is_stable() {
    let m = p_system();
    let c = calibrate(&m, 0.1, 200, 11).unwrap();
    assert!(c.c0 >= 4.0 && c.kappa2 >= 1.0 && c.c_equiv >= 2.0);
}
