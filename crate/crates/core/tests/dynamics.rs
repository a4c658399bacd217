use gtfe::dynamics::*;
use gtfe::kernel::constants;
use gtfe::{Error, ParticleState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn random_state(n: usize, span: f64, seed: u64) -> ParticleState {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-span..span)).collect();
    x.sort_by(f64::total_cmp);
    x.dedup();
    let mut w: Vec<f64> = x.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total.max(1.0));
    ParticleState { time: 0.0, positions: x, weights: w }
}

#[test]
fn fast_agrees_with_direct() {
    for alpha in [0.3, 1.0, 4.0] {
        let kc = constants(alpha).unwrap();
        for (k, n) in [1usize, 2, 3, 17, 256, 4096].into_iter().enumerate() {
            let st = random_state(n, 0.2 * n as f64 + 1.0, k as u64);
            let f = velocity_fast(&st, &kc).unwrap();
            let d = velocity_direct(&st, &kc).unwrap();
            let scale = velocity_scale(&st, &kc).unwrap();
            for i in 0..st.len() {
                assert!((f.velocities[i] - d.velocities[i]).abs() <= 1e-12 * scale[i], "n {n} i {i}");
                assert!((f.hbar_at[i] - d.hbar_at[i]).abs() <= 1e-13 * kc.k_inf, "n {n} i {i}");
            }
        }
    }
}

#[test]
fn widely_spread_particles_do_not_overflow() {
    let kc = constants(0.01).unwrap();
    let st = ParticleState { time: 0.0, positions: vec![-1e4, 0.0, 1e-3, 1e4], weights: vec![0.25; 4] };
    let f = velocity_fast(&st, &kc).unwrap();
    assert!(f.velocities.iter().all(|v| v.is_finite()));
    assert_eq!(f.velocities[0], 0.0);
    assert_eq!(f.velocities[3], 0.0);
    let d = velocity_direct(&st, &kc).unwrap();
    assert!((f.velocities[1] - d.velocities[1]).abs() <= 1e-12 * d.velocities[1].abs());
}

#[test]
fn empty_and_mismatched_states() {
    let kc = constants(1.0).unwrap();
    let empty = ParticleState { time: 0.0, positions: vec![], weights: vec![] };
    assert!(velocity_fast(&empty, &kc).unwrap().velocities.is_empty());
    let bad = ParticleState { time: 0.0, positions: vec![0.0], weights: vec![] };
    assert!(matches!(velocity_fast(&bad, &kc), Err(Error::Parameter(_))));
    let unsorted = ParticleState { time: 0.0, positions: vec![1.0, 0.0], weights: vec![0.5, 0.5] };
    assert!(matches!(velocity_direct(&unsorted, &kc), Err(Error::Ordering { index: 0, .. })));
}

#[test]
fn lipschitz_on_the_ordered_cone() {
    let kc = constants(1.0).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for trial in 0..400 {
        let n = 2 + trial % 63;
        let a = random_state(n, 3.0, 1000 + trial as u64);
        let mut y = a.positions.clone();
        let eps = 10f64.powf(rng.gen_range(-8.0..-1.0));
        for v in &mut y {
            *v += rng.gen_range(-eps..eps);
        }
        y.sort_by(f64::total_cmp);
        if y.windows(2).any(|p| p[0] >= p[1]) {
            continue;
        }
        let b = ParticleState { positions: y, ..a.clone() };
        let va = velocity_fast(&a, &kc).unwrap().velocities;
        let vb = velocity_fast(&b, &kc).unwrap().velocities;
        let dv: f64 = va.iter().zip(&vb).map(|(p, q)| (p - q).abs()).sum();
        let dx: f64 = a.positions.iter().zip(&b.positions).map(|(p, q)| (p - q).abs()).sum();
        if dx > 0.0 {
            let q = dv / dx / (2.0 * kc.a_const * a.len() as f64);
            worst = worst.max(q);
        }
    }
    assert!(worst < 1.0, "quotient / (2AN) reached {worst}");
}

proptest! {
    #[test]
    fn speed_and_height_bounds(seed in 0u64..10_000, n in 1usize..80, ai in 0usize..3) {
        let kc = constants([0.5, 1.0, 2.0][ai]).unwrap();
        let st = random_state(n, 5.0, seed);
        let ev = velocity_fast(&st, &kc).unwrap();
        let w = st.total_mass();
        prop_assert!(ev.max_speed() <= kc.speed_bound * w.powi(3) * (1.0 + 1e-12));
        for (h, wi) in ev.hbar_at.iter().zip(&st.weights) {
            prop_assert!(*h <= kc.k_inf * w * (1.0 + 1e-12));
            prop_assert!(*h >= kc.k_inf * wi * (1.0 - 1e-12));
        }
        prop_assert!(hbar_min_bound_check(&st, &kc).unwrap() >= -1e-15);
    }

    #[test]
    fn translation_and_reflection(seed in 0u64..10_000, n in 1usize..40, shift in -50.0f64..50.0) {
        let kc = constants(1.0).unwrap();
        let st = random_state(n, 4.0, seed);
        let v = velocity_direct(&st, &kc).unwrap().velocities;
        let moved = ParticleState { positions: st.positions.iter().map(|x| x + shift).collect(), ..st.clone() };
        let vm = velocity_fast(&moved, &kc).unwrap().velocities;
        let scale = velocity_scale(&st, &kc).unwrap();
        for i in 0..v.len() {
            prop_assert!((v[i] - vm[i]).abs() <= 1e-9 * scale[i].max(1e-300) + 1e-18);
        }
        let mirror = ParticleState {
            positions: st.positions.iter().rev().map(|x| -x).collect(),
            weights: st.weights.iter().rev().copied().collect(),
            time: 0.0,
        };
        let vr = velocity_direct(&mirror, &kc).unwrap().velocities;
        for i in 0..v.len() {
            prop_assert!((v[i] + vr[v.len() - 1 - i]).abs() <= 1e-12 * scale[i] + 1e-18);
        }
    }
}
