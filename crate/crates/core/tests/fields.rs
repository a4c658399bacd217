use gtfe::fields::*;
use gtfe::integrator::simulate;
use gtfe::kernel::constants;
use gtfe::measure::{build_grid, discretize};
use gtfe::{InitialMeasure, ParticleState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn random_state(n: usize, seed: u64) -> ParticleState {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    x.sort_by(f64::total_cmp);
    x.dedup();
    let mut w: Vec<f64> = x.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    ParticleState { time: 0.0, positions: x, weights: w }
}

fn grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    (0..=m).map(|k| lo + (hi - lo) * k as f64 / m as f64).collect()
}

#[test]
fn derivatives_are_consistent_with_finite_differences() {
    let kc = constants(0.7).unwrap();
    let st = random_state(12, 4);
    let h = 1e-5;
    let g: Vec<f64> = grid(-5.0, 5.0, 397).into_iter().filter(|x| st.positions.iter().all(|p| (p - x).abs() > 1e-3)).collect();
    let plus: Vec<f64> = g.iter().map(|x| x + h).collect();
    let minus: Vec<f64> = g.iter().map(|x| x - h).collect();
    let f = sample_fields(&st, &g, &kc).unwrap();
    let fp = sample_fields(&st, &plus, &kc).unwrap();
    let fm = sample_fields(&st, &minus, &kc).unwrap();
    for i in 0..g.len() {
        let fd = |a: &[f64], b: &[f64]| (a[i] - b[i]) / (2.0 * h);
        assert!((fd(&fp.hbar, &fm.hbar) - f.hbar_x[i]).abs() < 1e-8);
        assert!((fd(&fp.hbar_x, &fm.hbar_x) - f.hbar_xx[i]).abs() < 1e-8);
        assert!((fd(&fp.hbar_xx, &fm.hbar_xx) - f.hbar_xxx[i]).abs() < 1e-7);
    }
}

#[test]
fn sweep_agrees_with_direct_sum_including_particle_points() {
    let kc = constants(1.0).unwrap();
    for seed in 0..5 {
        let st = random_state(40, seed);
        let mut g = grid(-6.0, 6.0, 300);
        g.extend(st.positions.iter().copied());
        g.sort_by(f64::total_cmp);
        let a = sample_fields(&st, &g, &kc).unwrap();
        let b = sample_fields_direct(&st, &g, &kc).unwrap();
        assert_eq!(a.at_particle, b.at_particle);
        for i in 0..g.len() {
            assert!((a.hbar[i] - b.hbar[i]).abs() < 1e-14);
            assert!((a.hbar_x[i] - b.hbar_x[i]).abs() < 1e-14);
            assert!((a.hbar_xx[i] - b.hbar_xx[i]).abs() < 1e-14);
            assert!((a.hbar_xxx[i] - b.hbar_xxx[i]).abs() < 1e-13);
        }
    }
    assert!(sample_fields(&random_state(3, 0), &[1.0, 0.0], &kc).is_err());
}

#[test]
fn energy_matches_double_sum_and_decreases() {
    let kc = constants(1.0).unwrap();
    let st = random_state(9, 77);
    let k2 = |x: f64| (x.abs() - 1.0) * (-x.abs()).exp() / 4.0;
    let mut e = 0.0;
    for i in 0..st.len() {
        for j in 0..st.len() {
            e -= 0.5 * st.weights[i] * st.weights[j] * k2(st.positions[i] - st.positions[j]);
        }
    }
    assert!((surface_energy(&st, &kc).unwrap() - e).abs() < 1e-15);

    let mu = InitialMeasure::droplet(1.0).unwrap();
    let m = discretize(&mu, &build_grid(&mu, 4, (-1.0, 1.0)).unwrap()).unwrap();
    let times: Vec<f64> = (0..=30).map(|k| k as f64).collect();
    let traj = simulate(&m, 30.0, 1e-10, &kc, &times).unwrap();
    let series = energy_series(&traj).unwrap();
    assert!(series.windows(2).all(|p| p[1].1 <= p[0].1 + 1e-12), "{series:?}");
    assert!(series.last().unwrap().1 < series[0].1);
}

#[test]
fn holder_report_on_a_short_run() {
    let kc = constants(1.0).unwrap();
    let mu = InitialMeasure::droplet(1.0).unwrap();
    let m = discretize(&mu, &build_grid(&mu, 3, (-1.0, 1.0)).unwrap()).unwrap();
    let traj = simulate(&m, 10.0, 1e-9, &kc, &[5.0, 10.0]).unwrap();
    let rep = holder_report(&traj, &HolderOptions { pairs: 20, ..HolderOptions::default() }).unwrap();
    assert!(rep.half_quotient.is_finite() && rep.half_quotient > 0.0);
    assert!(rep.sup_h3 > 0.0);
    // quotients for small exponents are dominated by the largest |s − t| ≤ 10
    let q = |p: f64| rep.quotients.iter().find(|e| e.0 == p).unwrap().1;
    assert!(q(0.25) <= q(1.0) * 10f64.powf(0.75) + 1e-15);
    let short = simulate(&m, 10.0, 1e-9, &kc, &[10.0]).unwrap();
    assert!(holder_report(&short, &HolderOptions::default()).is_err());
}

#[test]
fn h3_norm_diff_requires_breakpoints() {
    let kc = constants(1.0).unwrap();
    let a = random_state(5, 1);
    let b = ParticleState { positions: a.positions.iter().map(|x| x + 0.1).collect(), ..a.clone() };
    assert!(h3_norm_diff(&a, &b, &quad_breakpoints(&[&a], &kc), &kc).is_err());
    let bp = quad_breakpoints(&[&a, &b], &kc);
    let d = h3_norm_diff(&a, &b, &bp, &kc).unwrap();
    assert!(d > 0.0);
    assert!(d <= h3_norm(&a, &kc).unwrap() + h3_norm(&b, &kc).unwrap());
}

#[test]
fn csv_headers() {
    let kc = constants(1.0).unwrap();
    let f = sample_fields(&random_state(3, 2), &[0.0, 1.0], &kc).unwrap();
    let mut buf = Vec::new();
    write_fields_csv(&[f], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,x,hbar,hbar_x,hbar_xx,hbar_xxx,at_particle_flag\n"));
    assert_eq!(text.lines().count(), 3);
    let mut buf = Vec::new();
    write_energy_csv(&[(0.0, 0.1)], &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("t,E\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn height_bounds_and_mass(seed in 0u64..10_000, n in 1usize..30) {
        let kc = constants(1.0).unwrap();
        let st = random_state(n, seed);
        let g = grid(-8.0, 8.0, 200);
        let f = sample_fields(&st, &g, &kc).unwrap();
        for h in &f.hbar {
            prop_assert!(*h > 0.0 && *h <= kc.k_inf * (1.0 + 1e-12));
        }
        prop_assert!((mass_integral(&st, &kc).unwrap() - st.total_mass()).abs() < 1e-10);
    }
}

#[test]
fn holder_quotient_settles_under_tolerance_refinement() {
    let kc = constants(1.0).unwrap();
    let mu = InitialMeasure::droplet(1.0).unwrap();
    let m = discretize(&mu, &build_grid(&mu, 6, (-1.0, 1.0)).unwrap()).unwrap();
    let t_final = 10.0 / kc.a_const;
    let times: Vec<f64> = (1..=50).map(|j| t_final * j as f64 / 50.0).collect();
    let q: Vec<f64> = [1e-6, 1e-7, 1e-8, 1e-9, 1e-10]
        .iter()
        .map(|&tol| {
            let traj = simulate(&m, t_final, tol, &kc, &times).unwrap();
            holder_report(&traj, &HolderOptions::default()).unwrap().half_quotient
        })
        .collect();
    assert!(q.iter().all(|v| v.is_finite() && *v > 0.0));
    let steps: Vec<f64> = q.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    assert!(steps.windows(2).all(|d| d[1] < d[0]), "{q:?}");
    assert!(steps[0] / q[0] < 1e-5, "{q:?}");
}
