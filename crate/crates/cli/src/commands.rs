use std::time::Instant;

use anyhow::{anyhow, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use gtfe::bench::{run_bench, BenchOptions};
use gtfe::dynamics::{velocity_direct, velocity_fast, velocity_scale};
use gtfe::fields::{energy_series, holder_report, mass_integral, sample_fields, write_energy_csv, write_fields_csv, HolderOptions};
use gtfe::integrator::{self, envelope_check};
use gtfe::kernel::{check_greens_identity, check_lemma_identity, constants, lemma_identity_scale};
use gtfe::measure::{build_grid, discretize};
use gtfe::report::{Check, RunMeta, VerificationReport};
use gtfe::verify::{convergence_study, seeded_test_functions, splitting_family, weak_residual, weak_residual_refinement, TimeQuadrature};
use gtfe::{DiscreteMeasure, KernelConstants, ParticleState, Trajectory};

use crate::config::RunConfig;
use crate::output::{write_atomic, write_json};

#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Simulation(anyhow::Error),
    Io(anyhow::Error),
    Checks(usize),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Checks(_) => 1,
            Failure::Config(_) => 2,
            Failure::Simulation(_) | Failure::Io(_) => 3,
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn kc(cfg: &RunConfig) -> std::result::Result<KernelConstants, Failure> {
    constants(cfg.alpha).map_err(|e| Failure::Config(e.into()))
}

fn discrete(cfg: &RunConfig) -> std::result::Result<DiscreteMeasure, Failure> {
    let grid = build_grid(&cfg.initial_measure, cfg.n_grid, cfg.window).map_err(|e| Failure::Config(e.into()))?;
    discretize(&cfg.initial_measure, &grid).map_err(|e| Failure::Config(e.into()))
}

fn main_run(cfg: &RunConfig, kc: &KernelConstants, tol: f64) -> std::result::Result<Trajectory, Failure> {
    let mu = discrete(cfg)?;
    integrator::simulate(&mu, cfg.t_final, tol, kc, &cfg.sample_times()).map_err(|e| Failure::Simulation(e.into()))
}

fn io<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Io)
}

/// Uniform grid covering every sampled position, padded on both sides.
fn field_grid(traj: &Trajectory, cfg: &RunConfig) -> Vec<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &traj.states {
        lo = lo.min(s.positions[0]);
        hi = hi.max(*s.positions.last().unwrap());
    }
    let pad = cfg.fields.pad_alpha * cfg.alpha;
    let (lo, hi) = (lo - pad, hi + pad);
    let m = cfg.fields.points - 1;
    (0..=m).map(|k| lo + (hi - lo) * k as f64 / m as f64).collect()
}

pub fn simulate(cfg: &RunConfig) -> Outcome {
    let kc = kc(cfg)?;
    let traj = main_run(cfg, &kc, cfg.tol)?;
    let dir = &cfg.output_dir;
    io(write_atomic(&dir.join("trajectory.csv"), |w| traj.write_csv(w)))?;
    io(write_atomic(&dir.join("steps.csv"), |w| traj.write_step_log_csv(w)))?;
    let grid = field_grid(&traj, cfg);
    let samples = traj
        .states
        .iter()
        .map(|s| sample_fields(s, &grid, &kc))
        .collect::<gtfe::Result<Vec<_>>>()
        .map_err(|e| Failure::Simulation(e.into()))?;
    io(write_atomic(&dir.join("fields.csv"), |w| write_fields_csv(&samples, w)))?;
    let energy = energy_series(&traj).map_err(|e| Failure::Simulation(e.into()))?;
    io(write_atomic(&dir.join("energy.csv"), |w| write_energy_csv(&energy, w)))?;

    let massive = traj.weights().iter().filter(|w| **w > 0.0).count();
    println!("particles     {} ({} with positive weight)", traj.num_particles(), massive);
    println!("steps         {} accepted, {} rejected", traj.accepted_steps(), traj.rejected_steps());
    println!("min gap       {:.6e}", traj.min_gap_over_steps());
    println!("final energy  {:.12e}", energy.last().map_or(f64::NAN, |e| e.1));
    println!("output        {}", dir.display());
    Ok(())
}

fn random_state(rng: &mut ChaCha8Rng, max_n: usize) -> ParticleState {
    let n = (2f64.powf(rng.gen_range(0.0..(max_n as f64).log2())).round() as usize).clamp(1, max_n);
    let span = rng.gen_range(0.1..3.0) * n as f64;
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-span..span)).collect();
    x.sort_by(f64::total_cmp);
    x.dedup();
    let mut w: Vec<f64> = x.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total.max(1.0));
    ParticleState { time: 0.0, positions: x, weights: w }
}

fn oracle_deviation(st: &ParticleState, kc: &KernelConstants, corrupt: bool) -> gtfe::Result<f64> {
    let mut f = velocity_fast(st, kc)?.velocities;
    if corrupt {
        for v in &mut f {
            *v *= 1.0 + 1e-9;
        }
    }
    let d = velocity_direct(st, kc)?.velocities;
    let scale = velocity_scale(st, kc)?;
    Ok((0..f.len())
        .map(|i| {
            let dv = (f[i] - d[i]).abs();
            if scale[i] > 0.0 {
                dv / scale[i]
            } else if dv == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max))
}

fn run_checks(cfg: &RunConfig, kc: &KernelConstants, traj: &Trajectory) -> gtfe::Result<Vec<Check>> {
    let v = &cfg.verify;
    let seed = cfg.seed;
    let mut checks = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..v.identity_points {
        let mut x = 0.0;
        while x == 0.0 {
            x = rng.gen_range(-20.0..20.0) * cfg.alpha;
        }
        worst = worst
            .max(check_greens_identity(x, cfg.alpha)?.abs() / kc.k_inf)
            .max(check_lemma_identity(x, cfg.alpha)?.abs() / lemma_identity_scale(cfg.alpha));
    }
    checks.push(Check::at_most("kernel_identities", worst, 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for _ in 0..v.oracle_states {
        let st = random_state(&mut rng, v.oracle_max_n.max(1));
        worst = worst.max(oracle_deviation(&st, kc, v.corrupt_fast_sum)?);
    }
    for st in &traj.states {
        worst = worst.max(oracle_deviation(st, kc, v.corrupt_fast_sum)?);
    }
    checks.push(Check::at_most("fast_direct_oracle", worst, 1e-12));

    let env = envelope_check(traj, v.envelope_pairs, seed);
    checks.push(Check::at_least("gap_envelopes", env.slack_margin, 0.0));

    checks.push(Check::at_most("speed_bound", traj.max_step_speed(), kc.speed_bound * (1.0 + 1e-6)));

    let w0 = traj.initial.total_mass();
    let mut sum_dev = 0.0f64;
    let mut int_dev = 0.0f64;
    for s in &traj.states {
        sum_dev = sum_dev.max((s.total_mass() - w0).abs());
        int_dev = int_dev.max((mass_integral(s, kc)? - w0).abs());
    }
    checks.push(Check::at_most("mass_sum", sum_dev, 4.0 * f64::EPSILON * w0.max(1.0)));
    checks.push(Check::at_most("mass_integral", int_dev, 1e-6));

    // weak form on the symmetric pair at ±1/10
    let pair = DiscreteMeasure::new(vec![-0.1, 0.1], vec![0.5, 0.5])?;
    let tf = v.weak_pair_t_final;
    let phis = seeded_test_functions(seed.wrapping_add(2), v.test_functions, (-0.2, 0.2), tf);
    let fine = integrator::simulate(&pair, tf, 1e-10, kc, &[])?;
    let mut worst = 0.0f64;
    for p in &phis {
        worst = worst.max(weak_residual(&fine, p, TimeQuadrature::default())?.total.abs());
    }
    checks.push(Check::at_most("weak_residual", worst, 1e-8));
    let study = weak_residual_refinement(&pair, tf, kc, &phis, 1e-6, v.refinement_levels)?;
    checks.push(Check::at_least("weak_residual_refinement", study.min_ratio, 4.0));

    let opts = HolderOptions { pairs: v.holder_pairs, seed: seed.wrapping_add(3), ..HolderOptions::default() };
    let coarse = holder_report(traj, &opts)?;
    checks.push(Check::flag("holder_half_finite", coarse.half_quotient.is_finite() && coarse.sup_h3.is_finite()));
    let refined = integrator::simulate(&traj.initial, traj.t_final, (traj.tol / 4.0).max(1e-12), kc, &cfg.sample_times())?;
    let fine = holder_report(&refined, &opts)?;
    checks.push(Check::at_most("holder_sup_h3_stability", (coarse.sup_h3 - fine.sup_h3).abs() / fine.sup_h3, 0.01));

    if !v.splitting_ns.is_empty() {
        let fam = splitting_family(&v.splitting_ns, v.splitting_t_final, kc, v.splitting_tol, 20)?;
        let anti = fam.runs.iter().map(|r| r.max_antisymmetry).fold(0.0, f64::max);
        let margin = fam.runs.iter().map(|r| r.min_margin).fold(f64::INFINITY, f64::min);
        checks.push(Check::at_most("splitting_antisymmetry", anti, 1e-12));
        checks.push(Check::at_least("splitting_separation", margin, 0.0));
        checks.push(Check::flag("splitting_cauchy", fam.cauchy.iter().all(|r| r.non_increasing)));
    }

    if v.convergence {
        let rep = convergence_study(&cfg.initial_measure, cfg.window, &cfg.converge.n_list, &cfg.converge.times, kc, cfg.tol)?;
        checks.push(Check::flag("convergence_cauchy", rep.cauchy_pass()));
        let excess = rep.time_lipschitz.iter().map(|l| l.worst_excess).fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most("convergence_time_lipschitz", excess, 0.0));
    }
    Ok(checks)
}

pub fn verify(cfg: &RunConfig) -> Outcome {
    let kc = kc(cfg)?;
    let traj = main_run(cfg, &kc, cfg.tol)?;
    let meta = RunMeta { alpha: cfg.alpha, n: traj.num_particles(), tol: cfg.tol, seeds: vec![cfg.seed] };
    let mut report = VerificationReport::new(meta);
    report.extend(run_checks(cfg, &kc, &traj).map_err(|e| Failure::Simulation(e.into()))?);
    for c in &report.checks {
        println!(
            "{:<28} {}  value {:>12.4e}  bound {:>12.4e}",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.value,
            c.bound
        );
    }
    io(write_json(&cfg.output_dir.join("report.json"), &report))?;
    match report.failures().count() {
        0 => Ok(()),
        n => Err(Failure::Checks(n)),
    }
}

#[derive(Serialize)]
struct ConvergeSummary<'a> {
    ns: &'a [u32],
    particles: &'a [usize],
    cauchy_pass: bool,
    lipschitz_pass: bool,
    lipschitz_constant: f64,
    binding: &'a str,
    time_lipschitz: &'a [gtfe::verify::TimeLipschitz],
}

pub fn converge(cfg: &RunConfig) -> Outcome {
    let kc = kc(cfg)?;
    let c = &cfg.converge;
    let rep = convergence_study(&cfg.initial_measure, cfg.window, &c.n_list, &c.times, &kc, cfg.tol)
        .map_err(|e| match e {
            gtfe::Error::Parameter(_) => Failure::Config(e.into()),
            _ => Failure::Simulation(e.into()),
        })?;
    io(write_atomic(&cfg.output_dir.join("convergence.csv"), |w| {
        writeln!(w, "t,n,n_next,distance")?;
        for row in &rep.cauchy {
            for (k, d) in row.distances.iter().enumerate() {
                writeln!(w, "{:.16e},{},{},{:.16e}", row.t, rep.ns[k], rep.ns[k + 1], d)?;
            }
        }
        Ok(())
    }))?;
    let summary = ConvergeSummary {
        ns: &rep.ns,
        particles: &rep.particles,
        cauchy_pass: rep.cauchy_pass(),
        lipschitz_pass: rep.lipschitz_pass(),
        lipschitz_constant: rep.lipschitz_constant,
        binding: rep.binding,
        time_lipschitz: &rep.time_lipschitz,
    };
    io(write_json(&cfg.output_dir.join("convergence.json"), &summary))?;
    for row in &rep.cauchy {
        let ds: Vec<String> = row.distances.iter().map(|d| format!("{d:.4e}")).collect();
        println!("t = {:<8} {}  {}", row.t, ds.join(" "), if row.non_increasing { "non-increasing" } else { "NOT monotone" });
    }
    println!("time-Lipschitz constant {:.4e} ({})", rep.lipschitz_constant, rep.binding);
    let failed = usize::from(!rep.cauchy_pass()) + usize::from(!rep.lipschitz_pass());
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

pub fn bench(cfg: &RunConfig) -> Outcome {
    let kc = kc(cfg)?;
    let b = &cfg.bench;
    let opts = BenchOptions {
        fast_sizes: b.fast_sizes.clone(),
        direct_sizes: b.direct_sizes.clone(),
        repeats: b.repeats,
        seed: cfg.seed,
    };
    let start = Instant::now();
    let rep = run_bench(&kc, &opts).map_err(|e| Failure::Config(anyhow!(e)))?;
    println!("{:>8} {:>10} {:>14}", "path", "N", "seconds");
    for (name, rows) in [("fast", &rep.fast), ("direct", &rep.direct)] {
        for t in rows.iter() {
            println!("{name:>8} {:>10} {:>14.6e}", t.n, t.seconds);
        }
    }
    println!("fast slope {:.3} (<= 1.2), direct slope {:.3} (>= 1.8), max |fast - direct| {:.2e}", rep.fast_slope, rep.direct_slope, rep.max_abs_diff);
    println!("total {:.2?}", start.elapsed());
    io(write_atomic(&cfg.output_dir.join("bench.csv"), |w| {
        writeln!(w, "path,n,seconds")?;
        for (name, rows) in [("fast", &rep.fast), ("direct", &rep.direct)] {
            for t in rows.iter() {
                writeln!(w, "{name},{},{:.9e}", t.n, t.seconds)?;
            }
        }
        Ok(())
    }))?;
    let failed = usize::from(rep.fast_slope > 1.2) + usize::from(rep.direct_slope < 1.8) + usize::from(rep.max_abs_diff > 1e-12);
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}
