//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use blaschke_core::compose::{block_compose, block_partition, BlockVariant, CompositionState, TableSequence};
use blaschke_core::stats::{exact_hit_union_with_budget, hit_measure, hit_statistics, preimage_cost, sample_angle};
use blaschke_core::targets::{
    arc_involution, epsilon_bound, ex_nested_blaschke, ex_parabolic, ex_rotations, mobius_for_arc, nested_branches,
    RealSequence, SystemMaps, TargetSequence,
};
use blaschke_core::{Angle, Arc, Blaschke, Complex64, DiskMap, InnerFunction};
use blaschke_lab::{execute_with_threads, ExperimentConfig, Preset};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

// Uniform draws in [0, 1) from the core sampler, one stream per (seed, index).
fn uniform(seed: u64, index: u64) -> f64 {
    sample_angle(seed, index).radians() / TAU
}

fn random_centered(seed: u64) -> Blaschke {
    let u = |i| uniform(seed, i);
    let degree = 1 + (u(0) * 4.0) as usize;
    let mut zeros = vec![Complex64::new(0.0, 0.0)];
    for k in 1..degree as u64 {
        zeros.push(Complex64::from_polar(0.95 * u(2 * k).sqrt(), TAU * u(2 * k + 1)));
    }
    Blaschke::new(Complex64::from_polar(1.0, TAU * u(9)), zeros).unwrap()
}

fn preimage_preserves_length() -> Outcome {
    let mut worst = 0.0f64;
    for m in 0..100u64 {
        let b = random_centered(1_000 + m);
        for j in 0..100u64 {
            let s = 50_000 + 100 * m + j;
            let arc = Arc::centered(Angle::new(TAU * uniform(s, 0)), TAU * uniform(s, 1)).unwrap();
            let pre = b.arc_preimage(&arc).map_err(|e| e.to_string())?;
            worst = worst.max((pre.measure() - arc.length()).abs());
        }
    }
    let line = format!("max |measure(preimage) - |arc|| = {worst:.2e} over 10^4 pairs (need <= 1e-9)");
    if worst <= 1e-9 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn contracting_sequence_hits() -> Outcome {
    let report = execute_with_threads(&ExperimentConfig::defaults(Preset::TheoremC), 8).map_err(|e| e.to_string())?;
    let hit = report.measurement("hit_fraction").ok_or("missing hit_fraction")?;
    let ratio = report.measurement("mean_ratio").ok_or("missing mean_ratio")?;
    let line = format!("N = 10^5, 200 samples: hit fraction {hit}, mean A/phi = {ratio:.4} (need 1 and [0.7, 1.3])");
    if hit == 1.0 && (0.7..=1.3).contains(&ratio) {
        Ok(line)
    } else {
        Err(line)
    }
}

fn rotations_split() -> Outcome {
    let system = ex_rotations(1414).map_err(|e| e.to_string())?;
    let n = 1_000_000;
    let stats = hit_statistics(&system, &system.target, &[Angle::new(1.5 * PI), Angle::new(1.0)], &[n])
        .map_err(|e| e.to_string())?;
    let (lower, upper) = (stats.counts[0][0], stats.counts[1][0]);
    let m = hit_measure(&system, &system.target, (100_000, n), 1_000, 7).map_err(|e| e.to_string())?;
    let line = format!(
        "A(10^6) = {lower} at 3pi/2, {upper} at 1.0; hit fraction {} (need 0, >= 1000, [0.45, 0.55])",
        m.fraction
    );
    if lower == 0 && upper >= 1000 && (0.45..=0.55).contains(&m.fraction) {
        Ok(line)
    } else {
        Err(line)
    }
}

fn nested_targets_are_missed() -> Outcome {
    let f = RealSequence::default_family();
    let eps = epsilon_bound(&f, &f, 1_000, 10_000_000).map_err(|e| e.to_string())?;
    let report = execute_with_threads(&ExperimentConfig::defaults(Preset::ExNested), 8).map_err(|e| e.to_string())?;
    let fraction = report.measurement("hit_fraction").ok_or("missing hit_fraction")?;
    let line = format!(
        "window [10^3, 10^5], 2000 samples: fraction {fraction:.4}, eps/2pi = {:.4} (need <= 0.08)",
        eps.value / TAU
    );
    if fraction <= 0.08 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn branch_bound() -> Outcome {
    let f = RealSequence::default_family();
    let system = ex_nested_blaschke(f.clone(), f.clone(), 20).map_err(|e| e.to_string())?;
    let mut worst = f64::NEG_INFINITY;
    for n in 1..=20 {
        let split = nested_branches(&system, n).map_err(|e| e.to_string())?;
        let bound = 2.0 * f.value(n).unwrap() * system.target.length(n).unwrap();
        worst = worst.max(split.k.measure() - bound);
    }
    let line = format!("max |K_n| - 2 mu_n |I_n| over n = 1..20 is {worst:.3e} (need <= 1e-9)");
    if worst <= 1e-9 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn involution_geometry() -> Outcome {
    let (mut identity, mut endpoints) = (0.0f64, 0.0f64);
    for i in 0..1_000u64 {
        // 1 - u lies in (0, 1], so l covers (0, pi]
        let l = PI * (1.0 - uniform(77, i));
        let a = mobius_for_arc(l).map_err(|e| e.to_string())?;
        let s = (0.5 * l).sin();
        identity = identity.max((s * (1.0 + a * a) - (1.0 - a * a)).abs());
        let m = arc_involution(a);
        let up = m.apply(Angle::new(0.5 * l).point()) - Complex64::new(0.0, -1.0);
        let down = m.apply(Angle::new(-0.5 * l).point()) - Complex64::new(0.0, 1.0);
        endpoints = endpoints.max(up.norm()).max(down.norm());
    }
    let line = format!("identity error {identity:.2e}, endpoint error {endpoints:.2e} (need <= 1e-10)");
    if identity <= 1e-10 && endpoints <= 1e-10 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn parabolic_rates() -> Outcome {
    let n = 1_000_000;
    let state = CompositionState::new()
        .advance(&ex_parabolic(), n)
        .map_err(|e| e.to_string())?;
    let gap = |k: usize| 1.0 - state.orbit()[k].re;
    let ratio = (n as f64).sqrt() * gap(n) / ((n / 10) as f64).sqrt() / gap(n / 10);
    let n_mu = n as f64 * (1.0 - state.lambdas()[n - 1]);
    let line = format!("sqrt-scaled gap ratio {ratio:.5}, N mu_N = {n_mu:.5} (need [0.95, 1.05] and [0.9, 1.1])");
    if (0.95..=1.05).contains(&ratio) && (0.9..=1.1).contains(&n_mu) {
        Ok(line)
    } else {
        Err(line)
    }
}

// Least n with the partial sum in [k, k+1), scanning exact rationals mu = p/q.
fn brute_force_cuts(p: u64, q: u64, count: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut sum = 0;
    for n in 1.. {
        sum += p;
        if sum >= q * (out.len() as u64 + 1) {
            out.push(n);
            if out.len() == count {
                return out;
            }
        }
    }
    unreachable!()
}

fn block_partition_cases() -> Outcome {
    let mut notes = Vec::new();
    for (p, q) in [(1u64, 1u64), (1, 2), (3, 10)] {
        let mu = vec![p as f64 / q as f64; 200];
        let part = block_partition(&mu, None, BlockVariant::MaxLength, 5).map_err(|e| e.to_string())?;
        let expected = brute_force_cuts(p, q, 6);
        if part.starts != expected {
            return Err(format!("mu = {p}/{q}: cuts {:?}, expected {expected:?}", part.starts));
        }
        notes.push(format!("{p}/{q} -> {:?}", &part.starts[..3]));
    }
    let hand = [vec![1, 2, 3], vec![2, 4, 6], vec![4, 7, 10]];
    for ((p, q), h) in [(1u64, 1u64), (1, 2), (3, 10)].iter().zip(&hand) {
        if &brute_force_cuts(*p, *q, 3) != h {
            return Err(format!("brute-force scan disagrees with hand values for {p}/{q}"));
        }
    }

    let horizon = 20_000;
    let mu = RealSequence::PowerLaw {
        scale: 0.5,
        exponent: 0.5,
    };
    let mu_values = mu.values(horizon).unwrap();
    let lengths = RealSequence::PowerLaw {
        scale: 1.0,
        exponent: 0.4,
    }
    .values(horizon)
    .unwrap();
    let part = block_partition(&mu_values, Some(&lengths), BlockVariant::MaxLength, 40).map_err(|e| e.to_string())?;
    let system = SystemMaps::Nested { mu };
    let blocks = block_compose(&system, &part).map_err(|e| e.to_string())?;
    let checked: Vec<_> = blocks.iter().filter(|b| b.mu_sum >= 1.0).collect();
    let worst = checked.iter().map(|b| b.derivative_at_zero).fold(0.0, f64::max);
    let line = format!(
        "cuts {}; {} double blocks with mu-sum >= 1, max |g'(0)| = {worst:.4} (need <= e^-1 + 1e-10)",
        notes.join(", "),
        checked.len()
    );
    if !checked.is_empty() && worst <= (-1.0f64).exp() + 1e-10 {
        Ok(line)
    } else {
        Err(line)
    }
}

// Degree-2 maps, centred and uncentred, against a fixed random arc.
fn small_system(seed: u64) -> (TableSequence, TargetSequence, (usize, usize)) {
    let u = |i| uniform(seed, i);
    let len = 4 + (u(0) * 6.0) as usize;
    let maps = (0..len as u64)
        .map(|k| {
            let a = Complex64::from_polar(0.8 * u(2 * k + 1), TAU * u(2 * k + 2));
            let zeros = if k % 2 == 0 {
                vec![Complex64::new(0.0, 0.0), a]
            } else {
                vec![a, -a * 0.5]
            };
            DiskMap::from(Blaschke::new(Complex64::new(1.0, 0.0), zeros).unwrap())
        })
        .collect();
    let arc = Arc::centered(Angle::new(TAU * u(40)), 0.2 + u(41)).unwrap();
    let start = 1 + (u(42) * (len / 2) as f64) as usize;
    (TableSequence(maps), TargetSequence::Fixed(arc), (start, len))
}

fn monte_carlo_agrees_with_exact() -> Outcome {
    let mut agree = 0;
    let mut details = Vec::new();
    for s in 0..20u64 {
        let (seq, target, window) = small_system(9_000 + s);
        let cost = preimage_cost(&seq, window).map_err(|e| e.to_string())?;
        if cost > 1 << 20 {
            return Err(format!("system {s}: exact cost {cost} over 2^20"));
        }
        let exact = exact_hit_union_with_budget(&seq, &target, window, 1 << 20)
            .map_err(|e| e.to_string())?
            .measure()
            / TAU;
        let est = hit_measure(&seq, &target, window, 100_000, s).map_err(|e| e.to_string())?;
        let z = (est.fraction - exact).abs() / est.sigma_at(exact).max(1e-12);
        if z <= 3.0 {
            agree += 1;
        } else {
            details.push(format!("system {s}: {z:.2} sigma"));
        }
    }
    let mut line = format!("{agree} of 20 systems within 3 sigma (need >= 19)");
    if !details.is_empty() {
        line = format!("{line}; outside: {}", details.join(", "));
    }
    if agree >= 19 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn small_config(preset: Preset) -> ExperimentConfig {
    let overrides: &[(&str, &str)] = match preset {
        Preset::TheoremC => &[("horizon", "5000"), ("checkpoints", "100, 1000"), ("samples", "40")],
        Preset::TheoremDBlocks => &[("horizon", "3000"), ("blocks", "8"), ("samples", "40")],
        Preset::TheoremEDw | Preset::ExRescaled => &[("horizon", "2000"), ("samples", "40"), ("rows", "20")],
        Preset::TheoremFDensity => &[("horizon", "5000"), ("samples", "40")],
        Preset::ExRotations => &[
            ("max_m", "100"),
            ("horizon", "5000"),
            ("window_start", "500"),
            ("samples", "200"),
        ],
        Preset::ExNested => &[
            ("window_start", "50"),
            ("window_end", "3000"),
            ("samples", "200"),
            ("epsilon_partial_to", "100000"),
        ],
        Preset::ExLengths => &[("horizon", "3000"), ("samples", "100")],
        Preset::ExConjugated => &[("horizon", "2000"), ("samples", "40"), ("quiet_from", "50")],
        Preset::ExParabolic => &[("horizon", "10000")],
        Preset::Custom => &[("horizon", "3000"), ("checkpoints", "1000"), ("samples", "40")],
    };
    let mut cfg = ExperimentConfig::defaults(preset);
    for (k, v) in overrides {
        cfg.set(k, *v).unwrap();
    }
    cfg
}

fn thread_count_is_invisible() -> Outcome {
    let mut files = 0;
    for preset in Preset::ALL {
        let cfg = small_config(preset);
        let one = execute_with_threads(&cfg, 1).map_err(|e| format!("{}: {e}", preset.name()))?;
        let eight = execute_with_threads(&cfg, 8).map_err(|e| format!("{}: {e}", preset.name()))?;
        if one.tables.len() != eight.tables.len() || one.tables.is_empty() {
            return Err(format!("{}: table sets differ", preset.name()));
        }
        for (a, b) in one.tables.iter().zip(&eight.tables) {
            if a.to_csv() != b.to_csv() {
                return Err(format!(
                    "{}: {}.csv differs between 1 and 8 threads",
                    preset.name(),
                    a.name
                ));
            }
            files += 1;
        }
    }
    Ok(format!(
        "{files} CSV bodies from all {} presets identical at 1 and 8 threads",
        Preset::ALL.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "preimage measure equals arc length for centred maps",
            preimage_preserves_length,
        ),
        (
            "contracting sequences hit slowly shrinking targets",
            contracting_sequence_hits,
        ),
        ("rotation targets split the circle in half", rotations_split),
        (
            "nested targets are missed outside a small set",
            nested_targets_are_missed,
        ),
        ("far preimage branch is bounded by 2 mu |I|", branch_bound),
        ("involution maps the arc endpoints to -i and i", involution_geometry),
        ("parabolic orbit rates", parabolic_rates),
        (
            "block partition cuts and double-block contraction",
            block_partition_cases,
        ),
        (
            "Monte Carlo agrees with exact preimage unions",
            monte_carlo_agrees_with_exact,
        ),
        ("reports do not depend on the thread count", thread_count_is_invisible),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let outcome = check();
        let secs = clock.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
