//! Executes a validated configuration and collects its report.

use std::f64::consts::{PI, TAU};

use blaschke_core::compose::{
    block_compose, block_partition, contraction_report, Autonomous, BlockVariant, CompositionState, MapSequence,
};
use blaschke_core::stats::{
    density_profiles, dw_profiles, hit_measure, hit_statistics, sample_angles, HitStatistics, MeasureEstimate,
};
use blaschke_core::targets::{
    conjugated_interior_orbit, epsilon_bound, ex_conjugated, ex_lengths_from_mu, ex_nested_blaschke, ex_parabolic,
    ex_rescaled, ex_rotations, nested_branches, nested_target, ExampleSystem, RealSequence, SystemMaps, TargetSequence,
};
use blaschke_core::{Angle, DiskMap, Error as CoreError, InnerFunction, Modulus};

use crate::config::{ConfigError, ExperimentConfig, MapSpec};
use crate::presets::Preset;
use crate::report::{Cell, Check, Report, Table};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, RunError>;

/// Runs the preset named in the config on the current rayon pool.
pub fn execute(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::default();
    match cfg.preset {
        Preset::TheoremC => theorem_c(cfg, &mut report)?,
        Preset::TheoremDBlocks => theorem_d(cfg, &mut report)?,
        Preset::TheoremEDw => theorem_e(cfg, &mut report)?,
        Preset::TheoremFDensity => theorem_f(cfg, &mut report)?,
        Preset::ExRotations => rotations(cfg, &mut report)?,
        Preset::ExNested => nested(cfg, &mut report)?,
        Preset::ExLengths => lengths(cfg, &mut report)?,
        Preset::ExConjugated => conjugated(cfg, &mut report)?,
        Preset::ExRescaled => rescaled(cfg, &mut report)?,
        Preset::ExParabolic => parabolic(cfg, &mut report)?,
        Preset::Custom => custom(cfg, &mut report)?,
    }
    Ok(report)
}

/// Runs on a dedicated pool of `threads` workers; results do not depend on it.
pub fn execute_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    pool.install(|| execute(cfg))
}

fn at_least_one(cfg: &ExperimentConfig, key: &str) -> Result<usize> {
    let v = cfg.count(key)?;
    if v == 0 {
        return Err(cfg.invalid(key, "must be at least 1").into());
    }
    Ok(v)
}

// Constructor failures caused by parameter choices are configuration errors.
fn blame<'a>(cfg: &'a ExperimentConfig, key: &str) -> impl Fn(CoreError) -> RunError + 'a {
    let key = key.to_owned();
    move |e| match e {
        CoreError::InvalidParameter(_) | CoreError::Hypothesis(_) | CoreError::HorizonExceeded { .. } => {
            cfg.invalid(&key, e.to_string()).into()
        }
        other => other.into(),
    }
}

fn autonomous_map(cfg: &ExperimentConfig) -> Result<DiskMap> {
    cfg.map_spec("map")?
        .autonomous()
        .ok_or_else(|| cfg.invalid("map", "this preset needs an autonomous map").into())
}

fn centred_target(cfg: &ExperimentConfig) -> Result<TargetSequence> {
    let center = Angle::new(cfg.real("target_center")?);
    nested_target(center, cfg.sequence("lengths")?).map_err(blame(cfg, "lengths"))
}

fn checkpoints(cfg: &ExperimentConfig, horizon: usize) -> Result<Vec<usize>> {
    let mut cps = cfg.counts("checkpoints")?;
    if cps.first() == Some(&0) || cps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(cfg
            .invalid("checkpoints", "must be positive and strictly increasing")
            .into());
    }
    if cps.last().is_some_and(|&c| c > horizon) {
        return Err(cfg.invalid("checkpoints", format!("exceeds horizon {horizon}")).into());
    }
    if cps.last() != Some(&horizon) {
        cps.push(horizon);
    }
    Ok(cps)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn hits_table(stats: &HitStatistics) -> Table {
    let mut t = Table::new(
        "hits",
        "hit counts A(N) = #{n <= N : F_n(zeta) in I_n} against phi(N)",
        &[
            ("sample", "sample index"),
            ("theta0", "starting angle (radians)"),
            ("N", "checkpoint"),
            ("A", "hit count up to N"),
            ("phi", "sum of |I_n| / 2pi up to N"),
            ("ratio", "A / phi"),
        ],
    );
    for (s, (theta, counts)) in stats.sample_points.iter().zip(&stats.counts).enumerate() {
        for ((&n, &a), &phi) in stats.checkpoints.iter().zip(counts).zip(&stats.phi) {
            t.push(vec![
                s.into(),
                theta.radians().into(),
                n.into(),
                a.into(),
                phi.into(),
                (a as f64 / phi).into(),
            ]);
        }
    }
    t
}

fn measure_table(window: (usize, usize), m: &MeasureEstimate) -> Table {
    let mut t = Table::new(
        "measure",
        "Monte Carlo fraction of starting points that meet I_n for some n in the window",
        &[
            ("N0", "first step of the window"),
            ("N1", "last step of the window"),
            ("samples", "uniform starting points"),
            ("seed", "generator seed"),
            ("hits", "samples that met the target"),
            ("fraction", "hits / samples"),
            ("ci_low", "95% Wilson lower bound"),
            ("ci_high", "95% Wilson upper bound"),
        ],
    );
    t.push(vec![
        window.0.into(),
        window.1.into(),
        m.samples.into(),
        Cell::Text(m.seed.to_string()),
        m.hits.into(),
        m.fraction.into(),
        m.ci_low.into(),
        m.ci_high.into(),
    ]);
    t
}

fn final_hit_summary(stats: &HitStatistics) -> (f64, f64) {
    let last = stats.checkpoints.len() - 1;
    let n = stats.counts.len() as f64;
    let hit = stats.counts.iter().filter(|c| c[last] >= 1).count() as f64 / n;
    let mean_ratio = stats.final_ratios().iter().sum::<f64>() / n;
    (hit, mean_ratio)
}

fn theorem_c(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let f = autonomous_map(cfg)?;
    if !f.is_centered() {
        return Err(cfg.invalid("map", "the map must fix 0").into());
    }
    let origin = blaschke_core::Complex64::new(0.0, 0.0);
    let lambda = f.derivative(origin)?.modulus();
    if lambda >= 1.0 {
        return Err(cfg.invalid("map", "need |f'(0)| < 1").into());
    }
    let horizon = at_least_one(cfg, "horizon")?;
    let target = centred_target(cfg)?;
    let cps = checkpoints(cfg, horizon)?;
    let thetas = sample_angles(cfg.seed()?, at_least_one(cfg, "samples")?);
    let stats = hit_statistics(&Autonomous(f), &target, &thetas, &cps)?;
    let (hit, mean_ratio) = final_hit_summary(&stats);
    report.tables.push(hits_table(&stats));
    report.measure("lambda", lambda);
    report.measure("phi_N", *stats.phi.last().expect("checkpoints"));
    report.measure("hit_fraction", hit);
    report.measure("mean_ratio", mean_ratio);
    report.check(Check::at_least(
        "hit_fraction",
        hit,
        cfg.real("assert_min_hit_fraction")?,
    ));
    report.check(Check::within(
        "mean_ratio",
        mean_ratio,
        cfg.real("assert_ratio_low")?,
        cfg.real("assert_ratio_high")?,
    ));
    Ok(())
}

fn theorem_d(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let horizon = at_least_one(cfg, "horizon")?;
    let mu = cfg.sequence("mu")?;
    let mu_values = mu.values(horizon)?;
    if mu_values.iter().any(|m| !(*m > 0.0 && *m <= 1.0)) {
        return Err(cfg.invalid("mu", "mu_n must lie in (0, 1]").into());
    }
    let target = centred_target(cfg)?;
    let lengths: Vec<f64> = (1..=horizon)
        .map(|n| target.length(n))
        .collect::<std::result::Result<_, _>>()?;
    let system = SystemMaps::Nested { mu };
    let partition = block_partition(
        &mu_values,
        Some(&lengths),
        BlockVariant::MaxLength,
        at_least_one(cfg, "blocks")?,
    )
    .map_err(blame(cfg, "horizon"))?;

    let mut blocks = Table::new(
        "blocks",
        "blocks [n_k, n_{k+1}) cut where the partial sums of mu cross integers",
        &[
            ("k", "block index"),
            ("n_start", "n_k"),
            ("n_end", "n_{k+1} (exclusive)"),
            ("m", "index of the longest target in the block"),
            ("length_m", "|I_m|"),
            ("mu_sum", "sum of mu_n over the block"),
        ],
    );
    for (k, &m) in partition.chosen.iter().enumerate() {
        let (a, b) = (partition.starts[k], partition.starts[k + 1]);
        let mu_sum: f64 = mu_values[a - 1..b - 1].iter().sum();
        blocks.push(vec![
            (k + 1).into(),
            a.into(),
            b.into(),
            m.into(),
            lengths[m - 1].into(),
            mu_sum.into(),
        ]);
    }
    report.tables.push(blocks);

    let composed = block_compose(&system, &partition)?;
    let mut doubles = Table::new(
        "double_blocks",
        "composed double blocks g_k over (m_{2k-2}, m_{2k}]",
        &[
            ("start", "first map index"),
            ("end", "last map index"),
            ("mu_sum", "sum of mu over the block"),
            ("lambda_product", "product of |f_n'(0)|"),
            ("derivative_at_zero", "|g_k'(0)| along the composed map"),
        ],
    );
    let mut worst = 0.0f64;
    for b in &composed {
        if b.mu_sum >= 1.0 {
            worst = worst.max(b.derivative_at_zero);
        }
        doubles.push(vec![
            b.start.into(),
            b.end.into(),
            b.mu_sum.into(),
            b.lambda_product.into(),
            b.derivative_at_zero.into(),
        ]);
    }
    report.tables.push(doubles);
    report.check(Check::at_most("block_derivative", worst, (-1.0f64).exp() + 1e-10));

    let weighted: f64 = mu_values.iter().zip(&lengths).map(|(m, l)| m * l).sum();
    report.measure("sum_mu_length", weighted);
    let thetas = sample_angles(cfg.seed()?, at_least_one(cfg, "samples")?);
    let stats = hit_statistics(&system, &target, &thetas, &[horizon])?;
    let (hit, mean_ratio) = final_hit_summary(&stats);
    report.tables.push(hits_table(&stats));
    report.measure("hit_fraction", hit);
    report.measure("mean_ratio", mean_ratio);
    report.check(Check::at_least(
        "hit_fraction",
        hit,
        cfg.real("assert_min_hit_fraction")?,
    ));
    Ok(())
}

// Distances |F_n(zeta) - F_n(0)| summarized across samples.
fn dw_experiment<S: MapSequence>(system: &S, cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let horizon = at_least_one(cfg, "horizon")?;
    let compare = at_least_one(cfg, "compare_at")?;
    if compare > horizon {
        return Err(cfg.invalid("compare_at", "must not exceed horizon").into());
    }
    let rows = at_least_one(cfg, "rows")?.min(horizon);
    let thetas = sample_angles(cfg.seed()?, at_least_one(cfg, "samples")?);
    let d = dw_profiles(system, &thetas, horizon)?;
    let state = CompositionState::new().advance(system, horizon)?;
    let mut at: Vec<usize> = (1..=rows).map(|k| k * horizon / rows).filter(|&n| n >= 1).collect();
    at.push(compare);
    at.sort_unstable();
    at.dedup();
    let mut t = Table::new(
        "dw",
        "distance d_n = |F_n(zeta) - F_n(0)| across samples",
        &[
            ("n", "step"),
            ("one_minus_abs", "1 - |F_n(0)|"),
            ("median_d", "median of d_n"),
            ("q10_d", "10% quantile of d_n"),
            ("q90_d", "90% quantile of d_n"),
        ],
    );
    let column = |n: usize| sorted(d.iter().map(|v| v[n - 1]).collect());
    for &n in &at {
        let c = column(n);
        t.push(vec![
            n.into(),
            state.one_minus_abs()[n].into(),
            quantile(&c, 0.5).into(),
            quantile(&c, 0.1).into(),
            quantile(&c, 0.9).into(),
        ]);
    }
    report.tables.push(t);
    let early = quantile(&column(compare), 0.5);
    let late = quantile(&column(horizon), 0.5);
    let ratio = if early > 0.0 {
        late / early
    } else if late == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let sum_gap: f64 = state.one_minus_abs()[1..].iter().sum();
    report.measure("sum_one_minus_abs", sum_gap);
    report.measure("median_d_compare", early);
    report.measure("median_d_final", late);
    report.measure("median_ratio", ratio);
    report.check(Check::at_most(
        "median_ratio",
        ratio,
        cfg.real("assert_max_median_ratio")?,
    ));
    Ok(())
}

fn theorem_e(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let horizon = at_least_one(cfg, "horizon")?;
    let system =
        ex_conjugated(cfg.sequence("mu")?, cfg.sequence("lengths")?, horizon).map_err(blame(cfg, "lengths"))?;
    dw_experiment(&system, cfg, report)
}

fn rescaled(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let horizon = at_least_one(cfg, "horizon")?;
    let system = ex_rescaled(cfg.sequence("mu")?, cfg.sequence("lengths")?, horizon).map_err(blame(cfg, "lengths"))?;
    report.notes.extend(system.notes.iter().cloned());
    dw_experiment(&system, cfg, report)
}

fn theorem_f(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let f = autonomous_map(cfg)?;
    let horizon = at_least_one(cfg, "horizon")?;
    let cells = at_least_one(cfg, "cells")?;
    let thetas = sample_angles(cfg.seed()?, at_least_one(cfg, "samples")?);
    let seq = Autonomous(f);
    let profiles = density_profiles(&seq, &thetas, horizon, cells)?;
    let mut t = Table::new(
        "density",
        "visits of theta_1..theta_N to equal cells",
        &[
            ("sample", "sample index"),
            ("theta0", "starting angle (radians)"),
            ("min_visits", "fewest visits to any cell"),
            ("cells_visited", "cells with at least one visit"),
        ],
    );
    for (s, (theta, p)) in thetas.iter().zip(&profiles).enumerate() {
        t.push(vec![
            s.into(),
            theta.radians().into(),
            p.min_visits.into(),
            p.cells_visited().into(),
        ]);
    }
    report.tables.push(t);
    let dense = profiles.iter().filter(|p| p.min_visits >= 1).count() as f64 / profiles.len() as f64;
    let state = CompositionState::new().advance(&seq, horizon)?;
    let weighted: f64 = state
        .lambdas()
        .iter()
        .zip(&state.one_minus_abs()[1..])
        .map(|(l, g)| (1.0 - l) * g)
        .sum();
    report.measure("sum_mu_one_minus_abs", weighted);
    report.measure("dense_fraction", dense);
    report.check(Check::at_least(
        "dense_fraction",
        dense,
        cfg.real("assert_min_dense_fraction")?,
    ));
    Ok(())
}

fn rotations(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let max_m = at_least_one(cfg, "max_m")?;
    let system = ex_rotations(max_m)?;
    let horizon = at_least_one(cfg, "horizon")?;
    if horizon > max_m * (max_m + 1) / 2 {
        return Err(cfg
            .invalid(
                "horizon",
                format!("exceeds max_m (max_m + 1) / 2 = {}", max_m * (max_m + 1) / 2),
            )
            .into());
    }
    let grid = cfg.count("theta_grid")?;
    let mut thetas: Vec<Angle> = (0..grid)
        .map(|j| Angle::new(TAU * (j as f64 + 0.5) / grid as f64))
        .collect();
    thetas.extend(cfg.reals("spot_thetas")?.into_iter().map(Angle::new));
    let mut upper_min = f64::INFINITY;
    let mut lower_max = 0.0f64;
    if !thetas.is_empty() {
        let stats = hit_statistics(&system, &system.target, &thetas, &[horizon])?;
        let mut t = Table::new(
            "grid",
            "hit counts of rotation orbits started on a grid",
            &[
                ("theta0", "starting angle (radians)"),
                ("half", "upper: 0 <= theta <= pi, lower: pi < theta < 2pi"),
                ("A", "hits up to N"),
                ("first_hit", "first n with F_n(zeta) in I_n, empty if none"),
            ],
        );
        for ((theta, counts), first) in thetas.iter().zip(&stats.counts).zip(&stats.first_hit) {
            let upper = theta.radians() <= PI;
            let a = counts[0];
            if upper {
                upper_min = upper_min.min(a as f64);
            } else {
                lower_max = lower_max.max(a as f64);
            }
            t.push(vec![
                theta.radians().into(),
                if upper { "upper" } else { "lower" }.into(),
                a.into(),
                Cell::Text(first.map(|n| n.to_string()).unwrap_or_default()),
            ]);
        }
        report.tables.push(t);
    }
    report.check(Check::at_most("lower_half_hits", lower_max, 0.0));
    if upper_min.is_finite() {
        report.check(Check::at_least(
            "upper_half_min_hits",
            upper_min,
            cfg.real("assert_min_upper_hits")?,
        ));
    }
    let window = (at_least_one(cfg, "window_start")?, horizon);
    if window.0 > window.1 {
        return Err(cfg.invalid("window_start", "must not exceed horizon").into());
    }
    let m = hit_measure(
        &system,
        &system.target,
        window,
        at_least_one(cfg, "samples")?,
        cfg.seed()?,
    )?;
    report.tables.push(measure_table(window, &m));
    report.measure("hit_fraction", m.fraction);
    report.check(Check::within(
        "hit_fraction",
        m.fraction,
        cfg.real("assert_fraction_low")?,
        cfg.real("assert_fraction_high")?,
    ));
    Ok(())
}

fn nested(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let (n0, n1) = (at_least_one(cfg, "window_start")?, at_least_one(cfg, "window_end")?);
    if n0 > n1 {
        return Err(cfg.invalid("window_start", "must not exceed window_end").into());
    }
    let mu = cfg.sequence("mu")?;
    let lengths = cfg.sequence("lengths")?;
    let branch_max = cfg.count("branch_max")?;
    let system = ex_nested_blaschke(mu.clone(), lengths.clone(), n1.max(branch_max)).map_err(blame(cfg, "mu"))?;
    let partial_to = cfg.count("epsilon_partial_to")?;
    if partial_to <= n0 {
        return Err(cfg.invalid("epsilon_partial_to", "must exceed window_start").into());
    }
    let eps = epsilon_bound(&mu, &lengths, n0, partial_to)?;
    report.measure("epsilon", eps.value);
    report.measure("epsilon_over_2pi", eps.value / TAU);
    report.measure("epsilon_partial_sum", eps.partial_sum);
    match eps.tail_bound {
        Some(t) => report.measure("epsilon_tail_bound", t),
        None => report.notes.push(format!(
            "no closed-form tail bound for these families; epsilon sums terms up to n = {partial_to} only"
        )),
    }

    let mut t = Table::new(
        "branches",
        "split of b_n^{-1}(I_n) into the branch J_n at 1 and K_n at -1",
        &[
            ("n", "step"),
            ("mu", "mu_n"),
            ("length", "|I_n|"),
            ("j_measure", "|J_n|"),
            ("k_measure", "|K_n|"),
            ("k_bound", "2 mu_n |I_n|"),
        ],
    );
    let mut excess = f64::NEG_INFINITY;
    for n in 1..=branch_max {
        let split = nested_branches(&system, n)?;
        let (m, l) = (mu.value(n)?, system.target.length(n)?);
        excess = excess.max(split.k.measure() - 2.0 * m * l);
        t.push(vec![
            n.into(),
            m.into(),
            l.into(),
            split.j.measure().into(),
            split.k.measure().into(),
            (2.0 * m * l).into(),
        ]);
    }
    report.tables.push(t);
    if branch_max > 0 {
        report.check(Check::at_most("branch_excess", excess, 1e-9));
    }

    let m = hit_measure(
        &system,
        &system.target,
        (n0, n1),
        at_least_one(cfg, "samples")?,
        cfg.seed()?,
    )?;
    report.tables.push(measure_table((n0, n1), &m));
    report.measure("hit_fraction", m.fraction);
    report.check(Check::at_most(
        "hit_fraction",
        m.fraction,
        cfg.real("assert_max_fraction")?,
    ));
    Ok(())
}

fn lengths(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let mu = cfg.sequence("mu")?;
    let horizon = at_least_one(cfg, "horizon")?;
    let construction = ex_lengths_from_mu(&mu, horizon, cfg.real("cap")?).map_err(blame(cfg, "horizon"))?;
    let bp = &construction.breakpoints;
    let end = *bp.last().expect("at least n_0");
    let mu_values = mu.values(end - 1)?;
    let l = &construction.lengths;

    let mut t = Table::new(
        "breakpoints",
        "breakpoints n_k with l_n = 1/(n_{k+1} - n_k) on [n_k, n_{k+1})",
        &[
            ("k", "block index"),
            ("n_k", "first index of the block"),
            ("mu_n_k", "mu at n_k"),
            ("gap", "n_{k+1} - n_k"),
            ("length", "l_n on the block"),
            ("length_sum", "sum of l_n over the block"),
            ("mu_length_sum", "sum of mu_n l_n over the block"),
        ],
    );
    for (k, w) in bp.windows(2).enumerate() {
        let range = w[0] - 1..w[1] - 1;
        t.push(vec![
            k.into(),
            w[0].into(),
            mu_values[w[0] - 1].into(),
            (w[1] - w[0]).into(),
            l[w[0] - 1].into(),
            l[range.clone()].iter().sum::<f64>().into(),
            mu_values[range.clone()]
                .iter()
                .zip(&l[range])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .into(),
        ]);
    }
    report.tables.push(t);
    let blocks = construction.blocks();
    report.measure("blocks", blocks as f64);
    report.measure("sum_mu_at_breakpoints", construction.mu_at_breakpoints_sum);
    report.measure("sum_length", l.iter().sum());
    report.measure("sum_mu_length", mu_values.iter().zip(l).map(|(a, b)| a * b).sum());
    report.check(Check::at_least(
        "blocks",
        blocks as f64,
        cfg.count("assert_min_blocks")? as f64,
    ));

    let (mu_table, l_table) = (RealSequence::Table(mu_values), RealSequence::Table(l.clone()));
    let system = ex_nested_blaschke(mu_table.clone(), l_table.clone(), end - 1).map_err(blame(cfg, "mu"))?;
    let window = (bp[1], end - 1);
    let eps = epsilon_bound(&mu_table, &l_table, window.0, end)?;
    report.measure("epsilon", eps.value);
    let m = hit_measure(
        &system,
        &system.target,
        window,
        at_least_one(cfg, "samples")?,
        cfg.seed()?,
    )?;
    report.tables.push(measure_table(window, &m));
    report.measure("hit_fraction", m.fraction);
    report.check(Check::at_most(
        "hit_fraction",
        m.fraction,
        eps.value / TAU + cfg.real("assert_fraction_margin")?,
    ));
    Ok(())
}

fn conjugated(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let horizon = at_least_one(cfg, "horizon")?;
    let lengths = cfg.sequence("lengths")?;
    let system: ExampleSystem =
        ex_conjugated(cfg.sequence("mu")?, lengths.clone(), horizon).map_err(blame(cfg, "lengths"))?;
    let quiet_from = cfg.count("quiet_from")?;
    if !(2..=horizon).contains(&quiet_from) {
        return Err(cfg.invalid("quiet_from", "must lie in [2, horizon]").into());
    }
    let a = conjugated_interior_orbit(&lengths, horizon)?;
    let state = CompositionState::new().advance(&system, horizon)?;
    let mut t = Table::new(
        "orbit",
        "interior orbit F_n(0) = a_n of the conjugated system",
        &[
            ("n", "step"),
            ("a_n", "F_n(0), real"),
            ("one_minus_abs", "1 - |F_n(0)|"),
            ("lambda", "hyperbolic distortion lambda_n"),
            ("mu", "1 - lambda_n"),
        ],
    );
    let mut drift = 0.0f64;
    for n in 1..=horizon {
        let z = state.orbit()[n];
        drift = drift.max((z - blaschke_core::Complex64::new(a[n - 1], 0.0)).modulus());
        let lambda = state.lambdas()[n - 1];
        t.push(vec![
            n.into(),
            z.re.into(),
            state.one_minus_abs()[n].into(),
            lambda.into(),
            (1.0 - lambda).into(),
        ]);
    }
    report.tables.push(t);
    report.check(Check::at_most("orbit_matches_a_n", drift, 1e-9));
    let gaps = &state.one_minus_abs()[1..];
    report.measure("sum_one_minus_abs", gaps.iter().sum());
    report.measure(
        "sum_mu_one_minus_abs",
        state.lambdas().iter().zip(gaps).map(|(l, g)| (1.0 - l) * g).sum(),
    );

    let thetas = sample_angles(cfg.seed()?, at_least_one(cfg, "samples")?);
    let stats = hit_statistics(&system, &system.target, &thetas, &[quiet_from - 1, horizon])?;
    let mut v = Table::new(
        "visits",
        "visits of F_n(zeta) to the fixed arc I before and after quiet_from",
        &[
            ("sample", "sample index"),
            ("theta0", "starting angle (radians)"),
            ("visits_before", "visits with n < quiet_from"),
            ("visits_after", "visits with quiet_from <= n <= N"),
        ],
    );
    let mut quiet = 0usize;
    for (s, (theta, c)) in thetas.iter().zip(&stats.counts).enumerate() {
        let after = c[1] - c[0];
        if after == 0 {
            quiet += 1;
        }
        v.push(vec![s.into(), theta.radians().into(), c[0].into(), after.into()]);
    }
    report.tables.push(v);
    let fraction = quiet as f64 / thetas.len() as f64;
    report.measure("quiet_fraction", fraction);
    report.check(Check::at_least(
        "quiet_fraction",
        fraction,
        cfg.real("assert_min_quiet_fraction")?,
    ));
    Ok(())
}

fn parabolic(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let horizon = at_least_one(cfg, "horizon")?;
    let rows = at_least_one(cfg, "rows")?;
    if horizon % rows != 0 || rows < 2 {
        return Err(cfg.invalid("rows", "need rows >= 2 dividing horizon").into());
    }
    let state = CompositionState::new().advance(&ex_parabolic(), horizon)?;
    let mut t = Table::new(
        "parabolic",
        "iterates of f(z) = ((z + 1/3)/(1 + z/3))^2 from 0",
        &[
            ("n", "iterate"),
            ("one_minus", "1 - f^n(0)"),
            ("sqrt_n_one_minus", "sqrt(n) (1 - f^n(0))"),
            ("mu", "mu_n"),
            ("n_mu", "n mu_n"),
        ],
    );
    let mut scaled = Vec::new();
    let mut last_nmu = 0.0;
    for k in 1..=rows {
        let n = k * horizon / rows;
        let gap = 1.0 - state.orbit()[n].re;
        let mu = 1.0 - state.lambdas()[n - 1];
        let s = (n as f64).sqrt() * gap;
        scaled.push(s);
        last_nmu = n as f64 * mu;
        t.push(vec![n.into(), gap.into(), s.into(), mu.into(), last_nmu.into()]);
    }
    report.tables.push(t);
    let ratio = scaled[rows - 1] / scaled[0];
    report.measure("sqrt_n_gap_final", scaled[rows - 1]);
    report.measure("ratio_last_first", ratio);
    report.measure("n_mu_final", last_nmu);
    report.check(Check::within(
        "ratio_last_first",
        ratio,
        cfg.real("assert_ratio_low")?,
        cfg.real("assert_ratio_high")?,
    ));
    report.check(Check::within(
        "n_mu_final",
        last_nmu,
        cfg.real("assert_nmu_low")?,
        cfg.real("assert_nmu_high")?,
    ));
    Ok(())
}

fn custom(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let maps = match cfg.map_spec("map")? {
        MapSpec::NestedSequence => SystemMaps::Nested {
            mu: cfg.sequence("mu")?,
        },
        spec => SystemMaps::Autonomous(spec.autonomous().expect("autonomous spec")),
    };
    let system = ExampleSystem::custom(maps, centred_target(cfg)?);
    let horizon = at_least_one(cfg, "horizon")?;
    let cps = checkpoints(cfg, horizon)?;
    let samples = at_least_one(cfg, "samples")?;
    let seed = cfg.seed()?;
    let thetas = sample_angles(seed, samples);

    let state = CompositionState::new().advance(&system, horizon)?;
    let contraction = contraction_report(&state);
    report.measure("lambda_product", contraction.lambda_product);
    report.measure("mu_sum", contraction.mu_sum);
    report.measure("mu_sum_second_half", contraction.mu_sum_second_half);
    report.measure("sum_one_minus_abs", state.one_minus_abs()[1..].iter().sum());
    report.notes.push(contraction.verdict.clone());
    report
        .notes
        .push("exploratory run: the figures are evidence, not a proof of either outcome".into());

    let stats = hit_statistics(&system, &system.target, &thetas, &cps)?;
    report.tables.push(hits_table(&stats));
    let window = (at_least_one(cfg, "window_start")?, horizon);
    if window.0 > window.1 {
        return Err(cfg.invalid("window_start", "must not exceed horizon").into());
    }
    let m = hit_measure(&system, &system.target, window, samples, seed)?;
    report.tables.push(measure_table(window, &m));
    report.measure("hit_fraction", m.fraction);

    let cells = at_least_one(cfg, "cells")?;
    let profiles = density_profiles(&system, &thetas, horizon, cells)?;
    let dense = profiles.iter().filter(|p| p.min_visits >= 1).count() as f64 / profiles.len() as f64;
    report.measure("dense_fraction", dense);
    Ok(())
}
