//! Boundary orbits and the statistics computed along them.
//!
//! Pointwise double-precision orbits of expanding circle maps drift away from
//! the true orbits after a few dozen steps. The quantities here are meant to
//! be read statistically; exact statements come from [`preimage_sets`] and the
//! functions built on it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::circle::{Angle, Arc, ArcUnion};
use crate::compose::{CompositionState, MapSequence};
use crate::disk::{DiskMap, InnerFunction};
use crate::error::{Error, Result};
use crate::math::{self, Modulus};
use crate::targets::TargetSequence;

/// Default cap on the number of arcs an exact preimage computation may produce.
pub const EXACT_ARC_BUDGET: u128 = 1 << 24;

const CHUNK: usize = 1 << 14;

/// `θ_0, θ_1, …, θ_N` with `θ_n = f_n(θ_{n-1})` on the circle.
pub fn boundary_orbit<S: MapSequence + ?Sized>(seq: &S, theta0: Angle, n: usize) -> Result<Vec<Angle>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(theta0);
    let mut theta = theta0;
    let walker = Walker::new(seq);
    walker.run(1, n, |steps| {
        for (_, f) in steps.iter() {
            theta = f.boundary_map(theta);
            out.push(theta);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Hit counts `A(N, ζ)` and the prediction `φ(N)` at a list of checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct HitStatistics {
    pub sample_points: Vec<Angle>,
    pub checkpoints: Vec<usize>,
    /// `counts[s][c]` is `A(checkpoints[c], sample_points[s])`.
    pub counts: Vec<Vec<u64>>,
    pub first_hit: Vec<Option<usize>>,
    /// `Σ_{n<=N} |I_n| / 2π` at each checkpoint.
    pub phi: Vec<f64>,
}

impl HitStatistics {
    /// `A(N)/φ(N)` for each sample at the last checkpoint.
    pub fn final_ratios(&self) -> Vec<f64> {
        let phi = *self.phi.last().unwrap_or(&0.0);
        self.counts
            .iter()
            .map(|c| *c.last().unwrap_or(&0) as f64 / phi)
            .collect()
    }
}

/// [`hit_statistics`] for one starting point.
pub fn hit_count<S: MapSequence + ?Sized>(
    seq: &S,
    target: &TargetSequence,
    theta0: Angle,
    checkpoints: &[usize],
) -> Result<HitStatistics> {
    hit_statistics(seq, target, &[theta0], checkpoints)
}

/// Counts `#{n <= N : θ_n ∈ I_n}` for each starting point and checkpoint `N`.
pub fn hit_statistics<S: MapSequence + ?Sized>(
    seq: &S,
    target: &TargetSequence,
    thetas: &[Angle],
    checkpoints: &[usize],
) -> Result<HitStatistics> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints[0] == 0 {
        return Err(Error::InvalidParameter(
            "checkpoints must be positive and strictly increasing".into(),
        ));
    }
    let last = *checkpoints.last().expect("non-empty");
    #[derive(Clone)]
    struct Sample {
        theta: Angle,
        count: u64,
        first: Option<usize>,
        counts: Vec<u64>,
    }
    let mut samples: Vec<Sample> = thetas
        .iter()
        .map(|&theta| Sample {
            theta,
            count: 0,
            first: None,
            counts: Vec::with_capacity(checkpoints.len()),
        })
        .collect();
    let mut phi = Vec::with_capacity(checkpoints.len());
    let mut measure = 0.0;
    let mut next_checkpoint = 0;
    let walker = Walker::new(seq);
    walker.run_with_targets(target, 1, last, |steps, arcs| {
        let first_n = steps.first_index;
        for (i, arc) in arcs.iter().enumerate() {
            measure += arc.map_or(0.0, |a| a.length());
            while next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] == first_n + i {
                phi.push(measure / TAU);
                next_checkpoint += 1;
            }
        }
        for_each_mut(&mut samples, |s| {
            let mut cp = s.counts.len();
            for ((n, f), arc) in steps.iter().zip(arcs.iter()) {
                s.theta = f.boundary_map(s.theta);
                if arc.is_some_and(|a| a.contains(s.theta)) {
                    s.count += 1;
                    s.first.get_or_insert(n);
                }
                while cp < checkpoints.len() && checkpoints[cp] == n {
                    s.counts.push(s.count);
                    cp += 1;
                }
            }
        });
        Ok(())
    })?;
    Ok(HitStatistics {
        sample_points: thetas.to_vec(),
        checkpoints: checkpoints.to_vec(),
        first_hit: samples.iter().map(|s| s.first).collect(),
        counts: samples.into_iter().map(|s| s.counts).collect(),
        phi,
    })
}

/// A Monte Carlo estimate of a proportion with its 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureEstimate {
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hits: u64,
    pub samples: u64,
    pub seed: u64,
}

impl MeasureEstimate {
    pub fn from_counts(hits: u64, samples: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, samples);
        MeasureEstimate {
            fraction: hits as f64 / samples as f64,
            ci_low,
            ci_high,
            hits,
            samples,
            seed,
        }
    }

    /// Binomial standard error `√(p(1-p)/n)` at proportion `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        math::sqrt(p * (1.0 - p) / self.samples as f64)
    }
}

/// 95% Wilson score interval for `hits` successes in `samples` trials.
pub fn wilson_interval(hits: u64, samples: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * math::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Uniform angle for sample `index` of the stream keyed by `seed`.
///
/// Independent of how samples are scheduled.
pub fn sample_angle(seed: u64, index: u64) -> Angle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    Angle::new(TAU * u)
}

pub fn sample_angles(seed: u64, count: usize) -> Vec<Angle> {
    (0..count as u64).map(|i| sample_angle(seed, i)).collect()
}

/// Fraction of uniform starting points whose orbit meets `I_n` for some `n` in `window`.
pub fn hit_measure<S: MapSequence + ?Sized>(
    seq: &S,
    target: &TargetSequence,
    window: (usize, usize),
    samples: usize,
    seed: u64,
) -> Result<MeasureEstimate> {
    let (n0, n1) = window;
    if n0 == 0 || n0 > n1 || samples == 0 {
        return Err(Error::InvalidParameter(
            "need 1 <= N0 <= N1 and at least one sample".into(),
        ));
    }
    #[derive(Clone, Copy)]
    struct Sample {
        theta: Angle,
        hit: bool,
    }
    let mut states: Vec<Sample> = sample_angles(seed, samples)
        .into_iter()
        .map(|theta| Sample { theta, hit: false })
        .collect();
    let walker = Walker::new(seq);
    walker.run_with_targets(target, 1, n1, |steps, arcs| {
        for_each_mut(&mut states, |s| {
            if s.hit {
                return;
            }
            for ((n, f), arc) in steps.iter().zip(arcs.iter()) {
                s.theta = f.boundary_map(s.theta);
                if n >= n0 && arc.is_some_and(|a| a.contains(s.theta)) {
                    s.hit = true;
                    return;
                }
            }
        });
        Ok(())
    })?;
    let hits = states.iter().filter(|s| s.hit).count() as u64;
    Ok(MeasureEstimate::from_counts(hits, samples as u64, seed))
}

/// Arcs needed to pull back `I_n` through `f_1, …, f_n` for every `n` in the window.
pub fn preimage_cost<S: MapSequence + ?Sized>(seq: &S, window: (usize, usize)) -> Result<u128> {
    let mut degree: u128 = 1;
    let mut total: u128 = 0;
    for n in 1..=window.1 {
        degree = degree.saturating_mul(seq.map(n)?.degree() as u128);
        if n >= window.0 {
            total = total.saturating_add(degree);
        }
    }
    Ok(total)
}

/// `E_n = F_n⁻¹(I_n)` for each `n` in the window, computed exactly.
pub fn preimage_sets<S: MapSequence + ?Sized>(
    seq: &S,
    target: &TargetSequence,
    window: (usize, usize),
    budget: u128,
) -> Result<Vec<ArcUnion>> {
    let (n0, n1) = window;
    if n0 == 0 || n0 > n1 {
        return Err(Error::InvalidParameter("need 1 <= N0 <= N1".into()));
    }
    let required = preimage_cost(seq, window)?;
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let maps = crate::compose::materialize(seq, n1)?;
    (n0..=n1)
        .map(|n| {
            let mut u = match target.arc(n)? {
                Some(a) => ArcUnion::from_arc(a),
                None => ArcUnion::empty(),
            };
            for f in maps[..n].iter().rev() {
                if u.is_empty() {
                    break;
                }
                u = f.union_preimage(&u)?;
            }
            Ok(u)
        })
        .collect()
}

/// `∪_{n ∈ window} F_n⁻¹(I_n)`, exactly, within [`EXACT_ARC_BUDGET`].
pub fn exact_hit_union<S: MapSequence + ?Sized>(
    seq: &S,
    target: &TargetSequence,
    window: (usize, usize),
) -> Result<ArcUnion> {
    exact_hit_union_with_budget(seq, target, window, EXACT_ARC_BUDGET)
}

pub fn exact_hit_union_with_budget<S: MapSequence + ?Sized>(
    seq: &S,
    target: &TargetSequence,
    window: (usize, usize),
    budget: u128,
) -> Result<ArcUnion> {
    let sets = preimage_sets(seq, target, window, budget)?;
    Ok(sets.iter().fold(ArcUnion::empty(), |acc, e| acc.union(e)))
}

/// Pair statistic `|E_m ∩ E_n|/2π` against `(|E_m|/2π)(|E_n|/2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapRecord {
    pub m: usize,
    pub n: usize,
    pub lhs: f64,
    pub product_term: f64,
    pub excess: f64,
    /// `|E_n| / 2π`.
    pub e_n: f64,
}

pub fn overlap_correlation<S: MapSequence + ?Sized>(
    seq: &S,
    target: &TargetSequence,
    m: usize,
    n: usize,
) -> Result<OverlapRecord> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter("need 1 <= m <= n".into()));
    }
    let budget = EXACT_ARC_BUDGET;
    let e_m = preimage_sets(seq, target, (m, m), budget)?.remove(0);
    let e_n = preimage_sets(seq, target, (n, n), budget)?.remove(0);
    let lhs = e_m.intersection(&e_n).measure() / TAU;
    let (pm, pn) = (e_m.measure() / TAU, e_n.measure() / TAU);
    Ok(OverlapRecord {
        m,
        n,
        lhs,
        product_term: pm * pn,
        excess: lhs - pm * pn,
        e_n: pn,
    })
}

/// Visit counts of `θ_1, …, θ_N` in `K` equal cells starting at angle 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub visits: Vec<u64>,
    pub min_visits: u64,
    pub window: usize,
}

impl DensityProfile {
    pub fn cells(&self) -> usize {
        self.visits.len()
    }

    pub fn cells_visited(&self) -> usize {
        self.visits.iter().filter(|&&v| v > 0).count()
    }
}

pub fn density_profile<S: MapSequence + ?Sized>(
    seq: &S,
    theta0: Angle,
    n: usize,
    cells: usize,
) -> Result<DensityProfile> {
    Ok(density_profiles(seq, &[theta0], n, cells)?.remove(0))
}

/// [`density_profile`] for several starting points, sharing the map evaluations.
pub fn density_profiles<S: MapSequence + ?Sized>(
    seq: &S,
    thetas: &[Angle],
    n: usize,
    cells: usize,
) -> Result<Vec<DensityProfile>> {
    if cells == 0 {
        return Err(Error::InvalidParameter("need at least one cell".into()));
    }
    let scale = cells as f64 / TAU;
    let mut states: Vec<(Angle, Vec<u64>)> = thetas.iter().map(|&t| (t, vec![0u64; cells])).collect();
    Walker::new(seq).run(1, n, |steps| {
        for_each_mut(&mut states, |(theta, visits)| {
            for (_, f) in steps.iter() {
                *theta = f.boundary_map(*theta);
                let cell = ((theta.radians() * scale) as usize).min(cells - 1);
                visits[cell] += 1;
            }
        });
        Ok(())
    })?;
    Ok(states
        .into_iter()
        .map(|(_, visits)| DensityProfile {
            min_visits: visits.iter().copied().min().unwrap_or(0),
            visits,
            window: n,
        })
        .collect())
}

/// `d_n = |F_n(e^{iθ_0}) - F_n(0)|` for `n = 1..=N`.
pub fn dw_profile<S: MapSequence + ?Sized>(seq: &S, theta0: Angle, n: usize) -> Result<Vec<f64>> {
    Ok(dw_profiles(seq, &[theta0], n)?.remove(0))
}

/// [`dw_profile`] for several starting points, sharing the interior orbit.
pub fn dw_profiles<S: MapSequence + ?Sized>(seq: &S, thetas: &[Angle], n: usize) -> Result<Vec<Vec<f64>>> {
    let state = CompositionState::new().advance(seq, n)?;
    let orbit = state.orbit();
    let mut states: Vec<(Angle, Vec<f64>)> = thetas.iter().map(|&t| (t, Vec::with_capacity(n))).collect();
    Walker::new(seq).run(1, n, |steps| {
        for_each_mut(&mut states, |(theta, d)| {
            for (k, f) in steps.iter() {
                *theta = f.boundary_map(*theta);
                d.push((theta.point() - orbit[k]).modulus());
            }
        });
        Ok(())
    })?;
    Ok(states.into_iter().map(|(_, d)| d).collect())
}

/// `| |A ∩ F_n⁻¹(E)|/|E| - |A|/2π |` for a centred sequence, computed exactly.
pub fn mixing_defect<S: MapSequence + ?Sized>(seq: &S, n: usize, a: &Arc, e: &Arc) -> Result<f64> {
    if e.length() <= 0.0 {
        return Err(Error::InvalidParameter("E must have positive length".into()));
    }
    let maps = crate::compose::materialize(seq, n)?;
    let mut degree: u128 = 1;
    for (k, f) in maps.iter().enumerate() {
        if !f.is_centered() {
            let value = f.eval(num_complex::Complex64::new(0.0, 0.0))?.modulus();
            return Err(Error::NotCentered { n: k + 1, value });
        }
        degree = degree.saturating_mul(f.degree() as u128);
    }
    if degree > EXACT_ARC_BUDGET {
        return Err(Error::BudgetExceeded {
            required: degree,
            budget: EXACT_ARC_BUDGET,
        });
    }
    let mut pre = ArcUnion::from_arc(*e);
    for f in maps.iter().rev() {
        pre = f.union_preimage(&pre)?;
    }
    let a = ArcUnion::from_arc(*a);
    Ok(math::abs(
        a.intersection(&pre).measure() / e.length() - a.measure() / TAU,
    ))
}

struct Steps<'a> {
    first_index: usize,
    len: usize,
    maps: StepMaps<'a>,
}

enum StepMaps<'a> {
    Same(&'a DiskMap),
    Each(&'a [DiskMap]),
}

impl Steps<'_> {
    /// `(n, f_n)` pairs in order.
    fn iter(&self) -> impl Iterator<Item = (usize, &DiskMap)> + '_ {
        (0..self.len).map(move |i| {
            let f = match &self.maps {
                StepMaps::Same(f) => *f,
                StepMaps::Each(v) => &v[i],
            };
            (self.first_index + i, f)
        })
    }
}

// Materializes maps (and targets) chunk by chunk so that every sample shares them.
struct Walker<'a, S: ?Sized> {
    seq: &'a S,
    constant: Option<DiskMap>,
}

impl<'a, S: MapSequence + ?Sized> Walker<'a, S> {
    fn new(seq: &'a S) -> Self {
        Walker {
            seq,
            constant: seq.constant_map(),
        }
    }

    fn run(&self, from: usize, to: usize, mut body: impl FnMut(&Steps<'_>) -> Result<()>) -> Result<()> {
        self.run_inner(None, from, to, |steps, _| body(steps))
    }

    fn run_with_targets(
        &self,
        target: &TargetSequence,
        from: usize,
        to: usize,
        body: impl FnMut(&Steps<'_>, &[Option<Arc>]) -> Result<()>,
    ) -> Result<()> {
        self.run_inner(Some(target), from, to, body)
    }

    fn run_inner(
        &self,
        target: Option<&TargetSequence>,
        from: usize,
        to: usize,
        mut body: impl FnMut(&Steps<'_>, &[Option<Arc>]) -> Result<()>,
    ) -> Result<()> {
        if let Some(h) = self.seq.horizon() {
            if to > h {
                return Err(Error::HorizonExceeded { n: to, horizon: h });
            }
        }
        let mut maps = Vec::new();
        let mut arcs = Vec::new();
        let mut start = from;
        while start <= to {
            let end = (start + CHUNK - 1).min(to);
            let len = end - start + 1;
            let step_maps = match &self.constant {
                Some(f) => StepMaps::Same(f),
                None => {
                    maps.clear();
                    for n in start..=end {
                        maps.push(self.seq.map(n)?);
                    }
                    StepMaps::Each(&maps)
                }
            };
            arcs.clear();
            if let Some(t) = target {
                for n in start..=end {
                    arcs.push(t.arc(n)?);
                }
            }
            let steps = Steps {
                first_index: start,
                len,
                maps: step_maps,
            };
            body(&steps, &arcs)?;
            start = end + 1;
        }
        Ok(())
    }
}

#[cfg(feature = "parallel")]
fn for_each_mut<T: Send>(items: &mut [T], f: impl Fn(&mut T) + Sync + Send) {
    use rayon::prelude::*;
    items.par_iter_mut().for_each(f);
}

#[cfg(not(feature = "parallel"))]
fn for_each_mut<T: Send>(items: &mut [T], f: impl Fn(&mut T) + Sync + Send) {
    items.iter_mut().for_each(f);
}
