//! Forward compositions `F_n = f_n ∘ ⋯ ∘ f_1`.
//!
//! `F_n` is never expanded: the interior orbit `F_n(z₀)` is advanced one map
//! at a time and the hyperbolic distortion of each step is read off the
//! orbit,
//!
//! ```text
//! λ_n = ρ(F_n(z₀)) |f_n'(F_{n-1}(z₀))| / ρ(F_{n-1}(z₀)),   ρ(z) = 2 / (1 - |z|²).
//! ```
//!
//! The module also carries the conjugation `g_n = M_n⁻¹ ∘ f_n ∘ M_{n-1}` that
//! recentres a sequence at the origin, and the block partition that regroups
//! a slowly contracting centred sequence into uniformly contracting blocks.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::E;
use core::fmt;

use num_complex::Complex64;

use crate::disk::{DiskMap, InnerFunction, Mobius};
use crate::error::{Error, Result};
use crate::math::{self, Modulus};

/// Orbits this close to the unit circle abort the computation.
pub const BOUNDARY_GUARD: f64 = 1e-14;

/// A deterministic source of maps `n ↦ f_n`, `n >= 1`.
///
/// Repeated queries at the same index must return identical maps.
pub trait MapSequence: Sync {
    fn map(&self, n: usize) -> Result<DiskMap>;

    /// Last index the sequence is defined for, if finite.
    fn horizon(&self) -> Option<usize> {
        None
    }

    /// The map at every index, when the sequence is autonomous.
    fn constant_map(&self) -> Option<DiskMap> {
        None
    }
}

impl<S: MapSequence + ?Sized> MapSequence for &S {
    fn map(&self, n: usize) -> Result<DiskMap> {
        (**self).map(n)
    }

    fn horizon(&self) -> Option<usize> {
        (**self).horizon()
    }

    fn constant_map(&self) -> Option<DiskMap> {
        (**self).constant_map()
    }
}

/// The same map at every index.
#[derive(Clone, Debug)]
pub struct Autonomous(pub DiskMap);

impl MapSequence for Autonomous {
    fn map(&self, _n: usize) -> Result<DiskMap> {
        Ok(self.0.clone())
    }

    fn constant_map(&self) -> Option<DiskMap> {
        Some(self.0.clone())
    }
}

/// Maps listed explicitly; `maps[0]` is `f_1`.
#[derive(Clone, Debug, Default)]
pub struct TableSequence(pub Vec<DiskMap>);

impl MapSequence for TableSequence {
    fn map(&self, n: usize) -> Result<DiskMap> {
        if n == 0 || n > self.0.len() {
            return Err(Error::HorizonExceeded {
                n,
                horizon: self.0.len(),
            });
        }
        Ok(self.0[n - 1].clone())
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.0.len())
    }
}

/// Maps produced by a closure.
pub struct FnSequence<F>(pub F);

impl<F> MapSequence for FnSequence<F>
where
    F: Fn(usize) -> Result<DiskMap> + Sync,
{
    fn map(&self, n: usize) -> Result<DiskMap> {
        (self.0)(n)
    }
}

/// `f_1, …, f_n` collected into a vector.
pub fn materialize<S: MapSequence + ?Sized>(seq: &S, n: usize) -> Result<Vec<DiskMap>> {
    if let Some(h) = seq.horizon() {
        if n > h {
            return Err(Error::HorizonExceeded { n, horizon: h });
        }
    }
    (1..=n).map(|k| seq.map(k)).collect()
}

/// Hyperbolic density `2 / (1 - |z|²)`.
pub fn hyperbolic_density(z: Complex64) -> f64 {
    let r = z.modulus();
    2.0 / ((1.0 - r) * (1.0 + r))
}

/// Snapshot of a forward composition after `n` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionState {
    orbit: Vec<Complex64>,
    lambdas: Vec<f64>,
    one_minus_abs: Vec<f64>,
    mu_partial_sum: f64,
    lambda_partial_product: f64,
    log_lambda_sum: f64,
}

impl Default for CompositionState {
    fn default() -> Self {
        CompositionState::new()
    }
}

impl CompositionState {
    /// `F_0 = id` with base point 0.
    pub fn new() -> Self {
        CompositionState {
            orbit: alloc::vec![Complex64::new(0.0, 0.0)],
            lambdas: Vec::new(),
            one_minus_abs: alloc::vec![1.0],
            mu_partial_sum: 0.0,
            lambda_partial_product: 1.0,
            log_lambda_sum: 0.0,
        }
    }

    /// Distortions measured along the orbit of `z0` instead of 0.
    pub fn at_base_point(z0: Complex64) -> Result<Self> {
        let r = z0.modulus();
        if !(r < 1.0 - BOUNDARY_GUARD) {
            return Err(Error::OutsideDisk {
                re: z0.re,
                im: z0.im,
                modulus: r,
            });
        }
        Ok(CompositionState {
            orbit: alloc::vec![z0],
            one_minus_abs: alloc::vec![1.0 - r],
            ..CompositionState::new()
        })
    }

    /// Number of maps applied.
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn base_point(&self) -> Complex64 {
        self.orbit[0]
    }

    /// `F_k(z₀)` for `k = 0..=n`.
    pub fn orbit(&self) -> &[Complex64] {
        &self.orbit
    }

    /// `λ_k` for `k = 1..=n` (index `k - 1`).
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `μ_k = 1 - λ_k` for `k = 1..=n`.
    pub fn mus(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| 1.0 - l).collect()
    }

    /// `1 - |F_k(z₀)|` for `k = 0..=n`.
    pub fn one_minus_abs(&self) -> &[f64] {
        &self.one_minus_abs
    }

    pub fn mu_partial_sum(&self) -> f64 {
        self.mu_partial_sum
    }

    pub fn lambda_partial_product(&self) -> f64 {
        self.lambda_partial_product
    }

    /// `Σ ln λ_k`, which does not underflow.
    pub fn log_lambda_sum(&self) -> f64 {
        self.log_lambda_sum
    }

    /// Applies `f_{n+1}, …, f_{n+steps}` and returns the new snapshot.
    pub fn advance<S: MapSequence + ?Sized>(&self, seq: &S, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("advance needs steps >= 1".into()));
        }
        let mut next = self.clone();
        next.orbit.reserve(steps);
        next.lambdas.reserve(steps);
        next.one_minus_abs.reserve(steps);
        for _ in 0..steps {
            let n = next.n() + 1;
            let f = seq.map(n)?;
            next.push(&f, n)?;
        }
        Ok(next)
    }

    fn push(&mut self, f: &DiskMap, n: usize) -> Result<()> {
        let prev = *self.orbit.last().expect("orbit starts with the base point");
        let prev_gap = *self.one_minus_abs.last().expect("gap list is never empty");
        let z = f.eval(prev)?;
        let r = z.modulus();
        let gap = 1.0 - r;
        if !(gap >= BOUNDARY_GUARD) {
            return Err(Error::PrecisionExhausted { n, gap });
        }
        let slope = f.derivative(prev)?.modulus();
        // (1 - |w|²) = (1 - |w|)(1 + |w|) keeps relative accuracy near the circle
        let lambda = prev_gap * (2.0 - prev_gap) * slope / (gap * (1.0 + r));
        self.orbit.push(z);
        self.one_minus_abs.push(gap);
        self.lambdas.push(lambda);
        self.mu_partial_sum += 1.0 - lambda;
        self.lambda_partial_product *= lambda;
        self.log_lambda_sum += math::ln(lambda);
        Ok(())
    }
}

/// Finite-N reading of the contraction criterion `Π λ_n → 0 ⇔ Σ μ_n = ∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    pub n: usize,
    pub lambda_product: f64,
    pub log_lambda_product: f64,
    pub mu_sum: f64,
    /// `Σ μ_k` over the second half `(N/2, N]` of the horizon.
    pub mu_sum_second_half: f64,
    pub trend: ContractionTrend,
    pub verdict: String,
}

/// What the partial sums suggest up to the horizon; never a statement about the limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContractionTrend {
    /// Every map so far was an automorphism (`Σ μ = 0`).
    NoContraction,
    /// The second half of the horizon still added at least 0.1 to `Σ μ`.
    SumStillGrowing,
    /// `Σ μ` barely moved over the second half of the horizon.
    SumLevellingOff,
}

impl fmt::Display for ContractionTrend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContractionTrend::NoContraction => "no contraction observed",
            ContractionTrend::SumStillGrowing => "mu partial sums still growing",
            ContractionTrend::SumLevellingOff => "mu partial sums levelling off",
        })
    }
}

pub fn contraction_report(state: &CompositionState) -> ContractionReport {
    let n = state.n();
    let second_half: f64 = state.lambdas[n / 2..].iter().map(|l| 1.0 - l).sum();
    let trend = if math::abs(state.mu_partial_sum) <= 1e-12 {
        ContractionTrend::NoContraction
    } else if second_half >= 0.1 {
        ContractionTrend::SumStillGrowing
    } else {
        ContractionTrend::SumLevellingOff
    };
    let verdict = alloc::format!(
        "at N = {n}: prod lambda = {:.6e}, sum mu = {:.6}, second-half sum mu = {:.6}; {trend} (finite-N evidence only)",
        state.lambda_partial_product, state.mu_partial_sum, second_half
    );
    ContractionReport {
        n,
        lambda_product: state.lambda_partial_product,
        log_lambda_product: state.log_lambda_sum,
        mu_sum: state.mu_partial_sum,
        mu_sum_second_half: second_half,
        trend,
        verdict,
    }
}

/// The recentred sequence `g_n = M_n⁻¹ ∘ f_n ∘ M_{n-1}` with `M_n(z) = (z + F_n(0))/(1 + conj(F_n(0)) z)`.
#[derive(Clone, Debug)]
pub struct Normalized {
    /// `g_1, …, g_N`, each an unexpanded chain (or `f_n` itself when no recentring is needed).
    pub maps: Vec<DiskMap>,
    /// `M_0 = id, M_1, …, M_N`.
    pub mobius: Vec<Mobius>,
}

impl MapSequence for Normalized {
    fn map(&self, n: usize) -> Result<DiskMap> {
        if n == 0 || n > self.maps.len() {
            return Err(Error::HorizonExceeded {
                n,
                horizon: self.maps.len(),
            });
        }
        Ok(self.maps[n - 1].clone())
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.maps.len())
    }
}

/// Recentres the first `state.n()` maps of `seq` at the origin.
pub fn normalize<S: MapSequence + ?Sized>(seq: &S, state: &CompositionState) -> Result<Normalized> {
    let origin = Complex64::new(0.0, 0.0);
    if state.base_point() != origin {
        return Err(Error::InvalidParameter("normalization needs the orbit of 0".into()));
    }
    let n = state.n();
    let mut mobius = Vec::with_capacity(n + 1);
    mobius.push(Mobius::identity());
    for k in 1..=n {
        mobius.push(Mobius::to_point(state.orbit()[k])?);
    }
    let mut maps = Vec::with_capacity(n);
    for k in 1..=n {
        let f = seq.map(k)?;
        let (prev, cur) = (mobius[k - 1], mobius[k]);
        let g = if prev.is_rotation() && cur.is_rotation() {
            f
        } else {
            DiskMap::Chain(alloc::vec![prev.into(), f, cur.inverse().into()])
        };
        maps.push(g);
    }
    Ok(Normalized { maps, mobius })
}

/// How `m_k` is chosen inside each block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockVariant {
    /// Blocks cut by `Σ μ`, `m_k` maximizes `|I_n|` on `[n_k, n_{k+1})`.
    MaxLength,
    /// Blocks cut by `Σ |I_n|`, `m_k` minimizes `μ_n` on `[n_k, n_{k+1} - 1)`.
    MinMu,
}

/// The run `m_{2k-2}+1 ..= m_{2k}` of maps regrouped into one block map.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleBlock {
    pub start: usize,
    pub end: usize,
    pub mu_sum: f64,
    pub lambda_product: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockPartition {
    pub variant: BlockVariant,
    /// `n_1, …, n_{K+1}` (1-based indices).
    pub starts: Vec<usize>,
    /// `m_1, …, m_K`.
    pub chosen: Vec<usize>,
    /// Double blocks `(m_{2k-2}, m_{2k}]`, `m_0 = 0`.
    pub double_blocks: Vec<DoubleBlock>,
}

impl BlockPartition {
    pub fn blocks(&self) -> usize {
        self.chosen.len()
    }
}

/// Partial sums crossing an integer within this distance count as reaching it,
/// so sequences like `μ ≡ 0.3` cut where exact arithmetic would.
pub const CROSSING_TOL: f64 = 1e-9;

/// Least indices `n_k` with `s_1 + ⋯ + s_{n_k} ∈ [k, k+1)`, for `k = 1..=count`.
fn integer_crossings(values: &[f64], count: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    // Neumaier compensated sum
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    let mut k = 1usize;
    for (i, &v) in values.iter().enumerate() {
        let t = sum + v;
        if math::abs(sum) >= math::abs(v) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
        let total = sum + carry;
        if total >= k as f64 - CROSSING_TOL {
            if total >= (k + 1) as f64 - CROSSING_TOL {
                return Err(Error::Hypothesis(alloc::format!(
                    "partial sum jumps over [{k}, {}) at index {}",
                    k + 1,
                    i + 1
                )));
            }
            out.push(i + 1);
            k += 1;
            if out.len() == count {
                break;
            }
        }
    }
    Ok(out)
}

/// Partitions `1..=horizon` into blocks along the integer crossings of a partial sum.
///
/// `mu[i]` is `μ_{i+1}`; `lengths[i]` is `|I_{i+1}|`. Ties in the arg-max /
/// arg-min pick the smallest index.
pub fn block_partition(
    mu: &[f64],
    lengths: Option<&[f64]>,
    variant: BlockVariant,
    blocks: usize,
) -> Result<BlockPartition> {
    if blocks == 0 {
        return Err(Error::EmptyBlock);
    }
    if let Some(l) = lengths {
        if l.len() < mu.len() {
            return Err(Error::InvalidParameter("lengths shorter than the mu sequence".into()));
        }
    }
    if mu.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(Error::Hypothesis("mu_n must lie in [0, 1]".into()));
    }
    let horizon = mu.len();
    let starts = match variant {
        BlockVariant::MaxLength => integer_crossings(mu, blocks + 1)?,
        BlockVariant::MinMu => {
            let l = lengths.ok_or_else(|| Error::InvalidParameter("the min-mu variant needs target lengths".into()))?;
            let l = &l[..horizon];
            if l.iter().any(|x| !(*x < 1.0)) {
                return Err(Error::Hypothesis("the min-mu variant needs |I_n| <= c < 1".into()));
            }
            integer_crossings(l, blocks + 1)?
        }
    };
    if starts.len() < blocks + 1 {
        return Err(Error::PartialPartition {
            completed: starts.len().saturating_sub(1),
            requested: blocks,
            horizon,
        });
    }
    let mut chosen = Vec::with_capacity(blocks);
    for k in 0..blocks {
        let (lo, hi) = (starts[k], starts[k + 1]);
        let m = match variant {
            BlockVariant::MaxLength => match lengths {
                Some(l) => arg_best(lo, hi, |n| l[n - 1], |a, b| a > b),
                None => lo,
            },
            BlockVariant::MinMu => {
                // [n_k, n_{k+1} - 1) can be empty when one length crosses an integer alone
                let hi = (hi - 1).max(lo + 1);
                arg_best(lo, hi, |n| mu[n - 1], |a, b| a < b)
            }
        };
        chosen.push(m);
    }
    let mut double_blocks = Vec::new();
    let mut prev = 0usize;
    for pair in chosen.chunks_exact(2) {
        let end = pair[1];
        let mut mu_sum = 0.0;
        let mut lambda_product = 1.0;
        for m in &mu[prev..end] {
            mu_sum += m;
            lambda_product *= 1.0 - m;
        }
        double_blocks.push(DoubleBlock {
            start: prev + 1,
            end,
            mu_sum,
            lambda_product,
        });
        prev = end;
    }
    Ok(BlockPartition {
        variant,
        starts,
        chosen,
        double_blocks,
    })
}

fn arg_best(lo: usize, hi: usize, value: impl Fn(usize) -> f64, better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = lo;
    let mut best_v = value(lo);
    for n in lo + 1..hi {
        let v = value(n);
        if better(v, best_v) {
            best = n;
            best_v = v;
        }
    }
    best
}

/// A run of consecutive centred maps composed into one.
#[derive(Clone, Debug)]
pub struct BlockMap {
    pub start: usize,
    pub end: usize,
    pub map: DiskMap,
    /// `|g'(0)|` from the chain rule along the composed map.
    pub derivative_at_zero: f64,
    /// `Π |f_i'(0)|` over the block.
    pub lambda_product: f64,
    pub mu_sum: f64,
}

/// Composes `f_start, …, f_end` (inclusive) of a centred sequence.
pub fn compose_range<S: MapSequence + ?Sized>(seq: &S, start: usize, end: usize) -> Result<BlockMap> {
    if start == 0 || end < start {
        return Err(Error::EmptyBlock);
    }
    let origin = Complex64::new(0.0, 0.0);
    let mut members = Vec::with_capacity(end - start + 1);
    let mut lambda_product = 1.0;
    let mut mu_sum = 0.0;
    for n in start..=end {
        let f = seq.map(n)?;
        let value = f.eval(origin)?.modulus();
        if value > 1e-12 {
            return Err(Error::NotCentered { n, value });
        }
        let lambda = f.derivative(origin)?.modulus();
        lambda_product *= lambda;
        mu_sum += 1.0 - lambda;
        members.push(f);
    }
    let map = if members.len() == 1 {
        members.pop().expect("one member")
    } else {
        DiskMap::Chain(members)
    };
    let derivative_at_zero = map.derivative(origin)?.modulus();
    if math::abs(derivative_at_zero - lambda_product) > 1e-10 {
        return Err(Error::Postcondition(alloc::format!(
            "block {start}..={end}: |g'(0)| = {derivative_at_zero} but product of lambdas is {lambda_product}"
        )));
    }
    Ok(BlockMap {
        start,
        end,
        map,
        derivative_at_zero,
        lambda_product,
        mu_sum,
    })
}

/// Block maps `g_k = f_{m_{2k}} ∘ ⋯ ∘ f_{m_{2k-2}+1}` of a centred sequence.
///
/// Every block whose `μ`-sum reaches 1 is checked against `|g_k'(0)| <= 1/e`.
pub fn block_compose<S: MapSequence + ?Sized>(seq: &S, partition: &BlockPartition) -> Result<Vec<BlockMap>> {
    if partition.double_blocks.is_empty() {
        return Err(Error::EmptyBlock);
    }
    let mut out = Vec::with_capacity(partition.double_blocks.len());
    for block in &partition.double_blocks {
        let g = compose_range(seq, block.start, block.end)?;
        if g.mu_sum >= 1.0 && g.derivative_at_zero > 1.0 / E + 1e-10 {
            return Err(Error::Postcondition(alloc::format!(
                "block {}..={} has mu-sum {} but |g'(0)| = {} > 1/e",
                block.start,
                block.end,
                g.mu_sum,
                g.derivative_at_zero
            )));
        }
        out.push(g);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::Blaschke;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn nested_with(lambdas: Vec<f64>) -> TableSequence {
        TableSequence(
            lambdas
                .into_iter()
                .map(|l| Blaschke::nested(l).unwrap().into())
                .collect(),
        )
    }

    #[test]
    fn centred_sequence_stays_at_origin() {
        let seq = nested_with(alloc::vec![0.5, 0.2, 0.9, 0.7]);
        let s = CompositionState::new().advance(&seq, 4).unwrap();
        for z in s.orbit() {
            assert_eq!(*z, c(0.0, 0.0));
        }
        for (l, want) in s.lambdas().iter().zip([0.5, 0.2, 0.9, 0.7]) {
            assert_abs_diff_eq!(*l, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn parabolic_orbit_and_first_distortion() {
        let seq = Autonomous(Blaschke::parabolic().into());
        let s = CompositionState::new().advance(&seq, 2).unwrap();
        assert_abs_diff_eq!(s.orbit()[1].re, 1.0 / 9.0, epsilon = 1e-16);
        assert_abs_diff_eq!(s.orbit()[2].re, 9.0 / 49.0, epsilon = 1e-16);
        assert_abs_diff_eq!(s.lambdas()[0], 0.6, epsilon = 1e-14);
    }

    #[test]
    fn first_distortion_against_finite_differences() {
        // independent route: ρ(f(0)) |f'(0)| / ρ(0) with f' by central differences
        let f = Blaschke::parabolic();
        let h = 1e-6;
        let fd = ((f.eval(c(h, 0.0)).unwrap() - f.eval(c(-h, 0.0)).unwrap()) / (2.0 * h)).norm();
        let w = f.eval(c(0.0, 0.0)).unwrap();
        let oracle = hyperbolic_density(w) * fd / hyperbolic_density(c(0.0, 0.0));
        let s = CompositionState::new().advance(&Autonomous(f.into()), 1).unwrap();
        assert_abs_diff_eq!(s.lambdas()[0], oracle, epsilon = 1e-8);
    }

    #[test]
    fn steps_compose_deterministically() {
        let seq = Autonomous(Blaschke::parabolic().into());
        let once = CompositionState::new().advance(&seq, 40).unwrap();
        let mut stepped = CompositionState::new();
        for _ in 0..40 {
            stepped = stepped.advance(&seq, 1).unwrap();
        }
        assert_eq!(once, stepped);
    }

    #[test]
    fn zero_steps_rejected() {
        let seq = Autonomous(Blaschke::parabolic().into());
        assert!(CompositionState::new().advance(&seq, 0).is_err());
    }

    #[test]
    fn orbit_too_close_to_boundary_aborts() {
        let m = Mobius::new(c(1.0 - 1e-15, 0.0), c(1.0, 0.0)).unwrap();
        let err = CompositionState::new().advance(&Autonomous(m.into()), 3).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted { n: 1, .. }));
    }

    #[test]
    fn contraction_reports() {
        let half = Autonomous(Blaschke::nested(0.5).unwrap().into());
        let s = CompositionState::new().advance(&half, 30).unwrap();
        let r = contraction_report(&s);
        assert_eq!(r.lambda_product, 0.5f64.powi(30));
        assert_eq!(r.trend, ContractionTrend::SumStillGrowing);
        let rot = Autonomous(DiskMap::rotation(0.3));
        let s = CompositionState::new().advance(&rot, 30).unwrap();
        let r = contraction_report(&s);
        // |e^{0.3i}| is 1 only up to rounding
        assert_abs_diff_eq!(r.lambda_product, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.mu_sum, 0.0, epsilon = 1e-13);
        assert_eq!(r.trend, ContractionTrend::NoContraction);
    }

    #[test]
    fn normalization_of_centred_sequence_is_trivial() {
        let seq = nested_with(alloc::vec![0.5, 0.3]);
        let s = CompositionState::new().advance(&seq, 2).unwrap();
        let g = normalize(&seq, &s).unwrap();
        assert_eq!(g.maps, seq.0);
        assert!(g.mobius.iter().all(|m| m.is_rotation()));
    }

    #[test]
    fn normalization_recentres_parabolic() {
        let seq = Autonomous(Blaschke::parabolic().into());
        let s = CompositionState::new().advance(&seq, 25).unwrap();
        let g = normalize(&seq, &s).unwrap();
        let origin = c(0.0, 0.0);
        for (k, gk) in g.maps.iter().enumerate() {
            assert!(gk.eval(origin).unwrap().norm() < 1e-12);
            assert_abs_diff_eq!(gk.derivative(origin).unwrap().norm(), s.lambdas()[k], epsilon = 1e-10);
        }
        assert_abs_diff_eq!(g.maps[0].derivative(origin).unwrap().norm(), 0.6, epsilon = 1e-12);
        let big = CompositionState::new().advance(&g, 25).unwrap();
        assert!(big.orbit().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn block_partition_constant_sequences() {
        let ones = alloc::vec![1.0; 10];
        let p = block_partition(&ones, None, BlockVariant::MaxLength, 5).unwrap();
        assert_eq!(p.starts, alloc::vec![1, 2, 3, 4, 5, 6]);
        let halves = alloc::vec![0.5; 20];
        let p = block_partition(&halves, None, BlockVariant::MaxLength, 2).unwrap();
        assert_eq!(&p.starts[..3], &[2, 4, 6]);
    }

    #[test]
    fn block_partition_brute_force_point_three() {
        let mu = alloc::vec![0.3; 30];
        // brute force: least n with floor(partial sum) == k, scanning exact rationals 3n/10
        let mut expect = alloc::vec::Vec::new();
        for k in 1..=3usize {
            let n = (1..=30).find(|n| 3 * n >= 10 * k).unwrap();
            expect.push(n);
        }
        let p = block_partition(&mu, None, BlockVariant::MaxLength, 2).unwrap();
        assert_eq!(p.starts, expect);
        assert_eq!(&p.starts[..2], &[4, 7]);
    }

    #[test]
    fn block_partition_horizon_too_short() {
        let mu = alloc::vec![0.3; 5];
        assert!(matches!(
            block_partition(&mu, None, BlockVariant::MaxLength, 3),
            Err(Error::PartialPartition {
                completed: 0,
                requested: 3,
                horizon: 5
            })
        ));
        assert!(matches!(
            block_partition(&mu, None, BlockVariant::MaxLength, 0),
            Err(Error::EmptyBlock)
        ));
    }

    #[test]
    fn block_choice_breaks_ties_low() {
        let mu = alloc::vec![0.5; 12];
        let lengths = alloc::vec![0.1, 0.1, 0.1, 0.3, 0.3, 0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1];
        let p = block_partition(&mu, Some(&lengths), BlockVariant::MaxLength, 3).unwrap();
        assert_eq!(p.starts, alloc::vec![2, 4, 6, 8]);
        assert_eq!(p.chosen, alloc::vec![2, 4, 6]);
    }

    #[test]
    fn min_mu_variant_uses_length_sums() {
        let lengths = alloc::vec![0.4; 20];
        let mu: alloc::vec::Vec<f64> = (1..=20).map(|n| 1.0 / (n as f64 + 1.0)).collect();
        let p = block_partition(&mu, Some(&lengths), BlockVariant::MinMu, 3).unwrap();
        assert_eq!(p.starts, alloc::vec![3, 5, 8, 10]);
        for k in 0..3 {
            assert!(p.starts[k] <= p.chosen[k] && p.chosen[k] < p.starts[k + 1]);
        }
        let bad = alloc::vec![1.0; 20];
        assert!(block_partition(&mu, Some(&bad), BlockVariant::MinMu, 3).is_err());
    }

    #[test]
    fn block_of_two_halves() {
        let seq = nested_with(alloc::vec![0.5, 0.5]);
        let g = compose_range(&seq, 1, 2).unwrap();
        assert_abs_diff_eq!(g.derivative_at_zero, 0.25, epsilon = 1e-15);
        assert!(g.derivative_at_zero <= 1.0 / E);
        assert!(matches!(compose_range(&seq, 2, 1), Err(Error::EmptyBlock)));
    }

    #[test]
    fn block_compose_rejects_uncentred_maps() {
        let seq = Autonomous(Blaschke::parabolic().into());
        let mu = alloc::vec![0.6; 10];
        let p = block_partition(&mu, None, BlockVariant::MaxLength, 2).unwrap();
        assert!(matches!(block_compose(&seq, &p), Err(Error::NotCentered { n: 1, .. })));
    }
}
