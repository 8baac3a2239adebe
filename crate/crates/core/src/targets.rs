//! Target sequences and the paired map systems of the worked examples.
//!
//! Every constructor is pure: a system is a recipe `n ↦ (f_n, I_n)` and
//! querying the same index twice yields identical values.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::circle::{Angle, Arc, ArcUnion};
use crate::compose::MapSequence;
use crate::disk::{Blaschke, DiskMap, InnerFunction, Mobius};
use crate::error::{Error, Result};
use crate::math::{self, Modulus};

/// A real sequence `n ↦ x_n`, `n >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum RealSequence {
    Constant(f64),
    /// `scale · n^{-exponent}`.
    PowerLaw {
        scale: f64,
        exponent: f64,
    },
    /// `min(cap, 1/(√n · ln(n+1)))`.
    CappedLogRoot {
        cap: f64,
    },
    /// `1 / ln(n + shift)`.
    InverseLog {
        shift: f64,
    },
    /// Explicit values; `values[0]` is `x_1`.
    Table(Vec<f64>),
}

impl RealSequence {
    /// `min(1/2, 1/(√n ln(n+1)))`, used for both `μ_n` and `l_n` by default.
    pub fn default_family() -> Self {
        RealSequence::CappedLogRoot { cap: 0.5 }
    }

    pub fn value(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("sequences start at n = 1".into()));
        }
        let x = n as f64;
        Ok(match self {
            RealSequence::Constant(c) => *c,
            RealSequence::PowerLaw { scale, exponent } => scale * math::pow(x, -exponent),
            RealSequence::CappedLogRoot { cap } => cap.min(1.0 / (math::sqrt(x) * math::ln(x + 1.0))),
            RealSequence::InverseLog { shift } => 1.0 / math::ln(x + shift),
            RealSequence::Table(v) => *v.get(n - 1).ok_or(Error::HorizonExceeded { n, horizon: v.len() })?,
        })
    }

    pub fn horizon(&self) -> Option<usize> {
        match self {
            RealSequence::Table(v) => Some(v.len()),
            _ => None,
        }
    }

    /// `x_1, …, x_n`.
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        (1..=n).map(|k| self.value(k)).collect()
    }
}

/// A target: `n ↦ I_n` (an arc, or nothing).
#[derive(Clone, Debug, PartialEq)]
pub enum TargetSequence {
    /// Arcs with a common centre and prescribed lengths.
    Nested {
        center: Angle,
        lengths: RealSequence,
    },
    /// The same arc at every index.
    Fixed(Arc),
    /// `I_n = {e^{iθ} : π <= θ <= π + π/m}` where `n` flattens `(m, k)`.
    RotationTargets,
    /// Explicit arcs; `arcs[0]` is `I_1`.
    Table(Vec<Arc>),
    Empty,
}

/// Finite-sample reading of whether `|I_n|` shrinks; never a statement about the limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShrinkingEvidence {
    pub first_length: f64,
    pub last_length: f64,
    pub non_increasing: bool,
}

impl TargetSequence {
    pub fn arc(&self, n: usize) -> Result<Option<Arc>> {
        if n == 0 {
            return Err(Error::InvalidParameter("targets start at n = 1".into()));
        }
        Ok(match self {
            TargetSequence::Nested { center, lengths } => {
                let l = lengths.value(n)?;
                if !(l > 0.0) {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "target length at n = {n} is {l}, must be positive"
                    )));
                }
                Some(Arc::centered(*center, l)?)
            }
            TargetSequence::Fixed(a) => Some(*a),
            TargetSequence::RotationTargets => {
                let (m, _) = rotation_index(n);
                Some(Arc::from_endpoints(PI, PI + PI / m as f64))
            }
            TargetSequence::Table(v) => Some(*v.get(n - 1).ok_or(Error::HorizonExceeded { n, horizon: v.len() })?),
            TargetSequence::Empty => None,
        })
    }

    pub fn length(&self, n: usize) -> Result<f64> {
        Ok(self.arc(n)?.map_or(0.0, |a| a.length()))
    }

    pub fn horizon(&self) -> Option<usize> {
        match self {
            TargetSequence::Nested { lengths, .. } => lengths.horizon(),
            TargetSequence::Table(v) => Some(v.len()),
            _ => None,
        }
    }

    /// Cumulative sums `Σ_{k<=n} |I_k|` for `n = 1..=n_max`.
    pub fn prefix_lengths(&self, n_max: usize) -> Result<Vec<f64>> {
        let mut acc = 0.0;
        (1..=n_max)
            .map(|n| {
                acc += self.length(n)?;
                Ok(acc)
            })
            .collect()
    }

    pub fn shrinking_evidence(&self, n_max: usize) -> Result<ShrinkingEvidence> {
        let lengths: Vec<f64> = (1..=n_max.max(1)).map(|n| self.length(n)).collect::<Result<_>>()?;
        Ok(ShrinkingEvidence {
            first_length: lengths[0],
            last_length: *lengths.last().expect("at least one length"),
            non_increasing: lengths.windows(2).all(|w| w[1] <= w[0]),
        })
    }
}

/// Arcs of the given lengths centred at `center`.
pub fn nested_target(center: Angle, lengths: RealSequence) -> Result<TargetSequence> {
    let check = match lengths.horizon() {
        Some(h) => lengths.values(h)?,
        None => alloc::vec![lengths.value(1)?],
    };
    if let Some((i, l)) = check
        .iter()
        .enumerate()
        .find(|(_, l)| !(**l > 0.0 && **l <= core::f64::consts::TAU))
    {
        return Err(Error::InvalidParameter(alloc::format!(
            "target length l_{} = {l} outside (0, 2π]",
            i + 1
        )));
    }
    Ok(TargetSequence::Nested { center, lengths })
}

/// `(m, k)` with `n = m(m-1)/2 + 1 + k`, `0 <= k < m`.
pub fn rotation_index(n: usize) -> (usize, usize) {
    assert!(n >= 1, "flat indices start at 1");
    let t = (n - 1) as u64;
    // largest m with m(m-1)/2 <= t
    let mut m = ((1.0 + math::sqrt(1.0 + 8.0 * t as f64)) / 2.0) as u64;
    while m * (m - 1) / 2 > t {
        m -= 1;
    }
    while (m + 1) * m / 2 <= t {
        m += 1;
    }
    (m as usize, (t - m * (m - 1) / 2) as usize)
}

pub fn flat_index(m: usize, k: usize) -> usize {
    debug_assert!(k < m);
    m * (m - 1) / 2 + 1 + k
}

/// Rotation angle `π(k+1)/m` of `F_n`.
pub fn rotation_angle(n: usize) -> f64 {
    let (m, k) = rotation_index(n);
    PI * (k + 1) as f64 / m as f64
}

/// `a = cos(l/2)/(1 + sin(l/2))`: the involution `z ↦ (a - z)/(1 - a z)`
/// sends the arc of length `l` centred at 1 onto the left half-circle.
pub fn mobius_for_arc(l: f64) -> Result<f64> {
    if !(l > 0.0 && l <= PI) {
        return Err(Error::InvalidParameter(alloc::format!("arc length {l} outside (0, π]")));
    }
    let (s, c) = math::sin_cos(0.5 * l);
    let a = (c / (1.0 + s)).max(0.0);
    let m = arc_involution(a);
    let image = m.apply(Angle::new(0.5 * l).point());
    // evaluation near the pole at 1/a loses digits in proportion to 1/(1 - a)
    let tol = 1e-12 + 64.0 * f64::EPSILON / (1.0 - a);
    if (image - Complex64::new(0.0, -1.0)).modulus() > tol {
        return Err(Error::Postcondition(alloc::format!(
            "M(e^(il/2)) = {image} is not -i for l = {l}"
        )));
    }
    Ok(a)
}

/// `z ↦ (a - z)/(1 - a z)` for real `a ∈ [0, 1)`; its own inverse.
pub fn arc_involution(a: f64) -> Mobius {
    Mobius::new(Complex64::new(-a, 0.0), Complex64::new(-1.0, 0.0)).expect("a in [0, 1) gives an automorphism")
}

/// `{e^{it} : π/2 <= t <= 3π/2}`.
pub fn left_half_circle() -> Arc {
    Arc::new(Angle::new(PI), FRAC_PI_2).expect("valid arc")
}

/// The maps of an example system.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemMaps {
    Autonomous(DiskMap),
    /// `f_n = R_n ∘ R_{n-1}⁻¹` so that `F_n = R_n`.
    Rotations,
    /// `b_n(z) = z (z + λ_n)/(1 + λ_n z)`, `λ_n = 1 - μ_n`.
    Nested {
        mu: RealSequence,
    },
    /// `f_n = M_n ∘ b_n ∘ M_{n-1}⁻¹`, `M_n` the involution for an arc of length `arc_lengths_n`.
    Conjugated {
        mu: RealSequence,
        arc_lengths: RealSequence,
    },
    Table(Vec<DiskMap>),
}

impl SystemMaps {
    fn nested_map(mu: &RealSequence, n: usize) -> Result<Blaschke> {
        Blaschke::nested(1.0 - mu.value(n)?)
    }

    fn involution(arc_lengths: &RealSequence, n: usize) -> Result<Mobius> {
        if n == 0 {
            return Ok(Mobius::identity());
        }
        Ok(arc_involution(mobius_for_arc(arc_lengths.value(n)?)?))
    }
}

impl MapSequence for SystemMaps {
    fn map(&self, n: usize) -> Result<DiskMap> {
        if n == 0 {
            return Err(Error::InvalidParameter("maps start at n = 1".into()));
        }
        match self {
            SystemMaps::Autonomous(f) => Ok(f.clone()),
            SystemMaps::Rotations => {
                let prev = if n == 1 { 0.0 } else { rotation_angle(n - 1) };
                Ok(DiskMap::rotation(rotation_angle(n) - prev))
            }
            SystemMaps::Nested { mu } => Ok(SystemMaps::nested_map(mu, n)?.into()),
            SystemMaps::Conjugated { mu, arc_lengths } => {
                let prev = SystemMaps::involution(arc_lengths, n - 1)?;
                let cur = SystemMaps::involution(arc_lengths, n)?;
                let b = SystemMaps::nested_map(mu, n)?;
                let mut chain = Vec::with_capacity(3);
                if n > 1 {
                    chain.push(prev.inverse().into());
                }
                chain.push(b.into());
                chain.push(cur.into());
                Ok(DiskMap::Chain(chain))
            }
            SystemMaps::Table(v) => v
                .get(n - 1)
                .cloned()
                .ok_or(Error::HorizonExceeded { n, horizon: v.len() }),
        }
    }

    fn horizon(&self) -> Option<usize> {
        match self {
            SystemMaps::Nested { mu } => mu.horizon(),
            SystemMaps::Conjugated { mu, arc_lengths } => match (mu.horizon(), arc_lengths.horizon()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            SystemMaps::Table(v) => Some(v.len()),
            _ => None,
        }
    }

    fn constant_map(&self) -> Option<DiskMap> {
        match self {
            SystemMaps::Autonomous(f) => Some(f.clone()),
            _ => None,
        }
    }
}

/// The behaviour the theory predicts for a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    HitsAlmostEverywhere,
    FailsAlmostEverywhere,
    /// Hits on one positive-measure set and fails on another.
    Split,
    DenjoyWolffFullMeasure,
    DenseOrbitsAlmostEverywhere,
    /// No verdict is claimed.
    Exploratory,
}

/// A map sequence paired index-for-index with a target.
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleSystem {
    pub name: &'static str,
    pub maps: SystemMaps,
    pub target: TargetSequence,
    pub verdict: Verdict,
    /// The statement the system illustrates.
    pub claim: &'static str,
    pub notes: Vec<String>,
}

impl ExampleSystem {
    /// A system with no particular verdict.
    pub fn custom(maps: SystemMaps, target: TargetSequence) -> Self {
        ExampleSystem {
            name: "custom",
            maps,
            target,
            verdict: Verdict::Exploratory,
            claim: "user-defined system",
            notes: Vec::new(),
        }
    }

    pub fn horizon(&self) -> Option<usize> {
        match (self.maps.horizon(), self.target.horizon()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

impl MapSequence for ExampleSystem {
    fn map(&self, n: usize) -> Result<DiskMap> {
        self.maps.map(n)
    }

    fn horizon(&self) -> Option<usize> {
        ExampleSystem::horizon(self)
    }

    fn constant_map(&self) -> Option<DiskMap> {
        self.maps.constant_map()
    }
}

/// Rotations `R_{m,k}(z) = e^{πi(k+1)/m} z` against `I_m = [π, π + π/m]`, for all `m <= max_m`.
pub fn ex_rotations(max_m: usize) -> Result<ExampleSystem> {
    if max_m == 0 {
        return Err(Error::InvalidParameter("need at least one rotation block".into()));
    }
    let horizon = max_m * (max_m + 1) / 2;
    let mut notes = Vec::new();
    notes.push(alloc::format!("flat horizon n <= {horizon}"));
    Ok(ExampleSystem {
        name: "ex-rotations",
        maps: SystemMaps::Rotations,
        target: TargetSequence::RotationTargets,
        verdict: Verdict::Split,
        claim: "R_n(e^{iθ}) hits (I_n) for 0 <= θ <= π and fails to hit for π < θ < 2π",
        notes,
    })
}

fn check_hypothesis(values: &[f64], name: &str, ok: impl Fn(f64) -> bool, rule: &str) -> Result<()> {
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !ok(**v)) {
        return Err(Error::Hypothesis(alloc::format!(
            "{name}_{} = {v} violates {rule}",
            i + 1
        )));
    }
    Ok(())
}

fn check_nested_hypotheses(mu: &RealSequence, lengths: &RealSequence, horizon: usize) -> Result<()> {
    let m = mu.values(horizon)?;
    let l = lengths.values(horizon)?;
    check_hypothesis(&m, "mu", |x| x > 0.0 && x <= 0.5, "0 < mu_n <= 1/2")?;
    check_hypothesis(&l, "l", |x| x > 0.0 && x <= 0.5, "0 < l_n <= 1/2")?;
    if let Some(i) = l.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::Hypothesis(alloc::format!(
            "l_{} = {} > l_{} = {}: lengths must be non-increasing",
            i + 2,
            l[i + 1],
            i + 1,
            l[i]
        )));
    }
    Ok(())
}

/// `b_n` with `λ_n = 1 - μ_n` against nested arcs at 1 of length `l_n`.
///
/// Hypotheses are checked on `n <= horizon`.
pub fn ex_nested_blaschke(mu: RealSequence, lengths: RealSequence, horizon: usize) -> Result<ExampleSystem> {
    check_nested_hypotheses(&mu, &lengths, horizon)?;
    let target = nested_target(Angle::ZERO, lengths)?;
    Ok(ExampleSystem {
        name: "ex-nested",
        maps: SystemMaps::Nested { mu },
        target,
        verdict: Verdict::FailsAlmostEverywhere,
        claim: "|∪_{n>=N} B_n^{-1}(I_n)| <= 2 Σ_{n>=N} μ_n |I_n| + |I_N| =: ε_N",
        notes: alloc::vec!["fails to hit (I_n) for almost every ζ".into()],
    })
}

/// The two preimage branches of a nested-arc step: `J_n` around 1 and `K_n` around -1.
#[derive(Clone, Debug)]
pub struct BranchSplit {
    pub j: ArcUnion,
    pub k: ArcUnion,
}

/// Splits `b_n⁻¹(I_n)` for a nested system.
pub fn nested_branches(system: &ExampleSystem, n: usize) -> Result<BranchSplit> {
    let b = system.maps.map(n)?;
    let arc = system
        .target
        .arc(n)?
        .ok_or_else(|| Error::InvalidParameter("system has no target".into()))?;
    let pre = b.arc_preimage(&arc)?;
    let (mut j, mut k) = (Vec::new(), Vec::new());
    for a in pre.arcs() {
        if a.contains(Angle::ZERO) {
            j.push(a);
        } else if a.contains(Angle::new(PI)) {
            k.push(a);
        } else {
            return Err(Error::Postcondition(alloc::format!(
                "preimage arc {a:?} contains neither 1 nor -1"
            )));
        }
    }
    Ok(BranchSplit {
        j: ArcUnion::from_arcs(j),
        k: ArcUnion::from_arcs(k),
    })
}

/// `ε_N = 2 Σ_{n>=N} μ_n l_n + l_N`, evaluated as an exact partial sum plus a tail bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonBound {
    pub n: usize,
    /// `Σ_{N<=n<partial_to} μ_n l_n`.
    pub partial_sum: f64,
    pub partial_to: usize,
    /// Upper bound for `Σ_{n>=partial_to} μ_n l_n` when one is known in closed form.
    pub tail_bound: Option<f64>,
    pub value: f64,
}

pub fn epsilon_bound(mu: &RealSequence, lengths: &RealSequence, n: usize, partial_to: usize) -> Result<EpsilonBound> {
    if n == 0 || partial_to <= n {
        return Err(Error::InvalidParameter("need 1 <= N < partial_to".into()));
    }
    let mut partial_sum = 0.0;
    for k in n..partial_to {
        partial_sum += mu.value(k)? * lengths.value(k)?;
    }
    let tail_bound = tail_of_product(mu, lengths, partial_to);
    let value = 2.0 * (partial_sum + tail_bound.unwrap_or(0.0)) + lengths.value(n)?;
    Ok(EpsilonBound {
        n,
        partial_sum,
        partial_to,
        tail_bound,
        value,
    })
}

// Σ_{k>=from} μ_k l_k <= ∫_{from-1}^∞ of a decreasing majorant.
fn tail_of_product(mu: &RealSequence, lengths: &RealSequence, from: usize) -> Option<f64> {
    let x = (from - 1) as f64;
    match (mu, lengths) {
        (RealSequence::CappedLogRoot { .. }, RealSequence::CappedLogRoot { .. }) if x > 2.0 => {
            // μ_k l_k <= 1/(k ln² k), whose integral from x is 1/ln x
            Some(1.0 / math::ln(x))
        }
        (
            RealSequence::PowerLaw {
                scale: s1,
                exponent: p1,
            },
            RealSequence::PowerLaw {
                scale: s2,
                exponent: p2,
            },
        ) if p1 + p2 > 1.0 && x >= 1.0 => {
            let p = p1 + p2;
            Some(s1 * s2 * math::pow(x, 1.0 - p) / (p - 1.0))
        }
        (RealSequence::Table(a), _) | (_, RealSequence::Table(a)) if a.len() < from => Some(0.0),
        _ => None,
    }
}

/// Breakpoints `1 = n_0 < n_1 < ⋯ < n_K` and lengths `l_n = 1/(n_{k+1} - n_k)` on `[n_k, n_{k+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthConstruction {
    pub breakpoints: Vec<usize>,
    /// `lengths[i]` is `l_{i+1}`, defined for `n < n_K`.
    pub lengths: Vec<f64>,
    pub mu_at_breakpoints_sum: f64,
}

impl LengthConstruction {
    pub fn blocks(&self) -> usize {
        self.breakpoints.len() - 1
    }
}

/// Builds lengths `l_n` from a null sequence `μ_n` so that `Σ l_n` diverges
/// block by block while `Σ μ_n l_n` stays below `cap`.
///
/// Greedy rule: `n_k` is the least index past `n_{k-1}` whose gap strictly
/// exceeds the previous gap, with `μ_{n_k} >= μ_n` for all `n_k <= n <= horizon`,
/// and with `μ_{n_k} <= cap · 2^{-k}`. `n_1 >= 3` keeps every `l_n <= 1/2`.
pub fn ex_lengths_from_mu(mu: &RealSequence, horizon: usize, cap: f64) -> Result<LengthConstruction> {
    if !(cap > 0.0) {
        return Err(Error::InvalidParameter("cap must be positive".into()));
    }
    let values = mu.values(horizon)?;
    check_hypothesis(&values, "mu", |x| x > 0.0, "mu_n > 0")?;
    let mut suffix_max = alloc::vec![0.0f64; horizon + 1];
    for i in (0..horizon).rev() {
        suffix_max[i] = values[i].max(suffix_max[i + 1]);
    }
    let mut breakpoints = alloc::vec![1usize];
    let mut prev_gap = 1usize;
    let mut budget = cap;
    let mut total = 0.0;
    loop {
        budget *= 0.5;
        let last = *breakpoints.last().expect("starts at n_0 = 1");
        let from = last + prev_gap + 1;
        let found = (from..=horizon).find(|&n| {
            let v = values[n - 1];
            v >= suffix_max[n - 1] && v <= budget
        });
        match found {
            Some(n) => {
                prev_gap = n - last;
                total += values[n - 1];
                breakpoints.push(n);
            }
            None => break,
        }
    }
    if breakpoints.len() < 3 {
        return Err(Error::InvalidParameter(alloc::format!(
            "horizon {horizon} too short: only {} block(s) could be built",
            breakpoints.len() - 1
        )));
    }
    let end = *breakpoints.last().expect("non-empty");
    let mut lengths = Vec::with_capacity(end - 1);
    for w in breakpoints.windows(2) {
        let l = 1.0 / (w[1] - w[0]) as f64;
        lengths.extend(core::iter::repeat_n(l, w[1] - w[0]));
    }
    let out = LengthConstruction {
        breakpoints,
        lengths,
        mu_at_breakpoints_sum: total,
    };
    verify_length_construction(&out, &values, cap)?;
    Ok(out)
}

fn verify_length_construction(c: &LengthConstruction, mu: &[f64], cap: f64) -> Result<()> {
    let fail = |msg: String| Err(Error::Postcondition(msg));
    let b = &c.breakpoints;
    for w in b.windows(3) {
        if w[2] - w[1] <= w[1] - w[0] {
            return fail(alloc::format!("gaps not strictly increasing at {w:?}"));
        }
    }
    for &n in &b[1..] {
        if mu[n - 1..].iter().any(|&v| v > mu[n - 1]) {
            return fail(alloc::format!("mu_{n} is not a running maximum"));
        }
    }
    if !(c.mu_at_breakpoints_sum < cap) {
        return fail(alloc::format!(
            "sum of mu at breakpoints {} >= cap {cap}",
            c.mu_at_breakpoints_sum
        ));
    }
    if c.lengths.windows(2).any(|w| w[1] > w[0]) {
        return fail("lengths are not non-increasing".into());
    }
    for w in b.windows(2) {
        let s: f64 = c.lengths[w[0] - 1..w[1] - 1].iter().sum();
        if math::abs(s - 1.0) > 1e-9 {
            return fail(alloc::format!("block [{}, {}) sums to {s}", w[0], w[1]));
        }
    }
    Ok(())
}

/// `M_n ∘ b_n ∘ M_{n-1}⁻¹` with `M_n(I_n) = I` (the left half-circle); fixed target `I`.
pub fn ex_conjugated(mu: RealSequence, lengths: RealSequence, horizon: usize) -> Result<ExampleSystem> {
    check_nested_hypotheses(&mu, &lengths, horizon)?;
    Ok(ExampleSystem {
        name: "ex-conjugated",
        maps: SystemMaps::Conjugated {
            mu,
            arc_lengths: lengths,
        },
        target: TargetSequence::Fixed(left_half_circle()),
        verdict: Verdict::FailsAlmostEverywhere,
        claim: "f_n = M_n ∘ b_n ∘ M_{n-1}^{-1}: F_n(ζ) ∈ I at most finitely often for almost every ζ",
        notes: alloc::vec![
            "F_n(0) = M_n(0) = a_n is real and positive".into(),
            "sum (1 - |F_n(0)|) diverges while sum mu_n (1 - |F_n(0)|) converges".into(),
        ],
    })
}

/// `a_n = F_n(0)` of the conjugated system, for `n = 1..=horizon`.
pub fn conjugated_interior_orbit(lengths: &RealSequence, horizon: usize) -> Result<Vec<f64>> {
    (1..=horizon).map(|n| mobius_for_arc(lengths.value(n)?)).collect()
}

/// Like [`ex_conjugated`] but the Möbius maps are built from the shrunken arcs
/// of length `l_n / t_n`, `t_n = l_1 + ⋯ + l_n`. The target is `M̃_n(I_n)`.
pub fn ex_rescaled(mu: RealSequence, lengths: RealSequence, horizon: usize) -> Result<ExampleSystem> {
    check_nested_hypotheses(&mu, &lengths, horizon)?;
    let l = lengths.values(horizon)?;
    let mut t = 0.0;
    let mut shrunk = Vec::with_capacity(horizon);
    let mut targets = Vec::with_capacity(horizon);
    for &li in &l {
        t += li;
        let s = li / t;
        shrunk.push(s);
        let m = arc_involution(mobius_for_arc(s)?);
        let original = Arc::centered(Angle::ZERO, li)?;
        targets.push(m.image_arc(&original));
    }
    Ok(ExampleSystem {
        name: "ex-rescaled",
        maps: SystemMaps::Conjugated {
            mu,
            arc_lengths: RealSequence::Table(shrunk),
        },
        target: TargetSequence::Table(targets),
        verdict: Verdict::DenjoyWolffFullMeasure,
        claim: "F~_n(ζ) -> 1 for almost every ζ: the Denjoy-Wolff set has full measure",
        notes: alloc::vec!["arcs ~I_n have length |I_n|/t_n with t_n = |I_1| + ... + |I_n|".into()],
    })
}

/// Iterates of `f(z) = ((z + 1/3)/(1 + z/3))²`; no target.
pub fn ex_parabolic() -> ExampleSystem {
    ExampleSystem {
        name: "ex-parabolic",
        maps: SystemMaps::Autonomous(Blaschke::parabolic().into()),
        target: TargetSequence::Empty,
        verdict: Verdict::DenseOrbitsAlmostEverywhere,
        claim: "1 - f^n(0) ~ n^{-1/2} and mu_n ~ 1/n; almost all boundary orbits are dense",
        notes: alloc::vec!["f(1) = 1, f'(1) = 1: parabolic fixed point".into()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::CompositionState;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::TAU;

    #[test]
    fn constant_lengths_give_identical_arcs() {
        let t = nested_target(Angle::new(1.0), RealSequence::Constant(1.0)).unwrap();
        assert_eq!(t.arc(1).unwrap(), t.arc(77).unwrap());
    }

    #[test]
    fn harmonic_prefix_sum() {
        let t = nested_target(
            Angle::ZERO,
            RealSequence::PowerLaw {
                scale: 1.0,
                exponent: 1.0,
            },
        )
        .unwrap();
        let p = t.prefix_lengths(3).unwrap();
        assert_abs_diff_eq!(p[2], 11.0 / 6.0, epsilon = 1e-15);
        assert!(t.shrinking_evidence(50).unwrap().non_increasing);
    }

    #[test]
    fn default_family_length_at_1000() {
        let t = nested_target(Angle::ZERO, RealSequence::default_family()).unwrap();
        // direct evaluation: 1/(√1000 ln 1001) = 0.0045772035065...
        assert_abs_diff_eq!(t.length(1000).unwrap(), 0.004_577_203_506_536_697, epsilon = 1e-15);
        assert_eq!(t.length(1).unwrap(), 0.5);
    }

    #[test]
    fn nonpositive_lengths_rejected() {
        assert!(nested_target(Angle::ZERO, RealSequence::Constant(0.0)).is_err());
        assert!(nested_target(Angle::ZERO, RealSequence::Table(alloc::vec![0.3, -0.1])).is_err());
    }

    #[test]
    fn rotation_index_round_trip() {
        assert_eq!(rotation_index(1), (1, 0));
        assert_eq!(rotation_index(2), (2, 0));
        assert_eq!(rotation_index(3), (2, 1));
        assert_eq!(rotation_index(4), (3, 0));
        for n in (1..=10_000_000usize).step_by(997).chain([9_999_999, 10_000_000]) {
            let (m, k) = rotation_index(n);
            assert!(k < m);
            assert_eq!(flat_index(m, k), n);
        }
    }

    #[test]
    fn rotation_system_first_terms() {
        let s = ex_rotations(10).unwrap();
        assert_abs_diff_eq!(rotation_angle(1), PI);
        let i1 = s.target.arc(1).unwrap().unwrap();
        assert!(i1.start().distance(Angle::new(PI)) < 1e-15);
        assert_abs_diff_eq!(i1.length(), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(rotation_angle(2), FRAC_PI_2);
        let i2 = s.target.arc(2).unwrap().unwrap();
        assert!(i2.end().distance(Angle::new(1.5 * PI)) < 1e-15);
    }

    #[test]
    fn rotations_map_sub_arcs_onto_targets() {
        // every θ in [0, π] lies in some I_{m,k} with R_{m,k}(θ) ∈ I_m
        let max_m = 60;
        for i in 0..=200 {
            let theta = PI * i as f64 / 200.0;
            for m in 1..=max_m {
                let k = (0..m).find(|&k| {
                    let lo = PI - PI * (k + 1) as f64 / m as f64;
                    let hi = PI - PI * k as f64 / m as f64;
                    theta >= lo - 1e-12 && theta <= hi + 1e-12
                });
                let k = k.expect("sub-arcs cover [0, π]");
                let n = flat_index(m, k);
                let image = Angle::new(theta + rotation_angle(n));
                let target = TargetSequence::RotationTargets.arc(n).unwrap().unwrap();
                assert!(target.contains(image), "θ = {theta}, m = {m}, k = {k}");
            }
        }
    }

    #[test]
    fn nested_system_fixes_plus_minus_one() {
        let s = ex_nested_blaschke(RealSequence::default_family(), RealSequence::default_family(), 1000).unwrap();
        for n in [1, 2, 10, 500] {
            let b = s.map(n).unwrap();
            assert!(b.boundary_map(Angle::ZERO).distance(Angle::ZERO) < 1e-14);
            assert!(b.boundary_map(Angle::new(PI)).distance(Angle::ZERO) < 1e-12);
        }
    }

    #[test]
    fn nested_hypotheses_are_named() {
        let err = ex_nested_blaschke(RealSequence::Constant(0.7), RealSequence::default_family(), 10).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(ref m) if m.contains("mu_1")));
        let err = ex_nested_blaschke(
            RealSequence::Constant(0.1),
            RealSequence::Table(alloc::vec![0.2, 0.3]),
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Hypothesis(ref m) if m.contains("non-increasing")));
    }

    #[test]
    fn second_branch_is_small() {
        let s = ex_nested_blaschke(RealSequence::default_family(), RealSequence::default_family(), 20).unwrap();
        for n in 1..=20 {
            let split = nested_branches(&s, n).unwrap();
            let mu = RealSequence::default_family().value(n).unwrap();
            let l = s.target.length(n).unwrap();
            assert!(split.k.measure() <= 2.0 * mu * l + 1e-9, "n = {n}");
            assert_abs_diff_eq!(split.j.measure() + split.k.measure(), l, epsilon = 1e-10);
        }
    }

    #[test]
    fn epsilon_for_default_family() {
        let f = RealSequence::default_family();
        let eps = epsilon_bound(&f, &f, 1000, 10_000_000).unwrap();
        // numpy: partial 0.0827288907057, tail 1/ln(1e7 - 1)
        assert_abs_diff_eq!(eps.value, 0.294_119, epsilon = 2e-6);
        assert_abs_diff_eq!(eps.value / TAU, 0.0468, epsilon = 1e-4);
        assert!(eps.tail_bound.is_some());
    }

    #[test]
    fn lengths_from_inverse_log_mu() {
        let mu = RealSequence::InverseLog { shift: 2.0 };
        let c = ex_lengths_from_mu(&mu, 100_000, 1.0).unwrap();
        assert_eq!(c.breakpoints, alloc::vec![1, 6, 53, 2979]);
        assert!(c.lengths.windows(2).all(|w| w[1] <= w[0]));
        assert!(*c.lengths.last().unwrap() < 1e-3);
        let values = mu.values(100_000).unwrap();
        for w in c.breakpoints.windows(2).skip(1) {
            let block: f64 = (w[0]..w[1]).map(|n| values[n - 1] * c.lengths[n - 1]).sum();
            assert!(block <= values[w[0] - 1] + 1e-15);
        }
    }

    #[test]
    fn lengths_need_two_blocks() {
        let mu = RealSequence::InverseLog { shift: 2.0 };
        assert!(ex_lengths_from_mu(&mu, 20, 1.0).is_err());
    }

    #[test]
    fn mobius_for_arc_geometry() {
        assert_abs_diff_eq!(mobius_for_arc(PI).unwrap(), 0.0, epsilon = 1e-15);
        let m = arc_involution(0.0);
        assert_abs_diff_eq!(
            (m.apply(Complex64::new(0.3, 0.2)) + Complex64::new(0.3, 0.2)).norm(),
            0.0,
            epsilon = 1e-15
        );
        for l in [1e-6, 1e-3, 0.1, 1.0, 2.0, 3.0] {
            let a = mobius_for_arc(l).unwrap();
            let s = math::sin(0.5 * l);
            assert_abs_diff_eq!(s * (1.0 + a * a), 1.0 - a * a, epsilon = 1e-12);
            let m = arc_involution(a);
            let image = m.image_arc(&Arc::centered(Angle::ZERO, l).unwrap());
            let half = left_half_circle();
            assert!(image.start().distance(half.start()) < 1e-9);
            assert!(image.end().distance(half.end()) < 1e-9);
        }
        let l = 1e-5;
        assert_abs_diff_eq!((1.0 - mobius_for_arc(l).unwrap()) / (0.5 * l), 1.0, epsilon = 1e-4);
        assert!(mobius_for_arc(0.0).is_err());
        assert!(mobius_for_arc(3.2).is_err());
    }

    #[test]
    fn conjugated_orbit_is_real_positive_and_distortion_is_lambda() {
        let f = RealSequence::default_family();
        let s = ex_conjugated(f.clone(), f.clone(), 200).unwrap();
        let state = CompositionState::new().advance(&s, 200).unwrap();
        let a = conjugated_interior_orbit(&f, 200).unwrap();
        for n in 1..=200 {
            let z = state.orbit()[n];
            assert!(z.re > 0.0);
            assert!(z.im.abs() < 1e-12);
            assert_abs_diff_eq!(z.re, a[n - 1], epsilon = 1e-12);
            assert_abs_diff_eq!(state.lambdas()[n - 1], 1.0 - f.value(n).unwrap(), epsilon = 1e-10);
        }
        assert!(a.windows(2).skip(1).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rescaled_first_arc_and_expansion() {
        let f = RealSequence::default_family();
        let s = ex_rescaled(f.clone(), f.clone(), 1000).unwrap();
        match &s.maps {
            SystemMaps::Conjugated { arc_lengths, .. } => {
                assert_abs_diff_eq!(arc_lengths.value(1).unwrap(), 1.0, epsilon = 1e-15);
                let sum: f64 = arc_lengths.values(1000).unwrap().iter().sum();
                let half: f64 = arc_lengths.values(500).unwrap().iter().sum();
                assert!(sum > half + 0.1);
            }
            _ => unreachable!(),
        }
        // M~_n(I_n) is centred at -1 and grows towards the circle minus {1}
        let early = s.target.length(10).unwrap();
        let late = s.target.length(1000).unwrap();
        assert!(late > early);
        assert!(late > 0.8 * TAU);
        let last = s.target.arc(1000).unwrap().unwrap();
        assert!(last.contains(Angle::new(PI)));
        assert!(!last.contains(Angle::ZERO));
    }

    #[test]
    fn parabolic_system() {
        let s = ex_parabolic();
        let f = s.map(7).unwrap();
        assert_abs_diff_eq!(f.eval(Complex64::new(0.0, 0.0)).unwrap().re, 1.0 / 9.0, epsilon = 1e-16);
        assert_eq!(s.target.arc(3).unwrap(), None);
    }

    #[test]
    fn systems_are_pure() {
        let f = RealSequence::default_family();
        let s = ex_conjugated(f.clone(), f, 50).unwrap();
        assert_eq!(s.map(17).unwrap(), s.map(17).unwrap());
        assert_eq!(s.target.arc(17).unwrap(), s.target.arc(17).unwrap());
    }
}
