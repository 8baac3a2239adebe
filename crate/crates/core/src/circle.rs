//! Angles, closed arcs and finite unions of arcs on the unit circle.
//!
//! Arcs are closed: both endpoints are members, and a zero-length arc contains
//! exactly its centre. An [`ArcUnion`] keeps its members pairwise disjoint;
//! arcs that overlap or touch (within [`ANGLE_TOL`]) are merged on
//! construction, so `measure` is always the plain sum of member lengths.
//!
//! Internally a union is stored as sorted, disjoint closed intervals of
//! `[0, 2π]`; an arc crossing the angle 0 is held as two intervals and
//! reassembled by [`ArcUnion::arcs`].

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{self, Modulus};

/// Absolute tolerance for every angle comparison in the crate.
pub const ANGLE_TOL: f64 = 1e-12;

/// An angle in radians, reduced to `[0, 2π)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(theta: f64) -> Self {
        Angle(math::reduce_angle(theta))
    }

    /// Argument of a non-zero complex number.
    pub fn of_point(z: Complex64) -> Self {
        Angle::new(math::atan2(z.im, z.re))
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// The point `e^{iθ}`.
    #[inline]
    pub fn point(self) -> Complex64 {
        let (s, c) = math::sin_cos(self.0);
        Complex64::new(c, s)
    }

    /// Unsigned angular distance, in `[0, π]`.
    pub fn distance(self, other: Angle) -> f64 {
        math::abs(math::signed_delta(self.0, other.0))
    }

    pub fn rotate(self, by: f64) -> Angle {
        Angle::new(self.0 + by)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A closed arc `{e^{it} : |t - center| <= half_length}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    center: Angle,
    half_length: f64,
}

impl Arc {
    pub fn new(center: Angle, half_length: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&half_length) {
            return Err(Error::InvalidParameter(alloc::format!(
                "arc half-length {half_length} outside [0, π]"
            )));
        }
        Ok(Arc { center, half_length })
    }

    /// Arc centred at `center` with total length `length` (clamped to `[0, 2π]`).
    pub fn centered(center: Angle, length: f64) -> Result<Self> {
        if !(0.0..=TAU + ANGLE_TOL).contains(&length) {
            return Err(Error::InvalidParameter(alloc::format!(
                "arc length {length} outside [0, 2π]"
            )));
        }
        Arc::new(center, (0.5 * length).min(PI))
    }

    /// Counter-clockwise arc from `start` to `end`, i.e. `{e^{it} : start <= t <= end}`.
    ///
    /// `end - start >= 2π` gives the full circle; otherwise the sweep is
    /// `end - start` reduced into `[0, 2π)`.
    pub fn from_endpoints(start: f64, end: f64) -> Self {
        let sweep = end - start;
        let length = if sweep >= TAU - ANGLE_TOL {
            TAU
        } else {
            math::reduce_angle(sweep)
        };
        Arc {
            center: Angle::new(start + 0.5 * length),
            half_length: 0.5 * length,
        }
    }

    pub fn full() -> Self {
        Arc {
            center: Angle::new(PI),
            half_length: PI,
        }
    }

    pub fn point(at: Angle) -> Self {
        Arc {
            center: at,
            half_length: 0.0,
        }
    }

    #[inline]
    pub fn center(&self) -> Angle {
        self.center
    }

    #[inline]
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    #[inline]
    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn is_full(&self) -> bool {
        self.half_length >= PI - ANGLE_TOL
    }

    /// Counter-clockwise start point.
    pub fn start(&self) -> Angle {
        Angle::new(self.center.0 - self.half_length)
    }

    /// Counter-clockwise end point.
    pub fn end(&self) -> Angle {
        Angle::new(self.center.0 + self.half_length)
    }

    /// Closed membership, wraparound-correct.
    #[inline]
    pub fn contains(&self, p: Angle) -> bool {
        self.center.distance(p) <= self.half_length + ANGLE_TOL
    }

    /// Membership for a point on the unit circle given as a complex number.
    #[inline]
    pub fn contains_point(&self, z: Complex64) -> bool {
        self.contains(Angle::of_point(z))
    }

    /// Pieces of the arc as closed intervals of `[0, 2π]`.
    fn intervals(&self, out: &mut Vec<(f64, f64)>) {
        if self.is_full() {
            out.push((0.0, TAU));
            return;
        }
        let s = self.start().0;
        let e = s + self.length();
        if e <= TAU {
            out.push((s, e));
        } else {
            out.push((s, TAU));
            out.push((0.0, e - TAU));
        }
    }
}

/// A finite union of pairwise-disjoint closed arcs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArcUnion {
    // sorted, disjoint, non-touching closed intervals of [0, 2π]
    intervals: Vec<(f64, f64)>,
}

impl ArcUnion {
    pub fn empty() -> Self {
        ArcUnion { intervals: Vec::new() }
    }

    pub fn full() -> Self {
        ArcUnion {
            intervals: alloc::vec![(0.0, TAU)],
        }
    }

    pub fn from_arc(arc: Arc) -> Self {
        ArcUnion::from_arcs(core::iter::once(arc))
    }

    /// Normalizes an arbitrary collection of arcs (overlaps and touches are merged).
    pub fn from_arcs<I: IntoIterator<Item = Arc>>(arcs: I) -> Self {
        let mut raw = Vec::new();
        for arc in arcs {
            arc.intervals(&mut raw);
        }
        ArcUnion::from_intervals(raw)
    }

    fn from_intervals(mut raw: Vec<(f64, f64)>) -> Self {
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (s, e) in raw {
            match merged.last_mut() {
                Some(last) if s <= last.1 + ANGLE_TOL => {
                    if e > last.1 {
                        last.1 = e;
                    }
                }
                _ => merged.push((s, e)),
            }
        }
        if let (Some(first), Some(last)) = (merged.first(), merged.last()) {
            if first.0 <= ANGLE_TOL && last.1 >= TAU - ANGLE_TOL {
                if merged.len() == 1 {
                    // a single interval spanning [0, 2π] up to tolerance closes up
                    merged[0] = (0.0, TAU);
                } else {
                    // pieces on either side of the angle 0 form one arc
                    let n = merged.len();
                    merged[0].0 = 0.0;
                    merged[n - 1].1 = TAU;
                }
            }
        }
        ArcUnion { intervals: merged }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.intervals.len() == 1 && self.intervals[0] == (0.0, TAU)
    }

    /// Member arcs, sorted by left endpoint; an arc through the angle 0 comes last.
    pub fn arcs(&self) -> Vec<Arc> {
        if self.is_full() {
            return alloc::vec![Arc::full()];
        }
        let iv = &self.intervals;
        let wraps = iv.len() >= 2 && iv[0].0 == 0.0 && iv[iv.len() - 1].1 == TAU;
        let body = if wraps { &iv[1..iv.len() - 1] } else { &iv[..] };
        let mut out: Vec<Arc> = body.iter().map(|&(s, e)| Arc::from_endpoints(s, e)).collect();
        if wraps {
            let (s, _) = iv[iv.len() - 1];
            let (_, e) = iv[0];
            out.push(Arc::from_endpoints(s, e + TAU));
        }
        out
    }

    /// Number of member arcs.
    pub fn len(&self) -> usize {
        let iv = &self.intervals;
        let wraps = iv.len() >= 2 && iv[0].0 == 0.0 && iv[iv.len() - 1].1 == TAU;
        iv.len() - usize::from(wraps)
    }

    /// Total length in radians, in `[0, 2π]`.
    pub fn measure(&self) -> f64 {
        let m: f64 = self.intervals.iter().map(|(s, e)| e - s).sum();
        m.clamp(0.0, TAU)
    }

    pub fn contains(&self, p: Angle) -> bool {
        let t = p.radians();
        // first interval whose end is >= t - tol
        let idx = self.intervals.partition_point(|&(_, e)| e < t - ANGLE_TOL);
        if let Some(&(s, _)) = self.intervals.get(idx) {
            if s <= t + ANGLE_TOL {
                return true;
            }
        }
        // an angle just below 2π may belong to the interval starting at 0
        if t > TAU - ANGLE_TOL {
            if let Some(&(s, _)) = self.intervals.first() {
                return s <= ANGLE_TOL;
            }
        }
        false
    }

    pub fn union(&self, other: &ArcUnion) -> ArcUnion {
        let mut raw = self.intervals.clone();
        raw.extend_from_slice(&other.intervals);
        ArcUnion::from_intervals(raw)
    }

    pub fn intersection(&self, other: &ArcUnion) -> ArcUnion {
        let (a, b) = (&self.intervals, &other.intervals);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcUnion::from_intervals(out)
    }

    /// Closure of the complement.
    pub fn complement(&self) -> ArcUnion {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = 0.0;
        for &(s, e) in &self.intervals {
            if s - cursor > ANGLE_TOL {
                out.push((cursor, s));
            }
            cursor = e;
        }
        if TAU - cursor > ANGLE_TOL {
            out.push((cursor, TAU));
        }
        ArcUnion::from_intervals(out)
    }
}

/// Harmonic measure of a single arc seen from an interior point `z`.
pub fn harmonic_measure_arc(z: Complex64, arc: &Arc) -> Result<f64> {
    check_interior(z)?;
    Ok(arc_measure_from(z, arc.start().radians(), arc.length()))
}

/// Poisson-kernel measure of `u` seen from `z`; equals `measure(u) / 2π` at the origin.
pub fn harmonic_measure(z: Complex64, u: &ArcUnion) -> Result<f64> {
    check_interior(z)?;
    if u.is_full() {
        return Ok(1.0);
    }
    let total: f64 = u
        .arcs()
        .iter()
        .map(|a| arc_measure_from(z, a.start().radians(), a.length()))
        .sum();
    Ok(total.clamp(0.0, 1.0))
}

fn check_interior(z: Complex64) -> Result<()> {
    let r = z.modulus();
    if r < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk {
            re: z.re,
            im: z.im,
            modulus: r,
        })
    }
}

// The direction from z to e^{it} turns monotonically through the visual
// angle ψ as t sweeps the arc, and ω = ψ/π - L/2π.
fn arc_measure_from(z: Complex64, start: f64, length: f64) -> f64 {
    if length <= 0.0 {
        return 0.0;
    }
    if length >= TAU - ANGLE_TOL {
        return 1.0;
    }
    if length > PI {
        return 1.0 - arc_measure_from(z, start + length, TAU - length);
    }
    let (s0, c0) = math::sin_cos(start);
    let (s1, c1) = math::sin_cos(start + length);
    let q = (Complex64::new(c1, s1) - z) / (Complex64::new(c0, s0) - z);
    let mut psi = math::atan2(q.im, q.re);
    // for L <= π the visual angle lies in (L/2, π + L/2) ⊂ (0, 3π/2)
    if psi < -0.5 * PI {
        psi += TAU;
    }
    (psi / PI - length / TAU).clamp(0.0, 1.0)
}
