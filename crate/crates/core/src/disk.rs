//! Finite Blaschke products, disk automorphisms and chained compositions.
//!
//! Every map here is an inner function that extends analytically across the
//! unit circle. Boundary preimages are computed by inverting the continuous,
//! strictly increasing lift of the boundary map: for a factor
//! `(z - a)/(1 - ā z)` at `z = e^{iθ}` the argument is `θ + 2 arg(1 - a e^{-iθ})`,
//! and `Re(1 - a e^{-iθ}) > 0`, so the principal `atan2` branch is continuous
//! and the lift over `[0, 2π]` gains exactly `2π` per zero.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::circle::{Angle, Arc, ArcUnion};
use crate::error::{Error, Result};
use crate::math::{self, Modulus};

/// Zeros closer than this to the unit circle are rejected.
pub const ZERO_MODULUS_LIMIT: f64 = 1.0 - 1e-9;

/// Angle tolerance for boundary preimage endpoints.
pub const PREIMAGE_TOL: f64 = 1e-10;

/// Largest degree `Blaschke::compose` will expand symbolically.
pub const MAX_EXPANDED_DEGREE: usize = 64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Operations shared by every inner function in the crate.
pub trait InnerFunction {
    fn eval(&self, z: Complex64) -> Result<Complex64>;

    fn derivative(&self, z: Complex64) -> Result<Complex64>;

    /// Image of a unit-modulus point, renormalized onto the circle.
    fn boundary_point(&self, w: Complex64) -> Complex64;

    /// `arg f(e^{iθ})`.
    fn boundary_map(&self, theta: Angle) -> Angle {
        Angle::of_point(self.boundary_point(theta.point()))
    }

    /// `d/dθ arg f(e^{iθ})`; strictly positive.
    fn boundary_derivative(&self, theta: Angle) -> f64;

    fn degree(&self) -> usize;

    /// Full boundary preimage of a closed arc.
    fn arc_preimage(&self, arc: &Arc) -> Result<ArcUnion>;

    /// Boundary preimage of a union of arcs.
    fn union_preimage(&self, u: &ArcUnion) -> Result<ArcUnion> {
        if u.is_full() {
            return Ok(ArcUnion::full());
        }
        let mut acc = ArcUnion::empty();
        let mut arcs = Vec::new();
        for arc in u.arcs() {
            let pre = self.arc_preimage(&arc)?;
            arcs.extend(pre.arcs());
        }
        if !arcs.is_empty() {
            acc = ArcUnion::from_arcs(arcs);
        }
        Ok(acc)
    }

    fn is_centered(&self) -> bool {
        self.eval(Complex64::new(0.0, 0.0))
            .map(|w| w.modulus() <= 1e-12)
            .unwrap_or(false)
    }
}

fn check_unimodular(tau: Complex64) -> Result<Complex64> {
    let r = tau.modulus();
    if math::abs(r - 1.0) > 1e-12 {
        return Err(Error::NotUnimodular(r));
    }
    Ok(tau / r)
}

#[inline]
fn pole_check(den: Complex64, z: Complex64) -> Result<()> {
    if den.re == 0.0 && den.im == 0.0 || !den.re.is_finite() || !den.im.is_finite() {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    Ok(())
}

#[inline]
fn unit(w: Complex64) -> Complex64 {
    w / w.modulus()
}

/// Disk automorphism `z ↦ τ (z + a)/(1 + ā z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    a: Complex64,
    tau: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, tau: Complex64) -> Result<Self> {
        let r = a.modulus();
        if !(r < 1.0) {
            return Err(Error::OutsideDisk {
                re: a.re,
                im: a.im,
                modulus: r,
            });
        }
        Ok(Mobius {
            a,
            tau: check_unimodular(tau)?,
        })
    }

    pub fn identity() -> Self {
        Mobius {
            a: Complex64::new(0.0, 0.0),
            tau: ONE,
        }
    }

    /// `z ↦ e^{iφ} z`.
    pub fn rotation(phi: f64) -> Self {
        Mobius {
            a: Complex64::new(0.0, 0.0),
            tau: Angle::new(phi).point(),
        }
    }

    /// The map sending 0 to `a` with positive derivative at 0.
    pub fn to_point(a: Complex64) -> Result<Self> {
        Mobius::new(a, ONE)
    }

    /// Image of 0 before rotation.
    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn is_rotation(&self) -> bool {
        self.a.re == 0.0 && self.a.im == 0.0
    }

    #[inline]
    pub fn apply(&self, z: Complex64) -> Complex64 {
        if self.is_rotation() {
            return self.tau * z;
        }
        self.tau * (z + self.a) / (ONE + self.a.conj() * z)
    }

    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: -(self.tau * self.a),
            tau: self.tau.conj(),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Mobius) -> Mobius {
        let zero = Complex64::new(0.0, 0.0);
        let w0 = self.apply(inner.apply(zero));
        // derivative at 0 is τ'(1 - |a'|²), whose argument is τ'
        let d0 = self.derivative_at(inner.apply(zero)) * inner.derivative_at(zero);
        let tau = unit(d0);
        Mobius { a: w0 / tau, tau }
    }

    #[inline]
    fn derivative_at(&self, z: Complex64) -> Complex64 {
        let den = ONE + self.a.conj() * z;
        self.tau * (1.0 - self.a.norm_sqr()) / (den * den)
    }

    /// Image of an arc; orientation is preserved, so endpoints map to endpoints.
    pub fn image_arc(&self, arc: &Arc) -> Arc {
        if arc.is_full() {
            return Arc::full();
        }
        let s = Angle::of_point(self.boundary_point(arc.start().point()));
        let e = Angle::of_point(self.boundary_point(arc.end().point()));
        let mut sweep = e.radians() - s.radians();
        if sweep < 0.0 {
            sweep += TAU;
        }
        // a long arc whose image endpoints coincide numerically is still not a point
        if arc.length() > 0.0 && sweep == 0.0 {
            return Arc::full();
        }
        Arc::from_endpoints(s.radians(), s.radians() + sweep)
    }

    /// The same map as a degree-one Blaschke product with zero `-a`.
    pub fn to_blaschke(&self) -> Blaschke {
        Blaschke {
            tau: self.tau,
            zeros: alloc::vec![-self.a],
        }
    }
}

impl InnerFunction for Mobius {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let den = ONE + self.a.conj() * z;
        pole_check(den, z)?;
        Ok(self.tau * (z + self.a) / den)
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let den = ONE + self.a.conj() * z;
        pole_check(den, z)?;
        Ok(self.derivative_at(z))
    }

    #[inline]
    fn boundary_point(&self, w: Complex64) -> Complex64 {
        unit(self.apply(w))
    }

    fn boundary_map(&self, theta: Angle) -> Angle {
        if self.is_rotation() {
            return theta.rotate(math::atan2(self.tau.im, self.tau.re));
        }
        Angle::of_point(self.boundary_point(theta.point()))
    }

    fn boundary_derivative(&self, theta: Angle) -> f64 {
        (1.0 - self.a.norm_sqr()) / (theta.point() + self.a).norm_sqr()
    }

    fn degree(&self) -> usize {
        1
    }

    fn arc_preimage(&self, arc: &Arc) -> Result<ArcUnion> {
        Ok(ArcUnion::from_arc(self.inverse().image_arc(arc)))
    }
}

/// Finite Blaschke product `τ ∏ (z - a_k)/(1 - ā_k z)` of degree at least one.
#[derive(Clone, Debug, PartialEq)]
pub struct Blaschke {
    tau: Complex64,
    zeros: Vec<Complex64>,
}

impl Blaschke {
    pub fn new(tau: Complex64, zeros: Vec<Complex64>) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::InvalidParameter(
                "a Blaschke product needs at least one zero".into(),
            ));
        }
        for (index, a) in zeros.iter().enumerate() {
            let modulus = a.modulus();
            if !(modulus <= ZERO_MODULUS_LIMIT) {
                return Err(Error::ZeroTooCloseToBoundary { index, modulus });
            }
        }
        Ok(Blaschke {
            tau: check_unimodular(tau)?,
            zeros,
        })
    }

    /// `z (z + λ)/(1 + λ z)`: centred, degree two, derivative `λ` at 0.
    pub fn nested(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(alloc::format!(
                "lambda = {lambda} outside [0, 1)"
            )));
        }
        Blaschke::new(ONE, alloc::vec![Complex64::new(0.0, 0.0), Complex64::new(-lambda, 0.0)])
    }

    /// `((z + 1/3)/(1 + z/3))²`, parabolic at 1.
    pub fn parabolic() -> Self {
        let a = Complex64::new(-1.0 / 3.0, 0.0);
        Blaschke {
            tau: ONE,
            zeros: alloc::vec![a, a],
        }
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    #[inline]
    fn factor(a: Complex64, z: Complex64) -> (Complex64, Complex64) {
        (z - a, ONE - a.conj() * z)
    }

    /// Continuous lift of the boundary map on `[0, 2π]`; `lift(θ + 2π) = lift(θ) + 2π d`.
    pub fn lift(&self, theta: f64) -> f64 {
        let (s, c) = math::sin_cos(theta);
        // e^{-iθ}
        let e = Complex64::new(c, -s);
        let mut acc = math::atan2(self.tau.im, self.tau.re);
        for a in &self.zeros {
            let w = ONE - a * e;
            acc += theta + 2.0 * math::atan2(w.im, w.re);
        }
        acc
    }

    fn invert_lift(&self, target: f64, lift_lo: f64) -> Result<f64> {
        let d = self.zeros.len() as f64;
        let (mut lo, mut hi) = (0.0, TAU);
        let (mut f_lo, mut f_hi) = (lift_lo - target, lift_lo + TAU * d - target);
        if f_lo >= 0.0 {
            return Ok(0.0);
        }
        if f_hi <= 0.0 {
            return Ok(TAU);
        }
        // bisection until the bracket is within one sheet's typical width
        let mut iterations = 0;
        while hi - lo > TAU / (4.0 * d) {
            let mid = 0.5 * (lo + hi);
            let f = self.lift(mid) - target;
            if f < 0.0 {
                lo = mid;
                f_lo = f;
            } else {
                hi = mid;
                f_hi = f;
            }
            iterations += 1;
        }
        // safeguarded Newton
        let mut x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        for _ in 0..200 {
            iterations += 1;
            let f = self.lift(x) - target;
            if f == 0.0 {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = self.boundary_derivative(Angle::new(x));
            let mut next = x - f / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = math::abs(next - x);
            x = next;
            if step <= 1e-15 * (1.0 + math::abs(x)) || hi - lo <= 4e-16 * TAU {
                return Ok(x);
            }
        }
        Err(Error::RootFinding {
            target,
            lo,
            hi,
            iterations,
        })
    }

    /// Symbolic composition `self ∘ inner`, expanded into one product.
    pub fn compose(&self, inner: &Blaschke) -> Result<Blaschke> {
        let degree = self.zeros.len() * inner.zeros.len();
        if degree > MAX_EXPANDED_DEGREE {
            return Err(Error::DegreeLimit(degree));
        }
        let mut zeros = Vec::with_capacity(degree);
        for &w in &self.zeros {
            zeros.extend(inner.solve_interior(w)?);
        }
        // fix the rotation by matching one boundary value
        let one = ONE;
        let target = self.eval(inner.eval(one)?)?;
        let mut partial = ONE;
        for a in &zeros {
            let (n, d) = Blaschke::factor(*a, one);
            partial *= n / d;
        }
        let tau = unit(target / partial);
        Blaschke::new(tau, zeros)
    }

    /// All `d` solutions of `self(z) = w` for interior `w` (Aberth iteration).
    pub fn solve_interior(&self, w: Complex64) -> Result<Vec<Complex64>> {
        let d = self.zeros.len();
        // numerator τ ∏ (z - a_k) - w ∏ (1 - ā_k z), coefficients low to high
        let mut p = alloc::vec![ONE];
        let mut q = alloc::vec![ONE];
        for a in &self.zeros {
            p = poly_mul_linear(&p, -*a, ONE);
            q = poly_mul_linear(&q, ONE, -a.conj());
        }
        let coeffs: Vec<Complex64> = p.iter().zip(q.iter()).map(|(pc, qc)| self.tau * pc - w * qc).collect();
        let mut roots: Vec<Complex64> = (0..d)
            .map(|k| {
                let t = TAU * (k as f64 + 0.25) / d as f64;
                Complex64::new(0.5 * math::cos(t), 0.5 * math::sin(t))
            })
            .collect();
        let mut converged = false;
        for _ in 0..1000 {
            let mut max_step: f64 = 0.0;
            for i in 0..d {
                let z = roots[i];
                let (v, dv) = poly_eval_with_derivative(&coeffs, z);
                if v.modulus() == 0.0 {
                    continue;
                }
                let ratio = v / dv;
                let mut repulsion = Complex64::new(0.0, 0.0);
                for (j, r) in roots.iter().enumerate() {
                    if j != i {
                        repulsion += ONE / (z - r);
                    }
                }
                let step = ratio / (ONE - ratio * repulsion);
                roots[i] = z - step;
                max_step = max_step.max(step.modulus());
            }
            if max_step < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            // multiple roots converge linearly; accept when residuals are tiny
            let worst = roots
                .iter()
                .map(|z| (self.eval(*z).unwrap_or(ONE * 2.0) - w).modulus())
                .fold(0.0, f64::max);
            if worst > 1e-8 {
                return Err(Error::RootFinding {
                    target: w.modulus(),
                    lo: 0.0,
                    hi: 1.0,
                    iterations: 1000,
                });
            }
        }
        Ok(roots)
    }
}

fn poly_mul_linear(p: &[Complex64], c0: Complex64, c1: Complex64) -> Vec<Complex64> {
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); p.len() + 1];
    for (k, pk) in p.iter().enumerate() {
        out[k] += pk * c0;
        out[k + 1] += pk * c1;
    }
    out
}

fn poly_eval_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for ck in c.iter().rev() {
        dv = dv * z + v;
        v = v * z + ck;
    }
    (v, dv)
}

impl InnerFunction for Blaschke {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut num = self.tau;
        let mut den = ONE;
        for a in &self.zeros {
            let (n, d) = Blaschke::factor(*a, z);
            num *= n;
            den *= d;
        }
        pole_check(den, z)?;
        Ok(num / den)
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let d = self.zeros.len();
        let mut values = Vec::with_capacity(d);
        let mut slopes = Vec::with_capacity(d);
        for a in &self.zeros {
            let (n, den) = Blaschke::factor(*a, z);
            pole_check(den, z)?;
            values.push(n / den);
            slopes.push((1.0 - a.norm_sqr()) / (den * den));
        }
        // product rule via prefix and suffix products
        let mut suffix = alloc::vec![ONE; d + 1];
        for k in (0..d).rev() {
            suffix[k] = suffix[k + 1] * values[k];
        }
        let mut prefix = ONE;
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..d {
            total += prefix * slopes[k] * suffix[k + 1];
            prefix *= values[k];
        }
        Ok(self.tau * total)
    }

    #[inline]
    fn boundary_point(&self, w: Complex64) -> Complex64 {
        let mut num = self.tau;
        let mut den = ONE;
        for a in &self.zeros {
            num *= w - a;
            den *= ONE - a.conj() * w;
        }
        unit(num / den)
    }

    fn boundary_derivative(&self, theta: Angle) -> f64 {
        let p = theta.point();
        self.zeros
            .iter()
            .map(|a| (1.0 - a.norm_sqr()) / (p - a).norm_sqr())
            .sum()
    }

    fn degree(&self) -> usize {
        self.zeros.len()
    }

    fn arc_preimage(&self, arc: &Arc) -> Result<ArcUnion> {
        if arc.is_full() {
            return Ok(ArcUnion::full());
        }
        let d = self.zeros.len();
        let base = self.lift(0.0);
        let top = base + TAU * d as f64;
        let start = base + math::reduce_angle(arc.start().radians() - base);
        let len = arc.length();
        let mut pieces = Vec::with_capacity(d + 1);
        for j in -1..(d as i64) {
            let lo = start + TAU * j as f64;
            let hi = lo + len;
            let (lo, hi) = (lo.max(base), hi.min(top));
            if lo > hi {
                continue;
            }
            let a = self.invert_lift(lo, base)?;
            let b = self.invert_lift(hi, base)?;
            pieces.push(Arc::from_endpoints(a, b.max(a)));
        }
        Ok(ArcUnion::from_arcs(pieces))
    }
}

/// An inner function in one of the forms the crate composes.
///
/// `Chain` lists its members in application order: `Chain([g, f])` is `f ∘ g`.
#[derive(Clone, Debug, PartialEq)]
pub enum DiskMap {
    Mobius(Mobius),
    Blaschke(Blaschke),
    Chain(Vec<DiskMap>),
}

impl DiskMap {
    pub fn rotation(phi: f64) -> Self {
        DiskMap::Mobius(Mobius::rotation(phi))
    }

    /// `outer ∘ inner` without expansion.
    pub fn then(self, outer: DiskMap) -> DiskMap {
        match self {
            DiskMap::Chain(mut v) => {
                v.push(outer);
                DiskMap::Chain(v)
            }
            first => DiskMap::Chain(alloc::vec![first, outer]),
        }
    }
}

impl From<Mobius> for DiskMap {
    fn from(m: Mobius) -> Self {
        DiskMap::Mobius(m)
    }
}

impl From<Blaschke> for DiskMap {
    fn from(b: Blaschke) -> Self {
        DiskMap::Blaschke(b)
    }
}

impl InnerFunction for DiskMap {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            DiskMap::Mobius(m) => m.eval(z),
            DiskMap::Blaschke(b) => b.eval(z),
            DiskMap::Chain(v) => v.iter().try_fold(z, |w, f| f.eval(w)),
        }
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        match self {
            DiskMap::Mobius(m) => m.derivative(z),
            DiskMap::Blaschke(b) => b.derivative(z),
            DiskMap::Chain(v) => {
                let mut w = z;
                let mut d = ONE;
                for f in v {
                    d *= f.derivative(w)?;
                    w = f.eval(w)?;
                }
                Ok(d)
            }
        }
    }

    #[inline]
    fn boundary_point(&self, w: Complex64) -> Complex64 {
        match self {
            DiskMap::Mobius(m) => m.boundary_point(w),
            DiskMap::Blaschke(b) => b.boundary_point(w),
            DiskMap::Chain(v) => v.iter().fold(w, |p, f| f.boundary_point(p)),
        }
    }

    fn boundary_map(&self, theta: Angle) -> Angle {
        match self {
            DiskMap::Mobius(m) => m.boundary_map(theta),
            DiskMap::Blaschke(b) => b.boundary_map(theta),
            DiskMap::Chain(v) => v.iter().fold(theta, |t, f| f.boundary_map(t)),
        }
    }

    fn boundary_derivative(&self, theta: Angle) -> f64 {
        match self {
            DiskMap::Mobius(m) => m.boundary_derivative(theta),
            DiskMap::Blaschke(b) => b.boundary_derivative(theta),
            DiskMap::Chain(v) => {
                let mut t = theta;
                let mut d = 1.0;
                for f in v {
                    d *= f.boundary_derivative(t);
                    t = f.boundary_map(t);
                }
                d
            }
        }
    }

    fn degree(&self) -> usize {
        match self {
            DiskMap::Mobius(_) => 1,
            DiskMap::Blaschke(b) => b.degree(),
            DiskMap::Chain(v) => v.iter().map(|f| f.degree()).product(),
        }
    }

    fn arc_preimage(&self, arc: &Arc) -> Result<ArcUnion> {
        match self {
            DiskMap::Mobius(m) => m.arc_preimage(arc),
            DiskMap::Blaschke(b) => b.arc_preimage(arc),
            DiskMap::Chain(_) => self.union_preimage(&ArcUnion::from_arc(*arc)),
        }
    }

    fn union_preimage(&self, u: &ArcUnion) -> Result<ArcUnion> {
        match self {
            DiskMap::Chain(v) => v.iter().rev().try_fold(u.clone(), |acc, f| f.union_preimage(&acc)),
            DiskMap::Mobius(m) => m.union_preimage(u),
            DiskMap::Blaschke(b) => b.union_preimage(u),
        }
    }
}
