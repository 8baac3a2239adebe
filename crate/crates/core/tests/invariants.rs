use std::f64::consts::{PI, TAU};

use blaschke_core::compose::{compose_range, CompositionState, TableSequence};
use blaschke_core::{harmonic_measure, Angle, Arc, ArcUnion, Blaschke, Complex64, DiskMap, InnerFunction, Mobius};
use proptest::prelude::*;

fn disk_point(max_r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max_r, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn arc() -> impl Strategy<Value = Arc> {
    (0.0..TAU, 0.0..PI).prop_map(|(c, h)| Arc::new(Angle::new(c), h).unwrap())
}

fn arc_union() -> impl Strategy<Value = ArcUnion> {
    prop::collection::vec((0.0..TAU, 0.0..1.2), 0..5)
        .prop_map(|v| ArcUnion::from_arcs(v.into_iter().map(|(c, h)| Arc::new(Angle::new(c), h).unwrap())))
}

fn blaschke(max_degree: usize, centred: bool) -> impl Strategy<Value = Blaschke> {
    (prop::collection::vec(disk_point(0.9), 1..=max_degree), 0.0..TAU).prop_map(move |(mut zeros, phase)| {
        if centred {
            zeros[0] = Complex64::new(0.0, 0.0);
        }
        Blaschke::new(Complex64::from_polar(1.0, phase), zeros).unwrap()
    })
}

fn mobius() -> impl Strategy<Value = Mobius> {
    (disk_point(0.9), 0.0..TAU).prop_map(|(a, t)| Mobius::new(a, Complex64::from_polar(1.0, t)).unwrap())
}

// Membership on a fine grid of cell midpoints.
fn raster(u: &ArcUnion, cells: usize) -> Vec<bool> {
    (0..cells)
        .map(|i| u.contains(Angle::new(TAU * (i as f64 + 0.5) / cells as f64)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn complement_partitions_the_circle(u in arc_union()) {
        let c = u.complement();
        prop_assert!((u.measure() + c.measure() - TAU).abs() < 1e-12);
        prop_assert!(u.union(&c).is_full());
        prop_assert!(u.intersection(&c).measure() < 1e-12);
    }

    #[test]
    fn set_operations_agree_with_raster(a in arc_union(), b in arc_union()) {
        const CELLS: usize = 4096;
        let (ra, rb) = (raster(&a, CELLS), raster(&b, CELLS));
        let union = raster(&a.union(&b), CELLS);
        let inter = raster(&a.intersection(&b), CELLS);
        // cells within one width of an endpoint may disagree
        let width = TAU / CELLS as f64;
        let boundary_cells = 4 * (a.len() + b.len()) + 4;
        let mut mismatches = 0;
        for i in 0..CELLS {
            if union[i] != (ra[i] || rb[i]) || inter[i] != (ra[i] && rb[i]) {
                mismatches += 1;
            }
        }
        prop_assert!(mismatches <= boundary_cells);
        let raster_measure = inter.iter().filter(|&&x| x).count() as f64 * width;
        prop_assert!((a.intersection(&b).measure() - raster_measure).abs() <= boundary_cells as f64 * width);
        prop_assert!(a.intersection(&b).measure() <= a.measure().min(b.measure()) + 1e-12);
    }

    #[test]
    fn harmonic_measure_is_mobius_invariant(m in mobius(), z in disk_point(0.9), a in arc()) {
        // ω(z, M⁻¹(A)) = ω(M z, A)
        let pre = m.arc_preimage(&a).unwrap();
        let lhs = harmonic_measure(z, &pre).unwrap();
        let rhs = harmonic_measure(m.apply(z), &ArcUnion::from_arc(a)).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn lift_winds_by_degree(b in blaschke(5, false), t in 0.0..TAU) {
        let d = b.zeros().len() as f64;
        prop_assert!((b.lift(t + TAU) - b.lift(t) - TAU * d).abs() < 1e-9);
        prop_assert!(b.lift(t + 1e-3) > b.lift(t));
        let w = b.boundary_point(Angle::new(t).point());
        let l = Angle::new(b.lift(t));
        prop_assert!(l.distance(Angle::of_point(w)) < 1e-9);
    }

    #[test]
    fn centred_preimages_keep_length(b in blaschke(4, true), a in arc()) {
        let pre = b.arc_preimage(&a).unwrap();
        prop_assert!((pre.measure() - a.length()).abs() < 1e-9);
    }

    #[test]
    fn preimages_carry_harmonic_measure(b in blaschke(4, false), z in disk_point(0.8), a in arc()) {
        // ω(z, f⁻¹(A)) = ω(f(z), A) for inner f
        let pre = b.arc_preimage(&a).unwrap();
        let lhs = harmonic_measure(z, &pre).unwrap();
        let rhs = harmonic_measure(b.eval(z).unwrap(), &ArcUnion::from_arc(a)).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn preimage_points_map_into_the_arc(b in blaschke(4, false), a in arc()) {
        let pre = b.arc_preimage(&a).unwrap();
        for piece in pre.arcs() {
            for p in [piece.start(), piece.center(), piece.end()] {
                let image = b.boundary_map(p);
                let outside = image.distance(a.center()) - a.half_length();
                prop_assert!(outside < 1e-8, "image {image} outside {a:?}");
            }
        }
    }

    #[test]
    fn mobius_inverse_round_trip(m in mobius(), z in disk_point(0.95)) {
        let back = m.inverse().apply(m.apply(z));
        prop_assert!((back - z).norm() < 1e-12);
    }

    #[test]
    fn mobius_compose_matches_sequential(m1 in mobius(), m2 in mobius(), z in disk_point(0.95)) {
        let both = m1.compose(&m2).apply(z);
        prop_assert!((both - m1.apply(m2.apply(z))).norm() < 1e-11);
    }

    #[test]
    fn blaschke_compose_matches_sequential(f in blaschke(3, false), g in blaschke(3, false), z in disk_point(0.9)) {
        let h = f.compose(&g).unwrap();
        let expected = f.eval(g.eval(z).unwrap()).unwrap();
        prop_assert!((h.eval(z).unwrap() - expected).norm() < 1e-8);
        prop_assert_eq!(h.zeros().len(), f.zeros().len() * g.zeros().len());
    }

    #[test]
    fn distortion_follows_the_chain_rule(maps in prop::collection::vec(blaschke(3, false), 1..6)) {
        let seq = TableSequence(maps.iter().cloned().map(DiskMap::from).collect());
        let n = maps.len();
        let state = CompositionState::new().advance(&seq, n).unwrap();
        // |F_n'(0)| by central differences on the whole chain
        let chain = DiskMap::Chain(seq.0.clone());
        let h = 1e-6;
        let fd = (chain.eval(Complex64::new(h, 0.0)).unwrap() - chain.eval(Complex64::new(-h, 0.0)).unwrap()) / (2.0 * h);
        let end = state.orbit()[n];
        // Π λ_k = |F_n'(0)| / (1 - |F_n(0)|²)
        let expected = fd.norm() / (1.0 - end.norm_sqr());
        let product = state.lambda_partial_product();
        prop_assert!((product - expected).abs() < 1e-6 * (1.0 + expected), "{product} vs {expected}");
    }

    #[test]
    fn centred_blocks_have_derivative_product(maps in prop::collection::vec(blaschke(2, true), 2..6)) {
        let seq = TableSequence(maps.into_iter().map(DiskMap::from).collect());
        let n = seq.0.len();
        let block = compose_range(&seq, 1, n).unwrap();
        let h = 1e-6;
        let fd = (block.map.eval(Complex64::new(0.0, h)).unwrap() - block.map.eval(Complex64::new(0.0, -h)).unwrap()) / (2.0 * h);
        prop_assert!((fd.norm() - block.lambda_product).abs() < 1e-8);
    }
}
