use std::collections::HashSet;

use proptest::prelude::*;

use critval::cantor::{CubeAddress, CubeSystem};
use critval::gapset::{gap_sum, holder_quotient, image_and_match, make_gapset, Gap, GapSet, PiecewiseLinear};
use critval::sfc::{cube_preimage, interval_to_cube, DyadicInterval};
use critval::target::{choose_s_sequence, split_block, weighted_g, ExponentSequence};

/// Exact gap set inside `[0, 1]` with up to 12 gaps.
fn gapset() -> impl Strategy<Value = GapSet> {
    prop::collection::vec(0.0f64..1.0, 2..24).prop_map(|mut cuts| {
        cuts.sort_by(f64::total_cmp);
        let gaps = cuts
            .chunks_exact(2)
            .filter(|c| c[1] > c[0])
            .map(|c| Gap::new(c[0], c[1]))
            .collect();
        make_gapset(0.0, 1.0, gaps, 0.0).unwrap()
    })
}

/// Piecewise-linear map on `[-0.1, 1.1]`.
fn pl() -> impl Strategy<Value = PiecewiseLinear> {
    (prop::collection::vec(-0.1f64..1.1, 0..10), prop::collection::vec(-3.0f64..3.0, 12)).prop_map(
        |(mut xs, ys)| {
            xs.push(-0.1);
            xs.push(1.1);
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let ys = ys[..xs.len()].to_vec();
            PiecewiseLinear::new(xs, ys).unwrap()
        },
    )
}

fn endpoint_samples(a: &GapSet, f: &PiecewiseLinear) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = a.components().iter().flat_map(|&(x, y)| [x, y]).collect();
    pts.dedup();
    pts.into_iter().map(|x| (x, f.eval(x))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gap_sum_grows_with_exponent(a in gapset(), t in 0.2f64..5.0, dt in 0.0f64..3.0) {
        let lo = gap_sum(&a, t).unwrap().value;
        let hi = gap_sum(&a, t + dt).unwrap().value;
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn gap_sum_of_restriction_is_smaller(a in gapset(), t in 0.2f64..5.0, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let (lo, hi) = (x.min(y), x.max(y));
        let r = a.restrict(lo, hi);
        prop_assert!(gap_sum(&r, t).unwrap().value <= gap_sum(&a, t).unwrap().value * (1.0 + 1e-12));
    }

    #[test]
    fn image_matching_is_injective_and_contained(a in gapset(), f in pl()) {
        let (b, m) = image_and_match(&f, &a).unwrap();
        prop_assert_eq!(m.pairs.len(), b.gaps().len());
        prop_assert_eq!(m.pairs.iter().collect::<HashSet<_>>().len(), m.pairs.len());
        for (&i, z) in m.pairs.iter().zip(b.gaps()) {
            let src = a.gaps()[i];
            let (u, v) = (f.eval(src.lo), f.eval(src.hi));
            prop_assert!(z.inside(u.min(v), u.max(v)));
        }
    }

    #[test]
    fn image_gap_sum_bounded_by_holder_quotient(a in gapset(), f in pl(), k in 0.5f64..3.0) {
        let (b, _) = image_and_match(&f, &a).unwrap();
        let samples = endpoint_samples(&a, &f);
        prop_assume!(samples.len() >= 2);
        let kq = holder_quotient(&samples, k).unwrap().modulus;
        let lhs: f64 = b.gaps().iter().map(|z| z.len().powf(k)).sum();
        let (lo, hi) = a.hull();
        prop_assert!(lhs <= kq * (hi - lo) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn holder_quotient_monotone_in_samples(xs in prop::collection::vec(-1.0f64..1.0, 3..20), f in pl(), k in 0.3f64..3.0) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        prop_assume!(xs.len() >= 3);
        let all: Vec<(f64, f64)> = xs.iter().map(|&x| (x, f.eval(x))).collect();
        let sub = &all[..all.len() - 1];
        let whole = holder_quotient(&all, k).unwrap().modulus;
        prop_assert!(holder_quotient(sub, k).unwrap().modulus <= whole);
    }

    #[test]
    fn holder_quotient_composes_with_lipschitz_maps(
        xs in prop::collection::vec(-1.0f64..1.0, 2..16), f in pl(), c in -4.0f64..4.0, k in 0.3f64..3.0,
    ) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        prop_assume!(xs.len() >= 2);
        let inner: Vec<(f64, f64)> = xs.iter().map(|&x| (x, f.eval(x))).collect();
        let outer: Vec<(f64, f64)> = xs.iter().map(|&x| (x, c * f.eval(x) + 1.0)).collect();
        let ki = holder_quotient(&inner, k).unwrap().modulus;
        let ko = holder_quotient(&outer, k).unwrap().modulus;
        prop_assert!(ko <= c.abs().powf(k) * ki * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn curve_cubes_roundtrip_and_nest(n in 1usize..=3, s in 1u32..6, raw in any::<u64>()) {
        let level = s * n as u32;
        let index = raw & ((1u64 << level) - 1);
        let alpha = DyadicInterval { level, index };
        let cube = interval_to_cube(n, alpha).unwrap();
        prop_assert_eq!(cube_preimage(&cube).unwrap(), alpha);
        let parent = interval_to_cube(n, DyadicInterval { level: level - n as u32, index: index >> n }).unwrap();
        prop_assert!(cube.within(&parent));
        if index + 1 < 1u64 << level {
            let next = interval_to_cube(n, DyadicInterval { level, index: index + 1 }).unwrap();
            prop_assert!(cube.face_adjacent(&next));
        }
    }

    #[test]
    fn cantor_cubes_nest_and_separate(n in 1usize..=3, letters in prop::collection::vec(1u32..=8, 0..8)) {
        let sys = CubeSystem::new(n, 12).unwrap();
        let w = 1u32 << n;
        let addr = CubeAddress(letters.into_iter().map(|l| (l - 1) % w + 1).collect());
        let parent = sys.cube_of(&addr).unwrap();
        let k = addr.depth();
        let kids: Vec<_> = (1..=w).map(|l| sys.cube_of(&addr.child(l)).unwrap()).collect();
        let gap = sys.schedule().clearance(k) * (1.0 - 1e-9);
        for (i, c) in kids.iter().enumerate() {
            prop_assert!(parent.contains_cube(c));
            prop_assert!(parent.boundary_distance(c) >= gap);
            for d in &kids[i + 1..] {
                prop_assert!(c.boundary_distance(d) >= gap);
            }
        }
    }

    #[test]
    fn split_covers_block_and_shrinks_weighted_sum(a in gapset(), n in 1usize..=2, s in 1.05f64..1.9) {
        let seq = ExponentSequence::constant(s, n).unwrap();
        let kids = split_block(&a, n);
        prop_assert_eq!(kids.len(), 1 << n);
        for (x, y) in a.components() {
            for p in [x, y] {
                prop_assert!(kids.iter().any(|b| b.contains(p)));
            }
        }
        for b in &kids {
            let (lo, hi) = b.hull();
            prop_assert!(a.contains(lo) && a.contains(hi));
            prop_assert!(weighted_g(b, &seq) <= weighted_g(&a, &seq) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn graded_sequence_keeps_child_sums_below_parent() {
    let b = critval::gapset::cantor_gapset(1.0 / 3.0, 10).unwrap();
    let seq = choose_s_sequence(1.4, 1, &b, 24).unwrap();
    let mut block = b.clone();
    for _ in 0..6 {
        let kids = split_block(&block, 1);
        for k in &kids {
            assert!(weighted_g(k, &seq) <= weighted_g(&block, &seq) * (1.0 + 1e-12));
        }
        block = kids[1].clone();
    }
}
