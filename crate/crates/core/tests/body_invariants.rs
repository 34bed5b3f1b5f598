use proptest::prelude::*;

use pulab_core::lab::{
    lemma1_gap, log_concavity_report, projection_volume_sequence, ConcaveProfile,
};
use pulab_core::sampler::{hit_and_run, ChainConfig};
use pulab_core::volume::{exact_volume, mc_volume, ordered_cone_mc_volume};
use pulab_core::{BodySpec, Exponent, Membership, Point, YoungFunction};

fn body_strategy() -> impl Strategy<Value = BodySpec> {
    let dim = 2usize..=6;
    prop_oneof![
        (dim.clone(), 0.5f64..2.0).prop_map(|(n, l)| BodySpec::cube(n, l).unwrap()),
        (
            dim.clone(),
            prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY]),
            0.5f64..2.0
        )
            .prop_map(|(n, p, r)| BodySpec::lp_ball(n, Exponent::finite(p).unwrap(), r).unwrap()),
        (dim.clone(), 1.0f64..4.0).prop_map(|(n, p)| {
            BodySpec::orlicz_standard(n, YoungFunction::power(p).unwrap()).unwrap()
        }),
        (dim, 0.5f64..2.0, 0.05f64..0.95).prop_map(|(n, l, s)| BodySpec::equality_case(
            n,
            l,
            l * (1.0 + s)
        )
        .unwrap()),
    ]
}

/// A body together with a point in its bounding box.
fn body_and_point() -> impl Strategy<Value = (BodySpec, Vec<f64>)> {
    body_strategy().prop_flat_map(|b| {
        let r = b.bounding_radius();
        let n = b.dim();
        (Just(b), prop::collection::vec(-r..=r, n))
    })
}

fn inside(body: &BodySpec, x: &[f64]) -> bool {
    body.contains_point(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn membership_is_sign_and_permutation_invariant(
        (body, x) in body_and_point(),
        signs in prop::collection::vec(any::<bool>(), 6),
        rot in 0usize..6,
    ) {
        let n = x.len();
        let mut y: Vec<f64> = x.iter().zip(&signs).map(|(v, &s)| if s { -v } else { *v }).collect();
        y.rotate_left(rot % n);
        prop_assert_eq!(inside(&body, &x), inside(&body, &y));
        let mut swapped = x.clone();
        swapped.swap(0, n - 1);
        prop_assert_eq!(inside(&body, &x), inside(&body, &swapped));
    }

    #[test]
    fn shrinking_coordinates_keeps_membership(
        (body, x) in body_and_point(),
        factors in prop::collection::vec(0.0f64..=1.0, 6),
    ) {
        prop_assume!(inside(&body, &x));
        let y: Vec<f64> = x.iter().zip(&factors).map(|(v, f)| v * f).collect();
        prop_assert!(inside(&body, &y));
    }

    #[test]
    fn projection_equals_coordinate_section((body, x) in body_and_point(), k in 1usize..6) {
        let n = body.dim();
        let k = k.min(n);
        let proj = body.project(k).unwrap();
        prop_assert_eq!(proj.dim(), k);
        // the image of a member lies in the projection
        if inside(&body, &x) {
            prop_assert!(inside(&proj, &x[..k]));
        }
        // for unconditional bodies the projection is the section through 0
        let mut padded = x[..k].to_vec();
        padded.resize(n, 0.0);
        prop_assert_eq!(inside(&proj, &x[..k]), inside(&body, &padded));
    }

    #[test]
    fn dropping_a_coordinate_keeps_membership((body, x) in body_and_point(), drop in 0usize..6) {
        prop_assume!(inside(&body, &x));
        let n = x.len();
        let mut y = x.clone();
        y.remove(drop % n);
        let proj = body.project(n - 1).unwrap();
        prop_assert!(inside(&proj, &y));
    }

    #[test]
    fn midpoints_of_members_are_members(
        (body, x) in body_and_point(),
        shrink in 0.0f64..=1.0,
        signs in prop::collection::vec(any::<bool>(), 6),
    ) {
        prop_assume!(inside(&body, &x));
        // a second member: a signed, shrunk copy
        let y: Vec<f64> = x
            .iter()
            .zip(&signs)
            .map(|(v, &s)| if s { -v * shrink } else { *v })
            .collect();
        prop_assert!(inside(&body, &y));
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        prop_assert!(inside(&body, &mid));
    }

    #[test]
    fn log_concavity_verdict_is_scale_invariant(body in body_strategy(), lambda in 0.1f64..10.0) {
        prop_assume!(body.dim() >= 3 && exact_volume(&body).is_some());
        let seq = projection_volume_sequence(&body, 1, 0).unwrap();
        let a = log_concavity_report(&seq, 3.0).unwrap();
        let b = log_concavity_report(&seq.scaled(lambda), 3.0).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        let scaled_body = body.scaled(lambda).unwrap();
        let c = log_concavity_report(&projection_volume_sequence(&scaled_body, 1, 0).unwrap(), 3.0).unwrap();
        prop_assert_eq!(a.verdict, c.verdict);
    }

    #[test]
    fn integral_inequality_holds_for_concave_profiles(
        kind in 0usize..2,
        shape in 0.01f64..=1.0,
        length in 0.1f64..5.0,
        n in 3usize..=12,
    ) {
        let p = if kind == 0 {
            ConcaveProfile::affine(shape, length).unwrap()
        } else {
            ConcaveProfile::power(shape, length).unwrap()
        };
        let g = lemma1_gap(&p, n, 1 << 10).unwrap();
        prop_assert!(g.gap >= -g.bracket, "{:?}", g);
    }
}

#[test]
fn wide_apex_equality_body_is_not_convex() {
    let bad = BodySpec::equality_case_unchecked(2, 1.0, 3.0);
    let p = Point::new(vec![3.0, 0.0]).unwrap();
    let q = Point::new(vec![0.0, 3.0]).unwrap();
    let mid = Point::new(vec![1.5, 1.5]).unwrap();
    assert!(bad.contains(&p).unwrap() && bad.contains(&q).unwrap());
    assert!(!bad.contains(&mid).unwrap());
    // the same pair inside the admissible range keeps its midpoint
    let good = BodySpec::equality_case(2, 1.0, 1.8).unwrap();
    assert!(good.contains(&Point::new(vec![0.9, 0.9]).unwrap()).unwrap());
}

/// Smallest signed distance-like margin of `(x, y)` to the edges of the octagon
/// `conv{(±L, ±L), (±a, 0), (0, ±a)}`; non-negative inside.
fn octagon_margin(x: f64, y: f64, l: f64, a: f64) -> f64 {
    let (x, y) = (x.abs(), y.abs());
    let vertices = [(a, 0.0), (l, l), (0.0, a)];
    vertices
        .windows(2)
        .map(|w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn planar_equality_body_is_the_hull_of_square_and_apexes() {
    let (l, a) = (1.0, 1.5);
    let body = BodySpec::equality_case(2, l, a).unwrap();
    // shoelace area of the octagon
    let pts = [
        (a, 0.0),
        (l, l),
        (0.0, a),
        (-l, l),
        (-a, 0.0),
        (-l, -l),
        (0.0, -a),
        (l, -l),
    ];
    let area: f64 = (0..8)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % 8]);
            p.0 * q.1 - q.0 * p.1
        })
        .sum::<f64>()
        / 2.0;
    assert!((exact_volume(&body).unwrap().value - area).abs() < 1e-12);
    let steps = 301;
    let mut disagreements = 0;
    for i in 0..steps {
        for j in 0..steps {
            let x = -a + 2.0 * a * i as f64 / (steps - 1) as f64;
            let y = -a + 2.0 * a * j as f64 / (steps - 1) as f64;
            let margin = octagon_margin(x, y, l, a);
            // grid points on an edge are decided by rounding
            if margin.abs() > 1e-9 && body.contains_point(&[x, y]) != (margin > 0.0) {
                disagreements += 1;
            }
        }
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn projection_matches_brute_force_fibre_search() {
    let bodies = [
        BodySpec::lp_ball(3, Exponent::Finite(1.0), 1.0).unwrap(),
        BodySpec::lp_ball(3, Exponent::Finite(3.0), 1.0).unwrap(),
        BodySpec::equality_case(3, 1.0, 1.6).unwrap(),
    ];
    for body in &bodies {
        let proj = body.project(2).unwrap();
        let r = body.bounding_radius();
        let fibre: Vec<f64> = (0..=400).map(|k| -r + 2.0 * r * k as f64 / 400.0).collect();
        for i in 0..=40 {
            for j in 0..=40 {
                let y = [
                    -r + 2.0 * r * i as f64 / 40.0,
                    -r + 2.0 * r * j as f64 / 40.0,
                ];
                let brute = fibre.iter().any(|&z| body.contains_point(&[y[0], y[1], z]));
                assert_eq!(proj.contains_point(&y), brute, "{body:?} at {y:?}");
            }
        }
    }
}

#[test]
fn ordered_cone_volume_times_orbit_size_matches_hit_or_miss() {
    let bodies = [
        BodySpec::lp_ball(4, Exponent::Finite(1.0), 1.0).unwrap(),
        BodySpec::equality_case(3, 1.0, 1.5).unwrap(),
        BodySpec::orlicz_standard(3, YoungFunction::power(2.5).unwrap()).unwrap(),
    ];
    for (k, body) in bodies.iter().enumerate() {
        let n = body.dim();
        let orbit = 2f64.powi(n as i32) * (1..=n).map(|i| i as f64).product::<f64>();
        let cone = ordered_cone_mc_volume(body, 400_000, 10 + k as u64).unwrap();
        let (value, se) = (orbit * cone.value, orbit * cone.std_error);
        let full = mc_volume(body, 400_000, 20 + k as u64).unwrap();
        let combined = (se.powi(2) + full.std_error.powi(2)).sqrt();
        assert!(
            (value - full.value).abs() <= 4.0 * combined,
            "{body:?}: {value} vs {full:?}"
        );
        if let Some(e) = exact_volume(body) {
            assert!(
                (value - e.value).abs() <= 4.0 * se,
                "{body:?}: {value} vs {}",
                e.value
            );
        }
    }
}

#[test]
fn estimates_are_deterministic_in_the_seed() {
    let body = BodySpec::equality_case(4, 1.0, 1.5).unwrap();
    assert_eq!(
        mc_volume(&body, 100_000, 3).unwrap(),
        mc_volume(&body, 100_000, 3).unwrap()
    );
    assert_ne!(
        mc_volume(&body, 100_000, 3).unwrap(),
        mc_volume(&body, 100_000, 4).unwrap()
    );
    let config = ChainConfig::default_for(4, 5);
    let a = hit_and_run(&body, 200, config).unwrap();
    let b = hit_and_run(&body, 200, config).unwrap();
    assert_eq!(a, b);
}
