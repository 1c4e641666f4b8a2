use malab::convex::ma_atoms;
use malab::geom::{self, P2};
use malab::ot::{
    apply, brenier_potential, displacement_frames, solve_dual, DualOptions, DualSolution, ShapeName, ShapeSpec,
    TILING_TOL,
};
use proptest::prelude::*;

fn solved(name: ShapeName, sites: usize) -> (ShapeSpec, DualSolution) {
    let spec = ShapeSpec::new(name);
    let samples = spec.sample(sites).unwrap();
    let dual = solve_dual(&spec.source_polygon(), &samples, &DualOptions::default()).unwrap();
    (spec, dual)
}

fn index_of(sites: &[P2], p: P2) -> usize {
    sites
        .iter()
        .enumerate()
        .min_by(|a, b| geom::dist(*a.1, p).total_cmp(&geom::dist(*b.1, p)))
        .unwrap()
        .0
}

#[test]
fn every_accepted_step_tiles_the_source_and_reduces_the_residual() {
    for name in [ShapeName::SplitBall, ShapeName::Pacman, ShapeName::CatsEye] {
        let (_, dual) = solved(name, 400);
        assert!(dual.history.iter().all(|s| s.tiling <= TILING_TOL));
        assert!(dual.history.windows(2).all(|w| w[1].residual < w[0].residual));
        assert!(dual.residual <= DualOptions::default().tol);
        let total: f64 = dual.areas.iter().sum();
        assert!((total - geom::area(&dual.source)).abs() <= 1e-9 * total);
    }
}

#[test]
fn weights_are_equivariant_under_the_symmetry_group() {
    for name in [ShapeName::SplitBall, ShapeName::FramedDiamond] {
        let (spec, dual) = solved(name, 400);
        let options = DualOptions { tol: 1e-10, ..DualOptions::default() };
        let base = solve_dual(&dual.source, &spec.sample(400).unwrap(), &options).unwrap();
        for g in spec.symmetry_group() {
            let mut moved = spec.sample(400).unwrap();
            for p in moved.sites.iter_mut() {
                *p = apply(g, *p);
            }
            let image = solve_dual(&dual.source, &moved, &options).unwrap();
            let shift = image.weights[0] - base.weights[index_of(&base.sites, moved.sites[0])];
            for (i, p) in moved.sites.iter().enumerate() {
                let j = index_of(&base.sites, *p);
                assert!(
                    (image.weights[i] - base.weights[j] - shift).abs() <= 1e-8,
                    "{}: site {i}",
                    name.as_str()
                );
            }
        }
    }
}

#[test]
fn potential_mass_fills_the_hull_of_the_sites() {
    // Interior atoms of the Brenier potential tile the part of conv(sites)
    // dual to interior cell vertices; the gap closes as sites are added.
    let target = std::f64::consts::PI + 4.0;
    let mut deficits = Vec::new();
    for sites in [400, 1600] {
        let (_, dual) = solved(ShapeName::SplitBall, sites);
        let u = brenier_potential(&dual).unwrap();
        let mass = ma_atoms(&u).unwrap().total();
        let hull = geom::area(&geom::convex_hull(&dual.sites));
        assert!(mass <= hull + 1e-9);
        deficits.push((target - mass) / target);
    }
    assert!(deficits[1] < deficits[0], "{deficits:?}");
    assert!(deficits[1] < 0.05, "{deficits:?}");
}

#[test]
fn frames_start_in_the_source_and_end_at_the_sites() {
    let (_, dual) = solved(ShapeName::Pacman, 200);
    let frames = displacement_frames(&dual, &[0.0, 1.0], 3).unwrap();
    let (source, end) = (&frames.frames[0], &frames.frames[1]);
    assert_eq!(source.len(), end.len());
    for (a, b) in source.iter().zip(end) {
        assert!(geom::in_convex_polygon(&dual.source, a.x, 1e-12));
        assert!(geom::dist(b.x, dual.sites[b.cell]) <= 1e-12);
        assert_eq!(a.cell, b.cell);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_map_is_cyclically_monotone(points in prop::collection::vec((-0.99f64..0.99, -0.99f64..0.99), 2..12)) {
        static DUAL: std::sync::OnceLock<DualSolution> = std::sync::OnceLock::new();
        let dual = DUAL.get_or_init(|| solved(ShapeName::FramedDiamond, 400).1);
        let xs: Vec<P2> = points.into_iter().map(|(x, y)| [x, y]).filter(|p| geom::in_convex_polygon(&dual.source, *p, 0.0)).collect();
        prop_assume!(xs.len() >= 2);
        let ys: Vec<P2> = xs.iter().map(|x| dual.map(*x)).collect();
        let k = xs.len();
        let identity: f64 = (0..k).map(|i| geom::dot(xs[i], ys[i])).sum();
        let shifted: f64 = (0..k).map(|i| geom::dot(xs[i], ys[(i + 1) % k])).sum();
        prop_assert!(identity >= shifted - 1e-12);
    }
}
