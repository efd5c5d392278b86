use proptest::prelude::*;

use coarsecoh::control::ControlFunction;
use coarsecoh::fillings::{cone_homotopy_d, random_controlled_map, tuples_of_width};
use coarsecoh::metric::{generate_grid, PointId};
use coarsecoh::{Gf2, DIST_TOL};
use num_rational::BigRational;

fn domain(x: &coarsecoh::metric::FiniteMetricSpace, top: usize) -> Vec<Vec<Vec<PointId>>> {
    (0..=top).map(|n| tuples_of_width(x, None, 1.5, n)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cone_homotopy_is_exact_and_controlled(seed in any::<u64>(), shift in 1.0f64..4.0) {
        let x = generate_grid(1, 6.0, 1.0).unwrap();
        let dom = domain(&x, 2);
        let f = random_controlled_map::<BigRational>(&x, &dom, shift, seed).unwrap();
        let h = cone_homotopy_d(&f, 2).unwrap();
        prop_assert!(h.identity_failures(&f).is_empty());
        prop_assert!(h.support_failures(&x, &f).is_empty());

        let f2 = random_controlled_map::<Gf2>(&x, &dom, shift, seed).unwrap();
        prop_assert!(cone_homotopy_d(&f2, 2).unwrap().verify(&x, &f2).is_ok());
    }

    #[test]
    fn images_stay_within_the_shift(seed in any::<u64>()) {
        let x = generate_grid(2, 2.0, 1.0).unwrap();
        let dom = domain(&x, 1);
        let f = random_controlled_map::<Gf2>(&x, &dom, 1.5, seed).unwrap();
        for v in f.domain(0) {
            for (t, _) in f.image(v).unwrap().iter() {
                prop_assert!(x.dist(v[0], t[0]) <= 1.5 + DIST_TOL);
            }
        }
    }

    #[test]
    fn capped_control_functions_are_monotone(a in 0.0f64..5.0, b in 0.0f64..3.0, cap in 0.5f64..20.0, r in 0.0f64..50.0, s in 0.0f64..50.0) {
        let f = ControlFunction::affine(a, b).unwrap().with_cap(cap).unwrap();
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        prop_assert!(f.eval(lo) <= f.eval(hi) + 1e-12);
        prop_assert!(f.eval(hi) <= cap + 1e-12);
        prop_assert!((ControlFunction::affine(a, b).unwrap().eval(r) - (a + b * r)).abs() < 1e-9);
    }
}

#[test]
fn a_map_far_from_the_identity_is_still_homotopic() {
    let x = generate_grid(1, 6.0, 1.0).unwrap();
    let dom = domain(&x, 2);
    let f = random_controlled_map::<BigRational>(&x, &dom, 5.0, 7).unwrap();
    let h = cone_homotopy_d(&f, 2).unwrap();
    h.verify(&x, &f).unwrap();
    assert!(h.images(1).any(|(_, g)| !g.is_zero()));
}
