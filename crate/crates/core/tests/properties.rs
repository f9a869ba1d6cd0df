use anisobesov::construct::majorize;
use anisobesov::halfline::{LogGrid, PiecewisePower};
use anisobesov::params::{embedding_target, AnisoParams};
use anisobesov::smoothness::besov_seminorm;
use anisobesov::{Exponent, GridFunction};
use approx::relative_eq;
use proptest::prelude::*;

fn grid_function() -> impl Strategy<Value = GridFunction> {
    (1usize..=6, 1usize..=6, 0.05f64..2.0, 0.05f64..2.0).prop_flat_map(|(a, b, hx, hy)| {
        prop::collection::vec(-3.0f64..3.0, a * b).prop_map(move |samples| {
            GridFunction::new(vec![a, b], vec![hx, hy], vec![0.0, 0.0], samples).unwrap()
        })
    })
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![Just(Exponent::Infinite), (1.0f64..8.0).prop_map(Exponent::Finite)]
}

proptest! {
    #[test]
    fn rearrangement_is_equimeasurable(f in grid_function(), y in 0.0f64..3.0) {
        let star = f.rearrangement();
        prop_assert_eq!(star.level_measure(y), f.distribution_function(y).unwrap());
    }

    #[test]
    fn diagonal_lorentz_is_lp(f in grid_function(), p in 1.0f64..6.0) {
        let lorentz = f.rearrangement().lorentz_norm(p, p).unwrap();
        let lp = f.lp_norm(p).unwrap();
        prop_assert!(relative_eq!(lorentz, lp, max_relative = 1e-12), "{lorentz} vs {lp}");
    }

    #[test]
    fn dilation_scales_lp(f in grid_function(), lx in 0.25f64..4.0, ly in 0.25f64..4.0, p in 1.0f64..4.0) {
        let g = f.dilate(&[lx, ly]).unwrap();
        let expected = (lx * ly).powf(-1.0 / p) * f.lp_norm(p).unwrap();
        prop_assert!(relative_eq!(g.lp_norm(p).unwrap(), expected, max_relative = 1e-12));
    }

    #[test]
    fn seminorm_is_homogeneous(f in grid_function(), c in 0.1f64..10.0, theta in exponent()) {
        let grid = LogGrid::new(1e-3, 10.0, 8).unwrap();
        let base = besov_seminorm(&f, 0, 0.5, 1.0, theta, 1, &grid).unwrap().total();
        let scaled = besov_seminorm(&f.map(|v| c * v).unwrap(), 0, 0.5, 1.0, theta, 1, &grid)
            .unwrap()
            .total();
        if base.is_finite() {
            prop_assert!(relative_eq!(scaled, c * base, max_relative = 1e-9), "{scaled} vs {}", c * base);
        } else {
            prop_assert!(scaled.is_infinite());
        }
    }

    #[test]
    fn weights_sum_to_one(
        r in prop::collection::vec(0.2f64..3.0, 1..=4),
        p_base in 1.0f64..3.0,
        spread in 0.0f64..0.5,
        theta in exponent(),
    ) {
        let n = r.len();
        let p: Vec<f64> = (0..n).map(|j| p_base + spread * j as f64 / n as f64).collect();
        if let Ok(a) = AnisoParams::derive(r, p, vec![theta; n]) {
            let sum: f64 = a.beta().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12, "sum of weights {sum}");
        }
    }

    #[test]
    fn equal_axes_keep_theta(theta in exponent(), q in 2.5f64..3.5) {
        let a = AnisoParams::derive(vec![1.0; 2], vec![2.0; 2], vec![theta; 2]).unwrap();
        let t = embedding_target(&a, &[q, q]).unwrap();
        prop_assert_eq!(t.theta_prime[0], theta);
        prop_assert_eq!(t.kappa[0], 1.0 - 2.0 * (0.5 - 1.0 / q));
    }

    #[test]
    fn inverse_undoes_evaluate(
        c in 0.1f64..10.0,
        breaks in prop::collection::btree_set(1u32..1000, 0..4),
        exps in prop::collection::vec(0.1f64..3.0, 5),
        t in 1e-3f64..1e3,
    ) {
        let breaks: Vec<f64> = breaks.into_iter().map(|b| f64::from(b) / 100.0).collect();
        let psi = PiecewisePower::continuous(c, breaks.clone(), exps[..=breaks.len()].to_vec()).unwrap();
        let back = psi.inverse(psi.evaluate(t)).unwrap();
        prop_assert!(relative_eq!(back, t, max_relative = 1e-10), "{back} vs {t}");
    }

    #[test]
    fn majorant_dominates_and_is_bounded(
        breaks in prop::collection::btree_set(1u32..1000, 1..4),
        exps in prop::collection::vec(0.0f64..1.0, 4),
        theta in exponent(),
    ) {
        let alpha = 0.5;
        let delta = 0.2;
        let breaks: Vec<f64> = breaks.into_iter().map(|b| f64::from(b) / 100.0).collect();
        let m = breaks.len();
        // decay above alpha + delta at 0, below alpha - delta at infinity
        let mut e: Vec<f64> = exps[..=m].to_vec();
        e[0] = 0.8 + 0.2 * e[0];
        e[m] = 0.2 * e[m];
        let psi = PiecewisePower::continuous(1.0, breaks, e).unwrap();
        let r = majorize(&psi, alpha, delta, theta).unwrap();
        prop_assert!(r.certificate.holds(), "{:?}", r.certificate);
        prop_assert!(r.norm_ratio <= r.chain_bound * (1.0 + 1e-9), "{} > {}", r.norm_ratio, r.chain_bound);
    }

    #[test]
    fn exponent_text_round_trip(e in exponent()) {
        prop_assert_eq!(e.to_string().parse::<Exponent>().unwrap(), e);
    }
}
