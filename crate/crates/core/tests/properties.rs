use proptest::prelude::*;
use symflow::linalg::Mat;
use symflow::lorenz::{self, LorenzModel};
use symflow::measures::{balance_residual, stationary};
use symflow::spectrum;
use symflow::suspension::SuspensionSystem;
use symflow::thermo;
use symflow::witness;
use symflow::{d_star, InvariantMeasure, LocallyConstantFunction as Lcf, MarkovComponent, Sft};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

/// Full 3-shift chain from positive weights.
fn chain(s: &Sft, w: &[f64]) -> MarkovComponent {
    let k = s.k();
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let r = &w[i * k..(i + 1) * k];
            let t: f64 = r.iter().sum();
            r.iter().map(|x| x / t).collect()
        })
        .collect();
    MarkovComponent::new(s, 1, Mat::from_rows(&rows).unwrap()).unwrap()
}

fn potential(s: &Sft, v: &[f64]) -> Lcf {
    Lcf::from_fn(s, 2, |w| v[w[0] * s.k() + w[1]]).unwrap()
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n)
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// Random 0/1 matrices that survive trimming as an irreducible SFT.
fn irreducible_sft() -> impl Strategy<Value = Sft> {
    (2usize..5, prop::collection::vec(prop::bool::weighted(0.6), 16)).prop_filter_map("reducible", |(k, bits)| {
        let rows: Vec<Vec<u8>> = (0..k).map(|i| (0..k).map(|j| u8::from(bits[i * 4 + j])).collect()).collect();
        let s = Sft::validate_and_trim(&rows).ok()?;
        (s.is_irreducible() && s.k() >= 2).then_some(s)
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn entropy_is_the_growth_rate_of_word_counts(s in irreducible_sft()) {
        prop_assume!(s.is_aperiodic());
        let h = s.topological_entropy(1e-13).unwrap();
        prop_assert!(h <= (s.k() as f64).ln() + 1e-12);
        let ratio = (s.word_count(61) as f64 / s.word_count(60) as f64).ln();
        prop_assert!((ratio - h).abs() < 1e-3, "h {} vs count ratio {}", h, ratio);
    }

    #[test]
    fn stationary_vectors_balance(w in weights(9)) {
        let s = Sft::full_shift(3);
        let c = chain(&s, &w);
        let pi = stationary(c.q()).unwrap();
        prop_assert!(balance_residual(c.q(), &pi) <= 1e-12);
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn variational_inequality(w in weights(9), v in values(9)) {
        let s = Sft::full_shift(3);
        let g = potential(&s, &v);
        let mu = chain(&s, &w);
        let p = thermo::pressure(&s, &g, 1e-13).unwrap();
        prop_assert!(p.value - (mu.entropy() + mu.integrate(&g)) >= -1e-9);
        let eq = &p.equilibrium;
        prop_assert!((p.value - eq.entropy() - eq.integrate(&g)).abs() <= 1e-8);
    }

    #[test]
    fn pressure_is_convex_and_mean_is_monotone(v in values(4)) {
        let s = Sft::full_shift(2);
        let g = potential(&s, &v);
        prop_assume!(g.max() - g.min() > 1e-3);
        let betas: Vec<f64> = (0..=20).map(|i| -4.0 + 0.4 * i as f64).collect();
        let ps: Vec<thermo::Pressure> = betas.iter().map(|&b| thermo::pressure(&s, &g.scale(b), 1e-13).unwrap()).collect();
        for i in 1..ps.len() - 1 {
            let d2 = ps[i + 1].value - 2.0 * ps[i].value + ps[i - 1].value;
            prop_assert!(d2 >= -1e-8);
        }
        let means: Vec<f64> = ps.iter().map(|p| p.equilibrium.integrate(&g)).collect();
        for m in means.windows(2) {
            prop_assert!(m[1] - m[0] >= -1e-10);
        }
    }

    #[test]
    fn spectrum_is_concave_and_witness_consistent(v in values(4)) {
        let s = Sft::full_shift(2);
        let g = potential(&s, &v);
        let r = spectrum::birkhoff_range(&s, &g).unwrap();
        prop_assume!(r.max - r.min > 0.05);
        let alphas: Vec<f64> = (0..=8).map(|i| r.min + (r.max - r.min) * (0.1 + 0.1 * i as f64)).collect();
        let hs: Vec<f64> = alphas
            .iter()
            .map(|&a| {
                let res = spectrum::conditional_entropy_spectrum(&s, &g, a, 1e-11).unwrap();
                let mu = InvariantMeasure::new(vec![(1.0, res.witness.clone())]).unwrap();
                assert!((witness::cylinder_mean(&mu, &g) - a).abs() <= 1e-8);
                assert!((witness::block_entropy(&mu) - res.value).abs() <= 1e-7);
                res.value
            })
            .collect();
        for i in 1..hs.len() - 1 {
            prop_assert!(hs[i] - 0.5 * (hs[i - 1] + hs[i + 1]) >= -1e-7);
        }
    }

    #[test]
    fn linear_functional_is_affine_along_mixtures(w1 in weights(9), w2 in weights(9), v in values(9)) {
        let s = Sft::full_shift(3);
        let u = potential(&s, &v);
        let a = InvariantMeasure::new(vec![(1.0, chain(&s, &w1))]).unwrap();
        let b = InvariantMeasure::new(vec![(1.0, chain(&s, &w2))]).unwrap();
        let (ia, ib) = (a.integrate(&u), b.integrate(&u));
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let m = InvariantMeasure::mixture(&[(t, &a), (1.0 - t, &b)]).unwrap();
            prop_assert!((m.integrate(&u) - (t * ia + (1.0 - t) * ib)).abs() <= 1e-12);
        }
    }

    #[test]
    fn d_star_is_a_metric(w1 in weights(9), w2 in weights(9), w3 in weights(9)) {
        let s = Sft::full_shift(3);
        let m: Vec<InvariantMeasure> =
            [w1, w2, w3].iter().map(|w| InvariantMeasure::new(vec![(1.0, chain(&s, w))]).unwrap()).collect();
        let d = |i: usize, j: usize| d_star(&m[i], &m[j], 4).unwrap();
        prop_assert_eq!(d(0, 0), 0.0);
        prop_assert!((d(0, 1) - d(1, 0)).abs() <= 1e-15);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
    }

    #[test]
    fn constant_roof_scales_abramov_entropy(w in weights(9), c in 0.1f64..5.0) {
        let s = Sft::full_shift(3);
        let sys = SuspensionSystem::new(s.clone(), Lcf::constant(&s, c).unwrap()).unwrap();
        let mu = InvariantMeasure::new(vec![(1.0, chain(&s, &w))]).unwrap();
        prop_assert!((sys.abramov_entropy(&mu) - mu.entropy() / c).abs() <= 1e-12);
    }

    #[test]
    fn orthant_weights_in_one_dimension(lo in 0.0f64..0.49, hi in 0.51f64..1.0, t in 0.01f64..0.99) {
        let alpha = lo + t * (hi - lo);
        let th = witness::orthant_combination_means(&[alpha], &[vec![lo], vec![hi]]).unwrap();
        prop_assert!((th[0] * lo + th[1] * hi - alpha).abs() <= 1e-10);
        prop_assert!(th.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn lorenz_x_track_ignores_y(x0 in -1.0f64..1.0, y0 in -1.0f64..1.0, y1 in -1.0f64..1.0) {
        prop_assume!(x0.abs() > 1e-6);
        let m = LorenzModel::example();
        let a = lorenz::simulate_return_map(&m, x0, y0, 200).unwrap();
        let b = lorenz::simulate_return_map(&m, x0, y1, 200).unwrap();
        prop_assert_eq!(a.xs(), b.xs());
        for (p, q) in a.points.windows(2).zip(b.points.windows(2)) {
            prop_assert!((p[1].1 - q[1].1).abs() <= 0.25 * (p[0].1 - q[0].1).abs() + 1e-15);
        }
        prop_assert!(a.points.iter().all(|p| p.0.abs() <= 1.0 && p.1.abs() <= 1.0));
    }
}
