use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use serde_json::json;

use substoch_core::classification::{
    classify, cyr_criterion, green_partial_sums, pruitt_certificate, similarity_scale, verify_pruitt, ClassifyOptions,
    Verdict,
};
use substoch_core::constructions::{build_named, Example2, Example2Sequence, Q};
use substoch_core::cycles::{disjoint_cycle_packing, ell_extremes, enumerate_cycles, omega};
use substoch_core::digraph::{classify_weighting, WeightedDigraph, WeightingTag};
use substoch_core::fvs::{min_cycle_transversal, DEFAULT_NODE_BUDGET};
use substoch_core::inequalities::{check_boyle_handelman, check_ksv, random_instance, signs_agree, SuiteSpec};
use substoch_core::scalar::{rational, rational_to_f64, Rational};
use substoch_core::spectral::{
    coates_charpoly, det_i_minus, nonzero_eig_count, neumann_partial_sum, perron_root, resolvent_diag,
};

fn instance(seed: u64, index: u64, order_max: usize) -> WeightedDigraph<Rational> {
    let spec = SuiteSpec { count: 1, seed, order_min: 2, order_max, max_denominator: 6 };
    random_instance(&spec, index)
}

fn tag_rank(t: WeightingTag) -> u8 {
    match t {
        WeightingTag::StrictlySubstochastic => 0,
        WeightingTag::TruthlySubstochastic => 1,
        WeightingTag::Substochastic | WeightingTag::Stochastic => 2,
        WeightingTag::NotSubstochastic => 3,
    }
}

fn prefix_family(values: &[(i64, i64)]) -> substoch_core::family::TruncationFamily<Rational> {
    let values = values.iter().map(|&(p, q)| Q(rational(p, q))).collect();
    Example2::new(Example2Sequence::Prefix { values }, false).unwrap().family().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn truncations_nest(name in prop::sample::select(vec!["example1", "prop1", "theorem2-fast"]), n in 2usize..30) {
        let params = if name == "example1" { json!({"sequence": {"kind": "geometric", "q": "1/2"}}) } else { json!({}) };
        let f = build_named::<f64>(name, &params).unwrap();
        let small = f.truncate(n).unwrap();
        let big = f.truncate(n + 1).unwrap();
        let restricted: Vec<_> = big.arcs().filter(|(u, v, _)| *u < n && *v < n).collect();
        let arcs: Vec<_> = small.arcs().collect();
        prop_assert_eq!(arcs, restricted);
    }

    #[test]
    fn adding_mass_never_tightens_class(seed in 0u64..1000, idx in 0u64..50, extra in 1i64..6) {
        let d = instance(seed, idx, 6);
        let before = classify_weighting(&d, 0.0);
        let bump = rational(extra, 6);
        let (u0, _, _) = d.arcs().next().unwrap();
        let arcs = d.arcs().enumerate().map(|(i, (u, v, w))| {
            let w = if i == 0 && u == u0 { w + &bump } else { w.clone() };
            (u, v, w)
        });
        let heavier = WeightedDigraph::new(d.order(), arcs.collect::<Vec<_>>()).unwrap();
        let after = classify_weighting(&heavier, 0.0);
        prop_assert!(tag_rank(after.tag) >= tag_rank(before.tag));
    }

    #[test]
    fn packing_at_most_transversal(seed in 0u64..1000, idx in 0u64..50) {
        let d = instance(seed, idx, 8);
        let w = min_cycle_transversal(&d, DEFAULT_NODE_BUDGET);
        prop_assert!(d.is_transversal(&w.vertices));
        let packing = disjoint_cycle_packing(&d);
        prop_assert!(packing.len() <= w.size());
    }

    #[test]
    fn gain_bridging(seed in 0u64..1000, idx in 0u64..50) {
        let d = instance(seed, idx, 6).to_f64();
        for c in enumerate_cycles(&d, None, Some(200)).cycles {
            let l = c.len() as f64;
            let s = c.weight;
            let g = c.gain().value();
            prop_assert!(1.0 - s <= l * (1.0 - g) + 1e-12);
            let series: f64 = (0..c.len()).map(|i| g.powi(i as i32)).sum();
            prop_assert!(((1.0 - s) - (1.0 - g) * series).abs() <= 1e-12);
        }
    }

    #[test]
    fn omega_monotone_and_below_perron(seed in 0u64..1000, idx in 0u64..50) {
        let d = instance(seed, idx, 7);
        let rho = perron_root(&d, 1e-13).value;
        let mut prev = 0.0;
        for n in 1..=d.order() {
            let w = omega(&d, n, false, None).unwrap().map_or(0.0, |g| g.value());
            prop_assert!(w >= prev);
            prop_assert!(w <= rho * (1.0 + 1e-10));
            prev = w;
        }
    }

    #[test]
    fn coates_matches_determinant(seed in 0u64..1000, idx in 0u64..50) {
        let d = instance(seed, idx, 8);
        let p = coates_charpoly(&d, 1 << 22).unwrap();
        for z in [rational(1, 1), rational(1, 2), rational(2, 1)] {
            let m = d.scaled(&z);
            prop_assert_eq!(p.eval(&z), det_i_minus(&m));
        }
    }

    #[test]
    fn charpoly_degree_bound(seed in 0u64..1000, idx in 0u64..50) {
        let d = instance(seed, idx, 8);
        let p = coates_charpoly(&d, 1 << 22).unwrap();
        let fvs = min_cycle_transversal(&d, DEFAULT_NODE_BUDGET).size();
        let ell = ell_extremes(&d, None).max.unwrap_or(0);
        let deg = p.degree().unwrap_or(0);
        prop_assert!(deg <= d.order().min(fvs * ell));
        prop_assert!(nonzero_eig_count(&p) <= deg);
    }

    #[test]
    fn collatz_wielandt_bracket(seed in 0u64..1000, idx in 0u64..50) {
        let d = instance(seed, idx, 8).to_f64();
        let tol = 1e-11;
        let r = perron_root(&d, tol);
        prop_assert!(r.lower <= r.value && r.value <= r.upper);
        prop_assert!(r.upper - r.lower <= tol * r.value.max(f64::MIN_POSITIVE) * (1.0 + 1e-6));
    }

    #[test]
    fn resolvent_matches_neumann(seed in 0u64..1000, idx in 0u64..50, p in 5usize..60) {
        let d = instance(seed, idx, 6);
        let lam = perron_root(&d, 1e-13).value;
        prop_assume!(lam < 0.98);
        let df = d.to_f64();
        for v in 0..d.order() {
            let g = rational_to_f64(&resolvent_diag(&d, v).unwrap());
            let partial = neumann_partial_sum(&df, v, p);
            // the tail is bounded by G(v,v) times the decay of the last step
            let tail = g * lam.powi(p as i32 + 1) / (1.0 - lam) * d.order() as f64 + 1e-12;
            prop_assert!(partial <= g + 1e-12);
            prop_assert!(g - partial <= tail);
        }
    }

    #[test]
    fn similarity_scaling_divides_root(seed in 0u64..1000, idx in 0u64..50, xi in prop::collection::vec(1u32..50, 8), lam in 1u32..8) {
        let d = instance(seed, idx, 8).to_f64();
        let xi: Vec<f64> = xi[..d.order()].iter().map(|&x| x as f64 / 7.0).collect();
        let lam = lam as f64 / 4.0;
        let s = similarity_scale(&d, &xi, &lam).unwrap();
        let a = perron_root(&s, 1e-14).value * lam;
        let b = perron_root(&d, 1e-14).value;
        prop_assert!((a - b).abs() <= 1e-10 * b);
    }

    #[test]
    fn pruitt_certificates_reverify(seed in 0u64..1000, idx in 0u64..50, num in 1i64..16) {
        let d = instance(seed, idx, 6);
        let lam = rational(num, 4);
        if let Some(xi) = pruitt_certificate(&d, &lam).unwrap() {
            prop_assert!(xi.iter().all(|x| x.is_positive()));
            prop_assert!(verify_pruitt(&d, &xi, &lam).is_some());
            let ax: Vec<Rational> = (0..d.order())
                .map(|u| d.out(u).iter().map(|(v, w)| w * &xi[*v]).sum())
                .collect();
            prop_assert!(ax.iter().zip(&xi).all(|(a, x)| *a <= &lam * x));
            prop_assert!(ax.iter().zip(&xi).any(|(a, x)| *a < &lam * x));
        }
    }

    #[test]
    fn green_sums_monotone(seed in 0u64..1000, idx in 0u64..50) {
        let d = instance(seed, idx, 6);
        let lam = Rational::one();
        let order = d.order();
        let pts = green_partial_sums(&d, 0, &lam, &[0, 4, 8, 16, 32]);
        prop_assert!(pts.windows(2).all(|w| w[0].1 <= w[1].1));
        let keep: Vec<usize> = (0..order - 1).collect();
        let sub = d.induced(&keep);
        let sub_pts = green_partial_sums(&sub, 0, &lam, &[0, 4, 8, 16, 32]);
        prop_assert!(sub_pts.iter().zip(&pts).all(|(a, b)| a.1 <= b.1));
    }

    #[test]
    fn cyr_families_never_transient(values in prop::collection::vec((1i64..9, 9i64..12), 1..6)) {
        let f = prefix_family(&values);
        prop_assert!(cyr_criterion(&f.metadata()).unwrap());
        let opts = ClassifyOptions { n_max: values.len() + 1, p_max: 200, ..ClassifyOptions::default() };
        prop_assert_ne!(classify(&f, &opts).verdict, Verdict::Transient);
    }

    #[test]
    fn ksv_chain_and_sign_agreement(seed in 0u64..1000, idx in 0u64..50) {
        let d = instance(seed, idx, 7);
        let bh = check_boyle_handelman(&d);
        let ksv = check_ksv(&d);
        prop_assert!(bh.passed() && ksv.passed());
        let df = d.to_f64();
        prop_assert!(signs_agree(bh.signs(), check_boyle_handelman(&df).signs()));
        prop_assert!(signs_agree(ksv.signs(), check_ksv(&df).signs()));

        let det = rational_to_f64(&det_i_minus(&d));
        let lam = perron_root(&d, 1e-14).value;
        let n = d.order() as f64;
        let r = nonzero_eig_count(&coates_charpoly(&d, 1 << 22).unwrap()) as i32;
        let slack = 1e-9;
        prop_assert!(det <= 1.0 - lam.powi(r) + slack);
        prop_assert!(1.0 - lam.powi(r) <= 1.0 - lam.powi(n as i32) + slack);
        prop_assert!(1.0 - lam.powi(n as i32) <= n * (1.0 - lam) + slack);
    }
}

#[test]
fn green_sums_grow_with_truncation_order() {
    let f = build_named::<Rational>("example1", &json!({"sequence": {"kind": "geometric", "q": "1/2"}})).unwrap();
    let mut prev = Rational::zero();
    for n in 2..12 {
        let d = f.truncate(n).unwrap();
        let g = green_partial_sums(&d, 0, &Rational::one(), &[64]).pop().unwrap().1;
        assert!(g >= prev, "n = {n}");
        prev = g;
    }
}
