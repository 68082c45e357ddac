use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use germcalc::corpus::Corpus;
use germcalc::cyclic_quot::{
    arithmetic_witness, chain_to_quot, classify_t, quot_to_chain, CycQuot,
};
use germcalc::dual_graph::parse_graph;
use germcalc::ell_calc::EllDivisor;
use germcalc::germ_rules::{flip_transfer, forbidden_pair, lcm_all, ComponentType};
use germcalc::rational::Q;
use germcalc::resolution::{codiscrepancy, k_dot_components};
use germcalc::verify_paper;

fn divisor() -> impl Strategy<Value = EllDivisor> {
    (-8i64..8, -30i64..30, -30i64..30, -30i64..30).prop_map(|(c, p, q, r)| {
        EllDivisor::new(c, &[("P", 5, p), ("Q", 9, q), ("R", 2, r)]).unwrap()
    })
}

fn coprime_pair(max: u64) -> impl Strategy<Value = CycQuot> {
    (2..=max)
        .prop_flat_map(|n| (Just(n), 1..n))
        .prop_filter_map("coprime", |(n, q)| {
            (q.gcd(&n) == 1).then_some(CycQuot { n, q })
        })
}

/// Graph text of a chain of exceptional curves with a component on the first.
fn chain_text(chain: &[u64], order: &[usize]) -> String {
    let mut out = String::new();
    for &i in order {
        out.push_str(&format!("vertex e{i} kind=exc self=-{}\n", chain[i]));
    }
    out.push_str("vertex c kind=comp self=-1\nedge c e0\n");
    for i in 1..chain.len() {
        out.push_str(&format!("edge e{} e{i}\n", i - 1));
    }
    out
}

/// Random tree on `weights.len()` exceptional vertices; `parents[i]` picks
/// the parent of vertex `i + 1` among the earlier ones.
fn tree_text(weights: &[u64], parents: &[usize]) -> String {
    let mut out = String::new();
    for (i, w) in weights.iter().enumerate() {
        out.push_str(&format!("vertex e{i} kind=exc self=-{w}\n"));
    }
    for (i, p) in parents.iter().enumerate() {
        out.push_str(&format!("edge e{} e{}\n", p % (i + 1), i + 1));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ell_degree_is_additive(a in divisor(), b in divisor()) {
        prop_assert_eq!(a.tensor(&b).unwrap().ell_deg(), a.ell_deg() + b.ell_deg());
    }

    #[test]
    fn ell_dual_negates_and_is_involutive(a in divisor()) {
        prop_assert_eq!(a.dual().ell_deg(), -a.ell_deg());
        prop_assert_eq!(a.dual().dual(), a.clone());
        prop_assert!(a.tensor(&a.dual()).unwrap().ell_deg().is_zero());
    }

    #[test]
    fn ell_power_scales_degree(a in divisor(), k in -5i64..6) {
        prop_assert_eq!(a.pow(k).ell_deg(), Q::from_integer(k.into()) * a.ell_deg());
    }

    #[test]
    fn ell_riemann_roch(a in divisor()) {
        prop_assert_eq!(a.h0() - a.h1(), a.c() + 1);
        prop_assert!(a.h0() == 0 || a.h1() == 0);
    }

    #[test]
    fn hj_round_trip(s in coprime_pair(5000)) {
        let chain = quot_to_chain(s);
        prop_assert!(chain.iter().all(|&a| a >= 2));
        prop_assert_eq!(chain_to_quot(&chain).unwrap(), s);
    }

    #[test]
    fn reversed_chain_gives_inverse_residue(s in coprime_pair(5000)) {
        let mut chain = quot_to_chain(s);
        chain.reverse();
        let r = chain_to_quot(&chain).unwrap();
        prop_assert_eq!(r.n, s.n);
        prop_assert_eq!((r.q * s.q) % s.n, 1 % s.n);
    }

    #[test]
    fn t_witnesses_agree(s in coprime_pair(20000)) {
        let v = classify_t(&quot_to_chain(s)).unwrap();
        prop_assert_eq!(v.is_t(), arithmetic_witness(s).is_some());
    }

    #[test]
    fn t_family_is_recognized(d in 1u64..6, m in 2u64..40, a in 1u64..40) {
        prop_assume!(a < m && a.gcd(&m) == 1);
        let s = CycQuot { n: d * m * m, q: d * m * a - 1 };
        let v = classify_t(&quot_to_chain(s)).unwrap();
        prop_assert!(v.is_t());
    }

    #[test]
    fn chain_end_identity(s in coprime_pair(2000).prop_filter("short chain", |s| quot_to_chain(*s).len() <= 24)) {
        // A component on the first vertex: 1 − d_first = (1 + q)/n.
        let chain = quot_to_chain(s);
        let order: Vec<usize> = (0..chain.len()).collect();
        let g = parse_graph(&chain_text(&chain, &order)).unwrap();
        let ids: Vec<String> = order.iter().map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let d = codiscrepancy(&g, &refs).unwrap();
        let want = Q::one() - Q::new((1 + s.q).into(), s.n.into());
        prop_assert_eq!(d.get("e0").unwrap(), &want);
        let k = k_dot_components(&g).unwrap();
        prop_assert_eq!(&k.component("c").unwrap().k_dot_c, &(Q::from_integer((-1).into()) + want));
    }

    #[test]
    fn codiscrepancy_ignores_vertex_order(s in coprime_pair(500).prop_filter("short chain", |s| quot_to_chain(*s).len() <= 16), seed in any::<u64>()) {
        let chain = quot_to_chain(s);
        let mut order: Vec<usize> = (0..chain.len()).collect();
        let n = order.len();
        for i in (1..n).rev() {
            order.swap(i, (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize);
        }
        let a = parse_graph(&chain_text(&chain, &(0..n).collect::<Vec<_>>())).unwrap();
        let b = parse_graph(&chain_text(&chain, &order)).unwrap();
        let ka = k_dot_components(&a).unwrap();
        let kb = k_dot_components(&b).unwrap();
        for i in 0..n {
            prop_assert_eq!(ka.delta(&format!("e{i}")), kb.delta(&format!("e{i}")));
        }
    }

    #[test]
    fn tree_codiscrepancies_are_nonnegative(
        weights in prop::collection::vec(2u64..7, 1..7),
        parents in prop::collection::vec(0usize..6, 6),
    ) {
        let g = parse_graph(&tree_text(&weights, &parents[..weights.len() - 1])).unwrap();
        let ids: Vec<String> = (0..weights.len()).map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        // Trees that do not contract are rejected; contractible ones give d ≥ 0.
        if let Ok(d) = codiscrepancy(&g, &refs) {
            prop_assert!(d.coefficients.iter().all(|x| !x.is_negative()));
        }
    }

    #[test]
    fn flip_transfer_denominator_divides_index(
        index in 1u64..60,
        plus in prop::collection::vec(2u64..9, 0..3),
    ) {
        let kc = Q::new((-1).into(), index.into());
        let k = flip_transfer(index, &kc, &plus).unwrap();
        prop_assert!(k.is_positive());
        let l = lcm_all(&plus).max(1);
        prop_assert!(l.is_multiple_of(u64::try_from(k.denom().clone()).unwrap()));
    }
}

#[test]
fn forbidden_pair_is_symmetric() {
    for &a in ComponentType::ALL.iter() {
        for &b in ComponentType::ALL.iter() {
            assert_eq!(forbidden_pair(a, b), forbidden_pair(b, a), "{a} / {b}");
        }
    }
    let forbidden = ComponentType::ALL
        .iter()
        .flat_map(|&a| ComponentType::ALL.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| a < b && forbidden_pair(a, b).is_some())
        .count();
    assert_eq!(forbidden, 4);
}

#[test]
fn verify_paper_is_deterministic() {
    let corpus = Corpus::builtin();
    let a = verify_paper(&corpus, 11).to_string();
    let b = verify_paper(&corpus, 11).to_string();
    assert_eq!(a, b);
}
