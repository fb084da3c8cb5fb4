use proptest::prelude::*;

use lamshift::axioms::{self, axiom_matches, prove_equal};
use lamshift::bisim::{self, default_pool, ProbePool};
use lamshift::cps::{cps_equiv, cps_translate, EquivVerdict};
use lamshift::lts::{self, Label};
use lamshift::reduction::{self, Decomposition, Observable, Rule};
use lamshift::syntax::{alpha_eq, Frame, PureContext};
use lamshift::testgen::{self, gen_indexed, GenConfig};
use lamshift::{parse, print, Term, Var};

fn closed_cfg(max_size: usize) -> GenConfig {
    GenConfig { max_size, seed: 7, ..GenConfig::default() }
}

fn closed_term(max_size: usize) -> impl Strategy<Value = Term> {
    any::<u64>().prop_map(move |i| gen_indexed(&closed_cfg(max_size), i))
}

fn open_term(max_size: usize) -> impl Strategy<Value = Term> {
    any::<u64>().prop_map(move |i| gen_indexed(&GenConfig { closed: false, ..closed_cfg(max_size) }, i))
}

/// A closed value: every closed term becomes one under a binder.
fn closed_value(max_size: usize) -> impl Strategy<Value = Term> {
    closed_term(max_size).prop_map(|t| if t.is_value() { t } else { Term::lam("y", t) })
}

fn pure_context() -> impl Strategy<Value = PureContext> {
    let frame = prop_oneof![
        closed_value(6).prop_map(Frame::AppliedValue),
        closed_term(6).prop_map(Frame::PendingArg),
    ];
    prop::collection::vec(frame, 0..3).prop_map(|fs| PureContext::new(fs).expect("values in value frames"))
}

fn is_stuck(t: &Term) -> bool {
    matches!(reduction::decompose(t).unwrap(), Decomposition::IsStuck { .. })
}

fn small_pool() -> ProbePool {
    ProbePool { fuel: 100, depth: 2, ..default_pool() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_terms_parse_back(t in open_term(24)) {
        let back = parse(&print(&t)).expect("printer output parses");
        prop_assert!(alpha_eq(&back, &t), "{} reparsed as {}", t, back);
    }

    #[test]
    fn substituting_an_absent_variable_is_identity(t in open_term(16), s in closed_term(6)) {
        let x = Var::new("zz").unwrap();
        prop_assume!(!t.free_vars().contains(&x));
        prop_assert_eq!(t.substitute(&x, &s), t);
    }

    #[test]
    fn context_composition_plugs_inside_out(c1 in pure_context(), c2 in pure_context(), t in closed_term(8)) {
        prop_assert_eq!(c1.then(&c2).plug(t.clone()), c2.plug(c1.plug(t)));
    }

    #[test]
    fn alpha_equivalence_is_an_equivalence(a in open_term(10), b in open_term(10)) {
        let renamed = parse(&print(&a)).unwrap();
        prop_assert!(alpha_eq(&a, &a));
        prop_assert_eq!(alpha_eq(&a, &renamed), alpha_eq(&renamed, &a));
        prop_assert_eq!(alpha_eq(&a, &b), alpha_eq(&b, &a));
        if alpha_eq(&a, &b) {
            prop_assert!(alpha_eq(&renamed, &b));
        }
    }

    #[test]
    fn decomposition_is_unique_and_exact(t in closed_term(20)) {
        let d = reduction::decompose(&t).unwrap();
        prop_assert_eq!(d.recompose(), t.clone());
        let all = testgen::all_decompositions(&t);
        prop_assert_eq!(all.len(), 1, "{} has {} decompositions", t, all.len());
        prop_assert_eq!(&all[0], &d);
        prop_assert_eq!(matches!(d, Decomposition::IsValue(_)), t.is_value());
    }

    #[test]
    fn stepping_is_deterministic(t in closed_term(20)) {
        prop_assert_eq!(reduction::step(&t).unwrap(), reduction::step(&t).unwrap());
    }

    #[test]
    fn stuck_results_have_a_shift_in_a_pure_context(t in closed_term(20)) {
        if let Observable::Stuck(s) = reduction::evaluate(&t, 200).unwrap() {
            prop_assert!(is_stuck(&s));
            prop_assert!(s.has_shift());
        }
    }

    #[test]
    fn internal_transition_is_reduction(t in closed_term(20)) {
        let tau = lts::tau_step(&t).unwrap();
        let step = reduction::step(&t).unwrap();
        prop_assert_eq!(tau, step);
    }

    #[test]
    fn context_probe_is_capture_under_reset(t in closed_term(16), e in pure_context()) {
        let probed = lts::probe_context(&t, &e).unwrap();
        if let Some(r) = probed {
            prop_assert!(is_stuck(&t));
            let via_tau = lts::tau_step(&Term::reset(e.plug(t.clone()))).unwrap();
            prop_assert_eq!(via_tau, Some(r));
        }
    }

    #[test]
    fn value_probe_is_application(t in closed_term(16), v in closed_value(6)) {
        if let Some(r) = lts::probe_value(&t, &v).unwrap() {
            prop_assert!(matches!(t, Term::Lam(..)));
            prop_assert_eq!(lts::tau_step(&Term::app(t.clone(), v)).unwrap(), Some(r));
        }
    }

    #[test]
    fn each_label_has_at_most_one_derivation(t in closed_term(16), v in closed_value(6), e in pure_context()) {
        for label in [Label::Tau, Label::ValueProbe(v), Label::ContextProbe(e)] {
            let d1 = lts::derive(&t, &label).unwrap();
            let d2 = lts::derive(&t, &label).unwrap();
            prop_assert_eq!(d1.as_ref().map(|d| d.target().clone()), d2.as_ref().map(|d| d.target().clone()));
            let direct = match &label {
                Label::Tau => lts::tau_step(&t).unwrap(),
                Label::ValueProbe(v) => lts::probe_value(&t, v).unwrap(),
                Label::ContextProbe(e) => lts::probe_context(&t, e).unwrap(),
            };
            prop_assert_eq!(d1.map(|d| d.target().clone()), direct);
        }
    }

    #[test]
    fn cps_output_is_pure_and_keeps_free_variables(t in open_term(20)) {
        let c = cps_translate(&t);
        prop_assert!(!c.term().has_control());
        prop_assert_eq!(c.term().free_vars(), t.free_vars());
    }

    #[test]
    fn generated_terms_are_closed_and_bounded(i in any::<u64>(), max_size in 2usize..40) {
        let cfg = GenConfig { max_size, ..closed_cfg(max_size) };
        prop_assert!(cfg.validate().is_ok());
        let t = gen_indexed(&cfg, i);
        prop_assert!(t.is_closed());
        prop_assert!(t.size() <= max_size);
        prop_assert_eq!(gen_indexed(&cfg, i), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn a_reduction_step_is_bisimilar(t in closed_term(12)) {
        if let Some(next) = reduction::step(&t).unwrap() {
            let v = bisim::check(&t, &next, &small_pool()).unwrap();
            prop_assert!(!v.is_distinguished(), "{} vs {}: {:?}", t, next, v);
        }
    }

    #[test]
    fn verdicts_are_symmetric(a in closed_term(10), b in closed_term(10)) {
        let pool = small_pool();
        let ab = bisim::check(&a, &b, &pool).unwrap();
        let ba = bisim::check(&b, &a, &pool).unwrap();
        prop_assert_eq!(ab.is_distinguished(), ba.is_distinguished());
    }

    #[test]
    fn distinctions_survive_more_depth_and_probes(a in closed_term(10), b in closed_term(10), extra in closed_value(5)) {
        let pool = small_pool();
        if let bisim::Verdict::Distinguished { trace, .. } = bisim::check(&a, &b, &pool).unwrap() {
            prop_assert!(bisim::replay(&a, &b, &trace, pool.fuel));
            let mut bigger = ProbePool { depth: pool.depth + 1, ..pool.clone() };
            bigger.values.push(extra);
            prop_assert!(bisim::check(&a, &b, &bigger).unwrap().is_distinguished());
        }
    }

    #[test]
    fn reduction_preserves_cps_meaning(t in closed_term(12)) {
        if let Some(next) = reduction::step(&t).unwrap() {
            let v = cps_equiv(&t, &next, 2000);
            prop_assert!(!matches!(v, EquivVerdict::NotEquivalent(..)), "{} -> {}: {:?}", t, next, v);
        }
    }

    #[test]
    fn proofs_of_single_rewrites_replay(t in closed_term(10), pick in any::<prop::sample::Index>()) {
        let rewrites = axiom_matches(&t);
        prop_assume!(!rewrites.is_empty());
        let rw = &rewrites[pick.index(rewrites.len())];
        let proof = prove_equal(&t, &rw.result, 2000);
        let proof = proof.expect("a one-step rewrite is within budget");
        prop_assert!(axioms::replay(&proof));
        prop_assert!(proof.steps.len() <= 1);
        prop_assert!(!matches!(cps_equiv(&t, &rw.result, 2000), EquivVerdict::NotEquivalent(..)));
    }
}

#[test]
fn default_corpus_covers_every_rule() {
    let rep = testgen::diff_lts_reduction(1000, &GenConfig::default(), 200);
    assert!(rep.failures.is_empty(), "{:?}", rep.failures);
    for rule in testgen::expected_rules() {
        assert!(rep.covered(rule), "{rule} never fired: {:?}", rep.rule_coverage);
    }
    for r in [Rule::Rbeta, Rule::Rshift, Rule::Rreset] {
        assert!(rep.covered(r.name()));
    }
}

#[test]
fn default_corpus_round_trips() {
    for t in testgen::corpus(1000, &GenConfig::default()) {
        assert!(t.is_closed());
        assert_eq!(parse(&print(&t)).unwrap(), t);
    }
}
