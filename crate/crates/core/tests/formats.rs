use lexalloc::fixtures::{FixtureSet, FILES};
use lexalloc::format::{
    parse_allocation, parse_dimacs, parse_hypergraph, parse_instance, serialize_allocation, serialize_dimacs,
    serialize_hypergraph, serialize_instance, ReductionSidecar,
};
use lexalloc::generate::{generate, GeneratorSpec, InstanceKind};
use lexalloc::reductions::{CnfFormula, Hypergraph, ReductionKind, Source};
use lexalloc::Error;
use proptest::prelude::*;

fn stems(ext: &str) -> Vec<&'static str> {
    FILES.iter().filter_map(|(name, _)| name.strip_suffix(ext)).filter(|s| !s.ends_with(".alloc")).collect()
}

#[test]
fn every_instance_fixture_round_trips() {
    let set = FixtureSet::embedded();
    for stem in stems(".json") {
        let inst = set.instance(stem).unwrap();
        let canonical = serialize_instance(&inst);
        assert_eq!(parse_instance(&canonical).unwrap(), inst, "{stem}");
        assert_eq!(serialize_instance(&parse_instance(&canonical).unwrap()), canonical, "{stem}");
    }
}

#[test]
fn every_allocation_fixture_round_trips() {
    let set = FixtureSet::embedded();
    for (alloc, inst) in [("seq1221", "example1"), ("mms-not-efx", "chores5"), ("ef1-not-mms", "ef1-not-mms"), ("efx-not-mms", "efx-not-mms")] {
        let inst = set.instance(inst).unwrap();
        let a = set.allocation(alloc, &inst).unwrap();
        assert!(a.is_complete(&inst), "{alloc}");
        let text = serialize_allocation(&a, &inst);
        assert_eq!(parse_allocation(&text, &inst).unwrap(), a);
        assert_eq!(serialize_allocation(&parse_allocation(&text, &inst).unwrap(), &inst), text);
    }
}

#[test]
fn thm4_shape() {
    let inst = FixtureSet::embedded().instance("thm4").unwrap();
    assert_eq!((inst.n(), inst.m()), (4, 7));
}

#[test]
fn orderings_must_be_permutations() {
    let twice = r#"{"version": "1", "agents": 1, "items": ["a", "b"], "orderings": [[["a", "good"], ["a", "chore"]]]}"#;
    let short = r#"{"version": "1", "agents": 1, "items": ["a", "b"], "orderings": [[["a", "good"]]]}"#;
    let dup_label = r#"{"version": "1", "agents": 1, "items": ["a", "a"], "orderings": [[["a", "good"], ["a", "good"]]]}"#;
    for doc in [twice, short, dup_label] {
        assert!(matches!(parse_instance(doc), Err(Error::Document { .. })), "{doc}");
    }
}

#[test]
fn malformed_documents_are_rejected() {
    let cases = [
        ("", "empty"),
        (r#"{"version": "2", "agents": 0, "items": [], "orderings": []}"#, "version"),
        (r#"{"version": "1", "agents": 2, "items": [], "orderings": [[]]}"#, "agent count"),
        (r#"{"version": "1", "agents": 1, "items": ["a"], "orderings": [[["a", "neutral"]]]}"#, "polarity"),
        (r#"{"version": "1", "agents": 1, "items": [], "orderings": [[]], "extra": 1}"#, "unknown field"),
    ];
    for (doc, what) in cases {
        assert!(matches!(parse_instance(doc), Err(Error::Document { .. } | Error::Parse { .. })), "{what}");
    }
    let inst = FixtureSet::embedded().instance("example1").unwrap();
    for doc in [
        r#"{"version": "1", "bundles": [["o1"]]}"#,
        r#"{"version": "1", "bundles": [["o1"], ["o1"]]}"#,
        r#"{"version": "1", "bundles": [["o9"], []]}"#,
    ] {
        assert!(matches!(parse_allocation(doc, &inst), Err(Error::Document { .. })), "{doc}");
    }
}

#[test]
fn document_errors_name_the_field() {
    let err = parse_instance(r#"{"version": "1", "agents": 1, "items": ["a", ""], "orderings": [[["a", "good"]]]}"#).unwrap_err();
    assert!(matches!(&err, Error::Document { field, .. } if field == "items[1]"), "{err}");
    let inst = FixtureSet::embedded().instance("example1").unwrap();
    let err = parse_allocation(r#"{"version": "1", "bundles": [["o1", "o2"], ["o3", "o2"]]}"#, &inst).unwrap_err();
    assert!(matches!(&err, Error::Document { field, .. } if field == "bundles[1][1]"), "{err}");
}

#[test]
fn dimacs_and_hypergraph_fixtures() {
    let set = FixtureSet::embedded();
    let y1 = set.cnf("y1").unwrap();
    assert_eq!(y1, CnfFormula::new(1, vec![vec![1]]).unwrap());
    assert_eq!(parse_dimacs(&serialize_dimacs(&y1)).unwrap(), y1);
    let sat = set.cnf("sat223-min").unwrap();
    assert_eq!(parse_dimacs(&serialize_dimacs(&sat)).unwrap(), sat);
    let h = set.hypergraph("edge123").unwrap();
    assert_eq!(h, Hypergraph::new(3, vec![vec![1, 2, 3]]).unwrap());
    assert_eq!(parse_hypergraph(&serialize_hypergraph(&h)).unwrap(), h);
}

#[test]
fn dimacs_errors_carry_lines() {
    for (text, line) in [("1 0\n", 1), ("p cnf 1 1\nx 0\n", 2), ("p cnf 1 2\n1 0\n", 2), ("p cnf 1 1\np cnf 1 1\n", 2)] {
        assert!(matches!(parse_dimacs(text), Err(Error::Parse { line: l, .. }) if l == line), "{text:?}");
    }
    assert!(matches!(parse_dimacs("p cnf 1 1\n2 0\n"), Err(Error::InvalidFormula(_))));
    assert!(matches!(parse_hypergraph("1 2\n0 1\n"), Err(Error::Parse { line: 2, .. })));
    assert!(matches!(parse_hypergraph("vertices 2\n1 3\n"), Err(Error::InvalidHypergraph(_))));
}

#[test]
fn hypergraph_vertex_count_defaults_to_the_largest_vertex() {
    let h = parse_hypergraph("# comment\n1 4 # trailing\n\n2 3\n").unwrap();
    assert_eq!(h.vertices, 4);
    assert_eq!(h.edges, vec![vec![1, 4], vec![2, 3]]);
}

#[test]
fn sidecars_round_trip() {
    let set = FixtureSet::embedded();
    for (kind, source) in [
        (ReductionKind::SatEf, Source::Cnf(set.cnf("y1").unwrap())),
        (ReductionKind::RainbowEf1Rm, Source::Hypergraph(set.hypergraph("edge123").unwrap())),
    ] {
        let s = ReductionSidecar::new(kind, source);
        let text = s.serialize();
        assert_eq!(ReductionSidecar::parse(&text).unwrap(), s);
    }
    assert!(ReductionSidecar::parse(r#"{"version": "1", "kind": "sat-eff", "source": {}}"#).is_err());
}

#[test]
fn generator_is_deterministic_and_seed_sensitive() {
    for kind in InstanceKind::ALL {
        let a = generate(&GeneratorSpec::new(kind, 3, 6, 11)).unwrap();
        assert_eq!(serialize_instance(&a), serialize_instance(&generate(&GeneratorSpec::new(kind, 3, 6, 11)).unwrap()));
        let differs = (12..20).any(|s| generate(&GeneratorSpec::new(kind, 3, 6, s)).unwrap() != a);
        assert!(differs, "{kind}");
    }
}

#[test]
fn generator_rejects_infeasible_specs() {
    assert!(generate(&GeneratorSpec::new(InstanceKind::TopGood, 2, 0, 0)).is_err());
    assert!(generate(&GeneratorSpec::new(InstanceKind::Goods, 0, 3, 0)).is_err());
    assert!(matches!(generate(&GeneratorSpec::new(InstanceKind::Goods, 2, 129, 0)), Err(Error::TooManyItems { .. })));
    assert!(generate(&GeneratorSpec::new(InstanceKind::Goods, 2, 128, 0)).is_ok());
}

proptest! {
    #[test]
    fn generated_instances_satisfy_their_kind(k in 0usize..6, n in 1usize..6, m in 1usize..12, seed in any::<u64>()) {
        let kind = InstanceKind::ALL[k];
        let inst = generate(&GeneratorSpec::new(kind, n, m, seed)).unwrap();
        prop_assert!(kind.admits(&inst));
        prop_assert_eq!((inst.n(), inst.m()), (n, m));
        prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }
}
