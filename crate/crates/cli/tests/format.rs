use proptest::prelude::*;
use secord_cli::format::ValueName;
use secord_cli::{parse, serialize, FormatError, Instance};
use secord_core::{NetworkOrdering, VarId};
use secord_oracle::fixtures::{singleton_gap, SINGLETON_GAP_NAMES};
use secord_oracle::sample::{random_network, SampleSpec};

fn named_singleton_gap() -> Instance {
    let mut inst = Instance::unnamed(singleton_gap());
    inst.var_names = SINGLETON_GAP_NAMES.iter().map(|s| s.to_string()).collect();
    inst.value_names = vec![vec![ValueName::Str("a".into()), ValueName::Str("b".into())]; 4];
    inst
}

#[test]
fn singleton_gap_round_trips() {
    let text = serialize(&named_singleton_gap());
    let back = parse(&text, true).unwrap();
    assert_eq!(back.network.compare(&singleton_gap()).unwrap(), NetworkOrdering::Equal);
    assert_eq!(back.var_names, SINGLETON_GAP_NAMES);
    assert_eq!(serialize(&back), text);
}

#[test]
fn unknown_variable_is_named() {
    let text = r#"{"format":"secord-network/1","variables":[{"name":"x","values":[0,1]}],
        "constraints":[{"scope":["x","q"],"polarity":"conflicts","tuples":[]}]}"#;
    let err = parse(text, true).unwrap_err();
    assert!(matches!(err, FormatError::Constraint { index: 0, .. }));
    assert!(err.to_string().contains("`q`"), "{err}");
}

#[test]
fn empty_constraint_list_is_valid() {
    let text = r#"{"format":"secord-network/1","variables":[{"name":"x","values":["r","g","b"]}],"constraints":[]}"#;
    let inst = parse(text, true).unwrap();
    assert_eq!(inst.network.num_vars(), 1);
    assert_eq!(inst.network.num_constraints(), 0);
    assert_eq!(inst.network.domain(VarId(0)).size(), 3);
}

#[test]
fn strict_mode_rejects_unknown_fields() {
    let text = r#"{"format":"secord-network/1","variables":[{"name":"x","values":[0],"color":"red"}],"constraints":[]}"#;
    let err = parse(text, true).unwrap_err();
    assert!(matches!(err, FormatError::UnknownField { ref field, .. } if field == "color"), "{err}");
    assert!(parse(text, false).is_ok());
}

#[test]
fn document_errors() {
    let bad_version = r#"{"format":"other/2","variables":[],"constraints":[]}"#;
    assert!(matches!(parse(bad_version, true), Err(FormatError::Version(_))));

    let syntax = "{\n  \"format\": \"secord-network/1\",\n  oops\n}";
    match parse(syntax, true) {
        Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }

    let dup = r#"{"format":"secord-network/1","variables":[{"name":"x","values":[0,0]}],"constraints":[]}"#;
    assert!(matches!(parse(dup, true), Err(FormatError::Variable { index: 0, .. })));

    let outside = r#"{"format":"secord-network/1","variables":[{"name":"x","values":[0,1]}],
        "constraints":[{"scope":["x"],"polarity":"supports","tuples":[[7]]}]}"#;
    assert!(matches!(parse(outside, true), Err(FormatError::Constraint { index: 0, .. })));
}

#[test]
fn removed_values_survive_as_unary_conflicts() {
    let mut net = singleton_gap();
    net.discard_nogood(&secord_core::Instantiation::single(VarId(2), 1)).unwrap();
    let back = parse(&serialize(&Instance::unnamed(net.clone())), true).unwrap();
    assert!(!back.network.domain(VarId(2)).contains(1));
    assert_eq!(back.network.compare_raw(&net).unwrap(), NetworkOrdering::Equal);
}

proptest! {
    #[test]
    fn random_networks_round_trip(seed: u64) {
        let spec = SampleSpec::binary(2..=6, 1..=4).with_nary(0..=2, 3..=4);
        let net = random_network(&mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed), &spec);
        let back = parse(&serialize(&Instance::unnamed(net.clone())), true).unwrap();
        prop_assert_eq!(back.network.compare_raw(&net).unwrap(), NetworkOrdering::Equal);
        prop_assert_eq!(back.network.is_failed(), net.is_failed());
    }
}
