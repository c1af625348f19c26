//! Bundled example data: the Wall Street Market case and a small chain with
//! a CoinJoin. Amounts are synthetic.

use std::collections::BTreeMap;

use crate::case::{AttributionTag, CaseFile, ChainSource, EntityKind, Offence};
use crate::chain::{ChainFile, Outpoint, RawOutput, RawTransaction};
use crate::scheme::{
    answer_cq, Answer, Instantiation, CLUSTER_FROM_MULTI_INPUT, CLUSTER_FROM_SOFTWARE,
    POSITION_TO_KNOW, SIGN, SUSPICION,
};
use crate::statement::Statement;

pub const OFFENCE: &str = "WSM-administration";
/// Argument whose CoinJoin question decides the mixer link.
pub const MIXER_LINK_ARG: &str = "a-mi";
pub const MIXER_LINK_TX: &str = "tx05";

fn tx(txid: &str, inputs: &[(&str, u32)], outputs: &[(&str, i64)]) -> RawTransaction {
    RawTransaction {
        txid: txid.to_owned(),
        coinbase: inputs.is_empty(),
        inputs: inputs.iter().map(|(t, v)| Outpoint::new(*t, *v)).collect(),
        outputs: outputs
            .iter()
            .map(|(a, v)| RawOutput {
                address: (*a).to_owned(),
                value_sat: *v,
            })
            .collect(),
    }
}

/// Wallets W1, W2, W4, W5, a mixer and the payments to BPPC and the game
/// company.
pub fn wsm_chain() -> ChainFile {
    ChainFile {
        transactions: vec![
            tx(
                "cb00",
                &[],
                &[
                    ("W2:a", 1_000_000_000),
                    ("W1:a", 5_000_000),
                    ("W2:b", 300_000_000),
                ],
            ),
            tx(
                "cb01",
                &[],
                &[
                    ("P:bppc", 50_000_000),
                    ("BPPC:dep", 1_000),
                    ("GAME:dep", 1_000),
                    ("MIX:fee", 1_000),
                ],
            ),
            // W2 funds W1; W2:c is fresh change
            tx(
                "tx01",
                &[("cb00", 0)],
                &[("W1:a", 400_000_000), ("W2:c", 599_990_000)],
            ),
            // W2 funds W4
            tx(
                "tx02",
                &[("cb00", 2), ("tx01", 1)],
                &[("W4:a", 700_000_000), ("W2:d", 199_980_000)],
            ),
            // W1 into the mixer
            tx("tx03", &[("tx01", 0)], &[("MIX:in", 399_990_000)]),
            tx(
                "tx04",
                &[("tx03", 0)],
                &[("M:out1", 380_000_000), ("MIX:fee", 19_980_000)],
            ),
            // mixer output spent together with the payer's own coin at BPPC
            tx(
                "tx05",
                &[("tx04", 0), ("cb01", 0)],
                &[("BPPC:dep", 429_000_000), ("P:chg", 980_000)],
            ),
            // W4 pays the game company
            tx(
                "tx06",
                &[("tx02", 0)],
                &[("GAME:dep", 100_000_000), ("W4:b", 599_990_000)],
            ),
            // W2 funds W5
            tx("tx07", &[("tx02", 1)], &[("W5:a", 199_970_000)]),
        ],
    }
}

fn st(s: &str) -> Statement {
    s.parse().expect("fixture statement")
}

fn apply(case: &mut CaseFile, id: &str, scheme_id: &str, bindings: &[(&str, &str)]) {
    let b: BTreeMap<String, String> = bindings
        .iter()
        .map(|(k, v)| ((*k).to_owned(), (*v).to_owned()))
        .collect();
    Instantiation::new(scheme_id, b)
        .id(id)
        .apply(case)
        .unwrap_or_else(|e| panic!("fixture argument {id}: {e}"));
}

/// The case with every critical question open.
pub fn wsm_case() -> CaseFile {
    let mut c = CaseFile::new("wsm", ChainSource::Embedded(wsm_chain()));
    c.title = "Wall Street Market administrator".into();
    for (id, label, kind) in [
        ("TheOne", "WSM administrator moniker", EntityKind::Person),
        ("dudebuy", "Hansa Market user", EntityKind::Person),
        ("X", "defendant X", EntityKind::Person),
        ("Hansa", "Hansa Market", EntityKind::Marketplace),
        ("WSM", "Wall Street Market", EntityKind::Marketplace),
        ("Mixer", "commercial mixing service", EntityKind::Service),
        (
            "BPPC",
            "bitcoin payment processing company",
            EntityKind::Service,
        ),
        ("GameCo", "video gaming company", EntityKind::Service),
        (
            "demix-tool",
            "de-mixing analysis software",
            EntityKind::Software,
        ),
    ] {
        c.add_entity(id, label, kind);
    }
    c.offences.push(Offence {
        id: OFFENCE.into(),
        label: "administration of Wall Street Market".into(),
    });
    c.attribution_tags.push(AttributionTag {
        addresses: vec!["W2:a".into()],
        entity: "dudebuy".into(),
        source: "Hansa seizure data, refund wallet".into(),
    });
    c.attribution_tags.push(AttributionTag {
        addresses: vec!["MIX:in".into(), "MIX:fee".into()],
        entity: "Mixer".into(),
        source: "service deposit addresses".into(),
    });

    let ev = [
        (
            "e-pgp",
            "linked(dudebuy, TheOne)",
            "Hansa and WSM seizure data",
            "identical PGP public key on both platforms",
        ),
        (
            "e-refund",
            "sign_of(linked(dudebuy, TheOne), controls(TheOne, W2:a))",
            "Hansa seizure data",
            "W2:a is the refund wallet registered by dudebuy",
        ),
        (
            "e-w2-offence",
            "connected(W2:a, WSM-administration)",
            "WSM seizure data",
            "refund wallet of the administrator's earlier alias",
        ),
        (
            "e-flow-w1",
            "sign_of(connected(TheOne, WSM-administration), connected(W1:a, WSM-administration))",
            "payment flow analysis",
            "tx01 funds W1:a from W2:a",
        ),
        (
            "e-flow-w4",
            "sign_of(connected(TheOne, WSM-administration), connected(W4:a, WSM-administration))",
            "payment flow analysis",
            "tx02 funds W4:a from W2",
        ),
        (
            "e-ptk-bppc",
            "position_to_know(BPPC, customer-records)",
            "BPPC user records",
            "request for disclosure of customer data",
        ),
        (
            "e-asserts-bppc",
            "asserts(BPPC, controls(X, P:bppc))",
            "BPPC user records",
            "e-mail address of the paying account used alongside identity X",
        ),
        (
            "e-cospent",
            "co_spent(tx05, P:bppc, M:out1)",
            "transaction graph",
            "tx05 spends P:bppc together with mixer output M:out1",
        ),
        (
            "e-link",
            "links(demix-tool, M:out1, W1:a)",
            "de-mixing analysis",
            "mixer output M:out1 traced back to the W1:a deposit",
        ),
        (
            "e-reliable",
            "reliable(demix-tool)",
            "analyst testimony",
            "tool used in earlier proceedings",
        ),
        (
            "e-ptk-game",
            "position_to_know(GameCo, customer-accounts)",
            "GameCo subpoena",
            "request for disclosure of account data",
        ),
        (
            "e-asserts-game",
            "asserts(GameCo, controls(X, W4:a))",
            "GameCo subpoena",
            "two accounts paid from W4 belong to X",
        ),
    ];
    for (id, s, source, via) in ev {
        c.add_evidence(id, st(s), source, via);
    }

    apply(
        &mut c,
        "a-pgp",
        SIGN,
        &[
            ("A", "linked(dudebuy, TheOne)"),
            ("B", "controls(TheOne, W2:a)"),
        ],
    );
    apply(
        &mut c,
        "a-susp-theone",
        SUSPICION,
        &[("A", "W2:a"), ("O", OFFENCE), ("E", "TheOne")],
    );
    apply(
        &mut c,
        "a-flow-w1",
        SIGN,
        &[
            ("A", "connected(TheOne, WSM-administration)"),
            ("B", "connected(W1:a, WSM-administration)"),
        ],
    );
    apply(
        &mut c,
        "a-flow-w4",
        SIGN,
        &[
            ("A", "connected(TheOne, WSM-administration)"),
            ("B", "connected(W4:a, WSM-administration)"),
        ],
    );
    apply(
        &mut c,
        "a-ptk-bppc",
        POSITION_TO_KNOW,
        &[
            ("a", "BPPC"),
            ("S", "customer-records"),
            ("A", "controls(X, P:bppc)"),
        ],
    );
    apply(
        &mut c,
        MIXER_LINK_ARG,
        CLUSTER_FROM_MULTI_INPUT,
        &[
            ("T", MIXER_LINK_TX),
            ("A", "P:bppc"),
            ("B", "M:out1"),
            ("E", "X"),
        ],
    );
    apply(
        &mut c,
        "a-sw",
        CLUSTER_FROM_SOFTWARE,
        &[
            ("S", "demix-tool"),
            ("A1", "M:out1"),
            ("A2", "W1:a"),
            ("E", "X"),
        ],
    );
    apply(
        &mut c,
        "a-susp",
        SUSPICION,
        &[("A", "W1:a"), ("O", OFFENCE), ("E", "X")],
    );
    apply(
        &mut c,
        "a-ptk-game",
        POSITION_TO_KNOW,
        &[
            ("a", "GameCo"),
            ("S", "customer-accounts"),
            ("A", "controls(X, W4:a)"),
        ],
    );
    c
}

/// Answers every open question of every argument the same way.
pub fn answer_all(case: &mut CaseFile, answer: Answer, justification: &str) {
    let open: Vec<(String, String)> = crate::scheme::list_open_cqs(case)
        .into_iter()
        .map(|o| (o.arg_id, o.cq_id))
        .collect();
    for (a, q) in open {
        answer_cq(case, &a, &q, answer, justification).expect("listed question exists");
    }
}

/// The case after an analyst has answered every question favourably.
pub fn wsm_case_answered() -> CaseFile {
    let mut c = wsm_case();
    c.case_id = "wsm-answered".into();
    answer_all(&mut c, Answer::Favourable, "reviewed, no concern");
    c
}

/// Co-spends {a,b} and {b,c}, then a CoinJoin over {c,d}.
pub fn coinjoin_chain() -> ChainFile {
    ChainFile {
        transactions: vec![
            tx(
                "cb",
                &[],
                &[
                    ("a", 100),
                    ("b", 100),
                    ("b", 100),
                    ("c", 100),
                    ("c", 100),
                    ("d", 100),
                ],
            ),
            tx("t1", &[("cb", 0), ("cb", 1)], &[("x", 150), ("y", 49)]),
            tx("t2", &[("cb", 2), ("cb", 3)], &[("z", 120), ("w", 79)]),
            tx(
                "cj",
                &[("cb", 4), ("cb", 5)],
                &[("p", 90), ("q", 90), ("r", 19)],
            ),
        ],
    }
}
