mod common;

use std::collections::BTreeSet;

use mdhc_core::codec::{DscHeader, Header, DEFAULT_STRIDE};
use mdhc_core::store::{encode_store, write_relation_store, Store};
use mdhc_core::workload::{generate, WorkloadSpec};
use mdhc_core::{LogicalPositionSeq, Method, PositionHeader, Width};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sorted distinct positions whose gaps mix small, byte-overflowing and
/// very wide steps.
fn sequence() -> impl Strategy<Value = Vec<u64>> {
    let gap = prop_oneof![
        6 => 1u64..4,
        3 => 1u64..300,
        2 => 200u64..70_000,
        1 => 60_000u64..5_000_000_000,
        1 => (1u64 << 40)..(1u64 << 50),
    ];
    (0u64..1000, prop::collection::vec(gap, 0..400)).prop_map(|(start, gaps)| {
        let mut v = vec![start];
        for g in gaps {
            v.push(v.last().unwrap() + g);
        }
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn every_header_matches_oracle(xs in sequence(), seed in any::<u64>()) {
        let seq = LogicalPositionSeq::new(xs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = seq.last().unwrap() + 2;
        let q = common::queries(&seq, space, &mut rng);
        for header in common::headers(&seq, &mut rng) {
            let mismatch = common::oracle_mismatch(&header, &seq, &q);
            prop_assert!(mismatch.is_none(), "{}", mismatch.unwrap());
        }
    }

    #[test]
    fn payload_round_trip_preserves_lookups(xs in sequence(), seed in any::<u64>()) {
        let seq = LogicalPositionSeq::new(xs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for header in common::headers(&seq, &mut rng) {
            let mut bytes = Vec::new();
            header.write_payload(&mut bytes);
            prop_assert_eq!(bytes.len() as u64 * 8, header.size_bits());
            let (back, used) =
                Header::read_payload(header.method(), header.params(), header.counts(), &bytes).unwrap();
            prop_assert_eq!(used, bytes.len());
            prop_assert_eq!(&back, &header);
        }
    }

    #[test]
    fn accelerator_stride_is_invisible(xs in sequence(), s in prop::sample::select(Width::DIFFERENCE.to_vec())) {
        let seq = LogicalPositionSeq::new(xs).unwrap();
        let reference = DscHeader::build(&seq, s, Width::W64, 1).unwrap();
        let last = seq.last().unwrap();
        for n in [2u16, 5, 16, 64, 1000] {
            let h = DscHeader::build(&seq, s, Width::W64, n).unwrap();
            for &l in seq.as_slice() {
                for q in [l.saturating_sub(1), l, l + 1] {
                    prop_assert_eq!(h.physical(q), reference.physical(q));
                }
            }
            prop_assert_eq!(h.physical(last + 1), None);
            for p in 0..seq.len() as u64 {
                prop_assert_eq!(h.logical(p).unwrap(), reference.logical(p).unwrap());
            }
        }
    }
}

#[test]
fn randomized_profiles_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..60 {
        let inst = common::instance(i, 0x5eed, 5_000.0);
        let q = common::queries(&inst.seq, inst.space, &mut rng);
        for header in common::headers(&inst.seq, &mut rng) {
            if let Some(m) = common::oracle_mismatch(&header, &inst.seq, &q) {
                panic!("instance {i} {:?}: {m}", inst.spec);
            }
        }
    }
}

#[test]
fn extreme_positions() {
    let top = u64::MAX - 1;
    for xs in [vec![0], vec![top], vec![0, top], vec![top - 300, top - 1, top], vec![5, 6, 7, 8]] {
        let seq = LogicalPositionSeq::new(xs.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut q: Vec<u64> = xs.iter().flat_map(|&l| [l.saturating_sub(1), l, l.saturating_add(1)]).collect();
        q.extend([0, 1, u64::MAX]);
        for header in common::headers(&seq, &mut rng) {
            assert_eq!(common::oracle_mismatch(&header, &seq, &q), None, "{xs:?}");
        }
    }
}

#[test]
fn stores_answer_like_the_relation() {
    let dir = tempfile::tempdir().unwrap();
    for (k, profile) in common::PROFILES.into_iter().enumerate() {
        let spec = WorkloadSpec {
            payload_len: 3,
            ..WorkloadSpec::new(profile, vec![13, 40, 29], 0.3, k as u64)
        };
        let relation = generate(&spec).unwrap();
        let present: BTreeSet<u64> = relation.positions().as_slice().iter().copied().collect();
        for method in Method::ALL {
            let header = Header::build(method, relation.positions(), mdhc_core::codec::HeaderParams {
                n: Some(DEFAULT_STRIDE),
                ..mdhc_core::codec::HeaderParams::new(Width::W16)
            })
            .unwrap();
            let path = dir.path().join(format!("{profile}-{method}"));
            let written = write_relation_store(&relation, &header, &path).unwrap();
            let encoded = encode_store(relation.schema(), &header, relation.payloads()).unwrap();
            assert_eq!(written, encoded.len() as u64);
            let store = Store::open(&path).unwrap();
            assert_eq!(store.header(), &header);
            for l in 0..relation.schema().cell_count() {
                let coords = relation.schema().delinearize(l).unwrap();
                let got = store.point_query(&coords).unwrap();
                assert_eq!(got.is_some(), present.contains(&l));
                assert_eq!(got.as_deref(), relation.lookup(&coords).unwrap());
            }
        }
    }
}
