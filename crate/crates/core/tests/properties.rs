use std::collections::BTreeSet;

use proptest::prelude::*;

use zipper_core::interleaver::{InterleaverMap, MapFamily, MapTable, Pos, ZipperMap};
use zipper_core::{encode_row, BchCode, Buffer, DecodeOutcome, Field, Syndromes};

fn family() -> impl Strategy<Value = MapFamily> {
    prop_oneof![
        Just(MapFamily::Staircase),
        Just(MapFamily::Chevron),
        Just(MapFamily::HalfChevron)
    ]
}

/// A family together with an admissible real width.
fn family_mbar() -> impl Strategy<Value = (MapFamily, usize)> {
    (family(), 2usize..60).prop_map(|(f, x)| {
        let mbar = match f {
            MapFamily::Staircase => x,
            MapFamily::Chevron => x,
            MapFamily::HalfChevron => 2 * x,
        };
        (f, mbar)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_distributes(a in 0u16..1024, b in 0u16..1024, c in 0u16..1024) {
        let f = Field::default();
        prop_assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
    }

    #[test]
    fn bch_corrects_up_to_t(
        t in 1usize..=3,
        extra in 1usize..900,
        seed_bits in proptest::collection::vec(any::<bool>(), 1023),
        picks in proptest::collection::vec(any::<proptest::sample::Index>(), 0..=3),
    ) {
        let r = 10 * t;
        let n = (r + extra).min(1023);
        let code = BchCode::with_default_field(t, n).unwrap();
        let info = &seed_bits[..code.k()];
        let mut word = info.to_vec();
        word.extend(code.encode(info).unwrap());
        prop_assert!(code.syndromes(&word).unwrap().is_zero());

        let errors: BTreeSet<usize> = picks.iter().take(t).map(|i| i.index(n)).collect();
        let mut rx = word.clone();
        for &j in &errors {
            rx[j] ^= true;
        }
        match code.decode(&rx).unwrap() {
            DecodeOutcome::NoError => prop_assert!(errors.is_empty()),
            DecodeOutcome::Corrected(found) => {
                prop_assert_eq!(found.iter().copied().collect::<BTreeSet<_>>(), errors);
            }
            DecodeOutcome::Failure(reason) => prop_assert!(false, "failure {:?}", reason),
        }
    }

    #[test]
    fn decoders_agree(t in 2usize..=3, n in 40usize..=1023, picks in proptest::collection::vec(0usize..1023, 0..=4)) {
        let code = BchCode::with_default_field(t, n).unwrap();
        let mut s = Syndromes::default();
        for j in picks {
            s ^= code.position_syndrome(j % n);
        }
        prop_assert_eq!(code.decode_syndromes(&s), code.decode_berlekamp_massey(&s));
    }

    #[test]
    fn phi_inverse_roundtrip((f, mbar) in family_mbar(), row in 0i64..2000, col in any::<proptest::sample::Index>()) {
        let map = ZipperMap::new(f, mbar).unwrap();
        let j = col.index(map.m());
        let src = map.phi(Pos::new(row, j));
        prop_assert!(src.row < row);
        prop_assert!(src.col >= map.m());
        prop_assert!(map.phi_inverse(src).unwrap().contains(&Pos::new(row, j)));

        let shift = map.period() as i64;
        let shifted = map.phi(Pos::new(row + shift, j));
        prop_assert_eq!(shifted, Pos::new(src.row + shift, src.col));
    }

    #[test]
    fn flips_keep_copies_consistent(
        f in family(),
        flips in proptest::collection::vec((0usize..1000, any::<proptest::sample::Index>()), 1..40),
    ) {
        let mbar = if f == MapFamily::HalfChevron { 30 } else { 24 };
        let map = MapTable::from_family(f, mbar).unwrap();
        let code = BchCode::with_default_field(2, map.n()).unwrap();
        let rows = map.memory() + 3 * mbar;
        let mut buf = Buffer::new(&code, rows + 1);
        let k = code.k() - map.m();
        for i in 0..rows {
            let info: Vec<bool> = (0..k).map(|c| (i * 7 + c * 3) % 5 == 0).collect();
            encode_row(&mut buf, &map, &code, &info).unwrap();
        }
        for (r, c) in flips {
            let pos = Pos::new((r % rows) as i64, map.m() + c.index(mbar));
            buf.flip_bit(&map, pos).unwrap();
        }
        prop_assert_eq!(buf.copy_violation(&map), None);
    }
}
