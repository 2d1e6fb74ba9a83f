mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recordlayout::computed::{BitpackFloatSoA, BitpackIntSoA, StorageWord};
use recordlayout::mapping::AoS;
use recordlayout::{copy_view, parse_layout, ArrayExtents, LayoutSpec, Mapping, RecordSchema, ScalarType, Value, View};

const PHYSICAL: [&str; 7] = ["aos-packed", "aos-aligned", "soa-sb", "soa-mb", "aosoa:1", "aosoa:4", "aosoa:7"];

fn random_value(rng: &mut ChaCha8Rng, ty: ScalarType) -> Value {
    match ty {
        ScalarType::F32 => Value::F32(f32::from_bits(rng.gen::<u32>() & 0x7F7F_FFFF)),
        ScalarType::F64 => Value::F64(rng.gen_range(-1e9..1e9)),
        t => Value::U64(rng.gen()).cast(t),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn values_survive_every_physical_layout_and_copies(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = random_schema(&mut rng, 8, 3);
        let ext = random_extents(&mut rng, 48);
        let types: Vec<ScalarType> = schema.flatten().into_iter().map(|(_, t)| t).collect();
        let values: Vec<Vec<Value>> =
            (0..ext.len()).map(|_| types.iter().map(|&t| random_value(&mut rng, t)).collect()).collect();
        let widen: Vec<String> = schema
            .flatten()
            .iter()
            .filter(|(_, t)| t.is_float())
            .map(|(c, _)| format!("{}=f64", schema.path_of(c).unwrap()))
            .collect();
        let mut names: Vec<String> = PHYSICAL.iter().map(|s| s.to_string()).collect();
        names.push("bytesplit:aos-aligned".into());
        if !widen.is_empty() {
            names.push(format!("changetype:{}:soa-mb", widen.join(",")));
        }
        let mut previous: Option<View<_>> = None;
        for name in &names {
            let mut v = View::new(parse_layout(name, schema.clone(), ext.clone()).unwrap()).unwrap();
            match previous.take() {
                Some(src) => copy_view(&src, &mut v).unwrap(),
                None => {
                    for (i, row) in values.iter().enumerate() {
                        for (f, &x) in row.iter().enumerate() {
                            v.store(i, f, x);
                        }
                    }
                }
            }
            for (i, row) in values.iter().enumerate() {
                for (f, &x) in row.iter().enumerate() {
                    let got = v.load(i, f);
                    prop_assert!(got.bit_eq(&x), "{name}: ({i},{f}) {got} != {x}");
                }
            }
            previous = Some(v);
        }
    }

    #[test]
    fn layout_names_round_trip(seed in any::<u64>(), pick in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = random_schema(&mut rng, 6, 2);
        let first = schema.path_of(&recordlayout::RecordCoord::from(vec![0])).unwrap();
        let leaf = schema.path_of(&schema.flatten()[0].0).unwrap();
        let names = [
            "aos-packed".to_string(),
            "aos-aligned".into(),
            "soa-sb".into(),
            "soa-mb".into(),
            format!("aosoa:{}", rng.gen_range(1..20)),
            "null".into(),
            "bytesplit:soa-sb".into(),
            "trace:aos-aligned".into(),
            format!("heatmap:{}:soa-mb", rng.gen_range(1..100)),
            format!("split:{first}:soa-mb:aosoa:3"),
            format!("changetype:{leaf}={}:soa-mb", schema.flatten()[0].1),
            "trace:bytesplit:aosoa:2".into(),
        ];
        let name = &names[pick];
        // a split that selects the whole record has nothing left and names its rest `null`
        let empty_rest = pick == 9 && schema.child_count() == 1;
        let m = parse_layout(name, schema.clone(), ArrayExtents::linear(5)).unwrap();
        let spec: LayoutSpec = m.name().parse().unwrap();
        prop_assert_eq!(spec.to_string(), m.name());
        prop_assert_eq!(parse_layout(&m.name(), schema, ArrayExtents::linear(5)).unwrap().name(), m.name());
        if !empty_rest {
            prop_assert_eq!(name.parse::<LayoutSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn single_precision_float_packing_is_native(bits in any::<u32>()) {
        let x = f32::from_bits(bits);
        prop_assume!(!x.is_nan());
        let s: RecordSchema = "Record{v:f32}".parse().unwrap();
        let mut v = View::new(BitpackFloatSoA::uniform(s, ArrayExtents::linear(1), 8, 23, StorageWord::U32).unwrap()).unwrap();
        v.write::<f32>(0, 0, x);
        prop_assert_eq!(v.read::<f32>(0, 0).to_bits(), bits);
        prop_assert_eq!(v.blobs()[0].as_bytes(), &bits.to_le_bytes()[..]);
    }

    #[test]
    fn double_precision_float_packing_is_native(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(!x.is_nan());
        let s: RecordSchema = "Record{v:f64}".parse().unwrap();
        let m = BitpackFloatSoA::uniform(s, ArrayExtents::linear(1), 11, 52, StorageWord::U64).unwrap();
        let mut v = View::new(m).unwrap();
        v.write::<f64>(0, 0, x);
        prop_assert_eq!(v.read::<f64>(0, 0).to_bits(), bits);
    }

    #[test]
    fn integer_packing_keeps_low_bits(b in 1u32..=64, x in any::<i64>(), word64 in any::<bool>()) {
        let s: RecordSchema = "Record{s:i64,u:u64}".parse().unwrap();
        let word = if word64 { StorageWord::U64 } else { StorageWord::U32 };
        let mut v = View::new(BitpackIntSoA::uniform(s, ArrayExtents::linear(3), b, word).unwrap()).unwrap();
        v.write::<i64>(1, 0, x);
        v.write::<u64>(1, 1, x as u64);
        let mask = if b == 64 { u64::MAX } else { (1u64 << b) - 1 };
        let low = x as u64 & mask;
        let signed = if b < 64 && low >> (b - 1) == 1 { (low | !mask) as i64 } else { low as i64 };
        prop_assert_eq!(v.read::<i64>(1, 0), signed);
        prop_assert_eq!(v.read::<u64>(1, 1), low);
        prop_assert_eq!(v.read::<i64>(0, 0), 0);
        prop_assert_eq!(v.read::<u64>(2, 1), 0);
    }

    #[test]
    fn split_and_instrumented_layouts_stay_disjoint(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = random_schema(&mut rng, 10, 3);
        let ext = random_extents(&mut rng, 32);
        let first = schema.path_of(&recordlayout::RecordCoord::from(vec![0])).unwrap();
        for name in [
            format!("split:{first}:aosoa:5:soa-mb"),
            "trace:aosoa:4".to_string(),
            "heatmap:16:aos-aligned".into(),
        ] {
            let m = parse_layout(&name, schema.clone(), ext.clone()).unwrap();
            prop_assert!(check_disjoint_total(&m).is_ok(), "{}", name);
        }
    }
}

#[test]
#[should_panic(expected = "accessed as")]
fn typed_read_checks_the_leaf_type() {
    let v = View::new(AoS::packed("Record{a:f32}".parse().unwrap(), ArrayExtents::linear(4)).unwrap()).unwrap();
    v.read::<f64>(0, 0);
}

#[test]
#[should_panic(expected = "out of range")]
fn typed_write_checks_the_index() {
    let mut v = View::new(AoS::packed("Record{a:f32}".parse().unwrap(), ArrayExtents::linear(4)).unwrap()).unwrap();
    v.write::<f32>(4, 0, 1.0);
}

#[test]
fn computed_leaves_convert_on_typed_access() {
    let s: RecordSchema = "Record{a:f32}".parse().unwrap();
    let mut v = View::new(parse_layout("changetype:a=f64", s, ArrayExtents::linear(2)).unwrap()).unwrap();
    v.write::<f32>(1, 0, 1.5);
    assert_eq!(v.read::<f32>(1, 0), 1.5);
    assert_eq!(v.mapping().name(), "changetype:a=f64:aos-packed");
}
