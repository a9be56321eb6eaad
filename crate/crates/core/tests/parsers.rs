// Same invariants as the fuzz targets, driven by proptest on the stable
// toolchain: random text and byte-level mutations of the fuzz corpus.

use std::path::PathBuf;

use proptest::prelude::*;

use willmore::curves::{parse_curve_unchecked, ClosedCurve};
use willmore::shapes::{parse_shape_spec, ShapeSpec};

fn corpus(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files.into_iter().map(|p| std::fs::read_to_string(p).unwrap()).collect()
}

fn check_shape(text: &str) {
    if let Ok(spec) = parse_shape_spec(text) {
        let printed = spec.to_string();
        let again = parse_shape_spec(&printed).expect("printed spec reparses");
        assert_eq!(again.to_string(), printed);
        assert_eq!(text.parse::<ShapeSpec>().is_ok(), printed.parse::<ShapeSpec>().is_ok());
    }
}

fn check_curve(text: &str) {
    if let Ok(curve) = parse_curve_unchecked(text) {
        let printed = curve.to_string();
        let again = parse_curve_unchecked(&printed).expect("printed curve reparses");
        assert_eq!(again.to_string(), printed);
        let _ = text.parse::<ClosedCurve>();
    }
}

fn mutate(seed: &str, edits: &[(usize, u8, u8)]) -> String {
    let mut bytes = seed.as_bytes().to_vec();
    for &(pos, op, byte) in edits {
        let at = if bytes.is_empty() { 0 } else { pos % (bytes.len() + 1) };
        match op % 3 {
            0 => bytes.insert(at, byte),
            1 if at < bytes.len() => {
                bytes.remove(at);
            }
            _ if at < bytes.len() => bytes[at] = byte,
            _ => {}
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

const ALPHABET: &str = "[a-z0-9=;,.\" \\\\e+-]{0,80}";

#[test]
fn corpus_seeds_parse() {
    for s in corpus("parse_shape_spec") {
        parse_shape_spec(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
        check_shape(&s);
    }
    for c in corpus("parse_curve") {
        parse_curve_unchecked(&c).unwrap_or_else(|e| panic!("{c}: {e}"));
        check_curve(&c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn shape_parser_never_panics(text in ALPHABET) {
        check_shape(&text);
    }

    #[test]
    fn curve_parser_never_panics(text in ALPHABET) {
        check_curve(&text);
    }

    #[test]
    fn mutated_shape_seeds(idx in any::<prop::sample::Index>(), edits in prop::collection::vec((any::<usize>(), any::<u8>(), any::<u8>()), 1..6)) {
        let seeds = corpus("parse_shape_spec");
        check_shape(&mutate(idx.get(&seeds), &edits));
    }

    #[test]
    fn mutated_curve_seeds(idx in any::<prop::sample::Index>(), edits in prop::collection::vec((any::<usize>(), any::<u8>(), any::<u8>()), 1..6)) {
        let seeds = corpus("parse_curve");
        check_curve(&mutate(idx.get(&seeds), &edits));
    }
}
