#![no_main]

use libfuzzer_sys::fuzz_target;
use willmore::curves::{parse_curve_unchecked, ClosedCurve};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(curve) = parse_curve_unchecked(text) {
        let printed = curve.to_string();
        let again = parse_curve_unchecked(&printed).expect("printed curve reparses");
        assert_eq!(again.to_string(), printed);
        // Validation may reject, but must not panic.
        let _ = text.parse::<ClosedCurve>();
    }
});
