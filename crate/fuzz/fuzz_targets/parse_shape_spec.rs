#![no_main]

use libfuzzer_sys::fuzz_target;
use willmore::shapes::{parse_shape_spec, ShapeSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = parse_shape_spec(text) {
        // Printing and reparsing must be a fixed point.
        let printed = spec.to_string();
        let again = parse_shape_spec(&printed).expect("printed spec reparses");
        assert_eq!(again.to_string(), printed);
        // Validation may reject, but must agree on both forms.
        assert_eq!(text.parse::<ShapeSpec>().is_ok(), printed.parse::<ShapeSpec>().is_ok());
    }
});
