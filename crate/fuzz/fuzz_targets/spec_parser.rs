#![no_main]
use libfuzzer_sys::fuzz_target;
use shape_recover::experiment::parse_spec;

// A spec that parses must survive being written back out, since runs store
// the resolved spec next to their artifacts.
fuzz_target!(|text: &str| {
    if let Ok(spec) = parse_spec(text) {
        let written = toml::to_string(&spec).expect("a valid spec serializes");
        let again = parse_spec(&written).expect("a written spec parses");
        assert_eq!(spec, again);
    }
});
