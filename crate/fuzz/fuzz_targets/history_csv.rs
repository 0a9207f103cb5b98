#![no_main]
use libfuzzer_sys::fuzz_target;
use shape_recover::reconstruction::parse_history_csv;

fuzz_target!(|text: &str| {
    let Ok(rows) = parse_history_csv(text) else { return };
    assert!(rows.windows(2).all(|w| w[0].iter < w[1].iter));
    assert!(rows.iter().all(|r| r.cost.is_finite() && r.hausdorff.is_none_or(f64::is_finite)));
});
