#![no_main]
use libfuzzer_sys::fuzz_target;
use shape_recover::mesh::{format_polyline_csv, parse_polyline_csv};

fuzz_target!(|text: &str| {
    let Ok(points) = parse_polyline_csv(text) else { return };
    assert!(points.iter().all(|p| p.x.is_finite() && p.y.is_finite()));
    let again = parse_polyline_csv(&format_polyline_csv(&points)).unwrap();
    assert_eq!(points, again);
});
