#![no_main]
use libfuzzer_sys::fuzz_target;
use shape_recover::pde::CauchyData;

// Input is `<csv>\0<sidecar>`; without a NUL the sidecar is empty.
fuzz_target!(|text: &str| {
    let (csv, sidecar) = text.split_once('\0').unwrap_or((text, ""));
    let Ok(data) = CauchyData::from_csv(csv, sidecar) else { return };
    assert_eq!(data.f.len(), data.arc_param.len());
    assert_eq!(data.g.len(), data.arc_param.len());
    assert!(data.noise_level >= 0.0);
    let again = CauchyData::from_csv(&data.to_csv(), &data.sidecar()).expect("written data parses");
    assert_eq!(data, again);
});
