#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ds) = sqn::data::parse_libsvm_str(text, None) {
            let mut out = Vec::new();
            sqn::data::write_libsvm(&ds, &mut out).unwrap();
            let again = sqn::data::parse_libsvm_str(std::str::from_utf8(&out).unwrap(), Some(ds.dim())).unwrap();
            assert_eq!(again.len(), ds.len());
        }
    }
    let _ = sqn::data::parse_libsvm(data, None);
});
