#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = sqn::cli::parse_config_file_str(text);
        let _ = sqn::cli::parse_config_text(text);
    }
});
