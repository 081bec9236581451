use std::fs;
use std::path::Path;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn libsvm_seeds_parse_or_fail_cleanly() {
    let mut accepted = Vec::new();
    for (name, bytes) in seeds("parse_libsvm") {
        let text = String::from_utf8(bytes).unwrap();
        if sqn::data::parse_libsvm_str(&text, None).is_ok() {
            accepted.push(name);
        }
    }
    assert_eq!(accepted, ["label_only_line", "multiclass", "signed_labels"]);
}

#[test]
fn config_seeds_parse_or_fail_cleanly() {
    let mut accepted = Vec::new();
    for (name, bytes) in seeds("parse_config") {
        let text = String::from_utf8(bytes).unwrap();
        if sqn::cli::parse_config_text(&text).is_ok() {
            accepted.push(name);
        }
    }
    assert_eq!(accepted, ["booleans", "quadratic", "synthetic_like"]);
}
