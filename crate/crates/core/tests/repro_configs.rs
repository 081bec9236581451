use std::fs;
use std::path::{Path, PathBuf};

use sqn::cli::{parse_config, parse_config_file};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn every_config_file_parses() {
    let dir = repo_root().join("docs/configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "conf") {
            parse_config_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 10, "found {count} configs");
}

/// Every `sqn run` and `sqn compare` line in the reproduction guide.
#[test]
fn every_documented_command_parses() {
    let root = repo_root();
    let text = fs::read_to_string(root.join("docs/repro.md")).unwrap();
    let mut runs = 0;
    let mut compares = 0;
    for line in text.lines().map(str::trim) {
        let tokens: Vec<String> = line
            .split_whitespace()
            .map(|t| {
                if t.starts_with("docs/") {
                    root.join(t).to_string_lossy().into_owned()
                } else {
                    t.to_string()
                }
            })
            .collect();
        match tokens.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["sqn", "run", rest @ ..] => {
                parse_config(rest).unwrap_or_else(|e| panic!("{line}: {e}"));
                runs += 1;
            }
            ["sqn", "compare", a, b, ..] => {
                let a = parse_config_file(Path::new(a)).unwrap();
                let b = parse_config_file(Path::new(b)).unwrap();
                assert_eq!(a.seeds.data, b.seeds.data, "{line}");
                compares += 1;
            }
            _ => {}
        }
    }
    assert!(runs >= 20 && compares >= 1, "{runs} runs, {compares} compares");
}

#[test]
fn synthetic_settings_match_their_descriptions() {
    let root = repo_root().join("docs/configs");
    let sgd = parse_config_file(&root.join("synthetic_sgd.conf")).unwrap();
    assert_eq!((sgd.b, sgd.beta), (50, 7.0));
    for (file, b_h) in [("synthetic_sqn_bh300.conf", 300), ("synthetic_sqn_bh600.conf", 600)] {
        let c = parse_config_file(&root.join(file)).unwrap();
        assert_eq!((c.b, c.b_h, c.l, c.m, c.beta), (50, b_h, 10, 10, 2.0));
    }
}
