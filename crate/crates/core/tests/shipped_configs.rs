use std::fs;
use std::path::PathBuf;

use semr_core::harness::parse_config;

#[test]
fn shipped_configs_parse_and_round_trip() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let text = fs::read_to_string(&path).unwrap();
            let config = parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(parse_config(&config.to_text()).unwrap(), config, "{}", path.display());
            if config.environment.is_some() {
                config.environment().unwrap();
            }
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
