#![no_main]

use libfuzzer_sys::fuzz_target;
use malab::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = RunConfig::from_toml(text) {
        let echo = config.to_toml();
        assert_eq!(RunConfig::from_toml(&echo).unwrap(), config);
        let _ = config.validate();
    }
});
