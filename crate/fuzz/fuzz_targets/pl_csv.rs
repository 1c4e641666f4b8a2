#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(record) = malab::io::read_pl_csv(text) {
        if let Ok(f) = record.to_function() {
            let mut out = Vec::new();
            malab::io::write_pl_csv(&f, &mut out).unwrap();
            malab::io::read_pl_csv(std::str::from_utf8(&out).unwrap()).unwrap();
        }
    }
});
