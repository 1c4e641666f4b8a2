#![no_main]

use libfuzzer_sys::fuzz_target;
use malab::io;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = io::read_profile_csv(text) {
        let mut out = Vec::new();
        if io::write_profile_csv(&rows, &mut out).is_ok() {
            assert_eq!(io::read_profile_csv(std::str::from_utf8(&out).unwrap()).unwrap().len(), rows.len());
        }
    }
    if let Ok(rows) = io::read_singular_csv(text) {
        let mut out = Vec::new();
        io::write_singular_csv(&rows, &mut out).unwrap();
        assert_eq!(io::read_singular_csv(std::str::from_utf8(&out).unwrap()).unwrap().len(), rows.len());
    }
    if let Ok(rows) = io::read_frame_csv(text) {
        let mut out = Vec::new();
        io::write_frame_csv(&rows, &mut out).unwrap();
        assert_eq!(io::read_frame_csv(std::str::from_utf8(&out).unwrap()).unwrap().len(), rows.len());
    }
});
