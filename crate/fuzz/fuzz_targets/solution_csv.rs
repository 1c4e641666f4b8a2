#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((dim, rows)) = malab::io::read_solution_csv(text) {
        let mut out = Vec::new();
        malab::io::write_solution_csv(dim, &rows, &mut out).unwrap();
        let (d, back) = malab::io::read_solution_csv(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!((d, back.len()), (dim, rows.len()));
    }
});
