#![no_main]

use libfuzzer_sys::fuzz_target;
use nhosc_core::io::parse_wavefunction_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(psi) = parse_wavefunction_csv(text, 0.0) {
        assert_eq!(psi.values.len(), psi.grid.n_points);
        let _ = psi.norm_sq();
    }
});
