#![no_main]

use libfuzzer_sys::fuzz_target;
use nhosc_core::parameters::pt_classify;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = nhosc_cli::parse_params(text) else { return };
    let _ = p.validate_on((0.0, 1.0), 0);
    let _ = p.coefficients(0.5);
    let _ = pt_classify(&p, 1.0, 16);
});
