//! Fuzz the key-value config parser: any UTF-8 input must parse or return a
//! structured error — never a panic. Non-UTF-8 inputs are out of scope (the
//! file reader rejects them before the parser runs).

#![no_main]

use libfuzzer_sys::fuzz_target;

use hessian_lab::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = RunConfig::parse(text);
    }
});
