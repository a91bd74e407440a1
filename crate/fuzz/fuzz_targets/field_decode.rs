//! Fuzz the binary field decoder: arbitrary bytes must produce either a
//! decoded field or a structured error — never a panic, hang, or oversized
//! allocation (the header's point count is validated before any reserve).

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = hessian_lab::field_io::decode(data);
});
