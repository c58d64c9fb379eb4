#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(input) = std::str::from_utf8(data) {
        // Parsing must never panic; accepted specs must build and yield a
        // tag that re-parses (embedding-free tags reproduce themselves).
        if let Ok(spec) = kmlab::textspec::parse_machine_spec(input) {
            if let Ok(machine) = spec.build() {
                let tag = machine.tag();
                if !tag.contains("uprime=on") {
                    let again = kmlab::textspec::parse_machine_spec(&tag)
                        .expect("tag re-parses")
                        .build()
                        .expect("tag re-builds");
                    assert_eq!(again.tag(), tag);
                }
            }
        }
    }
});
