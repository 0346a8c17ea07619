#![no_main]

use clap::Parser;
use gamma_zeno::cli::RunConfig;
use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated. Only parsing is exercised.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let argv = std::iter::once("gamma-zeno").chain(text.split('\0'));
    let _ = RunConfig::try_parse_from(argv);
});
