#![no_main]

use gamma_zeno::operator::InitialState;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(spec) = data.parse::<InitialState>() else {
        return;
    };
    // Accepted specs always describe a physical state.
    let rho = spec
        .density_matrix()
        .expect("accepted spec must build a state");
    assert!(rho.diagnostics().is_valid());
    let again: InitialState = spec.to_string().parse().expect("display must parse back");
    let rho2 = again.density_matrix().unwrap();
    assert!(rho.max_abs_diff(&rho2) < 1e-12);
});
