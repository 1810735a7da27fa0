#[allow(dead_code)]
mod exact_certificate {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/exact_certificate.rs"));
}

#[test]
fn exact_certificate_runs() {
    exact_certificate::run_example().expect("exact_certificate example should run");
}

#[allow(dead_code)]
mod derivation_constants {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/derivation_constants.rs"));
}

#[test]
fn derivation_constants_runs() {
    derivation_constants::run_example().expect("derivation_constants example should run");
}

#[allow(dead_code)]
mod similarity_coordinates {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/similarity_coordinates.rs"));
}

#[test]
fn similarity_coordinates_runs() {
    similarity_coordinates::run_example().expect("similarity_coordinates example should run");
}

#[allow(dead_code)]
mod manufactured_order {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/manufactured_order.rs"));
}

#[test]
fn manufactured_order_runs() {
    manufactured_order::run_example().expect("manufactured_order example should run");
}

#[allow(dead_code)]
mod linear_decay {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/linear_decay.rs"));
}

#[test]
fn linear_decay_runs() {
    linear_decay::run_example().expect("linear_decay example should run");
}

#[allow(dead_code)]
mod energy_balance {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/energy_balance.rs"));
}

#[test]
fn energy_balance_runs() {
    energy_balance::run_example().expect("energy_balance example should run");
}

#[allow(dead_code)]
mod snapshot_roundtrip {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/snapshot_roundtrip.rs"));
}

#[test]
fn snapshot_roundtrip_runs() {
    snapshot_roundtrip::run_example().expect("snapshot_roundtrip example should run");
}

#[allow(dead_code)]
mod smoothing_constants {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/smoothing_constants.rs"));
}

#[test]
fn smoothing_constants_runs() {
    smoothing_constants::run_example().expect("smoothing_constants example should run");
}

#[allow(dead_code)]
mod nash_moser_desk {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/nash_moser_desk.rs"));
}

#[test]
fn nash_moser_desk_runs() {
    nash_moser_desk::run_example().expect("nash_moser_desk example should run");
}

#[allow(dead_code)]
mod parameter_sweep {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/parameter_sweep.rs"));
}

#[test]
fn parameter_sweep_runs() {
    parameter_sweep::run_example().expect("parameter_sweep example should run");
}
