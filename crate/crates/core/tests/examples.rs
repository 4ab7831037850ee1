mod weights_table {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/weights_table.rs"));
}

#[test]
fn weights_table_runs() {
    weights_table::run_example().expect("weights_table example should run");
}

mod orbit_render {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/orbit_render.rs"));
}

#[test]
fn orbit_render_runs() {
    orbit_render::run_example().expect("orbit_render example should run");
}

mod envelope_roundtrip {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/envelope_roundtrip.rs"));
}

#[test]
fn envelope_roundtrip_runs() {
    envelope_roundtrip::run_example().expect("envelope_roundtrip example should run");
}

mod footstep_walk {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/footstep_walk.rs"));
}

#[test]
fn footstep_walk_runs() {
    footstep_walk::run_example().expect("footstep_walk example should run");
}

mod multi_source_mix {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/multi_source_mix.rs"));
}

#[test]
fn multi_source_mix_runs() {
    multi_source_mix::run_example().expect("multi_source_mix example should run");
}

mod live_control {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/live_control.rs"));
}

#[test]
fn live_control_runs() {
    live_control::run_example().expect("live_control example should run");
}
