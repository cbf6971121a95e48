use pathdob::export::{read_trace, write_trace, TRACE_HEADER};
use pathdob_core::scenario::run_scenario;
use pathdob_core::{Architecture, Profile, Scenario, SimTrace};

fn exported_columns(t: &SimTrace) -> Vec<Vec<u64>> {
    [&t.t, &t.y, &t.dpsi, &t.delta_f, &t.u_new, &t.d_hat, &t.r]
        .iter()
        .map(|c| c.iter().map(|v| v.to_bits()).collect())
        .collect()
}

#[test]
fn empty_trace_is_header_only() {
    let mut buf = Vec::new();
    write_trace(&mut buf, &SimTrace::default()).unwrap();
    assert_eq!(
        String::from_utf8(buf.clone()).unwrap(),
        format!("{}\n", TRACE_HEADER.join(","))
    );
    assert!(read_trace(buf.as_slice()).unwrap().is_empty());
}

#[test]
fn trace_round_trips_bit_exactly() {
    let s = Scenario {
        duration: 5.0,
        disturbance: Profile::sine_disturbance(),
        ..Default::default()
    }
    .with_architecture(Architecture::PdDdob);
    let (trace, _) = run_scenario(&s).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &trace).unwrap();
    let back = read_trace(buf.as_slice()).unwrap();
    assert_eq!(exported_columns(&back), exported_columns(&trace));
}

#[test]
fn awkward_values_round_trip() {
    let col = vec![0.1, -0.0, 1e-310, f64::MAX, 1.0 / 3.0, f64::INFINITY];
    let trace = SimTrace {
        t: col.clone(),
        y: col.clone(),
        dpsi: col.clone(),
        delta_f: col.clone(),
        u_new: col.clone(),
        d_hat: col.clone(),
        e_hat: col.clone(),
        r: col,
    };
    let mut buf = Vec::new();
    write_trace(&mut buf, &trace).unwrap();
    assert_eq!(
        exported_columns(&read_trace(buf.as_slice()).unwrap()),
        exported_columns(&trace)
    );
}
