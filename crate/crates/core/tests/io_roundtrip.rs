//! Every artifact is re-readable by the crate's own readers, bit for bit.

use mems_lab::gelfand::{default_grid, shoot_radius, sweep, BifurcationDiagram, BifurcationRecord, SweepOptions};
use mems_lab::io::{read_diagram_csv, read_json, read_profile_csv, write_diagram_csv, write_json, write_profile_csv};
use mems_lab::radial::SolverOptions;
use mems_lab::theorems::{run_suite, Suite, SuiteSettings, TheoremReport};
use mems_lab::NonlinearitySpec;

fn small_diagram() -> BifurcationDiagram {
    let grid = default_grid(24, 0.01, 0.99).unwrap();
    sweep(2, &NonlinearitySpec::mems(), &grid, &SweepOptions::default()).unwrap()
}

#[test]
fn profile_csv_round_trips() {
    let sol = shoot_radius(3, &NonlinearitySpec::mems(), 0.7, &SolverOptions::default()).unwrap();
    let nodes = sol.profile.node_list();
    let mut buf = Vec::new();
    write_profile_csv(&mut buf, nodes).unwrap();
    assert!(buf.starts_with(b"r,u,ur\n"));
    assert_eq!(read_profile_csv(buf.as_slice()).unwrap(), nodes);
}

#[test]
fn diagram_csv_round_trips_with_non_finite_values() {
    let mut records = small_diagram().records;
    records.push(BifurcationRecord {
        m: 0.995,
        lambda: 0.1,
        ur1: -1.0,
        f_m: f64::INFINITY,
        mu1: f64::NAN,
        stable: false,
    });
    let mut buf = Vec::new();
    write_diagram_csv(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("m,lambda,ur1,F_m,mu1,stable\n"));
    assert!(text.contains(",inf,nan,false"));
    let back = read_diagram_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), records.len());
    for (a, b) in back.iter().zip(&records) {
        assert_eq!((a.m, a.lambda, a.ur1, a.f_m, a.stable), (b.m, b.lambda, b.ur1, b.f_m, b.stable));
        assert!(a.mu1 == b.mu1 || (a.mu1.is_nan() && b.mu1.is_nan()));
    }
}

#[test]
fn diagram_json_round_trips_and_is_byte_stable() {
    let diagram = small_diagram();
    let mut first = Vec::new();
    write_json(&mut first, &diagram).unwrap();
    let back: BifurcationDiagram = read_json(first.as_slice()).unwrap();
    assert_eq!(back, diagram);
    let mut second = Vec::new();
    write_json(&mut second, &small_diagram()).unwrap();
    assert_eq!(first, second);
}

#[test]
fn report_json_round_trips() {
    let report = run_suite(Suite::ClosedForms, &SuiteSettings::default()).unwrap();
    assert!(report.accepted());
    let mut buf = Vec::new();
    write_json(&mut buf, &report).unwrap();
    let back: TheoremReport = read_json(buf.as_slice()).unwrap();
    assert_eq!(back, report);
    assert!(back.results.iter().all(|c| c.recomputed_pass() == c.pass));
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(read_profile_csv("x,u,ur\n1,2,3\n".as_bytes()).is_err());
    assert!(read_profile_csv("r,u,ur\n1,oops,3\n".as_bytes()).is_err());
    assert!(read_diagram_csv("m,lambda,ur1,F_m,mu1,stable\n0.1,1,1,1,1,maybe\n".as_bytes()).is_err());
    assert!(read_json::<BifurcationDiagram>("{}".as_bytes()).is_err());
}
