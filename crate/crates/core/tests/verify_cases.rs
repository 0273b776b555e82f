use porotopo::verify::{run_suite, Suite};

#[test]
fn verification_suite_passes() {
    let r = run_suite(Suite::All, 42, 10_000).unwrap();
    let mut s = Vec::new();
    r.write_summary(&mut s).unwrap();
    println!("{}", String::from_utf8(s).unwrap());
    assert!(r.passed());
}
