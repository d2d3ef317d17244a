use proptest::prelude::*;

use dissim::config::ExperimentConfig;
use dissim::record::{format_number, Cell, ExperimentRecord};

proptest! {
    #[test]
    fn numbers_parse_back_bitwise(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let s = format_number(x);
        let y: f64 = s.parse().unwrap();
        prop_assert_eq!(x.to_bits(), y.to_bits(), "{} -> {}", x, s);
    }

    #[test]
    fn records_round_trip(rows in proptest::collection::vec((0usize..1000, -1e6f64..1e6, "[a-z/ ,]{0,8}"), 0..20), seed in any::<u64>()) {
        let cfg = ExperimentConfig { seed, ..ExperimentConfig::default() };
        let mut rec = ExperimentRecord::new(&cfg, &["n", "value", "label"]);
        for (n, v, l) in &rows {
            rec.push(vec![(*n).into(), (*v).into(), Cell::Text(format!("x{l}"))]);
        }
        let text = rec.to_csv_string();
        let back = ExperimentRecord::read_csv(text.as_bytes()).unwrap();
        prop_assert_eq!(back, rec);
    }
}

#[test]
fn header_contract() {
    let cfg = ExperimentConfig::default();
    let rec = ExperimentRecord::new(&cfg, &["n", "variance"]);
    let text = rec.to_csv_string();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# dissim v{} seed=7 config={}", env!("CARGO_PKG_VERSION"), cfg.hash()));
    assert_eq!(lines.next().unwrap(), "n,variance");
}
