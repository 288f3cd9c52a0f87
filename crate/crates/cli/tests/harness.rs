use quasiprop_core::{AuctionInstance, BidVector, PaymentRule, WeightSpec};
use quasiprop_harness::verify::{Verifier, VerifySettings};
use quasiprop_harness::{run_sweep, write_csv, AlphaGrid, SweepSpec};

fn small_settings() -> VerifySettings {
    VerifySettings {
        gradient_cases: 200,
        ..VerifySettings::default()
    }
}

#[test]
fn gradient_check_passes_for_the_real_gradient() {
    let report = Verifier::new(small_settings()).run(9);
    assert!(report.passed(), "{report}");
}

#[test]
fn gradient_check_catches_a_broken_gradient() {
    let verifier = Verifier::new(small_settings())
        .with_gradient(|inst, i, bid, others| 1.001 * inst.unilateral_gradient(i, bid, others));
    let report = verifier.run(9);
    assert!(!report.passed());
}

fn spec(preset: &str, stop: f64) -> SweepSpec {
    let mut spec = SweepSpec::preset(preset).unwrap();
    spec.alpha = AlphaGrid::new(1.0, stop, None);
    spec
}

#[test]
fn rows_recompute_from_their_bids() {
    let mut s = spec("allpay-two", 100.0);
    s.n = vec![2, 3];
    for row in run_sweep(&s).unwrap() {
        let inst = row.instance(s.low_value).unwrap();
        let bids = BidVector::from_original(&row.bids, inst.values()).unwrap();
        assert!((inst.revenue(&bids).unwrap() - row.revenue).abs() <= 1e-10);
        assert!((inst.efficiency(&bids).unwrap() - row.efficiency).abs() <= 1e-10);
        assert!(row.converged);
        assert!(row.epsilon <= s.solver.tolerance);
    }
}

#[test]
fn csv_is_deterministic_and_parses_back() {
    let s = spec("winnerpay-two", 1e3);
    let render = || {
        let mut buf = Vec::new();
        write_csv(&run_sweep(&s).unwrap(), &mut buf).unwrap();
        buf
    };
    let first = render();
    assert_eq!(first, render());

    let mut reader = csv::Reader::from_reader(first.as_slice());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "alpha",
            "n",
            "rule",
            "weight",
            "revenue",
            "efficiency",
            "epsilon",
            "iterations",
            "bids"
        ]
    );
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 76 * 3);
    for rec in &records {
        let rule: PaymentRule = rec[2].parse().unwrap();
        let weight: WeightSpec = rec[3].parse().unwrap();
        let alpha: f64 = rec[0].parse().unwrap();
        let bids: Vec<f64> = rec[8].split(';').map(|b| b.parse().unwrap()).collect();
        let inst = AuctionInstance::from_values(rule, vec![alpha, 1.0], weight).unwrap();
        let b = BidVector::from_original(&bids, inst.values()).unwrap();
        let revenue: f64 = rec[4].parse().unwrap();
        assert!(((inst.revenue(&b).unwrap() - revenue) / revenue).abs() <= 1e-10);
    }
}

#[test]
fn empty_alpha_grid_is_rejected() {
    let mut s = spec("winnerpay-two", 10.0);
    s.alpha.points = Some(0);
    assert!(run_sweep(&s).is_err());
    let mut s = spec("winnerpay-two", 10.0);
    s.weights.clear();
    assert!(run_sweep(&s).is_err());
}

fn revenue_at(rows: &[quasiprop_harness::SweepRow], alpha: f64, n: usize, w: &str) -> f64 {
    rows.iter()
        .find(|r| (r.alpha - alpha).abs() < 1e-9 * alpha && r.n == n && r.weight.to_string() == w)
        .unwrap_or_else(|| panic!("no row for alpha={alpha} n={n} {w}"))
        .revenue
}

#[test]
fn two_bidder_winnerpay_curves_order_by_weight_at_alpha_100() {
    let rows = run_sweep(&spec("winnerpay-two", 1e4)).unwrap();
    let quarter = revenue_at(&rows, 100.0, 2, "power:0.25");
    let half = revenue_at(&rows, 100.0, 2, "power:0.5");
    let linear = revenue_at(&rows, 100.0, 2, "power:1");
    assert!(
        quarter > half && half > linear,
        "x^(1/4) {quarter}, sqrt {half}, x {linear}"
    );
}

#[test]
fn winnerpay_revenue_increases_with_bidder_count() {
    for preset in ["winnerpay-many-linear", "winnerpay-many-sqrt"] {
        let s = spec(preset, 1e4);
        let rows = run_sweep(&s).unwrap();
        for alpha in s.alpha.values() {
            let w = s.weights[0].to_string();
            let series: Vec<f64> =
                s.n.iter()
                    .map(|&n| revenue_at(&rows, alpha, n, &w))
                    .collect();
            assert!(
                series.windows(2).all(|p| p[1] > p[0]),
                "{preset} alpha={alpha}: {series:?}"
            );
        }
    }
}
