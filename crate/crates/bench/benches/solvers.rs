use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use quasiprop_core::{
    best_response_gap, best_response_iteration, giga_solve, AuctionInstance, Method, PaymentRule,
    SolverConfig, ValuationProfile, WeightSpec,
};

fn instance(rule: PaymentRule, weight: &str, alpha: f64, n: usize) -> AuctionInstance {
    let profile = ValuationProfile::one_high(alpha, 1.0, n).unwrap();
    AuctionInstance::new(rule, profile, weight.parse::<WeightSpec>().unwrap())
}

fn config(method: Method) -> SolverConfig {
    SolverConfig::default()
        .with_method(method)
        .with_tolerance(1e-12)
}

fn solvers(c: &mut Criterion) {
    let cases = [
        (
            "allpay_sqrt_a100_n2",
            instance(PaymentRule::AllPay, "sqrt", 100.0, 2),
        ),
        (
            "winnerpay_linear_a1e4_n2",
            instance(PaymentRule::WinnersPay, "linear", 1e4, 2),
        ),
        (
            "winnerpay_sqrt_a100_n5",
            instance(PaymentRule::WinnersPay, "sqrt", 100.0, 5),
        ),
        (
            "allpay_linear_a100_n50",
            instance(PaymentRule::AllPay, "linear", 100.0, 50),
        ),
    ];
    let mut group = c.benchmark_group("best_response_iteration");
    for (name, inst) in &cases {
        let cfg = config(Method::BestResponseIteration);
        group.bench_with_input(BenchmarkId::from_parameter(name), inst, |b, inst| {
            b.iter(|| best_response_iteration(black_box(inst), &cfg).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("giga");
    group.sample_size(10);
    for (name, inst) in &cases[..3] {
        let cfg = config(Method::Giga);
        group.bench_with_input(BenchmarkId::from_parameter(name), inst, |b, inst| {
            b.iter(|| giga_solve(black_box(inst), &cfg).unwrap())
        });
    }
    group.finish();
}

fn certificate(c: &mut Criterion) {
    let inst = instance(PaymentRule::WinnersPay, "sqrt", 100.0, 50);
    let bids = best_response_iteration(&inst, &config(Method::BestResponseIteration))
        .unwrap()
        .bids;
    c.bench_function("best_response_gap_n50", |b| {
        b.iter(|| best_response_gap(black_box(&inst), black_box(&bids), 1e-12).unwrap())
    });
}

criterion_group!(benches, solvers, certificate);
criterion_main!(benches);
