#[test]
fn print_erfc_accuracy() {
    let table: [(f64, f64); 11] = [
        (-8.0, 6.220_960_574_271_784e-16),
        (-5.0, 2.866_515_718_791_939e-7),
        (-3.0, 1.349_898_031_630_094_5e-3),
        (-1.2345, 0.108_508_323_362_670_16),
        (-0.5, 0.308_537_538_725_986_9),
        (0.0, 0.5),
        (0.3, 0.617_911_422_188_952_64),
        (1.0, 0.841_344_746_068_542_9),
        (2.5, 0.993_790_334_674_223_86),
        (6.0, 0.999_999_999_013_412_4),
        (8.0, 0.999_999_999_999_999_4),
    ];
    for (x, want) in table {
        let got = hedgelab::analytics::norm_cdf(x);
        println!("Phi({x:8}) = {got:.18e}  abs err {:.2e}", (got - want).abs());
    }
}
