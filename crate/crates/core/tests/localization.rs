use wignerwalk::*;

#[test]
fn source_weight_grows_with_disorder_strength() {
    let n = RingSize::new(101).unwrap();
    let peaks: Vec<f64> = [1.0 / 40.0, 1.0 / 10.0, 1.0 / 4.0, 1.0 / 2.0]
        .iter()
        .map(|&delta| {
            let spec = EnsembleSpec::new(n, 50, DisorderKind::Dod, delta, 1000, 0);
            let res = ensemble_longtime(&spec).unwrap();
            marginal_position(res.longtime().unwrap())[50]
        })
        .collect();
    assert!(peaks.windows(2).all(|w| w[0] < w[1]), "{peaks:?}");
}
