use anneal_web::{ensemble_histogram_impl, lz_curve_impl, t_curve_impl};

#[test]
fn two_level_curve_oscillates() {
    let v = lz_curve_impl(1.0, 20.0, 50.0, 61).unwrap();
    let ps: Vec<f64> = v.iter().skip(1).step_by(2).copied().collect();
    let maxima = ps.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count();
    assert!(maxima >= 3);
}

#[test]
fn histogram_is_seed_stable() {
    let a = ensemble_histogram_impl(5, 2.0, 100, 9, 16).unwrap();
    let b = ensemble_histogram_impl(5, 2.0, 100, 9, 16).unwrap();
    assert_eq!(a, b);
    assert_eq!(a[..16].iter().sum::<f64>() + a[16], 100.0);
}

#[test]
fn unitary_curve_improves_with_time() {
    let v = t_curve_impl(4, 1, 1.0, 30.0, 2, 0.0).unwrap();
    assert!(v[3] > v[1]);
}
