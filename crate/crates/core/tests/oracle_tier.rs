use che::oracle::{
    holding_time_functional, mc_exit_time_law, mc_holding_time_functional, mc_ttl_misses, TabulatedIntensity,
};
use che::{CanonicalIntensity, MarginPolicy, MarkLaw, QuadratureConfig};

#[test]
fn ttl_oracle_matches_box_with_fixed_marks() {
    let model = CanonicalIntensity::boxed(MarkLaw::fixed(2.0).unwrap(), MarkLaw::fixed(1.5).unwrap());
    let q = QuadratureConfig::default();
    for (i, t) in [0.1, 0.7, 3.0].into_iter().enumerate() {
        let r = mc_ttl_misses(&model, t, 200_000, 90 + i as u64, &q).unwrap();
        assert!(r.passes(4.0), "t={t}: {r}");
    }
}

#[test]
fn holding_functional_quadrature_agrees_with_sampling() {
    let lambda = TabulatedIntensity::new(vec![0.0, 0.5, 2.0], vec![0.0, 3.0, 0.0]).unwrap();
    let q = QuadratureConfig::default();
    let f = |h: f64| h.min(0.4);
    let direct = holding_time_functional(f, &lambda, &q).unwrap();
    let mc = mc_holding_time_functional(f, &lambda, &[0.4], 200_000, 5, &q).unwrap();
    assert!((mc.target - direct).abs() <= 1e-8 * direct.abs().max(1.0));
    assert!(mc.passes(4.0), "{mc}");
}

#[test]
fn exit_time_follows_gamma_law_for_unit_box() {
    let model = CanonicalIntensity::boxed(MarkLaw::fixed(1.0).unwrap(), MarkLaw::fixed(1.0).unwrap());
    let q = QuadratureConfig::default();
    let r = mc_exit_time_law(20.0, &model, 3, 2.0, 400, 17, MarginPolicy::Stationary, &q).unwrap();
    assert!(!r.excessive_censoring, "{} censored", r.n_censored);
    assert!(r.p_value >= 0.001, "KS {} p {}", r.ks_statistic, r.p_value);
    assert!(r.samples.windows(2).all(|w| w[0] <= w[1]));
}
