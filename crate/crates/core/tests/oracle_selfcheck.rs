mod common;

use common::*;
use statrs::function::gamma::gamma;

#[test]
fn reference_quadrature_checks() {
    let v = integrate(|x| x.sqrt(), 0.0, 1.0, 1e-13);
    assert!((v - 2.0 / 3.0).abs() < 1e-12);
    let e = integrate_to_infinity(|x| (-x).exp(), 0.0, 1e-13);
    assert!((e - 1.0).abs() < 1e-12);
    // g(1) = 1/2 from the closed form x^{H+1/2}/(1+x)
    assert!((kernel_g_defining(1.0, 0.7) - 0.5).abs() < 1e-12);
    // H = 1/2 limit is Brownian: κ = 1
    assert!((fresh_scale(0.5 + 1e-9) - 1.0).abs() < 1e-6);
    // fOU stationary variance equals H Γ(2H)
    assert!((fou_stationary_variance(0.7) - 0.7 * gamma(1.4)).abs() < 1e-8);
}
