//! Library quantities against values computed independently of it.

use std::f64::consts::PI;

use sausage_core::functionals::{d0_adaptive, ADAPTIVE_H0};
use sausage_core::geometry::{ball_capacity, green_g, gstar, Point4};
use sausage_core::paths::{dyadic_shell_record, sample_skeleton, ExitTimeLaw};
use sausage_core::rng::RngStream;
use sausage_core::Tally;

mod common;
use common::{pair_ratio, potential_closed, simpson};

/// Fraction of the 3-sphere at polar angle at most `theta0` from a pole;
/// the polar angle has density `(2/π) sin²θ`.
fn cap_fraction(theta0: f64) -> f64 {
    (2.0 / PI) * (theta0 / 2.0 - (2.0 * theta0).sin() / 4.0)
}

/// `∫_{B(z,1)} 1/(2π²‖w‖²) dw` at `‖z‖ = rho`, integrating over spheres
/// `‖w‖ = s` the fraction of each that lies in the ball.
fn unit_ball_potential(rho: f64) -> f64 {
    let lo = (rho - 1.0).max(0.0);
    let hi = rho + 1.0;
    let frac = |s: f64| {
        if s + rho <= 1.0 {
            return 1.0;
        }
        if s == 0.0 || rho == 0.0 {
            return if s <= 1.0 { 1.0 } else { 0.0 };
        }
        let c = ((s * s + rho * rho - 1.0) / (2.0 * s * rho)).clamp(-1.0, 1.0);
        cap_fraction(c.acos())
    };
    // area 2π²s³ times G(s) leaves s
    simpson(|s| s * frac(s), lo, hi, 20_000)
}

/// `E ∫_0^t f(‖β_s‖) ds = ∫_0^∞ ρ f(ρ) e^{-ρ²/2t} dρ` for radial `f`.
fn expected_occupation(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let hi = (60.0 * t).sqrt();
    simpson(|r| r * f(r) * (-r * r / (2.0 * t)).exp(), 0.0, hi, 400_000)
}

#[test]
fn unit_ball_potential_matches_library() {
    for rho in [0.0, 0.25, 0.5, 0.75, 0.999, 1.001, 1.5, 3.0, 10.0] {
        let q = unit_ball_potential(rho);
        assert!((gstar(rho) - q).abs() < 2e-5 * q.max(1e-3), "rho {rho}: {} vs {q}", gstar(rho));
        assert!((potential_closed(rho) - q).abs() < 2e-5 * q.max(1e-3));
    }
}

#[test]
fn green_function_scales_inverse_square() {
    let z = Point4::new(1.0, 2.0, -1.0, 0.5);
    let g = green_g(z).unwrap();
    assert!((g * 2.0 * PI * PI * z.norm_sq() - 1.0).abs() < 1e-14);
    assert!((green_g(z * 3.0).unwrap() * 9.0 - g).abs() < 1e-15);
    assert!(green_g(Point4::ORIGIN).is_err());
    assert!((ball_capacity(2.0) - 8.0 * PI * PI).abs() < 1e-12);
}

#[test]
fn mean_d0_matches_radial_quadrature() {
    let t = 100.0;
    let exact = expected_occupation(potential_closed, t);
    // leading behaviour: (log 2t − γ)/8 + 3/16 up to e^{-1/2t} corrections
    let asym = ((2.0 * t).ln() - 0.577_215_664_901_532_9) / 8.0 + 3.0 / 16.0;
    assert!((exact - asym).abs() < 0.01, "{exact} vs {asym}");
    let base = RngStream::new(11, 0);
    let tally: Tally = (0..4000)
        .map(|i| d0_adaptive(&mut base.child(i), Point4::ORIGIN, t, ADAPTIVE_H0).unwrap().value)
        .collect();
    let e = tally.estimate(11);
    let slack = 3.0 * e.std_error + 0.01 * exact;
    assert!((e.mean - exact).abs() < slack, "{e:?} vs {exact}");
}

#[test]
fn pair_ratio_quadrature_reproduces_published_value() {
    let q = pair_ratio(40.0, 25.0);
    assert!((q - 123.37).abs() < 0.005 * 123.37, "{q}");
    // outside the unit ball the potential is |B(0,1)|·G, hence the far-field value tπ²/2
    let far = pair_ratio(400.0, 25.0);
    assert!((far - 25.0 * PI * PI / 2.0).abs() < 0.01 * far, "{far}");
}

#[test]
fn mean_skeleton_gap_is_a_quarter_delta_squared() {
    assert!((ExitTimeLaw::get().mean() - 0.25).abs() < 1e-6);
    let delta = 0.2;
    let sk = sample_skeleton(&mut RngStream::new(5, 0), Point4::ORIGIN, 2000.0, delta).unwrap();
    let gaps: Tally = sk.times.windows(2).map(|w| w[1] - w[0]).collect();
    let e = gaps.estimate(5);
    assert!(gaps.count() > 100_000);
    assert!(e.within_sigma(delta * delta / 4.0, 4.0), "{e:?}");
}

#[test]
fn first_shell_integral_has_log_two_mean() {
    // ½Δ log‖x‖ = 1/‖x‖², so log‖β‖/(2π²) − ∫ G(β) is a martingale
    let exact = 2f64.ln() / (2.0 * PI * PI);
    let base = RngStream::new(7, 0);
    let tally: Tally = (0..20_000)
        .map(|i| dyadic_shell_record(&mut base.child(i), 10.0, 0.001).unwrap().y[0])
        .collect();
    let e = tally.estimate(7);
    // missed crossings of the outer sphere lengthen the shell by O(√h)
    assert!((e.mean - exact).abs() < 3.0 * e.std_error + 0.02 * exact, "{e:?} vs {exact}");
}
