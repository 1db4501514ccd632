mod common;

use common::{double_oracle, midpoint_richardson};
use fredholm_core::kernel::Kernel;
use fredholm_core::Error;
use proptest::prelude::*;
use std::f64::consts::{E, PI};

fn kernel_strategy() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        (0.1..3.0f64, 0.1..3.0f64, 0.1..4.0f64, 0.5..20.0f64)
            .prop_map(|(a1, a2, b1, gap)| Kernel::exponential_sum(vec![a1, a2], vec![b1, b1 + gap]).unwrap()),
        (0.2..2.0f64).prop_map(|c| Kernel::capped_linear(c).unwrap()),
        (1.0..12.0f64, 1u32..6).prop_map(|(r, p)| Kernel::power_capped(r, p).unwrap()),
        (0.1..6.0f64).prop_map(|r| Kernel::trigonometric(r).unwrap()),
        (0.1..0.9f64, 0.2..3.0f64).prop_map(|(a, s)| Kernel::power_law(a, s).unwrap()),
        (0.05..0.6f64, 0.2..0.9f64).prop_map(|(dx, r)| {
            let xs: Vec<f64> = (0..6).map(|k| k as f64 * dx).collect();
            let vs: Vec<f64> = (0..6).map(|k| r.powi(k)).collect();
            Kernel::tabulated(xs, vs).unwrap()
        }),
    ]
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (0.0..1.8f64, 0.01..0.6f64).prop_map(|(lo, w)| (lo, (lo + w).min(2.0)))
}

fn relative_gap(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn double_integral_matches_oracle(k in kernel_strategy(), x in interval(), y in interval()) {
        let got = k.cell_double_integral(x.0, x.1, y.0, y.1);
        let want = double_oracle(&k, x, y);
        let touches = x.0.max(y.0) <= x.1.min(y.1);
        let tol = if matches!(k, Kernel::PowerLaw(_)) && touches { 1e-4 } else { 1e-7 };
        prop_assert!(relative_gap(got, want) <= tol || (got - want).abs() < 1e-13,
            "{} {:?} {:?}: {} vs {}", k.family(), x, y, got, want);
    }

    #[test]
    fn double_integral_is_symmetric(k in kernel_strategy(), x in interval(), y in interval()) {
        let a = k.cell_double_integral(x.0, x.1, y.0, y.1);
        let b = k.cell_double_integral(y.0, y.1, x.0, x.1);
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-12));
    }

    #[test]
    fn evaluate_is_nonincreasing(k in kernel_strategy()) {
        prop_assume!(!matches!(k, Kernel::Trigonometric(_)));
        let start = if matches!(k, Kernel::PowerLaw(_)) { 1e-3 } else { 0.0 };
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let t = start + 3.0 * i as f64 / 999.0;
            let v = k.evaluate(t).unwrap();
            prop_assert!(v <= prev * (1.0 + 1e-14) && v >= 0.0);
            prev = v;
        }
    }
}

#[test]
fn power_law_diagonal_cell_is_finite_and_exact() {
    let k = Kernel::power_law(0.5, 1.0).unwrap();
    // ∫_0^1∫_0^1 |t-s|^{-1/2} = 2 * ∫_0^1 (1-u) u^{-1/2} du = 2 * (2 - 2/3)
    let got = k.cell_double_integral(0.0, 1.0, 0.0, 1.0);
    assert!((got - 8.0 / 3.0).abs() < 1e-14);
}

#[test]
fn evaluate_examples() {
    assert_eq!(Kernel::exponential_sum(vec![1.0], vec![1.0]).unwrap().evaluate(0.0).unwrap(), 1.0);
    assert_eq!(Kernel::capped_linear(1.0).unwrap().evaluate(2.0).unwrap(), 0.0);
    let v = Kernel::power_capped(10.0, 4).unwrap().evaluate(0.05).unwrap();
    assert!((v - 0.5f64.powi(4)).abs() < 1e-15);
    assert!(matches!(Kernel::power_law(0.3, 1.0).unwrap().evaluate(0.0), Err(Error::Domain { .. })));
}

#[test]
fn trig_square_matches_richardson_midpoint() {
    let k = Kernel::trigonometric(1.0).unwrap();
    let got = k.cell_double_integral(0.0, PI, 0.0, PI);
    let want = midpoint_richardson(&|t, s| (t - s).cos(), (0.0, PI), (0.0, PI), 64);
    assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    assert!((got - 4.0).abs() < 1e-12);
}

#[test]
fn capped_linear_far_cells_vanish() {
    let k = Kernel::capped_linear(1.0).unwrap();
    assert_eq!(k.cell_double_integral(0.0, 1.0, 2.0, 3.0), 0.0);
}

#[test]
fn exponential_unit_square() {
    let k = Kernel::exponential_sum(vec![1.0], vec![1.0]).unwrap();
    let got = k.cell_double_integral(0.0, 1.0, 0.0, 1.0);
    assert!((got - 2.0 / E).abs() < 1e-15);
    assert!((double_oracle(&k, (0.0, 1.0), (0.0, 1.0)) - 2.0 / E).abs() < 1e-12);
}

#[test]
fn classification_examples() {
    let e = Kernel::exponential_sum(vec![1.0], vec![1.0]).unwrap().classify();
    assert!(e.completely_monotone);
    assert!(!Kernel::trigonometric(1.0).unwrap().classify().convex);
    let c = Kernel::capped_linear(1.0).unwrap().classify();
    assert!(!c.completely_monotone && c.convex);
    let p = Kernel::power_capped(10.0, 4).unwrap().classify();
    assert!(p.convex && !p.completely_monotone && p.nonincreasing);
    assert!(Kernel::power_law(0.5, 1.0).unwrap().classify().completely_monotone);

    // samples of e^{-t} are as monotone as a table can show, yet never
    // completely monotone
    let xs: Vec<f64> = (0..12).map(|k| k as f64 * 0.25).collect();
    let vs: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
    let s = Kernel::tabulated(xs, vs).unwrap().classify();
    assert!(!s.completely_monotone && s.convex && s.positive_type_known);
    assert_eq!(s.evidence.unwrap().alternating_order, 6);
}
