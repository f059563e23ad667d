use dslift::orthopoly::{build_basis, gauss_rule, value_at_one, JacobiParams};
use dslift::special::jacobi_weight_mass;
use proptest::prelude::*;

fn params(a: f64, b: f64) -> JacobiParams {
    JacobiParams::new(a, b).unwrap()
}

fn gram_deviation(p: JacobiParams, n: usize) -> f64 {
    let basis = build_basis(p, n).unwrap();
    let rule = gauss_rule(p, n + 1).unwrap();
    let mut gram = vec![0.0; (n + 1) * (n + 1)];
    let mut vals = vec![0.0; n + 1];
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        basis.eval_all(x, &mut vals);
        for j in 0..=n {
            let wj = w * vals[j];
            for k in 0..=n {
                gram[j * (n + 1) + k] += wj * vals[k];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for j in 0..=n {
        for k in 0..=n {
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((gram[j * (n + 1) + k] - target).abs());
        }
    }
    worst
}

#[test]
fn gram_matrix_is_identity_up_to_256() {
    for &(a, b) in &[
        (-0.5, -0.5),
        (0.0, 0.0),
        (1.5, 1.5),
        (2.0, 1.0),
        (-0.5, 0.5),
    ] {
        for &n in &[8, 64, 256] {
            let dev = gram_deviation(params(a, b), n);
            assert!(dev <= 1e-10, "({a},{b}) N={n}: deviation {dev:e}");
        }
    }
}

#[test]
fn orthonormal_with_129_nodes() {
    assert!(gram_deviation(params(1.5, 1.5), 128) <= 1e-10);
}

#[test]
fn weights_sum_to_mass() {
    for &(a, b) in &[(0.0, 0.0), (-0.5, -0.5), (1.5, 1.5), (2.0, 1.0), (3.0, 0.5)] {
        let p = params(a, b);
        for m in [1usize, 2, 7, 40, 300] {
            let rule = gauss_rule(p, m).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            let mass = jacobi_weight_mass(a, b);
            assert!(((sum - mass) / mass).abs() < 1e-12, "({a},{b}) m={m}");
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().iter().all(|&x| x > -1.0 && x < 1.0));
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }
}

/// `∫ x^k (1-x)^a (1+x)^b dx` for the weights used below, from Beta integrals or exact
/// polynomial integration.
fn weighted_monomial(k: u32, a: f64, b: f64) -> f64 {
    let even = |j: u32| {
        if j.is_multiple_of(2) {
            2.0 / (j as f64 + 1.0)
        } else {
            0.0
        }
    };
    if a == b {
        if k % 2 == 1 {
            return 0.0;
        }
        // symmetric weight (1 - x²)^a: B((k+1)/2, a+1)
        let h = (k as f64 + 1.0) / 2.0;
        return (dslift::special::ln_gamma(h) + dslift::special::ln_gamma(a + 1.0)
            - dslift::special::ln_gamma(h + a + 1.0))
        .exp();
    }
    assert_eq!((a, b), (2.0, 1.0));
    // (1 - x)²(1 + x) = 1 - x - x² + x³
    even(k) - even(k + 1) - even(k + 2) + even(k + 3)
}

#[test]
fn exact_on_monomials() {
    for &(a, b) in &[(0.0, 0.0), (-0.5, -0.5), (1.5, 1.5), (2.0, 1.0)] {
        let p = params(a, b);
        for m in [1usize, 3, 6, 10] {
            let rule = gauss_rule(p, m).unwrap();
            for k in 0..(2 * m as u32) {
                let quad = rule.integrate(|x| x.powi(k as i32));
                let exact = weighted_monomial(k, a, b);
                assert!(
                    (quad - exact).abs() <= 1e-10 * exact.abs().max(1.0),
                    "({a},{b}) m={m} k={k}: {quad} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn reflection_symmetry_on_grid() {
    for &(a, b) in &[(2.0, 1.0), (1.5, -0.5), (0.0, 3.0)] {
        let pb = build_basis(params(a, b), 40).unwrap();
        let ps = build_basis(params(b, a), 40).unwrap();
        for i in 0..64 {
            let x = -1.0 + 2.0 * i as f64 / 63.0;
            for l in 0..=40 {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                let lhs = pb.eval(l, -x).unwrap();
                let rhs = sign * ps.eval(l, x).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0),
                    "({a},{b}) ℓ={l} x={x}"
                );
            }
        }
    }
}

#[test]
fn quadratic_transformation() {
    for &a in &[-0.5, 0.0, 0.5, 1.0] {
        let sym = build_basis(params(a, a), 129).unwrap();
        let even = build_basis(params(a, -0.5), 64).unwrap();
        let odd = build_basis(params(a, 0.5), 64).unwrap();
        let c_even = 2f64.powf(a / 2.0 + 0.25);
        let c_odd = 2f64.powf(a / 2.0 + 0.75);
        for i in 0..41 {
            let x = -0.99 + 1.98 * i as f64 / 40.0;
            let y = 2.0 * x * x - 1.0;
            for l in 0..=64 {
                let lhs = sym.eval(2 * l, x).unwrap();
                let rhs = c_even * even.eval(l, y).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                    "even a={a} ℓ={l}"
                );
                let lhs = sym.eval(2 * l + 1, x).unwrap();
                let rhs = c_odd * x * odd.eval(l, y).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                    "odd a={a} ℓ={l}"
                );
            }
        }
    }
}

#[test]
fn jacobi_differential_equation() {
    let h = 1e-5;
    for &(a, b) in &[(-0.5, -0.5), (0.0, 0.0), (1.5, 1.5), (2.0, 1.0)] {
        let basis = build_basis(params(a, b), 32).unwrap();
        for n in 0..=32usize {
            let nf = n as f64;
            for i in 1..20 {
                let x = -0.95 + 1.9 * i as f64 / 20.0;
                let p = |t: f64| basis.eval(n, t).unwrap();
                let d1 = (p(x + h) - p(x - h)) / (2.0 * h);
                let d2 = (p(x + h) - 2.0 * p(x) + p(x - h)) / (h * h);
                let residual = (1.0 - x * x) * d2
                    + (b - a - (a + b + 2.0) * x) * d1
                    + nf * (nf + a + b + 1.0) * p(x);
                assert!(
                    residual.abs() <= 1e-4 * (nf * nf).max(1.0),
                    "({a},{b}) n={n} x={x}: residual {residual:e}"
                );
            }
        }
    }
}

#[test]
fn value_at_one_two_one_four() {
    let p = params(2.0, 1.0);
    let rec = build_basis(p, 4).unwrap().eval(4, 1.0).unwrap();
    assert!(((value_at_one(p, 4) - rec) / rec).abs() < 1e-10);
}

proptest! {
    #[test]
    fn symmetry_random_params(a in -0.99f64..4.0, b in -0.99f64..4.0, x in -1.0f64..1.0, l in 0usize..60) {
        let pb = build_basis(params(a, b), l).unwrap();
        let ps = build_basis(params(b, a), l).unwrap();
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = pb.eval(l, -x).unwrap();
        let rhs = sign * ps.eval(l, x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn recurrence_scales_positive(a in -0.99f64..6.0, b in -0.99f64..6.0) {
        let basis = build_basis(params(a, b), 200).unwrap();
        prop_assert!(basis.recurrence().iter().all(|&(_, s)| s > 0.0 && s.is_finite()));
    }

    #[test]
    fn value_at_one_matches_recurrence(a in -0.9f64..5.0, b in -0.9f64..5.0, l in 0usize..120) {
        let p = params(a, b);
        let rec = build_basis(p, l).unwrap().eval(l, 1.0).unwrap();
        prop_assert!(((value_at_one(p, l) - rec) / rec).abs() < 1e-10);
    }
}
