use num_complex::Complex64;
use pam_core::expansion::{
    default_contour, gamma_lambda, i_lambda, mu_via_partitions, onesided_weight, partition_contour,
};
use pam_core::mathcore::enumerate_partitions;
use pam_core::quadrature::{default_plan, nested_shift_integral};
use pam_core::{LogComplex, MomentResult, Route};

fn nested(k: usize, t: f64, m: i64) -> MomentResult {
    let f = move |_: usize, z: Complex64| LogComplex::exp_of(z * t - t - z.ln() * (m + 1) as f64);
    let out = nested_shift_integral(&f, 1.0, &default_plan(k, 1.0).unwrap(), 1e-11).unwrap();
    MomentResult::from_log(out.value, Route::Quadrature, out.rel_error, out.nodes)
}

#[test]
fn expansion_reproduces_nested_integral() {
    for k in 1..=3 {
        for (t, m) in [(0.5, 0), (1.0, 2), (0.8, 1)] {
            let f = onesided_weight(t, m);
            let (mu, terms) = mu_via_partitions(&f, k, &default_contour(), 1e-11).unwrap();
            assert_eq!(terms.len(), enumerate_partitions(k).unwrap().len());
            assert!(mu.rel_diff(&nested(k, t, m)) < 1e-9, "k={k} t={t} m={m}");
        }
    }
}

#[test]
fn expansion_with_generic_weight() {
    // a weight with a pole of order 3 at 0 and a zero at 0.3
    let f = |z: Complex64| LogComplex::from_complex((z - 0.3) * (0.9 * z).exp() / (z * z * z));
    let g = |_: usize, z: Complex64| f(z);
    for k in [2usize, 3] {
        let (mu, _) = mu_via_partitions(&f, k, &default_contour(), 1e-12).unwrap();
        let out = nested_shift_integral(&g, 1.0, &default_plan(k, 1.0).unwrap(), 1e-12).unwrap();
        let direct = MomentResult::from_log(out.value, Route::Quadrature, 0.0, 0);
        assert!(mu.rel_diff(&direct) < 1e-9, "k={k}");
    }
}

#[test]
fn ground_state_term_dominates() {
    let nu = 1.0;
    for k in [2usize, 3] {
        let t = 20.0;
        let f = onesided_weight(t, (nu * t) as i64);
        let rates: Vec<(Vec<usize>, f64, f64)> = enumerate_partitions(k)
            .unwrap()
            .iter()
            .map(|lambda| {
                let c = partition_contour(lambda, nu).unwrap();
                let term = i_lambda(&f, lambda, &c, 1e-8).unwrap();
                (lambda.parts().to_vec(), term.value.log_abs / t, gamma_lambda(lambda, nu).unwrap())
            })
            .collect();
        let top = rates.iter().find(|r| r.0 == vec![k]).unwrap();
        for other in rates.iter().filter(|r| r.0 != vec![k]) {
            assert!(other.2 < top.2);
            assert!(other.1 < top.1, "k={k}: {rates:?}");
        }
    }
}
