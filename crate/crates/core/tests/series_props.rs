use fgforge::{GridSpec, ScalarField, Series};
use proptest::prelude::*;

const ORDER: usize = 4;

fn grid() -> GridSpec {
    GridSpec::new(8).unwrap()
}

/// Series whose coefficients are `c₀ + c₁ cos x₁ + c₂ sin(x₂ + x₃)`.
fn series(raw: &[[f64; 3]]) -> Series {
    let g = grid();
    Series::new(
        raw.iter()
            .map(|c| {
                ScalarField::from_fn(g, |x| c[0] + c[1] * x[0].cos() + c[2] * (x[1] + x[2]).sin())
            })
            .collect(),
    )
}

fn coeffs() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-1.0..1.0f64), ORDER + 1)
}

fn distance(a: &Series, b: &Series) -> f64 {
    a.sub_trunc(b).sup_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_is_commutative(a in coeffs(), b in coeffs()) {
        let (a, b) = (series(&a), series(&b));
        prop_assert!(distance(&a.mul_trunc(&b), &b.mul_trunc(&a)) <= 1e-13);
    }

    #[test]
    fn product_is_associative(a in coeffs(), b in coeffs(), c in coeffs()) {
        let (a, b, c) = (series(&a), series(&b), series(&c));
        let left = a.mul_trunc(&b).mul_trunc(&c);
        let right = a.mul_trunc(&b.mul_trunc(&c));
        prop_assert!(distance(&left, &right) <= 1e-12);
    }

    #[test]
    fn product_distributes_over_sums(a in coeffs(), b in coeffs(), c in coeffs()) {
        let (a, b, c) = (series(&a), series(&b), series(&c));
        let left = a.mul_trunc(&b.add_trunc(&c));
        let right = a.mul_trunc(&b).add_trunc(&a.mul_trunc(&c));
        prop_assert!(distance(&left, &right) <= 1e-12);
    }

    #[test]
    fn reciprocal_inverts_units(mut a in coeffs(), lead in 1.5..3.0f64) {
        // keep the leading coefficient away from zero: |c₀| ≥ 1.5 > |c₁| + |c₂|
        a[0][0] = lead;
        let s = series(&a);
        let r = s.reciprocal().unwrap();
        let one = Series::constant(grid(), ORDER, 1.0);
        prop_assert!(distance(&s.mul_trunc(&r), &one) <= 1e-10);
    }

    #[test]
    fn leibniz_rule_in_t(a in coeffs(), b in coeffs()) {
        let (a, b) = (series(&a), series(&b));
        let left = a.mul_trunc(&b).dt();
        let right = a.dt().mul_trunc(&b.truncate(ORDER - 1)).add_trunc(&a.truncate(ORDER - 1).mul_trunc(&b.dt()));
        prop_assert!(distance(&left, &right) <= 1e-12);
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in coeffs(), b in coeffs(), t in -0.3..0.3f64) {
        // exact for the product polynomial, so compare against the untruncated product
        let (a, b) = (series(&a), series(&b));
        let full = a.pad(2 * ORDER).mul_trunc(&b.pad(2 * ORDER));
        let lhs = full.evaluate(t);
        let rhs = a.evaluate(t).mul(&b.evaluate(t));
        prop_assert!(lhs.sub(&rhs).sup_norm() <= 1e-12);
    }
}
