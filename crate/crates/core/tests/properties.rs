use std::sync::OnceLock;

use gcdsum::exact::GcdFunction;
use gcdsum::expansions::{m_r_id_divisor_form, ExactValue, Expansion};
use gcdsum::special::zeta_complex;
use gcdsum::zeros::{explicit_mobius_sums, j_minus_lambda, parse_zeros, ExplicitSum, ZeroTable};
use gcdsum::{HpComplex, PrecisionContext};
use proptest::prelude::*;
use rug::{Float, Rational};

fn ctx() -> PrecisionContext {
    PrecisionContext::new(40).unwrap()
}

fn table() -> &'static ZeroTable {
    static T: OnceLock<ZeroTable> = OnceLock::new();
    T.get_or_init(|| {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/zeros_10_zprime.txt");
        let text = std::fs::read_to_string(path).unwrap();
        parse_zeros(&text, false, 1, &ctx()).unwrap()
    })
}

fn id_expansion() -> &'static Expansion {
    static E: OnceLock<Expansion> = OnceLock::new();
    E.get_or_init(|| Expansion::new(GcdFunction::Id, 3000, &ctx()).unwrap())
}

fn point(re: f64, im: f64, bits: u32) -> HpComplex {
    HpComplex::new(Float::with_val(bits, re), Float::with_val(bits, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zeta_conjugate_modulus(re in 0.1f64..3.0, im in 0.5f64..80.0) {
        let c = ctx();
        let s = point(re, im, c.bits());
        let (a, _) = zeta_complex(&s, &c).unwrap();
        let (b, _) = zeta_complex(&s.conj(), &c).unwrap();
        let diff = Float::with_val(c.bits(), a.abs() - b.abs()).abs();
        prop_assert!(diff < c.ten_pow_neg(30));
    }

    #[test]
    fn zeta_digits_stable_under_more_precision(re in 0.2f64..2.5, im in 1.0f64..60.0) {
        let lo = PrecisionContext::new(25).unwrap();
        let hi = PrecisionContext::new(60).unwrap();
        let (a, _) = zeta_complex(&point(re, im, lo.bits()), &lo).unwrap();
        let (b, _) = zeta_complex(&point(re, im, hi.bits()), &hi).unwrap();
        let dr = Float::with_val(hi.bits(), &a.re - &b.re).abs();
        let di = Float::with_val(hi.bits(), &a.im - &b.im).abs();
        let scale = Float::with_val(hi.bits(), b.abs()).max(&Float::with_val(hi.bits(), 1));
        let tol = lo.ten_pow_neg(20) * scale;
        prop_assert!(dr <= tol && di <= tol);
    }

    #[test]
    fn jsum_nondecreasing_in_t(lambda in 0.0f64..1.4, a in 14.0f64..49.0, b in 14.0f64..49.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let ja = j_minus_lambda(lo, lambda, table()).unwrap();
        let jb = j_minus_lambda(hi, lambda, table()).unwrap();
        prop_assert!(ja <= jb);
    }

    #[test]
    fn explicit_sums_are_real(n in 2u32..4000, which in 0usize..3) {
        let c = ctx();
        let which = [ExplicitSum::InvSquare, ExplicitSum::InvSquareLog, ExplicitSum::Inv][which];
        let x = Rational::from((2 * n + 1, 2));
        let rep = explicit_mobius_sums(which, &x, table(), &c).unwrap();
        prop_assert!(rep.zero_part.imaginary_residue.clone().abs() < c.ten_pow_neg(c.digits() as i32 - 10));
    }

    #[test]
    fn id_exact_part_via_divisor_route(n in 1u32..3000, half in any::<bool>(), r in 1u32..7) {
        let x = Rational::from((2 * n + half as u32, 2));
        let via_tables = match id_expansion().exact_value(&x, r).unwrap() {
            ExactValue::Rational(q) => q,
            ExactValue::Float(_) => unreachable!("below the exact ceiling"),
        };
        prop_assert_eq!(via_tables, m_r_id_divisor_form(&x, r).unwrap());
    }
}
