use proptest::prelude::*;

use padic_stable::{Ball, Norm, PAdic, Window};

const LO: i32 = -32;
const HI: i32 = 32;

fn w() -> Window {
    Window::new(LO, HI).unwrap()
}

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

/// Numbers with valuation in `[-8, 8]`, or zero, with digits up to `hi`.
fn padic(p: u32) -> impl Strategy<Value = PAdic> {
    (-8i32..=8, prop::collection::vec(0..p as u8, (HI + 8) as usize), any::<bool>()).prop_map(
        move |(v, mut digits, zero)| {
            if zero {
                return PAdic::zero(p, w()).unwrap();
            }
            digits[0] = digits[0].max(1);
            PAdic::from_digits(p, w(), v, &digits).unwrap()
        },
    )
}

fn pair() -> impl Strategy<Value = (PAdic, PAdic)> {
    prime().prop_flat_map(|p| (padic(p), padic(p)))
}

fn triple() -> impl Strategy<Value = (PAdic, PAdic, PAdic)> {
    prime().prop_flat_map(|p| (padic(p), padic(p), padic(p)))
}

proptest! {
    #[test]
    fn ultrametric_inequality((x, y) in pair()) {
        let s = &x + &y;
        prop_assert!(s.norm() <= x.norm().max(y.norm()));
        if x.norm() != y.norm() {
            prop_assert_eq!(s.norm(), x.norm().max(y.norm()));
        }
    }

    #[test]
    fn add_sub_round_trip((x, y) in pair()) {
        prop_assert_eq!(&(&x + &y) - &y, x.clone());
        prop_assert_eq!(&x - &x, PAdic::zero(x.prime(), w()).unwrap());
    }

    #[test]
    fn addition_is_associative((x, y, z) in triple()) {
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
    }

    #[test]
    fn norm_is_multiplicative((x, y) in pair()) {
        let prod = x.checked_mul(&y).unwrap();
        let expected = match (x.norm(), y.norm()) {
            (Norm::Pow(a), Norm::Pow(b)) => Norm::Pow(a + b),
            _ => Norm::Zero,
        };
        prop_assert_eq!(prod.norm(), expected);
    }

    #[test]
    fn mul_div_round_trip((x, y) in pair()) {
        prop_assume!(!y.is_zero());
        let vy = y.valuation().unwrap();
        let back = x.checked_mul(&y).unwrap().checked_div(&y).unwrap();
        // product digits at exponents ≥ hi are lost, which blurs the quotient from hi - vy on
        let exact_below = (HI - vy.max(0)) as i64;
        prop_assert_eq!(back.truncate_from(exact_below), x.truncate_from(exact_below));
    }

    #[test]
    fn character_is_a_homomorphism((x, y) in pair(), k in -4i32..=4) {
        let lhs = (&x + &y).character_scaled(k);
        let rhs = x.character_scaled(k) * y.character_scaled(k);
        prop_assert!((lhs - rhs).norm() < 1e-9);
        prop_assert!((x.character_scaled(k).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn character_is_trivial_on_the_unit_ball(x in prime().prop_flat_map(padic)) {
        prop_assume!(x.norm() <= Norm::Pow(0));
        prop_assert!((x.character() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn balls_nest_or_are_disjoint((x, y) in pair(), r in -6i32..=6, s in -6i32..=6) {
        let a = Ball::new(&x, r);
        let b = Ball::new(&y, s);
        let nested = a.contains_ball(&b) || b.contains_ball(&a);
        prop_assert_eq!(a.intersects(&b), nested);
        // every point of a ball is a center
        prop_assert_eq!(a.contains(&y), Ball::new(&y, r).contains(&x));
    }

    #[test]
    fn literal_round_trip(x in prime().prop_flat_map(padic)) {
        let text = x.to_string();
        prop_assert_eq!(PAdic::parse(&text, x.prime(), w()).unwrap(), x);
    }
}
