use proptest::prelude::*;

use padic_stable::analytic::StableSpec;
use padic_stable::driver::{truncate_large_jumps, PathSampler};
use padic_stable::integral::{
    integrate_adapted_ticks, integrate_simple_ticks, AdaptedIntegrand, Rule, SimpleIntegrand,
};
use padic_stable::pathfile::PathRecord;
use padic_stable::{Norm, PAdic, Window};

fn w() -> Window {
    Window::new(-24, 24).unwrap()
}

fn spec() -> impl Strategy<Value = StableSpec> {
    (prop::sample::select(vec![2u32, 3]), prop::sample::select(vec![1.5, 2.0]))
        .prop_map(|(p, a)| StableSpec::new(p, a).unwrap())
}

fn int(p: u32, v: i64) -> PAdic {
    PAdic::from_i64(p, w(), v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finer_resolution_only_adds_small_jumps(s in spec(), seed in any::<u64>(), stream in 0u64..1000, m in 1i32..3, k in 1i32..3) {
        let coarse = PathSampler::new(&s, m, w(), seed).unwrap().with_base_resolution(m).unwrap();
        let fine = PathSampler::new(&s, m + k, w(), seed).unwrap().with_base_resolution(m).unwrap();
        let a = coarse.sample(stream, 1.5).unwrap();
        let b = fine.sample(stream, 1.5).unwrap();
        let shared: Vec<_> = b.events().iter().filter(|e| e.jump.norm() > Norm::Pow(-m)).cloned().collect();
        prop_assert_eq!(a.events(), shared.as_slice());
        // with the shared jumps equal, Z_fine - Z_coarse is the running sum of the small ones
        let mut gap = b.zero();
        for e in b.events().iter().filter(|e| e.jump.norm() <= Norm::Pow(-m)) {
            gap = &gap + &e.jump;
            prop_assert!(gap.norm() <= Norm::Pow(-m));
        }
    }

    #[test]
    fn longer_horizons_extend_paths(s in spec(), seed in any::<u64>(), stream in 0u64..1000) {
        let sampler = PathSampler::new(&s, 2, w(), seed).unwrap();
        let short = sampler.sample(stream, 1.25).unwrap();
        let long = sampler.sample(stream, 3.0).unwrap();
        let head: Vec<_> = long.events().iter().filter(|e| e.tick <= short.horizon_ticks()).cloned().collect();
        prop_assert_eq!(short.events(), head.as_slice());
    }

    #[test]
    fn simple_integral_is_linear(s in spec(), seed in any::<u64>(), a in -20i64..20, b in -20i64..20, c in -20i64..20, d in -20i64..20) {
        let p = s.p();
        let path = PathSampler::new(&s, 2, w(), seed).unwrap().sample(0, 1.0).unwrap();
        let times = [0.0, 0.5, 1.0];
        let phi = SimpleIntegrand::from_times(&times, vec![Rule::Constant(int(p, a)), Rule::Constant(int(p, b))]).unwrap();
        let psi = SimpleIntegrand::from_times(&times, vec![Rule::Constant(int(p, c)), Rule::Constant(int(p, d))]).unwrap();
        let sum = SimpleIntegrand::from_times(&times, vec![Rule::Constant(int(p, a + c)), Rule::Constant(int(p, b + d))]).unwrap();
        // a jump of valuation v < 0 loses product digits from hi + v on
        let v_min = path.events().iter().filter_map(|e| e.jump.valuation()).min().unwrap_or(0).min(0);
        let exact_below = (w().hi + v_min) as i64;
        for e in path.events() {
            let lhs = integrate_simple_ticks(&sum, &path, e.tick).unwrap();
            let rhs = &integrate_simple_ticks(&phi, &path, e.tick).unwrap() + &integrate_simple_ticks(&psi, &path, e.tick).unwrap();
            prop_assert_eq!(lhs.truncate_from(exact_below), rhs.truncate_from(exact_below));
        }
    }

    #[test]
    fn adapted_integral_ignores_the_future(s in spec(), seed in any::<u64>(), cut in 0.05f64..0.95) {
        let p = s.p();
        let path = PathSampler::new(&s, 2, w(), seed).unwrap().sample(0, 1.0).unwrap();
        let phi = AdaptedIntegrand::new("1 + z^2", move |z| &z.checked_mul(z).unwrap() + &int(p, 1));
        let tick = padic_stable::driver::to_ticks(cut);
        let past = path.history(tick);
        prop_assert_eq!(
            integrate_adapted_ticks(&phi, &path, tick).unwrap(),
            integrate_adapted_ticks(&phi, &past, tick).unwrap()
        );
    }

    #[test]
    fn large_jump_truncation_is_idempotent(s in spec(), seed in any::<u64>(), m in -1i32..3) {
        let path = PathSampler::new(&s, 2, w(), seed).unwrap().sample(0, 2.0).unwrap();
        let once = truncate_large_jumps(&path, m);
        prop_assert!(once.events().iter().all(|e| e.jump.norm() <= Norm::Pow(m)));
        let twice = truncate_large_jumps(&once, m);
        prop_assert_eq!(twice.events(), once.events());
    }

    #[test]
    fn path_files_round_trip(s in spec(), seed in any::<u64>(), stream in 0u64..100) {
        let path = PathSampler::new(&s, 2, w(), seed).unwrap().sample(stream, 1.0).unwrap();
        let text = PathRecord::from_path(&path).to_text();
        let back = PathRecord::parse(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        let reread = back.into_path().unwrap();
        prop_assert_eq!(reread.events(), path.events());
    }
}
