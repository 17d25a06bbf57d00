mod common;

use ccr_core::behavior::bounded_beh;
use ccr_core::ems::{AnyValue, ModuleSet, ScriptedResolver};
use ccr_core::harness::{check_depth_chain, repeat_conds, repeat_impl, REPEAT_FUEL};
use ccr_core::pcm::{add, eval_rprop, valid, RProp, SigmaRegistry};
use ccr_core::spc::{erase, PreAbstraction};
use ccr_core::Resource;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn micro(seed: u64, with_apc: bool) -> Micro {
    gen_micro(&mut ChaCha8Rng::seed_from_u64(seed), 4, 5, with_apc)
}

fn erased(m: &ccr_core::Module) -> ccr_core::Module {
    erase(&PreAbstraction::from_module(m, Resource::Unit))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn explorer_matches_enumerator(seed in any::<u64>(), fuel in 0u64..=6) {
        let p = micro(seed, false);
        let got = flatten(&bounded_beh(&p.system(), fuel, &micro_env()).unwrap(), MAX_EVENTS);
        prop_assert_eq!(got, oracle(&p, fuel, MAX_EVENTS), "{:?}", p);
    }

    #[test]
    fn more_fuel_keeps_every_trace(seed in any::<u64>(), fuel in 0u64..6) {
        let p = micro(seed, false);
        let lo = bounded_beh(&p.system(), fuel, &micro_env()).unwrap();
        let hi = bounded_beh(&p.system(), fuel + 1, &micro_env()).unwrap();
        for t in lo.iter() {
            prop_assert!(hi.contains(t), "{} lost at fuel {}", t, fuel + 1);
        }
    }

    #[test]
    fn erasure_is_idempotent_and_silent(seed in any::<u64>(), fuel in 0u64..=6) {
        let p = micro(seed, true);
        let once = erased(&p.module());
        let twice = erased(&once);
        let b1 = bounded_beh(&ModuleSet::new(vec![once]), fuel, &micro_env()).unwrap();
        let b2 = bounded_beh(&ModuleSet::new(vec![twice]), fuel, &micro_env()).unwrap();
        prop_assert_eq!(&b1, &b2);
        prop_assert_eq!(flatten(&b1, MAX_EVENTS), oracle(&p, fuel, MAX_EVENTS));
    }

    #[test]
    fn take_is_below_choose(seed in any::<u64>(), fuel in 1u64..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ps: Vec<Micro> = (0..rng.gen_range(1..=3)).map(|_| gen_micro(&mut rng, 3, 4, false)).collect();
        let env = micro_env();
        let take = bounded_beh(&Micro::Take(ps.clone()).system(), fuel, &env).unwrap();
        let choose = bounded_beh(&Micro::Choose(ps.clone()).system(), fuel, &env).unwrap();
        prop_assert!(ccr_core::behavior::check_inclusion(&take, &choose).unwrap().holds());
        if ps.len() == 1 {
            prop_assert_eq!(take, choose);
        }
    }

    #[test]
    fn ownership_is_upward_closed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = SigmaRegistry::standard();
        let (a, b) = (reg.sample(&mut rng), reg.sample(&mut rng));
        let own = RProp::Own(a.clone());
        if valid(&a) {
            prop_assert!(eval_rprop(&own, &a).unwrap());
        }
        let ab = add(&a, &b).unwrap();
        if valid(&ab) {
            prop_assert!(eval_rprop(&own, &ab).unwrap(), "own({}) at {}", a, ab);
        }
    }

    #[test]
    fn repeat_calls_decrease_depth(n in 0i64..40) {
        let mut r = ScriptedResolver::new(vec![]).with_obs("getint", vec![AnyValue::Int(n)]);
        let rep = check_depth_chain(&repeat_impl(), &repeat_conds(), &mut r, REPEAT_FUEL * 4).unwrap();
        prop_assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        prop_assert!(rep.pure_calls as i64 > n);
    }
}
