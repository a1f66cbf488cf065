mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use axiomlab::io::NamedInstance;
use axiomlab::matchings::{find_improvement_cycle, is_non_wasteful, is_pairwise_efficient, is_pareto_efficient};
use axiomlab::model::{Instance, Limits, Matching};
use axiomlab::preferences::{is_monotonic_transformation, push_to_top, ProfileSpace};
use axiomlab::rules::{random_serial_dictatorship, serial_dictatorship, top_trading_cycles, AgentOrder, Weight};
use axiomlab::theorems::{random_dominated_triple, random_profile, replay_theorem1_proof};

use common::*;

/// A small general instance with enough capacity for every agent.
fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=4, 1usize..=4, proptest::collection::vec(1u32..=3, 4)).prop_filter_map(
        "capacity shortfall",
        |(n, k, caps)| Instance::general(n, caps[..k].to_vec()).ok(),
    )
}

fn null_bottom_instance() -> impl Strategy<Value = Instance> {
    (2usize..=4, 2usize..=4, proptest::collection::vec(1u32..=2, 4))
        .prop_map(|(n, real, caps)| {
            let mut all = vec![n as u32];
            all.extend(&caps[..real]);
            Instance::null_bottom(n, all).unwrap()
        })
}

fn factorial(n: i64) -> i64 {
    (1..=n).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rsd_weights_are_exact_and_efficient(inst in instance(), seed in any::<u64>()) {
        let r = random_profile(&inst, &mut ChaCha8Rng::seed_from_u64(seed));
        let lottery = random_serial_dictatorship(&inst, &r, &Limits::default()).unwrap();
        let all = assignments(&inst);
        let nfact = factorial(inst.n() as i64);
        let mut total = Weight::zero();
        for (m, w) in lottery.entries() {
            prop_assert!(nfact % i64::try_from(w.denom()).unwrap() == 0);
            prop_assert!(pareto_efficient(m, &r, &all));
            total = Weight(&total.0 + &w.0);
        }
        prop_assert_eq!(total, Weight::one());
    }

    #[test]
    fn serial_dictatorship_matches_definition(inst in instance(), seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let r = random_profile(&inst, &mut ChaCha8Rng::seed_from_u64(seed));
        let orders = permutations(inst.n());
        let o = pick.get(&orders);
        let sigma = AgentOrder::from_indices(inst.n(), o).unwrap();
        prop_assert_eq!(serial_dictatorship(&inst, &sigma, &r), common::serial_dictatorship(&inst, o, &r));
    }

    #[test]
    fn pareto_efficiency_implies_the_weaker_notions(inst in instance(), seed in any::<u64>()) {
        let r = random_profile(&inst, &mut ChaCha8Rng::seed_from_u64(seed));
        for mu in assignments(&inst) {
            let pe = is_pareto_efficient(&inst, &mu, &r, &Limits::default()).unwrap();
            prop_assert_eq!(pe, pareto_efficient(&mu, &r, &assignments(&inst)));
            prop_assert_eq!(is_pairwise_efficient(&mu, &r), pairwise_efficient(&mu, &r));
            prop_assert_eq!(is_non_wasteful(&inst, &mu, &r), non_wasteful(&inst, &mu, &r));
            if pe {
                prop_assert!(pairwise_efficient(&mu, &r) && non_wasteful(&inst, &mu, &r));
            }
        }
    }

    #[test]
    fn improvement_cycles_characterize_inefficiency(inst in instance(), seed in any::<u64>()) {
        let r = random_profile(&inst, &mut ChaCha8Rng::seed_from_u64(seed));
        let all = assignments(&inst);
        for mu in all.iter().filter(|m| non_wasteful(&inst, m, &r)) {
            let cycle = find_improvement_cycle(&inst, mu, &r).unwrap();
            prop_assert_eq!(cycle.is_some(), !pareto_efficient(mu, &r, &all));
            if let Some(c) = cycle {
                prop_assert!(dominates(&c.apply(mu), mu, &r));
            }
        }
    }

    #[test]
    fn ttc_is_individually_rational_and_efficient(n in 1usize..=4, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let inst = Instance::unit(n, n).unwrap();
        let r = random_profile(&inst, &mut ChaCha8Rng::seed_from_u64(seed));
        let perms = permutations(n);
        let endowment = Matching::from_indices(&inst, pick.get(&perms)).unwrap();
        let m = top_trading_cycles(&inst, &endowment, &r).unwrap();
        prop_assert!(pareto_efficient(&m, &r, &assignments(&inst)));
        for i in inst.agents() {
            prop_assert!(r.get(i).weakly_prefers(m.get(i), endowment.get(i)));
        }
    }

    #[test]
    fn profile_indices_round_trip(inst in instance(), seed in any::<u64>()) {
        let space = ProfileSpace::new(&inst, &Limits::default()).unwrap();
        let idx = seed % space.len();
        let r = space.profile_at(idx);
        prop_assert_eq!(space.index_of(&r), Some(idx));
        let coords = space.coords(idx);
        prop_assert_eq!(space.index_of_coords(&coords), idx);
    }

    #[test]
    fn push_to_top_is_a_monotonic_transformation(inst in instance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some((r, mu, nu)) = random_dominated_triple(&inst, &mut rng, 5).unwrap() {
            let pushed = push_to_top(&inst, &r, &nu).unwrap();
            prop_assert!(is_monotonic_transformation(&r, &pushed, &mu));
            prop_assert!(is_monotonic_transformation(&r, &r, &mu));
            let replay = replay_theorem1_proof(&inst, &r, &mu, &nu).unwrap();
            prop_assert!(replay.passed);
        }
    }

    #[test]
    fn json_round_trips(inst in null_bottom_instance(), seed in any::<u64>()) {
        let named = NamedInstance::with_default_names(inst.clone());
        let r = random_profile(&inst, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(named.profile_from_value(&named.profile_to_value(&r)).unwrap(), r.clone());
        let lottery = random_serial_dictatorship(&inst, &r, &Limits::default()).unwrap();
        prop_assert_eq!(named.lottery_from_value(&named.lottery_to_value(&lottery)).unwrap(), lottery);
        let again = NamedInstance::from_value(&named.to_value()).unwrap();
        prop_assert_eq!(again, named);
    }

    #[test]
    fn weights_print_in_lowest_terms(p in 0i64..50, q in 1i64..50) {
        let w = Weight::new(p, q);
        let text = w.to_string();
        prop_assert_eq!(Weight::parse(&text).unwrap(), w.clone());
        let (a, b) = text.split_once('/').unwrap();
        let (a, b): (i64, i64) = (a.parse().unwrap(), b.parse().unwrap());
        prop_assert_eq!(num_integer::gcd(a, b), 1);
        prop_assert_eq!(a * q, p * b);
    }
}
