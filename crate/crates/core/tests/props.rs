//! Property-based invariants over randomly drawn domain elements.

use std::collections::BTreeSet;

use proptest::prelude::*;

use hallot::domain::{
    default_object_names, enumerate_allocations, format_profile_text, parse_profile_text, Domain,
    ObjectId, Preference, Priority, Profile,
};
use hallot::mechanisms::{
    materialize, sequential_dictatorship, serial_dictatorship, ConstantMechanism, Hierarchy,
    MechanismTable,
};
use hallot::Allocation;

fn arb_preference(n: usize) -> impl Strategy<Value = Preference> {
    let count: usize = (1..=n as u128).product::<u128>() as usize;
    (0..count).prop_map(move |i| Preference::from_lex_index(n, i).unwrap())
}

fn arb_profile(n: usize) -> impl Strategy<Value = Profile> {
    prop::collection::vec(arb_preference(n), n).prop_map(|prefs| Profile::new(prefs).unwrap())
}

fn arb_priority(n: usize) -> impl Strategy<Value = Priority> {
    Just(()).prop_perturb(move |_, mut rng| {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        Priority::new(order.into_iter().map(hallot::AgentId).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn preference_lex_index_round_trips(n in 1usize..=5, seed in 0usize..10_000) {
        let count: usize = (1..=n as u128).product::<u128>() as usize;
        let index = seed % count;
        let pref = Preference::from_lex_index(n, index).unwrap();
        prop_assert_eq!(pref.lex_index(), index);
    }

    #[test]
    fn profile_canonical_index_round_trips(profile in arb_profile(3)) {
        let dom = Domain::new(3).unwrap();
        let index = profile.canonical_index();
        prop_assert_eq!(dom.profile(index), profile);
    }

    #[test]
    fn monotonic_transformation_is_reflexive(pref in arb_preference(4), o in 0usize..4) {
        prop_assert!(pref.is_monotonic_transformation_of(&pref, ObjectId(o)));
    }

    #[test]
    fn serial_dictatorship_replays_the_greedy_recursion(
        priority in arb_priority(3),
        profile in arb_profile(3),
    ) {
        let allocation = serial_dictatorship(&priority, &profile);
        let mut remaining: BTreeSet<ObjectId> = (0..3).map(ObjectId).collect();
        for &agent in priority.order() {
            let mine = allocation.allotment(agent);
            let best = profile.pref(agent).top(&remaining).unwrap();
            prop_assert_eq!(mine, best);
            remaining.remove(&mine);
        }
        prop_assert!(remaining.is_empty());
    }

    #[test]
    fn priority_shaped_hierarchy_matches_serial_dictatorship(
        priority in arb_priority(3),
        profile in arb_profile(3),
    ) {
        let hierarchy = Hierarchy::serial(&priority);
        prop_assert_eq!(
            sequential_dictatorship(&hierarchy, &profile),
            serial_dictatorship(&priority, &profile)
        );
    }

    #[test]
    fn table_json_round_trips_for_arbitrary_tables(choices in prop::collection::vec(0usize..2, 4)) {
        // Arbitrary two-agent table: one of the 2 allocations per profile.
        let allocations = enumerate_allocations(2).unwrap();
        let entries: Vec<Allocation> =
            choices.iter().map(|&c| allocations[c].clone()).collect();
        let table = MechanismTable::new(2, entries).unwrap();
        let names = default_object_names(2);
        let json = table.to_json(&names);
        let (back, back_names) = MechanismTable::from_json(&json).unwrap();
        prop_assert_eq!(&back, &table);
        prop_assert_eq!(back.to_json(&back_names), json);
    }

    #[test]
    fn profile_text_round_trips(profile in arb_profile(3)) {
        let names = default_object_names(3);
        let text = format_profile_text(&profile, &names);
        let parsed = parse_profile_text(&text).unwrap();
        prop_assert_eq!(parsed.profile, profile);
        prop_assert_eq!(parsed.object_names, names);
    }

    #[test]
    fn constant_tables_repeat_their_allocation(choice in 0usize..6) {
        let allocation = enumerate_allocations(3).unwrap()[choice].clone();
        let table = materialize(&ConstantMechanism::new(allocation.clone())).unwrap();
        prop_assert!(table.entries().iter().all(|a| a == &allocation));
    }
}
