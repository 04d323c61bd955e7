//! Acceptance suite: one test per criterion, each printing a pass line
//! with its measured runtime. All comparisons are exact.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hallot::axioms::{
    check_axiom, check_gctb, check_gsp, check_iplb, check_lctb, check_monotonic, check_nonbossy,
    check_pairwise_efficiency, check_sp, Axiom, CheckOptions, GctbMode, GspMode, LctbMode,
};
use hallot::characterize::{
    is_serial_dictatorship, recover_hierarchy, recover_priority, Family,
};
use hallot::domain::{enumerate_allocations, enumerate_priorities, default_object_names, Domain};
use hallot::mechanisms::{
    counterexample, materialize, materialize_sequential, materialize_serial,
    CounterexampleParams, Hierarchy, MechanismTable, COUNTEREXAMPLE_NAMES,
};
use hallot::search::{cross_validate, enumerate_mechanisms, SearchMode, SearchSpec};
use hallot::varpop::{
    check_pairwise_consistency, check_pairwise_neutrality, check_sp_all_problems, corpus,
    verify_proposition, ExtendedSerialDictatorship, Potentials,
};
use hallot::{Allocation, Priority};

fn pass(criterion: &str, detail: &str, elapsed: Duration) {
    println!("criterion {criterion}: PASS — {detail} [{elapsed:.2?}]");
}

fn serial_tables() -> Vec<MechanismTable> {
    enumerate_priorities(3)
        .unwrap()
        .iter()
        .map(materialize_serial)
        .collect()
}

fn sequential_tables() -> Vec<MechanismTable> {
    Hierarchy::enumerate_all(3)
        .iter()
        .map(materialize_sequential)
        .collect()
}

fn counterexample_tables() -> Vec<(String, MechanismTable)> {
    COUNTEREXAMPLE_NAMES
        .iter()
        .map(|name| {
            let m = counterexample(name, &CounterexampleParams::default()).unwrap();
            (name.to_string(), materialize(&*m).unwrap())
        })
        .collect()
}

fn random_tables(count: usize, seed: u64) -> Vec<MechanismTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let allocations = enumerate_allocations(3).unwrap();
    let n_profiles = Domain::new(3).unwrap().n_profiles();
    (0..count)
        .map(|_| {
            let entries: Vec<Allocation> = (0..n_profiles)
                .map(|_| allocations[rng.gen_range(0..allocations.len())].clone())
                .collect();
            MechanismTable::new(3, entries).unwrap()
        })
        .collect()
}

// Corpus for the equivalence criteria: 6 + 24 + 7 + 3 = 40 tables.
fn fact_corpus() -> Vec<(String, MechanismTable)> {
    let mut out: Vec<(String, MechanismTable)> = Vec::new();
    for (i, t) in serial_tables().into_iter().enumerate() {
        out.push((format!("sd-{i}"), t));
    }
    for (i, t) in sequential_tables().into_iter().enumerate() {
        out.push((format!("seq-{i}"), t));
    }
    out.extend(counterexample_tables());
    for (i, t) in random_tables(3, 0xA110C).into_iter().enumerate() {
        out.push((format!("random-{i}"), t));
    }
    out
}

fn entry_set(tables: &[MechanismTable]) -> BTreeSet<Vec<Allocation>> {
    tables.iter().map(|t| t.entries().to_vec()).collect()
}

// The theorem-2 search (group strategy-proofness + locally constant
// tie-breaking at n = 3) is shared by criteria 3, 8, and 9.
fn theorem2_search() -> &'static (hallot::SearchResult, Duration) {
    static RESULT: OnceLock<(hallot::SearchResult, Duration)> = OnceLock::new();
    RESULT.get_or_init(|| {
        let start = Instant::now();
        let spec = SearchSpec::new(3, [Axiom::Gsp, Axiom::Lctb], SearchMode::Propagated);
        let result = enumerate_mechanisms(&spec).unwrap();
        (result, start.elapsed())
    })
}

#[test]
fn criterion_01_serial_characterization_necessity_n2() {
    let start = Instant::now();
    let spec = SearchSpec::new(2, [Axiom::Sp, Axiom::Gctb], SearchMode::Exhaustive);
    let result = enumerate_mechanisms(&spec).unwrap();
    assert_eq!(result.nodes, 16, "all 16 two-agent tables scanned");
    assert_eq!(result.tables.len(), 2);
    for t in &result.tables {
        assert_eq!(is_serial_dictatorship(t).family, Family::Serial);
    }
    assert!(cross_validate(&result, Family::Serial));
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    pass(
        "01 (necessity at n=2)",
        "16 tables scanned, exactly 2 pass sp+gctb, both serial",
        elapsed,
    );
}

#[test]
fn criterion_02_serial_characterization_n3() {
    let start = Instant::now();
    let spec = SearchSpec::new(3, [Axiom::Sp, Axiom::Gctb], SearchMode::Propagated);
    let result = enumerate_mechanisms(&spec).unwrap();
    assert_eq!(result.tables.len(), 6);
    assert!(result.complete);
    assert_eq!(entry_set(&result.tables), entry_set(&serial_tables()));
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    pass(
        "02 (serial characterization at n=3)",
        "propagated search finds exactly the 6 serial dictatorships",
        elapsed,
    );
}

#[test]
fn criterion_03_sequential_characterization_n3() {
    // Independent oracle for the family size: every complete hierarchy,
    // i.e. 3 roots x 2 second-dictator choices on each of 3 branches.
    let hierarchies = Hierarchy::enumerate_all(3);
    assert_eq!(hierarchies.len(), 3 * (1 << 3));
    let expected = sequential_tables();
    assert_eq!(expected.len(), 24);

    let (result, search_time) = theorem2_search();
    assert_eq!(result.tables.len(), 24);
    assert!(result.complete);
    assert_eq!(entry_set(&result.tables), entry_set(&expected));
    assert!(cross_validate(result, Family::Sequential));
    assert!(
        *search_time < Duration::from_secs(120),
        "took {search_time:?}"
    );
    pass(
        "03 (sequential characterization at n=3)",
        "propagated search finds exactly the 24 sequential dictatorships",
        *search_time,
    );
}

#[test]
fn criterion_04_serial_dictatorships_satisfy_every_axiom() {
    let start = Instant::now();
    let axioms = [
        Axiom::Sp,
        Axiom::Gsp,
        Axiom::NonBossy,
        Axiom::Monotonic,
        Axiom::Pareto,
        Axiom::PairwiseEfficiency,
        Axiom::WeakFairness,
        Axiom::Gctb,
        Axiom::Lctb,
        Axiom::Iplb,
        Axiom::Neutrality,
    ];
    for (i, t) in serial_tables().iter().enumerate() {
        for &axiom in &axioms {
            let report = check_axiom(t, axiom, &CheckOptions::default()).unwrap();
            assert!(report.holds, "sd-{i} fails {axiom}");
        }
    }
    pass(
        "04 (sufficiency)",
        "all 6 serial dictatorships pass all 11 axioms exhaustively",
        start.elapsed(),
    );
}

#[test]
fn criterion_05_independence_matrix() {
    let start = Instant::now();
    // Expected pass/fail pattern per counterexample mechanism.
    let matrix: &[(&str, &[(Axiom, bool)])] = &[
        (
            "ex1_sp_violation",
            &[
                (Axiom::Gctb, true),
                (Axiom::Lctb, true),
                (Axiom::NonBossy, true),
                (Axiom::Sp, false),
                (Axiom::Iplb, false),
            ],
        ),
        (
            "ex2_bossy",
            &[
                (Axiom::Sp, true),
                (Axiom::Lctb, true),
                (Axiom::NonBossy, false),
            ],
        ),
        (
            "ex3_constant",
            &[
                (Axiom::Gsp, true),
                (Axiom::Iplb, true),
                (Axiom::Lctb, false),
                (Axiom::Gctb, false),
            ],
        ),
        (
            "pareto_not_gctb",
            &[
                (Axiom::Pareto, true),
                (Axiom::Lctb, false),
                (Axiom::Gctb, false),
            ],
        ),
        (
            "gctb_not_pareto",
            &[
                (Axiom::Gctb, true),
                (Axiom::Lctb, true),
                (Axiom::Pareto, false),
                (Axiom::Neutrality, false),
            ],
        ),
        (
            "neutral_not_gctb",
            &[
                (Axiom::Neutrality, true),
                (Axiom::Gctb, false),
                (Axiom::Lctb, false),
            ],
        ),
        (
            "gctb_not_nonbossy",
            &[
                (Axiom::Gctb, true),
                (Axiom::Lctb, true),
                (Axiom::NonBossy, false),
            ],
        ),
    ];
    let mut cells = 0usize;
    for (name, expectations) in matrix {
        let m = counterexample(name, &CounterexampleParams::default()).unwrap();
        let t = materialize(&*m).unwrap();
        for &(axiom, expected) in *expectations {
            let report = check_axiom(&t, axiom, &CheckOptions::default()).unwrap();
            assert_eq!(
                report.holds, expected,
                "{name}: expected {axiom} = {expected}"
            );
            cells += 1;
        }
    }
    pass(
        "05 (independence matrix)",
        &format!("all {cells} mechanism/axiom cells match the stated pattern"),
        start.elapsed(),
    );
}

#[test]
fn criterion_06_gsp_equivalence_across_corpus() {
    let start = Instant::now();
    let corpus = fact_corpus();
    assert!(corpus.len() >= 40, "corpus has {} tables", corpus.len());
    for (name, t) in &corpus {
        let direct = check_gsp(t, GspMode::Direct).unwrap().holds;
        let sp_nb = check_sp(t).holds && check_nonbossy(t).holds;
        let mono = check_monotonic(t).holds;
        assert_eq!(direct, sp_nb, "{name}: gsp(direct) vs sp+nonbossy");
        assert_eq!(direct, mono, "{name}: gsp(direct) vs monotonic");
    }
    pass(
        "06 (incentive equivalences)",
        &format!(
            "gsp(direct) = sp+nonbossy = monotonic on all {} corpus tables",
            corpus.len()
        ),
        start.elapsed(),
    );
}

#[test]
fn criterion_07_formulation_equivalences_across_corpus() {
    let start = Instant::now();
    let corpus = fact_corpus();
    for (name, t) in &corpus {
        assert_eq!(
            check_gctb(t, GctbMode::PrioritySearch).holds,
            check_gctb(t, GctbMode::PairwiseDirections).holds,
            "{name}: gctb formulations disagree"
        );
        assert_eq!(
            check_lctb(t, LctbMode::ConstructRule).holds,
            check_lctb(t, LctbMode::ContextDirections).holds,
            "{name}: lctb formulations disagree"
        );
    }
    pass(
        "07 (tie-breaking formulation equivalences)",
        &format!("both gctb and lctb formulations agree on all {} tables", corpus.len()),
        start.elapsed(),
    );
}

#[test]
fn criterion_08_sequential_solutions_are_pairwise_efficient() {
    let start = Instant::now();
    let (result, _) = theorem2_search();
    assert_eq!(result.tables.len(), 24);
    for t in &result.tables {
        assert!(check_pairwise_efficiency(t).holds);
    }
    // Same implication over the whole corpus: any table passing gsp and
    // lctb also passes pairwise efficiency.
    for (name, t) in &fact_corpus() {
        let premise = check_gsp(t, GspMode::Direct).unwrap().holds
            && check_lctb(t, LctbMode::ContextDirections).holds;
        if premise {
            assert!(check_pairwise_efficiency(t).holds, "{name}");
        }
    }
    pass(
        "08 (pairwise efficiency of the sequential family)",
        "all 24 search solutions (and all gsp+lctb corpus tables) pass pairwise efficiency",
        start.elapsed(),
    );
}

#[test]
fn criterion_09_lower_bound_filters_to_serial() {
    let start = Instant::now();
    let (result, _) = theorem2_search();
    let filtered: Vec<MechanismTable> = result
        .tables
        .iter()
        .filter(|t| check_iplb(t).holds)
        .cloned()
        .collect();
    assert_eq!(filtered.len(), 6);
    assert_eq!(entry_set(&filtered), entry_set(&serial_tables()));
    pass(
        "09 (lower-bound characterization)",
        "filtering the 24 sequential solutions by iplb leaves the 6 serial dictatorships",
        start.elapsed(),
    );
}

#[test]
fn criterion_10_variable_populations() {
    let start = Instant::now();
    let potentials = Potentials::default();
    for priority in enumerate_priorities(3).unwrap() {
        let m = ExtendedSerialDictatorship::new(priority.clone());
        assert!(check_pairwise_consistency(&m, &potentials).holds);
        assert!(check_pairwise_neutrality(&m, &potentials).holds);
        assert!(check_sp_all_problems(&m, &potentials).holds);
        let verdict = verify_proposition(&m, &potentials);
        assert!(verdict.applicable && verdict.transitive && verdict.gctb_holds);
        assert_eq!(verdict.order, Some(priority));
    }
    // Every corpus mechanism passing both pairwise checks also respects a
    // global tie-breaking priority on every problem.
    for m in corpus(&potentials) {
        let pc = check_pairwise_consistency(&*m, &potentials).holds;
        let pn = check_pairwise_neutrality(&*m, &potentials).holds;
        let verdict = verify_proposition(&*m, &potentials);
        assert_eq!(verdict.applicable, pc && pn, "{}", m.label());
        assert!(verdict.overall(), "{}", m.label());
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    pass(
        "10 (variable populations)",
        "extended dictatorships pass all checks; pairwise properties force a global priority",
        elapsed,
    );
}

#[test]
fn criterion_11_round_trips() {
    let start = Instant::now();
    for priority in enumerate_priorities(3).unwrap() {
        assert_eq!(recover_priority(&materialize_serial(&priority)), priority);
    }
    for hierarchy in Hierarchy::enumerate_all(3) {
        assert_eq!(
            recover_hierarchy(&materialize_sequential(&hierarchy)),
            Ok(hierarchy)
        );
    }
    // Table JSON round-trips byte-for-byte.
    let names = default_object_names(3);
    let mut tables = vec![materialize_serial(&Priority::from_one_based(&[2, 1, 3]).unwrap())];
    tables.extend(random_tables(1, 99));
    for t in &tables {
        let json = t.to_json(&names);
        let (back, back_names) = MechanismTable::from_json(&json).unwrap();
        assert_eq!(&back, t);
        assert_eq!(back.to_json(&back_names), json);
    }
    pass(
        "11 (round-trips)",
        "priority and hierarchy recovery invert materialization; table JSON is bit-exact",
        start.elapsed(),
    );
}
