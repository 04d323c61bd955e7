//! Variable-population problems: mechanisms defined on every sub-problem of
//! a potential agent/object pool, with pairwise consistency and pairwise
//! neutrality checks, pair classification, and the resulting construction
//! of a global priority.
//!
//! A problem picks a nonempty agent subset and an equally-sized object
//! subset of the potentials, plus one preference per agent over exactly the
//! problem's objects. With the default potentials (3 agents, 3 objects) the
//! problem space has 261 members and every check is an exhaustive scan.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axioms::{Axiom, AxiomReport, Witness};
use crate::domain::{enumerate_priorities, AgentId, ObjectId, ParseError, Priority};

/// The potential agent and object pools.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Potentials {
    pub n_agents: usize,
    pub n_objects: usize,
}

impl Potentials {
    pub fn square(k: usize) -> Self {
        Potentials {
            n_agents: k,
            n_objects: k,
        }
    }
}

impl Default for Potentials {
    fn default() -> Self {
        Potentials::square(3)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VarError {
    #[error("a problem needs equally many agents and objects, all distinct and sorted")]
    MalformedProblem,
    #[error("preference must rank exactly the problem's objects")]
    MalformedPreference,
}

/// One variable-population problem: agents, equally many objects, and a
/// preference per agent over exactly those objects.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarProblem {
    agents: Vec<AgentId>,
    objects: Vec<ObjectId>,
    prefs: Vec<Vec<ObjectId>>,
}

impl VarProblem {
    pub fn new(
        agents: Vec<AgentId>,
        objects: Vec<ObjectId>,
        prefs: Vec<Vec<ObjectId>>,
    ) -> Result<Self, VarError> {
        let k = agents.len();
        if k == 0
            || objects.len() != k
            || prefs.len() != k
            || !agents.windows(2).all(|w| w[0] < w[1])
            || !objects.windows(2).all(|w| w[0] < w[1])
        {
            return Err(VarError::MalformedProblem);
        }
        for ranking in &prefs {
            let mut sorted: Vec<ObjectId> = ranking.clone();
            sorted.sort();
            if sorted != objects {
                return Err(VarError::MalformedPreference);
            }
        }
        Ok(VarProblem {
            agents,
            objects,
            prefs,
        })
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn objects(&self) -> &[ObjectId] {
        &self.objects
    }

    pub fn agent_position(&self, agent: AgentId) -> Option<usize> {
        self.agents.iter().position(|&a| a == agent)
    }

    pub fn pref_at(&self, position: usize) -> &[ObjectId] {
        &self.prefs[position]
    }

    /// Rank of `o` in the preference of the agent at `position`.
    pub fn rank_at(&self, position: usize, o: ObjectId) -> usize {
        self.prefs[position]
            .iter()
            .position(|&x| x == o)
            .expect("object belongs to the problem")
    }

    pub fn with_replaced_pref(&self, position: usize, ranking: Vec<ObjectId>) -> VarProblem {
        let mut prefs = self.prefs.clone();
        prefs[position] = ranking;
        VarProblem {
            agents: self.agents.clone(),
            objects: self.objects.clone(),
            prefs,
        }
    }
}

impl fmt::Display for VarProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let agents: Vec<String> = self.agents.iter().map(|a| a.to_string()).collect();
        let objects: Vec<String> = self.objects.iter().map(|o| o.to_string()).collect();
        write!(f, "agents: {}  objects: {}", agents.join(","), objects.join(","))?;
        for (pos, ranking) in self.prefs.iter().enumerate() {
            let row: Vec<String> = ranking.iter().map(|o| o.to_string()).collect();
            write!(f, "\n{}: {}", self.agents[pos], row.join(" > "))?;
        }
        Ok(())
    }
}

/// An allocation for one problem, aligned with the problem's agent list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarAllocation {
    assignment: Vec<ObjectId>,
}

impl VarAllocation {
    pub fn new(assignment: Vec<ObjectId>) -> Self {
        VarAllocation { assignment }
    }

    pub fn allotment_at(&self, position: usize) -> ObjectId {
        self.assignment[position]
    }

    pub fn assignment(&self) -> &[ObjectId] {
        &self.assignment
    }
}

/// A rule defined on every problem over the potentials.
pub trait VarMechanism {
    fn label(&self) -> String;
    fn allocate(&self, problem: &VarProblem) -> VarAllocation;
}

/// The serial dictatorship extended to variable populations: restrict the
/// global priority to the problem's agents and pick greedily.
#[derive(Clone, Debug)]
pub struct ExtendedSerialDictatorship {
    priority: Priority,
}

impl ExtendedSerialDictatorship {
    pub fn new(priority: Priority) -> Self {
        ExtendedSerialDictatorship { priority }
    }

    pub fn priority(&self) -> &Priority {
        &self.priority
    }
}

impl VarMechanism for ExtendedSerialDictatorship {
    fn label(&self) -> String {
        format!("extended-sd{}", self.priority)
    }

    fn allocate(&self, problem: &VarProblem) -> VarAllocation {
        let mut order: Vec<usize> = (0..problem.n()).collect();
        order.sort_by_key(|&pos| self.priority.position_of(problem.agents()[pos]));
        let mut taken = vec![false; problem.n()];
        let mut assignment = vec![ObjectId(0); problem.n()];
        for pos in order {
            let pick = problem
                .pref_at(pos)
                .iter()
                .copied()
                .find(|o| {
                    let slot = problem.objects().iter().position(|x| x == o).unwrap();
                    !taken[slot]
                })
                .expect("an object remains for every dictator");
            let slot = problem.objects().iter().position(|&x| x == pick).unwrap();
            taken[slot] = true;
            assignment[pos] = pick;
        }
        VarAllocation::new(assignment)
    }
}

/// Applies one priority on full-size problems and a different one on
/// two-agent problems. Deliberately violates pairwise consistency.
#[derive(Clone, Debug)]
pub struct SizeSplitDictatorship {
    main: Priority,
    two_agent: Priority,
}

impl SizeSplitDictatorship {
    pub fn new(main: Priority, two_agent: Priority) -> Self {
        SizeSplitDictatorship { main, two_agent }
    }
}

impl VarMechanism for SizeSplitDictatorship {
    fn label(&self) -> String {
        format!("size-split[main={}, pairs={}]", self.main, self.two_agent)
    }

    fn allocate(&self, problem: &VarProblem) -> VarAllocation {
        let priority = if problem.n() == 2 {
            &self.two_agent
        } else {
            &self.main
        };
        ExtendedSerialDictatorship::new(priority.clone()).allocate(problem)
    }
}

/// On two-agent problems the tie-break depends on object identity: the
/// priority applies as given when the watched object belongs to the
/// problem and reversed when it does not. Other sizes use the priority as
/// given. Two order-isomorphic pair problems can then break ties opposite
/// ways, so pairwise neutrality fails.
#[derive(Clone, Debug)]
pub struct ObjectFavoringRule {
    watched: ObjectId,
    priority: Priority,
}

impl ObjectFavoringRule {
    pub fn new(watched: ObjectId, priority: Priority) -> Self {
        ObjectFavoringRule { watched, priority }
    }
}

impl VarMechanism for ObjectFavoringRule {
    fn label(&self) -> String {
        format!("object-favor[{}; {}]", self.watched, self.priority)
    }

    fn allocate(&self, problem: &VarProblem) -> VarAllocation {
        let priority = if problem.n() == 2 && !problem.objects().contains(&self.watched) {
            self.priority.reversed()
        } else {
            self.priority.clone()
        };
        ExtendedSerialDictatorship::new(priority).allocate(problem)
    }
}

/// Ignores preferences entirely: assigns sorted agents to reverse-sorted
/// objects on full-size problems and to sorted objects otherwise. The two
/// conventions clash under restriction, so pairwise consistency fails.
#[derive(Clone, Debug)]
pub struct MismatchedConstant {
    full_size: usize,
}

impl MismatchedConstant {
    pub fn new(full_size: usize) -> Self {
        MismatchedConstant { full_size }
    }
}

impl VarMechanism for MismatchedConstant {
    fn label(&self) -> String {
        format!("constant[mismatched@{}]", self.full_size)
    }

    fn allocate(&self, problem: &VarProblem) -> VarAllocation {
        let mut objects = problem.objects().to_vec();
        if problem.n() == self.full_size {
            objects.reverse();
        }
        VarAllocation::new(objects)
    }
}

/// The test corpus: all extended dictatorships plus the three
/// deliberately-flawed rules above.
pub fn corpus(potentials: &Potentials) -> Vec<Box<dyn VarMechanism>> {
    let mut out: Vec<Box<dyn VarMechanism>> = Vec::new();
    for priority in enumerate_priorities(potentials.n_agents).expect("nonempty potentials") {
        out.push(Box::new(ExtendedSerialDictatorship::new(priority)));
    }
    let identity = Priority::identity(potentials.n_agents);
    out.push(Box::new(SizeSplitDictatorship::new(
        identity.clone(),
        identity.reversed(),
    )));
    out.push(Box::new(ObjectFavoringRule::new(ObjectId(0), identity.clone())));
    out.push(Box::new(MismatchedConstant::new(potentials.n_agents)));
    out
}

/// All rankings of `objects` in lexicographic order.
pub fn enumerate_rankings(objects: &[ObjectId]) -> Vec<Vec<ObjectId>> {
    objects
        .iter()
        .copied()
        .permutations(objects.len())
        .collect()
}

/// Every problem over the potentials: all sizes `1..=min(|N|,|O|)`, all
/// agent and object subsets, all preference profiles.
pub fn enumerate_var_problems(potentials: &Potentials) -> Vec<VarProblem> {
    let mut out = Vec::new();
    let max_size = potentials.n_agents.min(potentials.n_objects);
    for k in 1..=max_size {
        for agents in (0..potentials.n_agents).map(AgentId).combinations(k) {
            for objects in (0..potentials.n_objects).map(ObjectId).combinations(k) {
                let rankings = enumerate_rankings(&objects);
                for combo in (0..k).map(|_| 0..rankings.len()).multi_cartesian_product() {
                    let prefs: Vec<Vec<ObjectId>> =
                        combo.iter().map(|&r| rankings[r].clone()).collect();
                    out.push(
                        VarProblem::new(agents.clone(), objects.clone(), prefs)
                            .expect("enumerated problems are well-formed"),
                    );
                }
            }
        }
    }
    out
}

// Restriction of a ranking to two objects, preserving relative order.
fn restrict_ranking(ranking: &[ObjectId], keep: (ObjectId, ObjectId)) -> Vec<ObjectId> {
    ranking
        .iter()
        .copied()
        .filter(|&o| o == keep.0 || o == keep.1)
        .collect()
}

/// Pairwise consistency: for every problem and pair of its agents,
/// restricting to the pair and their allotments re-selects their
/// allotments.
pub fn check_pairwise_consistency(m: &dyn VarMechanism, potentials: &Potentials) -> AxiomReport {
    let mut work = 0u64;
    for problem in enumerate_var_problems(potentials) {
        if problem.n() < 2 {
            continue;
        }
        let x = m.allocate(&problem);
        for i_pos in 0..problem.n() {
            for j_pos in i_pos + 1..problem.n() {
                work += 1;
                let (xi, xj) = (x.allotment_at(i_pos), x.allotment_at(j_pos));
                let (lo, hi) = if xi < xj { (xi, xj) } else { (xj, xi) };
                let reduced = VarProblem::new(
                    vec![problem.agents()[i_pos], problem.agents()[j_pos]],
                    vec![lo, hi],
                    vec![
                        restrict_ranking(problem.pref_at(i_pos), (xi, xj)),
                        restrict_ranking(problem.pref_at(j_pos), (xi, xj)),
                    ],
                )
                .expect("reduction of a valid problem is valid");
                let y = m.allocate(&reduced);
                if (y.allotment_at(0), y.allotment_at(1)) != (xi, xj) {
                    return AxiomReport {
                        axiom: Axiom::PairwiseConsistency,
                        holds: false,
                        witness: Some(Witness::ReductionMismatch {
                            problem: problem.clone(),
                            pair: (problem.agents()[i_pos], problem.agents()[j_pos]),
                            expected: (xi, xj),
                            got: (y.allotment_at(0), y.allotment_at(1)),
                        }),
                        work,
                        violations: None,
                        recovered: None,
                    };
                }
            }
        }
    }
    AxiomReport {
        axiom: Axiom::PairwiseConsistency,
        holds: true,
        witness: None,
        work,
        violations: None,
        recovered: None,
    }
}

// All order-isomorphisms from a's objects to b's objects for a fixed agent
// pair: bijections preserving both agents' rankings.
fn order_isomorphisms(a: &VarProblem, b: &VarProblem) -> Vec<Vec<(ObjectId, ObjectId)>> {
    let k = a.n();
    let mut out = Vec::new();
    for image in b.objects().iter().copied().permutations(k) {
        let sigma: Vec<(ObjectId, ObjectId)> = a
            .objects()
            .iter()
            .copied()
            .zip(image.iter().copied())
            .collect();
        let apply = |o: ObjectId| sigma.iter().find(|(from, _)| *from == o).unwrap().1;
        let preserves = (0..k).all(|pos| {
            let mapped: Vec<ObjectId> = a.pref_at(pos).iter().map(|&o| apply(o)).collect();
            mapped == b.pref_at(pos)
        });
        if preserves {
            out.push(sigma);
        }
    }
    out
}

/// Pairwise neutrality: outcomes of two-agent problems commute with every
/// order-isomorphism between their object sets.
pub fn check_pairwise_neutrality(m: &dyn VarMechanism, potentials: &Potentials) -> AxiomReport {
    let mut work = 0u64;
    let problems: Vec<VarProblem> = enumerate_var_problems(potentials)
        .into_iter()
        .filter(|p| p.n() == 2)
        .collect();
    for a in &problems {
        for b in &problems {
            if a.agents() != b.agents() {
                continue;
            }
            for sigma in order_isomorphisms(a, b) {
                work += 1;
                let apply = |o: ObjectId| sigma.iter().find(|(from, _)| *from == o).unwrap().1;
                let fa = m.allocate(a);
                let fb = m.allocate(b);
                let expected =
                    VarAllocation::new(fa.assignment().iter().map(|&o| apply(o)).collect());
                if fb != expected {
                    return AxiomReport {
                        axiom: Axiom::PairwiseNeutrality,
                        holds: false,
                        witness: Some(Witness::IsomorphismMismatch {
                            problem_a: a.clone(),
                            problem_b: b.clone(),
                            map: sigma,
                            expected,
                            got: fb,
                        }),
                        work,
                        violations: None,
                        recovered: None,
                    };
                }
            }
        }
    }
    AxiomReport {
        axiom: Axiom::PairwiseNeutrality,
        holds: true,
        witness: None,
        work,
        violations: None,
        recovered: None,
    }
}

/// Strategy-proofness on every problem of the variable-population domain.
pub fn check_sp_all_problems(m: &dyn VarMechanism, potentials: &Potentials) -> AxiomReport {
    let mut work = 0u64;
    for problem in enumerate_var_problems(potentials) {
        let x = m.allocate(&problem);
        for pos in 0..problem.n() {
            let truth = problem.pref_at(pos).to_vec();
            for alt in enumerate_rankings(problem.objects()) {
                if alt == truth {
                    continue;
                }
                work += 1;
                let deviated = problem.with_replaced_pref(pos, alt.clone());
                let y = m.allocate(&deviated);
                let truth_rank =
                    |o: ObjectId| truth.iter().position(|&t| t == o).expect("problem object");
                if truth_rank(y.allotment_at(pos)) < truth_rank(x.allotment_at(pos)) {
                    return AxiomReport {
                        axiom: Axiom::Sp,
                        holds: false,
                        witness: Some(Witness::VarManipulation {
                            problem: problem.clone(),
                            agent: problem.agents()[pos],
                            misreport: alt,
                            truthful: x.allotment_at(pos),
                            deviant: y.allotment_at(pos),
                        }),
                        work,
                        violations: None,
                        recovered: None,
                    };
                }
            }
        }
    }
    AxiomReport {
        axiom: Axiom::Sp,
        holds: true,
        witness: None,
        work,
        violations: None,
        recovered: None,
    }
}

/// Re-validates a variable-population witness against `m`.
///
/// Returns `None` for table witnesses.
pub fn replay_witness(m: &dyn VarMechanism, witness: &Witness) -> Option<bool> {
    match witness {
        Witness::ReductionMismatch {
            problem,
            pair,
            expected,
            got,
        } => {
            let x = m.allocate(problem);
            let i_pos = problem.agent_position(pair.0)?;
            let j_pos = problem.agent_position(pair.1)?;
            if (x.allotment_at(i_pos), x.allotment_at(j_pos)) != *expected {
                return Some(false);
            }
            let (lo, hi) = if expected.0 < expected.1 {
                (expected.0, expected.1)
            } else {
                (expected.1, expected.0)
            };
            let reduced = VarProblem::new(
                vec![pair.0, pair.1],
                vec![lo, hi],
                vec![
                    restrict_ranking(problem.pref_at(i_pos), *expected),
                    restrict_ranking(problem.pref_at(j_pos), *expected),
                ],
            )
            .ok()?;
            let y = m.allocate(&reduced);
            Some((y.allotment_at(0), y.allotment_at(1)) == (got.0, got.1) && *got != *expected)
        }
        Witness::IsomorphismMismatch {
            problem_a,
            problem_b,
            map,
            expected,
            got,
        } => {
            let preserves = order_isomorphisms(problem_a, problem_b)
                .iter()
                .any(|sigma| sigma == map);
            let apply = |o: ObjectId| map.iter().find(|(from, _)| *from == o).map(|(_, to)| *to);
            let fa = m.allocate(problem_a);
            let mapped: Option<Vec<ObjectId>> =
                fa.assignment().iter().map(|&o| apply(o)).collect();
            let fb = m.allocate(problem_b);
            Some(
                preserves
                    && mapped.map(VarAllocation::new) == Some(expected.clone())
                    && fb == *got
                    && *got != *expected,
            )
        }
        Witness::VarManipulation {
            problem,
            agent,
            misreport,
            truthful,
            deviant,
        } => {
            let pos = problem.agent_position(*agent)?;
            let x = m.allocate(problem);
            let y = m.allocate(&problem.with_replaced_pref(pos, misreport.clone()));
            let truth = problem.pref_at(pos);
            let rank = |o: ObjectId| truth.iter().position(|&t| t == o).unwrap_or(usize::MAX);
            Some(
                x.allotment_at(pos) == *truthful
                    && y.allotment_at(pos) == *deviant
                    && rank(*deviant) < rank(*truthful),
            )
        }
        _ => None,
    }
}

/// The exhaustive envy pattern of one ordered pair across all shared
/// problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    /// The first agent never envies the second.
    FirstNeverEnvies,
    /// The first agent envies the second in every shared problem.
    FirstAlwaysEnvies,
    /// The second agent never envies the first.
    SecondNeverEnvies,
    /// The second agent envies the first in every shared problem.
    SecondAlwaysEnvies,
}

/// Raised when the four-case analysis does not single out one case.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error(
    "pair ({first}, {second}) is incoherent: never/always flags \
     first=({first_never},{first_always}) second=({second_never},{second_always})"
)]
pub struct ClassifyDiagnostic {
    pub first: AgentId,
    pub second: AgentId,
    pub first_never: bool,
    pub first_always: bool,
    pub second_never: bool,
    pub second_always: bool,
}

/// Scans every problem containing both agents and classifies the pair into
/// the unique prevailing envy case.
pub fn classify_pair(
    m: &dyn VarMechanism,
    first: AgentId,
    second: AgentId,
    potentials: &Potentials,
) -> Result<PairClass, ClassifyDiagnostic> {
    let mut first_never = true;
    let mut first_always = true;
    let mut second_never = true;
    let mut second_always = true;
    for problem in enumerate_var_problems(potentials) {
        let (Some(i_pos), Some(j_pos)) =
            (problem.agent_position(first), problem.agent_position(second))
        else {
            continue;
        };
        let x = m.allocate(&problem);
        let first_envies =
            problem.rank_at(i_pos, x.allotment_at(j_pos)) < problem.rank_at(i_pos, x.allotment_at(i_pos));
        let second_envies =
            problem.rank_at(j_pos, x.allotment_at(i_pos)) < problem.rank_at(j_pos, x.allotment_at(j_pos));
        if first_envies {
            first_never = false;
        } else {
            first_always = false;
        }
        if second_envies {
            second_never = false;
        } else {
            second_always = false;
        }
    }
    let flags = [first_never, first_always, second_never, second_always];
    let classes = [
        PairClass::FirstNeverEnvies,
        PairClass::FirstAlwaysEnvies,
        PairClass::SecondNeverEnvies,
        PairClass::SecondAlwaysEnvies,
    ];
    if flags.iter().filter(|&&f| f).count() == 1 {
        Ok(classes[flags.iter().position(|&f| f).unwrap()])
    } else {
        Err(ClassifyDiagnostic {
            first,
            second,
            first_never,
            first_always,
            second_never,
            second_always,
        })
    }
}

/// Result of checking that both pairwise properties force a global
/// tie-breaking priority.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropositionVerdict {
    /// Both pairwise properties hold, so the construction applies.
    pub applicable: bool,
    /// The priority built from the pair classification, when coherent.
    pub order: Option<Priority>,
    /// Whether the constructed relation is transitive.
    pub transitive: bool,
    /// Whether the mechanism respects the constructed priority between
    /// identical reporters on every problem.
    pub gctb_holds: bool,
}

impl PropositionVerdict {
    /// The implication itself: vacuously true when not applicable.
    pub fn overall(&self) -> bool {
        !self.applicable || (self.order.is_some() && self.transitive && self.gctb_holds)
    }
}

/// Checks that a mechanism passing pairwise consistency and pairwise
/// neutrality also respects one global priority between identical
/// reporters, and that the priority built from the pair classification is a
/// transitive linear order.
pub fn verify_proposition(m: &dyn VarMechanism, potentials: &Potentials) -> PropositionVerdict {
    let applicable = check_pairwise_consistency(m, potentials).holds
        && check_pairwise_neutrality(m, potentials).holds;
    if !applicable {
        return PropositionVerdict {
            applicable,
            order: None,
            transitive: false,
            gctb_holds: false,
        };
    }
    let n = potentials.n_agents;
    // wins[i] counts agents that i precedes.
    let mut before = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            match classify_pair(m, AgentId(i), AgentId(j), potentials) {
                Ok(PairClass::FirstNeverEnvies) | Ok(PairClass::SecondAlwaysEnvies) => {
                    before[i][j] = true;
                }
                Ok(_) => before[j][i] = true,
                Err(_) => {
                    return PropositionVerdict {
                        applicable,
                        order: None,
                        transitive: false,
                        gctb_holds: false,
                    };
                }
            }
        }
    }
    // A tournament is a transitive linear order iff all out-degrees differ.
    let mut wins: Vec<(usize, usize)> = (0..n)
        .map(|i| (before[i].iter().filter(|&&b| b).count(), i))
        .collect();
    wins.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let transitive = wins
        .iter()
        .enumerate()
        .all(|(pos, &(w, _))| w == n - 1 - pos);
    let order = Priority::new(wins.iter().map(|&(_, i)| AgentId(i)).collect())
        .expect("win counts order all agents");

    let mut gctb_holds = true;
    'problems: for problem in enumerate_var_problems(potentials) {
        let x = m.allocate(&problem);
        for i_pos in 0..problem.n() {
            for j_pos in i_pos + 1..problem.n() {
                if problem.pref_at(i_pos) != problem.pref_at(j_pos) {
                    continue;
                }
                let (hi, lo) = if order.position_of(problem.agents()[i_pos])
                    < order.position_of(problem.agents()[j_pos])
                {
                    (i_pos, j_pos)
                } else {
                    (j_pos, i_pos)
                };
                if problem.rank_at(hi, x.allotment_at(hi)) > problem.rank_at(hi, x.allotment_at(lo))
                {
                    gctb_holds = false;
                    break 'problems;
                }
            }
        }
    }
    PropositionVerdict {
        applicable,
        order: Some(order),
        transitive,
        gctb_holds,
    }
}

/// Both sides of the variable-population characterization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryVerdict {
    pub sp: bool,
    pub pairwise_consistency: bool,
    pub pairwise_neutrality: bool,
    /// The extended dictatorship priority matching the mechanism on every
    /// problem, when one exists.
    pub matched_priority: Option<Priority>,
}

impl CorollaryVerdict {
    pub fn axioms_hold(&self) -> bool {
        self.sp && self.pairwise_consistency && self.pairwise_neutrality
    }

    pub fn is_extended_dictatorship(&self) -> bool {
        self.matched_priority.is_some()
    }

    /// The biconditional between the axiom conjunction and membership.
    pub fn overall(&self) -> bool {
        self.axioms_hold() == self.is_extended_dictatorship()
    }
}

/// Verifies the biconditional: strategy-proofness plus both pairwise
/// properties hold exactly for the extended serial dictatorships.
pub fn verify_varpop_corollary(m: &dyn VarMechanism, potentials: &Potentials) -> CorollaryVerdict {
    let sp = check_sp_all_problems(m, potentials).holds;
    let pairwise_consistency = check_pairwise_consistency(m, potentials).holds;
    let pairwise_neutrality = check_pairwise_neutrality(m, potentials).holds;
    let problems = enumerate_var_problems(potentials);
    let matched_priority = enumerate_priorities(potentials.n_agents)
        .expect("nonempty potentials")
        .into_iter()
        .find(|priority| {
            let sd = ExtendedSerialDictatorship::new(priority.clone());
            problems.iter().all(|p| sd.allocate(p) == m.allocate(p))
        });
    CorollaryVerdict {
        sp,
        pairwise_consistency,
        pairwise_neutrality,
        matched_priority,
    }
}

/// Parses the variable-population problem format: a header line naming the
/// agents and objects, then the profile lines.
///
/// ```text
/// agents: 1,3  objects: o1,o3
/// 1: o3 > o1
/// 3: o1 > o3
/// ```
pub fn parse_var_problem_text(input: &str) -> Result<VarProblem, ParseError> {
    let err = |line: usize, message: &str| ParseError {
        line,
        message: message.to_string(),
    };
    let mut lines = input.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| err(0, "empty input"))?;
    let header = header.trim();
    let rest = header
        .strip_prefix("agents:")
        .ok_or_else(|| err(header_line + 1, "header must start with `agents:`"))?;
    let (agents_part, objects_part) = rest
        .split_once("objects:")
        .ok_or_else(|| err(header_line + 1, "header must contain `objects:`"))?;
    let parse_agent = |token: &str| -> Result<AgentId, ParseError> {
        let v: usize = token
            .trim()
            .parse()
            .map_err(|_| err(header_line + 1, &format!("invalid agent `{}`", token.trim())))?;
        if v == 0 {
            return Err(err(header_line + 1, "agents are 1-indexed"));
        }
        Ok(AgentId(v - 1))
    };
    // Potential objects are named canonically (o1, o2, ...) or by a single
    // letter denoting their position (a = o1, b = o2, ...).
    let parse_object = |token: &str, line: usize| -> Result<ObjectId, ParseError> {
        let t = token.trim();
        if let Some(idx) = t.strip_prefix('o').and_then(|s| s.parse::<usize>().ok()) {
            if idx >= 1 {
                return Ok(ObjectId(idx - 1));
            }
        }
        let mut chars = t.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if c.is_ascii_lowercase() {
                return Ok(ObjectId(c as usize - 'a' as usize));
            }
        }
        Err(err(line, &format!("invalid object `{t}`; expected o1, o2, ... or a, b, ...")))
    };
    let agents: Vec<AgentId> = agents_part
        .trim()
        .split(',')
        .map(parse_agent)
        .collect::<Result<_, _>>()?;
    let objects: Vec<ObjectId> = objects_part
        .trim()
        .split(',')
        .map(|t| parse_object(t, header_line + 1))
        .collect::<Result<_, _>>()?;
    let mut prefs = Vec::new();
    for (slot, (lineno0, raw)) in lines.enumerate() {
        let lineno = lineno0 + 1;
        let line = raw.trim();
        let (agent_part, ranking_part) = line
            .split_once(':')
            .ok_or_else(|| err(lineno, "expected `agent: obj > obj`"))?;
        let agent = parse_agent(agent_part)?;
        if slot >= agents.len() || agents[slot] != agent {
            return Err(err(lineno, "profile lines must follow the header's agent order"));
        }
        let ranking: Vec<ObjectId> = ranking_part
            .split('>')
            .map(|t| parse_object(t, lineno))
            .collect::<Result<_, _>>()?;
        prefs.push(ranking);
    }
    VarProblem::new(agents, objects, prefs).map_err(|e| err(0, &e.to_string()))
}

pub fn format_var_problem_text(problem: &VarProblem) -> String {
    format!("{problem}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xsd(order: &[usize]) -> ExtendedSerialDictatorship {
        ExtendedSerialDictatorship::new(Priority::from_one_based(order).unwrap())
    }

    fn pot3() -> Potentials {
        Potentials::default()
    }

    #[test]
    fn problem_enumeration_counts() {
        let problems = enumerate_var_problems(&pot3());
        assert_eq!(problems.len(), 9 + 36 + 216);
        assert_eq!(problems.iter().filter(|p| p.n() == 1).count(), 9);
        assert_eq!(problems.iter().filter(|p| p.n() == 2).count(), 36);
        assert_eq!(problems.iter().filter(|p| p.n() == 3).count(), 216);
    }

    #[test]
    fn extended_dictatorship_restricts_cleanly() {
        let m = xsd(&[2, 1, 3]);
        let problem = VarProblem::new(
            vec![AgentId(0), AgentId(2)],
            vec![ObjectId(0), ObjectId(2)],
            vec![
                vec![ObjectId(2), ObjectId(0)],
                vec![ObjectId(2), ObjectId(0)],
            ],
        )
        .unwrap();
        // Priority (2,1,3) restricted to {1,3} puts agent 1 first.
        let x = m.allocate(&problem);
        assert_eq!(x.allotment_at(0), ObjectId(2));
        assert_eq!(x.allotment_at(1), ObjectId(0));
    }

    #[test]
    fn extended_dictatorships_pass_all_three_checks() {
        let m = xsd(&[1, 2, 3]);
        assert!(check_pairwise_consistency(&m, &pot3()).holds);
        assert!(check_pairwise_neutrality(&m, &pot3()).holds);
        assert!(check_sp_all_problems(&m, &pot3()).holds);
    }

    #[test]
    fn size_split_fails_consistency_with_replayable_witness() {
        let identity = Priority::identity(3);
        let m = SizeSplitDictatorship::new(identity.clone(), identity.reversed());
        let report = check_pairwise_consistency(&m, &pot3());
        assert!(!report.holds);
        let witness = report.witness.unwrap();
        assert_eq!(replay_witness(&m, &witness), Some(true));
    }

    #[test]
    fn object_favoring_fails_neutrality_with_replayable_witness() {
        let m = ObjectFavoringRule::new(ObjectId(0), Priority::identity(3));
        let report = check_pairwise_neutrality(&m, &pot3());
        assert!(!report.holds);
        let witness = report.witness.unwrap();
        assert_eq!(replay_witness(&m, &witness), Some(true));
    }

    #[test]
    fn mismatched_constant_fails_consistency() {
        let m = MismatchedConstant::new(3);
        assert!(!check_pairwise_consistency(&m, &pot3()).holds);
    }

    #[test]
    fn classification_follows_the_priority() {
        let m = xsd(&[1, 2, 3]);
        assert_eq!(
            classify_pair(&m, AgentId(0), AgentId(1), &pot3()),
            Ok(PairClass::FirstNeverEnvies)
        );
        assert_eq!(
            classify_pair(&m, AgentId(1), AgentId(2), &pot3()),
            Ok(PairClass::FirstNeverEnvies)
        );
        let rev = xsd(&[3, 2, 1]);
        assert_eq!(
            classify_pair(&rev, AgentId(0), AgentId(1), &pot3()),
            Ok(PairClass::SecondNeverEnvies)
        );
    }

    #[test]
    fn incoherent_mechanism_yields_a_diagnostic() {
        let identity = Priority::identity(3);
        let m = SizeSplitDictatorship::new(identity.clone(), identity.reversed());
        assert!(classify_pair(&m, AgentId(0), AgentId(1), &pot3()).is_err());
    }

    #[test]
    fn proposition_holds_for_extended_dictatorships() {
        for order in [[1, 2, 3], [3, 1, 2], [2, 3, 1]] {
            let m = xsd(&order);
            let verdict = verify_proposition(&m, &pot3());
            assert!(verdict.applicable);
            assert!(verdict.transitive);
            assert!(verdict.gctb_holds);
            assert_eq!(
                verdict.order,
                Some(Priority::from_one_based(&order).unwrap())
            );
            assert!(verdict.overall());
        }
    }

    #[test]
    fn proposition_is_vacuous_when_pairwise_checks_fail() {
        let m = ObjectFavoringRule::new(ObjectId(0), Priority::identity(3));
        let verdict = verify_proposition(&m, &pot3());
        assert!(!verdict.applicable);
        assert!(verdict.overall());
    }

    #[test]
    fn corollary_biconditional_across_the_corpus() {
        for m in corpus(&pot3()) {
            let verdict = verify_varpop_corollary(&*m, &pot3());
            assert!(verdict.overall(), "corollary fails for {}", m.label());
        }
        // Extended dictatorships land on the membership side.
        let verdict = verify_varpop_corollary(&xsd(&[2, 1, 3]), &pot3());
        assert!(verdict.axioms_hold());
        assert_eq!(
            verdict.matched_priority,
            Some(Priority::from_one_based(&[2, 1, 3]).unwrap())
        );
    }

    #[test]
    fn var_problem_text_round_trips() {
        let problem = VarProblem::new(
            vec![AgentId(0), AgentId(2)],
            vec![ObjectId(0), ObjectId(2)],
            vec![
                vec![ObjectId(2), ObjectId(0)],
                vec![ObjectId(0), ObjectId(2)],
            ],
        )
        .unwrap();
        let text = format_var_problem_text(&problem);
        assert!(text.starts_with("agents: 1,3  objects: o1,o3"));
        assert_eq!(parse_var_problem_text(&text).unwrap(), problem);

        let err = parse_var_problem_text("agents: 1,2 objects: o1,o2\n1: o1 > o2\n9: o2 > o1\n")
            .unwrap_err();
        assert_eq!(err.line, 3);
        assert!(parse_var_problem_text("nonsense").is_err());
    }

    #[test]
    fn var_problem_text_accepts_letter_names() {
        let problem = parse_var_problem_text("agents: 1,3  objects: a,c\n1: c > a\n3: a > c\n")
            .unwrap();
        assert_eq!(problem.agents(), &[AgentId(0), AgentId(2)]);
        assert_eq!(problem.objects(), &[ObjectId(0), ObjectId(2)]);
        assert_eq!(problem.pref_at(0), &[ObjectId(2), ObjectId(0)]);
    }
}
