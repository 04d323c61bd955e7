//! Exhaustive axiom checkers over mechanism tables.
//!
//! Each checker decides one property in its exact quantifier structure by
//! scanning the full table, and returns an [`AxiomReport`]: whether the
//! axiom holds, a structured [`Witness`] when it does not, and the number
//! of elementary checks performed. Witnesses are replayable: they carry
//! enough context to re-validate against the raw definition.
//!
//! Checkers short-circuit at the first violation; with
//! [`CheckOptions::full`] they keep scanning and additionally report the
//! total violation count (and, for the priority-based fairness axioms, all
//! satisfying priorities). Witness selection is deterministic: the lowest
//! canonical profile index wins, then the lowest agent, then the lowest
//! deviation index.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    enumerate_allocations, enumerate_priorities, AgentId, Allocation, Domain, ObjectId, Priority,
};
use crate::mechanisms::MechanismTable;
use crate::varpop::{VarAllocation, VarProblem};

/// Every property the laboratory can decide. The first twelve apply to
/// mechanism tables; the last two to variable-population mechanisms.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Sp,
    Gsp,
    #[serde(rename = "nonbossy")]
    NonBossy,
    Monotonic,
    Pareto,
    PairwiseEfficiency,
    #[serde(rename = "envyfree")]
    EnvyFree,
    WeakFairness,
    Gctb,
    Lctb,
    Iplb,
    Neutrality,
    PairwiseConsistency,
    PairwiseNeutrality,
}

impl Axiom {
    /// The twelve axioms decidable on a materialized table.
    pub const TABLE_AXIOMS: [Axiom; 12] = [
        Axiom::Sp,
        Axiom::Gsp,
        Axiom::NonBossy,
        Axiom::Monotonic,
        Axiom::Pareto,
        Axiom::PairwiseEfficiency,
        Axiom::EnvyFree,
        Axiom::WeakFairness,
        Axiom::Gctb,
        Axiom::Lctb,
        Axiom::Iplb,
        Axiom::Neutrality,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Axiom::Sp => "sp",
            Axiom::Gsp => "gsp",
            Axiom::NonBossy => "nonbossy",
            Axiom::Monotonic => "monotonic",
            Axiom::Pareto => "pareto",
            Axiom::PairwiseEfficiency => "pairwise_efficiency",
            Axiom::EnvyFree => "envyfree",
            Axiom::WeakFairness => "weak_fairness",
            Axiom::Gctb => "gctb",
            Axiom::Lctb => "lctb",
            Axiom::Iplb => "iplb",
            Axiom::Neutrality => "neutrality",
            Axiom::PairwiseConsistency => "pairwise_consistency",
            Axiom::PairwiseNeutrality => "pairwise_neutrality",
        }
    }

    /// Parses an axiom id; accepts a few common short aliases.
    pub fn from_id(id: &str) -> Option<Axiom> {
        let canonical = match id {
            "nb" => "nonbossy",
            "pe" => "pairwise_efficiency",
            "ef" => "envyfree",
            "wf" => "weak_fairness",
            "mono" => "monotonic",
            other => other,
        };
        Axiom::TABLE_AXIOMS
            .iter()
            .copied()
            .chain([Axiom::PairwiseConsistency, Axiom::PairwiseNeutrality])
            .find(|a| a.id() == canonical)
    }

    pub fn is_table_axiom(self) -> bool {
        !matches!(self, Axiom::PairwiseConsistency | Axiom::PairwiseNeutrality)
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AxiomError {
    #[error(
        "direct group strategy-proofness enumeration is limited to n <= 3 (got n = {n}); \
         use the equivalence mode (strategy-proofness plus non-bossiness)"
    )]
    GspDirectTooLarge { n: usize },
    #[error("axiom `{0}` applies to variable-population mechanisms; use the varpop checks")]
    NotATableAxiom(Axiom),
}

/// How group strategy-proofness is decided.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GspMode {
    /// Enumerate every coalition and joint misreport (n <= 3 only).
    Direct,
    /// Decide as strategy-proofness plus non-bossiness.
    Equivalence,
}

/// The two equivalent formulations of globally constant tie-breaking.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GctbMode {
    /// Search all n! priorities for one justifying every identical-pair envy.
    PrioritySearch,
    /// Require a constant envy direction per agent pair across all profiles
    /// where the pair reports identical preferences. Primary checker.
    PairwiseDirections,
}

/// The two equivalent formulations of locally constant tie-breaking.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LctbMode {
    /// Construct the local tie-break rule context by context.
    ConstructRule,
    /// Require a constant envy direction per pair within each fixed
    /// sub-profile of the other agents. Primary checker.
    ContextDirections,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CheckOptions {
    /// Keep scanning past the first violation and count all of them.
    pub full: bool,
}

/// A local tie-break rule: for each unordered agent pair, the prioritized
/// member as a function of the other agents' preferences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalTieBreakRule {
    n: usize,
    rules: BTreeMap<(AgentId, AgentId), BTreeMap<Vec<usize>, AgentId>>,
}

impl LocalTieBreakRule {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The favored member of `{i, j}` when the other agents report the
    /// preference indices in `context` (ascending agent order).
    pub fn favored(&self, i: AgentId, j: AgentId, context: &[usize]) -> Option<AgentId> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.rules.get(&key)?.get(context).copied()
    }

    /// Total over all pairs and all `(n!)^(n-2)` contexts.
    pub fn is_total(&self, n_prefs: usize) -> bool {
        let contexts = (n_prefs as u64).pow(self.n.saturating_sub(2) as u32);
        let pairs = self.n * (self.n - 1) / 2;
        self.rules.len() == pairs && self.rules.values().all(|m| m.len() as u64 == contexts)
    }
}

#[derive(Serialize, Deserialize)]
struct TieRuleEntry {
    context: Vec<usize>,
    favored: AgentId,
}

#[derive(Serialize, Deserialize)]
struct TieRulePair {
    pair: (AgentId, AgentId),
    rules: Vec<TieRuleEntry>,
}

impl Serialize for LocalTieBreakRule {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<TieRulePair> = self
            .rules
            .iter()
            .map(|(&pair, rules)| TieRulePair {
                pair,
                rules: rules
                    .iter()
                    .map(|(context, &favored)| TieRuleEntry {
                        context: context.clone(),
                        favored,
                    })
                    .collect(),
            })
            .collect();
        pairs.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for LocalTieBreakRule {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let pairs = Vec::<TieRulePair>::deserialize(de)?;
        let mut rules = BTreeMap::new();
        let mut n = 0usize;
        for p in pairs {
            n = n.max(p.pair.0.index() + 1).max(p.pair.1.index() + 1);
            rules.insert(
                p.pair,
                p.rules.into_iter().map(|e| (e.context, e.favored)).collect(),
            );
        }
        Ok(LocalTieBreakRule { n, rules })
    }
}

/// A structure recovered by a checker when its axiom holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recovered {
    Priority(Priority),
    Priorities(Vec<Priority>),
    TieRule(LocalTieBreakRule),
}

/// One refuting instance for one candidate priority.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityRefutation {
    pub priority: Priority,
    pub profile: usize,
    pub higher: AgentId,
    pub lower: AgentId,
}

/// A structured, replayable counterexample to an axiom.
///
/// Profile and preference references are canonical 0-based indices; agent
/// and object ids serialize 1-indexed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Agent gains by misreporting: deviant allotment beats the truthful one.
    Manipulation {
        profile: usize,
        agent: AgentId,
        misreport_pref: usize,
        truthful: ObjectId,
        deviant: ObjectId,
    },
    /// A coalition's joint misreport leaves all members weakly better and
    /// one strictly better.
    GroupManipulation {
        profile: usize,
        coalition: Vec<AgentId>,
        misreport_prefs: Vec<usize>,
        strict_gainer: AgentId,
    },
    /// A misreport keeps the agent's own allotment but changes another's.
    Bossiness {
        profile: usize,
        agent: AgentId,
        misreport_pref: usize,
    },
    /// The transformed profile raises the chosen allocation in everyone's
    /// ranking yet selects a different allocation.
    NonMonotonic {
        profile: usize,
        transformed_profile: usize,
    },
    /// An alternative allocation weakly improves everyone and strictly
    /// improves one agent.
    ParetoDominated {
        profile: usize,
        dominating: Allocation,
        strict_gainer: AgentId,
    },
    /// Two agents each strictly prefer the other's allotment.
    SwapImprovement {
        profile: usize,
        first: AgentId,
        second: AgentId,
    },
    /// One agent strictly prefers another's allotment.
    Envy {
        profile: usize,
        envier: AgentId,
        envied: AgentId,
    },
    /// For every candidate priority, one instance where a higher-priority
    /// agent envies a lower-priority one (between identical reporters when
    /// `identical_required`).
    PriorityRefutations {
        identical_required: bool,
        refutations: Vec<PriorityRefutation>,
    },
    /// The envy direction between two identical reporters differs across
    /// two profiles.
    DirectionFlip {
        first: AgentId,
        second: AgentId,
        profile_a: usize,
        profile_b: usize,
    },
    /// As `DirectionFlip`, but the two profiles agree on everyone outside
    /// the pair.
    ContextDirectionFlip {
        first: AgentId,
        second: AgentId,
        profile_a: usize,
        profile_b: usize,
    },
    /// The agent's allotment falls below his allotment at the unanimous
    /// profile of his own preference.
    IdenticalLowerBoundViolation {
        profile: usize,
        agent: AgentId,
        unanimous_profile: usize,
    },
    /// Relabeling objects does not relabel allotments accordingly.
    /// `object_permutation[k]` is the image of object `k+1`.
    NonNeutral {
        object_permutation: Vec<ObjectId>,
        profile: usize,
        permuted_profile: usize,
    },
    /// Restricting a problem to a pair and their allotments re-selects a
    /// different sub-allocation (variable populations).
    ReductionMismatch {
        problem: VarProblem,
        pair: (AgentId, AgentId),
        expected: (ObjectId, ObjectId),
        got: (ObjectId, ObjectId),
    },
    /// Two order-isomorphic two-agent problems whose outcomes do not map
    /// through the isomorphism (variable populations).
    IsomorphismMismatch {
        problem_a: VarProblem,
        problem_b: VarProblem,
        map: Vec<(ObjectId, ObjectId)>,
        expected: VarAllocation,
        got: VarAllocation,
    },
    /// Strategy-proofness violation on one variable-population problem.
    VarManipulation {
        problem: VarProblem,
        agent: AgentId,
        misreport: Vec<ObjectId>,
        truthful: ObjectId,
        deviant: ObjectId,
    },
}

impl Witness {
    /// Re-validates a table witness against the raw definition.
    ///
    /// Returns `None` for variable-population witnesses, which replay
    /// against a mechanism rather than a table (see `varpop`).
    pub fn replay_table(&self, t: &MechanismTable) -> Option<bool> {
        let ctx = Ctx::new(t);
        let ok = match self {
            Witness::Manipulation {
                profile,
                agent,
                misreport_pref,
                truthful,
                deviant,
            } => {
                let i = agent.index();
                let truth_pref = ctx.dom.digit(*profile, i);
                let deviated = ctx.dom.replace_digit(*profile, i, *misreport_pref);
                let x = ctx.allot(*profile, i);
                let y = ctx.allot(deviated, i);
                x == truthful.index()
                    && y == deviant.index()
                    && ctx.rank(truth_pref, y) < ctx.rank(truth_pref, x)
            }
            Witness::GroupManipulation {
                profile,
                coalition,
                misreport_prefs,
                strict_gainer,
            } => {
                if coalition.len() != misreport_prefs.len() || coalition.is_empty() {
                    return Some(false);
                }
                let mut deviated = *profile;
                for (a, &q) in coalition.iter().zip(misreport_prefs) {
                    deviated = ctx.dom.replace_digit(deviated, a.index(), q);
                }
                let mut strict_seen = false;
                let mut all_weak = true;
                for a in coalition {
                    let i = a.index();
                    let truth = ctx.dom.digit(*profile, i);
                    let x = ctx.allot(*profile, i);
                    let y = ctx.allot(deviated, i);
                    if ctx.rank(truth, y) > ctx.rank(truth, x) {
                        all_weak = false;
                    }
                    if *a == *strict_gainer && ctx.rank(truth, y) < ctx.rank(truth, x) {
                        strict_seen = true;
                    }
                }
                all_weak && strict_seen
            }
            Witness::Bossiness {
                profile,
                agent,
                misreport_pref,
            } => {
                let i = agent.index();
                let deviated = ctx.dom.replace_digit(*profile, i, *misreport_pref);
                ctx.allot(*profile, i) == ctx.allot(deviated, i)
                    && t.entry(*profile) != t.entry(deviated)
            }
            Witness::NonMonotonic {
                profile,
                transformed_profile,
            } => {
                let x = t.entry(*profile);
                let transformed = (0..ctx.n).all(|i| {
                    let old = ctx.dom.preference(ctx.dom.digit(*profile, i));
                    let new = ctx.dom.preference(ctx.dom.digit(*transformed_profile, i));
                    new.is_monotonic_transformation_of(old, x.allotment(AgentId(i)))
                });
                transformed && t.entry(*transformed_profile) != x
            }
            Witness::ParetoDominated {
                profile,
                dominating,
                strict_gainer,
            } => {
                let x = t.entry(*profile);
                let mut strict = false;
                let mut weak = true;
                for i in 0..ctx.n {
                    let truth = ctx.dom.digit(*profile, i);
                    let xr = ctx.rank(truth, x.allotment(AgentId(i)).index());
                    let yr = ctx.rank(truth, dominating.allotment(AgentId(i)).index());
                    if yr > xr {
                        weak = false;
                    }
                    if i == strict_gainer.index() && yr < xr {
                        strict = true;
                    }
                }
                weak && strict
            }
            Witness::SwapImprovement {
                profile,
                first,
                second,
            } => {
                let ti = ctx.dom.digit(*profile, first.index());
                let tj = ctx.dom.digit(*profile, second.index());
                let xi = ctx.allot(*profile, first.index());
                let xj = ctx.allot(*profile, second.index());
                ctx.rank(ti, xj) < ctx.rank(ti, xi) && ctx.rank(tj, xi) < ctx.rank(tj, xj)
            }
            Witness::Envy {
                profile,
                envier,
                envied,
            } => {
                let ti = ctx.dom.digit(*profile, envier.index());
                let xi = ctx.allot(*profile, envier.index());
                let xj = ctx.allot(*profile, envied.index());
                ctx.rank(ti, xj) < ctx.rank(ti, xi)
            }
            Witness::PriorityRefutations {
                identical_required,
                refutations,
            } => {
                let all: Vec<Priority> = enumerate_priorities(ctx.n).expect("n >= 1");
                let covered: Vec<&Priority> = refutations.iter().map(|r| &r.priority).collect();
                all.iter().all(|p| covered.contains(&p))
                    && refutations.iter().all(|r| {
                        let hi = r.higher.index();
                        let lo = r.lower.index();
                        let ti = ctx.dom.digit(r.profile, hi);
                        let tj = ctx.dom.digit(r.profile, lo);
                        let ordered =
                            r.priority.position_of(r.higher) < r.priority.position_of(r.lower);
                        let gate = !identical_required || ti == tj;
                        let envies = ctx.rank(ti, ctx.allot(r.profile, lo))
                            < ctx.rank(ti, ctx.allot(r.profile, hi));
                        ordered && gate && envies
                    })
            }
            Witness::DirectionFlip {
                first,
                second,
                profile_a,
                profile_b,
            }
            | Witness::ContextDirectionFlip {
                first,
                second,
                profile_a,
                profile_b,
            } => {
                let i = first.index();
                let j = second.index();
                let same_context = if matches!(self, Witness::ContextDirectionFlip { .. }) {
                    (0..ctx.n)
                        .filter(|&a| a != i && a != j)
                        .all(|a| ctx.dom.digit(*profile_a, a) == ctx.dom.digit(*profile_b, a))
                } else {
                    true
                };
                let ta = ctx.dom.digit(*profile_a, i);
                let tb = ctx.dom.digit(*profile_b, i);
                same_context
                    && ta == ctx.dom.digit(*profile_a, j)
                    && tb == ctx.dom.digit(*profile_b, j)
                    && ctx.favored(*profile_a, i, j, ta) != ctx.favored(*profile_b, i, j, tb)
            }
            Witness::IdenticalLowerBoundViolation {
                profile,
                agent,
                unanimous_profile,
            } => {
                let i = agent.index();
                let truth = ctx.dom.digit(*profile, i);
                ctx.dom.unanimous_index(truth) == *unanimous_profile
                    && ctx.rank(truth, ctx.allot(*unanimous_profile, i))
                        < ctx.rank(truth, ctx.allot(*profile, i))
            }
            Witness::NonNeutral {
                object_permutation,
                profile,
                permuted_profile,
            } => {
                let image: Vec<usize> = object_permutation.iter().map(|o| o.index()).collect();
                let mapped = ctx.relabel_profile(*profile, &image);
                mapped == *permuted_profile
                    && (0..ctx.n)
                        .any(|i| ctx.allot(*permuted_profile, i) != image[ctx.allot(*profile, i)])
            }
            Witness::ReductionMismatch { .. }
            | Witness::IsomorphismMismatch { .. }
            | Witness::VarManipulation { .. } => return None,
        };
        Some(ok)
    }
}

/// Outcome of one axiom check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub work: u64,
    /// Total violation count; populated only under [`CheckOptions::full`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub violations: Option<u64>,
    /// Recovered priority or tie-break rule when the axiom holds.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recovered: Option<Recovered>,
}

impl AxiomReport {
    fn new(axiom: Axiom, holds: bool, witness: Option<Witness>, work: u64) -> Self {
        AxiomReport {
            axiom,
            holds,
            witness,
            work,
            violations: None,
            recovered: None,
        }
    }
}

// Shared scan context: the table, its domain, and a rank lookup per
// (preference index, object index).
struct Ctx<'a> {
    t: &'a MechanismTable,
    dom: Domain,
    n: usize,
    n_prefs: usize,
    rank: Vec<Vec<usize>>,
}

impl<'a> Ctx<'a> {
    fn new(t: &'a MechanismTable) -> Self {
        let dom = Domain::for_table(t.n());
        let n = dom.n();
        let rank: Vec<Vec<usize>> = dom
            .preferences()
            .iter()
            .map(|p| {
                let mut r = vec![0usize; n];
                for (k, o) in p.ranking().iter().enumerate() {
                    r[o.index()] = k;
                }
                r
            })
            .collect();
        let n_prefs = dom.n_preferences();
        Ctx {
            t,
            dom,
            n,
            n_prefs,
            rank,
        }
    }

    #[inline]
    fn allot(&self, profile: usize, agent: usize) -> usize {
        self.t.entry(profile).allotment(AgentId(agent)).index()
    }

    #[inline]
    fn rank(&self, pref: usize, object: usize) -> usize {
        self.rank[pref][object]
    }

    // Which member of {i, j} holds the better object under shared pref t.
    #[inline]
    fn favored(&self, profile: usize, i: usize, j: usize, shared_pref: usize) -> usize {
        if self.rank(shared_pref, self.allot(profile, i))
            < self.rank(shared_pref, self.allot(profile, j))
        {
            i
        } else {
            j
        }
    }

    // Profile index after relabeling every object o as image[o] in every
    // agent's ranking.
    fn relabel_profile(&self, profile: usize, image: &[usize]) -> usize {
        let digits: Vec<usize> = (0..self.n)
            .map(|a| {
                let pref = self.dom.preference(self.dom.digit(profile, a));
                let mapped: Vec<ObjectId> = pref
                    .ranking()
                    .iter()
                    .map(|o| ObjectId(image[o.index()]))
                    .collect();
                crate::domain::Preference::new(mapped)
                    .expect("relabeling preserves permutations")
                    .lex_index()
            })
            .collect();
        self.dom.index_from_digits(&digits)
    }
}

/// Strategy-proofness: no agent ever gains by misreporting.
pub fn check_sp(t: &MechanismTable) -> AxiomReport {
    check_sp_with(t, &CheckOptions::default())
}

pub fn check_sp_with(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    'scan: for p in 0..t.len() {
        for i in 0..ctx.n {
            let truth = ctx.dom.digit(p, i);
            let x = ctx.allot(p, i);
            let xr = ctx.rank(truth, x);
            for q in 0..ctx.n_prefs {
                if q == truth {
                    continue;
                }
                work += 1;
                let deviated = ctx.dom.replace_digit(p, i, q);
                let y = ctx.allot(deviated, i);
                if ctx.rank(truth, y) < xr {
                    violations += 1;
                    if witness.is_none() {
                        witness = Some(Witness::Manipulation {
                            profile: p,
                            agent: AgentId(i),
                            misreport_pref: q,
                            truthful: ObjectId(x),
                            deviant: ObjectId(y),
                        });
                    }
                    if !opts.full {
                        break 'scan;
                    }
                }
            }
        }
    }
    let mut report = AxiomReport::new(Axiom::Sp, witness.is_none(), witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    report
}

/// Non-bossiness: keeping one's own allotment fixed, a misreport cannot
/// move anyone else's.
pub fn check_nonbossy(t: &MechanismTable) -> AxiomReport {
    check_nonbossy_with(t, &CheckOptions::default())
}

pub fn check_nonbossy_with(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    'scan: for p in 0..t.len() {
        for i in 0..ctx.n {
            let truth = ctx.dom.digit(p, i);
            for q in 0..ctx.n_prefs {
                if q == truth {
                    continue;
                }
                work += 1;
                let deviated = ctx.dom.replace_digit(p, i, q);
                if ctx.allot(p, i) == ctx.allot(deviated, i) && t.entry(p) != t.entry(deviated) {
                    violations += 1;
                    if witness.is_none() {
                        witness = Some(Witness::Bossiness {
                            profile: p,
                            agent: AgentId(i),
                            misreport_pref: q,
                        });
                    }
                    if !opts.full {
                        break 'scan;
                    }
                }
            }
        }
    }
    let mut report = AxiomReport::new(Axiom::NonBossy, witness.is_none(), witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    report
}

/// Group strategy-proofness. `Direct` mode enumerates coalitions in
/// increasing size and joint misreports lexicographically; `Equivalence`
/// mode decides via strategy-proofness plus non-bossiness.
pub fn check_gsp(t: &MechanismTable, mode: GspMode) -> Result<AxiomReport, AxiomError> {
    check_gsp_with(t, mode, &CheckOptions::default())
}

pub fn check_gsp_with(
    t: &MechanismTable,
    mode: GspMode,
    opts: &CheckOptions,
) -> Result<AxiomReport, AxiomError> {
    match mode {
        GspMode::Equivalence => {
            let sp = check_sp_with(t, opts);
            let nb = check_nonbossy_with(t, opts);
            let holds = sp.holds && nb.holds;
            let mut report = AxiomReport::new(
                Axiom::Gsp,
                holds,
                if sp.holds { nb.witness } else { sp.witness },
                sp.work + nb.work,
            );
            if opts.full {
                report.violations = Some(sp.violations.unwrap_or(0) + nb.violations.unwrap_or(0));
            }
            Ok(report)
        }
        GspMode::Direct => {
            if t.n() > 3 {
                return Err(AxiomError::GspDirectTooLarge { n: t.n() });
            }
            Ok(check_gsp_direct(t, opts))
        }
    }
}

fn check_gsp_direct(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let n = ctx.n;
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    // Coalitions in increasing size, lexicographic within a size.
    let coalitions: Vec<Vec<usize>> = (1..=n).flat_map(|k| (0..n).combinations(k)).collect();
    'scan: for p in 0..t.len() {
        for coalition in &coalitions {
            let k = coalition.len();
            let combos = (ctx.n_prefs as u64).pow(k as u32);
            for combo in 0..combos {
                // Joint misreports in lexicographic order, first member most
                // significant.
                let mut digits = vec![0usize; k];
                let mut rest = combo;
                for slot in (0..k).rev() {
                    digits[slot] = (rest % ctx.n_prefs as u64) as usize;
                    rest /= ctx.n_prefs as u64;
                }
                work += 1;
                let mut deviated = p;
                for (slot, &agent) in coalition.iter().enumerate() {
                    deviated = ctx.dom.replace_digit(deviated, agent, digits[slot]);
                }
                if deviated == p {
                    continue;
                }
                let mut all_weak = true;
                let mut strict_gainer = None;
                for &agent in coalition {
                    let truth = ctx.dom.digit(p, agent);
                    let xr = ctx.rank(truth, ctx.allot(p, agent));
                    let yr = ctx.rank(truth, ctx.allot(deviated, agent));
                    if yr > xr {
                        all_weak = false;
                        break;
                    }
                    if yr < xr && strict_gainer.is_none() {
                        strict_gainer = Some(agent);
                    }
                }
                if all_weak {
                    if let Some(gainer) = strict_gainer {
                        violations += 1;
                        if witness.is_none() {
                            witness = Some(Witness::GroupManipulation {
                                profile: p,
                                coalition: coalition.iter().map(|&a| AgentId(a)).collect(),
                                misreport_prefs: digits.clone(),
                                strict_gainer: AgentId(gainer),
                            });
                        }
                        if !opts.full {
                            break 'scan;
                        }
                    }
                }
            }
        }
    }
    let mut report = AxiomReport::new(Axiom::Gsp, witness.is_none(), witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    report
}

/// Monotonicity: the chosen allocation persists under every coordinatewise
/// monotonic transformation of the profile at that allocation.
pub fn check_monotonic(t: &MechanismTable) -> AxiomReport {
    check_monotonic_with(t, &CheckOptions::default())
}

pub fn check_monotonic_with(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let n = ctx.n;
    // mono_ok[t][q][o]: q is a monotonic transformation of t at o.
    let mono_ok: Vec<Vec<Vec<bool>>> = (0..ctx.n_prefs)
        .map(|t_idx| {
            (0..ctx.n_prefs)
                .map(|q_idx| {
                    (0..n)
                        .map(|o| {
                            ctx.dom.preference(q_idx).is_monotonic_transformation_of(
                                ctx.dom.preference(t_idx),
                                ObjectId(o),
                            )
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    'scan: for p in 0..t.len() {
        let x = t.entry(p);
        // Per-agent candidate transformations at x.
        let candidates: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let truth = ctx.dom.digit(p, i);
                let o = x.allotment(AgentId(i)).index();
                (0..ctx.n_prefs).filter(|&q| mono_ok[truth][q][o]).collect()
            })
            .collect();
        let mut odometer = vec![0usize; n];
        'product: loop {
            let digits: Vec<usize> = (0..n).map(|i| candidates[i][odometer[i]]).collect();
            let transformed = ctx.dom.index_from_digits(&digits);
            work += 1;
            if t.entry(transformed) != x {
                violations += 1;
                if witness.is_none() {
                    witness = Some(Witness::NonMonotonic {
                        profile: p,
                        transformed_profile: transformed,
                    });
                }
                if !opts.full {
                    break 'scan;
                }
            }
            // Advance the odometer, last agent least significant.
            let mut slot = n;
            loop {
                if slot == 0 {
                    break 'product;
                }
                slot -= 1;
                odometer[slot] += 1;
                if odometer[slot] < candidates[slot].len() {
                    break;
                }
                odometer[slot] = 0;
            }
        }
    }
    let mut report = AxiomReport::new(Axiom::Monotonic, witness.is_none(), witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    report
}

/// Pareto efficiency: no alternative allocation weakly improves everyone
/// and strictly improves someone. Scans all n! allocations per profile.
pub fn check_pareto(t: &MechanismTable) -> AxiomReport {
    check_pareto_with(t, &CheckOptions::default())
}

pub fn check_pareto_with(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let allocations = enumerate_allocations(ctx.n).expect("n >= 1");
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    'scan: for p in 0..t.len() {
        let x = t.entry(p);
        for y in &allocations {
            if y == x {
                continue;
            }
            work += 1;
            let mut weak = true;
            let mut gainer = None;
            for i in 0..ctx.n {
                let truth = ctx.dom.digit(p, i);
                let xr = ctx.rank(truth, x.allotment(AgentId(i)).index());
                let yr = ctx.rank(truth, y.allotment(AgentId(i)).index());
                if yr > xr {
                    weak = false;
                    break;
                }
                if yr < xr && gainer.is_none() {
                    gainer = Some(i);
                }
            }
            if weak {
                if let Some(g) = gainer {
                    violations += 1;
                    if witness.is_none() {
                        witness = Some(Witness::ParetoDominated {
                            profile: p,
                            dominating: y.clone(),
                            strict_gainer: AgentId(g),
                        });
                    }
                    if !opts.full {
                        break 'scan;
                    }
                }
            }
        }
    }
    let mut report = AxiomReport::new(Axiom::Pareto, witness.is_none(), witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    report
}

/// Pairwise efficiency: no two agents both strictly prefer to swap.
pub fn check_pairwise_efficiency(t: &MechanismTable) -> AxiomReport {
    check_pairwise_efficiency_with(t, &CheckOptions::default())
}

pub fn check_pairwise_efficiency_with(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    'scan: for p in 0..t.len() {
        for i in 0..ctx.n {
            for j in i + 1..ctx.n {
                work += 1;
                let ti = ctx.dom.digit(p, i);
                let tj = ctx.dom.digit(p, j);
                let xi = ctx.allot(p, i);
                let xj = ctx.allot(p, j);
                if ctx.rank(ti, xj) < ctx.rank(ti, xi) && ctx.rank(tj, xi) < ctx.rank(tj, xj) {
                    violations += 1;
                    if witness.is_none() {
                        witness = Some(Witness::SwapImprovement {
                            profile: p,
                            first: AgentId(i),
                            second: AgentId(j),
                        });
                    }
                    if !opts.full {
                        break 'scan;
                    }
                }
            }
        }
    }
    let mut report = AxiomReport::new(Axiom::PairwiseEfficiency, witness.is_none(), witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    report
}

/// Envy-freeness: no agent strictly prefers another agent's allotment.
pub fn check_envyfree(t: &MechanismTable) -> AxiomReport {
    check_envyfree_with(t, &CheckOptions::default())
}

pub fn check_envyfree_with(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    'scan: for p in 0..t.len() {
        for i in 0..ctx.n {
            let ti = ctx.dom.digit(p, i);
            let xi = ctx.allot(p, i);
            for j in 0..ctx.n {
                if i == j {
                    continue;
                }
                work += 1;
                if ctx.rank(ti, ctx.allot(p, j)) < ctx.rank(ti, xi) {
                    violations += 1;
                    if witness.is_none() {
                        witness = Some(Witness::Envy {
                            profile: p,
                            envier: AgentId(i),
                            envied: AgentId(j),
                        });
                    }
                    if !opts.full {
                        break 'scan;
                    }
                }
            }
        }
    }
    let mut report = AxiomReport::new(Axiom::EnvyFree, witness.is_none(), witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    report
}

// Scans one candidate priority; returns the first refutation, gated to
// identical reporters when `identical_required`.
fn refute_priority(
    ctx: &Ctx,
    priority: &Priority,
    identical_required: bool,
    work: &mut u64,
) -> Option<PriorityRefutation> {
    for p in 0..ctx.t.len() {
        for hi_pos in 0..ctx.n {
            for lo_pos in hi_pos + 1..ctx.n {
                let hi = priority.agent_at(hi_pos);
                let lo = priority.agent_at(lo_pos);
                let ti = ctx.dom.digit(p, hi.index());
                if identical_required && ti != ctx.dom.digit(p, lo.index()) {
                    continue;
                }
                *work += 1;
                if ctx.rank(ti, ctx.allot(p, lo.index())) < ctx.rank(ti, ctx.allot(p, hi.index()))
                {
                    return Some(PriorityRefutation {
                        priority: priority.clone(),
                        profile: p,
                        higher: hi,
                        lower: lo,
                    });
                }
            }
        }
    }
    None
}

fn priority_existential_check(
    ctx: &Ctx,
    axiom: Axiom,
    identical_required: bool,
    opts: &CheckOptions,
) -> AxiomReport {
    let mut work = 0u64;
    let mut satisfying: Vec<Priority> = Vec::new();
    let mut refutations: Vec<PriorityRefutation> = Vec::new();
    let candidates = enumerate_priorities(ctx.n).expect("n >= 1");
    let total = candidates.len() as u64;
    for priority in candidates {
        match refute_priority(ctx, &priority, identical_required, &mut work) {
            None => {
                satisfying.push(priority);
                if !opts.full {
                    break;
                }
            }
            Some(r) => refutations.push(r),
        }
    }
    let holds = !satisfying.is_empty();
    let witness = if holds {
        None
    } else {
        Some(Witness::PriorityRefutations {
            identical_required,
            refutations,
        })
    };
    let mut report = AxiomReport::new(axiom, holds, witness, work);
    if holds {
        report.recovered = Some(if opts.full {
            Recovered::Priorities(satisfying)
        } else {
            Recovered::Priority(satisfying.remove(0))
        });
    } else if opts.full {
        report.violations = Some(total);
    }
    report
}

/// Weak fairness: some priority under which no agent ever envies a
/// lower-priority agent. Recovers the lexicographically-first such
/// priority; all of them under [`CheckOptions::full`].
pub fn check_weak_fairness(t: &MechanismTable) -> AxiomReport {
    check_weak_fairness_with(t, &CheckOptions::default())
}

pub fn check_weak_fairness_with(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    priority_existential_check(&ctx, Axiom::WeakFairness, false, opts)
}

/// Globally constant tie-breaking.
///
/// `PairwiseDirections` (the primary formulation) requires the envy
/// direction between identical reporters to be constant per pair across
/// the whole domain; `PrioritySearch` looks for a single priority
/// justifying all identical-pair envy and recovers it. The two must agree
/// on every table.
pub fn check_gctb(t: &MechanismTable, mode: GctbMode) -> AxiomReport {
    check_gctb_with(t, mode, &CheckOptions::default())
}

pub fn check_gctb_with(t: &MechanismTable, mode: GctbMode, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    match mode {
        GctbMode::PrioritySearch => priority_existential_check(&ctx, Axiom::Gctb, true, opts),
        GctbMode::PairwiseDirections => {
            let mut work = 0u64;
            let mut violations = 0u64;
            let mut witness = None;
            // first-seen direction per unordered pair: (favored, profile)
            let mut seen: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
            'scan: for p in 0..t.len() {
                for i in 0..ctx.n {
                    for j in i + 1..ctx.n {
                        let ti = ctx.dom.digit(p, i);
                        if ti != ctx.dom.digit(p, j) {
                            continue;
                        }
                        work += 1;
                        let fav = ctx.favored(p, i, j, ti);
                        match seen.get(&(i, j)) {
                            None => {
                                seen.insert((i, j), (fav, p));
                            }
                            Some(&(first_fav, first_p)) if first_fav != fav => {
                                violations += 1;
                                if witness.is_none() {
                                    witness = Some(Witness::DirectionFlip {
                                        first: AgentId(i),
                                        second: AgentId(j),
                                        profile_a: first_p,
                                        profile_b: p,
                                    });
                                }
                                if !opts.full {
                                    break 'scan;
                                }
                            }
                            Some(_) => {}
                        }
                    }
                }
            }
            let mut report = AxiomReport::new(Axiom::Gctb, witness.is_none(), witness, work);
            if opts.full {
                report.violations = Some(violations);
            }
            report
        }
    }
}

/// Locally constant tie-breaking.
///
/// `ContextDirections` (the primary formulation) requires the envy
/// direction between identical reporters to be constant per pair within
/// each fixed sub-profile of the other agents; `ConstructRule`
/// additionally assembles the local tie-break rule and recovers it.
pub fn check_lctb(t: &MechanismTable, mode: LctbMode) -> AxiomReport {
    check_lctb_with(t, mode, &CheckOptions::default())
}

pub fn check_lctb_with(t: &MechanismTable, mode: LctbMode, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    // first-seen direction per (pair, context profile with the pair's
    // digits zeroed): (favored, profile)
    let mut seen: BTreeMap<(usize, usize, usize), (usize, usize)> = BTreeMap::new();
    'scan: for p in 0..t.len() {
        for i in 0..ctx.n {
            for j in i + 1..ctx.n {
                let ti = ctx.dom.digit(p, i);
                if ti != ctx.dom.digit(p, j) {
                    continue;
                }
                work += 1;
                let context = ctx.dom.replace_digit(ctx.dom.replace_digit(p, i, 0), j, 0);
                let fav = ctx.favored(p, i, j, ti);
                match seen.get(&(i, j, context)) {
                    None => {
                        seen.insert((i, j, context), (fav, p));
                    }
                    Some(&(first_fav, first_p)) if first_fav != fav => {
                        violations += 1;
                        if witness.is_none() {
                            witness = Some(Witness::ContextDirectionFlip {
                                first: AgentId(i),
                                second: AgentId(j),
                                profile_a: first_p,
                                profile_b: p,
                            });
                        }
                        if !opts.full {
                            break 'scan;
                        }
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let holds = witness.is_none();
    let mut report = AxiomReport::new(Axiom::Lctb, holds, witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    if holds && matches!(mode, LctbMode::ConstructRule) {
        // Assemble the rule: context keys become the other agents'
        // preference indices in ascending agent order.
        let mut rules: BTreeMap<(AgentId, AgentId), BTreeMap<Vec<usize>, AgentId>> =
            BTreeMap::new();
        for (&(i, j, context), &(fav, _)) in &seen {
            let digits: Vec<usize> = (0..ctx.n)
                .filter(|&a| a != i && a != j)
                .map(|a| ctx.dom.digit(context, a))
                .collect();
            rules
                .entry((AgentId(i), AgentId(j)))
                .or_default()
                .insert(digits, AgentId(fav));
        }
        let rule = LocalTieBreakRule { n: ctx.n, rules };
        debug_assert!(rule.is_total(ctx.n_prefs));
        report.recovered = Some(Recovered::TieRule(rule));
    }
    report
}

/// Identical preferences lower bound: every agent weakly prefers his
/// allotment to his allotment at the unanimous profile of his own
/// preference.
pub fn check_iplb(t: &MechanismTable) -> AxiomReport {
    check_iplb_with(t, &CheckOptions::default())
}

pub fn check_iplb_with(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    'scan: for p in 0..t.len() {
        for i in 0..ctx.n {
            work += 1;
            let truth = ctx.dom.digit(p, i);
            let unanimous = ctx.dom.unanimous_index(truth);
            if ctx.rank(truth, ctx.allot(unanimous, i)) < ctx.rank(truth, ctx.allot(p, i)) {
                violations += 1;
                if witness.is_none() {
                    witness = Some(Witness::IdenticalLowerBoundViolation {
                        profile: p,
                        agent: AgentId(i),
                        unanimous_profile: unanimous,
                    });
                }
                if !opts.full {
                    break 'scan;
                }
            }
        }
    }
    let mut report = AxiomReport::new(Axiom::Iplb, witness.is_none(), witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    report
}

/// Neutrality: relabeling objects simultaneously in every preference
/// relabels every allotment the same way.
pub fn check_neutrality(t: &MechanismTable) -> AxiomReport {
    check_neutrality_with(t, &CheckOptions::default())
}

pub fn check_neutrality_with(t: &MechanismTable, opts: &CheckOptions) -> AxiomReport {
    let ctx = Ctx::new(t);
    let mut work = 0u64;
    let mut violations = 0u64;
    let mut witness = None;
    let images: Vec<Vec<usize>> = (0..ctx.n).permutations(ctx.n).collect();
    'scan: for image in &images {
        // Object relabeling as a map on preference indices.
        let pref_map: Vec<usize> = (0..ctx.n_prefs)
            .map(|q| {
                let mapped: Vec<ObjectId> = ctx
                    .dom
                    .preference(q)
                    .ranking()
                    .iter()
                    .map(|o| ObjectId(image[o.index()]))
                    .collect();
                crate::domain::Preference::new(mapped)
                    .expect("relabeling preserves permutations")
                    .lex_index()
            })
            .collect();
        for p in 0..t.len() {
            work += 1;
            let digits: Vec<usize> = (0..ctx.n).map(|a| pref_map[ctx.dom.digit(p, a)]).collect();
            let permuted = ctx.dom.index_from_digits(&digits);
            let mismatch = (0..ctx.n).any(|i| ctx.allot(permuted, i) != image[ctx.allot(p, i)]);
            if mismatch {
                violations += 1;
                if witness.is_none() {
                    witness = Some(Witness::NonNeutral {
                        object_permutation: image.iter().map(|&o| ObjectId(o)).collect(),
                        profile: p,
                        permuted_profile: permuted,
                    });
                }
                if !opts.full {
                    break 'scan;
                }
            }
        }
    }
    let mut report = AxiomReport::new(Axiom::Neutrality, witness.is_none(), witness, work);
    if opts.full {
        report.violations = Some(violations);
    }
    report
}

/// Dispatches a table axiom to its checker. Group strategy-proofness uses
/// the direct definition for n <= 3 and the equivalence above that.
pub fn check_axiom(
    t: &MechanismTable,
    axiom: Axiom,
    opts: &CheckOptions,
) -> Result<AxiomReport, AxiomError> {
    match axiom {
        Axiom::Sp => Ok(check_sp_with(t, opts)),
        Axiom::Gsp => {
            let mode = if t.n() <= 3 {
                GspMode::Direct
            } else {
                GspMode::Equivalence
            };
            check_gsp_with(t, mode, opts)
        }
        Axiom::NonBossy => Ok(check_nonbossy_with(t, opts)),
        Axiom::Monotonic => Ok(check_monotonic_with(t, opts)),
        Axiom::Pareto => Ok(check_pareto_with(t, opts)),
        Axiom::PairwiseEfficiency => Ok(check_pairwise_efficiency_with(t, opts)),
        Axiom::EnvyFree => Ok(check_envyfree_with(t, opts)),
        Axiom::WeakFairness => Ok(check_weak_fairness_with(t, opts)),
        Axiom::Gctb => Ok(check_gctb_with(t, GctbMode::PairwiseDirections, opts)),
        Axiom::Lctb => Ok(check_lctb_with(t, LctbMode::ContextDirections, opts)),
        Axiom::Iplb => Ok(check_iplb_with(t, opts)),
        Axiom::Neutrality => Ok(check_neutrality_with(t, opts)),
        Axiom::PairwiseConsistency | Axiom::PairwiseNeutrality => {
            Err(AxiomError::NotATableAxiom(axiom))
        }
    }
}
