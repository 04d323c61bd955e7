//! Mechanisms: serial and sequential dictatorships, constant rules, the
//! branching counterexample mechanisms, and extensional tables.
//!
//! A mechanism maps every profile of the enumerated domain to an allocation.
//! [`materialize`] turns any mechanism into a [`MechanismTable`], the
//! explicit profile-indexed form that all axiom checkers consume.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    factorial, AgentId, Allocation, Domain, DomainError, ObjectId, Priority, Profile,
    DEFAULT_PROFILE_CAP,
};

/// A deterministic allocation rule, total on the enumerated domain.
pub trait Mechanism {
    /// Number of agents (= number of objects).
    fn n(&self) -> usize;
    /// Human-readable identification for reports.
    fn label(&self) -> String;
    /// The allocation selected at `profile`.
    fn evaluate(&self, profile: &Profile) -> Allocation;
}

/// Runs the serial dictatorship for `priority` at `profile`: the agent with
/// highest priority takes his best object, each later agent takes his best
/// object among those remaining.
pub fn serial_dictatorship(priority: &Priority, profile: &Profile) -> Allocation {
    let n = profile.n();
    assert_eq!(priority.n(), n, "priority and profile must cover the same agents");
    let mut taken = vec![false; n];
    let mut assignment = vec![ObjectId(0); n];
    for &agent in priority.order() {
        let pick = profile
            .pref(agent)
            .top_untaken(&taken)
            .expect("an object remains for every dictator");
        taken[pick.index()] = true;
        assignment[agent.index()] = pick;
    }
    Allocation::new(assignment).expect("dictatorship outputs are bijections")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SerialDictatorship {
    priority: Priority,
}

impl SerialDictatorship {
    pub fn new(priority: Priority) -> Self {
        SerialDictatorship { priority }
    }

    pub fn priority(&self) -> &Priority {
        &self.priority
    }
}

impl Mechanism for SerialDictatorship {
    fn n(&self) -> usize {
        self.priority.n()
    }

    fn label(&self) -> String {
        format!("sd{}", self.priority)
    }

    fn evaluate(&self, profile: &Profile) -> Allocation {
        serial_dictatorship(&self.priority, profile)
    }
}

/// A step on a hierarchy path: this dictator took this object.
pub type HierarchyStep = (AgentId, ObjectId);
/// A sequence of completed picks identifying a hierarchy node.
pub type HierarchyPath = Vec<HierarchyStep>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("root agent {0:?} out of range for n = {1}")]
    InvalidRoot(AgentId, usize),
    #[error("hierarchy is incomplete: no next dictator after path {path:?}")]
    MissingEntry { path: HierarchyPath },
    #[error("next dictator after path {path:?} already picked on that path")]
    AgentReused { path: HierarchyPath },
    #[error("entry at path {path:?} is unreachable or non-canonical")]
    UnreachableEntry { path: HierarchyPath },
    #[error("malformed hierarchy path `{0}`")]
    BadPathKey(String),
}

/// The decision tree of a sequential dictatorship.
///
/// `root` is the first dictator. For every reachable path of picks after
/// which at least two agents remain unplaced, `children` names the next
/// dictator. The final pick is forced and carries no entry, so a valid
/// hierarchy stores entries exactly for reachable paths of length
/// `1..=n-2`. Completeness and consistency are validated eagerly at
/// construction; evaluation never fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hierarchy {
    n: usize,
    root: AgentId,
    children: BTreeMap<HierarchyPath, AgentId>,
}

impl Hierarchy {
    pub fn new(
        n: usize,
        root: AgentId,
        children: BTreeMap<HierarchyPath, AgentId>,
    ) -> Result<Self, HierarchyError> {
        if n == 0 || root.index() >= n {
            return Err(HierarchyError::InvalidRoot(root, n));
        }
        let h = Hierarchy { n, root, children };
        let mut visited: Vec<HierarchyPath> = Vec::new();
        let mut agents_used = vec![false; n];
        let mut objects_used = vec![false; n];
        let mut path = Vec::new();
        h.validate_walk(&mut path, root, &mut agents_used, &mut objects_used, &mut visited)?;
        if let Some(extra) = h.children.keys().find(|k| !visited.contains(k)) {
            return Err(HierarchyError::UnreachableEntry { path: extra.clone() });
        }
        Ok(h)
    }

    fn validate_walk(
        &self,
        path: &mut HierarchyPath,
        dict: AgentId,
        agents_used: &mut [bool],
        objects_used: &mut [bool],
        visited: &mut Vec<HierarchyPath>,
    ) -> Result<(), HierarchyError> {
        agents_used[dict.index()] = true;
        for o in 0..self.n {
            if objects_used[o] {
                continue;
            }
            path.push((dict, ObjectId(o)));
            objects_used[o] = true;
            let remaining = self.n - path.len();
            if remaining >= 2 {
                match self.children.get(path) {
                    None => return Err(HierarchyError::MissingEntry { path: path.clone() }),
                    Some(&next) => {
                        if next.index() >= self.n || agents_used[next.index()] {
                            return Err(HierarchyError::AgentReused { path: path.clone() });
                        }
                        visited.push(path.clone());
                        self.validate_walk(path, next, agents_used, objects_used, visited)?;
                    }
                }
            }
            objects_used[o] = false;
            path.pop();
        }
        agents_used[dict.index()] = false;
        Ok(())
    }

    /// The priority-shaped hierarchy: the next dictator ignores the objects
    /// taken so far, reproducing the serial dictatorship for `priority`.
    pub fn serial(priority: &Priority) -> Self {
        let n = priority.n();
        let mut children = BTreeMap::new();
        let mut used = vec![false; n];
        let mut path = Vec::new();
        fn build(
            priority: &Priority,
            path: &mut HierarchyPath,
            used: &mut [bool],
            children: &mut BTreeMap<HierarchyPath, AgentId>,
        ) {
            let n = priority.n();
            let depth = path.len();
            if depth >= 1 && n - depth >= 2 {
                children.insert(path.clone(), priority.agent_at(depth));
            }
            if n - depth <= 2 {
                return;
            }
            for o in 0..n {
                if used[o] {
                    continue;
                }
                path.push((priority.agent_at(depth), ObjectId(o)));
                used[o] = true;
                build(priority, path, used, children);
                used[o] = false;
                path.pop();
            }
        }
        build(priority, &mut path, &mut used, &mut children);
        Hierarchy::new(n, priority.agent_at(0), children).expect("serial hierarchy is complete")
    }

    /// Every complete hierarchy on `n` agents. Exponential in `n`; intended
    /// for the enumerable sizes (24 hierarchies at `n = 3`).
    pub fn enumerate_all(n: usize) -> Vec<Hierarchy> {
        let mut out = Vec::new();
        for root in 0..n {
            let mut agents_used = vec![false; n];
            agents_used[root] = true;
            let mut objects_used = vec![false; n];
            let mut path = Vec::new();
            let subtrees = Self::expand(
                n,
                &mut path,
                AgentId(root),
                &mut agents_used,
                &mut objects_used,
            );
            for children in subtrees {
                out.push(
                    Hierarchy::new(n, AgentId(root), children)
                        .expect("enumerated hierarchies are complete"),
                );
            }
        }
        out
    }

    // All completions of the children map below the node reached by `path`,
    // where `dictator` (already marked in `agents_used`) picks next.
    fn expand(
        n: usize,
        path: &mut HierarchyPath,
        dictator: AgentId,
        agents_used: &mut [bool],
        objects_used: &mut [bool],
    ) -> Vec<BTreeMap<HierarchyPath, AgentId>> {
        let mut acc: Vec<BTreeMap<HierarchyPath, AgentId>> = vec![BTreeMap::new()];
        for o in 0..n {
            if objects_used[o] {
                continue;
            }
            path.push((dictator, ObjectId(o)));
            objects_used[o] = true;
            let remaining: Vec<usize> = (0..n).filter(|&a| !agents_used[a]).collect();
            let mut branch_alts: Vec<BTreeMap<HierarchyPath, AgentId>> = Vec::new();
            if remaining.len() >= 2 {
                for &next in &remaining {
                    agents_used[next] = true;
                    let subs = Self::expand(n, path, AgentId(next), agents_used, objects_used);
                    for sub in subs {
                        let mut m = sub;
                        m.insert(path.clone(), AgentId(next));
                        branch_alts.push(m);
                    }
                    agents_used[next] = false;
                }
            } else {
                branch_alts.push(BTreeMap::new());
            }
            objects_used[o] = false;
            path.pop();
            let mut next_acc = Vec::with_capacity(acc.len() * branch_alts.len());
            for base in &acc {
                for alt in &branch_alts {
                    let mut m = base.clone();
                    m.extend(alt.iter().map(|(k, v)| (k.clone(), *v)));
                    next_acc.push(m);
                }
            }
            acc = next_acc;
        }
        acc
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> AgentId {
        self.root
    }

    pub fn children(&self) -> &BTreeMap<HierarchyPath, AgentId> {
        &self.children
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "root {}", self.root)?;
        for (path, next) in &self.children {
            write!(f, "; {} -> {}", path_key(path), next)?;
        }
        Ok(())
    }
}

fn path_key(path: &HierarchyPath) -> String {
    path.iter()
        .map(|(a, o)| format!("{a}:{o}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_path_key(key: &str) -> Result<HierarchyPath, HierarchyError> {
    let bad = || HierarchyError::BadPathKey(key.to_string());
    let mut path = Vec::new();
    for step in key.split(',') {
        let (agent, object) = step.split_once(':').ok_or_else(bad)?;
        let a: usize = agent.trim().parse().map_err(|_| bad())?;
        let oname = object.trim();
        let idx: usize = oname.strip_prefix('o').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if a == 0 || idx == 0 {
            return Err(bad());
        }
        path.push((AgentId(a - 1), ObjectId(idx - 1)));
    }
    Ok(path)
}

#[derive(Serialize, Deserialize)]
struct HierarchyFile {
    n: usize,
    root: AgentId,
    children: BTreeMap<String, AgentId>,
}

impl Serialize for Hierarchy {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        HierarchyFile {
            n: self.n,
            root: self.root,
            children: self
                .children
                .iter()
                .map(|(p, a)| (path_key(p), *a))
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Hierarchy {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = HierarchyFile::deserialize(de)?;
        let mut children = BTreeMap::new();
        for (key, agent) in file.children {
            children.insert(parse_path_key(&key).map_err(D::Error::custom)?, agent);
        }
        Hierarchy::new(file.n, file.root, children).map_err(D::Error::custom)
    }
}

/// Runs the sequential dictatorship for `h` at `profile`.
pub fn sequential_dictatorship(h: &Hierarchy, profile: &Profile) -> Allocation {
    let n = profile.n();
    assert_eq!(h.n(), n, "hierarchy and profile must cover the same agents");
    let mut taken = vec![false; n];
    let mut placed = vec![false; n];
    let mut assignment = vec![ObjectId(0); n];
    let mut path: HierarchyPath = Vec::new();
    let mut dict = h.root;
    loop {
        let pick = profile
            .pref(dict)
            .top_untaken(&taken)
            .expect("an object remains for every dictator");
        assignment[dict.index()] = pick;
        taken[pick.index()] = true;
        placed[dict.index()] = true;
        path.push((dict, pick));
        let remaining = n - path.len();
        if remaining == 0 {
            break;
        }
        dict = if remaining == 1 {
            AgentId(placed.iter().position(|&u| !u).expect("exactly one agent left"))
        } else {
            *h.children
                .get(&path)
                .expect("hierarchy validated complete at construction")
        };
    }
    Allocation::new(assignment).expect("dictatorship outputs are bijections")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequentialDictatorship {
    hierarchy: Hierarchy,
}

impl SequentialDictatorship {
    pub fn new(hierarchy: Hierarchy) -> Self {
        SequentialDictatorship { hierarchy }
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }
}

impl Mechanism for SequentialDictatorship {
    fn n(&self) -> usize {
        self.hierarchy.n()
    }

    fn label(&self) -> String {
        format!("seq[{}]", self.hierarchy)
    }

    fn evaluate(&self, profile: &Profile) -> Allocation {
        sequential_dictatorship(&self.hierarchy, profile)
    }
}

/// The mechanism that returns `x` at every profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantMechanism {
    allocation: Allocation,
}

impl ConstantMechanism {
    pub fn new(allocation: Allocation) -> Self {
        ConstantMechanism { allocation }
    }
}

pub fn constant_mechanism(x: Allocation) -> ConstantMechanism {
    ConstantMechanism::new(x)
}

impl Mechanism for ConstantMechanism {
    fn n(&self) -> usize {
        self.allocation.n()
    }

    fn label(&self) -> String {
        format!("constant{}", self.allocation)
    }

    fn evaluate(&self, _profile: &Profile) -> Allocation {
        self.allocation.clone()
    }
}

/// Assigns agent `i` the `i`-th best object of agent 1's reported
/// preference, ignoring everyone else's report.
#[derive(Clone, Debug)]
pub struct RankedByFirstAgent {
    n: usize,
}

impl Mechanism for RankedByFirstAgent {
    fn n(&self) -> usize {
        self.n
    }

    fn label(&self) -> String {
        "ranked-by-first-agent".into()
    }

    fn evaluate(&self, profile: &Profile) -> Allocation {
        let first = profile.pref(AgentId(0));
        let assignment = (0..self.n).map(|i| first.object_at(i)).collect();
        Allocation::new(assignment).expect("a ranking is a bijection")
    }
}

/// Profile predicates the branching counterexample mechanisms switch on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchCondition {
    /// Agents `i` and `j` report identical preferences.
    PairIdentical(AgentId, AgentId),
    /// All agents report identical preferences.
    AllIdentical,
    /// No two agents report identical preferences.
    AllDistinct,
    /// Agent 1's report ranks the distinguished object second.
    FirstRanksSecond(ObjectId),
}

impl BranchCondition {
    pub fn holds(&self, profile: &Profile) -> bool {
        match *self {
            BranchCondition::PairIdentical(i, j) => profile.pref(i) == profile.pref(j),
            BranchCondition::AllIdentical => {
                let first = profile.pref(AgentId(0));
                profile.prefs().iter().all(|p| p == first)
            }
            BranchCondition::AllDistinct => {
                let prefs = profile.prefs();
                (0..prefs.len())
                    .all(|i| (i + 1..prefs.len()).all(|j| prefs[i] != prefs[j]))
            }
            BranchCondition::FirstRanksSecond(x) => profile.pref(AgentId(0)).object_at(1) == x,
        }
    }
}

/// A two-branch mechanism: evaluates `when_true` on profiles satisfying the
/// condition, `when_false` elsewhere.
pub struct BranchMechanism {
    n: usize,
    condition: BranchCondition,
    when_true: Box<dyn Mechanism>,
    when_false: Box<dyn Mechanism>,
    label: String,
}

impl BranchMechanism {
    pub fn new(
        condition: BranchCondition,
        when_true: Box<dyn Mechanism>,
        when_false: Box<dyn Mechanism>,
        label: impl Into<String>,
    ) -> Self {
        assert_eq!(when_true.n(), when_false.n());
        BranchMechanism {
            n: when_true.n(),
            condition,
            when_true,
            when_false,
            label: label.into(),
        }
    }
}

impl Mechanism for BranchMechanism {
    fn n(&self) -> usize {
        self.n
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn evaluate(&self, profile: &Profile) -> Allocation {
        if self.condition.holds(profile) {
            self.when_true.evaluate(profile)
        } else {
            self.when_false.evaluate(profile)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MechanismError {
    #[error("unknown mechanism `{name}`; valid names: {}", COUNTEREXAMPLE_NAMES.join(", "))]
    UnknownName { name: String },
    #[error("mechanism `{name}` requires n {requirement}, got n = {n}")]
    UnsupportedSize {
        name: String,
        requirement: &'static str,
        n: usize,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// The named counterexample mechanisms.
pub const COUNTEREXAMPLE_NAMES: [&str; 7] = [
    "ex1_sp_violation",
    "ex2_bossy",
    "ex3_constant",
    "pareto_not_gctb",
    "gctb_not_pareto",
    "neutral_not_gctb",
    "gctb_not_nonbossy",
];

/// Optional parameters for [`counterexample`]; unset fields take the
/// documented defaults.
#[derive(Clone, Debug, Default)]
pub struct CounterexampleParams {
    pub n: Option<usize>,
    /// π for the primary branch.
    pub priority: Option<Priority>,
    /// π′ for the alternate branch.
    pub priority_alt: Option<Priority>,
    /// Fixed allocation for the constant-flavoured mechanisms.
    pub allocation: Option<Allocation>,
    /// Distinguished object of `ex2_bossy`; defaults to `o2`.
    pub object: Option<ObjectId>,
}

fn sd(priority: Priority) -> Box<dyn Mechanism> {
    Box::new(SerialDictatorship::new(priority))
}

/// Builds one of the named counterexample mechanisms.
///
/// Defaults: n = 3; π = (1,2,3); π′ = (1,3,2) except for
/// `pareto_not_gctb`, where π′ reverses π; x = the identity allocation;
/// the distinguished object of `ex2_bossy` is `o2`.
pub fn counterexample(
    name: &str,
    params: &CounterexampleParams,
) -> Result<Box<dyn Mechanism>, MechanismError> {
    let n = params
        .n
        .or_else(|| params.priority.as_ref().map(|p| p.n()))
        .unwrap_or(3);
    let require = |ok: bool, requirement: &'static str| {
        if ok {
            Ok(())
        } else {
            Err(MechanismError::UnsupportedSize {
                name: name.to_string(),
                requirement,
                n,
            })
        }
    };
    let pi = params.priority.clone().unwrap_or_else(|| Priority::identity(n));
    let pi_alt = params.priority_alt.clone().unwrap_or_else(|| {
        if name == "pareto_not_gctb" {
            pi.reversed()
        } else {
            // (1, 3, 2): swap the last two positions of π.
            let mut order = pi.order().to_vec();
            let len = order.len();
            order.swap(len - 1, len - 2);
            Priority::new(order).expect("permutation preserved")
        }
    });
    let x = params
        .allocation
        .clone()
        .unwrap_or_else(|| Allocation::new((0..n).map(ObjectId).collect()).expect("identity"));

    match name {
        "ex1_sp_violation" => {
            require(n == 3, "= 3")?;
            Ok(Box::new(BranchMechanism::new(
                BranchCondition::PairIdentical(AgentId(1), AgentId(2)),
                sd(pi.clone()),
                sd(pi_alt.clone()),
                format!("ex1_sp_violation[pi={pi}, pi'={pi_alt}]"),
            )))
        }
        "ex2_bossy" => {
            require(n == 3, "= 3")?;
            let object = params.object.unwrap_or(ObjectId(1));
            Ok(Box::new(BranchMechanism::new(
                BranchCondition::FirstRanksSecond(object),
                sd(pi.clone()),
                sd(pi_alt.clone()),
                format!("ex2_bossy[pi={pi}, pi'={pi_alt}, x={object}]"),
            )))
        }
        "ex3_constant" => Ok(Box::new(constant_mechanism(x))),
        "pareto_not_gctb" => {
            require(n >= 3, ">= 3")?;
            Ok(Box::new(BranchMechanism::new(
                BranchCondition::PairIdentical(AgentId(0), AgentId(1)),
                sd(pi.clone()),
                sd(pi_alt.clone()),
                format!("pareto_not_gctb[pi={pi}, pi'={pi_alt}]"),
            )))
        }
        "gctb_not_pareto" => {
            require(n >= 2, ">= 2")?;
            let label = format!("gctb_not_pareto[pi={pi}, x={x}]");
            Ok(Box::new(BranchMechanism::new(
                BranchCondition::AllDistinct,
                Box::new(constant_mechanism(x)),
                sd(pi),
                label,
            )))
        }
        "neutral_not_gctb" => {
            require(n == 3, "= 3")?;
            Ok(Box::new(BranchMechanism::new(
                BranchCondition::AllIdentical,
                sd(pi.clone()),
                sd(pi_alt.clone()),
                format!("neutral_not_gctb[pi={pi}, pi'={pi_alt}]"),
            )))
        }
        "gctb_not_nonbossy" => {
            require(n == 3, "= 3")?;
            Ok(Box::new(BranchMechanism::new(
                BranchCondition::PairIdentical(AgentId(1), AgentId(2)),
                sd(pi.clone()),
                Box::new(RankedByFirstAgent { n }),
                format!("gctb_not_nonbossy[pi={pi}]"),
            )))
        }
        _ => Err(MechanismError::UnknownName {
            name: name.to_string(),
        }),
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("invalid table JSON: {0}")]
    Json(String),
    #[error("table for n = {n} must have {expected} entries, found {found}")]
    WrongLength {
        n: usize,
        expected: u128,
        found: usize,
    },
    #[error("objects list must contain exactly {n} distinct single-token names")]
    BadObjectNames { n: usize },
    #[error("entry {index}: {problem}")]
    BadEntry { index: usize, problem: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// The extensional form of a mechanism: one allocation per canonical
/// profile index. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MechanismTable {
    n: usize,
    entries: Vec<Allocation>,
}

impl MechanismTable {
    pub fn new(n: usize, entries: Vec<Allocation>) -> Result<Self, TableError> {
        let expected = factorial(n).pow(n as u32);
        if entries.len() as u128 != expected {
            return Err(TableError::WrongLength {
                n,
                expected,
                found: entries.len(),
            });
        }
        if let Some(index) = entries.iter().position(|a| a.n() != n) {
            return Err(TableError::BadEntry {
                index,
                problem: format!("allocation covers {} agents, expected {}", entries[index].n(), n),
            });
        }
        Ok(MechanismTable { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Allocation] {
        &self.entries
    }

    pub fn entry(&self, profile_index: usize) -> &Allocation {
        &self.entries[profile_index]
    }

    pub fn allotment(&self, profile_index: usize, agent: AgentId) -> ObjectId {
        self.entries[profile_index].allotment(agent)
    }

    /// Serializes to the table JSON schema:
    /// `{"n": n, "objects": [names], "entries": [[object per agent], ...]}`.
    pub fn to_json(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.n, "one name per object");
        let file = TableFile {
            n: self.n,
            objects: names.to_vec(),
            entries: self
                .entries
                .iter()
                .map(|a| {
                    a.assignment()
                        .iter()
                        .map(|o| names[o.index()].clone())
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("table serialization is infallible")
    }

    /// Parses the table JSON schema, returning the table and its object
    /// names. `to_json` of the result reproduces the input byte-for-byte
    /// (modulo JSON whitespace).
    pub fn from_json(input: &str) -> Result<(Self, Vec<String>), TableError> {
        let file: TableFile =
            serde_json::from_str(input).map_err(|e| TableError::Json(e.to_string()))?;
        let n = file.n;
        if n == 0 {
            return Err(TableError::Domain(DomainError::EmptyDomain));
        }
        let mut sorted = file.objects.clone();
        sorted.sort();
        sorted.dedup();
        if file.objects.len() != n || sorted.len() != n {
            return Err(TableError::BadObjectNames { n });
        }
        let index_of = |name: &str| file.objects.iter().position(|x| x == name);
        let mut entries = Vec::with_capacity(file.entries.len());
        for (index, row) in file.entries.iter().enumerate() {
            if row.len() != n {
                return Err(TableError::BadEntry {
                    index,
                    problem: format!("expected {} allotments, found {}", n, row.len()),
                });
            }
            let mut assignment = Vec::with_capacity(n);
            for name in row {
                let o = index_of(name).ok_or_else(|| TableError::BadEntry {
                    index,
                    problem: format!("unknown object `{name}`"),
                })?;
                assignment.push(ObjectId(o));
            }
            let alloc = Allocation::new(assignment).map_err(|_| TableError::BadEntry {
                index,
                problem: "not a bijection".into(),
            })?;
            entries.push(alloc);
        }
        let table = MechanismTable::new(n, entries)?;
        Ok((table, file.objects))
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    n: usize,
    objects: Vec<String>,
    entries: Vec<Vec<String>>,
}

/// Materializes `m` over its full profile domain under the default cap.
pub fn materialize(m: &dyn Mechanism) -> Result<MechanismTable, DomainError> {
    materialize_with_cap(m, DEFAULT_PROFILE_CAP)
}

pub fn materialize_with_cap(m: &dyn Mechanism, cap: usize) -> Result<MechanismTable, DomainError> {
    let dom = Domain::with_cap(m.n(), cap)?;
    let entries: Vec<Allocation> = dom.profiles().map(|p| m.evaluate(&p)).collect();
    Ok(MechanismTable::new(m.n(), entries).expect("materialized tables are complete"))
}

/// Convenience: the materialized serial dictatorship for `priority`.
pub fn materialize_serial(priority: &Priority) -> MechanismTable {
    materialize(&SerialDictatorship::new(priority.clone())).expect("small domain")
}

/// Convenience: the materialized sequential dictatorship for `hierarchy`.
pub fn materialize_sequential(hierarchy: &Hierarchy) -> MechanismTable {
    materialize(&SequentialDictatorship::new(hierarchy.clone())).expect("small domain")
}
