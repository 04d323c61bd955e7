//! Agents, objects, preferences, profiles, and the canonical enumeration of
//! the preference domain.
//!
//! Everything downstream relies on the canonical orderings fixed here:
//!
//! - preferences over `n` objects are indexed `0..n!` by the lexicographic
//!   rank of their ranking sequence;
//! - profiles are indexed `0..(n!)^n` row-major over per-agent preference
//!   indices, with agent 1's index as the most significant digit;
//! - allocations are indexed `0..n!` lexicographically by their assignment
//!   sequence.
//!
//! Agents and objects are 0-indexed internally; human-facing output uses
//! 1-indexed names (`agent 1`, `o1`), and serialized ids are written
//! 1-indexed as well.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default ceiling on the number of profiles a materialized domain may hold.
///
/// `n = 4` fits (`24^4 = 331776`); `n = 5` (`120^5 ≈ 2.5·10^10`) is refused
/// unless the cap is raised explicitly.
pub const DEFAULT_PROFILE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("domain must contain at least one object")]
    EmptyDomain,
    #[error("profile domain has {required} entries, exceeding the cap of {cap} entries")]
    DomainTooLarge { required: u128, cap: usize },
    #[error("`available` must be a nonempty subset of the object set")]
    EmptyAvailable,
    #[error("sequence is not a permutation of {expected} distinct indices")]
    NotAPermutation { expected: usize },
    #[error("profile needs one preference per agent, all over the same {0}-object set")]
    MalformedProfile(usize),
    #[error("index {index} out of range for {what} (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
}

pub(crate) fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn serialize_one_based<S: Serializer>(index: usize, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u64(index as u64 + 1)
}

fn deserialize_one_based<'de, D: Deserializer<'de>>(de: D, what: &str) -> Result<usize, D::Error> {
    let raw = u64::deserialize(de)?;
    if raw == 0 {
        return Err(D::Error::custom(format!("{what} ids are 1-indexed")));
    }
    Ok(raw as usize - 1)
}

/// An indivisible object (house). Index is dense in `[0, n)` and stable
/// within a problem instance.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ObjectId(pub usize);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0
    }

    /// Display name: `o1`, `o2`, ...
    pub fn name(self) -> String {
        format!("o{}", self.0 + 1)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0 + 1)
    }
}

impl Serialize for ObjectId {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        serialize_one_based(self.0, ser)
    }
}

impl<'de> Deserialize<'de> for ObjectId {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        deserialize_one_based(de, "object").map(ObjectId)
    }
}

/// An agent. Index is dense in `[0, n)`; displayed 1-indexed.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

impl Serialize for AgentId {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        serialize_one_based(self.0, ser)
    }
}

impl<'de> Deserialize<'de> for AgentId {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        deserialize_one_based(de, "agent").map(AgentId)
    }
}

/// A strict total order over the full object set, best object first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Preference {
    ranking: Vec<ObjectId>,
}

impl Preference {
    /// Builds a preference from a ranking; the ranking must be a permutation
    /// of all `n` objects (completeness, antisymmetry, and transitivity then
    /// hold by construction).
    pub fn new(ranking: Vec<ObjectId>) -> Result<Self, DomainError> {
        let n = ranking.len();
        if n == 0 {
            return Err(DomainError::EmptyDomain);
        }
        let mut seen = vec![false; n];
        for o in &ranking {
            if o.index() >= n || seen[o.index()] {
                return Err(DomainError::NotAPermutation { expected: n });
            }
            seen[o.index()] = true;
        }
        Ok(Preference { ranking })
    }

    /// Convenience constructor from raw object indices.
    pub fn from_indices(ranking: &[usize]) -> Result<Self, DomainError> {
        Preference::new(ranking.iter().map(|&i| ObjectId(i)).collect())
    }

    pub fn n_objects(&self) -> usize {
        self.ranking.len()
    }

    pub fn ranking(&self) -> &[ObjectId] {
        &self.ranking
    }

    /// Rank position of `o`, 0 for the best object.
    pub fn rank_of(&self, o: ObjectId) -> usize {
        self.ranking
            .iter()
            .position(|&x| x == o)
            .expect("object outside the preference's object set")
    }

    pub fn object_at(&self, rank: usize) -> ObjectId {
        self.ranking[rank]
    }

    /// `a` strictly preferred to `b`.
    pub fn prefers(&self, a: ObjectId, b: ObjectId) -> bool {
        self.rank_of(a) < self.rank_of(b)
    }

    pub fn weakly_prefers(&self, a: ObjectId, b: ObjectId) -> bool {
        self.rank_of(a) <= self.rank_of(b)
    }

    /// The best object of `available` under this preference.
    pub fn top(&self, available: &BTreeSet<ObjectId>) -> Result<ObjectId, DomainError> {
        if available.is_empty() {
            return Err(DomainError::EmptyAvailable);
        }
        self.ranking
            .iter()
            .copied()
            .find(|o| available.contains(o))
            .ok_or(DomainError::EmptyAvailable)
    }

    /// Best object among those not yet taken, per a boolean taken-mask.
    pub(crate) fn top_untaken(&self, taken: &[bool]) -> Option<ObjectId> {
        self.ranking.iter().copied().find(|o| !taken[o.index()])
    }

    /// The lower contour set at `o`: every object weakly below `o`,
    /// including `o` itself.
    pub fn lower_contour(&self, o: ObjectId) -> BTreeSet<ObjectId> {
        let cut = self.rank_of(o);
        self.ranking[cut..].iter().copied().collect()
    }

    /// Whether `self` is a monotonic transformation of `old` at `o`, i.e.
    /// the lower contour set of `old` at `o` is contained in that of `self`.
    pub fn is_monotonic_transformation_of(&self, old: &Preference, o: ObjectId) -> bool {
        let old_cut = old.rank_of(o);
        let new_cut = self.rank_of(o);
        // |L(o, old)| must not shrink, and every member must stay below o.
        if self.n_objects() - new_cut < old.n_objects() - old_cut {
            return false;
        }
        old.ranking[old_cut..]
            .iter()
            .all(|&x| self.rank_of(x) >= new_cut)
    }

    /// Lexicographic rank of this ranking among all `n!` preferences.
    pub fn lex_index(&self) -> usize {
        let n = self.n_objects();
        let mut index = 0usize;
        for (k, &o) in self.ranking.iter().enumerate() {
            let smaller_later = self.ranking[k + 1..]
                .iter()
                .filter(|&&x| x.index() < o.index())
                .count();
            index += smaller_later * factorial(n - 1 - k) as usize;
        }
        index
    }

    /// Inverse of [`Preference::lex_index`].
    pub fn from_lex_index(n: usize, index: usize) -> Result<Self, DomainError> {
        if n == 0 {
            return Err(DomainError::EmptyDomain);
        }
        let total = factorial(n);
        if index as u128 >= total {
            return Err(DomainError::IndexOutOfRange {
                what: "preference",
                index,
                size: total as usize,
            });
        }
        let mut pool: Vec<usize> = (0..n).collect();
        let mut rest = index;
        let mut ranking = Vec::with_capacity(n);
        for k in 0..n {
            let block = factorial(n - 1 - k) as usize;
            let pick = rest / block;
            rest %= block;
            ranking.push(ObjectId(pool.remove(pick)));
        }
        Ok(Preference { ranking })
    }
}

impl fmt::Display for Preference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ranking.iter().map(|o| o.to_string()).collect();
        write!(f, "{}", parts.join(" > "))
    }
}

/// One preference per agent. The model fixes `|O| = |N|`, so a profile
/// over `n` agents ranks exactly `n` objects.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Profile {
    prefs: Vec<Preference>,
}

impl Profile {
    pub fn new(prefs: Vec<Preference>) -> Result<Self, DomainError> {
        let n = prefs.len();
        if n == 0 {
            return Err(DomainError::EmptyDomain);
        }
        if prefs.iter().any(|p| p.n_objects() != n) {
            return Err(DomainError::MalformedProfile(n));
        }
        Ok(Profile { prefs })
    }

    /// The unanimous profile where every agent reports `pref`.
    pub fn unanimous(pref: &Preference) -> Self {
        Profile {
            prefs: vec![pref.clone(); pref.n_objects()],
        }
    }

    pub fn n(&self) -> usize {
        self.prefs.len()
    }

    pub fn pref(&self, agent: AgentId) -> &Preference {
        &self.prefs[agent.index()]
    }

    pub fn prefs(&self) -> &[Preference] {
        &self.prefs
    }

    /// Copy of this profile with `agent`'s preference replaced.
    pub fn with_replaced(&self, agent: AgentId, pref: Preference) -> Profile {
        let mut prefs = self.prefs.clone();
        prefs[agent.index()] = pref;
        Profile { prefs }
    }

    /// Canonical index: row-major over per-agent preference indices.
    pub fn canonical_index(&self) -> usize {
        let base = factorial(self.n()) as usize;
        self.prefs
            .iter()
            .fold(0usize, |acc, p| acc * base + p.lex_index())
    }
}

/// A bijection from agents to objects, stored agent-major.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    assignment: Vec<ObjectId>,
}

impl Allocation {
    pub fn new(assignment: Vec<ObjectId>) -> Result<Self, DomainError> {
        let n = assignment.len();
        if n == 0 {
            return Err(DomainError::EmptyDomain);
        }
        let mut seen = vec![false; n];
        for o in &assignment {
            if o.index() >= n || seen[o.index()] {
                return Err(DomainError::NotAPermutation { expected: n });
            }
            seen[o.index()] = true;
        }
        Ok(Allocation { assignment })
    }

    pub fn from_indices(assignment: &[usize]) -> Result<Self, DomainError> {
        Allocation::new(assignment.iter().map(|&i| ObjectId(i)).collect())
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn allotment(&self, agent: AgentId) -> ObjectId {
        self.assignment[agent.index()]
    }

    pub fn assignment(&self) -> &[ObjectId] {
        &self.assignment
    }

    /// The agent holding `o`.
    pub fn holder(&self, o: ObjectId) -> AgentId {
        AgentId(
            self.assignment
                .iter()
                .position(|&x| x == o)
                .expect("object outside the allocation's object set"),
        )
    }

    pub fn lex_index(&self) -> usize {
        Preference {
            ranking: self.assignment.clone(),
        }
        .lex_index()
    }

    pub fn from_lex_index(n: usize, index: usize) -> Result<Self, DomainError> {
        let p = Preference::from_lex_index(n, index)?;
        Ok(Allocation {
            assignment: p.ranking,
        })
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.assignment.iter().map(|o| o.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A common priority over agents, highest priority first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Priority {
    order: Vec<AgentId>,
}

impl Priority {
    pub fn new(order: Vec<AgentId>) -> Result<Self, DomainError> {
        let n = order.len();
        if n == 0 {
            return Err(DomainError::EmptyDomain);
        }
        let mut seen = vec![false; n];
        for a in &order {
            if a.index() >= n || seen[a.index()] {
                return Err(DomainError::NotAPermutation { expected: n });
            }
            seen[a.index()] = true;
        }
        Ok(Priority { order })
    }

    /// Builds a priority from 1-indexed agent numbers, e.g. `[2, 1, 3]`.
    pub fn from_one_based(order: &[usize]) -> Result<Self, DomainError> {
        if order.contains(&0) {
            return Err(DomainError::NotAPermutation {
                expected: order.len(),
            });
        }
        Priority::new(order.iter().map(|&a| AgentId(a - 1)).collect())
    }

    pub fn identity(n: usize) -> Self {
        Priority {
            order: (0..n).map(AgentId).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        Priority {
            order: self.order.iter().rev().copied().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[AgentId] {
        &self.order
    }

    pub fn agent_at(&self, position: usize) -> AgentId {
        self.order[position]
    }

    /// Position of `agent` in the order, 0 = highest priority.
    pub fn position_of(&self, agent: AgentId) -> usize {
        self.order
            .iter()
            .position(|&a| a == agent)
            .expect("agent outside the priority's agent set")
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.order.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// The full preference domain for `n` agents and `n` objects.
///
/// Holds the `n!` canonical preferences and provides O(1) index arithmetic
/// over the `(n!)^n` profiles without materializing them.
#[derive(Clone, Debug)]
pub struct Domain {
    n: usize,
    prefs: Vec<Preference>,
    n_profiles: usize,
    strides: Vec<usize>,
}

impl Domain {
    pub fn new(n: usize) -> Result<Self, DomainError> {
        Domain::with_cap(n, DEFAULT_PROFILE_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self, DomainError> {
        if n == 0 {
            return Err(DomainError::EmptyDomain);
        }
        let n_prefs = factorial(n);
        let required = n_prefs.pow(n as u32);
        if required > cap as u128 {
            return Err(DomainError::DomainTooLarge { required, cap });
        }
        let prefs = enumerate_preferences(n)?;
        let base = n_prefs as usize;
        let mut strides = vec![0usize; n];
        let mut s = 1usize;
        for a in (0..n).rev() {
            strides[a] = s;
            s *= base;
        }
        Ok(Domain {
            n,
            prefs,
            n_profiles: required as usize,
            strides,
        })
    }

    /// Domain sized for an existing table; the table's own length is the cap.
    pub(crate) fn for_table(n: usize) -> Domain {
        Domain::with_cap(n, usize::MAX).expect("table size already fit in memory")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_preferences(&self) -> usize {
        self.prefs.len()
    }

    pub fn n_profiles(&self) -> usize {
        self.n_profiles
    }

    pub fn preference(&self, index: usize) -> &Preference {
        &self.prefs[index]
    }

    pub fn preferences(&self) -> &[Preference] {
        &self.prefs
    }

    /// Per-agent preference indices of the profile at `index`.
    pub fn profile_digits(&self, index: usize) -> Vec<usize> {
        (0..self.n).map(|a| self.digit(index, a)).collect()
    }

    /// Preference index of `agent` within the profile at `index`.
    pub fn digit(&self, index: usize, agent: usize) -> usize {
        (index / self.strides[agent]) % self.prefs.len()
    }

    pub fn index_from_digits(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.strides)
            .map(|(d, s)| d * s)
            .sum()
    }

    /// Profile index after replacing `agent`'s preference with `new_pref`.
    pub fn replace_digit(&self, index: usize, agent: usize, new_pref: usize) -> usize {
        index - self.digit(index, agent) * self.strides[agent] + new_pref * self.strides[agent]
    }

    /// Index of the unanimous profile where everyone reports `pref_index`.
    pub fn unanimous_index(&self, pref_index: usize) -> usize {
        self.strides.iter().map(|s| pref_index * s).sum()
    }

    pub fn profile(&self, index: usize) -> Profile {
        let prefs = (0..self.n)
            .map(|a| self.prefs[self.digit(index, a)].clone())
            .collect();
        Profile { prefs }
    }

    pub fn profile_index(&self, profile: &Profile) -> usize {
        profile.canonical_index()
    }

    /// All profiles in canonical order.
    pub fn profiles(&self) -> impl Iterator<Item = Profile> + '_ {
        (0..self.n_profiles).map(|i| self.profile(i))
    }
}

/// All `n!` preferences in lexicographic order of their ranking sequences.
///
/// The position of a preference in this sequence is its canonical index,
/// used by every file format and table.
pub fn enumerate_preferences(n: usize) -> Result<Vec<Preference>, DomainError> {
    if n == 0 {
        return Err(DomainError::EmptyDomain);
    }
    Ok((0..n)
        .permutations(n)
        .map(|ranking| Preference {
            ranking: ranking.into_iter().map(ObjectId).collect(),
        })
        .collect())
}

/// All `(n!)^n` profiles in canonical (row-major) order, subject to the
/// default cap.
pub fn enumerate_profiles(n: usize) -> Result<Vec<Profile>, DomainError> {
    enumerate_profiles_with_cap(n, DEFAULT_PROFILE_CAP)
}

pub fn enumerate_profiles_with_cap(n: usize, cap: usize) -> Result<Vec<Profile>, DomainError> {
    let dom = Domain::with_cap(n, cap)?;
    Ok(dom.profiles().collect())
}

/// All `n!` allocations in lexicographic order of their assignment sequences.
pub fn enumerate_allocations(n: usize) -> Result<Vec<Allocation>, DomainError> {
    if n == 0 {
        return Err(DomainError::EmptyDomain);
    }
    Ok((0..n)
        .permutations(n)
        .map(|assignment| Allocation {
            assignment: assignment.into_iter().map(ObjectId).collect(),
        })
        .collect())
}

/// All `n!` priorities in lexicographic order of their agent sequences.
pub fn enumerate_priorities(n: usize) -> Result<Vec<Priority>, DomainError> {
    if n == 0 {
        return Err(DomainError::EmptyDomain);
    }
    Ok((0..n)
        .permutations(n)
        .map(|order| Priority {
            order: order.into_iter().map(AgentId).collect(),
        })
        .collect())
}

/// Default display names for objects: `o1`, `o2`, ...
pub fn default_object_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ObjectId(i).name()).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// A profile together with the object names it was written with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedProfile {
    pub profile: Profile,
    pub object_names: Vec<String>,
}

/// Parses the one-agent-per-line profile format:
///
/// ```text
/// 1: b > a > c
/// 2: a > b > c
/// 3: c > b > a
/// ```
///
/// Whitespace is free-form, object names are single tokens, agents must be
/// listed as `1..n` in increasing order. Object names map to indices in
/// sorted name order, so `object_names` is always sorted.
pub fn parse_profile_text(input: &str) -> Result<NamedProfile, ParseError> {
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for (lineno0, raw) in input.lines().enumerate() {
        let lineno = lineno0 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (agent_part, ranking_part) = line
            .split_once(':')
            .ok_or_else(|| ParseError::new(lineno, "expected `agent: obj > obj > ...`"))?;
        let agent: usize = agent_part
            .trim()
            .parse()
            .map_err(|_| ParseError::new(lineno, format!("invalid agent `{}`", agent_part.trim())))?;
        if agent != rows.len() + 1 {
            return Err(ParseError::new(
                lineno,
                format!("agents must be listed in increasing order; expected {}", rows.len() + 1),
            ));
        }
        let tokens: Vec<String> = ranking_part
            .split('>')
            .map(|t| t.trim().to_string())
            .collect();
        if tokens.iter().any(|t| t.is_empty() || t.split_whitespace().count() != 1) {
            return Err(ParseError::new(lineno, "object names must be single tokens"));
        }
        let mut sorted = tokens.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != tokens.len() {
            return Err(ParseError::new(lineno, "duplicate object in ranking"));
        }
        rows.push((lineno, tokens));
    }
    if rows.is_empty() {
        return Err(ParseError::new(0, "no agent lines found"));
    }
    let mut names: Vec<String> = rows[0].1.clone();
    names.sort();
    let n = rows.len();
    if names.len() != n {
        return Err(ParseError::new(
            rows[0].0,
            format!("{} agents require exactly {} objects, found {}", n, n, names.len()),
        ));
    }
    let mut prefs = Vec::with_capacity(n);
    for (lineno, tokens) in &rows {
        let mut ranking = Vec::with_capacity(n);
        for token in tokens {
            let idx = names
                .binary_search(token)
                .map_err(|_| ParseError::new(*lineno, format!("unknown object `{token}`")))?;
            ranking.push(ObjectId(idx));
        }
        if ranking.len() != n {
            return Err(ParseError::new(
                *lineno,
                format!("ranking must list all {n} objects"),
            ));
        }
        prefs.push(Preference::new(ranking).map_err(|e| ParseError::new(*lineno, e.to_string()))?);
    }
    Ok(NamedProfile {
        profile: Profile::new(prefs).expect("validated above"),
        object_names: names,
    })
}

/// Renders a profile in the text format, using `names[i]` for object `i`.
pub fn format_profile_text(profile: &Profile, names: &[String]) -> String {
    let mut out = String::new();
    for (i, pref) in profile.prefs().iter().enumerate() {
        let row: Vec<&str> = pref
            .ranking()
            .iter()
            .map(|o| names[o.index()].as_str())
            .collect();
        out.push_str(&format!("{}: {}\n", i + 1, row.join(" > ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pref(ranking: &[usize]) -> Preference {
        Preference::from_indices(ranking).unwrap()
    }

    #[test]
    fn preferences_enumerate_in_lexicographic_order() {
        let one = enumerate_preferences(1).unwrap();
        assert_eq!(one, vec![pref(&[0])]);

        let two = enumerate_preferences(2).unwrap();
        assert_eq!(two, vec![pref(&[0, 1]), pref(&[1, 0])]);

        let three = enumerate_preferences(3).unwrap();
        assert_eq!(three.len(), 6);
        assert_eq!(three[0], pref(&[0, 1, 2]));
        assert_eq!(three[5], pref(&[2, 1, 0]));
    }

    #[test]
    fn zero_objects_is_an_error() {
        assert_eq!(enumerate_preferences(0), Err(DomainError::EmptyDomain));
        assert!(matches!(enumerate_profiles(0), Err(DomainError::EmptyDomain)));
    }

    #[test]
    fn lex_index_round_trips() {
        for n in 1..=4 {
            for (i, p) in enumerate_preferences(n).unwrap().iter().enumerate() {
                assert_eq!(p.lex_index(), i);
                assert_eq!(&Preference::from_lex_index(n, i).unwrap(), p);
            }
        }
    }

    #[test]
    fn profile_counts_match_domain_size() {
        assert_eq!(enumerate_profiles(1).unwrap().len(), 1);
        assert_eq!(enumerate_profiles(2).unwrap().len(), 4);
        assert_eq!(enumerate_profiles(3).unwrap().len(), 216);
        assert_eq!(enumerate_profiles(4).unwrap().len(), 331_776);
    }

    #[test]
    fn profile_cap_is_enforced_and_named() {
        let err = enumerate_profiles(5).unwrap_err();
        match err {
            DomainError::DomainTooLarge { required, cap } => {
                assert_eq!(required, 120u128.pow(5));
                assert_eq!(cap, DEFAULT_PROFILE_CAP);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(enumerate_profiles_with_cap(3, 100).is_err());
        assert!(enumerate_profiles_with_cap(3, 216).is_ok());
    }

    #[test]
    fn profile_indices_are_row_major() {
        let dom = Domain::new(2).unwrap();
        // (pref of agent 1, pref of agent 2) in row-major order.
        let expected = [[0, 0], [0, 1], [1, 0], [1, 1]];
        for (i, digits) in expected.iter().enumerate() {
            assert_eq!(dom.profile_digits(i), digits.to_vec());
            assert_eq!(dom.index_from_digits(digits), i);
            assert_eq!(dom.profile(i).canonical_index(), i);
        }
        assert_eq!(dom.replace_digit(0, 1, 1), 1);
        assert_eq!(dom.replace_digit(3, 0, 0), 1);
        assert_eq!(dom.unanimous_index(1), 3);
    }

    #[test]
    fn top_restricts_to_available() {
        // pref = (b, a, c) with a=o1, b=o2, c=o3.
        let p = pref(&[1, 0, 2]);
        let all: BTreeSet<ObjectId> = [0, 1, 2].iter().map(|&i| ObjectId(i)).collect();
        let ac: BTreeSet<ObjectId> = [0, 2].iter().map(|&i| ObjectId(i)).collect();
        let c: BTreeSet<ObjectId> = [ObjectId(2)].into_iter().collect();
        assert_eq!(p.top(&all).unwrap(), ObjectId(1));
        assert_eq!(p.top(&ac).unwrap(), ObjectId(0));
        assert_eq!(p.top(&c).unwrap(), ObjectId(2));
        assert_eq!(p.top(&BTreeSet::new()), Err(DomainError::EmptyAvailable));
    }

    #[test]
    fn lower_contour_matches_definition() {
        let p = pref(&[0, 1, 2]); // (a, b, c)
        let set = |ids: &[usize]| -> BTreeSet<ObjectId> { ids.iter().map(|&i| ObjectId(i)).collect() };
        assert_eq!(p.lower_contour(ObjectId(0)), set(&[0, 1, 2]));
        assert_eq!(p.lower_contour(ObjectId(2)), set(&[2]));
        assert_eq!(p.lower_contour(ObjectId(1)), set(&[1, 2]));
        // |L(p, ranking[k])| = n - k.
        for n in 1..=4 {
            for p in enumerate_preferences(n).unwrap() {
                for k in 0..n {
                    let o = p.object_at(k);
                    let lc = p.lower_contour(o);
                    assert!(lc.contains(&o));
                    assert_eq!(lc.len(), n - k);
                }
            }
        }
    }

    #[test]
    fn monotonic_transformation_examples() {
        let abc = pref(&[0, 1, 2]);
        let bac = pref(&[1, 0, 2]);
        assert!(abc.is_monotonic_transformation_of(&abc, ObjectId(1)));
        // old=(a,b,c), o=b, new=(b,a,c): {b,c} ⊆ {b,a,c}.
        assert!(bac.is_monotonic_transformation_of(&abc, ObjectId(1)));
        // old=(a,b,c), o=a, new=(b,a,c): {a,b,c} ⊄ {a,c}.
        assert!(!bac.is_monotonic_transformation_of(&abc, ObjectId(0)));
    }

    #[test]
    fn monotonic_transformation_matches_set_inclusion_exhaustively() {
        let prefs = enumerate_preferences(3).unwrap();
        for old in &prefs {
            for new in &prefs {
                for o in (0..3).map(ObjectId) {
                    let brute = old.lower_contour(o).is_subset(&new.lower_contour(o));
                    assert_eq!(new.is_monotonic_transformation_of(old, o), brute);
                    // When o tops old, only prefs that also top o qualify.
                    if old.rank_of(o) == 0 {
                        assert_eq!(
                            new.is_monotonic_transformation_of(old, o),
                            new.rank_of(o) == 0
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn allocation_rejects_repeats() {
        assert!(Allocation::from_indices(&[0, 0, 2]).is_err());
        assert!(Allocation::from_indices(&[0, 2, 1]).is_ok());
    }

    #[test]
    fn priority_one_based_round_trip() {
        let p = Priority::from_one_based(&[2, 1, 3]).unwrap();
        assert_eq!(p.order(), &[AgentId(1), AgentId(0), AgentId(2)]);
        assert_eq!(p.position_of(AgentId(0)), 1);
        assert_eq!(p.to_string(), "(2, 1, 3)");
        assert!(Priority::from_one_based(&[0, 1]).is_err());
        assert!(Priority::from_one_based(&[1, 1]).is_err());
    }

    #[test]
    fn parse_profile_text_round_trip() {
        let text = "1:  b > a>c\n2: a > b > c\n\n3: c > b > a\n";
        let parsed = parse_profile_text(text).unwrap();
        assert_eq!(parsed.object_names, vec!["a", "b", "c"]);
        assert_eq!(parsed.profile.pref(AgentId(0)), &pref(&[1, 0, 2]));
        assert_eq!(parsed.profile.pref(AgentId(1)), &pref(&[0, 1, 2]));
        assert_eq!(parsed.profile.pref(AgentId(2)), &pref(&[2, 1, 0]));

        let rendered = format_profile_text(&parsed.profile, &parsed.object_names);
        let reparsed = parse_profile_text(&rendered).unwrap();
        assert_eq!(reparsed, parsed);
    }

    #[test]
    fn parse_profile_text_reports_line_numbers() {
        let err = parse_profile_text("1: a > b\nx: b > a\n").unwrap_err();
        assert_eq!(err.line, 2);

        let err = parse_profile_text("1: a > b\n3: b > a\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("increasing order"));

        let err = parse_profile_text("1: a > a\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("duplicate"));

        let err = parse_profile_text("1: a > b > c\n2: a > b > c\n").unwrap_err();
        assert!(err.message.contains("2 agents require exactly 2 objects"));
    }

    #[test]
    fn ids_serialize_one_indexed() {
        assert_eq!(serde_json::to_string(&ObjectId(0)).unwrap(), "1");
        assert_eq!(serde_json::to_string(&AgentId(2)).unwrap(), "3");
        let p: Priority = serde_json::from_str("[2,1,3]").unwrap();
        assert_eq!(p, Priority::from_one_based(&[2, 1, 3]).unwrap());
        assert!(serde_json::from_str::<AgentId>("0").is_err());
    }
}
