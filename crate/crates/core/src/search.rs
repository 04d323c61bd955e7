//! Enumeration of the mechanism space under axiom constraints.
//!
//! Two engines:
//!
//! - `Exhaustive`: iterate every assignment of allocations to profiles and
//!   filter by the requested axioms. Only feasible while the table space
//!   `(n!)^((n!)^n)` stays within 2^20 assignments, i.e. n <= 2.
//! - `Propagated` (n <= 3): treat each profile as a variable over the n!
//!   allocations and run backtracking with constraint propagation. Arc
//!   constraints come from strategy-proofness and non-bossiness between
//!   profiles differing in one agent's preference; tie-breaking axioms
//!   prune via envy-direction consistency on identical-pair blocks
//!   (globally constant tie-breaking additionally branches over the n!
//!   candidate priorities at the root, which pins every unanimous
//!   profile). Group strategy-proofness propagates as strategy-proofness
//!   plus non-bossiness and is re-checked directly on each solution.
//!
//! Every candidate solution is re-checked with the real axiom checkers
//! before being emitted, so the filters only have to be sound, and any
//! axiom outside the propagated set is enforced by the final re-check.
//! Solutions are emitted in lexicographic table order.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::axioms::{check_axiom, Axiom, CheckOptions};
use crate::characterize::Family;
use crate::domain::{
    enumerate_allocations, enumerate_priorities, factorial, Allocation, Domain,
};
use crate::mechanisms::{materialize_sequential, materialize_serial, Hierarchy, MechanismTable};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SearchMode {
    Exhaustive,
    Propagated,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum VariableOrder {
    /// Breadth-first from the unanimous profiles along single-agent
    /// preference changes (default).
    #[default]
    UnanimousBfs,
    /// Plain canonical profile order.
    Canonical,
}

#[derive(Clone, Debug)]
pub struct SearchSpec {
    pub n: usize,
    pub axioms: BTreeSet<Axiom>,
    pub mode: SearchMode,
    pub limit: Option<usize>,
    pub order: VariableOrder,
}

impl SearchSpec {
    pub fn new(n: usize, axioms: impl IntoIterator<Item = Axiom>, mode: SearchMode) -> Self {
        SearchSpec {
            n,
            axioms: axioms.into_iter().collect(),
            mode,
            limit: None,
            order: VariableOrder::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub n: usize,
    pub tables: Vec<MechanismTable>,
    pub nodes: u64,
    pub complete: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error(
        "exhaustive search needs (n!)^((n!)^n) <= 2^20 table assignments; \
         n = {n} exceeds that bound (use the propagated mode)"
    )]
    ExhaustiveTooLarge { n: usize },
    #[error("propagated search supports n <= 3; got n = {n}")]
    PropagatedTooLarge { n: usize },
    #[error("axiom `{0}` cannot constrain a fixed-population table search")]
    UnsupportedAxiom(Axiom),
    #[error("search needs at least one agent")]
    EmptyDomain,
}

/// Enumerates all mechanism tables satisfying the requested axioms.
pub fn enumerate_mechanisms(spec: &SearchSpec) -> Result<SearchResult, SearchError> {
    if spec.n == 0 {
        return Err(SearchError::EmptyDomain);
    }
    if let Some(&bad) = spec.axioms.iter().find(|a| !a.is_table_axiom()) {
        return Err(SearchError::UnsupportedAxiom(bad));
    }
    match spec.mode {
        SearchMode::Exhaustive => exhaustive(spec),
        SearchMode::Propagated => {
            if spec.n > 3 {
                return Err(SearchError::PropagatedTooLarge { n: spec.n });
            }
            Ok(propagated(spec))
        }
    }
}

/// Set-compares the found tables against the independently materialized
/// family: all serial dictatorships (one per priority) or all sequential
/// dictatorships (one per complete hierarchy).
pub fn cross_validate(result: &SearchResult, family: Family) -> bool {
    let expected: BTreeSet<Vec<Allocation>> = match family {
        Family::Serial => enumerate_priorities(result.n)
            .expect("n >= 1")
            .iter()
            .map(|p| materialize_serial(p).entries().to_vec())
            .collect(),
        Family::Sequential => Hierarchy::enumerate_all(result.n)
            .iter()
            .map(|h| materialize_sequential(h).entries().to_vec())
            .collect(),
        Family::None => BTreeSet::new(),
    };
    let found: BTreeSet<Vec<Allocation>> = result
        .tables
        .iter()
        .map(|t| t.entries().to_vec())
        .collect();
    found == expected
}

fn passes_all(t: &MechanismTable, axioms: &BTreeSet<Axiom>) -> bool {
    axioms.iter().all(|&a| {
        check_axiom(t, a, &CheckOptions::default())
            .expect("table axioms dispatch cleanly")
            .holds
    })
}

fn exhaustive(spec: &SearchSpec) -> Result<SearchResult, SearchError> {
    let n = spec.n;
    let n_allocs = factorial(n);
    let n_profiles = n_allocs.pow(n as u32);
    let total = n_profiles
        .try_into()
        .ok()
        .and_then(|p: u32| n_allocs.checked_pow(p))
        .filter(|&t| t <= 1 << 20)
        .ok_or(SearchError::ExhaustiveTooLarge { n })?;
    let n_profiles = n_profiles as usize;
    let allocations = enumerate_allocations(n).expect("n >= 1");
    let base = allocations.len() as u128;
    let mut tables = Vec::new();
    let mut nodes = 0u64;
    let mut complete = true;
    for code in 0..total {
        nodes += 1;
        let mut rest = code;
        let mut entries = Vec::with_capacity(n_profiles);
        for _ in 0..n_profiles {
            entries.push(allocations[(rest % base) as usize].clone());
            rest /= base;
        }
        entries.reverse();
        let table = MechanismTable::new(n, entries).expect("assignment has full length");
        if passes_all(&table, &spec.axioms) {
            tables.push(table);
            if let Some(limit) = spec.limit {
                if tables.len() >= limit {
                    complete = code + 1 == total;
                    break;
                }
            }
        }
    }
    tables.sort();
    Ok(SearchResult {
        n,
        tables,
        nodes,
        complete,
    })
}

// [agent][own pref][neighbor pref][own value] -> allowed neighbor values
type EdgeMasks = Vec<Vec<Vec<Vec<u8>>>>;
// (pair id, first agent, second agent, shared pref, block key)
type IdenticalPair = (usize, usize, usize, usize, usize);

// Static tables shared by the propagated engine.
struct Model {
    n: usize,
    n_values: usize,
    n_profiles: usize,
    dom: Domain,
    // alloc value -> object per agent
    allocs: Vec<Vec<usize>>,
    // pref index -> rank per object
    rank: Vec<Vec<usize>>,
    // per profile: (neighbor, agent, own pref, neighbor pref)
    neighbors: Vec<Vec<(usize, usize, usize, usize)>>,
    // per profile
    identical_pairs: Vec<Vec<IdenticalPair>>,
    // (pair id, block key) -> member profiles
    blocks: HashMap<(usize, usize), Vec<usize>>,
    edge_masks: EdgeMasks,
    // [pair id][shared pref][favored slot (0 = first)] -> allowed values
    dir_masks: Vec<Vec<[u8; 2]>>,
    full_mask: u8,
    lctb_active: bool,
    gctb_active: bool,
}

impl Model {
    fn build(spec: &SearchSpec) -> Model {
        let n = spec.n;
        let dom = Domain::for_table(n);
        let n_values = dom.n_preferences();
        let n_profiles = dom.n_profiles();
        let allocs: Vec<Vec<usize>> = enumerate_allocations(n)
            .expect("n >= 1")
            .iter()
            .map(|a| a.assignment().iter().map(|o| o.index()).collect())
            .collect();
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

        let sp_active = spec.axioms.contains(&Axiom::Sp) || spec.axioms.contains(&Axiom::Gsp);
        let nb_active =
            spec.axioms.contains(&Axiom::NonBossy) || spec.axioms.contains(&Axiom::Gsp);
        let gctb_active = spec.axioms.contains(&Axiom::Gctb);
        let lctb_active = spec.axioms.contains(&Axiom::Lctb);

        let mut neighbors = vec![Vec::new(); n_profiles];
        if sp_active || nb_active {
            for (p, row) in neighbors.iter_mut().enumerate() {
                for agent in 0..n {
                    let own = dom.digit(p, agent);
                    for q in 0..n_values {
                        if q == own {
                            continue;
                        }
                        row.push((dom.replace_digit(p, agent, q), agent, own, q));
                    }
                }
            }
        }

        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let mut identical_pairs = vec![Vec::new(); n_profiles];
        let mut blocks: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        if gctb_active || lctb_active {
            for (p, row) in identical_pairs.iter_mut().enumerate() {
                for (pair_id, &(i, j)) in pairs.iter().enumerate() {
                    let ti = dom.digit(p, i);
                    if ti != dom.digit(p, j) {
                        continue;
                    }
                    let block = dom.replace_digit(dom.replace_digit(p, i, 0), j, 0);
                    row.push((pair_id, i, j, ti, block));
                    blocks.entry((pair_id, block)).or_default().push(p);
                }
            }
        }

        let full_mask = ((1u16 << n_values) - 1) as u8;
        let mut edge_masks = Vec::new();
        if sp_active || nb_active {
            edge_masks = (0..n)
                .map(|agent| {
                    (0..n_values)
                        .map(|own| {
                            (0..n_values)
                                .map(|other| {
                                    (0..n_values)
                                        .map(|x| {
                                            let mut mask = 0u8;
                                            for y in 0..n_values {
                                                let xo = allocs[x][agent];
                                                let yo = allocs[y][agent];
                                                let mut ok = true;
                                                if sp_active {
                                                    ok &= rank[own][xo] <= rank[own][yo]
                                                        && rank[other][yo] <= rank[other][xo];
                                                }
                                                if nb_active {
                                                    ok &= !(xo == yo && x != y);
                                                }
                                                if ok {
                                                    mask |= 1 << y;
                                                }
                                            }
                                            mask
                                        })
                                        .collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
        }

        let mut dir_masks = Vec::new();
        if gctb_active || lctb_active {
            dir_masks = pairs
                .iter()
                .map(|&(i, j)| {
                    (0..n_values)
                        .map(|t| {
                            let mut masks = [0u8; 2];
                            for x in 0..n_values {
                                let slot =
                                    if rank[t][allocs[x][i]] < rank[t][allocs[x][j]] { 0 } else { 1 };
                                masks[slot] |= 1 << x;
                            }
                            masks
                        })
                        .collect()
                })
                .collect();
        }

        Model {
            n,
            n_values,
            n_profiles,
            dom,
            allocs,
            rank,
            neighbors,
            identical_pairs,
            blocks,
            edge_masks,
            dir_masks,
            full_mask,
            lctb_active,
            gctb_active,
        }
    }

    fn variable_order(&self, order: VariableOrder) -> Vec<usize> {
        match order {
            VariableOrder::Canonical => (0..self.n_profiles).collect(),
            VariableOrder::UnanimousBfs => {
                let mut seen = vec![false; self.n_profiles];
                let mut out = Vec::with_capacity(self.n_profiles);
                let mut queue: VecDeque<usize> = VecDeque::new();
                for t in 0..self.n_values {
                    let u = self.dom.unanimous_index(t);
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
                while let Some(p) = queue.pop_front() {
                    out.push(p);
                    for agent in 0..self.n {
                        for q in 0..self.n_values {
                            let p2 = self.dom.replace_digit(p, agent, q);
                            if !seen[p2] {
                                seen[p2] = true;
                                queue.push_back(p2);
                            }
                        }
                    }
                }
                debug_assert_eq!(out.len(), self.n_profiles);
                out
            }
        }
    }
}

// Mutable search state with trailed undo.
struct State {
    domains: Vec<u8>,
    propagated: Vec<bool>,
    directions: HashMap<(usize, usize), usize>,
    trail_domains: Vec<(usize, u8)>,
    trail_props: Vec<usize>,
    trail_dirs: Vec<(usize, usize)>,
}

struct Mark {
    domains: usize,
    props: usize,
    dirs: usize,
}

impl State {
    fn fresh(model: &Model) -> State {
        State {
            domains: vec![model.full_mask; model.n_profiles],
            propagated: vec![false; model.n_profiles],
            directions: HashMap::new(),
            trail_domains: Vec::new(),
            trail_props: Vec::new(),
            trail_dirs: Vec::new(),
        }
    }

    fn mark(&self) -> Mark {
        Mark {
            domains: self.trail_domains.len(),
            props: self.trail_props.len(),
            dirs: self.trail_dirs.len(),
        }
    }

    fn rollback(&mut self, mark: &Mark) {
        while self.trail_domains.len() > mark.domains {
            let (p, old) = self.trail_domains.pop().expect("trail entry");
            self.domains[p] = old;
        }
        while self.trail_props.len() > mark.props {
            let p = self.trail_props.pop().expect("trail entry");
            self.propagated[p] = false;
        }
        while self.trail_dirs.len() > mark.dirs {
            let key = self.trail_dirs.pop().expect("trail entry");
            self.directions.remove(&key);
        }
    }

    fn narrow(&mut self, p: usize, mask: u8, queue: &mut VecDeque<usize>) -> bool {
        let old = self.domains[p];
        let new = old & mask;
        if new == old {
            return true;
        }
        self.trail_domains.push((p, old));
        self.domains[p] = new;
        if new == 0 {
            return false;
        }
        if new.count_ones() == 1 && !self.propagated[p] {
            queue.push_back(p);
        }
        true
    }

    // Applies the constraints of every queued singleton to fixpoint.
    fn propagate(&mut self, model: &Model, queue: &mut VecDeque<usize>) -> bool {
        while let Some(p) = queue.pop_front() {
            if self.propagated[p] {
                continue;
            }
            debug_assert_eq!(self.domains[p].count_ones(), 1);
            let x = self.domains[p].trailing_zeros() as usize;
            self.propagated[p] = true;
            self.trail_props.push(p);

            if model.lctb_active {
                for &(pair_id, i, j, t, block) in &model.identical_pairs[p] {
                    let fav = if model.rank[t][model.allocs[x][i]]
                        < model.rank[t][model.allocs[x][j]]
                    {
                        i
                    } else {
                        j
                    };
                    match self.directions.get(&(pair_id, block)) {
                        Some(&seen) if seen != fav => return false,
                        Some(_) => {}
                        None => {
                            self.directions.insert((pair_id, block), fav);
                            self.trail_dirs.push((pair_id, block));
                            let slot = usize::from(fav == j);
                            for &member in &model.blocks[&(pair_id, block)] {
                                let shared = model.dom.digit(member, i);
                                let mask = model.dir_masks[pair_id][shared][slot];
                                if !self.narrow(member, mask, queue) {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }

            for &(p2, agent, own, other) in &model.neighbors[p] {
                let mask = model.edge_masks[agent][own][other][x];
                if !self.narrow(p2, mask, queue) {
                    return false;
                }
            }
        }
        true
    }
}

fn propagated(spec: &SearchSpec) -> SearchResult {
    let model = Model::build(spec);
    let order = model.variable_order(spec.order);
    let mut nodes = 0u64;
    let mut found: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut limit_hit = false;

    // Globally constant tie-breaking pins a direction per pair across the
    // whole domain; branching over the priority at the root turns it into
    // unary constraints (the priority is recoverable from any solution, so
    // distinct roots cannot rediscover the same table).
    let roots: Vec<Option<Vec<usize>>> = if model.gctb_active {
        enumerate_priorities(model.n)
            .expect("n >= 1")
            .iter()
            .map(|priority| {
                let mut position = vec![0usize; model.n];
                for (pos, agent) in priority.order().iter().enumerate() {
                    position[agent.index()] = pos;
                }
                Some(position)
            })
            .collect()
    } else {
        vec![None]
    };

    'roots: for root in roots {
        let mut state = State::fresh(&model);
        let mut queue: VecDeque<usize> = VecDeque::new();
        if let Some(position) = &root {
            for p in 0..model.n_profiles {
                for &(pair_id, i, j, t, _) in &model.identical_pairs[p] {
                    let slot = usize::from(position[i] > position[j]);
                    let mask = model.dir_masks[pair_id][t][slot];
                    if !state.narrow(p, mask, &mut queue) {
                        continue 'roots;
                    }
                }
            }
        }
        for p in 0..model.n_profiles {
            if state.domains[p].count_ones() == 1 {
                queue.push_back(p);
            }
        }
        if !state.propagate(&model, &mut queue) {
            continue 'roots;
        }
        if !dfs(
            &model, spec, &order, &mut state, &mut nodes, &mut found,
        ) {
            limit_hit = true;
            break 'roots;
        }
    }

    let tables: Vec<MechanismTable> = found
        .into_iter()
        .map(|assignment| {
            let entries: Vec<Allocation> = assignment
                .iter()
                .map(|&x| {
                    Allocation::new(
                        model.allocs[x as usize]
                            .iter()
                            .map(|&o| crate::domain::ObjectId(o))
                            .collect(),
                    )
                    .expect("allocation values are bijections")
                })
                .collect();
            MechanismTable::new(model.n, entries).expect("full assignment")
        })
        .collect();
    SearchResult {
        n: model.n,
        tables,
        nodes,
        complete: !limit_hit,
    }
}

// Returns false when the solution limit was reached.
fn dfs(
    model: &Model,
    spec: &SearchSpec,
    order: &[usize],
    state: &mut State,
    nodes: &mut u64,
    found: &mut BTreeSet<Vec<u8>>,
) -> bool {
    let var = order
        .iter()
        .copied()
        .find(|&p| state.domains[p].count_ones() > 1);
    let Some(var) = var else {
        let assignment: Vec<u8> = state
            .domains
            .iter()
            .map(|d| d.trailing_zeros() as u8)
            .collect();
        let entries: Vec<Allocation> = assignment
            .iter()
            .map(|&x| {
                Allocation::new(
                    model.allocs[x as usize]
                        .iter()
                        .map(|&o| crate::domain::ObjectId(o))
                        .collect(),
                )
                .expect("bijection")
            })
            .collect();
        let table = MechanismTable::new(model.n, entries).expect("full assignment");
        if passes_all(&table, &spec.axioms) {
            found.insert(assignment);
            if let Some(limit) = spec.limit {
                if found.len() >= limit {
                    return false;
                }
            }
        }
        return true;
    };

    let available = state.domains[var];
    for value in 0..model.n_values {
        if available & (1 << value) == 0 {
            continue;
        }
        *nodes += 1;
        let mark = state.mark();
        let mut queue = VecDeque::new();
        let ok = state.narrow(var, 1 << value, &mut queue) && state.propagate(model, &mut queue);
        if ok && !dfs(model, spec, order, state, nodes, found) {
            return false;
        }
        state.rollback(&mark);
    }
    true
}
