//! Minimum-penalty repair of an event log against a transition model.
//!
//! The repair edits a trace with two primitives: removing an event (cost
//! grows with the event's support count, so well-evidenced events resist
//! removal) and inserting a zero-duration event (flat cost). A uniform-cost
//! search over (next original index, last emitted location, insertion run)
//! states finds the cheapest edit sequence whose result is a walk in the
//! model. [`brute_force_repair`] is a small-scale exhaustive oracle used to
//! certify optimality in tests.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::rc::Rc;

use crate::model::{fuse_indexed, EventLog, LocationEvent, LogOrigin, TransitionModel};
use crate::{Error, Result};

/// Penalty parameters. Removal of an event costs
/// `remove_base + remove_per_support * support_count`; each insertion costs
/// `insert_cost`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyConfig {
    pub insert_cost: f64,
    pub remove_base: f64,
    pub remove_per_support: f64,
    /// Upper bound on consecutive insertions between two kept events.
    /// `None` means the number of model areas, which admits any simple
    /// connector path.
    pub max_consecutive_insertions: Option<usize>,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            insert_cost: 1.0,
            remove_base: 1.0,
            remove_per_support: 0.1,
            max_consecutive_insertions: None,
        }
    }
}

impl PenaltyConfig {
    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("insert_cost", self.insert_cost),
            ("remove_base", self.remove_base),
            ("remove_per_support", self.remove_per_support),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "penalty parameter {name} must be a nonnegative finite number, got {v}"
                )));
            }
        }
        if self.max_consecutive_insertions == Some(0) {
            return Err(Error::Config(
                "max_consecutive_insertions must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn effective_max_insertions(&self, model: &TransitionModel) -> usize {
        self.max_consecutive_insertions
            .unwrap_or_else(|| model.area_count())
            .max(1)
    }

    fn remove_cost(&self, support: u32) -> f64 {
        self.remove_base + self.remove_per_support * support as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditKind {
    Insert,
    Remove,
    Fuse,
}

impl EditKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EditKind::Insert => "insert",
            EditKind::Remove => "remove",
            EditKind::Fuse => "fuse",
        }
    }
}

/// One edit applied during repair. `position` indexes into the original
/// log: the removed or absorbed event, or the event an insertion precedes.
/// Fusions are free bookkeeping that follows removals.
#[derive(Debug, Clone, PartialEq)]
pub struct EditOp {
    pub kind: EditKind,
    pub position: usize,
    pub location: String,
    pub cost: f64,
}

/// A corrected log plus the ordered edits that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairResult {
    pub corrected: EventLog,
    pub edits: Vec<EditOp>,
    pub total_penalty: f64,
}

impl RepairResult {
    pub fn unchanged(log: &EventLog) -> Self {
        RepairResult {
            corrected: log.clone(),
            edits: Vec::new(),
            total_penalty: 0.0,
        }
    }
}

// ---- shared search scaffolding ----

type Loc = u16;

struct Interned {
    labels: Vec<String>,
    adjacency: Vec<Vec<Loc>>,
    events: Vec<(Loc, u32)>,
}

fn intern(log: &EventLog, model: &TransitionModel) -> Result<Interned> {
    let labels: Vec<String> = model.areas().map(|a| a.to_string()).collect();
    let index = |label: &str| -> Option<Loc> {
        labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .ok()
            .map(|i| i as Loc)
    };
    let mut adjacency = vec![Vec::new(); labels.len()];
    for (a, b) in model.edges() {
        let (ia, ib) = (index(a).unwrap(), index(b).unwrap());
        adjacency[ia as usize].push(ib);
        adjacency[ib as usize].push(ia);
    }
    for n in &mut adjacency {
        n.sort_unstable();
    }
    let mut events = Vec::with_capacity(log.events.len());
    for e in &log.events {
        let loc =
            index(&e.location).ok_or_else(|| Error::UnknownLocation(e.location.clone()))?;
        events.push((loc, e.support_count));
    }
    Ok(Interned {
        labels,
        adjacency,
        events,
    })
}

impl Interned {
    fn step_ok(&self, last: Option<Loc>, next: Loc) -> bool {
        match last {
            None => true,
            Some(l) => l == next || self.adjacency[l as usize].binary_search(&next).is_ok(),
        }
    }
}

/// One decision of the search, in original-log order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Decision {
    Keep(usize),
    Remove(usize),
    Insert(usize, Loc),
}

/// Canonical ordering key for an edit, used for deterministic tie-breaks:
/// position, then kind (insert before remove), then label.
type EditKey = (u32, u8, Loc);

fn decision_key(d: &Decision) -> Option<EditKey> {
    match d {
        Decision::Keep(_) => None,
        Decision::Insert(i, l) => Some((*i as u32, 0, *l)),
        Decision::Remove(i) => Some((*i as u32, 1, 0)),
    }
}

/// Materialize a decision sequence into a repair result: kept events are
/// copied bit-exactly, inserted events are zero-duration at the following
/// kept event's start (preceding kept event's end at the tail), then
/// same-location neighbors are fused.
fn build_result(
    log: &EventLog,
    interned: &Interned,
    cfg: &PenaltyConfig,
    decisions: &[Decision],
) -> RepairResult {
    enum Item {
        Kept(usize),
        Inserted { position: usize, loc: Loc },
    }
    let mut items = Vec::new();
    let mut edits = Vec::new();
    let mut total = 0.0;
    for d in decisions {
        match d {
            Decision::Keep(i) => items.push(Item::Kept(*i)),
            Decision::Remove(i) => {
                let cost = cfg.remove_cost(interned.events[*i].1);
                total += cost;
                edits.push(EditOp {
                    kind: EditKind::Remove,
                    position: *i,
                    location: log.events[*i].location.clone(),
                    cost,
                });
            }
            Decision::Insert(i, loc) => {
                total += cfg.insert_cost;
                edits.push(EditOp {
                    kind: EditKind::Insert,
                    position: *i,
                    location: interned.labels[*loc as usize].clone(),
                    cost: cfg.insert_cost,
                });
                items.push(Item::Inserted {
                    position: *i,
                    loc: *loc,
                });
            }
        }
    }

    // timestamp placement for inserted events
    let mut next_kept_start = vec![None; items.len()];
    let mut following = None;
    for (idx, item) in items.iter().enumerate().rev() {
        next_kept_start[idx] = following;
        if let Item::Kept(i) = item {
            following = Some(log.events[*i].start);
        }
    }
    let mut prev_kept_end = log.events.first().map(|e| e.start);
    let mut sequence = Vec::with_capacity(items.len());
    for (idx, item) in items.iter().enumerate() {
        match item {
            Item::Kept(i) => {
                prev_kept_end = Some(log.events[*i].end);
                sequence.push((log.events[*i].clone(), *i));
            }
            Item::Inserted { position, loc } => {
                let at = next_kept_start[idx]
                    .or(prev_kept_end)
                    .expect("insertions require a nonempty log");
                sequence.push((
                    LocationEvent::new(interned.labels[*loc as usize].clone(), at, at, 0),
                    *position,
                ));
            }
        }
    }

    let (events, fusions) = fuse_indexed(sequence);
    for f in fusions {
        edits.push(EditOp {
            kind: EditKind::Fuse,
            position: f.position,
            location: f.location,
            cost: 0.0,
        });
    }
    RepairResult {
        corrected: EventLog::new(events, LogOrigin::Repaired),
        edits,
        total_penalty: total,
    }
}

// ---- uniform-cost search ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    index: usize,
    last: Option<Loc>,
    insertion_run: usize,
}

struct Node {
    parent: usize,
    decision: Option<Decision>,
}

struct Entry {
    cost: f64,
    edit_count: u32,
    // edit keys accumulated so far; shared between keep-steps
    seq: Rc<Vec<EditKey>>,
    node: usize,
    state: State,
}

impl Entry {
    fn order_key(&self, other: &Entry) -> Ordering {
        self.cost
            .partial_cmp(&other.cost)
            .expect("penalties are finite")
            .then(self.edit_count.cmp(&other.edit_count))
            .then(self.seq.cmp(&other.seq))
            .then(self.node.cmp(&other.node))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.order_key(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse for cheapest-first
        self.order_key(other).reverse()
    }
}

/// Repair a log so every transition is a model edge, at minimum total
/// penalty. Ties break toward fewer edits, then the smallest edit sequence.
/// Kept events keep their original fields bit-exactly; the result is fused.
pub fn repair(log: &EventLog, model: &TransitionModel, cfg: &PenaltyConfig) -> Result<RepairResult> {
    cfg.check()?;
    if log.is_empty() {
        return Ok(RepairResult::unchanged(log));
    }
    let interned = intern(log, model)?;
    let n = interned.events.len();
    let max_run = cfg.effective_max_insertions(model);

    let mut arena = vec![Node {
        parent: usize::MAX,
        decision: None,
    }];
    let mut heap = BinaryHeap::new();
    let mut visited: HashSet<State> = HashSet::new();
    heap.push(Entry {
        cost: 0.0,
        edit_count: 0,
        seq: Rc::new(Vec::new()),
        node: 0,
        state: State {
            index: 0,
            last: None,
            insertion_run: 0,
        },
    });

    while let Some(entry) = heap.pop() {
        let state = entry.state;
        if !visited.insert(state) {
            continue;
        }
        if state.index == n {
            let mut decisions = Vec::new();
            let mut node = entry.node;
            while node != 0 {
                decisions.push(arena[node].decision.expect("non-root nodes carry a decision"));
                node = arena[node].parent;
            }
            decisions.reverse();
            return Ok(build_result(log, &interned, cfg, &decisions));
        }

        let (loc, support) = interned.events[state.index];
        let push = |decision: Decision,
                        cost: f64,
                        state: State,
                        arena: &mut Vec<Node>,
                        heap: &mut BinaryHeap<Entry>| {
            if visited.contains(&state) {
                return;
            }
            arena.push(Node {
                parent: entry.node,
                decision: Some(decision),
            });
            let (edit_count, seq) = match decision_key(&decision) {
                None => (entry.edit_count, Rc::clone(&entry.seq)),
                Some(key) => {
                    let mut s = (*entry.seq).clone();
                    s.push(key);
                    (entry.edit_count + 1, Rc::new(s))
                }
            };
            heap.push(Entry {
                cost,
                edit_count,
                seq,
                node: arena.len() - 1,
                state,
            });
        };

        if interned.step_ok(state.last, loc) {
            push(
                Decision::Keep(state.index),
                entry.cost,
                State {
                    index: state.index + 1,
                    last: Some(loc),
                    insertion_run: 0,
                },
                &mut arena,
                &mut heap,
            );
        }
        push(
            Decision::Remove(state.index),
            entry.cost + cfg.remove_cost(support),
            State {
                index: state.index + 1,
                last: state.last,
                insertion_run: state.insertion_run,
            },
            &mut arena,
            &mut heap,
        );
        // insertions only ever help between two kept events
        if state.insertion_run < max_run {
            if let Some(last) = state.last {
                for &next in &interned.adjacency[last as usize] {
                    push(
                        Decision::Insert(state.index, next),
                        entry.cost + cfg.insert_cost,
                        State {
                            index: state.index,
                            last: Some(next),
                            insertion_run: state.insertion_run + 1,
                        },
                        &mut arena,
                        &mut heap,
                    );
                }
            }
        }
    }
    Err(Error::InfeasibleRepair)
}

// ---- exhaustive oracle ----

/// Exhaustively enumerate edit sequences of at most `max_edits` edits and
/// return the minimum-penalty valid result. Test-scale only: refuses logs
/// over 10 events, models over 6 areas, or bounds over 6 edits.
pub fn brute_force_repair(
    log: &EventLog,
    model: &TransitionModel,
    cfg: &PenaltyConfig,
    max_edits: usize,
) -> Result<RepairResult> {
    cfg.check()?;
    if log.events.len() > 10 {
        return Err(Error::OracleBounds(format!(
            "log has {} events, oracle limit is 10",
            log.events.len()
        )));
    }
    if model.area_count() > 6 {
        return Err(Error::OracleBounds(format!(
            "model has {} areas, oracle limit is 6",
            model.area_count()
        )));
    }
    if max_edits > 6 {
        return Err(Error::OracleBounds(format!(
            "max_edits {max_edits} exceeds oracle limit 6"
        )));
    }
    if log.is_empty() {
        return Ok(RepairResult::unchanged(log));
    }

    let interned = intern(log, model)?;
    let max_run = cfg.effective_max_insertions(model);

    struct Search<'a> {
        interned: &'a Interned,
        cfg: &'a PenaltyConfig,
        max_edits: usize,
        max_run: usize,
        best: Option<(f64, Vec<EditKey>, Vec<Decision>)>,
    }

    impl Search<'_> {
        fn candidate_keys(decisions: &[Decision]) -> Vec<EditKey> {
            decisions.iter().filter_map(decision_key).collect()
        }

        fn offer(&mut self, cost: f64, decisions: &[Decision]) {
            let keys = Self::candidate_keys(decisions);
            let better = match &self.best {
                None => true,
                Some((bc, bk, _)) => {
                    (cost, keys.len(), &keys) < (*bc, bk.len(), bk)
                }
            };
            if better {
                self.best = Some((cost, keys, decisions.to_vec()));
            }
        }

        fn dfs(
            &mut self,
            index: usize,
            last: Option<Loc>,
            run: usize,
            edits_used: usize,
            cost: f64,
            decisions: &mut Vec<Decision>,
        ) {
            if let Some((best_cost, _, _)) = &self.best {
                if cost > *best_cost {
                    return;
                }
            }
            if index == self.interned.events.len() {
                self.offer(cost, decisions);
                return;
            }
            let (loc, support) = self.interned.events[index];
            if self.interned.step_ok(last, loc) {
                decisions.push(Decision::Keep(index));
                self.dfs(index + 1, Some(loc), 0, edits_used, cost, decisions);
                decisions.pop();
            }
            if edits_used < self.max_edits {
                decisions.push(Decision::Remove(index));
                self.dfs(
                    index + 1,
                    last,
                    run,
                    edits_used + 1,
                    cost + self.cfg.remove_cost(support),
                    decisions,
                );
                decisions.pop();
                if run < self.max_run {
                    if let Some(l) = last {
                        let neighbors = self.interned.adjacency[l as usize].clone();
                        for next in neighbors {
                            decisions.push(Decision::Insert(index, next));
                            self.dfs(
                                index,
                                Some(next),
                                run + 1,
                                edits_used + 1,
                                cost + self.cfg.insert_cost,
                                decisions,
                            );
                            decisions.pop();
                        }
                    }
                }
            }
        }
    }

    let mut search = Search {
        interned: &interned,
        cfg,
        max_edits,
        max_run,
        best: None,
    };
    search.dfs(0, None, 0, 0, 0.0, &mut Vec::new());
    match search.best {
        Some((_, _, decisions)) => Ok(build_result(log, &interned, cfg, &decisions)),
        None => Err(Error::InfeasibleRepair),
    }
}
