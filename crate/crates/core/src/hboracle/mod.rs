//! Java-memory-model oracle for small programs.
//!
//! An [`Execution`] is one interleaving of per-thread action sequences. Its
//! happens-before relation is the transitive closure of program order,
//! unlock-to-later-lock and volatile-write-to-later-read edges, and edges
//! from initialization actions to the first action of every other thread. A
//! data race is a pair of conflicting actions of different threads that the
//! relation leaves unordered.
//!
//! Values are not modeled: races are a property of action identity and
//! order only.

mod driver;
mod enumerate;
pub mod trace;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use driver::{driver_from_class, Driver, DriverProgram};
pub use enumerate::{enumerate_executions, program_races, threads_of, Enumeration, RaceReport, DEFAULT_ACTION_GUARD};

pub type ThreadId = usize;

/// Thread 0 is the main thread that initializes the object.
pub const MAIN_THREAD: ThreadId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Op {
    Read,
    Write,
    VolatileRead,
    VolatileWrite,
    Lock,
    Unlock,
    DefaultInit,
    FinalInit,
    /// A statement that touches no shared state.
    Other,
}

impl Op {
    pub const ALL: [Op; 9] = [
        Op::Read,
        Op::Write,
        Op::VolatileRead,
        Op::VolatileWrite,
        Op::Lock,
        Op::Unlock,
        Op::DefaultInit,
        Op::FinalInit,
        Op::Other,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Op::Read => "read",
            Op::Write => "write",
            Op::VolatileRead => "vread",
            Op::VolatileWrite => "vwrite",
            Op::Lock => "lock",
            Op::Unlock => "unlock",
            Op::DefaultInit => "init-default",
            Op::FinalInit => "init-final",
            Op::Other => "other",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|o| o.keyword() == word)
    }

    pub fn is_init(self) -> bool {
        matches!(self, Op::DefaultInit | Op::FinalInit)
    }

    /// Plain (non-volatile) accesses, the only ones that can conflict.
    pub fn is_plain_access(self) -> bool {
        matches!(self, Op::Read | Op::Write | Op::DefaultInit | Op::FinalInit)
    }

    pub fn is_plain_write(self) -> bool {
        matches!(self, Op::Write | Op::DefaultInit | Op::FinalInit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TraceAction {
    pub thread: ThreadId,
    pub op: Op,
    /// Field or monitor name; empty for [`Op::Other`].
    pub target: String,
    /// Position in the thread's program.
    pub seq: usize,
    /// Free-form description, e.g. the source statement.
    #[serde(skip_serializing_if = "String::is_empty")]
    pub label: String,
}

impl TraceAction {
    pub fn new(thread: ThreadId, op: Op, target: impl Into<String>) -> Self {
        TraceAction { thread, op, target: target.into(), seq: 0, label: String::new() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl fmt::Display for TraceAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{} {}", self.thread, self.op.keyword())?;
        if !self.target.is_empty() {
            write!(f, " {}", self.target)?;
        }
        if !self.label.is_empty() {
            write!(f, " ({})", self.label)?;
        }
        Ok(())
    }
}

/// A total order of actions: one interleaving.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Execution {
    pub actions: Vec<TraceAction>,
    /// The interleaving stopped because every unfinished thread waits for a
    /// monitor held by another.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub deadlocked: bool,
}

impl Execution {
    pub fn new(actions: Vec<TraceAction>) -> Self {
        Execution { actions, deadlocked: false }
    }
}

/// Per-thread action lists; `threads[0]` is the main thread and runs before
/// all others.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ThreadProgram {
    pub threads: Vec<Vec<TraceAction>>,
}

impl ThreadProgram {
    /// Builds a program and assigns thread ids and sequence numbers.
    pub fn new(threads: Vec<Vec<TraceAction>>) -> Self {
        let threads = threads
            .into_iter()
            .enumerate()
            .map(|(t, acts)| {
                acts.into_iter()
                    .enumerate()
                    .map(|(i, mut a)| {
                        a.thread = t;
                        a.seq = i;
                        a
                    })
                    .collect()
            })
            .collect();
        ThreadProgram { threads }
    }

    pub fn total_actions(&self) -> usize {
        self.threads.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("malformed execution at action {index}: {reason}")]
    MalformedExecution { index: usize, reason: String },
    #[error("more than {limit} executions")]
    BudgetExceeded { limit: usize },
    #[error("{actions} actions exceed the enumeration guard of {guard}; give an explicit bound")]
    TooManyActions { actions: usize, guard: usize },
    #[error("unsupported for the oracle: {0}")]
    UnsupportedForOracle(String),
    #[error("line {line}: {message}")]
    TraceSyntax { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeKind {
    /// Program order.
    Po,
    /// Unlock to later lock, volatile write to later volatile read.
    Syn,
    /// Initialization to the first action of another thread.
    Ini,
}

/// Happens-before of one execution. Actions are identified by their index
/// in the execution.
#[derive(Debug, Clone)]
pub struct HbGraph {
    /// Generating edges, before transitive closure.
    pub edges: Vec<(usize, usize, EdgeKind)>,
    closure: Vec<BitSet>,
}

impl HbGraph {
    pub fn len(&self) -> usize {
        self.closure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closure.is_empty()
    }

    /// `a` happens before `b` (strictly).
    pub fn ordered(&self, a: usize, b: usize) -> bool {
        self.closure[a].contains(b)
    }

    pub fn successors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.closure[a].iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet { words: vec![0; n.div_ceil(64)] }
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| wi * 64 + b)
        })
    }
}

/// Checks program order, lock discipline and mutual exclusion, and that
/// initialization actions come before every action of other threads.
pub fn check_well_formed(e: &Execution) -> Result<(), OracleError> {
    let bad = |index: usize, reason: String| Err(OracleError::MalformedExecution { index, reason });
    let mut last_seq: HashMap<ThreadId, usize> = HashMap::new();
    // monitor -> (holding thread, hold count)
    let mut held: HashMap<&str, (ThreadId, usize)> = HashMap::new();
    let mut seen_threads: BTreeSet<ThreadId> = BTreeSet::new();
    for (i, a) in e.actions.iter().enumerate() {
        if let Some(&prev) = last_seq.get(&a.thread) {
            if a.seq <= prev {
                return bad(i, format!("sequence number {} of thread {} does not increase", a.seq, a.thread));
            }
        }
        last_seq.insert(a.thread, a.seq);
        if a.op.is_init() && seen_threads.iter().any(|&t| t != a.thread) {
            return bad(i, "initialization after another thread started".to_string());
        }
        seen_threads.insert(a.thread);
        match a.op {
            Op::Lock => match held.get_mut(a.target.as_str()) {
                Some((t, n)) if *n > 0 && *t != a.thread => {
                    return bad(i, format!("thread {} locks {} held by thread {}", a.thread, a.target, t));
                }
                Some((t, n)) => {
                    *t = a.thread;
                    *n += 1;
                }
                None => {
                    held.insert(&a.target, (a.thread, 1));
                }
            },
            Op::Unlock => match held.get_mut(a.target.as_str()) {
                Some((t, n)) if *t == a.thread && *n > 0 => *n -= 1,
                _ => return bad(i, format!("thread {} unlocks {} without holding it", a.thread, a.target)),
            },
            _ => {}
        }
    }
    Ok(())
}

pub fn hb_closure(e: &Execution) -> Result<HbGraph, OracleError> {
    check_well_formed(e)?;
    let n = e.actions.len();
    let acts = &e.actions;
    let mut edges = Vec::new();
    let mut last_of: HashMap<ThreadId, usize> = HashMap::new();
    let mut first_of: Vec<(ThreadId, usize)> = Vec::new();
    for (j, a) in acts.iter().enumerate() {
        match last_of.insert(a.thread, j) {
            Some(i) => edges.push((i, j, EdgeKind::Po)),
            None => first_of.push((a.thread, j)),
        }
    }
    for (i, a) in acts.iter().enumerate() {
        let later = acts.iter().enumerate().skip(i + 1);
        match a.op {
            Op::Unlock => {
                for (j, b) in later {
                    if b.op == Op::Lock && b.target == a.target {
                        edges.push((i, j, EdgeKind::Syn));
                    }
                }
            }
            Op::VolatileWrite => {
                for (j, b) in later {
                    if b.op == Op::VolatileRead && b.target == a.target {
                        edges.push((i, j, EdgeKind::Syn));
                    }
                }
            }
            Op::DefaultInit | Op::FinalInit => {
                for &(t, j) in &first_of {
                    if t != a.thread && j > i {
                        edges.push((i, j, EdgeKind::Ini));
                    }
                }
            }
            _ => {}
        }
    }
    edges.sort();
    edges.dedup();
    // every edge points forward, so one reverse sweep closes the relation
    let mut direct: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b, _) in &edges {
        direct[a].push(b);
    }
    let mut closure: Vec<BitSet> = (0..n).map(|_| BitSet::new(n)).collect();
    for i in (0..n).rev() {
        let mut set = BitSet::new(n);
        for &j in &direct[i] {
            set.insert(j);
            set.union_with(&closure[j]);
        }
        closure[i] = set;
    }
    Ok(HbGraph { edges, closure })
}

/// Conflicting actions: plain accesses of the same field by different
/// threads, at least one a write.
pub fn conflicting(a: &TraceAction, b: &TraceAction) -> bool {
    a.thread != b.thread
        && a.target == b.target
        && a.op.is_plain_access()
        && b.op.is_plain_access()
        && (a.op.is_plain_write() || b.op.is_plain_write())
}

/// All races of the execution as ordered index pairs; `(a, b)` is present
/// iff `(b, a)` is.
pub fn detect_races(e: &Execution) -> Result<BTreeSet<(usize, usize)>, OracleError> {
    let hb = hb_closure(e)?;
    Ok(races_with(e, &hb))
}

pub fn races_with(e: &Execution, hb: &HbGraph) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for i in 0..e.actions.len() {
        for j in i + 1..e.actions.len() {
            if conflicting(&e.actions[i], &e.actions[j]) && !hb.ordered(i, j) && !hb.ordered(j, i) {
                out.insert((i, j));
                out.insert((j, i));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(spec: &[(ThreadId, Op, &str)]) -> Execution {
        let mut seq: HashMap<ThreadId, usize> = HashMap::new();
        let actions = spec
            .iter()
            .map(|&(t, op, target)| {
                let s = seq.entry(t).or_insert(0);
                let mut a = TraceAction::new(t, op, target);
                a.seq = *s;
                *s += 1;
                a
            })
            .collect();
        Execution::new(actions)
    }

    #[test]
    fn single_thread_is_totally_ordered() {
        let e = exec(&[(1, Op::Read, "x"), (1, Op::Write, "x"), (1, Op::Other, "")]);
        let hb = hb_closure(&e).unwrap();
        assert!(hb.ordered(0, 1) && hb.ordered(1, 2) && hb.ordered(0, 2));
        assert!(detect_races(&e).unwrap().is_empty());
    }

    #[test]
    fn example_interleaving_races() {
        // t1(5), t2(5), t1(6), t2(6), t1(7), t2(7)
        let e = exec(&[
            (0, Op::DefaultInit, "cnt"),
            (1, Op::Read, "cnt"),
            (2, Op::Read, "cnt"),
            (1, Op::Other, ""),
            (2, Op::Other, ""),
            (1, Op::Write, "cnt"),
            (2, Op::Write, "cnt"),
        ]);
        let hb = hb_closure(&e).unwrap();
        assert!(!hb.ordered(1, 6) && !hb.ordered(6, 1));
        assert!(!hb.ordered(2, 5) && !hb.ordered(5, 2));
        let races = detect_races(&e).unwrap();
        assert!(races.contains(&(1, 6)) && races.contains(&(6, 1)));
        assert!(races.contains(&(2, 5)));
        assert!(races.contains(&(5, 6)));
        assert!(!races.iter().any(|&(a, b)| a == 0 || b == 0));
    }

    #[test]
    fn unlock_orders_later_lock() {
        let e = exec(&[
            (1, Op::Lock, "l"),
            (1, Op::Read, "cnt"),
            (1, Op::Write, "cnt"),
            (1, Op::Unlock, "l"),
            (2, Op::Lock, "l"),
            (2, Op::Read, "cnt"),
            (2, Op::Write, "cnt"),
            (2, Op::Unlock, "l"),
        ]);
        let hb = hb_closure(&e).unwrap();
        assert!(hb.ordered(2, 5));
        assert!(hb.edges.contains(&(3, 4, EdgeKind::Syn)));
        assert!(detect_races(&e).unwrap().is_empty());
    }

    #[test]
    fn volatile_write_orders_later_read() {
        let e = exec(&[(1, Op::Write, "x"), (1, Op::VolatileWrite, "f"), (2, Op::VolatileRead, "f"), (2, Op::Read, "x")]);
        assert!(detect_races(&e).unwrap().is_empty());
        let e = exec(&[(1, Op::Write, "x"), (1, Op::VolatileWrite, "f"), (2, Op::Read, "x"), (2, Op::VolatileRead, "f")]);
        assert_eq!(detect_races(&e).unwrap().len(), 2);
    }

    #[test]
    fn malformed_executions() {
        let e = exec(&[(1, Op::Lock, "l"), (2, Op::Lock, "l")]);
        assert!(matches!(hb_closure(&e), Err(OracleError::MalformedExecution { index: 1, .. })));
        let e = exec(&[(1, Op::Unlock, "l")]);
        assert!(hb_closure(&e).is_err());
        let e = exec(&[(1, Op::Read, "x"), (0, Op::DefaultInit, "x")]);
        assert!(hb_closure(&e).is_err());
        let mut e = exec(&[(1, Op::Read, "x"), (1, Op::Read, "x")]);
        e.actions[1].seq = 0;
        assert!(hb_closure(&e).is_err());
        // reentrant locking by one thread is fine
        let e = exec(&[(1, Op::Lock, "l"), (1, Op::Lock, "l"), (1, Op::Unlock, "l"), (1, Op::Unlock, "l"), (2, Op::Lock, "l")]);
        assert!(hb_closure(&e).is_ok());
    }

    #[test]
    fn init_orders_first_actions() {
        let e = exec(&[(0, Op::FinalInit, "k"), (1, Op::Read, "k"), (2, Op::Read, "k")]);
        let hb = hb_closure(&e).unwrap();
        assert!(hb.ordered(0, 1) && hb.ordered(0, 2));
        assert!(detect_races(&e).unwrap().is_empty());
    }

    #[test]
    fn op_keywords_round_trip() {
        for op in Op::ALL {
            assert_eq!(Op::from_keyword(op.keyword()), Some(op));
        }
    }
}
