//! Exhaustive interleaving of a [`ThreadProgram`].

use std::collections::HashMap;

use serde::Serialize;

use super::{hb_closure, races_with, Execution, Op, OracleError, ThreadId, ThreadProgram, TraceAction, MAIN_THREAD};

/// Programs with more actions than this are only enumerated with an
/// explicit bound.
pub const DEFAULT_ACTION_GUARD: usize = 16;

/// Iterator over the interleavings of the worker threads, lexicographically
/// by thread id. Each execution starts with the main thread's actions.
/// Interleavings that end with every unfinished thread blocked on a monitor
/// are produced with `deadlocked` set.
///
/// With a bound, at most `bound` executions are produced; if more exist the
/// iterator then yields one [`OracleError::BudgetExceeded`] and stops.
#[derive(Debug)]
pub struct Enumeration {
    main: Vec<TraceAction>,
    workers: Vec<Vec<TraceAction>>,
    pos: Vec<usize>,
    held: HashMap<String, (usize, usize)>,
    /// Chosen worker index per step.
    path: Vec<usize>,
    /// Next worker index to try at the current depth.
    from: usize,
    backtrack: bool,
    bound: Option<usize>,
    produced: usize,
    finished: bool,
}

pub fn enumerate_executions(p: &ThreadProgram, bound: Option<usize>) -> Result<Enumeration, OracleError> {
    let actions = p.total_actions();
    if bound.is_none() && actions > DEFAULT_ACTION_GUARD {
        return Err(OracleError::TooManyActions { actions, guard: DEFAULT_ACTION_GUARD });
    }
    let main = p.threads.get(MAIN_THREAD).cloned().unwrap_or_default();
    let workers: Vec<Vec<TraceAction>> = p.threads.iter().skip(1).cloned().collect();
    // the main thread runs alone, so it only has to be balanced
    let mut probe = Execution::new(main.clone());
    probe.actions.retain(|a| matches!(a.op, Op::Lock | Op::Unlock));
    super::check_well_formed(&probe)?;
    Ok(Enumeration {
        pos: vec![0; workers.len()],
        main,
        workers,
        held: HashMap::new(),
        path: Vec::new(),
        from: 0,
        backtrack: false,
        bound,
        produced: 0,
        finished: false,
    })
}

impl Enumeration {
    fn next_action(&self, w: usize) -> Option<&TraceAction> {
        self.workers[w].get(self.pos[w])
    }

    fn enabled(&self, w: usize) -> bool {
        match self.next_action(w) {
            None => false,
            Some(a) if a.op == Op::Lock => match self.held.get(&a.target) {
                Some(&(holder, n)) => n == 0 || holder == w,
                None => true,
            },
            Some(_) => true,
        }
    }

    fn apply(&mut self, w: usize) -> Result<(), OracleError> {
        let a = &self.workers[w][self.pos[w]];
        match a.op {
            Op::Lock => {
                let e = self.held.entry(a.target.clone()).or_insert((w, 0));
                e.0 = w;
                e.1 += 1;
            }
            Op::Unlock => match self.held.get_mut(&a.target) {
                Some((holder, n)) if *holder == w && *n > 0 => *n -= 1,
                _ => {
                    return Err(OracleError::MalformedExecution {
                        index: self.main.len() + self.path.len(),
                        reason: format!("thread {} unlocks {} without holding it", a.thread, a.target),
                    })
                }
            },
            _ => {}
        }
        self.pos[w] += 1;
        self.path.push(w);
        Ok(())
    }

    fn undo(&mut self) -> Option<usize> {
        let w = self.path.pop()?;
        self.pos[w] -= 1;
        let a = &self.workers[w][self.pos[w]];
        match a.op {
            Op::Lock => {
                if let Some(e) = self.held.get_mut(&a.target) {
                    e.1 -= 1;
                }
            }
            Op::Unlock => {
                if let Some(e) = self.held.get_mut(&a.target) {
                    e.0 = w;
                    e.1 += 1;
                }
            }
            _ => {}
        }
        Some(w)
    }

    fn execution(&self, deadlocked: bool) -> Execution {
        let mut seen = vec![0; self.workers.len()];
        let mut actions = self.main.clone();
        for &w in &self.path {
            actions.push(self.workers[w][seen[w]].clone());
            seen[w] += 1;
        }
        Execution { actions, deadlocked }
    }

    /// Advances the depth-first search to the next leaf.
    fn advance(&mut self) -> Result<Option<Execution>, OracleError> {
        let n = self.workers.len();
        loop {
            if self.backtrack {
                match self.undo() {
                    Some(w) => self.from = w + 1,
                    None => return Ok(None),
                }
                self.backtrack = false;
            }
            if let Some(w) = (self.from..n).find(|&w| self.enabled(w)) {
                self.apply(w)?;
                self.from = 0;
            } else if self.from == 0 {
                // nothing is enabled at this depth: a leaf
                let done = self.pos.iter().zip(&self.workers).all(|(&p, t)| p == t.len());
                self.backtrack = true;
                return Ok(Some(self.execution(!done)));
            } else {
                self.backtrack = true;
            }
        }
    }
}

impl Iterator for Enumeration {
    type Item = Result<Execution, OracleError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        match self.advance() {
            Ok(Some(exec)) => {
                if self.bound.is_some_and(|b| self.produced >= b) {
                    self.finished = true;
                    return Some(Err(OracleError::BudgetExceeded { limit: self.bound.unwrap_or(0) }));
                }
                self.produced += 1;
                Some(Ok(exec))
            }
            Ok(None) => {
                self.finished = true;
                None
            }
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RaceReport {
    pub racy: bool,
    /// Complete executions.
    pub executions: usize,
    pub deadlocked: usize,
    pub racy_executions: usize,
    /// First racy execution in enumeration order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Execution>,
    /// Races of the witness as index pairs `(a, b)` with `a < b`.
    pub witness_races: Vec<(usize, usize)>,
}

/// Enumerates every execution and checks each for races. Deadlocked
/// prefixes are checked too.
pub fn program_races(p: &ThreadProgram, bound: Option<usize>) -> Result<RaceReport, OracleError> {
    let mut report = RaceReport::default();
    for exec in enumerate_executions(p, bound)? {
        let exec = exec?;
        if exec.deadlocked {
            report.deadlocked += 1;
        } else {
            report.executions += 1;
        }
        let hb = hb_closure(&exec)?;
        let races = races_with(&exec, &hb);
        if races.is_empty() {
            continue;
        }
        report.racy = true;
        report.racy_executions += 1;
        if report.witness.is_none() {
            report.witness_races = races.into_iter().filter(|(a, b)| a < b).collect();
            report.witness = Some(exec);
        }
    }
    Ok(report)
}

/// Threads of an execution in order of first appearance.
pub fn threads_of(e: &Execution) -> Vec<ThreadId> {
    let mut out = Vec::new();
    for a in &e.actions {
        if !out.contains(&a.thread) {
            out.push(a.thread);
        }
    }
    out
}
