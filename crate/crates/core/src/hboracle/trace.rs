//! Text format for executions and programs.
//!
//! One action per line, `<thread> <op> [<target>]`, where `op` is one of
//! `read`, `write`, `vread`, `vwrite`, `lock`, `unlock`, `init-default`,
//! `init-final` or `other`. Thread 0 is the main thread. `#` starts a
//! comment; blank lines are ignored.
//!
//! ```text
//! 0 init-default cnt
//! 1 read cnt
//! 2 read cnt
//! 1 other
//! 1 write cnt
//! 2 write cnt
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Execution, Op, OracleError, ThreadId, ThreadProgram, TraceAction};

/// Largest accepted thread id.
pub const MAX_THREAD: ThreadId = 63;

/// Parses the lines as one execution, in the order given.
pub fn parse_execution(text: &str) -> Result<Execution, OracleError> {
    let mut seq: HashMap<ThreadId, usize> = HashMap::new();
    let mut actions = Vec::new();
    for (line, mut a) in parse_lines(text)? {
        let s = seq.entry(a.thread).or_insert(0);
        a.seq = *s;
        a.label = format!("line {line}");
        *s += 1;
        actions.push(a);
    }
    Ok(Execution::new(actions))
}

/// Parses the lines as per-thread programs: the order within each thread is
/// kept, the interleaving is discarded.
pub fn parse_program(text: &str) -> Result<ThreadProgram, OracleError> {
    let mut threads: Vec<Vec<TraceAction>> = Vec::new();
    for (line, mut a) in parse_lines(text)? {
        if threads.len() <= a.thread {
            threads.resize(a.thread + 1, Vec::new());
        }
        a.label = format!("line {line}");
        threads[a.thread].push(a);
    }
    Ok(ThreadProgram::new(threads))
}

fn parse_lines(text: &str) -> Result<Vec<(usize, TraceAction)>, OracleError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| OracleError::TraceSyntax { line, message };
        let words: Vec<&str> = content.split_whitespace().collect();
        let thread: ThreadId = words[0].parse().map_err(|_| err(format!("invalid thread id `{}`", words[0])))?;
        if thread > MAX_THREAD {
            return Err(err(format!("thread id {thread} exceeds {MAX_THREAD}")));
        }
        let word = words.get(1).ok_or_else(|| err("missing operation".to_string()))?;
        let op = Op::from_keyword(word).ok_or_else(|| err(format!("unknown operation `{word}`")))?;
        let target = match (op, words.get(2)) {
            (_, Some(_)) if words.len() > 3 => return Err(err("trailing text".to_string())),
            (Op::Other, None) | (Op::Other, Some(&"-")) => "",
            (_, Some(t)) => t,
            (_, None) => return Err(err(format!("`{word}` needs a target"))),
        };
        if op.is_init() && thread != 0 {
            return Err(err("only thread 0 initializes fields".to_string()));
        }
        out.push((line, TraceAction::new(thread, op, target)));
    }
    Ok(out)
}

/// Inverse of [`parse_execution`], without labels.
pub fn format_execution(e: &Execution) -> String {
    let mut s = String::new();
    for a in &e.actions {
        let _ = write!(s, "{} {}", a.thread, a.op.keyword());
        if !a.target.is_empty() {
            let _ = write!(s, " {}", a.target);
        }
        s.push('\n');
    }
    s
}
