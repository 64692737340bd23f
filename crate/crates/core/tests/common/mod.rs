//! Generators shared by the integration tests: random Java classes in the
//! supported subset, straight-line classes the oracle can run, random flow
//! graphs with brute-force dominance, and random well-formed executions.

#![allow(dead_code)]

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use threadlint::hboracle::{Execution, Op, ThreadId, TraceAction};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

// ---------------------------------------------------------------------------
// general Java classes

struct FieldSpec {
    name: String,
    ty: &'static str,
    kind: FieldKind,
}

#[derive(Clone, Copy, PartialEq)]
enum FieldKind {
    Int,
    Bool,
    Str,
    IntArray,
    List,
    Map,
    Lock,
    Obj,
}

struct MethodSpec {
    name: String,
    params: usize,
    returns_int: bool,
}

/// A random class of roughly `methods` methods. Uses every supported
/// statement form; the output always parses.
pub fn gen_class(r: &mut ChaCha8Rng, name: &str, methods: usize) -> String {
    let kinds = [
        (FieldKind::Int, "int"),
        (FieldKind::Int, "long"),
        (FieldKind::Bool, "boolean"),
        (FieldKind::Str, "String"),
        (FieldKind::IntArray, "int[]"),
        (FieldKind::List, "List<String>"),
        (FieldKind::Map, "ConcurrentHashMap<String, Integer>"),
        (FieldKind::Lock, "Lock"),
        (FieldKind::Obj, "Object"),
    ];
    let n_fields = r.gen_range(2..8);
    let fields: Vec<FieldSpec> = (0..n_fields)
        .map(|i| {
            let (kind, ty) = *kinds.choose(r).unwrap();
            FieldSpec { name: format!("f{i}"), ty, kind }
        })
        .collect();
    let specs: Vec<MethodSpec> = (0..methods)
        .map(|i| MethodSpec { name: format!("m{i}"), params: r.gen_range(0..3), returns_int: r.gen_bool(0.3) })
        .collect();
    let mut s = String::new();
    s.push_str("package gen.pkg;\n\nimport java.util.List;\nimport java.util.concurrent.ConcurrentHashMap;\nimport java.util.concurrent.locks.Lock;\nimport java.util.concurrent.locks.ReentrantLock;\n\n");
    if r.gen_bool(0.8) {
        s.push_str("@ThreadSafe\n");
    }
    let _ = writeln!(s, "public class {name} {{");
    for f in &fields {
        let vis = *["private ", "private ", "", "public ", "protected "].choose(r).unwrap();
        let extra = match r.gen_range(0..6) {
            0 => "final ",
            1 if f.kind != FieldKind::Lock => "volatile ",
            2 => "static ",
            _ => "",
        };
        let init = if extra == "final " || r.gen_bool(0.5) { Some(initializer(r, f.kind)) } else { None };
        match init {
            Some(i) => {
                let _ = writeln!(s, "  {vis}{extra}{} {} = {};", f.ty, f.name, i);
            }
            None => {
                let _ = writeln!(s, "  {vis}{extra}{} {};", f.ty, f.name);
            }
        }
    }
    let _ = writeln!(s, "\n  public {name}() {{\n    {} = {};\n  }}", fields[0].name, initializer(r, fields[0].kind));
    for (i, m) in specs.iter().enumerate() {
        let vis = *["public ", "public ", "private ", "", "protected "].choose(r).unwrap();
        let sync = if r.gen_bool(0.2) { "synchronized " } else { "" };
        let ret = if m.returns_int { "int" } else { "void" };
        let params: Vec<String> = (0..m.params).map(|p| format!("int p{p}")).collect();
        let _ = writeln!(s, "\n  {vis}{sync}{ret} {}({}) {{", m.name, params.join(", "));
        let mut g = BodyGen { r, fields: &fields, methods: &specs, me: i, locals: Vec::new(), next_local: 0, params: m.params, out: String::new() };
        let n = r_count(g.r);
        g.block_items(2, n);
        if m.returns_int {
            let e = g.int_expr(1);
            let _ = writeln!(g.out, "    return {e};");
        }
        s.push_str(&g.out);
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

fn r_count(r: &mut ChaCha8Rng) -> usize {
    r.gen_range(2..7)
}

fn initializer(r: &mut ChaCha8Rng, kind: FieldKind) -> String {
    match kind {
        FieldKind::Int => ["0", "1", "42", "-3"].choose(r).unwrap().to_string(),
        FieldKind::Bool => ["false", "true"].choose(r).unwrap().to_string(),
        FieldKind::Str => ["null", "\"a b\"", "\"\""].choose(r).unwrap().to_string(),
        FieldKind::IntArray => ["null", "new int[4]", "new int[] { 1, 2 }"].choose(r).unwrap().to_string(),
        FieldKind::List => ["null", "new ArrayList<>()"].choose(r).unwrap().to_string(),
        FieldKind::Map => "new ConcurrentHashMap<>()".to_string(),
        FieldKind::Lock => ["new ReentrantLock()", "null"].choose(r).unwrap().to_string(),
        FieldKind::Obj => ["new Object()", "null"].choose(r).unwrap().to_string(),
    }
}

struct BodyGen<'r, 'f> {
    r: &'r mut ChaCha8Rng,
    fields: &'f [FieldSpec],
    methods: &'f [MethodSpec],
    me: usize,
    /// Names of int locals in scope.
    locals: Vec<String>,
    next_local: usize,
    params: usize,
    out: String,
}

impl BodyGen<'_, '_> {
    fn indent(depth: usize) -> String {
        "  ".repeat(depth)
    }

    fn field_of(&mut self, kind: FieldKind) -> Option<String> {
        let c: Vec<&FieldSpec> = self.fields.iter().filter(|f| f.kind == kind).collect();
        c.choose(self.r).map(|f| {
            if self.r.gen_bool(0.3) {
                format!("this.{}", f.name)
            } else {
                f.name.clone()
            }
        })
    }

    fn int_atom(&mut self) -> String {
        match self.r.gen_range(0..5) {
            0 => self.r.gen_range(0..100).to_string(),
            1 if !self.locals.is_empty() => self.locals.choose(self.r).unwrap().clone(),
            2 if self.params > 0 => format!("p{}", self.r.gen_range(0..self.params)),
            _ => self.field_of(FieldKind::Int).unwrap_or_else(|| "7".to_string()),
        }
    }

    fn int_expr(&mut self, depth: usize) -> String {
        if depth == 0 {
            return self.int_atom();
        }
        match self.r.gen_range(0..8) {
            0 => format!("{} + {}", self.int_expr(depth - 1), self.int_expr(depth - 1)),
            1 => format!("({} * {})", self.int_expr(depth - 1), self.int_atom()),
            2 => format!("{} ? {} : {}", self.bool_expr(0), self.int_atom(), self.int_atom()),
            3 => format!("(int) {}", self.int_atom()),
            4 => match self.field_of(FieldKind::IntArray) {
                Some(a) => format!("{a}[{}]", self.int_atom()),
                None => self.int_atom(),
            },
            5 => {
                let callees: Vec<&MethodSpec> = self.methods.iter().filter(|m| m.returns_int).collect();
                match callees.choose(self.r) {
                    Some(m) => {
                        let args: Vec<String> = (0..m.params).map(|_| self.int_atom()).collect();
                        format!("{}({})", m.name, args.join(", "))
                    }
                    None => self.int_atom(),
                }
            }
            6 => format!("-{}", self.int_atom()),
            _ => self.int_atom(),
        }
    }

    fn bool_expr(&mut self, depth: usize) -> String {
        match self.r.gen_range(0..5) {
            0 if depth > 0 => format!("{} && {}", self.bool_expr(depth - 1), self.bool_expr(depth - 1)),
            1 if depth > 0 => format!("!({} || {})", self.bool_expr(depth - 1), self.bool_expr(depth - 1)),
            2 => self.field_of(FieldKind::Bool).unwrap_or_else(|| "true".to_string()),
            3 => match self.field_of(FieldKind::Obj) {
                Some(o) => format!("{o} instanceof String"),
                None => "false".to_string(),
            },
            _ => format!("{} < {}", self.int_atom(), self.int_atom()),
        }
    }

    fn block_items(&mut self, depth: usize, n: usize) {
        let scope = self.locals.len();
        for _ in 0..n {
            self.stmt(depth);
        }
        self.locals.truncate(scope);
    }

    fn stmt(&mut self, depth: usize) {
        let ind = Self::indent(depth);
        let nested = depth < 5;
        match self.r.gen_range(0..16) {
            0 | 1 => {
                let v = format!("v{}", self.next_local);
                self.next_local += 1;
                let e = self.int_expr(2);
                let _ = writeln!(self.out, "{ind}int {v} = {e};");
                self.locals.push(v);
            }
            2 | 3 => {
                if let Some(f) = self.field_of(FieldKind::Int) {
                    let e = self.int_expr(2);
                    let op = *["=", "+=", "-="].choose(self.r).unwrap();
                    let _ = writeln!(self.out, "{ind}{f} {op} {e};");
                }
            }
            4 => {
                if let Some(f) = self.field_of(FieldKind::Int) {
                    let op = *["++", "--"].choose(self.r).unwrap();
                    let _ = writeln!(self.out, "{ind}{f}{op};");
                }
            }
            5 if nested => {
                let c = self.bool_expr(1);
                let _ = writeln!(self.out, "{ind}if ({c}) {{");
                self.block_items(depth + 1, 2);
                if self.r.gen_bool(0.5) {
                    let _ = writeln!(self.out, "{ind}}} else {{");
                    self.block_items(depth + 1, 1);
                }
                let _ = writeln!(self.out, "{ind}}}");
            }
            6 if nested => {
                let c = self.bool_expr(1);
                let _ = writeln!(self.out, "{ind}while ({c}) {{");
                self.block_items(depth + 1, 2);
                if self.r.gen_bool(0.3) {
                    let _ = writeln!(self.out, "{}break;", Self::indent(depth + 1));
                }
                let _ = writeln!(self.out, "{ind}}}");
            }
            7 if nested => {
                let i = format!("i{}", self.next_local);
                self.next_local += 1;
                let bound = self.int_atom();
                let _ = writeln!(self.out, "{ind}for (int {i} = 0; {i} < {bound}; {i}++) {{");
                self.locals.push(i);
                self.block_items(depth + 1, 2);
                self.locals.pop();
                if self.r.gen_bool(0.3) {
                    let _ = writeln!(self.out, "{}continue;", Self::indent(depth + 1));
                }
                let _ = writeln!(self.out, "{ind}}}");
            }
            8 if nested => {
                let lock = self.field_of(FieldKind::Lock);
                match lock {
                    Some(l) => {
                        let _ = writeln!(self.out, "{ind}{l}.lock();\n{ind}try {{");
                        self.block_items(depth + 1, 2);
                        let _ = writeln!(self.out, "{ind}}} finally {{\n{ind}  {l}.unlock();\n{ind}}}");
                    }
                    None => {
                        let _ = writeln!(self.out, "{ind}synchronized (this) {{");
                        self.block_items(depth + 1, 2);
                        let _ = writeln!(self.out, "{ind}}}");
                    }
                }
            }
            9 if nested => {
                let _ = writeln!(self.out, "{ind}try {{");
                self.block_items(depth + 1, 2);
                if self.r.gen_bool(0.4) {
                    let _ = writeln!(self.out, "{}throw new IllegalStateException(\"bad\");", Self::indent(depth + 1));
                }
                let _ = writeln!(self.out, "{ind}}} catch (IllegalStateException | IllegalArgumentException e) {{");
                self.block_items(depth + 1, 1);
                let _ = writeln!(self.out, "{ind}}}");
            }
            10 => {
                if let Some(l) = self.field_of(FieldKind::List) {
                    let x = self.int_atom();
                    let _ = writeln!(self.out, "{ind}{l}.add(\"x\" + {x});");
                }
            }
            11 => {
                if let Some(m) = self.field_of(FieldKind::Map) {
                    let x = self.int_atom();
                    let _ = writeln!(self.out, "{ind}{m}.put(\"k\", {x});");
                }
            }
            12 => {
                let callees: Vec<usize> = (0..self.methods.len()).filter(|&i| i != self.me).collect();
                if let Some(&k) = callees.choose(self.r) {
                    let m = &self.methods[k];
                    let args: Vec<String> = (0..m.params).map(|_| self.int_atom()).collect();
                    let _ = writeln!(self.out, "{ind}{}({});", m.name, args.join(", "));
                }
            }
            13 => {
                if let Some(a) = self.field_of(FieldKind::IntArray) {
                    let (i, x) = (self.int_atom(), self.int_expr(1));
                    let _ = writeln!(self.out, "{ind}{a}[{i}] = {x};");
                }
            }
            14 if nested => {
                if let Some(o) = self.field_of(FieldKind::Obj) {
                    let _ = writeln!(self.out, "{ind}synchronized ({o}) {{");
                    self.block_items(depth + 1, 1);
                    let _ = writeln!(self.out, "{ind}}}");
                }
            }
            15 => {
                if let Some(s) = self.field_of(FieldKind::Str) {
                    let x = self.int_atom();
                    let _ = writeln!(self.out, "{ind}{s} = \"n=\" + {x} + 'c';");
                }
            }
            _ => {
                let _ = writeln!(self.out, "{ind};");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// straight-line classes for the oracle

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    None,
    LockField,
    LockTryFinally,
    SyncMethod,
    SyncThis,
    SyncObject,
    /// Lock taken by the public method around a call to a private helper.
    LockedHelper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Plain,
    PlainNonDefault,
    Volatile,
    Final,
    PackagePrivate,
}

/// A two-field class whose public methods are straight-line. `guards[i]`
/// protects the i-th public method.
pub fn gen_oracle_class(name: &str, storage: Storage, guards: &[Guard], shapes: &[usize]) -> String {
    let mut s = String::new();
    s.push_str("import java.util.concurrent.locks.Lock;\nimport java.util.concurrent.locks.ReentrantLock;\n\n@ThreadSafe\n");
    let _ = writeln!(s, "public class {name} {{");
    s.push_str("  private final Lock lock = new ReentrantLock();\n  private final Object mon = new Object();\n");
    let decl = match storage {
        Storage::Plain => "  private int a;\n",
        Storage::PlainNonDefault => "  private int a = 5;\n",
        Storage::Volatile => "  private volatile int a;\n",
        Storage::Final => "  private final int a = 5;\n",
        Storage::PackagePrivate => "  int a;\n",
    };
    s.push_str(decl);
    s.push_str("  private int b;\n");
    let writable = storage != Storage::Final;
    for (i, (&g, &shape)) in guards.iter().zip(shapes).enumerate() {
        let body: Vec<String> = match shape % 5 {
            0 if writable => vec!["int t = a;".into(), "t += 1;".into(), "a = t;".into()],
            1 => vec!["int t = a;".into(), "b = t;".into()],
            2 if writable => vec!["a = 3;".into(), "b++;".into()],
            3 => vec!["int t = b;".into(), "int u = a + t;".into()],
            _ => vec!["b += 2;".into()],
        };
        let name = format!("op{i}");
        let sync = if g == Guard::SyncMethod { "synchronized " } else { "" };
        let _ = writeln!(s, "\n  public {sync}void {name}() {{");
        let lines: Vec<String> = match g {
            Guard::None | Guard::SyncMethod => body,
            Guard::LockField => {
                let mut v = vec!["lock.lock();".to_string()];
                v.extend(body);
                v.push("lock.unlock();".into());
                v
            }
            Guard::LockTryFinally => {
                let mut v = vec!["lock.lock();".to_string(), "try {".into()];
                v.extend(body.into_iter().map(|l| format!("  {l}")));
                v.extend(["} finally {".to_string(), "  lock.unlock();".into(), "}".into()]);
                v
            }
            Guard::SyncThis | Guard::SyncObject => {
                let target = if g == Guard::SyncThis { "this" } else { "mon" };
                let mut v = vec![format!("synchronized ({target}) {{")];
                v.extend(body.into_iter().map(|l| format!("  {l}")));
                v.push("}".into());
                v
            }
            Guard::LockedHelper => vec!["lock.lock();".to_string(), format!("{name}Impl();"), "lock.unlock();".into()],
        };
        for l in lines {
            let _ = writeln!(s, "    {l}");
        }
        s.push_str("  }\n");
        if g == Guard::LockedHelper {
            let body: Vec<String> = match shape % 5 {
                0 if writable => vec!["a = a + 1;".into()],
                1 => vec!["b = a;".into()],
                _ => vec!["b++;".into()],
            };
            let _ = writeln!(s, "\n  private void {name}Impl() {{");
            for l in body {
                let _ = writeln!(s, "    {l}");
            }
            s.push_str("  }\n");
        }
    }
    s.push_str("}\n");
    s
}

/// The oracle micro-corpus: hand-picked combinations plus seeded random
/// ones.
pub fn oracle_corpus(seed: u64, random: usize) -> Vec<(String, String)> {
    use Guard::*;
    let mut out = Vec::new();
    let fixed: Vec<(Storage, Vec<Guard>, Vec<usize>)> = vec![
        (Storage::Plain, vec![None], vec![0]),
        (Storage::Plain, vec![LockField], vec![0]),
        (Storage::Plain, vec![LockField, LockField], vec![0, 1]),
        (Storage::Plain, vec![LockField, None], vec![0, 1]),
        (Storage::Plain, vec![SyncMethod, SyncThis], vec![0, 3]),
        (Storage::Plain, vec![SyncMethod, LockField], vec![2, 1]),
        (Storage::Plain, vec![SyncObject, SyncObject], vec![0, 2]),
        (Storage::Plain, vec![LockTryFinally, LockedHelper], vec![0, 0]),
        (Storage::Plain, vec![LockedHelper], vec![1]),
        (Storage::PlainNonDefault, vec![LockField], vec![3]),
        (Storage::Volatile, vec![None, None], vec![0, 1]),
        (Storage::Volatile, vec![None], vec![2]),
        (Storage::Final, vec![None, None], vec![1, 3]),
        (Storage::Final, vec![LockField, None], vec![1, 4]),
        (Storage::PackagePrivate, vec![LockField], vec![0]),
        (Storage::Plain, vec![None], vec![3]),
    ];
    for (i, (st, g, sh)) in fixed.into_iter().enumerate() {
        let name = format!("Fixed{i}");
        out.push((name.clone(), gen_oracle_class(&name, st, &g, &sh)));
    }
    let mut r = rng(seed);
    let storages = [Storage::Plain, Storage::Plain, Storage::PlainNonDefault, Storage::Volatile, Storage::Final, Storage::PackagePrivate];
    let guards = [None, LockField, LockTryFinally, SyncMethod, SyncThis, SyncObject, LockedHelper];
    for i in 0..random {
        let st = *storages.choose(&mut r).unwrap();
        let n = r.gen_range(1..=2);
        let g: Vec<Guard> = if r.gen_bool(0.5) {
            vec![*guards.choose(&mut r).unwrap(); n]
        } else {
            (0..n).map(|_| *guards.choose(&mut r).unwrap()).collect()
        };
        let sh: Vec<usize> = (0..n).map(|_| r.gen_range(0..5)).collect();
        let name = format!("Random{i}");
        out.push((name.clone(), gen_oracle_class(&name, st, &g, &sh)));
    }
    out
}

// ---------------------------------------------------------------------------
// flow graphs

/// A random graph on `n` nodes with entry 0 and exit `n - 1`; the exit has
/// no successors. Not every node need be reachable.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    // a backbone keeps most nodes connected
    for i in 0..n - 1 {
        if r.gen_bool(0.85) {
            let j = r.gen_range(i + 1..n);
            edges.push((i, j));
        }
    }
    let extra = r.gen_range(0..2 * n);
    for _ in 0..extra {
        let a = r.gen_range(0..n - 1);
        let b = r.gen_range(0..n);
        if a != b || r.gen_bool(0.2) {
            edges.push((a, b));
        }
    }
    edges.sort();
    edges.dedup();
    edges
}

/// Every simple path from `from` to `to`, by exhaustive search.
pub fn simple_paths(n: usize, edges: &[(usize, usize)], from: usize, to: usize) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in edges {
        succ[a].push(b);
    }
    let mut out = Vec::new();
    let mut path = vec![from];
    let mut on = vec![false; n];
    on[from] = true;
    fn go(succ: &[Vec<usize>], to: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        if last == to {
            out.push(path.clone());
            return;
        }
        for &s in &succ[last] {
            if !on[s] {
                on[s] = true;
                path.push(s);
                go(succ, to, path, on, out);
                path.pop();
                on[s] = false;
            }
        }
    }
    go(&succ, to, &mut path, &mut on, &mut out);
    out
}

// ---------------------------------------------------------------------------
// executions

/// A random well-formed execution of at most `max` actions: a main thread
/// initializing the fields, then two or three threads over fields `x`, `y`,
/// volatile `v` and monitors `m`, `n` with properly nested lock regions,
/// interleaved at random under mutual exclusion.
pub fn random_execution(r: &mut ChaCha8Rng, max: usize) -> Execution {
    loop {
        if let Some(e) = try_random_execution(r, max) {
            return e;
        }
    }
}

fn try_random_execution(r: &mut ChaCha8Rng, max: usize) -> Option<Execution> {
    let mut threads: Vec<Vec<(Op, &'static str)>> = Vec::new();
    let mut main = Vec::new();
    for f in ["x", "y"] {
        if r.gen_bool(0.5) {
            main.push((if r.gen_bool(0.5) { Op::DefaultInit } else { Op::FinalInit }, f));
        }
    }
    threads.push(main);
    let budget = max - threads[0].len();
    let workers = r.gen_range(2..=3);
    let per = (budget / workers).max(1);
    for _ in 0..workers {
        let len = r.gen_range(1..=per);
        let mut t = Vec::new();
        let mut held: Vec<&'static str> = Vec::new();
        while t.len() + held.len() < len {
            let choice = r.gen_range(0..9);
            match choice {
                0 | 1 => t.push((Op::Read, *["x", "y"].choose(r).unwrap())),
                2 | 3 => t.push((Op::Write, *["x", "y"].choose(r).unwrap())),
                4 => t.push((Op::VolatileRead, "v")),
                5 => t.push((Op::VolatileWrite, "v")),
                6 => {
                    let m = *["m", "n"].choose(r).unwrap();
                    if t.len() + held.len() + 2 <= len {
                        t.push((Op::Lock, m));
                        held.push(m);
                    }
                }
                7 => {
                    if let Some(m) = held.pop() {
                        t.push((Op::Unlock, m));
                    }
                }
                _ => t.push((Op::Other, "")),
            }
        }
        while let Some(m) = held.pop() {
            t.push((Op::Unlock, m));
        }
        threads.push(t);
    }
    // interleave
    let mut actions: Vec<TraceAction> = Vec::new();
    for (seq, &(op, target)) in threads[0].iter().enumerate() {
        let mut a = TraceAction::new(0, op, target);
        a.seq = seq;
        actions.push(a);
    }
    let mut pos = vec![0; threads.len()];
    let mut holder: HashMap<&str, (ThreadId, usize)> = HashMap::new();
    loop {
        let enabled: Vec<usize> = (1..threads.len())
            .filter(|&t| match threads[t].get(pos[t]) {
                None => false,
                Some(&(Op::Lock, m)) => holder.get(m).is_none_or(|&(h, c)| c == 0 || h == t),
                Some(_) => true,
            })
            .collect();
        let Some(&t) = enabled.choose(r) else { break };
        let (op, target) = threads[t][pos[t]];
        match op {
            Op::Lock => {
                let e = holder.entry(target).or_insert((t, 0));
                *e = (t, e.1 + 1);
            }
            Op::Unlock => holder.get_mut(target).unwrap().1 -= 1,
            _ => {}
        }
        let mut a = TraceAction::new(t, op, target);
        a.seq = pos[t];
        pos[t] += 1;
        actions.push(a);
    }
    let complete = (1..threads.len()).all(|t| pos[t] == threads[t].len());
    (complete && actions.len() <= max).then(|| Execution::new(actions))
}
