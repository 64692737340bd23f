//! Intra-method control-flow graphs and (post-)dominator trees.
//!
//! Nodes are expressions (in evaluation order), jump statements, local
//! variable declarators and a few synthetic nodes (loop heads, `try` and
//! `catch` entries, `finally` joins). `try`/`finally` is lowered with one copy
//! of the `finally` block: every way of leaving the protected region, normal
//! or through `return`/`break`/`continue`/`throw`, enters the `finally` block
//! and the jumps continue from its end. Only explicit `throw` statements
//! raise exceptions.

use std::collections::HashMap;

use thiserror::Error;

use crate::frontend::*;

pub type NodeIx = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfgNodeKind {
    Entry,
    Exit,
    Expr(NodeId),
    /// `return`, `break`, `continue`, `throw` and local variable
    /// declarators, keyed by the statement or declarator id.
    Stmt(NodeId),
    LoopHead(NodeId),
    ForUpdate(NodeId),
    TryEntry(NodeId),
    CatchEntry(NodeId),
    FinallyEntry(NodeId),
    SyncExit(NodeId),
    /// Created by [`Cfg::from_edges`].
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomError {
    #[error("node {0} is not reachable from the entry")]
    Unreachable(NodeIx),
    #[error("node {0} cannot reach the exit")]
    NoPathToExit(NodeIx),
    #[error("node {0} does not belong to the graph")]
    OutOfRange(NodeIx),
}

#[derive(Debug, Clone)]
pub struct Cfg {
    pub kinds: Vec<CfgNodeKind>,
    pub succs: Vec<Vec<NodeIx>>,
    pub preds: Vec<Vec<NodeIx>>,
    pub entry: NodeIx,
    pub exit: NodeIx,
    node_of: HashMap<NodeId, NodeIx>,
}

impl Cfg {
    pub fn build(m: &MethodDecl) -> Cfg {
        let mut b = Builder::new();
        let mut cur = vec![b.cfg.entry];
        if let Some(body) = &m.body {
            cur = b.block(body, cur);
        }
        let exit = b.cfg.exit;
        for n in cur {
            b.cfg.add_edge(n, exit);
        }
        let mut cfg = b.cfg;
        cfg.connect_stuck_loops();
        cfg
    }

    /// A graph with `n` plain nodes and the given edges. Used to test the
    /// dominator computation on arbitrary shapes.
    pub fn from_edges(n: usize, entry: NodeIx, exit: NodeIx, edges: &[(NodeIx, NodeIx)]) -> Cfg {
        let mut cfg = Cfg {
            kinds: vec![CfgNodeKind::Plain; n],
            succs: vec![Vec::new(); n],
            preds: vec![Vec::new(); n],
            entry,
            exit,
            node_of: HashMap::new(),
        };
        for &(a, b) in edges {
            cfg.add_edge(a, b);
        }
        cfg
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// The node of an expression, jump statement, declarator or loop.
    pub fn node_of(&self, id: NodeId) -> Option<NodeIx> {
        self.node_of.get(&id).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeIx, NodeIx)> + '_ {
        self.succs.iter().enumerate().flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
    }

    fn add_node(&mut self, kind: CfgNodeKind) -> NodeIx {
        self.kinds.push(kind);
        self.succs.push(Vec::new());
        self.preds.push(Vec::new());
        self.kinds.len() - 1
    }

    fn add_edge(&mut self, a: NodeIx, b: NodeIx) {
        if !self.succs[a].contains(&b) {
            self.succs[a].push(b);
            self.preds[b].push(a);
        }
    }

    pub fn reachable_from(&self, start: NodeIx, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(n) = stack.pop() {
            let next = if forward { &self.succs[n] } else { &self.preds[n] };
            for &s in next {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        seen
    }

    /// Loops without a way out (`for (;;)` without `break`) get an edge from
    /// their head to the exit so that every reachable node lies on a path to
    /// the exit.
    fn connect_stuck_loops(&mut self) {
        let reach = self.reachable_from(self.entry, true);
        let to_exit = self.reachable_from(self.exit, false);
        let stuck: Vec<NodeIx> = (0..self.len())
            .filter(|&n| reach[n] && !to_exit[n] && matches!(self.kinds[n], CfgNodeKind::LoopHead(_)))
            .collect();
        let exit = self.exit;
        for n in stuck {
            self.add_edge(n, exit);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Jump {
    Return,
    Throw,
    Break,
    Continue,
}

enum Frame {
    Loop { breaks: Vec<NodeIx>, continues: Vec<NodeIx> },
    Catch { throws: Vec<NodeIx> },
    Finally { pending: Vec<(Jump, NodeIx)> },
}

struct Builder {
    cfg: Cfg,
    frames: Vec<Frame>,
}

impl Builder {
    fn new() -> Self {
        let mut cfg = Cfg::from_edges(0, 0, 1, &[]);
        cfg.entry = cfg.add_node(CfgNodeKind::Entry);
        cfg.exit = cfg.add_node(CfgNodeKind::Exit);
        Builder { cfg, frames: Vec::new() }
    }

    fn node(&mut self, kind: CfgNodeKind, from: &[NodeIx]) -> NodeIx {
        let n = self.cfg.add_node(kind);
        for &p in from {
            self.cfg.add_edge(p, n);
        }
        match kind {
            CfgNodeKind::Expr(id) | CfgNodeKind::Stmt(id) | CfgNodeKind::LoopHead(id) => {
                self.cfg.node_of.insert(id, n);
            }
            _ => {}
        }
        n
    }

    fn block(&mut self, b: &Block, mut cur: Vec<NodeIx>) -> Vec<NodeIx> {
        for s in &b.stmts {
            cur = self.stmt(s, cur);
        }
        cur
    }

    fn stmt(&mut self, s: &Stmt, cur: Vec<NodeIx>) -> Vec<NodeIx> {
        match &s.kind {
            StmtKind::Block(b) => self.block(b, cur),
            StmtKind::Empty => cur,
            StmtKind::LocalVar { declarators, .. } => {
                let mut cur = cur;
                for d in declarators {
                    if let Some(init) = &d.init {
                        cur = self.expr(init, cur);
                    }
                    cur = vec![self.node(CfgNodeKind::Stmt(d.id), &cur)];
                }
                cur
            }
            StmtKind::Expr(e) => self.expr(e, cur),
            StmtKind::If { cond, then_branch, else_branch } => {
                let c = self.expr(cond, cur);
                let mut out = self.stmt(then_branch, c.clone());
                match else_branch {
                    Some(e) => out.extend(self.stmt(e, c)),
                    None => out.extend(c),
                }
                out
            }
            StmtKind::While { cond, body } => {
                let head = self.node(CfgNodeKind::LoopHead(s.id), &cur);
                let c = self.expr(cond, vec![head]);
                self.frames.push(Frame::Loop { breaks: Vec::new(), continues: Vec::new() });
                let end = self.stmt(body, c.clone());
                let (breaks, continues) = self.pop_loop();
                for n in end.into_iter().chain(continues) {
                    self.cfg.add_edge(n, head);
                }
                c.into_iter().chain(breaks).collect()
            }
            StmtKind::For { init, cond, update, body } => {
                let mut cur = cur;
                for i in init {
                    cur = self.stmt(i, cur);
                }
                let head = self.node(CfgNodeKind::LoopHead(s.id), &cur);
                let after_cond = match cond {
                    Some(c) => self.expr(c, vec![head]),
                    None => vec![head],
                };
                self.frames.push(Frame::Loop { breaks: Vec::new(), continues: Vec::new() });
                let end = self.stmt(body, after_cond.clone());
                let (breaks, continues) = self.pop_loop();
                let upd = self.node(CfgNodeKind::ForUpdate(s.id), &[end, continues].concat());
                let mut u = vec![upd];
                for e in update {
                    u = self.expr(e, u);
                }
                for n in u {
                    self.cfg.add_edge(n, head);
                }
                let mut out = breaks;
                if cond.is_some() {
                    out.extend(after_cond);
                }
                out
            }
            StmtKind::ForEach { var, iterable, body } => {
                let it = self.expr(iterable, cur);
                let head = self.node(CfgNodeKind::LoopHead(s.id), &it);
                let v = self.stmt(var, vec![head]);
                self.frames.push(Frame::Loop { breaks: Vec::new(), continues: Vec::new() });
                let end = self.stmt(body, v);
                let (breaks, continues) = self.pop_loop();
                for n in end.into_iter().chain(continues) {
                    self.cfg.add_edge(n, head);
                }
                std::iter::once(head).chain(breaks).collect()
            }
            StmtKind::Return(e) => {
                let cur = match e {
                    Some(e) => self.expr(e, cur),
                    None => cur,
                };
                let n = self.node(CfgNodeKind::Stmt(s.id), &cur);
                self.jump(Jump::Return, vec![n], self.frames.len());
                Vec::new()
            }
            StmtKind::Throw(e) => {
                let cur = self.expr(e, cur);
                let n = self.node(CfgNodeKind::Stmt(s.id), &cur);
                self.jump(Jump::Throw, vec![n], self.frames.len());
                Vec::new()
            }
            StmtKind::Break | StmtKind::Continue => {
                let n = self.node(CfgNodeKind::Stmt(s.id), &cur);
                let kind = if matches!(s.kind, StmtKind::Break) { Jump::Break } else { Jump::Continue };
                self.jump(kind, vec![n], self.frames.len());
                Vec::new()
            }
            StmtKind::Synchronized { lock, body } => {
                let cur = self.expr(lock, cur);
                let end = self.block(body, cur);
                vec![self.node(CfgNodeKind::SyncExit(s.id), &end)]
            }
            StmtKind::Try { body, catches, finally } => self.try_stmt(s.id, body, catches, finally.as_ref(), cur),
        }
    }

    fn pop_loop(&mut self) -> (Vec<NodeIx>, Vec<NodeIx>) {
        match self.frames.pop() {
            Some(Frame::Loop { breaks, continues }) => (breaks, continues),
            _ => unreachable!("loop frame expected"),
        }
    }

    /// Routes a jump leaving `from` through the frames below `depth`.
    fn jump(&mut self, kind: Jump, from: Vec<NodeIx>, depth: usize) {
        for i in (0..depth).rev() {
            match &mut self.frames[i] {
                Frame::Finally { pending } => {
                    pending.extend(from.iter().map(|&n| (kind, n)));
                    return;
                }
                Frame::Catch { throws } if kind == Jump::Throw => {
                    throws.extend(from);
                    return;
                }
                Frame::Loop { breaks, .. } if kind == Jump::Break => {
                    breaks.extend(from);
                    return;
                }
                Frame::Loop { continues, .. } if kind == Jump::Continue => {
                    continues.extend(from);
                    return;
                }
                _ => {}
            }
        }
        // `break`/`continue` outside a loop are rejected by javac; treat them
        // like `return`.
        let exit = self.cfg.exit;
        for n in from {
            self.cfg.add_edge(n, exit);
        }
    }

    fn try_stmt(
        &mut self,
        id: NodeId,
        body: &Block,
        catches: &[CatchClause],
        finally: Option<&Block>,
        cur: Vec<NodeIx>,
    ) -> Vec<NodeIx> {
        if finally.is_some() {
            self.frames.push(Frame::Finally { pending: Vec::new() });
        }
        let entry = self.node(CfgNodeKind::TryEntry(id), &cur);
        if !catches.is_empty() {
            self.frames.push(Frame::Catch { throws: Vec::new() });
        }
        let mut normal = self.block(body, vec![entry]);
        if !catches.is_empty() {
            let throws = match self.frames.pop() {
                Some(Frame::Catch { throws }) => throws,
                _ => unreachable!("catch frame expected"),
            };
            let mut from = vec![entry];
            from.extend(throws);
            for c in catches {
                let ce = self.node(CfgNodeKind::CatchEntry(c.id), &from);
                self.cfg.node_of.insert(c.id, ce);
                normal.extend(self.block(&c.body, vec![ce]));
            }
        }
        let Some(fin) = finally else { return normal };
        let pending = match self.frames.pop() {
            Some(Frame::Finally { pending }) => pending,
            _ => unreachable!("finally frame expected"),
        };
        let mut into = normal.clone();
        into.extend(pending.iter().map(|&(_, n)| n));
        let fe = self.node(CfgNodeKind::FinallyEntry(id), &into);
        let end = self.block(fin, vec![fe]);
        for kind in [Jump::Return, Jump::Throw, Jump::Break, Jump::Continue] {
            if pending.iter().any(|&(k, _)| k == kind) && !end.is_empty() {
                self.jump(kind, end.clone(), self.frames.len());
            }
        }
        if normal.is_empty() {
            Vec::new()
        } else {
            end
        }
    }

    fn expr(&mut self, e: &Expr, cur: Vec<NodeIx>) -> Vec<NodeIx> {
        match &e.kind {
            ExprKind::Binary { op, lhs, rhs } if op.is_short_circuit() => {
                let l = self.expr(lhs, cur);
                let r = self.expr(rhs, l.clone());
                let from: Vec<NodeIx> = l.into_iter().chain(r).collect();
                vec![self.node(CfgNodeKind::Expr(e.id), &from)]
            }
            ExprKind::Conditional { cond, then_expr, else_expr } => {
                let c = self.expr(cond, cur);
                let mut from = self.expr(then_expr, c.clone());
                from.extend(self.expr(else_expr, c));
                vec![self.node(CfgNodeKind::Expr(e.id), &from)]
            }
            ExprKind::Assign { target, value, .. } => {
                let t = target.unparen();
                let mut cur = cur;
                for c in t.children() {
                    cur = self.expr(c, cur);
                }
                cur = self.expr(value, cur);
                cur = vec![self.node(CfgNodeKind::Expr(t.id), &cur)];
                if t.id != target.id {
                    cur = vec![self.node(CfgNodeKind::Expr(target.id), &cur)];
                }
                vec![self.node(CfgNodeKind::Expr(e.id), &cur)]
            }
            _ => {
                let mut cur = cur;
                for c in e.children() {
                    cur = self.expr(c, cur);
                }
                vec![self.node(CfgNodeKind::Expr(e.id), &cur)]
            }
        }
    }
}

/// Immediate dominators and post-dominators of a [`Cfg`].
#[derive(Debug, Clone)]
pub struct DomInfo {
    pub idom: Vec<Option<NodeIx>>,
    pub ipdom: Vec<Option<NodeIx>>,
    entry: NodeIx,
    exit: NodeIx,
}

impl DomInfo {
    pub fn compute(cfg: &Cfg) -> DomInfo {
        DomInfo {
            idom: immediate_dominators(cfg.len(), cfg.entry, &cfg.succs, &cfg.preds),
            ipdom: immediate_dominators(cfg.len(), cfg.exit, &cfg.preds, &cfg.succs),
            entry: cfg.entry,
            exit: cfg.exit,
        }
    }

    /// Every path from the entry to `b` passes through `a`.
    pub fn dominates(&self, a: NodeIx, b: NodeIx) -> Result<bool, DomError> {
        tree_ancestor(&self.idom, self.entry, a, b).map_err(|n| self.err(n, DomError::Unreachable(n)))
    }

    /// Every path from `b` to the exit passes through `a`.
    pub fn post_dominates(&self, a: NodeIx, b: NodeIx) -> Result<bool, DomError> {
        tree_ancestor(&self.ipdom, self.exit, a, b).map_err(|n| self.err(n, DomError::NoPathToExit(n)))
    }

    fn err(&self, n: NodeIx, e: DomError) -> DomError {
        if n >= self.idom.len() {
            DomError::OutOfRange(n)
        } else {
            e
        }
    }
}

/// `Ok(true)` if `a` is an ancestor-or-self of `b` in the tree given by
/// `parent`. `Err(n)` names a node outside the tree.
fn tree_ancestor(parent: &[Option<NodeIx>], root: NodeIx, a: NodeIx, b: NodeIx) -> Result<bool, NodeIx> {
    let in_tree = |n: NodeIx| n < parent.len() && (n == root || parent[n].is_some());
    for n in [a, b] {
        if !in_tree(n) {
            return Err(n);
        }
    }
    let mut n = b;
    loop {
        if n == a {
            return Ok(true);
        }
        if n == root {
            return Ok(false);
        }
        n = parent[n].expect("tree node has a parent");
    }
}

/// Iterative dominator computation over reverse postorder (Cooper, Harvey
/// and Kennedy). Nodes unreachable from `root` get `None`; so does `root`.
fn immediate_dominators(n: usize, root: NodeIx, succs: &[Vec<NodeIx>], preds: &[Vec<NodeIx>]) -> Vec<Option<NodeIx>> {
    let mut idom: Vec<Option<NodeIx>> = vec![None; n];
    if root >= n {
        return idom;
    }
    // postorder numbering with an explicit stack
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut stack: Vec<(NodeIx, usize)> = vec![(root, 0)];
    visited[root] = true;
    while let Some((node, i)) = stack.pop() {
        if i < succs[node].len() {
            stack.push((node, i + 1));
            let s = succs[node][i];
            if !visited[s] {
                visited[s] = true;
                stack.push((s, 0));
            }
        } else {
            order.push(node);
        }
    }
    let mut po_num = vec![usize::MAX; n];
    for (i, &node) in order.iter().enumerate() {
        po_num[node] = i;
    }
    idom[root] = Some(root);
    let intersect = |idom: &[Option<NodeIx>], mut a: NodeIx, mut b: NodeIx| {
        while a != b {
            while po_num[a] < po_num[b] {
                a = idom[a].expect("processed node");
            }
            while po_num[b] < po_num[a] {
                b = idom[b].expect("processed node");
            }
        }
        a
    };
    let mut changed = true;
    while changed {
        changed = false;
        for &node in order.iter().rev() {
            if node == root {
                continue;
            }
            let mut new_idom: Option<NodeIx> = None;
            for &p in &preds[node] {
                if idom[p].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => p,
                    Some(cur) => intersect(&idom, p, cur),
                });
            }
            if new_idom != idom[node] {
                idom[node] = new_idom;
                changed = true;
            }
        }
    }
    idom[root] = None;
    idom
}
