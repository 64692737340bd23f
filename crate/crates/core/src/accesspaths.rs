//! Which expressions of which methods lead to the execution of an exposed
//! field access, following calls between methods of the same class.

use std::collections::BTreeSet;

use crate::classmodel::{Callable, ClassModel};
use crate::frontend::{NodeId, Span, Visibility};

/// Method `method` executes `access` by evaluating `expr`: either the access
/// itself or a call that leads to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccessPathFact {
    /// Index into `ClassDecl::methods`.
    pub method: usize,
    pub expr: NodeId,
    pub expr_span: Span,
    pub is_call: bool,
    /// Index into `ClassModel::accesses`.
    pub access: usize,
}

#[derive(Debug, Clone, Default)]
pub struct AccessPaths {
    /// Sorted.
    pub facts: Vec<AccessPathFact>,
    /// `by_access[a]` holds indices into `facts` for access `a`.
    by_access: Vec<Vec<usize>>,
}

impl AccessPaths {
    pub fn facts_for(&self, access: usize) -> impl Iterator<Item = &AccessPathFact> {
        self.by_access.get(access).into_iter().flatten().map(|&i| &self.facts[i])
    }
}

/// Candidate callees of a call: same-class methods with that name and arity.
pub fn resolve_call(cm: &ClassModel<'_>, name: &str, arity: usize) -> Vec<usize> {
    cm.decl
        .methods
        .iter()
        .enumerate()
        .filter(|(_, m)| m.name == name && m.params.len() == arity)
        .map(|(i, _)| i)
        .collect()
}

/// Least fixpoint of: a method provides an exposed access it contains, and a
/// method provides every access provided by a method it calls. Constructors
/// and field initializers are not sources.
pub fn provides_access(cm: &ClassModel<'_>) -> AccessPaths {
    let n_methods = cm.decl.methods.len();
    let exposed: Vec<usize> = (0..cm.accesses.len()).filter(|&i| cm.is_exposed(&cm.accesses[i])).collect();
    let mut reach: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_methods];
    for &a in &exposed {
        if let Callable::Method(m) = cm.accesses[a].callable {
            reach[m].insert(a);
        }
    }
    let edges: Vec<(usize, Vec<usize>, usize)> = cm
        .calls
        .iter()
        .enumerate()
        .filter_map(|(ci, c)| match c.callable {
            Callable::Method(m) => Some((m, resolve_call(cm, &c.name, c.arity), ci)),
            _ => None,
        })
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for (caller, callees, _) in &edges {
            for &k in callees {
                if k == *caller {
                    continue;
                }
                let add: Vec<usize> = reach[k].difference(&reach[*caller]).copied().collect();
                if !add.is_empty() {
                    reach[*caller].extend(add);
                    changed = true;
                }
            }
        }
    }
    let mut facts = BTreeSet::new();
    for &a in &exposed {
        let acc = &cm.accesses[a];
        if let Callable::Method(m) = acc.callable {
            facts.insert(AccessPathFact { method: m, expr: acc.expr, expr_span: acc.span, is_call: false, access: a });
        }
    }
    for (caller, callees, ci) in &edges {
        let call = &cm.calls[*ci];
        for &k in callees {
            for &a in &reach[k] {
                facts.insert(AccessPathFact { method: *caller, expr: call.expr, expr_span: call.span, is_call: true, access: a });
            }
        }
    }
    let facts: Vec<AccessPathFact> = facts.into_iter().collect();
    let mut by_access = vec![Vec::new(); cm.accesses.len()];
    for (i, f) in facts.iter().enumerate() {
        by_access[f.access].push(i);
    }
    AccessPaths { facts, by_access }
}

/// Facts for `access` whose method is public.
pub fn public_access<'p>(cm: &ClassModel<'_>, paths: &'p AccessPaths, access: usize) -> Vec<&'p AccessPathFact> {
    paths.facts_for(access).filter(|f| cm.decl.methods[f.method].is_public()).collect()
}

/// Package-private and protected methods that provide access to some exposed
/// access. They are not treated as public entry points.
pub fn non_public_entry_points(cm: &ClassModel<'_>, paths: &AccessPaths) -> Vec<usize> {
    let set: BTreeSet<usize> = paths
        .facts
        .iter()
        .map(|f| f.method)
        .filter(|&m| matches!(cm.decl.methods[m].visibility(), Visibility::Package | Visibility::Protected))
        .collect();
    set.into_iter().collect()
}
