//! Code and test-effort metrics over parsed classes.
//!
//! Every function works on a [`ClassView`]: a top-level type folded together
//! with its member, local and anonymous classes.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Body, MethodDecl, Receiver, SyntaxTree, TypeDecl};
use super::fold::Folded;
use super::index::{CorpusIndex, TypeTarget};
use crate::model::MetricId;

pub type Partial = Vec<(MetricId, f64)>;

pub struct ClassView<'a> {
    pub tree: &'a SyntaxTree,
    pub decl: &'a TypeDecl,
    pub folded: Folded<'a>,
}

impl<'a> ClassView<'a> {
    pub fn new(tree: &'a SyntaxTree, decl: &'a TypeDecl) -> Self {
        ClassView {
            tree,
            decl,
            folded: Folded::of(decl),
        }
    }

    pub fn from_index(index: &'a CorpusIndex, qualified: &str) -> Option<Self> {
        let entry = index.get(qualified)?;
        Some(Self::new(index.tree(entry), index.decl(entry)))
    }

    fn method_count(&self) -> usize {
        self.folded.methods.len()
    }
}

pub fn cyclomatic_complexity(method: &MethodDecl) -> u32 {
    1 + method.body.as_ref().map_or(0, |b| b.decisions.len() as u32)
}

fn count<T>(items: &[T], pred: impl Fn(&T) -> bool) -> f64 {
    items.iter().filter(|x| pred(x)).count() as f64
}

fn is_internal_call(view: &ClassView, receiver: &Receiver, name: &str, args: usize) -> bool {
    matches!(receiver, Receiver::None | Receiver::This) && view.folded.declares_method(name, args)
}

pub fn compute_size_metrics(view: &ClassView) -> Partial {
    let span = view.decl.span;
    let loc = (span.start..=span.end)
        .filter(|&l| view.tree.code_lines.get(l).copied().unwrap_or(false))
        .count();
    let mut comment_lines = BTreeSet::new();
    for c in &view.tree.comments {
        let lo = c.start_line.max(span.start);
        let hi = c.end_line.min(span.end);
        comment_lines.extend(lo..=hi);
    }
    let methods = &view.folded.methods;
    let fields = &view.folded.fields;
    let mut nmc = 0usize;
    let mut nmci = 0usize;
    for body in view.folded.bodies() {
        for call in &body.calls {
            nmc += 1;
            if is_internal_call(view, &call.receiver, &call.name, call.args) {
                nmci += 1;
            }
        }
    }
    vec![
        (MetricId::Loc, loc as f64),
        (MetricId::Loccom, comment_lines.len() as f64),
        (MetricId::Npm, count(methods, |m| m.modifiers.public)),
        (MetricId::Nstam, count(methods, |m| m.modifiers.is_static)),
        (MetricId::Nof, fields.len() as f64),
        (MetricId::Nstaf, count(fields, |f| f.modifiers.is_static)),
        (MetricId::Nmc, nmc as f64),
        (MetricId::Nmci, nmci as f64),
        (MetricId::Nmce, (nmc - nmci) as f64),
    ]
}

pub fn compute_complexity_metrics(view: &ClassView) -> Partial {
    let m = view.method_count();
    let wmc: u32 = view.folded.methods.iter().map(|m| cyclomatic_complexity(m)).sum();
    let amc = if m == 0 { 0.0 } else { wmc as f64 / m as f64 };
    let mut external = BTreeSet::new();
    for body in view.folded.bodies() {
        for call in &body.calls {
            if !view.folded.declares_method(&call.name, call.args) {
                external.insert((call.name.as_str(), call.args));
            }
        }
    }
    vec![
        (MetricId::Wmc, wmc as f64),
        (MetricId::Amc, amc),
        (MetricId::Rfc, (m + external.len()) as f64),
    ]
}

/// Methods an ancestor makes visible to subclasses.
fn inheritable(decl: &TypeDecl) -> impl Iterator<Item = &MethodDecl> {
    decl.methods
        .iter()
        .filter(|m| !m.is_constructor && !m.modifiers.private)
}

fn direct_bodies(decl: &TypeDecl) -> impl Iterator<Item = &Body> {
    decl.methods
        .iter()
        .filter_map(|m| m.body.as_ref())
        .chain(std::iter::once(&decl.init))
}

fn overrides_any(m: &MethodDecl, ancestors: &[&TypeDecl]) -> Option<usize> {
    if m.is_constructor || m.modifiers.private {
        return None;
    }
    ancestors
        .iter()
        .position(|a| inheritable(a).any(|am| am.name == m.name && am.params.len() == m.params.len()))
}

pub fn compute_inheritance_metrics(view: &ClassView, qualified: &str, index: &CorpusIndex) -> Partial {
    let (ancestors, external_root) = index.ancestors(qualified);
    let dit = ancestors.len() + usize::from(external_root);
    let noc = index.children(qualified).count();

    let declared = view.decl.methods.len();
    let mut seen: BTreeSet<(&str, usize)> = view
        .decl
        .methods
        .iter()
        .filter(|m| !m.is_constructor)
        .map(|m| (m.name.as_str(), m.params.len()))
        .collect();
    let mut inherited = 0usize;
    for a in &ancestors {
        for m in inheritable(index.decl(a)) {
            if seen.insert((m.name.as_str(), m.params.len())) {
                inherited += 1;
            }
        }
    }
    let mfa = if ancestors.is_empty() || inherited + declared == 0 {
        0.0
    } else {
        inherited as f64 / (inherited + declared) as f64
    };
    vec![
        (MetricId::Dit, dit as f64),
        (MetricId::Noc, noc as f64),
        (MetricId::Mfa, mfa),
    ]
}

pub fn compute_coupling_metrics(view: &ClassView, qualified: &str, index: &CorpusIndex) -> Partial {
    let entry = index.get(qualified);
    let references = entry.map(|e| &e.references);
    let ce = references.map_or(0, BTreeSet::len);
    let referencing = index.referencing(qualified);
    let mut coupled: BTreeSet<&str> = referencing.clone();
    for r in references.into_iter().flatten() {
        if let TypeTarget::Corpus(q) = r {
            if q != qualified && !index.is_test(q) {
                coupled.insert(q);
            }
        }
    }

    let (ancestor_entries, _) = index.ancestors(qualified);
    let ancestors: Vec<&TypeDecl> = ancestor_entries.iter().map(|e| index.decl(e)).collect();
    let mut ic_set = BTreeSet::new();
    let mut cbm = 0usize;
    if !ancestors.is_empty() {
        for m in &view.decl.methods {
            let overridden = overrides_any(m, &ancestors);
            let calls_super = m
                .body
                .as_ref()
                .is_some_and(|b| b.calls.iter().any(|c| c.receiver == Receiver::Super));
            if let Some(a) = overridden {
                ic_set.insert(a);
            }
            if overridden.is_some() || calls_super {
                cbm += 1;
            }
        }
        for body in direct_bodies(view.decl) {
            for call in &body.calls {
                let eligible = match call.receiver {
                    Receiver::Super => true,
                    Receiver::None | Receiver::This => !view.folded.declares_method(&call.name, call.args),
                    Receiver::Expr(_) => false,
                };
                if !eligible {
                    continue;
                }
                let owner = ancestors
                    .iter()
                    .position(|a| inheritable(a).any(|am| am.name == call.name && am.accepts_arity(call.args)));
                if let Some(a) = owner {
                    ic_set.insert(a);
                }
            }
        }
    }
    vec![
        (MetricId::Cbo, coupled.len() as f64),
        (MetricId::Ic, ic_set.len() as f64),
        (MetricId::Cbm, cbm as f64),
        (MetricId::Ca, referencing.len() as f64),
        (MetricId::Ce, ce as f64),
    ]
}

/// Fields of the folded class accessed by `method`.
fn accessed_fields<'a>(method: &MethodDecl, fields: &BTreeSet<&'a str>) -> BTreeSet<&'a str> {
    let Some(body) = &method.body else {
        return BTreeSet::new();
    };
    let shadowed: BTreeSet<&str> = body
        .locals
        .iter()
        .map(String::as_str)
        .chain(method.params.iter().map(|p| p.name.as_str()))
        .collect();
    body.names
        .iter()
        .filter(|n| n.this_qualified || !shadowed.contains(n.name.as_str()))
        .filter_map(|n| fields.get(n.name.as_str()).copied())
        .collect()
}

pub fn compute_cohesion_metrics(view: &ClassView) -> Partial {
    let fields: BTreeSet<&str> = view.folded.fields.iter().map(|f| f.name.as_str()).collect();
    let methods = &view.folded.methods;
    let access: Vec<BTreeSet<&str>> = methods.iter().map(|m| accessed_fields(m, &fields)).collect();

    let (mut p, mut q) = (0i64, 0i64);
    for i in 0..access.len() {
        for j in i + 1..access.len() {
            if access[i].is_disjoint(&access[j]) {
                p += 1;
            } else {
                q += 1;
            }
        }
    }
    let lcom = (p - q).max(0);

    let m = methods.len() as f64;
    let a = fields.len() as f64;
    let lcom3 = if methods.len() < 2 || fields.is_empty() {
        0.0
    } else {
        let mu: usize = access.iter().map(BTreeSet::len).sum();
        (m - mu as f64 / a) / (m - 1.0)
    };

    let param_sets: Vec<BTreeSet<String>> = methods
        .iter()
        .map(|m| {
            m.params
                .iter()
                .map(|p| {
                    if p.varargs {
                        format!("{}[]", p.ty.text)
                    } else {
                        p.ty.text.clone()
                    }
                })
                .collect()
        })
        .collect();
    let union: BTreeSet<&String> = param_sets.iter().flatten().collect();
    let cam = if union.is_empty() || methods.is_empty() {
        1.0
    } else {
        let total: usize = param_sets.iter().map(BTreeSet::len).sum();
        total as f64 / (m * union.len() as f64)
    };
    vec![
        (MetricId::Lcom, lcom as f64),
        (MetricId::Lcom3, lcom3),
        (MetricId::Cam, cam),
    ]
}

pub fn compute_encapsulation_metrics(view: &ClassView) -> Partial {
    let fields = &view.folded.fields;
    let methods = &view.folded.methods;
    let hidden = count(fields, |f| f.modifiers.private || f.modifiers.protected);
    let dam = if fields.is_empty() {
        1.0
    } else {
        hidden / fields.len() as f64
    };
    vec![
        (MetricId::Dam, dam),
        (MetricId::Nprif, count(fields, |f| f.modifiers.private)),
        (MetricId::Nprim, count(methods, |m| m.modifiers.private)),
        (MetricId::Nprom, count(methods, |m| m.modifiers.protected)),
    ]
}

pub fn compute_test_effort_metrics(view: &ClassView) -> Partial {
    let size: BTreeMap<MetricId, f64> = compute_size_metrics(view).into_iter().collect();
    let complexity: BTreeMap<MetricId, f64> = compute_complexity_metrics(view).into_iter().collect();
    let tests = count(&view.folded.methods, |m| {
        m.modifiers.has_annotation("Test") || m.name.starts_with("test")
    });
    let asserts = view
        .folded
        .bodies()
        .flat_map(|b| &b.calls)
        .filter(|c| c.name.starts_with("assert") || c.name == "fail")
        .count();
    vec![
        (MetricId::TLoc, size[&MetricId::Loc]),
        (MetricId::TNot, tests),
        (MetricId::TNoa, asserts as f64),
        (MetricId::TNmc, size[&MetricId::Nmc]),
        (MetricId::TWmc, complexity[&MetricId::Wmc]),
        (MetricId::TAmc, complexity[&MetricId::Amc]),
    ]
}

/// All source-derived code metrics (everything but NBI) for a corpus class.
pub fn code_metrics(index: &CorpusIndex, qualified: &str) -> Option<BTreeMap<MetricId, f64>> {
    let view = ClassView::from_index(index, qualified)?;
    let mut out = BTreeMap::new();
    out.extend(compute_size_metrics(&view));
    out.extend(compute_complexity_metrics(&view));
    out.extend(compute_inheritance_metrics(&view, qualified, index));
    out.extend(compute_coupling_metrics(&view, qualified, index));
    out.extend(compute_cohesion_metrics(&view));
    out.extend(compute_encapsulation_metrics(&view));
    Some(out)
}
