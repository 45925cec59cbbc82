//! Corpus-wide class index: name resolution, parent relation and the
//! reference graph used by the inheritance and coupling metrics.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{SyntaxTree, TypeDecl, TypeKind, TypeRef};
use super::fold::Folded;
use crate::error::{Error, Result};

/// A resolved type name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeTarget {
    /// Qualified name of a corpus class.
    Corpus(String),
    /// Simple name of a type outside the corpus.
    External(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parent {
    None,
    Corpus(String),
    External(String),
}

#[derive(Debug, Clone)]
pub struct ClassEntry {
    pub qualified: String,
    pub tree: usize,
    pub type_index: usize,
    pub parent: Parent,
    /// Distinct type names referenced by field, parameter, return, local,
    /// creation and cast types, minus primitives, the class itself, its
    /// inner types and type parameters.
    pub references: BTreeSet<TypeTarget>,
}

#[derive(Debug)]
pub struct CorpusIndex {
    pub trees: Vec<SyntaxTree>,
    classes: BTreeMap<String, ClassEntry>,
    referenced_by: BTreeMap<String, BTreeSet<String>>,
    tests: BTreeSet<String>,
}

/// Resolves written type names in the context of one file.
struct Resolver<'a> {
    tree: &'a SyntaxTree,
    corpus: &'a BTreeSet<String>,
    by_simple: &'a BTreeMap<String, Vec<String>>,
}

impl Resolver<'_> {
    fn resolve(&self, written: &str) -> TypeTarget {
        if self.corpus.contains(written) {
            return TypeTarget::Corpus(written.to_string());
        }
        if let Some((head, _)) = written.split_once('.') {
            // `Outer.Inner` refers to (a member of) `Outer` when `Outer` resolves.
            if let TypeTarget::Corpus(q) = self.resolve_simple(head) {
                return TypeTarget::Corpus(q);
            }
            // `pkg.Outer.Inner` with a qualified corpus prefix.
            let mut prefix = written;
            while let Some((p, _)) = prefix.rsplit_once('.') {
                if self.corpus.contains(p) {
                    return TypeTarget::Corpus(p.to_string());
                }
                prefix = p;
            }
            let simple = written.rsplit('.').next().unwrap_or(written);
            return TypeTarget::External(simple.to_string());
        }
        self.resolve_simple(written)
    }

    fn resolve_simple(&self, simple: &str) -> TypeTarget {
        for import in self.tree.imports.iter().filter(|i| !i.wildcard && !i.is_static) {
            if import.path.rsplit('.').next() == Some(simple) {
                return if self.corpus.contains(&import.path) {
                    TypeTarget::Corpus(import.path.clone())
                } else {
                    TypeTarget::External(simple.to_string())
                };
            }
        }
        let same_package = self.tree.qualified_name(simple);
        if self.corpus.contains(&same_package) {
            return TypeTarget::Corpus(same_package);
        }
        for import in self.tree.imports.iter().filter(|i| i.wildcard && !i.is_static) {
            let candidate = format!("{}.{simple}", import.path);
            if self.corpus.contains(&candidate) {
                return TypeTarget::Corpus(candidate);
            }
        }
        match self.by_simple.get(simple).map(Vec::as_slice) {
            Some([only]) => TypeTarget::Corpus(only.clone()),
            _ => TypeTarget::External(simple.to_string()),
        }
    }
}

fn is_object(written: &str) -> bool {
    written == "Object" || written == "java.lang.Object"
}

/// Indexes every top-level type of `trees`.
pub fn build_corpus_index(mut trees: Vec<SyntaxTree>) -> Result<CorpusIndex> {
    // Order-independence: work on trees sorted by path.
    trees.sort_by(|a, b| a.path.cmp(&b.path));

    let mut located: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (ti, tree) in trees.iter().enumerate() {
        for (di, decl) in tree.types.iter().enumerate() {
            let q = tree.qualified_name(&decl.name);
            if located.insert(q.clone(), (ti, di)).is_some() {
                return Err(Error::DuplicateClass(q));
            }
        }
    }
    let corpus: BTreeSet<String> = located.keys().cloned().collect();
    let mut by_simple: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for q in &corpus {
        let simple = q.rsplit('.').next().unwrap_or(q).to_string();
        by_simple.entry(simple).or_default().push(q.clone());
    }

    let mut classes = BTreeMap::new();
    for (q, &(ti, di)) in &located {
        let tree = &trees[ti];
        let decl = &tree.types[di];
        let resolver = Resolver {
            tree,
            corpus: &corpus,
            by_simple: &by_simple,
        };
        let parent = match (decl.kind, decl.extends.first()) {
            (TypeKind::Class, Some(sup)) => {
                let written = sup.names.first().map(String::as_str).unwrap_or("");
                if is_object(written) {
                    Parent::None
                } else {
                    match resolver.resolve(written) {
                        TypeTarget::Corpus(p) if &p != q => Parent::Corpus(p),
                        TypeTarget::Corpus(p) => return Err(Error::CyclicHierarchy(vec![p.clone(), p])),
                        TypeTarget::External(s) => Parent::External(s),
                    }
                }
            }
            _ => Parent::None,
        };
        let references = collect_references(decl, q, &resolver);
        classes.insert(
            q.clone(),
            ClassEntry {
                qualified: q.clone(),
                tree: ti,
                type_index: di,
                parent,
                references,
            },
        );
    }

    check_acyclic(&classes)?;

    let mut referenced_by: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (q, entry) in &classes {
        for r in &entry.references {
            if let TypeTarget::Corpus(target) = r {
                referenced_by.entry(target.clone()).or_default().insert(q.clone());
            }
        }
    }

    Ok(CorpusIndex {
        trees,
        classes,
        referenced_by,
        tests: BTreeSet::new(),
    })
}

fn collect_references(decl: &TypeDecl, self_name: &str, resolver: &Resolver) -> BTreeSet<TypeTarget> {
    let folded = Folded::of(decl);
    let excluded: BTreeSet<&str> = folded
        .inner_type_names()
        .chain(folded.type_params())
        .chain(std::iter::once(decl.name.as_str()))
        .collect();

    let mut type_refs: Vec<&TypeRef> = Vec::new();
    type_refs.extend(folded.fields.iter().map(|f| &f.ty));
    for m in &folded.methods {
        type_refs.extend(m.params.iter().map(|p| &p.ty));
        type_refs.extend(m.return_type.iter());
    }
    for body in folded.bodies() {
        type_refs.extend(body.type_uses.iter());
    }

    let mut out = BTreeSet::new();
    for ty in type_refs {
        for written in &ty.names {
            let head = written.split('.').next().unwrap_or(written);
            if written == "var" || excluded.contains(head) {
                continue;
            }
            let target = resolver.resolve(written);
            if target != TypeTarget::Corpus(self_name.to_string()) {
                out.insert(target);
            }
        }
    }
    out
}

fn check_acyclic(classes: &BTreeMap<String, ClassEntry>) -> Result<()> {
    let mut done: BTreeSet<&str> = BTreeSet::new();
    for start in classes.keys() {
        let mut path: Vec<&str> = Vec::new();
        let mut cur = start.as_str();
        loop {
            if done.contains(cur) {
                break;
            }
            if let Some(pos) = path.iter().position(|&p| p == cur) {
                let mut cycle: Vec<String> = path[pos..].iter().map(|s| s.to_string()).collect();
                cycle.push(cur.to_string());
                return Err(Error::CyclicHierarchy(cycle));
            }
            path.push(cur);
            match classes.get(cur).map(|e| &e.parent) {
                Some(Parent::Corpus(p)) => cur = p,
                _ => break,
            }
        }
        done.extend(path);
    }
    Ok(())
}

impl CorpusIndex {
    pub fn classes(&self) -> impl Iterator<Item = &ClassEntry> {
        self.classes.values()
    }

    pub fn get(&self, qualified: &str) -> Option<&ClassEntry> {
        self.classes.get(qualified)
    }

    pub fn decl(&self, entry: &ClassEntry) -> &TypeDecl {
        &self.trees[entry.tree].types[entry.type_index]
    }

    pub fn tree(&self, entry: &ClassEntry) -> &SyntaxTree {
        &self.trees[entry.tree]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Marks classes as tests. Tests are left out of NOC, Ca and CBO.
    pub fn set_test_classes(&mut self, tests: impl IntoIterator<Item = String>) {
        self.tests = tests.into_iter().collect();
    }

    pub fn is_test(&self, qualified: &str) -> bool {
        self.tests.contains(qualified)
    }

    /// Corpus ancestors, nearest first, plus whether the chain ends in an external class.
    pub fn ancestors(&self, qualified: &str) -> (Vec<&ClassEntry>, bool) {
        let mut out = Vec::new();
        let mut cur = self.classes.get(qualified);
        while let Some(entry) = cur {
            match &entry.parent {
                Parent::Corpus(p) => {
                    cur = self.classes.get(p);
                    out.extend(cur);
                }
                Parent::External(_) => return (out, true),
                Parent::None => break,
            }
        }
        (out, false)
    }

    pub fn children(&self, qualified: &str) -> impl Iterator<Item = &ClassEntry> + '_ {
        let target = Parent::Corpus(qualified.to_string());
        self.classes
            .values()
            .filter(move |e| e.parent == target && !self.tests.contains(&e.qualified))
    }

    /// Non-test corpus classes that reference `qualified`.
    pub fn referencing(&self, qualified: &str) -> BTreeSet<&str> {
        self.referenced_by
            .get(qualified)
            .into_iter()
            .flatten()
            .filter(|c| !self.tests.contains(*c) && c.as_str() != qualified)
            .map(String::as_str)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::java::parse_source;

    fn index(files: &[(&str, &str)]) -> Result<CorpusIndex> {
        let trees = files.iter().map(|(p, s)| parse_source(s, p).unwrap()).collect();
        build_corpus_index(trees)
    }

    #[test]
    fn resolves_corpus_and_external_parents() {
        let idx = index(&[
            ("a/A.java", "package a; class A extends B {}"),
            ("a/B.java", "package a; class B extends java.util.ArrayList<String> {}"),
            ("a/C.java", "package a; class C extends Object {}"),
        ])
        .unwrap();
        assert_eq!(idx.get("a.A").unwrap().parent, Parent::Corpus("a.B".into()));
        assert_eq!(idx.get("a.B").unwrap().parent, Parent::External("ArrayList".into()));
        assert_eq!(idx.get("a.C").unwrap().parent, Parent::None);
        let (anc, external) = idx.ancestors("a.A");
        assert_eq!(anc.len(), 1);
        assert!(external);
    }

    #[test]
    fn duplicate_and_cycle() {
        assert!(matches!(
            index(&[("x/A.java", "class A {}"), ("y/A.java", "class A {}")]),
            Err(Error::DuplicateClass(n)) if n == "A"
        ));
        assert!(matches!(
            index(&[("A.java", "class A extends B {}"), ("B.java", "class B extends A {}")]),
            Err(Error::CyclicHierarchy(_))
        ));
    }

    #[test]
    fn imports_and_references() {
        let idx = index(&[
            ("p/A.java", "package p; import q.B; import r.*; class A { B b; C c; A self; java.util.List<D> ds; <T> T id(T t) { return t; } }"),
            ("q/B.java", "package q; public class B {}"),
            ("r/C.java", "package r; public class C {}"),
            ("s/D.java", "package s; public class D {}"),
        ])
        .unwrap();
        let refs = &idx.get("p.A").unwrap().references;
        let expected: BTreeSet<TypeTarget> = [
            TypeTarget::Corpus("q.B".into()),
            TypeTarget::Corpus("r.C".into()),
            TypeTarget::Corpus("s.D".into()),
            TypeTarget::External("List".into()),
        ]
        .into_iter()
        .collect();
        assert_eq!(refs, &expected);
        assert_eq!(idx.referencing("q.B"), ["p.A"].into_iter().collect());
    }

    #[test]
    fn order_independent() {
        let files = [
            ("A.java", "class A extends B { C c; }"),
            ("B.java", "class B { A a; }"),
            ("C.java", "class C extends B {}"),
        ];
        let mut rev = files;
        rev.reverse();
        let a = index(&files).unwrap();
        let b = index(&rev).unwrap();
        for (x, y) in a.classes().zip(b.classes()) {
            assert_eq!(x.qualified, y.qualified);
            assert_eq!(x.parent, y.parent);
            assert_eq!(x.references, y.references);
        }
    }
}
