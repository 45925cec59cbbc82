//! Flattening of a top-level type with everything declared inside it.
//!
//! Member, local and anonymous classes contribute their methods and fields to
//! the enclosing top-level class.

use super::ast::{Body, FieldDecl, MethodDecl, TypeDecl, TypeKind};

#[derive(Debug, Default)]
pub struct Folded<'a> {
    /// The top-level type first, then every type declared inside it.
    pub types: Vec<&'a TypeDecl>,
    pub methods: Vec<&'a MethodDecl>,
    pub fields: Vec<&'a FieldDecl>,
    pub inits: Vec<&'a Body>,
}

impl<'a> Folded<'a> {
    pub fn of(decl: &'a TypeDecl) -> Self {
        let mut folded = Folded::default();
        folded.visit(decl);
        folded
    }

    fn visit(&mut self, decl: &'a TypeDecl) {
        self.types.push(decl);
        self.fields.extend(&decl.fields);
        self.inits.push(&decl.init);
        for m in &decl.methods {
            self.methods.push(m);
            if let Some(body) = &m.body {
                for c in &body.classes {
                    self.visit(c);
                }
            }
        }
        for c in &decl.init.classes {
            self.visit(c);
        }
        for n in &decl.nested {
            self.visit(n);
        }
    }

    /// Method bodies followed by initializer bodies.
    pub fn bodies(&self) -> impl Iterator<Item = &'a Body> + '_ {
        self.methods
            .iter()
            .filter_map(|m| m.body.as_ref())
            .chain(self.inits.iter().copied())
    }

    pub fn declares_method(&self, name: &str, args: usize) -> bool {
        self.methods.iter().any(|m| m.name == name && m.accepts_arity(args))
    }

    /// Simple names of named types declared inside the top-level type.
    pub fn inner_type_names(&self) -> impl Iterator<Item = &'a str> + '_ {
        self.types[1..]
            .iter()
            .filter(|t| t.kind != TypeKind::Anonymous)
            .map(|t| t.name.as_str())
    }

    /// Type parameters of every folded type and method.
    pub fn type_params(&self) -> impl Iterator<Item = &'a str> + '_ {
        self.types
            .iter()
            .flat_map(|t| t.type_params.iter())
            .chain(self.methods.iter().flat_map(|m| m.type_params.iter()))
            .map(String::as_str)
    }
}
