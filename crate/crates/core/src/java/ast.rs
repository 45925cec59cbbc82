//! Syntax tree produced by the parser.
//!
//! Declarations are kept structurally. Method and initializer bodies are
//! reduced to the facts the metrics need (calls, decision points, name uses,
//! type uses, locals) plus any classes declared inside them.

use super::lexer::CommentSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LineSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Modifiers {
    pub public: bool,
    pub protected: bool,
    pub private: bool,
    pub is_static: bool,
    pub is_final: bool,
    pub is_abstract: bool,
    pub native: bool,
    pub default: bool,
    /// Simple names of annotations, e.g. `Test` for `@org.junit.Test`.
    pub annotations: Vec<String>,
}

impl Modifiers {
    pub fn has_annotation(&self, simple_name: &str) -> bool {
        self.annotations.iter().any(|a| a == simple_name)
    }
}

/// A type as written. `names` lists every class-type name appearing in it,
/// generic arguments included, as written (possibly qualified).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeRef {
    pub text: String,
    pub names: Vec<String>,
}

impl TypeRef {
    pub fn is_primitive(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeKind {
    Class,
    Interface,
    Enum,
    Annotation,
    /// Anonymous class body (`new T() { ... }` or an enum constant body).
    Anonymous,
}

#[derive(Debug, Clone)]
pub struct TypeDecl {
    pub kind: TypeKind,
    pub name: String,
    pub modifiers: Modifiers,
    pub type_params: Vec<String>,
    /// Superclass for classes; super-interfaces for interfaces.
    pub extends: Vec<TypeRef>,
    pub implements: Vec<TypeRef>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    /// Member types.
    pub nested: Vec<TypeDecl>,
    /// Field initializers, initializer blocks and enum constant arguments.
    pub init: Body,
    pub span: LineSpan,
}

#[derive(Debug, Clone)]
pub struct FieldDecl {
    pub name: String,
    pub ty: TypeRef,
    pub modifiers: Modifiers,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub ty: TypeRef,
    pub varargs: bool,
}

#[derive(Debug, Clone)]
pub struct MethodDecl {
    pub name: String,
    pub modifiers: Modifiers,
    pub type_params: Vec<String>,
    /// `None` for constructors.
    pub return_type: Option<TypeRef>,
    pub params: Vec<Param>,
    pub is_constructor: bool,
    pub body: Option<Body>,
    pub span: LineSpan,
}

impl MethodDecl {
    /// Whether a call with `args` arguments can bind to this method.
    pub fn accepts_arity(&self, args: usize) -> bool {
        match self.params.last() {
            Some(p) if p.varargs => args + 1 >= self.params.len(),
            _ => args == self.params.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Receiver {
    /// Unqualified call `m()`.
    None,
    This,
    Super,
    /// Any other receiver, as written (e.g. `System.out`, `list.get(…)`).
    Expr(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub receiver: Receiver,
    pub name: String,
    pub args: usize,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionKind {
    If,
    For,
    While,
    Do,
    Case,
    Catch,
    Ternary,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionPoint {
    pub kind: DecisionKind,
    pub line: usize,
}

/// A simple name used as an expression, or `this.name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameUse {
    pub name: String,
    pub this_qualified: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Body {
    pub calls: Vec<Call>,
    pub decisions: Vec<DecisionPoint>,
    pub names: Vec<NameUse>,
    /// Types of local declarations, object creations and casts.
    pub type_uses: Vec<TypeRef>,
    /// Names of locals, lambda parameters and catch parameters.
    pub locals: Vec<String>,
    /// Local and anonymous classes declared inside the body.
    pub classes: Vec<TypeDecl>,
}

#[derive(Debug, Clone)]
pub struct SyntaxTree {
    pub path: String,
    pub package: Option<String>,
    pub imports: Vec<Import>,
    pub types: Vec<TypeDecl>,
    pub comments: Vec<CommentSpan>,
    /// `code_lines[l]` is true when line `l` (1-based) holds at least one token.
    pub code_lines: Vec<bool>,
    pub line_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    pub path: String,
    pub is_static: bool,
    pub wildcard: bool,
}

impl SyntaxTree {
    pub fn qualified_name(&self, simple: &str) -> String {
        match &self.package {
            Some(p) => format!("{p}.{simple}"),
            None => simple.to_string(),
        }
    }
}
