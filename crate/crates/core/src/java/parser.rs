//! Recursive-descent parser for a Java 8 subset.
//!
//! Declarations are parsed structurally. Statements and expressions are
//! parsed fully (so decision points, calls and casts are located exactly)
//! but only reduced facts are kept; see [`Body`].

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use crate::error::{Error, Result};

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double"];

const RESERVED: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

fn is_primitive(s: &str) -> bool {
    PRIMITIVES.contains(&s)
}

/// Parses one compilation unit.
pub fn parse_source(text: &str, path: &str) -> Result<SyntaxTree> {
    let lexed = tokenize(text, path)?;
    let mut code_lines = vec![false; lexed.line_count + 2];
    for t in &lexed.tokens {
        if t.kind == TokenKind::Eof {
            continue;
        }
        for l in t.line..=t.end_line {
            if l < code_lines.len() {
                code_lines[l] = true;
            }
        }
    }
    let mut parser = Parser {
        toks: lexed.tokens,
        pos: 0,
        path,
        bodies: vec![Body::default()],
    };
    let (package, imports, types) = parser.compilation_unit()?;
    Ok(SyntaxTree {
        path: path.to_string(),
        package,
        imports,
        types,
        comments: lexed.comments,
        code_lines,
        line_count: lexed.line_count,
    })
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    path: &'a str,
    /// Collectors for the bodies currently being parsed; the bottom one is a sink.
    bodies: Vec<Body>,
}

impl<'a> Parser<'a> {
    // ---- token helpers ----

    fn peek(&self, k: usize) -> &Token {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i]
    }

    fn tok(&self) -> &Token {
        self.peek(0)
    }

    fn tok_at(&self, i: usize) -> &Token {
        &self.toks[i.min(self.toks.len() - 1)]
    }

    fn at(&self, text: &str) -> bool {
        self.tok().is(text)
    }

    fn at_eof(&self) -> bool {
        self.tok().kind == TokenKind::Eof
    }

    fn advance(&mut self) -> Token {
        let t = self.tok().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error_at(&self, t: &Token, message: impl Into<String>) -> Error {
        Error::Parse {
            file: self.path.to_string(),
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        self.error_at(self.tok(), message)
    }

    fn expect(&mut self, text: &str) -> Result<Token> {
        if self.at(text) {
            Ok(self.advance())
        } else {
            let found = self.describe();
            Err(self.error(format!("expected `{text}`, found {found}")))
        }
    }

    fn describe(&self) -> String {
        match self.tok().kind {
            TokenKind::Eof => "end of file".to_string(),
            _ => format!("`{}`", self.tok().text),
        }
    }

    fn is_ident_tok(t: &Token) -> bool {
        t.kind == TokenKind::Ident && !is_reserved(&t.text)
    }

    fn ident(&mut self) -> Result<String> {
        if Self::is_ident_tok(self.tok()) {
            Ok(self.advance().text)
        } else {
            let found = self.describe();
            Err(self.error(format!("expected identifier, found {found}")))
        }
    }

    fn prev_line(&self) -> usize {
        self.toks[self.pos.saturating_sub(1)].end_line
    }

    /// True when the token at `i` is immediately followed (no whitespace) by the next.
    fn adjacent(&self, i: usize) -> bool {
        self.tok_at(i).end == self.tok_at(i + 1).start
    }

    fn body(&mut self) -> &mut Body {
        self.bodies.last_mut().expect("sink body")
    }

    fn decision(&mut self, kind: DecisionKind, line: usize) {
        self.body().decisions.push(DecisionPoint { kind, line });
    }

    // ---- compilation unit ----

    fn compilation_unit(&mut self) -> Result<(Option<String>, Vec<Import>, Vec<TypeDecl>)> {
        let mut package = None;
        let save = self.pos;
        self.skip_annotations()?;
        if self.eat("package") {
            package = Some(self.qualified_name()?);
            self.expect(";")?;
        } else {
            self.pos = save;
        }
        let mut imports = Vec::new();
        while self.at("import") {
            self.advance();
            let is_static = self.eat("static");
            let mut path = self.ident()?;
            let mut wildcard = false;
            while self.eat(".") {
                if self.eat("*") {
                    wildcard = true;
                    break;
                }
                path.push('.');
                path.push_str(&self.ident()?);
            }
            self.expect(";")?;
            imports.push(Import {
                path,
                is_static,
                wildcard,
            });
        }
        let mut types = Vec::new();
        while !self.at_eof() {
            if self.eat(";") {
                continue;
            }
            let start = self.tok().line;
            let modifiers = self.modifiers()?;
            types.push(self.type_decl(modifiers, start)?);
        }
        Ok((package, imports, types))
    }

    fn qualified_name(&mut self) -> Result<String> {
        let mut name = self.ident()?;
        while self.at(".") && Self::is_ident_tok(self.peek(1)) {
            self.advance();
            name.push('.');
            name.push_str(&self.advance().text);
        }
        Ok(name)
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> Result<()> {
        let start = self.expect(open)?;
        let mut depth = 1;
        while depth > 0 {
            if self.at_eof() {
                return Err(self.error_at(&start, format!("unbalanced `{open}`")));
            }
            let t = self.advance();
            if t.is(open) {
                depth += 1;
            } else if t.is(close) {
                depth -= 1;
            }
        }
        Ok(())
    }

    /// Skips annotations, returning their simple names.
    fn skip_annotations(&mut self) -> Result<Vec<String>> {
        let mut names = Vec::new();
        while self.at("@") && !self.peek(1).is("interface") {
            self.advance();
            let name = self.qualified_name()?;
            names.push(name.rsplit('.').next().unwrap_or(&name).to_string());
            if self.at("(") {
                self.skip_balanced("(", ")")?;
            }
        }
        Ok(names)
    }

    fn modifiers(&mut self) -> Result<Modifiers> {
        let mut m = Modifiers::default();
        loop {
            if self.at("@") && !self.peek(1).is("interface") {
                let names = self.skip_annotations()?;
                m.annotations.extend(names);
                continue;
            }
            let t = self.tok();
            if t.kind != TokenKind::Ident {
                break;
            }
            match t.text.as_str() {
                "public" => m.public = true,
                "protected" => m.protected = true,
                "private" => m.private = true,
                "static" => m.is_static = true,
                "final" => m.is_final = true,
                "abstract" => m.is_abstract = true,
                "native" => m.native = true,
                "default" => m.default = true,
                "synchronized" if !self.peek(1).is("(") => {}
                "transient" | "volatile" | "strictfp" => {}
                "sealed" if Self::is_ident_tok(self.peek(1)) => {}
                _ => break,
            }
            self.advance();
        }
        Ok(m)
    }

    // ---- declarations ----

    fn type_decl(&mut self, modifiers: Modifiers, start: usize) -> Result<TypeDecl> {
        let kind = if self.eat("class") {
            TypeKind::Class
        } else if self.eat("interface") {
            TypeKind::Interface
        } else if self.eat("enum") {
            TypeKind::Enum
        } else if self.at("@") && self.peek(1).is("interface") {
            self.advance();
            self.advance();
            TypeKind::Annotation
        } else {
            let found = self.describe();
            return Err(self.error(format!("expected type declaration, found {found}")));
        };
        let name = self.ident()?;
        let type_params = if self.at("<") { self.type_params()? } else { Vec::new() };
        let mut extends = Vec::new();
        let mut implements = Vec::new();
        if self.eat("extends") {
            extends = self.type_list()?;
        }
        if self.eat("implements") {
            implements = self.type_list()?;
        }
        if self.tok().text == "permits" && self.tok().kind == TokenKind::Ident {
            self.advance();
            self.type_list()?;
        }
        let mut decl = TypeDecl {
            kind,
            name,
            modifiers,
            type_params,
            extends,
            implements,
            fields: Vec::new(),
            methods: Vec::new(),
            nested: Vec::new(),
            init: Body::default(),
            span: LineSpan { start, end: start },
        };
        self.class_body(&mut decl)?;
        decl.span.end = self.prev_line();
        Ok(decl)
    }

    fn type_list(&mut self) -> Result<Vec<TypeRef>> {
        let mut list = vec![self.parse_type()?];
        while self.eat(",") {
            list.push(self.parse_type()?);
        }
        Ok(list)
    }

    fn type_params(&mut self) -> Result<Vec<String>> {
        self.expect("<")?;
        let mut names = Vec::new();
        loop {
            self.skip_annotations()?;
            names.push(self.ident()?);
            if self.eat("extends") {
                self.parse_type()?;
                while self.eat("&") {
                    self.parse_type()?;
                }
            }
            if self.eat(",") {
                continue;
            }
            self.expect(">")?;
            return Ok(names);
        }
    }

    fn class_body(&mut self, decl: &mut TypeDecl) -> Result<()> {
        self.expect("{")?;
        if decl.kind == TypeKind::Enum {
            self.enum_constants(decl)?;
        }
        while !self.eat("}") {
            if self.at_eof() {
                return Err(self.error("unexpected end of file in class body"));
            }
            self.member(decl)?;
        }
        Ok(())
    }

    fn enum_constants(&mut self, decl: &mut TypeDecl) -> Result<()> {
        loop {
            if self.eat(";") || self.at("}") {
                return Ok(());
            }
            self.skip_annotations()?;
            let line = self.tok().line;
            self.ident()?;
            self.bodies.push(std::mem::take(&mut decl.init));
            if self.at("(") {
                self.arguments()?;
            }
            if self.at("{") {
                let anon = self.anonymous_body(TypeRef::default(), line)?;
                self.body().classes.push(anon);
            }
            decl.init = self.bodies.pop().expect("pushed");
            if !self.eat(",") {
                if self.eat(";") || self.at("}") {
                    return Ok(());
                }
                return Err(self.error("expected `,`, `;` or `}` after enum constant"));
            }
        }
    }

    fn anonymous_body(&mut self, base: TypeRef, line: usize) -> Result<TypeDecl> {
        let mut decl = TypeDecl {
            kind: TypeKind::Anonymous,
            name: String::new(),
            modifiers: Modifiers::default(),
            type_params: Vec::new(),
            extends: if base.names.is_empty() { Vec::new() } else { vec![base] },
            implements: Vec::new(),
            fields: Vec::new(),
            methods: Vec::new(),
            nested: Vec::new(),
            init: Body::default(),
            span: LineSpan { start: line, end: line },
        };
        self.class_body(&mut decl)?;
        decl.span.end = self.prev_line();
        Ok(decl)
    }

    fn member(&mut self, decl: &mut TypeDecl) -> Result<()> {
        if self.eat(";") {
            return Ok(());
        }
        let start = self.tok().line;
        let mut modifiers = self.modifiers()?;
        if self.at("{") {
            self.bodies.push(std::mem::take(&mut decl.init));
            let r = self.block();
            decl.init = self.bodies.pop().expect("pushed");
            return r;
        }
        if self.at("class") || self.at("interface") || self.at("enum") || (self.at("@") && self.peek(1).is("interface"))
        {
            let nested = self.type_decl(modifiers, start)?;
            decl.nested.push(nested);
            return Ok(());
        }
        let in_interface = matches!(decl.kind, TypeKind::Interface | TypeKind::Annotation);
        let type_params = if self.at("<") { self.type_params()? } else { Vec::new() };
        if self.tok().text == decl.name && self.peek(1).is("(") && decl.kind != TypeKind::Anonymous {
            let name = self.advance().text;
            let method = self.method_rest(name, modifiers, type_params, None, start)?;
            decl.methods.push(method);
            return Ok(());
        }
        let ty = self.parse_type()?;
        let name = self.ident()?;
        if self.at("(") {
            if in_interface {
                if !modifiers.private {
                    modifiers.public = true;
                }
                if !modifiers.default && !modifiers.is_static && !modifiers.private {
                    modifiers.is_abstract = true;
                }
            }
            let method = self.method_rest(name, modifiers, type_params, Some(ty), start)?;
            decl.methods.push(method);
            return Ok(());
        }
        if in_interface {
            modifiers.public = true;
            modifiers.is_static = true;
            modifiers.is_final = true;
        }
        let mut name = name;
        let mut line = start;
        loop {
            while self.at("[") && self.peek(1).is("]") {
                self.advance();
                self.advance();
            }
            if self.eat("=") {
                self.bodies.push(std::mem::take(&mut decl.init));
                let r = self.variable_initializer();
                decl.init = self.bodies.pop().expect("pushed");
                r?;
            }
            decl.fields.push(FieldDecl {
                name,
                ty: ty.clone(),
                modifiers: modifiers.clone(),
                line,
            });
            if self.eat(",") {
                line = self.tok().line;
                name = self.ident()?;
                continue;
            }
            self.expect(";")?;
            return Ok(());
        }
    }

    fn method_rest(
        &mut self,
        name: String,
        modifiers: Modifiers,
        type_params: Vec<String>,
        return_type: Option<TypeRef>,
        start: usize,
    ) -> Result<MethodDecl> {
        let is_constructor = return_type.is_none();
        let params = self.formal_params()?;
        while self.at("[") && self.peek(1).is("]") {
            self.advance();
            self.advance();
        }
        if self.eat("throws") {
            self.type_list()?;
        }
        let body = if self.at("{") {
            self.bodies.push(Body::default());
            let r = self.block();
            let body = self.bodies.pop().expect("pushed");
            r?;
            Some(body)
        } else {
            if self.eat("default") {
                self.bodies.push(Body::default());
                let r = self.element_value();
                self.bodies.pop();
                r?;
            }
            self.expect(";")?;
            None
        };
        Ok(MethodDecl {
            name,
            modifiers,
            type_params,
            return_type,
            params,
            is_constructor,
            body,
            span: LineSpan {
                start,
                end: self.prev_line(),
            },
        })
    }

    fn element_value(&mut self) -> Result<()> {
        if self.at("@") {
            self.skip_annotations()?;
            Ok(())
        } else if self.at("{") {
            self.array_initializer()
        } else {
            self.expression()
        }
    }

    fn formal_params(&mut self) -> Result<Vec<Param>> {
        self.expect("(")?;
        let mut params = Vec::new();
        if self.eat(")") {
            return Ok(params);
        }
        loop {
            self.modifiers()?;
            let ty = self.parse_type()?;
            let varargs = self.eat("...");
            // Receiver parameter `Foo this`.
            if self.at("this") {
                self.advance();
            } else {
                let name = self.ident()?;
                let mut ty = ty;
                while self.at("[") && self.peek(1).is("]") {
                    self.advance();
                    self.advance();
                    ty.text.push_str("[]");
                }
                params.push(Param { name, ty, varargs });
            }
            if self.eat(",") {
                continue;
            }
            self.expect(")")?;
            return Ok(params);
        }
    }

    // ---- types ----

    fn parse_type(&mut self) -> Result<TypeRef> {
        self.skip_annotations()?;
        let mut text;
        let mut names = Vec::new();
        let t = self.tok().clone();
        if t.kind == TokenKind::Ident && (is_primitive(&t.text) || t.text == "void") {
            self.advance();
            text = t.text;
        } else {
            let mut qual = self.ident()?;
            text = qual.clone();
            let mut inner = Vec::new();
            loop {
                if self.at("<") {
                    let (args_text, args_names) = self.type_args()?;
                    text.push_str(&args_text);
                    inner.extend(args_names);
                }
                if self.at(".") && (Self::is_ident_tok(self.peek(1)) || self.peek(1).is("@")) {
                    self.advance();
                    self.skip_annotations()?;
                    let id = self.ident()?;
                    qual.push('.');
                    qual.push_str(&id);
                    text.push('.');
                    text.push_str(&id);
                    continue;
                }
                break;
            }
            names.push(qual);
            names.extend(inner);
        }
        loop {
            self.skip_annotations()?;
            if self.at("[") && self.peek(1).is("]") {
                self.advance();
                self.advance();
                text.push_str("[]");
            } else {
                break;
            }
        }
        Ok(TypeRef { text, names })
    }

    /// Parses `<...>` type arguments; accepts the diamond `<>`.
    fn type_args(&mut self) -> Result<(String, Vec<String>)> {
        self.expect("<")?;
        let mut text = String::from("<");
        let mut names = Vec::new();
        if self.eat(">") {
            text.push('>');
            return Ok((text, names));
        }
        loop {
            self.skip_annotations()?;
            if self.eat("?") {
                text.push('?');
                if self.at("extends") || self.at("super") {
                    let kw = self.advance().text;
                    let bound = self.parse_type()?;
                    text.push_str(&format!(" {kw} {}", bound.text));
                    names.extend(bound.names);
                }
            } else {
                let arg = self.parse_type()?;
                text.push_str(&arg.text);
                names.extend(arg.names);
            }
            if self.eat(",") {
                text.push(',');
                continue;
            }
            self.expect(">")?;
            text.push('>');
            return Ok((text, names));
        }
    }

    // Pure lookahead: returns the index just past a type starting at `i`.
    fn scan_type(&self, mut i: usize) -> Option<usize> {
        i = self.scan_annotations(i)?;
        let t = self.tok_at(i);
        if t.kind != TokenKind::Ident {
            return None;
        }
        if is_primitive(&t.text) || t.text == "void" {
            i += 1;
        } else if !is_reserved(&t.text) {
            i += 1;
            loop {
                if self.tok_at(i).is("<") {
                    i = self.scan_type_args(i)?;
                }
                if self.tok_at(i).is(".") && Self::is_ident_tok(self.tok_at(i + 1)) {
                    i += 2;
                    continue;
                }
                break;
            }
        } else {
            return None;
        }
        while self.tok_at(i).is("[") && self.tok_at(i + 1).is("]") {
            i += 2;
        }
        Some(i)
    }

    fn scan_type_args(&self, mut i: usize) -> Option<usize> {
        i += 1;
        if self.tok_at(i).is(">") {
            return Some(i + 1);
        }
        loop {
            if self.tok_at(i).is("?") {
                i += 1;
                if self.tok_at(i).is("extends") || self.tok_at(i).is("super") {
                    i = self.scan_type(i + 1)?;
                }
            } else {
                i = self.scan_type(i)?;
            }
            while self.tok_at(i).is("&") {
                i = self.scan_type(i + 1)?;
            }
            if self.tok_at(i).is(",") {
                i += 1;
                continue;
            }
            if self.tok_at(i).is(">") {
                return Some(i + 1);
            }
            return None;
        }
    }

    fn scan_annotations(&self, mut i: usize) -> Option<usize> {
        while self.tok_at(i).is("@") && !self.tok_at(i + 1).is("interface") {
            i += 1;
            if !Self::is_ident_tok(self.tok_at(i)) {
                return None;
            }
            i += 1;
            while self.tok_at(i).is(".") && Self::is_ident_tok(self.tok_at(i + 1)) {
                i += 2;
            }
            if self.tok_at(i).is("(") {
                i = self.scan_balanced(i)?;
            }
        }
        Some(i)
    }

    /// Index just past the bracket matching the one at `i`.
    fn scan_balanced(&self, mut i: usize) -> Option<usize> {
        let open = self.tok_at(i).text.clone();
        let close = match open.as_str() {
            "(" => ")",
            "[" => "]",
            "{" => "}",
            _ => return None,
        };
        let mut depth = 0usize;
        loop {
            let t = self.tok_at(i);
            if t.kind == TokenKind::Eof {
                return None;
            }
            if t.is(&open) {
                depth += 1;
            } else if t.is(close) {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            i += 1;
        }
    }

    fn scan_modifiers(&self, mut i: usize) -> Option<usize> {
        loop {
            i = self.scan_annotations(i)?;
            if self.tok_at(i).is("final") {
                i += 1;
            } else {
                return Some(i);
            }
        }
    }

    /// Whether a local variable declaration starts here.
    fn local_decl_ahead(&self) -> bool {
        let Some(i) = self.scan_modifiers(self.pos) else {
            return false;
        };
        let Some(j) = self.scan_type(i) else {
            return false;
        };
        let name = self.tok_at(j);
        Self::is_ident_tok(name) && ["=", ";", ",", "[", ":"].iter().any(|s| self.tok_at(j + 1).is(s))
    }

    // ---- statements ----

    fn block(&mut self) -> Result<()> {
        self.expect("{")?;
        while !self.eat("}") {
            if self.at_eof() {
                return Err(self.error("unexpected end of file in block"));
            }
            self.block_statement()?;
        }
        Ok(())
    }

    fn block_statement(&mut self) -> Result<()> {
        // Local class declarations.
        let save = self.pos;
        let start = self.tok().line;
        if self.at("class")
            || self.at("interface")
            || self.at("enum")
            || self.at("abstract")
            || self.at("static")
            || ((self.at("final") || self.at("@")) && !self.local_decl_ahead())
        {
            let modifiers = self.modifiers()?;
            if self.at("class") || self.at("interface") || self.at("enum") {
                let decl = self.type_decl(modifiers, start)?;
                self.body().classes.push(decl);
                return Ok(());
            }
            self.pos = save;
        }
        if self.local_decl_ahead() {
            self.local_var_decl()?;
            self.expect(";")?;
            return Ok(());
        }
        self.statement()
    }

    fn local_var_decl(&mut self) -> Result<()> {
        self.modifiers()?;
        let ty = self.parse_type()?;
        if ty.text != "var" {
            self.body().type_uses.push(ty);
        }
        loop {
            let name = self.ident()?;
            self.body().locals.push(name);
            while self.at("[") && self.peek(1).is("]") {
                self.advance();
                self.advance();
            }
            if self.eat("=") {
                self.variable_initializer()?;
            }
            if !self.eat(",") {
                return Ok(());
            }
        }
    }

    fn variable_initializer(&mut self) -> Result<()> {
        if self.at("{") {
            self.array_initializer()
        } else {
            self.expression()
        }
    }

    fn array_initializer(&mut self) -> Result<()> {
        self.expect("{")?;
        loop {
            if self.eat("}") {
                return Ok(());
            }
            if self.at("@") {
                self.skip_annotations()?;
            } else {
                self.variable_initializer()?;
            }
            if !self.eat(",") {
                self.expect("}")?;
                return Ok(());
            }
        }
    }

    fn par_expression(&mut self) -> Result<()> {
        self.expect("(")?;
        self.expression()?;
        self.expect(")")?;
        Ok(())
    }

    fn statement(&mut self) -> Result<()> {
        let t = self.tok().clone();
        if t.kind == TokenKind::Ident {
            match t.text.as_str() {
                "if" => {
                    self.advance();
                    self.decision(DecisionKind::If, t.line);
                    self.par_expression()?;
                    self.statement()?;
                    if self.eat("else") {
                        self.statement()?;
                    }
                    return Ok(());
                }
                "while" => {
                    self.advance();
                    self.decision(DecisionKind::While, t.line);
                    self.par_expression()?;
                    return self.statement();
                }
                "do" => {
                    self.advance();
                    self.decision(DecisionKind::Do, t.line);
                    self.statement()?;
                    self.expect("while")?;
                    self.par_expression()?;
                    self.expect(";")?;
                    return Ok(());
                }
                "for" => {
                    self.advance();
                    self.decision(DecisionKind::For, t.line);
                    return self.for_rest();
                }
                "try" => {
                    self.advance();
                    return self.try_rest();
                }
                "switch" => {
                    self.advance();
                    self.par_expression()?;
                    return self.switch_body();
                }
                "return" => {
                    self.advance();
                    if !self.at(";") {
                        self.expression()?;
                    }
                    self.expect(";")?;
                    return Ok(());
                }
                "throw" => {
                    self.advance();
                    self.expression()?;
                    self.expect(";")?;
                    return Ok(());
                }
                "break" | "continue" => {
                    self.advance();
                    if Self::is_ident_tok(self.tok()) {
                        self.advance();
                    }
                    self.expect(";")?;
                    return Ok(());
                }
                "synchronized" => {
                    self.advance();
                    self.par_expression()?;
                    return self.block();
                }
                "assert" => {
                    self.advance();
                    self.expression()?;
                    if self.eat(":") {
                        self.expression()?;
                    }
                    self.expect(";")?;
                    return Ok(());
                }
                "else" | "case" | "default" | "catch" | "finally" => {
                    return Err(self.error(format!("unexpected `{}`", t.text)));
                }
                _ => {}
            }
            if Self::is_ident_tok(&t) && self.peek(1).is(":") {
                self.advance();
                self.advance();
                return self.statement();
            }
        }
        if t.is("{") {
            return self.block();
        }
        if t.is(";") {
            self.advance();
            return Ok(());
        }
        self.expression()?;
        self.expect(";")?;
        Ok(())
    }

    fn for_rest(&mut self) -> Result<()> {
        self.expect("(")?;
        if self.local_decl_ahead() {
            self.modifiers()?;
            let ty = self.parse_type()?;
            if ty.text != "var" {
                self.body().type_uses.push(ty);
            }
            let name = self.ident()?;
            self.body().locals.push(name);
            if self.eat(":") {
                self.expression()?;
                self.expect(")")?;
                return self.statement();
            }
            while self.at("[") && self.peek(1).is("]") {
                self.advance();
                self.advance();
            }
            if self.eat("=") {
                self.variable_initializer()?;
            }
            while self.eat(",") {
                let name = self.ident()?;
                self.body().locals.push(name);
                if self.eat("=") {
                    self.variable_initializer()?;
                }
            }
        } else {
            self.expression_list(";")?;
        }
        self.expect(";")?;
        if !self.at(";") {
            self.expression()?;
        }
        self.expect(";")?;
        self.expression_list(")")?;
        self.expect(")")?;
        self.statement()
    }

    fn expression_list(&mut self, terminator: &str) -> Result<()> {
        if self.at(terminator) {
            return Ok(());
        }
        self.expression()?;
        while self.eat(",") {
            self.expression()?;
        }
        Ok(())
    }

    fn try_rest(&mut self) -> Result<()> {
        let had_resources = self.at("(");
        if self.eat("(") {
            loop {
                if self.eat(")") {
                    break;
                }
                if self.local_decl_ahead() {
                    self.local_var_decl()?;
                } else {
                    self.expression()?;
                }
                if !self.eat(";") {
                    self.expect(")")?;
                    break;
                }
            }
        }
        self.block()?;
        let mut handlers = 0;
        while self.at("catch") {
            let t = self.advance();
            self.decision(DecisionKind::Catch, t.line);
            self.expect("(")?;
            self.modifiers()?;
            let ty = self.parse_type()?;
            self.body().type_uses.push(ty);
            while self.eat("|") {
                let ty = self.parse_type()?;
                self.body().type_uses.push(ty);
            }
            let name = self.ident()?;
            self.body().locals.push(name);
            self.expect(")")?;
            self.block()?;
            handlers += 1;
        }
        if self.eat("finally") {
            self.block()?;
            handlers += 1;
        }
        if handlers == 0 && !had_resources {
            return Err(self.error("`try` without `catch` or `finally`"));
        }
        Ok(())
    }

    fn switch_body(&mut self) -> Result<()> {
        self.expect("{")?;
        loop {
            if self.eat("}") {
                return Ok(());
            }
            if self.at_eof() {
                return Err(self.error("unexpected end of file in switch"));
            }
            let arrow = if self.at("case") {
                let t = self.advance();
                self.decision(DecisionKind::Case, t.line);
                loop {
                    self.ternary()?;
                    if !self.eat(",") {
                        break;
                    }
                }
                self.switch_label_end()?
            } else if self.at("default") {
                self.advance();
                self.switch_label_end()?
            } else {
                return Err(self.error(format!("expected `case` or `default`, found {}", self.describe())));
            };
            if arrow {
                if self.at("{") {
                    self.block()?;
                } else if self.at("throw") {
                    self.statement()?;
                } else {
                    self.expression()?;
                    self.expect(";")?;
                }
            } else {
                while !self.at("case") && !self.at("default") && !self.at("}") {
                    if self.at_eof() {
                        return Err(self.error("unexpected end of file in switch"));
                    }
                    self.block_statement()?;
                }
            }
        }
    }

    fn switch_label_end(&mut self) -> Result<bool> {
        if self.eat(":") {
            Ok(false)
        } else if self.eat("->") {
            Ok(true)
        } else {
            Err(self.error(format!("expected `:` or `->`, found {}", self.describe())))
        }
    }

    // ---- expressions ----

    fn expression(&mut self) -> Result<()> {
        self.assignment()
    }

    fn lambda_ahead(&self) -> bool {
        let t = self.tok();
        if Self::is_ident_tok(t) && self.peek(1).is("->") {
            return true;
        }
        if t.is("(") {
            if let Some(j) = self.scan_balanced(self.pos) {
                return self.tok_at(j).is("->");
            }
        }
        false
    }

    fn lambda(&mut self) -> Result<()> {
        if self.eat("(") {
            if !self.eat(")") {
                loop {
                    let typed = self
                        .scan_modifiers(self.pos)
                        .and_then(|i| self.scan_type(i))
                        .map(|j| Self::is_ident_tok(self.tok_at(j)) || self.tok_at(j).is("..."))
                        .unwrap_or(false);
                    if typed {
                        self.modifiers()?;
                        let ty = self.parse_type()?;
                        self.eat("...");
                        if ty.text != "var" {
                            self.body().type_uses.push(ty);
                        }
                    }
                    let name = self.ident()?;
                    self.body().locals.push(name);
                    if !self.eat(",") {
                        self.expect(")")?;
                        break;
                    }
                }
            }
        } else {
            let name = self.ident()?;
            self.body().locals.push(name);
        }
        self.expect("->")?;
        if self.at("{") {
            self.block()
        } else {
            self.expression()
        }
    }

    /// Length in tokens of an assignment operator at the cursor, if any.
    fn assignment_op_len(&self) -> usize {
        const SIMPLE: &[&str] = &["=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<="];
        if SIMPLE.iter().any(|op| self.at(op)) {
            return 1;
        }
        if self.at(">") {
            let p = self.pos;
            if self.tok_at(p + 1).is(">") && self.adjacent(p) {
                if self.tok_at(p + 2).is("=") && self.adjacent(p + 1) {
                    return 3;
                }
                if self.tok_at(p + 2).is(">")
                    && self.adjacent(p + 1)
                    && self.tok_at(p + 3).is("=")
                    && self.adjacent(p + 2)
                {
                    return 4;
                }
            }
        }
        0
    }

    fn assignment(&mut self) -> Result<()> {
        if self.lambda_ahead() {
            return self.lambda();
        }
        self.ternary()?;
        let n = self.assignment_op_len();
        if n > 0 {
            for _ in 0..n {
                self.advance();
            }
            if self.at("{") {
                return self.array_initializer();
            }
            self.assignment()?;
        }
        Ok(())
    }

    fn ternary(&mut self) -> Result<()> {
        self.binary(1)?;
        if self.at("?") {
            let t = self.advance();
            self.decision(DecisionKind::Ternary, t.line);
            self.assignment()?;
            self.expect(":")?;
            if self.lambda_ahead() {
                self.lambda()?;
            } else {
                self.ternary()?;
            }
        }
        Ok(())
    }

    /// Binary operator at the cursor: (precedence, token count).
    fn binary_op(&self) -> Option<(u8, usize, &'static str)> {
        let t = self.tok();
        if t.kind == TokenKind::Ident {
            return (t.text == "instanceof").then_some((7, 1, "instanceof"));
        }
        if t.kind != TokenKind::Op {
            return None;
        }
        let p = self.pos;
        let op = match t.text.as_str() {
            "||" => (1, 1, "||"),
            "&&" => (2, 1, "&&"),
            "|" => (3, 1, "|"),
            "^" => (4, 1, "^"),
            "&" => (5, 1, "&"),
            "==" | "!=" => (6, 1, "=="),
            "<" | "<=" => (7, 1, "<"),
            ">" => {
                let next = self.tok_at(p + 1);
                if next.is("=") && self.adjacent(p) {
                    (7, 2, ">=")
                } else if next.is(">") && self.adjacent(p) {
                    let third = self.tok_at(p + 2);
                    if third.is("=") && self.adjacent(p + 1) {
                        return None; // >>=
                    }
                    if third.is(">") && self.adjacent(p + 1) {
                        if self.tok_at(p + 3).is("=") && self.adjacent(p + 2) {
                            return None; // >>>=
                        }
                        (8, 3, ">>>")
                    } else {
                        (8, 2, ">>")
                    }
                } else {
                    (7, 1, ">")
                }
            }
            "<<" => (8, 1, "<<"),
            "+" | "-" => (9, 1, "+"),
            "*" | "/" | "%" => (10, 1, "*"),
            _ => return None,
        };
        Some(op)
    }

    fn binary(&mut self, min_prec: u8) -> Result<()> {
        self.unary()?;
        while let Some((prec, len, op)) = self.binary_op() {
            if prec < min_prec {
                break;
            }
            let line = self.tok().line;
            for _ in 0..len {
                self.advance();
            }
            match op {
                "&&" => self.decision(DecisionKind::And, line),
                "||" => self.decision(DecisionKind::Or, line),
                _ => {}
            }
            if op == "instanceof" {
                self.eat("final");
                self.parse_type()?;
                if Self::is_ident_tok(self.tok()) {
                    let name = self.advance().text;
                    self.body().locals.push(name);
                }
                continue;
            }
            self.binary(prec + 1)?;
        }
        Ok(())
    }

    fn cast_ahead(&self) -> bool {
        let j = self.pos + 1;
        let first = self.tok_at(j);
        if first.kind == TokenKind::Ident && is_primitive(&first.text) {
            return matches!(self.scan_type(j), Some(k) if self.tok_at(k).is(")"));
        }
        let Some(mut k) = self.scan_type(j) else {
            return false;
        };
        while self.tok_at(k).is("&") {
            match self.scan_type(k + 1) {
                Some(n) => k = n,
                None => return false,
            }
        }
        if !self.tok_at(k).is(")") {
            return false;
        }
        let next = self.tok_at(k + 1);
        match next.kind {
            TokenKind::Ident => next.text != "instanceof",
            TokenKind::Number | TokenKind::Str | TokenKind::Char => true,
            TokenKind::Op => next.is("(") || next.is("!") || next.is("~"),
            TokenKind::Eof => false,
        }
    }

    fn unary(&mut self) -> Result<()> {
        if ["+", "-", "++", "--", "!", "~"].iter().any(|op| self.at(op)) {
            self.advance();
            return self.unary();
        }
        if self.at("(") && !self.lambda_ahead() && self.cast_ahead() {
            self.advance();
            let ty = self.parse_type()?;
            self.body().type_uses.push(ty);
            while self.eat("&") {
                let ty = self.parse_type()?;
                self.body().type_uses.push(ty);
            }
            self.expect(")")?;
            if self.lambda_ahead() {
                return self.lambda();
            }
            return self.unary();
        }
        self.postfix()
    }

    fn arguments(&mut self) -> Result<usize> {
        self.expect("(")?;
        let mut n = 0;
        if self.eat(")") {
            return Ok(0);
        }
        loop {
            self.expression()?;
            n += 1;
            if !self.eat(",") {
                self.expect(")")?;
                return Ok(n);
            }
        }
    }

    fn record_call(&mut self, receiver: Receiver, name: String, args: usize, line: usize) {
        self.body().calls.push(Call {
            receiver,
            name,
            args,
            line,
        });
    }

    fn receiver_of(text: &str) -> Receiver {
        match text {
            "this" => Receiver::This,
            "super" => Receiver::Super,
            _ => Receiver::Expr(text.to_string()),
        }
    }

    fn postfix(&mut self) -> Result<()> {
        let mut text = self.primary()?;
        loop {
            if self.at(".") {
                self.advance();
                if self.at("new") {
                    self.creator()?;
                    text = "<new>".into();
                    continue;
                }
                if self.at("<") {
                    self.type_args()?;
                }
                let t = self.tok().clone();
                if t.is("this") || t.is("class") || t.is("super") {
                    self.advance();
                    text = if t.is("super") {
                        "super".into()
                    } else {
                        format!("{text}.{}", t.text)
                    };
                    continue;
                }
                let name = self.ident()?;
                if self.at("(") {
                    let args = self.arguments()?;
                    self.record_call(Self::receiver_of(&text), name.clone(), args, t.line);
                    text = format!("{text}.{name}(…)");
                } else {
                    if text == "this" {
                        self.body().names.push(NameUse {
                            name: name.clone(),
                            this_qualified: true,
                        });
                    }
                    text = format!("{text}.{name}");
                }
            } else if self.at("[") {
                self.advance();
                self.expression()?;
                self.expect("]")?;
                text.push_str("[…]");
            } else if self.at("::") {
                self.advance();
                if self.at("<") {
                    self.type_args()?;
                }
                if !self.eat("new") {
                    self.ident()?;
                }
                text = "<methodref>".into();
            } else if self.at("++") || self.at("--") {
                self.advance();
            } else {
                return Ok(());
            }
        }
    }

    /// Parses a primary expression and returns its receiver text.
    fn primary(&mut self) -> Result<String> {
        let t = self.tok().clone();
        match t.kind {
            TokenKind::Number | TokenKind::Str | TokenKind::Char => {
                self.advance();
                return Ok(t.text);
            }
            TokenKind::Eof => return Err(self.error("expected expression, found end of file")),
            _ => {}
        }
        if t.is("(") {
            self.par_expression()?;
            return Ok("(…)".into());
        }
        if t.is("{") {
            self.array_initializer()?;
            return Ok("{…}".into());
        }
        if t.kind == TokenKind::Ident {
            match t.text.as_str() {
                "this" | "super" => {
                    self.advance();
                    if self.at("(") {
                        // Explicit constructor invocation.
                        self.arguments()?;
                    }
                    return Ok(t.text);
                }
                "new" => {
                    self.creator()?;
                    return Ok("<new>".into());
                }
                "true" | "false" | "null" => {
                    self.advance();
                    return Ok(t.text);
                }
                "switch" => {
                    self.advance();
                    self.par_expression()?;
                    self.switch_body()?;
                    return Ok("<switch>".into());
                }
                s if is_primitive(s) || s == "void" => {
                    let ty = self.parse_type()?;
                    return Ok(ty.text);
                }
                _ => {}
            }
            if Self::is_ident_tok(&t) {
                self.advance();
                if self.at("(") {
                    let args = self.arguments()?;
                    self.record_call(Receiver::None, t.text.clone(), args, t.line);
                    return Ok(format!("{}(…)", t.text));
                }
                // Array type in `String[].class` or `int[]::new` style expressions.
                if self.at("[") && self.peek(1).is("]") {
                    while self.at("[") && self.peek(1).is("]") {
                        self.advance();
                        self.advance();
                    }
                    return Ok(format!("{}[]", t.text));
                }
                self.body().names.push(NameUse {
                    name: t.text.clone(),
                    this_qualified: false,
                });
                return Ok(t.text);
            }
        }
        Err(self.error(format!("expected expression, found {}", self.describe())))
    }

    fn creator(&mut self) -> Result<()> {
        let new_tok = self.expect("new")?;
        if self.at("<") {
            self.type_args()?;
        }
        let ty = self.parse_type_no_dims()?;
        if self.at("[") {
            while self.at("[") {
                self.advance();
                if !self.at("]") {
                    self.expression()?;
                }
                self.expect("]")?;
            }
            self.body().type_uses.push(ty);
            if self.at("{") {
                self.array_initializer()?;
            }
            return Ok(());
        }
        if ty.is_primitive() {
            return Err(self.error("expected `[` after primitive type in array creation"));
        }
        self.arguments()?;
        self.body().type_uses.push(ty.clone());
        if self.at("{") {
            let anon = self.anonymous_body(ty, new_tok.line)?;
            self.body().classes.push(anon);
        }
        Ok(())
    }

    /// Like `parse_type` but leaves `[` for array-creation dimensions.
    fn parse_type_no_dims(&mut self) -> Result<TypeRef> {
        self.skip_annotations()?;
        let t = self.tok().clone();
        if t.kind == TokenKind::Ident && is_primitive(&t.text) {
            self.advance();
            return Ok(TypeRef {
                text: t.text,
                names: Vec::new(),
            });
        }
        let mut qual = self.ident()?;
        let mut text = qual.clone();
        let mut inner = Vec::new();
        loop {
            if self.at("<") {
                let (args_text, args_names) = self.type_args()?;
                text.push_str(&args_text);
                inner.extend(args_names);
            }
            if self.at(".") && Self::is_ident_tok(self.peek(1)) {
                self.advance();
                let id = self.ident()?;
                qual.push('.');
                qual.push_str(&id);
                text.push('.');
                text.push_str(&id);
                continue;
            }
            break;
        }
        let mut names = vec![qual];
        names.extend(inner);
        Ok(TypeRef { text, names })
    }
}
