//! Java source front end: lexer, parser and metric extraction.

pub mod ast;
pub mod extract;
pub mod fold;
pub mod index;
pub mod lexer;
pub mod metrics;
pub mod parser;

pub use index::{build_corpus_index, CorpusIndex};
pub use parser::parse_source;
