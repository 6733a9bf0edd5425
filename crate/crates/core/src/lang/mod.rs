//! MiniLang: syntax, parsing, printing, checking and patching.

pub mod ast;
mod lexer;
mod parser;
pub mod patch;
pub mod printer;
pub mod typecheck;

use std::collections::BTreeMap;

pub use ast::*;
pub use parser::parse_expr;
pub use patch::{apply_patch, Patch, PatchError, PatchKind, PatchPayload};
pub use printer::{pretty_print, print_expr, print_items, print_stmt};
pub use typecheck::type_of;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LangError {
    #[error("syntax error at {}:{}: {message}", pos.line, pos.col)]
    Syntax { pos: Pos, message: String },
    #[error("resolve error at {}:{}: {message}", pos.line, pos.col)]
    Resolve { pos: Pos, message: String },
    #[error("type error at {}:{}: {message}", pos.line, pos.col)]
    Type { pos: Pos, message: String },
}

impl LangError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        LangError::Syntax { pos, message: message.into() }
    }

    pub fn pos(&self) -> Pos {
        match self {
            LangError::Syntax { pos, .. } | LangError::Resolve { pos, .. } | LangError::Type { pos, .. } => *pos,
        }
    }
}

/// Parses and checks a program that may also contain tests.
pub fn parse_program(source: &str) -> Result<Program, LangError> {
    let items = parser::parse_items(source, 0)?;
    finish(items, None)
}

/// Parses a program and a separate test file into one checked [`Program`].
///
/// Tests are numbered after every program node, so ids inside functions do
/// not depend on the test file.
pub fn parse_program_with_tests(program_src: &str, tests_src: &str) -> Result<Program, LangError> {
    let items = parser::parse_items(program_src, 0)?;
    let base = items.spans.keys().next_back().map_or(0, |id| id.0 + 1).max(1 << 24);
    let tests = parser::parse_items(tests_src, base)?;
    if let Some(f) = tests.functions.first() {
        return Err(LangError::syntax(tests.spans[&f.id], "test files may only contain `test` blocks"));
    }
    if let Some(r) = tests.records.first() {
        return Err(LangError::syntax(tests.spans[&r.id], "test files may only contain `test` blocks"));
    }
    finish(items, Some(tests))
}

fn finish(items: parser::RawItems, tests: Option<parser::RawItems>) -> Result<Program, LangError> {
    let mut old_spans = items.spans;
    let mut program = Program {
        source_name: String::new(),
        records: items.records,
        functions: items.functions,
        tests: items.tests,
        spans: BTreeMap::new(),
        next_id: 0,
    };
    if let Some(t) = tests {
        old_spans.extend(t.spans);
        program.tests.extend(t.tests);
    }
    let mut spans = BTreeMap::new();
    let mut counter = 0u32;
    renumber_program(&mut program, &mut |old| {
        let new = NodeId(counter);
        counter += 1;
        if let Some(pos) = old_spans.get(&old) {
            spans.insert(new, *pos);
        }
        new
    });
    program.spans = spans;
    program.next_id = counter;
    typecheck::Checker::new(&program).check_program()?;
    Ok(program)
}
