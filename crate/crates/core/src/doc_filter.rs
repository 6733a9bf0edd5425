//! `@throws` tags in doc comments and the candidates they mention.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::lang::DocComment;
use crate::var_rank::{Candidate, CandidateKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ThrowsTag {
    pub exception_name: String,
    pub condition_text: String,
}

/// Words that end the subject of a condition sentence.
const VERB_WORDS: &[&str] = &["is", "are", "does", "cannot", "exceeds", "equals", "contains", "has"];

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn parse_doc(doc: &DocComment) -> Vec<ThrowsTag> {
    // Drop the leading `*` decoration of each line.
    let text: Vec<&str> = doc
        .text
        .lines()
        .map(|l| {
            let l = l.trim_start();
            l.strip_prefix('*').unwrap_or(l)
        })
        .collect();
    let text = text.join("\n");
    let mut tags = Vec::new();
    for chunk in text.split('@').skip(1) {
        let Some(rest) = chunk.strip_prefix("throws") else { continue };
        if !rest.starts_with(char::is_whitespace) {
            continue;
        }
        let rest = rest.trim_start();
        let name: String = rest.chars().take_while(|c| is_ident_char(*c)).collect();
        if name.is_empty() {
            continue;
        }
        let after = rest[name.len()..].trim();
        let condition = match after.strip_prefix("if") {
            Some(c) if c.is_empty() || c.starts_with(char::is_whitespace) => c,
            _ => after,
        };
        let condition_text = condition.split_whitespace().collect::<Vec<_>>().join(" ");
        tags.push(ThrowsTag { exception_name: name, condition_text });
    }
    tags
}

/// Splits at underscores and lower-to-upper case boundaries, lowercased.
pub fn split_identifier(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for c in name.chars() {
        if c == '_' {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            prev_lower = false;
            continue;
        }
        if c.is_uppercase() && prev_lower && !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
        prev_lower = c.is_lowercase() || c.is_ascii_digit();
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

/// Words of the text before the first verb-like token.
fn subject_words(text: &str) -> BTreeSet<String> {
    let mut words = BTreeSet::new();
    for token in text.split(|c: char| !is_ident_char(c)).filter(|t| !t.is_empty()) {
        if VERB_WORDS.contains(&token.to_lowercase().as_str()) {
            break;
        }
        words.extend(split_identifier(token));
    }
    words
}

fn mentions(subject: &BTreeSet<String>, var: &str) -> bool {
    split_identifier(var).last().is_some_and(|w| subject.contains(w))
}

pub fn mentioned_variables(tag: &ThrowsTag, scope_vars: &[Candidate]) -> Vec<Candidate> {
    let subject = subject_words(&tag.condition_text);
    scope_vars.iter().filter(|c| c.is_variable() && mentions(&subject, &c.name)).cloned().collect()
}

pub fn filter_for_exception(candidates: Vec<Candidate>, tags: &[ThrowsTag], exception: &str) -> Vec<Candidate> {
    let Some(tag) = tags.iter().find(|t| t.exception_name == exception) else {
        return candidates;
    };
    let mentioned: BTreeSet<String> = mentioned_variables(tag, &candidates).into_iter().map(|c| c.name).collect();
    if mentioned.is_empty() {
        return candidates;
    }
    candidates
        .into_iter()
        .filter(|c| match c.kind {
            CandidateKind::CondExpr => c.variables().iter().any(|v| mentioned.contains(v)),
            _ => mentioned.contains(&c.name),
        })
        .collect()
}
