use similar::TextDiff;

use crate::lang::{print_items, Program};

/// Unified diff between the printed forms of two programs.
pub fn unified_diff(before: &Program, after: &Program, name: &str) -> String {
    let old = print_items(before);
    let new = print_items(after);
    TextDiff::from_lines(&old, &new)
        .unified_diff()
        .context_radius(3)
        .header(&format!("a/{name}"), &format!("b/{name}"))
        .to_string()
}
