use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::extract::pred_extract;
use super::predicate::{predefined_predicates, Predicate};
use crate::doc_filter::split_identifier;
use crate::lang::*;

pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContextKey {
    pub var_type: Type,
    pub var_name: Option<String>,
    pub method_name: String,
}

impl ContextKey {
    /// Names of two characters or fewer are not used for matching.
    pub fn new(var_type: Type, var_name: &str, method_name: &str) -> Self {
        let meaningful =
            var_name.chars().count() > 2 && var_name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        ContextKey {
            var_type,
            var_name: meaningful.then(|| var_name.to_string()),
            method_name: method_name.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexEntry {
    pub key: ContextKey,
    pub predicate: Predicate,
    pub count: usize,
    pub file: String,
    pub node: NodeId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusIndex {
    pub entries: Vec<IndexEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum MinerError {
    #[error("no parsable corpus files under {0}")]
    EmptyCorpus(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad index line {line}: {message}")]
    BadIndex { line: usize, message: String },
}

/// Index entries for every single-variable condition of `program`.
pub fn index_program(program: &Program, file: &str, if_only: bool) -> Vec<IndexEntry> {
    let mut grouped: BTreeMap<(NodeId, ContextKey, Predicate), usize> = BTreeMap::new();
    for f in &program.functions {
        for stmt in f.statements() {
            let cond = match &stmt.kind {
                StmtKind::If { cond, .. } => cond,
                StmtKind::While { cond, .. } if !if_only => cond,
                _ => continue,
            };
            let vars = cond.variables();
            let [var] = vars.as_slice() else { continue };
            let Some(ty) = declared_type(f, var) else { continue };
            let key = ContextKey::new(ty.clone(), var, &f.name);
            for p in pred_extract(cond, var, &ty) {
                *grouped.entry((stmt.id, key.clone(), p)).or_insert(0) += 1;
            }
        }
    }
    grouped
        .into_iter()
        .map(|((node, key, predicate), count)| IndexEntry { key, predicate, count, file: file.to_string(), node })
        .collect()
}

fn declared_type(f: &FunctionDecl, var: &str) -> Option<Type> {
    if let Some(p) = f.params.iter().find(|p| p.name == var) {
        return Some(p.ty.clone());
    }
    f.statements().into_iter().find_map(|s| match &s.kind {
        StmtKind::Let { name, ty, .. } if name == var => Some(ty.clone()),
        _ => None,
    })
}

/// Indexes every `*.mini` file below `dir` except test files, in sorted path
/// order. Unparsable files are skipped with a warning.
pub fn build_index(dir: &Path, if_only: bool) -> Result<CorpusIndex, MinerError> {
    let mut entries = Vec::new();
    let mut parsed = 0;
    let walker = WalkDir::new(dir).sort_by_file_name();
    for item in walker {
        let item = item.map_err(|e| MinerError::Io(e.into()))?;
        let path = item.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if !item.file_type().is_file() || !name.ends_with(".mini") || name.ends_with(".test.mini") {
            continue;
        }
        let rel = path.strip_prefix(dir).unwrap_or(path);
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        let source = std::fs::read_to_string(path)?;
        match parse_program(&source) {
            Ok(program) => {
                parsed += 1;
                entries.extend(index_program(&program, &rel, if_only));
            }
            Err(e) => log::warn!("skipping {rel}: {e}"),
        }
    }
    if parsed == 0 {
        return Err(MinerError::EmptyCorpus(dir.display().to_string()));
    }
    Ok(CorpusIndex { entries })
}

impl CorpusIndex {
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Self, MinerError> {
        let mut entries = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(&line)
                .map_err(|e| MinerError::BadIndex { line: i + 1, message: e.to_string() })?;
            entries.push(entry);
        }
        Ok(CorpusIndex { entries })
    }

    pub fn load(path: &Path) -> Result<Self, MinerError> {
        let file = std::fs::File::open(path)?;
        Self::read_jsonl(std::io::BufReader::new(file))
    }
}

pub fn name_similar(a: &str, b: &str) -> bool {
    let wa = split_identifier(a);
    split_identifier(b).iter().any(|w| wa.contains(w))
}

fn file_name(path: &str) -> &str {
    path.rsplit(['/', '\\']).next().unwrap_or(path)
}

/// Predicate counts mined under contexts similar to `target`, skipping
/// entries that come from a file named like `exclude`.
pub fn query_similar(index: &CorpusIndex, target: &ContextKey, exclude: Option<&str>) -> BTreeMap<Predicate, usize> {
    let excluded = exclude.map(file_name);
    let mut out = BTreeMap::new();
    for e in &index.entries {
        if e.key.var_type != target.var_type || excluded == Some(file_name(&e.file)) {
            continue;
        }
        let similar = match &target.var_name {
            Some(name) => e.key.var_name.as_deref().is_some_and(|n| name_similar(n, name)),
            None => name_similar(&e.key.method_name, &target.method_name),
        };
        if similar {
            *out.entry(e.predicate.clone()).or_insert(0) += e.count;
        }
    }
    out
}

/// Mined predicates by descending count (ties by canonical text), cut to `k`,
/// followed by the predefined ones for the type.
pub fn rank_predicates(mined: &BTreeMap<Predicate, usize>, target: &ContextKey, k: usize) -> Vec<Predicate> {
    let mut sorted: Vec<(&Predicate, usize, String)> = mined.iter().map(|(p, c)| (p, *c, p.to_string())).collect();
    sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.2.cmp(&b.2)));
    let mut out: Vec<Predicate> = sorted.into_iter().take(k).map(|(p, ..)| p.clone()).collect();
    for p in predefined_predicates(&target.var_type) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::predicate::{Constant, PredForm};

    #[test]
    fn indexes_hour_check() {
        let p = parse_program("fn check(hour: int) -> bool { if (hour > 24) { return false; } return true; }").unwrap();
        let entries = index_program(&p, "clock.mini", false);
        let texts: Vec<_> = entries.iter().map(|e| e.predicate.to_string()).collect();
        assert_eq!(texts.len(), 2);
        assert!(texts.contains(&"Gt(24)".to_string()) && texts.contains(&"Lt(25)".to_string()));
        assert_eq!(entries[0].key, ContextKey::new(Type::Int, "hour", "check"));
    }

    #[test]
    fn two_variable_conditions_skipped() {
        let p = parse_program("fn f(a: int, b: int) -> bool { if (a < b) { return true; } return false; }").unwrap();
        assert!(index_program(&p, "f.mini", false).is_empty());
    }

    #[test]
    fn while_conditions_respect_if_only() {
        let p =
            parse_program("fn f(n: int) -> int { let i: int = n; while (i > 0) { i = i - 1; } return i; }").unwrap();
        assert_eq!(index_program(&p, "f.mini", false).len(), 2);
        assert!(index_program(&p, "f.mini", true).is_empty());
    }

    #[test]
    fn names() {
        assert!(name_similar("elitismRate", "rateOfElitism"));
        assert!(!name_similar("lcm", "gcd"));
        assert!(name_similar("maxValue", "value"));
        assert_eq!(ContextKey::new(Type::Int, "a", "f").var_name, None);
    }

    fn pred(form: PredForm, v: i64) -> Predicate {
        Predicate::new(form, Constant::Int(v), Type::Int)
    }

    #[test]
    fn ranking() {
        let mined: BTreeMap<_, _> =
            [(pred(PredForm::Gt, 24), 7), (pred(PredForm::Lt, 25), 7), (pred(PredForm::Lt, 13), 2)].into();
        let key = ContextKey::new(Type::Int, "hour", "check");
        let r: Vec<_> = rank_predicates(&mined, &key, 20).iter().map(|p| p.to_string()).collect();
        assert_eq!(r, ["Gt(24)", "Lt(25)", "Lt(13)", "EqConst(MIN_INT)", "EqConst(MAX_INT)"]);
        let many: BTreeMap<_, _> = (0..30).map(|i| (pred(PredForm::EqConst, i), 1)).collect();
        assert_eq!(rank_predicates(&many, &key, 20).len(), 22);
        assert_eq!(rank_predicates(&BTreeMap::new(), &key, 20).len(), 2);
    }

    #[test]
    fn jsonl_round_trip() {
        let p = parse_program(
            "fn f(rate: float) -> bool { if (rate < 0.0 || rate != 1.5) { return false; } return true; }",
        )
        .unwrap();
        let idx = CorpusIndex { entries: index_program(&p, "g.mini", false) };
        let back = CorpusIndex::read_jsonl(idx.to_jsonl().as_bytes()).unwrap();
        assert_eq!(back, idx);
    }
}
