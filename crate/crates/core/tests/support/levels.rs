//! Random methods over `v0..v5` and a reachability-based level oracle.

use std::collections::BTreeSet;

use proptest::prelude::*;

#[derive(Clone, Debug)]
pub enum Item {
    Assign(usize, Vec<usize>),
    If(Vec<usize>, Vec<Item>),
    While(Vec<usize>, Vec<Item>),
}

#[derive(Clone, Debug)]
pub struct Method {
    pub vars: usize,
    pub params: usize,
    /// Variables read by each local's initializer.
    pub inits: Vec<Vec<usize>>,
    pub body: Vec<Item>,
}

fn sum(uses: &[usize]) -> String {
    uses.iter().map(|u| format!("v{u} + ")).collect::<String>() + "1"
}

fn cond(uses: &[usize]) -> String {
    format!("{} > 0", sum(uses))
}

fn render_items(items: &[Item], out: &mut String) {
    for it in items {
        match it {
            Item::Assign(t, uses) => out.push_str(&format!("v{t} = {};\n", sum(uses))),
            Item::If(c, body) | Item::While(c, body) => {
                let kw = if matches!(it, Item::If(..)) { "if" } else { "while" };
                out.push_str(&format!("{kw} ({}) {{\n", cond(c)));
                render_items(body, out);
                out.push_str("}\n");
            }
        }
    }
}

impl Method {
    pub fn source(&self) -> String {
        let params: Vec<String> = (0..self.params).map(|i| format!("v{i}: int")).collect();
        let mut body = String::new();
        for (k, uses) in self.inits.iter().enumerate() {
            body.push_str(&format!("let v{}: int = {};\n", self.params + k, sum(uses)));
        }
        render_items(&self.body, &mut body);
        format!("fn m({}) -> int {{\n{body}return v0;\n}}", params.join(", "))
    }

    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        fn assigned(items: &[Item], out: &mut Vec<usize>) {
            for it in items {
                match it {
                    Item::Assign(t, _) => out.push(*t),
                    Item::If(_, b) | Item::While(_, b) => assigned(b, out),
                }
            }
        }
        fn walk(items: &[Item], e: &mut BTreeSet<(usize, usize)>) {
            for it in items {
                match it {
                    Item::Assign(t, uses) => e.extend(uses.iter().map(|&u| (*t, u))),
                    Item::If(c, b) | Item::While(c, b) => {
                        let mut targets = Vec::new();
                        assigned(b, &mut targets);
                        for t in targets {
                            e.extend(c.iter().map(|&u| (t, u)));
                        }
                        walk(b, e);
                    }
                }
            }
        }
        let mut e = BTreeSet::new();
        for (k, uses) in self.inits.iter().enumerate() {
            e.extend(uses.iter().map(|&u| (self.params + k, u)));
        }
        walk(&self.body, &mut e);
        e.retain(|(a, b)| a != b);
        e
    }
}

/// Levels from reachability alone: 1 plus the deepest strict ancestor.
pub fn brute_levels(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<usize> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    fn level(v: usize, reach: &[Vec<bool>], memo: &mut Vec<Option<usize>>) -> usize {
        if let Some(l) = memo[v] {
            return l;
        }
        let n = reach.len();
        let l = 1
            + (0..n)
                .filter(|&u| u != v && reach[u][v] && !reach[v][u])
                .map(|u| level(u, reach, memo))
                .max()
                .unwrap_or(0);
        memo[v] = Some(l);
        l
    }
    let mut memo = vec![None; n];
    (0..n).map(|v| level(v, &reach, &mut memo)).collect()
}

fn arb_items(vars: usize, depth: u32) -> impl Strategy<Value = Vec<Item>> {
    let uses = move || prop::collection::btree_set(0..vars, 0..=3).prop_map(|s| s.into_iter().collect::<Vec<_>>());
    let assign = (0..vars, uses()).prop_map(|(t, u)| Item::Assign(t, u));
    let item = assign.prop_recursive(depth, 12, 3, move |inner| {
        let body = prop::collection::vec(inner, 1..3);
        let c = prop::collection::btree_set(0..vars, 1..=2).prop_map(|s| s.into_iter().collect::<Vec<_>>());
        prop_oneof![
            (c.clone(), body.clone()).prop_map(|(c, b)| Item::If(c, b)),
            (c, body).prop_map(|(c, b)| Item::While(c, b)),
        ]
    });
    prop::collection::vec(item, 0..5)
}

pub fn arb_method() -> impl Strategy<Value = Method> {
    (1usize..=6)
        .prop_flat_map(|vars| (Just(vars), 1..=vars))
        .prop_flat_map(|(vars, params)| {
            let inits: Vec<_> = (params..vars)
                .map(|k| prop::collection::btree_set(0..k, 0..=2).prop_map(|s| s.into_iter().collect::<Vec<_>>()))
                .collect();
            (Just(vars), Just(params), inits, arb_items(vars, 2))
        })
        .prop_map(|(vars, params, inits, body)| Method { vars, params, inits, body })
}
