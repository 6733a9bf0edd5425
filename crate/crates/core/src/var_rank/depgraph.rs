use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::lang::*;

/// Variables of one method with data and control dependency edges. An edge
/// `x -> y` means `x` depends on `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependencyGraph {
    pub nodes: Vec<String>,
    pub edges: BTreeSet<(String, String)>,
    pub levels: BTreeMap<String, usize>,
}

impl DependencyGraph {
    pub fn level(&self, var: &str) -> Option<usize> {
        self.levels.get(var).copied()
    }
}

fn assigned_in(block: &Block, out: &mut Vec<String>) {
    block.walk(&mut |s| {
        if let Some(v) = s.defined_variable() {
            out.push(v.to_string());
        }
    });
}

pub fn build_dependency_graph(method: &FunctionDecl) -> DependencyGraph {
    let mut nodes: Vec<String> = method.params.iter().map(|p| p.name.clone()).collect();
    for s in method.statements() {
        if let StmtKind::Let { name, .. } = &s.kind {
            if !nodes.contains(name) {
                nodes.push(name.clone());
            }
        }
    }
    let mut edges = BTreeSet::new();
    let mut add = |x: &str, y: &str| {
        if x != y {
            edges.insert((x.to_string(), y.to_string()));
        }
    };
    for s in method.statements() {
        match &s.kind {
            StmtKind::Let { name, init: e, .. } | StmtKind::Assign { name, value: e } => {
                for v in e.variables() {
                    add(name, &v);
                }
            }
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => {
                let mut assigned = Vec::new();
                for b in s.blocks() {
                    assigned_in(b, &mut assigned);
                }
                let cond_vars = cond.variables();
                for x in &assigned {
                    for c in &cond_vars {
                        add(x, c);
                    }
                }
            }
            _ => {}
        }
    }
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let numbered: Vec<(usize, usize)> = edges.iter().map(|(x, y)| (index[x.as_str()], index[y.as_str()])).collect();
    let lv = levels(nodes.len(), &numbered);
    let levels = nodes.iter().cloned().zip(lv).collect();
    DependencyGraph { nodes, edges, levels }
}

/// Strongly connected components; returns the component of each node.
pub fn strongly_connected(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut graph = DiGraph::<(), ()>::with_capacity(n, edges.len());
    let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    for &(a, b) in edges {
        graph.add_edge(nodes[a], nodes[b], ());
    }
    let mut comp = vec![0; n];
    for (c, members) in tarjan_scc(&graph).into_iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    comp
}

/// 1-based levels: condensed nodes without incoming edges are peeled first.
pub fn levels(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let comp = strongly_connected(n, edges);
    let count = comp.iter().copied().max().map_or(0, |m| m + 1);
    let dag: BTreeSet<(usize, usize)> =
        edges.iter().map(|&(a, b)| (comp[a], comp[b])).filter(|(a, b)| a != b).collect();
    let mut indegree = vec![0usize; count];
    for &(_, b) in &dag {
        indegree[b] += 1;
    }
    let mut level = vec![0usize; count];
    let mut frontier: Vec<usize> = (0..count).filter(|&c| indegree[c] == 0).collect();
    let mut depth = 1;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &c in &frontier {
            level[c] = depth;
            for &(a, b) in &dag {
                if a == c {
                    indegree[b] -= 1;
                    if indegree[b] == 0 {
                        next.push(b);
                    }
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    comp.iter().map(|&c| level[c]).collect()
}
