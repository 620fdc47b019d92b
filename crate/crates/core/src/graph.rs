//! Graphs of powers under the commuting relation, their maximal contexts, and
//! subspace joins.
//!
//! Nodes are projectors; two nodes are joined when their commutator vanishes.
//! The relation is reflexive and symmetric. Self-loops are implicit and never
//! stored. A context is a set of pairwise-commuting nodes, i.e. a clique, and
//! the maximal contexts are the maximal cliques.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::operator::{Projector, StateVector};
use crate::tolerance;

/// A labelled node of a power graph.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerNode {
    pub id: String,
    pub projector: Projector,
}

impl PowerNode {
    pub fn new(id: impl Into<String>, projector: Projector) -> Self {
        PowerNode {
            id: id.into(),
            projector,
        }
    }
}

/// Max-entry norm of `PQ - QP`.
pub fn commutator_norm(p: &Projector, q: &Projector) -> Result<f64> {
    let (a, b) = (p.matrix(), q.matrix());
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(ab.max_abs_diff(&ba))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerGraph {
    nodes: Vec<PowerNode>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<bool>>,
}

impl PowerGraph {
    /// Builds the graph with the default commutator tolerance.
    pub fn new(powers: Vec<PowerNode>) -> Result<Self> {
        build_graph(powers, tolerance::COMMUTATOR)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Hilbert-space dimension shared by every node; `None` for the empty graph.
    pub fn dim(&self) -> Option<usize> {
        self.nodes.first().map(|n| n.projector.dim())
    }

    pub fn nodes(&self) -> &[PowerNode] {
        &self.nodes
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    pub fn node(&self, id: &str) -> Option<&PowerNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Whether distinct nodes `a` and `b` commute. False for unknown ids.
    pub fn connected(&self, a: &str, b: &str) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => i != j && self.adjacency[i][j],
            _ => false,
        }
    }

    pub(crate) fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    /// Edges as id pairs, each pair in node order, pairs listed in node order.
    pub fn edges(&self) -> Vec<(String, String)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.adjacency[i][j] {
                    out.push((self.nodes[i].id.clone(), self.nodes[j].id.clone()));
                }
            }
        }
        out
    }

    /// True when every node set is pairwise commuting.
    pub fn is_complete_subgraph<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> bool {
        let ids: Vec<&str> = ids.into_iter().collect();
        ids.iter().enumerate().all(|(k, a)| {
            self.index.contains_key(*a)
                && ids[k + 1..].iter().all(|b| a == b || self.connected(a, b))
        })
    }

    /// Whether the commuting relation is transitive on this graph.
    pub fn is_transitive(&self) -> bool {
        demonstrate_nontransitivity(self).is_none()
    }

    /// Subgraph on the given ids, in this graph's node order.
    pub fn restrict<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<PowerGraph> {
        let wanted: BTreeSet<&str> = ids.into_iter().collect();
        for id in &wanted {
            if !self.index.contains_key(*id) {
                return Err(Error::UnknownId((*id).to_string()));
            }
        }
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| wanted.contains(self.nodes[i].id.as_str()))
            .collect();
        let nodes: Vec<PowerNode> = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let adjacency = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| self.adjacency[i][j]).collect())
            .collect();
        let index = nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (n.id.clone(), k))
            .collect();
        Ok(PowerGraph {
            nodes,
            index,
            adjacency,
        })
    }
}

/// Joins every pair of powers whose commutator norm is at most `eps_comm`.
pub fn build_graph(powers: Vec<PowerNode>, eps_comm: f64) -> Result<PowerGraph> {
    let mut index = HashMap::with_capacity(powers.len());
    for (i, node) in powers.iter().enumerate() {
        if index.insert(node.id.clone(), i).is_some() {
            return Err(Error::DuplicateId(node.id.clone()));
        }
    }
    if let Some(first) = powers.first() {
        let d = first.projector.dim();
        for node in &powers {
            if node.projector.dim() != d {
                return Err(Error::DimensionMismatch {
                    context: "power graph",
                    expected: d,
                    found: node.projector.dim(),
                });
            }
        }
    }
    let n = powers.len();
    let mut adjacency = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let norm = commutator_norm(&powers[i].projector, &powers[j].projector)?;
            let edge = norm <= eps_comm;
            adjacency[i][j] = edge;
            adjacency[j][i] = edge;
        }
    }
    Ok(PowerGraph {
        nodes: powers,
        index,
        adjacency,
    })
}

/// A set of pairwise-commuting powers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Context {
    pub member_ids: BTreeSet<String>,
    pub maximal: bool,
}

impl Context {
    pub fn contains(&self, id: &str) -> bool {
        self.member_ids.contains(id)
    }

    pub fn len(&self) -> usize {
        self.member_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_ids.is_empty()
    }
}

/// All maximal contexts with the default node cap.
pub fn enumerate_contexts(g: &PowerGraph) -> Result<Vec<Context>> {
    enumerate_contexts_capped(g, tolerance::DEFAULT_CLIQUE_CAP)
}

/// All maximal cliques of `g`, sorted lexicographically by their sorted ids.
///
/// Uses Bron–Kerbosch with Tomita pivoting over 64-bit node sets, so `cap`
/// is itself limited to 64.
pub fn enumerate_contexts_capped(g: &PowerGraph, cap: usize) -> Result<Vec<Context>> {
    let cap = cap.min(64);
    if g.len() > cap {
        return Err(Error::TooManyNodes {
            nodes: g.len(),
            cap,
        });
    }
    if g.is_empty() {
        return Ok(Vec::new());
    }
    let n = g.len();
    let neighbours: Vec<u64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| g.adjacent(i, j))
                .fold(0u64, |acc, j| acc | (1 << j))
        })
        .collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut cliques = Vec::new();
    bron_kerbosch(&neighbours, 0, all, 0, &mut cliques);

    let mut contexts: Vec<Vec<String>> = cliques
        .into_iter()
        .map(|set| {
            let mut ids: Vec<String> = (0..n)
                .filter(|&i| set & (1 << i) != 0)
                .map(|i| g.nodes[i].id.clone())
                .collect();
            ids.sort();
            ids
        })
        .collect();
    contexts.sort();
    Ok(contexts
        .into_iter()
        .map(|ids| Context {
            member_ids: ids.into_iter().collect(),
            maximal: true,
        })
        .collect())
}

fn bron_kerbosch(neighbours: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
    if p == 0 {
        if x == 0 {
            out.push(r);
        }
        return;
    }
    // Pivot on the vertex of P ∪ X with the most neighbours in P.
    let candidates = p | x;
    let pivot = bits(candidates)
        .max_by_key(|&u| (neighbours[u] & p).count_ones())
        .expect("P is non-empty");
    for v in bits(p & !neighbours[pivot]) {
        let bit = 1u64 << v;
        bron_kerbosch(
            neighbours,
            r | bit,
            p & neighbours[v],
            x & neighbours[v],
            out,
        );
        p &= !bit;
        x |= bit;
    }
}

fn bits(mut set: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let i = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(i)
        }
    })
}

/// Some `(P, Q, R)` with `P ~ Q`, `Q ~ R` and `P ≁ R`, if one exists.
pub fn demonstrate_nontransitivity(g: &PowerGraph) -> Option<(String, String, String)> {
    let n = g.len();
    for q in 0..n {
        for p in 0..n {
            if p == q || !g.adjacent(p, q) {
                continue;
            }
            for r in p + 1..n {
                if r != q && g.adjacent(q, r) && !g.adjacent(p, r) {
                    return Some((
                        g.nodes[p].id.clone(),
                        g.nodes[q].id.clone(),
                        g.nodes[r].id.clone(),
                    ));
                }
            }
        }
    }
    None
}

/// JSON shape of a graph report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphReport {
    pub nodes: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub contexts: Vec<Vec<String>>,
}

impl GraphReport {
    pub fn new(g: &PowerGraph, contexts: &[Context]) -> Self {
        GraphReport {
            nodes: g.ids().map(str::to_string).collect(),
            edges: g.edges().into_iter().map(|(a, b)| [a, b]).collect(),
            contexts: contexts
                .iter()
                .map(|c| c.member_ids.iter().cloned().collect())
                .collect(),
        }
    }
}

/// Rank-one projectors onto each vector, labelled `{prefix}{k}`.
pub fn basis_family(prefix: &str, basis: &[StateVector]) -> Vec<PowerNode> {
    basis
        .iter()
        .enumerate()
        .map(|(k, v)| PowerNode::new(format!("{prefix}{k}"), v.projector()))
        .collect()
}

/// `|k⟩⟨k|` for `k < d`, labelled `Z0, Z1, …`.
pub fn z_basis_family(d: usize) -> Result<Vec<PowerNode>> {
    Ok(basis_family("Z", &fixtures::computational_basis(d)?))
}

/// Fourier-basis projectors. For a qubit these are `X+` and `X-`; for
/// `d > 2` they are labelled `X0, X1, …`.
pub fn x_basis_family(d: usize) -> Result<Vec<PowerNode>> {
    if d == 2 {
        return Ok(vec![
            PowerNode::new("X+", fixtures::ket_plus().projector()),
            PowerNode::new("X-", fixtures::ket_minus().projector()),
        ]);
    }
    Ok(basis_family("X", &fixtures::fourier_basis(d)?))
}

/// A linear subspace given by an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    dim_ambient: usize,
    basis: Vec<StateVector>,
}

impl Subspace {
    pub fn ray(v: &StateVector) -> Self {
        Subspace {
            dim_ambient: v.dim(),
            basis: vec![v.clone()],
        }
    }

    /// Orthonormalized span of `vectors`, dropping linearly dependent ones.
    pub fn span(vectors: &[StateVector]) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptySubspace)?;
        let d = first.dim();
        let mut basis: Vec<nalgebra::DVector<num_complex::Complex64>> = Vec::new();
        for v in vectors {
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    context: "subspace span",
                    expected: d,
                    found: v.dim(),
                });
            }
            // Two passes of modified Gram–Schmidt.
            let mut w = v.as_nalgebra().clone();
            for _ in 0..2 {
                for b in &basis {
                    let coeff = b.dotc(&w);
                    w -= b * coeff;
                }
            }
            let norm = w.norm();
            if norm > tolerance::HERMITIAN {
                basis.push(w / num_complex::Complex64::new(norm, 0.0));
            }
        }
        Ok(Subspace {
            dim_ambient: d,
            basis: basis
                .into_iter()
                .map(StateVector::from_unit_nalgebra)
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Projector {
        Projector::from_orthonormal(&self.basis, self.dim_ambient)
    }

    /// Whether `self` and `other` are the same subspace, comparing projectors.
    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.dim_ambient == other.dim_ambient
            && self
                .projector()
                .matrix()
                .max_abs_diff(other.projector().matrix())
                <= tol
    }

    /// Whether `v` lies in the subspace, `‖(I - P)v‖ ≤ tol`.
    pub fn contains(&self, v: &StateVector, tol: f64) -> bool {
        if v.dim() != self.dim_ambient {
            return false;
        }
        let pv = self.projector().matrix().as_nalgebra() * v.as_nalgebra();
        (v.as_nalgebra() - pv).norm() <= tol
    }
}

/// The span of `a ∪ b`: the smallest subspace containing both.
pub fn subspace_join(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    if a.dim_ambient != b.dim_ambient {
        return Err(Error::DimensionMismatch {
            context: "subspace join",
            expected: a.dim_ambient,
            found: b.dim_ambient,
        });
    }
    let vectors: Vec<StateVector> = a.basis.iter().chain(&b.basis).cloned().collect();
    Subspace::span(&vectors)
}
