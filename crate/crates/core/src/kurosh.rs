//! Kurosh decomposition read off a subgroup graph.
//!
//! Each λ-component `C` is spanned by a BFS tree `τ_C`; the union of these
//! trees is connected and a second BFS from the base picks a spanning tree
//! `τ` inside it. With `p_N` the word read along `τ` from the base to `N`:
//!
//! * each component with root `N` and nontrivial stabilizer `S` gives the
//!   piece `H ∩ G_λ^x = { p_N·s·p_N⁻¹ : s ∈ S }` with `x = p_N⁻¹`
//!   (conjugation convention `K^x = x⁻¹Kx`);
//! * each edge `(N, g, M)` of `∪τ_C` outside `τ` gives the free generator
//!   `p_N·g·p_M⁻¹`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::covgraph::CoreGraph;
use crate::freeprod::{FreeProduct, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KuroshError {
    #[error("union of component trees does not reach vertex {0}")]
    DisconnectedUnion(usize),
}

/// A single-syllable edge `from --(lambda:elem)--> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeEdge {
    pub from: usize,
    pub lambda: usize,
    pub elem: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentTree {
    pub lambda: usize,
    pub root: usize,
    pub vertices: Vec<usize>,
    pub stabilizer: BTreeSet<usize>,
    /// Oriented away from the root.
    pub edges: Vec<TreeEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningData {
    /// `component_trees[λ]`, components in order of smallest vertex.
    pub component_trees: Vec<Vec<ComponentTree>>,
    /// Edges of `τ`, oriented away from the base, in discovery order.
    pub global_tree: Vec<TreeEdge>,
    /// `p_N` for every vertex; `p_base = ε`.
    pub transversal: Vec<Word>,
}

impl SpanningData {
    /// Component-tree edges not used by `τ` (as oriented in their component).
    pub fn non_tree_edges(&self) -> Vec<TreeEdge> {
        let used: BTreeSet<(usize, usize, usize)> = self
            .global_tree
            .iter()
            .map(|e| (e.lambda, e.from.min(e.to), e.from.max(e.to)))
            .collect();
        self.component_trees
            .iter()
            .flatten()
            .flat_map(|c| c.edges.iter().copied())
            .filter(|e| !used.contains(&(e.lambda, e.from.min(e.to), e.from.max(e.to))))
            .collect()
    }
}

pub fn spanning_data(fp: &FreeProduct, graph: &CoreGraph) -> Result<SpanningData, KuroshError> {
    let n = graph.vertex_count();
    let mut component_trees = Vec::with_capacity(fp.rank());
    // adjacency over ∪τ_C, both orientations: (λ, label, other end)
    let mut adjacency: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
    for l in 0..fp.rank() {
        let mut trees = Vec::new();
        for comp in graph.lambda_components(fp, l) {
            let mut seen = BTreeSet::from([comp.root]);
            let mut queue = VecDeque::from([comp.root]);
            let mut edges = Vec::new();
            while let Some(u) = queue.pop_front() {
                for (g, v) in graph.edges(u, l) {
                    if seen.insert(v) {
                        edges.push(TreeEdge { from: u, lambda: l, elem: g, to: v });
                        queue.push_back(v);
                    }
                }
            }
            for e in &edges {
                adjacency[e.from].push((l, e.elem, e.to));
                adjacency[e.to].push((l, fp.factor(l).inv(e.elem), e.from));
            }
            trees.push(ComponentTree {
                lambda: l,
                root: comp.root,
                vertices: comp.vertices,
                stabilizer: comp.stabilizer,
                edges,
            });
        }
        component_trees.push(trees);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }

    let mut transversal: Vec<Option<Word>> = vec![None; n];
    transversal[0] = Some(Word::identity());
    let mut global_tree = Vec::new();
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &(l, g, v) in &adjacency[u] {
            if transversal[v].is_none() {
                let p = fp.multiply(transversal[u].as_ref().expect("visited"), &Word::letter(l, g));
                transversal[v] = Some(p);
                global_tree.push(TreeEdge { from: u, lambda: l, elem: g, to: v });
                queue.push_back(v);
            }
        }
    }
    let transversal = transversal
        .into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or(KuroshError::DisconnectedUnion(v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpanningData {
        component_trees,
        global_tree,
        transversal,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KuroshPiece {
    pub lambda: usize,
    /// Root vertex of the λ-component this piece comes from.
    pub root: usize,
    /// `x` with vertex group `H ∩ G_λ^x = x⁻¹·S·x`; equals `p_root⁻¹`.
    pub rep: Word,
    /// The root stabilizer `S ≤ G_λ`.
    pub stabilizer: BTreeSet<usize>,
    /// `p_root·s·p_root⁻¹` for every nontrivial `s ∈ S`.
    pub vertex_group_gens: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KuroshDecomposition {
    /// Nontrivial pieces only, ordered by λ and then by component.
    pub pieces: Vec<KuroshPiece>,
    pub free_basis: Vec<Word>,
    pub free_rank: usize,
}

pub fn kurosh_decompose(fp: &FreeProduct, graph: &CoreGraph) -> Result<KuroshDecomposition, KuroshError> {
    let span = spanning_data(fp, graph)?;
    Ok(decompose_with(fp, &span))
}

/// Decomposition from precomputed spanning data.
pub fn decompose_with(fp: &FreeProduct, span: &SpanningData) -> KuroshDecomposition {
    let mut pieces = Vec::new();
    for trees in &span.component_trees {
        for c in trees {
            if c.stabilizer.len() <= 1 {
                continue;
            }
            let p = &span.transversal[c.root];
            let p_inv = fp.invert(p);
            let vertex_group_gens = c
                .stabilizer
                .iter()
                .filter(|&&s| s != 0)
                .map(|&s| fp.multiply_all([p, &Word::letter(c.lambda, s), &p_inv]))
                .collect();
            pieces.push(KuroshPiece {
                lambda: c.lambda,
                root: c.root,
                rep: p_inv,
                stabilizer: c.stabilizer.clone(),
                vertex_group_gens,
            });
        }
    }
    let free_basis: Vec<Word> = span
        .non_tree_edges()
        .into_iter()
        .map(|e| {
            fp.multiply_all([
                &span.transversal[e.from],
                &Word::letter(e.lambda, e.elem),
                &fp.invert(&span.transversal[e.to]),
            ])
        })
        .collect();
    KuroshDecomposition {
        free_rank: free_basis.len(),
        pieces,
        free_basis,
    }
}

/// `Σ_{λ,μ} (|C_{λ,μ}| − 1) − (|V| − 1)`.
pub fn rank_formula(fp: &FreeProduct, graph: &CoreGraph) -> usize {
    let sum: usize = (0..fp.rank())
        .flat_map(|l| graph.lambda_components(fp, l))
        .map(|c| c.vertices.len() - 1)
        .sum();
    sum + 1 - graph.vertex_count()
}

/// Isomorphism-invariant summary of a Kurosh decomposition: how many pieces
/// there are of each (factor, conjugacy class of subgroup), and the free rank.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KuroshInvariants {
    /// `(λ, conjugacy-class key) → multiplicity`.
    pub pieces: BTreeMap<(usize, Vec<usize>), usize>,
    pub free_rank: usize,
}

impl KuroshInvariants {
    pub fn add(&mut self, other: &KuroshInvariants) {
        for (k, m) in &other.pieces {
            *self.pieces.entry(k.clone()).or_default() += m;
        }
        self.free_rank += other.free_rank;
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.values().sum()
    }
}

pub fn kurosh_invariants(fp: &FreeProduct, decomp: &KuroshDecomposition) -> KuroshInvariants {
    let mut inv = KuroshInvariants {
        free_rank: decomp.free_rank,
        ..Default::default()
    };
    for p in &decomp.pieces {
        let key = fp.factor(p.lambda).conjugacy_class_key(&p.stabilizer);
        *inv.pieces.entry((p.lambda, key)).or_default() += 1;
    }
    inv
}
