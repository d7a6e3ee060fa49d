//! Folded subgroup graphs for subgroups of a free product of finite groups.
//!
//! A [`CoreGraph`] has one vertex per right coset `H·g` it has discovered,
//! with base vertex 0 standing for `H` itself, and an edge `N --(λ:g)--> N·g`
//! for single syllables. Two structural invariants are kept after every
//! construction step:
//!
//! * folded: each vertex has at most one outgoing edge per label, and the
//!   edge `u --g--> v` is always paired with `v --g⁻¹--> u`;
//! * saturated: inside every λ-component the vertices are distinct right
//!   cosets `S·a_u` of the root stabilizer `S ≤ G_λ`, and `u --g--> v` is
//!   present exactly when `S·a_u·g = S·a_v`.
//!
//! Under these invariants a reduced word lies in the subgroup iff it labels a
//! closed path at the base vertex: reducing a product of generators only ever
//! composes adjacent edges of one factor, and saturation supplies the
//! composite edge. When every action is defined the graph is the Schreier
//! coset graph and its vertex count is the index.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::freeprod::{FreeProduct, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("index bound exceeded: more than {0} cosets")]
    IndexBoundExceeded(usize),
    #[error("graph is not complete")]
    GraphNotComplete,
}

/// A folded, saturated, base-pointed subgroup graph. Vertex ids are assigned
/// in breadth-first order from the base with edges taken by `(λ, elem)`, so
/// equal subgroups give identical graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreGraph {
    orders: Vec<usize>,
    /// `action[v][λ][g]`; index 0 is unused (the identity fixes every vertex).
    action: Vec<Vec<Vec<Option<usize>>>>,
    subgroup_gens: Vec<Word>,
    complete: bool,
}

/// A connected component of the λ-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaComponent {
    pub lambda: usize,
    /// Sorted; the first entry is the root.
    pub vertices: Vec<usize>,
    pub root: usize,
    /// Coset label `a_u` for each vertex, aligned with `vertices`.
    pub coset_labels: Vec<usize>,
    pub stabilizer: BTreeSet<usize>,
}

impl LambdaComponent {
    pub fn label_of(&self, v: usize) -> Option<usize> {
        self.vertices.binary_search(&v).ok().map(|i| self.coset_labels[i])
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

impl CoreGraph {
    pub fn vertex_count(&self) -> usize {
        self.action.len()
    }

    pub fn factor_count(&self) -> usize {
        self.orders.len()
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn subgroup_gens(&self) -> &[Word] {
        &self.subgroup_gens
    }

    /// `v·g` for a single syllable; the identity fixes every vertex.
    pub fn act(&self, v: usize, lambda: usize, g: usize) -> Option<usize> {
        if g == 0 {
            Some(v)
        } else {
            self.action[v][lambda][g]
        }
    }

    /// Outgoing λ-edges of `v` ordered by element.
    pub fn edges(&self, v: usize, lambda: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.action[v][lambda]
            .iter()
            .enumerate()
            .filter_map(|(g, t)| t.map(|t| (g, t)))
    }

    /// Every edge `(u, λ, g, v)` in `(u, λ, g)` order.
    pub fn all_edges(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            (0..self.factor_count()).flat_map(move |l| self.edges(u, l).map(move |(g, v)| (u, l, g, v)))
        })
    }

    /// Reads `w` from `start`; `None` when some step is undefined.
    pub fn trace(&self, start: usize, w: &Word) -> Option<usize> {
        w.syllables()
            .iter()
            .try_fold(start, |v, s| self.act(v, s.factor, s.elem))
    }

    pub fn membership(&self, w: &Word) -> bool {
        self.trace(0, w) == Some(0)
    }

    /// λ-components in order of smallest vertex id, so the base component
    /// comes first. Vertices without λ-edges form singleton components with
    /// trivial stabilizer.
    pub fn lambda_components(&self, fp: &FreeProduct, lambda: usize) -> Vec<LambdaComponent> {
        let group = fp.factor(lambda);
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut labels = BTreeMap::from([(root, 0usize)]);
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                let a_u = labels[&u];
                for (g, v) in self.edges(u, lambda) {
                    if !seen[v] {
                        seen[v] = true;
                        labels.insert(v, group.mul(a_u, g));
                        queue.push_back(v);
                    }
                }
            }
            let stabilizer: BTreeSet<usize> = std::iter::once(0)
                .chain(self.edges(root, lambda).filter(|&(_, t)| t == root).map(|(g, _)| g))
                .collect();
            let (vertices, coset_labels) = labels.into_iter().unzip();
            out.push(LambdaComponent {
                lambda,
                vertices,
                root,
                coset_labels,
                stabilizer,
            });
        }
        out
    }

    /// Deterministic byte serialization, independent of vertex numbering:
    /// vertices are relabelled in BFS order from the base with edges taken by
    /// `(λ, elem)`. Equal encodings iff the based labelled graphs are
    /// isomorphic.
    pub fn canonical_encoding(&self) -> Vec<u8> {
        let order = self.bfs_order();
        let mut new_id = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let mut out = b"CORE".to_vec();
        let push = |out: &mut Vec<u8>, x: usize| out.extend_from_slice(&(x as u32).to_le_bytes());
        push(&mut out, order.len());
        push(&mut out, self.orders.len());
        for &o in &self.orders {
            push(&mut out, o);
        }
        for &v in &order {
            for l in 0..self.factor_count() {
                for g in 1..self.orders[l] {
                    push(&mut out, self.action[v][l][g].map_or(0, |t| new_id[t] + 1));
                }
            }
        }
        out
    }

    fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.vertex_count()];
        seen[0] = true;
        let mut order = vec![0];
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for l in 0..self.factor_count() {
                for (_, v) in self.edges(u, l) {
                    if !seen[v] {
                        seen[v] = true;
                        order.push(v);
                    }
                }
            }
        }
        order
    }

    /// Graphviz rendering: one arrow per action entry, base double-circled.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph core {\n  node [shape=circle];\n");
        for v in 0..self.vertex_count() {
            if v == 0 {
                let _ = writeln!(s, "  {v} [shape=doublecircle];");
            } else {
                let _ = writeln!(s, "  {v};");
            }
        }
        for (u, l, g, v) in self.all_edges() {
            let _ = writeln!(s, "  {u} -> {v} [label=\"{l}:{g}\"];");
        }
        s.push_str("}\n");
        s
    }

    /// Checks folding, saturation and reachability; returns a description of
    /// the first violation.
    pub fn check_invariants(&self, fp: &FreeProduct) -> Result<(), String> {
        for (u, l, g, v) in self.all_edges() {
            let gi = fp.factor(l).inv(g);
            if self.act(v, l, gi) != Some(u) {
                return Err(format!("edge {u} -{l}:{g}-> {v} has no inverse edge"));
            }
        }
        if self.bfs_order().len() != self.vertex_count() {
            return Err("unreachable vertices".into());
        }
        for l in 0..self.factor_count() {
            let group = fp.factor(l);
            for comp in self.lambda_components(fp, l) {
                let coset = |a: usize| -> BTreeSet<usize> { comp.stabilizer.iter().map(|&s| group.mul(s, a)).collect() };
                let cosets: Vec<BTreeSet<usize>> = comp.coset_labels.iter().map(|&a| coset(a)).collect();
                for i in 0..cosets.len() {
                    for j in (i + 1)..cosets.len() {
                        if cosets[i] == cosets[j] {
                            return Err(format!("vertices {} and {} share a coset", comp.vertices[i], comp.vertices[j]));
                        }
                    }
                }
                for (i, &u) in comp.vertices.iter().enumerate() {
                    for g in group.nontrivial_elements() {
                        let target = coset(group.mul(comp.coset_labels[i], g));
                        let expected = cosets.iter().position(|c| *c == target).map(|j| comp.vertices[j]);
                        if self.act(u, l, g) != expected {
                            return Err(format!("saturation fails at vertex {u}, label {l}:{g}"));
                        }
                    }
                }
            }
        }
        if self.complete && self.action.iter().flatten().any(|row| row.iter().skip(1).any(Option::is_none)) {
            return Err("marked complete but some action is undefined".into());
        }
        Ok(())
    }
}

/// Folds the wedge of generator loops and saturates it.
pub fn build_core(fp: &FreeProduct, gens: &[Word]) -> CoreGraph {
    let mut b = Builder::new(fp);
    for w in gens {
        let syl = w.syllables();
        if syl.is_empty() {
            continue;
        }
        let mut cur = 0;
        for (i, s) in syl.iter().enumerate() {
            let next = if i + 1 == syl.len() { 0 } else { b.new_vertex() };
            b.add_edge(cur, s.factor, s.elem, next);
            cur = next;
        }
    }
    b.settle();
    b.finish(gens.to_vec())
}

/// Coset enumeration: defines missing actions on the smallest incomplete
/// vertex first and re-saturates, until the action is total.
pub fn complete_graph(fp: &FreeProduct, core: &CoreGraph, max_cosets: usize) -> Result<CoreGraph, CoverError> {
    let mut b = Builder::from_graph(fp, core);
    b.settle();
    let mut cursor = 0;
    loop {
        if b.live_count() > max_cosets {
            return Err(CoverError::IndexBoundExceeded(max_cosets));
        }
        let mut missing = None;
        while cursor < b.edges.len() && missing.is_none() {
            if b.find(cursor) == cursor {
                missing = (0..fp.rank()).find_map(|l| {
                    fp.factor(l)
                        .nontrivial_elements()
                        .find(|g| !b.edges[cursor][l].contains_key(g))
                        .map(|g| (l, g))
                });
            }
            if missing.is_none() {
                cursor += 1;
            }
        }
        let Some((l, g)) = missing else { break };
        let v = cursor;
        let w = b.new_vertex();
        b.add_edge(v, l, g, w);
        b.process();
        if b.saturate_component(l, v) {
            b.settle();
            cursor = 0;
        }
    }
    let mut graph = b.finish(core.subgroup_gens.clone());
    graph.complete = true;
    if graph.vertex_count() > max_cosets {
        return Err(CoverError::IndexBoundExceeded(max_cosets));
    }
    Ok(graph)
}

/// Mutable graph with union-find vertex merging.
struct Builder<'a> {
    fp: &'a FreeProduct,
    parent: Vec<usize>,
    /// `edges[v][λ]`: elem → target (targets may be stale; resolve with `find`).
    edges: Vec<Vec<BTreeMap<usize, usize>>>,
    pending: Vec<(usize, usize)>,
    live: usize,
}

impl<'a> Builder<'a> {
    fn new(fp: &'a FreeProduct) -> Self {
        let mut b = Builder {
            fp,
            parent: Vec::new(),
            edges: Vec::new(),
            pending: Vec::new(),
            live: 0,
        };
        b.new_vertex();
        b
    }

    fn from_graph(fp: &'a FreeProduct, g: &CoreGraph) -> Self {
        let mut b = Builder::new(fp);
        for _ in 1..g.vertex_count() {
            b.new_vertex();
        }
        for (u, l, e, v) in g.all_edges() {
            b.edges[u][l].insert(e, v);
        }
        b
    }

    fn new_vertex(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.edges.push(vec![BTreeMap::new(); self.fp.rank()]);
        self.live += 1;
        id
    }

    fn live_count(&self) -> usize {
        self.live
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn insert_half(&mut self, u: usize, l: usize, g: usize, v: usize) {
        let u = self.find(u);
        let v = self.find(v);
        match self.edges[u][l].get(&g).copied() {
            Some(t) => {
                if self.find(t) != v {
                    self.pending.push((t, v));
                }
            }
            None => {
                self.edges[u][l].insert(g, v);
            }
        }
    }

    fn add_edge(&mut self, u: usize, l: usize, g: usize, v: usize) {
        if g == 0 {
            if self.find(u) != self.find(v) {
                self.pending.push((u, v));
            }
            return;
        }
        let gi = self.fp.factor(l).inv(g);
        self.insert_half(u, l, g, v);
        self.insert_half(v, l, gi, u);
    }

    /// Performs queued merges; returns whether any happened.
    fn process(&mut self) -> bool {
        let mut merged = false;
        while let Some((a, b)) = self.pending.pop() {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            merged = true;
            let (keep, dead) = (ra.min(rb), ra.max(rb));
            self.parent[dead] = keep;
            self.live -= 1;
            let moved = std::mem::take(&mut self.edges[dead]);
            self.edges[dead] = vec![BTreeMap::new(); self.fp.rank()];
            for (l, map) in moved.into_iter().enumerate() {
                for (g, t) in map {
                    self.insert_half(keep, l, g, t);
                }
            }
        }
        merged
    }

    /// Fold and saturate to a fixpoint.
    fn settle(&mut self) {
        loop {
            self.process();
            let mut merged = false;
            for l in 0..self.fp.rank() {
                let mut done = vec![false; self.parent.len()];
                for v in 0..self.parent.len() {
                    if self.find(v) != v || done[v] {
                        continue;
                    }
                    let comp = self.component(l, v);
                    for &u in &comp {
                        done[u] = true;
                    }
                    if self.saturate_vertices(l, &comp) {
                        merged = true;
                        break;
                    }
                }
                if merged {
                    break;
                }
            }
            if !merged {
                return;
            }
        }
    }

    /// Live vertices of the λ-component of `v`, in BFS order from the
    /// smallest member; edges are followed by element.
    fn component(&mut self, l: usize, v: usize) -> Vec<usize> {
        let v = self.find(v);
        let mut seen = BTreeSet::from([v]);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            let targets: Vec<usize> = self.edges[u][l].values().copied().collect();
            for t in targets {
                let t = self.find(t);
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn saturate_component(&mut self, l: usize, v: usize) -> bool {
        let comp = self.component(l, v);
        self.saturate_vertices(l, &comp)
    }

    /// Saturates one λ-component (sorted vertex list). Returns true if
    /// vertices had to be merged, in which case no edges were added and the
    /// caller must re-settle.
    fn saturate_vertices(&mut self, l: usize, comp: &[usize]) -> bool {
        let fp = self.fp;
        let group = fp.factor(l);
        let root = comp[0];
        let mut label: HashMap<usize, usize> = HashMap::from([(root, 0)]);
        let mut queue = VecDeque::from([root]);
        let mut stab_gens = Vec::new();
        while let Some(u) = queue.pop_front() {
            let out: Vec<(usize, usize)> = self.edges[u][l].iter().map(|(&g, &t)| (g, t)).collect();
            for (g, t) in out {
                let t = self.find(t);
                let a = group.mul(label[&u], g);
                match label.get(&t) {
                    Some(&a_t) => stab_gens.push(group.mul(a, group.inv(a_t))),
                    None => {
                        label.insert(t, a);
                        queue.push_back(t);
                    }
                }
            }
        }
        let stab = group.subgroup_closure(stab_gens);
        let coset_key = |a: usize| stab.iter().map(|&s| group.mul(s, a)).min().expect("nonempty");
        let mut by_key: BTreeMap<usize, usize> = BTreeMap::new();
        for &u in comp {
            let key = coset_key(label[&u]);
            if let Some(&other) = by_key.get(&key) {
                self.pending.push((other, u));
            } else {
                by_key.insert(key, u);
            }
        }
        if !self.pending.is_empty() {
            self.process();
            return true;
        }
        for &u in comp {
            for g in group.nontrivial_elements() {
                if let Some(&t) = by_key.get(&coset_key(group.mul(label[&u], g))) {
                    self.edges[u][l].entry(g).or_insert(t);
                }
            }
        }
        false
    }

    /// Canonical renumbering into an immutable graph.
    fn finish(mut self, gens: Vec<Word>) -> CoreGraph {
        let rank = self.fp.rank();
        let orders: Vec<usize> = self.fp.factors().iter().map(|g| g.order()).collect();
        let base = self.find(0);
        let mut new_id: HashMap<usize, usize> = HashMap::from([(base, 0)]);
        let mut order = vec![base];
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for l in 0..rank {
                let targets: Vec<usize> = self.edges[u][l].values().copied().collect();
                for t in targets {
                    let t = self.find(t);
                    if let std::collections::hash_map::Entry::Vacant(e) = new_id.entry(t) {
                        e.insert(order.len());
                        order.push(t);
                    }
                }
            }
        }
        let mut action = vec![Vec::with_capacity(rank); order.len()];
        for (nid, &u) in order.iter().enumerate() {
            for (l, &order_l) in orders.iter().enumerate() {
                let mut row = vec![None; order_l];
                let entries: Vec<(usize, usize)> = self.edges[u][l].iter().map(|(&g, &t)| (g, t)).collect();
                for (g, t) in entries {
                    row[g] = Some(new_id[&self.find(t)]);
                }
                action[nid].push(row);
            }
        }
        let complete = action
            .iter()
            .all(|per_l| per_l.iter().all(|row| row.iter().skip(1).all(Option::is_some)));
        CoreGraph {
            orders,
            action,
            subgroup_gens: gens,
            complete,
        }
    }
}
