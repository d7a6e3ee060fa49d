//! Θ-trivial spanning trees on the coset graph and the induced splitting
//! `H = ∗_λ H_λ` with `H_λΘ = B_λ`.
//!
//! The tree is grown by merging classes of cosets. Every class has a root
//! coset and, for each member `N`, a Θ-trivial word `q_N` leading from the
//! root to `N`. For a fixed λ the λ-edges induce a groupoid on the classes;
//! inside one of its components rooted at `w` every class `u` gets a
//! connecting word `m_u` with image `b_u ∈ B_λ`, and the loops at `w` have
//! images forming a subgroup `Φ ≤ B_λ`. Two classes `u`, `v` with
//! `Φ·b_u = Φ·b_v` are joined by the Θ-trivial morphism `m_u⁻¹·k·m_v`, where
//! `k` is a loop with image `b_u·b_v⁻¹`. Each such morphism can be completed
//! to a spanning tree of the component, so collapsing it keeps the
//! remaining groupoid a free product of pieces mapping into single factors
//! of `B`. When no λ admits a merge, the search falls back to a bounded BFS
//! for a Θ-trivial path and then to lifting through the subgroup's images;
//! those steps carry no such guarantee and callers verify the result.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::covgraph::{build_core, CoreGraph, CoverError};
use crate::freeprod::{FactorSystem, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HigginsError {
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("no Θ-trivial connection to coset {vertex} within bounds (word bound {word_bound}, extension bound {extension_bound})")]
    TreeBoundExceeded {
        vertex: usize,
        word_bound: usize,
        extension_bound: usize,
    },
    #[error("internal: connecting word for coset {0} is not a Θ-trivial path")]
    BadConnection(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeBounds {
    /// Maximum length of the `B`-image tracked by the path search.
    pub word_bound: usize,
    /// Maximum number of subgroup generators multiplied in the lift search.
    pub extension_bound: usize,
}

impl Default for TreeBounds {
    fn default() -> Self {
        TreeBounds {
            word_bound: 12,
            extension_bound: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    /// Merge inside a component of the λ-groupoid on classes.
    FactorCollapse { lambda: usize },
    /// Θ-trivial path found by bounded search.
    PathSearch,
    /// `h⁻¹·g_N` with `h ∈ H` and `Θ(h) = Θ(g_N)`.
    SubgroupLift,
}

impl ConnectionKind {
    /// True for the kinds that preserve the free product structure by
    /// construction.
    pub fn is_structural(&self) -> bool {
        matches!(self, ConnectionKind::FactorCollapse { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub parent: usize,
    pub child: usize,
    pub word: Word,
    pub kind: ConnectionKind,
}

/// Θ-trivial transversal of a complete coset graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaTree {
    /// `p_N`, read from the base to `N`, with `Θ(p_N) = 1`.
    pub transversal: Vec<Word>,
    /// `p_N = p_parent · connecting_word` for every non-base coset.
    pub parent: Vec<Option<usize>>,
    pub connecting_word: Vec<Word>,
    /// Tree edges in the order they were added.
    pub connections: Vec<Connection>,
}

impl ThetaTree {
    pub fn is_structural(&self) -> bool {
        self.connections.iter().all(|c| c.kind.is_structural())
    }
}

/// Deterministic variation of the search order for retries.
fn lambda_order(rank: usize, attempt: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rank).collect();
    order.rotate_left(attempt % rank.max(1));
    if (attempt / rank.max(1)) % 2 == 1 {
        order.reverse();
    }
    order
}

struct Classes {
    root_of: Vec<usize>,
    members: BTreeMap<usize, Vec<usize>>,
    q: Vec<Word>,
    parent: Vec<Option<usize>>,
    connecting: Vec<Word>,
    connections: Vec<Connection>,
}

impl Classes {
    fn new(n: usize) -> Self {
        Classes {
            root_of: (0..n).collect(),
            members: (0..n).map(|v| (v, vec![v])).collect(),
            q: vec![Word::identity(); n],
            parent: vec![None; n],
            connecting: vec![Word::identity(); n],
            connections: Vec::new(),
        }
    }

    /// Merges the class rooted at `v` into the class rooted at `u` along the
    /// morphism `t` from root `u` to root `v`.
    fn merge(&mut self, sys: &FactorSystem, u: usize, v: usize, t: Word, kind: ConnectionKind) {
        let moved = self.members.remove(&v).expect("v is a class root");
        for &n in &moved {
            self.q[n] = sys.g().multiply(&t, &self.q[n]);
            self.root_of[n] = u;
        }
        self.members.get_mut(&u).expect("u is a class root").extend(moved);
        self.parent[v] = Some(u);
        self.connecting[v] = t.clone();
        self.connections.push(Connection {
            parent: u,
            child: v,
            word: t,
            kind,
        });
    }
}

pub fn build_theta_tree(sys: &FactorSystem, graph: &CoreGraph, bounds: TreeBounds, attempt: usize) -> Result<ThetaTree, HigginsError> {
    if !graph.is_complete() {
        return Err(CoverError::GraphNotComplete.into());
    }
    let n = graph.vertex_count();
    let mut classes = Classes::new(n);
    let order = lambda_order(sys.rank(), attempt);
    while classes.members.len() > 1 {
        let mut merged = false;
        for &l in &order {
            let merges = collapsible_merges(sys, graph, &classes, l);
            if !merges.is_empty() {
                for (u, v, t) in merges {
                    classes.merge(sys, u, v, t, ConnectionKind::FactorCollapse { lambda: l });
                }
                merged = true;
                break;
            }
        }
        if !merged {
            connect_by_search(sys, graph, &mut classes, bounds, attempt)?;
        }
    }
    for v in 0..n {
        if graph.trace(0, &classes.q[v]) != Some(v) || !sys.theta_word(&classes.q[v]).is_identity() {
            return Err(HigginsError::BadConnection(v));
        }
    }
    Ok(ThetaTree {
        transversal: classes.q,
        parent: classes.parent,
        connecting_word: classes.connecting,
        connections: classes.connections,
    })
}

/// All merges available inside components of the λ-groupoid on classes, as
/// `(u, v, t)` with `t` a Θ-trivial word from root `u` to root `v`.
fn collapsible_merges(sys: &FactorSystem, graph: &CoreGraph, classes: &Classes, l: usize) -> Vec<(usize, usize, Word)> {
    let fp = sys.g();
    let group = fp.factor(l);
    let target = sys.b().factor(l);
    let theta = sys.theta(l);

    let mut done: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::new();
    for &w in classes.members.keys() {
        if done.contains(&w) {
            continue;
        }
        // BFS over classes; m[u] = (word from root w to root u, image in B_λ)
        let mut m: BTreeMap<usize, (Word, usize)> = BTreeMap::from([(w, (Word::identity(), 0))]);
        let mut queue = VecDeque::from([w]);
        // first loop word seen for each image
        let mut loops: BTreeMap<usize, Word> = BTreeMap::new();
        while let Some(u) = queue.pop_front() {
            let (m_u, b_u) = m[&u].clone();
            for &nn in &classes.members[&u] {
                for g in group.nontrivial_elements() {
                    let mm = graph.act(nn, l, g).expect("complete graph");
                    let v = classes.root_of[mm];
                    let e = fp.multiply_all([&classes.q[nn], &Word::letter(l, g), &fp.invert(&classes.q[mm])]);
                    let img = target.mul(b_u, theta.apply(g));
                    match m.get(&v) {
                        None => {
                            m.insert(v, (fp.multiply(&m_u, &e), img));
                            queue.push_back(v);
                        }
                        Some((m_v, b_v)) => {
                            let loop_img = target.mul(img, target.inv(*b_v));
                            if loop_img != 0 && !loops.contains_key(&loop_img) {
                                let word = fp.multiply_all([&m_u, &e, &fp.invert(m_v)]);
                                loops.insert(loop_img, word);
                            }
                        }
                    }
                }
            }
        }
        done.extend(m.keys().copied());
        if m.len() < 2 {
            continue;
        }

        // Φ = images of loops at w, with witness words
        let mut witness: BTreeMap<usize, Word> = BTreeMap::from([(0, Word::identity())]);
        let mut frontier = vec![0];
        while let Some(y) = frontier.pop() {
            for (&img, word) in &loops {
                let z = target.mul(y, img);
                if !witness.contains_key(&z) {
                    let wz = fp.multiply(&witness[&y], word);
                    witness.insert(z, wz);
                    frontier.push(z);
                }
            }
        }
        let coset_key = |b: usize| witness.keys().map(|&phi| target.mul(phi, b)).min().expect("nonempty");
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&u, &(_, b_u)) in &m {
            groups.entry(coset_key(b_u)).or_default().push(u);
        }
        for members in groups.values() {
            let u = members[0];
            let (m_u, b_u) = &m[&u];
            for &v in &members[1..] {
                let (m_v, b_v) = &m[&v];
                let k = &witness[&target.mul(*b_u, target.inv(*b_v))];
                let t = fp.multiply_all([&fp.invert(m_u), k, m_v]);
                out.push((u, v, t));
            }
        }
    }
    out
}

/// Joins one class to the base class without structural guarantees.
fn connect_by_search(sys: &FactorSystem, graph: &CoreGraph, classes: &mut Classes, bounds: TreeBounds, attempt: usize) -> Result<(), HigginsError> {
    let fp = sys.g();
    let base_root = classes.root_of[0];
    // 1. BFS over (coset, Θ-image) pairs from the base
    let mut seen: HashMap<(usize, Word), ()> = HashMap::new();
    let mut queue: VecDeque<(usize, Word, Word)> = VecDeque::from([(0, Word::identity(), Word::identity())]);
    seen.insert((0, Word::identity()), ());
    let cap = 200_000;
    let mut hits: Vec<(usize, Word)> = Vec::new();
    while let Some((v, img, path)) = queue.pop_front() {
        if img.is_identity() && classes.root_of[v] != base_root {
            hits.push((v, path.clone()));
            if hits.len() > attempt {
                break;
            }
        }
        if seen.len() > cap {
            break;
        }
        for s in fp.letters() {
            let t = graph.act(v, s.factor, s.elem).expect("complete graph");
            let letter = Word::letter(s.factor, s.elem);
            let new_path = fp.multiply(&path, &letter);
            if new_path.len() <= path.len() {
                continue;
            }
            let new_img = sys.b().multiply(&img, &sys.theta_word(&letter));
            if new_img.len() > bounds.word_bound {
                continue;
            }
            if seen.insert((t, new_img.clone()), ()).is_none() {
                queue.push_back((t, new_img, new_path));
            }
        }
    }
    if let Some((v, path)) = hits.into_iter().last() {
        let r = classes.root_of[v];
        let t = fp.multiply(&path, &fp.invert(&classes.q[v]));
        classes.merge(sys, base_root, r, t, ConnectionKind::PathSearch);
        return Ok(());
    }

    // 2. lift through the subgroup: N = H·g_N, find h ∈ H with Θ(h) = Θ(g_N)
    let target_root = *classes.members.keys().find(|&&r| r != base_root).expect("more than one class");
    let g_n = shortest_path(graph, fp, target_root);
    let want = sys.theta_word(&g_n);
    let gens: Vec<Word> = if graph.subgroup_gens().is_empty() {
        crate::kurosh::kurosh_decompose(fp, graph)
            .map(|d| d.pieces.iter().flat_map(|p| p.vertex_group_gens.clone()).chain(d.free_basis).collect())
            .unwrap_or_default()
    } else {
        graph.subgroup_gens().to_vec()
    };
    let mut letters: Vec<(Word, Word)> = Vec::new();
    for h in &gens {
        for x in [h.clone(), fp.invert(h)] {
            letters.push((sys.theta_word(&x), x));
        }
    }
    let mut reached: HashMap<Word, Word> = HashMap::from([(Word::identity(), Word::identity())]);
    let mut layer = vec![Word::identity()];
    for _ in 0..bounds.extension_bound {
        if reached.contains_key(&want) {
            break;
        }
        let mut next = Vec::new();
        for img in &layer {
            for (li, lw) in &letters {
                let ni = sys.b().multiply(img, li);
                if !reached.contains_key(&ni) {
                    let nw = fp.multiply(&reached[img], lw);
                    reached.insert(ni.clone(), nw);
                    next.push(ni);
                }
            }
        }
        layer = next;
    }
    let Some(h) = reached.get(&want) else {
        return Err(HigginsError::TreeBoundExceeded {
            vertex: target_root,
            word_bound: bounds.word_bound,
            extension_bound: bounds.extension_bound,
        });
    };
    let w = fp.multiply(&fp.invert(h), &g_n);
    let t = fp.multiply(&w, &fp.invert(&classes.q[target_root]));
    classes.merge(sys, base_root, target_root, t, ConnectionKind::SubgroupLift);
    Ok(())
}

fn shortest_path(graph: &CoreGraph, fp: &crate::freeprod::FreeProduct, target: usize) -> Word {
    let mut prev: Vec<Option<Word>> = vec![None; graph.vertex_count()];
    prev[0] = Some(Word::identity());
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for s in fp.letters() {
            if let Some(t) = graph.act(v, s.factor, s.elem) {
                if prev[t].is_none() {
                    prev[t] = Some(fp.multiply(prev[v].as_ref().expect("visited"), &Word::letter(s.factor, s.elem)));
                    queue.push_back(t);
                }
            }
        }
    }
    prev[target].clone().expect("graph is connected")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HigginsFactor {
    pub lambda: usize,
    /// Nontrivial Schreier elements `p_N·g·p_{N·g}⁻¹` over λ-edges, deduplicated.
    pub gens: Vec<Word>,
    /// Roots of the λ-components of the coset graph.
    pub component_roots: Vec<usize>,
    /// `β_{λ,μ} = p_root⁻¹`, aligned with `component_roots`.
    pub betas: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HigginsDecomposition {
    pub factors: Vec<HigginsFactor>,
}

pub fn higgins_decompose(sys: &FactorSystem, graph: &CoreGraph, tree: &ThetaTree) -> HigginsDecomposition {
    let fp = sys.g();
    let p = &tree.transversal;
    let factors = (0..sys.rank())
        .map(|l| {
            let mut seen = BTreeSet::new();
            let mut gens = Vec::new();
            for nn in 0..graph.vertex_count() {
                for (g, mm) in graph.edges(nn, l) {
                    let w = fp.multiply_all([&p[nn], &Word::letter(l, g), &fp.invert(&p[mm])]);
                    if !w.is_identity() && seen.insert(w.clone()) {
                        gens.push(w);
                    }
                }
            }
            let component_roots: Vec<usize> = graph.lambda_components(fp, l).iter().map(|c| c.root).collect();
            let betas = component_roots.iter().map(|&r| fp.invert(&p[r])).collect();
            HigginsFactor {
                lambda: l,
                gens,
                component_roots,
                betas,
            }
        })
        .collect();
    HigginsDecomposition { factors }
}

/// Whether the Θ-images of `gens` generate all of `B`: the core of the
/// image subgroup is a single vertex carrying every loop exactly when it is
/// the whole group.
pub fn image_is_onto(sys: &FactorSystem, gens: &[Word]) -> bool {
    let images: Vec<Word> = gens.iter().map(|w| sys.theta_word(w)).collect();
    let core = build_core(sys.b(), &images);
    core.vertex_count() == 1 && core.is_complete()
}
