//! The full pipeline: split `H = ∗_λ H_λ` along a Θ-trivial tree, decompose
//! each `H_λ` by Kurosh, and move every double-coset representative into
//! `ker Θ` by a correction `g_{λ,μ} ∈ G_λ`.
//!
//! The result is a [`ConjectureCertificate`]; nothing in it is trusted by
//! [`crate::verify`], which recomputes every claim.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::covgraph::{build_core, complete_graph, CoreGraph, CoverError};
use crate::fingroup::GroupError;
use crate::freeprod::{FactorSystem, Word, WordError};
use crate::higgins::{build_theta_tree, higgins_decompose, image_is_onto, HigginsError, ThetaTree, TreeBounds};
use crate::kurosh::{kurosh_decompose, kurosh_invariants, KuroshError, KuroshInvariants};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConjectureError {
    #[error("invalid subgroup generator: {0}")]
    Word(#[from] WordError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Tree(HigginsError),
    #[error(transparent)]
    Kurosh(#[from] KuroshError),
    #[error("the image of H under Θ is a proper subgroup of B")]
    ThetaNotSurjectiveOntoB,
    #[error("H_{lambda} has a nontrivial piece in factor {piece_lambda}")]
    CrossFactorPieceNontrivial { lambda: usize, piece_lambda: usize },
    #[error("Θ-image of representative `{rep}` of H_{lambda} is not in B_{lambda}")]
    BetaImageNotInFactor { lambda: usize, rep: Word },
    #[error("H_{lambda} and H meet G_{lambda}^x differently for x = `{rep}`")]
    IntersectionMismatch { lambda: usize, rep: Word },
    #[error("H meets G_{0} nontrivially but the identity is not a representative")]
    MissingIdentityRep(usize),
    #[error("Kurosh invariants of the H_λ do not add up to those of H")]
    NotFreeProduct,
    #[error("no tree passed after {attempts} attempts; last failure: {last}")]
    RetriesExhausted { attempts: usize, last: Box<ConjectureError> },
}

impl ConjectureError {
    /// Failures that a different tree might avoid.
    fn is_retryable(&self) -> bool {
        matches!(
            self,
            ConjectureError::Tree(_)
                | ConjectureError::CrossFactorPieceNontrivial { .. }
                | ConjectureError::BetaImageNotInFactor { .. }
                | ConjectureError::IntersectionMismatch { .. }
                | ConjectureError::MissingIdentityRep(_)
                | ConjectureError::NotFreeProduct
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_cosets: usize,
    pub tree: TreeBounds,
    /// Extra tree attempts after the first.
    pub tree_retries: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_cosets: 10_000,
            tree: TreeBounds::default(),
            tree_retries: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorCertificate {
    pub lambda: usize,
    /// `β_{λ,μ}` for every λ-component of the coset graph.
    pub beta_list: Vec<Word>,
    /// Kurosh representatives `β′` of the nontrivial pieces of `H_λ`.
    pub beta_primes: Vec<Word>,
    /// `g_{λ,μ} ∈ G_λ` with `θ_λ(g) = Θ(β′)`, as a word of length ≤ 1.
    pub g_corrections: Vec<Word>,
    /// `x_{λ,μ} = g⁻¹·β′`.
    pub reps: Vec<Word>,
    /// All elements of `H ∩ G_λ^x`, identity first.
    pub vertex_groups: Vec<Vec<Word>>,
    #[serde(rename = "F_basis")]
    pub f_basis: Vec<Word>,
    #[serde(rename = "H_lambda_gens")]
    pub h_lambda_gens: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureCertificate {
    pub system_hash: String,
    /// Kurosh generators of `H`, a canonical function of the subgroup.
    #[serde(rename = "H_generators")]
    pub h_generators: Vec<Word>,
    pub index: usize,
    pub factors: Vec<FactorCertificate>,
    pub tree_transversal: Vec<Word>,
    pub tree_attempt: usize,
}

impl ConjectureCertificate {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// SHA-256 over the multiplication tables and θ maps, hex encoded.
pub fn system_hash(sys: &FactorSystem) -> String {
    #[derive(Serialize)]
    struct Canonical {
        g: Vec<Vec<Vec<usize>>>,
        b: Vec<Vec<Vec<usize>>>,
        theta: Vec<Vec<usize>>,
    }
    let c = Canonical {
        g: sys.g().factors().iter().map(|f| f.table()).collect(),
        b: sys.b().factors().iter().map(|f| f.table()).collect(),
        theta: (0..sys.rank()).map(|l| sys.theta(l).map().to_vec()).collect(),
    };
    let bytes = serde_json::to_vec(&c).expect("tables serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Complete coset graph of `⟨gens⟩`, rebuilt from its own Kurosh generators
/// so that the result does not depend on how the subgroup was presented.
pub fn canonical_subgroup_graph(sys: &FactorSystem, gens: &[Word], max_cosets: usize) -> Result<CoreGraph, ConjectureError> {
    let fp = sys.g();
    for w in gens {
        fp.check_word(w)?;
    }
    let graph = complete_graph(fp, &build_core(fp, gens), max_cosets)?;
    let d = kurosh_decompose(fp, &graph)?;
    let canonical: Vec<Word> = d
        .pieces
        .iter()
        .flat_map(|p| p.vertex_group_gens.iter().cloned())
        .chain(d.free_basis)
        .collect();
    Ok(complete_graph(fp, &build_core(fp, &canonical), max_cosets)?)
}

pub fn conjecture_decompose(sys: &FactorSystem, gens: &[Word], bounds: &Bounds) -> Result<ConjectureCertificate, ConjectureError> {
    let graph = canonical_subgroup_graph(sys, gens, bounds.max_cosets)?;
    if !image_is_onto(sys, graph.subgroup_gens()) {
        return Err(ConjectureError::ThetaNotSurjectiveOntoB);
    }
    let whole = kurosh_invariants(sys.g(), &kurosh_decompose(sys.g(), &graph)?);
    let attempts = bounds.tree_retries + 1;
    let mut last = None;
    for attempt in 0..attempts {
        let result = build_theta_tree(sys, &graph, bounds.tree, attempt)
            .map_err(|e| match e {
                HigginsError::Cover(c) => ConjectureError::Cover(c),
                other => ConjectureError::Tree(other),
            })
            .and_then(|tree| assemble(sys, &graph, &tree, &whole, attempt));
        match result {
            Ok(cert) => return Ok(cert),
            Err(e) if e.is_retryable() => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    let last = last.expect("at least one attempt");
    if attempts == 1 {
        return Err(last);
    }
    Err(ConjectureError::RetriesExhausted {
        attempts,
        last: Box::new(last),
    })
}

fn assemble(
    sys: &FactorSystem,
    graph: &CoreGraph,
    tree: &ThetaTree,
    whole: &KuroshInvariants,
    attempt: usize,
) -> Result<ConjectureCertificate, ConjectureError> {
    let fp = sys.g();
    let higgins = higgins_decompose(sys, graph, tree);
    let mut sum = KuroshInvariants::default();
    let mut factors = Vec::with_capacity(sys.rank());
    for hf in &higgins.factors {
        let l = hf.lambda;
        let group = fp.factor(l);
        let core = build_core(fp, &hf.gens);
        let d = kurosh_decompose(fp, &core)?;
        sum.add(&kurosh_invariants(fp, &d));

        let mut fc = FactorCertificate {
            lambda: l,
            beta_list: hf.betas.clone(),
            beta_primes: Vec::new(),
            g_corrections: Vec::new(),
            reps: Vec::new(),
            vertex_groups: Vec::new(),
            f_basis: d.free_basis.clone(),
            h_lambda_gens: hf.gens.clone(),
        };
        for piece in &d.pieces {
            if piece.lambda != l {
                return Err(ConjectureError::CrossFactorPieceNontrivial { lambda: l, piece_lambda: piece.lambda });
            }
            let beta = &piece.rep;
            let beta_inv = fp.invert(beta);
            for g in group.elements() {
                let in_h = graph.membership(&fp.multiply_all([&beta_inv, &Word::letter(l, g), beta]));
                if in_h != piece.stabilizer.contains(&g) {
                    return Err(ConjectureError::IntersectionMismatch { lambda: l, rep: beta.clone() });
                }
            }
            let image = sys
                .theta_word(beta)
                .as_factor_element(l)
                .ok_or_else(|| ConjectureError::BetaImageNotInFactor { lambda: l, rep: beta.clone() })?;
            let g = sys.theta(l).solve_preimage(image).map_err(|_: GroupError| ConjectureError::BetaImageNotInFactor {
                lambda: l,
                rep: beta.clone(),
            })?;
            let g_word = Word::letter(l, g);
            let x = fp.multiply(&Word::letter(l, group.inv(g)), beta);
            debug_assert!(sys.theta_word(&x).is_identity());
            // H ∩ G_λ^x = x⁻¹·(g⁻¹ S g)·x
            let x_inv = fp.invert(&x);
            let mut conj: Vec<usize> = piece.stabilizer.iter().map(|&s| group.mul(group.mul(group.inv(g), s), g)).collect();
            conj.sort_unstable();
            let elements = conj.iter().map(|&s| fp.multiply_all([&x_inv, &Word::letter(l, s), &x])).collect();
            fc.beta_primes.push(beta.clone());
            fc.g_corrections.push(g_word);
            fc.reps.push(x);
            fc.vertex_groups.push(elements);
        }
        let base_meets = graph.lambda_components(fp, l)[0].stabilizer.len() > 1;
        if base_meets && !fc.reps.iter().any(Word::is_identity) {
            return Err(ConjectureError::MissingIdentityRep(l));
        }
        factors.push(fc);
    }
    if sum != *whole {
        return Err(ConjectureError::NotFreeProduct);
    }
    Ok(ConjectureCertificate {
        system_hash: system_hash(sys),
        h_generators: graph.subgroup_gens().to_vec(),
        index: graph.vertex_count(),
        factors,
        tree_transversal: tree.transversal.clone(),
        tree_attempt: attempt,
    })
}
