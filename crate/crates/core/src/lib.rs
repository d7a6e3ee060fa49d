//! Decompositions of subgroups of free products of finite groups.
//!
//! Given `Θ: G = ∗ G_λ → B = ∗ B_λ`, built factor by factor from surjections
//! `θ_λ: G_λ → B_λ`, and a finite-index subgroup `H ≤ G` with `HΘ = B`, the
//! [`conjecture`] pipeline writes `H = ∗_λ H_λ` with `H_λΘ = B_λ` and
//! `H_λ = ∗_μ (H ∩ G_λ^{x_{λ,μ}}) ∗ F_λ`, every `x_{λ,μ}` in `ker Θ`, and
//! [`verify`] checks the result independently.

pub mod conjecture;
pub mod covgraph;
pub mod fingroup;
pub mod freeprod;
pub mod higgins;
pub mod kurosh;
pub mod schema;
pub mod testgen;
pub mod verify;

pub use conjecture::{conjecture_decompose, system_hash, Bounds, ConjectureCertificate, ConjectureError, FactorCertificate};
pub use covgraph::{build_core, complete_graph, CoreGraph, CoverError, LambdaComponent};
pub use fingroup::{FiniteGroup, GroupError, GroupHom};
pub use freeprod::{FactorSystem, FreeProduct, RawWord, Side, Syllable, SystemError, Word, WordError};
pub use verify::{brute_force_ball, brute_force_double_cosets, brute_force_membership, verify_certificate, CheckStatus, VerificationReport, VerifyError, VerifyParams};
pub use schema::{InputError, LoadedSystem, SystemFile};
