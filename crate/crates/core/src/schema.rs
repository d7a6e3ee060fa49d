//! JSON input format for systems and subgroups.
//!
//! ```json
//! {
//!   "factors_G": ["cyclic 2", [[0, 1], [1, 0]]],
//!   "factors_B": ["cyclic 2", "trivial"],
//!   "theta": [[0, 1], [0, 0]],
//!   "subgroup": ["0:1", "1:1 0:1 1:1"],
//!   "bounds": { "max_cosets": 1000 }
//! }
//! ```
//!
//! Factors are shorthand (`cyclic n`, `sym n`, `trivial`) or explicit
//! multiplication tables. Element numbers in `theta` and in words refer to
//! the rows of the given tables; a table whose identity is not row 0 is
//! renumbered by swapping the identity with 0, and all output uses that
//! numbering. `factors_B` and `theta` may both be omitted, meaning `Θ = id`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conjecture::Bounds;
use crate::fingroup::{FiniteGroup, GroupError, GroupHom};
use crate::freeprod::{FactorSystem, FreeProduct, RawWord, Side, Syllable, SystemError, Word, WordError};
use crate::verify::VerifyParams;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("unknown factor shorthand `{0}` (expected `cyclic n`, `sym n` or `trivial`)")]
    UnknownShorthand(String),
    #[error("{side:?} factor {index}: {source}")]
    Factor { side: Side, index: usize, source: GroupError },
    #[error("theta for factor {factor}: label {label} out of range")]
    ThetaLabel { factor: usize, label: usize },
    #[error("theta for factor {factor} has {got} entries, expected {expected}")]
    ThetaLength { factor: usize, got: usize, expected: usize },
    #[error("`factors_B` and `theta` must be given together")]
    PartialSystem,
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorSpec {
    Shorthand(String),
    Table(Vec<Vec<usize>>),
}

impl FactorSpec {
    pub fn build(&self) -> Result<FiniteGroup, InputError> {
        match self {
            FactorSpec::Table(t) => FiniteGroup::from_table(format!("T{}", t.len()), t).map_err(|e| InputError::Factor {
                side: Side::G,
                index: 0,
                source: e,
            }),
            FactorSpec::Shorthand(s) => {
                let parts: Vec<&str> = s.split_whitespace().collect();
                let bad = || InputError::UnknownShorthand(s.clone());
                match parts.as_slice() {
                    ["trivial"] => Ok(FiniteGroup::trivial()),
                    ["cyclic", n] => {
                        let n: usize = n.parse().map_err(|_| bad())?;
                        if n == 0 {
                            return Err(bad());
                        }
                        Ok(FiniteGroup::cyclic(n))
                    }
                    ["sym", n] => {
                        let n: usize = n.parse().map_err(|_| bad())?;
                        FiniteGroup::sym(n).map_err(|e| InputError::Factor {
                            side: Side::G,
                            index: 0,
                            source: e,
                        })
                    }
                    _ => Err(bad()),
                }
            }
        }
    }
}

/// Optional per-file bounds; command-line flags take precedence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub max_cosets: Option<usize>,
    pub tree_word_bound: Option<usize>,
    pub tree_retries: Option<usize>,
    pub free_test_len: Option<usize>,
}

impl BoundsSpec {
    /// Fields set in `over` win over those set in `self`.
    pub fn overridden_by(self, over: BoundsSpec) -> BoundsSpec {
        BoundsSpec {
            max_cosets: over.max_cosets.or(self.max_cosets),
            tree_word_bound: over.tree_word_bound.or(self.tree_word_bound),
            tree_retries: over.tree_retries.or(self.tree_retries),
            free_test_len: over.free_test_len.or(self.free_test_len),
        }
    }

    pub fn bounds(&self) -> Bounds {
        let mut b = Bounds::default();
        if let Some(m) = self.max_cosets {
            b.max_cosets = m;
        }
        if let Some(w) = self.tree_word_bound {
            b.tree.word_bound = w;
        }
        if let Some(r) = self.tree_retries {
            b.tree_retries = r;
        }
        b
    }

    pub fn verify_params(&self, seed: u64) -> VerifyParams {
        let mut p = VerifyParams {
            seed,
            bounds: self.bounds(),
            ..VerifyParams::default()
        };
        if let Some(l) = self.free_test_len {
            p.free_test_len = l;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "factors_G")]
    pub factors_g: Vec<FactorSpec>,
    #[serde(rename = "factors_B", default, skip_serializing_if = "Option::is_none")]
    pub factors_b: Option<Vec<FactorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub subgroup: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
}

#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub system: FactorSystem,
    pub subgroup: Vec<Word>,
    pub bounds: BoundsSpec,
}

fn build_side(specs: &[FactorSpec], side: Side) -> Result<Vec<FiniteGroup>, InputError> {
    specs
        .iter()
        .enumerate()
        .map(|(index, s)| {
            s.build().map_err(|e| match e {
                InputError::Factor { source, .. } => InputError::Factor { side, index, source },
                other => other,
            })
        })
        .collect()
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        serde_json::from_str(text).map_err(|e| InputError::Json(e.to_string()))
    }

    /// The factors of `G` alone, for commands that ignore `B` and `Θ`.
    pub fn free_product(&self) -> Result<FreeProduct, InputError> {
        Ok(FreeProduct::new(build_side(&self.factors_g, Side::G)?))
    }

    /// Parses a word whose element numbers are table rows.
    pub fn parse_word(fp: &FreeProduct, text: &str) -> Result<Word, InputError> {
        let raw: RawWord = text.parse()?;
        let mut internal = Vec::with_capacity(raw.0.len());
        for s in raw.0 {
            let group = fp.factors().get(s.factor).ok_or(WordError::FactorOutOfRange(s.factor))?;
            let elem = group.internal_index(s.elem).ok_or(WordError::ElementOutOfRange {
                factor: s.factor,
                elem: s.elem,
            })?;
            internal.push(Syllable::new(s.factor, elem));
        }
        Ok(fp.word(&RawWord(internal))?)
    }

    pub fn subgroup_words(&self, fp: &FreeProduct) -> Result<Vec<Word>, InputError> {
        self.subgroup.iter().map(|w| Self::parse_word(fp, w)).collect()
    }

    pub fn load(&self) -> Result<LoadedSystem, InputError> {
        let g = build_side(&self.factors_g, Side::G)?;
        let system = match (&self.factors_b, &self.theta) {
            (None, None) => FactorSystem::identity(g)?,
            (Some(bs), Some(theta)) => {
                let b = build_side(bs, Side::B)?;
                if b.len() != g.len() || theta.len() != g.len() {
                    return Err(SystemError::LengthMismatch {
                        g: g.len(),
                        b: b.len(),
                        theta: theta.len(),
                    }
                    .into());
                }
                let mut homs = Vec::with_capacity(g.len());
                for (factor, map) in theta.iter().enumerate() {
                    let (src, tgt) = (&g[factor], &b[factor]);
                    if map.len() != src.order() {
                        return Err(InputError::ThetaLength {
                            factor,
                            got: map.len(),
                            expected: src.order(),
                        });
                    }
                    let internal = src
                        .elements()
                        .map(|x| tgt.internal_index(map[src.label(x)]).ok_or(InputError::ThetaLabel { factor, label: map[src.label(x)] }))
                        .collect::<Result<Vec<_>, _>>()?;
                    let hom = GroupHom::new(src, tgt, internal).map_err(|source| SystemError::Theta { factor, source })?;
                    homs.push(hom);
                }
                FactorSystem::new(g, b, homs)?
            }
            _ => return Err(InputError::PartialSystem),
        };
        let subgroup = self.subgroup_words(system.g())?;
        Ok(LoadedSystem {
            system,
            subgroup,
            bounds: self.bounds.unwrap_or_default(),
        })
    }
}
