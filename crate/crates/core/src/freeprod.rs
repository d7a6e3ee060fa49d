//! Normal-form words in a free product of finite groups, and the factor-wise
//! map between two such products.
//!
//! A [`Word`] is always reduced: no identity syllables and no two adjacent
//! syllables from the same factor. Equality of group elements is therefore
//! structural equality of words.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::fingroup::{FiniteGroup, GroupError, GroupHom};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("bad token `{0}`: expected `factor:element`")]
    BadToken(String),
    #[error("factor {0} out of range")]
    FactorOutOfRange(usize),
    #[error("element {elem} out of range for factor {factor}")]
    ElementOutOfRange { factor: usize, elem: usize },
    #[error("word `{0}` is not in normal form")]
    NotReduced(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("factor lists have different lengths (G: {g}, B: {b}, theta: {theta})")]
    LengthMismatch { g: usize, b: usize, theta: usize },
    #[error("at least one factor is required")]
    Empty,
    #[error("theta for factor {0} is not surjective")]
    NotSurjective(usize),
    #[error("theta for factor {factor}: {source}")]
    Theta { factor: usize, source: GroupError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub factor: usize,
    pub elem: usize,
}

impl Syllable {
    pub fn new(factor: usize, elem: usize) -> Self {
        Syllable { factor, elem }
    }
}

impl fmt::Display for Syllable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.factor, self.elem)
    }
}

/// A reduced word. Construct through [`FreeProduct`] methods to keep the
/// normal form; the unchecked constructors exist for callers that already
/// hold reduced data.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Syllable>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.0
    }

    /// Single-syllable word; `elem == 0` gives the identity.
    pub fn letter(factor: usize, elem: usize) -> Self {
        if elem == 0 {
            Word::identity()
        } else {
            Word(vec![Syllable::new(factor, elem)])
        }
    }

    /// True when the syllables alternate and none is the identity.
    pub fn is_reduced(&self) -> bool {
        self.0.iter().all(|s| s.elem != 0) && self.0.windows(2).all(|w| w[0].factor != w[1].factor)
    }

    /// If the word is a single syllable (or empty), its factor element.
    pub fn as_factor_element(&self, factor: usize) -> Option<usize> {
        match self.0.as_slice() {
            [] => Some(0),
            [s] if s.factor == factor => Some(s.elem),
            _ => None,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

// Words travel as `λ:k` strings. Deserialization only parses; callers
// validate against a `FreeProduct` with `check_word`.
impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        let raw: RawWord = text.parse().map_err(serde::de::Error::custom)?;
        Ok(Word(raw.0))
    }
}

/// Raw syllable list in the `λ:k` text syntax; not yet validated or reduced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawWord(pub Vec<Syllable>);

impl FromStr for RawWord {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace()
            .map(|tok| {
                let (f, e) = tok.split_once(':').ok_or_else(|| WordError::BadToken(tok.into()))?;
                let factor = f.parse().map_err(|_| WordError::BadToken(tok.into()))?;
                let elem = e.parse().map_err(|_| WordError::BadToken(tok.into()))?;
                Ok(Syllable { factor, elem })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(RawWord)
    }
}

/// The free product of a list of finite groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeProduct {
    factors: Vec<FiniteGroup>,
}

impl FreeProduct {
    pub fn new(factors: Vec<FiniteGroup>) -> Self {
        FreeProduct { factors }
    }

    pub fn factors(&self) -> &[FiniteGroup] {
        &self.factors
    }

    pub fn factor(&self, lambda: usize) -> &FiniteGroup {
        &self.factors[lambda]
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Validates and reduces a raw syllable sequence.
    pub fn word(&self, raw: &RawWord) -> Result<Word, WordError> {
        for s in &raw.0 {
            let g = self.factors.get(s.factor).ok_or(WordError::FactorOutOfRange(s.factor))?;
            if s.elem >= g.order() {
                return Err(WordError::ElementOutOfRange {
                    factor: s.factor,
                    elem: s.elem,
                });
            }
        }
        Ok(self.reduce(raw.0.iter().copied()))
    }

    /// Checks indices and normal form of a word obtained without validation.
    pub fn check_word(&self, w: &Word) -> Result<(), WordError> {
        let reduced = self.word(&RawWord(w.0.clone()))?;
        if reduced != *w {
            return Err(WordError::NotReduced(w.to_string()));
        }
        Ok(())
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        self.word(&text.parse()?)
    }

    /// Multiplies the syllables left to right, merging at each seam.
    pub fn reduce(&self, syllables: impl IntoIterator<Item = Syllable>) -> Word {
        let mut out: Vec<Syllable> = Vec::new();
        for s in syllables {
            self.push_syllable(&mut out, s);
        }
        Word(out)
    }

    fn push_syllable(&self, out: &mut Vec<Syllable>, s: Syllable) {
        if s.elem == 0 {
            return;
        }
        match out.last_mut() {
            Some(last) if last.factor == s.factor => {
                let e = self.factors[s.factor].mul(last.elem, s.elem);
                if e == 0 {
                    out.pop();
                } else {
                    last.elem = e;
                }
            }
            _ => out.push(s),
        }
    }

    pub fn multiply(&self, u: &Word, v: &Word) -> Word {
        let mut out = u.0.clone();
        for &s in &v.0 {
            self.push_syllable(&mut out, s);
        }
        Word(out)
    }

    pub fn multiply_all<'a>(&self, words: impl IntoIterator<Item = &'a Word>) -> Word {
        let mut out = Vec::new();
        for w in words {
            for &s in &w.0 {
                self.push_syllable(&mut out, s);
            }
        }
        Word(out)
    }

    pub fn invert(&self, w: &Word) -> Word {
        Word(
            w.0.iter()
                .rev()
                .map(|s| Syllable::new(s.factor, self.factors[s.factor].inv(s.elem)))
                .collect(),
        )
    }

    /// `x^-1 · w · x`.
    pub fn conjugate(&self, w: &Word, x: &Word) -> Word {
        self.multiply_all([&self.invert(x), w, x])
    }

    /// All nontrivial single-syllable words.
    pub fn letters(&self) -> impl Iterator<Item = Syllable> + '_ {
        self.factors
            .iter()
            .enumerate()
            .flat_map(|(l, g)| g.nontrivial_elements().map(move |e| Syllable::new(l, e)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    G,
    B,
}

/// The data `Θ: G = ∗ G_λ → B = ∗ B_λ`, given factor by factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorSystem {
    g: FreeProduct,
    b: FreeProduct,
    theta: Vec<GroupHom>,
}

impl FactorSystem {
    pub fn new(factors_g: Vec<FiniteGroup>, factors_b: Vec<FiniteGroup>, theta: Vec<GroupHom>) -> Result<Self, SystemError> {
        if factors_g.len() != factors_b.len() || factors_g.len() != theta.len() {
            return Err(SystemError::LengthMismatch {
                g: factors_g.len(),
                b: factors_b.len(),
                theta: theta.len(),
            });
        }
        if factors_g.is_empty() {
            return Err(SystemError::Empty);
        }
        for (l, ((gl, bl), t)) in factors_g.iter().zip(&factors_b).zip(&theta).enumerate() {
            if t.source_order() != gl.order() || t.target_order() != bl.order() {
                return Err(SystemError::Theta {
                    factor: l,
                    source: GroupError::NotHomomorphism("orders do not match the factors".into()),
                });
            }
            if !t.is_surjective() {
                return Err(SystemError::NotSurjective(l));
            }
        }
        Ok(FactorSystem {
            g: FreeProduct::new(factors_g),
            b: FreeProduct::new(factors_b),
            theta,
        })
    }

    /// Builds each θ_λ from a lookup table, validating the homomorphism law.
    pub fn from_maps(factors_g: Vec<FiniteGroup>, factors_b: Vec<FiniteGroup>, maps: Vec<Vec<usize>>) -> Result<Self, SystemError> {
        if factors_g.len() != factors_b.len() || factors_g.len() != maps.len() {
            return Err(SystemError::LengthMismatch {
                g: factors_g.len(),
                b: factors_b.len(),
                theta: maps.len(),
            });
        }
        let theta = factors_g
            .iter()
            .zip(&factors_b)
            .zip(maps)
            .enumerate()
            .map(|(l, ((s, t), m))| GroupHom::new(s, t, m).map_err(|e| SystemError::Theta { factor: l, source: e }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(factors_g, factors_b, theta)
    }

    /// `Θ = id` on `G`.
    pub fn identity(factors: Vec<FiniteGroup>) -> Result<Self, SystemError> {
        let theta = factors.iter().map(GroupHom::identity).collect();
        Self::new(factors.clone(), factors, theta)
    }

    pub fn g(&self) -> &FreeProduct {
        &self.g
    }

    pub fn b(&self) -> &FreeProduct {
        &self.b
    }

    pub fn side(&self, side: Side) -> &FreeProduct {
        match side {
            Side::G => &self.g,
            Side::B => &self.b,
        }
    }

    pub fn theta(&self, lambda: usize) -> &GroupHom {
        &self.theta[lambda]
    }

    pub fn rank(&self) -> usize {
        self.g.rank()
    }

    pub fn multiply(&self, side: Side, u: &Word, v: &Word) -> Word {
        self.side(side).multiply(u, v)
    }

    pub fn invert(&self, side: Side, w: &Word) -> Word {
        self.side(side).invert(w)
    }

    pub fn conjugate(&self, w: &Word, x: &Word) -> Word {
        self.g.conjugate(w, x)
    }

    /// Applies Θ syllable by syllable and re-reduces over `B`.
    pub fn theta_word(&self, w: &Word) -> Word {
        self.b.reduce(w.0.iter().map(|s| Syllable::new(s.factor, self.theta[s.factor].apply(s.elem))))
    }
}
