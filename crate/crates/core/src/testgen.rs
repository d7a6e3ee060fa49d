//! Random desk-scale instances for property tests, acceptance runs and
//! benchmarks.
//!
//! A subgroup is produced as the point stabilizer of a random transitive
//! action of `G = ∗ G_λ` on at most `max_index` points, so each instance
//! carries an exact membership oracle (trace the point 0) that shares no
//! code with the graph machinery.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::fingroup::FiniteGroup;
use crate::freeprod::{FactorSystem, FreeProduct, Syllable, Word};

/// Factor pool: Z2, Z3, Z4, S3.
pub fn factor_pool() -> Vec<FiniteGroup> {
    vec![
        FiniteGroup::cyclic(2),
        FiniteGroup::cyclic(3),
        FiniteGroup::cyclic(4),
        FiniteGroup::sym(3).expect("S3"),
    ]
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub fp: FreeProduct,
    pub index: usize,
    /// `action[λ][g][p] = p·g`.
    pub action: Vec<Vec<Vec<usize>>>,
    /// Schreier generators of the stabilizer of point 0.
    pub gens: Vec<Word>,
}

impl RandomInstance {
    pub fn generate<R: Rng>(rng: &mut R, max_factors: usize, max_index: usize) -> Self {
        let pool = factor_pool();
        loop {
            let rank = rng.gen_range(1..=max_factors.max(1));
            let factors: Vec<FiniteGroup> = (0..rank).map(|_| pool.choose(rng).expect("pool").clone()).collect();
            let n = rng.gen_range(1..=max_index.max(1));
            let action: Vec<Vec<Vec<usize>>> = factors.iter().map(|g| random_action(rng, g, n)).collect();
            if !transitive(&action, n) {
                continue;
            }
            let fp = FreeProduct::new(factors);
            let gens = schreier_generators(&fp, &action, n);
            return RandomInstance {
                fp,
                index: n,
                action,
                gens,
            };
        }
    }

    pub fn point_trace(&self, w: &Word) -> usize {
        w.syllables().iter().fold(0, |p, s| self.action[s.factor][s.elem][p])
    }

    pub fn point_membership(&self, w: &Word) -> bool {
        self.point_trace(w) == 0
    }

    /// A random surjection onto a quotient of each factor: identity, the
    /// trivial map, or (for Z4 and S3) a map onto Z2.
    pub fn random_system<R: Rng>(&self, rng: &mut R) -> FactorSystem {
        let mut bs = Vec::new();
        let mut maps = Vec::new();
        for g in self.fp.factors() {
            let mut options: Vec<(FiniteGroup, Vec<usize>)> = vec![
                (g.clone(), g.elements().collect()),
                (FiniteGroup::trivial(), vec![0; g.order()]),
            ];
            match g.name() {
                "Z4" => options.push((FiniteGroup::cyclic(2), vec![0, 1, 0, 1])),
                "S3" => options.push((FiniteGroup::cyclic(2), sign_map(g))),
                _ => {}
            }
            let (b, m) = options.swap_remove(rng.gen_range(0..options.len()));
            bs.push(b);
            maps.push(m);
        }
        FactorSystem::from_maps(self.fp.factors().to_vec(), bs, maps).expect("quotient maps are surjective homomorphisms")
    }

    /// Random reduced word of length `len`.
    pub fn random_word<R: Rng>(&self, rng: &mut R, len: usize) -> Word {
        random_word(rng, &self.fp, len)
    }
}

pub fn random_word<R: Rng>(rng: &mut R, fp: &FreeProduct, len: usize) -> Word {
    let mut syl: Vec<Syllable> = Vec::with_capacity(len);
    let nontrivial: Vec<usize> = (0..fp.rank()).filter(|&l| fp.factor(l).order() > 1).collect();
    if nontrivial.is_empty() {
        return Word::identity();
    }
    while syl.len() < len {
        let l = *nontrivial.choose(rng).expect("nonempty");
        if nontrivial.len() == 1 && !syl.is_empty() {
            break;
        }
        if syl.last().is_some_and(|s| s.factor == l) {
            continue;
        }
        let e = rng.gen_range(1..fp.factor(l).order());
        syl.push(Syllable::new(l, e));
    }
    fp.reduce(syl)
}

/// All reduced words of length at most `max_len`, shortest first.
pub fn all_words(fp: &FreeProduct, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let mut layer = vec![Vec::<Syllable>::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for s in fp.letters() {
                if w.last().is_some_and(|t| t.factor == s.factor) {
                    continue;
                }
                let mut v = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().map(|v| fp.reduce(v.iter().copied())));
        layer = next;
    }
    out
}

fn sign_map(g: &FiniteGroup) -> Vec<usize> {
    // parity of the permutation with index e in the lexicographic listing of S3
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    debug_assert_eq!(g.order(), 6);
    perms
        .iter()
        .map(|p| {
            let inversions = (0..3).flat_map(|i| ((i + 1)..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            inversions % 2
        })
        .collect()
}

/// Random action of `g` on `n` points as a disjoint union of coset actions.
fn random_action<R: Rng>(rng: &mut R, g: &FiniteGroup, n: usize) -> Vec<Vec<usize>> {
    let subgroups = g.subgroups();
    let mut act = vec![vec![0; n]; g.order()];
    let mut points: Vec<usize> = (0..n).collect();
    points.shuffle(rng);
    let mut next = 0;
    while next < n {
        let remaining = n - next;
        let fits: Vec<&std::collections::BTreeSet<usize>> =
            subgroups.iter().filter(|k| g.order() / k.len() <= remaining).collect();
        let k = *fits.choose(rng).expect("whole group always fits");
        // right cosets K·a, each as the sorted element list
        let mut cosets: Vec<Vec<usize>> = Vec::new();
        for a in g.elements() {
            let mut c: Vec<usize> = k.iter().map(|&s| g.mul(s, a)).collect();
            c.sort_unstable();
            if !cosets.contains(&c) {
                cosets.push(c);
            }
        }
        let block = &points[next..next + cosets.len()];
        for (i, c) in cosets.iter().enumerate() {
            for x in g.elements() {
                let mut d: Vec<usize> = c.iter().map(|&y| g.mul(y, x)).collect();
                d.sort_unstable();
                let j = cosets.iter().position(|e| *e == d).expect("coset action");
                act[x][block[i]] = block[j];
            }
        }
        next += cosets.len();
    }
    act
}

fn transitive(action: &[Vec<Vec<usize>>], n: usize) -> bool {
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(p) = stack.pop() {
        for per_factor in action {
            for perm in per_factor {
                let q = perm[p];
                if !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn schreier_generators(fp: &FreeProduct, action: &[Vec<Vec<usize>>], n: usize) -> Vec<Word> {
    let mut transversal: Vec<Option<Word>> = vec![None; n];
    transversal[0] = Some(Word::identity());
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(p) = queue.pop_front() {
        for s in fp.letters() {
            let q = action[s.factor][s.elem][p];
            if transversal[q].is_none() {
                let w = fp.multiply(transversal[p].as_ref().expect("visited"), &Word::letter(s.factor, s.elem));
                transversal[q] = Some(w);
                queue.push_back(q);
            }
        }
    }
    let t: Vec<Word> = transversal.into_iter().map(|w| w.expect("transitive")).collect();
    let mut gens: Vec<Word> = Vec::new();
    for p in 0..n {
        for s in fp.letters() {
            let q = action[s.factor][s.elem][p];
            let g = fp.multiply_all([&t[p], &Word::letter(s.factor, s.elem), &fp.invert(&t[q])]);
            if !g.is_identity() && !gens.contains(&g) {
                gens.push(g);
            }
        }
    }
    gens
}
