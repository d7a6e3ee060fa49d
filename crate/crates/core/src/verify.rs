//! Independent checks of a [`ConjectureCertificate`] against the system and
//! the subgroup it claims to describe, plus brute-force oracles.
//!
//! C1–C6 are exact. C7 searches for a relation among alternating products
//! of the certificate's parts; it is exhaustive up to the configured length
//! when the search fits in the node budget and sampled otherwise.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conjecture::{system_hash, Bounds, ConjectureCertificate};
use crate::covgraph::{build_core, complete_graph, CoreGraph, CoverError};
use crate::freeprod::{FactorSystem, FreeProduct, Word};
use crate::kurosh::{kurosh_decompose, kurosh_invariants, KuroshInvariants};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub details: String,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub verdict: CheckStatus,
}

impl VerificationReport {
    fn new(checks: Vec<CheckResult>) -> Self {
        let ok = checks.iter().all(|c| c.status != CheckStatus::Fail);
        VerificationReport {
            checks,
            verdict: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == CheckStatus::Pass
    }

    pub fn check(&self, prefix: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name.starts_with(prefix))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{:<28} {:<7} {:>9.2} ms  {}", c.name, c.status, c.elapsed_ms, c.details);
        }
        let _ = writeln!(s, "verdict: {}", self.verdict);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyParams {
    /// Maximum number of alternating letters in the C7 search.
    pub free_test_len: usize,
    pub seed: u64,
    pub bounds: Bounds,
    /// Products C7 may enumerate before it switches to sampling.
    pub free_test_budget: u64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            free_test_len: 8,
            seed: 0,
            bounds: Bounds::default(),
            free_test_budget: 40_000_000,
        }
    }
}

/// Orbit id of every vertex under the λ-action; ids are assigned in order
/// of the smallest vertex. Orbits correspond to double cosets `G_λ x H`.
pub fn brute_force_double_cosets(fp: &FreeProduct, graph: &CoreGraph, lambda: usize) -> Result<Vec<usize>, CoverError> {
    if !graph.is_complete() {
        return Err(CoverError::GraphNotComplete);
    }
    let n = graph.vertex_count();
    let mut id = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if id[v] != usize::MAX {
            continue;
        }
        id[v] = next;
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for g in fp.factor(lambda).elements() {
                let t = graph.act(u, lambda, g).expect("complete graph");
                if id[t] == usize::MAX {
                    id[t] = next;
                    stack.push(t);
                }
            }
        }
        next += 1;
    }
    Ok(id)
}

/// Every element that is a product of at most `max_len` generators and
/// inverses.
pub fn brute_force_ball(fp: &FreeProduct, gens: &[Word], max_len: usize) -> HashSet<Word> {
    let letters: Vec<Word> = gens.iter().flat_map(|g| [g.clone(), fp.invert(g)]).filter(|g| !g.is_identity()).collect();
    let mut seen: HashSet<Word> = HashSet::from([Word::identity()]);
    let mut frontier = vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for u in &frontier {
            for a in &letters {
                let v = fp.multiply(u, a);
                if seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Whether `w` is a product of at most `max_len` generators and inverses.
pub fn brute_force_membership(fp: &FreeProduct, gens: &[Word], w: &Word, max_len: usize) -> bool {
    if w.is_identity() {
        return true;
    }
    let letters: Vec<Word> = gens.iter().flat_map(|g| [g.clone(), fp.invert(g)]).filter(|g| !g.is_identity()).collect();
    let mut seen: HashSet<Word> = HashSet::from([Word::identity()]);
    let mut frontier = vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for u in &frontier {
            for a in &letters {
                let v = fp.multiply(u, a);
                if v == *w {
                    return true;
                }
                if seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    false
}

pub fn verify_certificate(
    sys: &FactorSystem,
    h_gens: &[Word],
    cert: &ConjectureCertificate,
    params: &VerifyParams,
) -> Result<VerificationReport, VerifyError> {
    let fp = sys.g();
    let graph = check_shape(sys, h_gens, cert, params)?;
    let checks = vec![
        timed("C1 theta-triviality", || check_theta_trivial(sys, cert)),
        timed("C2 factor images", || check_factor_images(sys, cert)),
        timed("C3 vertex groups", || check_vertex_groups(fp, &graph, cert)),
        timed("C4 double cosets", || check_double_cosets(fp, &graph, cert)),
        timed("C5 generation", || check_generation(fp, &graph, cert, params.bounds.max_cosets)),
        timed("C6 kurosh additivity", || check_additivity(fp, &graph, cert)),
        timed("C7 bounded freeness", || check_bounded_freeness(fp, cert, params)),
    ];
    Ok(VerificationReport::new(checks))
}

fn timed(name: &str, f: impl FnOnce() -> (CheckStatus, String)) -> CheckResult {
    let start = Instant::now();
    let (status, details) = f();
    CheckResult {
        name: name.to_string(),
        status,
        details,
        elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
    }
}

fn verdict(failures: Vec<String>, ok: String) -> (CheckStatus, String) {
    if failures.is_empty() {
        (CheckStatus::Pass, ok)
    } else {
        (CheckStatus::Fail, failures.join("; "))
    }
}

fn malformed(msg: impl Into<String>) -> VerifyError {
    VerifyError::MalformedCertificate(msg.into())
}

/// Structural sanity, then the complete coset graph of `H`.
fn check_shape(sys: &FactorSystem, h_gens: &[Word], cert: &ConjectureCertificate, params: &VerifyParams) -> Result<CoreGraph, VerifyError> {
    let fp = sys.g();
    if cert.system_hash != system_hash(sys) {
        return Err(malformed("system hash does not match"));
    }
    if cert.factors.len() != sys.rank() {
        return Err(malformed(format!("{} factor entries for {} factors", cert.factors.len(), sys.rank())));
    }
    let mut all_words: Vec<&Word> = cert.h_generators.iter().chain(&cert.tree_transversal).collect();
    for (l, f) in cert.factors.iter().enumerate() {
        if f.lambda != l {
            return Err(malformed(format!("factor entry {l} has lambda {}", f.lambda)));
        }
        let n = f.reps.len();
        if f.beta_primes.len() != n || f.g_corrections.len() != n || f.vertex_groups.len() != n {
            return Err(malformed(format!("factor {l}: representative lists differ in length")));
        }
        if let Some(g) = f.g_corrections.iter().find(|g| g.as_factor_element(l).is_none()) {
            return Err(malformed(format!("factor {l}: correction `{g}` is not in G_{l}")));
        }
        all_words.extend(f.beta_list.iter().chain(&f.beta_primes).chain(&f.g_corrections).chain(&f.reps));
        all_words.extend(f.vertex_groups.iter().flatten().chain(&f.f_basis).chain(&f.h_lambda_gens));
    }
    for w in all_words.into_iter().chain(h_gens) {
        fp.check_word(w).map_err(|e| malformed(e.to_string()))?;
    }
    let graph = complete_graph(fp, &build_core(fp, h_gens), params.bounds.max_cosets)?;
    let different = || malformed("H_generators describe a different subgroup");
    // a larger index already means a different subgroup
    let claimed = complete_graph(fp, &build_core(fp, &cert.h_generators), graph.vertex_count()).map_err(|_| different())?;
    if claimed.canonical_encoding() != graph.canonical_encoding() {
        return Err(different());
    }
    if cert.index != graph.vertex_count() {
        return Err(malformed(format!("index {} recorded, {} computed", cert.index, graph.vertex_count())));
    }
    Ok(graph)
}

fn check_theta_trivial(sys: &FactorSystem, cert: &ConjectureCertificate) -> (CheckStatus, String) {
    let fp = sys.g();
    let mut failures = Vec::new();
    let mut count = 0;
    for f in &cert.factors {
        let l = f.lambda;
        for (i, x) in f.reps.iter().enumerate() {
            count += 1;
            let image = sys.theta_word(x);
            if !image.is_identity() {
                failures.push(format!("Θ(x_{l},{i} = `{x}`) = `{image}`"));
            }
            let g = &f.g_corrections[i];
            if fp.multiply(&fp.invert(g), &f.beta_primes[i]) != *x {
                failures.push(format!("x_{l},{i} is not g⁻¹·β′"));
            }
        }
    }
    verdict(failures, format!("{count} representatives map to 1"))
}

fn check_factor_images(sys: &FactorSystem, cert: &ConjectureCertificate) -> (CheckStatus, String) {
    let mut failures = Vec::new();
    for f in &cert.factors {
        let l = f.lambda;
        let mut images = Vec::new();
        for w in &f.h_lambda_gens {
            match sys.theta_word(w).as_factor_element(l) {
                Some(b) => images.push(b),
                None => failures.push(format!("Θ(`{w}`) leaves B_{l}")),
            }
        }
        let b = sys.b().factor(l);
        let closure = b.subgroup_closure(images);
        if closure.len() != b.order() {
            failures.push(format!("images of H_{l} generate {} of {} elements of B_{l}", closure.len(), b.order()));
        }
    }
    verdict(failures, "each H_λ maps onto B_λ".into())
}

fn check_vertex_groups(fp: &FreeProduct, graph: &CoreGraph, cert: &ConjectureCertificate) -> (CheckStatus, String) {
    let mut failures = Vec::new();
    for f in &cert.factors {
        let l = f.lambda;
        for (i, x) in f.reps.iter().enumerate() {
            let x_inv = fp.invert(x);
            let exact: BTreeSet<Word> = fp
                .factor(l)
                .elements()
                .map(|g| fp.multiply_all([&x_inv, &Word::letter(l, g), x]))
                .filter(|w| graph.membership(w))
                .collect();
            let listed: BTreeSet<Word> = f.vertex_groups[i].iter().cloned().collect();
            if exact != listed || listed.len() != f.vertex_groups[i].len() {
                failures.push(format!("H ∩ G_{l}^x for x = `{x}` has {} elements, certificate lists {}", exact.len(), f.vertex_groups[i].len()));
            }
        }
    }
    verdict(failures, "listed vertex groups equal H ∩ G_λ^x".into())
}

fn check_double_cosets(fp: &FreeProduct, graph: &CoreGraph, cert: &ConjectureCertificate) -> (CheckStatus, String) {
    let mut failures = Vec::new();
    for f in &cert.factors {
        let l = f.lambda;
        let orbit = match brute_force_double_cosets(fp, graph, l) {
            Ok(o) => o,
            Err(e) => return (CheckStatus::Fail, e.to_string()),
        };
        let mut used = BTreeSet::new();
        for x in &f.reps {
            // G_λ·x·H ↔ orbit of the coset H·x⁻¹
            let v = graph.trace(graph.base(), &fp.invert(x)).expect("complete graph");
            if !used.insert(orbit[v]) {
                failures.push(format!("λ={l}: `{x}` repeats a double coset"));
            }
        }
        let meets = fp.factor(l).nontrivial_elements().any(|g| graph.act(graph.base(), l, g) == Some(graph.base()));
        if meets && !f.reps.iter().any(Word::is_identity) {
            failures.push(format!("λ={l}: H ∩ G_{l} ≠ 1 but G_{l}H has no representative 1"));
        }
    }
    verdict(failures, "representatives lie in distinct double cosets".into())
}

fn check_generation(fp: &FreeProduct, graph: &CoreGraph, cert: &ConjectureCertificate, max_cosets: usize) -> (CheckStatus, String) {
    let parts: Vec<Word> = cert
        .factors
        .iter()
        .flat_map(|f| f.vertex_groups.iter().flatten().chain(&f.f_basis).chain(&f.h_lambda_gens))
        .cloned()
        .collect();
    let outside: Vec<String> = parts.iter().filter(|w| !graph.membership(w)).map(|w| format!("`{w}` is not in H")).collect();
    if !outside.is_empty() {
        return (CheckStatus::Fail, outside.join("; "));
    }
    let pieces: Vec<Word> = cert.factors.iter().flat_map(|f| f.vertex_groups.iter().flatten().chain(&f.f_basis)).cloned().collect();
    match complete_graph(fp, &build_core(fp, &pieces), max_cosets) {
        Ok(g) if g.canonical_encoding() == graph.canonical_encoding() => (CheckStatus::Pass, "vertex groups and free bases generate H".into()),
        Ok(g) => (CheckStatus::Fail, format!("parts generate a subgroup of index {}", g.vertex_count())),
        Err(e) => (CheckStatus::Fail, format!("parts generate a subgroup of larger index: {e}")),
    }
}

fn check_additivity(fp: &FreeProduct, graph: &CoreGraph, cert: &ConjectureCertificate) -> (CheckStatus, String) {
    let whole = match kurosh_decompose(fp, graph) {
        Ok(d) => kurosh_invariants(fp, &d),
        Err(e) => return (CheckStatus::Fail, e.to_string()),
    };
    let mut failures = Vec::new();
    let mut sum = KuroshInvariants::default();
    for f in &cert.factors {
        let l = f.lambda;
        let computed = match kurosh_decompose(fp, &build_core(fp, &f.h_lambda_gens)) {
            Ok(d) => kurosh_invariants(fp, &d),
            Err(e) => return (CheckStatus::Fail, e.to_string()),
        };
        let listed = listed_invariants(fp, l, &f.reps, &f.vertex_groups, f.f_basis.len());
        match listed {
            Some(li) if li == computed => {}
            Some(_) => failures.push(format!("listed pieces of H_{l} do not match its Kurosh decomposition")),
            None => failures.push(format!("a vertex group of H_{l} is not conjugate into G_{l} by its representative")),
        }
        sum.add(&computed);
    }
    if sum != whole {
        failures.push(format!(
            "H has {} pieces and free rank {}, the H_λ together {} and {}",
            whole.piece_count(),
            whole.free_rank,
            sum.piece_count(),
            sum.free_rank
        ));
    }
    verdict(failures, format!("{} pieces, free rank {}", whole.piece_count(), whole.free_rank))
}

fn listed_invariants(fp: &FreeProduct, l: usize, reps: &[Word], groups: &[Vec<Word>], free_rank: usize) -> Option<KuroshInvariants> {
    let mut inv = KuroshInvariants {
        free_rank,
        ..Default::default()
    };
    for (x, elements) in reps.iter().zip(groups) {
        let x_inv = fp.invert(x);
        let s: BTreeSet<usize> = elements
            .iter()
            .map(|w| fp.multiply_all([x, w, &x_inv]).as_factor_element(l))
            .collect::<Option<_>>()?;
        if s.len() > 1 {
            let key = fp.factor(l).conjugacy_class_key(&s);
            *inv.pieces.entry((l, key)).or_default() += 1;
        }
    }
    Some(inv)
}

/// One letter of an alternating product: a nontrivial vertex-group element
/// or a free-basis letter `f^±1`.
#[derive(Debug, Clone)]
struct Part {
    part: usize,
    free: bool,
    word: Word,
}

fn free_parts(fp: &FreeProduct, cert: &ConjectureCertificate) -> Vec<Part> {
    let mut items = Vec::new();
    let mut part = 0;
    for f in &cert.factors {
        for group in &f.vertex_groups {
            items.extend(group.iter().filter(|w| !w.is_identity()).map(|w| Part {
                part,
                free: false,
                word: w.clone(),
            }));
            part += 1;
        }
        for b in &f.f_basis {
            for word in [b.clone(), fp.invert(b)] {
                items.push(Part { part, free: true, word });
            }
            part += 1;
        }
    }
    items
}

/// Consecutive letters come from different parts, except that a free letter
/// may repeat itself.
fn adjacent(a: &Part, b: &Part) -> bool {
    a.part != b.part || (a.free && a.word == b.word)
}

/// Number of alternating sequences of each length `1..=len`.
fn sequence_counts(items: &[Part], len: usize) -> Vec<u64> {
    let n = items.len();
    let mut ending = vec![1u64; n];
    let mut totals = vec![n as u64];
    for _ in 1..len {
        let next: Vec<u64> = (0..n)
            .map(|j| (0..n).filter(|&i| adjacent(&items[i], &items[j])).map(|i| ending[i]).fold(0u64, u64::saturating_add))
            .collect();
        ending = next;
        totals.push(ending.iter().copied().fold(0, u64::saturating_add));
    }
    totals
}

fn check_bounded_freeness(fp: &FreeProduct, cert: &ConjectureCertificate, params: &VerifyParams) -> (CheckStatus, String) {
    let items = free_parts(fp, cert);
    let len = params.free_test_len;
    if items.is_empty() || len == 0 {
        return (CheckStatus::Pass, format!("bounded: no letters to combine up to length {len} (exhaustive)"));
    }
    if let Some(p) = items.iter().find(|p| p.word.is_identity()) {
        return (CheckStatus::Fail, format!("letter `{}` is trivial", p.word));
    }
    if items.len() >= u16::MAX as usize {
        return (CheckStatus::Skipped, format!("{} letters exceed the search limit", items.len()));
    }
    let counts = sequence_counts(&items, len.div_ceil(2));
    let work = counts.iter().fold(0u64, |a, &c| a.saturating_add(c));
    let exhaustive = work <= params.free_test_budget && len <= 16;
    let found = if exhaustive {
        exhaustive_relation(fp, &items, len, params.seed)
    } else {
        sampled_relation(fp, &items, len, params)
    };
    match found {
        Some(seq) => {
            let text: Vec<String> = seq.iter().map(|&i| format!("({})", items[i].word)).collect();
            (CheckStatus::Fail, format!("relation of length {}: {} = 1", seq.len(), text.join("·")))
        }
        None => {
            let mode = if exhaustive { "exhaustive".to_string() } else { format!("sampled, seed {}", params.seed) };
            (CheckStatus::Pass, format!("bounded: no relation among {} letters up to length {len} ({mode})", items.len()))
        }
    }
}

/// Points of a random action of `G` in which every factor acts semiregularly
/// on most points. Equal products act equally, so comparing the images of a
/// few tracked points never misses a relation; matches are confirmed on
/// words.
struct Fingerprint {
    /// `perm[i]`: the action of letter `i`, and `inv[i]` of its inverse.
    perm: Vec<Vec<u32>>,
    inv: Vec<Vec<u32>>,
    tracked: Points,
}

const FINGERPRINT_POINTS: usize = 1 << 14;
const TRACKED: usize = 6;
type Points = [u32; TRACKED];

impl Fingerprint {
    fn new(fp: &FreeProduct, items: &[Part], seed: u64) -> Self {
        use rand::seq::SliceRandom;
        let m = FINGERPRINT_POINTS;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        // factor_perm[λ][g][p]
        let factor_perm: Vec<Vec<Vec<u32>>> = fp
            .factors()
            .iter()
            .map(|group| {
                let n = group.order();
                let mut points: Vec<u32> = (0..m as u32).collect();
                points.shuffle(&mut rng);
                let mut act: Vec<Vec<u32>> = vec![(0..m as u32).collect(); n];
                for block in points.chunks_exact(n) {
                    for g in 0..n {
                        for h in 0..n {
                            act[g][block[h] as usize] = block[group.mul(h, g)];
                        }
                    }
                }
                act
            })
            .collect();
        let apply = |w: &Word| -> Vec<u32> {
            (0..m as u32)
                .map(|p| w.syllables().iter().fold(p, |q, s| factor_perm[s.factor][s.elem][q as usize]))
                .collect()
        };
        let perm = items.iter().map(|it| apply(&it.word)).collect();
        let inv = items.iter().map(|it| apply(&fp.invert(&it.word))).collect();
        let tracked = std::array::from_fn(|_| rng.gen_range(0..m as u32));
        Fingerprint { perm, inv, tracked }
    }
}

fn key(points: &Points) -> u64 {
    points.iter().fold(0x243f_6a88_85a3_08d3u64, |h, &p| {
        let x = (h ^ u64::from(p)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        x ^ (x >> 29)
    })
}

/// Sorted left halves, indexed by the top bits of their keys.
struct LeftTable {
    keys: Vec<(u64, u32)>,
    arena: Vec<u16>,
    stride: usize,
    /// `starts[b]..starts[b + 1]`: entries whose key has top bits `b`.
    starts: Vec<u32>,
    shift: u32,
}

impl LeftTable {
    fn new(mut keys: Vec<(u64, u32)>, arena: Vec<u16>, stride: usize) -> Self {
        keys.sort_unstable();
        let buckets = keys.len().max(1).next_power_of_two().clamp(2, 1 << 26);
        let shift = 64 - buckets.trailing_zeros();
        let mut starts = vec![0u32; buckets + 1];
        for &(k, _) in &keys {
            starts[(k >> shift) as usize + 1] += 1;
        }
        for b in 0..buckets {
            starts[b + 1] += starts[b];
        }
        LeftTable {
            keys,
            arena,
            stride,
            starts,
            shift,
        }
    }

    fn matches(&self, k: u64) -> impl Iterator<Item = &[u16]> + '_ {
        let b = (k >> self.shift) as usize;
        let range = self.starts[b] as usize..self.starts[b + 1] as usize;
        self.keys[range].iter().filter(move |e| e.0 == k).map(move |&(_, idx)| {
            let s = &self.arena[idx as usize * self.stride..][..self.stride];
            let n = s.iter().position(|&i| i == u16::MAX).unwrap_or(s.len());
            &s[..n]
        })
    }
}

/// Meet in the middle. A shortest relation can be rotated so that it starts
/// with its least letter, so left halves are enumerated only in that form.
/// A relation `l·r = 1` is found by matching the tracked points moved by `l`
/// with those moved by `r⁻¹`.
fn exhaustive_relation(fp: &FreeProduct, items: &[Part], len: usize, seed: u64) -> Option<Vec<usize>> {
    let left_len = len.div_ceil(2);
    let right_len = len / 2;
    if right_len == 0 {
        return None;
    }
    let print = Fingerprint::new(fp, items, seed);
    let adj: Vec<Vec<bool>> = items.iter().map(|a| items.iter().map(|b| adjacent(a, b)).collect()).collect();

    let mut keys: Vec<(u64, u32)> = Vec::new();
    let mut arena: Vec<u16> = Vec::new();
    let mut seq = [0u16; 16];
    walk_left(&print, &adj, left_len, &mut seq, 0, &print.tracked, &mut |s, pts| {
        let idx = (arena.len() / left_len) as u32;
        arena.extend(s.iter().copied().chain(std::iter::repeat(u16::MAX)).take(left_len));
        keys.push((key(pts), idx));
    });
    let table = LeftTable::new(keys, arena, left_len);

    let mut found = None;
    let mut rev = [0u16; 16];
    walk_right(&print, &adj, right_len, &mut rev, 0, &print.tracked, &mut |r, pts| {
        if found.is_some() {
            return;
        }
        let k = key(pts);
        // `r` holds the right half in reverse
        let first = r[r.len() - 1] as usize;
        for l in table.matches(k) {
            let ok_len = l.len() == r.len() || l.len() == r.len() + 1;
            if !ok_len || !adj[l[l.len() - 1] as usize][first] {
                continue;
            }
            let whole: Vec<usize> = l.iter().chain(r.iter().rev()).map(|&i| i as usize).collect();
            if fp.multiply_all(whole.iter().map(|&i| &items[i].word)).is_identity() {
                found = Some(whole);
                return;
            }
        }
    });
    found
}

/// Alternating sequences whose first letter is least, with the tracked
/// points moved by their product.
fn walk_left(print: &Fingerprint, adj: &[Vec<bool>], max_len: usize, seq: &mut [u16; 16], depth: usize, pts: &Points, visit: &mut dyn FnMut(&[u16], &Points)) {
    if depth > 0 {
        visit(&seq[..depth], pts);
    }
    if depth == max_len {
        return;
    }
    let floor = if depth == 0 { 0 } else { seq[0] as usize };
    for i in floor..adj.len() {
        if depth > 0 && !adj[seq[depth - 1] as usize][i] {
            continue;
        }
        let perm = &print.perm[i];
        let next: Points = std::array::from_fn(|t| perm[pts[t] as usize]);
        seq[depth] = i as u16;
        walk_left(print, adj, max_len, seq, depth + 1, &next, visit);
    }
}

/// All alternating sequences, grown at the front and stored reversed, with
/// the tracked points moved by the inverse of their product.
fn walk_right(print: &Fingerprint, adj: &[Vec<bool>], max_len: usize, rev: &mut [u16; 16], depth: usize, pts: &Points, visit: &mut dyn FnMut(&[u16], &Points)) {
    if depth > 0 {
        visit(&rev[..depth], pts);
    }
    if depth == max_len {
        return;
    }
    for i in 0..adj.len() {
        if depth > 0 && !adj[i][rev[depth - 1] as usize] {
            continue;
        }
        // (r_i · r)⁻¹ = r⁻¹ · r_i⁻¹
        let inv = &print.inv[i];
        let next: Points = std::array::from_fn(|t| inv[pts[t] as usize]);
        rev[depth] = i as u16;
        walk_right(print, adj, max_len, rev, depth + 1, &next, visit);
    }
}

fn sampled_relation(fp: &FreeProduct, items: &[Part], len: usize, params: &VerifyParams) -> Option<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let samples = (params.free_test_budget / len as u64).min(200_000);
    for _ in 0..samples {
        let k = rng.gen_range(2..=len.max(2));
        let mut seq: Vec<usize> = vec![rng.gen_range(0..items.len())];
        while seq.len() < k {
            let last = &items[*seq.last().expect("nonempty")];
            let options: Vec<usize> = (0..items.len()).filter(|&j| adjacent(last, &items[j])).collect();
            if options.is_empty() {
                break;
            }
            seq.push(options[rng.gen_range(0..options.len())]);
        }
        if fp.multiply_all(seq.iter().map(|&i| &items[i].word)).is_identity() {
            return Some(seq);
        }
    }
    None
}
