//! Finite groups given by multiplication tables, and homomorphisms between them.
//!
//! Elements are dense indices `0..order`; the identity is always index 0.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("malformed table: {0}")]
    MalformedTable(String),
    #[error("table has no two-sided identity")]
    NoIdentity,
    #[error("element {0} has no inverse (row or column is not a permutation)")]
    NotInvertible(usize),
    #[error("multiplication is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("map is not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("homomorphism is not surjective")]
    NotSurjective,
    #[error("no preimage of {0}")]
    NoPreimage(usize),
    #[error("unsupported group: {0}")]
    Unsupported(String),
}

/// A finite group stored extensionally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    /// `labels[i]` is the index element `i` had in the table it was loaded from.
    labels: Vec<usize>,
}

impl FiniteGroup {
    /// Validates a Cayley table. If the identity is not at index 0 it is
    /// swapped there; [`FiniteGroup::internal_index`] translates the caller's
    /// labels.
    pub fn from_table(name: impl Into<String>, table: &[Vec<usize>]) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::MalformedTable("empty table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::MalformedTable(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(GroupError::MalformedTable(format!("entry {bad} out of range in row {i}")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or(GroupError::NoIdentity)?;

        // relabel: swap 0 and identity
        let mut labels: Vec<usize> = (0..n).collect();
        labels.swap(0, identity);
        let mut to_internal = vec![0; n];
        for (internal, &orig) in labels.iter().enumerate() {
            to_internal[orig] = internal;
        }
        let mut mul = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = to_internal[table[labels[a]][labels[b]]];
            }
        }

        for a in 0..n {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for b in 0..n {
                row_seen[mul[a * n + b]] = true;
                col_seen[mul[b * n + a]] = true;
            }
            if row_seen.iter().chain(col_seen.iter()).any(|s| !s) {
                return Err(GroupError::NotInvertible(labels[a]));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a * n + b];
                for c in 0..n {
                    if mul[ab * n + c] != mul[a * n + mul[b * n + c]] {
                        return Err(GroupError::NotAssociative(labels[a], labels[b], labels[c]));
                    }
                }
            }
        }
        let inv = (0..n)
            .map(|a| (0..n).find(|&b| mul[a * n + b] == 0).expect("rows are permutations"))
            .collect();
        Ok(FiniteGroup {
            name: name.into(),
            order: n,
            mul,
            inv,
            labels,
        })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// Cyclic group of order `n`; element `k` is the `k`-th power of the generator.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1, "cyclic group needs positive order");
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let mut g = Self::from_table(format!("Z{n}"), &table).expect("cyclic table is a group");
        if n == 1 {
            g.name = "1".into();
        }
        g
    }

    /// Symmetric group on `n <= 5` points. Elements are the permutations in
    /// lexicographic order of their image lists (identity first); the product
    /// `a*b` applies `a` first, then `b`.
    pub fn sym(n: usize) -> Result<Self, GroupError> {
        if n == 0 || n > 5 {
            return Err(GroupError::Unsupported(format!("sym {n}: only 1..=5 supported")));
        }
        let perms = permutations(n);
        let index_of = |p: &[usize]| perms.iter().position(|q| q.as_slice() == p).expect("closed");
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| {
                        let c: Vec<usize> = (0..n).map(|i| b[a[i]]).collect();
                        index_of(&c)
                    })
                    .collect()
            })
            .collect();
        Self::from_table(format!("S{n}"), &table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn nontrivial_elements(&self) -> std::ops::Range<usize> {
        1..self.order
    }

    /// The full table, as rows of internal indices.
    pub fn table(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|a| (0..self.order).map(|b| self.mul(a, b)).collect())
            .collect()
    }

    /// Original label of an internal index.
    pub fn label(&self, internal: usize) -> usize {
        self.labels[internal]
    }

    /// Internal index of an element given by its original label.
    pub fn internal_index(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Smallest subgroup containing `gens`.
    pub fn subgroup_closure(&self, gens: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let gens: Vec<usize> = gens.into_iter().filter(|&g| g != 0).collect();
        let mut seen = BTreeSet::from([0]);
        let mut frontier = vec![0];
        // finite group: closure under right multiplication by generators suffices
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        seen
    }

    /// Lexicographically least sorted element list among the conjugates
    /// `g^-1 S g` of the subgroup `subgroup`.
    pub fn conjugacy_class_key(&self, subgroup: &BTreeSet<usize>) -> Vec<usize> {
        self.elements()
            .map(|g| {
                let gi = self.inv(g);
                let mut conj: Vec<usize> = subgroup.iter().map(|&s| self.mul(self.mul(gi, s), g)).collect();
                conj.sort_unstable();
                conj
            })
            .min()
            .expect("group is nonempty")
    }

    /// All subgroups, each as a sorted element set, in a deterministic order.
    pub fn subgroups(&self) -> Vec<BTreeSet<usize>> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue = vec![self.subgroup_closure([])];
        found.insert(queue[0].iter().copied().collect());
        while let Some(s) = queue.pop() {
            for g in self.elements() {
                if !s.contains(&g) {
                    let t = self.subgroup_closure(s.iter().copied().chain([g]));
                    if found.insert(t.iter().copied().collect()) {
                        queue.push(t);
                    }
                }
            }
        }
        found.into_iter().map(|v| v.into_iter().collect()).collect()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// A homomorphism between finite groups, stored as a lookup table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    source_order: usize,
    target_order: usize,
    map: Vec<usize>,
}

impl GroupHom {
    pub fn new(source: &FiniteGroup, target: &FiniteGroup, map: Vec<usize>) -> Result<Self, GroupError> {
        if map.len() != source.order() {
            return Err(GroupError::NotHomomorphism(format!(
                "map has length {}, source has order {}",
                map.len(),
                source.order()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&b| b >= target.order()) {
            return Err(GroupError::NotHomomorphism(format!("image {bad} out of range")));
        }
        for x in source.elements() {
            for y in source.elements() {
                if map[source.mul(x, y)] != target.mul(map[x], map[y]) {
                    return Err(GroupError::NotHomomorphism(format!("fails on ({x}, {y})")));
                }
            }
        }
        Ok(GroupHom {
            source_order: source.order(),
            target_order: target.order(),
            map,
        })
    }

    pub fn identity(group: &FiniteGroup) -> Self {
        GroupHom {
            source_order: group.order(),
            target_order: group.order(),
            map: group.elements().collect(),
        }
    }

    pub fn trivial(source: &FiniteGroup) -> Self {
        GroupHom {
            source_order: source.order(),
            target_order: 1,
            map: vec![0; source.order()],
        }
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn source_order(&self) -> usize {
        self.source_order
    }

    pub fn target_order(&self) -> usize {
        self.target_order
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target_order];
        for &b in &self.map {
            hit[b] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn kernel(&self) -> BTreeSet<usize> {
        (0..self.source_order).filter(|&x| self.map[x] == 0).collect()
    }

    /// Smallest source element mapping to `b`.
    pub fn solve_preimage(&self, b: usize) -> Result<usize, GroupError> {
        self.map.iter().position(|&y| y == b).ok_or(GroupError::NoPreimage(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_validates() {
        let g = FiniteGroup::from_table("Z2", &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.inv(0), 0);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn z3_validates() {
        let g = FiniteGroup::from_table("Z3", &[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        assert_eq!(g.inv(1), 2);
    }

    #[test]
    fn bad_tables() {
        assert_eq!(
            FiniteGroup::from_table("x", &[vec![0, 1], vec![1, 1]]),
            Err(GroupError::NotInvertible(1))
        );
        assert!(matches!(
            FiniteGroup::from_table("x", &[vec![0, 1], vec![1]]),
            Err(GroupError::MalformedTable(_))
        ));
        assert!(matches!(
            FiniteGroup::from_table("x", &[vec![0, 2], vec![1, 0]]),
            Err(GroupError::MalformedTable(_))
        ));
        assert_eq!(
            FiniteGroup::from_table("x", &[vec![1, 0], vec![0, 0]]),
            Err(GroupError::NoIdentity)
        );
        // a Latin square with identity 0 that is not associative (order 5 loop)
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(
            FiniteGroup::from_table("loop", &loop5),
            Err(GroupError::NotAssociative(..))
        ));
    }

    #[test]
    fn identity_is_moved_to_zero() {
        // Z2 with identity labelled 1
        let g = FiniteGroup::from_table("Z2'", &[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(g.mul(1, 1), 0);
        assert_eq!(g.internal_index(1), Some(0));
        assert_eq!(g.internal_index(0), Some(1));
        assert_eq!(g.label(0), 1);
    }

    #[test]
    fn closure_examples() {
        let z3 = FiniteGroup::cyclic(3);
        assert_eq!(z3.subgroup_closure([]), BTreeSet::from([0]));
        assert_eq!(z3.subgroup_closure([1]), BTreeSet::from([0, 1, 2]));

        let s3 = FiniteGroup::sym(3).unwrap();
        // lexicographic order: 0=[0,1,2] 1=[0,2,1] 2=[1,0,2] 3=[1,2,0] 4=[2,0,1] 5=[2,1,0]
        // exhaustive closure of the transposition [0,2,1]: it squares to the identity
        assert_eq!(s3.mul(1, 1), 0);
        assert_eq!(s3.subgroup_closure([1]), BTreeSet::from([0, 1]));
        assert_eq!(s3.subgroup_closure([1, 2]).len(), 6);
        assert_eq!(s3.subgroup_closure([3]), BTreeSet::from([0, 3, 4]));
    }

    #[test]
    fn sym_orders() {
        for (n, ord) in [(1, 1), (2, 2), (3, 6), (4, 24), (5, 120)] {
            assert_eq!(FiniteGroup::sym(n).unwrap().order(), ord);
        }
        assert!(FiniteGroup::sym(6).is_err());
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(FiniteGroup::sym(3).unwrap().subgroups().len(), 6);
        assert_eq!(FiniteGroup::cyclic(4).subgroups().len(), 3);
    }

    #[test]
    fn preimages() {
        let z2 = FiniteGroup::cyclic(2);
        let id = GroupHom::new(&z2, &z2, vec![0, 1]).unwrap();
        assert_eq!(id.solve_preimage(1), Ok(1));
        let z3 = FiniteGroup::cyclic(3);
        let t = GroupHom::new(&z3, &FiniteGroup::trivial(), vec![0, 0, 0]).unwrap();
        assert_eq!(t.solve_preimage(0), Ok(0));
        let z4 = FiniteGroup::cyclic(4);
        let m = GroupHom::new(&z4, &z2, vec![0, 1, 0, 1]).unwrap();
        assert_eq!(m.solve_preimage(1), Ok(1));
        assert!(m.is_surjective());
        assert_eq!(m.kernel(), BTreeSet::from([0, 2]));
    }

    #[test]
    fn non_homomorphism_rejected() {
        let z2 = FiniteGroup::cyclic(2);
        let z3 = FiniteGroup::cyclic(3);
        assert!(GroupHom::new(&z3, &z2, vec![0, 1, 1]).is_err());
        let inj = GroupHom::new(&FiniteGroup::trivial(), &z2, vec![0]).unwrap();
        assert!(!inj.is_surjective());
        assert_eq!(inj.solve_preimage(1), Err(GroupError::NoPreimage(1)));
    }

    #[test]
    fn group_axioms_hold_exhaustively() {
        for g in [FiniteGroup::cyclic(4), FiniteGroup::sym(3).unwrap(), FiniteGroup::sym(4).unwrap()] {
            for x in g.elements() {
                assert_eq!(g.mul(x, g.inv(x)), 0);
                assert_eq!(g.mul(0, x), x);
                for y in g.elements() {
                    for z in g.elements() {
                        assert_eq!(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z)));
                    }
                }
            }
        }
    }
}
