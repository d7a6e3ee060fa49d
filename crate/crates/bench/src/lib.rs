//! Benchmark fixtures.

use higgins_core::higgins::image_is_onto;
use higgins_core::testgen::RandomInstance;
use higgins_core::{FactorSystem, FiniteGroup, FreeProduct, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub name: String,
    pub system: FactorSystem,
    pub gens: Vec<Word>,
}

fn words(fp: &FreeProduct, texts: &[&str]) -> Vec<Word> {
    texts.iter().map(|t| fp.parse_word(t).expect("fixture word")).collect()
}

/// `⟨a, bab⟩ ≤ Z2 * Z2` with `Θ = (id, trivial)`.
pub fn two_factor() -> Fixture {
    let g = vec![FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)];
    let b = vec![FiniteGroup::cyclic(2), FiniteGroup::trivial()];
    let system = FactorSystem::from_maps(g, b, vec![vec![0, 1], vec![0, 0]]).expect("fixture system");
    let gens = words(system.g(), &["0:1", "1:1 0:1 1:1"]);
    Fixture { name: "two_factor".into(), system, gens }
}

/// The kernel of `Z2 * Z3 → Z3` with `Θ = (id, trivial)`.
pub fn kernel_z2_z3() -> Fixture {
    let g = vec![FiniteGroup::cyclic(2), FiniteGroup::cyclic(3)];
    let b = vec![FiniteGroup::cyclic(2), FiniteGroup::trivial()];
    let system = FactorSystem::from_maps(g, b, vec![vec![0, 1], vec![0, 0, 0]]).expect("fixture system");
    let gens = words(system.g(), &["0:1", "1:1 0:1 1:2", "1:2 0:1 1:1"]);
    Fixture { name: "kernel_z2_z3".into(), system, gens }
}

/// Seeded random subgroups of index at most `max_index` whose image is all of `B`.
pub fn random(count: usize, max_index: usize, seed: u64) -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let inst = RandomInstance::generate(&mut rng, 3, max_index);
        let system = inst.random_system(&mut rng);
        if image_is_onto(&system, &inst.gens) {
            out.push(Fixture {
                name: format!("random_{}_index_{}", out.len(), inst.index),
                system,
                gens: inst.gens,
            });
        }
    }
    out
}
