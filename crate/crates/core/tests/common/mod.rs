//! Seeded battery of shift spaces and potentials shared by the integration tests.
#![allow(dead_code)]

use alchemy_core::{LocallyConstantPotential, PastWord, ShiftSpace, TwoSidedCylinder, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed_a1c4;
/// Half-width of the interval random potential values are drawn from.
pub const SPREAD: f64 = 0.3;

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// A 3-symbol primitive shift: `0→0,1`, `1→1,2`, `2→2,0`.
pub fn three_cycle() -> ShiftSpace {
    ShiftSpace::new(3, &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]], 0.5).unwrap()
}

pub fn battery_spaces() -> Vec<(&'static str, ShiftSpace)> {
    vec![
        ("full 2-shift", ShiftSpace::full(2)),
        ("golden mean", ShiftSpace::golden_mean()),
    ]
}

pub fn random_potential(
    space: &ShiftSpace,
    window: Window,
    spread: f64,
    rng: &mut ChaCha8Rng,
) -> LocallyConstantPotential {
    let entries: Vec<_> = space
        .words(window.len())
        .map(|w| (w, rng.gen_range(-spread..spread)))
        .collect();
    LocallyConstantPotential::from_table(space, window, entries).unwrap()
}

/// `count` pairs `(G1, G2)` with random window-2 `G2`; `G1` alternates between zero and a
/// second random window-2 potential.
pub fn battery(
    space: &ShiftSpace,
    count: usize,
    salt: u64,
) -> Vec<(LocallyConstantPotential, LocallyConstantPotential)> {
    let mut rng = rng(salt);
    let w2 = Window::one_sided(2).unwrap();
    (0..count)
        .map(|j| {
            let g2 = random_potential(space, w2, SPREAD, &mut rng);
            let g1 = if j % 2 == 0 {
                LocallyConstantPotential::zero(space)
            } else {
                random_potential(space, w2, SPREAD, &mut rng)
            };
            (g1, g2)
        })
        .collect()
}

/// Eventually periodic pasts: one per symbol, plus a mixed one.
pub fn pasts(space: &ShiftSpace) -> Vec<PastWord> {
    let mut out: Vec<PastWord> = (0..space.k())
        .filter_map(|s| PastWord::constant(space, s).ok())
        .collect();
    let mixed: Vec<usize> = space.words(3).find(|w| w.iter().any(|&x| x != w[0]) && space.allows(w[2], w[0])).unwrap();
    out.push(PastWord::new(space, mixed).unwrap());
    out
}

/// Every admissible cylinder with span at most `max_span` and start in `starts`.
pub fn cylinders(space: &ShiftSpace, max_span: usize, starts: &[i64]) -> Vec<TwoSidedCylinder> {
    let mut out = Vec::new();
    for len in 1..=max_span {
        for w in space.words(len) {
            for &a in starts {
                out.push(TwoSidedCylinder::new(space, a, w.clone()).unwrap());
            }
        }
    }
    out
}
