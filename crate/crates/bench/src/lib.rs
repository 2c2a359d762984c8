// SPDX-License-Identifier: Apache-2.0

//! Seeded workloads shared by the benchmarks in `benches/`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use softc_core::truthtable::parse_truth_table;
use softc_core::{Minterms, OutputBit, TruthTable};

pub const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

pub fn names(n: usize) -> Vec<String> {
    NAMES[..n].iter().map(|s| s.to_string()).collect()
}

/// Random function of `n` inputs: each row is on with probability
/// `density`, after a `dont_care` chance of being unspecified.
pub fn random_minterms(seed: u64, n: usize, density: f64, dont_care: f64) -> Minterms {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut on = Vec::new();
    let mut dc = Vec::new();
    for r in 0..1u32 << n {
        if rng.random_bool(dont_care) {
            dc.push(r);
        } else if rng.random_bool(density) {
            on.push(r);
        }
    }
    Minterms::new(n, on, dc)
}

/// The same function as a single-output table named `Q`.
pub fn random_table(seed: u64, n: usize, density: f64, dont_care: f64) -> TruthTable {
    let m = random_minterms(seed, n, density, dont_care);
    TruthTable::from_fn(&NAMES[..n], "Q", |r| {
        if m.on_set.contains(&r) {
            OutputBit::One
        } else if m.dc_set.contains(&r) {
            OutputBit::DontCare
        } else {
            OutputBit::Zero
        }
    })
    .expect("valid table")
}

/// The three-input table whose optimum is `(~B & C) | (A & C)`.
pub fn complex_table() -> TruthTable {
    parse_truth_table(
        "A B C | Q\n0 0 0 | 0\n0 0 1 | 1\n0 1 0 | 0\n0 1 1 | 0\n1 0 0 | 0\n1 0 1 | 1\n1 1 0 | 0\n1 1 1 | 1\n",
    )
    .expect("valid table")
}
