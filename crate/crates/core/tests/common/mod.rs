// SPDX-License-Identifier: Apache-2.0

//! Independent oracles shared by the integration and acceptance tests.
//! Nothing here calls into the minimizer or the simulator.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use softc_core::expr::Expr;
use softc_core::truthtable::{OutputBit, TruthTable};

pub const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

pub fn names(n: usize) -> Vec<String> {
    NAMES[..n].iter().map(|s| s.to_string()).collect()
}

/// Row `row` as an assignment; the first name is the most significant bit.
pub fn assignment(names: &[String], row: u32) -> BTreeMap<String, bool> {
    let n = names.len();
    names
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), row & (1 << (n - 1 - i)) != 0))
        .collect()
}

/// Direct recursive evaluation, written separately from the library's.
pub fn eval(e: &Expr, a: &BTreeMap<String, bool>) -> bool {
    match e {
        Expr::Const(b) => *b,
        Expr::Var(v) => a[v],
        Expr::Not(x) => !eval(x, a),
        Expr::And(xs) => xs.iter().all(|x| eval(x, a)),
        Expr::Or(xs) => xs.iter().any(|x| eval(x, a)),
    }
}

/// Table over `n` inputs whose row `r` holds `bits[r]`.
pub fn table(n: usize, bits: &[OutputBit]) -> TruthTable {
    TruthTable::from_fn(&NAMES[..n], "Q", |r| bits[r as usize]).unwrap()
}

/// Function number `code` over `n` inputs: bit `r` of `code` is row `r`.
pub fn boolean_table(n: usize, code: u32) -> TruthTable {
    TruthTable::from_fn(&NAMES[..n], "Q", |r| {
        if code >> r & 1 == 1 {
            OutputBit::One
        } else {
            OutputBit::Zero
        }
    })
    .unwrap()
}

/// Function number `code` over `n` inputs in base 3: digit `r` is row `r`
/// (0, 1, don't care).
pub fn ternary_table(n: usize, mut code: u32) -> TruthTable {
    let mut bits = Vec::with_capacity(1 << n);
    for _ in 0..1 << n {
        bits.push(match code % 3 {
            0 => OutputBit::Zero,
            1 => OutputBit::One,
            _ => OutputBit::DontCare,
        });
        code /= 3;
    }
    table(n, &bits)
}

pub fn random_table(rng: &mut impl Rng, n: usize, dont_care: f64) -> TruthTable {
    let bits: Vec<OutputBit> = (0..1 << n)
        .map(|_| {
            if rng.random_bool(dont_care) {
                OutputBit::DontCare
            } else if rng.random_bool(0.5) {
                OutputBit::One
            } else {
                OutputBit::Zero
            }
        })
        .collect();
    table(n, &bits)
}

/// `(on, dc)` rows of the single output column.
pub fn sets(t: &TruthTable) -> (Vec<u32>, Vec<u32>) {
    let mut on = Vec::new();
    let mut dc = Vec::new();
    for r in 0..t.row_count() as u32 {
        match t.output(r, 0) {
            OutputBit::One => on.push(r),
            OutputBit::DontCare => dc.push(r),
            OutputBit::Zero => {}
        }
    }
    (on, dc)
}

/// A cube: `care` bits fixed to `value`, the rest free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cube {
    pub care: u32,
    pub value: u32,
}

impl Cube {
    pub fn covers(self, row: u32) -> bool {
        row & self.care == self.value
    }

    pub fn literals(self) -> u32 {
        self.care.count_ones()
    }
}

/// Every cube over `n` inputs (3^n of them).
pub fn all_cubes(n: usize) -> Vec<Cube> {
    let mut out = Vec::new();
    for care in 0..1u32 << n {
        for value in 0..1u32 << n {
            if value & !care == 0 {
                out.push(Cube { care, value });
            }
        }
    }
    out
}

/// True when the cube avoids every off-set row.
pub fn is_implicant(n: usize, c: Cube, on: &[u32], dc: &[u32]) -> bool {
    (0..1u32 << n).all(|r| !c.covers(r) || on.contains(&r) || dc.contains(&r))
}

/// True when the cube is an implicant and dropping any literal is not.
pub fn is_prime(n: usize, c: Cube, on: &[u32], dc: &[u32]) -> bool {
    is_implicant(n, c, on, dc)
        && (0..n).map(|b| 1u32 << b).filter(|b| c.care & b != 0).all(|b| {
            let wider = Cube {
                care: c.care & !b,
                value: c.value & !b,
            };
            !is_implicant(n, wider, on, dc)
        })
}

/// Smallest `(products, literals)` of any cover of `on` by prime
/// implicants, found by trying every subset of primes.
pub fn brute_force_minimum(n: usize, on: &[u32], dc: &[u32]) -> (usize, u32) {
    if on.is_empty() {
        return (0, 0);
    }
    let primes: Vec<Cube> = all_cubes(n)
        .into_iter()
        .filter(|&c| is_prime(n, c, on, dc))
        .collect();
    assert!(primes.len() <= 20, "{} primes is too many to enumerate", primes.len());
    let mut best = (usize::MAX, u32::MAX);
    for subset in 1u32..1 << primes.len() {
        let chosen: Vec<Cube> = (0..primes.len())
            .filter(|i| subset >> i & 1 == 1)
            .map(|i| primes[i])
            .collect();
        if on.iter().all(|&r| chosen.iter().any(|c| c.covers(r))) {
            let cost = (chosen.len(), chosen.iter().map(|c| c.literals()).sum());
            best = best.min(cost);
        }
    }
    best
}

/// Products of a sum-of-products expression as cubes over `names`.
pub fn products(e: &Expr, names: &[String]) -> Vec<Cube> {
    let n = names.len();
    let terms: Vec<&Expr> = match e {
        Expr::Or(xs) => xs.iter().collect(),
        Expr::Const(false) => Vec::new(),
        other => vec![other],
    };
    terms
        .into_iter()
        .map(|t| {
            let lits: Vec<&Expr> = match t {
                Expr::And(xs) => xs.iter().collect(),
                Expr::Const(true) => Vec::new(),
                other => vec![other],
            };
            let mut cube = Cube { care: 0, value: 0 };
            for l in lits {
                let (name, positive) = match l {
                    Expr::Var(v) => (v, true),
                    Expr::Not(x) => match x.as_ref() {
                        Expr::Var(v) => (v, false),
                        _ => panic!("not a literal: {l}"),
                    },
                    _ => panic!("not a literal: {l}"),
                };
                let i = names.iter().position(|x| x == name).unwrap();
                let bit = 1 << (n - 1 - i);
                cube.care |= bit;
                if positive {
                    cube.value |= bit;
                }
            }
            cube
        })
        .collect()
}
