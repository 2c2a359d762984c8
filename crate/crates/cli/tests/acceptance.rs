// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{assignment, brute_force_minimum, eval, names, products, sets, Cube};
use rand::{Rng, SeedableRng};
use softc_core::expr::{equivalent, parse_expression, Expr};
use softc_core::family::{lookup_family, GateType};
use softc_core::sim::{evaluate_netlist, final_levels, glove_levels, timed_simulate, verify, GloveState};
use softc_core::truthtable::{extract_sop, parse_truth_table, to_minterms, TruthTable};
use softc_core::{compile_pipeline, minimize, CompileOptions, CompileResult};

const COMPLEX: &str = "A B C | Q\n0 0 0 | 0\n0 0 1 | 1\n0 1 0 | 0\n0 1 1 | 0\n1 0 0 | 0\n1 0 1 | 1\n1 1 0 | 0\n1 1 1 | 1\n";

/// Pinned limits.
const COMPLEX_RUNTIME: Duration = Duration::from_secs(1);
const END_TO_END_RUNTIME: Duration = Duration::from_secs(30);
const RANDOM_TABLES_PER_SIZE: usize = 500;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn compile(t: &TruthTable) -> Result<CompileResult, String> {
    compile_pipeline(t, 0, "sbv", CompileOptions::default()).map_err(|e| format!("{}: {e}", e.code()))
}

fn count(r: &CompileResult, g: GateType) -> usize {
    r.report.counts.get(&g).copied().unwrap_or(0)
}

fn cube_set(e: &str, n: usize) -> Result<BTreeSet<(u32, u32)>, String> {
    let e = parse_expression(e).map_err(|e| e.to_string())?;
    Ok(products(&e, &names(n)).into_iter().map(|c| (c.care, c.value)).collect())
}

/// Rows where the netlist and the independent evaluator of `e` disagree
/// with the table.
fn disagreements(t: &TruthTable, r: &CompileResult) -> Result<Vec<u32>, String> {
    let e = parse_expression(&r.optimized_expression).map_err(|e| e.to_string())?;
    let n = names(t.input_count());
    let mut bad = Vec::new();
    for row in 0..t.row_count() as u32 {
        let a = assignment(&n, row);
        let Some(expected) = t.output(row, 0).value() else { continue };
        let got = evaluate_netlist(&r.netlist, &a).map_err(|e| e.to_string())?;
        if got != expected || eval(&e, &a) != expected {
            bad.push(row);
        }
    }
    Ok(bad)
}

fn complex_mapping() -> Outcome {
    let t = parse_truth_table(COMPLEX).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let r = compile(&t)?;
    let elapsed = start.elapsed();
    let expected = cube_set("(A & C) | (~B & C)", 3)?;
    ensure!(cube_set(&r.optimized_expression, 3)? == expected, "products of {}", r.optimized_expression);
    let opt = [(GateType::And2, 2), (GateType::Or2, 1), (GateType::Not, 1)];
    let unopt = [(GateType::And2, 6), (GateType::Or2, 2), (GateType::Not, 3)];
    ensure!(
        r.report.counts.len() == 3 && opt.iter().all(|&(g, c)| count(&r, g) == c),
        "optimized counts {:?}",
        r.report.counts
    );
    ensure!(
        r.report.unoptimized_counts.len() == 3
            && unopt.iter().all(|&(g, c)| r.report.unoptimized_counts.get(&g) == Some(&c)),
        "unoptimized counts {:?}",
        r.report.unoptimized_counts
    );
    ensure!(r.report.total_devices == 4, "total {}", r.report.total_devices);
    ensure!(r.report.unoptimized_total_devices == 11, "unoptimized total {}", r.report.unoptimized_total_devices);
    ensure!(r.report.devices_removed_by_optimization == 7, "removed {}", r.report.devices_removed_by_optimization);
    ensure!(elapsed < COMPLEX_RUNTIME, "took {elapsed:?}");
    Ok(format!("{} with 4 devices, 11 unoptimized, 7 removed in {elapsed:.2?}", r.optimized_expression))
}

fn direct_mapping() -> Outcome {
    let inputs = names(4);
    let mut circuits = Vec::new();
    for name in &inputs {
        let t = parse_truth_table(&format!("{name} | L\n0 | 1\n1 | 0\n")).map_err(|e| e.to_string())?;
        let r = compile(&t)?;
        ensure!(
            r.report.total_devices == 1 && count(&r, GateType::Not) == 1,
            "{name}: {:?}",
            r.report.counts
        );
        circuits.push(r.netlist);
    }
    let mut checks = 0;
    for mask in 0..16 {
        let glove = GloveState::new(&inputs).map_err(|e| e.to_string())?.with_bent_mask(mask);
        let levels = glove_levels(&glove);
        for (finger, netlist) in glove.fingers.iter().zip(&circuits) {
            let leg = evaluate_netlist(netlist, &levels).map_err(|e| e.to_string())?;
            ensure!(leg == finger.bent, "mask {mask:04b}: {} bent={} leg={leg}", finger.name, finger.bent);
            checks += 1;
        }
    }
    Ok(format!("4 single-NOT circuits, {checks} glove checks"))
}

fn two_finger_mapping() -> Outcome {
    let t = TruthTable::from_fn(&["A", "B", "C", "D"], "Q", |r| {
        if r == 0b1100 {
            softc_core::OutputBit::One
        } else {
            softc_core::OutputBit::Zero
        }
    })
    .map_err(|e| e.to_string())?;
    let r = compile(&t)?;
    ensure!(r.optimized_expression == "A & B & ~C & ~D", "expression {}", r.optimized_expression);
    // Hand count: a 4-literal product needs 3 two-input ANDs, plus one NOT
    // per complemented literal.
    let cubes = products(&parse_expression(&r.optimized_expression).map_err(|e| e.to_string())?, &names(4));
    let ands: u32 = cubes.iter().map(|c| c.literals() - 1).sum();
    let nots: u32 = cubes.iter().map(|c| (c.care & !c.value).count_ones()).sum();
    ensure!((ands, nots) == (3, 2), "hand count {ands} AND2 + {nots} NOT");
    ensure!(
        count(&r, GateType::And2) == 3 && count(&r, GateType::Not) == 2 && r.report.counts.len() == 2,
        "counts {:?}",
        r.report.counts
    );
    ensure!(r.report.total_devices == 5, "total {}", r.report.total_devices);
    let v = verify(&r.netlist, &t, 0).map_err(|e| e.to_string())?;
    ensure!(v.passed(), "{v:?}");
    let bad = disagreements(&t, &r)?;
    ensure!(bad.is_empty(), "rows {bad:?}");
    Ok("A & B & ~C & ~D, 3 AND2 + 2 NOT, 16 rows verified".into())
}

fn check_end_to_end(t: &TruthTable) -> Result<(), String> {
    let n = t.input_count();
    let m = to_minterms(t, 0).map_err(|e| e.to_string())?;
    let minimized = minimize(&m, &names(n));
    let sop = extract_sop(&m, &names(n));
    ensure!(
        equivalent(&minimized, &sop).map_err(|e| e.to_string())?.holds(),
        "{minimized} differs from {sop}"
    );
    let r = compile(t)?;
    let v = verify(&r.netlist, t, 0).map_err(|e| e.to_string())?;
    ensure!(v.passed() && r.verified, "{v:?}\n{}", t.to_text());
    let bad = disagreements(t, &r)?;
    ensure!(bad.is_empty(), "rows {bad:?}\n{}", t.to_text());
    Ok(())
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut tables = 0;
    for code in 0..16 {
        check_end_to_end(&common::boolean_table(2, code))?;
        tables += 1;
    }
    for n in 2..=4 {
        for _ in 0..RANDOM_TABLES_PER_SIZE {
            check_end_to_end(&common::random_table(&mut rng, n, 0.0))?;
            tables += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < END_TO_END_RUNTIME, "took {elapsed:?}");
    Ok(format!("{tables} tables, 0 failures in {elapsed:.2?}"))
}

fn minimality() -> Outcome {
    let mut functions = 0;
    for n in 1..=3 {
        for code in 0..1u32 << (1 << n) {
            let t = common::boolean_table(n, code);
            let m = to_minterms(&t, 0).map_err(|e| e.to_string())?;
            let e = minimize(&m, &names(n));
            let got = match e {
                Expr::Const(true) => (1, 0),
                _ => {
                    let cubes: Vec<Cube> = products(&e, &names(n));
                    (cubes.len(), cubes.iter().map(|c| c.literals()).sum())
                }
            };
            let (on, dc) = sets(&t);
            let want = brute_force_minimum(n, &on, &dc);
            ensure!(got == want, "n={n} code={code}: {e} costs {got:?}, optimum {want:?}");
            functions += 1;
        }
    }
    Ok(format!("{functions} functions (all 256 at n=3) match brute force"))
}

fn timed_simulation() -> Outcome {
    let sbv = lookup_family("sbv").map_err(|e| e.to_string())?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(77);
    let mut steps = 0;
    let mut worst = 0;
    for i in 0..120 {
        let n = 1 + i % 4;
        let t = common::random_table(&mut rng, n, 0.0);
        let r = compile(&t)?;
        let nm = names(n);
        for from in 0..1u32 << n {
            for to in 0..1u32 << n {
                if from == to {
                    continue;
                }
                let (a, b) = (assignment(&nm, from), assignment(&nm, to));
                let step_time = rng.random_range(0..5);
                let trace = timed_simulate(&r.netlist, sbv, &a, &b, step_time).map_err(|e| e.to_string())?;
                let settle = trace.settle_time - step_time;
                ensure!(
                    settle <= r.report.max_propagation_delay,
                    "settled after {settle} > {}",
                    r.report.max_propagation_delay
                );
                let levels = final_levels(&r.netlist, &a, &trace).map_err(|e| e.to_string())?;
                let want = evaluate_netlist(&r.netlist, &b).map_err(|e| e.to_string())?;
                ensure!(levels[&r.netlist.output] == want, "final level after {from:b} -> {to:b}");
                ensure!(eval(&parse_expression(&r.optimized_expression).unwrap(), &b) == want, "oracle");
                worst = worst.max(settle);
                steps += 1;
            }
        }
    }
    let complex = compile(&parse_truth_table(COMPLEX).map_err(|e| e.to_string())?)?;
    ensure!(
        complex.report.max_propagation_delay == 3,
        "complex delay {}",
        complex.report.max_propagation_delay
    );
    Ok(format!("{steps} steps within bound (longest settle {worst}), complex delay 3"))
}

fn run_cli(dir: &Path, table: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_softc"))
        .args(["compile", "--in"])
        .arg(table)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(o.status.success(), "exit {:?}: {}", o.status, String::from_utf8_lossy(&o.stderr));
    Ok(())
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let table = tmp.path().join("complex.tt");
    std::fs::write(&table, COMPLEX).map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_cli(&a, &table)?;
    run_cli(&b, &table)?;
    let files = ["expr.txt", "netlist.json", "page-0.svg", "schematic.json", "report.json", "result.json"];
    for f in files {
        let x = std::fs::read(a.join(f)).map_err(|e| format!("{f}: {e}"))?;
        let y = std::fs::read(b.join(f)).map_err(|e| format!("{f}: {e}"))?;
        ensure!(x == y, "{f} differs between runs");
    }
    Ok(format!("{} files byte-identical across two runs", files.len()))
}

fn service_contract() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let table = tmp.path().join("complex.tt");
    std::fs::write(&table, COMPLEX).map_err(|e| e.to_string())?;
    run_cli(tmp.path(), &table)?;
    let cli_result = std::fs::read_to_string(tmp.path().join("result.json")).map_err(|e| e.to_string())?;

    let mut complex = serde_json::to_value(parse_truth_table(COMPLEX).unwrap().to_doc()).unwrap();
    complex["family"] = "sbv".into();
    let seven_rows = {
        let mut v = complex.clone();
        v["rows"].as_array_mut().unwrap().pop();
        v
    };

    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        // No static directory: the suite runs without any web UI.
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?;
        tokio::spawn(async move { axum::serve(listener, softc_cli::server::router(None)).await });
        let client = reqwest::Client::new();
        let post = |body: String| {
            client
                .post(format!("http://{addr}/api/compile"))
                .header("content-type", "application/json")
                .body(body)
                .send()
        };

        let ok = post(complex.to_string()).await.map_err(|e| e.to_string())?;
        let status = ok.status().as_u16();
        let body = ok.text().await.map_err(|e| e.to_string())?;
        ensure!(status == 200, "complex table gave {status}: {body}");
        ensure!(body == cli_result, "service payload differs from the CLI result");

        let bad = post(seven_rows.to_string()).await.map_err(|e| e.to_string())?;
        let status = bad.status().as_u16();
        let body: serde_json::Value = serde_json::from_str(&bad.text().await.map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        ensure!(status == 400 && body["error"] == "MissingRow", "7-row table gave {status} {body}");
        Ok("200 with the CLI's result bytes; 7-row table gives 400 MissingRow".to_string())
    })
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("complex-mapping-reduction", complex_mapping),
        ("direct-mapping-glove", direct_mapping),
        ("two-finger-mapping", two_finger_mapping),
        ("end-to-end-correctness", end_to_end),
        ("exact-minimality", minimality),
        ("timed-simulation-bound", timed_simulation),
        ("determinism", determinism),
        ("service-contract", service_contract),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(reason)) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
