// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{assignment, eval, names, products, sets};
use proptest::prelude::*;
use softc_core::expr::{equivalent, parse_expression};
use softc_core::family::GateType;
use softc_core::pipeline::CompileRequest;
use softc_core::truthtable::{extract_sop, parse_truth_table, to_minterms, OutputBit, TableDoc, TruthTable};
use softc_core::{compile_pipeline, CompileOptions, CompileResult};

fn arb_table(max_n: usize, dont_cares: bool) -> impl Strategy<Value = TruthTable> {
    let symbols = if dont_cares { 3u8 } else { 2 };
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(0..symbols, 1 << n).prop_map(move |cells| {
            let bits: Vec<OutputBit> = cells
                .iter()
                .map(|c| match c {
                    0 => OutputBit::Zero,
                    1 => OutputBit::One,
                    _ => OutputBit::DontCare,
                })
                .collect();
            common::table(n, &bits)
        })
    })
}

fn compile(t: &TruthTable) -> CompileResult {
    compile_pipeline(t, 0, "sbv", CompileOptions::default()).unwrap()
}

/// The compiled circuit's expression matches every specified row.
fn check_result(t: &TruthTable, r: &CompileResult) {
    let n = t.input_count();
    let names = names(n);
    assert!(r.verified);
    let opt = parse_expression(&r.optimized_expression).unwrap();
    let unopt = parse_expression(&r.unoptimized_expression).unwrap();
    for row in 0..t.row_count() as u32 {
        let a = assignment(&names, row);
        if let Some(expected) = t.output(row, 0).value() {
            assert_eq!(eval(&opt, &a), expected, "optimized, row {row}\n{}", t.to_text());
            assert_eq!(eval(&unopt, &a), expected, "unoptimized, row {row}");
        }
    }
    assert!(r.report.devices_removed_by_optimization >= 0);
}

#[test]
fn every_two_input_table_compiles_to_an_equivalent_circuit() {
    for code in 0..16 {
        let t = common::boolean_table(2, code);
        let r = compile(&t);
        check_result(&t, &r);
        let opt = parse_expression(&r.optimized_expression).unwrap();
        let sop = extract_sop(&to_minterms(&t, 0).unwrap(), &names(2));
        assert!(equivalent(&opt, &sop).unwrap().holds(), "code {code}");
    }
}

#[test]
fn single_minterm_of_four_inputs() {
    let t = parse_truth_table(
        &std::iter::once("A B C D | Q".to_string())
            .chain((0..16).map(|r| {
                let bits: Vec<String> = (0..4).rev().map(|b| (r >> b & 1).to_string()).collect();
                format!("{} | {}", bits.join(" "), u8::from(r == 0b1100))
            }))
            .collect::<Vec<_>>()
            .join("\n"),
    )
    .unwrap();
    let r = compile(&t);
    assert_eq!(r.optimized_expression, "A & B & ~C & ~D");
    assert_eq!(r.report.counts.get(&GateType::And2), Some(&3));
    assert_eq!(r.report.counts.get(&GateType::Not), Some(&2));
    assert_eq!(r.report.total_devices, 5);
    check_result(&t, &r);
}

#[test]
fn inverter_tables() {
    let t = parse_truth_table("A | Q\n0 | 1\n1 | 0\n").unwrap();
    let r = compile(&t);
    assert_eq!(r.optimized_expression, "~A");
    assert_eq!(r.report.total_devices, 1);
    let t = parse_truth_table("A | Q\n0 | 0\n1 | 1\n").unwrap();
    let r = compile(&t);
    assert_eq!(r.optimized_expression, "A");
    assert_eq!(r.report.total_devices, 0);
}

#[test]
fn constant_tables_compile_to_rails() {
    for (bit, text) in [("0", "0"), ("1", "1")] {
        let t = parse_truth_table(&format!("A B | Q\n0 0 | {bit}\n0 1 | {bit}\n1 0 | {bit}\n1 1 | {bit}\n")).unwrap();
        let r = compile(&t);
        assert_eq!(r.optimized_expression, text);
        assert_eq!(r.report.total_devices, 0);
        check_result(&t, &r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn compiled_circuits_match_their_tables(t in arb_table(4, true)) {
        let r = compile(&t);
        check_result(&t, &r);
    }

    #[test]
    fn canonical_sop_has_one_full_product_per_on_row(t in arb_table(4, true)) {
        let n = t.input_count();
        let m = to_minterms(&t, 0).unwrap();
        let sop = extract_sop(&m, &names(n));
        let cubes = products(&sop, &names(n));
        prop_assert_eq!(cubes.len(), m.on_set.len());
        prop_assert!(cubes.iter().all(|c| c.literals() as usize == n));
        let (on, _) = sets(&t);
        for row in 0..t.row_count() as u32 {
            if let Some(expected) = t.output(row, 0).value() {
                prop_assert_eq!(eval(&sop, &assignment(&names(n), row)), expected);
            }
            prop_assert_eq!(on.contains(&row), cubes.iter().any(|c| c.covers(row)));
        }
    }

    #[test]
    fn text_form_round_trips(t in arb_table(4, true)) {
        prop_assert_eq!(parse_truth_table(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn structured_form_round_trips(t in arb_table(4, true)) {
        let json = serde_json::to_string(&t.to_doc()).unwrap();
        let doc: TableDoc = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(doc.into_table().unwrap(), t);
    }

    #[test]
    fn compiling_is_deterministic_and_serializable(t in arb_table(3, true)) {
        let a = compile(&t);
        let b = compile(&t.clone());
        prop_assert_eq!(a.to_json(), b.to_json());
        let back: CompileResult = serde_json::from_str(&a.to_json()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn requests_match_direct_compiles(t in arb_table(3, false)) {
        let mut body = serde_json::to_value(t.to_doc()).unwrap();
        body["family"] = "sbv".into();
        let via_request = CompileRequest::from_json(&body.to_string()).unwrap().compile().unwrap();
        prop_assert_eq!(via_request.to_json(), compile(&t).to_json());
    }
}

#[test]
fn rows_may_arrive_in_any_order() {
    let sorted = "A B | Q\n0 0 | 1\n0 1 | 0\n1 0 | X\n1 1 | 1\n";
    let shuffled = "# shuffled\nA B | Q\n1 1 | 1\n0 1 | 0\n0 0 | 1\n1 0 | X\n";
    let a = parse_truth_table(sorted).unwrap();
    let b = parse_truth_table(shuffled).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_text(), sorted);
}

#[test]
fn eight_input_table_compiles() {
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(88);
    let t = common::random_table(&mut rng, 8, 0.1);
    let r = compile(&t);
    check_result(&t, &r);
}
