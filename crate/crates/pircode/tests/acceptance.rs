//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured facts. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use pircode::channel::check_trapping_exhaustive;
use pircode::channel::error_trapping_codebook;
use pircode::codes::{
    bound_chain_ring, bound_singleton, bound_sphere, chain_bound_formula, construct_spread,
    construct_stacked, construct_tensor, count_submodules_product_of_fields, decode_min_distance,
    decode_product, spread_cardinality, Code, DecodeStatus,
};
use pircode::matrix::random_invertible;
use pircode::submodule::{count_submodules_within, DEFAULT_ENUM_CAP, DEFAULT_ORACLE_CAP};
use pircode::textio::{parse_code_str, parse_ring_spec, parse_submodule_str};
use pircode::{
    check_row_echelon, enumerate_submodules, member, row_echelon, rref, Ambient, ChainComponent,
    Matrix, Ring, SubModule, Value,
};

fn pass(criterion: u32, detail: &str) {
    println!("criterion {criterion}: PASS ({detail})");
}

fn ring(spec: &str) -> Arc<Ring> {
    parse_ring_spec(spec).unwrap()
}

fn submod(text: &str) -> SubModule {
    parse_submodule_str(text).unwrap()
}

#[test]
fn criterion_01_echelon_worked_example() {
    let m = pircode::textio::parse_matrix_str("ring: Z6\ncols: 3\n2 1 3\n4 1 2\n")
        .unwrap()
        .0;
    // warm caches before timing
    let _ = row_echelon(&m);
    let start = Instant::now();
    let e = row_echelon(&m);
    let elapsed = start.elapsed();
    assert_eq!(e.rows(), 3);
    let r = m.ring();
    let ideals: Vec<Value> = (0..3).map(|i| r.ideal_gen(e.pivot(i))).collect();
    assert_eq!(ideals, vec![Value::Int(2), Value::Int(1), Value::Int(3)]);
    assert_eq!(e.length(), 4);
    // span equality in both directions
    let canon = rref(&m);
    for i in 0..m.rows() {
        assert!(member(m.row(i), &canon).is_some());
    }
    for i in 0..e.rows() {
        assert!(member(e.matrix().row(i), &canon).is_some());
    }
    assert!(check_row_echelon(e.matrix()).is_yes());
    assert!(
        elapsed < Duration::from_millis(1),
        "echelon took {elapsed:?}"
    );
    pass(1, &format!("3 rows, pivots (2),(1),(3), length 4, {elapsed:?}"));
}

#[test]
fn criterion_02_z4_distance_example() {
    let m = submod("ring: Z4\ncols: 4\n1 1 1 0\n0 2 1 2\n0 0 2 0\n");
    let n = submod("ring: Z4\ncols: 4\n1 3 0 2\n0 0 1 0\n");
    assert_eq!(m.length(), 4);
    assert_eq!(n.length(), 4);
    let s = m.sum(&n).unwrap();
    assert_eq!(s.length(), 5);
    assert_eq!(m.distance(&n).unwrap(), 2);
    assert_eq!(m.intersection_length(&n).unwrap(), 3);
    assert_eq!(m.loss_and_error(&n).unwrap(), (1, 1));
    let stacked = m.basis().matrix().stack(n.basis().matrix()).unwrap();
    let expect = pircode::textio::parse_matrix_str("ring: Z4\ncols: 4\n1 1 0 0\n0 2 0 2\n0 0 1 0\n")
        .unwrap()
        .0;
    assert_eq!(rref(&stacked).matrix(), &expect);
    pass(2, "lengths 4/4/5, d = 2, intersection 3, (rho, e) = (1, 1), exact RREF");
}

#[test]
fn criterion_03_z12_bound_comparison() {
    let start = Instant::now();
    let r = ring("Z12");
    let ambient = Ambient::free(r, 2);
    let mods = enumerate_submodules(&ambient, 1, DEFAULT_ENUM_CAP).unwrap();
    let gens: BTreeSet<Vec<Value>> = mods
        .iter()
        .map(|m| m.basis().matrix().row(0).to_vec())
        .collect();
    let expect: BTreeSet<Vec<Value>> =
        [(4, 0), (4, 4), (4, 8), (6, 0), (6, 6), (0, 4), (0, 6)]
            .into_iter()
            .map(|(a, b): (u64, u64)| vec![Value::Int(a), Value::Int(b)])
            .collect();
    assert_eq!(gens, expect);
    assert_eq!(bound_singleton(&ambient, 2, 2, DEFAULT_ENUM_CAP).unwrap(), 4);
    assert_eq!(bound_sphere(&ambient, 2, 2, DEFAULT_ENUM_CAP).unwrap(), 7);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    pass(3, &format!("7 length-one submodules, bounds 4 and 7, {elapsed:?}"));
}

#[test]
fn criterion_04_gaussian_mod_five_structure() {
    let r = ring("Zi5");
    assert_eq!(
        r.structure(),
        vec![
            ChainComponent::IntPower { p: 5, e: 1 },
            ChainComponent::IntPower { p: 5, e: 1 }
        ]
    );
    assert_eq!(r.length(), 2);
    // the ideals of length one are exactly (2+i) and (2-i)
    let short: BTreeSet<Value> = r
        .elements()
        .filter(|a| r.ideal_length(a) == 1)
        .map(|a| r.ideal_gen(&a))
        .collect();
    let expect: BTreeSet<Value> = [
        r.ideal_gen(&Value::Gauss(2, 1)),
        r.ideal_gen(&Value::Gauss(2, 4)),
    ]
    .into_iter()
    .collect();
    assert_eq!(short.len(), 2);
    assert_eq!(short, expect);
    pass(4, "Zi5 splits as Z5 x Z5; length-one ideals are (2+i) and (2-i)");
}

#[test]
fn criterion_05_tensor_decoding_example() {
    let base = parse_code_str("ring: Z5\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 2 1\n0 1 1 0\n")
        .unwrap();
    assert_eq!(base.min_distance(), 4);
    let lifted = construct_tensor(&base, &ring("Zi5")).unwrap();
    assert_eq!(lifted.min_distance(), 8);
    assert_eq!(lifted.constant_length(), 4);

    let n = submod("ring: Zi5\ncols: 4\n2+i 0 2+i 0\n0 1 0 4+i\n");
    let v1_lift = submod("ring: Zi5\ncols: 4\n1 0 1 0\n0 1 0 1\n");
    assert!(lifted.words().contains(&v1_lift));
    assert_eq!(n.distance(&v1_lift).unwrap(), 3);
    let decoded = decode_min_distance(&lifted, &n).unwrap();
    assert_eq!(decoded.status, DecodeStatus::Decoded);
    assert_eq!(decoded.word.as_ref(), Some(&v1_lift));
    assert!(decoded.certified);

    // N meets the real axis Z5^4 only at zero
    let real_only: Vec<Vec<Value>> = n
        .elements(DEFAULT_ORACLE_CAP)
        .unwrap()
        .into_iter()
        .filter(|vec| {
            vec.iter().all(|v| matches!(v, Value::Gauss(_, 0)))
        })
        .collect();
    assert_eq!(real_only.len(), 1);
    assert!(real_only[0].iter().all(|v| *v == Value::Gauss(0, 0)));
    pass(5, "distance 8, d(N, V1 lift) = 3 decoded certified, N meets Z5^4 trivially");
}

#[test]
fn criterion_06_two_by_two_counterexample() {
    let c1 = parse_code_str("ring: Z2\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 1 1\n0 1 1 0\n")
        .unwrap();
    let stacked = construct_stacked(&[c1.clone(), c1]).unwrap();
    assert_eq!(stacked.min_distance(), 8);
    assert_eq!(stacked.len(), 2);

    let n = submod(
        "ring: product(Z2,Z2)\ncols: 4\n(1,0) (0,0) (1,0) (0,0)\n(0,0) (1,1) (0,1) (1,1)\n",
    );
    let global = decode_min_distance(&stacked, &n).unwrap();
    assert_eq!(global.status, DecodeStatus::Decoded);
    assert_eq!(global.distance, 3);
    assert!(global.certified);

    // second projection is equidistant from both component words
    let p1 = n.project_factor(1);
    let comp_words: BTreeSet<SubModule> =
        stacked.words().iter().map(|w| w.project_factor(1)).collect();
    let dists: Vec<u64> = comp_words
        .iter()
        .map(|w| p1.distance(w).unwrap())
        .collect();
    assert_eq!(dists, vec![3, 3]);
    let split = decode_product(&stacked, &n).unwrap();
    assert_eq!(split.status, DecodeStatus::Ambiguous);
    assert_eq!(split.components[1].status, DecodeStatus::Ambiguous);
    assert_eq!(split.components[1].distance, 3);
    pass(6, "stacked d = 8; global decode at distance 3; second component ambiguous at (3, 3)");
}

#[test]
fn criterion_07_rref_uniqueness_property() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed);
    let specs = ["Z6", "Z8", "Z12", "Zi5", "product(Z2,Z3)"];
    let mut checked = 0u64;
    for spec in specs {
        let r = ring(spec);
        for _ in 0..1000 {
            let rows = rng.gen_range(1..4);
            let cols = rng.gen_range(1..5);
            let a = Matrix::random(r.clone(), rows, cols, &mut rng);
            let u = random_invertible(&r, rows, &mut rng);
            let ua = u.mul(&a).unwrap();
            assert_eq!(rref(&a), rref(&ua), "{spec}");
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    pass(7, &format!("{checked} random row-equivalent pairs agree, {elapsed:?}"));
}

#[test]
fn criterion_08_metric_and_oracle_suite() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xacc8);
    let mut pairs = 0u64;
    for (spec, n) in [("Z4", 3usize), ("Z6", 2), ("Zi5", 2), ("product(Z2,Z3)", 2)] {
        let r = ring(spec);
        let ambient = Ambient::free(r.clone(), n);
        let random_sub = |rng: &mut ChaCha12Rng| {
            let rows = rng.gen_range(0..=2);
            let m = Matrix::random(r.clone(), rows, n, rng);
            SubModule::from_generators(ambient.clone(), &m).unwrap()
        };
        for _ in 0..500 {
            let m = random_sub(&mut rng);
            let nn = random_sub(&mut rng);
            let p = random_sub(&mut rng);
            let dmn = m.distance(&nn).unwrap();
            assert_eq!(dmn, nn.distance(&m).unwrap(), "{spec}: symmetry");
            assert_eq!(dmn == 0, m == nn, "{spec}: zero iff equal");
            assert!(
                dmn <= m.distance(&p).unwrap() + p.distance(&nn).unwrap(),
                "{spec}: triangle"
            );
            let cap = m.intersection_oracle(&nn, DEFAULT_ORACLE_CAP).unwrap();
            assert_eq!(
                m.intersection_length(&nn).unwrap(),
                cap.length(),
                "{spec}: oracle"
            );
            assert_eq!(
                m.length() + nn.length(),
                m.sum(&nn).unwrap().length() + cap.length(),
                "{spec}: modular law"
            );
            pairs += 1;
        }
    }
    pass(8, &format!("{pairs} random triples pass metric, modularity, and oracle checks"));
}

#[test]
fn criterion_09_spread_construction() {
    let start = Instant::now();
    let r = ring("Z4");
    for k in [3u64, 4] {
        let code = construct_spread(&r, 4, k).unwrap();
        // cardinality (q^n - q^(h+rho) + q^h - 1)/(q^h - 1) at q = 2, h = 2
        assert_eq!(code.len(), 5, "k = {k}");
        assert_eq!(code.len() as u128, spread_cardinality(2, 4, 2));
        assert_eq!(code.constant_length(), k);
        assert_eq!(code.min_distance(), 2 * k, "k = {k}");
        for (i, a) in code.words().iter().enumerate() {
            for b in code.words().iter().skip(i + 1) {
                assert_eq!(a.intersection_length(b).unwrap(), 0, "k = {k}");
            }
        }
        let bound = bound_chain_ring(&r, 4, &[0, 0, 0], k).unwrap();
        assert!(code.len() as u64 <= bound, "k = {k}");
        assert_eq!(bound, 7);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    pass(9, &format!("k in {{3, 4}}: 5 words, distance 2k, trivial intersections, bound 7, {elapsed:?}"));
}

#[test]
fn criterion_10_counting_formula() {
    let mut detail = Vec::new();
    for (spec, p) in [("product(Z2,Z2)", 2u64), ("product(Z3,Z3)", 3)] {
        let r = ring(spec);
        let ambient = Ambient::free(r, 2);
        let total = ambient.length();
        let mut modules = Vec::new();
        for len in 0..=total {
            modules.extend(enumerate_submodules(&ambient, len, DEFAULT_ENUM_CAP).unwrap());
        }
        let mut checks = 0u64;
        for m in &modules {
            let dims = [
                m.project_factor(0).length(),
                m.project_factor(1).length(),
            ];
            for len in 0..=m.length() {
                let formula = count_submodules_product_of_fields(p, &dims, len);
                let oracle = count_submodules_within(m, len, DEFAULT_ENUM_CAP).unwrap();
                assert_eq!(
                    formula,
                    u128::from(oracle),
                    "{spec}: dims {dims:?}, length {len}"
                );
                checks += 1;
            }
        }
        detail.push(format!("{spec}: {} modules, {checks} counts", modules.len()));
    }
    pass(10, &detail.join("; "));
}

#[test]
fn criterion_11_correction_guarantee() {
    let z4 = ring("Z4");
    let z2 = ring("Z2");
    let base = parse_code_str("ring: Z2\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 1 1\n0 1 1 0\n")
        .unwrap();
    let codes: Vec<Code> = vec![
        construct_spread(&z4, 4, 4).unwrap(),
        construct_spread(&z4, 4, 3).unwrap(),
        construct_spread(&z2, 4, 2).unwrap(),
        construct_tensor(
            &parse_code_str("ring: Z5\ncols: 4\n1 0 1 0\n0 1 0 1\n--\n1 0 2 1\n0 1 1 0\n")
                .unwrap(),
            &ring("Zi5"),
        )
        .unwrap(),
        pircode::codes::construct_product(&[base.clone(), base.clone()]).unwrap(),
        construct_stacked(&[base.clone(), base]).unwrap(),
        error_trapping_codebook(&z4, 4, 2, 1, 1, 1).unwrap().code,
    ];
    let target = 10_000u64;
    let mut rng = ChaCha12Rng::seed_from_u64(0xc0de);
    let mut accepted = 0u64;
    let mut attempts = 0u64;
    while accepted < target {
        let code = &codes[(attempts % codes.len() as u64) as usize];
        attempts += 1;
        let word = &code.words()[rng.gen_range(0..code.len())];
        let received = corrupt(word, &mut rng);
        let (rho, e) = word.loss_and_error(&received).unwrap();
        if 2 * (rho + e) >= code.min_distance() {
            continue;
        }
        let out = decode_min_distance(code, &received).unwrap();
        assert_eq!(out.status, DecodeStatus::Decoded, "attempt {attempts}");
        assert_eq!(out.word.as_ref(), Some(word), "attempt {attempts}");
        assert!(out.certified, "attempt {attempts}");
        accepted += 1;
    }
    pass(11, &format!("{accepted} in-radius corruptions over {} codes all decode certified", codes.len()));
}

// Corrupt a codeword: scale or drop some generators (loss) and mix in a few
// random ambient vectors (errors).
fn corrupt(word: &SubModule, rng: &mut ChaCha12Rng) -> SubModule {
    let ambient = word.ambient().clone();
    let ring = ambient.ring().clone();
    let n = ambient.n();
    let mut rows: Vec<Vec<Value>> = (0..word.basis().rows())
        .map(|i| word.basis().matrix().row(i).to_vec())
        .collect();
    if !rows.is_empty() && rng.gen_bool(0.4) {
        let i = rng.gen_range(0..rows.len());
        if rng.gen_bool(0.5) {
            rows.remove(i);
        } else {
            let c = ring.random_element(rng);
            for x in rows[i].iter_mut() {
                *x = ring.mul(&c, x);
            }
        }
    }
    for _ in 0..rng.gen_range(0..2) {
        let mut v = vec![ring.zero(); n];
        for x in v.iter_mut() {
            *x = ring.random_element(rng);
        }
        // bias errors short: scale by a random element so non-unit content appears
        if rng.gen_bool(0.6) {
            let c = ring.random_element(rng);
            for x in v.iter_mut() {
                *x = ring.mul(&c, x);
            }
        }
        rows.push(v);
    }
    let m = Matrix::from_rows(ring, n, rows).unwrap();
    SubModule::from_generators(ambient, &m).unwrap()
}

#[test]
fn criterion_12_trapping_as_min_distance() {
    let r = ring("Z4");
    let report = check_trapping_exhaustive(&r, 4, 2, 1, 1, 1, 1 << 20).unwrap();
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    // every free H (the two units) against every K block
    assert_eq!(report.instances, 21 * 2 * 64);
    pass(12, &format!(
        "exhaustive: {} trapped channels, {} comparisons, zero violations",
        report.instances, report.comparisons
    ));
}

#[test]
fn criterion_13_asymptotic_ratio_table() {
    let qs = [2u64, 3, 4, 5, 7, 8, 9];
    let mut rows = Vec::new();
    let mut last: Option<(u128, u128)> = None;
    for &q in &qs {
        let card = spread_cardinality(q, 4, 2);
        let bound = chain_bound_formula(q, 4, 2);
        assert!(card <= bound);
        if let Some((pc, pb)) = last {
            // strictly increasing ratio: card/bound > pc/pb
            assert!(card * pb > pc * bound, "ratio not increasing at q = {q}");
        }
        last = Some((card, bound));
        rows.push(format!("q={q}: {card}/{bound} = {:.4}", card as f64 / bound as f64));
    }
    // exceeds 0.9 by q = 9
    let (c9, b9) = (spread_cardinality(9, 4, 2), chain_bound_formula(9, 4, 2));
    assert!(c9 * 10 > b9 * 9, "ratio at q = 9 must exceed 0.9");
    // constructed codes at small q agree with the cardinality formula
    for (spec, q) in [("Z4", 2u64), ("Z9", 3), ("Z5", 5)] {
        let code = construct_spread(&ring(spec), 4, 2 * ring(spec).length()).unwrap();
        assert_eq!(code.len() as u128, spread_cardinality(q, 4, 2), "{spec}");
        assert_eq!(code.min_distance(), 4 * ring(spec).length(), "{spec}");
    }
    for row in &rows {
        println!("  {row}");
    }
    pass(13, "ratios increase toward 1 and exceed 0.9 at q = 9; small-q codes match the formula");
}
