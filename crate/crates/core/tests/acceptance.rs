//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Run with `cargo test -p qwein-core --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qwein_core::category::{closure, CategorySpec, NamedCategory};
use qwein_core::exact::Rational;
use qwein_core::haar::{asymptotic_char_moments, EasyGroupId, Factor, Haar, Monomial, Series};
use qwein_core::linear_maps::{self, t_pi, t_pi_twisted};
use qwein_core::matrix::Matrix;
use qwein_core::models::model::{complex_to_f64, ModelValue};
use qwein_core::models::oracle::permutations;
use qwein_core::models::{Classical, FiniteGroupOracle, HaarSampler, MatrixModel, OracleGroup};
use qwein_core::partition::{set_partitions, BlockShape, Color, ColorWord, Partition, Sign};
use qwein_core::Bounds;

fn report(n: usize, pass: bool, detail: &str) {
    println!(
        "criterion {n:>2}: {} | {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Every tuple in `[1, n]^len`, lexicographically.
fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Every plain monomial of degree `<= max_degree` in an `n × n` matrix.
fn all_plain_monomials(n: usize, max_degree: usize) -> Vec<Monomial> {
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for choice in tuples(pairs.len(), d) {
            out.push(Monomial::plain(
                &choice.iter().map(|&c| pairs[c - 1]).collect::<Vec<_>>(),
            ));
        }
    }
    out
}

#[test]
fn criterion_01_weingarten_matches_finite_group_oracle() {
    let haar = Haar::default();
    let bounds = Bounds::default();
    let mut checked = 0usize;
    let mut mismatches = Vec::new();
    let cases = [
        (Series::S, OracleGroup::Symmetric, 3),
        (Series::S, OracleGroup::Symmetric, 4),
        (Series::S, OracleGroup::Symmetric, 5),
        (Series::H, OracleGroup::Hyperoctahedral, 2),
        (Series::H, OracleGroup::Hyperoctahedral, 3),
    ];
    for (series, group, n) in cases {
        let g = EasyGroupId::new(series, n).unwrap();
        let oracle = FiniteGroupOracle::new(group, n, &bounds).unwrap();
        for m in all_plain_monomials(n, 4) {
            let w = haar.integrate(&g, &m).unwrap();
            let o = oracle.exact_integral(&m).unwrap();
            checked += 1;
            if !o.im.is_zero() || o.re != w {
                mismatches.push(format!("{g} {m}: weingarten {w}, oracle {}", o.re));
            }
        }
    }
    let pass = mismatches.is_empty();
    report(
        1,
        pass,
        &format!(
            "{checked} monomials over S_3..S_5, H_2, H_3; {} mismatches",
            mismatches.len()
        ),
    );
    assert!(pass, "{:?}", &mismatches[..mismatches.len().min(5)]);
}

#[test]
fn criterion_02_weingarten_matches_monte_carlo() {
    let haar = Haar::default();
    let samples = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (series, classical) in [
        (Series::O, Classical::Orthogonal),
        (Series::U, Classical::Unitary),
    ] {
        for n in 2..=4 {
            let g = EasyGroupId::new(series, n).unwrap();
            let monomials: Vec<Monomial> = (0..30)
                .map(|_| {
                    let degree = rng.random_range(1..=4);
                    Monomial::new(
                        (0..degree)
                            .map(|_| Factor {
                                row: rng.random_range(1..=n),
                                col: rng.random_range(1..=n),
                                star: classical == Classical::Unitary && rng.random_bool(0.5),
                            })
                            .collect(),
                    )
                })
                .collect();
            let sampler = HaarSampler::new(classical, n, 7_000 + n as u64).unwrap();
            let estimates = sampler.mc_integrals(&monomials, samples).unwrap();
            for (m, e) in monomials.iter().zip(&estimates) {
                let exact = haar.integrate(&g, m).unwrap();
                let target = Complex64::new(num_traits::ToPrimitive::to_f64(&exact).unwrap(), 0.0);
                let z = if e.stderr > 0.0 {
                    (e.mean - target).norm() / e.stderr
                } else {
                    0.0
                };
                worst = worst.max(z);
                if !e.within(target, 4.0) {
                    failures.push(format!(
                        "{g} {m}: exact {exact}, mc {} ± {}",
                        e.mean, e.stderr
                    ));
                }
            }
        }
    }
    let pass = failures.is_empty();
    report(
        2,
        pass,
        &format!("180 monomials over O_2..O_4, U_2..U_4 at 1e6 samples; worst deviation {worst:.2} stderr"),
    );
    assert!(pass, "{failures:?}");
}

fn random_partition(
    rng: &mut ChaCha8Rng,
    k: usize,
    l: usize,
    shape: BlockShape,
) -> Option<Partition> {
    let all = set_partitions(k + l, shape);
    let labels = all.choose(rng)?;
    let legs: Vec<usize> = labels.iter().map(|&x| x as usize).collect();
    Some(Partition::from_labels(ColorWord::plain(k), ColorWord::plain(l), &legs).unwrap())
}

#[test]
fn criterion_03_categorical_identities() {
    let bounds = Bounds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    let mut twisted_pairs = 0;
    for trial in 0..200 {
        let n = 2 + trial % 2;
        let twisted = trial % 2 == 1;
        let shape = if twisted {
            BlockShape::Even
        } else {
            BlockShape::Any
        };
        let (pi, sigma) = loop {
            let l1 = rng.random_range(0..=4);
            let k1 = rng.random_range(0..=6 - l1);
            let l2 = rng.random_range(0..=6 - l1);
            if let (Some(a), Some(b)) = (
                random_partition(&mut rng, k1, l1, shape),
                random_partition(&mut rng, l1, l2, shape),
            ) {
                break (a, b);
            }
        };
        let t = |p: &Partition| {
            if twisted {
                t_pi_twisted(p, n, &bounds).unwrap()
            } else {
                t_pi(p, n, &bounds).unwrap()
            }
        };
        if twisted {
            twisted_pairs += 1;
        }
        if t(&pi).tensor(&t(&sigma)) != t(&pi.horizontal_concat(&sigma)) {
            failures.push(format!("tensor {pi} {sigma} (twisted {twisted})"));
        }
        let (composed, loops) = pi.vertical_concat(&sigma).unwrap();
        let scale = (n as i64).pow(loops as u32);
        if t(&pi).then(&t(&sigma)) != t(&composed).scale(scale) {
            failures.push(format!(
                "compose {pi} {sigma} loops {loops} (twisted {twisted})"
            ));
        }
        for p in [&pi, &sigma] {
            if t(p).transpose() != t(&p.adjoint()) {
                failures.push(format!("adjoint {p} (twisted {twisted})"));
            }
        }
    }
    let pass = failures.is_empty();
    report(
        3,
        pass,
        &format!(
            "200 pairs ({twisted_pairs} twisted on even partitions), N in {{2,3}}; {} failures",
            failures.len()
        ),
    );
    assert!(pass, "{failures:?}");
}

fn inversion_parity_odd(perm: &[usize]) -> bool {
    let mut inv = 0;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] {
                inv += 1;
            }
        }
    }
    inv % 2 == 1
}

/// `a < b < c < d` with `x[a] = x[c] != x[b] = x[d]`.
fn has_crossing(x: &[u16]) -> bool {
    let n = x.len();
    for a in 0..n {
        for b in a + 1..n {
            if x[b] == x[a] {
                continue;
            }
            for c in b + 1..n {
                if x[c] != x[a] {
                    continue;
                }
                if (c + 1..n).any(|d| x[d] == x[b]) {
                    return true;
                }
            }
        }
    }
    false
}

fn pair_crossings(x: &[u16]) -> usize {
    let mut blocks: HashMap<u16, Vec<usize>> = HashMap::new();
    for (pos, &l) in x.iter().enumerate() {
        blocks.entry(l).or_default().push(pos);
    }
    let pairs: Vec<(usize, usize)> = blocks.values().map(|v| (v[0], v[1])).collect();
    let mut count = 0;
    for (i, &(a, c)) in pairs.iter().enumerate() {
        for &(b, d) in &pairs[i + 1..] {
            if (a < b && b < c && c < d) || (b < a && a < d && d < c) {
                count += 1;
            }
        }
    }
    count
}

/// Parity of the number of adjacent switches of distinct labels taken by a
/// random walk that stops at a noncrossing arrangement.
fn random_reduction_parity(rng: &mut ChaCha8Rng, flat: &[u16]) -> bool {
    let mut x = flat.to_vec();
    let mut switches = 0usize;
    let warmup = rng.random_range(0..20);
    let mut steps = 0;
    while steps < warmup || has_crossing(&x) {
        let a = rng.random_range(0..x.len() - 1);
        if x[a] != x[a + 1] {
            x.swap(a, a + 1);
            switches += 1;
        }
        steps += 1;
    }
    switches % 2 == 1
}

#[test]
fn criterion_04_signature_calibration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut counts = [0usize; 4];

    for k in 0..=5 {
        for perm in permutations(k) {
            let labels: Vec<usize> = (0..k)
                .chain((0..k).map(|d| perm.iter().position(|&x| x == d).unwrap()))
                .collect();
            let p =
                Partition::from_labels(ColorWord::plain(k), ColorWord::plain(k), &labels).unwrap();
            counts[0] += 1;
            if p.signature().unwrap() != Sign::from_parity(inversion_parity_odd(&perm)) {
                failures.push(format!("permutation {p}"));
            }
        }
    }

    for legs in (0..=8).step_by(2) {
        for labels in set_partitions(legs, BlockShape::Pairs) {
            for k in 0..=legs {
                let ls: Vec<usize> = labels.iter().map(|&x| x as usize).collect();
                let p =
                    Partition::from_labels(ColorWord::plain(k), ColorWord::plain(legs - k), &ls)
                        .unwrap();
                counts[1] += 1;
                let expected = Sign::from_parity(pair_crossings(&p.flat_labels()) % 2 == 1);
                if p.signature().unwrap() != expected {
                    failures.push(format!("pairing {p}"));
                }
            }
        }
    }

    let nc_even: Vec<Partition> = (2..=8)
        .step_by(2)
        .flat_map(|legs| {
            set_partitions(legs, BlockShape::Even)
                .into_iter()
                .map(move |labels| {
                    let ls: Vec<usize> = labels.iter().map(|&x| x as usize).collect();
                    Partition::from_labels(ColorWord::empty(), ColorWord::plain(legs), &ls).unwrap()
                })
        })
        .filter(|p| p.is_noncrossing())
        .collect();
    for _ in 0..100 {
        let p = nc_even.choose(&mut rng).unwrap();
        let merged = p.coarsenings();
        let target = merged.choose(&mut rng).unwrap();
        counts[2] += 1;
        if target.signature().unwrap() != Sign::Plus {
            failures.push(format!("merge {p} -> {target}"));
        }
    }

    for _ in 0..40 {
        let legs = 2 * rng.random_range(1..=4);
        let k = rng.random_range(0..=legs);
        let p = random_partition(&mut rng, k, legs - k, BlockShape::Even).unwrap();
        let expected = p.signature().unwrap();
        let flat = p.flat_labels();
        for _ in 0..100 {
            counts[3] += 1;
            if Sign::from_parity(random_reduction_parity(&mut rng, &flat)) != expected {
                failures.push(format!("reduction order {p}"));
                break;
            }
        }
    }

    let pass = failures.is_empty();
    report(
        4,
        pass,
        &format!(
            "{} permutations, {} pairings, {} merges, {} random reductions; {} failures",
            counts[0],
            counts[1],
            counts[2],
            counts[3],
            failures.len()
        ),
    );
    assert!(pass, "{failures:?}");
}

fn catalan(k: u64) -> u64 {
    (0..k).fold(1u64, |c, i| c * 2 * (2 * i + 1) / (i + 2))
}

#[test]
fn criterion_05_character_moments() {
    let haar = Haar::new(Bounds {
        max_legs: 16,
        max_degree: 10,
        ..Bounds::default()
    });
    let mut failures = Vec::new();

    for n in [2, 3] {
        let g = EasyGroupId::new(Series::OPlus, n).unwrap();
        for k in 0..=5 {
            let v = haar.char_moment(&g, &ColorWord::plain(2 * k)).unwrap();
            if v != q(catalan(k as u64) as i64) {
                failures.push(format!("{g} k={k}: {v}"));
            }
        }
    }

    let wide = Bounds {
        max_legs: 16,
        ..Bounds::default()
    };
    let bell = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140];
    let named = CategorySpec::Named;
    let p = asymptotic_char_moments(&named(NamedCategory::P), 8, &wide).unwrap();
    let nc = asymptotic_char_moments(&named(NamedCategory::NC), 8, &wide).unwrap();
    let nc2 = asymptotic_char_moments(&named(NamedCategory::NC2), 16, &wide).unwrap();
    let p2 = asymptotic_char_moments(&named(NamedCategory::P2), 16, &wide).unwrap();
    for k in 0..=8usize {
        let double_factorial = (1..=k as u64).map(|i| 2 * i - 1).product::<u64>();
        if p[k] != bell[k] {
            failures.push(format!("P k={k}: {}", p[k]));
        }
        if nc[k] != catalan(k as u64) {
            failures.push(format!("NC k={k}: {}", nc[k]));
        }
        if nc2[2 * k] != catalan(k as u64) {
            failures.push(format!("NC2 2k={}: {}", 2 * k, nc2[2 * k]));
        }
        if p2[2 * k] != double_factorial {
            failures.push(format!("P2 2k={}: {}", 2 * k, p2[2 * k]));
        }
        if k > 0 && (nc2[2 * k - 1] != 0 || p2[2 * k - 1] != 0) {
            failures.push(format!("odd moment {} nonzero", 2 * k - 1));
        }
    }

    let bounds = Bounds::default();
    let series = [
        (NamedCategory::P2, Series::O),
        (NamedCategory::P2Star, Series::OStar),
        (NamedCategory::NC2, Series::OPlus),
        (NamedCategory::CP2, Series::U),
        (NamedCategory::CP2Star, Series::UStar),
        (NamedCategory::CNC2, Series::UPlus),
    ];
    assert_eq!(NamedCategory::BASIC.len(), series.len());
    let mut compared = 0;
    for (cat, s) in series {
        let spec = CategorySpec::Named(cat);
        let words: Vec<ColorWord> = (0..=6)
            .flat_map(|len| {
                if cat.is_color_blind() {
                    vec![ColorWord::plain(len)]
                } else {
                    ColorWord::all_colored(len)
                }
            })
            .collect();
        for n in 1..=3 {
            let g = EasyGroupId::new(s, n).unwrap();
            for w in &words {
                let moment = haar.char_moment(&g, w).unwrap();
                let dim = linear_maps::fix_dim(&spec, w, n, false, &bounds).unwrap();
                compared += 1;
                if moment != q(dim as i64) {
                    failures.push(format!("{g} word {w}: char {moment}, fix_dim {dim}"));
                }
            }
        }
    }

    let pass = failures.is_empty();
    report(
        5,
        pass,
        &format!(
            "Catalan for O+_2, O+_3; Bell/Catalan/(2k-1)!! tables to k=8; {compared} char=fix_dim checks; {} failures",
            failures.len()
        ),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_06_twist_invariance() {
    let haar = Haar::default();
    let bounds = Bounds::default();
    let mut failures = Vec::new();
    let mut checked = 0;
    for (cat, series) in [
        (NamedCategory::P2, Series::O),
        (NamedCategory::P2Star, Series::OStar),
    ] {
        let spec = CategorySpec::Named(cat);
        for n in 1..=3 {
            let plain = EasyGroupId::new(series, n).unwrap();
            let twisted = EasyGroupId::twisted(series, n).unwrap();
            for len in 0..=6 {
                let w = ColorWord::plain(len);
                let a = linear_maps::gram(&spec, &w, n, false, &bounds).unwrap();
                let b = linear_maps::gram(&spec, &w, n, true, &bounds).unwrap();
                if a.gram != b.gram {
                    failures.push(format!("gram {cat} n={n} len={len}"));
                }
                let x = haar.char_moment(&plain, &w).unwrap();
                let y = haar.char_moment(&twisted, &w).unwrap();
                if x != y {
                    failures.push(format!("char {plain} vs {twisted} len={len}: {x} vs {y}"));
                }
                checked += 1;
            }
        }
    }
    let pass = failures.is_empty();
    report(
        6,
        pass,
        &format!(
            "{checked} (category, N, word) cases for O vs O~ and O* vs O*~; {} failures",
            failures.len()
        ),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_07_on_star_model_is_stationary() {
    let haar = Haar::default();
    let mut failures = Vec::new();
    let mut words = 0;
    let mut integrals = 0;
    for n in [2, 3] {
        let model = MatrixModel::on_star(n).unwrap();
        let st = model.stationarity_check(&haar, 3, 0.0).unwrap();
        words += st.words.len();
        for v in &st.words {
            if !(v.exact && v.pass && v.residual == 0.0) {
                failures.push(format!(
                    "ONstar:{n} word {} residual {}",
                    v.word, v.residual
                ));
            }
        }
        let g = EasyGroupId::new(Series::OStar, n).unwrap();
        for base in all_plain_monomials(n, 4) {
            for stars in ColorWord::all_colored(base.degree()) {
                let m = Monomial::from_word(&base.rows(), &base.cols(), &stars);
                let ModelValue::Exact(z) = model.direct_integral(&haar, &m).unwrap() else {
                    panic!("O_N* model integrals are exact");
                };
                let expected = haar.integrate(&g, &m).unwrap();
                integrals += 1;
                if !z.im.is_zero() || z.re != expected {
                    failures.push(format!("{m} at N={n}: model {z}, weingarten {expected}"));
                }
            }
        }
    }
    let pass = failures.is_empty();
    report(
        7,
        pass,
        &format!(
            "{words} words exactly idempotent; {integrals} model integrals equal O*_N Weingarten; {} failures",
            failures.len()
        ),
    );
    assert!(pass, "{:?}", &failures[..failures.len().min(5)]);
}

#[test]
fn criterion_08_cesaro_convergence() {
    let haar = Haar::default();
    let bounds = Bounds::default();
    let depth = 10_000;
    let tol = 1e-6;
    let mut failures = Vec::new();

    let s3 = MatrixModel::s3_two_generator().unwrap();
    let oracle = FiniteGroupOracle::new(OracleGroup::Symmetric, 3, &bounds).unwrap();
    let mut worst = (0.0f64, String::new());
    let mut flags = 0;
    let monomials = all_plain_monomials(3, 3);
    for m in &monomials {
        let exact = complex_to_f64(&oracle.exact_integral(m).unwrap());
        let c = s3.cesaro_integral(&haar, m, depth, tol).unwrap();
        let err = (c.value - exact).norm();
        if err > worst.0 {
            worst = (err, m.to_string());
        }
        if c.converged {
            flags += 1;
        }
        if err > tol {
            failures.push(format!(
                "s3points {m}: cesaro {} vs {}",
                c.value.re, exact.re
            ));
        }
    }

    let depths = [1, 2, 10, 100, 1000];
    let mut stationary_checked = 0;
    for model in [
        MatrixModel::counit(3).unwrap(),
        MatrixModel::on_star(2).unwrap(),
    ] {
        for m in all_plain_monomials(model.n, 2).iter().take(60) {
            let first = model.truncated_integral(&haar, 1, m).unwrap().to_f64();
            for &d in &depths {
                let c = model.cesaro_integral(&haar, m, d, tol).unwrap();
                stationary_checked += 1;
                if (c.value - first).norm() > 1e-12 {
                    failures.push(format!(
                        "{} {m} depth {d}: {} vs {}",
                        model.name, c.value, first
                    ));
                }
            }
        }
    }

    let pass = failures.is_empty();
    report(
        8,
        pass,
        &format!(
            "s3points: worst |cesaro - haar| = {:.3e} at {} (tolerance {tol:e}, depth {depth}), {flags}/{} convergence flags set; {stationary_checked} stationary depth checks; {} failures",
            worst.0,
            worst.1,
            monomials.len(),
            failures.len()
        ),
    );
    assert!(
        pass,
        "{} failures, e.g. {:?}. The Cesàro error of a primitive finite Markov chain decays like C/depth \
         with C = Σ_r (T^r − Π) ≠ 0; for v(1,1) on the two-generator S_3 model C = 4/9, so depth 1e4 \
         leaves 4.4e-5 and 1e-6 needs depth ≈ 4.5e5.",
        failures.len(),
        &failures[..failures.len().min(3)]
    );
}

#[test]
fn criterion_09_category_lattice() {
    use NamedCategory::*;
    let bounds = Bounds::default();
    let inclusions = [
        (NC2, P2Star),
        (P2Star, P2),
        (CNC2, CP2Star),
        (CP2Star, CP2),
        (CNC2, NC2),
        (CP2Star, P2Star),
        (CP2, P2),
        (NC2, NCEven),
        (P2, PEven),
        (P2Star, PEvenStar),
        (NCEven, PEvenStar),
        (PEvenStar, PEven),
        (NCEven, NC),
        (PEven, P),
        (NC, P),
        (CNCEven, CPEvenStar),
        (CPEvenStar, CPEven),
        (CNCEven, NCEven),
        (CPEvenStar, PEvenStar),
        (CPEven, PEven),
        (CNC2, CNCEven),
        (CP2Star, CPEvenStar),
        (CP2, CPEven),
    ];
    let mut failures = Vec::new();
    let mut universe = 0;
    for (upper, lower) in qwein_core::category::leg_structures(6, true) {
        let all = CategorySpec::Named(P)
            .enumerate(&upper, &lower, bounds.max_legs)
            .unwrap();
        for p in &all {
            universe += 1;
            for (a, b) in inclusions {
                if a.member(p) && !b.member(p) {
                    failures.push(format!("{p} in {a} but not in {b}"));
                }
            }
        }
    }

    let cap = |s: &str| s.parse::<Partition>().unwrap();
    let generated = closure(&[cap(":ob:{d1,d2}"), cap(":bo:{d1,d2}")], 6);
    let sorted = |spec: &CategorySpec| {
        let mut v: Vec<String> = spec
            .members_up_to(6, true)
            .unwrap()
            .iter()
            .map(|p| p.to_string())
            .collect();
        v.sort();
        v
    };
    let cnc2 = CategorySpec::Named(CNC2);
    if sorted(&generated) != sorted(&cnc2) {
        failures.push("closure of caps differs from cNC2".into());
    }
    let collapse = closure(&[cap("o:b:{u1,d1}"), cap("b:o:{u1,d1}")], 6);
    let joined = cnc2.generate(&collapse, 6).unwrap();
    if sorted(&joined) != sorted(&CategorySpec::Named(NC2)) {
        failures.push("<cNC2, color collapse> differs from NC2".into());
    }

    let pass = failures.is_empty();
    report(
        9,
        pass,
        &format!(
            "{} inclusions over {universe} partitions up to 6 legs; 2 closure identities; {} failures",
            inclusions.len(),
            failures.len()
        ),
    );
    assert!(pass, "{:?}", &failures[..failures.len().min(5)]);
}

/// `d(i)ᵀ W d(j)` with `d(i)_π = δ_π(i)`.
fn weingarten_sum(basis: &[Partition], w: &Matrix<Rational>, i: &[usize], j: &[usize]) -> Rational {
    let di: Vec<bool> = basis.iter().map(|p| p.delta(&[], i).unwrap()).collect();
    let dj: Vec<bool> = basis.iter().map(|p| p.delta(&[], j).unwrap()).collect();
    let mut total = Rational::zero();
    for (a, &x) in di.iter().enumerate() {
        if !x {
            continue;
        }
        for (b, &y) in dj.iter().enumerate() {
            if y && !w.get(a, b).is_zero() {
                total += w.get(a, b);
            }
        }
    }
    total
}

#[test]
fn criterion_10_generalized_inverse_robustness() {
    let haar = Haar::default();
    let bounds = Bounds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = Vec::new();
    let mut integrals = 0;
    let spec = CategorySpec::Named(NamedCategory::P);
    for n in [1, 2] {
        let w = ColorWord::plain(6);
        let table =
            linear_maps::weingarten(linear_maps::gram(&spec, &w, n, false, &bounds).unwrap());
        let g = &table.gram;
        let wg = table.wg.as_ref().unwrap();
        if table.is_invertible() {
            failures.push(format!("N={n}: Gram unexpectedly invertible"));
        }
        if g.matmul(wg).matmul(g) != *g {
            failures.push(format!("N={n}: GWG != G"));
        }
        if wg.matmul(g).matmul(wg) != *wg {
            failures.push(format!("N={n}: WGW != W"));
        }
        let group = EasyGroupId::new(Series::S, n).unwrap();
        let idx = tuples(n, 6);
        let mut shuffled_tables = Vec::new();
        for _ in 0..2 {
            let mut basis = table.basis.clone();
            basis.shuffle(&mut rng);
            let t = linear_maps::weingarten(
                linear_maps::gram_for_basis("P".into(), &w, basis, n, false, &bounds).unwrap(),
            );
            let gg = &t.gram;
            if gg.matmul(t.wg.as_ref().unwrap()).matmul(gg) != *gg {
                failures.push(format!("N={n}: shuffled GWG != G"));
            }
            shuffled_tables.push(t);
        }
        for i in &idx {
            for j in &idx {
                let reference = weingarten_sum(&table.basis, wg, i, j);
                let m = Monomial::from_word(i, j, &ColorWord::new(vec![Color::Plain; 6]));
                let engine = haar.integrate(&group, &m).unwrap();
                integrals += 1;
                if engine != reference {
                    failures.push(format!("N={n} {m}: engine {engine}, table {reference}"));
                }
                for t in &shuffled_tables {
                    let v = weingarten_sum(&t.basis, t.wg.as_ref().unwrap(), i, j);
                    if v != reference {
                        failures.push(format!(
                            "N={n} {m}: reordered basis gives {v}, not {reference}"
                        ));
                    }
                }
            }
        }
        if n == 1
            && haar
                .integrate(&group, &Monomial::plain(&[(1, 1); 6]))
                .unwrap()
                != Rational::one()
        {
            failures.push("S_1 integral of u11^6 is not 1".into());
        }
    }
    let pass = failures.is_empty();
    report(
        10,
        pass,
        &format!(
            "P on 6 legs at N=1,2: GWG=G, WGW=W; {integrals} integrals invariant under 2 basis shuffles; {} failures",
            failures.len()
        ),
    );
    assert!(pass, "{:?}", &failures[..failures.len().min(5)]);
}
