//! Property checks shared by the proptest suite and the acceptance runner.
#![allow(dead_code)]

use std::sync::Arc;

use blowdown_lab::lattice::{orthogonal_complement, HomClass, IntLattice};
use blowdown_lab::ledger::{make_ledger, BlowDownMap, EmbeddedSurface, LedgerFlags, ManifoldLedger};
use blowdown_lab::surgery::fiber_sum;
use num_rational::Ratio;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

type Q = Ratio<i128>;
pub type Check = std::result::Result<(), TestCaseError>;

/// Rank by Gaussian elimination over `i128` fractions.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&v| Q::from(i128::from(v))).collect()).collect();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != Q::from(0)) else {
            continue;
        };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && m[i][c] != Q::from(0) {
                let f = m[i][c] / m[r][c];
                for j in c..ncols {
                    let t = m[r][j] * f;
                    m[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

fn det(m: &[Vec<i64>]) -> i128 {
    if m.is_empty() {
        return 1;
    }
    let mut total = 0i128;
    for j in 0..m.len() {
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        total += sign * i128::from(m[0][j]) * det(&minor);
    }
    total
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn column_subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    if n < r {
        return vec![];
    }
    let mut out = column_subsets(n - 1, r);
    for mut s in column_subsets(n - 1, r - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn box_vectors(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn plane_ledger(k: usize) -> ManifoldLedger {
    let lat = IntLattice::blown_up_plane(k);
    let mut coeffs = vec![-3];
    coeffs.extend(std::iter::repeat_n(1, k));
    let canonical = lat.from_coeffs(coeffs).unwrap();
    make_ledger(
        format!("CP2 # {k}(-CP2)"),
        3 + k as i64,
        1 - k as i64,
        LedgerFlags::symplectic_simply_connected(),
    )
    .unwrap()
    .with_lattice(lat, canonical)
    .unwrap()
}

pub fn symmetric_gram(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    proptest::collection::vec(-3i64..=3, n * (n + 1) / 2).prop_map(move |upper| {
        let mut g = vec![vec![0; n]; n];
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().unwrap();
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        g
    })
}

fn lattice_of(gram: Vec<Vec<i64>>) -> Arc<IntLattice> {
    let labels: Vec<String> = (0..gram.len()).map(|i| format!("x{i}")).collect();
    IntLattice::new(labels, gram).unwrap()
}

/// `(j, b-)` with `b+ = 2j + 1`; an odd `b+` keeps `chi_h` integral.
pub fn valid_betti() -> impl Strategy<Value = (i64, i64)> {
    (0i64..500, 0i64..1000)
}

pub fn ledger_identities((half_b_plus, b_minus): (i64, i64)) -> Check {
    let b_plus = 2 * half_b_plus + 1;
    let e = 2 + b_plus + b_minus;
    let sign = b_plus - b_minus;
    let m = make_ledger("M", e, sign, LedgerFlags::default()).unwrap();
    prop_assert_eq!(m.b_plus(), b_plus);
    prop_assert_eq!(m.b_minus(), b_minus);
    prop_assert_eq!(m.e(), 2 + m.b_plus() + m.b_minus());
    prop_assert_eq!(m.sign(), m.b_plus() - m.b_minus());
    prop_assert_eq!(4 * m.chi_h(), m.e() + m.sign());
    prop_assert_eq!(m.c1sq(), 2 * m.e() + 3 * m.sign());
    prop_assert!(m.check_identities().is_ok());
    Ok(())
}

pub fn small_plane_class() -> impl Strategy<Value = (usize, Vec<i64>)> {
    (0usize..7, proptest::collection::vec(-4i64..=4, 8))
}

pub fn blow_up_then_down((k, coeffs): (usize, Vec<i64>)) -> Check {
    let m = plane_ledger(k);
    let lat = m.lattice().unwrap().clone();
    let cls = lat.from_coeffs(coeffs[..=k].to_vec()).unwrap();
    let surf = EmbeddedSurface::from_class("S", cls.clone(), 0, false).unwrap();
    let m = m.with_surface(surf).unwrap();

    let up = m.blow_up().unwrap();
    let new_e = up.lattice().unwrap().generators().last().unwrap().clone();
    prop_assert_eq!(new_e.square().unwrap(), -1);
    let down = up.blow_down(&new_e).unwrap();

    prop_assert!(down.same_invariants(&m));
    prop_assert_eq!(down.lattice().unwrap().gram(), lat.gram());
    prop_assert_eq!(down.canonical().unwrap().coeffs(), m.canonical().unwrap().coeffs());
    let back = down.surface("S").unwrap().cls.as_ref().unwrap();
    prop_assert_eq!(back.coeffs(), cls.coeffs());
    Ok(())
}

pub fn pushforward_input() -> impl Strategy<Value = (usize, usize, Vec<i64>)> {
    (1usize..8, 1usize..8, proptest::collection::vec(-6i64..=6, 8))
}

pub fn pushforward_square((k, j, coeffs): (usize, usize, Vec<i64>)) -> Check {
    let j = 1 + (j - 1) % k;
    let lat = IntLattice::blown_up_plane(k);
    let s = lat.from_coeffs(coeffs[..=k].to_vec()).unwrap();
    let e = lat.generator(&format!("E{j}")).unwrap();
    let pushed = BlowDownMap::new(&e).unwrap().push(&s).unwrap();
    let se = s.pair(&e).unwrap();
    prop_assert_eq!(pushed.square().unwrap(), s.square().unwrap() + se * se);
    Ok(())
}

pub fn complement_input() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            symmetric_gram(n),
            proptest::collection::vec(proptest::collection::vec(-2i64..=2, n), 0..3),
        )
    })
}

/// The complement basis is orthogonal, of dimension `n - rank`, saturated
/// (its maximal minors are coprime), and spans every small kernel vector.
pub fn complement_vs_kernel((gram, raw): (Vec<Vec<i64>>, Vec<Vec<i64>>)) -> Check {
    let n = gram.len();
    let lat = lattice_of(gram.clone());
    let classes: Vec<HomClass> = raw.iter().map(|c| lat.from_coeffs(c.clone()).unwrap()).collect();
    let basis = orthogonal_complement(&lat, &classes).unwrap();

    let rows: Vec<Vec<i64>> = classes
        .iter()
        .map(|c| (0..n).map(|j| (0..n).map(|i| c.coeffs()[i] * gram[i][j]).sum()).collect())
        .collect();
    let r = n - rank(&rows);
    prop_assert_eq!(basis.len(), r);

    let bmat: Vec<Vec<i64>> = basis.iter().map(|b| b.coeffs().to_vec()).collect();
    for b in &basis {
        for c in &classes {
            prop_assert_eq!(b.pair(c).unwrap(), 0);
        }
    }
    let minors_gcd = column_subsets(n, r)
        .iter()
        .map(|cols| det(&bmat.iter().map(|row| cols.iter().map(|&c| row[c]).collect()).collect::<Vec<_>>()))
        .fold(0, gcd);
    prop_assert_eq!(minors_gcd, 1);

    for v in box_vectors(n, 2) {
        if rows.iter().all(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum::<i64>() == 0) {
            let mut m = bmat.clone();
            m.push(v);
            prop_assert_eq!(rank(&m), r);
        }
    }
    Ok(())
}

pub fn fiber_sum_input() -> impl Strategy<Value = (i64, (i64, i64), (i64, i64))> {
    (1i64..=10, (0i64..20, 0i64..40), (0i64..20, 0i64..40))
}

pub fn fiber_sum_bookkeeping((g, (ha, ma), (hb, mb)): (i64, (i64, i64), (i64, i64))) -> Check {
    let ledger = |name: &str, h: i64, bm: i64| {
        let bp = 2 * h + 1;
        make_ledger(name, 2 + bp + bm, bp - bm, LedgerFlags::symplectic_simply_connected()).unwrap()
    };
    let (a, b) = (ledger("A", ha, ma), ledger("B", hb, mb));
    let fa = EmbeddedSurface::formal("F", g, 0, true).unwrap();
    let fb = EmbeddedSurface::formal("F", g, 0, true).unwrap();
    let sum = fiber_sum(&a, &fa, &b, &fb, true).unwrap();
    prop_assert_eq!(sum.e(), a.e() + b.e() + 4 * g - 4);
    prop_assert_eq!(sum.sign(), a.sign() + b.sign());
    prop_assert_eq!(sum.chi_h(), a.chi_h() + b.chi_h() + g - 1);
    prop_assert_eq!(sum.c1sq(), a.c1sq() + b.c1sq() + 8 * g - 8);
    Ok(())
}

/// Runs one property for `cases` deterministic cases.
pub fn run_property<S: Strategy>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Check) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    TestRunner::new_with_rng(config, rng)
        .run(&strategy, check)
        .map_err(|e| e.to_string())
}
