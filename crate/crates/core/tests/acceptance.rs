//! One pass/fail line per acceptance criterion. Every comparison is exact;
//! the only tolerances are the wall-clock budgets below.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use blowdown_lab::geography::{self, Route};
use blowdown_lab::report::{CheckStatus, Report};
use blowdown_lab::sw::{self, BasicClass, FilterMode};
use blowdown_lab::{surfaces, verify};

const HORIZONTAL_FIBER_BUDGET: Duration = Duration::from_secs(60);
const SWEEP_BUDGET: Duration = Duration::from_secs(60);
const SWEEP_X_MAX: i64 = 30;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn verified(rep: &Report, name: &str) -> Result<String, String> {
    let c = rep.get(name).ok_or_else(|| format!("{}: no check {name:?}", rep.title))?;
    ensure(c.status == CheckStatus::Verified, || {
        format!("{}: {name:?} is {:?} ({})", rep.title, c.status, c.detail)
    })?;
    Ok(c.detail.clone())
}

fn gram_text(g: [[i64; 2]; 2]) -> String {
    format!("[[{},{}],[{},{}]]", g[0][0], g[0][1], g[1][0], g[1][1])
}

fn no_failures(rep: &Report) -> Result<(), String> {
    ensure(rep.all_passed(), || format!("{}: failed checks {:?}", rep.title, rep.failures()))
}

fn criterion_1() -> Outcome {
    for p in 4..=12 {
        let rep = verify::verify_prop_p(p).map_err(|e| format!("p = {p}: {e}"))?;
        no_failures(&rep)?;
        let want = [[2 * p - 5, 1], [1, -(2 * p - 7)]];
        let n = 2 * p - 6;
        ensure(want[0][0] * want[1][1] - want[0][1] * want[1][0] == -n * n, || format!("p = {p}: det"))?;
        let got = verified(&rep, "complement gram")?;
        ensure(got == gram_text(want), || format!("p = {p}: gram {got}, want {}", gram_text(want)))?;
        ensure(rep.data.get("gram") == Some(&serde_json::json!(want)), || format!("p = {p}: gram data"))?;
        verified(&rep, "sigma = 2 gamma1 + gamma2")?;
        verified(&rep, "sigma = p h - (p-3) e")?;
        for (name, v) in [("h.h", "1"), ("e.e", "-1"), ("h.e", "0")] {
            let got = verified(&rep, name)?;
            ensure(got == v, || format!("p = {p}: {name} = {got}"))?;
        }
    }
    Ok("p = 4..12: gram [[2p-5,1],[1,-(2p-7)]], sigma = 2g1+g2 = ph-(p-3)e".into())
}

fn criterion_2() -> Outcome {
    for p in 5..=12 {
        let rep = verify::verify_prop_p_prime(p).map_err(|e| format!("p = {p}: {e}"))?;
        no_failures(&rep)?;
        let want = [[2 * p - 6, 1], [1, -(2 * p - 8)]];
        let got = verified(&rep, "complement gram")?;
        ensure(got == gram_text(want), || format!("p = {p}: gram {got}, want {}", gram_text(want)))?;
        let class = verified(&rep, "sigma = p h - (p-3) e - 2 e1")?;
        let want_class = format!("{p}h-{}e-2e1", p - 3);
        ensure(class == want_class, || format!("p = {p}: final class {class}, want {want_class}"))?;
    }
    Ok("p = 5..12: gram [[2p-6,1],[1,-(2p-8)]], final class ph-(p-3)e-2e1".into())
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    for q in 3..=8 {
        let lambda = surfaces::horizontal_fiber_class(q).map_err(|e| format!("q = {q}: {e}"))?;
        let mut want = vec![q + 1, -(q - 1)];
        want.extend(std::iter::repeat_n(-1, 4 * q as usize));
        ensure(lambda.coeffs() == want.as_slice(), || format!("q = {q}: got {lambda}"))?;
        let r = surfaces::build_r(q + 1).map_err(|e| e.to_string())?;
        ensure(&lambda == r.sigma_class(), || format!("q = {q}: differs from Sigma_R"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < HORIZONTAL_FIBER_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("q = 3..8: unique solution (q+1)H-(q-1)E-sum E_i = Sigma_R(q+1), {:.2?}", elapsed))
}

fn criterion_4() -> Outcome {
    for p in 4..=10 {
        let (m, rep) = geography::construct_xp(p).map_err(|e| format!("X_{p}: {e}"))?;
        no_failures(&rep)?;
        ensure((m.c1sq(), m.chi_h()) == (2 * p - 7, 2 * p - 4), || {
            format!("X_{p}: (c1^2, chi_h) = ({}, {})", m.c1sq(), m.chi_h())
        })?;
    }
    for p in 5..=10 {
        let (m, rep) = geography::construct_xp_prime(p).map_err(|e| format!("X'_{p}: {e}"))?;
        no_failures(&rep)?;
        ensure((m.c1sq(), m.chi_h()) == (2 * p - 8, 2 * p - 5), || {
            format!("X'_{p}: (c1^2, chi_h) = ({}, {})", m.c1sq(), m.chi_h())
        })?;
    }
    for q in 2..=8 {
        let (direct, summed) = surfaces::elliptic_routes(q).map_err(|e| format!("E({q}): {e}"))?;
        ensure(direct.same_invariants(&summed), || format!("E({q}): routes disagree"))?;
        ensure((direct.e(), direct.sign()) == (12 * q, -8 * q), || format!("E({q}): direct ledger"))?;
        ensure((summed.chi_h(), summed.c1sq()) == (q, 0), || format!("E({q}): (chi_h, c1^2)"))?;
    }
    Ok("X_p (p = 4..10), X'_p (p = 5..10), E(q) two routes (q = 2..8)".into())
}

/// Pairs every class with every sphere through the full lattice, without
/// the filter's shortcuts, and returns the survivors.
fn direct_filter(x: i64, k: usize) -> Result<(Vec<BasicClass>, u128), String> {
    let set = sw::blowup_formula(&sw::basic_classes_e(x).map_err(|e| e.to_string())?, k).map_err(|e| e.to_string())?;
    let config = sw::config_in_e_blowup(x, k).map_err(|e| e.to_string())?;
    let n = config.n();
    let frag = set.fragment();
    let mut survivors = Vec::new();
    let mut count = 0u128;
    for b in set.iter() {
        count += 1;
        let cls = b.to_class(frag).map_err(|e| e.to_string())?;
        for (i, s) in config.spheres().iter().enumerate().skip(1) {
            let v = cls.pair(s).map_err(|e| e.to_string())?;
            ensure(v == 0, || format!("(x, k) = ({x}, {k}): {b} pairs to {v} with S_{i}"))?;
        }
        let lead = cls.pair(&config.spheres()[0]).map_err(|e| e.to_string())?;
        ensure(lead.abs() <= n, || format!("(x, k) = ({x}, {k}): |{b} . S_0| = {} > {n}", lead.abs()))?;
        if lead.abs() == n {
            survivors.push(b);
        }
    }
    Ok((survivors, count))
}

fn criterion_5() -> Outcome {
    for p in 4..=8 {
        let x = 2 * p - 4;
        let (mut got, _) = direct_filter(x, 0)?;
        got.sort();
        let top = BasicClass { m: 2 * p - 6, eps: vec![] };
        ensure(got == vec![top.negate(), top.clone()], || format!("E({x}), C_{}: survivors {got:?}", 2 * p - 6))?;
    }
    let mut pairs = 0;
    let mut classes = 0u128;
    for x in 4..=8 {
        for k in 0..=8usize {
            if 2 * k as i64 > 3 * x + 2 {
                continue;
            }
            let (mut direct, count) = direct_filter(x, k)?;
            ensure(count == (x as u128 - 1) << k, || format!("(x, k) = ({x}, {k}): {count} classes"))?;
            let set = sw::blowup_formula(&sw::basic_classes_e(x).unwrap(), k).unwrap();
            let config = sw::config_in_e_blowup(x, k).unwrap();
            let outcome = sw::taut_filter_with(&set, &config, FilterMode::Explicit).map_err(|e| e.to_string())?;
            let mut filtered: Vec<BasicClass> = outcome.survivors.iter().collect();
            ensure(outcome.checked == count, || format!("(x, k) = ({x}, {k}): filter checked {}", outcome.checked))?;
            direct.sort();
            filtered.sort();
            let top = BasicClass { m: x - 2, eps: vec![1; k] };
            let want = vec![top.negate(), top];
            ensure(direct == want, || format!("(x, k) = ({x}, {k}): survivors {direct:?}"))?;
            ensure(filtered == want, || format!("(x, k) = ({x}, {k}): filter survivors {filtered:?}"))?;
            pairs += 1;
            classes += count;
        }
    }
    Ok(format!(
        "E(2p-4) survivors +-(2p-6)f for p = 4..8; {pairs} admissible (x, k), {classes} classes, 2 survivors each"
    ))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let rows = geography::sweep_rows(SWEEP_X_MAX).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected: usize = (4..=SWEEP_X_MAX).map(|x| ((5 * x - 4).div_euclid(2) - (x - 3) + 1) as usize).sum();
    ensure(rows.len() == expected, || format!("{} rows, want {expected}", rows.len()))?;
    let mut at = 0;
    for x in 4..=SWEEP_X_MAX {
        for c in (x - 3)..=(5 * x - 4).div_euclid(2) {
            let r = &rows[at];
            at += 1;
            ensure((r.x, r.c) == (x, c), || format!("row order at ({x}, {c})"))?;
            ensure(r.status == "pass", || format!("({x}, {c}) failed"))?;
            ensure(r.route == Route::EllipticBlowdown.as_str(), || format!("({x}, {c}): route {}", r.route))?;
            ensure(r.basic_classes == "verified", || format!("({x}, {c}): basic classes {}", r.basic_classes))?;
        }
    }
    ensure(elapsed < SWEEP_BUDGET, || format!("sweep took {elapsed:?}"))?;
    Ok(format!("{} points with x <= {SWEEP_X_MAX}, zero failures, {:.2?}", rows.len(), elapsed))
}

fn criterion_7() -> Outcome {
    use common::*;
    run_property(10_000, valid_betti(), ledger_identities).map_err(|e| format!("ledger identities: {e}"))?;
    run_property(256, small_plane_class(), blow_up_then_down).map_err(|e| format!("blowup round trip: {e}"))?;
    run_property(256, pushforward_input(), pushforward_square).map_err(|e| format!("pushforward: {e}"))?;
    run_property(256, complement_input(), complement_vs_kernel).map_err(|e| format!("complement: {e}"))?;
    let mut done = 0;
    for g in 1..=10 {
        let fixed = (proptest::strategy::Just(g), (0i64..20, 0i64..40), (0i64..20, 0i64..40));
        run_property(64, fixed, fiber_sum_bookkeeping).map_err(|e| format!("fiber sum g = {g}: {e}"))?;
        done += 64;
    }
    Ok(format!(
        "10000 ledgers, 256 round trips, 256 pushforwards, 256 complements, {done} fiber sums (g = 1..10)"
    ))
}

fn criterion_8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_blowdown-lab");
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
    let cases: [(&[&str], &str); 3] = [
        (&["verify", "prop-p", "--p", "4"], "verify_prop_p_4.json"),
        (&["construct", "z", "--x", "4", "--k", "0"], "construct_z_4_0.json"),
        (&["sweep", "--x-max", "6", "--table", "-"], "sweep_6.csv"),
    ];
    for (args, file) in cases {
        let want = std::fs::read(format!("{dir}/{file}")).map_err(|e| format!("{file}: {e}"))?;
        for run in 0..3 {
            let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
            ensure(out.status.success(), || format!("{args:?} exited {:?}", out.status.code()))?;
            ensure(out.stdout == want, || format!("{args:?} run {run} differs from {file}"))?;
        }
    }
    Ok("3 commands x 3 runs byte-identical to golden files".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("chain blowdown in R(2p-3)", criterion_1),
        ("chain blowdown in R(2p-4)", criterion_2),
        ("horizontal fiber", criterion_3),
        ("invariant ledgers", criterion_4),
        ("basic-class filtering", criterion_5),
        ("geography coverage", criterion_6),
        ("property suites", criterion_7),
        ("CLI determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
