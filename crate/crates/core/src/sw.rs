//! Seiberg-Witten basic classes of `E(x) # k(-CP^2)` and the filter that
//! selects which of them survive a rational blowdown.
//!
//! Classes live on a lattice fragment generated by the fiber `f`, a section
//! `S` of square `-x`, the chain `t_1 .. t_{4x-2}` of (-2)-spheres attached to
//! `S`, and the exceptional classes `E_1 .. E_k`. Only pairings with these
//! generators are ever needed.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{HomClass, IntLattice};
use crate::report::Report;
use crate::surgery::ConfigCn;

/// Largest set that `FilterMode::Auto` enumerates class by class.
pub const EXPLICIT_LIMIT: u128 = 1 << 16;

type FragmentCache = Mutex<HashMap<(i64, usize), Arc<IntLattice>>>;

fn fragment_lattice(x: i64, k: usize) -> Arc<IntLattice> {
    static CACHE: OnceLock<FragmentCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("fragment cache poisoned");
    Arc::clone(guard.entry((x, k)).or_insert_with(|| {
        let chain = (4 * x - 2) as usize;
        let rank = 2 + chain + k;
        let mut labels = vec!["f".to_string(), "S".to_string()];
        labels.extend((1..=chain).map(|i| format!("t{i}")));
        labels.extend((1..=k).map(|j| format!("E{j}")));
        let mut g = vec![vec![0i64; rank]; rank];
        g[0][1] = 1;
        g[1][0] = 1;
        g[1][1] = -x;
        for i in 0..chain {
            let a = 2 + i;
            g[a][a] = -2;
            let prev = if i == 0 { 1 } else { a - 1 };
            g[a][prev] = 1;
            g[prev][a] = 1;
        }
        for j in 0..k {
            let a = 2 + chain + j;
            g[a][a] = -1;
        }
        IntLattice::new(labels, g).expect("fragment Gram is symmetric")
    }))
}

/// The lattice fragment of `E(x) # k(-CP^2)`.
#[derive(Debug, Clone)]
pub struct SwFragment {
    x: i64,
    k: usize,
    lattice: Arc<IntLattice>,
}

impl SwFragment {
    pub fn new(x: i64, k: usize) -> Result<Self> {
        if x < 2 {
            return Err(Error::precondition(format!("E(x) needs x >= 2 (got x = {x})")));
        }
        Ok(SwFragment {
            x,
            k,
            lattice: fragment_lattice(x, k),
        })
    }

    pub fn x(&self) -> i64 {
        self.x
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lattice(&self) -> &Arc<IntLattice> {
        &self.lattice
    }

    pub fn f(&self) -> HomClass {
        self.lattice.generator("f").expect("f")
    }

    pub fn section(&self) -> HomClass {
        self.lattice.generator("S").expect("S")
    }

    /// `t_i`, `1 <= i <= 4x - 2`.
    pub fn t(&self, i: i64) -> Result<HomClass> {
        self.lattice.generator(&format!("t{i}"))
    }

    pub fn e(&self, j: usize) -> Result<HomClass> {
        self.lattice.generator(&format!("E{j}"))
    }

    pub fn chain_length(&self) -> i64 {
        4 * self.x - 2
    }
}

/// `m f + sum eps_j E_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BasicClass {
    pub m: i64,
    pub eps: Vec<i8>,
}

impl BasicClass {
    pub fn negate(&self) -> BasicClass {
        BasicClass {
            m: -self.m,
            eps: self.eps.iter().map(|e| -e).collect(),
        }
    }

    pub fn to_class(&self, fragment: &SwFragment) -> Result<HomClass> {
        if self.eps.len() != fragment.k {
            return Err(Error::DimensionMismatch {
                expected: fragment.k,
                got: self.eps.len(),
            });
        }
        let l = &fragment.lattice;
        let mut coeffs = vec![0i64; l.rank()];
        coeffs[0] = self.m;
        let base = 2 + fragment.chain_length() as usize;
        for (j, &e) in self.eps.iter().enumerate() {
            coeffs[base + j] = i64::from(e);
        }
        l.from_coeffs(coeffs)
    }
}

impl fmt::Display for BasicClass {
    /// `beta(m; e1, ..., ek)` with signs written as `+` or `-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "beta({}", self.m)?;
        if !self.eps.is_empty() {
            let signs: Vec<&str> = self.eps.iter().map(|&e| if e > 0 { "+" } else { "-" }).collect();
            write!(f, "; {}", signs.join(","))?;
        }
        write!(f, ")")
    }
}

/// A finite negation-closed set of basic classes. Either the full product
/// `{m f + sum eps_j E_j : m in ms, eps in {+-1}^k}` or an explicit list.
#[derive(Debug, Clone)]
pub struct BasicClassSet {
    fragment: SwFragment,
    manifold: String,
    ms: Vec<i64>,
    members: Option<Vec<BasicClass>>,
}

impl BasicClassSet {
    pub fn fragment(&self) -> &SwFragment {
        &self.fragment
    }

    pub fn manifold(&self) -> &str {
        &self.manifold
    }

    pub fn len(&self) -> u128 {
        match &self.members {
            Some(m) => m.len() as u128,
            None => (self.ms.len() as u128) << self.fragment.k,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All members in a fixed order: by `m`, then sign vectors counting down
    /// from all `+` to all `-`.
    pub fn iter(&self) -> Box<dyn Iterator<Item = BasicClass> + '_> {
        match &self.members {
            Some(m) => Box::new(m.iter().cloned()),
            None => {
                let k = self.fragment.k;
                Box::new(
                    self.ms
                        .iter()
                        .flat_map(move |&m| sign_vectors(k).map(move |eps| BasicClass { m, eps })),
                )
            }
        }
    }

    pub fn classes(&self) -> Result<Vec<HomClass>> {
        self.iter().map(|b| b.to_class(&self.fragment)).collect()
    }

    pub fn contains(&self, b: &BasicClass) -> bool {
        match &self.members {
            Some(m) => m.contains(b),
            None => b.eps.len() == self.fragment.k && self.ms.contains(&b.m),
        }
    }

    pub fn is_negation_closed(&self) -> bool {
        match &self.members {
            Some(m) => m.iter().all(|b| self.contains(&b.negate())),
            None => self.ms.iter().all(|m| self.ms.contains(&-m)),
        }
    }
}

/// All sign vectors of length `k`, counting in binary with `eps_1` as the
/// low bit and `-1` standing for a set bit.
fn sign_vectors(k: usize) -> impl Iterator<Item = Vec<i8>> {
    std::iter::successors(Some(vec![1i8; k]), move |v| {
        let mut v = v.clone();
        for j in 0..k {
            if v[j] == 1 {
                v[j] = -1;
                return Some(v);
            }
            v[j] = 1;
        }
        None
    })
}

/// `{m f : |m| <= x - 2, m = x mod 2}`, which has `x - 1` elements.
pub fn basic_classes_e(x: i64) -> Result<BasicClassSet> {
    let fragment = SwFragment::new(x, 0)?;
    let ms = (-(x - 2)..=(x - 2)).step_by(2).collect();
    Ok(BasicClassSet {
        fragment,
        manifold: format!("E({x})"),
        ms,
        members: None,
    })
}

/// Each blowup doubles the set: `b -> b + E` and `b - E`.
pub fn blowup_formula(base: &BasicClassSet, k: usize) -> Result<BasicClassSet> {
    let old_k = base.fragment.k;
    let fragment = SwFragment::new(base.fragment.x, old_k + k)?;
    let manifold = if k == 0 {
        base.manifold.clone()
    } else {
        format!("{} # {k}(-CP2)", base.manifold)
    };
    let members = match &base.members {
        None => None,
        Some(list) => {
            let mut out = Vec::with_capacity(list.len() << k);
            for b in list {
                for tail in sign_vectors(k) {
                    let mut eps = b.eps.clone();
                    eps.extend(tail);
                    out.push(BasicClass { m: b.m, eps });
                }
            }
            Some(out)
        }
    };
    Ok(BasicClassSet {
        fragment,
        manifold,
        ms: base.ms.clone(),
        members,
    })
}

/// `K = (x - 2) f + E_1 + ... + E_k`.
pub fn canonical_class_e_blowup(x: i64, k: usize) -> Result<HomClass> {
    let frag = SwFragment::new(x, k)?;
    let mut kc = frag.f().checked_scale(x - 2)?;
    for j in 1..=k {
        kc = kc.checked_add(&frag.e(j)?)?;
    }
    Ok(kc)
}

/// `S_0 = S + sum (f - 2E_j)`: each blowup at a point of `S` and a nearby
/// fiber, followed by resolving the double point, adds `f - 2E_j`.
pub fn lead_sphere_class(x: i64, k: usize) -> Result<HomClass> {
    let frag = SwFragment::new(x, k)?;
    let mut s = frag.section();
    let f = frag.f();
    for j in 1..=k {
        s = s.checked_add(&f)?.checked_sub(&frag.e(j)?.checked_scale(2)?)?;
    }
    Ok(s)
}

/// `C_{x+2k-2}` in `E(x) # k(-CP^2)`: the lead sphere followed by
/// `t_1 .. t_{x+2k-4}`. Needs `x + 2k - 4 <= 4x - 2` and `n >= 2`.
pub fn config_in_e_blowup(x: i64, k: usize) -> Result<ConfigCn> {
    let frag = SwFragment::new(x, k)?;
    let ki = k as i64;
    let tail = x + 2 * ki - 4;
    if tail > frag.chain_length() {
        return Err(Error::precondition(format!(
            "x + 2k - 4 <= 4x - 2 fails: {tail} > {} (k must be at most (3x+2)/2)",
            frag.chain_length()
        )));
    }
    if tail < 0 {
        return Err(Error::precondition(format!(
            "configuration too small: x + 2k - 2 = {} < 2",
            tail + 2
        )));
    }
    let mut spheres = vec![lead_sphere_class(x, k)?];
    for i in 1..=tail {
        spheres.push(frag.t(i)?);
    }
    ConfigCn::new(spheres)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// Explicit when the set has at most `EXPLICIT_LIMIT` members.
    Auto,
    /// Pair every class with every sphere.
    Explicit,
    /// Use that pairings are affine in the sign vector: hypotheses are checked
    /// on generators and survivors found by a search over reachable sums.
    Aggregate,
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub survivors: BasicClassSet,
    pub mode: FilterMode,
    /// Classes whose hypotheses were established.
    pub checked: u128,
    /// `max |beta . S_0|` over the set.
    pub max_pairing: i64,
}

/// The survivors of a rational blowdown of `config`: those with
/// `|beta . S_0| = n`, after checking that every class pairs to 0 with
/// `S_1 .. S_{n-2}` and has `|beta . S_0| <= n`.
pub fn taut_filter(basic: &BasicClassSet, config: &ConfigCn) -> Result<BasicClassSet> {
    taut_filter_with(basic, config, FilterMode::Auto).map(|o| o.survivors)
}

pub fn taut_filter_with(basic: &BasicClassSet, config: &ConfigCn, mode: FilterMode) -> Result<FilterOutcome> {
    let frag = &basic.fragment;
    if !IntLattice::same(frag.lattice(), config.lattice()) {
        return Err(Error::LatticeMismatch);
    }
    let mode = match mode {
        FilterMode::Auto if basic.len() <= EXPLICIT_LIMIT => FilterMode::Explicit,
        FilterMode::Auto => FilterMode::Aggregate,
        m => m,
    };
    let (members, max_pairing) = match mode {
        FilterMode::Explicit => filter_explicit(basic, config)?,
        _ => filter_aggregate(basic, config)?,
    };
    Ok(FilterOutcome {
        survivors: BasicClassSet {
            fragment: frag.clone(),
            manifold: format!("{} with C_{} blown down", basic.manifold, config.n()),
            ms: basic.ms.clone(),
            members: Some(members),
        },
        mode,
        checked: basic.len(),
        max_pairing,
    })
}

fn violation(b: &BasicClass, detail: String) -> Error {
    Error::HypothesisViolation {
        class: b.to_string(),
        detail,
    }
}

/// Pairings `(f . S, [E_j . S])` of the generators a basic class is built
/// from; `beta . S` is then `m (f . S) + sum eps_j (E_j . S)`.
fn generator_weights(frag: &SwFragment, s: &HomClass) -> Result<(i64, Vec<i64>)> {
    let es: Vec<i64> = (1..=frag.k).map(|j| frag.e(j)?.pair(s)).collect::<Result<_>>()?;
    Ok((frag.f().pair(s)?, es))
}

fn pair_with(b: &BasicClass, (wf, w): &(i64, Vec<i64>)) -> i64 {
    b.m * wf + b.eps.iter().zip(w).map(|(&e, &v)| i64::from(e) * v).sum::<i64>()
}

/// Largest set the explicit mode will walk.
const EXPLICIT_HARD_LIMIT: u128 = 1 << 24;

fn filter_explicit(basic: &BasicClassSet, config: &ConfigCn) -> Result<(Vec<BasicClass>, i64)> {
    if basic.len() > EXPLICIT_HARD_LIMIT {
        return Err(Error::precondition(format!(
            "explicit filtering of {} classes exceeds the limit of {EXPLICIT_HARD_LIMIT}; use the aggregate mode",
            basic.len()
        )));
    }
    let n = config.n();
    let weights: Vec<(i64, Vec<i64>)> = config
        .spheres()
        .iter()
        .map(|s| generator_weights(&basic.fragment, s))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut max = 0;
    for b in basic.iter() {
        for (i, w) in weights.iter().enumerate().skip(1) {
            let v = pair_with(&b, w);
            if v != 0 {
                return Err(violation(&b, format!("pairs to {v} with S_{i}, expected 0")));
            }
        }
        let lead = pair_with(&b, &weights[0]);
        if lead.abs() > n {
            return Err(violation(&b, format!("|beta . S_0| = {} > n = {n}", lead.abs())));
        }
        max = max.max(lead.abs());
        if lead.abs() == n {
            out.push(b);
        }
    }
    Ok((out, max))
}

fn filter_aggregate(basic: &BasicClassSet, config: &ConfigCn) -> Result<(Vec<BasicClass>, i64)> {
    if basic.members.is_some() {
        return filter_explicit(basic, config);
    }
    let frag = &basic.fragment;
    let n = config.n();
    let k = frag.k;
    let weights = |s: &HomClass| generator_weights(frag, s);
    let Some(&m_top) = basic.ms.iter().max_by_key(|m| m.abs()) else {
        return Ok((Vec::new(), 0));
    };

    // beta . S_i = m w_f + sum eps_j w_j; its largest magnitude over the set is
    // max |m w_f| + sum |w_j|, reached by aligning every sign.
    let extremal = |wf: i64, w: &[i64]| -> BasicClass {
        let lead = m_top * wf;
        let dir: i8 = if lead < 0 { -1 } else { 1 };
        BasicClass {
            m: m_top,
            eps: w.iter().map(|&v| if v < 0 { -dir } else { dir }).collect(),
        }
    };
    for (i, s) in config.spheres().iter().enumerate().skip(1) {
        let (wf, w) = weights(s)?;
        let reach = (m_top * wf).abs() + w.iter().map(|v| v.abs()).sum::<i64>();
        if reach != 0 {
            let b = extremal(wf, &w);
            return Err(violation(&b, format!("pairs to {reach} with S_{i}, expected 0")));
        }
    }
    let (wf, w) = weights(&config.spheres()[0])?;
    let max = (m_top * wf).abs() + w.iter().map(|v| v.abs()).sum::<i64>();
    if max > n {
        let b = extremal(wf, &w);
        return Err(violation(&b, format!("|beta . S_0| = {max} > n = {n}")));
    }

    // suffix[j] = sums reachable by eps_j .. eps_k.
    let mut suffix = vec![BTreeSet::from([0i64]); k + 1];
    for j in (0..k).rev() {
        suffix[j] = suffix[j + 1].iter().flat_map(|s| [s + w[j], s - w[j]]).collect();
    }
    let mut out = Vec::new();
    for &m in &basic.ms {
        for target in [n, -n] {
            let need = target - m * wf;
            let mut eps = Vec::with_capacity(k);
            collect(&w, &suffix, 0, need, &mut eps, m, &mut out);
            if n == 0 {
                break;
            }
        }
    }
    out.sort_by(basic_order);
    Ok((out, max))
}

fn collect(w: &[i64], suffix: &[BTreeSet<i64>], j: usize, need: i64, eps: &mut Vec<i8>, m: i64, out: &mut Vec<BasicClass>) {
    if !suffix[j].contains(&need) {
        return;
    }
    if j == w.len() {
        out.push(BasicClass { m, eps: eps.clone() });
        return;
    }
    for sign in [1i8, -1] {
        eps.push(sign);
        collect(w, suffix, j + 1, need - i64::from(sign) * w[j], eps, m, out);
        eps.pop();
    }
}

/// The enumeration order of a product set.
fn basic_order(a: &BasicClass, b: &BasicClass) -> std::cmp::Ordering {
    let key = |c: &BasicClass| {
        let bits: Vec<u8> = c.eps.iter().rev().map(|&e| u8::from(e < 0)).collect();
        (c.m, bits)
    };
    key(a).cmp(&key(b))
}

/// Checks `K . t_i = f . t_i = E_j . t_i = 0` for every `t_i` used by the
/// configuration, so every basic class pairs to 0 with them.
pub fn adjunction_zero_check(x: i64, k: usize) -> Result<Report> {
    let frag = SwFragment::new(x, k)?;
    let used = x + 2 * k as i64 - 4;
    if used > frag.chain_length() {
        return Err(Error::precondition(format!(
            "x + 2k - 4 <= 4x - 2 fails: {used} > {}",
            frag.chain_length()
        )));
    }
    let kc = canonical_class_e_blowup(x, k)?;
    let f = frag.f();
    let mut rep = Report::new(format!("K, f and E_j are orthogonal to t_1..t_{} in E({x}) # {k}(-CP2)", used.max(0)));
    for i in 1..=used {
        let t = frag.t(i)?;
        let mut vals = vec![("K", kc.pair(&t)?), ("f", f.pair(&t)?)];
        for j in 1..=k {
            vals.push(("E", frag.e(j)?.pair(&t)?));
        }
        let bad: Vec<String> = vals.iter().filter(|(_, v)| *v != 0).map(|(l, v)| format!("{l}.t{i} = {v}")).collect();
        rep.check(format!("t{i}"), bad.is_empty(), if bad.is_empty() { "all zero".into() } else { bad.join(", ") });
    }
    if used <= 0 {
        rep.check("vacuous", true, "no chain spheres are used");
    }
    rep.into_result()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_classes_of_elliptic_surfaces() {
        let ms = |x| basic_classes_e(x).unwrap().iter().map(|b| b.m).collect::<Vec<_>>();
        assert_eq!(ms(6), vec![-4, -2, 0, 2, 4]);
        assert_eq!(ms(2), vec![0]);
        assert_eq!(ms(3), vec![-1, 1]);
        assert!(basic_classes_e(1).is_err());
        for x in 2..10 {
            assert_eq!(basic_classes_e(x).unwrap().len(), (x - 1) as u128);
        }
    }

    #[test]
    fn blowups_double_the_set() {
        let b = blowup_formula(&basic_classes_e(3).unwrap(), 1).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.is_negation_closed());
        assert_eq!(blowup_formula(&basic_classes_e(4).unwrap(), 2).unwrap().len(), 12);
        let same = blowup_formula(&basic_classes_e(5).unwrap(), 0).unwrap();
        assert_eq!(same.len(), 4);
    }

    #[test]
    fn canonical_and_lead_sphere() {
        assert_eq!(canonical_class_e_blowup(4, 0).unwrap().to_string(), "2f");
        assert!(canonical_class_e_blowup(2, 0).unwrap().is_zero());
        assert_eq!(canonical_class_e_blowup(5, 3).unwrap().square().unwrap(), -3);
        for (x, k) in [(4, 0), (4, 1), (6, 3)] {
            assert_eq!(lead_sphere_class(x, k).unwrap().square().unwrap(), -(x + 2 * k as i64));
        }
        let frag = SwFragment::new(4, 2).unwrap();
        let b = BasicClass { m: 2, eps: vec![1, 1] }.to_class(&frag).unwrap();
        assert_eq!(b.pair(&lead_sphere_class(4, 2).unwrap()).unwrap(), 6);
    }

    #[test]
    fn configurations() {
        assert_eq!(config_in_e_blowup(6, 0).unwrap().n(), 4);
        let c = config_in_e_blowup(4, 2).unwrap();
        assert_eq!((c.n(), c.spheres()[0].square().unwrap()), (6, -8));
        assert!(config_in_e_blowup(4, 7).is_ok());
        let err = config_in_e_blowup(4, 8).unwrap_err();
        assert!(err.to_string().contains("x + 2k - 4 <= 4x - 2"));
        assert!(config_in_e_blowup(3, 0).is_err());
    }

    #[test]
    fn filter_on_elliptic_surface() {
        let basic = basic_classes_e(6).unwrap();
        let cfg = config_in_e_blowup(6, 0).unwrap();
        let out = taut_filter(&basic, &cfg).unwrap();
        let ms: Vec<i64> = out.iter().map(|b| b.m).collect();
        assert_eq!(ms, vec![-4, 4]);
        assert!(out.is_negation_closed());
    }

    #[test]
    fn modes_agree() {
        for x in 4..=7 {
            for k in 0..=6usize {
                let Ok(cfg) = config_in_e_blowup(x, k) else { continue };
                let basic = blowup_formula(&basic_classes_e(x).unwrap(), k).unwrap();
                let a = taut_filter_with(&basic, &cfg, FilterMode::Explicit).unwrap();
                let b = taut_filter_with(&basic, &cfg, FilterMode::Aggregate).unwrap();
                let la: Vec<_> = a.survivors.iter().collect();
                let lb: Vec<_> = b.survivors.iter().collect();
                assert_eq!(la, lb, "x = {x}, k = {k}");
                assert_eq!(a.max_pairing, b.max_pairing);
                assert_eq!(la.len(), 2);
            }
        }
    }

    #[test]
    fn hypothesis_violations_are_named() {
        // S - E1, E1 - E2 is a C_3 chain, but E1 - E2 pairs nontrivially with
        // classes whose two signs differ.
        let frag = SwFragment::new(4, 2).unwrap();
        let l = frag.lattice();
        let s0 = l.class(&[("S", 1), ("E1", -1)]).unwrap();
        let s1 = l.class(&[("E1", 1), ("E2", -1)]).unwrap();
        let cfg = ConfigCn::new(vec![s0, s1]).unwrap();
        let basic = blowup_formula(&basic_classes_e(4).unwrap(), 2).unwrap();
        for mode in [FilterMode::Explicit, FilterMode::Aggregate] {
            let err = taut_filter_with(&basic, &cfg, mode).unwrap_err();
            assert!(matches!(err, Error::HypothesisViolation { .. }), "{err}");
            assert!(err.to_string().contains("with S_1"), "{err}");
        }
    }

    #[test]
    fn adjunction_zero() {
        assert!(adjunction_zero_check(4, 1).unwrap().all_passed());
        assert!(adjunction_zero_check(2, 0).unwrap().all_passed());
        assert!(adjunction_zero_check(5, 3).is_ok());
        let frag = SwFragment::new(5, 3).unwrap();
        let basic = blowup_formula(&basic_classes_e(5).unwrap(), 3).unwrap();
        for c in basic.classes().unwrap() {
            for i in 1..=7 {
                assert_eq!(c.pair(&frag.t(i).unwrap()).unwrap(), 0);
            }
        }
    }
}
