//! Cut-and-paste operations at the level of ledgers: `C_n` configurations,
//! fiber sums along square-zero surfaces, rational blowdowns, and replayable
//! recipes.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, HomClass, IntLattice};
use crate::ledger::{make_ledger, EmbeddedSurface, LedgerFlags, ManifoldLedger};
use crate::surfaces;

/// A linear plumbing of spheres with squares `-(n+2), -2, ..., -2`, each
/// meeting the next once.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigCn {
    n: i64,
    spheres: Vec<HomClass>,
}

impl ConfigCn {
    pub fn new(spheres: Vec<HomClass>) -> Result<Self> {
        let n = verify_config(&spheres)?;
        Ok(ConfigCn { n, spheres })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn spheres(&self) -> &[HomClass] {
        &self.spheres
    }

    pub fn lattice(&self) -> &Arc<IntLattice> {
        self.spheres[0].lattice()
    }

    /// `det = n^2`, the order of `H_1` of the boundary lens space.
    pub fn determinant(&self) -> Result<i64> {
        let g = lattice::gram_of(&self.spheres)?;
        let l = IntLattice::new((0..g.len()).map(|i| format!("s{i}")).collect(), g)?;
        crate::linalg::to_i64(&l.determinant())
    }
}

/// Checks that `spheres` form a `C_n` chain and returns `n`.
pub fn verify_config(spheres: &[HomClass]) -> Result<i64> {
    let Some(first) = spheres.first() else {
        return Err(Error::InvalidConfig {
            first: 0,
            second: 0,
            reason: "empty configuration".into(),
        });
    };
    if let Some(i) = spheres.iter().position(|s| !s.same_lattice(first)) {
        return Err(Error::InvalidConfig {
            first: 0,
            second: i,
            reason: "spheres live in different lattices".into(),
        });
    }
    let n = spheres.len() as i64 + 1;
    for (i, s) in spheres.iter().enumerate() {
        let want = if i == 0 { -(n + 2) } else { -2 };
        let got = s.square()?;
        if got != want {
            return Err(Error::InvalidConfig {
                first: i,
                second: i,
                reason: format!("square is {got}, expected {want}"),
            });
        }
        for (j, t) in spheres.iter().enumerate().skip(i + 1) {
            let want = i64::from(j == i + 1);
            let got = s.pair(t)?;
            if got != want {
                return Err(Error::InvalidConfig {
                    first: i,
                    second: j,
                    reason: format!("intersection is {got}, expected {want}"),
                });
            }
        }
    }
    Ok(n)
}

/// Every `C_n` chain that can be drawn from `pool`, in lexicographic order of
/// pool indices; a chain and its reversal are reported once.
pub fn find_configs(pool: &[HomClass], n: i64) -> Result<Vec<ConfigCn>> {
    if n < 2 {
        return Err(Error::precondition(format!("C_n needs n >= 2 (got n = {n})")));
    }
    let len = (n - 1) as usize;
    let squares = pool.iter().map(HomClass::square).collect::<Result<Vec<_>>>()?;
    let mut pairs = vec![vec![0i64; pool.len()]; pool.len()];
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let v = pool[i].pair(&pool[j])?;
            pairs[i][j] = v;
            pairs[j][i] = v;
        }
    }

    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut path = Vec::with_capacity(len);

    fn extend(
        path: &mut Vec<usize>,
        len: usize,
        squares: &[i64],
        pairs: &[Vec<i64>],
        found: &mut Vec<Vec<usize>>,
        seen: &mut HashSet<Vec<usize>>,
    ) {
        if path.len() == len {
            let mut rev = path.clone();
            rev.reverse();
            if !seen.contains(&rev) {
                seen.insert(path.clone());
                found.push(path.clone());
            }
            return;
        }
        let last = *path.last().expect("path starts with the lead sphere");
        for c in 0..squares.len() {
            if squares[c] != -2 || path.contains(&c) || pairs[last][c] != 1 {
                continue;
            }
            if path[..path.len() - 1].iter().any(|&p| pairs[p][c] != 0) {
                continue;
            }
            path.push(c);
            extend(path, len, squares, pairs, found, seen);
            path.pop();
        }
    }

    for start in 0..pool.len() {
        if squares[start] != -(n + 2) {
            continue;
        }
        path.push(start);
        extend(&mut path, len, &squares, &pairs, &mut found, &mut seen);
        path.pop();
    }
    found
        .into_iter()
        .map(|idx| ConfigCn::new(idx.into_iter().map(|i| pool[i].clone()).collect()))
        .collect()
}

/// Fiber sum of `a` and `b` along square-zero surfaces of the same genus `g`:
/// `e = e_a + e_b + 4g - 4` and the signatures add. The result is simply
/// connected when the caller certifies both complements are; otherwise the
/// flag is unknown.
pub fn fiber_sum(
    a: &ManifoldLedger,
    sa: &EmbeddedSurface,
    b: &ManifoldLedger,
    sb: &EmbeddedSurface,
    complements_simply_connected: bool,
) -> Result<ManifoldLedger> {
    for (m, s) in [(a, sa), (b, sb)] {
        if s.self_int != 0 {
            return Err(Error::precondition(format!(
                "{} in {} has square {}, fiber sums need square 0",
                s.label,
                m.name(),
                s.self_int
            )));
        }
    }
    if sa.genus != sb.genus {
        return Err(Error::precondition(format!(
            "genus mismatch: {} has genus {}, {} has genus {}",
            sa.label, sa.genus, sb.label, sb.genus
        )));
    }
    let g = sa.genus;
    let e = a
        .e()
        .checked_add(b.e())
        .and_then(|s| s.checked_add(4 * g - 4))
        .ok_or(Error::Overflow)?;
    let sign = a.sign().checked_add(b.sign()).ok_or(Error::Overflow)?;
    let simply_connected = complements_simply_connected.then_some(true);
    let symplectic = a.symplectic() && b.symplectic() && sa.symplectic && sb.symplectic;
    let name = format!("{} #_{} {}", a.name(), sa.label, b.name());
    let out = make_ledger(
        name,
        e,
        sign,
        LedgerFlags {
            simply_connected,
            symplectic,
        },
    )?;
    let glued = EmbeddedSurface::formal("Sigma", g, 0, symplectic)?;
    let out = out
        .with_surface(glued)?
        .with_note(format!("fiber_sum along genus {g}: {} and {}", a.name(), b.name()));
    out.check_identities()?;
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct BlowdownOptions<'a> {
    /// Whether the configuration spheres are symplectic.
    pub spheres_symplectic: bool,
    /// A class meeting some configuration sphere once, certifying that the
    /// boundary loop dies in the complement.
    pub dual: Option<&'a HomClass>,
}

/// Replaces a `C_n` configuration by the rational ball `B_n`:
/// `e - (n-1)`, `sign + (n-1)`.
///
/// If the configuration lives in the ledger's lattice, the new lattice is its
/// orthogonal complement (a full-rank sublattice of `H_2` of the result) and
/// surfaces disjoint from the configuration are carried over; the canonical
/// class is dropped. A configuration from any other lattice only affects the
/// numbers.
pub fn rational_blowdown(m: &ManifoldLedger, config: &ConfigCn, opts: BlowdownOptions<'_>) -> Result<ManifoldLedger> {
    let shift = config.n() - 1;
    if m.b_minus() < shift {
        return Err(Error::precondition(format!(
            "{} has b- = {} < n - 1 = {shift}",
            m.name(),
            m.b_minus()
        )));
    }
    let certified = match opts.dual {
        Some(d) => {
            let hits = config
                .spheres()
                .iter()
                .filter(|s| s.same_lattice(d))
                .map(|s| s.pair(d))
                .collect::<Result<Vec<_>>>()?;
            if !hits.iter().any(|v| v.abs() == 1) {
                return Err(Error::precondition(format!(
                    "dual class {d} does not meet any configuration sphere once"
                )));
            }
            true
        }
        None => false,
    };
    let simply_connected = match m.simply_connected() {
        Some(true) if certified => Some(true),
        _ => None,
    };
    let symplectic = m.symplectic() && opts.spheres_symplectic;

    let mut out = m
        .replace_numbers(m.e() - shift, m.sign() + shift)?
        .with_flags(simply_connected, symplectic)
        .renamed(format!("{} (C_{} blown down)", m.name(), config.n()));

    let in_lattice = m
        .lattice()
        .is_some_and(|l| Arc::ptr_eq(l, config.lattice()) || **l == **config.lattice());
    if in_lattice {
        let lat = m.lattice().expect("checked above");
        let basis = lattice::orthogonal_complement(lat, config.spheres())?;
        let labels: Vec<String> = (1..=basis.len()).map(|i| format!("c{i}")).collect();
        let comp = IntLattice::spanned_by(&basis, Some(labels))?;
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for s in m.surfaces() {
            match &s.cls {
                Some(c) => {
                    let disjoint = config.spheres().iter().map(|x| x.pair(c)).collect::<Result<Vec<_>>>()?;
                    if disjoint.iter().any(|&v| v != 0) {
                        dropped.push(s.label.clone());
                        continue;
                    }
                    let coords = lattice::express_in_basis(c, &basis)?;
                    let integral = coords
                        .to_integral()
                        .ok_or_else(|| Error::consistency(format!("{} is not integral in the complement", s.label)))?;
                    let mut s = s.clone();
                    s.cls = Some(comp.from_coeffs(integral.coeffs().to_vec())?);
                    kept.push(s);
                }
                None => kept.push(s.clone()),
            }
        }
        out = out.replace_lattice(Some(comp), None, kept);
        if !dropped.is_empty() {
            out = out.with_note(format!("surfaces meeting the configuration dropped: {}", dropped.join(", ")));
        }
    } else {
        let formal: Vec<EmbeddedSurface> = m.surfaces().iter().filter(|s| s.cls.is_none()).cloned().collect();
        out = out.replace_lattice(None, None, formal);
    }
    let out = out.with_note(format!(
        "rational_blowdown C_{}: e - {shift}, sign + {shift}",
        config.n()
    ));
    out.check_identities()?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    R,
    S,
}

/// A sphere in one summand of a fiber sum, punctured where it meets the
/// gluing surface.
#[derive(Debug, Clone)]
pub struct SpherePiece {
    pub surface: EmbeddedSurface,
    pub side: Side,
    pub punctures: i64,
}

impl SpherePiece {
    /// Puncture count is the intersection with `sigma`, which must be
    /// nonnegative (positive intersections only).
    pub fn from_class(label: impl Into<String>, cls: &HomClass, sigma: &HomClass, side: Side) -> Result<Self> {
        let punctures = cls.pair(sigma)?;
        if punctures < 0 {
            return Err(Error::precondition("sphere meets the gluing surface negatively"));
        }
        Ok(SpherePiece {
            surface: EmbeddedSurface::from_class(label, cls.clone(), 0, true)?,
            side,
            punctures,
        })
    }
}

/// Glues punctured spheres from the two sides of a fiber sum into one sphere
/// whose square is the sum of the pieces' squares. Both sides must have the
/// same number of punctures.
pub fn assemble_minus4_sphere(label: impl Into<String>, pieces: &[SpherePiece]) -> Result<EmbeddedSurface> {
    if pieces.is_empty() {
        return Err(Error::precondition("no pieces to assemble"));
    }
    if let Some(p) = pieces.iter().find(|p| p.surface.genus != 0) {
        return Err(Error::precondition(format!("{} is not a sphere", p.surface.label)));
    }
    let holes = |side| pieces.iter().filter(|p| p.side == side).map(|p| p.punctures).sum::<i64>();
    let (r, s) = (holes(Side::R), holes(Side::S));
    if r != s {
        return Err(Error::precondition(format!(
            "puncture mismatch: {r} on the R side, {s} on the S side"
        )));
    }
    let self_int = pieces.iter().map(|p| p.surface.self_int).sum();
    let symplectic = pieces.iter().all(|p| p.surface.symplectic);
    EmbeddedSurface::formal(label, 0, self_int, symplectic)
}

/// The disjoint `-4` spheres of `R(q) #_Sigma S(p)` (or `S'(p)` when `odd`)
/// with `q = 2p - 3` (resp. `2p - 4`). Sphere `k` is `B_k` from the S side,
/// the line `C` through it, and on the R side the line `A` plus `E_{2k-1}`
/// and `E_{2k}`; four punctures per side.
pub fn minus4_inventory(p: i64, odd: bool) -> Result<Vec<EmbeddedSurface>> {
    let (r, s) = if odd {
        (surfaces::build_r(2 * p - 4)?, surfaces::build_s_prime(p)?)
    } else {
        (surfaces::build_r(2 * p - 3)?, surfaces::build_s(p)?)
    };
    let sig_r = r.sigma_class().clone();
    let sig_s = s.sigma_class().clone();
    let a = r.auxiliary("A").and_then(|x| x.cls.clone()).expect("A is registered");
    let c = s.auxiliary("C").and_then(|x| x.cls.clone()).expect("C is registered");
    let bs: Vec<HomClass> = s
        .auxiliary
        .iter()
        .filter(|x| x.label.starts_with('B'))
        .map(|x| x.cls.clone().expect("B_k has a class"))
        .collect();
    // R(q) has 4q - 4 exceptional classes E_i besides E.
    let count = std::cmp::min(bs.len() as i64, (r.ledger.b_minus() - 1) / 2);

    // The B_k are pairwise disjoint and miss C; the E_i are disjoint and miss A.
    for (i, bi) in bs.iter().enumerate() {
        if bi.pair(&c)? != 0 || bs.iter().skip(i + 1).any(|bj| bi.pair(bj) != Ok(0)) {
            return Err(Error::consistency("S-side spheres are not disjoint"));
        }
    }

    let mut out = Vec::with_capacity(count as usize);
    for k in 1..=count {
        let e1 = r.generator(&format!("E{}", 2 * k - 1));
        let e2 = r.generator(&format!("E{}", 2 * k));
        if e1.pair(&a)? != 0 || e2.pair(&a)? != 0 {
            return Err(Error::consistency("R-side spheres are not disjoint"));
        }
        let pieces = [
            SpherePiece::from_class(format!("B{k}"), &bs[(k - 1) as usize], &sig_s, Side::S)?,
            SpherePiece::from_class("C", &c, &sig_s, Side::S)?,
            SpherePiece::from_class("A", &a, &sig_r, Side::R)?,
            SpherePiece::from_class(format!("E{}", 2 * k - 1), &e1, &sig_r, Side::R)?,
            SpherePiece::from_class(format!("E{}", 2 * k), &e2, &sig_r, Side::R)?,
        ];
        let sphere = assemble_minus4_sphere(format!("Q{k}"), &pieces)?;
        if sphere.self_int != -4 {
            return Err(Error::consistency(format!("Q{k} has square {}", sphere.self_int)));
        }
        out.push(sphere);
    }
    Ok(out)
}

/// One step of a surgery recipe, tracked at the level of `(e, sign)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SurgeryStep {
    Start { manifold: String, e: i64, sign: i64 },
    BlowUp { count: i64 },
    BlowDown { class: String },
    FiberSum { partner: String, partner_e: i64, partner_sign: i64, genus: i64 },
    RationalBlowdown { n: i64, config: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SurgeryRecipe {
    pub steps: Vec<SurgeryStep>,
}

impl SurgeryRecipe {
    pub fn new(start: &ManifoldLedger) -> Self {
        SurgeryRecipe {
            steps: vec![SurgeryStep::Start {
                manifold: start.name().to_string(),
                e: start.e(),
                sign: start.sign(),
            }],
        }
    }

    pub fn then(mut self, step: SurgeryStep) -> Self {
        self.steps.push(step);
        self
    }

    /// Re-executes every step on `(e, sign)` alone, checking that each
    /// intermediate pair is a valid ledger.
    pub fn replay(&self) -> Result<ManifoldLedger> {
        let mut iter = self.steps.iter();
        let Some(SurgeryStep::Start { manifold, e, sign }) = iter.next() else {
            return Err(Error::precondition("a recipe must begin with a start step"));
        };
        let mut m = make_ledger(manifold.clone(), *e, *sign, LedgerFlags::default())?;
        for step in iter {
            let (e, sign) = (m.e(), m.sign());
            m = match step {
                SurgeryStep::Start { .. } => return Err(Error::precondition("start step in the middle of a recipe")),
                SurgeryStep::BlowUp { count } => m.replace_numbers(e + count, sign - count)?,
                SurgeryStep::BlowDown { .. } => m.replace_numbers(e - 1, sign + 1)?,
                SurgeryStep::FiberSum {
                    partner_e,
                    partner_sign,
                    genus,
                    ..
                } => m.replace_numbers(e + partner_e + 4 * genus - 4, sign + partner_sign)?,
                SurgeryStep::RationalBlowdown { n, .. } => m.replace_numbers(e - (n - 1), sign + (n - 1))?,
            };
            m.check_identities()?;
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(k: usize) -> Arc<IntLattice> {
        IntLattice::blown_up_plane(k)
    }

    #[test]
    fn c2_and_c3_configs() {
        let l = plane(6);
        let s0 = l.class(&[("H", 1), ("E1", -1), ("E2", -1), ("E3", -1), ("E4", -1), ("E5", -1)]).unwrap();
        let cfg = ConfigCn::new(vec![s0.clone()]).unwrap();
        assert_eq!(cfg.n(), 2);
        assert_eq!(cfg.determinant().unwrap(), -4);

        // With a second sphere the lead must square to -5.
        let s1 = l.class(&[("E5", 1), ("E6", -1)]).unwrap();
        let err = verify_config(&[s0, s1]).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { first: 0, second: 0, .. }));
    }

    #[test]
    fn config_intersection_errors_name_the_pair() {
        let l = plane(8);
        let s0 = l.class(&[("H", 1), ("E1", -1), ("E2", -1), ("E3", -1), ("E4", -1), ("E5", -1), ("E6", -1)]).unwrap();
        let s1 = l.class(&[("E6", 1), ("E7", -1)]).unwrap();
        assert_eq!(verify_config(&[s0.clone(), s1.clone()]).unwrap(), 3);
        let bad = l.class(&[("E7", 1), ("E8", -1)]).unwrap();
        match verify_config(&[s0, bad]).unwrap_err() {
            Error::InvalidConfig { first, second, .. } => assert_eq!((first, second), (0, 1)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn find_configs_suppresses_reversals() {
        let l = plane(4);
        let a = l.class(&[("E1", 1), ("E2", -1)]).unwrap();
        let b = l.class(&[("E2", 1), ("E3", -1)]).unwrap();
        let lead = l.class(&[("H", 1), ("E1", -1), ("E2", -1), ("E3", -1), ("E4", -1)]).unwrap();
        assert_eq!(lead.square().unwrap(), -3);
        // -(n+2) = -4 needs n = 2 and a square -4 lead; here n = 1 is rejected.
        assert!(find_configs(&[a.clone(), b.clone()], 1).is_err());
        let two = find_configs(&[a.clone(), b.clone(), lead], 2).unwrap();
        assert!(two.is_empty());
    }

    #[test]
    fn fiber_sum_of_two_r_surfaces_is_elliptic() {
        let r = surfaces::build_r(4).unwrap();
        let m = fiber_sum(&r.ledger, &r.sigma, &r.ledger, &r.sigma, true).unwrap();
        assert_eq!((m.e(), m.sign(), m.simply_connected()), (36, -24, Some(true)));
        let m = fiber_sum(&r.ledger, &r.sigma, &r.ledger, &r.sigma, false).unwrap();
        assert_eq!(m.simply_connected(), None);
        let s = surfaces::build_s(4).unwrap();
        assert!(fiber_sum(&r.ledger, &r.sigma, &s.ledger, &s.sigma, true).is_err());
    }

    #[test]
    fn rational_blowdown_in_lattice() {
        let r = surfaces::build_r(5).unwrap();
        let l = r.lattice();
        let s0 = l.class(&[("H", 1), ("E1", -1), ("E2", -1), ("E3", -1), ("E4", -1), ("E5", -1)]).unwrap();
        let cfg = ConfigCn::new(vec![s0]).unwrap();
        let e6 = l.generator("E6").unwrap();
        assert!(rational_blowdown(
            &r.ledger,
            &cfg,
            BlowdownOptions {
                spheres_symplectic: true,
                dual: Some(&e6)
            }
        )
        .is_err());
        let e1 = l.generator("E1").unwrap();
        let out = rational_blowdown(
            &r.ledger,
            &cfg,
            BlowdownOptions {
                spheres_symplectic: true,
                dual: Some(&e1),
            },
        )
        .unwrap();
        assert_eq!((out.e(), out.sign(), out.c1sq()), (r.ledger.e() - 1, r.ledger.sign() + 1, r.ledger.c1sq() + 1));
        assert_eq!(out.simply_connected(), Some(true));
        assert_eq!(out.lattice().unwrap().rank(), l.rank() - 1);
        assert!(out.canonical().is_none());
        // Sigma_R.S0 = 5 - 5 = 0, so the surface survives.
        assert!(out.surface("Sigma_R").is_some());
        let bare = rational_blowdown(&r.ledger, &cfg, BlowdownOptions::default()).unwrap();
        assert_eq!(bare.simply_connected(), None);
        assert!(!bare.symplectic());
    }

    #[test]
    fn minus4_spheres() {
        let q = minus4_inventory(4, false).unwrap();
        assert_eq!(q.len(), 7);
        assert!(q.iter().all(|s| s.self_int == -4 && s.genus == 0));
        assert_eq!(minus4_inventory(5, true).unwrap().len(), 8);
    }

    #[test]
    fn assembly_rejects_mismatched_punctures() {
        let l = plane(2);
        let sig = l.class(&[("H", 2), ("E1", -1), ("E2", -1)]).unwrap();
        let e1 = l.generator("E1").unwrap();
        let piece = SpherePiece::from_class("E1", &e1, &sig, Side::R).unwrap();
        let err = assemble_minus4_sphere("Q", &[piece]).unwrap_err();
        assert!(err.to_string().contains("puncture mismatch"));
    }

    #[test]
    fn recipe_replay() {
        let start = make_ledger("E(4)", 48, -32, LedgerFlags::default()).unwrap();
        let recipe = SurgeryRecipe::new(&start)
            .then(SurgeryStep::BlowUp { count: 3 })
            .then(SurgeryStep::RationalBlowdown {
                n: 6,
                config: "C_6".into(),
            });
        let m = recipe.replay().unwrap();
        assert_eq!((m.e(), m.sign()), (46, -30));
        let json = serde_json::to_string(&recipe).unwrap();
        assert!(json.contains("\"op\":\"rational_blowdown\""));
        let back: SurgeryRecipe = serde_json::from_str(&json).unwrap();
        assert_eq!(back, recipe);
    }
}
