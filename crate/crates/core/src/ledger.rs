//! Invariant records for simply connected 4-manifolds.
//!
//! A [`ManifoldLedger`] carries `e`, `sign`, `b±`, `chi_h` and `c1^2`, which are
//! tied together by
//!
//! ```text
//! e = 2 + b+ + b-     sign = b+ - b-     chi_h = (e + sign) / 4     c1^2 = 2e + 3 sign
//! ```
//!
//! and optionally an intersection lattice with canonical class and a list of
//! tracked surfaces. Ledgers are never mutated; every operation returns a new
//! one with an extra provenance entry.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, HomClass, IntLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Sphere,
    HigherGenus,
}

impl SurfaceKind {
    pub fn for_genus(genus: i64) -> Self {
        if genus == 0 {
            SurfaceKind::Sphere
        } else {
            SurfaceKind::HigherGenus
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSurface {
    pub label: String,
    pub cls: Option<HomClass>,
    pub genus: i64,
    pub self_int: i64,
    pub symplectic: bool,
    pub kind: SurfaceKind,
    /// Whether the complement of the surface is known to be simply connected.
    pub complement_simply_connected: Option<bool>,
}

impl EmbeddedSurface {
    pub fn from_class(label: impl Into<String>, cls: HomClass, genus: i64, symplectic: bool) -> Result<Self> {
        if genus < 0 {
            return Err(Error::precondition("genus must be nonnegative"));
        }
        let self_int = cls.square()?;
        Ok(EmbeddedSurface {
            label: label.into(),
            cls: Some(cls),
            genus,
            self_int,
            symplectic,
            kind: SurfaceKind::for_genus(genus),
            complement_simply_connected: None,
        })
    }

    /// A surface known only by its genus and self-intersection.
    pub fn formal(label: impl Into<String>, genus: i64, self_int: i64, symplectic: bool) -> Result<Self> {
        if genus < 0 {
            return Err(Error::precondition("genus must be nonnegative"));
        }
        Ok(EmbeddedSurface {
            label: label.into(),
            cls: None,
            genus,
            self_int,
            symplectic,
            kind: SurfaceKind::for_genus(genus),
            complement_simply_connected: None,
        })
    }

    pub fn with_complement_simply_connected(mut self, flag: bool) -> Self {
        self.complement_simply_connected = Some(flag);
        self
    }

    /// Checks `kind`, `self_int` against the class, and adjunction against
    /// `canonical` when the surface is symplectic and both live in one lattice.
    pub fn validate(&self, canonical: Option<&HomClass>) -> Result<()> {
        if self.kind != SurfaceKind::for_genus(self.genus) {
            return Err(Error::consistency(format!("{}: kind does not match genus", self.label)));
        }
        if let Some(cls) = &self.cls {
            if cls.square()? != self.self_int {
                return Err(Error::consistency(format!(
                    "{}: self_int {} but class squares to {}",
                    self.label,
                    self.self_int,
                    cls.square()?
                )));
            }
            if let Some(k) = canonical.filter(|k| self.symplectic && k.same_lattice(cls)) {
                let g = adjunction_genus(cls, k)?;
                if g != self.genus {
                    return Err(Error::consistency(format!(
                        "{}: stored genus {} but adjunction gives {g}",
                        self.label, self.genus
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LedgerFlags {
    pub simply_connected: Option<bool>,
    pub symplectic: bool,
}

impl LedgerFlags {
    pub fn symplectic_simply_connected() -> Self {
        LedgerFlags {
            simply_connected: Some(true),
            symplectic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldLedger {
    name: String,
    e: i64,
    sign: i64,
    b_plus: i64,
    b_minus: i64,
    chi_h: i64,
    c1sq: i64,
    simply_connected: Option<bool>,
    symplectic: bool,
    lattice: Option<Arc<IntLattice>>,
    canonical: Option<HomClass>,
    surfaces: Vec<EmbeddedSurface>,
    provenance: Vec<String>,
}

/// Builds a ledger from Euler characteristic and signature.
pub fn make_ledger(name: impl Into<String>, e: i64, sign: i64, flags: LedgerFlags) -> Result<ManifoldLedger> {
    let name = name.into();
    if (e + sign).rem_euclid(4) != 0 {
        return Err(Error::precondition(format!(
            "e + sign = {} is not divisible by 4",
            e + sign
        )));
    }
    let b_plus = (e + sign) / 2 - 1;
    let b_minus = e - 2 - b_plus;
    if b_plus < 0 || b_minus < 0 {
        return Err(Error::precondition(format!(
            "negative Betti number (b+ = {b_plus}, b- = {b_minus})"
        )));
    }
    Ok(ManifoldLedger {
        provenance: vec![format!("make_ledger {name}: e={e}, sign={sign}")],
        name,
        e,
        sign,
        b_plus,
        b_minus,
        chi_h: (e + sign) / 4,
        c1sq: 2 * e + 3 * sign,
        simply_connected: flags.simply_connected,
        symplectic: flags.symplectic,
        lattice: None,
        canonical: None,
        surfaces: Vec::new(),
    })
}

/// Genus forced by adjunction: `2g - 2 = S.S + K.S`.
pub fn adjunction_genus(cls: &HomClass, canonical: &HomClass) -> Result<i64> {
    let s = cls.square()? + canonical.pair(cls)?;
    if s.rem_euclid(2) != 0 {
        return Err(Error::precondition(format!(
            "S.S + K.S = {s} is odd; {cls} is not representable by a smooth surface"
        )));
    }
    if s < -2 {
        return Err(Error::precondition(format!(
            "S.S + K.S = {s} < -2 gives negative genus for {cls}"
        )));
    }
    Ok(1 + s / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoetherPosition {
    pub on_half_noether: bool,
    pub on_noether: bool,
    pub below_noether: bool,
    pub in_realized_region: bool,
}

/// Where `(chi_h, c1^2) = (x, c)` sits relative to the half-Noether line
/// `c = x - 3`, the Noether line `c = 2x - 6` and the line `2c = 5x - 4`.
pub fn noether_position(x: i64, c: i64) -> NoetherPosition {
    let lower = x - 3 > 0 && c >= x - 3;
    NoetherPosition {
        on_half_noether: c == x - 3,
        on_noether: c == 2 * x - 6,
        below_noether: lower && c <= 2 * x - 6,
        in_realized_region: lower && 2 * c <= 5 * x - 4,
    }
}

impl ManifoldLedger {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn e(&self) -> i64 {
        self.e
    }
    pub fn sign(&self) -> i64 {
        self.sign
    }
    pub fn b_plus(&self) -> i64 {
        self.b_plus
    }
    pub fn b_minus(&self) -> i64 {
        self.b_minus
    }
    pub fn chi_h(&self) -> i64 {
        self.chi_h
    }
    pub fn c1sq(&self) -> i64 {
        self.c1sq
    }
    pub fn simply_connected(&self) -> Option<bool> {
        self.simply_connected
    }
    pub fn symplectic(&self) -> bool {
        self.symplectic
    }
    pub fn lattice(&self) -> Option<&Arc<IntLattice>> {
        self.lattice.as_ref()
    }
    pub fn canonical(&self) -> Option<&HomClass> {
        self.canonical.as_ref()
    }
    pub fn surfaces(&self) -> &[EmbeddedSurface] {
        &self.surfaces
    }
    pub fn surface(&self, label: &str) -> Option<&EmbeddedSurface> {
        self.surfaces.iter().find(|s| s.label == label)
    }
    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn noether_position(&self) -> NoetherPosition {
        noether_position(self.chi_h, self.c1sq)
    }

    /// The numeric part only: `(e, sign, b+, b-, chi_h, c1^2)`.
    pub fn invariants(&self) -> (i64, i64, i64, i64, i64, i64) {
        (self.e, self.sign, self.b_plus, self.b_minus, self.chi_h, self.c1sq)
    }

    /// Same invariants and flags, ignoring name, provenance and tracked data.
    pub fn same_invariants(&self, other: &ManifoldLedger) -> bool {
        self.invariants() == other.invariants()
            && self.simply_connected == other.simply_connected
            && self.symplectic == other.symplectic
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        let mut out = self.clone();
        out.name = name.into();
        out
    }

    pub fn with_note(&self, note: impl Into<String>) -> Self {
        let mut out = self.clone();
        out.provenance.push(note.into());
        out
    }

    pub(crate) fn with_flags(&self, simply_connected: Option<bool>, symplectic: bool) -> Self {
        let mut out = self.clone();
        out.simply_connected = simply_connected;
        out.symplectic = symplectic;
        out
    }

    /// Verifies every identity between the stored numbers, plus the lattice,
    /// canonical class and surface invariants when present.
    pub fn check_identities(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::consistency(format!("{}: {what}", self.name)));
        if self.e != 2 + self.b_plus + self.b_minus {
            return fail("e != 2 + b+ + b-");
        }
        if self.sign != self.b_plus - self.b_minus {
            return fail("sign != b+ - b-");
        }
        if (self.e + self.sign).rem_euclid(4) != 0 || self.chi_h * 4 != self.e + self.sign {
            return fail("chi_h != (e + sign)/4");
        }
        if self.c1sq != 2 * self.e + 3 * self.sign {
            return fail("c1^2 != 2e + 3 sign");
        }
        if self.b_plus < 0 || self.b_minus < 0 {
            return fail("negative Betti number");
        }
        if let Some(l) = &self.lattice {
            if l.rank() as i64 != self.b_plus + self.b_minus {
                return fail("lattice rank != b+ + b-");
            }
        }
        if let Some(k) = &self.canonical {
            if self.lattice.as_ref().is_some_and(|l| !Arc::ptr_eq(l, k.lattice()) && **l != **k.lattice()) {
                return fail("canonical class is not in the ledger lattice");
            }
            if k.square()? != self.c1sq {
                return fail("K.K != c1^2");
            }
        }
        for s in &self.surfaces {
            s.validate(self.canonical.as_ref())?;
        }
        Ok(())
    }

    /// Attaches an intersection lattice and canonical class. The canonical
    /// class must square to `c1^2` and be characteristic.
    pub fn with_lattice(&self, lattice: Arc<IntLattice>, canonical: HomClass) -> Result<Self> {
        if !canonical.lattice().as_ref().eq(lattice.as_ref()) {
            return Err(Error::LatticeMismatch);
        }
        for g in lattice.generators() {
            let (kx, xx) = (canonical.pair(&g)?, g.square()?);
            if (kx - xx).rem_euclid(2) != 0 {
                return Err(Error::precondition(format!(
                    "canonical class {canonical} is not characteristic"
                )));
            }
        }
        let (pos, neg, zero) = lattice.inertia();
        if (pos as i64, neg as i64, zero) != (self.b_plus, self.b_minus, 0) {
            return Err(Error::precondition(format!(
                "lattice inertia ({pos}, {neg}, {zero}) does not match (b+, b-) = ({}, {})",
                self.b_plus, self.b_minus
            )));
        }
        let mut out = self.clone();
        out.lattice = Some(lattice);
        out.canonical = Some(canonical);
        out.check_identities()?;
        Ok(out)
    }

    pub fn with_surface(&self, surface: EmbeddedSurface) -> Result<Self> {
        if let (Some(l), Some(cls)) = (&self.lattice, &surface.cls) {
            if !(Arc::ptr_eq(l, cls.lattice()) || **l == **cls.lattice()) {
                return Err(Error::LatticeMismatch);
            }
        }
        if self.surface(&surface.label).is_some() {
            return Err(Error::precondition(format!(
                "surface label {:?} already tracked",
                surface.label
            )));
        }
        surface.validate(self.canonical.as_ref())?;
        let mut out = self.clone();
        out.surfaces.push(surface);
        Ok(out)
    }

    pub(crate) fn replace_numbers(&self, e: i64, sign: i64) -> Result<Self> {
        let fresh = make_ledger(self.name.clone(), e, sign, LedgerFlags::default())?;
        let mut out = self.clone();
        out.e = fresh.e;
        out.sign = fresh.sign;
        out.b_plus = fresh.b_plus;
        out.b_minus = fresh.b_minus;
        out.chi_h = fresh.chi_h;
        out.c1sq = fresh.c1sq;
        Ok(out)
    }

    pub(crate) fn replace_lattice(
        &self,
        lattice: Option<Arc<IntLattice>>,
        canonical: Option<HomClass>,
        surfaces: Vec<EmbeddedSurface>,
    ) -> Self {
        let mut out = self.clone();
        out.lattice = lattice;
        out.canonical = canonical;
        out.surfaces = surfaces;
        out
    }

    /// Connected sum with one copy of `-CP^2`. With a lattice, the new
    /// generator gets the next free label `E{k}` and `K' = K + E{k}`.
    pub fn blow_up(&self) -> Result<Self> {
        let mut out = self.replace_numbers(self.e + 1, self.sign - 1)?;
        match (&self.lattice, &self.canonical) {
            (Some(l), Some(k)) => {
                let label = fresh_exceptional_label(l);
                let n = l.rank();
                let mut labels = l.labels().to_vec();
                labels.push(label.clone());
                let mut gram: Vec<Vec<i64>> = l
                    .gram()
                    .iter()
                    .map(|row| {
                        let mut r = row.clone();
                        r.push(0);
                        r
                    })
                    .collect();
                let mut last = vec![0; n + 1];
                last[n] = -1;
                gram.push(last);
                let new_lattice = IntLattice::new(labels, gram)?;
                let extend = |c: &HomClass| -> Result<HomClass> {
                    let mut coeffs = c.coeffs().to_vec();
                    coeffs.push(0);
                    new_lattice.from_coeffs(coeffs)
                };
                let new_k = &extend(k)? + &new_lattice.generator(&label)?;
                let mut surfaces = Vec::with_capacity(self.surfaces.len());
                for s in &self.surfaces {
                    let mut s = s.clone();
                    if let Some(c) = s.cls.as_ref().filter(|c| Arc::ptr_eq(c.lattice(), l) || **c.lattice() == **l) {
                        s.cls = Some(extend(c)?);
                    }
                    surfaces.push(s);
                }
                out = out.replace_lattice(Some(new_lattice), Some(new_k), surfaces);
                out.provenance.push(format!("blow_up: new exceptional class {label}"));
            }
            (None, None) => out.provenance.push("blow_up".to_string()),
            _ => {
                return Err(Error::precondition(
                    "blow_up needs both a lattice and a canonical class, or neither",
                ))
            }
        }
        out.check_identities()?;
        Ok(out)
    }

    pub fn blow_down(&self, exc: &HomClass) -> Result<Self> {
        self.blow_down_with_map(exc).map(|(l, _)| l)
    }

    /// Blows down the exceptional sphere `exc`. Tracked classes `S` are pushed
    /// forward to `S + (S.exc) exc`, which lies in `exc`'s orthogonal
    /// complement; the returned map expresses that complement in its new basis.
    pub fn blow_down_with_map(&self, exc: &HomClass) -> Result<(Self, BlowDownMap)> {
        let (lattice, k) = match (&self.lattice, &self.canonical) {
            (Some(l), Some(k)) => (l, k),
            _ => return Err(Error::precondition("blow_down needs a lattice and canonical class")),
        };
        if !(Arc::ptr_eq(exc.lattice(), lattice) || **exc.lattice() == **lattice) {
            return Err(Error::LatticeMismatch);
        }
        if exc.square()? != -1 {
            return Err(Error::precondition(format!("{exc} has square {} != -1", exc.square()?)));
        }
        if k.pair(exc)? != -1 {
            return Err(Error::precondition(format!("K.{exc} = {} != -1", k.pair(exc)?)));
        }
        let map = BlowDownMap::new(exc)?;
        let new_k = map.push(k)?;
        let mut surfaces = Vec::with_capacity(self.surfaces.len());
        for s in &self.surfaces {
            let mut s = s.clone();
            if let Some(c) = s.cls.clone().filter(|c| c.same_lattice(exc)) {
                let meet = c.pair(exc)?;
                let pushed = map.push(&c)?;
                s.self_int = pushed.square()?;
                if s.symplectic {
                    // Arithmetic genus of the image: g + m(m - 1)/2.
                    s.genus = adjunction_genus(&pushed, &new_k).map_err(|e| {
                        Error::precondition(format!("pushforward of {}: {e}", s.label))
                    })?;
                    s.kind = SurfaceKind::for_genus(s.genus);
                } else if meet.abs() > 1 {
                    s.genus += meet * (meet - 1) / 2;
                    s.kind = SurfaceKind::for_genus(s.genus);
                }
                s.cls = Some(pushed);
            }
            surfaces.push(s);
        }
        let mut out = self.replace_numbers(self.e - 1, self.sign + 1)?;
        out = out.replace_lattice(Some(Arc::clone(&map.target)), Some(new_k), surfaces);
        out.provenance.push(format!("blow_down: {exc}"));
        out.check_identities()?;
        Ok((out, map))
    }
}

fn fresh_exceptional_label(l: &IntLattice) -> String {
    let next = l
        .labels()
        .iter()
        .filter_map(|s| s.strip_prefix('E').and_then(|d| d.parse::<u64>().ok()))
        .max()
        .map_or(1, |m| m + 1);
    format!("E{next}")
}

/// The pushforward `H_2(X) -> H_2(X')` of a blowdown along an exceptional
/// class `exc`, together with its section `lift`.
///
/// When `exc` has a coefficient `c_j = +-1`, the images of the other
/// generators form a basis of `exc^perp` and keep their labels (they name
/// pushforwards, so the new Gram need not be diagonal). Otherwise a saturated
/// basis of `exc^perp` labelled `u1, u2, ...` is used.
#[derive(Debug, Clone)]
pub struct BlowDownMap {
    source: Arc<IntLattice>,
    target: Arc<IntLattice>,
    exc: HomClass,
    /// Images of the new generators, in source coordinates.
    basis_in_source: Vec<HomClass>,
    dropped: Option<usize>,
}

impl BlowDownMap {
    pub fn new(exc: &HomClass) -> Result<Self> {
        let source = Arc::clone(exc.lattice());
        if exc.square()? != -1 {
            return Err(Error::precondition("blowdown class must have square -1"));
        }
        let project = |x: &HomClass| -> Result<HomClass> {
            x.checked_add(&exc.checked_scale(x.pair(exc)?)?)
        };
        let dropped = exc.coeffs().iter().rposition(|c| c.abs() == 1);
        let (labels, basis_in_source) = match dropped {
            Some(j) => {
                let mut labels = Vec::new();
                let mut basis = Vec::new();
                for (i, g) in source.generators().into_iter().enumerate() {
                    if i != j {
                        labels.push(source.labels()[i].clone());
                        basis.push(project(&g)?);
                    }
                }
                (labels, basis)
            }
            None => {
                let basis = lattice::orthogonal_complement(&source, std::slice::from_ref(exc))?;
                ((1..=basis.len()).map(|i| format!("u{i}")).collect(), basis)
            }
        };
        let target = IntLattice::new(labels, lattice::gram_of(&basis_in_source)?)?;
        Ok(BlowDownMap {
            source,
            target,
            exc: exc.clone(),
            basis_in_source,
            dropped,
        })
    }

    pub fn source(&self) -> &Arc<IntLattice> {
        &self.source
    }

    pub fn target(&self) -> &Arc<IntLattice> {
        &self.target
    }

    pub fn exceptional(&self) -> &HomClass {
        &self.exc
    }

    pub fn push(&self, x: &HomClass) -> Result<HomClass> {
        if !x.same_lattice(&self.exc) {
            return Err(Error::LatticeMismatch);
        }
        match self.dropped {
            Some(j) => {
                let c = self.exc.coeffs();
                let xj = x.coeffs()[j];
                let coeffs = x
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(i, &xi)| xi - xj * c[j] * c[i])
                    .collect();
                self.target.from_coeffs(coeffs)
            }
            None => {
                let projected = x.checked_add(&self.exc.checked_scale(x.pair(&self.exc)?)?)?;
                let coords = lattice::express_in_basis(&projected, &self.basis_in_source)?;
                let integral = coords
                    .to_integral()
                    .ok_or_else(|| Error::consistency("pushforward is not integral"))?;
                self.target.from_coeffs(integral.coeffs().to_vec())
            }
        }
    }

    /// Inverse on the orthogonal complement: the class in source coordinates
    /// whose pushforward is `y`.
    pub fn lift(&self, y: &HomClass) -> Result<HomClass> {
        if !(Arc::ptr_eq(y.lattice(), &self.target) || **y.lattice() == *self.target) {
            return Err(Error::LatticeMismatch);
        }
        let mut out = self.source.zero();
        for (&c, b) in y.coeffs().iter().zip(&self.basis_in_source) {
            out = out.checked_add(&b.checked_scale(c)?)?;
        }
        Ok(out)
    }
}

/// Successive blowdowns composed into one map.
#[derive(Debug, Clone, Default)]
pub struct BlowDownChain {
    maps: Vec<BlowDownMap>,
}

impl BlowDownChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_map(&mut self, map: BlowDownMap) {
        self.maps.push(map);
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Pushes a class from the first source lattice all the way down.
    pub fn push(&self, x: &HomClass) -> Result<HomClass> {
        self.maps.iter().try_fold(x.clone(), |acc, m| m.push(&acc))
    }

    /// Pushes a class that lives at an intermediate stage (the source of map
    /// `stage`) down to the end of the chain.
    pub fn push_from(&self, stage: usize, x: &HomClass) -> Result<HomClass> {
        self.maps[stage..].iter().try_fold(x.clone(), |acc, m| m.push(&acc))
    }

    pub fn lift(&self, y: &HomClass) -> Result<HomClass> {
        self.maps.iter().rev().try_fold(y.clone(), |acc, m| m.lift(&acc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp2() -> ManifoldLedger {
        let l = IntLattice::blown_up_plane(0);
        let k = l.class(&[("H", -3)]).unwrap();
        make_ledger("CP2", 3, 1, LedgerFlags::symplectic_simply_connected())
            .unwrap()
            .with_lattice(l, k)
            .unwrap()
    }

    #[test]
    fn cp2_invariants() {
        let m = cp2();
        assert_eq!((m.chi_h(), m.c1sq(), m.b_plus(), m.b_minus()), (1, 9, 1, 0));
    }

    #[test]
    fn elliptic_surface_invariants() {
        for x in 1..10 {
            let m = make_ledger("E", 12 * x, -8 * x, LedgerFlags::default()).unwrap();
            assert_eq!((m.chi_h(), m.c1sq()), (x, 0));
        }
    }

    #[test]
    fn make_ledger_rejects_bad_input() {
        assert!(matches!(
            make_ledger("bad", 3, 0, LedgerFlags::default()),
            Err(Error::Precondition(_))
        ));
        // e + sign = 0 gives b+ = -1.
        assert!(matches!(
            make_ledger("bad", 2, -2, LedgerFlags::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn adjunction_examples() {
        let l = IntLattice::diagonal(vec![("H", 1), ("E", -1), ("E1", -1)]).unwrap();
        let k = l.class(&[("H", -3), ("E", 1)]).unwrap();
        let r5 = l.class(&[("H", 5), ("E", -3)]).unwrap();
        assert_eq!(adjunction_genus(&r5, &k).unwrap(), 3);

        let k1 = l.class(&[("H", -3), ("E", 1), ("E1", 1)]).unwrap();
        let s5 = l.class(&[("H", 5), ("E", -2), ("E1", -2)]).unwrap();
        assert_eq!(adjunction_genus(&s5, &k1).unwrap(), 4);

        let line = l.generator("H").unwrap();
        let k0 = l.class(&[("H", -3)]).unwrap();
        assert_eq!(adjunction_genus(&line, &k0).unwrap(), 0);
    }

    #[test]
    fn adjunction_errors() {
        let l = IntLattice::blown_up_plane(1);
        let k = l.class(&[("H", -3), ("E1", 1)]).unwrap();
        // 2H: 4 - 6 = -2 -> genus 0, fine. E1 with K = 0: odd.
        let zero_k = l.zero();
        assert!(adjunction_genus(&l.generator("E1").unwrap(), &zero_k).is_err());
        // -H: 1 + 3 = 4 -> genus 3 (fine); 2E1: -4 - 2 = -6 < -2.
        let two_e = l.class(&[("E1", 2)]).unwrap();
        assert!(adjunction_genus(&two_e, &k).is_err());
    }

    #[test]
    fn seventeen_blowups_of_cp2() {
        let mut m = cp2();
        for _ in 0..17 {
            m = m.blow_up().unwrap();
        }
        assert_eq!(m.c1sq(), -8);
        assert_eq!(m.chi_h(), 1);
        assert_eq!(m.lattice().unwrap().labels().last().unwrap(), "E17");
        assert_eq!(m.canonical().unwrap().square().unwrap(), -8);
    }

    #[test]
    fn ledger_only_blowups_of_elliptic_surface() {
        let mut m = make_ledger("E(4)", 48, -32, LedgerFlags::symplectic_simply_connected()).unwrap();
        for k in 1..=5 {
            m = m.blow_up().unwrap();
            assert_eq!(m.c1sq(), -k);
            assert_eq!(m.chi_h(), 4);
        }
    }

    #[test]
    fn pushforward_square_rule() {
        let l = IntLattice::blown_up_plane(2);
        let k = l.class(&[("H", -3), ("E1", 1), ("E2", 1)]).unwrap();
        let s = l.class(&[("H", 1), ("E1", -1), ("E2", -1)]).unwrap();
        let m = make_ledger("CP2#2", 5, -1, LedgerFlags::symplectic_simply_connected())
            .unwrap()
            .with_lattice(l.clone(), k)
            .unwrap()
            .with_surface(EmbeddedSurface::from_class("S", s.clone(), 0, true).unwrap())
            .unwrap();
        let e2 = l.generator("E2").unwrap();
        let (down, map) = m.blow_down_with_map(&e2).unwrap();
        let image = down.surface("S").unwrap().cls.clone().unwrap();
        assert_eq!(image.to_string(), "H-E1");
        assert_eq!(image.square().unwrap(), s.square().unwrap() + 1);
        assert_eq!(map.lift(&image).unwrap(), l.class(&[("H", 1), ("E1", -1)]).unwrap());
        assert_eq!((down.e(), down.sign(), down.c1sq()), (4, 0, 8));
    }

    #[test]
    fn blowdown_along_non_generator_keeps_unimodular_form() {
        // Blow down H - E1 - E2 in CP2 # 2(-CP2): the result is CP2 # (-CP2)
        // up to basis, with labels naming pushforwards of H and E1.
        let l = IntLattice::blown_up_plane(2);
        let k = l.class(&[("H", -3), ("E1", 1), ("E2", 1)]).unwrap();
        let m = make_ledger("CP2#2", 5, -1, LedgerFlags::symplectic_simply_connected())
            .unwrap()
            .with_lattice(l.clone(), k)
            .unwrap();
        let exc = l.class(&[("H", 1), ("E1", -1), ("E2", -1)]).unwrap();
        let down = m.blow_down(&exc).unwrap();
        let lat = down.lattice().unwrap();
        assert_eq!(lat.labels(), &["H".to_string(), "E1".to_string()]);
        assert!(lat.is_unimodular());
        assert_eq!(lat.inertia(), (1, 1, 0));
        assert_eq!(down.canonical().unwrap().square().unwrap(), 8);
    }

    #[test]
    fn blowdown_preconditions() {
        let m = cp2().blow_up().unwrap();
        let l = m.lattice().unwrap().clone();
        assert!(m.blow_down(&l.generator("H").unwrap()).is_err());
        // -E1 has square -1 but K.(-E1) = +1.
        assert!(m.blow_down(&(-&l.generator("E1").unwrap())).is_err());
    }

    #[test]
    fn noether_positions() {
        let p = noether_position(4, 1);
        assert!(p.on_half_noether && p.below_noether && p.in_realized_region);
        assert!(noether_position(4, 2).on_noether);
        let top = noether_position(4, 8);
        assert!(top.in_realized_region && !top.below_noether);
        assert!(!noether_position(4, 9).in_realized_region);
        assert!(!noether_position(3, 0).in_realized_region);
    }
}
