//! Rational surfaces built from line arrangements, modelled through their
//! homological shadow only: a curve class `dH - mE` in `CP^2 # (-CP^2)` plus a
//! list of further blowups, each subtracting its multiplicity.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{self, HomClass, IntLattice};
use crate::ledger::{self, make_ledger, EmbeddedSurface, LedgerFlags, ManifoldLedger};
use crate::surgery;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    /// A double point of the arrangement, blown up before smoothing.
    DoublePoint,
    /// A point on the smoothed curve.
    OnCurve,
}

/// `pencil_size` lines through a common point plus `general_lines` lines in
/// general position; the common point is blown up first (label `E`), then each
/// entry of `extra_blowups` in order (labels `E1, E2, ...`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrangementSpec {
    pub pencil_size: i64,
    pub general_lines: i64,
    pub extra_blowups: Vec<(PointKind, i64)>,
}

/// A rational surface with its distinguished square-zero surface and any
/// auxiliary spheres, all registered on the ledger.
#[derive(Debug, Clone)]
pub struct RationalSurface {
    pub ledger: ManifoldLedger,
    pub sigma: EmbeddedSurface,
    pub auxiliary: Vec<EmbeddedSurface>,
}

impl RationalSurface {
    pub fn lattice(&self) -> &Arc<IntLattice> {
        self.ledger.lattice().expect("rational surfaces carry a lattice")
    }

    pub fn canonical(&self) -> &HomClass {
        self.ledger.canonical().expect("rational surfaces carry K")
    }

    pub fn sigma_class(&self) -> &HomClass {
        self.sigma.cls.as_ref().expect("sigma has a class")
    }

    pub fn generator(&self, label: &str) -> HomClass {
        self.lattice().generator(label).expect("known label")
    }

    pub fn auxiliary(&self, label: &str) -> Option<&EmbeddedSurface> {
        self.auxiliary.iter().find(|s| s.label == label)
    }
}

impl ArrangementSpec {
    pub fn for_r(q: i64) -> Self {
        ArrangementSpec {
            pencil_size: q - 2,
            general_lines: 2,
            extra_blowups: vec![(PointKind::OnCurve, 1); (4 * q - 4) as usize],
        }
    }

    pub fn for_s(p: i64) -> Self {
        ArrangementSpec {
            pencil_size: p - 3,
            general_lines: 3,
            extra_blowups: vec![(PointKind::OnCurve, 1); (6 * p - 9) as usize],
        }
    }

    pub fn for_s_prime(p: i64) -> Self {
        let mut extra = vec![(PointKind::DoublePoint, 2)];
        extra.extend(std::iter::repeat_n((PointKind::OnCurve, 1), (6 * p - 13) as usize));
        ArrangementSpec {
            pencil_size: p - 3,
            general_lines: 3,
            extra_blowups: extra,
        }
    }

    pub fn degree(&self) -> i64 {
        self.pencil_size + self.general_lines
    }

    fn lattice(&self) -> Arc<IntLattice> {
        let mut entries = vec![("H".to_string(), 1), ("E".to_string(), -1)];
        entries.extend((1..=self.extra_blowups.len()).map(|i| (format!("E{i}"), -1)));
        IntLattice::diagonal(entries).expect("distinct labels")
    }

    /// Builds the blown-up plane, the smoothed curve and its genus. Double
    /// points listed in `extra_blowups` are separated before the remaining
    /// double points are smoothed; on-curve blowups keep the genus.
    pub fn realize(&self, name: &str, sigma_label: &str) -> Result<RationalSurface> {
        if self.pencil_size < 1 {
            return Err(Error::precondition("pencil_size must be at least 1"));
        }
        let lat = self.lattice();
        let h = lat.generator("H")?;
        let e = lat.generator("E")?;
        let mut k = &(-3 * &h) + &e;
        for i in 1..=self.extra_blowups.len() {
            k = &k + &lat.generator(&format!("E{i}"))?;
        }

        // Lines of the pencil pass through the blown-up point; the others don't.
        let pencil_line = &h - &e;
        let mut lines = vec![pencil_line; self.pencil_size as usize];
        lines.extend(std::iter::repeat_n(h.clone(), self.general_lines as usize));
        let k_plane = &(-3 * &h) + &e;
        let (curve, smoothed_genus) = smooth_double_points(&lines, &k_plane)?;

        let mut sigma = curve;
        let mut genus = smoothed_genus;
        let mut separated = 0;
        for (i, &(kind, mult)) in self.extra_blowups.iter().enumerate() {
            let ei = lat.generator(&format!("E{}", i + 1))?;
            sigma = &sigma - &(mult * &ei);
            if kind == PointKind::DoublePoint {
                separated += mult * (mult - 1) / 2;
            }
        }
        genus -= separated;
        let from_adjunction = ledger::adjunction_genus(&sigma, &k)?;
        if from_adjunction != genus {
            return Err(Error::consistency(format!(
                "{name}: genus {genus} from smoothing but {from_adjunction} from adjunction"
            )));
        }

        let negatives = 1 + self.extra_blowups.len() as i64;
        let ledger = make_ledger(name, 3 + negatives, 1 - negatives, LedgerFlags::symplectic_simply_connected())?
            .with_lattice(Arc::clone(&lat), k)?;
        // An exceptional sphere meeting the surface once kills the meridian.
        let meets_once = (1..=self.extra_blowups.len())
            .map(|i| lat.generator(&format!("E{i}")).and_then(|g| g.pair(&sigma)))
            .collect::<Result<Vec<_>>>()?
            .contains(&1);
        let sigma = EmbeddedSurface::from_class(sigma_label, sigma, genus, true)?
            .with_complement_simply_connected(meets_once);
        let ledger = ledger
            .with_surface(sigma.clone())?
            .with_note(format!(
                "{} lines ({} through one point), blown up at the multiple point and {} more points",
                self.degree(),
                self.pencil_size,
                self.extra_blowups.len()
            ));
        Ok(RationalSurface {
            ledger,
            sigma,
            auxiliary: Vec::new(),
        })
    }
}

fn with_auxiliary(mut surface: RationalSurface, spheres: Vec<(String, HomClass)>) -> Result<RationalSurface> {
    for (label, cls) in spheres {
        let genus = ledger::adjunction_genus(&cls, surface.canonical())?;
        let s = EmbeddedSurface::from_class(label, cls, genus, true)?;
        surface.ledger = surface.ledger.with_surface(s.clone())?;
        surface.auxiliary.push(s);
    }
    Ok(surface)
}

/// `R(q) = CP^2 # (4q-3)(-CP^2)` with `Sigma_R(q) = qH - (q-2)E - E1 - ... - E_{4q-4}`
/// of genus `q - 2` and square 0. The sphere `A = H - E` (a line through the
/// multiple point) is registered as an auxiliary surface.
pub fn build_r(q: i64) -> Result<RationalSurface> {
    if q < 4 {
        return Err(Error::precondition(format!("R(q) needs q >= 4 (got q = {q})")));
    }
    arrangement_r(q)
}

/// Same arrangement, also for `q = 3` (a single line through the multiple
/// point, giving `R(3) = E(1)` with a genus 1 fiber).
fn arrangement_r(q: i64) -> Result<RationalSurface> {
    let s = ArrangementSpec::for_r(q).realize(&format!("R({q})"), "Sigma_R")?;
    let a = &s.generator("H") - &s.generator("E");
    with_auxiliary(s, vec![("A".to_string(), a)])
}

/// `S(p) = CP^2 # (6p-8)(-CP^2)` with `Sigma_S(p) = pH - (p-3)E - E1 - ... - E_{6p-9}`
/// of genus `2p - 5`. Auxiliary spheres: `B_k = H - E - E_{2k-1} - E_{2k}` for
/// `k = 1..3p-5` and `C = H - E`.
pub fn build_s(p: i64) -> Result<RationalSurface> {
    if p < 4 {
        return Err(Error::precondition(format!("S(p) needs p >= 4 (got p = {p})")));
    }
    let s = ArrangementSpec::for_s(p).realize(&format!("S({p})"), "Sigma_S")?;
    let base = &s.generator("H") - &s.generator("E");
    let mut aux = Vec::new();
    for k in 1..=(3 * p - 5) {
        let b = &(&base - &s.generator(&format!("E{}", 2 * k - 1))) - &s.generator(&format!("E{}", 2 * k));
        aux.push((format!("B{k}"), b));
    }
    aux.push(("C".to_string(), base));
    with_auxiliary(s, aux)
}

/// `S'(p) = CP^2 # (6p-11)(-CP^2)`: as `S(p)` but with one double point blown
/// up (label `E1`, multiplicity 2) before the `6p - 13` blowups on the curve.
/// `Sigma = pH - (p-3)E - 2E1 - E2 - ... - E_{6p-12}` has genus `2p - 6`.
/// Auxiliary spheres `B_k = H - E - E_{2k} - E_{2k+1}` (`k = 1..3p-7`) and `C = H - E`.
pub fn build_s_prime(p: i64) -> Result<RationalSurface> {
    if p < 5 {
        return Err(Error::precondition(format!("S'(p) needs p >= 5 (got p = {p})")));
    }
    let s = ArrangementSpec::for_s_prime(p).realize(&format!("S'({p})"), "Sigma_S'")?;
    let base = &s.generator("H") - &s.generator("E");
    let mut aux = Vec::new();
    for k in 1..=(3 * p - 7) {
        let b = &(&base - &s.generator(&format!("E{}", 2 * k))) - &s.generator(&format!("E{}", 2 * k + 1));
        aux.push((format!("B{k}"), b));
    }
    aux.push(("C".to_string(), base));
    with_auxiliary(s, aux)
}

/// Smoothing the transverse double points of a union of curves: the result is
/// the homological sum, with genus forced by adjunction.
pub fn smooth_double_points(classes: &[HomClass], canonical: &HomClass) -> Result<(HomClass, i64)> {
    let first = classes
        .first()
        .ok_or_else(|| Error::precondition("no curves to smooth"))?;
    let mut sum = first.clone();
    for c in &classes[1..] {
        sum = sum.checked_add(c)?;
    }
    let genus = ledger::adjunction_genus(&sum, canonical)?;
    Ok((sum, genus))
}

/// Solves for the fiber `Lambda` of the horizontal fibration of `R(q+1)`:
/// `Lambda.(H-E) = 2`, `Lambda` orthogonal to the (-2)-spheres `E_{2i} - E_{2i-1}`
/// and `H - E - E_{2i-1} - E_{2i}` of the vertical singular fibers, and
/// `Lambda^2 = 0`. The exhaustive box is `max(8, q + 1)`, the smallest box
/// of at least 8 that contains the H-coefficient `q + 1`.
pub fn horizontal_fiber_class(q: i64) -> Result<HomClass> {
    if q < 3 {
        return Err(Error::precondition(format!("horizontal fiber needs q >= 3 (got q = {q})")));
    }
    let r = build_r(q + 1)?;
    let lat = r.lattice();
    let g = |label: &str| lat.generator(label);
    let vertical = &g("H")? - &g("E")?;
    let mut constraints = vec![(vertical.clone(), 2)];
    for i in 1..=(2 * q) {
        let odd = g(&format!("E{}", 2 * i - 1))?;
        let even = g(&format!("E{}", 2 * i))?;
        constraints.push((&even - &odd, 0));
        constraints.push((&(&vertical - &odd) - &even, 0));
    }
    let bound = std::cmp::max(8, q + 1);
    let h_index = lat.index_of("H").expect("H");
    let solutions: Vec<HomClass> = lattice::solve_class(lat, &constraints, 0, bound, false)?
        .into_iter()
        .filter(|c| c.coeffs()[h_index] > 0)
        .collect();
    let [lambda] = solutions.as_slice() else {
        return Err(Error::consistency(format!(
            "horizontal fiber of R({}): expected one positive-degree solution, found {}",
            q + 1,
            solutions.len()
        )));
    };
    if lambda != r.sigma_class() {
        return Err(Error::consistency(format!(
            "horizontal fiber {lambda} differs from Sigma_R({}) = {}",
            q + 1,
            r.sigma_class()
        )));
    }
    Ok(lambda.clone())
}

/// `E(x)` built two ways: directly from `(e, sign) = (12x, -8x)` and as the
/// fiber sum `R(x+1) #_Sigma R(x+1)`.
pub fn elliptic_routes(x: i64) -> Result<(ManifoldLedger, ManifoldLedger)> {
    if x < 2 {
        return Err(Error::precondition(format!("E(x) needs x >= 2 (got x = {x})")));
    }
    let direct = make_ledger(format!("E({x})"), 12 * x, -8 * x, LedgerFlags::symplectic_simply_connected())?;
    let r = arrangement_r(x + 1)?;
    let complements = r.sigma.complement_simply_connected == Some(true);
    let summed = surgery::fiber_sum(&r.ledger, &r.sigma, &r.ledger, &r.sigma, complements)?;
    Ok((direct, summed))
}

/// The elliptic surface `E(x)`; both constructions of [`elliptic_routes`]
/// must agree.
pub fn build_e(x: i64) -> Result<ManifoldLedger> {
    let (direct, summed) = elliptic_routes(x)?;
    if !direct.same_invariants(&summed) {
        return Err(Error::consistency(format!(
            "E({x}): direct ledger {:?} disagrees with fiber-sum ledger {:?}",
            direct.invariants(),
            summed.invariants()
        )));
    }
    let fiber = EmbeddedSurface::formal("T", 1, 0, true)?;
    Ok(direct.with_surface(fiber)?.with_note(format!(
        "agrees with fiber sum R({0}) #_Sigma R({0})",
        x + 1
    )))
}
