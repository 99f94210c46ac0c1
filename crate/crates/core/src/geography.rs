//! Constructions of simply connected symplectic manifolds with one basic
//! class up to sign, and the solver that realizes each lattice point of
//! `0 < x - 3 <= c <= (5x - 4)/2` in the `(chi_h, c1^2)` plane.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::IntLattice;
use crate::ledger::{noether_position, EmbeddedSurface, ManifoldLedger};
use crate::report::Report;
use crate::surfaces;
use crate::surgery::{self, rational_blowdown, BlowdownOptions, ConfigCn, SurgeryRecipe, SurgeryStep};
use crate::sw::{self, BasicClass, FilterMode};

fn ledger_pair(m: &ManifoldLedger) -> String {
    format!("({}, {})", m.chi_h(), m.c1sq())
}

fn signs_all(k: usize, s: i8) -> Vec<i8> {
    vec![s; k]
}

/// Filters the basic classes of `E(x) # k(-CP^2)` through `C_{x+2k-2}` and
/// records the outcome; returns the survivors.
fn filter_report(rep: &mut Report, x: i64, k: usize, config: &ConfigCn) -> Result<Vec<BasicClass>> {
    let basic = sw::blowup_formula(&sw::basic_classes_e(x)?, k)?;
    let outcome = sw::taut_filter_with(&basic, config, FilterMode::Auto)?;
    let survivors: Vec<BasicClass> = outcome.survivors.iter().collect();
    rep.check_eq("classes checked", (x as u128 - 1) << k, outcome.checked);
    let chain = match config.n() - 2 {
        0 => String::new(),
        1 => "every class pairs to 0 with S_1, ".to_string(),
        t => format!("every class pairs to 0 with S_1..S_{t}, "),
    };
    rep.check(
        "filter hypotheses",
        true,
        format!("{chain}|beta.S_0| <= {} ({:?} mode)", config.n(), outcome.mode),
    );
    let top = BasicClass {
        m: x - 2,
        eps: signs_all(k, 1),
    };
    let expected = if x == 2 && k == 0 { vec![] } else { vec![top.negate(), top] };
    let mut got = survivors.clone();
    got.sort();
    let mut want = expected.clone();
    want.sort();
    let show = |v: &[BasicClass]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    rep.check_eq("survivors", show(&want), show(&got));
    rep.check_eq("basic classes up to sign", 1, survivors.len() / 2);
    rep.set("survivors", survivors.iter().map(ToString::to_string).collect::<Vec<_>>());
    Ok(survivors)
}

fn noether_checks(rep: &mut Report, m: &ManifoldLedger) {
    let pos = m.noether_position();
    rep.check("inside the realized region", pos.in_realized_region, format!("(chi_h, c1^2) = {}", ledger_pair(m)));
    rep.set("on_half_noether", pos.on_half_noether);
    rep.set("on_noether", pos.on_noether);
    rep.set("below_noether", pos.below_noether);
}

/// `X_p = R(2p-3) #_Sigma S(p)`, compared against the rational blowdown of
/// `C_{2p-6}` in `E(2p-4)`.
pub fn construct_xp(p: i64) -> Result<(ManifoldLedger, Report)> {
    if p < 4 {
        return Err(Error::precondition(format!("X_p needs p >= 4 (got p = {p})")));
    }
    construct_x_family(p, false)
}

/// `X'_p = R(2p-4) #_Sigma S'(p)`, compared against `C_{2p-7}` in `E(2p-5)`.
pub fn construct_xp_prime(p: i64) -> Result<(ManifoldLedger, Report)> {
    if p < 5 {
        return Err(Error::precondition(format!("X'_p needs p >= 5 (got p = {p})")));
    }
    construct_x_family(p, true)
}

fn construct_x_family(p: i64, odd: bool) -> Result<(ManifoldLedger, Report)> {
    let (name, r, s, x) = if odd {
        (format!("X'_{p}"), surfaces::build_r(2 * p - 4)?, surfaces::build_s_prime(p)?, 2 * p - 5)
    } else {
        (format!("X_{p}"), surfaces::build_r(2 * p - 3)?, surfaces::build_s(p)?, 2 * p - 4)
    };
    let mut rep = Report::new(format!("{name}: fiber sum and elliptic blowdown routes"));
    let complements = r.sigma.complement_simply_connected == Some(true) && s.sigma.complement_simply_connected == Some(true);
    rep.check(
        "complements simply connected",
        complements,
        "an exceptional sphere meets each gluing surface once",
    );
    let fiber = surgery::fiber_sum(&r.ledger, &r.sigma, &s.ledger, &s.sigma, complements)?.renamed(name.clone());

    let e = surfaces::build_e(x)?;
    let config = sw::config_in_e_blowup(x, 0)?;
    let frag = sw::SwFragment::new(x, 0)?;
    let dual = frag.f();
    let blown = rational_blowdown(
        &e,
        &config,
        BlowdownOptions {
            spheres_symplectic: true,
            dual: Some(&dual),
        },
    )?;
    rep.check_eq("configuration", format!("C_{}", x - 2), format!("C_{}", config.n()));
    rep.check_eq("routes agree", format!("{:?}", fiber.invariants()), format!("{:?}", blown.invariants()));
    rep.check(
        "flags agree",
        fiber.simply_connected() == blown.simply_connected() && fiber.symplectic() == blown.symplectic(),
        format!("simply connected {:?}, symplectic {}", fiber.simply_connected(), fiber.symplectic()),
    );
    let (chi, c1) = if odd { (2 * p - 5, 2 * p - 8) } else { (2 * p - 4, 2 * p - 7) };
    rep.check_eq("(chi_h, c1^2)", format!("({chi}, {c1})"), ledger_pair(&fiber));
    rep.check("half-Noether line", fiber.noether_position().on_half_noether, "c1^2 = chi_h - 3");
    filter_report(&mut rep, x, 0, &config)?;
    noether_checks(&mut rep, &fiber);
    let out = fiber.with_note(format!(
        "agrees with the rational blowdown of C_{} in E({x})",
        config.n()
    ));
    Ok((out, rep))
}

/// Blows down `k` of the disjoint (-4)-spheres assembled across the gluing
/// surface of `X_p` (or `X'_p` when `odd`).
pub fn construct_xpk(p: i64, k: i64, odd: bool) -> Result<(ManifoldLedger, Report)> {
    let (bound, bound_text) = if odd { (3 * p - 7, "k ≤ 3p−7") } else { (3 * p - 5, "k ≤ 3p−5") };
    if k < 0 || k > bound {
        return Err(Error::precondition(format!(
            "{bound_text} fails: k = {k}, bound {bound} (sphere inventory exhausted)"
        )));
    }
    let (base, mut rep) = if odd { construct_xp_prime(p)? } else { construct_xp(p)? };
    let name = if odd { format!("X'({p},{k})") } else { format!("X({p},{k})") };
    rep.title = format!("{name}: {k} (-4)-sphere blowdowns of {}", base.name());
    let inventory = surgery::minus4_inventory(p, odd)?;
    rep.check_eq("(-4)-sphere inventory", bound, inventory.len() as i64);
    let mut m = base.clone();
    for s in inventory.iter().take(k as usize) {
        m = m.with_surface(s.clone())?;
    }
    for s in inventory.iter().take(k as usize) {
        let local = IntLattice::new(vec![s.label.clone()], vec![vec![s.self_int]])?;
        let config = ConfigCn::new(vec![local.generator(&s.label)?])?;
        let next = rational_blowdown(
            &m,
            &config,
            BlowdownOptions {
                spheres_symplectic: s.symplectic,
                dual: None,
            },
        )?;
        let remaining: Vec<EmbeddedSurface> = next.surfaces().iter().filter(|t| t.label != s.label).cloned().collect();
        m = next.replace_lattice(None, None, remaining);
    }
    let m = m.renamed(name);
    rep.check_eq(
        "(chi_h, c1^2)",
        format!("({}, {})", base.chi_h(), base.c1sq() + k),
        ledger_pair(&m),
    );
    if k > 0 {
        rep.assert(
            "simply connected",
            "the blowdowns of the (-4)-spheres keep the complement simply connected; not recomputed",
        );
        rep.assert(
            "one basic class up to sign",
            "carried over from the unblown manifold; pairings with the assembled spheres are not available",
        );
    }
    noether_checks(&mut rep, &m);
    Ok((m, rep))
}

/// Blow up `E(x)` `k` times and rationally blow down `C_{x+2k-2}`:
/// `(chi_h, c1^2) = (x, x + k - 3)` with the survivors computed exactly.
pub fn construct_z(x: i64, k: i64) -> Result<(ManifoldLedger, Report)> {
    if x < 4 {
        return Err(Error::precondition(format!("x ≥ 4 fails: x = {x}")));
    }
    if k < 0 || 2 * k > 3 * x + 2 {
        return Err(Error::precondition(format!(
            "0 ≤ k ≤ (3x+2)/2 fails: k = {k}, bound {}",
            (3 * x + 2) / 2
        )));
    }
    let ku = k as usize;
    let mut rep = Report::new(format!("Z({x},{k}): C_{} blown down in E({x}) # {k}(-CP2)", x + 2 * k - 2));
    let mut m = surfaces::build_e(x)?;
    for _ in 0..k {
        m = m.blow_up()?;
    }
    let kc = sw::canonical_class_e_blowup(x, ku)?;
    rep.check_eq("K.K = c1^2", m.c1sq(), kc.square()?);
    let config = sw::config_in_e_blowup(x, ku)?;
    rep.check_eq("configuration", format!("C_{}", x + 2 * k - 2), format!("C_{}", config.n()));
    rep.check_eq("lead sphere square", -(x + 2 * k), config.spheres()[0].square()?);
    let zero = sw::adjunction_zero_check(x, ku)?;
    rep.check("K, f, E orthogonal to the chain", zero.all_passed(), format!("{} chain spheres", zero.checks.len()));
    let frag = sw::SwFragment::new(x, ku)?;
    let dual = frag.f();
    let z = rational_blowdown(
        &m,
        &config,
        BlowdownOptions {
            spheres_symplectic: true,
            dual: Some(&dual),
        },
    )?
    .renamed(format!("Z({x},{k})"));
    rep.check_eq("(chi_h, c1^2)", format!("({x}, {})", x + k - 3), ledger_pair(&z));
    rep.check(
        "simply connected",
        z.simply_connected() == Some(true),
        "the fiber meets the lead sphere once",
    );
    rep.check("symplectic", z.symplectic(), "configuration spheres are symplectic");
    filter_report(&mut rep, x, ku, &config)?;
    noether_checks(&mut rep, &z);
    Ok((z, rep))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    FiberSumEven,
    FiberSumOdd,
    EllipticBlowdown,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::FiberSumEven => "fiber_sum_even",
            Route::FiberSumOdd => "fiber_sum_odd",
            Route::EllipticBlowdown => "elliptic_blowdown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub chi_h: i64,
    pub c1_sq: i64,
    pub basic_classes_up_to_sign: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Recipe {
    pub route: Route,
    /// `p` for the fiber-sum routes, `x` for the elliptic one.
    pub parameter: i64,
    pub k: i64,
    pub steps: SurgeryRecipe,
    pub expected: Expected,
}

impl Recipe {
    /// Replays the steps on `(e, sign)` and then runs the construction itself;
    /// both must land on `expected`.
    pub fn execute(&self) -> Result<(ManifoldLedger, Report)> {
        let replayed = self.steps.replay()?;
        let (m, mut rep) = match self.route {
            Route::EllipticBlowdown => construct_z(self.parameter, self.k)?,
            Route::FiberSumEven => construct_xpk(self.parameter, self.k, false)?,
            Route::FiberSumOdd => construct_xpk(self.parameter, self.k, true)?,
        };
        let want = format!("({}, {})", self.expected.chi_h, self.expected.c1_sq);
        rep.check_eq("replayed steps", want.clone(), ledger_pair(&replayed));
        rep.check_eq("executed construction", want, ledger_pair(&m));
        Ok((m, rep))
    }
}

/// The elliptic route to `(x, c)`: `k = c - x + 3` blowups of `E(x)`, then
/// one rational blowdown.
pub fn elliptic_recipe(x: i64, c: i64) -> Result<Recipe> {
    check_region(x, c)?;
    let k = c - x + 3;
    let n = x + 2 * k - 2;
    let start = crate::ledger::make_ledger(format!("E({x})"), 12 * x, -8 * x, Default::default())?;
    let steps = SurgeryRecipe::new(&start)
        .then(SurgeryStep::BlowUp { count: k })
        .then(SurgeryStep::RationalBlowdown {
            n,
            config: format!("S_0 = S + sum(f - 2E_j), t_1..t_{}", n - 2),
        });
    Ok(Recipe {
        route: Route::EllipticBlowdown,
        parameter: x,
        k,
        steps,
        expected: Expected {
            chi_h: x,
            c1_sq: c,
            basic_classes_up_to_sign: 1,
        },
    })
}

/// The fiber-sum route when parity and range allow it: `X(p,k)` with
/// `p = (x+4)/2` for even `x`, `X'(p,k)` with `p = (x+5)/2` for odd `x`.
pub fn fiber_sum_recipe(x: i64, c: i64) -> Result<Option<Recipe>> {
    check_region(x, c)?;
    let k = c - x + 3;
    let (route, p, bound, q, partner, genus) = if x % 2 == 0 {
        let p = (x + 4) / 2;
        (Route::FiberSumEven, p, 3 * p - 5, 2 * p - 3, format!("S({p})"), 2 * p - 5)
    } else {
        let p = (x + 5) / 2;
        (Route::FiberSumOdd, p, 3 * p - 7, 2 * p - 4, format!("S'({p})"), 2 * p - 6)
    };
    let min_p = if route == Route::FiberSumOdd { 5 } else { 4 };
    if p < min_p || k > bound {
        return Ok(None);
    }
    let r = surfaces::build_r(q)?;
    let s = if route == Route::FiberSumOdd { surfaces::build_s_prime(p)? } else { surfaces::build_s(p)? };
    let mut steps = SurgeryRecipe::new(&r.ledger).then(SurgeryStep::FiberSum {
        partner,
        partner_e: s.ledger.e(),
        partner_sign: s.ledger.sign(),
        genus,
    });
    for i in 1..=k {
        steps = steps.then(SurgeryStep::RationalBlowdown {
            n: 2,
            config: format!("Q{i}"),
        });
    }
    Ok(Some(Recipe {
        route,
        parameter: p,
        k,
        steps,
        expected: Expected {
            chi_h: x,
            c1_sq: c,
            basic_classes_up_to_sign: 1,
        },
    }))
}

fn check_region(x: i64, c: i64) -> Result<()> {
    if x - 3 <= 0 {
        return Err(Error::precondition(format!("0 < x−3 fails: x = {x}")));
    }
    if c < x - 3 {
        return Err(Error::precondition(format!("x−3 ≤ c fails: c = {c} < {}", x - 3)));
    }
    if 2 * c > 5 * x - 4 {
        return Err(Error::precondition(format!(
            "c ≤ (5x−4)/2 fails: c = {c} > {}",
            (5 * x - 4).div_euclid(2)
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct GeographyPlan {
    pub x: i64,
    pub c: i64,
    pub recipe: Recipe,
    pub alternative: Option<Recipe>,
}

/// The elliptic route for `(x, c)`, plus the fiber-sum route when it
/// applies.
pub fn geography_recipe(x: i64, c: i64) -> Result<GeographyPlan> {
    Ok(GeographyPlan {
        x,
        c,
        recipe: elliptic_recipe(x, c)?,
        alternative: fiber_sum_recipe(x, c)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub x: i64,
    pub c: i64,
    pub route: String,
    pub k: i64,
    pub below_noether: bool,
    pub alternative: String,
    pub basic_classes: String,
    pub status: String,
}

/// One row per lattice point of the region with `x <= x_max`, in `(x, c)`
/// order. Rows record failures instead of stopping.
pub fn sweep_rows(x_max: i64) -> Result<Vec<SweepRow>> {
    if x_max < 4 {
        return Err(Error::precondition(format!("x_max ≥ 4 fails: x_max = {x_max}")));
    }
    let points: Vec<(i64, i64)> = (4..=x_max)
        .flat_map(|x| (x - 3..=(5 * x - 4).div_euclid(2)).map(move |c| (x, c)))
        .collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(points.len().max(1));
    if workers == 1 {
        return points.iter().map(|&(x, c)| sweep_point(x, c)).collect();
    }
    let chunk = points.len().div_ceil(workers).max(1);
    let rows: Vec<Result<SweepRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|&(x, c)| sweep_point(x, c)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    rows.into_iter().collect()
}

fn sweep_point(x: i64, c: i64) -> Result<SweepRow> {
    let plan = geography_recipe(x, c)?;
    let outcome = plan.recipe.execute();
    let (status, basic) = match &outcome {
        Ok((_, rep)) if rep.all_passed() => ("pass", "verified"),
        Ok(_) => ("fail", "failed"),
        Err(e) if e.is_consistency() => return Err(e.clone()),
        Err(_) => ("fail", "failed"),
    };
    Ok(SweepRow {
        x,
        c,
        route: plan.recipe.route.as_str().to_string(),
        k: plan.recipe.k,
        below_noether: noether_position(x, c).below_noether,
        alternative: plan.alternative.map_or_else(String::new, |r| r.route.as_str().to_string()),
        basic_classes: basic.to_string(),
        status: status.to_string(),
    })
}

/// Like [`sweep_rows`], but any failing point is an error.
pub fn geography_sweep(x_max: i64) -> Result<Vec<SweepRow>> {
    let rows = sweep_rows(x_max)?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.status != "pass")
        .map(|r| format!("({}, {})", r.x, r.c))
        .collect();
    if !failed.is_empty() {
        return Err(Error::consistency(format!("sweep failures at {}", failed.join(", "))));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xp_routes() {
        let (m, rep) = construct_xp(4).unwrap();
        assert!(rep.all_passed(), "{:#?}", rep.failures());
        assert_eq!((m.chi_h(), m.c1sq()), (4, 1));
        let (m, rep) = construct_xp(5).unwrap();
        assert_eq!((m.chi_h(), m.c1sq()), (6, 3));
        assert_eq!(rep.get("survivors").unwrap().detail, "beta(-4), beta(4)");
        let (m, rep) = construct_xp_prime(5).unwrap();
        assert!(rep.all_passed(), "{:#?}", rep.failures());
        assert_eq!((m.chi_h(), m.c1sq()), (5, 2));
        assert_eq!(ledger_pair(&construct_xp_prime(6).unwrap().0), "(7, 4)");
    }

    #[test]
    fn xpk_family() {
        let (m, rep) = construct_xpk(4, 7, false).unwrap();
        assert_eq!((m.chi_h(), m.c1sq()), (4, 8));
        assert!(rep.all_passed());
        assert_eq!(m.simply_connected(), None);
        assert!(m.surfaces().iter().all(|s| !s.label.starts_with('Q')));
        let (m, _) = construct_xpk(4, 0, false).unwrap();
        assert_eq!(ledger_pair(&m), "(4, 1)");
        assert_eq!(ledger_pair(&construct_xpk(5, 3, true).unwrap().0), "(5, 5)");
        let err = construct_xpk(4, 8, false).unwrap_err();
        assert!(err.to_string().contains("k ≤ 3p−5"));
    }

    #[test]
    fn z_family() {
        let (m, rep) = construct_z(4, 0).unwrap();
        assert!(rep.all_passed(), "{:#?}", rep.failures());
        assert_eq!(ledger_pair(&m), "(4, 1)");
        assert_eq!(rep.get("survivors").unwrap().detail, "beta(-2), beta(2)");
        assert_eq!(ledger_pair(&construct_z(4, 7).unwrap().0), "(4, 8)");
        let (m, rep) = construct_z(7, 5).unwrap();
        assert_eq!(ledger_pair(&m), "(7, 9)");
        assert_eq!(
            rep.get("survivors").unwrap().detail,
            "beta(-5; -,-,-,-,-), beta(5; +,+,+,+,+)"
        );
        assert!(construct_z(4, 8).is_err());
        assert!(construct_z(3, 0).is_err());
    }

    #[test]
    fn recipes() {
        let plan = geography_recipe(4, 1).unwrap();
        assert_eq!((plan.recipe.route, plan.recipe.k), (Route::EllipticBlowdown, 0));
        assert_eq!(geography_recipe(4, 2).unwrap().recipe.k, 1);
        assert_eq!(geography_recipe(9, 20).unwrap().recipe.k, 14);
        let err = geography_recipe(4, 9).unwrap_err();
        assert!(err.to_string().contains("c ≤ (5x−4)/2"), "{err}");
        assert!(geography_recipe(3, 0).unwrap_err().to_string().contains("0 < x−3"));
        assert!(geography_recipe(5, 1).unwrap_err().to_string().contains("x−3 ≤ c"));
        let (m, rep) = plan.recipe.execute().unwrap();
        assert!(rep.all_passed());
        assert_eq!(ledger_pair(&m), "(4, 1)");
        let alt = plan.alternative.unwrap();
        assert_eq!((alt.route, alt.parameter, alt.k), (Route::FiberSumEven, 4, 0));
        let (_, rep) = alt.execute().unwrap();
        assert!(rep.all_passed(), "{:#?}", rep.failures());
        // odd x = 5 needs p = 5
        let alt = fiber_sum_recipe(5, 4).unwrap().unwrap();
        assert_eq!((alt.route, alt.parameter, alt.k), (Route::FiberSumOdd, 5, 2));
        assert!(alt.execute().unwrap().1.all_passed());
    }

    #[test]
    fn small_sweep() {
        let rows = geography_sweep(4).unwrap();
        assert_eq!(rows.iter().map(|r| r.c).collect::<Vec<_>>(), (1..=8).collect::<Vec<_>>());
        let t: Vec<i64> = rows.iter().filter(|r| r.below_noether).map(|r| r.c).collect();
        assert_eq!(t, vec![1, 2]);
        assert!(geography_sweep(3).is_err());
    }
}
