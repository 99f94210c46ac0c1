//! Integer intersection lattices and exact class arithmetic.
//!
//! An [`IntLattice`] is a free abelian group with a symmetric integer pairing
//! and named generators. Classes hold an `Arc` to their lattice; two classes
//! can be combined only when their lattices agree (same allocation, or equal
//! labels and Gram matrix).

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntLattice {
    labels: Vec<String>,
    gram: Vec<Vec<i64>>,
}

impl IntLattice {
    pub fn new<S: Into<String>>(labels: Vec<S>, gram: Vec<Vec<i64>>) -> Result<Arc<Self>> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if gram.len() != n || gram.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidLattice(format!(
                "Gram matrix must be {n}x{n} to match the labels"
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidLattice(format!(
                        "Gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidLattice(format!("duplicate label {l:?}")));
            }
        }
        Ok(Arc::new(IntLattice { labels, gram }))
    }

    /// Orthogonal sum of one-dimensional lattices `<d>`.
    pub fn diagonal<S: Into<String>>(entries: Vec<(S, i64)>) -> Result<Arc<Self>> {
        let n = entries.len();
        let mut labels = Vec::with_capacity(n);
        let mut gram = vec![vec![0; n]; n];
        for (i, (l, d)) in entries.into_iter().enumerate() {
            labels.push(l.into());
            gram[i][i] = d;
        }
        Self::new(labels, gram)
    }

    /// `CP^2 # k (-CP^2)` with generators `H, E1, ..., Ek`.
    pub fn blown_up_plane(k: usize) -> Arc<Self> {
        let mut entries = vec![("H".to_string(), 1)];
        entries.extend((1..=k).map(|i| (format!("E{i}"), -1)));
        Self::diagonal(entries).expect("distinct labels")
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn zero(self: &Arc<Self>) -> HomClass {
        HomClass {
            lattice: Arc::clone(self),
            coeffs: vec![0; self.rank()],
        }
    }

    pub fn generator(self: &Arc<Self>, label: &str) -> Result<HomClass> {
        self.class(&[(label, 1)])
    }

    pub fn generators(self: &Arc<Self>) -> Vec<HomClass> {
        (0..self.rank())
            .map(|i| {
                let mut c = self.zero();
                c.coeffs[i] = 1;
                c
            })
            .collect()
    }

    /// Builds `sum coeff * label`; repeated labels accumulate.
    pub fn class(self: &Arc<Self>, terms: &[(&str, i64)]) -> Result<HomClass> {
        let mut c = self.zero();
        for &(label, k) in terms {
            let i = self
                .index_of(label)
                .ok_or_else(|| Error::precondition(format!("unknown basis label {label:?}")))?;
            c.coeffs[i] = c.coeffs[i].checked_add(k).ok_or(Error::Overflow)?;
        }
        Ok(c)
    }

    pub fn from_coeffs(self: &Arc<Self>, coeffs: Vec<i64>) -> Result<HomClass> {
        if coeffs.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: coeffs.len(),
            });
        }
        Ok(HomClass {
            lattice: Arc::clone(self),
            coeffs,
        })
    }

    /// Sublattice spanned by `basis`, with the restricted pairing.
    pub fn spanned_by(basis: &[HomClass], labels: Option<Vec<String>>) -> Result<Arc<Self>> {
        let labels =
            labels.unwrap_or_else(|| (0..basis.len()).map(|i| format!("b{i}")).collect());
        if labels.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: labels.len(),
            });
        }
        Self::new(labels, gram_of(basis)?)
    }

    /// `(b_plus, b_minus, nullity)` of the pairing.
    pub fn inertia(&self) -> (usize, usize, usize) {
        linalg::inertia(&self.gram)
    }

    pub fn determinant(&self) -> BigInt {
        linalg::determinant(&linalg::big_rows(&self.gram))
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    pub(crate) fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}

/// Second-homology class: an integer coefficient vector in a lattice.
#[derive(Debug, Clone)]
pub struct HomClass {
    lattice: Arc<IntLattice>,
    coeffs: Vec<i64>,
}

impl PartialEq for HomClass {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && IntLattice::same(&self.lattice, &other.lattice)
    }
}

impl Eq for HomClass {}

impl HomClass {
    pub fn lattice(&self) -> &Arc<IntLattice> {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, label: &str) -> Option<i64> {
        self.lattice.index_of(label).map(|i| self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn same_lattice(&self, other: &HomClass) -> bool {
        IntLattice::same(&self.lattice, &other.lattice)
    }

    pub fn pair(&self, other: &HomClass) -> Result<i64> {
        pair(self, other)
    }

    pub fn square(&self) -> Result<i64> {
        pair(self, self)
    }

    pub fn checked_add(&self, other: &HomClass) -> Result<HomClass> {
        self.zip_with(other, i64::checked_add)
    }

    pub fn checked_sub(&self, other: &HomClass) -> Result<HomClass> {
        self.zip_with(other, i64::checked_sub)
    }

    pub fn checked_scale(&self, k: i64) -> Result<HomClass> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| c.checked_mul(k).ok_or(Error::Overflow))
            .collect::<Result<_>>()?;
        Ok(HomClass {
            lattice: Arc::clone(&self.lattice),
            coeffs,
        })
    }

    fn zip_with(&self, other: &HomClass, f: fn(i64, i64) -> Option<i64>) -> Result<HomClass> {
        if !self.same_lattice(other) {
            return Err(Error::LatticeMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| f(a, b).ok_or(Error::Overflow))
            .collect::<Result<_>>()?;
        Ok(HomClass {
            lattice: Arc::clone(&self.lattice),
            coeffs,
        })
    }

    /// Same coefficients, reinterpreted in another lattice of equal rank.
    pub fn transport(&self, lattice: &Arc<IntLattice>) -> Result<HomClass> {
        lattice.from_coeffs(self.coeffs.clone())
    }

    /// Coefficients as exact rationals.
    pub fn to_rational(&self) -> RationalClass {
        RationalClass {
            lattice: Arc::clone(&self.lattice),
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        }
    }
}

// Operator forms panic on lattice mismatch or overflow; use the `checked_*`
// methods where either can happen.
impl Add for &HomClass {
    type Output = HomClass;
    fn add(self, rhs: &HomClass) -> HomClass {
        self.checked_add(rhs).expect("HomClass addition")
    }
}

impl Sub for &HomClass {
    type Output = HomClass;
    fn sub(self, rhs: &HomClass) -> HomClass {
        self.checked_sub(rhs).expect("HomClass subtraction")
    }
}

impl Neg for &HomClass {
    type Output = HomClass;
    fn neg(self) -> HomClass {
        self.checked_scale(-1).expect("HomClass negation")
    }
}

impl Mul<&HomClass> for i64 {
    type Output = HomClass;
    fn mul(self, rhs: &HomClass) -> HomClass {
        rhs.checked_scale(self).expect("HomClass scaling")
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, first: bool, coeff: &str, neg: bool, label: &str) -> fmt::Result {
    match (first, neg) {
        (true, true) | (false, true) => write!(f, "-")?,
        (false, false) => write!(f, "+")?,
        (true, false) => {}
    }
    write!(f, "{coeff}{label}")
}

impl fmt::Display for HomClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, label) in self.coeffs.iter().zip(self.lattice.labels()) {
            if *c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            let coeff = if mag == 1 { String::new() } else { mag.to_string() };
            write_term(f, first, &coeff, *c < 0, label)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Class with rational coefficients, e.g. `(g1 + g2) / 2`.
#[derive(Debug, Clone)]
pub struct RationalClass {
    lattice: Arc<IntLattice>,
    coeffs: Vec<BigRational>,
}

impl PartialEq for RationalClass {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && IntLattice::same(&self.lattice, &other.lattice)
    }
}

impl Eq for RationalClass {}

impl RationalClass {
    pub fn new(lattice: &Arc<IntLattice>, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != lattice.rank() {
            return Err(Error::DimensionMismatch {
                expected: lattice.rank(),
                got: coeffs.len(),
            });
        }
        Ok(RationalClass {
            lattice: Arc::clone(lattice),
            coeffs,
        })
    }

    pub fn lattice(&self) -> &Arc<IntLattice> {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn pair(&self, other: &RationalClass) -> Result<BigRational> {
        if !IntLattice::same(&self.lattice, &other.lattice) {
            return Err(Error::LatticeMismatch);
        }
        let g = self.lattice.gram();
        let mut acc = BigRational::zero();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if g[i][j] != 0 && !b.is_zero() {
                    acc += a * b * BigRational::from_integer(g[i][j].into());
                }
            }
        }
        Ok(acc)
    }

    pub fn square(&self) -> Result<BigRational> {
        self.pair(self)
    }

    pub fn add(&self, other: &RationalClass) -> Result<RationalClass> {
        if !IntLattice::same(&self.lattice, &other.lattice) {
            return Err(Error::LatticeMismatch);
        }
        Ok(RationalClass {
            lattice: Arc::clone(&self.lattice),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, k: &BigRational) -> RationalClass {
        RationalClass {
            lattice: Arc::clone(&self.lattice),
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
        }
    }

    /// The integral class, if every coefficient is an integer.
    pub fn to_integral(&self) -> Option<HomClass> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None })
            .collect::<Option<Vec<_>>>()?;
        Some(HomClass {
            lattice: Arc::clone(&self.lattice),
            coeffs,
        })
    }
}

impl fmt::Display for RationalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, label) in self.coeffs.iter().zip(self.lattice.labels()) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let coeff = if mag.is_one() {
                String::new()
            } else if mag.is_integer() {
                mag.to_string()
            } else {
                format!("({mag})")
            };
            write_term(f, first, &coeff, c.is_negative(), label)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Intersection pairing `a^T G b`.
pub fn pair(a: &HomClass, b: &HomClass) -> Result<i64> {
    if !a.same_lattice(b) {
        return Err(Error::LatticeMismatch);
    }
    let g = a.lattice.gram();
    let mut acc: i128 = 0;
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let row = &g[i];
        let mut inner: i128 = 0;
        for (j, &bj) in b.coeffs.iter().enumerate() {
            if bj != 0 && row[j] != 0 {
                inner += row[j] as i128 * bj as i128;
            }
        }
        acc = acc
            .checked_add(inner.checked_mul(ai as i128).ok_or(Error::Overflow)?)
            .ok_or(Error::Overflow)?;
    }
    i64::try_from(acc).map_err(|_| Error::Overflow)
}

pub fn square(a: &HomClass) -> Result<i64> {
    pair(a, a)
}

/// Matrix of pairwise intersections.
pub fn gram_of(classes: &[HomClass]) -> Result<Vec<Vec<i64>>> {
    classes
        .iter()
        .map(|a| classes.iter().map(|b| pair(a, b)).collect())
        .collect()
}

/// Row `i` lists `pair(classes[i], generator_j)` over all generators.
fn pairing_rows(lattice: &IntLattice, classes: &[HomClass]) -> Vec<Vec<BigInt>> {
    let g = lattice.gram();
    classes
        .iter()
        .map(|c| {
            (0..lattice.rank())
                .map(|j| {
                    c.coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, &ci)| BigInt::from(ci) * g[i][j])
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Saturated integer basis of `{x : pair(x, c) = 0 for all c in classes}`,
/// returned in Hermite normal form.
pub fn orthogonal_complement(lattice: &Arc<IntLattice>, classes: &[HomClass]) -> Result<Vec<HomClass>> {
    for c in classes {
        if !IntLattice::same(lattice, &c.lattice) {
            return Err(Error::LatticeMismatch);
        }
    }
    let rows = pairing_rows(lattice, classes);
    linalg::integer_kernel(&rows, lattice.rank())
        .iter()
        .map(|v| lattice.from_coeffs(linalg::to_i64_vec(v)?))
        .collect()
}

/// Rational coordinates of `target` in `basis`. The result lives in the
/// lattice spanned by `basis` (labels `b0, b1, ...`), so pairings of the
/// returned class use the restricted form.
pub fn express_in_basis(target: &HomClass, basis: &[HomClass]) -> Result<RationalClass> {
    express_in_labeled_basis(target, basis, None)
}

pub fn express_in_labeled_basis(
    target: &HomClass,
    basis: &[HomClass],
    labels: Option<Vec<String>>,
) -> Result<RationalClass> {
    for b in basis {
        if !target.same_lattice(b) {
            return Err(Error::LatticeMismatch);
        }
    }
    let m = basis.len();
    let r = target.lattice.rank();
    // Columns are basis vectors; last column is the target.
    let mut rows: Vec<Vec<BigRational>> = (0..r)
        .map(|i| {
            let mut row: Vec<BigRational> = basis
                .iter()
                .map(|b| BigRational::from_integer(b.coeffs[i].into()))
                .collect();
            row.push(BigRational::from_integer(target.coeffs[i].into()));
            row
        })
        .collect();
    let pivots = linalg::rref(&mut rows, m + 1);
    if pivots.contains(&m) {
        return Err(Error::NotInSpan);
    }
    if pivots.len() < m {
        return Err(Error::DependentBasis);
    }
    let coeffs = (0..m).map(|k| rows[k][m].clone()).collect();
    let span = IntLattice::spanned_by(basis, labels)?;
    RationalClass::new(&span, coeffs)
}

/// Expands coordinates back into the ambient lattice: `sum c_i basis_i`.
pub fn expand(coords: &RationalClass, basis: &[HomClass]) -> Result<RationalClass> {
    let first = basis
        .first()
        .ok_or_else(|| Error::precondition("empty basis"))?;
    if coords.coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: coords.coeffs.len(),
        });
    }
    let r = first.lattice.rank();
    let mut out = vec![BigRational::zero(); r];
    for (c, b) in coords.coeffs.iter().zip(basis) {
        if !b.same_lattice(first) {
            return Err(Error::LatticeMismatch);
        }
        for (o, &bi) in out.iter_mut().zip(&b.coeffs) {
            *o += c * BigRational::from_integer(bi.into());
        }
    }
    RationalClass::new(&first.lattice, out)
}

/// Whether `vectors` form a Z-basis of the lattice spanned by `reference`.
pub fn same_integer_span(vectors: &[HomClass], reference: &[HomClass]) -> Result<bool> {
    if vectors.len() != reference.len() {
        return Ok(false);
    }
    for v in vectors {
        match express_in_basis(v, reference) {
            Ok(c) if c.to_integral().is_some() => {}
            Ok(_) | Err(Error::NotInSpan) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    let mut change = Vec::with_capacity(vectors.len());
    for v in vectors {
        let c = express_in_basis(v, reference)?;
        change.push(
            c.coeffs
                .iter()
                .map(|x| x.to_integer())
                .collect::<Vec<BigInt>>(),
        );
    }
    Ok(linalg::determinant(&change).abs().is_one())
}

/// Every class `x` with `|x_i| <= coeff_bound`, `pair(x, v) = k` for each
/// `(v, k)` constraint, and `square(x) = square_target`.
///
/// The linear constraints are brought to reduced echelon form first, and only
/// the free coordinates are enumerated; pivot coordinates are solved for and
/// kept when integral and inside the box. Output is sorted by coefficients.
/// With `up_to_sign`, only one of `x` and `-x` is kept (the one whose first
/// nonzero coefficient is positive).
pub fn solve_class(
    lattice: &Arc<IntLattice>,
    linear_constraints: &[(HomClass, i64)],
    square_target: i64,
    coeff_bound: i64,
    up_to_sign: bool,
) -> Result<Vec<HomClass>> {
    if coeff_bound < 0 {
        return Err(Error::precondition("coeff_bound must be nonnegative"));
    }
    let r = lattice.rank();
    let classes: Vec<HomClass> = linear_constraints.iter().map(|(v, _)| v.clone()).collect();
    for c in &classes {
        if !IntLattice::same(lattice, &c.lattice) {
            return Err(Error::LatticeMismatch);
        }
    }
    let mut rows = linalg::rational_rows(&pairing_rows(lattice, &classes));
    for (row, (_, k)) in rows.iter_mut().zip(linear_constraints) {
        row.push(BigRational::from_integer((*k).into()));
    }
    let pivots = linalg::rref(&mut rows, r + 1);
    if pivots.contains(&r) {
        return Ok(Vec::new());
    }
    let free: Vec<usize> = (0..r).filter(|c| !pivots.contains(c)).collect();

    // Each pivot row, scaled to integers: den * x_p = rhs - sum coef_f * x_f.
    struct PivotRow {
        col: usize,
        den: i128,
        rhs: i128,
        coef: Vec<i128>,
    }
    let mut pivot_rows = Vec::with_capacity(pivots.len());
    for (row, &col) in rows.iter().zip(&pivots) {
        let den = free
            .iter()
            .map(|&f| row[f].denom().clone())
            .chain(std::iter::once(row[r].denom().clone()))
            .fold(BigInt::one(), num_integer::lcm);
        let scale = BigRational::from_integer(den.clone());
        let as_i128 = |q: &BigRational| -> Result<i128> {
            (q * &scale).to_integer().to_i128().ok_or(Error::Overflow)
        };
        pivot_rows.push(PivotRow {
            col,
            den: den.to_i128().ok_or(Error::Overflow)?,
            rhs: as_i128(&row[r])?,
            coef: free.iter().map(|&f| as_i128(&row[f])).collect::<Result<_>>()?,
        });
    }

    let g = lattice.gram();
    let mut solutions: Vec<Vec<i64>> = Vec::new();
    let mut assignment = vec![-coeff_bound; free.len()];
    let mut x = vec![0i64; r];
    'outer: loop {
        for (slot, &f) in free.iter().enumerate() {
            x[f] = assignment[slot];
        }
        let mut ok = true;
        for p in &pivot_rows {
            let mut num = p.rhs;
            for (c, &f) in p.coef.iter().zip(&free) {
                num -= c * x[f] as i128;
            }
            if num % p.den != 0 {
                ok = false;
                break;
            }
            let v = num / p.den;
            if v.abs() > coeff_bound as i128 {
                ok = false;
                break;
            }
            x[p.col] = v as i64;
        }
        if ok {
            let mut sq: i128 = 0;
            for i in 0..r {
                if x[i] == 0 {
                    continue;
                }
                for j in 0..r {
                    sq += x[i] as i128 * g[i][j] as i128 * x[j] as i128;
                }
            }
            if sq == square_target as i128 {
                solutions.push(x.clone());
            }
        }
        // Odometer over the free coordinates.
        for slot in (0..free.len()).rev() {
            if assignment[slot] < coeff_bound {
                assignment[slot] += 1;
                continue 'outer;
            }
            assignment[slot] = -coeff_bound;
        }
        break;
    }

    solutions.sort();
    if up_to_sign {
        let all: HashSet<Vec<i64>> = solutions.iter().cloned().collect();
        solutions.retain(|s| {
            let neg: Vec<i64> = s.iter().map(|v| -v).collect();
            let leading_positive = s.iter().find(|&&v| v != 0).is_none_or(|&v| v > 0);
            leading_positive || !all.contains(&neg)
        });
    }
    solutions
        .into_iter()
        .map(|c| lattice.from_coeffs(c))
        .collect()
}
