//! Binomial-series representations of periodic functions `Z^N → B`.
//!
//! Every function pulled back from `⊕ Z/p^{α_i} → B` (same `p`) can be
//! written uniquely as
//!
//! ```text
//! F(x) = Σ_n C(x_1, n_1) ⋯ C(x_N, n_N) · a_n,    a_n = Δ^n F(0),
//! ```
//!
//! with finitely many nonzero `a_n`. This module computes those
//! coefficients, evaluates series anywhere on `Z^N` (negative points
//! included), lifts coefficients to the integers and audits the p-power
//! divisibility the lifted coefficients must satisfy.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::calculus::{delta_p_bound, FunctionTable};
use crate::groups::PGroupShape;
use crate::{ord_p, Degree, Error, Result, Valuation};

/// `C(x, n)` for any integer `x`; `C(x, 0) = 1` and `C(x, n) = 0` for `n < 0`.
pub fn binom_int(x: i64, n: i64) -> BigInt {
    if n < 0 {
        return BigInt::zero();
    }
    binom_big(&BigInt::from(x), n as u64)
}

pub fn binom_big(x: &BigInt, n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 0..n {
        // acc = C(x, k) here, so acc * (x - k) is divisible by k + 1
        acc = acc * (x - k) / (k + 1);
    }
    acc
}

/// `C(x, 0), …, C(x, max)`.
fn binom_row(x: i64, max: u64) -> Vec<BigInt> {
    let x = BigInt::from(x);
    let mut row = Vec::with_capacity(max as usize + 1);
    let mut acc = BigInt::one();
    row.push(acc.clone());
    for k in 0..max {
        acc = acc * (&x - k) / (k + 1);
        row.push(acc.clone());
    }
    row
}

/// A multi-index in `N^N`, ordered graded-lexicographically: first by
/// `|n|`, then lexicographically with coordinate 1 most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u64>);

impl MultiIndex {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Where the coefficients of a series live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesCodomain {
    /// `Z^width`; scalar series have width 1.
    Integers { width: usize },
    PGroup(PGroupShape),
}

impl SeriesCodomain {
    pub fn width(&self) -> usize {
        match self {
            SeriesCodomain::Integers { width } => *width,
            SeriesCodomain::PGroup(s) => s.arity(),
        }
    }

    fn normalize(&self, v: &mut [BigInt]) {
        if let SeriesCodomain::PGroup(s) = self {
            for (c, m) in v.iter_mut().zip(s.moduli()) {
                *c = c.mod_floor(&BigInt::from(*m));
            }
        }
    }
}

/// A finitely supported map `N^N → codomain`, stored without zero
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct BinomialSeries {
    arity: usize,
    codomain: SeriesCodomain,
    terms: BTreeMap<MultiIndex, Vec<BigInt>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CodomainRepr {
    Tag(String),
    Shape(PGroupShape),
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    n: Vec<u64>,
    #[serde(with = "crate::ext::big_json::vec")]
    a: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    arity: usize,
    codomain: CodomainRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<usize>,
    terms: Vec<TermRepr>,
}

impl TryFrom<SeriesRepr> for BinomialSeries {
    type Error = Error;

    fn try_from(r: SeriesRepr) -> Result<Self> {
        let codomain = match r.codomain {
            CodomainRepr::Tag(t) if t == "Z" => SeriesCodomain::Integers {
                width: r
                    .width
                    .or_else(|| r.terms.first().map(|t| t.a.len()))
                    .unwrap_or(1),
            },
            CodomainRepr::Tag(t) => {
                return Err(Error::input(format!("unknown series codomain {t:?}")))
            }
            CodomainRepr::Shape(s) => SeriesCodomain::PGroup(s),
        };
        let mut s = BinomialSeries::zero(r.arity, codomain);
        for (i, t) in r.terms.into_iter().enumerate() {
            s.insert(MultiIndex(t.n), t.a)
                .map_err(|e| Error::input(format!("terms[{i}]: {e}")))?;
        }
        Ok(s)
    }
}

impl From<BinomialSeries> for SeriesRepr {
    fn from(s: BinomialSeries) -> Self {
        let (codomain, width) = match s.codomain {
            SeriesCodomain::Integers { width } => {
                (CodomainRepr::Tag("Z".into()), (width != 1).then_some(width))
            }
            SeriesCodomain::PGroup(shape) => (CodomainRepr::Shape(shape), None),
        };
        SeriesRepr {
            arity: s.arity,
            codomain,
            width,
            terms: s
                .terms
                .into_iter()
                .map(|(n, a)| TermRepr { n: n.0, a })
                .collect(),
        }
    }
}

impl BinomialSeries {
    pub fn zero(arity: usize, codomain: SeriesCodomain) -> Self {
        BinomialSeries {
            arity,
            codomain,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `a` to the coefficient at `n`. Zero results are dropped.
    pub fn insert(&mut self, n: MultiIndex, mut a: Vec<BigInt>) -> Result<()> {
        if n.0.len() != self.arity {
            return Err(Error::input(format!(
                "multi-index has {} entries, series has arity {}",
                n.0.len(),
                self.arity
            )));
        }
        if a.len() != self.codomain.width() {
            return Err(Error::input(format!(
                "coefficient has {} coordinates, codomain has {}",
                a.len(),
                self.codomain.width()
            )));
        }
        if let Some(old) = self.terms.remove(&n) {
            for (x, y) in a.iter_mut().zip(old) {
                *x += y;
            }
        }
        self.codomain.normalize(&mut a);
        if a.iter().any(|c| !c.is_zero()) {
            self.terms.insert(n, a);
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn codomain(&self) -> &SeriesCodomain {
        &self.codomain
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Vec<BigInt>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, n: &[u64]) -> Option<&Vec<BigInt>> {
        self.terms.get(&MultiIndex(n.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `max |n|` over the support; `−∞` for the empty series.
    pub fn degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|n| n.total())
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    /// `Σ_n C(x_1, n_1) ⋯ C(x_N, n_N) a_n` at an arbitrary integer point.
    pub fn evaluate(&self, x: &[i64]) -> Result<Vec<BigInt>> {
        if x.len() != self.arity {
            return Err(Error::input(format!(
                "point has {} coordinates, series has arity {}",
                x.len(),
                self.arity
            )));
        }
        let width = self.codomain.width();
        let mut acc = vec![BigInt::zero(); width];
        if self.terms.is_empty() {
            return Ok(acc);
        }
        let max_n: Vec<u64> = (0..self.arity)
            .map(|i| self.terms.keys().map(|n| n.0[i]).max().unwrap_or(0))
            .collect();
        let rows: Vec<Vec<BigInt>> = x
            .iter()
            .zip(&max_n)
            .map(|(&xi, &m)| binom_row(xi, m))
            .collect();
        match &self.codomain {
            SeriesCodomain::Integers { .. } => {
                for (n, a) in &self.terms {
                    let mut prod = BigInt::one();
                    for (i, &ni) in n.0.iter().enumerate() {
                        prod *= &rows[i][ni as usize];
                        if prod.is_zero() {
                            break;
                        }
                    }
                    if prod.is_zero() {
                        continue;
                    }
                    for (s, c) in acc.iter_mut().zip(a) {
                        *s += &prod * c;
                    }
                }
            }
            SeriesCodomain::PGroup(shape) => {
                // all arithmetic modulo the codomain exponent
                let e = shape.exponent();
                let eb = BigInt::from(e);
                let small: Vec<Vec<u64>> = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|b| b.mod_floor(&eb).to_u64().expect("reduced"))
                            .collect()
                    })
                    .collect();
                let mut sums = vec![0u128; width];
                for (n, a) in &self.terms {
                    let mut prod: u128 = 1;
                    for (i, &ni) in n.0.iter().enumerate() {
                        prod = prod * small[i][ni as usize] as u128 % e as u128;
                    }
                    if prod == 0 {
                        continue;
                    }
                    for (s, c) in sums.iter_mut().zip(a) {
                        let c = c.to_u64().expect("normalized coefficient") as u128;
                        *s = (*s + prod * c) % e as u128;
                    }
                }
                for ((s, out), m) in sums.iter().zip(acc.iter_mut()).zip(shape.moduli()) {
                    *out = BigInt::from(*s % *m as u128);
                }
            }
        }
        Ok(acc)
    }

    /// Reduces every coefficient into `target` (a quotient of the current
    /// codomain, or any p-group when the coefficients are integers).
    pub fn reduce(&self, target: &PGroupShape) -> Result<BinomialSeries> {
        if target.arity() != self.codomain.width() {
            return Err(Error::input("reduction target must match the coefficient width"));
        }
        if let SeriesCodomain::PGroup(s) = &self.codomain {
            if s.p() != target.p()
                || s.alphas().iter().zip(target.alphas()).any(|(a, b)| b > a)
            {
                return Err(Error::input("reduction target is not a quotient of the codomain"));
            }
        }
        let mut out = BinomialSeries::zero(self.arity, SeriesCodomain::PGroup(target.clone()));
        for (n, a) in &self.terms {
            out.insert(n.clone(), a.clone())?;
        }
        Ok(out)
    }

    /// Evaluates the series on every element of `domain` (residues read as
    /// integers) and returns the resulting table.
    pub fn to_table(&self, domain: &PGroupShape) -> Result<FunctionTable> {
        let codomain = match &self.codomain {
            SeriesCodomain::PGroup(s) => s.clone(),
            SeriesCodomain::Integers { .. } => {
                return Err(Error::input("an integer series has no finite codomain"))
            }
        };
        if domain.arity() != self.arity {
            return Err(Error::input("domain arity must match the series arity"));
        }
        let mut err = None;
        let table = FunctionTable::from_fn(domain.clone(), codomain, |x| {
            let xi: Vec<i64> = x.iter().map(|&v| v as i64).collect();
            match self.evaluate(&xi) {
                Ok(v) => v.iter().map(|b| b.to_i64().expect("reduced")).collect(),
                Err(e) => {
                    err = Some(e);
                    vec![0; self.codomain.width()]
                }
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(table),
        }
    }
}

/// The fundamental coefficients `a_n = Δ^n F(0)` of the pullback `F` of `f`,
/// for all `n` with `n_i ≤ δ_p((α_i), max β)`.
pub fn fundamental_coefficients(f: &FunctionTable) -> Result<BinomialSeries> {
    let domain = f.domain();
    let codomain = f.codomain();
    if domain.p() != codomain.p() {
        return Err(Error::input(format!(
            "domain is a {}-group but codomain is a {}-group",
            domain.p(),
            codomain.p()
        )));
    }
    let caps = f.partial_caps();
    let dims: Vec<usize> = caps.iter().map(|&c| c as usize + 1).collect();
    let size = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&s| s as u64 <= crate::groups::DEFAULT_ELEMENT_CAP)
        .ok_or_else(|| {
            Error::capacity(
                "fundamental coefficient box",
                dims.iter().map(|&d| d as u128).product(),
                crate::groups::DEFAULT_ELEMENT_CAP as u128,
            )
        })?;
    let k = codomain.arity();
    let moduli = codomain.moduli();

    // F on the box Π [0, cap_i], row-major with coordinate 1 fastest.
    let mut boxed = vec![0u64; size * k];
    let mut point = vec![0u64; dims.len()];
    let mut residues = vec![0u64; dims.len()];
    for b in 0..size {
        let mut r = b;
        for (i, &d) in dims.iter().enumerate() {
            point[i] = (r % d) as u64;
            r /= d;
            residues[i] = point[i] % domain.modulus(i);
        }
        let idx = domain.index_unchecked(&residues) as usize;
        boxed[b * k..(b + 1) * k].copy_from_slice(f.value(idx));
    }

    // Newton forward differences along each axis turn values at 0..=cap
    // into Δ^j at 0.
    let mut stride = 1usize;
    for &d in &dims {
        for base in 0..size {
            if !(base / stride).is_multiple_of(d) {
                continue;
            }
            for level in 1..d {
                for j in (level..d).rev() {
                    let hi = (base + j * stride) * k;
                    let lo = (base + (j - 1) * stride) * k;
                    for c in 0..k {
                        boxed[hi + c] = (boxed[hi + c] + moduli[c] - boxed[lo + c]) % moduli[c];
                    }
                }
            }
        }
        stride *= d;
    }

    let mut series = BinomialSeries::zero(dims.len(), SeriesCodomain::PGroup(codomain.clone()));
    for b in 0..size {
        let v = &boxed[b * k..(b + 1) * k];
        if v.iter().all(|&c| c == 0) {
            continue;
        }
        let mut r = b;
        let n: Vec<u64> = dims
            .iter()
            .map(|&d| {
                let c = (r % d) as u64;
                r /= d;
                c
            })
            .collect();
        series
            .terms
            .insert(MultiIndex(n), v.iter().map(|&c| BigInt::from(c)).collect());
    }
    Ok(series)
}

/// Coordinate-wise proper lift to `Z^k`: every residue goes to its least
/// nonnegative representative, so nonzero coordinates stay nonzero.
pub fn proper_lift(s: &BinomialSeries) -> Result<BinomialSeries> {
    let SeriesCodomain::PGroup(shape) = &s.codomain else {
        return Err(Error::input("only series over a p-group can be lifted"));
    };
    let mut out = BinomialSeries::zero(s.arity, SeriesCodomain::Integers { width: shape.arity() });
    // coefficients are stored normalized, i.e. already in [0, p^β)
    out.terms = s.terms.clone();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftAuditEntry {
    pub n: Vec<u64>,
    #[serde(with = "crate::ext::big_json::vec")]
    pub coefficient: Vec<BigInt>,
    /// `p^h`
    #[serde(with = "crate::ext::big_json")]
    pub required: BigInt,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftAuditLevel {
    pub h: u32,
    /// `δ_p(α, h)`; only indices with `|n|` above it are checked.
    pub threshold: u64,
    pub entries: Vec<LiftAuditEntry>,
}

/// Record of which lifted coefficients above each threshold were checked
/// for divisibility by `p^h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftAudit {
    pub p: u64,
    pub alphas: Vec<u32>,
    pub levels: Vec<LiftAuditLevel>,
}

impl LiftAudit {
    pub fn pass(&self) -> bool {
        self.levels.iter().all(|l| l.entries.iter().all(|e| e.pass))
    }

    pub fn failures(&self) -> impl Iterator<Item = (u32, &LiftAuditEntry)> {
        self.levels
            .iter()
            .flat_map(|l| l.entries.iter().filter(|e| !e.pass).map(move |e| (l.h, e)))
    }

    /// Recomputes every pass flag from the stored values.
    pub fn is_consistent(&self) -> bool {
        self.levels.iter().all(|l| {
            l.entries.iter().all(|e| {
                e.required == BigInt::from(self.p).pow(l.h)
                    && e.pass == e.coefficient.iter().all(|c| (c % &e.required).is_zero())
            })
        })
    }
}

/// For each `h ∈ [1, h_max]` and each support index with
/// `|n| > δ_p(α, h)`, checks that `p^h` divides every coordinate.
pub fn audit_lift_divisibility(
    lift: &BinomialSeries,
    p: u64,
    alphas: &[u32],
    h_max: u32,
) -> Result<LiftAudit> {
    if !matches!(lift.codomain, SeriesCodomain::Integers { .. }) {
        return Err(Error::input("the divisibility audit needs an integer series"));
    }
    if alphas.len() != lift.arity {
        return Err(Error::input("alphas must have one entry per series variable"));
    }
    if !crate::groups::is_prime(p) || alphas.contains(&0) {
        return Err(Error::input("need a prime p and positive alphas"));
    }
    let levels = (1..=h_max)
        .map(|h| {
            let threshold = delta_p_bound(p, alphas, h);
            let required = BigInt::from(p).pow(h);
            let entries = lift
                .terms
                .iter()
                .filter(|(n, _)| n.total() > threshold)
                .map(|(n, a)| LiftAuditEntry {
                    n: n.0.clone(),
                    coefficient: a.clone(),
                    required: required.clone(),
                    pass: a.iter().all(|c| (c % &required).is_zero()),
                })
                .collect();
            LiftAuditLevel {
                h,
                threshold,
                entries,
            }
        })
        .collect();
    Ok(LiftAudit {
        p,
        alphas: alphas.to_vec(),
        levels,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WilsonSum {
    #[serde(with = "crate::ext::big_json")]
    pub sum: BigInt,
    pub valuation: Valuation,
}

/// `Σ_{x ∈ [0, p)^N} s(x)` for a scalar integer series, and its `ord_p`.
pub fn wilson_sum(s: &BinomialSeries, p: u64) -> Result<WilsonSum> {
    if s.codomain != (SeriesCodomain::Integers { width: 1 }) {
        return Err(Error::input("wilson sums need a scalar integer series"));
    }
    if !crate::groups::is_prime(p) {
        return Err(Error::input(format!("{p} is not prime")));
    }
    let points = (p as u128)
        .checked_pow(s.arity as u32)
        .filter(|&n| n <= crate::groups::DEFAULT_ELEMENT_CAP as u128)
        .ok_or_else(|| {
            Error::capacity(
                "wilson sum box",
                (p as f64).powi(s.arity as i32) as u128,
                crate::groups::DEFAULT_ELEMENT_CAP as u128,
            )
        })?;
    let mut sum = BigInt::zero();
    let mut x = vec![0i64; s.arity];
    for _ in 0..points {
        sum += &s.evaluate(&x)?[0];
        for xi in x.iter_mut() {
            *xi += 1;
            if *xi < p as i64 {
                break;
            }
            *xi = 0;
        }
    }
    let valuation = ord_p(&sum, p);
    Ok(WilsonSum { sum, valuation })
}

/// Whether `fdeg < (p − 1)(N − β + 1)`, the hypothesis under which a Wilson
/// sum is divisible by `p^β`.
pub fn wilson_hypothesis(degree: Degree, p: u64, arity: usize, beta: u32) -> bool {
    let rhs = (p as i64 - 1) * (arity as i64 - beta as i64 + 1);
    match degree {
        Degree::NegInfinity => true,
        Degree::Finite(d) => (d as i64) < rhs,
    }
}

/// True when every coefficient of an integer series is divisible by `m`.
pub fn all_divisible(s: &BinomialSeries, m: &BigInt) -> bool {
    s.terms
        .values()
        .all(|a| a.iter().all(|c| (c.abs() % m).is_zero()))
}
