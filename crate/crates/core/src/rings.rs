//! Finite rngs of prime exponent given by structure constants, finite
//! fields, and sparse multivariate polynomials over them.
//!
//! A rng `R` with `(R, +) ≅ (Z/p)^N` is fixed by the products `e_i · e_j`
//! of its basis vectors. Elements are coordinate vectors over `Z/p`, and are
//! indexed exactly like elements of the shape `(Z/p)^N` (coordinate 1 least
//! significant).
//!
//! Polynomial convention for possibly non-commutative, non-unital rngs:
//! terms are keyed by exponent vectors only, a term `c·t^d` evaluates to
//! `c · (x_1^{d_1} ⋯ x_n^{d_n})` with the monomial multiplied left to right
//! in variable order and the coefficient acting from the left. Variables
//! with exponent 0 are skipped, so a constant term contributes `c` itself
//! even without a unit.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::FunctionTable;
use crate::groups::{is_prime, PGroupShape};
use crate::{Degree, Error, Result};

/// Multiplication tables are precomputed for rngs of at most this order.
const TABLE_ORDER_LIMIT: usize = 1024;

/// Structure constants of a rng of exponent `p`: `mult[i][j]` is the
/// coordinate vector of `e_i · e_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteRngSpec {
    pub p: u64,
    pub dim: usize,
    pub mult: Vec<Vec<Vec<u64>>>,
}

/// Outcome of checking the rng axioms on a [`FiniteRngSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngValidation {
    pub associative: bool,
    /// A basis triple `(i, j, k)` with `(e_i e_j) e_k ≠ e_i (e_j e_k)`.
    pub witness: Option<[usize; 3]>,
    pub commutative: bool,
    /// The two-sided multiplicative identity, if there is one.
    pub unit: Option<Vec<u64>>,
    /// Commutative, unital, and every nonzero element invertible.
    pub field: bool,
}

impl RngValidation {
    pub fn unital(&self) -> bool {
        self.unit.is_some()
    }
}

fn mul_coords(spec: &FiniteRngSpec, x: &[u64], y: &[u64]) -> Vec<u64> {
    let p = spec.p;
    let mut out = vec![0u64; spec.dim];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj == 0 {
                continue;
            }
            let c = xi * yj % p;
            for (o, &m) in out.iter_mut().zip(&spec.mult[i][j]) {
                *o = (*o + c * m) % p;
            }
        }
    }
    out
}

fn basis(dim: usize, i: usize) -> Vec<u64> {
    let mut e = vec![0; dim];
    e[i] = 1;
    e
}

fn check_spec_shape(spec: &FiniteRngSpec) -> Result<()> {
    if !is_prime(spec.p) {
        return Err(Error::input(format!("{} is not prime", spec.p)));
    }
    if spec.dim == 0 {
        return Err(Error::input("rng dimension must be positive"));
    }
    if spec.mult.len() != spec.dim {
        return Err(Error::input(format!(
            "mult has {} rows, expected {}",
            spec.mult.len(),
            spec.dim
        )));
    }
    for (i, row) in spec.mult.iter().enumerate() {
        if row.len() != spec.dim {
            return Err(Error::input(format!("mult[{i}] has {} entries", row.len())));
        }
        for (j, v) in row.iter().enumerate() {
            if v.len() != spec.dim {
                return Err(Error::input(format!("mult[{i}][{j}] has {} coordinates", v.len())));
            }
            if let Some(c) = v.iter().find(|&&c| c >= spec.p) {
                return Err(Error::input(format!(
                    "mult[{i}][{j}] has coordinate {c} outside [0, {})",
                    spec.p
                )));
            }
        }
    }
    Ok(())
}

/// Solves `A u = b` over `Z/p` by Gaussian elimination; any solution.
fn solve_mod_p(mut a: Vec<Vec<u64>>, mut b: Vec<u64>, p: u64) -> Option<Vec<u64>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let inv = |x: u64| mod_pow(x, p - 2, p);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, pr);
        b.swap(r, pr);
        let iv = inv(a[r][c]);
        for k in 0..cols {
            a[r][k] = a[r][k] * iv % p;
        }
        b[r] = b[r] * iv % p;
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for k in 0..cols {
                    a[i][k] = (a[i][k] + p * p - f * a[r][k]) % p;
                }
                b[i] = (b[i] + p * p - f * b[r]) % p;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|&v| v != 0) {
        return None;
    }
    let mut u = vec![0; cols];
    for (row, &c) in pivots.iter().enumerate() {
        u[c] = b[row];
    }
    Some(u)
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Rank of a square matrix over `Z/p`.
fn rank_mod_p(mut a: Vec<Vec<u64>>, p: u64) -> usize {
    let n = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..n).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, pr);
        let iv = mod_pow(a[r][c], p - 2, p);
        for i in r + 1..n {
            if a[i][c] != 0 {
                let f = a[i][c] * iv % p;
                for k in c..cols {
                    a[i][k] = (a[i][k] + p * p - f * a[r][k]) % p;
                }
            }
        }
        r += 1;
    }
    r
}

/// Checks associativity on basis triples (enough by bilinearity), and
/// derives the commutativity, unit and field flags.
pub fn validate_rng(spec: &FiniteRngSpec) -> Result<RngValidation> {
    check_spec_shape(spec)?;
    let n = spec.dim;
    let e: Vec<Vec<u64>> = (0..n).map(|i| basis(n, i)).collect();
    let mut witness = None;
    'outer: for i in 0..n {
        for j in 0..n {
            let ij = &spec.mult[i][j];
            for k in 0..n {
                let left = mul_coords(spec, ij, &e[k]);
                let right = mul_coords(spec, &e[i], &spec.mult[j][k]);
                if left != right {
                    witness = Some([i, j, k]);
                    break 'outer;
                }
            }
        }
    }
    let commutative = (0..n).all(|i| (0..n).all(|j| spec.mult[i][j] == spec.mult[j][i]));
    let unit = find_unit(spec);
    let field = witness.is_none() && commutative && unit.is_some() && all_nonzero_invertible(spec);
    Ok(RngValidation {
        associative: witness.is_none(),
        witness,
        commutative,
        unit,
        field,
    })
}

fn find_unit(spec: &FiniteRngSpec) -> Option<Vec<u64>> {
    let n = spec.dim;
    let p = spec.p;
    // order p^n fits the exhaustive search
    if (p as f64).powi(n as i32) <= (1u64 << 16) as f64 {
        let shape = PGroupShape::elementary(p, n).ok()?;
        return shape.elements().map(|u| u.0).find(|u| {
            (0..n).all(|j| {
                let ej = basis(n, j);
                mul_coords(spec, u, &ej) == ej && mul_coords(spec, &ej, u) == ej
            })
        });
    }
    // u·e_j = e_j and e_j·u = e_j are linear in the coordinates of u
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..n {
        for c in 0..n {
            a.push((0..n).map(|i| spec.mult[i][j][c]).collect());
            b.push(u64::from(c == j));
            a.push((0..n).map(|i| spec.mult[j][i][c]).collect());
            b.push(u64::from(c == j));
        }
    }
    solve_mod_p(a, b, p)
}

/// Rngs above this order are not checked for being a field; fields built
/// by [`make_fq`] are known to be fields.
const FIELD_CHECK_LIMIT: u64 = 1 << 16;

/// Every nonzero `x` has left multiplication `y ↦ x y` of full rank.
fn all_nonzero_invertible(spec: &FiniteRngSpec) -> bool {
    let n = spec.dim;
    let Ok(shape) = PGroupShape::elementary(spec.p, n) else {
        return false;
    };
    if shape.order() > FIELD_CHECK_LIMIT {
        return false;
    }
    let ok = shape.elements().skip(1).all(|x| {
        // columns are x·e_j
        let cols: Vec<Vec<u64>> = (0..n).map(|j| mul_coords(spec, &x.0, &basis(n, j))).collect();
        let m: Vec<Vec<u64>> = (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
        rank_mod_p(m, spec.p) == n
    });
    ok
}

/// `Z/p[t]` polynomial `c_0 + c_1 t + …` reduced modulo `m` (monic).
fn poly_rem(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = a.pop().expect("nonempty");
        if lead == 0 {
            continue;
        }
        let shift = a.len() - dm;
        for (k, &mk) in m[..dm].iter().enumerate() {
            a[shift + k] = (a[shift + k] + p * p - lead * mk) % p;
        }
    }
    a
}

fn is_irreducible(m: &[u64], p: u64) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut g: Vec<u64> = (0..d).map(|k| idx / p.pow(k as u32) % p).collect();
            g.push(1);
            if poly_rem(m.to_vec(), &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The lexicographically least monic irreducible polynomial of degree `n`
/// over `Z/p`, comparing coefficient vectors `(c_0, …, c_{n−1})` with the
/// constant coefficient first. Returned with the leading 1 appended.
pub fn irreducible_modulus(p: u64, n: usize) -> Result<Vec<u64>> {
    if !is_prime(p) || n == 0 {
        return Err(Error::input("need a prime p and a positive degree"));
    }
    let count = p
        .checked_pow(n as u32)
        .filter(|&c| c <= crate::groups::DEFAULT_ELEMENT_CAP)
        .ok_or_else(|| Error::capacity("irreducible search", u128::MAX, crate::groups::DEFAULT_ELEMENT_CAP as u128))?;
    for idx in 0..count {
        // constant coefficient is the most significant digit of idx
        let mut m: Vec<u64> = (0..n)
            .map(|k| idx / p.pow((n - 1 - k) as u32) % p)
            .collect();
        m.push(1);
        if is_irreducible(&m, p) {
            return Ok(m);
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// `F_{p^n} = Z/p[t]/(m)` on the basis `1, t, …, t^{n−1}`.
pub fn make_fq(p: u64, n: usize) -> Result<FiniteRngSpec> {
    let m = irreducible_modulus(p, n)?;
    let mult = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut t = vec![0u64; i + j + 1];
                    t[i + j] = 1;
                    let mut r = poly_rem(t, &m, p);
                    r.resize(n, 0);
                    r
                })
                .collect()
        })
        .collect();
    Ok(FiniteRngSpec { p, dim: n, mult })
}

/// How a rng was described in its JSON source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RngDescriptor {
    Field { field: FieldParams },
    Spec(FiniteRngSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u64,
    pub n: usize,
}

/// A validated rng with fast element arithmetic on indices.
#[derive(Debug, Clone)]
pub struct FiniteRng {
    descriptor: RngDescriptor,
    spec: FiniteRngSpec,
    validation: RngValidation,
    shape: PGroupShape,
    mul_table: Option<Vec<u32>>,
}

impl PartialEq for FiniteRng {
    fn eq(&self, other: &Self) -> bool {
        self.descriptor == other.descriptor
    }
}

impl FiniteRng {
    pub fn from_descriptor(descriptor: RngDescriptor) -> Result<Self> {
        let spec = match &descriptor {
            RngDescriptor::Field { field } => make_fq(field.p, field.n)?,
            RngDescriptor::Spec(s) => s.clone(),
        };
        let mut validation = validate_rng(&spec)?;
        if matches!(descriptor, RngDescriptor::Field { .. }) {
            validation.field = true;
        }
        if let Some([i, j, k]) = validation.witness {
            return Err(Error::input(format!(
                "multiplication is not associative: (e{i}·e{j})·e{k} ≠ e{i}·(e{j}·e{k})"
            )));
        }
        let shape = PGroupShape::elementary(spec.p, spec.dim)?;
        let q = shape.order() as usize;
        let mut rng = FiniteRng {
            descriptor,
            spec,
            validation,
            shape,
            mul_table: None,
        };
        if q <= TABLE_ORDER_LIMIT {
            let mut t = Vec::with_capacity(q * q);
            for y in 0..q {
                for x in 0..q {
                    t.push(rng.mul_slow(x, y) as u32);
                }
            }
            rng.mul_table = Some(t);
        }
        Ok(rng)
    }

    pub fn from_spec(spec: FiniteRngSpec) -> Result<Self> {
        Self::from_descriptor(RngDescriptor::Spec(spec))
    }

    pub fn field(p: u64, n: usize) -> Result<Self> {
        Self::from_descriptor(RngDescriptor::Field {
            field: FieldParams { p, n },
        })
    }

    pub fn descriptor(&self) -> &RngDescriptor {
        &self.descriptor
    }

    pub fn spec(&self) -> &FiniteRngSpec {
        &self.spec
    }

    pub fn validation(&self) -> &RngValidation {
        &self.validation
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// `|R| = p^N`.
    pub fn order(&self) -> usize {
        self.shape.order() as usize
    }

    /// `(R, +)` as a p-group shape.
    pub fn additive_shape(&self) -> &PGroupShape {
        &self.shape
    }

    pub fn is_commutative(&self) -> bool {
        self.validation.commutative
    }

    pub fn is_field(&self) -> bool {
        self.validation.field
    }

    pub fn coords(&self, x: usize) -> Vec<u64> {
        let mut out = vec![0; self.dim()];
        self.shape.decode_into(x as u64, &mut out);
        out
    }

    pub fn index(&self, coords: &[u64]) -> Result<usize> {
        Ok(self.shape.index(&crate::GroupElement(coords.to_vec()))? as usize)
    }

    pub fn add(&self, x: usize, y: usize) -> usize {
        let p = self.p() as usize;
        let mut out = 0;
        let mut stride = 1;
        let (mut x, mut y) = (x, y);
        for _ in 0..self.dim() {
            out += ((x % p + y % p) % p) * stride;
            x /= p;
            y /= p;
            stride *= p;
        }
        out
    }

    fn mul_slow(&self, x: usize, y: usize) -> usize {
        let c = mul_coords(&self.spec, &self.coords(x), &self.coords(y));
        self.shape.index_unchecked(&c) as usize
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        match &self.mul_table {
            Some(t) => t[y * self.order() + x] as usize,
            None => self.mul_slow(x, y),
        }
    }

    /// `x^d` for `d ≥ 1`.
    pub fn pow(&self, x: usize, d: u32) -> usize {
        debug_assert!(d >= 1);
        let mut base = x;
        let mut e = d;
        let mut acc: Option<usize> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base,
                    Some(a) => self.mul(a, base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc.expect("d >= 1")
    }
}

/// `σ_p(d)`: the digit sum of `d` in base `p`.
pub fn p_weight(mut d: u64, p: u64) -> u64 {
    let mut s = 0;
    while d > 0 {
        s += d % p;
        d /= p;
    }
    s
}

/// A nonzero monomial term `c · t_1^{d_1} ⋯ t_n^{d_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Vec<u64>,
    pub exps: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    ring: RngDescriptor,
    vars: usize,
    terms: Vec<Term>,
}

/// A sparse polynomial over a [`FiniteRng`], with no zero coefficients and
/// no repeated exponent vectors. Terms are kept sorted by exponent vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct SparsePoly {
    ring: Arc<FiniteRng>,
    vars: usize,
    // exponent vector -> coefficient index
    terms: BTreeMap<Vec<u32>, usize>,
}

impl TryFrom<PolyRepr> for SparsePoly {
    type Error = Error;

    fn try_from(r: PolyRepr) -> Result<Self> {
        let ring = Arc::new(FiniteRng::from_descriptor(r.ring)?);
        SparsePoly::new(ring, r.vars, r.terms)
    }
}

impl From<SparsePoly> for PolyRepr {
    fn from(f: SparsePoly) -> Self {
        PolyRepr {
            ring: f.ring.descriptor.clone(),
            vars: f.vars,
            terms: f.terms(),
        }
    }
}

impl SparsePoly {
    /// Builds a polynomial, combining like terms and dropping zeros.
    pub fn new(ring: Arc<FiniteRng>, vars: usize, terms: Vec<Term>) -> Result<Self> {
        let mut out = SparsePoly::zero(ring, vars);
        for (i, t) in terms.into_iter().enumerate() {
            if t.exps.len() != vars {
                return Err(Error::input(format!(
                    "terms[{i}] has {} exponents, polynomial has {vars} variables",
                    t.exps.len()
                )));
            }
            let c = out
                .ring
                .index(&t.coeff)
                .map_err(|e| Error::input(format!("terms[{i}].coeff: {e}")))?;
            out.add_term(t.exps, c);
        }
        Ok(out)
    }

    pub fn zero(ring: Arc<FiniteRng>, vars: usize) -> Self {
        SparsePoly {
            ring,
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub(crate) fn add_term(&mut self, exps: Vec<u32>, c: usize) {
        let sum = match self.terms.get(&exps) {
            Some(&old) => self.ring.add(old, c),
            None => c,
        };
        if sum == 0 {
            self.terms.remove(&exps);
        } else {
            self.terms.insert(exps, sum);
        }
    }

    pub fn ring(&self) -> &Arc<FiniteRng> {
        &self.ring
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> Vec<Term> {
        self.terms
            .iter()
            .map(|(e, &c)| Term {
                coeff: self.ring.coords(c),
                exps: e.clone(),
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `E(f)(x)` on element indices.
    pub fn eval_index(&self, x: &[usize]) -> usize {
        let r = &self.ring;
        let mut acc = 0;
        for (exps, &c) in &self.terms {
            let mut mono: Option<usize> = None;
            for (&xi, &d) in x.iter().zip(exps) {
                if d == 0 {
                    continue;
                }
                let f = r.pow(xi, d);
                mono = Some(match mono {
                    None => f,
                    Some(m) => r.mul(m, f),
                });
            }
            let term = match mono {
                None => c,
                Some(m) => r.mul(c, m),
            };
            acc = r.add(acc, term);
        }
        acc
    }

    /// `E(f)(x)` on coordinate vectors.
    pub fn eval(&self, x: &[Vec<u64>]) -> Result<Vec<u64>> {
        if x.len() != self.vars {
            return Err(Error::input(format!(
                "point has {} entries, polynomial has {} variables",
                x.len(),
                self.vars
            )));
        }
        let idx = x
            .iter()
            .map(|c| self.ring.index(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.ring.coords(self.eval_index(&idx)))
    }

    /// Total degree; `−∞` for the zero polynomial.
    pub fn degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&d| d as u64).sum())
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    /// `σ_p(f)`: the largest `Σ_i σ_p(d_i)` over the terms.
    pub fn p_weight_degree(&self) -> Degree {
        let p = self.ring.p();
        self.terms
            .keys()
            .map(|e| e.iter().map(|&d| p_weight(d as u64, p)).sum())
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    /// The reduced representative over `F_q` using `x^q = x`: each exponent
    /// `d > 0` becomes `((d − 1) mod (q − 1)) + 1`.
    pub fn reduce_over_fq(&self) -> Result<SparsePoly> {
        if !self.ring.is_field() {
            return Err(Error::input("reduction via x^q = x needs a field"));
        }
        let q1 = self.ring.order() as u32 - 1;
        let mut out = SparsePoly::zero(self.ring.clone(), self.vars);
        for (exps, &c) in &self.terms {
            let reduced = exps
                .iter()
                .map(|&d| if d == 0 { 0 } else { (d - 1) % q1 + 1 })
                .collect();
            out.add_term(reduced, c);
        }
        Ok(out)
    }

    /// Domain order `|R|^n` of the associated function.
    pub fn domain_order(&self) -> u128 {
        (self.ring.order() as u128).pow(self.vars as u32)
    }

    /// The table of `E(f)` on `R^n ≅ (Z/p)^{N·n}`, variable-major: the
    /// coordinates of `x_1` come first.
    pub fn to_table(&self, cap: u64) -> Result<FunctionTable> {
        let q = self.ring.order();
        let size = self.domain_order();
        if size > cap as u128 {
            return Err(Error::capacity("polynomial function table", size, cap as u128));
        }
        let base = self.ring.additive_shape();
        let domain = base.power(self.vars.max(1))?;
        let codomain = base.clone();
        let n = self.vars;
        let mut values = Vec::with_capacity(size as usize * self.ring.dim());
        let mut x = vec![0usize; n];
        for i in 0..size as usize {
            let mut r = i;
            for xi in x.iter_mut() {
                *xi = r % q;
                r /= q;
            }
            values.extend(self.ring.coords(self.eval_index(&x)));
        }
        if n == 0 {
            // a polynomial in no variables is a constant on a one-point
            // domain; represent it on R with a constant table instead
            let v = values.clone();
            values = v.iter().cycle().take(q * self.ring.dim()).copied().collect();
        }
        Ok(FunctionTable::from_flat(domain, codomain, values))
    }
}

/// `(x, y) ↦ f(x) · g(y)` on `A_1 ⊕ A_2`, for tables valued in `R`.
pub fn tensor_tables(ring: &FiniteRng, f: &FunctionTable, g: &FunctionTable) -> Result<FunctionTable> {
    let shape = ring.additive_shape();
    if f.codomain() != shape || g.codomain() != shape {
        return Err(Error::input("both tables must be valued in the rng"));
    }
    let domain = f.domain().direct_sum(g.domain())?;
    let k = ring.dim();
    let mut values = Vec::with_capacity(f.len() * g.len() * k);
    let fi: Vec<usize> = (0..f.len())
        .map(|i| shape.index_unchecked(f.value(i)) as usize)
        .collect();
    for j in 0..g.len() {
        let gj = shape.index_unchecked(g.value(j)) as usize;
        for &a in &fi {
            values.extend(ring.coords(ring.mul(a, gj)));
        }
    }
    Ok(FunctionTable::from_flat(domain, shape.clone(), values))
}

/// A random polynomial with up to `max_terms` terms of total degree at most
/// `max_degree`; may come out zero after combining terms.
pub fn random_poly<R: Rng>(
    ring: &Arc<FiniteRng>,
    vars: usize,
    max_terms: usize,
    max_degree: u32,
    rng: &mut R,
) -> SparsePoly {
    let mut f = SparsePoly::zero(ring.clone(), vars);
    let terms = rng.gen_range(1..=max_terms.max(1));
    for _ in 0..terms {
        let total = rng.gen_range(0..=max_degree);
        let mut exps = vec![0u32; vars];
        if vars > 0 {
            for _ in 0..total {
                exps[rng.gen_range(0..vars)] += 1;
            }
        }
        let c = rng.gen_range(1..ring.order());
        f.add_term(exps, c);
    }
    f
}

/// Rejection-samples an associative commutative rng of the given dimension.
/// Structure constants are sparse so that associativity is not too rare.
pub fn random_commutative_rng<R: Rng>(
    p: u64,
    dim: usize,
    rng: &mut R,
    retries: usize,
) -> Result<FiniteRngSpec> {
    if !is_prime(p) || dim == 0 {
        return Err(Error::input("need a prime p and a positive dimension"));
    }
    for _ in 0..retries {
        let density = rng.gen_range(0.1..0.6);
        let mut mult = vec![vec![vec![0u64; dim]; dim]; dim];
        for i in 0..dim {
            for j in i..dim {
                let v: Vec<u64> = (0..dim)
                    .map(|_| {
                        if rng.gen_bool(density) {
                            rng.gen_range(1..p)
                        } else {
                            0
                        }
                    })
                    .collect();
                mult[i][j] = v.clone();
                mult[j][i] = v;
            }
        }
        let spec = FiniteRngSpec { p, dim, mult };
        let v = validate_rng(&spec)?;
        if v.associative && v.commutative {
            return Ok(spec);
        }
    }
    Err(Error::Generation(format!(
        "no associative commutative rng of dimension {dim} over Z/{p} within {retries} attempts"
    )))
}
