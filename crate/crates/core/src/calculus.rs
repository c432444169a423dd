//! Function tables `A → B`, difference operators and functional degree.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::groups::PGroupShape;
use crate::{Degree, Error, GroupElement, Result};

/// Default cap on the domain order accepted by [`fdeg_oracle`].
pub const DEFAULT_ORACLE_CAP: u64 = 1 << 12;

/// A dense table of a function between two p-group shapes, indexed by the
/// mixed-radix index of the domain element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct FunctionTable {
    domain: PGroupShape,
    codomain: PGroupShape,
    // row-major: value of element i occupies [i*k, (i+1)*k), k = codomain arity
    values: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    domain: PGroupShape,
    codomain: PGroupShape,
    values: Vec<GroupElement>,
}

impl TryFrom<TableRepr> for FunctionTable {
    type Error = Error;

    fn try_from(r: TableRepr) -> Result<Self> {
        FunctionTable::new(r.domain, r.codomain, r.values)
    }
}

impl From<FunctionTable> for TableRepr {
    fn from(t: FunctionTable) -> Self {
        let values = (0..t.len()).map(|i| GroupElement(t.value(i).to_vec())).collect();
        TableRepr {
            domain: t.domain,
            codomain: t.codomain,
            values,
        }
    }
}

impl FunctionTable {
    pub fn new(
        domain: PGroupShape,
        codomain: PGroupShape,
        values: Vec<GroupElement>,
    ) -> Result<Self> {
        if values.len() as u64 != domain.order() {
            return Err(Error::input(format!(
                "table has {} values but the domain has order {}",
                values.len(),
                domain.order()
            )));
        }
        let mut flat = Vec::with_capacity(values.len() * codomain.arity());
        for (i, v) in values.iter().enumerate() {
            codomain
                .check(v)
                .map_err(|e| Error::input(format!("values[{i}]: {e}")))?;
            flat.extend_from_slice(&v.0);
        }
        Ok(FunctionTable {
            domain,
            codomain,
            values: flat,
        })
    }

    /// Builds a table from a closure on domain residues. Returned values are
    /// reduced into the codomain.
    pub fn from_fn<F>(domain: PGroupShape, codomain: PGroupShape, mut f: F) -> Result<Self>
    where
        F: FnMut(&[u64]) -> Vec<i64>,
    {
        let k = codomain.arity();
        let mut flat = Vec::with_capacity(domain.order() as usize * k);
        let mut x = vec![0; domain.arity()];
        for i in 0..domain.order() {
            domain.decode_into(i, &mut x);
            let v = f(&x);
            flat.extend(codomain.reduce(&v)?.0);
        }
        Ok(FunctionTable {
            domain,
            codomain,
            values: flat,
        })
    }

    pub(crate) fn from_flat(domain: PGroupShape, codomain: PGroupShape, values: Vec<u64>) -> Self {
        debug_assert_eq!(values.len() as u64, domain.order() * codomain.arity() as u64);
        FunctionTable {
            domain,
            codomain,
            values,
        }
    }

    pub fn zero(domain: PGroupShape, codomain: PGroupShape) -> Self {
        let n = domain.order() as usize * codomain.arity();
        Self::from_flat(domain, codomain, vec![0; n])
    }

    pub fn domain(&self) -> &PGroupShape {
        &self.domain
    }

    pub fn codomain(&self) -> &PGroupShape {
        &self.codomain
    }

    /// Number of table entries (the domain order).
    pub fn len(&self) -> usize {
        self.domain.order() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value at domain index `i`.
    pub fn value(&self, i: usize) -> &[u64] {
        let k = self.codomain.arity();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn value_at(&self, x: &GroupElement) -> Result<GroupElement> {
        let i = self.domain.index(x)?;
        Ok(GroupElement(self.value(i as usize).to_vec()))
    }

    /// Value of the periodic pullback `Z^N → B` at an integer point.
    pub fn periodic_value(&self, x: &[i64]) -> Result<GroupElement> {
        let e = self.domain.reduce(x)?;
        Ok(GroupElement(
            self.value(self.domain.index_unchecked(&e.0) as usize).to_vec(),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    fn same_shapes(&self, other: &FunctionTable) -> Result<()> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::input("function tables have different shapes"));
        }
        Ok(())
    }

    pub fn add(&self, other: &FunctionTable) -> Result<FunctionTable> {
        self.same_shapes(other)?;
        let m = self.codomain.moduli();
        let k = m.len();
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(e, (&a, &b))| (a + b) % m[e % k])
            .collect();
        Ok(Self::from_flat(self.domain.clone(), self.codomain.clone(), values))
    }

    pub fn neg(&self) -> FunctionTable {
        let m = self.codomain.moduli();
        let k = m.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(e, &a)| (m[e % k] - a) % m[e % k])
            .collect();
        Self::from_flat(self.domain.clone(), self.codomain.clone(), values)
    }

    pub fn sub(&self, other: &FunctionTable) -> Result<FunctionTable> {
        self.add(&other.neg())
    }

    /// Composes with the quotient `⊕ Z/p^{β_k} → ⊕ Z/p^{β'_k}`, `β'_k ≤ β_k`.
    pub fn quotient_codomain(&self, betas: &[u32]) -> Result<FunctionTable> {
        if betas.len() != self.codomain.arity() {
            return Err(Error::input("quotient exponents must match the codomain arity"));
        }
        if betas.iter().zip(self.codomain.alphas()).any(|(&b, &a)| b > a) {
            return Err(Error::input("a quotient cannot raise an exponent"));
        }
        let target = PGroupShape::new(self.codomain.p(), betas.to_vec())?;
        let m = target.moduli();
        let k = m.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(e, &a)| a % m[e % k])
            .collect();
        Ok(Self::from_flat(self.domain.clone(), target, values))
    }

    /// Composes with the projection onto codomain coordinate `k`.
    pub fn project(&self, k: usize) -> Result<FunctionTable> {
        let arity = self.codomain.arity();
        if k >= arity {
            return Err(Error::input(format!("codomain coordinate {k} out of range")));
        }
        let target = PGroupShape::cyclic(self.codomain.p(), self.codomain.alphas()[k])?;
        let values = self.values.iter().skip(k).step_by(arity).copied().collect();
        Ok(Self::from_flat(self.domain.clone(), target, values))
    }

    /// `Σ_{x ∈ A} f(x)` in the codomain.
    pub fn integral(&self) -> GroupElement {
        let m = self.codomain.moduli();
        let k = m.len();
        let mut acc = vec![0u64; k];
        for (e, &v) in self.values.iter().enumerate() {
            let c = e % k;
            acc[c] = (acc[c] + v) % m[c];
        }
        GroupElement(acc)
    }

    /// `x ↦ g(x) − f(x)` where `g` is `self` read through the translation `t`.
    fn difference_via(&self, translation: &[usize]) -> FunctionTable {
        let m = self.codomain.moduli();
        let k = m.len();
        let mut out = vec![0u64; self.values.len()];
        for (x, &y) in translation.iter().enumerate() {
            for c in 0..k {
                let a = self.values[y * k + c];
                let b = self.values[x * k + c];
                out[x * k + c] = (a + m[c] - b) % m[c];
            }
        }
        Self::from_flat(self.domain.clone(), self.codomain.clone(), out)
    }

    /// `Δ_a f : x ↦ f(x + a) − f(x)`.
    pub fn delta(&self, a: &GroupElement) -> Result<FunctionTable> {
        self.domain.check(a)?;
        Ok(self.difference_via(&self.domain.translation(&a.0)))
    }

    /// `Δ^n = Δ_1^{n_1} ⋯ Δ_N^{n_N}` with `Δ_i` the shift by the `i`-th
    /// standard generator.
    pub fn delta_multi(&self, n: &[u64]) -> Result<FunctionTable> {
        if n.len() != self.domain.arity() {
            return Err(Error::input(format!(
                "multi-index has {} entries, domain has arity {}",
                n.len(),
                self.domain.arity()
            )));
        }
        let mut f = self.clone();
        for (i, &ni) in n.iter().enumerate() {
            if ni == 0 {
                continue;
            }
            let t = self.domain.unit_translation(i);
            for _ in 0..ni {
                if f.is_zero() {
                    return Ok(f);
                }
                f = f.difference_via(&t);
            }
        }
        Ok(f)
    }

    /// `Δ_a^n f(x) = Σ_{j=0}^n (−1)^{n−j} C(n, j) f(x + j a)`, evaluated
    /// directly from the expansion.
    pub fn delta_power_at(&self, a: &GroupElement, n: u64, x: &GroupElement) -> Result<GroupElement> {
        self.domain.check(a)?;
        self.domain.check(x)?;
        let m = self.codomain.moduli();
        let k = m.len();
        let mut acc = vec![0u64; k];
        let mut point = x.clone();
        let mut binom = BigInt::from(1);
        for j in 0..=n {
            let v = self.value(self.domain.index_unchecked(&point.0) as usize);
            for c in 0..k {
                let coef = (&binom % m[c]).to_u64().expect("reduced");
                let term = (coef as u128 * v[c] as u128 % m[c] as u128) as u64;
                acc[c] = if (n - j).is_multiple_of(2) {
                    (acc[c] + term) % m[c]
                } else {
                    (acc[c] + m[c] - term) % m[c]
                };
            }
            point = self.domain.add(&point, a)?;
            binom = binom * (n - j) / (j + 1);
        }
        Ok(GroupElement(acc))
    }

    fn require_single_prime(&self) -> Result<()> {
        if self.domain.p() != self.codomain.p() {
            return Err(Error::input(format!(
                "domain is a {}-group but codomain is a {}-group; the functional degree is only finite for a single prime",
                self.domain.p(),
                self.codomain.p()
            )));
        }
        Ok(())
    }

    /// Per-coordinate caps `δ_p((α_i), max β)` on the partial degrees.
    pub fn partial_caps(&self) -> Vec<u64> {
        let beta = self.codomain.max_alpha();
        self.domain
            .alphas()
            .iter()
            .map(|&a| delta_p_bound(self.domain.p(), &[a], beta))
            .collect()
    }

    /// `δ_p(α, β)` for this table's shapes: the largest functional degree of
    /// any function with these domain and codomain shapes.
    pub fn degree_bound(&self) -> u64 {
        delta_p_bound(
            self.domain.p(),
            self.domain.alphas(),
            self.codomain.max_alpha(),
        )
    }
}

/// `δ_p(α, β) = Σ_i (p^{α_i} − 1) + (β − 1)(p − 1) p^{max α − 1}`.
pub fn delta_p_bound(p: u64, alphas: &[u32], beta: u32) -> u64 {
    assert!(beta >= 1, "beta must be positive");
    let head: u64 = alphas.iter().map(|&a| p.pow(a) - 1).sum();
    let amax = alphas.iter().copied().max().expect("nonempty alphas");
    head + (beta as u64 - 1) * (p - 1) * p.pow(amax - 1)
}

/// Functional degree: the largest `|n|` with `Δ^n f ≠ 0`, searched over the
/// box `n_i ≤ cap_i`. Nonzeroness is tested on the whole table.
pub fn fdeg(f: &FunctionTable) -> Result<Degree> {
    f.require_single_prime()?;
    if f.is_zero() {
        return Ok(Degree::NegInfinity);
    }
    if f.codomain.is_elementary() {
        return Ok(fdeg_exponent_p(f));
    }
    fdeg_by_search(f)
}

/// Codomain of exponent `p`: `f = Σ_n Δ^n f(0) C(x, n)` over the box
/// `n_i < p^{α_i}`, so the degree is the largest `|n|` with `Δ^n f(0) ≠ 0`.
fn fdeg_exponent_p(f: &FunctionTable) -> Degree {
    let p = f.codomain.p();
    let k = f.codomain.arity();
    let mut v = f.values.clone();
    let moduli = f.domain.moduli();
    let strides = f.domain.strides();
    let len = f.len();
    for (&m, &s) in moduli.iter().zip(strides) {
        let (m, s) = (m as usize, s as usize);
        for step in 1..m {
            for x in (0..len).rev() {
                let xi = x / s % m;
                if xi < step {
                    continue;
                }
                let y = x - s;
                for c in 0..k {
                    v[x * k + c] = (v[x * k + c] + p - v[y * k + c]) % p;
                }
            }
        }
    }
    let mut best = Degree::NegInfinity;
    let mut coords = vec![0u64; moduli.len()];
    for x in 0..len {
        if v[x * k..(x + 1) * k].iter().any(|&c| c != 0) {
            f.domain.decode_into(x as u64, &mut coords);
            let total = Degree::Finite(coords.iter().sum());
            if total > best {
                best = total;
            }
        }
    }
    best
}

/// Level-by-level search over multi-indices.
pub(crate) fn fdeg_by_search(f: &FunctionTable) -> Result<Degree> {
    if f.is_zero() {
        return Ok(Degree::NegInfinity);
    }
    let caps = f.partial_caps();
    let arity = caps.len();
    let translations: Vec<Vec<usize>> = (0..arity).map(|i| f.domain.unit_translation(i)).collect();

    // {n : Δ^n f ≠ 0} is downward closed, so every nonzero node at level
    // k+1 is reached from any of its parents at level k.
    let mut level: HashMap<Vec<u64>, FunctionTable> = HashMap::new();
    level.insert(vec![0; arity], f.clone());
    let mut degree = 0;
    loop {
        let mut next: HashMap<Vec<u64>, FunctionTable> = HashMap::new();
        let mut dead: HashSet<Vec<u64>> = HashSet::new();
        for (n, g) in &level {
            for i in 0..arity {
                if n[i] >= caps[i] {
                    continue;
                }
                let mut m = n.clone();
                m[i] += 1;
                if next.contains_key(&m) || dead.contains(&m) {
                    continue;
                }
                let h = g.difference_via(&translations[i]);
                if h.is_zero() {
                    dead.insert(m);
                } else {
                    next.insert(m, h);
                }
            }
        }
        if next.is_empty() {
            return Ok(Degree::Finite(degree));
        }
        degree += 1;
        level = next;
    }
}

/// Definition-based functional degree: the least `d` such that every
/// `(d+1)`-fold composite `Δ_{a_1} ⋯ Δ_{a_{d+1}} f` with `a_k ∈ A` vanishes.
///
/// Works level by level over the set of distinct nonzero tables reachable
/// with `k` difference operators, using every nonzero domain element as a
/// step. Independent of the multi-index search in [`fdeg`].
pub fn fdeg_oracle(f: &FunctionTable, cap: u64) -> Result<Degree> {
    f.require_single_prime()?;
    if f.domain.order() > cap {
        return Err(Error::capacity(
            "definition-based functional degree",
            f.domain.order() as u128,
            cap as u128,
        ));
    }
    if f.is_zero() {
        return Ok(Degree::NegInfinity);
    }
    let steps: Vec<Vec<usize>> = f
        .domain
        .elements()
        .filter(|a| !a.is_zero())
        .map(|a| f.domain.translation(&a.0))
        .collect();
    let mut level: HashSet<Vec<u64>> = HashSet::new();
    level.insert(f.values.clone());
    let mut d = 0;
    loop {
        let mut next = HashSet::new();
        for g in &level {
            let g = FunctionTable::from_flat(f.domain.clone(), f.codomain.clone(), g.clone());
            for t in &steps {
                let h = g.difference_via(t);
                if !h.is_zero() {
                    next.insert(h.values);
                }
            }
        }
        if next.is_empty() {
            return Ok(Degree::Finite(d));
        }
        d += 1;
        level = next;
    }
}

/// `j`-th partial functional degree (0-based `j`): the largest `n` with
/// `Δ_j^n f ≠ 0`.
pub fn partial_fdeg(f: &FunctionTable, j: usize) -> Result<Degree> {
    f.require_single_prime()?;
    if j >= f.domain.arity() {
        return Err(Error::input(format!(
            "coordinate {j} out of range for a domain of arity {}",
            f.domain.arity()
        )));
    }
    if f.is_zero() {
        return Ok(Degree::NegInfinity);
    }
    let cap = f.partial_caps()[j];
    let t = f.domain.unit_translation(j);
    let mut g = f.clone();
    let mut n = 0;
    while n < cap {
        let h = g.difference_via(&t);
        if h.is_zero() {
            break;
        }
        g = h;
        n += 1;
    }
    Ok(Degree::Finite(n))
}
