//! Finite abelian p-groups `⊕_i Z/p^{α_i}` and their elements.
//!
//! Elements are residue vectors `(x_1, …, x_N)` with `0 ≤ x_i < p^{α_i}`.
//! They are indexed in mixed radix with coordinate 1 as the *least*
//! significant digit, so `(1, 0)` has index 1 and `(0, 1)` has index
//! `p^{α_1}`. Every table and file format in the crate depends on this
//! convention.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default cap on the size of any single exhaustive enumeration.
pub const DEFAULT_ELEMENT_CAP: u64 = 1 << 26;

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn checked_pow(p: u64, e: u32) -> Option<u64> {
    p.checked_pow(e)
}

#[derive(Serialize, Deserialize)]
struct ShapeRepr {
    p: u64,
    alphas: Vec<u32>,
}

/// The shape of a finite abelian p-group `⊕_{i=1}^N Z/p^{α_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub struct PGroupShape {
    p: u64,
    alphas: Vec<u32>,
    moduli: Vec<u64>,
    strides: Vec<u64>,
    order: u64,
}

impl TryFrom<ShapeRepr> for PGroupShape {
    type Error = Error;

    fn try_from(r: ShapeRepr) -> Result<Self> {
        PGroupShape::new(r.p, r.alphas)
    }
}

impl From<PGroupShape> for ShapeRepr {
    fn from(s: PGroupShape) -> Self {
        ShapeRepr {
            p: s.p,
            alphas: s.alphas,
        }
    }
}

impl PGroupShape {
    pub fn new(p: u64, alphas: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::input(format!("{p} is not prime")));
        }
        if alphas.is_empty() {
            return Err(Error::input("a shape needs at least one cyclic factor"));
        }
        if let Some(i) = alphas.iter().position(|&a| a == 0) {
            return Err(Error::input(format!("alpha[{i}] must be positive")));
        }
        let mut moduli = Vec::with_capacity(alphas.len());
        let mut strides = Vec::with_capacity(alphas.len());
        let mut order: u64 = 1;
        for &a in &alphas {
            let m = checked_pow(p, a)
                .ok_or_else(|| Error::input(format!("{p}^{a} overflows 64 bits")))?;
            moduli.push(m);
            strides.push(order);
            order = order
                .checked_mul(m)
                .ok_or_else(|| Error::input("group order overflows 64 bits"))?;
        }
        Ok(PGroupShape {
            p,
            alphas,
            moduli,
            strides,
            order,
        })
    }

    /// `Z/p^α`.
    pub fn cyclic(p: u64, alpha: u32) -> Result<Self> {
        Self::new(p, vec![alpha])
    }

    /// `(Z/p)^n`.
    pub fn elementary(p: u64, n: usize) -> Result<Self> {
        Self::new(p, vec![1; n])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn alphas(&self) -> &[u32] {
        &self.alphas
    }

    pub fn arity(&self) -> usize {
        self.alphas.len()
    }

    /// `p^{α_i}` for coordinate `i` (0-based).
    pub fn modulus(&self, i: usize) -> u64 {
        self.moduli[i]
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub(crate) fn strides(&self) -> &[u64] {
        &self.strides
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn max_alpha(&self) -> u32 {
        *self.alphas.iter().max().expect("nonempty")
    }

    /// `e(A) = p^{max α_i}`.
    pub fn exponent(&self) -> u64 {
        self.p.pow(self.max_alpha())
    }

    /// True when every factor is `Z/p`.
    pub fn is_elementary(&self) -> bool {
        self.alphas.iter().all(|&a| a == 1)
    }

    /// `A ⊕ B`, with the coordinates of `self` first.
    pub fn direct_sum(&self, other: &PGroupShape) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::input(format!(
                "cannot form a direct sum of a {}-group and a {}-group",
                self.p, other.p
            )));
        }
        let mut alphas = self.alphas.clone();
        alphas.extend_from_slice(&other.alphas);
        Self::new(self.p, alphas)
    }

    /// `A^n`, variable-major: copy 1 occupies the first `arity` coordinates.
    pub fn power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("power must be at least 1"));
        }
        let alphas = std::iter::repeat_n(self.alphas.iter().copied(), n)
            .flatten()
            .collect();
        Self::new(self.p, alphas)
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.arity()])
    }

    /// Checks that `x` is an element of this shape.
    pub fn check(&self, x: &GroupElement) -> Result<()> {
        if x.0.len() != self.arity() {
            return Err(Error::input(format!(
                "element has {} coordinates, shape has {}",
                x.0.len(),
                self.arity()
            )));
        }
        for (i, (&r, &m)) in x.0.iter().zip(&self.moduli).enumerate() {
            if r >= m {
                return Err(Error::input(format!(
                    "residue {r} at coordinate {i} is out of range [0, {m})"
                )));
            }
        }
        Ok(())
    }

    /// Builds an element, reducing each integer into `[0, p^{α_i})`.
    pub fn reduce(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.arity() {
            return Err(Error::input(format!(
                "expected {} coordinates, got {}",
                self.arity(),
                coords.len()
            )));
        }
        Ok(GroupElement(
            coords
                .iter()
                .zip(&self.moduli)
                .map(|(&c, &m)| c.rem_euclid(m as i64) as u64)
                .collect(),
        ))
    }

    /// Mixed-radix index of `x` with coordinate 1 least significant.
    pub fn index(&self, x: &GroupElement) -> Result<u64> {
        self.check(x)?;
        Ok(self.index_unchecked(&x.0))
    }

    pub(crate) fn index_unchecked(&self, residues: &[u64]) -> u64 {
        residues
            .iter()
            .zip(&self.strides)
            .map(|(&r, &s)| r * s)
            .sum()
    }

    /// Inverse of [`PGroupShape::index`].
    pub fn decode(&self, index: u64) -> Result<GroupElement> {
        if index >= self.order {
            return Err(Error::input(format!(
                "index {index} out of range [0, {})",
                self.order
            )));
        }
        let mut out = vec![0; self.arity()];
        self.decode_into(index, &mut out);
        Ok(GroupElement(out))
    }

    pub(crate) fn decode_into(&self, mut index: u64, out: &mut [u64]) {
        for (slot, &m) in out.iter_mut().zip(&self.moduli) {
            *slot = index % m;
            index /= m;
        }
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(GroupElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.moduli)
                .map(|((&a, &b), &m)| (a + b) % m)
                .collect(),
        ))
    }

    pub fn neg(&self, x: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        Ok(GroupElement(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(&a, &m)| (m - a) % m)
                .collect(),
        ))
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.add(x, &self.neg(y)?)
    }

    /// All elements in index order.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<GroupElement>> {
        self.check_cap(cap)?;
        Ok(self.elements().collect())
    }

    pub(crate) fn check_cap(&self, cap: u64) -> Result<()> {
        if self.order > cap {
            return Err(Error::capacity(
                "enumerating group elements",
                self.order as u128,
                cap as u128,
            ));
        }
        Ok(())
    }

    /// Lazily iterates all elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |i| {
            let mut out = vec![0; self.arity()];
            self.decode_into(i, &mut out);
            GroupElement(out)
        })
    }

    /// For every index `x`, the index of `x + a`.
    pub(crate) fn translation(&self, a: &[u64]) -> Vec<usize> {
        let n = self.order as usize;
        let mut out = Vec::with_capacity(n);
        let mut x = vec![0u64; self.arity()];
        for i in 0..n {
            let mut idx = 0;
            for (k, &xi) in x.iter().enumerate() {
                idx += ((xi + a[k]) % self.moduli[k]) * self.strides[k];
            }
            out.push(idx as usize);
            // increment mixed-radix counter
            for (k, xi) in x.iter_mut().enumerate() {
                *xi += 1;
                if *xi < self.moduli[k] {
                    break;
                }
                *xi = 0;
            }
            debug_assert!(i + 1 < n || x.iter().all(|&v| v == 0));
        }
        out
    }

    /// Translation by the `i`-th standard generator `e_i`.
    pub(crate) fn unit_translation(&self, i: usize) -> Vec<usize> {
        let mut e = vec![0; self.arity()];
        e[i] = 1;
        self.translation(&e)
    }
}

/// An element of some [`PGroupShape`], stored as its residue vector.
/// Serializes as a plain array of residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<u64>);

impl GroupElement {
    pub fn residues(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&r| r == 0)
    }
}

impl From<Vec<u64>> for GroupElement {
    fn from(v: Vec<u64>) -> Self {
        GroupElement(v)
    }
}
