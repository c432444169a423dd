//! Zero-set counting, the lower bounds on `ord_p(#Z)`, instance
//! verification, seeded instance generation, campaigns, and the summation
//! invariant probe.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::binomial::{BinomialSeries, MultiIndex, SeriesCodomain};
use crate::calculus::{fdeg, FunctionTable};
use crate::ext::ord_p_u64;
use crate::groups::{is_prime, PGroupShape, DEFAULT_ELEMENT_CAP};
use crate::rings::{random_commutative_rng, random_poly, FiniteRng, RngDescriptor, SparsePoly, Term};
use crate::{Degree, Error, Result, Valuation};

/// Default cap on `|B|^|A|` for [`sigma_invariant`].
pub const DEFAULT_SIGMA_CAP: u64 = 1 << 20;

const GENERATION_RETRIES: usize = 10_000;

/// Functions `A^N → B_j` given by tables, all on the same domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GroupSystemRepr", into = "GroupSystemRepr")]
pub struct GroupSystem {
    base: PGroupShape,
    power: usize,
    functions: Vec<FunctionTable>,
}

#[derive(Serialize, Deserialize)]
struct GroupSystemRepr {
    base: PGroupShape,
    #[serde(default = "one")]
    power: usize,
    functions: Vec<FunctionTable>,
}

fn one() -> usize {
    1
}

impl TryFrom<GroupSystemRepr> for GroupSystem {
    type Error = Error;

    fn try_from(r: GroupSystemRepr) -> Result<Self> {
        GroupSystem::new(r.base, r.power, r.functions)
    }
}

impl From<GroupSystem> for GroupSystemRepr {
    fn from(s: GroupSystem) -> Self {
        GroupSystemRepr {
            base: s.base,
            power: s.power,
            functions: s.functions,
        }
    }
}

impl GroupSystem {
    pub fn new(base: PGroupShape, power: usize, functions: Vec<FunctionTable>) -> Result<Self> {
        if power == 0 {
            return Err(Error::input("power must be positive"));
        }
        let domain = base.power(power)?;
        for (j, f) in functions.iter().enumerate() {
            if f.domain() != &domain {
                return Err(Error::input(format!(
                    "functions[{j}]: domain does not match base^{power}"
                )));
            }
            if f.codomain().p() != base.p() {
                return Err(Error::input(format!(
                    "functions[{j}]: codomain prime {} differs from {}",
                    f.codomain().p(),
                    base.p()
                )));
            }
            if f.is_zero() {
                return Err(Error::input(format!("functions[{j}] is the zero function")));
            }
        }
        Ok(GroupSystem {
            base,
            power,
            functions,
        })
    }

    pub fn base(&self) -> &PGroupShape {
        &self.base
    }

    pub fn power(&self) -> usize {
        self.power
    }

    pub fn functions(&self) -> &[FunctionTable] {
        &self.functions
    }

    pub fn domain(&self) -> PGroupShape {
        self.base.power(self.power).expect("checked on construction")
    }
}

/// Polynomials in `n` variables over one rng.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RingSystemRepr", into = "RingSystemRepr")]
pub struct RingSystem {
    ring: Arc<FiniteRng>,
    vars: usize,
    polys: Vec<SparsePoly>,
}

#[derive(Serialize, Deserialize)]
struct PolyTerms {
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct RingSystemRepr {
    ring: RngDescriptor,
    vars: usize,
    polys: Vec<PolyTerms>,
}

impl TryFrom<RingSystemRepr> for RingSystem {
    type Error = Error;

    fn try_from(r: RingSystemRepr) -> Result<Self> {
        let ring = Arc::new(FiniteRng::from_descriptor(r.ring)?);
        let polys = r
            .polys
            .into_iter()
            .enumerate()
            .map(|(j, t)| {
                SparsePoly::new(ring.clone(), r.vars, t.terms)
                    .map_err(|e| Error::input(format!("polys[{j}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        RingSystem::new(ring, r.vars, polys)
    }
}

impl From<RingSystem> for RingSystemRepr {
    fn from(s: RingSystem) -> Self {
        RingSystemRepr {
            ring: s.ring.descriptor().clone(),
            vars: s.vars,
            polys: s.polys.iter().map(|f| PolyTerms { terms: f.terms() }).collect(),
        }
    }
}

impl RingSystem {
    pub fn new(ring: Arc<FiniteRng>, vars: usize, polys: Vec<SparsePoly>) -> Result<Self> {
        if vars == 0 {
            return Err(Error::input("a ring system needs at least one variable"));
        }
        for (j, f) in polys.iter().enumerate() {
            if f.vars() != vars || f.ring() != &ring {
                return Err(Error::input(format!(
                    "polys[{j}] is not a polynomial in {vars} variables over the system's rng"
                )));
            }
            if f.is_zero() {
                return Err(Error::input(format!("polys[{j}] is the zero polynomial")));
            }
        }
        Ok(RingSystem { ring, vars, polys })
    }

    pub fn ring(&self) -> &Arc<FiniteRng> {
        &self.ring
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn polys(&self) -> &[SparsePoly] {
        &self.polys
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum System {
    Group(GroupSystem),
    Ring(RingSystem),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub seed: u64,
    pub generator: GeneratorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemInstance {
    #[serde(flatten)]
    pub system: System,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<InstanceMeta>,
}

impl From<System> for SystemInstance {
    fn from(system: System) -> Self {
        SystemInstance { system, meta: None }
    }
}

impl SystemInstance {
    pub fn p(&self) -> u64 {
        match &self.system {
            System::Group(g) => g.base.p(),
            System::Ring(r) => r.ring.p(),
        }
    }

    pub fn domain_order(&self) -> u128 {
        match &self.system {
            System::Group(g) => (g.base.order() as u128).pow(g.power as u32),
            System::Ring(r) => (r.ring.order() as u128).pow(r.vars as u32),
        }
    }

    /// The system as tables on a common domain.
    pub fn tables(&self, cap: u64) -> Result<Vec<FunctionTable>> {
        let size = self.domain_order();
        if size > cap as u128 {
            return Err(Error::capacity("system domain", size, cap as u128));
        }
        match &self.system {
            System::Group(g) => Ok(g.functions.clone()),
            System::Ring(r) => r.polys.iter().map(|f| f.to_table(cap)).collect(),
        }
    }
}

fn count_table_zeros(domain_order: u64, tables: &[FunctionTable]) -> u64 {
    (0..domain_order as usize)
        .filter(|&x| tables.iter().all(|t| t.value(x).iter().all(|&c| c == 0)))
        .count() as u64
}

/// Exhaustive count of common zeros and its `p`-adic valuation.
pub fn count_zeros(inst: &SystemInstance, cap: u64) -> Result<(u64, Valuation)> {
    let tables = inst.tables(cap)?;
    let count = count_table_zeros(inst.domain_order() as u64, &tables);
    Ok((count, ord_p_u64(count, inst.p())))
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::input(format!("{p} is not prime")))
    }
}

/// `⌈num / den⌉` floored at 0; `∞` when `den = 0` (only nonzero constants,
/// so the zero set is empty).
fn ceil_bound(num: i128, den: u128) -> Valuation {
    if den == 0 {
        return Valuation::Infinity;
    }
    if num <= 0 {
        return Valuation::Finite(0);
    }
    let num = num as u128;
    Valuation::Finite(num.div_ceil(den) as u64)
}

fn geometric(p: u64, beta: u32) -> u128 {
    // (p^β − 1)/(p − 1)
    (0..beta).map(|i| (p as u128).pow(i)).sum()
}

/// `⌈(N − Σ_j (p^{β_j}−1)/(p−1) · d_j) / max_j p^{β_j−1} d_j⌉` for functions
/// `(Z/p)^N → Z/p^{β_j}` with functional degrees `d_j`.
pub fn bound_axkatz_wilson(n: u64, p: u64, pairs: &[(u32, u64)]) -> Result<Valuation> {
    let targets: Vec<(Vec<u32>, u64)> = pairs.iter().map(|&(b, d)| (vec![b], d)).collect();
    bound_multi_target(n, p, &targets)
}

/// The multi-target form: function `j` maps into `⊕_k Z/p^{β_{j,k}}`,
/// `⌈(N − Σ_j d_j Σ_k (p^{β_{j,k}}−1)/(p−1)) / max_j p^{β_{j,1}−1} d_j⌉`
/// with `β_{j,1}` the largest exponent of target `j`.
pub fn bound_multi_target(n: u64, p: u64, targets: &[(Vec<u32>, u64)]) -> Result<Valuation> {
    require_prime(p)?;
    if targets.is_empty() {
        return Err(Error::input("the bound needs at least one function"));
    }
    let mut sum: u128 = 0;
    let mut den: u128 = 0;
    for (j, (betas, d)) in targets.iter().enumerate() {
        let top = betas.iter().copied().max().ok_or_else(|| {
            Error::input(format!("target {j} has no exponents"))
        })?;
        if betas.contains(&0) {
            return Err(Error::input(format!("target {j} has a zero exponent")));
        }
        let d = *d as u128;
        sum += d * betas.iter().map(|&b| geometric(p, b)).sum::<u128>();
        den = den.max((p as u128).pow(top - 1) * d);
    }
    Ok(ceil_bound(n as i128 - sum as i128, den))
}

/// `⌈N(n − Σ d_j) / max d_j⌉`: functions `A^n → A` with `A = (Z/p)^N`, or
/// polynomials in `n` variables over a rng of order `p^N` with degrees `d_j`.
pub fn bound_gtpakt(n: u64, vars: u64, degrees: &[u64]) -> Result<Valuation> {
    if degrees.is_empty() {
        return Err(Error::input("the bound needs at least one function"));
    }
    let sum: u128 = degrees.iter().map(|&d| d as u128).sum();
    let max = degrees.iter().copied().max().unwrap_or(0) as u128;
    Ok(ceil_bound(n as i128 * (vars as i128 - sum as i128), max))
}

/// Total-degree form for polynomials over a rng of order `p^N`.
pub fn bound_ring_axkatz(n: u64, vars: u64, degrees: &[u64]) -> Result<Valuation> {
    bound_gtpakt(n, vars, degrees)
}

/// The same formula with the `p`-weight degrees `σ_p(f_j)`.
pub fn bound_moreno(n: u64, vars: u64, sigmas: &[u64]) -> Result<Valuation> {
    bound_gtpakt(n, vars, sigmas)
}

/// `N ⌈(n − Σ deg) / max deg⌉`: the field bound on `ord_q` converted to
/// `ord_p` for `q = p^N`.
pub fn bound_classical_axkatz_ordp(n: u64, vars: u64, degrees: &[u64]) -> Result<Valuation> {
    let inner = bound_gtpakt(1, vars, degrees)?;
    Ok(match inner {
        Valuation::Finite(v) => Valuation::Finite(v * n),
        Valuation::Infinity => Valuation::Infinity,
    })
}

/// Indicator of `Σ deg < n` over a field: the zero count is divisible by `p`.
pub fn bound_chevalley_warning(vars: u64, degrees: &[u64]) -> Result<Valuation> {
    if degrees.is_empty() {
        return Err(Error::input("the bound needs at least one function"));
    }
    let sum: u64 = degrees.iter().sum();
    Ok(Valuation::Finite(u64::from(sum < vars)))
}

/// Indicator of `(Σ fdeg)(Σ_i (p^{β_i}−1)) < (Σ_i (p^{α_i}−1)) · N` for
/// functions `A^N → B` with `A = ⊕ Z/p^{α_i}` and `B = ⊕ Z/p^{β_i}`.
pub fn bound_gtcw(p: u64, alphas: &[u32], power: u64, betas: &[u32], fdegs: &[u64]) -> Result<Valuation> {
    require_prime(p)?;
    let a: u128 = alphas.iter().map(|&x| (p as u128).pow(x) - 1).sum();
    let b: u128 = betas.iter().map(|&x| (p as u128).pow(x) - 1).sum();
    let d: u128 = fdegs.iter().map(|&x| x as u128).sum();
    Ok(Valuation::Finite(u64::from(d * b < a * power as u128)))
}

/// One named bound in a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    pub applicable: bool,
    /// Absent when not applicable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<Valuation>,
    /// The exact formula inputs.
    pub inputs: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundEntry {
    fn applied(name: &str, bound: Valuation, inputs: Value) -> Self {
        BoundEntry {
            name: name.into(),
            applicable: true,
            bound: Some(bound),
            inputs,
            note: None,
        }
    }

    fn skipped(name: &str, note: &str) -> Self {
        BoundEntry {
            name: name.into(),
            applicable: false,
            bound: None,
            inputs: Value::Null,
            note: Some(note.into()),
        }
    }

    /// `valuation − bound` when both are finite.
    pub fn gap(&self, valuation: Valuation) -> Option<i64> {
        match (valuation, self.bound?) {
            (Valuation::Finite(v), Valuation::Finite(b)) => Some(v as i64 - b as i64),
            _ => None,
        }
    }
}

/// Per-function degree data used by the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDegrees {
    pub index: usize,
    pub fdeg: Degree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<Degree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_weight_degree: Option<Degree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub domain_order: u64,
    pub zero_count: u64,
    pub valuation: Valuation,
    pub functions: Vec<FunctionDegrees>,
    /// Indices of polynomials that vanish as functions; they impose no
    /// condition and are left out of every bound.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<usize>,
    pub bounds: Vec<BoundEntry>,
    pub pass: bool,
}

impl BoundReport {
    /// Recomputes `pass` from the other fields.
    pub fn recompute_pass(&self) -> bool {
        self.bounds
            .iter()
            .filter(|b| b.applicable)
            .all(|b| b.bound.is_some_and(|v| self.valuation >= v))
    }

    pub fn bound(&self, name: &str) -> Option<&BoundEntry> {
        self.bounds.iter().find(|b| b.name == name)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundEntry> {
        self.bounds
            .iter()
            .filter(|b| b.applicable && b.bound.is_some_and(|v| self.valuation < v))
    }
}

fn fin(d: Degree) -> u64 {
    d.finite().expect("nonzero functions have finite degree")
}

/// Counts zeros, computes degrees, and evaluates every bound whose
/// hypotheses hold.
pub fn verify_instance(inst: &SystemInstance, cap: u64) -> Result<BoundReport> {
    let tables = inst.tables(cap)?;
    let domain_order = inst.domain_order() as u64;
    let p = inst.p();
    let zero_count = count_table_zeros(domain_order, &tables);
    let valuation = ord_p_u64(zero_count, p);
    let (functions, dropped, bounds) = match &inst.system {
        System::Group(g) => group_bounds(g, &tables)?,
        System::Ring(r) => ring_bounds(r, &tables)?,
    };
    let mut report = BoundReport {
        domain_order,
        zero_count,
        valuation,
        functions,
        dropped,
        bounds,
        pass: false,
    };
    report.pass = report.recompute_pass();
    Ok(report)
}

type BoundParts = (Vec<FunctionDegrees>, Vec<usize>, Vec<BoundEntry>);

fn group_bounds(g: &GroupSystem, tables: &[FunctionTable]) -> Result<BoundParts> {
    let p = g.base.p();
    let domain = g.domain();
    let mut functions = Vec::new();
    let mut d = Vec::new();
    for (j, t) in tables.iter().enumerate() {
        let fd = fdeg(t)?;
        d.push(fin(fd));
        functions.push(FunctionDegrees {
            index: j,
            fdeg: fd,
            degree: None,
            p_weight_degree: None,
        });
    }
    let mut bounds = Vec::new();
    if tables.is_empty() {
        return Ok((functions, Vec::new(), bounds));
    }
    let n = domain.arity() as u64;
    let codomains: Vec<&PGroupShape> = tables.iter().map(|t| t.codomain()).collect();

    if !domain.is_elementary() {
        let note = "domain is not elementary abelian";
        bounds.push(BoundEntry::skipped("axkatz_wilson", note));
        bounds.push(BoundEntry::skipped("multi_target", note));
    } else {
        if codomains.iter().all(|b| b.arity() == 1) {
            let pairs: Vec<(u32, u64)> = codomains.iter().zip(&d).map(|(b, &dj)| (b.alphas()[0], dj)).collect();
            let v = bound_axkatz_wilson(n, p, &pairs)?;
            bounds.push(BoundEntry::applied(
                "axkatz_wilson",
                v,
                json!({"p": p, "N": n, "betas": pairs.iter().map(|x| x.0).collect::<Vec<_>>(), "fdegs": d}),
            ));
        } else {
            bounds.push(BoundEntry::skipped("axkatz_wilson", "a codomain is not cyclic"));
        }
        let targets: Vec<(Vec<u32>, u64)> = codomains
            .iter()
            .zip(&d)
            .map(|(b, &dj)| {
                let mut betas = b.alphas().to_vec();
                betas.sort_unstable_by(|x, y| y.cmp(x));
                (betas, dj)
            })
            .collect();
        let v = bound_multi_target(n, p, &targets)?;
        bounds.push(BoundEntry::applied(
            "multi_target",
            v,
            json!({"p": p, "N": n, "betas": targets.iter().map(|t| t.0.clone()).collect::<Vec<_>>(), "fdegs": d}),
        ));
    }

    if codomains.iter().all(|b| *b == codomains[0]) {
        let betas = codomains[0].alphas();
        let v = bound_gtcw(p, g.base.alphas(), g.power as u64, betas, &d)?;
        bounds.push(BoundEntry::applied(
            "gtcw",
            v,
            json!({"p": p, "alphas": g.base.alphas(), "N": g.power, "betas": betas, "fdegs": d}),
        ));
    } else {
        bounds.push(BoundEntry::skipped("gtcw", "functions have different codomains"));
    }

    if g.base.is_elementary() && codomains.iter().all(|b| *b == &g.base) {
        let v = bound_gtpakt(g.base.arity() as u64, g.power as u64, &d)?;
        bounds.push(BoundEntry::applied(
            "gtpakt",
            v,
            json!({"p": p, "N": g.base.arity(), "n": g.power, "fdegs": d}),
        ));
    } else {
        bounds.push(BoundEntry::skipped(
            "gtpakt",
            "needs an elementary base A and every codomain equal to A",
        ));
    }
    Ok((functions, Vec::new(), bounds))
}

fn ring_bounds(r: &RingSystem, tables: &[FunctionTable]) -> Result<BoundParts> {
    let ring = &r.ring;
    let p = ring.p();
    let big_n = ring.dim() as u64;
    let n = r.vars as u64;
    let mut functions = Vec::new();
    let mut dropped = Vec::new();
    let mut kept = Vec::new();
    for (j, (f, t)) in r.polys.iter().zip(tables).enumerate() {
        let fd = fdeg(t)?;
        functions.push(FunctionDegrees {
            index: j,
            fdeg: fd,
            degree: Some(f.degree()),
            p_weight_degree: Some(f.p_weight_degree()),
        });
        if t.is_zero() {
            dropped.push(j);
        } else {
            kept.push(j);
        }
    }
    let mut bounds = Vec::new();
    if kept.is_empty() {
        return Ok((functions, dropped, bounds));
    }
    let degs: Vec<u64> = kept.iter().map(|&j| fin(r.polys[j].degree())).collect();
    let sigmas: Vec<u64> = kept.iter().map(|&j| fin(r.polys[j].p_weight_degree())).collect();
    let fdegs: Vec<u64> = kept.iter().map(|&j| fin(functions[j].fdeg)).collect();

    bounds.push(BoundEntry::applied(
        "ring_axkatz",
        bound_ring_axkatz(big_n, n, &degs)?,
        json!({"p": p, "N": big_n, "n": n, "degrees": degs}),
    ));
    if ring.is_commutative() {
        bounds.push(BoundEntry::applied(
            "moreno",
            bound_moreno(big_n, n, &sigmas)?,
            json!({"p": p, "N": big_n, "n": n, "p_weight_degrees": sigmas}),
        ));
    } else {
        bounds.push(BoundEntry::skipped("moreno", "rng is not commutative"));
    }
    if ring.is_field() {
        bounds.push(BoundEntry::applied(
            "classical_axkatz",
            bound_classical_axkatz_ordp(big_n, n, &degs)?,
            json!({"q": ring.order(), "N": big_n, "n": n, "degrees": degs}),
        ));
        bounds.push(BoundEntry::applied(
            "chevalley_warning",
            bound_chevalley_warning(n, &degs)?,
            json!({"q": ring.order(), "n": n, "degrees": degs}),
        ));
    } else {
        bounds.push(BoundEntry::skipped("classical_axkatz", "rng is not a field"));
        bounds.push(BoundEntry::skipped("chevalley_warning", "rng is not a field"));
    }

    // the same functions viewed as maps (R,+)^n → (R,+)
    let alphas = vec![1u32; ring.dim()];
    bounds.push(BoundEntry::applied(
        "gtcw",
        bound_gtcw(p, &alphas, n, &alphas, &fdegs)?,
        json!({"p": p, "alphas": alphas, "N": n, "betas": alphas, "fdegs": fdegs}),
    ));
    bounds.push(BoundEntry::applied(
        "gtpakt",
        bound_gtpakt(big_n, n, &fdegs)?,
        json!({"p": p, "N": big_n, "n": n, "fdegs": fdegs}),
    ));
    // coordinate projections (Z/p)^{Nn} → Z/p
    let mut proj = Vec::new();
    for &j in &kept {
        for k in 0..ring.dim() {
            let t = tables[j].project(k)?;
            if !t.is_zero() {
                proj.push((1u32, fin(fdeg(&t)?)));
            }
        }
    }
    let nn = big_n * n;
    bounds.push(BoundEntry::applied(
        "axkatz_wilson",
        bound_axkatz_wilson(nn, p, &proj)?,
        json!({"p": p, "N": nn, "betas": proj.iter().map(|x| x.0).collect::<Vec<_>>(), "fdegs": proj.iter().map(|x| x.1).collect::<Vec<_>>()}),
    ));
    Ok((functions, dropped, bounds))
}

/// A direct formula evaluation with user-supplied degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
pub enum BoundQuery {
    AxkatzWilson { p: u64, n: u64, pairs: Vec<(u32, u64)> },
    MultiTarget { p: u64, n: u64, targets: Vec<(Vec<u32>, u64)> },
    Gtpakt { n: u64, vars: u64, degrees: Vec<u64> },
    Gtcw { p: u64, alphas: Vec<u32>, power: u64, betas: Vec<u32>, fdegs: Vec<u64> },
    RingAxkatz { n: u64, vars: u64, degrees: Vec<u64> },
    Moreno { n: u64, vars: u64, sigmas: Vec<u64> },
    ClassicalAxkatz { n: u64, vars: u64, degrees: Vec<u64> },
    ChevalleyWarning { vars: u64, degrees: Vec<u64> },
}

impl BoundQuery {
    pub fn evaluate(&self) -> Result<Valuation> {
        match self {
            BoundQuery::AxkatzWilson { p, n, pairs } => bound_axkatz_wilson(*n, *p, pairs),
            BoundQuery::MultiTarget { p, n, targets } => bound_multi_target(*n, *p, targets),
            BoundQuery::Gtpakt { n, vars, degrees } => bound_gtpakt(*n, *vars, degrees),
            BoundQuery::Gtcw {
                p,
                alphas,
                power,
                betas,
                fdegs,
            } => bound_gtcw(*p, alphas, *power, betas, fdegs),
            BoundQuery::RingAxkatz { n, vars, degrees } => bound_ring_axkatz(*n, *vars, degrees),
            BoundQuery::Moreno { n, vars, sigmas } => bound_moreno(*n, *vars, sigmas),
            BoundQuery::ClassicalAxkatz { n, vars, degrees } => {
                bound_classical_axkatz_ordp(*n, *vars, degrees)
            }
            BoundQuery::ChevalleyWarning { vars, degrees } => bound_chevalley_warning(*vars, degrees),
        }
    }
}

/// Result of [`sigma_invariant`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    /// `−∞` when some constant function already has a nonzero sum.
    pub sigma: Degree,
    /// A function of least functional degree with nonzero sum.
    pub witness: FunctionTable,
    pub functions_enumerated: u64,
}

/// The largest `d` such that every `f: A → B` with `fdeg(f) ≤ d` sums to 0,
/// by exhaustive enumeration of `B^A`.
pub fn sigma_invariant(a: &PGroupShape, b: &PGroupShape, cap: u64) -> Result<SigmaReport> {
    if a.p() != b.p() {
        return Err(Error::input("A and B must be p-groups for the same p"));
    }
    let count = (b.order() as u128).checked_pow(a.order() as u32);
    let count = match count {
        Some(c) if c <= cap as u128 => c as u64,
        _ => {
            return Err(Error::capacity(
                "functions A → B",
                count.unwrap_or(u128::MAX),
                cap as u128,
            ))
        }
    };
    let len = a.order() as usize;
    let q = b.order();
    let k = b.arity();
    let codomain: Vec<Vec<u64>> = b.elements().map(|e| e.0).collect();
    let best = (0..count)
        .into_par_iter()
        .filter_map(|idx| {
            let mut values = Vec::with_capacity(len * k);
            let mut r = idx;
            for _ in 0..len {
                values.extend_from_slice(&codomain[(r % q) as usize]);
                r /= q;
            }
            let f = FunctionTable::from_flat(a.clone(), b.clone(), values);
            if f.integral().is_zero() {
                return None;
            }
            let d = fdeg(&f).expect("single prime");
            Some((d, idx, f))
        })
        .min_by_key(|(d, idx, _)| (*d, *idx))
        .expect("the indicator of 0 has a nonzero sum");
    let sigma = match best.0 {
        Degree::Finite(0) | Degree::NegInfinity => Degree::NegInfinity,
        Degree::Finite(m) => Degree::Finite(m - 1),
    };
    Ok(SigmaReport {
        sigma,
        witness: best.2,
        functions_enumerated: count,
    })
}

/// How random codomains are chosen for group systems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CodomainGen {
    /// `Z/p^β` with `β ≤ max_beta`.
    Cyclic { max_beta: u32 },
    /// A direct sum of up to `max_parts` cyclic groups with `β ≤ max_beta`.
    Multi { max_beta: u32, max_parts: usize },
    /// Every function maps into the base group `A`.
    Base,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupGen {
    pub p: u64,
    /// Exponents of the base group `A`.
    pub base: Vec<u32>,
    #[serde(default = "one")]
    pub power: usize,
    /// Up to this many functions.
    pub r: usize,
    pub codomain: CodomainGen,
    /// When set, tables come from random binomial series of total degree at
    /// most this value instead of uniform values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingChoice {
    Field { p: u64, n: usize },
    /// A random associative commutative rng by rejection sampling.
    Random { p: u64, dim: usize },
    Spec(crate::rings::FiniteRngSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingGen {
    pub ring: RingChoice,
    pub vars: usize,
    /// Up to this many polynomials.
    pub r: usize,
    pub max_terms: usize,
    pub max_degree: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Group(GroupGen),
    Ring(RingGen),
}

/// A deterministic instance from `seed`.
pub fn generate_instance(spec: &GeneratorSpec, seed: u64, cap: u64) -> Result<SystemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let system = match spec {
        GeneratorSpec::Group(g) => System::Group(generate_group(g, &mut rng, cap)?),
        GeneratorSpec::Ring(r) => System::Ring(generate_ring(r, &mut rng, cap)?),
    };
    Ok(SystemInstance {
        system,
        meta: Some(InstanceMeta {
            seed,
            generator: spec.clone(),
        }),
    })
}

fn generate_group(g: &GroupGen, rng: &mut ChaCha8Rng, cap: u64) -> Result<GroupSystem> {
    if g.r == 0 {
        return Err(Error::input("r must be positive"));
    }
    let base = PGroupShape::new(g.p, g.base.clone())?;
    let domain = base.power(g.power.max(1))?;
    domain.check_cap(cap)?;
    let count = rng.gen_range(1..=g.r);
    let mut functions = Vec::with_capacity(count);
    for _ in 0..count {
        let codomain = match &g.codomain {
            CodomainGen::Cyclic { max_beta } => {
                PGroupShape::cyclic(g.p, rng.gen_range(1..=(*max_beta).max(1)))?
            }
            CodomainGen::Multi {
                max_beta,
                max_parts,
            } => {
                let parts = rng.gen_range(1..=(*max_parts).max(1));
                let betas = (0..parts).map(|_| rng.gen_range(1..=(*max_beta).max(1))).collect();
                PGroupShape::new(g.p, betas)?
            }
            CodomainGen::Base => base.clone(),
        };
        functions.push(random_nonzero_table(&domain, &codomain, g.max_degree, rng)?);
    }
    GroupSystem::new(base, g.power.max(1), functions)
}

fn random_nonzero_table(
    domain: &PGroupShape,
    codomain: &PGroupShape,
    max_degree: Option<u64>,
    rng: &mut ChaCha8Rng,
) -> Result<FunctionTable> {
    for _ in 0..GENERATION_RETRIES {
        let t = match max_degree {
            None => {
                let moduli = codomain.moduli().to_vec();
                let values = (0..domain.order() as usize * moduli.len())
                    .map(|i| rng.gen_range(0..moduli[i % moduli.len()]))
                    .collect();
                FunctionTable::from_flat(domain.clone(), codomain.clone(), values)
            }
            Some(d) => random_series_table(domain, codomain, d, rng)?,
        };
        if !t.is_zero() {
            return Ok(t);
        }
    }
    Err(Error::Generation(format!(
        "no nonzero table within {GENERATION_RETRIES} attempts"
    )))
}

fn random_series_table(
    domain: &PGroupShape,
    codomain: &PGroupShape,
    max_degree: u64,
    rng: &mut ChaCha8Rng,
) -> Result<FunctionTable> {
    let probe = FunctionTable::zero(domain.clone(), codomain.clone());
    let caps = probe.partial_caps();
    let mut s = BinomialSeries::zero(domain.arity(), SeriesCodomain::PGroup(codomain.clone()));
    for _ in 0..rng.gen_range(1..=4) {
        let total = rng.gen_range(0..=max_degree);
        let mut n = vec![0u64; caps.len()];
        for _ in 0..total {
            let open: Vec<usize> = (0..caps.len()).filter(|&i| n[i] < caps[i]).collect();
            if open.is_empty() {
                break;
            }
            n[open[rng.gen_range(0..open.len())]] += 1;
        }
        let a = codomain
            .moduli()
            .iter()
            .map(|&m| BigInt::from(rng.gen_range(0..m)))
            .collect();
        s.insert(MultiIndex(n), a)?;
    }
    s.to_table(domain)
}

fn generate_ring(g: &RingGen, rng: &mut ChaCha8Rng, cap: u64) -> Result<RingSystem> {
    if g.r == 0 || g.vars == 0 {
        return Err(Error::input("r and vars must be positive"));
    }
    let ring = match &g.ring {
        RingChoice::Field { p, n } => FiniteRng::field(*p, *n)?,
        RingChoice::Random { p, dim } => {
            FiniteRng::from_spec(random_commutative_rng(*p, *dim, rng, GENERATION_RETRIES)?)?
        }
        RingChoice::Spec(s) => FiniteRng::from_spec(s.clone())?,
    };
    let ring = Arc::new(ring);
    let size = (ring.order() as u128).pow(g.vars as u32);
    if size > cap as u128 {
        return Err(Error::capacity("ring system domain", size, cap as u128));
    }
    let count = rng.gen_range(1..=g.r);
    let mut polys = Vec::with_capacity(count);
    for _ in 0..count {
        let f = (0..GENERATION_RETRIES)
            .map(|_| random_poly(&ring, g.vars, g.max_terms, g.max_degree, rng))
            .find(|f| !f.is_zero())
            .ok_or_else(|| Error::Generation("only zero polynomials were generated".into()))?;
        polys.push(f);
    }
    RingSystem::new(ring, g.vars, polys)
}

/// One block of a campaign: `count` instances from one generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignRun {
    pub generator: GeneratorSpec,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default = "default_cap")]
    pub cap_elements: u64,
    pub runs: Vec<CampaignRun>,
}

fn default_cap() -> u64 {
    DEFAULT_ELEMENT_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub index: usize,
    pub seed: u64,
    pub report: BoundReport,
    /// Present only for violations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<SystemInstance>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tightness {
    /// `valuation − bound` over nonvacuous bounds (bound ≥ 1), counted.
    pub gaps: BTreeMap<String, BTreeMap<i64, u64>>,
    /// Instances with no zeros at all.
    pub empty_zero_sets: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub instances: usize,
    pub passed: usize,
    pub violations: usize,
    pub tightness: Tightness,
    pub outcomes: Vec<InstanceOutcome>,
}

/// Generates and verifies every instance of the campaign. Instance `i`
/// uses seed `seed + i`; results are in index order whatever the worker
/// count.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let jobs: Vec<(usize, &GeneratorSpec)> = cfg
        .runs
        .iter()
        .flat_map(|r| std::iter::repeat_n(&r.generator, r.count))
        .enumerate()
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    let outcomes: Vec<InstanceOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(index, gen)| {
                let seed = cfg.seed.wrapping_add(index as u64);
                let inst = generate_instance(gen, seed, cfg.cap_elements)?;
                let report = verify_instance(&inst, cfg.cap_elements)?;
                let instance = (!report.pass).then_some(inst);
                Ok(InstanceOutcome {
                    index,
                    seed,
                    report,
                    instance,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(summarize(cfg.seed, outcomes))
}

pub fn summarize(seed: u64, outcomes: Vec<InstanceOutcome>) -> CampaignReport {
    let mut tightness = Tightness::default();
    let mut passed = 0;
    for o in &outcomes {
        if o.report.pass {
            passed += 1;
        }
        if o.report.valuation == Valuation::Infinity {
            tightness.empty_zero_sets += 1;
        }
        for b in o.report.bounds.iter().filter(|b| b.applicable) {
            if b.bound.is_some_and(|v| v >= Valuation::Finite(1)) {
                if let Some(gap) = b.gap(o.report.valuation) {
                    *tightness
                        .gaps
                        .entry(b.name.clone())
                        .or_default()
                        .entry(gap)
                        .or_default() += 1;
                }
            }
        }
    }
    CampaignReport {
        seed,
        instances: outcomes.len(),
        passed,
        violations: outcomes.len() - passed,
        tightness,
        outcomes,
    }
}

/// The soundness sweep: group systems on `(Z/p)^N` for `p = 2, N ≤ 8` and
/// `p = 3, N ≤ 5` with `β ≤ 3`, and ring systems over `F_2, F_4, F_9` and
/// random structure-constant rngs over `Z/2`, `Z/3` of dimension at most 3.
/// Sizes are chosen so that `count` instances come out in total.
pub fn default_sweep(seed: u64, count: usize) -> CampaignConfig {
    let mut gens = Vec::new();
    for (p, max_n) in [(2u64, 8usize), (3, 5)] {
        for n in 1..=max_n {
            for max_degree in [None, Some(1), Some(2)] {
                gens.push(GeneratorSpec::Group(GroupGen {
                    p,
                    base: vec![1; n],
                    power: 1,
                    r: 3,
                    codomain: CodomainGen::Cyclic { max_beta: 3 },
                    max_degree,
                }));
            }
            gens.push(GeneratorSpec::Group(GroupGen {
                p,
                base: vec![1; n],
                power: 1,
                r: 2,
                codomain: CodomainGen::Multi {
                    max_beta: 3,
                    max_parts: 2,
                },
                max_degree: Some(1),
            }));
        }
    }
    for (p, n) in [(2u64, 1usize), (2, 2), (3, 2)] {
        for vars in 1..=3 {
            gens.push(GeneratorSpec::Ring(RingGen {
                ring: RingChoice::Field { p, n },
                vars,
                r: 3,
                max_terms: 3,
                max_degree: 3,
            }));
        }
    }
    for (p, dim, max_vars) in [(2u64, 1usize, 3usize), (2, 2, 3), (2, 3, 3), (3, 1, 3), (3, 2, 3), (3, 3, 2)] {
        for vars in 1..=max_vars {
            gens.push(GeneratorSpec::Ring(RingGen {
                ring: RingChoice::Random { p, dim },
                vars,
                r: 3,
                max_terms: 3,
                max_degree: 3,
            }));
        }
    }
    let per = count / gens.len();
    let extra = count % gens.len();
    let runs = gens
        .into_iter()
        .enumerate()
        .map(|(i, generator)| CampaignRun {
            generator,
            count: per + usize::from(i < extra),
        })
        .filter(|r| r.count > 0)
        .collect();
    CampaignConfig {
        seed,
        workers: 1,
        cap_elements: DEFAULT_ELEMENT_CAP,
        runs,
    }
}
