//! Helpers shared by the integration tests: random inputs and small
//! independent reference computations.

#![allow(dead_code)]

use fdcalc::calculus::FunctionTable;
use fdcalc::{GroupElement, PGroupShape};
use num_bigint::BigInt;
use rand::Rng;

pub fn shape(p: u64, alphas: &[u32]) -> PGroupShape {
    PGroupShape::new(p, alphas.to_vec()).unwrap()
}

/// Random exponents with `p^{Σα} ≤ max_order`.
pub fn random_alphas<R: Rng>(rng: &mut R, p: u64, max_order: u64, max_alpha: u32) -> Vec<u32> {
    let mut alphas = Vec::new();
    let mut order = 1u64;
    loop {
        let a = rng.gen_range(1..=max_alpha);
        if order * p.pow(a) > max_order {
            break;
        }
        alphas.push(a);
        order *= p.pow(a);
        if rng.gen_bool(0.3) {
            break;
        }
    }
    if alphas.is_empty() {
        alphas.push(1);
    }
    alphas
}

pub fn random_table<R: Rng>(rng: &mut R, domain: &PGroupShape, codomain: &PGroupShape) -> FunctionTable {
    let values = (0..domain.order())
        .map(|_| {
            GroupElement(codomain.moduli().iter().map(|&m| rng.gen_range(0..m)).collect())
        })
        .collect();
    FunctionTable::new(domain.clone(), codomain.clone(), values).unwrap()
}

/// Table number `idx` in the enumeration of all functions into `Z/m`.
pub fn nth_scalar_table(domain: &PGroupShape, codomain: &PGroupShape, mut idx: u64) -> FunctionTable {
    let m = codomain.moduli()[0];
    let values = (0..domain.order())
        .map(|_| {
            let v = idx % m;
            idx /= m;
            GroupElement(vec![v])
        })
        .collect();
    FunctionTable::new(domain.clone(), codomain.clone(), values).unwrap()
}

/// Mixed-radix decode with coordinate 1 least significant.
pub fn decode(moduli: &[u64], mut i: u64) -> Vec<u64> {
    moduli
        .iter()
        .map(|&m| {
            let c = i % m;
            i /= m;
            c
        })
        .collect()
}

pub fn encode(moduli: &[u64], x: &[u64]) -> u64 {
    let mut idx = 0;
    let mut stride = 1;
    for (&m, &c) in moduli.iter().zip(x) {
        idx += c * stride;
        stride *= m;
    }
    idx
}

/// `C(n, k)` for `n ≥ 0` by Pascal's rule, as a big integer.
pub fn choose(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let mut row = vec![BigInt::from(1)];
    for _ in 0..n {
        let mut next = vec![BigInt::from(1); row.len() + 1];
        for j in 1..row.len() {
            next[j] = &row[j - 1] + &row[j];
        }
        row = next;
    }
    row[k as usize].clone()
}

/// `C(x, k)` for any integer `x` via the falling factorial.
pub fn choose_signed(x: i64, k: u64) -> BigInt {
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for j in 0..k {
        num *= BigInt::from(x) - BigInt::from(j);
        den *= BigInt::from(j + 1);
    }
    num / den
}

/// `⌈num/den⌉` floored at 0, `None` standing for an infinite bound.
pub fn ceil_floor0(num: i64, den: i64) -> Option<u64> {
    if den == 0 {
        return None;
    }
    if num <= 0 {
        return Some(0);
    }
    Some(((num + den - 1) / den) as u64)
}

pub fn ord(mut m: u64, p: u64) -> Option<u64> {
    if m == 0 {
        return None;
    }
    let mut v = 0;
    while m.is_multiple_of(p) {
        m /= p;
        v += 1;
    }
    Some(v)
}

/// Definition-based degree bound `δ_p(α, β)`, written out independently.
pub fn delta_p(p: u64, alphas: &[u32], beta: u32) -> u64 {
    let amax = *alphas.iter().max().unwrap();
    alphas.iter().map(|&a| p.pow(a) - 1).sum::<u64>() + (beta as u64 - 1) * (p - 1) * p.pow(amax - 1)
}

/// Multiplication in a structure-constant rng on coordinate vectors.
pub fn rng_mul(p: u64, mult: &[Vec<Vec<u64>>], x: &[u64], y: &[u64]) -> Vec<u64> {
    let n = x.len();
    let mut out = vec![0; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[k] = (out[k] + x[i] * y[j] % p * mult[i][j][k]) % p;
            }
        }
    }
    out
}

pub fn base_p_digit_sum(mut d: u64, p: u64) -> u64 {
    let mut s = 0;
    while d > 0 {
        s += d % p;
        d /= p;
    }
    s
}
