//! Acceptance checks. Runs without the libtest harness and prints exactly
//! one PASS/FAIL line per check; exits nonzero if any check fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use fdcalc::binomial::{
    audit_lift_divisibility, fundamental_coefficients, proper_lift, wilson_hypothesis, wilson_sum,
    BinomialSeries, MultiIndex, SeriesCodomain,
};
use fdcalc::calculus::{fdeg, fdeg_oracle, DEFAULT_ORACLE_CAP};
use fdcalc::groups::DEFAULT_ELEMENT_CAP;
use fdcalc::rings::{random_poly, FiniteRng, FiniteRngSpec, SparsePoly};
use fdcalc::verifier::{
    default_sweep, generate_instance, run_campaign, sigma_invariant, verify_instance, GeneratorSpec,
    GroupSystem, RingChoice, RingGen, System, SystemInstance, DEFAULT_SIGMA_CAP,
};
use fdcalc::{Degree, Error, Valuation};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn main() {
    let checks: [(&str, u64, fn() -> Outcome); 8] = [
        ("fundamental representation round trip", 10, series_round_trip),
        ("lift divisibility audit", 30, lift_divisibility),
        ("wilson sums", 30, wilson_sums),
        ("main bound soundness and tightness", 300, main_bound),
        ("ring and p-weight bounds", 120, ring_and_p_weight_bounds),
        ("degree chain", 60, degree_chain),
        ("summation invariant", 120, summation_invariant),
        ("fdeg cross-validation", 60, fdeg_cross_validation),
    ];
    let mut failed = 0;
    for (name, limit, check) in checks {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(d) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{d}; over the {limit} s limit"))
            }
            r => r,
        };
        let (status, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{status} {name}: {detail} ({:.2} s, limit {limit} s)",
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn series_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut points = 0;
    let mut negative = 0;
    for t in 0..100 {
        let p = if rng.gen_bool(0.5) { 2 } else { 3 };
        let a = shape(p, &random_alphas(&mut rng, p, 256, if p == 2 { 4 } else { 3 }));
        let max_beta = if p == 2 { 3 } else { 1 };
        let betas: Vec<u32> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(1..=max_beta)).collect();
        let b = shape(p, &betas);
        let f = random_table(&mut rng, &a, &b);
        let s = fundamental_coefficients(&f).map_err(err)?;
        let order = a.order() as i64;
        for _ in 0..100 {
            let x: Vec<i64> = (0..a.arity()).map(|_| rng.gen_range(-2 * order..=2 * order)).collect();
            if x.iter().any(|&c| c < 0) {
                negative += 1;
            }
            let residues: Vec<u64> = x
                .iter()
                .zip(a.moduli())
                .map(|(&c, &m)| c.rem_euclid(m as i64) as u64)
                .collect();
            let want = f.value(encode(a.moduli(), &residues) as usize);
            let got = s.evaluate(&x).map_err(err)?;
            for ((g, &w), &m) in got.iter().zip(want).zip(b.moduli()) {
                ensure(g.mod_floor(&BigInt::from(m)) == BigInt::from(w), || {
                    format!("table {t}: series at {x:?} gives {g}, table gives {w}")
                })?;
            }
            points += 1;
        }
    }
    Ok(format!("100 tables, {points} points ({negative} with negative coordinates), all exact"))
}

fn lift_divisibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0usize;
    for t in 0..200 {
        let p = if rng.gen_bool(0.5) { 2 } else { 3 };
        let alphas = random_alphas(&mut rng, p, p.pow(4), 4);
        let a = shape(p, &alphas);
        let betas: Vec<u32> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(1..=3)).collect();
        let b = shape(p, &betas);
        let f = random_table(&mut rng, &a, &b);
        let s = fundamental_coefficients(&f).map_err(err)?;
        let lift = proper_lift(&s).map_err(err)?;
        let audit = audit_lift_divisibility(&lift, p, &alphas, 3).map_err(err)?;
        ensure(audit.pass(), || format!("table {t}: audit failures {:?}", audit.failures().collect::<Vec<_>>()))?;
        // independent recomputation of every required divisibility
        for h in 1..=3u32 {
            let threshold = delta_p(p, &alphas, h);
            let m = BigInt::from(p).pow(h);
            for (n, c) in lift.terms() {
                if n.total() > threshold {
                    checked += 1;
                    ensure(c.iter().all(|v| (v % &m).is_zero()), || {
                        format!("table {t}: coefficient {c:?} at {n:?} not divisible by {m}")
                    })?;
                }
            }
        }
    }
    Ok(format!("200 tables, {checked} coefficient checks above thresholds, zero failures"))
}

fn wilson_sums() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = [(2u64, 3usize, 1u32), (2, 3, 2), (2, 4, 3), (3, 2, 1), (3, 3, 2)];
    let mut count = 0;
    for &(p, n, beta) in &grid {
        let max_deg = (p - 1) * (n as u64 - beta as u64 + 1) - 1;
        for _ in 0..100 {
            let mut s = BinomialSeries::zero(n, SeriesCodomain::Integers { width: 1 });
            for _ in 0..rng.gen_range(1..=6) {
                let total = rng.gen_range(0..=max_deg);
                let mut idx = vec![0u64; n];
                for _ in 0..total {
                    idx[rng.gen_range(0..n)] += 1;
                }
                let a = BigInt::from(rng.gen::<i64>()) * BigInt::from(rng.gen::<u64>());
                s.insert(MultiIndex(idx), vec![a]).map_err(err)?;
            }
            ensure(wilson_hypothesis(s.degree(), p, n, beta), || "hypothesis not met".into())?;
            let w = wilson_sum(&s, p).map_err(err)?;
            // Σ_{x ∈ [0,p)^N} Π C(x_i, n_i) = Π C(p, n_i + 1)
            let mut oracle = BigInt::zero();
            for (idx, a) in s.terms() {
                let prod = idx.0.iter().fold(BigInt::from(1), |acc, &k| acc * choose(p, k + 1));
                oracle += prod * &a[0];
            }
            ensure(w.sum == oracle, || format!("sum {} differs from {oracle}", w.sum))?;
            ensure(w.valuation >= Valuation::Finite(beta as u64), || {
                format!("(p, N, β) = ({p}, {n}, {beta}): valuation {:?} of {}", w.valuation, w.sum)
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} series over 5 (p, N, β) grid points, all valuations ≥ β"))
}

fn main_bound() -> Outcome {
    // every nonzero f: (Z/2)^N → Z/2 for N ≤ 3
    let z2 = shape(2, &[1]);
    let mut exhaustive = 0;
    for n in 1..=3usize {
        let a = shape(2, &vec![1; n]);
        for idx in 1..(1u64 << a.order()) {
            let f = nth_scalar_table(&a, &z2, idx);
            let zeros = (0..a.order() as usize).filter(|&i| f.value(i)[0] == 0).count() as u64;
            let d = fdeg_oracle(&f, DEFAULT_ORACLE_CAP).map_err(err)?.finite().unwrap();
            let bound = ceil_floor0(n as i64 - d as i64, d as i64);
            let inst: SystemInstance = System::Group(GroupSystem::new(a.clone(), 1, vec![f]).map_err(err)?).into();
            let r = verify_instance(&inst, DEFAULT_ELEMENT_CAP).map_err(err)?;
            let want = bound.map_or(Valuation::Infinity, Valuation::Finite);
            ensure(r.zero_count == zeros, || format!("N={n} table {idx}: count {} vs {zeros}", r.zero_count))?;
            ensure(r.bound("axkatz_wilson").and_then(|b| b.bound) == Some(want), || {
                format!("N={n} table {idx}: bound differs from {want:?}")
            })?;
            let val = ord(zeros, 2).map_or(Valuation::Infinity, Valuation::Finite);
            ensure(val >= want && r.pass, || format!("N={n} table {idx}: valuation {val:?} < {want:?}"))?;
            exhaustive += 1;
        }
    }

    let mut cfg = default_sweep(2024, 2000);
    cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_campaign(&cfg).map_err(err)?;
    ensure(report.instances == 2000, || format!("{} instances", report.instances))?;
    ensure(report.violations == 0, || {
        let bad: Vec<_> = report.outcomes.iter().filter(|o| !o.report.pass).map(|o| o.seed).collect();
        format!("violations at seeds {bad:?}")
    })?;
    let tight: u64 = report
        .tightness
        .gaps
        .values()
        .filter_map(|g| g.get(&0))
        .sum();

    // every nonzero linear form on (Z/2)^4 meets the bound exactly
    let a = shape(2, &[1, 1, 1, 1]);
    for mask in 1..16u64 {
        let f = fdcalc::calculus::FunctionTable::from_fn(a.clone(), z2.clone(), |x| {
            vec![(0..4).filter(|&i| mask >> i & 1 == 1).map(|i| x[i] as i64).sum()]
        })
        .map_err(err)?;
        let inst: SystemInstance = System::Group(GroupSystem::new(a.clone(), 1, vec![f]).map_err(err)?).into();
        let r = verify_instance(&inst, DEFAULT_ELEMENT_CAP).map_err(err)?;
        let b = r.bound("axkatz_wilson").and_then(|b| b.bound);
        ensure(r.valuation == Valuation::Finite(3) && b == Some(Valuation::Finite(3)), || {
            format!("linear form {mask:#b}: valuation {:?}, bound {b:?}", r.valuation)
        })?;
    }
    Ok(format!(
        "{exhaustive} exhaustive tables, 2000 sweep instances with 0 violations ({tight} tight bound instances), 15 linear forms with valuation = bound = 3"
    ))
}

/// Upper triangular 2×2 matrices over Z/2: associative, unital, not commutative.
fn upper_triangular() -> FiniteRngSpec {
    let mut mult = vec![vec![vec![0u64; 3]; 3]; 3];
    mult[0][0] = vec![1, 0, 0];
    mult[0][1] = vec![0, 1, 0];
    mult[1][2] = vec![0, 1, 0];
    mult[2][2] = vec![0, 0, 1];
    FiniteRngSpec { p: 2, dim: 3, mult }
}

/// Evaluates a polynomial with the left-to-right convention by repeated
/// multiplication on coordinate vectors.
fn eval_oracle(f: &SparsePoly, x: &[Vec<u64>]) -> Vec<u64> {
    let spec = f.ring().spec();
    let p = spec.p;
    let mut acc = vec![0u64; spec.dim];
    for t in f.terms() {
        let mut mono: Option<Vec<u64>> = None;
        for (xi, &d) in x.iter().zip(&t.exps) {
            for _ in 0..d {
                mono = Some(match mono {
                    None => xi.clone(),
                    Some(m) => rng_mul(p, &spec.mult, &m, xi),
                });
            }
        }
        let v = match mono {
            None => t.coeff.clone(),
            Some(m) => rng_mul(p, &spec.mult, &t.coeff, &m),
        };
        for (a, b) in acc.iter_mut().zip(v) {
            *a = (*a + b) % p;
        }
    }
    acc
}

fn ring_and_p_weight_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let choices = [
        RingChoice::Field { p: 2, n: 1 },
        RingChoice::Field { p: 2, n: 2 },
        RingChoice::Field { p: 3, n: 2 },
        RingChoice::Random { p: 2, dim: 2 },
        RingChoice::Random { p: 2, dim: 3 },
        RingChoice::Random { p: 3, dim: 2 },
        RingChoice::Random { p: 3, dim: 3 },
        RingChoice::Spec(upper_triangular()),
    ];
    let mut moreno_applied = 0;
    let mut noncommutative = 0;
    for i in 0..500u64 {
        let ring = choices[i as usize % choices.len()].clone();
        let vars = rng.gen_range(1..=3);
        let gen = GeneratorSpec::Ring(RingGen {
            ring,
            vars,
            r: 2,
            max_terms: 3,
            max_degree: 3,
        });
        let inst = generate_instance(&gen, 5000 + i, DEFAULT_ELEMENT_CAP).map_err(err)?;
        let System::Ring(sys) = &inst.system else {
            unreachable!()
        };
        let report = verify_instance(&inst, DEFAULT_ELEMENT_CAP).map_err(err)?;
        let spec = sys.ring().spec();
        let (p, dim) = (spec.p, spec.dim);
        let q = p.pow(dim as u32);
        let size = q.pow(vars as u32);
        // independent zero count, and the functions that vanish identically
        let mut zeros = 0u64;
        let mut nonzero = vec![false; sys.polys().len()];
        for idx in 0..size {
            let point: Vec<Vec<u64>> = decode(&vec![q; vars], idx)
                .into_iter()
                .map(|c| decode(&vec![p; dim], c))
                .collect();
            let mut all = true;
            for (j, f) in sys.polys().iter().enumerate() {
                if eval_oracle(f, &point).iter().any(|&c| c != 0) {
                    nonzero[j] = true;
                    all = false;
                }
            }
            if all {
                zeros += 1;
            }
        }
        ensure(report.zero_count == zeros, || format!("instance {i}: count {} vs {zeros}", report.zero_count))?;
        let val = ord(zeros, p).map_or(Valuation::Infinity, Valuation::Finite);
        ensure(report.valuation == val, || format!("instance {i}: valuation mismatch"))?;
        let kept: Vec<&SparsePoly> = sys.polys().iter().zip(&nonzero).filter(|(_, &k)| k).map(|(f, _)| f).collect();
        if kept.is_empty() {
            continue;
        }
        let degs: Vec<i64> = kept
            .iter()
            .map(|f| f.terms().iter().map(|t| t.exps.iter().sum::<u32>() as i64).max().unwrap())
            .collect();
        let sigmas: Vec<i64> = kept
            .iter()
            .map(|f| {
                f.terms()
                    .iter()
                    .map(|t| t.exps.iter().map(|&d| base_p_digit_sum(d as u64, p)).sum::<u64>() as i64)
                    .max()
                    .unwrap()
            })
            .collect();
        let formula = |ds: &[i64]| {
            let n = dim as i64 * (vars as i64 - ds.iter().sum::<i64>());
            ceil_floor0(n, *ds.iter().max().unwrap()).map_or(Valuation::Infinity, Valuation::Finite)
        };
        let ring_bound = formula(&degs);
        let got = report.bound("ring_axkatz").and_then(|b| b.bound);
        ensure(got == Some(ring_bound), || format!("instance {i}: ring bound {got:?} vs {ring_bound:?}"))?;
        ensure(val >= ring_bound, || format!("instance {i}: valuation {val:?} below ring bound {ring_bound:?}"))?;
        let commutative = (0..dim).all(|a| (0..dim).all(|b| spec.mult[a][b] == spec.mult[b][a]));
        let moreno = report.bound("moreno").unwrap();
        ensure(moreno.applicable == commutative, || format!("instance {i}: moreno applicability"))?;
        if commutative {
            let m = formula(&sigmas);
            ensure(moreno.bound == Some(m), || format!("instance {i}: moreno bound {:?} vs {m:?}", moreno.bound))?;
            ensure(val >= m, || format!("instance {i}: valuation {val:?} below p-weight bound {m:?}"))?;
            moreno_applied += 1;
        } else {
            noncommutative += 1;
        }
        ensure(report.pass, || format!("instance {i}: report fails"))?;
    }
    Ok(format!(
        "500 systems, p-weight bound applied to {moreno_applied}, {noncommutative} non-commutative; zero violations"
    ))
}

fn degree_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let fields = [Arc::new(FiniteRng::field(2, 1).map_err(err)?), Arc::new(FiniteRng::field(2, 2).map_err(err)?)];
    let mut done = 0;
    let mut strict = 0;
    while done < 500 {
        let ring = &fields[done % 2];
        let vars = rng.gen_range(1..=3);
        let f = random_poly(ring, vars, 4, 7, &mut rng);
        if f.is_zero() {
            continue;
        }
        let q = ring.order() as u32;
        let p = ring.p();
        let table = f.to_table(DEFAULT_ELEMENT_CAP).map_err(err)?;
        let fd = fdeg(&table).map_err(err)?;
        let terms = f.terms();
        let deg = terms.iter().map(|t| t.exps.iter().sum::<u32>() as u64).max().unwrap();
        let sigma = terms
            .iter()
            .map(|t| t.exps.iter().map(|&d| base_p_digit_sum(d as u64, p)).sum::<u64>())
            .max()
            .unwrap();
        // reduce with x^q = x and combine like terms
        let mut reduced: std::collections::BTreeMap<Vec<u32>, Vec<u64>> = Default::default();
        for t in &terms {
            let e: Vec<u32> = t.exps.iter().map(|&d| if d == 0 { 0 } else { (d - 1) % (q - 1) + 1 }).collect();
            let slot = reduced.entry(e).or_insert_with(|| vec![0; t.coeff.len()]);
            for (s, c) in slot.iter_mut().zip(&t.coeff) {
                *s = (*s + c) % p;
            }
        }
        reduced.retain(|_, c| c.iter().any(|&v| v != 0));
        let sigma_reduced = reduced
            .keys()
            .map(|e| e.iter().map(|&d| base_p_digit_sum(d as u64, p)).sum::<u64>())
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite);
        let lib_reduced = f.reduce_over_fq().map_err(err)?;
        ensure(lib_reduced.p_weight_degree() == sigma_reduced, || format!("poly {done}: reduction mismatch"))?;
        ensure(f.p_weight_degree() == Degree::Finite(sigma) && f.degree() == Degree::Finite(deg), || {
            format!("poly {done}: degree bookkeeping mismatch")
        })?;
        ensure(fd <= Degree::Finite(sigma) && sigma <= deg, || {
            format!("poly {done}: chain broken, fdeg {fd:?}, p-weight {sigma}, degree {deg}")
        })?;
        ensure(fd == sigma_reduced, || {
            format!("poly {done}: fdeg {fd:?} but reduced p-weight {sigma_reduced:?}")
        })?;
        if fd < Degree::Finite(sigma) {
            strict += 1;
        }
        done += 1;
    }
    Ok(format!("500 polynomials over F_2 and F_4 ({strict} with fdeg < p-weight), all exact"))
}

fn summation_invariant() -> Outcome {
    let mut cases = Vec::new();
    for n in 1..=3usize {
        for beta in 1..=n as u32 {
            cases.push((2u64, n, beta));
        }
    }
    for n in 1..=2usize {
        for beta in 1..=n as u32 {
            cases.push((3u64, n, beta));
        }
    }
    let mut computed = Vec::new();
    let mut over_cap = Vec::new();
    for (p, n, beta) in cases {
        let a = shape(p, &vec![1; n]);
        let b = shape(p, &[beta]);
        let size = (b.order() as u128).pow(a.order() as u32);
        let expected = Degree::Finite(n as u64 * (p - 1) - 1);
        match sigma_invariant(&a, &b, DEFAULT_SIGMA_CAP) {
            Ok(r) => {
                ensure(size <= DEFAULT_SIGMA_CAP as u128, || "cap not enforced".into())?;
                ensure(r.sigma == expected, || {
                    format!("(p, N, β) = ({p}, {n}, {beta}): σ = {:?}, expected {expected:?}", r.sigma)
                })?;
                computed.push(format!("({p},{n},{beta})"));
            }
            Err(Error::Capacity { .. }) if size > DEFAULT_SIGMA_CAP as u128 => {
                over_cap.push(format!("({p},{n},{beta})"));
            }
            Err(e) => return Err(format!("({p}, {n}, {beta}): {e}")),
        }
    }
    Ok(format!(
        "σ = N(p−1)−1 exactly for (p,N,β) in {}; beyond the 2^20 cap (capacity error): {}",
        computed.join(" "),
        over_cap.join(" ")
    ))
}

fn fdeg_cross_validation() -> Outcome {
    let z2 = shape(2, &[1]);
    let mut exhaustive = 0;
    for alphas in [vec![1], vec![2], vec![3], vec![1, 1], vec![1, 2], vec![2, 1], vec![1, 1, 1]] {
        let a = shape(2, &alphas);
        for idx in 0..(1u64 << a.order()) {
            let f = nth_scalar_table(&a, &z2, idx);
            let fast = fdeg(&f).map_err(err)?;
            let slow = fdeg_oracle(&f, DEFAULT_ORACLE_CAP).map_err(err)?;
            ensure(fast == slow, || format!("{alphas:?} table {idx}: fdeg {fast:?}, oracle {slow:?}"))?;
            exhaustive += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let domains = [
        (2u64, vec![1u32, 1, 1, 1]),
        (2, vec![2, 2]),
        (2, vec![1, 3]),
        (2, vec![4]),
        (2, vec![1, 1, 2]),
        (3, vec![1, 1]),
        (3, vec![2]),
    ];
    for i in 0..500 {
        let (p, alphas) = &domains[i % domains.len()];
        let a = shape(*p, alphas);
        let betas: Vec<u32> = if *p == 2 {
            (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(1..=2)).collect()
        } else {
            vec![1]
        };
        let b = shape(*p, &betas);
        let f = random_table(&mut rng, &a, &b);
        let fast = fdeg(&f).map_err(err)?;
        let slow = fdeg_oracle(&f, DEFAULT_ORACLE_CAP).map_err(err)?;
        ensure(fast == slow, || format!("random table {i} on {alphas:?} → {betas:?}: {fast:?} vs {slow:?}"))?;
    }
    Ok(format!("{exhaustive} exhaustive tables and 500 random larger tables agree"))
}
