#![allow(dead_code)]

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bisyz::bigraded::{binomial, enumerate_monomials, Ambient, Bidegree, Monomial, Polarization};
use bisyz::linsys::{pure_power_set, LinearSystem};

pub fn amb(m: usize, n: usize) -> Ambient {
    Ambient::new(m, n).unwrap()
}

pub fn pol(a: u32, b: u32) -> Polarization {
    Polarization::new(a, b).unwrap()
}

/// Rank by plain Gaussian elimination over Q on a dense matrix.
pub fn dense_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][c].clone();
        for i in 0..rows.len() {
            if i != rank && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &pivot;
                for k in c..cols {
                    let d = &f * &rows[rank][k];
                    rows[i][k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn key(m: &Monomial) -> Vec<u32> {
    m.alpha.iter().chain(&m.beta).copied().collect()
}

/// `dim ker(V ⊗ R_(x,y) → R_(x+a,y+b))` built densely from the forms.
pub fn h0_oracle(sys: &LinearSystem, x: i64, y: i64) -> u64 {
    let amb = sys.ambient();
    let l = sys.polarization();
    let src = enumerate_monomials(amb, Bidegree::new(x, y));
    if src.is_empty() {
        return 0;
    }
    let tgt = enumerate_monomials(amb, Bidegree::new(x + l.a as i64, y + l.b as i64));
    let index: HashMap<Vec<u32>, usize> = tgt.iter().enumerate().map(|(i, m)| (key(m), i)).collect();
    let support: Vec<Vec<u32>> = sys.support().iter().map(key).collect();
    let mut rows = Vec::new();
    for form in sys.forms() {
        for g in &src {
            let gk = key(g);
            let mut row = vec![BigRational::zero(); tgt.len()];
            for (s, c) in &form {
                let prod: Vec<u32> = support[*s].iter().zip(&gk).map(|(u, v)| u + v).collect();
                row[index[&prod]] += BigRational::from_integer(c.clone());
            }
            rows.push(row);
        }
    }
    (rows.len() - dense_rank(rows)) as u64
}

/// Smallest `deg lcm(u,v) − (a+b)` over pairs of support monomials.
pub fn t_min_oracle(support: &[Monomial]) -> i64 {
    let mut best = i64::MAX;
    for i in 0..support.len() {
        for j in i + 1..support.len() {
            let (u, v) = (key(&support[i]), key(&support[j]));
            let lcm: u32 = u.iter().zip(&v).map(|(p, q)| *p.max(q)).sum();
            let deg: u32 = u.iter().sum();
            best = best.min(lcm as i64 - deg as i64);
        }
    }
    best
}

/// `D·L^{m+n−1}` for `D = (p,q)`, expanded by hand.
pub fn intersection_oracle(amb: Ambient, l: Polarization, p: i64, q: i64) -> BigInt {
    let (m, n) = (amb.m as u64, amb.n as u64);
    let d = m + n;
    let a = BigInt::from(l.a);
    let b = BigInt::from(l.b);
    let pow = |x: &BigInt, e: u64| num_traits::pow(x.clone(), e as usize);
    let term_p = BigInt::from(binomial(d - 1, m - 1)) * pow(&a, m - 1) * pow(&b, n) * p;
    let term_q = BigInt::from(binomial(d - 1, m)) * pow(&a, m) * pow(&b, n - 1) * q;
    term_p + term_q
}

/// `L^{m+n} = C(m+n, m) a^m b^n`.
pub fn degree_oracle(amb: Ambient, l: Polarization) -> BigInt {
    BigInt::from(binomial((amb.m + amb.n) as u64, amb.m as u64))
        * num_traits::pow(BigInt::from(l.a), amb.m)
        * num_traits::pow(BigInt::from(l.b), amb.n)
}

pub fn rat(p: BigInt, q: BigInt) -> BigRational {
    BigRational::new(p, q)
}

pub fn one() -> BigRational {
    BigRational::one()
}

/// A monomial system on `(m,n,a,b)` containing every pure power plus a
/// random selection of the other monomials.
pub fn random_bpf_monomial(amb: Ambient, l: Polarization, rng: &mut ChaCha8Rng, extra: usize) -> LinearSystem {
    let mut rest: Vec<Monomial> = enumerate_monomials(amb, l.bidegree())
        .into_iter()
        .filter(|m| !m.is_pure_power())
        .collect();
    rest.shuffle(rng);
    let take = extra.min(rest.len());
    let mut support = pure_power_set(amb, l);
    support.extend(rest.into_iter().take(take));
    LinearSystem::monomial(amb, l, support).unwrap()
}

/// A random monomial system of size at least 2, not necessarily
/// basepoint-free.
pub fn random_monomial(amb: Ambient, l: Polarization, rng: &mut ChaCha8Rng) -> LinearSystem {
    let mut all = enumerate_monomials(amb, l.bidegree());
    all.shuffle(rng);
    let k = rng.gen_range(2..=all.len().min(7).max(2));
    all.truncate(k.min(all.len()));
    LinearSystem::monomial(amb, l, all).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn monomial_system(m: usize, n: usize, a: u32, b: u32, list: &str) -> LinearSystem {
    let amb = amb(m, n);
    LinearSystem::monomial(amb, pol(a, b), bisyz::bigraded::parse_monomial_list(list, amb).unwrap()).unwrap()
}

/// Largest set of bidegree-`l` monomials containing every pure power with
/// pairwise `deg lcm − (a+b) ≥ t`, by branch and bound.
pub fn max_gap_family(amb: Ambient, l: Polarization, t: u32) -> usize {
    let gap = |u: &Monomial, v: &Monomial| -> u32 {
        key(u).iter().zip(key(v)).map(|(p, q)| p.saturating_sub(q)).sum()
    };
    let pure = pure_power_set(amb, l);
    if pure.iter().enumerate().any(|(i, p)| pure[i + 1..].iter().any(|q| gap(p, q) < t)) {
        return 0;
    }
    let cands: Vec<Monomial> = enumerate_monomials(amb, l.bidegree())
        .into_iter()
        .filter(|m| !m.is_pure_power() && pure.iter().all(|p| gap(m, p) >= t))
        .collect();
    let k = cands.len();
    let adj: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| i != j && gap(&cands[i], &cands[j]) >= t).collect()).collect();
    fn grow(adj: &[Vec<bool>], size: usize, pool: Vec<usize>, best: &mut usize) {
        if pool.is_empty() {
            *best = (*best).max(size);
            return;
        }
        if size + pool.len() <= *best {
            return;
        }
        for (idx, &v) in pool.iter().enumerate() {
            if size + pool.len() - idx <= *best {
                return;
            }
            let next: Vec<usize> = pool[idx + 1..].iter().copied().filter(|&w| adj[v][w]).collect();
            grow(adj, size + 1, next, best);
        }
    }
    let mut best = 0;
    grow(&adj, 0, (0..k).collect(), &mut best);
    pure.len() + best
}

/// `h0(⋀^q M_V(x,y))` as the kernel of the dense Koszul map
/// `⋀^q V ⊗ R_(x,y) → ⋀^(q−1) V ⊗ R_(x+a,y+b)` for a monomial system.
pub fn wedge_oracle(support: &[Monomial], amb: Ambient, l: Polarization, q: usize, x: i64, y: i64) -> u64 {
    let r = support.len();
    let src = enumerate_monomials(amb, Bidegree::new(x, y));
    if src.is_empty() {
        return 0;
    }
    let tgt = enumerate_monomials(amb, Bidegree::new(x + l.a as i64, y + l.b as i64));
    let ti: HashMap<Vec<u32>, usize> = tgt.iter().enumerate().map(|(i, m)| (key(m), i)).collect();
    let subsets = |k: usize| -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for i in 0..r {
            let mut more = Vec::new();
            for s in &out {
                if s.len() < k {
                    let mut t = s.clone();
                    t.push(i);
                    more.push(t);
                }
            }
            out.extend(more);
        }
        out.retain(|s| s.len() == k);
        out
    };
    let lower: HashMap<Vec<usize>, usize> = subsets(q - 1).into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut rows = Vec::new();
    for s in subsets(q) {
        for g in &src {
            let mut row = vec![BigRational::zero(); lower.len() * tgt.len()];
            for (pos, &drop) in s.iter().enumerate() {
                let rest: Vec<usize> = s.iter().copied().filter(|&i| i != drop).collect();
                let prod: Vec<u32> = key(&support[drop]).iter().zip(key(g)).map(|(u, v)| u + v).collect();
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                row[lower[&rest] * tgt.len() + ti[&prod]] += BigRational::from_integer(sign.into());
            }
            rows.push(row);
        }
    }
    (rows.len() - dense_rank(rows)) as u64
}

/// A subset `U = f·U'` of the support with `U'` basepoint-free of bidegree
/// `L'` gives `M_U ⊂ M_V` of rank `|U|−1` and `c1 = −L'`. Returns the
/// subset whose slope beats `μ(M_V)` by the most, with `Ordering::Equal`
/// meaning equal slopes.
pub fn subsupport_destabilizer(support: &[Monomial], amb: Ambient, l: Polarization) -> Option<(Vec<Monomial>, std::cmp::Ordering)> {
    let r = support.len();
    let total = degree_oracle(amb, l);
    let mut best: Option<(Vec<Monomial>, BigRational)> = None;
    for mask in 1u64..(1 << r) - 1 {
        let u: Vec<&Monomial> = (0..r).filter(|i| mask >> i & 1 == 1).map(|i| &support[i]).collect();
        if u.len() < 2 {
            continue;
        }
        let keys: Vec<Vec<u32>> = u.iter().map(|m| key(m)).collect();
        let f: Vec<u32> = (0..keys[0].len()).map(|c| keys.iter().map(|k| k[c]).min().unwrap()).collect();
        let fa: u32 = f[..=amb.m].iter().sum();
        let fb: u32 = f[amb.m + 1..].iter().sum();
        let (a2, b2) = (l.a - fa, l.b - fb);
        let pure: Vec<Vec<u32>> = (0..=amb.m)
            .flat_map(|i| {
                (0..=amb.n).map(move |j| {
                    let mut k = vec![0; amb.m + amb.n + 2];
                    k[i] += a2;
                    k[amb.m + 1 + j] += b2;
                    k
                })
            })
            .collect();
        let quotients: Vec<Vec<u32>> = keys.iter().map(|k| k.iter().zip(&f).map(|(p, q)| p - q).collect()).collect();
        if !pure.iter().all(|p| quotients.contains(p)) {
            continue;
        }
        // μ(M_U) − μ(M_V) = L^d/(r−1) − L'·L^(d−1)/(|U|−1)
        let sub = intersection_oracle(amb, l, a2 as i64, b2 as i64);
        let diff = BigRational::new(total.clone(), BigInt::from(r - 1)) - BigRational::new(sub, BigInt::from(u.len() - 1));
        if best.as_ref().map_or(true, |(_, d)| diff > *d) {
            best = Some((u.into_iter().cloned().collect(), diff));
        }
    }
    best.filter(|(_, d)| !(*d < BigRational::zero())).map(|(u, d)| (u, d.cmp(&BigRational::zero())))
}
