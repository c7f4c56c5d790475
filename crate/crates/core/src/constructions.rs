//! Explicit monomial constructions: the degree-gap index `t_r`, the parity
//! `ε`, the families `W` with large minimal syzygy degree, the systems `V`
//! cut out of them, and the classification of `r` into ranges.

use std::collections::HashSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::bigraded::{
    dim_graded_piece, enumerate_monomials, format_rational, Ambient, ExactRational, Monomial, Polarization,
};
use crate::error::{Error, Result};
use crate::linsys::{basepoint_free_monomial, pure_power_set, BpfStatus, LinearSystem};
use crate::syzygy::min_syzygy_total_degree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeClass {
    /// `r ≤ m+n`.
    InvalidTooSmall,
    /// `m+n+1 ≤ r ≤ max(a,b)(m+n)/(min(a,b)min(m,n)) + 1`.
    GapGeneral,
    /// Above the threshold and `r ≤ max(a,b)(m+n)/min(m,n) + 1`.
    RangeB,
    /// `max(a,b)(m+n)/min(m,n) + 1 < r ≤ h^0`.
    RangeA,
    /// `r > h^0`.
    InvalidTooLarge,
}

/// Result of [`range_classify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeClassification {
    pub class: RangeClass,
    pub h0: u64,
    /// `max(a,b)(m+n)/(min(a,b)min(m,n)) + 1`.
    pub threshold: ExactRational,
    /// `max(a,b)(m+n)/min(m,n) + 1`, the top of range B.
    pub upper_b: ExactRational,
    /// `r < (m+1)(n+1)`: no basepoint-free monomial system of this size.
    pub monomial_gap_note: bool,
    /// `max(a,b) < min(m,n)·min(a,b)`: the general gap is empty.
    pub corollary1: bool,
    /// `max(a,b)(m+n) < (mn+m+n)·min(m,n)·min(a,b)`: the monomial gap is empty.
    pub corollary2: bool,
}

fn rat(p: u64, q: u64) -> ExactRational {
    ExactRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn range_classify(m: usize, n: usize, a: u32, b: u32, r: usize) -> Result<RangeClassification> {
    let amb = Ambient::new(m, n)?;
    let l = Polarization::new(a, b)?;
    let h0 = dim_graded_piece(amb, l.bidegree());
    let (hi, lo) = (l.max() as u64, l.min() as u64);
    let (mn, mins) = ((m + n) as u64, m.min(n) as u64);
    let one = rat(1, 1);
    let threshold = rat(hi * mn, lo * mins) + &one;
    let upper_b = rat(hi * mn, mins) + &one;
    let rr = rat(r as u64, 1);
    let class = if r <= m + n {
        RangeClass::InvalidTooSmall
    } else if r as u64 > h0 {
        RangeClass::InvalidTooLarge
    } else if rr <= threshold {
        RangeClass::GapGeneral
    } else if rr <= upper_b {
        RangeClass::RangeB
    } else {
        RangeClass::RangeA
    };
    Ok(RangeClassification {
        class,
        h0,
        threshold,
        upper_b,
        monomial_gap_note: r < (m + 1) * (n + 1),
        corollary1: hi < mins * lo,
        corollary2: hi * mn < ((m * n + m + n) as u64) * mins * lo,
    })
}

/// The unique `t` with `a'(m+n)/(t·min) + 1 < r ≤ a'(m+n)/((t−1)·min) + 1`,
/// `a' = max(a,b)`. Defined on range B only.
pub fn t_r(m: usize, n: usize, a: u32, b: u32, r: usize) -> Result<u32> {
    let class = range_classify(m, n, a, b, r)?;
    if class.class != RangeClass::RangeB {
        return Err(Error::OutOfRange { r, class: class.class });
    }
    let big_a = a.max(b) as u64 * (m + n) as u64;
    let k = (r - 1) as u64 * m.min(n) as u64;
    // smallest t with A < k·t
    let t = (big_a / k + 1) as u32;
    debug_assert!(t >= 2 && t <= a.min(b));
    Ok(t)
}

/// Parity of `⌊a'/(t−1)⌋`.
pub fn epsilon(a: u32, t: u32) -> Result<u32> {
    if t < 2 {
        return Err(Error::InvalidParameter(format!("epsilon needs t >= 2, got {t}")));
    }
    Ok((a / (t - 1)) % 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subcase {
    WideB,
    NarrowB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `a/(t−1)` not an integer, or an odd integer.
    Odd,
    /// `a/(t−1)` an even integer.
    Even,
}

/// How the y-exponent pattern of a family ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// Pure alternation from the first element.
    Alternating,
    /// Last element anchored on `ε`, alternating backwards.
    EpsilonAnchored,
}

/// Position `p` of a pattern of length `len`: `first` alternating forward,
/// or `eps` at the end alternating backward.
fn pattern(tail: Tail, len: usize, p: usize, first: u32, eps: u32) -> u32 {
    match tail {
        Tail::Alternating => first ^ (p as u32 % 2),
        Tail::EpsilonAnchored => eps ^ ((len - 1 - p) as u32 % 2),
    }
}

fn mono(amb: Ambient, xs: &[(usize, u32)], ys: &[(usize, u32)]) -> Monomial {
    let mut out = Monomial::one(amb);
    for &(i, e) in xs {
        out.alpha[i] += e;
    }
    for &(j, e) in ys {
        out.beta[j] += e;
    }
    out
}

/// A family along an edge: `k`-th element
/// `x_u^{a−off−k·s} x_v^{off+k·s} y_p^{b−γ_k} y_q^{γ_k}` for `k ∈ ks`, with
/// `γ_k = base + pattern`.
#[allow(clippy::too_many_arguments)]
fn edge_family(
    amb: Ambient,
    l: Polarization,
    s: u32,
    (u, v): (usize, usize),
    (p, q): (usize, usize),
    off: u32,
    ks: std::ops::RangeInclusive<u32>,
    base: u32,
    first: u32,
    tail: Tail,
    eps: u32,
) -> Vec<Monomial> {
    let ks: Vec<u32> = ks.collect();
    let len = ks.len();
    ks.iter()
        .enumerate()
        .map(|(pos, &k)| {
            let xv = off + k * s;
            let g = base + pattern(tail, len, pos, first, eps);
            mono(amb, &[(u, l.a - xv), (v, xv)], &[(p, l.b - g), (q, g)])
        })
        .collect()
}

/// The two case-A families `(𝒜, ℬ)` before any deletion, with
/// `|𝒜| = ⌊a/(t−1)⌋ − 1` and `|ℬ| = ⌊a/(t−1)⌋`. Requires `a ≥ b ≥ t ≥ 2`.
pub fn case_a_families(a: u32, b: u32, t: u32, tail: Tail) -> (Vec<Monomial>, Vec<Monomial>) {
    let amb = Ambient { m: 1, n: 1 };
    let l = Polarization { a, b };
    let s = t - 1;
    let k_max = a / s;
    let eps = k_max % 2;
    let fam_a = edge_family(amb, l, s, (0, 1), (0, 1), 0, 1..=k_max.saturating_sub(1), 0, 1, tail, eps);
    let fam_b = edge_family(amb, l, s, (0, 1), (0, 1), 1, 0..=k_max - 1, s, 0, tail, eps);
    (fam_a, fam_b)
}

/// Normalized parameters: `a ≥ b`, possibly with the factors exchanged.
#[derive(Debug, Clone, Copy)]
struct Normalized {
    amb: Ambient,
    l: Polarization,
    swapped: bool,
}

fn normalize(m: usize, n: usize, a: u32, b: u32) -> Result<Normalized> {
    let amb = Ambient::new(m, n)?;
    let l = Polarization::new(a, b)?;
    Ok(if a < b {
        Normalized { amb: amb.swapped(), l: l.swapped(), swapped: true }
    } else {
        Normalized { amb, l, swapped: false }
    })
}

fn case_label(amb: Ambient) -> CaseLabel {
    match (amb.m, amb.n) {
        (1, 1) => CaseLabel::A,
        (_, 1) => CaseLabel::B,
        (1, _) => CaseLabel::C,
        _ => CaseLabel::D,
    }
}

fn branch(a: u32, s: u32) -> Branch {
    if a % s == 0 && (a / s) % 2 == 0 {
        Branch::Even
    } else {
        Branch::Odd
    }
}

/// The non-pure monomials of the closed-form family in emission order,
/// deletions applied, duplicates dropped.
fn closed_family(nz: Normalized, t: u32, tail: Tail) -> Vec<Monomial> {
    let (amb, l) = (nz.amb, nz.l);
    let s = t - 1;
    let k_max = l.a / s;
    let eps = k_max % 2;
    let even = branch(l.a, s) == Branch::Even;
    let top = k_max.saturating_sub(1);
    let mut out: Vec<Monomial> = Vec::new();
    let mut dropped: Vec<Monomial> = Vec::new();

    // families along the x-edge (u,v) with the y-pair (p,q)
    let a_family = |u: usize, v: usize, p: usize, q: usize| {
        edge_family(amb, l, s, (u, v), (p, q), 0, 1..=top, 0, 1, tail, eps)
    };
    let even_drop = |u: usize, v: usize, p: usize| mono(amb, &[(u, s), (v, l.a - s)], &[(p, l.b)]);

    let label = case_label(amb);
    let use_b = matches!(label, CaseLabel::B) || (label == CaseLabel::D && amb.m >= amb.n);
    match label {
        CaseLabel::A => {
            let (fa, fb) = case_a_families(l.a, l.b, t, tail);
            out.extend(fa);
            if l.b < 2 * s {
                // narrow subcase drops the first element of ℬ
                dropped.push(fb[0].clone());
            }
            out.extend(fb);
            if even {
                dropped.push(even_drop(0, 1, 0));
            }
        }
        _ if use_b => {
            for i in 1..amb.m {
                out.extend(a_family(i - 1, i, 0, 1));
                out.extend(edge_family(amb, l, s, (i, i + 1), (0, 1), 0, 1..=top, 1, 1, tail, eps));
                if even {
                    dropped.push(even_drop(i - 1, i, 0));
                }
            }
        }
        _ => {
            for j in 0..=amb.n {
                let next = (j + 1) % (amb.n + 1);
                out.extend(a_family(0, 1, j, next));
                if even {
                    dropped.push(even_drop(0, 1, j));
                }
            }
        }
    }
    let pure: HashSet<Monomial> = pure_power_set(amb, l).into_iter().collect();
    let mut seen = HashSet::new();
    out.into_iter()
        .filter(|mono| !dropped.contains(mono) && !pure.contains(mono) && seen.insert(mono.clone()))
        .collect()
}

/// `totaldeg lcm(u,v) − (a+b)` for monomials of the same bidegree.
fn pair_gap(u: &Monomial, v: &Monomial) -> u32 {
    u.exponents().zip(v.exponents()).map(|(p, q)| p.saturating_sub(q)).sum()
}

fn compatible(chosen: &[Monomial], cand: &Monomial, t: u32) -> bool {
    chosen.iter().all(|c| c != cand && pair_gap(c, cand) >= t)
}

/// Verification report attached to a recipe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub distinct: bool,
    pub pure_powers: bool,
    pub t_min: i64,
    /// `a'(m+n)/((t_r−1)·min(m,n)) + 1` as `p/q`.
    pub target: String,
    pub bound_ok: bool,
}

/// A verified family `W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionRecipe {
    pub m: usize,
    pub n: usize,
    pub a: u32,
    pub b: u32,
    pub r: usize,
    /// The factors were exchanged to reach `a ≥ b`.
    pub swapped: bool,
    pub case_label: CaseLabel,
    pub subcase: Option<Subcase>,
    pub branch: Branch,
    pub t_r: u32,
    pub epsilon: u32,
    /// Non-pure monomials in emission order, then the pure powers; in the
    /// caller's orientation.
    pub monomials: Vec<Monomial>,
    pub tail_adjusted: bool,
    /// The closed-form families failed and were completed greedily.
    pub repaired: bool,
    pub verification: Verification,
}

impl ConstructionRecipe {
    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    /// The non-pure part, in emission order.
    pub fn extra_monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.monomials.iter().filter(|m| !m.is_pure_power())
    }

    pub fn system(&self) -> LinearSystem {
        let amb = Ambient { m: self.m, n: self.n };
        LinearSystem::monomial(amb, Polarization { a: self.a, b: self.b }, self.monomials.clone())
            .expect("recipe monomials are distinct and of bidegree (a,b)")
    }

    pub fn to_json(&self) -> RecipeJson {
        RecipeJson {
            m: self.m,
            n: self.n,
            a: self.a,
            b: self.b,
            r: self.r,
            swapped: self.swapped,
            case: self.case_label,
            subcase: self.subcase,
            branch: self.branch,
            t_r: self.t_r,
            epsilon: self.epsilon,
            dim: self.dim(),
            tail_adjusted: self.tail_adjusted,
            repaired: self.repaired,
            monomials: self.monomials.iter().map(|m| m.to_string()).collect(),
            verification: self.verification.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeJson {
    pub m: usize,
    pub n: usize,
    pub a: u32,
    pub b: u32,
    pub r: usize,
    pub swapped: bool,
    pub case: CaseLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcase: Option<Subcase>,
    pub branch: Branch,
    pub t_r: u32,
    pub epsilon: u32,
    pub dim: usize,
    pub tail_adjusted: bool,
    pub repaired: bool,
    pub monomials: Vec<String>,
    pub verification: Verification,
}

fn target_of(nz: Normalized, t: u32) -> ExactRational {
    let (amb, l) = (nz.amb, nz.l);
    rat(l.a as u64 * (amb.m + amb.n) as u64, (t as u64 - 1) * amb.m.min(amb.n) as u64) + rat(1, 1)
}

/// Build and verify a candidate `W`, without enforcing the dimension bound.
fn generate_w(m: usize, n: usize, a: u32, b: u32, r: usize) -> Result<ConstructionRecipe> {
    let t = t_r(m, n, a, b, r)?;
    let nz = normalize(m, n, a, b)?;
    let (amb, l) = (nz.amb, nz.l);
    let s = t - 1;
    let target = target_of(nz, t);
    let needed = target.ceil().to_integer();
    let pure = pure_power_set(amb, l);

    let attempt = |extras: &[Monomial]| -> Option<Vec<Monomial>> {
        let mut all = pure.clone();
        for e in extras {
            if !compatible(&all, e, t) {
                return None;
            }
            all.push(e.clone());
        }
        Some(extras.to_vec())
    };

    let mut tail_adjusted = false;
    let mut repaired = false;
    let alt = closed_family(nz, t, Tail::Alternating);
    let extras = match attempt(&alt) {
        Some(e) if BigInt::from(e.len() + pure.len()) >= needed => e,
        _ => {
            let eps = closed_family(nz, t, Tail::EpsilonAnchored);
            match attempt(&eps) {
                Some(e) if BigInt::from(e.len() + pure.len()) >= needed => {
                    tail_adjusted = true;
                    e
                }
                _ => {
                    // keep what fits from the closed-form list, then extend greedily
                    repaired = true;
                    let mut chosen = pure.clone();
                    let mut extras = Vec::new();
                    let basis = enumerate_monomials(amb, l.bidegree());
                    for cand in alt.iter().chain(basis.iter()) {
                        if BigInt::from(chosen.len()) >= needed {
                            break;
                        }
                        if compatible(&chosen, cand, t) {
                            chosen.push(cand.clone());
                            extras.push(cand.clone());
                        }
                    }
                    extras
                }
            }
        }
    };

    let mut monomials: Vec<Monomial> = extras.into_iter().chain(pure.iter().cloned()).collect();
    let normalized_sys = LinearSystem::monomial(amb, l, monomials.clone())?;
    let distinct = monomials.iter().collect::<HashSet<_>>().len() == monomials.len();
    let pure_ok = basepoint_free_monomial(&normalized_sys)? == BpfStatus::Certified;
    let t_min = min_syzygy_total_degree(&normalized_sys)?;
    let bound_ok = ExactRational::from_integer(BigInt::from(monomials.len())) >= target;
    if nz.swapped {
        monomials = monomials.iter().map(Monomial::transposed).collect();
    }
    let subcase = (case_label(amb) == CaseLabel::A).then(|| {
        if 2 * s <= l.b {
            Subcase::WideB
        } else {
            Subcase::NarrowB
        }
    });
    let recipe = ConstructionRecipe {
        m,
        n,
        a,
        b,
        r,
        swapped: nz.swapped,
        case_label: case_label(amb),
        subcase,
        branch: branch(l.a, s),
        t_r: t,
        epsilon: epsilon(l.a, t)?,
        monomials,
        tail_adjusted,
        repaired,
        verification: Verification {
            distinct,
            pure_powers: pure_ok,
            t_min,
            target: format_rational(&target),
            bound_ok,
        },
    };
    if !distinct || !pure_ok || t_min < t as i64 {
        return Err(verification_error(&recipe, "conditions i-iii"));
    }
    Ok(recipe)
}

fn verification_error(recipe: &ConstructionRecipe, condition: &str) -> Error {
    let v = &recipe.verification;
    Error::ConstructionVerification {
        condition: format!(
            "{condition}: N={} target={} t_min={} t_r={}",
            recipe.dim(),
            v.target,
            v.t_min,
            recipe.t_r
        ),
        candidate: recipe.monomials.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", "),
    }
}

/// A verified monomial family `W` with pure powers, `t_min(W) ≥ t_r`, and
/// `dim W ≥ a'(m+n)/((t_r−1)·min(m,n)) + 1`.
pub fn build_w(m: usize, n: usize, a: u32, b: u32, r: usize) -> Result<ConstructionRecipe> {
    let recipe = generate_w(m, n, a, b, r)?;
    if !recipe.verification.bound_ok {
        return Err(verification_error(&recipe, "dimension bound"));
    }
    Ok(recipe)
}

/// An `r`-dimensional basepoint-free monomial system with `t_min ≥ t_r`:
/// the pure powers plus the first `r − (m+1)(n+1)` non-pure monomials of
/// the family in emission order.
pub fn build_v(m: usize, n: usize, a: u32, b: u32, r: usize) -> Result<LinearSystem> {
    t_r(m, n, a, b, r)?;
    let floor = (m + 1) * (n + 1);
    if r < floor {
        return Err(Error::ConstructionUnavailable(format!(
            "r={r} is below (m+1)(n+1)={floor}; no basepoint-free monomial system exists"
        )));
    }
    let recipe = generate_w(m, n, a, b, r)?;
    if r > recipe.dim() {
        return Err(Error::ConstructionUnavailable(format!(
            "r={r} exceeds the family dimension N={}",
            recipe.dim()
        )));
    }
    let amb = Ambient::new(m, n)?;
    let l = Polarization::new(a, b)?;
    let support: Vec<Monomial> = recipe
        .extra_monomials()
        .take(r - floor)
        .cloned()
        .chain(pure_power_set(amb, l))
        .collect();
    let sys = LinearSystem::monomial(amb, l, support)?;
    let t_min = min_syzygy_total_degree(&sys)?;
    if t_min < recipe.t_r as i64 {
        return Err(Error::ConstructionVerification {
            condition: format!("t_min(V)={t_min} < t_r={}", recipe.t_r),
            candidate: sys.support().iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", "),
        });
    }
    Ok(sys)
}
