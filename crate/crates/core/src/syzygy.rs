//! Syzygy-bundle cohomology: `h^0(M_V(x,y))`, `h^0(Λ^q M_V(x,y))` through
//! the Koszul contraction, the minimal syzygy degree, and the bidegrees of
//! minimal syzygy generators.

use std::collections::HashMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::bigraded::{enumerate_monomials, variables, Bidegree, Monomial};
use crate::error::{Error, Result};
use crate::linalg::{rank, rank_and_kernel, sparse_from_entries, Field, PrimeField, Rationals, SparseVec};
use crate::linsys::{CoefficientField, LinearSystem, SystemKind};

/// Field used for rank computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankField {
    Rational,
    Prime(u64),
}

impl RankField {
    /// The system's own coefficient field.
    pub fn of(sys: &LinearSystem) -> Self {
        match sys.field() {
            CoefficientField::Rational => RankField::Rational,
            CoefficientField::Prime(p) => RankField::Prime(p),
        }
    }
}

macro_rules! with_field {
    ($mode:expr, $f:ident => $body:expr) => {
        match $mode {
            RankField::Rational => {
                let $f = Rationals;
                $body
            }
            RankField::Prime(p) => {
                let $f = PrimeField::new(p).expect("prime checked at construction");
                $body
            }
        }
    };
}

type Exps = Vec<u32>;

fn exps(mono: &Monomial) -> Exps {
    mono.exponents().collect()
}

fn add_exps(u: &[u32], v: &[u32]) -> Exps {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

fn index_of(monos: &[Monomial]) -> HashMap<Exps, usize> {
    monos.iter().enumerate().map(|(i, m)| (exps(m), i)).collect()
}

/// All `k`-subsets of `0..r` in lexicographic order.
pub fn subsets(r: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, r: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..r {
            if r - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, r, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= r {
        rec(0, r, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// `h^0(M_V(x,y))`, the dimension of the syzygies of `f_1..f_r` whose
/// coefficients have bidegree `(x,y)`. Monomial systems use product
/// counting; general systems an exact rank over their coefficient field.
pub fn h0_twist(sys: &LinearSystem, twist: Bidegree) -> u64 {
    if !twist.is_effective() {
        return 0;
    }
    match sys.kind() {
        SystemKind::Monomial => h0_twist_counting(sys, twist),
        SystemKind::General => h0_twist_rank(sys, twist, RankField::of(sys)),
    }
}

/// Product-counting formula `r·dim R_(x,y) − #{u·f_i}`; monomial systems only.
pub fn h0_twist_counting(sys: &LinearSystem, twist: Bidegree) -> u64 {
    assert_eq!(sys.kind(), SystemKind::Monomial, "counting needs a monomial system");
    if !twist.is_effective() {
        return 0;
    }
    let gs: Vec<Exps> = enumerate_monomials(sys.ambient(), twist).iter().map(exps).collect();
    let mut products = std::collections::HashSet::with_capacity(gs.len() * sys.r());
    for f in sys.support() {
        let fe = exps(f);
        for g in &gs {
            products.insert(add_exps(&fe, g));
        }
    }
    (sys.r() * gs.len() - products.len()) as u64
}

/// `h^0(M_V(x,y))` as the kernel dimension of the evaluation matrix.
pub fn h0_twist_rank(sys: &LinearSystem, twist: Bidegree, field: RankField) -> u64 {
    if !twist.is_effective() {
        return 0;
    }
    let map = koszul_map(sys, 1, twist).expect("q = 1 is always in range");
    with_field!(field, f => map.kernel_dim(&f))
}

/// Sparse integer matrix of a Koszul differential, stored by columns.
#[derive(Debug, Clone)]
pub struct KoszulMap {
    pub source_dim: usize,
    pub target_dim: usize,
    pub columns: Vec<Vec<(usize, BigInt)>>,
}

impl KoszulMap {
    pub fn rank<F: Field>(&self, field: &F) -> usize {
        rank(field, self.columns.iter().map(|c| to_field(field, c)))
    }

    pub fn kernel_dim<F: Field>(&self, field: &F) -> u64 {
        (self.source_dim - self.rank(field)) as u64
    }

    /// The composite `other ∘ self` as a sparse integer matrix.
    pub fn then(&self, other: &KoszulMap) -> Vec<Vec<(usize, BigInt)>> {
        assert_eq!(self.target_dim, other.source_dim);
        self.columns
            .iter()
            .map(|col| {
                let mut acc: HashMap<usize, BigInt> = HashMap::new();
                for (k, c) in col {
                    for (i, d) in &other.columns[*k] {
                        *acc.entry(*i).or_default() += c * d;
                    }
                }
                let mut out: Vec<(usize, BigInt)> =
                    acc.into_iter().filter(|(_, v)| !num_traits::Zero::is_zero(v)).collect();
                out.sort_by_key(|(i, _)| *i);
                out
            })
            .collect()
    }
}

fn to_field<F: Field>(field: &F, col: &[(usize, BigInt)]) -> SparseVec<F::Elem> {
    sparse_from_entries(field, col.iter().map(|(i, v)| (*i, field.from_bigint(v))).collect())
}

/// The contraction `Λ^q V ⊗ R_(x,y) → Λ^{q−1} V ⊗ R_(x+a,y+b)`,
/// `e_I ⊗ g ↦ Σ_j (−1)^{j−1} e_{I∖i_j} ⊗ f_{i_j} g`.
///
/// Basis of `Λ^k V ⊗ R_D`: index `s·dim R_D + u` for the `s`-th
/// `k`-subset in lexicographic order and the `u`-th monomial of `R_D` in
/// canonical order. `q` may run up to `r`.
pub fn koszul_map(sys: &LinearSystem, q: usize, twist: Bidegree) -> Result<KoszulMap> {
    let r = sys.r();
    if q == 0 || q > r {
        return Err(Error::WedgeOutOfRange { q, max: r });
    }
    let amb = sys.ambient();
    let l = sys.polarization().bidegree();
    let src_monos = enumerate_monomials(amb, twist);
    let tgt_monos = enumerate_monomials(amb, twist + l);
    let tgt_index = index_of(&tgt_monos);
    let src_sets = subsets(r, q);
    let tgt_sets: HashMap<Vec<usize>, usize> =
        subsets(r, q - 1).into_iter().enumerate().map(|(i, s)| (s, i)).collect();

    let support: Vec<Exps> = sys.support().iter().map(exps).collect();
    let forms = sys.forms();
    let mut columns = Vec::with_capacity(src_sets.len() * src_monos.len());
    for set in &src_sets {
        for g in &src_monos {
            let ge = exps(g);
            let mut col: HashMap<usize, BigInt> = HashMap::new();
            for (j, &i) in set.iter().enumerate() {
                let mut rest = set.clone();
                rest.remove(j);
                let row_block = tgt_sets[&rest] * tgt_monos.len();
                for (s, c) in &forms[i] {
                    let u = tgt_index[&add_exps(&support[*s], &ge)];
                    let v = if j % 2 == 0 { c.clone() } else { -c.clone() };
                    *col.entry(row_block + u).or_default() += v;
                }
            }
            let mut col: Vec<(usize, BigInt)> =
                col.into_iter().filter(|(_, v)| !num_traits::Zero::is_zero(v)).collect();
            col.sort_by_key(|(i, _)| *i);
            columns.push(col);
        }
    }
    Ok(KoszulMap {
        source_dim: src_sets.len() * src_monos.len(),
        target_dim: tgt_sets.len() * tgt_monos.len(),
        columns,
    })
}

/// `h^0(Λ^q M_V(x,y))` for `1 ≤ q ≤ r−1`, computed as the kernel of the
/// Koszul contraction. Ranks are taken over the system's own field.
pub fn h0_wedge_twist(sys: &LinearSystem, q: usize, twist: Bidegree) -> Result<u64> {
    h0_wedge_twist_with(sys, q, twist, RankField::of(sys))
}

pub fn h0_wedge_twist_with(sys: &LinearSystem, q: usize, twist: Bidegree, field: RankField) -> Result<u64> {
    let r = sys.r();
    if q == 0 || q + 1 > r {
        return Err(Error::WedgeOutOfRange { q, max: r.saturating_sub(1) });
    }
    if !twist.is_effective() {
        return Ok(0);
    }
    if q == 1 && sys.kind() == SystemKind::Monomial {
        return Ok(h0_twist_counting(sys, twist));
    }
    Ok(match sys.kind() {
        SystemKind::Monomial => with_field!(field, f => monomial_wedge_kernel(sys, q, twist, &f)),
        SystemKind::General => {
            let map = koszul_map(sys, q, twist)?;
            with_field!(field, f => map.kernel_dim(&f))
        }
    })
}

/// For monomial systems the contraction preserves the fine
/// `Z^{m+n+2}`-degree `deg g + Σ_{i∈I} deg f_i`, and within a fine degree
/// a basis element is determined by its subset alone.
fn monomial_wedge_kernel<F: Field>(sys: &LinearSystem, q: usize, twist: Bidegree, field: &F) -> u64 {
    let support: Vec<Exps> = sys.support().iter().map(exps).collect();
    let gs: Vec<Exps> = enumerate_monomials(sys.ambient(), twist).iter().map(exps).collect();
    let mut blocks: HashMap<Exps, Vec<Vec<usize>>> = HashMap::new();
    for set in subsets(sys.r(), q) {
        let mut base = vec![0u32; support[0].len()];
        for &i in &set {
            base = add_exps(&base, &support[i]);
        }
        for g in &gs {
            blocks.entry(add_exps(&base, g)).or_default().push(set.clone());
        }
    }
    let mut kernel = 0u64;
    for sets in blocks.values() {
        if sets.len() == 1 {
            // a single nonzero column
            continue;
        }
        let mut rows: HashMap<Vec<usize>, usize> = HashMap::new();
        let cols = sets.iter().map(|set| {
            let mut col = Vec::with_capacity(set.len());
            for j in 0..set.len() {
                let mut rest = set.clone();
                rest.remove(j);
                let next = rows.len();
                let row = *rows.entry(rest).or_insert(next);
                let sign = if j % 2 == 0 { field.one() } else { field.neg(&field.one()) };
                col.push((row, sign));
            }
            col.sort_by_key(|(i, _)| *i);
            col
        });
        let cols: Vec<SparseVec<F::Elem>> = cols.collect();
        kernel += (sets.len() - rank(field, cols)) as u64;
    }
    kernel
}

/// Twists `(x,y)` with `x+y = t`, `x` ascending.
fn twists_of_total(t: i64) -> impl Iterator<Item = Bidegree> {
    (0..=t).map(move |x| Bidegree::new(x, t - x))
}

/// `t_min`: the least total degree `x+y` with `h^0(M_V(x,y)) > 0`, scanning
/// total degrees `1, 2, …, a+b`.
pub fn min_syzygy_total_degree(sys: &LinearSystem) -> Result<i64> {
    if sys.r() < 2 {
        return Err(Error::InvalidParameter("a single form has no syzygies".into()));
    }
    let top = sys.polarization().bidegree().total();
    for t in 1..=top {
        if twists_of_total(t).any(|tw| h0_twist(sys, tw) > 0) {
            return Ok(t);
        }
    }
    unreachable!("Koszul relations live at total degree a+b")
}

/// `max_{i<j} totaldeg lcm(f_i, f_j) − (a+b)` over the support.
pub fn taylor_bound(sys: &LinearSystem) -> i64 {
    let s = sys.support();
    let mut best = 0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let l = s[i].lcm(&s[j]).expect("same ambient");
            best = best.max(l.bidegree().total());
        }
    }
    (best - sys.polarization().bidegree().total()).max(0)
}

/// Minimal syzygy generators counted by bidegree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalGenerators {
    /// `(bidegree, count)` with positive counts, in scan order.
    pub counts: Vec<(Bidegree, u64)>,
    pub bound: i64,
    /// Set when `bound` may miss generators.
    pub truncated: bool,
}

impl MinimalGenerators {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(_, c)| c).sum()
    }
}

/// Number of minimal generators of the syzygy module in every bidegree of
/// total degree at most `bound` (default: the Taylor bound for monomial
/// systems, `a+b` otherwise), as `dim Syz_D − dim Σ_v v·Syz_{D−deg v}`.
pub fn minimal_generator_bidegrees(sys: &LinearSystem, bound: Option<i64>) -> MinimalGenerators {
    let default = match sys.kind() {
        SystemKind::Monomial => taylor_bound(sys),
        SystemKind::General => sys.polarization().bidegree().total(),
    };
    let bound = bound.unwrap_or(default);
    let truncated = bound < default || sys.kind() == SystemKind::General;
    let counts = with_field!(RankField::of(sys), f => mingens_over(sys, bound, &f));
    MinimalGenerators { counts, bound, truncated }
}

fn mingens_over<F: Field>(sys: &LinearSystem, bound: i64, field: &F) -> Vec<(Bidegree, u64)> {
    let amb = sys.ambient();
    let vars = variables(amb);
    let mut kernels: HashMap<Bidegree, Vec<SparseVec<F::Elem>>> = HashMap::new();
    let mut out = Vec::new();
    for t in 1..=bound {
        for d in twists_of_total(t) {
            let map = koszul_map(sys, 1, d).expect("q = 1");
            let (_, ker) = rank_and_kernel(field, map.columns.iter().map(|c| to_field(field, c)).collect());
            if ker.is_empty() {
                kernels.insert(d, ker);
                continue;
            }
            let monos = enumerate_monomials(amb, d);
            let index = index_of(&monos);
            let mut stacked = Vec::new();
            for v in &vars {
                let prev = d - v.bidegree();
                let Some(lower) = kernels.get(&prev) else { continue };
                if lower.is_empty() {
                    continue;
                }
                let prev_monos = enumerate_monomials(amb, prev);
                let ve = exps(v);
                let lift: Vec<usize> = prev_monos.iter().map(|u| index[&add_exps(&exps(u), &ve)]).collect();
                for vec in lower {
                    stacked.push(
                        vec.iter()
                            .map(|(k, c)| {
                                let (i, u) = (k / prev_monos.len(), k % prev_monos.len());
                                (i * monos.len() + lift[u], c.clone())
                            })
                            .collect::<Vec<_>>(),
                    );
                }
            }
            let decomposable = rank(field, stacked.into_iter().map(|mut v| {
                v.sort_by_key(|(i, _)| *i);
                v
            }));
            let new = ker.len() - decomposable;
            if new > 0 {
                out.push((d, new as u64));
            }
            kernels.insert(d, ker);
        }
    }
    out
}

/// Twist table, `t_min`, and optionally minimal generators of a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyzygyProfile {
    pub system: String,
    pub table: Vec<(Bidegree, u64)>,
    pub t_min: i64,
    pub mingens: Option<MinimalGenerators>,
}

/// Tabulate `h^0(M_V(x,y))` for `x+y ≤ max_total` (default `a+b`).
pub fn syzygy_profile(sys: &LinearSystem, max_total: Option<i64>, with_mingens: bool) -> Result<SyzygyProfile> {
    let max_total = max_total.unwrap_or_else(|| sys.polarization().bidegree().total());
    let mut table = Vec::new();
    for t in 0..=max_total {
        for d in twists_of_total(t) {
            table.push((d, h0_twist(sys, d)));
        }
    }
    Ok(SyzygyProfile {
        system: sys.content_hash(),
        table,
        t_min: min_syzygy_total_degree(sys)?,
        mingens: with_mingens.then(|| minimal_generator_bidegrees(sys, None)),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyzygyProfileJson {
    pub system: String,
    pub table: Vec<[i64; 3]>,
    pub t_min: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mingens: Option<Vec<[i64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated_at: Option<i64>,
}

impl SyzygyProfile {
    pub fn to_json(&self) -> SyzygyProfileJson {
        SyzygyProfileJson {
            system: self.system.clone(),
            table: self.table.iter().map(|(d, h)| [d.p, d.q, *h as i64]).collect(),
            t_min: self.t_min,
            mingens: self
                .mingens
                .as_ref()
                .map(|g| g.counts.iter().map(|(d, c)| [d.p, d.q, *c as i64]).collect()),
            truncated_at: self.mingens.as_ref().filter(|g| g.truncated).map(|g| g.bound),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraded::{parse_monomial_list, Ambient, Polarization};
    use crate::linsys::pure_power_set;

    fn p11() -> Ambient {
        Ambient::new(1, 1).unwrap()
    }

    fn sys(list: &str, a: u32, b: u32) -> LinearSystem {
        let amb = p11();
        LinearSystem::monomial(amb, Polarization::new(a, b).unwrap(), parse_monomial_list(list, amb).unwrap())
            .unwrap()
    }

    fn v1() -> LinearSystem {
        sys("x0^2 y0, x0^2 y1, x1^2 y0, x1^2 y1, x0 x1 y0", 2, 1)
    }

    fn w1() -> LinearSystem {
        let l = Polarization::new(2, 1).unwrap();
        LinearSystem::monomial(p11(), l, pure_power_set(p11(), l)).unwrap()
    }

    #[test]
    fn h0_examples() {
        assert_eq!(h0_twist(&v1(), Bidegree::new(1, 0)), 2);
        assert_eq!(h0_twist(&v1(), Bidegree::new(0, 0)), 0);
        assert_eq!(h0_twist(&w1(), Bidegree::new(1, 0)), 0);
        assert_eq!(h0_twist(&w1(), Bidegree::new(-1, 3)), 0);
        for d in [(1, 0), (0, 1), (2, 1), (1, 1)] {
            let d = Bidegree::new(d.0, d.1);
            assert_eq!(h0_twist(&v1(), d), h0_twist_rank(&v1(), d, RankField::Rational));
        }
    }

    #[test]
    fn wedge_examples() {
        let w = w1();
        assert_eq!(h0_wedge_twist(&w, 3, Bidegree::new(2, 1)).unwrap(), 1);
        assert_eq!(h0_wedge_twist(&w, 2, Bidegree::new(0, 0)).unwrap(), 0);
        assert!(matches!(h0_wedge_twist(&w, 4, Bidegree::new(0, 0)), Err(Error::WedgeOutOfRange { .. })));
        assert!(matches!(h0_wedge_twist(&w, 0, Bidegree::new(0, 0)), Err(Error::WedgeOutOfRange { .. })));
        // the block computation agrees with the full matrix
        for q in 1..=3 {
            for d in [(0, 0), (1, 0), (0, 1), (2, 1), (1, 2)] {
                let d = Bidegree::new(d.0, d.1);
                let full = koszul_map(&w, q, d).unwrap().kernel_dim(&Rationals);
                assert_eq!(h0_wedge_twist(&w, q, d).unwrap(), full, "q={q} {d}");
            }
        }
    }

    #[test]
    fn t_min_examples() {
        assert_eq!(min_syzygy_total_degree(&v1()).unwrap(), 1);
        assert_eq!(min_syzygy_total_degree(&w1()).unwrap(), 1);
        assert_eq!(taylor_bound(&w1()), 3);
    }

    #[test]
    fn segre_syzygies_are_linear() {
        let l = Polarization::new(1, 1).unwrap();
        let s = LinearSystem::complete(p11(), l);
        let g = minimal_generator_bidegrees(&s, None);
        assert!(!g.truncated);
        assert!(g.counts.iter().all(|(d, _)| d.total() == 1));
        assert_eq!(g.counts, vec![(Bidegree::new(0, 1), 2), (Bidegree::new(1, 0), 2)]);
    }

    #[test]
    fn two_coprime_monomials() {
        let s = sys("x0^2 y0, x1^2 y1", 2, 1);
        let g = minimal_generator_bidegrees(&s, None);
        assert_eq!(g.counts, vec![(Bidegree::new(2, 1), 1)]);
    }

    #[test]
    fn v1_has_linear_generator() {
        let g = minimal_generator_bidegrees(&v1(), None);
        assert!(g.counts.contains(&(Bidegree::new(1, 0), 2)));
        let truncated = minimal_generator_bidegrees(&v1(), Some(1));
        assert!(truncated.truncated);
    }

    #[test]
    fn profile_json() {
        let p = syzygy_profile(&v1(), None, true).unwrap();
        let j = p.to_json();
        assert_eq!(j.t_min, 1);
        assert_eq!(j.table[0], [0, 0, 0]);
        assert!(j.table.contains(&[1, 0, 2]));
        assert!(j.truncated_at.is_none());
        let text = serde_json::to_string(&j).unwrap();
        let back: SyzygyProfileJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, j);
    }
}
