//! Stability verdicts for syzygy bundles: the degree-gap certificate, the
//! brute-force cohomological check, and rank-one destabilizing subsheaves.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bigraded::{
    format_rational, parse_rational, syzygy_bundle_numerics, Ambient, Bidegree, BundleNumerics, Polarization,
};
use crate::error::{Error, Result};
use crate::linsys::{basepoint_free, BpfStatus, CoefficientField, LinearSystem, LinearSystemJson, SystemKind, DEFAULT_PRIME};
use crate::syzygy::{h0_twist, h0_twist_rank, h0_wedge_twist_with, min_syzygy_total_degree, RankField};

/// Default cap on `rk M_V = r − 1` for the brute-force method.
pub const DEFAULT_RANK_CAP: usize = 10;

pub const CERTIFICATE_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    StableCertified,
    NotStable,
    NotSemistable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DegreeGap,
    BruteForceCohomological,
    Rank1Witness,
}

/// How the slope of `O(−x,−y)` compares with `μ(M_V)`, scaled by `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Equal,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    AsGiven,
    Swapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub q: usize,
    pub x: i64,
    pub y: i64,
    pub h0: u64,
    pub comparison: Comparison,
}

impl Witness {
    pub fn twist(&self) -> Bidegree {
        Bidegree::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub kind: VerdictKind,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Every `(q, x, y)` whose `h^0` was found to vanish.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checked_region: Option<Vec<[i64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Orientation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl StabilityVerdict {
    fn new(kind: VerdictKind, method: Method) -> Self {
        Self {
            kind,
            method,
            t_min: None,
            witness: None,
            checked_region: None,
            orientation: None,
            note: None,
        }
    }
}

/// `(r−1)(b·m·x + a·n·y)` and `q·a·b·(m+n)`: the two sides of the
/// normalized violation inequality.
fn violation_sides(amb: Ambient, l: Polarization, r: usize, q: usize, d: Bidegree) -> (BigInt, BigInt) {
    let (m, n) = (BigInt::from(amb.m), BigInt::from(amb.n));
    let (a, b) = (BigInt::from(l.a), BigInt::from(l.b));
    let lhs = BigInt::from(r - 1) * (&b * &m * d.p + &a * &n * d.q);
    let rhs = BigInt::from(q) * a * b * (m + n);
    (lhs, rhs)
}

/// Where `(x,y)` sits relative to the bound, or `None` outside the region.
pub fn compare_to_bound(amb: Ambient, l: Polarization, r: usize, q: usize, d: Bidegree) -> Option<Comparison> {
    let (lhs, rhs) = violation_sides(amb, l, r, q, d);
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Less => Some(Comparison::Strict),
        std::cmp::Ordering::Equal => Some(Comparison::Equal),
        std::cmp::Ordering::Greater => None,
    }
}

/// Effective `(x,y)` with `b·m·x + a·n·y ≤ q·a·b·(m+n)/(r−1)`, in scan order.
pub fn violation_region(amb: Ambient, l: Polarization, r: usize, q: usize) -> Result<Vec<Bidegree>> {
    if q == 0 || q + 2 > r {
        return Err(Error::WedgeOutOfRange { q, max: r.saturating_sub(2) });
    }
    let mut out = Vec::new();
    let mut x = 0i64;
    while compare_to_bound(amb, l, r, q, Bidegree::new(x, 0)).is_some() {
        let mut y = 0i64;
        while compare_to_bound(amb, l, r, q, Bidegree::new(x, y)).is_some() {
            out.push(Bidegree::new(x, y));
            y += 1;
        }
        x += 1;
    }
    out.sort_by_key(Bidegree::scan_key);
    Ok(out)
}

fn require_bpf(sys: &LinearSystem) -> Result<BpfStatus> {
    let status = basepoint_free(sys);
    match status {
        BpfStatus::Certified | BpfStatus::AssertedGeneric => Ok(status),
        BpfStatus::RefutedAtTorusFixedPoint { i, j } => Err(Error::NotBasepointFree(format!(
            "every section vanishes at the torus-fixed point (x{i}, y{j})"
        ))),
        BpfStatus::Unknown => Err(Error::BasepointFreenessUnknown(
            "general coefficients without sampler provenance".into(),
        )),
    }
}

/// Sufficient criterion: stable when `(r−1)·t_min·min(m,n) > max(a,b)·(m+n)`.
pub fn certify_degree_gap(sys: &LinearSystem) -> Result<StabilityVerdict> {
    require_bpf(sys)?;
    let l = sys.polarization();
    let (work, orientation) = if l.a < l.b {
        (sys.transposed(), Orientation::Swapped)
    } else {
        (sys.clone(), Orientation::AsGiven)
    };
    let (amb, l, r) = (work.ambient(), work.polarization(), work.r());
    let t_min = min_syzygy_total_degree(&work)?;
    let lhs = BigInt::from(r - 1) * t_min * amb.m.min(amb.n);
    let rhs = BigInt::from(l.max()) * (amb.m + amb.n);
    let kind = if lhs > rhs {
        VerdictKind::StableCertified
    } else {
        VerdictKind::Inconclusive
    };
    let mut v = StabilityVerdict::new(kind, Method::DegreeGap);
    v.t_min = Some(t_min);
    v.orientation = Some(orientation);
    Ok(v)
}

/// Field for vanishing tests. A kernel over `F_p` is at least as large as
/// over `Q`, so a zero computed mod `p` is a zero over `Q`; nonzero values
/// of rational systems are confirmed over `Q`.
fn screening_field(sys: &LinearSystem) -> RankField {
    match (sys.kind(), sys.field()) {
        (_, CoefficientField::Prime(p)) => RankField::Prime(p),
        (SystemKind::Monomial, _) => RankField::Rational,
        (SystemKind::General, CoefficientField::Rational) => RankField::Prime(DEFAULT_PRIME),
    }
}

fn wedge_h0(sys: &LinearSystem, q: usize, d: Bidegree) -> Result<u64> {
    let screen = screening_field(sys);
    let h = h0_wedge_twist_with(sys, q, d, screen)?;
    if h > 0 && screen != RankField::of(sys) {
        return h0_wedge_twist_with(sys, q, d, RankField::of(sys));
    }
    Ok(h)
}

fn q1_h0(sys: &LinearSystem, d: Bidegree) -> u64 {
    match sys.kind() {
        SystemKind::Monomial => h0_twist(sys, d),
        SystemKind::General => {
            let screen = screening_field(sys);
            let h = h0_twist_rank(sys, d, screen);
            if h > 0 && screen != RankField::of(sys) {
                h0_twist_rank(sys, d, RankField::of(sys))
            } else {
                h
            }
        }
    }
}

/// First `(x,y)` of the `q = 1` region with a nonzero section of `M_V(x,y)`.
pub fn find_rank1_destabilizer(sys: &LinearSystem) -> Result<Option<Witness>> {
    require_bpf(sys)?;
    let (amb, l, r) = (sys.ambient(), sys.polarization(), sys.r());
    if r < 3 {
        return Ok(None);
    }
    for d in violation_region(amb, l, r, 1)? {
        let h0 = q1_h0(sys, d);
        if h0 > 0 {
            let comparison = compare_to_bound(amb, l, r, 1, d).expect("inside the region");
            return Ok(Some(Witness { q: 1, x: d.p, y: d.q, h0, comparison }));
        }
    }
    Ok(None)
}

fn witness_verdict(w: Witness, method: Method) -> StabilityVerdict {
    let kind = match w.comparison {
        Comparison::Equal => VerdictKind::NotStable,
        Comparison::Strict => VerdictKind::NotSemistable,
    };
    let mut v = StabilityVerdict::new(kind, method);
    v.witness = Some(w);
    v
}

/// Exhaustive check of `h^0(Λ^q M_V(x,y)) = 0` over every violation region,
/// `1 ≤ q ≤ r−2`.
pub fn certify_brute_force(sys: &LinearSystem) -> Result<StabilityVerdict> {
    certify_brute_force_capped(sys, DEFAULT_RANK_CAP)
}

pub fn certify_brute_force_capped(sys: &LinearSystem, cap: usize) -> Result<StabilityVerdict> {
    require_bpf(sys)?;
    let (amb, l, r) = (sys.ambient(), sys.polarization(), sys.r());
    if r - 1 > cap {
        return Err(Error::RankCapExceeded { rank: r - 1, cap });
    }
    if let Some(w) = find_rank1_destabilizer(sys)? {
        return Ok(witness_verdict(w, Method::BruteForceCohomological));
    }
    let mut grid = Vec::new();
    for q in 1..=r.saturating_sub(2) {
        for d in violation_region(amb, l, r, q)? {
            grid.push((q, d));
        }
    }
    let values: Vec<u64> = grid
        .par_iter()
        .map(|&(q, d)| if q == 1 { Ok(0) } else { wedge_h0(sys, q, d) })
        .collect::<Result<_>>()?;
    if let Some(k) = values.iter().position(|&h| h > 0) {
        let (q, d) = grid[k];
        let mut v = StabilityVerdict::new(VerdictKind::Inconclusive, Method::BruteForceCohomological);
        v.witness = Some(Witness {
            q,
            x: d.p,
            y: d.q,
            h0: values[k],
            comparison: compare_to_bound(amb, l, r, q, d).expect("inside the region"),
        });
        v.note = Some("nonzero section of a higher exterior power; no subsheaf exhibited".into());
        return Ok(v);
    }
    let mut v = StabilityVerdict::new(VerdictKind::StableCertified, Method::BruteForceCohomological);
    v.checked_region = Some(grid.iter().map(|(q, d)| [*q as i64, d.p, d.q]).collect());
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    DegreeGapOnly,
    BruteForceOnly,
    GapThenBruteForce,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gap" | "degree-gap" | "degree-gap-only" => Ok(Strategy::DegreeGapOnly),
            "brute" | "brute-force" | "brute-force-only" => Ok(Strategy::BruteForceOnly),
            "gap-then-brute" | "gap-then-brute-force" => Ok(Strategy::GapThenBruteForce),
            _ => Err(Error::Parse(format!("unknown strategy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericsJson {
    pub rank: usize,
    pub c1: [i64; 2],
    pub slope: String,
}

impl From<&BundleNumerics> for NumericsJson {
    fn from(n: &BundleNumerics) -> Self {
        NumericsJson {
            rank: n.rank,
            c1: [n.c1.p, n.c1.q],
            slope: format_rational(&n.slope),
        }
    }
}

/// A machine-recheckable stability record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: String,
    pub system: LinearSystemJson,
    pub bpf: BpfStatus,
    pub numerics: NumericsJson,
    pub strategy: Strategy,
    pub verdict: StabilityVerdict,
    /// Every sub-result in the order it was computed.
    pub steps: Vec<StabilityVerdict>,
    /// Wall-clock timings; excluded from [`Certificate::content_hash`].
    pub timings_ms: BTreeMap<String, u64>,
}

impl Certificate {
    /// SHA-256 of the certificate without timings.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.timings_ms.clear();
        let text = serde_json::to_string(&c).expect("certificate serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

fn timed<T>(timings: &mut BTreeMap<String, u64>, key: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.insert(key.into(), start.elapsed().as_millis() as u64);
    out
}

/// Run `strategy` and record every sub-result. Under gap-then-brute-force a
/// bundle rank above the cap falls back to the rank-one destabilizer search.
pub fn certify(sys: &LinearSystem, strategy: Strategy) -> Result<Certificate> {
    let numerics = syzygy_bundle_numerics(sys.ambient(), sys.polarization(), sys.r())?;
    let bpf = basepoint_free(sys);
    let mut timings = BTreeMap::new();
    let mut steps = Vec::new();
    match strategy {
        Strategy::DegreeGapOnly => steps.push(timed(&mut timings, "degree_gap", || certify_degree_gap(sys))?),
        Strategy::BruteForceOnly => steps.push(timed(&mut timings, "brute_force", || certify_brute_force(sys))?),
        Strategy::GapThenBruteForce => {
            let gap = timed(&mut timings, "degree_gap", || certify_degree_gap(sys))?;
            let done = gap.kind == VerdictKind::StableCertified;
            steps.push(gap);
            if !done {
                match timed(&mut timings, "brute_force", || certify_brute_force(sys)) {
                    Ok(v) => steps.push(v),
                    Err(Error::RankCapExceeded { rank, cap }) => {
                        let w = timed(&mut timings, "rank1_witness", || find_rank1_destabilizer(sys))?;
                        let mut v = match w {
                            Some(w) => witness_verdict(w, Method::Rank1Witness),
                            None => StabilityVerdict::new(VerdictKind::Inconclusive, Method::Rank1Witness),
                        };
                        v.note = Some(format!("brute force skipped: rank {rank} above cap {cap}"));
                        steps.push(v);
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let mut verdict = steps.last().cloned().expect("at least one step");
    if verdict.kind == VerdictKind::Inconclusive && verdict.t_min.is_none() {
        verdict.t_min = steps.iter().find_map(|s| s.t_min);
    }
    Ok(Certificate {
        version: CERTIFICATE_VERSION.into(),
        system: sys.to_json(),
        bpf,
        numerics: (&numerics).into(),
        strategy,
        verdict,
        steps,
        timings_ms: timings,
    })
}

/// Re-derive every claim of a certificate from its system. Returns the
/// list of discrepancies; empty means the certificate checks out.
pub fn recheck(cert: &Certificate) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    if cert.version != CERTIFICATE_VERSION {
        problems.push(format!("unknown version {}", cert.version));
    }
    let sys = LinearSystem::from_json(&cert.system)?;
    let (amb, l, r) = (sys.ambient(), sys.polarization(), sys.r());
    let numerics = syzygy_bundle_numerics(amb, l, r)?;
    if NumericsJson::from(&numerics) != cert.numerics {
        problems.push("numerics differ".into());
    }
    if parse_rational(&cert.numerics.slope).ok() != Some(numerics.slope.clone()) {
        problems.push("slope does not parse to the recomputed value".into());
    }
    if basepoint_free(&sys) != cert.bpf {
        problems.push("basepoint-free status differs".into());
    }
    for step in cert.steps.iter().chain(std::iter::once(&cert.verdict)) {
        problems.extend(recheck_verdict(&sys, step)?);
    }
    Ok(problems)
}

fn recheck_verdict(sys: &LinearSystem, v: &StabilityVerdict) -> Result<Vec<String>> {
    let (amb, l, r) = (sys.ambient(), sys.polarization(), sys.r());
    let mut problems = Vec::new();
    if let Some(w) = &v.witness {
        let h0 = if w.q == 1 { q1_h0(sys, w.twist()) } else { wedge_h0(sys, w.q, w.twist())? };
        if h0 != w.h0 || h0 == 0 {
            problems.push(format!("witness h0 at q={} {} is {h0}, recorded {}", w.q, w.twist(), w.h0));
        }
        if compare_to_bound(amb, l, r, w.q, w.twist()) != Some(w.comparison) {
            problems.push("witness slope comparison differs".into());
        }
        let expected = match (w.q, w.comparison) {
            (1, Comparison::Equal) => VerdictKind::NotStable,
            (1, Comparison::Strict) => VerdictKind::NotSemistable,
            _ => VerdictKind::Inconclusive,
        };
        if v.kind != expected {
            problems.push(format!("verdict {:?} does not follow from the witness", v.kind));
        }
    }
    match (v.kind, v.method) {
        (VerdictKind::StableCertified, Method::DegreeGap) | (VerdictKind::Inconclusive, Method::DegreeGap) => {
            let again = certify_degree_gap(sys)?;
            if again.kind != v.kind || again.t_min != v.t_min {
                problems.push("degree-gap verdict differs on recomputation".into());
            }
        }
        (VerdictKind::StableCertified, Method::BruteForceCohomological) => {
            let mut expected = Vec::new();
            for q in 1..=r.saturating_sub(2) {
                for d in violation_region(amb, l, r, q)? {
                    expected.push([q as i64, d.p, d.q]);
                }
            }
            if v.checked_region.as_ref() != Some(&expected) {
                problems.push("checked region does not cover every violation region".into());
            }
            for &[q, x, y] in &expected {
                let d = Bidegree::new(x, y);
                let h = if q == 1 { q1_h0(sys, d) } else { wedge_h0(sys, q as usize, d)? };
                if h != 0 {
                    problems.push(format!("h0 at q={q} {d} is {h}, not 0"));
                }
            }
        }
        (VerdictKind::StableCertified, Method::Rank1Witness) => {
            problems.push("a rank-one search cannot certify stability".into());
        }
        (VerdictKind::NotStable | VerdictKind::NotSemistable, _) if v.witness.is_none() => {
            problems.push("refutation without witness".into());
        }
        _ => {}
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraded::parse_monomial_list;
    use crate::linsys::pure_power_set;

    fn p11() -> Ambient {
        Ambient::new(1, 1).unwrap()
    }

    fn l21() -> Polarization {
        Polarization::new(2, 1).unwrap()
    }

    fn sys(list: &str) -> LinearSystem {
        LinearSystem::monomial(p11(), l21(), parse_monomial_list(list, p11()).unwrap()).unwrap()
    }

    #[test]
    fn regions() {
        let b = |x, y| Bidegree::new(x, y);
        assert_eq!(violation_region(p11(), l21(), 5, 1).unwrap(), vec![b(0, 0), b(1, 0)]);
        assert_eq!(violation_region(p11(), l21(), 4, 1).unwrap(), vec![b(0, 0), b(1, 0)]);
        assert_eq!(
            violation_region(p11(), l21(), 4, 2).unwrap(),
            vec![b(0, 0), b(0, 1), b(1, 0), b(2, 0)]
        );
        let l = Polarization::new(6, 4).unwrap();
        assert_eq!(violation_region(p11(), l, 13, 1).unwrap(), vec![b(0, 0), b(1, 0)]);
        assert_eq!(violation_region(p11(), l, 14, 1).unwrap(), vec![b(0, 0)]);
        assert!(violation_region(p11(), l21(), 4, 3).is_err());
    }

    #[test]
    fn example_verdicts() {
        let v1 = sys("x0^2 y0, x0^2 y1, x1^2 y0, x1^2 y1, x0 x1 y0");
        let v = certify_brute_force(&v1).unwrap();
        assert_eq!(v.kind, VerdictKind::NotStable);
        assert_eq!(
            v.witness,
            Some(Witness { q: 1, x: 1, y: 0, h0: 2, comparison: Comparison::Equal })
        );

        let w1 = LinearSystem::monomial(p11(), l21(), pure_power_set(p11(), l21())).unwrap();
        assert_eq!(certify_brute_force(&w1).unwrap().kind, VerdictKind::StableCertified);
        let gap = certify_degree_gap(&w1).unwrap();
        assert_eq!(gap.kind, VerdictKind::Inconclusive);
        assert_eq!(gap.t_min, Some(1));
        assert_eq!(find_rank1_destabilizer(&w1).unwrap(), None);

        let w2 = LinearSystem::complete(p11(), l21());
        assert_eq!(certify_brute_force(&w2).unwrap().kind, VerdictKind::StableCertified);

        let segre = LinearSystem::complete(p11(), Polarization::new(1, 1).unwrap());
        assert_eq!(certify_degree_gap(&segre).unwrap().kind, VerdictKind::StableCertified);
        assert_eq!(find_rank1_destabilizer(&segre).unwrap(), None);
    }

    #[test]
    fn non_bpf_is_rejected() {
        let s = sys("x0^2 y0, x0^2 y1, x1^2 y0");
        assert!(matches!(certify_degree_gap(&s), Err(Error::NotBasepointFree(_))));
        assert!(matches!(certify_brute_force(&s), Err(Error::NotBasepointFree(_))));
    }

    #[test]
    fn certificates_recheck() {
        let v1 = sys("x0^2 y0, x0^2 y1, x1^2 y0, x1^2 y1, x0 x1 y0");
        let c = certify(&v1, Strategy::GapThenBruteForce).unwrap();
        assert_eq!(c.verdict.kind, VerdictKind::NotStable);
        assert_eq!(c.steps.len(), 2);
        assert!(recheck(&c).unwrap().is_empty());

        let w1 = LinearSystem::monomial(p11(), l21(), pure_power_set(p11(), l21())).unwrap();
        let c = certify(&w1, Strategy::GapThenBruteForce).unwrap();
        assert_eq!(c.steps[0].kind, VerdictKind::Inconclusive);
        assert_eq!(c.verdict.kind, VerdictKind::StableCertified);
        assert!(recheck(&c).unwrap().is_empty());

        let mut forged = c.clone();
        forged.verdict.checked_region.as_mut().unwrap().pop();
        assert!(!recheck(&forged).unwrap().is_empty());

        let text = serde_json::to_string(&c).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back.content_hash(), c.content_hash());
        assert!(text.contains("\"comparison\"") || c.verdict.witness.is_none());
    }

    #[test]
    fn general_systems() {
        let full = crate::bigraded::enumerate_monomials(p11(), l21().bidegree());
        let g = crate::linsys::random_general_system(p11(), l21(), full, 5, 7, CoefficientField::Rational).unwrap();
        let c = certify(&g, Strategy::BruteForceOnly).unwrap();
        // a general 5-dimensional system on (2,1) still has a section at (1,0)
        assert_eq!(c.verdict.kind, VerdictKind::NotStable);
        assert!(recheck(&c).unwrap().is_empty());
    }
}
