//! Linear systems `V ⊂ H^0(X, O(a,b))`: monomial systems spanned by a set of
//! monomials, and general systems given by a full-rank coefficient matrix
//! over a monomial support.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bigraded::{enumerate_monomials, Ambient, Monomial, Polarization};
use crate::error::{Error, Result};
use crate::linalg::{rank_dense, PrimeField, Rationals};

/// Generic coefficients are drawn uniformly from `[-SAMPLER_RANGE, SAMPLER_RANGE]`.
pub const SAMPLER_RANGE: i64 = 1_000_000;

/// Default prime for fast generic-rank computations.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

/// Resampling attempts before the sampler gives up on full rank.
const MAX_RESAMPLES: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Monomial,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientField {
    Rational,
    Prime(u64),
}

impl CoefficientField {
    pub fn parse(text: &str) -> Result<Self> {
        if text == "rational" {
            return Ok(Self::Rational);
        }
        let p = text
            .strip_prefix("prime:")
            .and_then(|p| p.parse::<u64>().ok())
            .ok_or_else(|| Error::Parse(format!("unknown field '{text}'")))?;
        if p <= 1 << 30 || PrimeField::new(p).is_none() {
            return Err(Error::InvalidParameter(format!(
                "prime field modulus must be a prime in (2^30, 2^63), got {p}"
            )));
        }
        Ok(Self::Prime(p))
    }
}

impl fmt::Display for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rational => f.write_str("rational"),
            Self::Prime(p) => write!(f, "prime:{p}"),
        }
    }
}

/// A subspace of `H^0(X, O(a,b))` together with the data defining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    ambient: Ambient,
    polarization: Polarization,
    kind: SystemKind,
    support: Vec<Monomial>,
    coeffs: Option<Vec<Vec<BigInt>>>,
    field: CoefficientField,
    seed: Option<u64>,
    resample_offset: u64,
}

impl LinearSystem {
    /// The system spanned by `support`, sorted into canonical order.
    pub fn monomial(amb: Ambient, l: Polarization, support: Vec<Monomial>) -> Result<Self> {
        let support = validate_support(amb, l, support)?;
        if support.is_empty() {
            return Err(Error::InvalidParameter("empty support".into()));
        }
        let mut support = support;
        support.sort();
        Ok(Self {
            ambient: amb,
            polarization: l,
            kind: SystemKind::Monomial,
            support,
            coeffs: None,
            field: CoefficientField::Rational,
            seed: None,
            resample_offset: 0,
        })
    }

    /// The complete linear system `H^0(X, O(a,b))`.
    pub fn complete(amb: Ambient, l: Polarization) -> Self {
        Self::monomial(amb, l, enumerate_monomials(amb, l.bidegree()))
            .expect("the monomial basis is a valid support")
    }

    /// A general system: row `i` of `coeffs` holds the coefficients of
    /// `f_i` on `support`. Full row rank is verified exactly over `field`.
    pub fn general(
        amb: Ambient,
        l: Polarization,
        support: Vec<Monomial>,
        coeffs: Vec<Vec<BigInt>>,
        field: CoefficientField,
    ) -> Result<Self> {
        let support = validate_support(amb, l, support)?;
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("general system with no rows".into()));
        }
        if coeffs.iter().any(|row| row.len() != support.len()) {
            return Err(Error::InvalidParameter(format!(
                "every coefficient row must have {} entries",
                support.len()
            )));
        }
        // canonical column order
        let mut order: Vec<usize> = (0..support.len()).collect();
        order.sort_by(|&i, &j| support[i].cmp(&support[j]));
        let support: Vec<Monomial> = order.iter().map(|&i| support[i].clone()).collect();
        let coeffs: Vec<Vec<BigInt>> = coeffs
            .iter()
            .map(|row| order.iter().map(|&i| row[i].clone()).collect())
            .collect();

        let rank = match field {
            CoefficientField::Rational => rank_dense(&Rationals, &coeffs),
            CoefficientField::Prime(p) => {
                let f = PrimeField::new(p).ok_or_else(|| {
                    Error::InvalidParameter(format!("{p} is not a supported prime"))
                })?;
                rank_dense(&f, &coeffs)
            }
        };
        if rank != coeffs.len() {
            return Err(Error::RankDeficient {
                rank,
                expected: coeffs.len(),
            });
        }
        Ok(Self {
            ambient: amb,
            polarization: l,
            kind: SystemKind::General,
            support,
            coeffs: Some(coeffs),
            field,
            seed: None,
            resample_offset: 0,
        })
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn support(&self) -> &[Monomial] {
        &self.support
    }

    pub fn coefficients(&self) -> Option<&[Vec<BigInt>]> {
        self.coeffs.as_deref()
    }

    pub fn field(&self) -> CoefficientField {
        self.field
    }

    /// Seed of the generic sampler, when the coefficients came from it.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// How many resamples the generic sampler needed to reach full rank.
    pub fn resample_offset(&self) -> u64 {
        self.resample_offset
    }

    /// `dim V`.
    pub fn r(&self) -> usize {
        match &self.coeffs {
            Some(c) => c.len(),
            None => self.support.len(),
        }
    }

    /// The forms `f_1..f_r` as `(support index, coefficient)` lists.
    pub fn forms(&self) -> Vec<Vec<(usize, BigInt)>> {
        match &self.coeffs {
            None => (0..self.support.len())
                .map(|i| vec![(i, BigInt::from(1))])
                .collect(),
            Some(rows) => rows
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, c)| !num_traits::Zero::is_zero(*c))
                        .map(|(i, c)| (i, c.clone()))
                        .collect()
                })
                .collect(),
        }
    }

    /// The same system read on `P^n x P^m` with `O(b,a)`.
    pub fn transposed(&self) -> LinearSystem {
        let support: Vec<Monomial> = self.support.iter().map(Monomial::transposed).collect();
        let mut order: Vec<usize> = (0..support.len()).collect();
        order.sort_by(|&i, &j| support[i].cmp(&support[j]));
        LinearSystem {
            ambient: self.ambient.swapped(),
            polarization: self.polarization.swapped(),
            kind: self.kind,
            support: order.iter().map(|&i| support[i].clone()).collect(),
            coeffs: self.coeffs.as_ref().map(|rows| {
                rows.iter()
                    .map(|row| order.iter().map(|&i| row[i].clone()).collect())
                    .collect()
            }),
            field: self.field,
            seed: self.seed,
            resample_offset: self.resample_offset,
        }
    }

    pub fn to_json(&self) -> LinearSystemJson {
        LinearSystemJson {
            m: self.ambient.m,
            n: self.ambient.n,
            a: self.polarization.a,
            b: self.polarization.b,
            kind: self.kind,
            support: self
                .support
                .iter()
                .map(|mono| (mono.alpha.clone(), mono.beta.clone()))
                .collect(),
            coeffs: self.coeffs.as_ref().map(|rows| {
                rows.iter()
                    .map(|row| row.iter().map(|c| c.to_string()).collect())
                    .collect()
            }),
            field: self.field.to_string(),
            seed: self.seed,
        }
    }

    pub fn from_json(json: &LinearSystemJson) -> Result<Self> {
        let amb = Ambient::new(json.m, json.n)?;
        let l = Polarization::new(json.a, json.b)?;
        let support = json
            .support
            .iter()
            .map(|(alpha, beta)| {
                if alpha.len() != amb.m + 1 || beta.len() != amb.n + 1 {
                    return Err(Error::Parse(format!(
                        "exponent vectors must have lengths {} and {}",
                        amb.m + 1,
                        amb.n + 1
                    )));
                }
                Monomial::new(alpha.clone(), beta.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        let field = CoefficientField::parse(&json.field)?;
        match json.kind {
            SystemKind::Monomial => {
                if json.coeffs.is_some() {
                    return Err(Error::Parse("monomial systems carry no coefficients".into()));
                }
                Self::monomial(amb, l, support)
            }
            SystemKind::General => {
                if let Some(seed) = json.seed {
                    let rows = json.coeffs.as_ref().map(|c| c.len()).unwrap_or(0);
                    let regenerated = random_general_system(amb, l, support.clone(), rows, seed, field)?;
                    if let Some(given) = &json.coeffs {
                        let given: Vec<Vec<BigInt>> = parse_rows(given)?;
                        let mut reordered = LinearSystem::general(amb, l, support, given, field)?;
                        if reordered.coeffs != regenerated.coeffs {
                            return Err(Error::Parse(
                                "coefficients do not match the recorded sampler seed".into(),
                            ));
                        }
                        reordered.seed = Some(seed);
                        reordered.resample_offset = regenerated.resample_offset;
                        return Ok(reordered);
                    }
                    return Ok(regenerated);
                }
                let rows = json
                    .coeffs
                    .as_ref()
                    .ok_or_else(|| Error::Parse("general system without coefficients".into()))?;
                Self::general(amb, l, support, parse_rows(rows)?, field)
            }
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn content_hash(&self) -> String {
        let text = serde_json::to_string(&self.to_json()).expect("system serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

fn parse_rows(rows: &[Vec<String>]) -> Result<Vec<Vec<BigInt>>> {
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|c| {
                    c.trim()
                        .parse::<BigInt>()
                        .map_err(|_| Error::Parse(format!("bad integer coefficient '{c}'")))
                })
                .collect()
        })
        .collect()
}

fn validate_support(amb: Ambient, l: Polarization, support: Vec<Monomial>) -> Result<Vec<Monomial>> {
    let mut seen = HashSet::with_capacity(support.len());
    for mono in &support {
        amb.check_same(&mono.ambient())?;
        let deg = mono.bidegree();
        if deg != l.bidegree() {
            return Err(Error::WrongBidegree {
                monomial: mono.to_string(),
                p: deg.p,
                q: deg.q,
                a: l.a as i64,
                b: l.b as i64,
            });
        }
        if !seen.insert(mono.clone()) {
            return Err(Error::DuplicateMonomial(mono.to_string()));
        }
    }
    Ok(support)
}

/// Serialized form of a [`LinearSystem`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystemJson {
    pub m: usize,
    pub n: usize,
    pub a: u32,
    pub b: u32,
    pub kind: SystemKind,
    pub support: Vec<(Vec<u32>, Vec<u32>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Vec<String>>>,
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_field() -> String {
    "rational".into()
}

/// Basepoint-freeness status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BpfStatus {
    Certified,
    RefutedAtTorusFixedPoint { i: usize, j: usize },
    AssertedGeneric,
    Unknown,
}

impl BpfStatus {
    /// Whether stability methods may proceed.
    pub fn usable(&self) -> bool {
        matches!(self, BpfStatus::Certified | BpfStatus::AssertedGeneric)
    }
}

/// The `(m+1)(n+1)` monomials `x_i^a y_j^b`, in canonical order.
pub fn pure_power_set(amb: Ambient, l: Polarization) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = (0..=amb.m)
        .flat_map(|i| (0..=amb.n).map(move |j| (i, j)))
        .map(|(i, j)| Monomial::pure_power(amb, i, j, l))
        .collect();
    out.sort();
    out
}

/// A monomial system is basepoint-free exactly when it contains every pure
/// power: any other monomial vanishes at some torus-fixed point.
pub fn basepoint_free_monomial(sys: &LinearSystem) -> Result<BpfStatus> {
    if sys.kind != SystemKind::Monomial {
        return Err(Error::InvalidParameter(
            "basepoint_free_monomial needs a monomial system; use basepoint_free_general".into(),
        ));
    }
    let present: HashSet<&Monomial> = sys.support.iter().collect();
    Ok(missing_pure_power(sys.ambient, sys.polarization, |mono| present.contains(mono))
        .map_or(BpfStatus::Certified, |(i, j)| BpfStatus::RefutedAtTorusFixedPoint { i, j }))
}

fn missing_pure_power(
    amb: Ambient,
    l: Polarization,
    mut survives: impl FnMut(&Monomial) -> bool,
) -> Option<(usize, usize)> {
    for i in 0..=amb.m {
        for j in 0..=amb.n {
            if !survives(&Monomial::pure_power(amb, i, j, l)) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Refutes at a torus-fixed point, or asserts genericity when the
/// coefficients carry sampler provenance; never claims a proof.
pub fn basepoint_free_general(sys: &LinearSystem) -> BpfStatus {
    let Some(rows) = &sys.coeffs else {
        return basepoint_free_monomial(sys).expect("monomial system");
    };
    let reduce = |c: &BigInt| -> bool {
        match sys.field {
            CoefficientField::Rational => num_traits::Zero::is_zero(c),
            CoefficientField::Prime(p) => num_traits::Zero::is_zero(&(c % BigInt::from(p))),
        }
    };
    let column = |mono: &Monomial| sys.support.iter().position(|s| s == mono);
    if let Some((i, j)) = missing_pure_power(sys.ambient, sys.polarization, |mono| match column(mono) {
        Some(col) => rows.iter().any(|row| !reduce(&row[col])),
        None => false,
    }) {
        return BpfStatus::RefutedAtTorusFixedPoint { i, j };
    }
    let support_bpf = pure_power_set(sys.ambient, sys.polarization)
        .iter()
        .all(|p| column(p).is_some());
    if support_bpf && sys.r() > sys.ambient.dim() && sys.seed.is_some() {
        BpfStatus::AssertedGeneric
    } else {
        BpfStatus::Unknown
    }
}

/// Basepoint-free status for either kind of system.
pub fn basepoint_free(sys: &LinearSystem) -> BpfStatus {
    match sys.kind {
        SystemKind::Monomial => basepoint_free_monomial(sys).expect("monomial system"),
        SystemKind::General => basepoint_free_general(sys),
    }
}

/// Draw a general `r`-dimensional system on `support`. Deterministic in
/// `seed`; attempt `k` uses seed `seed + k` until the rows have full rank.
pub fn random_general_system(
    amb: Ambient,
    l: Polarization,
    support: Vec<Monomial>,
    r: usize,
    seed: u64,
    field: CoefficientField,
) -> Result<LinearSystem> {
    if r == 0 || r > support.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {r} independent forms from a support of size {}",
            support.len()
        )));
    }
    let support = validate_support(amb, l, support)?;
    let mut sorted = support.clone();
    sorted.sort();
    for k in 0..MAX_RESAMPLES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
        let coeffs: Vec<Vec<BigInt>> = (0..r)
            .map(|_| {
                (0..sorted.len())
                    .map(|_| BigInt::from(rng.gen_range(-SAMPLER_RANGE..=SAMPLER_RANGE)))
                    .collect()
            })
            .collect();
        match LinearSystem::general(amb, l, sorted.clone(), coeffs, field) {
            Ok(mut sys) => {
                sys.seed = Some(seed);
                sys.resample_offset = k;
                return Ok(sys);
            }
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RankDeficient { rank: 0, expected: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraded::Bidegree;

    fn setup() -> (Ambient, Polarization) {
        (Ambient::new(1, 1).unwrap(), Polarization::new(2, 1).unwrap())
    }

    fn monos(list: &str, amb: Ambient) -> Vec<Monomial> {
        crate::bigraded::parse_monomial_list(list, amb).unwrap()
    }

    #[test]
    fn pure_powers() {
        let (amb, l) = setup();
        let names: Vec<String> = pure_power_set(amb, l).iter().map(|m| m.to_string()).collect();
        assert_eq!(names, ["x0^2 y0", "x0^2 y1", "x1^2 y0", "x1^2 y1"]);
        let amb2 = Ambient::new(2, 1).unwrap();
        let pp = pure_power_set(amb2, Polarization::new(1, 2).unwrap());
        assert_eq!(pp.len(), 6);
        assert!(pp.iter().all(|m| m.bidegree() == Bidegree::new(1, 2)));
    }

    #[test]
    fn monomial_bpf() {
        let (amb, l) = setup();
        let w1 = LinearSystem::monomial(amb, l, pure_power_set(amb, l)).unwrap();
        assert_eq!(basepoint_free_monomial(&w1).unwrap(), BpfStatus::Certified);

        let v1 = LinearSystem::monomial(
            amb,
            l,
            monos("x0^2 y0, x0^2 y1, x1^2 y0, x1^2 y1, x0 x1 y0", amb),
        )
        .unwrap();
        assert_eq!(basepoint_free_monomial(&v1).unwrap(), BpfStatus::Certified);

        let missing = LinearSystem::monomial(amb, l, monos("x0^2 y0, x0^2 y1, x1^2 y0", amb)).unwrap();
        assert_eq!(
            basepoint_free_monomial(&missing).unwrap(),
            BpfStatus::RefutedAtTorusFixedPoint { i: 1, j: 1 }
        );
    }

    #[test]
    fn construction_errors() {
        let (amb, l) = setup();
        assert!(matches!(
            LinearSystem::monomial(amb, l, monos("x0^2 y0, x0^2 y0", amb)),
            Err(Error::DuplicateMonomial(_))
        ));
        assert!(matches!(
            LinearSystem::monomial(amb, l, monos("x0 y0", amb)),
            Err(Error::WrongBidegree { .. })
        ));
        let full = enumerate_monomials(amb, l.bidegree());
        assert!(random_general_system(amb, l, full[..4].to_vec(), 5, 1, CoefficientField::Rational).is_err());
        let rows = vec![vec![BigInt::from(1); 6], vec![BigInt::from(2); 6]];
        assert!(matches!(
            LinearSystem::general(amb, l, full, rows, CoefficientField::Rational),
            Err(Error::RankDeficient { rank: 1, expected: 2 })
        ));
    }

    #[test]
    fn sampler_is_deterministic() {
        let (amb, l) = setup();
        let full = enumerate_monomials(amb, l.bidegree());
        let s1 = random_general_system(amb, l, full.clone(), 5, 1, CoefficientField::Rational).unwrap();
        let s2 = random_general_system(amb, l, full.clone(), 5, 1, CoefficientField::Rational).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.r(), 5);
        assert_eq!(
            serde_json::to_string(&s1.to_json()).unwrap(),
            serde_json::to_string(&s2.to_json()).unwrap()
        );
        let s3 = random_general_system(amb, l, full, 5, 2, CoefficientField::Rational).unwrap();
        assert_ne!(s1.coefficients(), s3.coefficients());
        assert_eq!(basepoint_free_general(&s1), BpfStatus::AssertedGeneric);
    }

    #[test]
    fn general_bpf() {
        let (amb, l) = setup();
        let full = enumerate_monomials(amb, l.bidegree());
        // drop the x0^2 y0 column entirely
        let support: Vec<Monomial> = full.iter().skip(1).cloned().collect();
        let sys = random_general_system(amb, l, support, 4, 3, CoefficientField::Rational).unwrap();
        assert_eq!(
            basepoint_free_general(&sys),
            BpfStatus::RefutedAtTorusFixedPoint { i: 0, j: 0 }
        );

        let coeffs: Vec<Vec<BigInt>> = (0..5)
            .map(|i| (0..6).map(|j| BigInt::from(if i == j { 2 } else if j == 5 { 1 } else { 0 })).collect())
            .collect();
        let hand = LinearSystem::general(amb, l, full, coeffs, CoefficientField::Rational).unwrap();
        assert_eq!(basepoint_free_general(&hand), BpfStatus::Unknown);
    }

    #[test]
    fn json_round_trip_and_seed_provenance() {
        let (amb, l) = setup();
        let full = enumerate_monomials(amb, l.bidegree());
        let sys = random_general_system(amb, l, full, 5, 9, CoefficientField::Prime(DEFAULT_PRIME)).unwrap();
        let json = sys.to_json();
        let back = LinearSystem::from_json(&json).unwrap();
        assert_eq!(back, sys);

        let mut tampered = json.clone();
        tampered.coeffs.as_mut().unwrap()[0][0] = "7".into();
        assert!(LinearSystem::from_json(&tampered).is_err());

        // any support order is accepted on read
        let mut shuffled = LinearSystem::complete(amb, l).to_json();
        shuffled.support.reverse();
        assert_eq!(LinearSystem::from_json(&shuffled).unwrap(), LinearSystem::complete(amb, l));
    }

    #[test]
    fn field_parsing() {
        assert_eq!(CoefficientField::parse("rational").unwrap(), CoefficientField::Rational);
        assert_eq!(
            CoefficientField::parse("prime:2147483647").unwrap(),
            CoefficientField::Prime(DEFAULT_PRIME)
        );
        assert!(CoefficientField::parse("prime:101").is_err());
        assert!(CoefficientField::parse("prime:2147483649").is_err());
    }
}
