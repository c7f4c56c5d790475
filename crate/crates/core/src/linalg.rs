//! Exact sparse linear algebra over `Q` and over prime fields.
//!
//! Maps are given by the images of source basis vectors. Incremental
//! echelon reduction of those images yields the rank and, when requested,
//! a kernel basis in source coordinates (the source index rides along as
//! a tag vector).

use std::collections::HashMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// A coefficient field with explicit arithmetic.
pub trait Field: Clone + Send + Sync {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, x: &Self::Elem) -> bool;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    fn add(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn sub(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn neg(&self, x: &Self::Elem) -> Self::Elem;
    /// Inverse of a non-zero element.
    fn inv(&self, x: &Self::Elem) -> Self::Elem;

    fn from_i64(&self, v: i64) -> Self::Elem {
        self.from_bigint(&BigInt::from(v))
    }
}

/// The rationals, with arbitrary-precision entries.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, x: &BigRational) -> bool {
        x.is_zero()
    }
    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn add(&self, x: &BigRational, y: &BigRational) -> BigRational {
        x + y
    }
    fn sub(&self, x: &BigRational, y: &BigRational) -> BigRational {
        x - y
    }
    fn mul(&self, x: &BigRational, y: &BigRational) -> BigRational {
        x * y
    }
    fn neg(&self, x: &BigRational) -> BigRational {
        -x
    }
    fn inv(&self, x: &BigRational) -> BigRational {
        x.recip()
    }
}

/// `Z/p` for a prime `p < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Returns `None` unless `p` is a prime below `2^63`.
    pub fn new(p: u64) -> Option<Self> {
        (p < (1 << 63) && is_prime(p)).then_some(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn mulmod(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.p as u128) as u64
    }

    fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mulmod(acc, base);
            }
            base = self.mulmod(base, base);
            e >>= 1;
        }
        acc
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, x: &u64) -> bool {
        *x == 0
    }
    fn from_bigint(&self, v: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        v.mod_floor(&p).to_u64().expect("residue fits in u64")
    }
    fn add(&self, x: &u64, y: &u64) -> u64 {
        ((*x as u128 + *y as u128) % self.p as u128) as u64
    }
    fn sub(&self, x: &u64, y: &u64) -> u64 {
        ((*x as u128 + self.p as u128 - *y as u128) % self.p as u128) as u64
    }
    fn mul(&self, x: &u64, y: &u64) -> u64 {
        self.mulmod(*x, *y)
    }
    fn neg(&self, x: &u64) -> u64 {
        if *x == 0 {
            0
        } else {
            self.p - x
        }
    }
    fn inv(&self, x: &u64) -> u64 {
        self.pow(*x, self.p - 2)
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % small == 0 {
            return n == small;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sparse vector: `(index, value)` pairs sorted by index, no zeros.
pub type SparseVec<E> = Vec<(usize, E)>;

/// Build a sparse vector from unsorted entries, summing repeated indices.
pub fn sparse_from_entries<F: Field>(field: &F, entries: Vec<(usize, F::Elem)>) -> SparseVec<F::Elem> {
    let mut map: HashMap<usize, F::Elem> = HashMap::with_capacity(entries.len());
    for (i, v) in entries {
        let slot = map.entry(i).or_insert_with(|| field.zero());
        *slot = field.add(slot, &v);
    }
    let mut out: SparseVec<F::Elem> = map.into_iter().filter(|(_, v)| !field.is_zero(v)).collect();
    out.sort_unstable_by_key(|(i, _)| *i);
    out
}

/// `x - c*y`.
fn axpy<F: Field>(field: &F, x: &[(usize, F::Elem)], c: &F::Elem, y: &[(usize, F::Elem)]) -> SparseVec<F::Elem> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        if take_x {
            out.push(x[i].clone());
            i += 1;
        } else if take_y {
            out.push((y[j].0, field.neg(&field.mul(c, &y[j].1))));
            j += 1;
        } else {
            let v = field.sub(&x[i].1, &field.mul(c, &y[j].1));
            if !field.is_zero(&v) {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn scale<F: Field>(field: &F, c: &F::Elem, x: &[(usize, F::Elem)]) -> SparseVec<F::Elem> {
    x.iter().map(|(i, v)| (*i, field.mul(c, v))).collect()
}

/// Incremental row echelon form with optional tag tracking.
pub struct Echelon<F: Field> {
    field: F,
    pivots: HashMap<usize, (SparseVec<F::Elem>, SparseVec<F::Elem>)>,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: F) -> Self {
        Self {
            field,
            pivots: HashMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduce `v` against the current pivots. Returns the reduced tag when
    /// `v` lies in the span (a kernel relation), otherwise stores `v` as a
    /// new pivot and returns `None`.
    pub fn insert(
        &mut self,
        mut v: SparseVec<F::Elem>,
        mut tag: SparseVec<F::Elem>,
    ) -> Option<SparseVec<F::Elem>> {
        loop {
            let Some((lead, coeff)) = v.first().cloned() else {
                return Some(tag);
            };
            match self.pivots.get(&lead) {
                Some((prow, ptag)) => {
                    v = axpy(&self.field, &v, &coeff, prow);
                    if !ptag.is_empty() || !tag.is_empty() {
                        tag = axpy(&self.field, &tag, &coeff, ptag);
                    }
                }
                None => {
                    let inv = self.field.inv(&coeff);
                    let row = scale(&self.field, &inv, &v);
                    let tag = scale(&self.field, &inv, &tag);
                    self.pivots.insert(lead, (row, tag));
                    return None;
                }
            }
        }
    }
}

/// Rank of the span of `rows`.
pub fn rank<F: Field>(field: &F, rows: impl IntoIterator<Item = SparseVec<F::Elem>>) -> usize {
    let mut ech = Echelon::new(field.clone());
    for row in rows {
        ech.insert(row, Vec::new());
    }
    ech.rank()
}

/// Rank of the map sending source basis vector `j` to `images[j]`, and a
/// basis of its kernel in source coordinates.
pub fn rank_and_kernel<F: Field>(
    field: &F,
    images: Vec<SparseVec<F::Elem>>,
) -> (usize, Vec<SparseVec<F::Elem>>) {
    let mut ech = Echelon::new(field.clone());
    let mut kernel = Vec::new();
    for (j, img) in images.into_iter().enumerate() {
        if let Some(rel) = ech.insert(img, vec![(j, field.one())]) {
            kernel.push(rel);
        }
    }
    (ech.rank(), kernel)
}

/// Rank of a dense integer matrix, exactly over `field`.
pub fn rank_dense<F: Field>(field: &F, rows: &[Vec<BigInt>]) -> usize {
    rank(
        field,
        rows.iter().map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, field.from_bigint(v)))
                .filter(|(_, v)| !field.is_zero(v))
                .collect()
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }

    #[test]
    fn primes() {
        assert!(is_prime(2));
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(2_147_483_649));
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1));
        assert!(PrimeField::new(10).is_none());
    }

    #[test]
    fn rank_over_q_and_fp() {
        let m = big(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank_dense(&Rationals, &m), 2);
        let f = PrimeField::new(7).unwrap();
        assert_eq!(rank_dense(&f, &m), 2);

        // Full rank over Q, rank 1 mod 2.
        let m = big(&[&[1, 1], &[1, 3]]);
        assert_eq!(rank_dense(&Rationals, &m), 2);
        assert_eq!(rank_dense(&PrimeField::new(2).unwrap(), &m), 1);
    }

    #[test]
    fn kernel_vectors_are_relations() {
        // images of e0, e1, e2 in a 2-dimensional target
        let imgs: Vec<SparseVec<BigRational>> = vec![
            vec![(0, BigRational::from_integer(1.into()))],
            vec![(1, BigRational::from_integer(1.into()))],
            vec![
                (0, BigRational::from_integer(2.into())),
                (1, BigRational::from_integer((-3).into())),
            ],
        ];
        let (r, ker) = rank_and_kernel(&Rationals, imgs.clone());
        assert_eq!(r, 2);
        assert_eq!(ker.len(), 1);
        let mut total: HashMap<usize, BigRational> = HashMap::new();
        for (j, c) in &ker[0] {
            for (i, v) in &imgs[*j] {
                *total.entry(*i).or_insert_with(BigRational::zero) += c * v;
            }
        }
        assert!(total.values().all(|v| v.is_zero()));
    }
}
