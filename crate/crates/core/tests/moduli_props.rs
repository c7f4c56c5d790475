mod common;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

use bisyz::bigraded::{dim_graded_piece, Bidegree};
use bisyz::moduli::*;
use common::*;

/// `χ(P^n, O(d)) = C(n+d, n)` as a polynomial in `d`.
fn euler(n: usize, d: i64) -> BigInt {
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for k in 1..=n as i64 {
        num *= d + k;
        den *= k;
    }
    num / den
}

proptest! {
    #[test]
    fn serre_duality(n in 1usize..=4, d in -10i64..=10) {
        for i in 0..=n {
            prop_assert_eq!(h_projective(n, d, i), h_projective(n, -d - n as i64 - 1, n - i));
        }
    }

    #[test]
    fn kunneth_euler(m in 1usize..=4, n in 1usize..=4, p in -8i64..=8, q in -8i64..=8) {
        let am = amb(m, n);
        let d = Bidegree::new(p, q);
        let mut chi = BigInt::zero();
        for i in 0..=m + n {
            let h = BigInt::from(h_product(am, d, i));
            if i % 2 == 0 { chi += h } else { chi -= h }
        }
        prop_assert_eq!(chi, euler(m, p) * euler(n, q));
    }

    #[test]
    fn surface_correction(a in 1u32..=5, b in 1u32..=5, r_off in 0usize..40) {
        let (am, l) = (amb(1, 1), pol(a, b));
        let h0 = dim_graded_piece(am, l.bidegree()) as usize;
        let r = 3 + r_off % (h0 - 2);
        let rep = moduli_tangent_dim(am, l, r).unwrap();
        prop_assert_eq!(rep.case, ModuliCase::D);
        let expected = BigUint::from(r * (h0 - r) + r * (a as usize - 1) * (b as usize - 1));
        prop_assert_eq!(rep.tangent_dim_value(), Some(expected));
    }
}

#[test]
fn rigid_iff_complete() {
    for (m, n) in [(1, 2), (2, 1), (2, 2), (1, 3), (2, 3)] {
        for a in 1..=3u32 {
            for b in 1..=3u32 {
                let (am, l) = (amb(m, n), pol(a, b));
                let h0 = dim_graded_piece(am, l.bidegree()) as usize;
                for r in m + n + 1..=h0 {
                    let rep = moduli_tangent_dim(am, l, r).unwrap();
                    match rep.smooth_point {
                        SmoothPoint::Yes => {
                            assert_eq!(rep.rigid, Some(r == h0), "({m},{n},{a},{b},{r})");
                            assert_eq!(rep.tangent_dim_value().unwrap().to_usize(), Some(r * (h0 - r)));
                        }
                        SmoothPoint::NotEstablished => {
                            assert_eq!(rep.case, ModuliCase::C);
                            assert!(rep.tangent_dim.is_none() && rep.rigid.is_none());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn reported_values() {
    let rep = moduli_tangent_dim(amb(2, 2), pol(1, 1), 9).unwrap();
    assert_eq!((rep.tangent_dim.as_deref(), rep.rigid), (Some("0"), Some(true)));
    let rep = moduli_tangent_dim(amb(1, 1), pol(2, 1), 4).unwrap();
    assert_eq!(rep.tangent_dim.as_deref(), Some("8"));
    for r in 4..=9 {
        let rep = moduli_tangent_dim(amb(1, 1), pol(2, 2), r).unwrap();
        assert_eq!(rep.tangent_dim_value().unwrap().to_usize(), Some(r * (9 - r) + r));
    }
    let rep = moduli_tangent_dim(amb(1, 2), pol(2, 3), 10).unwrap();
    assert_eq!(rep.smooth_point, SmoothPoint::NotEstablished);
}
