//! Line-bundle cohomology on `P^m x P^n` and the tangent space of the
//! moduli point of a stable syzygy bundle.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bigraded::{binomial, dim_graded_piece, Ambient, Bidegree, Polarization};
use crate::error::{Error, Result};

/// `h^i(P^n, O(d))`.
pub fn h_projective(n: usize, d: i64, i: usize) -> BigUint {
    let n64 = n as i64;
    if i == 0 && d >= 0 {
        binomial((n64 + d) as u64, n as u64)
    } else if i == n && d <= -n64 - 1 {
        binomial((-d - 1) as u64, n as u64)
    } else {
        BigUint::zero()
    }
}

/// `h^i(P^m x P^n, O(p,q))` by the Künneth formula.
pub fn h_product(amb: Ambient, deg: Bidegree, i: usize) -> BigUint {
    (0..=i.min(amb.m))
        .filter(|&i1| i - i1 <= amb.n)
        .map(|i1| h_projective(amb.m, deg.p, i1) * h_projective(amb.n, deg.q, i - i1))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuliCase {
    /// `dim X ≥ 4`.
    A,
    /// `dim X = 3`, complete system.
    B,
    /// `dim X = 3`, proper subsystem.
    C,
    /// `dim X = 2`.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothPoint {
    Yes,
    /// A hypothesis fails; smoothness is neither proved nor refuted.
    NotEstablished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub value: String,
    pub required_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliReport {
    pub m: usize,
    pub n: usize,
    pub a: u32,
    pub b: u32,
    pub r: usize,
    pub h0: String,
    pub case: ModuliCase,
    pub assumes: String,
    pub hypotheses: Vec<Hypothesis>,
    pub smooth_point: SmoothPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangent_dim: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rigid: Option<bool>,
}

impl ModuliReport {
    pub fn tangent_dim_value(&self) -> Option<BigUint> {
        self.tangent_dim.as_ref().map(|t| t.parse().expect("decimal"))
    }
}

/// Tangent dimension of the moduli space at `[M_V]` for a basepoint-free
/// `V` of dimension `r`, assuming `M_V` is `L`-stable.
pub fn moduli_tangent_dim(amb: Ambient, l: Polarization, r: usize) -> Result<ModuliReport> {
    let h0 = dim_graded_piece(amb, l.bidegree());
    let dim = amb.m + amb.n;
    if r < dim + 1 || r as u64 > h0 {
        return Err(Error::InvalidParameter(format!(
            "r={r} must lie in [{}, {h0}]",
            dim + 1
        )));
    }
    let case = match dim {
        2 => ModuliCase::D,
        3 if r as u64 == h0 => ModuliCase::B,
        3 => ModuliCase::C,
        _ => ModuliCase::A,
    };
    let zero = Bidegree::new(0, 0);
    let minus_l = -l.bidegree();
    let mut hypotheses = Vec::new();
    let mut push = |name: &str, value: BigUint, required_zero: bool| {
        hypotheses.push(Hypothesis { name: name.into(), value: value.to_string(), required_zero });
        value
    };
    for i in 1..=3 {
        push(&format!("h{i}(O_X)"), h_product(amb, zero, i), true);
    }
    push("h1(O_X(L))", h_product(amb, l.bidegree(), 1), true);
    push("h3(O_X(-L))", h_product(amb, minus_l, 3), case == ModuliCase::C);
    let h2_minus = push("h2(O_X(-L))", h_product(amb, minus_l, 2), false);

    let failed = hypotheses.iter().any(|h| h.required_zero && h.value != "0");
    let (smooth_point, tangent) = if failed {
        (SmoothPoint::NotEstablished, None)
    } else {
        let r_big = BigUint::from(r);
        let base = &r_big * BigUint::from(h0 - r as u64);
        let t = match case {
            ModuliCase::D => base + r_big * h2_minus,
            _ => base,
        };
        (SmoothPoint::Yes, Some(t))
    };
    Ok(ModuliReport {
        m: amb.m,
        n: amb.n,
        a: l.a,
        b: l.b,
        r,
        h0: h0.to_string(),
        case,
        assumes: "M_V is L-stable".into(),
        hypotheses,
        smooth_point,
        rigid: tangent.as_ref().map(|t| t.is_zero()),
        tangent_dim: tangent.map(|t| t.to_string()),
    })
}
