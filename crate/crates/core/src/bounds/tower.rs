use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::guard;
use crate::{Error, Result};

fn digits_estimate(base: &BigUint, exp: &BigUint) -> f64 {
    let lb = base.bits().max(1) as f64 * std::f64::consts::LOG10_2;
    exp.to_f64().unwrap_or(f64::INFINITY) * lb
}

/// `base^exp` if the result stays within the digit guard.
fn try_pow(base: &BigUint, exp: &BigUint) -> Option<BigUint> {
    if base <= &BigUint::one() {
        return Some(if exp.bits() == 0 { BigUint::one() } else { base.clone() });
    }
    if digits_estimate(base, exp) > guard::limit(guard::BIGINT_DIGITS) as f64 {
        return None;
    }
    Some(base.pow(exp.to_u32()?))
}

fn tower_opt(i: u32, r: &BigUint, x: &BigUint) -> Option<BigUint> {
    let mut v = x.clone();
    for _ in 0..i {
        v = try_pow(r, &v)?;
    }
    Some(v)
}

/// `exp^i_r(x)`: `exp^0_r(x) = x`, `exp^{j+1}_r(x) = r^{exp^j_r(x)}`.
pub fn tower(i: u32, r: u128, x: u128) -> Result<BigUint> {
    let (r, x) = (BigUint::from(r), BigUint::from(x));
    tower_opt(i, &r, &x).ok_or(Error::ResourceLimit {
        what: "decimal digits",
        requested: u128::MAX,
        limit: guard::limit(guard::BIGINT_DIGITS),
    })
}

/// `m^{exp^{i-1}_{m^k}(2^{k-i+1})}`, the ground size that guarantees the
/// `i`-fold derivative.
pub fn min_n_iterated(k: u32, m: u32, i: u32) -> Result<BigUint> {
    if i == 0 || i > k || m < 2 {
        return Err(Error::invalid(format!("need 1 <= i <= k and m >= 2 (k={k}, m={m}, i={i})")));
    }
    let r = BigUint::from(m).pow(k);
    let limit = Error::ResourceLimit { what: "decimal digits", requested: u128::MAX, limit: guard::limit(guard::BIGINT_DIGITS) };
    let inner = tower_opt(i - 1, &r, &(BigUint::one() << (k - i + 1))).ok_or_else(|| limit.clone())?;
    try_pow(&BigUint::from(m), &inner).ok_or(limit)
}

/// Exact test of `exp^h_2(b) >= target` without building the tower.
fn tower2_at_least(h: u32, b: &BigUint, target: &BigUint) -> bool {
    if h == 0 {
        return b >= target;
    }
    if target.bits() <= 1 {
        return true;
    }
    // 2^y >= target iff y >= ceil(log2 target) = bits(target - 1)
    let need = BigUint::from((target - 1u32).bits());
    tower2_at_least(h - 1, b, &need)
}

fn rd(x: f64, up: bool) -> f64 {
    let e = x.abs() * 1e-13 + 1e-300;
    if up { x + e } else { x - e }
}

/// One-sided bound `exp^height_2(z)`; which side depends on how it was built.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TowerBound {
    pub height: u32,
    pub z: f64,
}

const COLLAPSE: f64 = 1000.0;

impl TowerBound {
    pub fn value(z: f64) -> Self {
        TowerBound { height: 0, z }
    }

    fn norm(mut self, up: bool) -> Self {
        while self.height > 0 && self.z < COLLAPSE {
            self.z = rd(self.z.exp2(), up);
            self.height -= 1;
        }
        self
    }

    pub fn pow2(self, up: bool) -> Self {
        TowerBound { height: self.height + 1, z: self.z }.norm(up)
    }

    /// `self + c`, `c >= 0`.
    pub fn add(self, c: f64, up: bool) -> Self {
        if self.height == 0 {
            TowerBound::value(rd(self.z + c, up))
        } else if up {
            // a >= 2^z once height >= 1, so a + c <= a(1 + c 2^{-z})
            self.mul(rd(1.0 + c * (-self.z).exp2(), true), up)
        } else {
            self
        }
    }

    /// `self · c`, `c >= 1`.
    pub fn mul(self, c: f64, up: bool) -> Self {
        if self.height == 0 {
            return TowerBound::value(rd(self.z * c, up));
        }
        let d = if up { rd(c.log2(), up) } else { rd(c.log2(), up).max(0.0) };
        TowerBound { height: self.height - 1, z: self.z }.add(d, up).pow2(up)
    }

    fn lift(self, up: bool) -> Option<Self> {
        let z = if self.z > 0.0 {
            self.z
        } else if up {
            f64::MIN_POSITIVE
        } else {
            return None;
        };
        Some(TowerBound { height: self.height + 1, z: rd(z.log2(), up) })
    }
}

/// Proves `a <= b` from an upper bound on `a` and a lower bound on `b`.
pub fn proven_le(upper: TowerBound, lower: TowerBound) -> bool {
    let (mut u, mut l) = (upper, lower);
    while u.height < l.height {
        match u.lift(true) {
            Some(t) => u = t,
            None => return false,
        }
    }
    while l.height < u.height {
        match l.lift(false) {
            Some(t) => l = t,
            None => return false,
        }
    }
    u.z <= l.z
}

fn log2_u128(r: u128, up: bool) -> f64 {
    rd((r as f64).log2(), up)
}

/// One-sided bound on `exp^i_r(x)`.
fn tower_bound(i: u32, log2r: f64, x: f64, up: bool) -> TowerBound {
    let mut t = TowerBound::value(x);
    for _ in 0..i {
        t = t.mul(log2r, up).pow2(up);
    }
    t
}

fn pow2_times(mut t: TowerBound, i: u32, up: bool) -> TowerBound {
    for _ in 0..i {
        t = t.pow2(up);
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMethod {
    /// The smaller side was evaluated as an exact integer.
    Exact,
    /// Directed-rounding tower bounds.
    Interval,
    /// Neither method settled it.
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpCheck {
    pub i: u32,
    pub r: u128,
    pub x: u128,
    pub holds: bool,
    pub method: CheckMethod,
}

/// `exp^i_r(x) <= exp^i_2(x·log r + log log r + 1)`.
///
/// For `i >= 1` the right side is `exp^{i-1}_2(2·r^x·log r)`. The exact path
/// computes the left side and a floor lower bound of the right side's
/// argument with `log r >= (bits(r^q) - 1)/q`.
pub fn check_exp_inequality(i: u32, r: u128, x: u128) -> Result<ExpCheck> {
    if r < 2 || x == 0 {
        return Err(Error::invalid(format!("need r >= 2 and x >= 1 (r={r}, x={x})")));
    }
    let done = |holds, method| Ok(ExpCheck { i, r, x, holds, method });
    if i == 0 {
        return done(true, CheckMethod::Exact);
    }
    let (rb, xb) = (BigUint::from(r), BigUint::from(x));
    if let Some(lhs) = tower_opt(i, &rb, &xb) {
        if let Some(rx) = try_pow(&rb, &xb) {
            const Q: u32 = 1024;
            let p = rb.pow(Q).bits() - 1;
            let arg = (rx * 2u32 * p) / Q;
            return done(tower2_at_least(i - 1, &arg, &lhs), CheckMethod::Exact);
        }
    }
    let lr_hi = log2_u128(r, true);
    let lr_lo = log2_u128(r, false);
    let ll_lo = rd(lr_lo.log2(), false).max(0.0);
    let lhs_hi = tower_bound(i, lr_hi, x as f64, true);
    let y_lo = rd(rd(x as f64 * lr_lo, false) + ll_lo + 1.0, false);
    let rhs_lo = pow2_times(TowerBound::value(y_lo), i, false);
    if proven_le(lhs_hi, rhs_lo) {
        return done(true, CheckMethod::Interval);
    }
    let lhs_lo = tower_bound(i, lr_lo, x as f64, false);
    let y_hi = rd(rd(x as f64 * lr_hi, true) + rd(lr_hi.log2(), true) + 1.0, true);
    let rhs_hi = pow2_times(TowerBound::value(y_hi), i, true);
    if proven_le(rhs_hi, lhs_lo) {
        return done(false, CheckMethod::Interval);
    }
    done(false, CheckMethod::Undecided)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainLink {
    pub name: &'static str,
    pub holds: bool,
    pub method: CheckMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub k: u32,
    pub i: u32,
    pub m: u32,
    pub links: Vec<ChainLink>,
    /// Bit length of the lemma's ground size, when representable.
    pub lemma_bits: Option<u64>,
    pub holds: bool,
}

/// Every step from the iterated-derivative ground size
/// `m^{exp^{i-1}_{m^k}(2^{k-i+1})}` up to `exp^{i+1}_2(k + 2 log k + 2)`,
/// plus the end-to-end comparison.
pub fn theorem_chain(k: u32, i: u32, m: u32) -> Result<ChainReport> {
    if k < 2 || i == 0 || i > k || m < 2 || m as u64 > 1u64 << k.min(63) || k > 16 {
        return Err(Error::invalid(format!("need 2 <= k <= 16, 1 <= i <= k, 2 <= m <= 2^k (k={k}, i={i}, m={m})")));
    }
    let mut links = Vec::new();
    let r = BigUint::from(m).pow(k);
    let x = BigUint::one() << (k - i + 1);
    let exact = |name, holds| ChainLink { name, holds, method: CheckMethod::Exact };
    // m^T <= (m^k)^T
    links.push(exact("base-widening", BigUint::from(m) <= r));
    let e = match r.to_u128() {
        Some(r) => check_exp_inequality(i, r, 1u128 << (k - i + 1))?,
        None => return Err(Error::invalid("m^k exceeds 128 bits")),
    };
    links.push(ChainLink { name: "e-exp", holds: e.holds, method: e.method });
    // x·log r + loglog r + 1 <= x(log r + loglog r + 1): needs loglog r >= -1
    links.push(exact("argument-widening", r >= BigUint::from(2u32)));
    // log m^k <= k^2 and loglog m^k <= 2 log k both reduce to m <= 2^k
    links.push(exact("log-m-bound", BigUint::from(m) <= BigUint::one() << k));
    // 2^{k-i+1}(k^2 + 2 log k + 1) <= 4 k^2 2^k
    //   <=> k^2 <= 2^{(2^{i+1} - 1) k^2 - 1}
    let kk = (k as u64) * (k as u64);
    let lhs = BigUint::from(kk);
    let e2 = ((1u64 << (i + 1)) - 1) * kk - 1;
    links.push(exact("final-argument", e2 >= 64 || lhs <= BigUint::one() << e2));
    // direct: N_lemma <= exp^i_2(4 k^2 2^k)
    let arg = BigUint::from(4 * kk) << k;
    let n_lemma = tower_opt(i - 1, &r, &x).and_then(|t| try_pow(&BigUint::from(m), &t));
    let lemma_bits = n_lemma.as_ref().map(|v| v.bits());
    let direct = match &n_lemma {
        Some(v) => exact("direct", tower2_at_least(i, &arg, v)),
        None => {
            let lm_hi = log2_u128(m as u128, true);
            let lr_hi = rd(k as f64 * lm_hi, true);
            let a_hi = tower_bound(i - 1, lr_hi, x.to_f64().unwrap(), true).mul(lm_hi, true).pow2(true);
            let e_lo = pow2_times(TowerBound::value(arg.to_f64().unwrap()), i, false);
            let holds = proven_le(a_hi, e_lo);
            ChainLink { name: "direct", holds, method: if holds { CheckMethod::Interval } else { CheckMethod::Undecided } }
        }
    };
    links.push(direct);
    let holds = links.iter().all(|l| l.holds);
    Ok(ChainReport { k, i, m, links, lemma_bits, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_values() {
        assert_eq!(tower(1, 2, 3).unwrap(), BigUint::from(8u32));
        assert_eq!(tower(2, 2, 2).unwrap(), BigUint::from(16u32));
        assert_eq!(tower(0, 7, 5).unwrap(), BigUint::from(5u32));
        assert_eq!(tower(3, 2, 2).unwrap(), BigUint::from(65536u32));
        assert!(matches!(tower(5, 2, 2), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn min_n_iterated_values() {
        // i = 1: m^{2^k}
        assert_eq!(min_n_iterated(3, 2, 1).unwrap(), BigUint::from(256u32));
        // k = 2, i = 2: 2^{(2^2)^2} = 2^16
        assert_eq!(min_n_iterated(2, 2, 2).unwrap(), BigUint::from(65536u32));
        // k = 3, i = 2: 2^{8^4}
        assert_eq!(min_n_iterated(3, 2, 2).unwrap().bits(), 4097);
        assert!(min_n_iterated(3, 2, 3).is_err());
    }

    #[test]
    fn exp_inequality_small() {
        let c = check_exp_inequality(2, 4, 1).unwrap();
        assert!(c.holds);
        assert_eq!(c.method, CheckMethod::Exact);
        for r in 2..20u128 {
            for x in 1..6u128 {
                for i in 1..4 {
                    let c = check_exp_inequality(i, r, x).unwrap();
                    assert!(c.holds, "{i} {r} {x} {:?}", c.method);
                }
            }
        }
    }

    #[test]
    fn exp_inequality_oracle_i1() {
        // i = 1: r^x <= 2 r^x log r, checked in floats independently
        for r in 2..50u128 {
            for x in 1..8u128 {
                let lhs = (r as f64).powi(x as i32);
                let rhs = 2.0 * lhs * (r as f64).log2();
                assert!(lhs <= rhs);
                assert!(check_exp_inequality(1, r, x).unwrap().holds);
            }
        }
    }

    #[test]
    fn interval_bounds_agree_with_exact() {
        // exp^3_2(2) = 65536, exp^4_2(2) = 2^65536
        let lo = pow2_times(TowerBound::value(2.0), 4, false);
        let hi = pow2_times(TowerBound::value(2.0), 4, true);
        assert!(proven_le(TowerBound::value(65536.0), lo));
        assert!(!proven_le(hi, TowerBound::value(65536.0)));
        assert!(proven_le(hi, pow2_times(TowerBound::value(2.1), 4, false)));
        let a = tower_bound(2, 3f64.log2(), 2.0, true); // 3^9 = 19683
        assert!(a.height == 0 && (a.z - 19683.0).abs() < 1e-6);
    }

    #[test]
    fn interval_detects_false() {
        // a false instance: the right side argument is too small
        let lhs_lo = tower_bound(3, 2.0, 3.0, false);
        let rhs_hi = pow2_times(TowerBound::value(3.0), 3, true);
        assert!(proven_le(rhs_hi, lhs_lo));
    }

    #[test]
    fn chain_holds_small() {
        for k in 2..=4 {
            for i in 1..=k {
                for m in 2..=(1u32 << k) {
                    let c = theorem_chain(k, i, m).unwrap();
                    assert!(c.holds, "{k} {i} {m} {:?}", c.links);
                }
            }
        }
        let c = theorem_chain(2, 1, 2).unwrap();
        assert!(c.links.iter().all(|l| l.method == CheckMethod::Exact));
        assert_eq!(c.lemma_bits, Some(5)); // 2^4 = 16
    }

    #[test]
    fn at_least_matches_direct() {
        for h in 0..3 {
            for b in 1..5u32 {
                let t = tower(h, 2, b as u128).unwrap();
                let b = BigUint::from(b);
                assert!(tower2_at_least(h, &b, &t));
                assert!(!tower2_at_least(h, &b, &(t + 1u32)));
            }
        }
    }
}
