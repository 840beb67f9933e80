use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use serde::Serialize;

use super::oracle::ColoringOracle;
use crate::combin::binomial_sum;
use crate::guard;
use crate::par::Exec;
use crate::{Error, Result};

/// `n · m^{Σ_{j ≤ k-1} C(n-1, j)}`.
pub fn min_n_derivative(n: usize, k: usize, m: u32) -> Result<BigUint> {
    if k == 0 || k > n || m < 2 {
        return Err(Error::invalid(format!("need 1 <= k <= n and m >= 2 (n={n}, k={k}, m={m})")));
    }
    let e = binomial_sum(n as u64 - 1, k as u64 - 1);
    let digits = e as f64 * (m as f64).log10();
    guard::check("decimal digits", digits.ceil() as u128, guard::BIGINT_DIGITS)?;
    Ok(BigUint::from(n) * BigUint::from(m).pow(e as u32))
}

/// How `|U|` evolved: one entry after every majority filter and every
/// removal of `min U`, starting with the initial size.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Transcript {
    pub u_sizes: Vec<u64>,
    /// Passes through the main loop.
    pub rounds: u64,
    /// Majority filters applied.
    pub divisions: u64,
    /// Elements moved from `U` to `V` inside the loop.
    pub subtractions: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeResult {
    #[serde(rename = "V")]
    pub v: Vec<u64>,
    /// Majority color chosen for each `Y`, including `∅` (the common
    /// singleton color); `φ(Y ∪ {u}) = reduced[Y]` for every later `u ∈ V`.
    #[serde(serialize_with = "ser_reduced")]
    pub reduced: BTreeMap<Vec<u64>, u32>,
    pub transcript: Transcript,
}

fn ser_reduced<S: serde::Serializer>(r: &BTreeMap<Vec<u64>, u32>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(r.len()))?;
    for (y, c) in r {
        seq.serialize_element(&(y, c))?;
    }
    seq.end()
}

/// Majority color of `φ(X ∪ {u})` over `u ∈ U`, ties to the smallest color.
fn majority(u: &[u64], x: &[u64], m: u32, phi: &(dyn Fn(&[u64]) -> u32 + Sync), exec: &Exec) -> u32 {
    const CHUNK: u64 = 1 << 15;
    let count = |range: std::ops::Range<u64>| {
        let mut hist = vec![0u64; m as usize + 1];
        let mut buf = Vec::with_capacity(x.len() + 1);
        buf.extend_from_slice(x);
        buf.push(0);
        for i in range {
            *buf.last_mut().unwrap() = u[i as usize];
            hist[phi(&buf) as usize] += 1;
        }
        hist
    };
    let hist = if (u.len() as u64) < 2 * CHUNK {
        count(0..u.len() as u64)
    } else {
        exec.map_chunks(u.len() as u64, CHUNK, count)
            .into_iter()
            .fold(vec![0u64; m as usize + 1], |mut a, h| {
                a.iter_mut().zip(h).for_each(|(x, y)| *x += y);
                a
            })
    };
    let mut best = 1;
    for c in 2..=m {
        if hist[c as usize] > hist[best as usize] {
            best = c;
        }
    }
    best
}

/// The greedy procedure over `ground` (sorted). `target = None` runs until
/// `U` is exhausted. `k` bounds the sets `φ` is queried on.
pub(crate) fn derive(
    ground: &[u64],
    phi: &(dyn Fn(&[u64]) -> u32 + Sync),
    target: Option<usize>,
    k: usize,
    m: u32,
    stage: usize,
    exec: &Exec,
) -> Result<DerivativeResult> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut t = Transcript { u_sizes: vec![ground.len() as u64], ..Transcript::default() };
    let mut reduced = BTreeMap::new();
    let mut u: Vec<u64> = ground.to_vec();
    let filter = |u: &mut Vec<u64>, x: &[u64], c: u32| {
        let mut buf = x.to_vec();
        buf.push(0);
        u.retain(|&e| {
            *buf.last_mut().unwrap() = e;
            phi(&buf) == c
        });
    };
    if u.is_empty() {
        return Err(Error::GuaranteeFailure { stage, partial: Vec::new() });
    }
    // lines 2-4
    let c = majority(&u, &[], m, phi, exec);
    filter(&mut u, &[], c);
    reduced.insert(Vec::new(), c);
    t.divisions += 1;
    t.u_sizes.push(u.len() as u64);
    let mut v = vec![u.remove(0)];
    t.u_sizes.push(u.len() as u64);
    // lines 5-9
    while target.is_none_or(|n| v.len() < n) && !u.is_empty() {
        t.rounds += 1;
        let top = *v.last().unwrap();
        let rest = &v[..v.len() - 1];
        // X = Y ∪ {max V} with |Y| <= k-2, so |X ∪ {u}| <= k
        if k >= 2 {
            let mut ys: Vec<Vec<u64>> = Vec::new();
            for size in 0..=(k - 2).min(rest.len()) {
                for s in crate::combin::KSubsets::new(rest.len(), size) {
                    ys.push(s.into_iter().map(|i| rest[i]).collect());
                }
            }
            for mut x in ys {
                if u.is_empty() {
                    break;
                }
                x.push(top);
                let c = majority(&u, &x, m, phi, exec);
                filter(&mut u, &x, c);
                reduced.insert(x, c);
                t.divisions += 1;
                t.u_sizes.push(u.len() as u64);
            }
        }
        if u.is_empty() {
            break;
        }
        v.push(u.remove(0));
        t.subtractions += 1;
        t.u_sizes.push(u.len() as u64);
    }
    if let Some(n) = target {
        if v.len() < n {
            return Err(Error::GuaranteeFailure { stage, partial: v });
        }
    }
    Ok(DerivativeResult { v, reduced, transcript: t })
}

/// One derivative step on `[N]`: find `V`, `|V| = n`, on which `φ(X)`
/// depends only on `X` minus its maximum.
pub fn derivative_step(phi: &ColoringOracle, n: usize, k: usize, exec: &Exec) -> Result<DerivativeResult> {
    if k == 0 || k > phi.k_max || n as u64 > phi.n_ground {
        return Err(Error::invalid(format!(
            "need 1 <= k <= k_max = {} and n <= N = {}",
            phi.k_max, phi.n_ground
        )));
    }
    guard::check("ground set", phi.n_ground as u128, guard::EXHAUSTIVE_SUPPORTS * 10)?;
    let ground: Vec<u64> = (1..=phi.n_ground).collect();
    derive(&ground, &|x: &[u64]| phi.color(x), Some(n), k, phi.m, 1, exec)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub ground: u64,
    pub found: u64,
    pub transcript: Transcript,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IteratedResult {
    #[serde(rename = "V")]
    pub v: Vec<u64>,
    pub i: usize,
    pub k: usize,
    /// Maxima dropped after each non-final stage, ascending.
    pub removed: Vec<u64>,
    pub stages: Vec<StageRecord>,
}

/// Apply the derivative step `i` times. Stage `j` works on the previous
/// stage's set minus its maximum, with `φ^{(j-1)}(Z) = φ(Z ∪ removed)`;
/// non-final stages keep going until `U` runs out, the last one stops at
/// `|V| = k`.
pub fn iterated_derivative(phi: &ColoringOracle, k: usize, i: usize, exec: &Exec) -> Result<IteratedResult> {
    if i == 0 || i > k || k > phi.k_max || k as u64 > phi.n_ground {
        return Err(Error::invalid(format!("need 1 <= i <= k <= k_max (k={k}, i={i})")));
    }
    guard::check("ground set", phi.n_ground as u128, guard::EXHAUSTIVE_SUPPORTS * 10)?;
    let mut ground: Vec<u64> = (1..=phi.n_ground).collect();
    let mut removed: Vec<u64> = Vec::new();
    let mut stages = Vec::new();
    for j in 1..=i {
        let tail = removed.clone();
        let phi_j = move |z: &[u64]| {
            let mut buf = Vec::with_capacity(z.len() + tail.len());
            buf.extend_from_slice(z);
            buf.extend_from_slice(&tail);
            phi.color(&buf)
        };
        let last = j == i;
        let r = derive(&ground, &phi_j, last.then_some(k), k - j + 1, phi.m, j, exec)?;
        stages.push(StageRecord { ground: ground.len() as u64, found: r.v.len() as u64, transcript: r.transcript });
        if last {
            return Ok(IteratedResult { v: r.v, i, k, removed, stages });
        }
        let mut v = r.v;
        let top = v.pop().unwrap();
        removed.insert(0, top);
        ground = v;
    }
    unreachable!()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DependenceCheck {
    pub holds: bool,
    /// Two sets that should share a color but do not.
    pub counterexample: Option<(Vec<u64>, Vec<u64>)>,
    pub checked: u64,
}

/// Check on every `X ⊆ V` with `|X| <= k`: sets of size below `i` are
/// colored by size alone, and sets of size at least `i` by `X` minus its
/// `i` largest elements.
pub fn verify_partial_dependence(phi: &ColoringOracle, v: &[u64], k: usize, i: usize) -> Result<DependenceCheck> {
    guard::check("subsets per support", v.len() as u128, guard::SUBSET_BITS)?;
    let mut v = v.to_vec();
    v.sort_unstable();
    let k = k.min(phi.k_max);
    let mut by_size: HashMap<usize, (u32, Vec<u64>)> = HashMap::new();
    let mut by_core: HashMap<Vec<u64>, (u32, Vec<u64>)> = HashMap::new();
    let mut checked = 0;
    for size in 0..=k.min(v.len()) {
        for s in crate::combin::KSubsets::new(v.len(), size) {
            let x: Vec<u64> = s.into_iter().map(|j| v[j]).collect();
            let c = phi.color(&x);
            checked += 1;
            let slot = if size < i {
                by_size.entry(size).or_insert_with(|| (c, x.clone()))
            } else {
                by_core.entry(x[..size - i].to_vec()).or_insert_with(|| (c, x.clone()))
            };
            if slot.0 != c {
                return Ok(DependenceCheck { holds: false, counterexample: Some((slot.1.clone(), x)), checked });
            }
        }
    }
    Ok(DependenceCheck { holds: true, counterexample: None, checked })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CeilingCheck {
    pub distinct: u64,
    pub bound: u64,
    pub pass: bool,
    /// Entropy of `φ(X)` for uniform `X ⊆ V`, in bits.
    pub entropy: f64,
    pub entropy_bound: f64,
}

/// Distinct colors over all `X ⊆ V` against `2^{k-i} + i`.
pub fn color_ceiling_check(phi: &ColoringOracle, v: &[u64], k: usize, i: usize) -> Result<CeilingCheck> {
    if v.len() != k || i > k {
        return Err(Error::invalid(format!("need |V| = k and i <= k (|V|={}, k={k}, i={i})", v.len())));
    }
    guard::check("subsets per support", k as u128, guard::SUBSET_BITS)?;
    let mut v = v.to_vec();
    v.sort_unstable();
    let mut hist = vec![0u64; phi.m as usize + 1];
    let mut buf = Vec::with_capacity(k);
    for x in 0..1u64 << k {
        buf.clear();
        buf.extend(crate::combin::mask_elems(x).map(|j| v[j]));
        hist[phi.color(&buf) as usize] += 1;
    }
    let total = (1u64 << k) as f64;
    let entropy = hist
        .iter()
        .filter(|&&h| h > 0)
        .map(|&h| {
            let p = h as f64 / total;
            -p * p.log2()
        })
        .sum();
    let distinct = hist.iter().filter(|&&h| h > 0).count() as u64;
    let bound = (1u64 << (k - i)) + i as u64;
    Ok(CeilingCheck { distinct, bound, pass: distinct <= bound, entropy, entropy_bound: (bound as f64).log2() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_n_values() {
        assert_eq!(min_n_derivative(2, 1, 2).unwrap(), BigUint::from(4u32));
        assert_eq!(min_n_derivative(3, 2, 2).unwrap(), BigUint::from(24u32));
        assert_eq!(min_n_derivative(3, 3, 2).unwrap(), BigUint::from(48u32));
        // n · m^{C(n-1, <=k-1)} <= m^{2^n} at n = k, m = 2
        for n in 1..10 {
            assert!(min_n_derivative(n, n, 2).unwrap() <= BigUint::from(2u32).pow(1 << n));
        }
    }

    #[test]
    fn k1_pigeonhole() {
        for seed in 0..20 {
            let phi = ColoringOracle::seeded(4, 1, 2, seed).unwrap();
            let r = derivative_step(&phi, 2, 1, &Exec::sequential()).unwrap();
            assert_eq!(r.v.len(), 2);
            assert_eq!(phi.color(&r.v[..1]), phi.color(&r.v[1..]));
        }
    }

    #[test]
    fn guaranteed_runs_verify() {
        for seed in 0..30 {
            let phi = ColoringOracle::seeded(24, 2, 2, seed).unwrap();
            let r = derivative_step(&phi, 3, 2, &Exec::sequential()).unwrap();
            assert!(verify_partial_dependence(&phi, &r.v, 2, 1).unwrap().holds);
            assert_eq!(r.transcript.divisions as u128, binomial_sum(2, 1));
            assert_eq!(r.transcript.subtractions, 2);
            assert!(r.transcript.u_sizes.windows(2).all(|w| w[1] <= w[0]));
            for (y, c) in &r.reduced {
                for &u in r.v.iter().filter(|&&u| y.last().is_none_or(|&t| u > t)) {
                    let mut x = y.clone();
                    x.push(u);
                    assert_eq!(phi.color(&x), *c);
                }
            }
        }
    }

    #[test]
    fn iterated_properties() {
        let ex = Exec::sequential();
        let mut successes = 0;
        for seed in 0..40 {
            let phi = ColoringOracle::seeded(20_000, 3, 2, seed).unwrap();
            match iterated_derivative(&phi, 3, 2, &ex) {
                Ok(r) => {
                    successes += 1;
                    assert!(verify_partial_dependence(&phi, &r.v, 3, 2).unwrap().holds);
                    let c = color_ceiling_check(&phi, &r.v, 3, 2).unwrap();
                    assert!(c.pass && c.bound == 4);
                }
                Err(Error::GuaranteeFailure { stage, .. }) => assert!(stage <= 2),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(successes > 0);
    }

    #[test]
    fn i_equals_k_colors_by_size() {
        let ex = Exec::sequential();
        for seed in 0..20 {
            let phi = ColoringOracle::seeded(5000, 2, 2, seed).unwrap();
            if let Ok(r) = iterated_derivative(&phi, 2, 2, &ex) {
                let d = verify_partial_dependence(&phi, &r.v, 2, 2).unwrap();
                assert!(d.holds);
                return;
            }
        }
        panic!("no success");
    }

    #[test]
    fn random_sets_fail_dependence() {
        let phi = ColoringOracle::seeded(100, 3, 3, 5).unwrap();
        let d = verify_partial_dependence(&phi, &[3, 17, 40, 41, 77, 90], 3, 1).unwrap();
        assert!(!d.holds);
        assert!(d.counterexample.is_some());
        assert!(verify_partial_dependence(&phi, &[3, 17, 40], 3, 0).unwrap().holds);
    }

    #[test]
    fn below_guarantee_may_fail() {
        let phi = ColoringOracle::adversarial(23, 2, 2).unwrap();
        match derivative_step(&phi, 3, 2, &Exec::sequential()) {
            Ok(r) => assert!(verify_partial_dependence(&phi, &r.v, 2, 1).unwrap().holds),
            Err(Error::GuaranteeFailure { stage: 1, .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn ceiling_formula() {
        let phi = ColoringOracle::seeded(10, 3, 8, 0).unwrap();
        assert_eq!(color_ceiling_check(&phi, &[1, 2, 3], 3, 1).unwrap().bound, 5);
        assert_eq!(color_ceiling_check(&phi, &[1, 2, 3], 3, 3).unwrap().bound, 4);
    }
}
