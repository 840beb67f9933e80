use serde::Serialize;

use crate::combin::{binomial, KSubsets};
use crate::guard;
use crate::par::{Exec, Mode};
use crate::shiftlab::{find_coloring, pipeline_three_coloring, Coloring, ShiftGraph};
use crate::stepup::support_chunks;
use crate::{Error, Result};

/// `F(X) = (γ(X_1), …, γ(X_{k/l}))` read as a base-3 number, for a proper
/// 3-coloring `γ` of `S(n, l)` and consecutive `l`-blocks `X_i` of `X`.
#[derive(Clone, Debug)]
pub struct Disperser {
    pub n: usize,
    /// `l · ⌊k/l⌋`.
    pub k: usize,
    pub l: usize,
    pub coloring: Coloring,
}

/// A proper 3-coloring of `S(n, l)`: the constructive pipeline when it
/// reaches `l`, else an exact search when the graph is small enough.
pub fn three_coloring(n: usize, l: usize) -> Result<Coloring> {
    if let Ok(c) = pipeline_three_coloring(n, l) {
        return Ok(c);
    }
    let g = ShiftGraph::new(n, l)?;
    if g.vertex_count() <= guard::limit(guard::COLORING_SEARCH_VERTICES).min(64) {
        if let Some(c) = find_coloring(n, l, 3)? {
            return Ok(c);
        }
        return Err(Error::invalid(format!("S({n},{l}) has no proper 3-coloring")));
    }
    Err(Error::invalid(format!("no 3-coloring of S({n},{l}) is reachable")))
}

impl Disperser {
    pub fn new(n: usize, k: usize, l: usize) -> Result<Self> {
        Self::with_coloring(k, three_coloring(n, l)?)
    }

    pub fn with_coloring(k: usize, coloring: Coloring) -> Result<Self> {
        let (n, l) = (coloring.n(), coloring.l());
        if coloring.color_count() > 3 {
            return Err(Error::invalid("the disperser needs a 3-coloring"));
        }
        if k < l || k > n {
            return Err(Error::invalid(format!("need l <= k <= n (n={n}, k={k}, l={l})")));
        }
        let k = l * (k / l);
        if k / l > 40 {
            return Err(Error::invalid("3^(k/l) must fit in 64 bits"));
        }
        Ok(Disperser { n, k, l, coloring })
    }

    /// Number of output values, `3^{k/l}`.
    pub fn range(&self) -> u64 {
        3u64.pow((self.k / self.l) as u32)
    }

    /// Size of the sets `V` the guarantee is about: `2k + k/l`.
    pub fn guarantee_size(&self) -> usize {
        2 * self.k + self.k / self.l
    }

    /// Value in `0..3^{k/l}` of a sorted 1-based `k`-set.
    pub fn eval(&self, x: &[usize]) -> u64 {
        x.chunks(self.l).fold(0u64, |acc, b| acc * 3 + self.coloring.color(b) as u64 - 1)
    }

    /// Values not attained on the `k`-subsets of a sorted `V`.
    pub fn missing_values(&self, v: &[usize]) -> Vec<u64> {
        let mut seen = vec![false; self.range() as usize];
        let mut buf = vec![0usize; self.k];
        KSubsets::new(v.len(), self.k).for_each(|s| {
            for (b, &i) in buf.iter_mut().zip(s) {
                *b = v[i];
            }
            seen[self.eval(&buf) as usize] = true;
        });
        (0..self.range()).filter(|&c| !seen[c as usize]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisperserRow {
    #[serde(rename = "V")]
    pub v: Vec<usize>,
    pub missing_values: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisperserReport {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub range: u64,
    pub v_size: usize,
    pub mode: Mode,
    pub checked: u64,
    pub failures: u64,
    /// Failing sets, in visiting order.
    pub rows: Vec<DisperserRow>,
}

/// Check surjectivity on every (or a sample of) `V` of size `v_size`.
pub fn verify_disperser_sized(f: &Disperser, v_size: usize, mode: Mode, exec: &Exec) -> Result<DisperserReport> {
    if v_size < f.k || v_size > f.n {
        return Err(Error::invalid(format!("|V| = {v_size} must lie in {}..={}", f.k, f.n)));
    }
    guard::check("k-subsets per V", binomial(v_size as u64, f.k as u64), guard::EXHAUSTIVE_SUPPORTS)?;
    let chunks = support_chunks(f.n, v_size, mode, exec, |chunk| {
        let rows: Vec<DisperserRow> = chunk
            .iter()
            .filter_map(|v| {
                let missing = f.missing_values(v);
                (!missing.is_empty()).then(|| DisperserRow { v: v.clone(), missing_values: missing })
            })
            .collect();
        (chunk.len() as u64, rows)
    })?;
    let mut report = DisperserReport {
        n: f.n,
        k: f.k,
        l: f.l,
        range: f.range(),
        v_size,
        mode,
        checked: 0,
        failures: 0,
        rows: Vec::new(),
    };
    for (count, rows) in chunks {
        report.checked += count;
        report.failures += rows.len() as u64;
        report.rows.extend(rows);
    }
    Ok(report)
}

/// Surjectivity at the guaranteed size `|V| = 2k + ⌊k/l⌋`.
pub fn verify_disperser(n: usize, k: usize, l: usize, mode: Mode, exec: &Exec) -> Result<DisperserReport> {
    let f = Disperser::new(n, k, l)?;
    verify_disperser_sized(&f, f.guarantee_size(), mode, exec)
}

/// CSV rows `V,missing_values` (both space-separated inside the field).
pub fn disperser_csv(report: &DisperserReport) -> String {
    let mut out = String::from("V,missing_values\n");
    for r in &report.rows {
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(" ");
        out.push_str(&format!(
            "{},{}\n",
            join(&mut r.v.iter().map(|x| x.to_string())),
            join(&mut r.missing_values.iter().map(|x| x.to_string()))
        ));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    #[serde(rename = "N")]
    pub n_ground: usize,
    pub k: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub mode: Mode,
    pub checked: u64,
    /// Largest `Σ_i | |F^{-1}(i) ∩ C(V,k)| / C(2k,k) − 1/M |`.
    pub max_imbalance: f64,
    pub mean_imbalance: f64,
    pub worst_v: Vec<usize>,
    /// Largest `Σ_i |Pr[F(X) = i] − 1/M|` for uniform `X ⊆ V`.
    pub max_cube_l1: f64,
    /// Slice conditioning factor `2^{2k} / C(2k,k)`.
    pub c_factor: f64,
    /// `2^k / C(2k,k)`, as written in the corollary's proof.
    pub c_printed: f64,
    /// `c_factor · max_cube_l1`.
    pub reference_bound: f64,
}

/// Imbalance of `F` (values in `0..M`) on the `k`-subsets of sets `V` of size `2k`.
pub fn balanced_restriction_check<F>(f: F, m: u32, n_ground: usize, k: usize, mode: Mode, exec: &Exec) -> Result<BalanceReport>
where
    F: Fn(&[usize]) -> u32 + Sync + Send,
{
    if m == 0 || k == 0 || 2 * k > n_ground {
        return Err(Error::invalid(format!("need M >= 1 and 1 <= k <= N/2 (N={n_ground}, k={k})")));
    }
    guard::check("subsets per support", 2 * k as u128, guard::SUBSET_BITS)?;
    let slice = binomial(2 * k as u64, k as u64) as f64;
    let cube = (1u64 << (2 * k)) as f64;
    let u = 1.0 / m as f64;
    let chunks = support_chunks(n_ground, 2 * k, mode, exec, |chunk| {
        let mut slice_hist = vec![0u64; m as usize];
        let mut cube_hist = vec![0u64; m as usize];
        let mut buf = Vec::with_capacity(2 * k);
        let (mut worst, mut at, mut sum, mut cube_worst) = (-1.0f64, Vec::new(), 0.0, 0.0f64);
        for v in chunk {
            slice_hist.iter_mut().for_each(|h| *h = 0);
            cube_hist.iter_mut().for_each(|h| *h = 0);
            for x in 0..1u64 << (2 * k) {
                buf.clear();
                buf.extend(crate::combin::mask_elems(x).map(|i| v[i]));
                let c = f(&buf) as usize;
                cube_hist[c] += 1;
                if buf.len() == k {
                    slice_hist[c] += 1;
                }
            }
            let imb: f64 = slice_hist.iter().map(|&h| (h as f64 / slice - u).abs()).sum();
            let cl1: f64 = cube_hist.iter().map(|&h| (h as f64 / cube - u).abs()).sum();
            sum += imb;
            cube_worst = cube_worst.max(cl1);
            if imb > worst {
                worst = imb;
                at = v.clone();
            }
        }
        (chunk.len() as u64, worst, at, sum, cube_worst)
    })?;
    let c_factor = cube / slice;
    let mut r = BalanceReport {
        n_ground,
        k,
        m,
        mode,
        checked: 0,
        max_imbalance: 0.0,
        mean_imbalance: 0.0,
        worst_v: Vec::new(),
        max_cube_l1: 0.0,
        c_factor,
        c_printed: (1u64 << k) as f64 / slice,
        reference_bound: 0.0,
    };
    let (mut worst, mut sum) = (-1.0, 0.0);
    for (count, w, at, s, cw) in chunks {
        r.checked += count;
        sum += s;
        r.max_cube_l1 = r.max_cube_l1.max(cw);
        if w > worst {
            worst = w;
            r.worst_v = at;
        }
    }
    if r.checked > 0 {
        r.max_imbalance = worst;
        r.mean_imbalance = sum / r.checked as f64;
    }
    r.reference_bound = c_factor * r.max_cube_l1;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n8_l2_k2() {
        let r = verify_disperser(8, 2, 2, Mode::Exhaustive, &Exec::default()).unwrap();
        assert_eq!(r.checked, 56);
        assert_eq!(r.failures, 0);
        assert_eq!(r.range, 3);
    }

    #[test]
    fn single_block_is_surjective_on_odd_cycles() {
        let f = Disperser::new(8, 2, 2).unwrap();
        let v = [1, 3, 4, 6, 8];
        assert!(f.missing_values(&v).is_empty());
    }

    #[test]
    fn larger_k_and_csv() {
        let f = Disperser::new(8, 3, 2).unwrap();
        assert_eq!(f.k, 2);
        let shrunk = verify_disperser_sized(&f, 4, Mode::Exhaustive, &Exec::sequential()).unwrap();
        assert_eq!(shrunk.checked, 70);
        let csv = disperser_csv(&shrunk);
        assert_eq!(csv.lines().count() as u64, shrunk.failures + 1);
    }

    #[test]
    fn no_three_coloring_at_l2_for_n_ge_9() {
        assert!(Disperser::new(10, 4, 2).is_err());
        assert!(Disperser::new(12, 6, 6).is_ok());
    }

    #[test]
    fn balance_trivial() {
        let ex = Exec::sequential();
        let r = balanced_restriction_check(|_| 0, 2, 8, 2, Mode::Exhaustive, &ex).unwrap();
        assert_eq!(r.max_imbalance, 1.0);
        let r = balanced_restriction_check(|x| (x.len() % 2) as u32, 2, 8, 2, Mode::Exhaustive, &ex).unwrap();
        assert_eq!(r.max_imbalance, 1.0);
        assert_eq!(r.max_cube_l1, 0.0);
        assert_eq!(r.c_factor, 16.0 / 6.0);
    }
}
