use rand::Rng;
use serde::{Deserialize, Serialize};

use super::decompose::aligned_blocks;
use super::params::{block_partition, shift_f1, shift_f1_code, ShiftParams};
use crate::combin::binomial;
use crate::guard;
use crate::par::{Exec, Mode};
use crate::probcore::{symbol_code, BitVector, Space};
use crate::rng::rng_for;
use crate::stepup::support_chunks;
use crate::{Error, Result};

/// Dense table `[d]^p → {0,1}^m`, indexed by the mixed-radix code of the
/// input string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolTable {
    pub p: usize,
    pub d: usize,
    pub m: usize,
    pub table: Vec<u32>,
}

impl SymbolTable {
    pub fn new(p: usize, d: usize, m: usize, table: Vec<u32>) -> Result<Self> {
        let size = Space::Symbols { alphabet: d, len: p }.size();
        guard::check("symbol table domain", size, guard::TABLE_DOMAIN)?;
        if m == 0 || m > 16 {
            return Err(Error::invalid(format!("m = {m} outside 1..=16")));
        }
        if table.len() as u128 != size {
            return Err(Error::invalid(format!("table has {} entries, expected {size}", table.len())));
        }
        if table.iter().any(|&v| v >> m != 0) {
            return Err(Error::invalid(format!("table value exceeds {m} bits")));
        }
        Ok(SymbolTable { p, d, m, table })
    }

    pub fn constant(p: usize, d: usize, m: usize, value: u32) -> Result<Self> {
        let size = Space::Symbols { alphabet: d, len: p }.size();
        guard::check("symbol table domain", size, guard::TABLE_DOMAIN)?;
        Self::new(p, d, m, vec![value; size as usize])
    }

    pub fn eval(&self, code: u64) -> u32 {
        self.table[code as usize]
    }

    pub fn eval_symbols(&self, s: &[u32]) -> Result<u32> {
        if s.len() != self.p || s.iter().any(|&x| x == 0 || x as usize > self.d) {
            return Err(Error::invalid(format!("{s:?} is not in [{}]^{}", self.d, self.p)));
        }
        Ok(self.eval(symbol_code(s, self.d)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: SymbolTable = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(t.p, t.d, t.m, t.table)
    }
}

/// `½ Σ |count/2^free − 2^{-m}|`.
fn hist_distance(hist: &[u32], free: u32) -> f64 {
    let total = (1u64 << free) as f64;
    let u = 1.0 / hist.len() as f64;
    0.5 * hist.iter().map(|&c| (c as f64 / total - u).abs()).sum::<f64>()
}

/// Per-position options of a special source: `d` fixed symbols, then the
/// `C(d,2)` pairs.
fn position_options(d: usize) -> Vec<(u32, Option<u32>)> {
    let mut out: Vec<(u32, Option<u32>)> = (1..=d as u32).map(|a| (a, None)).collect();
    for a in 1..=d as u32 {
        for b in a + 1..=d as u32 {
            out.push((a, Some(b)));
        }
    }
    out
}

/// Number of special symbol-fixing sources on `[d]^p` (all `t`).
pub fn special_source_count(p: usize, d: usize) -> u128 {
    let opts = d as u128 + binomial(d as u64, 2);
    (0..p).fold(1u128, |acc, _| acc.saturating_mul(opts))
}

/// Worst distance from uniform over every special `(p, t, d)` source with
/// `t >= k_req`, by full enumeration.
pub fn verify_symbol_extractor(f: &SymbolTable, k_req: usize, exec: &Exec) -> Result<f64> {
    let (p, d) = (f.p, f.d);
    if k_req == 0 || k_req > p {
        return Err(Error::invalid(format!("k_req = {k_req} outside 1..={p}")));
    }
    let total = special_source_count(p, d);
    guard::check("special symbol-fixing sources", total, guard::SYMBOL_SOURCES)?;
    let opts = position_options(d);
    let radix = opts.len() as u64;
    let weights: Vec<u64> = (0..p).map(|i| (d as u64).pow((p - 1 - i) as u32)).collect();
    let chunks = exec.map_chunks(total as u64, 1 << 12, |r| {
        let mut hist = vec![0u32; 1 << f.m];
        let mut deltas = Vec::with_capacity(p);
        let mut worst: f64 = 0.0;
        for idx in r {
            let mut rest = idx;
            let mut base = 0u64;
            deltas.clear();
            for i in (0..p).rev() {
                let (a, b) = opts[(rest % radix) as usize];
                rest /= radix;
                base += (a as u64 - 1) * weights[i];
                if let Some(b) = b {
                    deltas.push((b - a) as u64 * weights[i]);
                }
            }
            let t = deltas.len();
            if t < k_req {
                continue;
            }
            hist.iter_mut().for_each(|h| *h = 0);
            for e in 0..1u64 << t {
                let code = deltas
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| e >> j & 1 == 1)
                    .fold(base, |c, (_, w)| c + w);
                hist[f.eval(code) as usize] += 1;
            }
            worst = worst.max(hist_distance(&hist, t as u32));
        }
        worst
    });
    Ok(chunks.into_iter().fold(0.0, f64::max))
}

/// The counting-argument sufficient condition
/// `log2 d <= ((log2 e)/3 · ε² · 2^k − 2^m − 1) / (2n)` with `n = p`,
/// `k = k_req`; it only applies when `1 < m <= k <= n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaBound {
    pub applicable: bool,
    pub rhs_log2: f64,
    pub lhs_log2: f64,
    pub satisfied: bool,
}

pub fn lemma_bound(p: usize, k_req: usize, d: usize, m: usize, eps: f64) -> LemmaBound {
    let applicable = 1 < m && m <= k_req && k_req <= p;
    let rhs = (std::f64::consts::LOG2_E / 3.0 * eps * eps * 2f64.powi(k_req as i32)
        - 2f64.powi(m as i32)
        - 1.0)
        / (2.0 * p as f64);
    let lhs = (d as f64).log2();
    LemmaBound { applicable, rhs_log2: rhs, lhs_log2: lhs, satisfied: applicable && lhs <= rhs }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub max_candidates: u64,
    pub target_eps: f64,
    pub m_out: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct F2Search {
    pub table: SymbolTable,
    pub eps: f64,
    /// Candidates drawn, including the returned one.
    pub candidates: u64,
    pub seed: u64,
    pub lemma: LemmaBound,
}

/// Candidate `c` of the seeded search.
pub fn candidate_table(p: usize, d: usize, m: usize, seed: u64, c: u64) -> Result<SymbolTable> {
    let size = Space::Symbols { alphabet: d, len: p }.size();
    guard::check("symbol table domain", size, guard::TABLE_DOMAIN)?;
    let mut r = rng_for(seed, c);
    let table = (0..size).map(|_| r.random_range(0..1u32 << m)).collect();
    SymbolTable::new(p, d, m, table)
}

/// Draw seeded random tables until one verifies at `target_eps`.
pub fn search_f2(p: usize, k_req: usize, d: usize, config: &SearchConfig, exec: &Exec) -> Result<F2Search> {
    if config.max_candidates == 0 {
        return Err(Error::invalid("max_candidates must be at least 1"));
    }
    let m = config.m_out;
    let mut best = f64::INFINITY;
    for c in 0..config.max_candidates {
        let table = candidate_table(p, d, m, config.seed, c)?;
        let eps = verify_symbol_extractor(&table, k_req, exec)?;
        if eps <= config.target_eps {
            return Ok(F2Search {
                table,
                eps,
                candidates: c + 1,
                seed: config.seed,
                lemma: lemma_bound(p, k_req, d, m, config.target_eps),
            });
        }
        best = best.min(eps);
    }
    Err(Error::SearchFailure { candidates: config.max_candidates, best_eps: best })
}

/// `F_2(F_1(X))` as an `m`-bit vector.
pub fn shift_extract(x: &[usize], params: &ShiftParams, f2: &SymbolTable) -> Result<BitVector> {
    if f2.p != params.p || f2.d != params.d {
        return Err(Error::invalid(format!(
            "F2 reads [{}]^{} but F1 writes [{}]^{}",
            f2.d, f2.p, params.d, params.p
        )));
    }
    let s = shift_f1(x, params)?;
    BitVector::from_code(f2.m, f2.eval(symbol_code(&s, params.d)) as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftReport {
    #[serde(rename = "N")]
    pub n_ground: usize,
    pub k: usize,
    pub l: usize,
    pub p: usize,
    pub d: usize,
    pub m: usize,
    pub mode: Mode,
    pub supports: u64,
    pub worst_eps: f64,
    pub worst_support: Vec<usize>,
    pub mean_eps: f64,
    pub residual_max: f64,
    pub residual_mean: f64,
    /// Pair count `k'` the extractor was verified at.
    pub f2_k: usize,
    pub f2_eps: f64,
    pub bound_eps: f64,
    pub bound_holds: bool,
}

/// Weight of the parts with fewer than `k'` pair entries, computed from the
/// aligned-block counts.
pub fn shift_residual_weight(params: &ShiftParams) -> Result<f64> {
    let part = block_partition(params.k, params.l)?;
    let k_prime = params.k_prime() as u32;
    let bad = (0..1u64 << params.k)
        .filter(|&x| aligned_blocks(x, &part).count_ones() < k_prime)
        .count();
    Ok(bad as f64 * 0.5f64.powi(params.k as i32))
}

/// Worst-case error of `F_2 ∘ F_1` over zero-fixing sources with the mixture
/// bound `ε' + residual`.
pub fn measure_shift(params: &ShiftParams, f2: &SymbolTable, mode: Mode, exec: &Exec) -> Result<ShiftReport> {
    if f2.p != params.p || f2.d != params.d {
        return Err(Error::invalid("F2 does not match the F1 output space"));
    }
    let k = params.k;
    guard::check("subsets per support", k as u128, guard::SUBSET_BITS)?;
    let f2_k = params.k_prime().min(params.p);
    let f2_eps = verify_symbol_extractor(f2, f2_k, exec)?;
    // The residual weight does not depend on V: the aligned-block events only
    // look at positions within the sorted support.
    let residual = shift_residual_weight(params)?;

    let chunks: Vec<(u64, f64, Vec<usize>, f64)> = support_chunks(params.n_ground, k, mode, exec, |chunk| {
        let mut hist = vec![0u32; 1 << f2.m];
        let mut buf = Vec::with_capacity(k);
        let (mut worst, mut at, mut sum) = (-1.0f64, Vec::new(), 0.0);
        for v in chunk {
            hist.iter_mut().for_each(|h| *h = 0);
            for x in 0..1u64 << k {
                buf.clear();
                buf.extend(crate::combin::mask_elems(x).map(|i| v[i]));
                hist[f2.eval(shift_f1_code(&buf, params)) as usize] += 1;
            }
            let eps = hist_distance(&hist, k as u32);
            sum += eps;
            if eps > worst {
                worst = eps;
                at = v.clone();
            }
        }
        (chunk.len() as u64, worst, at, sum)
    })?;
    let mut report = ShiftReport {
        n_ground: params.n_ground,
        k,
        l: params.l,
        p: params.p,
        d: params.d,
        m: f2.m,
        mode,
        supports: 0,
        worst_eps: 0.0,
        worst_support: Vec::new(),
        mean_eps: 0.0,
        residual_max: residual,
        residual_mean: residual,
        f2_k,
        f2_eps,
        bound_eps: f2_eps + residual,
        bound_holds: true,
    };
    let (mut worst, mut sum) = (-1.0, 0.0);
    for (count, w, at, s) in chunks {
        report.supports += count;
        sum += s;
        if w > worst {
            worst = w;
            report.worst_support = at;
        }
    }
    if report.supports > 0 {
        report.worst_eps = worst;
        report.mean_eps = sum / report.supports as f64;
    }
    report.bound_holds = report.worst_eps <= report.bound_eps + 1e-12;
    Ok(report)
}
