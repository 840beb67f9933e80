use rand::Rng;
use serde::Serialize;

use crate::combin;
use crate::guard;
use crate::par::{Exec, Mode};
use crate::probcore::{
    mix, pushforward, source_distribution, stat_distance, BitFixingSource, BitVector,
    Distribution, Source, Space, ZeroFixingSource,
};
use crate::rng;
use crate::{Error, Result};

use super::f1::f1_code;
use super::fixing::{decompose_source, enumerate_fixings, image_restriction, FixingTree};
use super::params::StepUpParams;

const CHUNK: u64 = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum F2Kind {
    /// XOR of all input bits (`m = 1`).
    Parity,
    /// Output bit `j` is the XOR of the input positions `≡ j (mod m)`.
    InterleavedParity,
    /// The first `m` input bits.
    Prefix,
    Constant { value: u64 },
    /// Output code for every input code.
    Table { table: Vec<u32> },
}

/// A bit-fixing extractor `{0,1}^n → {0,1}^m`. Its error is always
/// measured, never taken from the declaration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BitFixingExtractor {
    pub n_in: usize,
    pub m_out: usize,
    /// Star count the extractor is meant for.
    pub k_min: usize,
    pub kind: F2Kind,
    #[serde(skip)]
    class_masks: Vec<u64>,
}

impl BitFixingExtractor {
    fn build(n_in: usize, m_out: usize, k_min: usize, kind: F2Kind) -> Result<Self> {
        if n_in == 0 || n_in > 64 || m_out == 0 || m_out > 32 {
            return Err(Error::invalid(format!("unsupported shape n={n_in}, m={m_out}")));
        }
        let class_masks = match kind {
            F2Kind::InterleavedParity => (0..m_out)
                .map(|j| {
                    (1..=n_in)
                        .filter(|i| (i - 1) % m_out == j)
                        .fold(0u64, |acc, i| acc | 1 << (n_in - i))
                })
                .collect(),
            _ => Vec::new(),
        };
        Ok(BitFixingExtractor {
            n_in,
            m_out,
            k_min,
            kind,
            class_masks,
        })
    }

    pub fn parity(n: usize) -> Result<Self> {
        Self::build(n, 1, 1, F2Kind::Parity)
    }

    pub fn interleaved_parity(n: usize, m: usize) -> Result<Self> {
        if m > n {
            return Err(Error::invalid("more outputs than inputs"));
        }
        Self::build(n, m, m, F2Kind::InterleavedParity)
    }

    pub fn prefix(n: usize, m: usize) -> Result<Self> {
        if m > n {
            return Err(Error::invalid("more outputs than inputs"));
        }
        Self::build(n, m, m, F2Kind::Prefix)
    }

    pub fn constant(n: usize, m: usize, value: u64) -> Result<Self> {
        if value >> m != 0 {
            return Err(Error::invalid("constant wider than the output"));
        }
        Self::build(n, m, 0, F2Kind::Constant { value })
    }

    pub fn table(n: usize, m: usize, k_min: usize, table: Vec<u32>) -> Result<Self> {
        guard::check("table domain", 1u128 << n, guard::TABLE_DOMAIN)?;
        if table.len() != 1 << n || table.iter().any(|&v| (v as u64) >> m != 0) {
            return Err(Error::invalid("table has the wrong length or range"));
        }
        Self::build(n, m, k_min, F2Kind::Table { table })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            F2Kind::Parity => "parity",
            F2Kind::InterleavedParity => "interleaved_parity",
            F2Kind::Prefix => "prefix",
            F2Kind::Constant { .. } => "constant",
            F2Kind::Table { .. } => "table",
        }
    }

    #[inline]
    pub fn eval(&self, code: u64) -> u64 {
        match &self.kind {
            F2Kind::Parity => (code.count_ones() & 1) as u64,
            F2Kind::InterleavedParity => self.class_masks.iter().fold(0u64, |acc, &mask| {
                acc << 1 | ((code & mask).count_ones() & 1) as u64
            }),
            F2Kind::Prefix => code >> (self.n_in - self.m_out),
            F2Kind::Constant { value } => *value,
            F2Kind::Table { table } => table[code as usize] as u64,
        }
    }

    pub fn output_space(&self) -> Space {
        Space::Binary { len: self.m_out }
    }
}

/// Distance from uniform of a histogram of `2^free` equally likely samples
/// over `2^m` outputs.
fn hist_distance(hist: &[u32], free: u32) -> f64 {
    let total = (1u64 << free) as f64;
    let u = 1.0 / hist.len() as f64;
    0.5 * hist.iter().map(|&c| (c as f64 / total - u).abs()).sum::<f64>()
}

/// Worst error over every bit-fixing source on `n` bits with exactly `k`
/// stars. By monotonicity this bounds the error for all sources with at
/// least `k` stars.
pub fn verify_bitfixing_extractor(f: &BitFixingExtractor, k: usize, exec: &Exec) -> Result<f64> {
    let n = f.n_in;
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    let sources = combin::binomial(n as u64, k as u64).saturating_mul(1u128 << (n - k));
    guard::check("bit-fixing sources", sources, guard::EXHAUSTIVE_SUPPORTS)?;
    let full = crate::probcore::full_mask(n);
    let parts = combin::map_ksubset_chunks(exec, n, k, CHUNK, |subs| {
        let mut worst: f64 = 0.0;
        let mut hist = vec![0u32; 1 << f.m_out];
        subs.for_each(|stars| {
            let smask = stars.iter().fold(0u64, |acc, &b| acc | 1 << b);
            for fixed in combin::submasks(full & !smask) {
                hist.iter_mut().for_each(|h| *h = 0);
                for e in 0..1u64 << k {
                    hist[f.eval(fixed | combin::deposit(e, smask)) as usize] += 1;
                }
                worst = worst.max(hist_distance(&hist, k as u32));
            }
        });
        worst
    });
    Ok(parts.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct TableSearch {
    pub extractor: BitFixingExtractor,
    pub eps: f64,
    pub candidates: u64,
}

/// Draw seeded random tables `{0,1}^n → {0,1}^m` until one has verified
/// error at most `target` on `k`-star sources.
pub fn search_bitfixing_table(
    n: usize,
    k: usize,
    m: usize,
    target: f64,
    max_candidates: u64,
    seed: u64,
    exec: &Exec,
) -> Result<TableSearch> {
    if max_candidates == 0 {
        return Err(Error::invalid("max_candidates must be at least 1"));
    }
    guard::check("table domain", 1u128 << n.min(127), guard::TABLE_DOMAIN)?;
    let mut best = f64::INFINITY;
    for c in 0..max_candidates {
        let mut r = rng::rng_for(seed, c);
        let table: Vec<u32> = (0..1usize << n).map(|_| r.random_range(0..1u32 << m)).collect();
        let f = BitFixingExtractor::table(n, m, k, table)?;
        let eps = verify_bitfixing_extractor(&f, k, exec)?;
        if eps <= target {
            return Ok(TableSearch {
                extractor: f,
                eps,
                candidates: c + 1,
            });
        }
        best = best.min(eps);
    }
    Err(Error::SearchFailure {
        candidates: max_candidates,
        best_eps: best,
    })
}

/// `F_2(F_1(s))`.
pub fn stepup_extract(s: &[usize], p: &StepUpParams, f2: &BitFixingExtractor) -> Result<BitVector> {
    if f2.n_in != p.n {
        return Err(Error::invalid(format!(
            "F2 takes {} bits but F1 produces {}",
            f2.n_in, p.n
        )));
    }
    let x = super::f1::project_f1(s, p)?;
    BitVector::from_code(f2.m_out, f2.eval(x.code()))
}

/// Sorted 0-based leaves of an `N`-bit characteristic-vector code.
pub fn leaves_of_code(code: u64, n_ground: usize) -> Vec<u64> {
    let mut v: Vec<u64> = combin::mask_elems(code)
        .map(|b| (n_ground - 1 - b) as u64)
        .collect();
    v.reverse();
    v
}

/// Result of checking one decomposition against the direct pushforward.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionCheck {
    /// `d(mix(parts), F_1(X))`.
    pub distance: f64,
    /// Largest distance between a part's claimed source and the actual
    /// image of its restriction's extensions.
    pub max_part_distance: f64,
    pub total_weight: f64,
    pub residual_weight: f64,
}

pub fn check_decomposition(
    support: &[usize],
    p: &StepUpParams,
    delta_hat: f64,
) -> Result<DecompositionCheck> {
    let dec = decompose_source(support, p, delta_hat)?;
    let space = Space::Binary { len: p.n };
    let src = Source::ZeroFixing(ZeroFixingSource::new(p.n_ground, support)?);
    let direct = pushforward(
        |c| Some(f1_code(&leaves_of_code(c, p.n_ground), p)),
        &source_distribution(&src)?,
        space,
    )?;
    let residual = dec.residual_distribution(space)?;
    let mixed = mix(&dec.combination, residual.as_ref())?;
    let distance = stat_distance(&mixed, &direct)?;

    let tree = FixingTree::from_support(p, support)?;
    let mut max_part: f64 = 0.0;
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    for o in &dec.outcomes {
        let claimed = source_distribution(&Source::BitFixing(BitFixingSource::new(
            image_restriction(&tree, p, o.ones, o.stars),
        )))?;
        let w = 0.5f64.powi(o.stars.count_ones() as i32);
        let entries: Vec<(u64, f64)> = combin::submasks(o.stars)
            .map(|e| {
                let set = o.ones | e;
                let leaves: Vec<u64> = combin::mask_elems(set)
                    .map(|i| sorted[i] as u64 - 1)
                    .collect();
                (f1_code(&leaves, p), w)
            })
            .collect();
        let actual = Distribution::new(space, entries)?;
        max_part = max_part.max(stat_distance(&claimed, &actual)?);
    }
    Ok(DecompositionCheck {
        distance,
        max_part_distance: max_part,
        total_weight: dec.total_weight(),
        residual_weight: dec.combination.residual_weight,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionSweep {
    #[serde(rename = "N")]
    pub n_ground: usize,
    pub k: usize,
    pub mode: Mode,
    pub supports: u64,
    pub max_distance: f64,
    pub max_part_distance: f64,
    /// Every decomposition's weights summed to exactly 1.
    pub weights_exact: bool,
    pub residual_max: f64,
    pub residual_mean: f64,
}

/// Supports visited by a sweep, as sorted 1-based element lists, handed
/// to `f` one chunk at a time.
pub(crate) fn support_chunks<T, F>(
    n_ground: usize,
    k: usize,
    mode: Mode,
    exec: &Exec,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[Vec<usize>]) -> T + Sync + Send,
{
    match mode {
        Mode::Exhaustive => {
            let total = combin::binomial(n_ground as u64, k as u64);
            guard::check("exhaustive supports", total, guard::EXHAUSTIVE_SUPPORTS)?;
            Ok(combin::map_ksubset_chunks(exec, n_ground, k, CHUNK, |subs| {
                let chunk: Vec<Vec<usize>> =
                    subs.map(|s| s.into_iter().map(|x| x + 1).collect()).collect();
                f(&chunk)
            }))
        }
        Mode::Sampled { count, seed } => {
            guard::check("sampled supports", count as u128, guard::EXHAUSTIVE_SUPPORTS)?;
            if k > n_ground {
                return Err(Error::invalid(format!("k = {k} exceeds N = {n_ground}")));
            }
            Ok(exec.map_chunks(count, CHUNK, |r| {
                let chunk: Vec<Vec<usize>> = r
                    .map(|i| {
                        let mut g = rng::rng_for(seed, i);
                        rng::random_subset(&mut g, n_ground, k)
                            .into_iter()
                            .map(|x| x + 1)
                            .collect()
                    })
                    .collect();
                f(&chunk)
            }))
        }
    }
}

pub fn verify_decompositions(
    n_ground: usize,
    k: usize,
    delta_hat: f64,
    mode: Mode,
    exec: &Exec,
) -> Result<DecompositionSweep> {
    let p = StepUpParams::new(n_ground, k)?;
    type Acc = Result<(u64, f64, f64, bool, f64, f64)>;
    let parts: Vec<Acc> = support_chunks(p.n_requested, k, mode, exec, |chunk| {
        let mut acc = (0u64, 0.0f64, 0.0f64, true, 0.0f64, 0.0f64);
        for s in chunk {
            let c = check_decomposition(s, &p, delta_hat)?;
            acc.0 += 1;
            acc.1 = acc.1.max(c.distance);
            acc.2 = acc.2.max(c.max_part_distance);
            acc.3 &= c.total_weight == 1.0;
            acc.4 = acc.4.max(c.residual_weight);
            acc.5 += c.residual_weight;
        }
        Ok(acc)
    })?;
    let mut out = DecompositionSweep {
        n_ground,
        k,
        mode,
        supports: 0,
        max_distance: 0.0,
        max_part_distance: 0.0,
        weights_exact: true,
        residual_max: 0.0,
        residual_mean: 0.0,
    };
    let mut residual_sum = 0.0;
    for part in parts {
        let (c, d, pd, exact, rmax, rsum) = part?;
        out.supports += c;
        out.max_distance = out.max_distance.max(d);
        out.max_part_distance = out.max_part_distance.max(pd);
        out.weights_exact &= exact;
        out.residual_max = out.residual_max.max(rmax);
        residual_sum += rsum;
    }
    if out.supports > 0 {
        out.residual_mean = residual_sum / out.supports as f64;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepUpReport {
    #[serde(rename = "N")]
    pub n_ground: usize,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub f2: String,
    pub mode: Mode,
    pub delta_hat: f64,
    pub supports: u64,
    pub worst_eps: f64,
    /// First support (in visiting order) attaining `worst_eps`.
    pub worst_support: Vec<usize>,
    pub mean_eps: f64,
    pub residual_max: f64,
    pub residual_mean: f64,
    /// Star count `⌈δ̂ k⌉` the extractor was verified at.
    pub f2_k: usize,
    pub f2_eps: f64,
    pub bound_eps: f64,
    pub bound_holds: bool,
}

/// Worst-case error of `F_2 ∘ F_1` over zero-fixing sources, with the
/// mixture bound `ε' + max residual` it must respect.
pub fn measure_stepup(
    n_ground: usize,
    k: usize,
    f2: &BitFixingExtractor,
    mode: Mode,
    delta_hat: f64,
    exec: &Exec,
) -> Result<StepUpReport> {
    let p = StepUpParams::new(n_ground, k)?;
    if f2.n_in != p.n {
        return Err(Error::invalid(format!(
            "F2 takes {} bits but F1 produces {}",
            f2.n_in, p.n
        )));
    }
    let f2_k = ((delta_hat * k as f64).ceil() as usize).max(1).min(p.n);
    let f2_eps = verify_bitfixing_extractor(f2, f2_k, exec)?;

    struct Acc {
        count: u64,
        worst: f64,
        worst_at: Vec<usize>,
        sum: f64,
        rmax: f64,
        rsum: f64,
    }
    let parts: Vec<Result<Acc>> = support_chunks(p.n_requested, k, mode, exec, |chunk| {
        let mut acc = Acc {
            count: 0,
            worst: -1.0,
            worst_at: Vec::new(),
            sum: 0.0,
            rmax: 0.0,
            rsum: 0.0,
        };
        let mut hist = vec![0u32; 1 << f2.m_out];
        let mut leaves = Vec::with_capacity(k);
        for s in chunk {
            hist.iter_mut().for_each(|h| *h = 0);
            for sub in 0..1u64 << k {
                leaves.clear();
                leaves.extend(combin::mask_elems(sub).map(|i| s[i] as u64 - 1));
                hist[f2.eval(f1_code(&leaves, &p)) as usize] += 1;
            }
            let eps = hist_distance(&hist, k as u32);
            let outs = enumerate_fixings(&FixingTree::from_support(&p, s)?, delta_hat)?;
            let residual: f64 = outs.iter().filter(|o| !o.good).map(|o| o.weight).sum();
            acc.count += 1;
            acc.sum += eps;
            if eps > acc.worst {
                acc.worst = eps;
                acc.worst_at = s.to_vec();
            }
            acc.rmax = acc.rmax.max(residual);
            acc.rsum += residual;
        }
        Ok(acc)
    })?;

    let mut report = StepUpReport {
        n_ground,
        k,
        n: p.n,
        m: f2.m_out,
        f2: f2.name().to_string(),
        mode,
        delta_hat,
        supports: 0,
        worst_eps: 0.0,
        worst_support: Vec::new(),
        mean_eps: 0.0,
        residual_max: 0.0,
        residual_mean: 0.0,
        f2_k,
        f2_eps,
        bound_eps: 0.0,
        bound_holds: true,
    };
    let (mut sum, mut rsum) = (0.0, 0.0);
    let mut worst = -1.0;
    for part in parts {
        let a = part?;
        report.supports += a.count;
        sum += a.sum;
        rsum += a.rsum;
        if a.worst > worst {
            worst = a.worst;
            report.worst_support = a.worst_at;
        }
        report.residual_max = report.residual_max.max(a.rmax);
    }
    if report.supports > 0 {
        report.worst_eps = worst;
        report.mean_eps = sum / report.supports as f64;
        report.residual_mean = rsum / report.supports as f64;
    }
    report.bound_eps = f2_eps + report.residual_max;
    report.bound_holds = report.worst_eps <= report.bound_eps + 1e-12;
    Ok(report)
}
