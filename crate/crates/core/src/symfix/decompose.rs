use serde::Serialize;

use super::params::{block_partition, shift_f1_code, BlockPartition, ShiftParams};
use crate::guard;
use crate::par::{Exec, Mode};
use crate::probcore::{
    mix, mix_distributions, source_distribution, stat_distance, symbols_of, ConvexCombination,
    Distribution, Source, SpecialSymbolFixingSource, SymbolEntry,
};
use crate::stepup::support_chunks;
use crate::{Error, Result};

/// One source of the decomposition: the `X ⊆ V` that agree with `base`
/// outside the blocks in `j_blocks`, and inside each such block drop either
/// its maximum or its minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftPart {
    /// 0-based indices of the blocks in `J`.
    pub j_blocks: Vec<usize>,
    /// Member whose `J` blocks all drop their maximum, as a bitmask over
    /// positions of the sorted support.
    pub base: u64,
    pub weight: f64,
    pub t: usize,
    pub good: bool,
    pub source: SpecialSymbolFixingSource,
}

#[derive(Clone, Debug)]
pub struct ShiftDecomposition {
    pub partition: BlockPartition,
    /// Good parts, with the bad parts' total as residual weight.
    pub combination: ConvexCombination,
    pub residual_parts: Vec<(f64, Source)>,
    pub parts: Vec<ShiftPart>,
}

impl ShiftDecomposition {
    pub fn residual_distribution(&self) -> Result<Option<Distribution>> {
        let w = self.combination.residual_weight;
        if w == 0.0 {
            return Ok(None);
        }
        let dists = self
            .residual_parts
            .iter()
            .map(|(_, s)| source_distribution(s))
            .collect::<Result<Vec<_>>>()?;
        let parts: Vec<(f64, &Distribution)> =
            self.residual_parts.iter().zip(&dists).map(|((pw, _), d)| (pw / w, d)).collect();
        let space = self.residual_parts[0].1.space();
        mix_distributions(space, &parts).map(Some)
    }

    pub fn total_weight(&self) -> f64 {
        self.combination.part_weight() + self.combination.residual_weight
    }
}

fn block_bits(x: u64, b: &std::ops::Range<usize>) -> u64 {
    (x >> b.start) & ((1u64 << b.len()) - 1)
}

/// Bitmask of the full odd blocks `i` where `X` satisfies the alignment,
/// initial-segment and drop-one-end clauses.
pub fn aligned_blocks(x: u64, part: &BlockPartition) -> u64 {
    let l = part.l;
    let mut out = 0u64;
    let mut count = 0u32;
    for (i, b) in part.blocks.iter().enumerate() {
        let xb = block_bits(x, b);
        if i % 2 == 0 && b.len() == l + 1 {
            let c1 = count as usize % l == 0;
            let c2 = i == 0 || {
                let prev = block_bits(x, &part.blocks[i - 1]);
                prev & (prev + 1) == 0
            };
            let full = (1u64 << (l + 1)) - 1;
            let c3 = xb == full >> 1 || xb == full & !1;
            if c1 && c2 && c3 {
                out |= 1 << i;
            }
        }
        count += xb.count_ones();
    }
    out
}

fn elements(x: u64, v: &[usize], buf: &mut Vec<usize>) {
    buf.clear();
    let mut rest = x;
    while rest != 0 {
        buf.push(v[rest.trailing_zeros() as usize]);
        rest &= rest - 1;
    }
}

fn check_support(v: &[usize], params: &ShiftParams) -> Result<()> {
    if v.len() != params.k {
        return Err(Error::invalid(format!("|V| = {} but k = {}", v.len(), params.k)));
    }
    if v[0] == 0 || v[v.len() - 1] > params.n_ground || v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("V must be a sorted subset of [{}]", params.n_ground)));
    }
    guard::check("subsets per support", v.len() as u128, guard::SUBSET_BITS)
}

/// Decompose `F_1` applied to the zero-fixing source on `V` (sorted, 1-based)
/// into special symbol-fixing sources.
pub fn decompose_shift_source(v: &[usize], params: &ShiftParams) -> Result<ShiftDecomposition> {
    check_support(v, params)?;
    let (k, l) = (params.k, params.l);
    let partition = block_partition(k, l)?;
    let k_prime = params.k_prime();
    let mut parts = Vec::new();
    let mut buf = Vec::with_capacity(k);
    for x in 0..1u64 << k {
        let j = aligned_blocks(x, &partition);
        let canonical = crate::combin::mask_elems(j)
            .all(|i| block_bits(x, &partition.blocks[i]) == (1u64 << l) - 1);
        if !canonical {
            continue;
        }
        elements(x, v, &mut buf);
        let mut entries: Vec<SymbolEntry> = symbols_of(shift_f1_code(&buf, params), params.d, params.p)
            .into_iter()
            .map(SymbolEntry::Fixed)
            .collect();
        let j_blocks: Vec<usize> = crate::combin::mask_elems(j).collect();
        for &i in &j_blocks {
            let b = &partition.blocks[i];
            let before = (x & ((1u64 << b.start) - 1)).count_ones() as usize;
            let pos = before / l;
            if pos >= params.p {
                continue;
            }
            let low = params.coloring.color(&v[b.start..b.start + l]);
            let high = params.coloring.color(&v[b.start + 1..b.end]);
            debug_assert_eq!(entries[pos], SymbolEntry::Fixed(low));
            entries[pos] = SymbolEntry::Pair(low, high);
        }
        let source = SpecialSymbolFixingSource::new(params.d, entries)?;
        let t = source.t();
        parts.push(ShiftPart {
            weight: 0.5f64.powi((k - j_blocks.len()) as i32),
            j_blocks,
            base: x,
            t,
            good: t >= k_prime,
            source,
        });
    }
    let good: Vec<(f64, Source)> =
        parts.iter().filter(|p| p.good).map(|p| (p.weight, Source::SpecialSymbol(p.source.clone()))).collect();
    let residual_parts: Vec<(f64, Source)> =
        parts.iter().filter(|p| !p.good).map(|p| (p.weight, Source::SpecialSymbol(p.source.clone()))).collect();
    let residual_weight = residual_parts.iter().map(|p| p.0).sum();
    let combination = ConvexCombination::new(good, residual_weight, format!("parts with t < {k_prime}"))?;
    Ok(ShiftDecomposition { partition, combination, residual_parts, parts })
}

/// Members of a part, as bitmasks over positions of the sorted support.
pub fn part_members(part: &ShiftPart, partition: &BlockPartition) -> Vec<u64> {
    let toggles: Vec<u64> = part
        .j_blocks
        .iter()
        .map(|&i| {
            let b = &partition.blocks[i];
            // drop-max → drop-min flips the first and last bit of the block
            (1u64 << b.start) | (1u64 << (b.end - 1))
        })
        .collect();
    (0..1u64 << toggles.len())
        .map(|c| {
            toggles
                .iter()
                .enumerate()
                .filter(|(i, _)| c >> i & 1 == 1)
                .fold(part.base, |x, (_, t)| x ^ t)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftDecompositionCheck {
    /// `d(mix(parts), F_1(X))`.
    pub distance: f64,
    /// Largest distance between a part's claimed source and the image of
    /// its members.
    pub max_part_distance: f64,
    /// Every `X ⊆ V` lies in exactly one part.
    pub partition_exact: bool,
    pub total_weight: f64,
    pub residual_weight: f64,
    pub parts: usize,
    pub good_parts: usize,
}

pub fn check_shift_decomposition(v: &[usize], params: &ShiftParams) -> Result<ShiftDecompositionCheck> {
    let dec = decompose_shift_source(v, params)?;
    let k = params.k;
    let space = params.output_space();
    let mut buf = Vec::with_capacity(k);
    let w = 0.5f64.powi(k as i32);
    let direct: Vec<(u64, f64)> = (0..1u64 << k)
        .map(|x| {
            elements(x, v, &mut buf);
            (shift_f1_code(&buf, params), w)
        })
        .collect();
    let direct = Distribution::from_unsorted(space, direct);
    let residual = dec.residual_distribution()?;
    let mixed = mix(&dec.combination, residual.as_ref())?;
    let distance = stat_distance(&mixed, &direct)?;

    let mut hits = vec![0u8; 1 << k];
    let mut max_part: f64 = 0.0;
    for part in &dec.parts {
        let members = part_members(part, &dec.partition);
        let pw = 1.0 / members.len() as f64;
        let actual: Vec<(u64, f64)> = members
            .iter()
            .map(|&x| {
                hits[x as usize] = hits[x as usize].saturating_add(1);
                elements(x, v, &mut buf);
                (shift_f1_code(&buf, params), pw)
            })
            .collect();
        let actual = Distribution::from_unsorted(space, actual);
        let claimed = source_distribution(&Source::SpecialSymbol(part.source.clone()))?;
        max_part = max_part.max(stat_distance(&claimed, &actual)?);
    }
    Ok(ShiftDecompositionCheck {
        distance,
        max_part_distance: max_part,
        partition_exact: hits.iter().all(|&h| h == 1),
        total_weight: dec.total_weight(),
        residual_weight: dec.combination.residual_weight,
        parts: dec.parts.len(),
        good_parts: dec.parts.iter().filter(|p| p.good).count(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftDecompositionSweep {
    #[serde(rename = "N")]
    pub n_ground: usize,
    pub k: usize,
    pub l: usize,
    pub mode: Mode,
    pub supports: u64,
    pub max_distance: f64,
    pub max_part_distance: f64,
    pub partition_exact: bool,
    /// Every decomposition's weights summed to exactly 1.
    pub weights_exact: bool,
    pub residual_max: f64,
    pub residual_mean: f64,
}

pub fn verify_shift_decompositions(params: &ShiftParams, mode: Mode, exec: &Exec) -> Result<ShiftDecompositionSweep> {
    #[derive(Default)]
    struct Acc {
        count: u64,
        dist: f64,
        part: f64,
        exact: bool,
        weights: bool,
        rmax: f64,
        rsum: f64,
    }
    let chunks: Vec<Result<Acc>> = support_chunks(params.n_ground, params.k, mode, exec, |chunk| {
        let mut a = Acc { exact: true, weights: true, ..Acc::default() };
        for v in chunk {
            let c = check_shift_decomposition(v, params)?;
            a.count += 1;
            a.dist = a.dist.max(c.distance);
            a.part = a.part.max(c.max_part_distance);
            a.exact &= c.partition_exact;
            a.weights &= c.total_weight == 1.0;
            a.rmax = a.rmax.max(c.residual_weight);
            a.rsum += c.residual_weight;
        }
        Ok(a)
    })?;
    let mut out = ShiftDecompositionSweep {
        n_ground: params.n_ground,
        k: params.k,
        l: params.l,
        mode,
        supports: 0,
        max_distance: 0.0,
        max_part_distance: 0.0,
        partition_exact: true,
        weights_exact: true,
        residual_max: 0.0,
        residual_mean: 0.0,
    };
    let mut rsum = 0.0;
    for c in chunks {
        let a = c?;
        out.supports += a.count;
        out.max_distance = out.max_distance.max(a.dist);
        out.max_part_distance = out.max_part_distance.max(a.part);
        out.partition_exact &= a.exact;
        out.weights_exact &= a.weights;
        out.residual_max = out.residual_max.max(a.rmax);
        rsum += a.rsum;
    }
    if out.supports > 0 {
        out.residual_mean = rsum / out.supports as f64;
    }
    Ok(out)
}
