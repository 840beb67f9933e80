use serde_json::{json, Value};

use crate::guard;
use crate::{Error, Result};

use super::bits::{pos_bit, Restriction};
use super::dist::{symbol_code, Distribution, Space};

/// Uniform over all subsets of a support `V ⊆ [N]`, as characteristic
/// vectors in `{0,1}^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZeroFixingSource {
    n: usize,
    support: Vec<usize>,
    mask: u64,
}

impl ZeroFixingSource {
    /// `support` holds 1-based elements of `[n]`; order does not matter.
    pub fn new(n: usize, support: &[usize]) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::invalid(format!("ground size {n} outside 1..=64")));
        }
        let mut v = support.to_vec();
        v.sort_unstable();
        v.dedup();
        if v.len() != support.len() || v.is_empty() {
            return Err(Error::invalid("support must be a nonempty set"));
        }
        if v[0] == 0 || *v.last().unwrap() > n {
            return Err(Error::invalid(format!("support element outside 1..={n}")));
        }
        let mask = v.iter().fold(0u64, |m, &i| m | pos_bit(n, i));
        Ok(ZeroFixingSource { n, support: v, mask })
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    /// Code mask of the support positions.
    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn as_bit_fixing(&self) -> BitFixingSource {
        BitFixingSource {
            template: Restriction::from_masks(self.n, 0, self.mask).expect("valid masks"),
        }
    }
}

/// Uniform over the total extensions of a template in `{0,1,*}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitFixingSource {
    pub template: Restriction,
}

impl BitFixingSource {
    pub fn new(template: Restriction) -> Self {
        BitFixingSource { template }
    }

    pub fn len(&self) -> usize {
        self.template.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self) -> usize {
        self.template.star_count() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolEntry {
    Fixed(u32),
    /// Two distinct symbols, smaller first.
    Pair(u32, u32),
}

/// Strings over `[d]` where each pair entry ranges over its two symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpecialSymbolFixingSource {
    d: usize,
    entries: Vec<SymbolEntry>,
}

impl SpecialSymbolFixingSource {
    pub fn new(d: usize, entries: Vec<SymbolEntry>) -> Result<Self> {
        if d == 0 || entries.is_empty() {
            return Err(Error::invalid("need d >= 1 and a nonempty template"));
        }
        let mut norm = Vec::with_capacity(entries.len());
        for e in entries {
            let ok = |s: u32| s >= 1 && s as usize <= d;
            norm.push(match e {
                SymbolEntry::Fixed(s) if ok(s) => e,
                SymbolEntry::Pair(a, b) if ok(a) && ok(b) && a != b => {
                    SymbolEntry::Pair(a.min(b), a.max(b))
                }
                _ => return Err(Error::invalid(format!("bad template entry {e:?} for d={d}"))),
            });
        }
        let s = SpecialSymbolFixingSource { d, entries: norm };
        s.space().validate()?;
        Ok(s)
    }

    pub fn alphabet(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[SymbolEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of pair entries.
    pub fn t(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, SymbolEntry::Pair(..)))
            .count()
    }

    pub fn space(&self) -> Space {
        Space::Symbols {
            alphabet: self.d,
            len: self.entries.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    ZeroFixing(ZeroFixingSource),
    BitFixing(BitFixingSource),
    SpecialSymbol(SpecialSymbolFixingSource),
}

impl Source {
    pub fn space(&self) -> Space {
        match self {
            Source::ZeroFixing(z) => Space::Binary { len: z.n },
            Source::BitFixing(b) => Space::Binary { len: b.len() },
            Source::SpecialSymbol(s) => s.space(),
        }
    }

    /// Number of free positions; the distribution has `2^free` outcomes.
    pub fn free_positions(&self) -> usize {
        match self {
            Source::ZeroFixing(z) => z.k(),
            Source::BitFixing(b) => b.k(),
            Source::SpecialSymbol(s) => s.t(),
        }
    }

    /// Visit every consistent string once, in ascending code order.
    pub fn for_each_outcome(&self, mut f: impl FnMut(u64)) -> Result<()> {
        guard::check(
            "source free positions",
            self.free_positions() as u128,
            guard::SOURCE_FREE_BITS,
        )?;
        match self {
            Source::ZeroFixing(z) => crate::combin::submasks(z.mask).for_each(f),
            Source::BitFixing(b) => b.template.extensions().for_each(f),
            Source::SpecialSymbol(s) => {
                let d = s.d as u64;
                let pairs: Vec<(usize, u64)> = s
                    .entries
                    .iter()
                    .enumerate()
                    .filter_map(|(i, e)| match *e {
                        SymbolEntry::Pair(a, b) => Some((i, (b - a) as u64)),
                        _ => None,
                    })
                    .collect();
                let low: Vec<u32> = s
                    .entries
                    .iter()
                    .map(|e| match *e {
                        SymbolEntry::Fixed(a) | SymbolEntry::Pair(a, _) => a,
                    })
                    .collect();
                let base = symbol_code(&low, s.d);
                let p = s.entries.len();
                let weights: Vec<u64> = pairs
                    .iter()
                    .map(|&(i, gap)| gap * d.pow((p - 1 - i) as u32))
                    .collect();
                // Reverse-binary walk keeps codes ascending: the last pair
                // entry is the least significant.
                let t = pairs.len();
                for bits in 0u64..(1u64 << t) {
                    let mut code = base;
                    for (j, w) in weights.iter().enumerate() {
                        if bits >> (t - 1 - j) & 1 == 1 {
                            code += w;
                        }
                    }
                    f(code);
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        match self {
            Source::ZeroFixing(z) => json!({"type": "zero_fixing", "N": z.n, "V": z.support}),
            Source::BitFixing(b) => json!({
                "type": "bit_fixing",
                "n": b.len(),
                "template": b.template.to_string(),
            }),
            Source::SpecialSymbol(s) => json!({
                "type": "special_symbol_fixing",
                "d": s.d,
                "p": s.entries.len(),
                "template": s.entries.iter().map(|e| match *e {
                    SymbolEntry::Fixed(a) => json!(a),
                    SymbolEntry::Pair(a, b) => json!([a, b]),
                }).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed source: {v}"));
        let num = |key: &str| v.get(key).and_then(Value::as_u64).map(|x| x as usize);
        match v.get("type").and_then(Value::as_str).ok_or_else(bad)? {
            "zero_fixing" => {
                let n = num("N").ok_or_else(bad)?;
                let support: Vec<usize> = v
                    .get("V")
                    .and_then(Value::as_array)
                    .ok_or_else(bad)?
                    .iter()
                    .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(bad))
                    .collect::<Result<_>>()?;
                Ok(Source::ZeroFixing(ZeroFixingSource::new(n, &support)?))
            }
            "bit_fixing" => {
                let t = v.get("template").and_then(Value::as_str).ok_or_else(bad)?;
                Ok(Source::BitFixing(BitFixingSource::new(t.parse()?)))
            }
            "special_symbol_fixing" => {
                let d = num("d").ok_or_else(bad)?;
                let entries = v
                    .get("template")
                    .and_then(Value::as_array)
                    .ok_or_else(bad)?
                    .iter()
                    .map(|e| match e {
                        Value::Number(n) => n.as_u64().map(|a| SymbolEntry::Fixed(a as u32)),
                        Value::Array(a) if a.len() == 2 => a[0]
                            .as_u64()
                            .zip(a[1].as_u64())
                            .map(|(x, y)| SymbolEntry::Pair(x as u32, y as u32)),
                        _ => None,
                    }
                    .ok_or_else(bad))
                    .collect::<Result<_>>()?;
                Ok(Source::SpecialSymbol(SpecialSymbolFixingSource::new(d, entries)?))
            }
            _ => Err(bad()),
        }
    }
}

impl From<ZeroFixingSource> for Source {
    fn from(s: ZeroFixingSource) -> Self {
        Source::ZeroFixing(s)
    }
}

impl From<BitFixingSource> for Source {
    fn from(s: BitFixingSource) -> Self {
        Source::BitFixing(s)
    }
}

impl From<SpecialSymbolFixingSource> for Source {
    fn from(s: SpecialSymbolFixingSource) -> Self {
        Source::SpecialSymbol(s)
    }
}

/// The exact distribution a source generates.
pub fn source_distribution(source: &Source) -> Result<Distribution> {
    let space = source.space();
    let p = 0.5f64.powi(source.free_positions() as i32);
    guard::check(
        "source free positions",
        source.free_positions() as u128,
        guard::SOURCE_FREE_BITS,
    )?;
    let mut entries = Vec::with_capacity(1 << source.free_positions().min(20));
    source.for_each_outcome(|c| entries.push((c, p)))?;
    Ok(Distribution::from_unsorted(space, entries))
}
