use crate::{Error, Result};

use super::dist::{pushforward, stat_distance, Distribution, Space, SUM_TOL};
use super::source::{source_distribution, Source};

/// Weighted sources plus a residual weight whose distribution is left
/// unspecified.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexCombination {
    pub parts: Vec<(f64, Source)>,
    pub residual_weight: f64,
    pub residual_description: String,
}

impl ConvexCombination {
    pub fn new(
        parts: Vec<(f64, Source)>,
        residual_weight: f64,
        residual_description: impl Into<String>,
    ) -> Result<Self> {
        let c = ConvexCombination {
            parts,
            residual_weight,
            residual_description: residual_description.into(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .parts
            .iter()
            .map(|p| p.0)
            .chain([self.residual_weight])
            .any(|w| !(0.0..=1.0).contains(&w))
        {
            return Err(Error::invalid("weights must lie in [0,1]"));
        }
        let total = self.part_weight() + self.residual_weight;
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("weights sum to {total}")));
        }
        if let Some((_, first)) = self.parts.first() {
            let space = first.space();
            if self.parts.iter().any(|(_, s)| s.space() != space) {
                return Err(Error::invalid("parts live on different outcome spaces"));
            }
        }
        Ok(())
    }

    pub fn part_weight(&self) -> f64 {
        self.parts.iter().map(|p| p.0).sum()
    }
}

/// Weighted sum of distributions on a common space, summed part by part in
/// the given order.
pub fn mix_distributions(space: Space, parts: &[(f64, &Distribution)]) -> Result<Distribution> {
    let mut entries = Vec::new();
    for &(w, d) in parts {
        if d.space() != space {
            return Err(Error::invalid("mixed distributions live on different spaces"));
        }
        if w > 0.0 {
            entries.extend(d.entries().iter().map(|&(c, p)| (c, w * p)));
        }
    }
    let out = Distribution::from_unsorted(space, entries);
    let total = out.total_mass();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::invalid(format!("mixture mass {total}")));
    }
    Ok(out)
}

/// The distribution of a convex combination. A nonzero residual weight needs
/// a distribution to stand in for it.
pub fn mix(comb: &ConvexCombination, residual: Option<&Distribution>) -> Result<Distribution> {
    comb.validate()?;
    let space = match (comb.parts.first(), residual) {
        (Some((_, s)), _) => s.space(),
        (None, Some(r)) => r.space(),
        (None, None) => return Err(Error::invalid("empty combination")),
    };
    let dists = comb
        .parts
        .iter()
        .map(|(_, s)| source_distribution(s))
        .collect::<Result<Vec<_>>>()?;
    let mut parts: Vec<(f64, &Distribution)> =
        comb.parts.iter().map(|p| p.0).zip(dists.iter()).collect();
    if comb.residual_weight > 0.0 {
        match residual {
            Some(r) => parts.push((comb.residual_weight, r)),
            None => {
                return Err(Error::invalid(
                    "nonzero residual weight without a residual distribution",
                ))
            }
        }
    }
    mix_distributions(space, &parts)
}

/// Worst distance from uniform on `target` of `f(X)` over the given sources.
pub fn extractor_error<F>(f: F, sources: &[Source], target: Space) -> Result<f64>
where
    F: Fn(u64) -> Option<u64>,
{
    let uniform = Distribution::uniform(target)?;
    let mut worst: f64 = 0.0;
    for s in sources {
        let img = pushforward(&f, &source_distribution(s)?, target)?;
        worst = worst.max(stat_distance(&img, &uniform)?);
    }
    Ok(worst)
}
