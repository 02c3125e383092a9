//! Expected number of distinct OPR sets under the random advertisement
//! model, and a Monte-Carlo simulation of the same model.
//!
//! Each of `P` prefixes is advertised by `b` of `B` gateways chosen
//! uniformly, each route getting a rank uniform in `1..=ps`. The OPR set is
//! the group of best-ranked gateways, completed with the second-ranked group
//! when the best is alone. In the optimized variant a single gateway of the
//! second group is kept.

mod montecarlo;

use std::fmt::Write as _;

pub use montecarlo::{monte_carlo_distinct, MonteCarlo};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Plain,
    Optimized,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Plain, Variant::Optimized];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Optimized => "optimized",
        }
    }
}

/// `C(n, k)` in floating point, 0 when `k > n`.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that a prefix's OPR set holds exactly `n` gateways.
pub fn p_n(b: u32, ps: u32, n: u32, variant: Variant) -> Result<f64> {
    if ps == 0 {
        return Err(Error::Parameter("spreading must be >= 1".into()));
    }
    if n < 2 || n > b {
        return Err(Error::Parameter(format!("set size {n} outside 2..={b}")));
    }
    let (b64, n64) = (b as u64, n as u64);
    let psf = ps as f64;
    let c_bn = binomial(b64, n64);
    let mut sum = 0.0;
    for i in 1..=ps {
        let q = 1.0 - i as f64 / psf;
        let term = match variant {
            Variant::Plain => {
                let second = (i - 1) as f64 * b as f64 * binomial(b64 - 1, n64 - 1);
                psf.powi(-(n as i32)) * q.powi((b - n) as i32) * (second + c_bn)
            }
            Variant::Optimized if n == 2 => {
                b as f64 / psf * q.powi((b - 1) as i32) + c_bn * psf.powi(-2) * q.powi((b - 2) as i32)
            }
            Variant::Optimized => c_bn * psf.powi(-(n as i32)) * q.powi((b - n) as i32),
        };
        sum += term;
    }
    Ok(sum)
}

/// `p_n` for every `n` in `2..=b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeDistribution {
    pub variant: Variant,
    /// `probs[i]` is the probability of size `i + 2`.
    pub probs: Vec<f64>,
}

impl SizeDistribution {
    pub fn new(b: u32, ps: u32, variant: Variant) -> Result<Self> {
        let probs = (2..=b).map(|n| p_n(b, ps, n, variant)).collect::<Result<_>>()?;
        Ok(SizeDistribution { variant, probs })
    }

    pub fn get(&self, n: u32) -> f64 {
        (n as usize)
            .checked_sub(2)
            .and_then(|i| self.probs.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Probability that a given set among `C(B, n)` equally likely ones is drawn
/// at least once in `draws` draws: `1 - (1 - 1/C)^draws`, evaluated in the
/// log domain.
pub fn prob_set_occupied(gateways: u32, n: u32, draws: f64) -> f64 {
    occupancy(binomial(gateways as u64, n as u64), draws)
}

fn occupancy(sets: f64, draws: f64) -> f64 {
    if draws <= 0.0 || sets <= 0.0 {
        return 0.0;
    }
    if sets <= 1.0 {
        return 1.0;
    }
    -(draws * (-1.0 / sets).ln_1p()).exp_m1()
}

/// Expected distinct-set counts, total and per set size.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expected {
    /// `(n, expected number of distinct sets of size n)`, ascending `n`.
    pub per_size: Vec<(u32, f64)>,
}

impl Expected {
    pub fn total(&self) -> f64 {
        self.per_size.iter().map(|(_, v)| v).sum()
    }

    pub fn size(&self, n: u32) -> f64 {
        self.per_size.iter().find(|(m, _)| *m == n).map_or(0.0, |(_, v)| *v)
    }

    fn add(&mut self, other: &Expected) {
        for &(n, v) in &other.per_size {
            match self.per_size.iter_mut().find(|(m, _)| *m == n) {
                Some((_, total)) => *total += v,
                None => self.per_size.push((n, v)),
            }
        }
        self.per_size.sort_by_key(|(n, _)| *n);
    }

    /// Smallest size whose cumulative count reaches half of the total.
    pub fn median_size(&self) -> Option<u32> {
        let half = self.total() / 2.0;
        let mut acc = 0.0;
        for &(n, v) in &self.per_size {
            acc += v;
            if acc >= half && acc > 0.0 {
                return Some(n);
            }
        }
        None
    }
}

/// Expected number of distinct OPR sets: sum over `n` of
/// `C(B, n) * (1 - (1 - 1/C(B, n))^(p_n P))`.
pub fn expected_distinct(gateways: u32, prefixes: f64, ps: u32, b: u32, variant: Variant) -> Result<Expected> {
    if b > gateways {
        return Err(Error::Parameter(format!("b = {b} exceeds B = {gateways}")));
    }
    let dist = SizeDistribution::new(b, ps, variant)?;
    let per_size = (2..=b)
        .map(|n| {
            let sets = binomial(gateways as u64, n as u64);
            (n, sets * occupancy(sets, dist.get(n) * prefixes))
        })
        .collect();
    Ok(Expected { per_size })
}

/// Median set size weighted by expected distinct counts.
pub fn median_set_size(gateways: u32, prefixes: f64, ps: u32, b: u32, variant: Variant) -> Result<Option<u32>> {
    Ok(expected_distinct(gateways, prefixes, ps, b, variant)?.median_size())
}

/// Gateways and prefixes per local-pref class. Sets never span classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassBreakdown {
    /// `(B_i, P_i)` per class.
    pub classes: Vec<(u32, f64)>,
    pub ps: u32,
    pub b: u32,
}

impl ClassBreakdown {
    /// Classes with `ps = b = 5`.
    pub fn new(classes: Vec<(u32, f64)>) -> Self {
        ClassBreakdown { classes, ps: 5, b: 5 }
    }

    /// Three classes with gateways in proportion `1 : δ : δ²` (rounded by
    /// largest remainder to sum to `total_gateways`) and prefixes in
    /// proportion `1 : 1/δ : 1/δ²`.
    pub fn geometric(total_gateways: u32, delta: f64, prefixes: f64) -> Result<Self> {
        if delta.is_nan() || delta < 1.0 {
            return Err(Error::Parameter(format!("ratio must be >= 1, got {delta}")));
        }
        let g = split_largest_remainder(total_gateways, &[1.0, delta, delta * delta]);
        let w = [1.0, 1.0 / delta, 1.0 / (delta * delta)];
        let sum: f64 = w.iter().sum();
        let classes = g.into_iter().zip(w).map(|(b, wi)| (b, prefixes * wi / sum)).collect();
        Ok(Self::new(classes))
    }

    pub fn total_prefixes(&self) -> f64 {
        self.classes.iter().map(|(_, p)| p).sum()
    }
}

/// Integer split of `total` proportional to `weights`, largest remainders
/// first (ties to the lower index).
pub fn split_largest_remainder(total: u32, weights: &[f64]) -> Vec<u32> {
    let sum: f64 = weights.iter().sum();
    let raw: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<u32> = raw.iter().map(|r| r.floor() as u32).collect();
    let left = total - parts.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().take(left as usize) {
        parts[i] += 1;
    }
    parts
}

/// Sum of per-class expectations. Each class uses `b' = min(b, B_i)`;
/// classes without prefixes or with fewer than two gateways add nothing.
pub fn class_expected(breakdown: &ClassBreakdown, variant: Variant) -> Result<Expected> {
    let mut total = Expected::default();
    for &(gateways, prefixes) in &breakdown.classes {
        if prefixes <= 0.0 || gateways < 2 {
            continue;
        }
        let b = breakdown.b.min(gateways);
        total.add(&expected_distinct(gateways, prefixes, breakdown.ps, b, variant)?);
    }
    Ok(total)
}

/// Expected distinct count when every prefix picks a uniformly random pair
/// of gateways of its class.
pub fn lower_bound(breakdown: &ClassBreakdown) -> Result<f64> {
    let mut total = 0.0;
    for &(gateways, prefixes) in &breakdown.classes {
        if prefixes <= 0.0 {
            continue;
        }
        if gateways < 2 {
            return Err(Error::Parameter(format!(
                "a class with {prefixes} prefixes needs at least 2 gateways, has {gateways}"
            )));
        }
        let pairs = binomial(gateways as u64, 2);
        total += pairs * occupancy(pairs, prefixes);
    }
    Ok(total)
}

/// A named AS profile with its published figures.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub breakdown: ClassBreakdown,
    pub published_distinct: f64,
    pub published_median: u32,
    pub published_lower_bound: f64,
}

pub fn presets() -> Vec<Preset> {
    let row = |name, g: [u32; 3], p: [f64; 3], distinct, median, lower| Preset {
        name,
        breakdown: ClassBreakdown::new(g.into_iter().zip(p.map(|x| x * 1000.0)).collect()),
        published_distinct: distinct,
        published_median: median,
        published_lower_bound: lower,
    };
    vec![
        row("stub", [10, 20, 0], [700.0, 100.0, 0.0], 3475.0, 4, 235.0),
        row("tier4", [10, 25, 25], [500.0, 200.0, 100.0], 10589.0, 3, 645.0),
        row("tier3", [10, 50, 100], [500.0, 200.0, 100.0], 33610.0, 3, 6219.0),
        row("large-tier3", [10, 100, 500], [500.0, 200.0, 100.0], 101997.0, 2, 73781.0),
        row("tier2", [5, 500, 2000], [500.0, 200.0, 100.0], 215429.0, 2, 197194.0),
        row("tier1", [0, 50, 5000], [0.0, 600.0, 200.0], 228898.0, 2, 199633.0),
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

/// Computed figures for one preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetRow {
    pub preset: Preset,
    pub distinct: f64,
    pub median: Option<u32>,
    pub lower_bound: f64,
}

impl PresetRow {
    pub fn distinct_error(&self) -> f64 {
        relative_error(self.distinct, self.preset.published_distinct)
    }

    pub fn lower_bound_error(&self) -> f64 {
        relative_error(self.lower_bound, self.preset.published_lower_bound)
    }
}

pub fn relative_error(value: f64, reference: f64) -> f64 {
    ((value - reference) / reference).abs()
}

/// Every preset evaluated with the optimized variant.
pub fn table2() -> Result<Vec<PresetRow>> {
    presets()
        .into_iter()
        .map(|preset| {
            let expected = class_expected(&preset.breakdown, Variant::Optimized)?;
            Ok(PresetRow {
                distinct: expected.total(),
                median: expected.median_size(),
                lower_bound: lower_bound(&preset.breakdown)?,
                preset,
            })
        })
        .collect()
}

/// One point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub plain: f64,
    pub optimized: f64,
    pub lower_bound: f64,
}

fn sweep_point(x: f64, breakdown: &ClassBreakdown) -> Result<SweepRow> {
    Ok(SweepRow {
        x,
        plain: class_expected(breakdown, Variant::Plain)?.total(),
        optimized: class_expected(breakdown, Variant::Optimized)?.total(),
        lower_bound: lower_bound(breakdown)?,
    })
}

/// Distinct-set counts as the class ratio varies, for a fixed gateway total.
pub fn sweep_delta(total_gateways: u32, deltas: &[f64], prefixes: f64) -> Result<Vec<SweepRow>> {
    deltas
        .iter()
        .map(|&d| sweep_point(d, &ClassBreakdown::geometric(total_gateways, d, prefixes)?))
        .collect()
}

/// Distinct-set counts as the gateway total varies, for a fixed ratio.
pub fn sweep_gateways(delta: f64, totals: &[u32], prefixes: f64) -> Result<Vec<SweepRow>> {
    totals
        .iter()
        .map(|&g| sweep_point(g as f64, &ClassBreakdown::geometric(g, delta, prefixes)?))
        .collect()
}

/// CSV with a header row; `x_name` labels the first column.
pub fn sweep_csv(x_name: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{x_name},plain,optimized,lower_bound\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.3},{:.3},{:.3}", r.x, r.plain, r.optimized, r.lower_bound);
    }
    out
}
