//! Pattern generators: Jittered Sampling (JS), Additive Random Sampling (ARS)
//! and ANGIE, the constrained generator that keeps per-point feasibility
//! limits so every pattern it emits is correct.
//!
//! Each generator is split into a prepared form (`JsGenerator`, ...) that holds
//! the precomputed grid quantities, and a per-pattern `generate` call. Bags
//! prepare once and generate many times.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{derive_params, round_ratio, DerivedParams, SamplingConfig};
use crate::error::ConfigError;
use crate::evaluation::{BagReport, EvalError, MetricAccumulator};
use crate::pattern::{validate_pattern, Pattern, PatternVerdict};
use crate::rng::{Deviates, RandomSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Js,
    Ars,
    Angie,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] = [GeneratorKind::Js, GeneratorKind::Ars, GeneratorKind::Angie];

    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::Js => "js",
            GeneratorKind::Ars => "ars",
            GeneratorKind::Angie => "angie",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "js" => Ok(GeneratorKind::Js),
            "ars" => Ok(GeneratorKind::Ars),
            "angie" => Ok(GeneratorKind::Angie),
            other => Err(format!("unknown generator {other:?}; expected js, ars or angie")),
        }
    }
}

/// Sorts, drops repeated points and wraps the result.
fn finish_unconstrained(mut indices: Vec<u32>, k_grid: u32, t_grid: f64) -> Pattern {
    indices.sort_unstable();
    indices.dedup();
    Pattern::from_raw(indices, k_grid, t_grid)
}

/// Jittered Sampling: the `k`-th uniform point `k * n_avg` shifted by a
/// normal deviate scaled by `sqrt(sigma2) * n_avg`.
#[derive(Debug, Clone)]
pub struct JsGenerator {
    k_grid: u32,
    t_grid: f64,
    k_req: u32,
    n_avg: f64,
    scale: f64,
}

impl JsGenerator {
    pub fn new(d: &DerivedParams, sigma2: f64) -> Self {
        let n_avg = d.n_avg as f64;
        JsGenerator { k_grid: d.k_grid, t_grid: d.t_grid, k_req: d.k_req, n_avg, scale: sigma2.sqrt() * n_avg }
    }

    pub fn generate<D: Deviates>(&self, src: &mut D) -> Pattern {
        let mut out = Vec::with_capacity(self.k_req as usize);
        for k in 1..=self.k_req {
            let drawn = (k as f64 * self.n_avg + self.scale * src.std_normal()).round();
            // Draws are grid indices, so the bound is [1, k_grid].
            if drawn >= 1.0 && drawn <= self.k_grid as f64 {
                out.push(drawn as u32);
            }
        }
        finish_unconstrained(out, self.k_grid, self.t_grid)
    }
}

/// Additive Random Sampling: each point is the previous accepted point plus
/// `n_avg` plus a scaled normal deviate. Rejected draws leave the
/// predecessor unchanged.
#[derive(Debug, Clone)]
pub struct ArsGenerator {
    k_grid: u32,
    t_grid: f64,
    k_req: u32,
    n_avg: f64,
    scale: f64,
}

impl ArsGenerator {
    pub fn new(d: &DerivedParams, sigma2: f64) -> Self {
        let n_avg = d.n_avg as f64;
        ArsGenerator { k_grid: d.k_grid, t_grid: d.t_grid, k_req: d.k_req, n_avg, scale: sigma2.sqrt() * n_avg }
    }

    pub fn generate<D: Deviates>(&self, src: &mut D) -> Pattern {
        let mut out = Vec::with_capacity(self.k_req as usize);
        let mut prev = 0.0f64;
        for _ in 0..self.k_req {
            let drawn = (prev + self.n_avg + self.scale * src.std_normal()).round();
            if drawn >= 1.0 && drawn <= self.k_grid as f64 {
                out.push(drawn as u32);
                prev = drawn;
            }
        }
        finish_unconstrained(out, self.k_grid, self.t_grid)
    }
}

/// ANGIE limits before the draw of point `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngieState {
    /// First admissible index for this point.
    pub lim_lo: i64,
    /// Last admissible index for this point.
    pub lim_hi: i64,
    /// Previously emitted index, 0 before the first point.
    pub prev: i64,
    /// 1-based number of the point being drawn.
    pub k: i64,
    /// Points still to draw, this one included.
    pub n_left: i64,
}

/// ANGIE: draws each point around its expected position, then clamps it into
/// limits that always leave room for the remaining points at `k_min` spacing
/// and keep the gap to the previous point within `k_max`.
///
/// Per point the floating-point work is a single N(0, sigma2) draw times the
/// distance to the nearer limit, rounded (the first point uses a uniform draw
/// and a ceiling instead). Expected positions, distances and limits are all
/// integer arithmetic.
#[derive(Debug, Clone)]
pub struct AngieGenerator {
    k_grid: i64,
    t_grid: f64,
    k_req: i64,
    k_min: i64,
    k_max: Option<i64>,
    sigma: f64,
}

impl AngieGenerator {
    pub fn new(d: &DerivedParams, sigma2: f64) -> Result<Self, ConfigError> {
        d.check_feasible()?;
        Ok(AngieGenerator {
            k_grid: d.k_grid as i64,
            t_grid: d.t_grid,
            k_req: d.k_req as i64,
            k_min: d.k_min as i64,
            k_max: d.k_max.map(i64::from),
            sigma: sigma2.sqrt(),
        })
    }

    pub fn generate<D: Deviates>(&self, src: &mut D) -> Pattern {
        self.generate_traced(src, |_| {})
    }

    /// Like [`generate`](Self::generate), reporting the limits before every draw.
    pub fn generate_traced<D: Deviates, F: FnMut(&AngieState)>(&self, src: &mut D, mut on_step: F) -> Pattern {
        let mut out = Vec::with_capacity(self.k_req as usize);
        let mut lim_lo = 1i64;
        let mut lim_hi = self.k_grid - self.k_min * (self.k_req - 1);
        let mut prev = 0i64;
        for k in 1..=self.k_req {
            let n_left = self.k_req - k + 1;
            on_step(&AngieState { lim_lo, lim_hi, prev, k, n_left });

            let step = round_ratio((self.k_grid - prev) as u64, (n_left + 1) as u64) as i64;
            let expected = prev + step;
            let spread = (expected - lim_lo).abs().min((lim_hi - expected).abs());

            let mut n = if k == 1 {
                (src.uniform() * step as f64).ceil() as i64
            } else {
                let x = self.sigma * src.std_normal();
                expected.saturating_add((x * spread as f64).round() as i64)
            };
            if n > lim_hi {
                n = lim_hi;
            } else if n < lim_lo {
                n = lim_lo;
            }
            out.push(n as u32);

            lim_lo = n + self.k_min;
            lim_hi = self.k_grid - self.k_min * (n_left - 2);
            if let Some(k_max) = self.k_max {
                lim_hi = lim_hi.min(n + k_max);
            }
            prev = n;
        }
        Pattern::from_raw(out, self.k_grid as u32, self.t_grid)
    }
}

pub fn generate_js<D: Deviates>(d: &DerivedParams, sigma2: f64, rng: &mut D) -> Pattern {
    JsGenerator::new(d, sigma2).generate(rng)
}

pub fn generate_ars<D: Deviates>(d: &DerivedParams, sigma2: f64, rng: &mut D) -> Pattern {
    ArsGenerator::new(d, sigma2).generate(rng)
}

/// Fails only if `d` admits no correct pattern; never mid-pattern.
pub fn generate_angie<D: Deviates>(d: &DerivedParams, sigma2: f64, rng: &mut D) -> Result<Pattern, ConfigError> {
    Ok(AngieGenerator::new(d, sigma2)?.generate(rng))
}

/// Any of the three generators with its precomputation done.
#[derive(Debug, Clone)]
pub enum Generator {
    Js(JsGenerator),
    Ars(ArsGenerator),
    Angie(AngieGenerator),
}

impl Generator {
    pub fn prepare(kind: GeneratorKind, d: &DerivedParams, sigma2: f64) -> Result<Self, ConfigError> {
        Ok(match kind {
            GeneratorKind::Js => Generator::Js(JsGenerator::new(d, sigma2)),
            GeneratorKind::Ars => Generator::Ars(ArsGenerator::new(d, sigma2)),
            GeneratorKind::Angie => Generator::Angie(AngieGenerator::new(d, sigma2)?),
        })
    }

    pub fn generate<D: Deviates>(&self, src: &mut D) -> Pattern {
        match self {
            Generator::Js(g) => g.generate(src),
            Generator::Ars(g) => g.generate(src),
            Generator::Angie(g) => g.generate(src),
        }
    }

    /// Pattern number `ordinal` of the bag keyed by `seed`.
    pub fn generate_nth(&self, seed: u64, ordinal: u64) -> Pattern {
        self.generate(&mut RandomSource::new(seed, ordinal))
    }
}

/// Grid quantities for `kind`: ANGIE needs a feasible configuration, JS and
/// ARS run on anything that quantizes.
pub fn params_for(kind: GeneratorKind, cfg: &SamplingConfig) -> Result<DerivedParams, ConfigError> {
    match kind {
        GeneratorKind::Angie => derive_params(cfg),
        GeneratorKind::Js | GeneratorKind::Ars => DerivedParams::realize(cfg),
    }
}

/// A generated multiset of patterns with their verdicts.
#[derive(Debug, Clone)]
pub struct PatternBag {
    pub kind: GeneratorKind,
    pub params: DerivedParams,
    pub sigma2: f64,
    pub seed: u64,
    pub patterns: Vec<Pattern>,
    pub verdicts: Vec<PatternVerdict>,
}

impl PatternBag {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Pattern, &PatternVerdict)> {
        self.patterns.iter().zip(&self.verdicts)
    }

    pub fn accumulate(&self) -> Result<MetricAccumulator, EvalError> {
        let mut acc = MetricAccumulator::new(&self.params);
        for (p, v) in self.iter() {
            acc.accumulate(p, v)?;
        }
        Ok(acc)
    }

    pub fn evaluate(&self) -> Result<BagReport, EvalError> {
        self.accumulate()?.finalize()
    }
}

/// Generates `n` patterns, pattern `i` from stream `(seed, i)`.
///
/// The grid quantities are derived once for the whole bag. Patterns are
/// produced in parallel; the result does not depend on the schedule.
pub fn generate_bag(kind: GeneratorKind, cfg: &SamplingConfig, n: usize, seed: u64) -> Result<PatternBag, ConfigError> {
    let params = params_for(kind, cfg)?;
    let generator = Generator::prepare(kind, &params, cfg.sigma2)?;
    let patterns: Vec<Pattern> = (0..n as u64).into_par_iter().map(|i| generator.generate_nth(seed, i)).collect();
    let verdicts = patterns.iter().map(|p| validate_pattern(p, &params)).collect();
    Ok(PatternBag { kind, params, sigma2: cfg.sigma2, seed, patterns, verdicts })
}
