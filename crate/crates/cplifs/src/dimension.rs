//! Dimension of the attractor: direct pressure, spectral rewriting, Moran
//! covers, box counting, and sampling.
//!
//! The *direct* route needs no structure at all: enumerate the cylinder
//! intervals level by level, form the pressure sums
//! `S_n(s) = sum of (|I_w| / |I|)^s` over level-`n` words, and find the
//! `s` where the per-level growth `ln S_n - ln S_(n-1)` vanishes. The
//! *spectral* route first rewrites a regular system as a graph-directed
//! one and solves for its natural exponent; it converges geometrically and
//! serves as the high-precision reference the direct estimate is compared
//! against.
//!
//! Moran covers (minimal words whose ratio product drops below a scale)
//! drive the box-counting estimator, and the chaos game provides attractor
//! samples for geometric comparisons.

use crate::gdifs::{associate_gdifs, natural_exponent};
use crate::math::FloatExt;
use crate::pwl::Cplifs;
use crate::regularity::{
    default_max_order, regularity_order, RegularityStatus, DEFAULT_MEMBERSHIP_TOL,
    DEFAULT_PROBE_DEPTH,
};
use crate::rng::SplitMix64;
use crate::{Error, Result, Word};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Bracket width at which the direct dimension bisection stops.
const DIMENSION_BRACKET_TOL: f64 = 1e-10;

/// Scalar root tolerance for the similarity exponent.
const S_STAR_TOL: f64 = 1e-12;

/// Chaos-game burn-in before samples are recorded.
const CHAOS_BURN_IN: usize = 64;

/// Pressure sums along cylinder levels at a fixed exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureCurve {
    /// The exponent the sums were taken at.
    pub s: f64,
    /// `ln S_n / n` for levels `1..=depth`.
    pub per_depth: Vec<f64>,
    /// `ln S_depth - ln S_(depth-1)`, with `S_0 = 1`: the per-level growth
    /// rate, which converges to the pressure much faster than `ln S_n / n`.
    pub extrapolated: f64,
}

/// Evaluates the pressure sums at exponent `s` down to `depth`.
///
/// Level `n` intervals are the images of level `n - 1` under every map, so
/// the enumeration costs one map image per word; lengths are normalized by
/// the invariant interval length. Errors when the word count would exceed
/// `budget` or the invariant interval is degenerate.
pub fn pressure_direct(sys: &Cplifs, s: f64, depth: usize, budget: usize) -> Result<PressureCurve> {
    if depth == 0 {
        return Err(Error::Invalid("pressure needs depth at least one".into()));
    }
    let interval = sys.invariant_interval_default()?;
    if interval.is_degenerate() {
        return Err(Error::Degenerate(
            "the invariant interval is a point; the pressure sums are empty".into(),
        ));
    }
    check_word_budget(sys.len(), depth, budget)?;

    let scale = 1.0 / interval.len();
    let mut per_depth = Vec::with_capacity(depth);
    let mut prev_ln_sum = 0.0;
    let mut extrapolated = 0.0;
    let mut current = vec![interval];
    for n in 1..=depth {
        current = next_level(sys, &current);
        let sum: f64 = current.iter().map(|c| (c.len() * scale).powf(s)).sum();
        let ln_sum = sum.ln();
        per_depth.push(ln_sum / n as f64);
        extrapolated = ln_sum - prev_ln_sum;
        prev_ln_sum = ln_sum;
    }
    Ok(PressureCurve {
        s,
        per_depth,
        extrapolated,
    })
}

fn next_level(
    sys: &Cplifs,
    level: &[crate::interval::Interval],
) -> Vec<crate::interval::Interval> {
    let mut next = Vec::with_capacity(level.len() * sys.len());
    for f in sys.maps() {
        for j in level {
            next.push(f.image(j));
        }
    }
    next
}

fn check_word_budget(m: usize, depth: usize, budget: usize) -> Result<()> {
    let mut words = 1usize;
    for _ in 0..depth {
        words = words.checked_mul(m).filter(|&w| w <= budget).ok_or_else(|| {
            Error::BudgetExceeded(format!(
                "{m}^{depth} cylinder words exceed the budget {budget}"
            ))
        })?;
    }
    Ok(())
}

/// Which dimension estimators to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionMethod {
    /// Pressure-sum bisection on cylinder lengths.
    Direct,
    /// Natural exponent of the associated graph-directed system.
    Spectral,
    /// Both, for cross-validation.
    Both,
}

/// Result of the direct estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectDimension {
    /// The estimated dimension.
    pub dimension: f64,
    /// Extrapolated pressure left at the estimate (should be within the
    /// requested tolerance of zero).
    pub residual: f64,
    /// Level the cylinder lengths were enumerated to.
    pub depth: usize,
}

/// Result of the spectral estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDimension {
    /// The natural exponent of the associated system.
    pub dimension: f64,
    /// Pressure root at the exponent (one up to solver residual).
    pub radius: f64,
    /// Regularity order used for the rewriting.
    pub order: usize,
    /// Degenerate-exponent flag from the solver.
    pub degenerate: bool,
}

/// Combined dimension report.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    /// True when the attractor is a single point (one map, or a degenerate
    /// invariant interval); both estimates are then zero by convention.
    pub point_attractor: bool,
    /// Direct estimate, when requested.
    pub direct: Option<DirectDimension>,
    /// Spectral estimate, when requested.
    pub spectral: Option<SpectralDimension>,
}

/// Estimates the attractor dimension by the requested method(s).
///
/// The direct route enumerates cylinder lengths once at `depth - 1` and
/// `depth`, then bisects the extrapolated pressure in `s` (the sums are
/// strictly decreasing in `s`) to a bracket of width `1e-10`; `tol` bounds
/// the pressure residual accepted at the root. The spectral route finds
/// the regularity order with default caps, rewrites, and solves for the
/// natural exponent. Systems with a single map or a point invariant
/// interval short-circuit to dimension zero.
pub fn natural_dimension(
    sys: &Cplifs,
    method: DimensionMethod,
    depth: usize,
    tol: f64,
    budget: usize,
) -> Result<DimensionReport> {
    if depth == 0 {
        return Err(Error::Invalid("dimension needs depth at least one".into()));
    }
    let interval = sys.invariant_interval_default()?;
    if sys.len() == 1 || interval.is_degenerate() {
        let zero_direct = DirectDimension {
            dimension: 0.0,
            residual: 0.0,
            depth: 0,
        };
        let zero_spectral = SpectralDimension {
            dimension: 0.0,
            radius: 1.0,
            order: 0,
            degenerate: true,
        };
        return Ok(DimensionReport {
            point_attractor: true,
            direct: matches!(method, DimensionMethod::Direct | DimensionMethod::Both)
                .then_some(zero_direct),
            spectral: matches!(method, DimensionMethod::Spectral | DimensionMethod::Both)
                .then_some(zero_spectral),
        });
    }

    let direct = if matches!(method, DimensionMethod::Direct | DimensionMethod::Both) {
        Some(direct_dimension(sys, depth, tol, budget)?)
    } else {
        None
    };
    let spectral = if matches!(method, DimensionMethod::Spectral | DimensionMethod::Both) {
        Some(spectral_dimension(sys)?)
    } else {
        None
    };
    Ok(DimensionReport {
        point_attractor: false,
        direct,
        spectral,
    })
}

fn direct_dimension(sys: &Cplifs, depth: usize, tol: f64, budget: usize) -> Result<DirectDimension> {
    let interval = sys.invariant_interval_default()?;
    check_word_budget(sys.len(), depth, budget)?;
    let scale = 1.0 / interval.len();

    // Normalized lengths at depth - 1 and depth (level 0 is the base
    // interval itself, with normalized length one).
    let mut prev: Vec<f64> = vec![1.0];
    let mut current = vec![interval];
    for n in 1..=depth {
        current = next_level(sys, &current);
        if n < depth {
            prev = current.iter().map(|c| c.len() * scale).collect();
        }
    }
    let last: Vec<f64> = current.iter().map(|c| c.len() * scale).collect();

    let phi = |s: f64| -> f64 {
        let hi: f64 = last.iter().map(|l| l.powf(s)).sum();
        let lo: f64 = prev.iter().map(|l| l.powf(s)).sum();
        hi.ln() - lo.ln()
    };

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut doublings = 0;
    while phi(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::NonConvergence(
                "extrapolated pressure never crossed zero".into(),
            ));
        }
    }
    while hi - lo > DIMENSION_BRACKET_TOL {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dimension = 0.5 * (lo + hi);
    let residual = phi(dimension);
    if residual.abs() > tol {
        return Err(Error::NonConvergence(format!(
            "pressure residual {residual} at s = {dimension} exceeds the tolerance {tol}"
        )));
    }
    Ok(DirectDimension {
        dimension,
        residual,
        depth,
    })
}

fn spectral_dimension(sys: &Cplifs) -> Result<SpectralDimension> {
    let report = regularity_order(
        sys,
        default_max_order(sys.len()),
        DEFAULT_PROBE_DEPTH,
        DEFAULT_MEMBERSHIP_TOL,
    )?;
    let order = match report.status {
        RegularityStatus::Regular(n) => n,
        other => {
            return Err(Error::NotRegular(format!(
                "the spectral method needs a regular system; analysis ended {other:?}"
            )))
        }
    };
    let assoc = associate_gdifs(sys, order)?;
    let ne = natural_exponent(&assoc.gdifs)?;
    Ok(SpectralDimension {
        dimension: ne.alpha,
        radius: ne.radius,
        order,
        degenerate: ne.degenerate,
    })
}

/// The similarity exponent: the root of `sum of ratios^s = 1`.
///
/// Defined here only under the summability condition `sum of ratios < 1`
/// (errors with [`Error::NoRoot`] otherwise), which pins the root to
/// `[0, 1)`; a single ratio gives zero exactly. Ratios enter by modulus.
pub fn s_star(ratios: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::Invalid("need at least one ratio".into()));
    }
    for &r in ratios {
        if r == 0.0 || !(r.abs() < 1.0) {
            return Err(Error::BadRatio(format!(
                "ratio {r} must be nonzero with modulus below one"
            )));
        }
    }
    if ratios.len() == 1 {
        return Ok(0.0);
    }
    let total: f64 = ratios.iter().map(|r| r.abs()).sum();
    if total >= 1.0 {
        return Err(Error::NoRoot(format!(
            "ratio moduli sum to {total}; the exponent is only defined below one"
        )));
    }
    let value = |s: f64| -> f64 { ratios.iter().map(|r| r.abs().powf(s)).sum() };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while hi - lo > S_STAR_TOL {
        let mid = 0.5 * (lo + hi);
        if value(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimal words whose ratio product drops to the scale `r`.
///
/// Returns, in lexicographic order, every word with
/// `ratio product <= r < ratio product of its parent`; the words are
/// prefix-free and exhaust the word tree. Errors when the cover would
/// exceed `budget` words.
pub fn moran_cover(ratios: &[f64], r: f64, budget: usize) -> Result<Vec<Word>> {
    if ratios.is_empty() {
        return Err(Error::Invalid("need at least one ratio".into()));
    }
    for &rho in ratios {
        if rho == 0.0 || !(rho.abs() < 1.0) {
            return Err(Error::BadRatio(format!(
                "ratio {rho} must be nonzero with modulus below one"
            )));
        }
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Invalid(format!("scale {r} must lie in (0, 1)")));
    }
    let mut cover = Vec::new();
    let mut word = Word::new();
    moran_dfs(ratios, r, budget, &mut word, 1.0, &mut cover)?;
    Ok(cover)
}

fn moran_dfs(
    ratios: &[f64],
    r: f64,
    budget: usize,
    word: &mut Word,
    prod: f64,
    cover: &mut Vec<Word>,
) -> Result<()> {
    for (k, rho) in ratios.iter().enumerate() {
        let next = prod * rho.abs();
        word.push(k);
        if next <= r {
            if cover.len() >= budget {
                return Err(Error::BudgetExceeded(format!(
                    "scale cover exceeds {budget} words"
                )));
            }
            cover.push(word.clone());
        } else {
            moran_dfs(ratios, r, budget, word, next, cover)?;
        }
        word.pop();
    }
    Ok(())
}

/// Box-counting estimate over a set of scales.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDimensionEstimate {
    /// The scales used, as given.
    pub scales: Vec<f64>,
    /// Occupied mesh cells per scale.
    pub counts: Vec<usize>,
    /// Least-squares slope of `ln N` against `ln (1/r)`.
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Estimates the box dimension by counting mesh cells touched by a scale
/// cover.
///
/// Per scale `r`, the cylinders of the Moran cover at `r` (all of length
/// at most `r` times the invariant interval) are rasterized onto the mesh
/// `[j r, (j+1) r)` anchored at zero, and the occupied cells are counted
/// after merging. The slope of `ln N` against `ln (1/r)` estimates the box
/// dimension from above-by-construction data: the cover union contains the
/// attractor and stays within `r |I|` of it.
///
/// Cell indices snap quotients `x / r` that sit within a relative `1e-9` of
/// an integer onto that integer before flooring. Cylinder endpoints that lie
/// exactly on mesh lines in real arithmetic (every scale-matched self-similar
/// system) otherwise land an ulp to either side and the counts degrade into
/// rounding noise; off-grid endpoints are untouched by the snap.
pub fn box_dimension_estimate(
    sys: &Cplifs,
    scales: &[f64],
    budget: usize,
) -> Result<BoxDimensionEstimate> {
    if scales.len() < 2 {
        return Err(Error::Invalid(
            "the fit needs at least two scales".into(),
        ));
    }
    let interval = sys.invariant_interval_default()?;
    let ratios = sys.rho_per_map();
    let mut counts = Vec::with_capacity(scales.len());
    for &r in scales {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Invalid(format!("scale {r} must lie in (0, 1)")));
        }
        let words = moran_cover(&ratios, r, budget)?;
        let mut ranges: Vec<(i64, i64)> = Vec::with_capacity(words.len());
        for w in &words {
            let cyl = sys.cylinder(w, &interval)?;
            ranges.push((mesh_cell(cyl.lo(), r), mesh_cell(cyl.hi(), r)));
        }
        ranges.sort_unstable();
        let mut total = 0i64;
        let mut open: Option<(i64, i64)> = None;
        for (lo, hi) in ranges {
            match open {
                Some((olo, ohi)) if lo <= ohi => open = Some((olo, ohi.max(hi))),
                Some((olo, ohi)) => {
                    total += ohi - olo + 1;
                    open = Some((lo, hi));
                }
                None => open = Some((lo, hi)),
            }
        }
        if let Some((olo, ohi)) = open {
            total += ohi - olo + 1;
        }
        counts.push(total as usize);
    }

    // Least squares of ln N on ln(1/r).
    let pts: Vec<(f64, f64)> = scales
        .iter()
        .zip(&counts)
        .map(|(&r, &n)| ((1.0 / r).ln(), (n as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return Err(Error::Invalid("scales must not all coincide".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual = (pts
        .iter()
        .map(|&(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(BoxDimensionEstimate {
        scales: scales.to_vec(),
        counts,
        slope,
        residual,
    })
}

/// Index of the mesh cell `[j r, (j+1) r)` containing `x`, snapping
/// quotients within a relative `1e-9` of an integer onto that integer.
fn mesh_cell(x: f64, r: f64) -> i64 {
    let q = x / r;
    let nearest = q.round();
    if (q - nearest).abs() <= 1e-9 * q.abs().maxf(1.0) {
        nearest as i64
    } else {
        q.floor() as i64
    }
}

/// Samples attractor points by the chaos game.
///
/// Starts at the first map's fixed point (a point of the attractor),
/// discards [`CHAOS_BURN_IN`] random iterates, then records `count`
/// further iterates under uniformly random maps. Every sample lies on the
/// attractor up to float rounding; a fixed seed gives a fixed sequence.
pub fn sample_attractor(sys: &Cplifs, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut x = sys.maps()[0].fixed_point();
    for _ in 0..CHAOS_BURN_IN {
        x = sys.maps()[rng.below(sys.len())].eval(x);
    }
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        x = sys.maps()[rng.below(sys.len())].eval(x);
        points.push(x);
    }
    points
}

/// Hausdorff distance between two finite nonempty point sets.
///
/// Sorts both sets and sweeps them in tandem, so the cost is dominated by
/// the sorts.
pub fn hausdorff_distance(a: &[f64], b: &[f64]) -> f64 {
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_unstable_by(f64::total_cmp);
        s
    };
    let sa = sorted(a);
    let sb = sorted(b);
    one_sided(&sa, &sb).maxf(one_sided(&sb, &sa))
}

/// Largest distance from a point of sorted `from` to the sorted set `to`.
fn one_sided(from: &[f64], to: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    let mut j = 0usize;
    for &x in from {
        while j + 1 < to.len() && to[j + 1] <= x {
            j += 1;
        }
        let mut best = (x - to[j]).abs();
        if j + 1 < to.len() {
            best = best.minf((to[j + 1] - x).abs());
        }
        worst = worst.maxf(best);
    }
    worst
}
