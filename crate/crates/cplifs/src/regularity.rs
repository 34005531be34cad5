//! Regularity analysis: do deep cylinder intervals avoid the breakpoints?
//!
//! A system is regular of order `N` when no cylinder interval of level `N`
//! contains a breakpoint of any map; the smallest such `N` is the
//! regularity order. Regularity is what makes derivative products along
//! words comparable (bounded distortion) and lets the system be rewritten
//! as a graph-directed system of genuine similarities.
//!
//! The check refines only offending cylinders level by level. When every
//! level up to the order cap still has an offender the analysis falls back
//! to two weaker verdicts: a coincidence certificate (a breakpoint that is
//! exactly a fixed point of one of the maps sits inside cylinders of every
//! level, so no order exists), or a numeric probe that reports — without
//! proving — irregularity when a breakpoint hugs the deep cylinder union.
//! Everything else is `Undetermined`.
//!
//! The module also hosts the two consequences of regularity used
//! downstream: bounded-distortion constants and point-membership tests
//! against the level-`d` cylinder union.

use crate::interval::Interval;
use crate::pwl::Cplifs;
use crate::{Error, Result, Word};
use alloc::format;
use alloc::vec::Vec;

/// Default cap on the cylinder count an order search may enumerate.
pub const DEFAULT_ORDER_WORD_CAP: usize = 4096;

/// Default level for the near-attractor probe.
pub const DEFAULT_PROBE_DEPTH: usize = 40;

/// Default distance below which the probe reports a breakpoint as hugging
/// the deep cylinder union.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

/// Largest order whose full cylinder level stays within
/// [`DEFAULT_ORDER_WORD_CAP`] words for a system of `map_count` maps.
/// Single-map systems have one cylinder per level; they get the cap of a
/// two-map system.
pub fn default_max_order(map_count: usize) -> usize {
    let base = map_count.max(2);
    let mut order = 0;
    let mut words = 1usize;
    while words.saturating_mul(base) <= DEFAULT_ORDER_WORD_CAP {
        words *= base;
        order += 1;
    }
    order
}

/// Verdict of a regularity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityStatus {
    /// No level-`N` cylinder contains a breakpoint, and `N` is minimal.
    Regular(usize),
    /// No order exists (`certified`), or a breakpoint tracks the deep
    /// cylinder union too closely to believe one does (`!certified`).
    Irregular {
        /// True for the coincidence certificate, false for the numeric
        /// probe verdict.
        certified: bool,
    },
    /// Offenders persisted to the order cap, yet no breakpoint came close
    /// to the deep union: the order likely exists beyond the cap.
    Undetermined,
}

/// Per-breakpoint findings gathered during the analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointVerdict {
    /// Map owning the breakpoint.
    pub map: usize,
    /// Breakpoint index within that map.
    pub index: usize,
    /// The breakpoint itself.
    pub value: f64,
    /// Whether it lies in the invariant interval; breakpoints outside it
    /// can never meet a cylinder and are ignored.
    pub in_interval: bool,
    /// Index of a map whose fixed point equals the breakpoint exactly in
    /// float arithmetic, when one exists.
    pub fixed_point_of: Option<usize>,
    /// Probe outcome: was the breakpoint within tolerance of the
    /// level-`probe_depth` cylinder union? `None` when the probe did not
    /// run (the order was found first, or the point was ignored).
    pub near_deep_union: Option<bool>,
}

/// An offending cylinder from the last refinement level; for the
/// coincidence certificate the word is empty and the cylinder degenerates
/// to the coinciding point.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityWitness {
    /// Word of the cylinder still containing a breakpoint.
    pub word: Word,
    /// The cylinder interval.
    pub cylinder: Interval,
    /// Map owning the contained breakpoint.
    pub map: usize,
    /// Breakpoint index within that map.
    pub breakpoint: usize,
}

/// Full report of a regularity analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// The verdict.
    pub status: RegularityStatus,
    /// Largest level the refinement enumerated.
    pub max_order_tried: usize,
    /// Level used by the numeric probe.
    pub probe_depth: usize,
    /// Distance threshold used by the numeric probe.
    pub membership_tol: f64,
    /// The smallest invariant interval, base of every cylinder.
    pub interval: Interval,
    /// An offender from the deepest refinement level when no order was
    /// found; `None` when the system is regular within the cap.
    pub witness: Option<RegularityWitness>,
    /// Findings per breakpoint, in map-then-index order.
    pub breakpoints: Vec<BreakpointVerdict>,
}

/// Decides regularity up to `max_order`.
///
/// Refines only offending cylinders: level `n + 1` candidates are the
/// children of level-`n` cylinders that still contain a breakpoint, so
/// regular systems are settled after `m^N` interval evaluations. When the
/// cap is exhausted, a breakpoint equal (bit for bit) to some map's fixed
/// point certifies that no order exists; otherwise each breakpoint in the
/// invariant interval is probed against the level-`probe_depth` cylinder
/// union and a hit within `membership_tol` is reported as (uncertified)
/// irregularity. Anything else is [`RegularityStatus::Undetermined`].
pub fn regularity_order(
    sys: &Cplifs,
    max_order: usize,
    probe_depth: usize,
    membership_tol: f64,
) -> Result<RegularityReport> {
    if max_order == 0 {
        return Err(Error::Invalid("order cap must be at least one".into()));
    }
    if !(membership_tol >= 0.0) {
        return Err(Error::Invalid(
            "membership tolerance must be nonnegative".into(),
        ));
    }
    let interval = sys.invariant_interval_default()?;

    // Per-breakpoint bookkeeping; `active` are those able to meet a
    // cylinder at all.
    let fixed_points: Vec<f64> = sys.maps().iter().map(|f| f.fixed_point()).collect();
    let mut verdicts = Vec::new();
    let mut active: Vec<(usize, usize, f64)> = Vec::new();
    for (k, f) in sys.maps().iter().enumerate() {
        for (idx, &b) in f.breakpoints().iter().enumerate() {
            let in_interval = interval.contains(b);
            let fixed_point_of = in_interval
                .then(|| fixed_points.iter().position(|&p| p == b))
                .flatten();
            verdicts.push(BreakpointVerdict {
                map: k,
                index: idx,
                value: b,
                in_interval,
                fixed_point_of,
                near_deep_union: None,
            });
            if in_interval {
                active.push((k, idx, b));
            }
        }
    }

    let mut report = RegularityReport {
        status: RegularityStatus::Undetermined,
        max_order_tried: 0,
        probe_depth,
        membership_tol,
        interval,
        witness: None,
        breakpoints: verdicts,
    };

    // A breakpoint equal to a map's fixed point lies in that map's
    // self-cylinder at every level: no order exists. Certify and stop.
    if let Some(v) = report.breakpoints.iter().find(|v| v.fixed_point_of.is_some()) {
        report.status = RegularityStatus::Irregular { certified: true };
        report.witness = Some(RegularityWitness {
            word: Word::new(),
            cylinder: Interval::point(v.value),
            map: v.map,
            breakpoint: v.index,
        });
        return Ok(report);
    }

    if active.is_empty() {
        // Nothing can obstruct: already regular at the first level.
        report.status = RegularityStatus::Regular(1);
        report.max_order_tried = 1;
        return Ok(report);
    }

    // Level-by-level refinement of offenders only.
    let m = sys.len();
    let mut offenders: Vec<Word> = (0..m).map(|j| Word::from([j])).collect();
    for level in 1..=max_order {
        report.max_order_tried = level;
        let mut next: Vec<Word> = Vec::new();
        let mut witness: Option<RegularityWitness> = None;
        for word in offenders.drain(..) {
            let cyl = sys.cylinder(&word, &interval)?;
            if let Some(&(k, idx, _)) = active.iter().find(|&&(_, _, b)| cyl.contains(b)) {
                if witness.is_none() {
                    witness = Some(RegularityWitness {
                        word: word.clone(),
                        cylinder: cyl,
                        map: k,
                        breakpoint: idx,
                    });
                }
                for j in 0..m {
                    let mut child = word.clone();
                    child.push(j);
                    next.push(child);
                }
            }
        }
        match witness {
            None => {
                report.status = RegularityStatus::Regular(level);
                return Ok(report);
            }
            Some(w) => {
                report.witness = Some(w);
                offenders = next;
            }
        }
    }

    // Cap exhausted. Probe each active breakpoint against the deep union.
    let mut any_near = false;
    for &(k, idx, b) in &active {
        let near = locate_near(sys, b, probe_depth, membership_tol, crate::DEFAULT_BUDGET)?;
        any_near |= near;
        if let Some(v) = report
            .breakpoints
            .iter_mut()
            .find(|v| v.map == k && v.index == idx)
        {
            v.near_deep_union = Some(near);
        }
    }
    report.status = if any_near {
        RegularityStatus::Irregular { certified: false }
    } else {
        RegularityStatus::Undetermined
    };
    Ok(report)
}

/// Bounded-distortion constants of a system regular of order `order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdpConstants {
    /// Lower bound on derivative-magnitude ratios along equal words.
    pub c1: f64,
    /// Upper bound on the same ratios; the reciprocal of `c1`'s value with
    /// the extremes swapped.
    pub c2: f64,
    /// Smallest slope magnitude over all pieces.
    pub rho_min: f64,
    /// Largest slope magnitude over all pieces.
    pub rho_max: f64,
    /// The regularity order the constants are valid for.
    pub order: usize,
}

/// Distortion constants for a system regular of order `order`.
///
/// For any word of length at least `order` and any two points of the
/// invariant interval where the word's derivative exists, the two
/// derivative products agree factor by factor except in the last `order`
/// steps, so their magnitude ratio lies in `[c1, c2]` with
/// `c1 = rho_min^order / rho_max` and `c2 = rho_max / rho_min^order`.
pub fn bdp_constants(sys: &Cplifs, order: usize) -> Result<BdpConstants> {
    if order == 0 {
        return Err(Error::Invalid(
            "distortion constants need an order of at least one".into(),
        ));
    }
    let rho_max = sys.rho_max();
    let rho_min = sys.rho_min();
    let mut rho_min_pow = 1.0;
    for _ in 0..order {
        rho_min_pow *= rho_min;
    }
    Ok(BdpConstants {
        c1: rho_min_pow / rho_max,
        c2: rho_max / rho_min_pow,
        rho_min,
        rho_max,
        order,
    })
}

/// Where a point sits relative to the level-`depth` cylinder union.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointLocation {
    /// The point lies in some level-`depth` cylinder, hence within
    /// `resolution` of the attractor.
    In {
        /// `rho_max^depth` times the invariant interval length.
        resolution: f64,
    },
    /// The point lies in no level-`depth` cylinder: certainly outside the
    /// attractor.
    Out,
}

/// Tests membership in the level-`depth` cylinder union by preimages.
///
/// `x` lies in some level-`d` cylinder exactly when some piece of some map
/// pulls it back into the invariant interval and the preimage lies in a
/// level-`d - 1` cylinder, so the test recurses on preimages and never
/// enumerates cylinders. `Out` is exact; `In` locates `x` within
/// `rho_max^depth * |I|` of the attractor.
pub fn point_in_attractor(sys: &Cplifs, x: f64, depth: usize) -> Result<PointLocation> {
    let interval = sys.invariant_interval_default()?;
    let mut budget = crate::DEFAULT_BUDGET;
    if preimage_dfs(sys, &interval, x, depth, &mut budget)? {
        let mut resolution = interval.len();
        for _ in 0..depth {
            resolution *= sys.rho_max();
        }
        Ok(PointLocation::In { resolution })
    } else {
        Ok(PointLocation::Out)
    }
}

fn preimage_dfs(
    sys: &Cplifs,
    interval: &Interval,
    x: f64,
    depth: usize,
    budget: &mut usize,
) -> Result<bool> {
    if *budget == 0 {
        return Err(Error::BudgetExceeded(format!(
            "preimage search exceeded {} visits",
            crate::DEFAULT_BUDGET
        )));
    }
    *budget -= 1;
    if !interval.contains(x) {
        return Ok(false);
    }
    if depth == 0 {
        return Ok(true);
    }
    for f in sys.maps() {
        for (j, p) in f.pieces().iter().enumerate() {
            let pre = (x - p.t) / p.r;
            if f.piece_lo(j) <= pre
                && pre <= f.piece_hi(j)
                && preimage_dfs(sys, interval, pre, depth - 1, budget)?
            {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Whether `x` lies within `tol` of the level-`depth` cylinder union.
///
/// Walks the cylinder tree depth first, pruning any cylinder farther than
/// `tol` from `x` (children are nested, so distances only grow). Exact in
/// both directions at the stated level: a `false` proves every level-`depth`
/// cylinder stays farther than `tol` away. Fails with budget exhaustion
/// when more than `budget` cylinders must be inspected.
pub fn locate_near(
    sys: &Cplifs,
    x: f64,
    depth: usize,
    tol: f64,
    budget: usize,
) -> Result<bool> {
    locate_near_witness(sys, x, depth, tol, budget).map(|w| w.is_some())
}

/// Like [`locate_near`], but returns the first level-`depth` word (in the
/// deterministic letter order) whose cylinder comes within `tol` of `x`,
/// or `None` when every one stays away.
pub fn locate_near_witness(
    sys: &Cplifs,
    x: f64,
    depth: usize,
    tol: f64,
    budget: usize,
) -> Result<Option<Word>> {
    let interval = sys.invariant_interval_default()?;
    if depth == 0 {
        return Ok((interval.dist(x) <= tol).then(Word::new));
    }
    let mut visited = 0usize;
    let mut word = Word::new();
    for j in 0..sys.len() {
        word.push(j);
        let hit = near_dfs(sys, &interval, &mut word, x, depth, tol, &mut visited, budget)?;
        if hit {
            return Ok(Some(word));
        }
        word.pop();
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn near_dfs(
    sys: &Cplifs,
    interval: &Interval,
    word: &mut Word,
    x: f64,
    depth: usize,
    tol: f64,
    visited: &mut usize,
    budget: usize,
) -> Result<bool> {
    *visited += 1;
    if *visited > budget {
        return Err(Error::BudgetExceeded(format!(
            "near-point search exceeded {budget} cylinder visits"
        )));
    }
    let cyl = sys.cylinder(word, interval)?;
    if cyl.dist(x) > tol {
        return Ok(false);
    }
    if word.len() == depth {
        return Ok(true);
    }
    for j in 0..sys.len() {
        word.push(j);
        let hit = near_dfs(sys, interval, word, x, depth, tol, visited, budget)?;
        if hit {
            // Leave the witnessing word assembled for the caller.
            return Ok(true);
        }
        word.pop();
    }
    Ok(false)
}
