//! Continuous piecewise-linear contractions and systems of them.
//!
//! A map is given by strictly increasing breakpoints `b_1 < ... < b_l`,
//! slopes `r_1, ..., r_{l+1}` (one per linearity piece, each nonzero with
//! `|r| < 1`, adjacent slopes distinct), and the value `tau = f(0)`. The
//! affine form of every piece follows from continuity: the piece containing
//! zero has translation `tau`, and crossing breakpoint `b_i` changes the
//! translation by `b_i (r_i - r_{i+1})`. Parameters and piece forms are
//! therefore interconvertible without loss.

use crate::interval::Interval;
use crate::math::FloatExt;
use crate::{Error, Result, Word};
use alloc::format;
use alloc::vec::Vec;

/// Iteration defaults for [`Cplifs::invariant_interval`].
pub const HULL_TOL: f64 = 1e-12;
/// Iteration cap for [`Cplifs::invariant_interval`].
pub const HULL_CAP: usize = 10_000;

/// One linearity piece in affine form `x -> r x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePiece {
    /// Slope of the piece.
    pub r: f64,
    /// Translation of the piece.
    pub t: f64,
}

impl AffinePiece {
    /// Applies the piece as a map on all of the line.
    pub fn eval(&self, x: f64) -> f64 {
        self.r * x + self.t
    }

    /// Fixed point of the extended affine map.
    pub fn fixed_point(&self) -> f64 {
        self.t / (1.0 - self.r)
    }
}

/// A continuous piecewise-linear contraction on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearMap {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    tau: f64,
    pieces: Vec<AffinePiece>,
}

impl PiecewiseLinearMap {
    /// Builds a map from breakpoints, per-piece slopes, and `tau = f(0)`.
    ///
    /// Requires `slopes.len() == breakpoints.len() + 1`, strictly increasing
    /// breakpoints, every slope nonzero with modulus < 1, and adjacent
    /// slopes distinct (equal neighbours would merge into one piece).
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>, tau: f64) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} breakpoints require {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len()
            )));
        }
        if !tau.is_finite() {
            return Err(Error::Invalid("tau must be finite".into()));
        }
        for w in breakpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Invalid(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        if let (Some(first), Some(last)) = (breakpoints.first(), breakpoints.last()) {
            if !first.is_finite() || !last.is_finite() {
                return Err(Error::Invalid("breakpoints must be finite".into()));
            }
        }
        for &s in &slopes {
            if !(s.abs() < 1.0) || s == 0.0 {
                return Err(Error::Invalid(
                    "slopes must be nonzero with modulus below one".into(),
                ));
            }
        }
        for w in slopes.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Invalid("adjacent slopes must differ".into()));
            }
        }
        let pieces = propagate_translations(&breakpoints, &slopes, tau);
        Ok(PiecewiseLinearMap {
            breakpoints,
            slopes,
            tau,
            pieces,
        })
    }

    /// A single affine map `x -> r x + t` (no breakpoints).
    pub fn affine(r: f64, t: f64) -> Result<Self> {
        PiecewiseLinearMap::new(Vec::new(), alloc::vec![r], t)
    }

    /// Breakpoints, strictly increasing.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Per-piece slopes, left to right.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// The anchor value `f(0)`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Affine form of every piece, left to right.
    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    /// Number of linearity pieces (`breakpoint count + 1`).
    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Index of a piece whose closure contains `x`. At a breakpoint the two
    /// candidates agree in value by continuity; the left one is returned.
    pub fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < x)
    }

    /// Lower end of the closure of piece `i`; the first piece extends to
    /// negative infinity.
    pub fn piece_lo(&self, i: usize) -> f64 {
        if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.breakpoints[i - 1]
        }
    }

    /// Upper end of the closure of piece `i`; the last piece extends to
    /// positive infinity.
    pub fn piece_hi(&self, i: usize) -> f64 {
        if i == self.breakpoints.len() {
            f64::INFINITY
        } else {
            self.breakpoints[i]
        }
    }

    /// Evaluates the map.
    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// Slope at `x`, or `None` when `x` is exactly a breakpoint (the
    /// derivative does not exist there).
    pub fn slope_at(&self, x: f64) -> Option<f64> {
        if self.breakpoints.iter().any(|&b| b == x) {
            return None;
        }
        Some(self.slopes[self.piece_index(x)])
    }

    /// Largest slope modulus over the pieces.
    pub fn rho(&self) -> f64 {
        self.slopes.iter().fold(0.0, |m, s| m.maxf(s.abs()))
    }

    /// True when all slopes share one strict sign, i.e. the map is
    /// injective on the line.
    pub fn is_injective(&self) -> bool {
        self.slopes.iter().all(|&s| s > 0.0) || self.slopes.iter().all(|&s| s < 0.0)
    }

    /// Exact image of a closed interval: the hull of the endpoint values and
    /// the values at interior breakpoints.
    pub fn image(&self, j: &Interval) -> Interval {
        let mut lo = self.eval(j.lo());
        let mut hi = lo;
        let mut take = |v: f64| {
            lo = lo.minf(v);
            hi = hi.maxf(v);
        };
        take(self.eval(j.hi()));
        for (i, &b) in self.breakpoints.iter().enumerate() {
            if j.contains(b) {
                // Both adjacent pieces give the same value by construction;
                // use the left one.
                take(self.pieces[i].eval(b));
            }
        }
        Interval::new(lo, hi).expect("image hull endpoints are ordered")
    }

    /// The unique fixed point of the map (it is a contraction).
    pub fn fixed_point(&self) -> f64 {
        for (i, p) in self.pieces.iter().enumerate() {
            let x = p.fixed_point();
            if self.piece_lo(i) <= x && x <= self.piece_hi(i) {
                return x;
            }
        }
        // Rounding can push the algebraic candidate just outside its piece;
        // the orbit of any point still converges.
        let mut x = 0.0;
        for _ in 0..HULL_CAP {
            let next = self.eval(x);
            if next == x {
                return x;
            }
            x = next;
        }
        x
    }
}

/// Translation of every piece by continuity, anchored at the piece whose
/// closure contains zero (translation `tau` there).
fn propagate_translations(breakpoints: &[f64], slopes: &[f64], tau: f64) -> Vec<AffinePiece> {
    let n = slopes.len();
    let anchor = breakpoints.partition_point(|&b| b < 0.0);
    let mut pieces = alloc::vec![AffinePiece { r: 0.0, t: 0.0 }; n];
    pieces[anchor] = AffinePiece {
        r: slopes[anchor],
        t: tau,
    };
    for i in anchor..n.saturating_sub(1) {
        // Continuity at breakpoints[i]: r_i b + t_i = r_{i+1} b + t_{i+1}.
        let t = pieces[i].t + breakpoints[i] * (slopes[i] - slopes[i + 1]);
        pieces[i + 1] = AffinePiece {
            r: slopes[i + 1],
            t,
        };
    }
    for i in (0..anchor).rev() {
        let t = pieces[i + 1].t + breakpoints[i] * (slopes[i + 1] - slopes[i]);
        pieces[i] = AffinePiece { r: slopes[i], t };
    }
    pieces
}

/// Smallness verdict for one map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSmallness {
    /// Largest slope modulus of the map.
    pub rho: f64,
    /// Whether the map is injective (all slopes one sign).
    pub injective: bool,
    /// The bound `rho` must stay under: 1/2 for injective maps,
    /// `(1 - rho_max)/2` otherwise.
    pub bound: f64,
    /// `rho < bound`.
    pub within_bound: bool,
}

/// Result of the smallness check for a system.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallnessReport {
    /// Sum of per-map largest slope moduli.
    pub rho_sum: f64,
    /// `rho_sum < 1`.
    pub sum_ok: bool,
    /// Per-map verdicts, in map order.
    pub per_map: Vec<MapSmallness>,
    /// All conditions hold.
    pub small: bool,
}

/// A finite system of continuous piecewise-linear contractions.
#[derive(Debug, Clone, PartialEq)]
pub struct Cplifs {
    maps: Vec<PiecewiseLinearMap>,
}

impl Cplifs {
    /// Builds a system from its maps; at least one map is required.
    pub fn new(maps: Vec<PiecewiseLinearMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Invalid("a system needs at least one map".into()));
        }
        Ok(Cplifs { maps })
    }

    /// Builds a system from flat parameter vectors.
    ///
    /// `type_vector[k]` is the breakpoint count of map `k`; `breakpoints`
    /// concatenates the per-map breakpoint tuples, `taus` has one anchor
    /// value per map, and `slopes` concatenates the per-map slope tuples
    /// (each of length `type_vector[k] + 1`).
    pub fn from_parameters(
        type_vector: &[usize],
        breakpoints: &[f64],
        taus: &[f64],
        slopes: &[f64],
    ) -> Result<Self> {
        let m = type_vector.len();
        let total_b: usize = type_vector.iter().sum();
        let total_s = total_b + m;
        if taus.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} maps require {m} tau values, got {}",
                taus.len()
            )));
        }
        if breakpoints.len() != total_b {
            return Err(Error::DimensionMismatch(format!(
                "type vector needs {total_b} breakpoints, got {}",
                breakpoints.len()
            )));
        }
        if slopes.len() != total_s {
            return Err(Error::DimensionMismatch(format!(
                "type vector needs {total_s} slopes, got {}",
                slopes.len()
            )));
        }
        let mut maps = Vec::with_capacity(m);
        let mut bo = 0;
        let mut so = 0;
        for (k, &l) in type_vector.iter().enumerate() {
            let map = PiecewiseLinearMap::new(
                breakpoints[bo..bo + l].to_vec(),
                slopes[so..so + l + 1].to_vec(),
                taus[k],
            )?;
            maps.push(map);
            bo += l;
            so += l + 1;
        }
        Cplifs::new(maps)
    }

    /// Flat parameter vectors `(type_vector, breakpoints, taus, slopes)`,
    /// the inverse of [`Cplifs::from_parameters`].
    pub fn parameters(&self) -> (Vec<usize>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut tv = Vec::new();
        let mut b = Vec::new();
        let mut taus = Vec::new();
        let mut slopes = Vec::new();
        for map in &self.maps {
            tv.push(map.breakpoints().len());
            b.extend_from_slice(map.breakpoints());
            taus.push(map.tau());
            slopes.extend_from_slice(map.slopes());
        }
        (tv, b, taus, slopes)
    }

    /// The maps, in order.
    pub fn maps(&self) -> &[PiecewiseLinearMap] {
        &self.maps
    }

    /// Number of maps.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    /// Always false; systems have at least one map.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest slope modulus per map.
    pub fn rho_per_map(&self) -> Vec<f64> {
        self.maps.iter().map(|f| f.rho()).collect()
    }

    /// Largest slope modulus over the whole system.
    pub fn rho_max(&self) -> f64 {
        self.maps.iter().fold(0.0, |m, f| m.maxf(f.rho()))
    }

    /// Smallest slope modulus over every piece of every map.
    pub fn rho_min(&self) -> f64 {
        self.maps
            .iter()
            .flat_map(|f| f.slopes())
            .fold(1.0, |m, s| m.minf(s.abs()))
    }

    /// Checks that a word's letters index maps of this system.
    pub fn validate_word(&self, word: &Word) -> Result<()> {
        if word.is_empty() {
            return Err(Error::Invalid("word must be nonempty".into()));
        }
        match word.iter().find(|&&k| k >= self.maps.len()) {
            Some(&k) => Err(Error::DimensionMismatch(format!(
                "letter {k} out of range for {} maps",
                self.maps.len()
            ))),
            None => Ok(()),
        }
    }

    /// Evaluates the composition `f_{w1} o ... o f_{wn}` at `x`.
    pub fn eval_word(&self, word: &Word, x: f64) -> f64 {
        let mut y = x;
        for &k in word.iter().rev() {
            y = self.maps[k].eval(y);
        }
        y
    }

    /// Chain-rule derivative of the composition at `x`, or `None` when some
    /// orbit point lands exactly on a breakpoint.
    pub fn word_derivative(&self, word: &Word, x: f64) -> Option<f64> {
        let mut y = x;
        let mut d = 1.0;
        for &k in word.iter().rev() {
            d *= self.maps[k].slope_at(y)?;
            y = self.maps[k].eval(y);
        }
        Some(d)
    }

    /// The smallest closed interval `I` with `f_k(I) ⊆ I` for every map.
    ///
    /// Increasing hull iteration seeded by the hull of the map fixed points:
    /// every invariant interval contains all of them, the iteration stays
    /// inside the smallest invariant interval, and its limit is itself
    /// invariant, so the limit is exactly that interval. Stops when one
    /// sweep grows the hull by at most `tol`; errors after `cap` sweeps.
    pub fn invariant_interval(&self, tol: f64, cap: usize) -> Result<Interval> {
        let mut hull = Interval::point(self.maps[0].fixed_point());
        for map in &self.maps[1..] {
            hull = hull.hull(&Interval::point(map.fixed_point()));
        }
        for _ in 0..cap {
            let mut next = hull;
            for map in &self.maps {
                next = next.hull(&map.image(&hull));
            }
            let growth = (hull.lo() - next.lo()).maxf(next.hi() - hull.hi());
            hull = next;
            if growth <= tol {
                return Ok(hull);
            }
        }
        Err(Error::NonConvergence(format!(
            "invariant interval still growing after {cap} sweeps"
        )))
    }

    /// [`Cplifs::invariant_interval`] at the default tolerance and cap.
    pub fn invariant_interval_default(&self) -> Result<Interval> {
        self.invariant_interval(HULL_TOL, HULL_CAP)
    }

    /// The cylinder interval of a word over `base`: the image of `base`
    /// under the composition `f_{w1} o ... o f_{wn}`.
    pub fn cylinder(&self, word: &Word, base: &Interval) -> Result<Interval> {
        self.validate_word(word)?;
        let mut j = *base;
        for &k in word.iter().rev() {
            j = self.maps[k].image(&j);
        }
        Ok(j)
    }

    /// Smallness check: the per-map slope maxima must sum below one, and
    /// each map's maximum must stay under 1/2 if the map is injective, or
    /// under `(1 - rho_max)/2` if it is not.
    pub fn check_small(&self) -> SmallnessReport {
        let rho_max = self.rho_max();
        let mut rho_sum = 0.0;
        let mut per_map = Vec::with_capacity(self.maps.len());
        for map in &self.maps {
            let rho = map.rho();
            let injective = map.is_injective();
            let bound = if injective {
                0.5
            } else {
                0.5 * (1.0 - rho_max)
            };
            rho_sum += rho;
            per_map.push(MapSmallness {
                rho,
                injective,
                bound,
                within_bound: rho < bound,
            });
        }
        let sum_ok = rho_sum < 1.0;
        let small = sum_ok && per_map.iter().all(|m| m.within_bound);
        SmallnessReport {
            rho_sum,
            sum_ok,
            per_map,
            small,
        }
    }
}
