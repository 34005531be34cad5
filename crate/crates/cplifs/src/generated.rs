//! The self-similar system a piecewise-linear system generates, and
//! separation scans over its composed translations.
//!
//! Every linearity piece of every map, extended to the whole line, is a
//! similarity `x -> r x + t`. Collecting them in block order (map by map,
//! pieces left to right) gives a self-similar system whose maps agree with
//! the source maps piece by piece. Many geometric questions reduce to how
//! well the composed translations of that system separate: two compositions
//! with equal ratio products and equal translations are the same map, and
//! near-coincidences control overlap behaviour.
//!
//! The scanner enumerates all compositions level by level, buckets them by
//! ratio product, and reports the smallest translation gap inside any
//! bucket. In float mode ratio products are bucketed with a relative
//! tolerance; with rational inputs the whole calculus is exact and reported
//! distances are exact rationals.

use crate::math::FloatExt;
use crate::pwl::Cplifs;
use crate::rational::Rational;
use crate::{Error, Result, Word};
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Relative tolerance for grouping float ratio products into buckets.
pub const RATIO_BUCKET_RTOL: f64 = 1e-12;

/// Cap on reported exact-coincidence witnesses (the count is still total).
const ZERO_WITNESS_CAP: usize = 32;

/// A similarity `x -> r x + t` on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityMap {
    /// Ratio, `0 < |r| < 1`.
    pub r: f64,
    /// Translation.
    pub t: f64,
}

impl SimilarityMap {
    /// Applies the map.
    pub fn eval(&self, x: f64) -> f64 {
        self.r * x + self.t
    }
}

/// A finite system of similarities with piece labels.
///
/// `labels[j] = (k, i)` records that map `j` extends piece `i` of source
/// map `k`; systems built directly from similarity lists label map `j` as
/// `(j, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarIfs {
    maps: Vec<SimilarityMap>,
    labels: Vec<(usize, usize)>,
}

impl SelfSimilarIfs {
    /// Builds a system from bare similarities; map `j` gets label `(j, 0)`.
    pub fn from_maps(maps: Vec<SimilarityMap>) -> Result<Self> {
        let labels = (0..maps.len()).map(|j| (j, 0)).collect();
        SelfSimilarIfs::with_labels(maps, labels)
    }

    /// Builds a system with explicit piece labels.
    pub fn with_labels(maps: Vec<SimilarityMap>, labels: Vec<(usize, usize)>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Invalid("a system needs at least one map".into()));
        }
        if maps.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} maps with {} labels",
                maps.len(),
                labels.len()
            )));
        }
        for m in &maps {
            if !(m.r.abs() < 1.0) || m.r == 0.0 || !m.t.is_finite() {
                return Err(Error::BadRatio(
                    "similarity ratios must be nonzero with modulus below one".into(),
                ));
            }
        }
        Ok(SelfSimilarIfs { maps, labels })
    }

    /// The similarities, in block order.
    pub fn maps(&self) -> &[SimilarityMap] {
        &self.maps
    }

    /// Piece labels `(source map, piece)` aligned with [`Self::maps`].
    pub fn labels(&self) -> &[(usize, usize)] {
        &self.labels
    }

    /// Number of similarities.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    /// Always false.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Translations in block order (the image of the parameter map).
    pub fn translations(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.t).collect()
    }
}

/// Reads off the self-similar system generated by a piecewise-linear
/// system: one similarity per linearity piece, in block order.
pub fn generate_selfsimilar(sys: &Cplifs) -> SelfSimilarIfs {
    let mut maps = Vec::new();
    let mut labels = Vec::new();
    for (k, f) in sys.maps().iter().enumerate() {
        for (i, p) in f.pieces().iter().enumerate() {
            maps.push(SimilarityMap { r: p.r, t: p.t });
            labels.push((k, i));
        }
    }
    SelfSimilarIfs { maps, labels }
}

/// The affine parameter map: breakpoints and anchors to the translation
/// vector of the generated system, at fixed slopes.
///
/// `type_vector[k]` is map `k`'s breakpoint count; `breakpoints`, `taus`,
/// and `slopes` are the flat parameter vectors of
/// [`Cplifs::from_parameters`]. Returns the translations in block order,
/// one per piece (`breakpoint total + map count` entries). On any fixed
/// breakpoint sign pattern this map is affine and invertible in
/// `(breakpoints, taus)`.
pub fn phi_rho(
    type_vector: &[usize],
    breakpoints: &[f64],
    taus: &[f64],
    slopes: &[f64],
) -> Result<Vec<f64>> {
    let sys = Cplifs::from_parameters(type_vector, breakpoints, taus, slopes)?;
    Ok(generate_selfsimilar(&sys).translations())
}

/// Scalar the separation scanner can run on: `f64` or exact [`Rational`].
pub trait EscScalar: Clone {
    /// Product, checked where exactness demands it.
    fn mul(&self, other: &Self) -> Result<Self>;
    /// `self + scale * other`, checked likewise.
    fn add_scaled(&self, scale: &Self, other: &Self) -> Result<Self>;
    /// Whether two ratio products land in the same bucket.
    fn same_ratio(&self, other: &Self) -> bool;
    /// `|self - other|`.
    fn dist(&self, other: &Self) -> Result<Self>;
    /// Total order (inputs are finite).
    fn total_cmp(&self, other: &Self) -> Ordering;
    /// Exact zero test.
    fn is_zero(&self) -> bool;
    /// Float view for fitting and display.
    fn to_f64(&self) -> f64;
}

impl EscScalar for f64 {
    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
    fn add_scaled(&self, scale: &Self, other: &Self) -> Result<Self> {
        Ok(self + scale * other)
    }
    fn same_ratio(&self, other: &Self) -> bool {
        (self - other).abs() <= RATIO_BUCKET_RTOL * self.abs().maxf(other.abs())
    }
    fn dist(&self, other: &Self) -> Result<Self> {
        Ok((self - other).abs())
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl EscScalar for Rational {
    fn mul(&self, other: &Self) -> Result<Self> {
        Rational::mul(self, other)
    }
    fn add_scaled(&self, scale: &Self, other: &Self) -> Result<Self> {
        self.add(&scale.mul(other)?)
    }
    fn same_ratio(&self, other: &Self) -> bool {
        self == other
    }
    fn dist(&self, other: &Self) -> Result<Self> {
        Ok(self.sub(other)?.abs())
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
}

/// Separation statistics for one composition level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSeparation<T> {
    /// Composition length.
    pub level: usize,
    /// Number of word pairs sharing a ratio bucket at this level.
    pub pair_count: usize,
    /// Smallest translation gap over those pairs; `None` when no two words
    /// share a bucket (all pairwise distances are infinite).
    pub min_distance: Option<T>,
}

/// An exact coincidence: two distinct composition words with equal ratio
/// product and equal translation.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroWitness {
    /// Composition length.
    pub level: usize,
    /// First word (letters index the similarity list).
    pub word_a: Word,
    /// Second word.
    pub word_b: Word,
}

/// Report of a separation scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EscReport<T> {
    /// Per-level statistics for every scanned level, ascending.
    pub per_level: Vec<LevelSeparation<T>>,
    /// Exact coincidences found (capped at a few dozen witnesses).
    pub zero_witnesses: Vec<ZeroWitness>,
    /// Total number of coinciding pairs, including those past the cap.
    pub zero_pair_count: usize,
    /// Geometric fit `c` of the per-level minima: least-squares slope of
    /// `ln(min distance)` against the level, exponentiated. A heuristic
    /// summary only; `None` with fewer than two positive finite levels.
    pub fitted_c: Option<f64>,
    /// Levels skipped because their word count exceeded the budget.
    pub skipped_levels: Vec<usize>,
}

/// One enumerated composition: ratio product, translation, packed word id.
struct Entry<T> {
    r: T,
    t: T,
    id: u64,
}

fn decode_word(mut id: u64, level: usize, m: usize) -> Word {
    let mut w = alloc::vec![0usize; level];
    for slot in w.iter_mut().rev() {
        *slot = (id % m as u64) as usize;
        id /= m as u64;
    }
    w
}

/// Scans composition levels `1..=max_level` of a similarity list for
/// translation coincidences; shared by the float and exact entry points.
fn scan_impl<T: EscScalar>(
    maps: &[(T, T)],
    max_level: usize,
    budget: usize,
) -> Result<EscReport<T>> {
    let m = maps.len();
    if m == 0 {
        return Err(Error::Invalid("a scan needs at least one map".into()));
    }
    if max_level == 0 {
        return Err(Error::Invalid("scan level must be at least one".into()));
    }
    if m > budget {
        return Err(Error::BudgetExceeded(format!(
            "{m} maps exceed the word budget {budget} at level 1"
        )));
    }

    let mut per_level = Vec::new();
    let mut zero_witnesses = Vec::new();
    let mut zero_pair_count = 0usize;
    let mut skipped = Vec::new();

    let mut current: Vec<Entry<T>> = maps
        .iter()
        .enumerate()
        .map(|(j, (r, t))| Entry {
            r: r.clone(),
            t: t.clone(),
            id: j as u64,
        })
        .collect();

    for level in 1..=max_level {
        // Bucket by ratio product, then scan adjacent translations.
        current.sort_by(|a, b| a.r.total_cmp(&b.r).then_with(|| a.t.total_cmp(&b.t)));
        let mut pair_count = 0usize;
        let mut min_distance: Option<T> = None;
        let mut start = 0;
        while start < current.len() {
            let mut end = start + 1;
            while end < current.len() && current[end - 1].r.same_ratio(&current[end].r) {
                end += 1;
            }
            let bucket = &current[start..end];
            let n = bucket.len();
            pair_count += n * (n - 1) / 2;
            for pair in bucket.windows(2) {
                let d = pair[0].t.dist(&pair[1].t)?;
                if d.is_zero() {
                    zero_pair_count += 1;
                    if zero_witnesses.len() < ZERO_WITNESS_CAP {
                        zero_witnesses.push(ZeroWitness {
                            level,
                            word_a: decode_word(pair[0].id, level, m),
                            word_b: decode_word(pair[1].id, level, m),
                        });
                    }
                }
                let better = match &min_distance {
                    None => true,
                    Some(best) => d.total_cmp(best) == Ordering::Less,
                };
                if better {
                    min_distance = Some(d);
                }
            }
            start = end;
        }
        per_level.push(LevelSeparation {
            level,
            pair_count,
            min_distance,
        });

        if level == max_level {
            break;
        }
        match current.len().checked_mul(m) {
            Some(next_count) if next_count <= budget => {
                let mut next = Vec::with_capacity(next_count);
                for e in &current {
                    for (j, (r, t)) in maps.iter().enumerate() {
                        next.push(Entry {
                            r: e.r.mul(r)?,
                            t: e.t.add_scaled(&e.r, t)?,
                            id: e.id * m as u64 + j as u64,
                        });
                    }
                }
                current = next;
            }
            _ => {
                skipped.extend(level + 1..=max_level);
                break;
            }
        }
    }

    let fitted_c = fit_geometric(&per_level);
    Ok(EscReport {
        per_level,
        zero_witnesses,
        zero_pair_count,
        fitted_c,
        skipped_levels: skipped,
    })
}

/// Least-squares slope of `ln(min distance)` against the level, over levels
/// with a positive minimum; the geometric decay rate of the minima.
fn fit_geometric<T: EscScalar>(levels: &[LevelSeparation<T>]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .filter_map(|l| {
            let d = l.min_distance.as_ref()?.to_f64();
            (d > 0.0).then(|| (l.level as f64, d.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    Some(((n * sxy - sx * sy) / denom).exp())
}

/// Scans composed translations of a similarity system in float arithmetic.
///
/// Levels whose word count `m^n` exceeds `budget` are skipped and listed in
/// the report. Ratio products are bucketed with relative tolerance
/// [`RATIO_BUCKET_RTOL`]; distances across buckets count as infinite.
pub fn esc_scan(ifs: &SelfSimilarIfs, max_level: usize, budget: usize) -> Result<EscReport<f64>> {
    let maps: Vec<(f64, f64)> = ifs.maps().iter().map(|s| (s.r, s.t)).collect();
    scan_impl(&maps, max_level, budget)
}

/// Exact separation scan for a rational similarity list.
///
/// Bucketing and distances are exact; arithmetic overflow of the fixed-width
/// rationals aborts the scan with [`Error::Overflow`].
pub fn esc_scan_exact(
    maps: &[(Rational, Rational)],
    max_level: usize,
    budget: usize,
) -> Result<EscReport<Rational>> {
    for (r, _) in maps {
        let one = Rational::one();
        if r.is_zero() || r.abs().cmp(&one) != Ordering::Less {
            return Err(Error::BadRatio(
                "similarity ratios must be nonzero with modulus below one".into(),
            ));
        }
    }
    scan_impl(maps, max_level, budget)
}

/// Exact-rational affine piece forms of a parametrized system, in the block
/// order of [`generate_selfsimilar`] (maps left to right, pieces left to
/// right within each map).
///
/// Mirrors the float continuity propagation exactly: per map, the piece
/// whose closure contains zero carries translation `tau`, and crossing
/// breakpoint `b_i` shifts the translation by `b_i (r_i - r_{i+1})`.
/// Validation matches the float constructor; rational overflow surfaces as
/// [`Error::Overflow`]. The pairs feed [`esc_scan_exact`].
pub fn exact_piece_maps(
    type_vector: &[usize],
    breakpoints: &[Rational],
    taus: &[Rational],
    slopes: &[Rational],
) -> Result<Vec<(Rational, Rational)>> {
    let m = type_vector.len();
    if m == 0 {
        return Err(Error::Invalid("a system needs at least one map".into()));
    }
    let total_b: usize = type_vector.iter().sum();
    if breakpoints.len() != total_b || taus.len() != m || slopes.len() != total_b + m {
        return Err(Error::DimensionMismatch(format!(
            "type vector wants {total_b} breakpoints, {m} translations, {} slopes; \
             got {}, {}, {}",
            total_b + m,
            breakpoints.len(),
            taus.len(),
            slopes.len()
        )));
    }
    let one = Rational::one();
    let zero = Rational::zero();
    let mut out = Vec::with_capacity(total_b + m);
    let mut b_at = 0usize;
    let mut s_at = 0usize;
    for (k, &count) in type_vector.iter().enumerate() {
        let bs = &breakpoints[b_at..b_at + count];
        let ss = &slopes[s_at..s_at + count + 1];
        b_at += count;
        s_at += count + 1;
        for w in bs.windows(2) {
            if w[0].cmp(&w[1]) != Ordering::Less {
                return Err(Error::Invalid(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        for s in ss {
            if s.is_zero() || s.abs().cmp(&one) != Ordering::Less {
                return Err(Error::Invalid(
                    "slopes must be nonzero with modulus below one".into(),
                ));
            }
        }
        for w in ss.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Invalid("adjacent slopes must differ".into()));
            }
        }
        let anchor = bs.partition_point(|b| b.cmp(&zero) == Ordering::Less);
        let mut pieces = alloc::vec![(zero, zero); ss.len()];
        pieces[anchor] = (ss[anchor], taus[k]);
        for i in anchor..ss.len().saturating_sub(1) {
            let shift = bs[i].mul(&ss[i].sub(&ss[i + 1])?)?;
            pieces[i + 1] = (ss[i + 1], pieces[i].1.add(&shift)?);
        }
        for i in (0..anchor).rev() {
            let shift = bs[i].mul(&ss[i + 1].sub(&ss[i])?)?;
            pieces[i] = (ss[i], pieces[i + 1].1.add(&shift)?);
        }
        out.extend(pieces);
    }
    Ok(out)
}
