//! Parameter-space exploration: 2-D regularity scans over breakpoint and
//! translation axes, and finite-difference verification of the derivative
//! bounds for parameter dependence.
//!
//! A scan slices the parameter space along two axes with every slope held
//! fixed, rebuilds the system at each cell center, and classifies the cell
//! by how close its breakpoints come to the attractor. The flagged picture
//! is the empirical counterpart of the exceptional parameter set: the locus
//! where a breakpoint meets the attractor and regularity fails.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::FloatExt;
use crate::pwl::Cplifs;
use crate::regularity::{locate_near_witness, regularity_order, RegularityStatus};
use crate::{Error, Result, Word, DEFAULT_BUDGET};

/// Cell-size multiple used as the attractor-proximity tolerance of a scan.
///
/// A cell whose closed square the coincidence locus crosses has its center
/// within `(1 + 1/(1 - rho)) h/2` of the attractor (in point space), which
/// is at most `1.25 h` for `rho <= 1/3`; the factor therefore flags every
/// crossed cell while keeping the flagged band `O(h)` thin.
pub const CELL_TOL_FACTOR: f64 = 1.25;

/// Relative disagreement between one-sided differences that marks a kink.
///
/// The evaluated composition is piecewise linear in every parameter, so
/// away from the finitely many kinks the one-sided differences agree to
/// float rounding (~1e-11 at usual steps); a genuine kink jumps by a slope
/// difference of order one.
pub const KINK_RTOL: f64 = 1e-6;

/// A scannable coordinate of the parameter space: one breakpoint or one
/// translation. Slopes are never scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Breakpoint `index` of map `map` (0-based).
    Breakpoint {
        /// Map owning the breakpoint.
        map: usize,
        /// Breakpoint position within the map.
        index: usize,
    },
    /// The translation parameter of map `map` (0-based).
    Translation {
        /// The map whose translation moves.
        map: usize,
    },
}

impl Axis {
    /// Parses the textual axis syntax: `b<map>.<index>` for breakpoints
    /// and `tau<map>` for translations, both 1-based (`b1.1` is the first
    /// breakpoint of the first map).
    pub fn parse(text: &str) -> Result<Axis> {
        if let Some(rest) = text.strip_prefix("tau") {
            return Ok(Axis::Translation {
                map: parse_position(rest, text)?,
            });
        }
        if let Some(rest) = text.strip_prefix('b') {
            if let Some((map, index)) = rest.split_once('.') {
                return Ok(Axis::Breakpoint {
                    map: parse_position(map, text)?,
                    index: parse_position(index, text)?,
                });
            }
        }
        Err(Error::BadAxis(format!(
            "axis `{text}` is neither b<map>.<index> nor tau<map>"
        )))
    }

    /// Checks that the axis exists for `sys`.
    pub fn validate(&self, sys: &Cplifs) -> Result<()> {
        let map = match *self {
            Axis::Breakpoint { map, .. } | Axis::Translation { map } => map,
        };
        if map >= sys.len() {
            return Err(Error::BadAxis(format!(
                "axis {self} names map {} of a {}-map system",
                map + 1,
                sys.len()
            )));
        }
        if let Axis::Breakpoint { map, index } = *self {
            let count = sys.maps()[map].breakpoints().len();
            if index >= count {
                return Err(Error::BadAxis(format!(
                    "axis {self} names breakpoint {} of a map with {count}",
                    index + 1
                )));
            }
        }
        Ok(())
    }

    /// The axis value in `sys`, which must pass [`Axis::validate`].
    pub fn current_value(&self, sys: &Cplifs) -> Result<f64> {
        self.validate(sys)?;
        Ok(match *self {
            Axis::Breakpoint { map, index } => sys.maps()[map].breakpoints()[index],
            Axis::Translation { map } => sys.maps()[map].tau(),
        })
    }

    /// Writes `value` into flattened parameters (`breakpoints` laid out
    /// map-major as in `Cplifs::parameters`).
    fn write(&self, type_vector: &[usize], breakpoints: &mut [f64], taus: &mut [f64], value: f64) {
        match *self {
            Axis::Breakpoint { map, index } => {
                let offset: usize = type_vector[..map].iter().sum();
                breakpoints[offset + index] = value;
            }
            Axis::Translation { map } => taus[map] = value,
        }
    }
}

impl core::fmt::Display for Axis {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match *self {
            Axis::Breakpoint { map, index } => write!(f, "b{}.{}", map + 1, index + 1),
            Axis::Translation { map } => write!(f, "tau{}", map + 1),
        }
    }
}

/// Parses a 1-based decimal position into a 0-based index.
fn parse_position(digits: &str, whole: &str) -> Result<usize> {
    let bad = || Error::BadAxis(format!("axis `{whole}` has a malformed index"));
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: usize = digits.parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok(n - 1)
}

/// Verdict for one scan cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFlag {
    /// Verified regular and every breakpoint stays clear of the attractor
    /// at the scan tolerance.
    Regular,
    /// A breakpoint meets the attractor: a coincidence certificate, an
    /// order-refinement offender, or proximity within the cell tolerance.
    Irregular,
    /// The cell could not be classified: the rebuilt system is invalid or
    /// not small, or a budget ran out.
    Undetermined,
}

/// Evidence for one irregular cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanWitness {
    /// Cell coordinates (axis-1 index, axis-2 index).
    pub cell: (usize, usize),
    /// Map owning the implicated breakpoint.
    pub map: usize,
    /// Breakpoint index within that map.
    pub breakpoint: usize,
    /// The breakpoint value at the cell center.
    pub value: f64,
    /// True when the breakpoint equals a map's fixed point bit for bit.
    pub certified: bool,
    /// Word of a cylinder within tolerance of the breakpoint; `None` for
    /// certificates, whose evidence is the fixed-point identity itself.
    pub word: Option<Word>,
}

/// Outcome of a 2-D regularity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// First scanned axis (rows of the grid).
    pub axis1: Axis,
    /// Second scanned axis (columns of the grid).
    pub axis2: Axis,
    /// Lower end of the shared axis range.
    pub lo: f64,
    /// Upper end of the shared axis range.
    pub hi: f64,
    /// Cells per axis.
    pub grid_size: usize,
    /// Cell side length `(hi - lo) / grid_size`.
    pub cell_size: f64,
    /// Attractor-proximity tolerance used for flagging,
    /// [`CELL_TOL_FACTOR`] times the cell size.
    pub membership_tol: f64,
    /// Row-major verdicts: cell `(i, j)` at index `i * grid_size + j`.
    pub flags: Vec<CellFlag>,
    /// One witness per irregular cell, in row-major cell order.
    pub witnesses: Vec<ScanWitness>,
    /// Number of irregular cells.
    pub irregular_count: usize,
    /// Number of undetermined cells; never folded into the fraction.
    pub undetermined_count: usize,
    /// Irregular cells over all cells.
    pub irregular_fraction: f64,
    /// Flagged-cell counts at coarsenings `h`, `2h`, `4h`: a coarse cell
    /// counts when any of its fine cells is irregular. The growth across
    /// the three sizes exposes the scaling of the flagged region.
    pub mesh_counts: Vec<(f64, usize)>,
}

impl ScanResult {
    /// Verdict of cell `(i, j)`.
    pub fn flag(&self, i: usize, j: usize) -> CellFlag {
        self.flags[i * self.grid_size + j]
    }
}

/// Scans a 2-D slice of the parameter plane for regularity failure.
///
/// Both axes share `range`; cell `(i, j)` evaluates the template with the
/// axes set to the cell center `lo + (i + 1/2) h`, `lo + (j + 1/2) h`,
/// `h = (hi - lo) / grid_size`. Each cell is rebuilt and validated
/// (invalid or non-small cells are undetermined), classified by
/// `regularity_order` at `max_order`, and — when that reports regular —
/// every breakpoint is additionally probed against the level-`probe_depth`
/// cylinder union at tolerance [`CELL_TOL_FACTOR`]` * h`, so cells whose
/// parameters sit within a cell size of the exceptional locus flag
/// irregular even though the system itself is regular. The result is a
/// resolution-`h` picture of the exceptional set.
pub fn scan_regularity(
    template: &Cplifs,
    axis1: &Axis,
    axis2: &Axis,
    range: (f64, f64),
    grid_size: usize,
    max_order: usize,
    probe_depth: usize,
) -> Result<ScanResult> {
    axis1.validate(template)?;
    axis2.validate(template)?;
    if axis1 == axis2 {
        return Err(Error::Invalid(format!("both axes are {axis1}")));
    }
    if grid_size < 8 {
        return Err(Error::Invalid(format!(
            "grid size {grid_size} must be at least 8"
        )));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Invalid(format!(
            "range ({lo}, {hi}) must be finite and increasing"
        )));
    }
    if max_order == 0 || probe_depth == 0 {
        return Err(Error::Invalid(
            "max order and probe depth must be at least 1".into(),
        ));
    }

    let cell_size = (hi - lo) / grid_size as f64;
    let tol = CELL_TOL_FACTOR * cell_size;
    let (type_vector, base_b, base_taus, slopes) = template.parameters();

    let mut flags = Vec::with_capacity(grid_size * grid_size);
    let mut witnesses = Vec::new();
    for i in 0..grid_size {
        let v1 = lo + (i as f64 + 0.5) * cell_size;
        for j in 0..grid_size {
            let v2 = lo + (j as f64 + 0.5) * cell_size;
            let mut breakpoints = base_b.clone();
            let mut taus = base_taus.clone();
            axis1.write(&type_vector, &mut breakpoints, &mut taus, v1);
            axis2.write(&type_vector, &mut breakpoints, &mut taus, v2);
            let sys = match Cplifs::from_parameters(&type_vector, &breakpoints, &taus, &slopes) {
                Ok(sys) if sys.check_small().small => sys,
                _ => {
                    flags.push(CellFlag::Undetermined);
                    continue;
                }
            };
            let (flag, witness) = classify_cell(&sys, (i, j), max_order, probe_depth, tol);
            flags.push(flag);
            if let Some(w) = witness {
                witnesses.push(w);
            }
        }
    }

    let irregular_count = flags.iter().filter(|f| **f == CellFlag::Irregular).count();
    let undetermined_count = flags
        .iter()
        .filter(|f| **f == CellFlag::Undetermined)
        .count();
    let mesh_counts = vec![
        (cell_size, irregular_count),
        (2.0 * cell_size, coarse_count(&flags, grid_size, 2)),
        (4.0 * cell_size, coarse_count(&flags, grid_size, 4)),
    ];
    Ok(ScanResult {
        axis1: *axis1,
        axis2: *axis2,
        lo,
        hi,
        grid_size,
        cell_size,
        membership_tol: tol,
        flags,
        witnesses,
        irregular_count,
        undetermined_count,
        irregular_fraction: irregular_count as f64 / (grid_size * grid_size) as f64,
        mesh_counts,
    })
}

/// Classifies one rebuilt cell system; errors become undetermined.
fn classify_cell(
    sys: &Cplifs,
    cell: (usize, usize),
    max_order: usize,
    probe_depth: usize,
    tol: f64,
) -> (CellFlag, Option<ScanWitness>) {
    let report = match regularity_order(sys, max_order, probe_depth, tol) {
        Ok(report) => report,
        Err(_) => return (CellFlag::Undetermined, None),
    };
    match report.status {
        RegularityStatus::Irregular { certified } => {
            let witness = report.witness.map(|w| ScanWitness {
                cell,
                map: w.map,
                breakpoint: w.breakpoint,
                value: sys.maps()[w.map].breakpoints()[w.breakpoint],
                certified,
                word: (!certified).then_some(w.word),
            });
            (CellFlag::Irregular, witness)
        }
        RegularityStatus::Undetermined => (CellFlag::Undetermined, None),
        RegularityStatus::Regular(_) => {
            for (map_index, map) in sys.maps().iter().enumerate() {
                for (bp_index, &value) in map.breakpoints().iter().enumerate() {
                    match locate_near_witness(sys, value, probe_depth, tol, DEFAULT_BUDGET) {
                        Err(_) => return (CellFlag::Undetermined, None),
                        Ok(Some(word)) => {
                            return (
                                CellFlag::Irregular,
                                Some(ScanWitness {
                                    cell,
                                    map: map_index,
                                    breakpoint: bp_index,
                                    value,
                                    certified: false,
                                    word: Some(word),
                                }),
                            );
                        }
                        Ok(None) => {}
                    }
                }
            }
            (CellFlag::Regular, None)
        }
    }
}

/// Number of `factor`-by-`factor` blocks holding at least one irregular
/// cell; ragged edge blocks count like full ones.
fn coarse_count(flags: &[CellFlag], grid_size: usize, factor: usize) -> usize {
    let wide = grid_size.div_ceil(factor);
    let mut hit = vec![false; wide * wide];
    for i in 0..grid_size {
        for j in 0..grid_size {
            if flags[i * grid_size + j] == CellFlag::Irregular {
                hit[(i / factor) * wide + j / factor] = true;
            }
        }
    }
    hit.iter().filter(|h| **h).count()
}

/// How a derivative check concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    /// Differentiable at the probed point; the slope was tested.
    Checked,
    /// The step straddles a kink of the piecewise-linear parameter
    /// dependence (one-sided differences disagree, or the perturbed
    /// parameters no longer build): skipped, not a violation.
    Kink,
    /// The axis names a breakpoint slot the template does not have
    /// (an affine map): nothing to differentiate.
    Vacuous,
}

/// Result of one finite-difference derivative-bound check.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeCheck {
    /// Word of the checked composition.
    pub word: Word,
    /// Differentiated parameter.
    pub axis: Axis,
    /// Parameter value at the template.
    pub theta: f64,
    /// Step size.
    pub step: f64,
    /// Central difference `(F(theta+h) - F(theta-h)) / 2h`; zero when the
    /// check was skipped without evaluating.
    pub slope: f64,
    /// Claimed bound: `rho_max / (1 - rho_max)` for breakpoints, `2` for
    /// translations.
    pub bound: f64,
    /// How the check concluded.
    pub status: CheckStatus,
    /// `|slope| < bound + 10 h` when checked; vacuously true otherwise.
    pub pass: bool,
}

/// Central-difference check of the parameter-derivative bound for the
/// position of one composed image.
///
/// Evaluates `F(theta) = f_word(x)` with the axis parameter set to
/// `theta - h`, `theta`, `theta + h` (the system is rebuilt per value) and
/// tests the central slope against the bound with a `10 h` discretization
/// allowance. `F` is piecewise linear in the parameter, so the one-sided
/// differences agree away from its finitely many kinks; when they disagree
/// beyond [`KINK_RTOL`] — or the perturbed parameters fail to build — the
/// point is a kink and the check is skipped.
pub fn derivative_bounds_check(
    template: &Cplifs,
    word: &Word,
    axis: &Axis,
    x: f64,
    h: f64,
) -> Result<DerivativeCheck> {
    template.validate_word(word)?;
    if !(h > 0.0 && h.is_finite() && x.is_finite()) {
        return Err(Error::Invalid(format!(
            "need a finite point and a positive finite step, got x = {x}, h = {h}"
        )));
    }
    let rho_max = template.rho_max();
    let bound = match axis {
        Axis::Breakpoint { .. } => rho_max / (1.0 - rho_max),
        Axis::Translation { .. } => 2.0,
    };
    let map = match *axis {
        Axis::Breakpoint { map, .. } | Axis::Translation { map } => map,
    };
    if map >= template.len() {
        return Err(Error::BadAxis(format!(
            "axis {axis} names map {} of a {}-map system",
            map + 1,
            template.len()
        )));
    }
    let blank = |status, pass| DerivativeCheck {
        word: word.clone(),
        axis: *axis,
        theta: 0.0,
        step: h,
        slope: 0.0,
        bound,
        status,
        pass,
    };
    if let Axis::Breakpoint { map, index } = *axis {
        if index >= template.maps()[map].breakpoints().len() {
            return Ok(blank(CheckStatus::Vacuous, true));
        }
    }

    let theta = axis.current_value(template)?;
    let (type_vector, base_b, base_taus, slopes) = template.parameters();
    let rebuild = |value: f64| -> Result<Cplifs> {
        let mut breakpoints = base_b.clone();
        let mut taus = base_taus.clone();
        axis.write(&type_vector, &mut breakpoints, &mut taus, value);
        Cplifs::from_parameters(&type_vector, &breakpoints, &taus, &slopes)
    };
    let (plus, minus) = match (rebuild(theta + h), rebuild(theta - h)) {
        (Ok(p), Ok(m)) => (p, m),
        // The step crossed a structural boundary (breakpoints reordered):
        // the point is within h of a kink of the parameter dependence.
        _ => {
            return Ok(DerivativeCheck {
                theta,
                ..blank(CheckStatus::Kink, true)
            })
        }
    };

    let f0 = template.eval_word(word, x);
    let fp = plus.eval_word(word, x);
    let fm = minus.eval_word(word, x);
    let d_plus = (fp - f0) / h;
    let d_minus = (f0 - fm) / h;
    let slope = (fp - fm) / (2.0 * h);
    let scale = 1.0f64.maxf(d_plus.abs()).maxf(d_minus.abs());
    let (status, pass) = if (d_plus - d_minus).abs() > KINK_RTOL * scale {
        (CheckStatus::Kink, true)
    } else {
        (CheckStatus::Checked, slope.abs() < bound + 10.0 * h)
    };
    Ok(DerivativeCheck {
        word: word.clone(),
        axis: *axis,
        theta,
        step: h,
        slope,
        bound,
        status,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cantor, injective_pair, triangle};
    use crate::pwl::PiecewiseLinearMap;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    /// Single tent map: ascending then descending, breakpoint `b`.
    fn tent(b: f64, tau: f64) -> Cplifs {
        let map = PiecewiseLinearMap::new(vec![b], vec![0.3, -0.3], tau).unwrap();
        Cplifs::new(vec![map]).unwrap()
    }

    #[test]
    fn axis_syntax_round_trips() {
        let cases = [
            ("b1.1", Axis::Breakpoint { map: 0, index: 0 }),
            ("b2.3", Axis::Breakpoint { map: 1, index: 2 }),
            ("tau1", Axis::Translation { map: 0 }),
            ("tau12", Axis::Translation { map: 11 }),
        ];
        for (text, axis) in cases {
            assert_eq!(Axis::parse(text).unwrap(), axis);
            assert_eq!(alloc::format!("{axis}"), text);
        }
        for text in ["", "b", "b1", "b.1", "b0.1", "b1.0", "tau", "tau0", "x3", "b1.1.1", "taux"] {
            assert!(
                matches!(Axis::parse(text), Err(Error::BadAxis(_))),
                "{text} should not parse"
            );
        }
    }

    #[test]
    fn axis_validation_matches_the_template_shape() {
        let sys = cantor();
        assert!(Axis::Translation { map: 1 }.validate(&sys).is_ok());
        assert!(matches!(
            Axis::Translation { map: 2 }.validate(&sys),
            Err(Error::BadAxis(_))
        ));
        // Affine maps expose no breakpoint axes.
        assert!(matches!(
            Axis::Breakpoint { map: 0, index: 0 }.validate(&sys),
            Err(Error::BadAxis(_))
        ));
        assert!(Axis::Breakpoint { map: 0, index: 0 }.validate(&triangle()).is_ok());
    }

    #[test]
    fn translation_slope_of_a_single_map_is_exactly_one() {
        // A power-of-two step keeps the perturbed intercepts exact and the
        // rounding tails of F(theta +/- h) identical, so the central
        // difference is bit-exactly 1. (The identical-tail argument needs
        // the perturbed sums to share a binade: x = 0.7 on the second
        // fixture would put f(x) exactly at 0.25 and break it.)
        let h = 2.0f64.powi(-17);
        for (sys, word, x) in [
            (triangle(), vec![0usize], 0.3),
            (triangle(), vec![0], 0.8),
            (injective_pair(), vec![0], 0.75),
        ] {
            let check = derivative_bounds_check(&sys, &word, &Axis::Translation { map: 0 }, x, h)
                .unwrap();
            assert_eq!(check.status, CheckStatus::Checked);
            assert_eq!(check.slope, 1.0, "slope must be exact for {word:?} at {x}");
            assert!(check.pass);
            assert_eq!(check.bound, 2.0);
        }
        let check = derivative_bounds_check(
            &triangle(),
            &vec![1],
            &Axis::Translation { map: 1 },
            0.3,
            h,
        )
        .unwrap();
        assert_eq!(check.slope, 1.0);
    }

    #[test]
    fn breakpoint_slope_of_a_composition_stays_under_gamma() {
        // F = f1(f2(f1(x))) at x = 0.7: the breakpoint feeds the second
        // piece's intercept with weight rho1 - rho2 = 0.15 at the outer
        // application and 0.2 * 0.3 * 0.15 at the inner one.
        let sys = injective_pair();
        let axis = Axis::Breakpoint { map: 0, index: 0 };
        let gamma = 0.35 / 0.65;
        let mut slopes = Vec::new();
        for h in [2.0f64.powi(-15), 2.0f64.powi(-16), 2.0f64.powi(-17)] {
            let check = derivative_bounds_check(&sys, &vec![0, 1, 0], &axis, 0.7, h).unwrap();
            assert_eq!(check.status, CheckStatus::Checked);
            assert!(check.pass);
            close(check.bound, gamma, 1e-15);
            close(check.slope, 0.159, 1e-9);
            slopes.push(check.slope);
        }
        // The three step sizes agree: the dependence is linear here.
        for pair in slopes.windows(2) {
            close(pair[0], pair[1], 1e-9);
        }
    }

    #[test]
    fn breakpoint_check_on_an_affine_template_is_vacuous() {
        let check = derivative_bounds_check(
            &cantor(),
            &vec![0, 1],
            &Axis::Breakpoint { map: 0, index: 0 },
            0.5,
            1e-5,
        )
        .unwrap();
        assert_eq!(check.status, CheckStatus::Vacuous);
        assert!(check.pass);
    }

    #[test]
    fn probing_across_a_kink_is_detected_and_skipped() {
        // At x equal to the breakpoint, moving the breakpoint past x
        // switches the evaluating piece: the one-sided differences are 0
        // and rho1 - rho2 = 0.6.
        let sys = tent(0.4, 0.1);
        let check = derivative_bounds_check(
            &sys,
            &vec![0],
            &Axis::Breakpoint { map: 0, index: 0 },
            0.4,
            2.0f64.powi(-17),
        )
        .unwrap();
        assert_eq!(check.status, CheckStatus::Kink);
        assert!(check.pass);
    }

    #[test]
    fn gamma_matches_the_geometric_tail() {
        for rho in [0.3, 0.35, 0.49] {
            let gamma = rho / (1.0 - rho);
            let mut partial = 0.0;
            let mut term = rho;
            for _ in 0..2000 {
                partial += term;
                term *= rho;
            }
            close(gamma, partial, 1e-12);
        }
    }

    #[test]
    fn scanning_an_affine_template_flags_nothing() {
        let result = scan_regularity(
            &cantor(),
            &Axis::Translation { map: 0 },
            &Axis::Translation { map: 1 },
            (0.0, 2.0 / 3.0),
            8,
            4,
            20,
        )
        .unwrap();
        assert_eq!(result.irregular_count, 0);
        assert_eq!(result.undetermined_count, 0);
        assert_eq!(result.irregular_fraction, 0.0);
        assert!(result.flags.iter().all(|f| *f == CellFlag::Regular));
        assert!(result.witnesses.is_empty());
        assert!(result.mesh_counts.iter().all(|(_, n)| *n == 0));
    }

    #[test]
    fn tent_scan_flags_every_cell_crossed_by_the_coincidence_curve() {
        // The attractor of the single tent map is its fixed point; the
        // breakpoint meets it exactly on the curve b = tau / (1 - rho1).
        let template = tent(0.4, 0.1);
        let grid = 16usize;
        let result = scan_regularity(
            &template,
            &Axis::Breakpoint { map: 0, index: 0 },
            &Axis::Translation { map: 0 },
            (0.0, 1.0),
            grid,
            12,
            40,
        )
        .unwrap();
        assert_eq!(result.undetermined_count, 0);
        assert!(result.irregular_count > 0);
        let h = result.cell_size;
        let mut crossed = 0;
        for i in 0..grid {
            for j in 0..grid {
                // Cell (i, j) covers b in [i h, (i+1) h], tau in
                // [j h, (j+1) h]; the curve b = tau / 0.7 crosses it when
                // the b-interval meets the mapped tau-interval.
                let (b_lo, b_hi) = (i as f64 * h, (i + 1) as f64 * h);
                let (c_lo, c_hi) = (j as f64 * h / 0.7, (j + 1) as f64 * h / 0.7);
                if b_hi >= c_lo && c_hi >= b_lo {
                    crossed += 1;
                    assert_eq!(
                        result.flag(i, j),
                        CellFlag::Irregular,
                        "cell ({i}, {j}) straddles the coincidence curve"
                    );
                }
            }
        }
        assert!(crossed > 0);
        // Far corner: breakpoint nowhere near the fixed point.
        assert_eq!(result.flag(grid - 1, 0), CellFlag::Regular);
        // The flagged region is a thin band: coarsening cannot grow it.
        assert!(result.mesh_counts[1].1 <= result.mesh_counts[0].1);
        assert!(result.mesh_counts[2].1 <= result.mesh_counts[1].1);
    }

    #[test]
    fn scan_witnesses_reproduce_at_the_cell_centers() {
        let template = tent(0.4, 0.1);
        let axis1 = Axis::Breakpoint { map: 0, index: 0 };
        let axis2 = Axis::Translation { map: 0 };
        let result =
            scan_regularity(&template, &axis1, &axis2, (0.0, 1.0), 8, 12, 40).unwrap();
        assert!(!result.witnesses.is_empty());
        let (type_vector, base_b, base_taus, slopes) = template.parameters();
        for witness in &result.witnesses {
            assert_eq!(
                result.flag(witness.cell.0, witness.cell.1),
                CellFlag::Irregular
            );
            // Rebuild the cell system exactly as the scan did.
            let v1 = result.lo + (witness.cell.0 as f64 + 0.5) * result.cell_size;
            let v2 = result.lo + (witness.cell.1 as f64 + 0.5) * result.cell_size;
            let mut breakpoints = base_b.clone();
            let mut taus = base_taus.clone();
            axis1.write(&type_vector, &mut breakpoints, &mut taus, v1);
            axis2.write(&type_vector, &mut breakpoints, &mut taus, v2);
            let sys = Cplifs::from_parameters(&type_vector, &breakpoints, &taus, &slopes).unwrap();
            assert_eq!(
                sys.maps()[witness.map].breakpoints()[witness.breakpoint],
                witness.value
            );
            match &witness.word {
                Some(word) => {
                    let base = sys.invariant_interval_default().unwrap();
                    let cyl = sys.cylinder(word, &base).unwrap();
                    assert!(
                        cyl.dist(witness.value) <= result.membership_tol,
                        "witness cylinder strayed from the breakpoint"
                    );
                }
                None => {
                    let fixed = sys.maps().iter().any(|m| m.fixed_point() == witness.value);
                    assert!(witness.certified && fixed);
                }
            }
        }
    }

    #[test]
    fn scans_are_deterministic() {
        let template = tent(0.4, 0.1);
        let run = || {
            scan_regularity(
                &template,
                &Axis::Breakpoint { map: 0, index: 0 },
                &Axis::Translation { map: 0 },
                (0.0, 1.0),
                8,
                12,
                40,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn cells_that_break_the_parametrization_are_undetermined() {
        // Two breakpoints; scanning the first across the second makes the
        // breakpoint list non-increasing and the cell unbuildable.
        let map =
            PiecewiseLinearMap::new(vec![0.3, 0.6], vec![0.3, -0.3, 0.3], 0.1).unwrap();
        let template = Cplifs::new(vec![map]).unwrap();
        let result = scan_regularity(
            &template,
            &Axis::Breakpoint { map: 0, index: 0 },
            &Axis::Translation { map: 0 },
            (0.1, 0.9),
            8,
            6,
            30,
        )
        .unwrap();
        // Rows with center value above 0.6 collide with the second
        // breakpoint: centers 0.65, 0.75, 0.85 (rows 5..8).
        for i in 0..8 {
            for j in 0..8 {
                let expect_undetermined = i >= 5;
                assert_eq!(
                    result.flag(i, j) == CellFlag::Undetermined,
                    expect_undetermined,
                    "cell ({i}, {j})"
                );
            }
        }
        assert_eq!(result.undetermined_count, 24);
    }

    #[test]
    fn non_small_templates_scan_all_undetermined() {
        let a = PiecewiseLinearMap::affine(0.6, 0.0).unwrap();
        let b = PiecewiseLinearMap::affine(0.6, 0.3).unwrap();
        let template = Cplifs::new(vec![a, b]).unwrap();
        let result = scan_regularity(
            &template,
            &Axis::Translation { map: 0 },
            &Axis::Translation { map: 1 },
            (0.0, 1.0),
            8,
            3,
            10,
        )
        .unwrap();
        assert_eq!(result.undetermined_count, 64);
        assert_eq!(result.irregular_fraction, 0.0);
    }

    #[test]
    fn scan_rejects_bad_shapes() {
        let template = tent(0.4, 0.1);
        let b = Axis::Breakpoint { map: 0, index: 0 };
        let t = Axis::Translation { map: 0 };
        assert!(matches!(
            scan_regularity(&template, &b, &t, (0.0, 1.0), 7, 12, 40),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            scan_regularity(&template, &b, &b, (0.0, 1.0), 8, 12, 40),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            scan_regularity(&template, &b, &t, (1.0, 0.0), 8, 12, 40),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            scan_regularity(
                &template,
                &Axis::Breakpoint { map: 0, index: 3 },
                &t,
                (0.0, 1.0),
                8,
                12,
                40
            ),
            Err(Error::BadAxis(_))
        ));
    }
}
