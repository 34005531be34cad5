//! Graph-directed systems of similarities: pressure, natural exponent,
//! Markov measures, and the rewriting of regular piecewise-linear systems.
//!
//! A graph-directed system lives on a digraph: each edge `v -> u` carries a
//! similarity, and the attractor parts satisfy
//! `K_v = union over edges v -> u of S_e(K_u)`. The pressure matrix at
//! exponent `s` has entries `sum over edges v -> u of |r_e|^s`; its Perron
//! root decreases strictly in `s`, and the natural exponent is the `s`
//! where the root crosses one. The left and right Perron vectors at that
//! exponent define a Markov measure on vertex chains whose entropy over
//! Lyapunov exponent reproduces the natural exponent — a strong internal
//! consistency check, verified here to ten digits.
//!
//! A piecewise-linear system that is regular of order `N` rewrites exactly
//! into this shape: vertices are the level-`N` words, and the composition
//! of a word over a cylinder never meets a breakpoint, so it acts as one
//! similarity. [`associate_gdifs`] performs that rewriting and records
//! which linearity piece every composition step used.

use crate::math::FloatExt;
use crate::matrix::{perron, SquareMatrix};
use crate::pwl::Cplifs;
use crate::rng::SplitMix64;
use crate::{Error, Result, Word};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Radius residual above which the exponent solver refuses to answer.
const RADIUS_RESIDUAL_TOL: f64 = 1e-11;

/// Slack for the degeneracy test at exponent zero.
const DEGENERATE_TOL: f64 = 1e-12;

/// Bracket width for the bisection stage of the exponent solver.
const ALPHA_BISECT_TOL: f64 = 1e-9;

/// Composition depth for attractor sampling.
const SAMPLE_DEPTH: usize = 64;

/// One edge of a graph-directed system: a similarity applied to the
/// target's attractor part contributes to the source's part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Source vertex (zero-based).
    pub source: usize,
    /// Target vertex (zero-based).
    pub target: usize,
    /// Similarity ratio, `0 < |r| < 1`.
    pub r: f64,
    /// Similarity translation.
    pub t: f64,
}

impl Edge {
    /// Fixed point of the edge similarity.
    pub fn fixed_point(&self) -> f64 {
        self.t / (1.0 - self.r)
    }
}

/// A graph-directed system of similarities on a finite vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct Gdifs {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl Gdifs {
    /// Builds a system, checking indices, ratio bounds, and finiteness.
    /// Strong connectivity is a separate concern: see [`validate_gdifs`].
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Invalid("vertex set must be nonempty".into()));
        }
        if edges.is_empty() {
            return Err(Error::Invalid("edge set must be nonempty".into()));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.source >= vertex_count || e.target >= vertex_count {
                return Err(Error::Invalid(format!(
                    "edge {i} touches vertex {} outside 0..{vertex_count}",
                    e.source.max(e.target)
                )));
            }
            if e.r == 0.0 || !(e.r.abs() < 1.0) {
                return Err(Error::BadRatio(format!(
                    "edge {i} has ratio {}; ratios must be nonzero with modulus below one",
                    e.r
                )));
            }
            if !e.t.is_finite() {
                return Err(Error::Invalid(format!("edge {i} has translation {}", e.t)));
            }
        }
        Ok(Gdifs {
            vertex_count,
            edges,
        })
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// All edges, in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges leaving `v`, with their indices into [`Self::edges`].
    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.source == v)
    }

    /// Largest ratio modulus over all edges.
    pub fn rho_max(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.r.abs())
            .fold(0.0f64, |a, b| a.max(b))
    }
}

/// Checks that every vertex reaches every other along edges.
///
/// All spectral machinery assumes this; without it the pressure matrix is
/// reducible and the Perron vectors need not be positive.
pub fn validate_gdifs(g: &Gdifs) -> Result<()> {
    if !adjacency(g).is_irreducible() {
        return Err(Error::NotStronglyConnected);
    }
    Ok(())
}

fn adjacency(g: &Gdifs) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(g.vertex_count);
    for e in &g.edges {
        m.add_to(e.source, e.target, 1.0);
    }
    m
}

/// Pressure matrix at exponent `s`: entry `(v, u)` sums `|r_e|^s` over the
/// edges `v -> u`.
fn pressure_matrix(g: &Gdifs, s: f64) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(g.vertex_count);
    for e in &g.edges {
        m.add_to(e.source, e.target, e.r.abs().powf(s));
    }
    m
}

/// Perron root of the pressure matrix at exponent `s`.
///
/// Strictly decreasing in `s`; fails with [`Error::Reducible`] when the
/// graph is not strongly connected.
pub fn spectral_radius(g: &Gdifs, s: f64) -> Result<f64> {
    Ok(perron(&pressure_matrix(g, s))?.radius)
}

/// The exponent where the pressure root crosses one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalExponent {
    /// The crossing exponent; zero in the degenerate case.
    pub alpha: f64,
    /// Pressure root at `alpha` (one up to the solver residual, or the
    /// root at zero in the degenerate case).
    pub radius: f64,
    /// True when the root is already at most one at exponent zero, so the
    /// crossing sits at the boundary.
    pub degenerate: bool,
}

/// Solves `perron root of pressure(s) = 1` for `s`.
///
/// Brackets the root by doubling, bisects to width `1e-9`, then polishes
/// with secant steps on the logarithm of the root until the residual is
/// below a picotolerance; the polish is what lets entropy-based identities
/// hold to ten digits downstream. Systems whose root at exponent zero is
/// already at most one (a single cycle, say) get `alpha = 0` flagged
/// degenerate.
pub fn natural_exponent(g: &Gdifs) -> Result<NaturalExponent> {
    let radius_at = |s: f64| spectral_radius(g, s);
    let r0 = radius_at(0.0)?;
    if r0 <= 1.0 + DEGENERATE_TOL {
        return Ok(NaturalExponent {
            alpha: 0.0,
            radius: r0,
            degenerate: true,
        });
    }

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut doublings = 0;
    while radius_at(hi)? > 1.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::NonConvergence(
                "pressure root never crossed one while doubling the exponent".into(),
            ));
        }
    }
    while hi - lo > ALPHA_BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if radius_at(mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Secant polish on ln(root): the bisection bracket alone leaves a
    // residual near 1e-9, far too coarse for the downstream identities.
    let mut s0 = lo;
    let mut s1 = hi;
    let mut g0 = radius_at(s0)?.ln();
    let mut g1 = radius_at(s1)?.ln();
    for _ in 0..64 {
        if g1.abs() <= 1e-14 || g1 == g0 {
            break;
        }
        let s2 = s1 - g1 * (s1 - s0) / (g1 - g0);
        if !s2.is_finite() {
            break;
        }
        s0 = s1;
        g0 = g1;
        s1 = s2;
        g1 = radius_at(s1)?.ln();
    }
    let radius = radius_at(s1)?;
    if (radius - 1.0).abs() > RADIUS_RESIDUAL_TOL {
        return Err(Error::NonConvergence(format!(
            "exponent solver stalled with pressure root {radius}"
        )));
    }
    Ok(NaturalExponent {
        alpha: s1,
        radius,
        degenerate: false,
    })
}

/// The Markov measure at the natural exponent, with every derived object
/// the downstream identities need.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    /// Natural exponent the measure was built at.
    pub alpha: f64,
    /// Pressure root at `alpha`.
    pub radius: f64,
    /// Whether `alpha` is the degenerate boundary value zero.
    pub degenerate: bool,
    /// Right Perron vector, normalized to total mass one.
    pub right: Vec<f64>,
    /// Left Perron vector, scaled so the stationary vector sums to one.
    pub left: Vec<f64>,
    /// Pressure matrix entries at `alpha`, row-major.
    pub weights: Vec<f64>,
    /// Row-stochastic vertex transition matrix, row-major.
    pub transition: Vec<f64>,
    /// Stationary vertex distribution (left times right, entrywise).
    pub stationary: Vec<f64>,
    /// Probability of each edge conditional on standing at its source,
    /// aligned with the system's edge list.
    pub edge_probability: Vec<f64>,
    /// Entropy of the edge chain.
    pub entropy: f64,
    /// Lyapunov exponent (mean of `-ln |r|` over the edge chain).
    pub lyapunov: f64,
}

impl MarkovMeasure {
    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.right.len()
    }

    /// Transition probability from `v` to `u`.
    pub fn transition(&self, v: usize, u: usize) -> f64 {
        self.transition[v * self.vertex_count() + u]
    }

    /// Pressure weight `a(v, u)` at the natural exponent.
    pub fn weight(&self, v: usize, u: usize) -> f64 {
        self.weights[v * self.vertex_count() + u]
    }

    /// Measure of the cylinder of a vertex chain `v^1 ... v^n`:
    /// `left[v1] * prod a(v^i, v^{i+1}) * right[vn] / radius^(n-1)`.
    pub fn chain_measure(&self, chain: &[usize]) -> Result<f64> {
        let q = self.vertex_count();
        if chain.is_empty() {
            return Err(Error::Invalid("chain must be nonempty".into()));
        }
        if let Some(&v) = chain.iter().find(|&&v| v >= q) {
            return Err(Error::Invalid(format!(
                "chain vertex {v} outside 0..{q}"
            )));
        }
        let mut mu = self.left[chain[0]];
        for pair in chain.windows(2) {
            mu *= self.weight(pair[0], pair[1]) / self.radius;
        }
        Ok(mu * self.right[*chain.last().expect("nonempty")])
    }

    /// Constants `(c1, c2)` sandwiching chain measures: the measure of any
    /// chain cylinder lies between `c1` and `c2` times the product of its
    /// pressure weights, up to the solver's root residual.
    pub fn sandwich_constants(&self) -> (f64, f64) {
        let min = |v: &[f64]| v.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let max = |v: &[f64]| v.iter().fold(0.0f64, |a, &b| a.max(b));
        (
            min(&self.left) * min(&self.right),
            max(&self.left) * max(&self.right),
        )
    }
}

/// Builds the Markov measure of a strongly connected system at its natural
/// exponent.
///
/// The transition matrix is `P(v, u) = a(v, u) right[u] / (radius *
/// right[v])`, which is row-stochastic to machine precision because the
/// computed root and vector come from the same iteration. The entropy and
/// Lyapunov exponent are computed on the edge chain (each edge drawn with
/// probability `|r_e|^alpha right[target] / (radius * right[source])`), so
/// parallel edges are handled exactly; for single-edge pairs this reduces
/// to the usual vertex-chain formulas, and `entropy / lyapunov = alpha` up
/// to the root residual.
pub fn markov_measure(g: &Gdifs) -> Result<MarkovMeasure> {
    let ne = natural_exponent(g)?;
    let q = g.vertex_count();
    let c = pressure_matrix(g, ne.alpha);
    let p = perron(&c)?;
    let radius = if ne.degenerate { ne.radius } else { p.radius };

    // Normalize: right to unit mass, left against right.
    let mut right = p.right;
    let mass: f64 = right.iter().sum();
    for v in right.iter_mut() {
        *v /= mass;
    }
    let mut left = p.left;
    let cross: f64 = left.iter().zip(&right).map(|(u, v)| u * v).sum();
    for u in left.iter_mut() {
        *u /= cross;
    }

    let mut weights = vec![0.0; q * q];
    let mut transition = vec![0.0; q * q];
    for v in 0..q {
        for u in 0..q {
            let a = c.get(v, u);
            weights[v * q + u] = a;
            transition[v * q + u] = a * right[u] / (radius * right[v]);
        }
    }
    let stationary: Vec<f64> = left.iter().zip(&right).map(|(u, v)| u * v).collect();

    let mut edge_probability = vec![0.0; g.edges().len()];
    let mut entropy = 0.0;
    let mut lyapunov = 0.0;
    for (i, e) in g.edges().iter().enumerate() {
        let p_edge = e.r.abs().powf(ne.alpha) * right[e.target] / (radius * right[e.source]);
        edge_probability[i] = p_edge;
        entropy -= stationary[e.source] * p_edge * p_edge.ln();
        lyapunov -= stationary[e.source] * p_edge * e.r.abs().ln();
    }

    Ok(MarkovMeasure {
        alpha: ne.alpha,
        radius,
        degenerate: ne.degenerate,
        right,
        left,
        weights,
        transition,
        stationary,
        edge_probability,
        entropy,
        lyapunov,
    })
}

/// A Monte-Carlo entropy estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    /// Mean of `-ln(edge probability)` along the simulated chain.
    pub estimate: f64,
    /// Standard error of that mean (sample standard deviation over the
    /// square root of the step count).
    pub std_error: f64,
    /// Number of simulated steps.
    pub steps: usize,
}

/// Estimates the chain entropy by simulating the edge chain.
///
/// Starts from the stationary distribution and draws `steps` edges from
/// the per-vertex edge probabilities; the estimate is the empirical mean
/// of the per-step information content, which concentrates on the measure
/// entropy. Deterministic for a fixed seed.
pub fn simulate_entropy(
    g: &Gdifs,
    mm: &MarkovMeasure,
    steps: usize,
    seed: u64,
) -> Result<EntropyEstimate> {
    if steps == 0 {
        return Err(Error::Invalid("simulation needs at least one step".into()));
    }
    let q = g.vertex_count();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); q];
    for (i, e) in g.edges().iter().enumerate() {
        out[e.source].push(i);
    }
    if out.iter().any(|o| o.is_empty()) {
        return Err(Error::NotStronglyConnected);
    }

    let mut rng = SplitMix64::new(seed);
    let mut v = draw(&mut rng, &mm.stationary, |&p| p);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..steps {
        let pick = {
            let edges = &out[v];
            let idx = draw(&mut rng, edges, |&i| mm.edge_probability[i]);
            edges[idx]
        };
        let info = -mm.edge_probability[pick].ln();
        sum += info;
        sum_sq += info * info;
        v = g.edges()[pick].target;
    }
    let n = steps as f64;
    let mean = sum / n;
    let variance = (sum_sq / n - mean * mean).max(0.0);
    let std_error = if steps > 1 {
        (variance * n / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(EntropyEstimate {
        estimate: mean,
        std_error,
        steps,
    })
}

/// Draws an index proportional to `weight(item)`; the final index absorbs
/// any rounding slack.
fn draw<T>(rng: &mut SplitMix64, items: &[T], weight: impl Fn(&T) -> f64) -> usize {
    let total: f64 = items.iter().map(&weight).sum();
    let mut u = rng.unit() * total;
    for (i, item) in items.iter().enumerate() {
        u -= weight(item);
        if u <= 0.0 {
            return i;
        }
    }
    items.len() - 1
}

/// Samples points of the attractor parts by backward iteration.
///
/// Each sample walks [`SAMPLE_DEPTH`] uniformly random out-edges from a
/// uniformly random start vertex, composes the edge similarities, and
/// applies the composition to the last edge map's fixed point. The result
/// lies within `rho_max^depth` of the start vertex's attractor part.
pub fn sample_attractor(g: &Gdifs, count: usize, seed: u64) -> Result<Vec<f64>> {
    let q = g.vertex_count();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); q];
    for (i, e) in g.edges().iter().enumerate() {
        out[e.source].push(i);
    }
    if out.iter().any(|o| o.is_empty()) {
        return Err(Error::NotStronglyConnected);
    }
    let mut rng = SplitMix64::new(seed);
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = rng.below(q);
        let mut r_acc = 1.0;
        let mut t_acc = 0.0;
        let mut last = 0usize;
        for _ in 0..SAMPLE_DEPTH {
            let choices = &out[v];
            last = choices[rng.below(choices.len())];
            let e = &g.edges()[last];
            t_acc += r_acc * e.t;
            r_acc *= e.r;
            v = e.target;
        }
        points.push(r_acc * g.edges()[last].fixed_point() + t_acc);
    }
    Ok(points)
}

/// The rewriting of a regular piecewise-linear system as a graph-directed
/// system, with the bookkeeping connecting the two.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociatedSystem {
    /// The graph-directed system; vertex `i` is `vertices[i]`.
    pub gdifs: Gdifs,
    /// Level-`order` words in lexicographic order.
    pub vertices: Vec<Word>,
    /// Per edge, the `(map, piece)` pairs used at every composition step,
    /// outermost first — the letters of the generated self-similar system.
    pub psi: Vec<Vec<(usize, usize)>>,
}

/// Rewrites a system regular of order `order` as a graph-directed system.
///
/// Vertices are the level-`order` words; for every ordered pair `(v, u)`
/// one edge carries the composition of `v`'s maps over the cylinder of
/// `u`, evaluated piece by piece from the inside out. Regularity
/// guarantees each intermediate interval stays clear of every breakpoint;
/// if one does meet a breakpoint the system was not regular at this order
/// and the rewriting fails with [`Error::NotRegular`].
pub fn associate_gdifs(sys: &Cplifs, order: usize) -> Result<AssociatedSystem> {
    if order == 0 {
        return Err(Error::Invalid("rewriting needs an order of at least one".into()));
    }
    let m = sys.len();
    let q = m
        .checked_pow(order as u32)
        .ok_or_else(|| Error::BudgetExceeded("vertex count overflows".into()))?;
    let edge_count = q
        .checked_mul(q)
        .filter(|&e| e <= crate::DEFAULT_BUDGET)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!(
                "{q} vertices give {q}^2 edges, over the budget {}",
                crate::DEFAULT_BUDGET
            ))
        })?;
    let interval = sys.invariant_interval_default()?;

    let mut vertices: Vec<Word> = Vec::with_capacity(q);
    let mut word = vec![0usize; order];
    loop {
        vertices.push(word.clone());
        // Next word in lexicographic order.
        let mut pos = order;
        while pos > 0 {
            pos -= 1;
            word[pos] += 1;
            if word[pos] < m {
                break;
            }
            word[pos] = 0;
        }
        if word.iter().all(|&l| l == 0) {
            break;
        }
    }

    let cylinders: Vec<_> = vertices
        .iter()
        .map(|u| sys.cylinder(u, &interval))
        .collect::<Result<Vec<_>>>()?;

    let mut edges = Vec::with_capacity(edge_count);
    let mut psi = Vec::with_capacity(edge_count);
    for (vi, v) in vertices.iter().enumerate() {
        for (ui, base) in cylinders.iter().enumerate() {
            let mut k = *base;
            let mut r_acc = 1.0;
            let mut t_acc = 0.0;
            let mut steps = vec![(0usize, 0usize); order];
            for p in (0..order).rev() {
                let f = &sys.maps()[v[p]];
                if let Some(&b) = f
                    .breakpoints()
                    .iter()
                    .find(|&&b| k.lo() <= b && b <= k.hi())
                {
                    return Err(Error::NotRegular(format!(
                        "interval [{}, {}] under word {:?} over cylinder {:?} meets \
                         breakpoint {b} of map {}",
                        k.lo(),
                        k.hi(),
                        &v[p..],
                        vertices[ui],
                        v[p] + 1
                    )));
                }
                let piece = f.piece_index(k.lo());
                let a = f.pieces()[piece];
                steps[p] = (v[p], piece);
                // Compose: new map = a after the accumulated one.
                t_acc = a.r * t_acc + a.t;
                r_acc *= a.r;
                let (y0, y1) = (a.eval(k.lo()), a.eval(k.hi()));
                k = crate::interval::Interval::new(y0.minf(y1), y0.maxf(y1))?;
            }
            edges.push(Edge {
                source: vi,
                target: ui,
                r: r_acc,
                t: t_acc,
            });
            psi.push(steps);
        }
    }

    Ok(AssociatedSystem {
        gdifs: Gdifs::new(q, edges)?,
        vertices,
        psi,
    })
}
