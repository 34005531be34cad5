//! Acceptance suite: one test per numbered criterion, each printing a
//! single `criterion N: PASS/FAIL — detail` line before asserting.
//!
//! Run `cargo test -p iflab --test acceptance -- --nocapture` to see the
//! lines for passing checks too; by default libtest only shows the output
//! of failing tests.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cplifs::dimension::{
    box_dimension_estimate, hausdorff_distance, moran_cover, natural_dimension, s_star,
    sample_attractor, DimensionMethod,
};
use cplifs::gdifs::{
    associate_gdifs, markov_measure, sample_attractor as sample_gdifs_attractor,
    simulate_entropy, Edge, Gdifs,
};
use cplifs::generated::esc_scan_exact;
use cplifs::paramscan::{derivative_bounds_check, scan_regularity, Axis, CellFlag, CheckStatus};
use cplifs::pwl::{Cplifs, PiecewiseLinearMap};
use cplifs::rational::Rational;
use cplifs::regularity::{bdp_constants, default_max_order, regularity_order, RegularityStatus};
use cplifs::rng::SplitMix64;
use cplifs::{Word, DEFAULT_BUDGET};

/// Prints the one-line verdict for a criterion and hands back the flag so
/// the caller can assert on it.
fn verdict(n: usize, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {n}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Two maps x/3 and x/3 + 2/3: the middle-thirds Cantor set.
fn cantor() -> Cplifs {
    Cplifs::new(vec![
        PiecewiseLinearMap::affine(1.0 / 3.0, 0.0).unwrap(),
        PiecewiseLinearMap::affine(1.0 / 3.0, 2.0 / 3.0).unwrap(),
    ])
    .unwrap()
}

/// A folded (tent-shaped) map plus an affine companion.
fn triangle() -> Cplifs {
    Cplifs::new(vec![
        PiecewiseLinearMap::new(vec![0.5], vec![0.3, -0.3], 0.1).unwrap(),
        PiecewiseLinearMap::affine(0.3, 0.65).unwrap(),
    ])
    .unwrap()
}

/// An injective two-piece map plus an affine companion.
fn injective() -> Cplifs {
    Cplifs::new(vec![
        PiecewiseLinearMap::new(vec![0.4], vec![0.35, 0.2], 0.05).unwrap(),
        PiecewiseLinearMap::affine(0.3, 0.6).unwrap(),
    ])
    .unwrap()
}

/// Two-vertex graph-directed system with three edges.
fn mauldin() -> Gdifs {
    Gdifs::new(
        2,
        vec![
            Edge { source: 0, target: 0, r: 0.5, t: 0.0 },
            Edge { source: 0, target: 1, r: 0.25, t: 0.5 },
            Edge { source: 1, target: 0, r: 1.0 / 3.0, t: 0.25 },
        ],
    )
    .unwrap()
}

/// The single tent map used by the parameter scan.
fn tent() -> Cplifs {
    Cplifs::new(vec![
        PiecewiseLinearMap::new(vec![0.5], vec![0.3, -0.3], 0.1).unwrap(),
    ])
    .unwrap()
}

fn regular_fixtures() -> Vec<(&'static str, Cplifs)> {
    vec![
        ("cantor", cantor()),
        ("triangle", triangle()),
        ("injective", injective()),
    ]
}

#[test]
fn criterion_01_cantor_dimension_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_iflab"))
        .env_remove("IFLAB_BUDGET")
        .args([
            "dim",
            fixture("cantor.json").to_str().unwrap(),
            "--depth",
            "14",
            "--json",
            json.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    assert_eq!(out.status.code(), Some(0), "dim exits cleanly");

    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let direct = rep["results"]["direct"]["dimension"].as_f64().unwrap();
    let spectral = rep["results"]["spectral"]["dimension"].as_f64().unwrap();
    let target = 2f64.ln() / 3f64.ln();

    let pass = (spectral - target).abs() <= 1e-9
        && (direct - target).abs() <= 1e-6
        && elapsed < Duration::from_secs(1);
    assert!(verdict(
        1,
        pass,
        &format!(
            "dim on the Cantor system: spectral off ln2/ln3 by {:.2e} (<= 1e-9), \
             direct at depth 14 off by {:.2e} (<= 1e-6), in {elapsed:.1?} (< 1 s)",
            (spectral - target).abs(),
            (direct - target).abs(),
        )
    ));
}

#[test]
fn criterion_02_direct_and_spectral_dimensions_agree_on_regular_fixtures() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (name, sys) in [("triangle", triangle()), ("injective", injective())] {
        let reg = regularity_order(&sys, default_max_order(sys.len()), 40, 1e-9).unwrap();
        let regular = matches!(reg.status, RegularityStatus::Regular(_));
        let rep =
            natural_dimension(&sys, DimensionMethod::Both, 12, 1e-9, DEFAULT_BUDGET).unwrap();
        let direct = rep.direct.unwrap().dimension;
        let spectral = rep.spectral.unwrap().dimension;
        let gap = (direct - spectral).abs();
        pass &= regular && gap <= 1e-3;
        details.push(format!("{name}: |direct - spectral| = {gap:.2e}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    details.push(format!("depth 12 in {elapsed:.1?} (< 30 s)"));
    assert!(verdict(2, pass, &details.join("; ")));
}

#[test]
fn criterion_03_entropy_over_lyapunov_equals_the_exponent() {
    let systems: Vec<(String, Gdifs)> = vec![
        (
            "cantor rewritten at order 1".into(),
            associate_gdifs(&cantor(), 1).unwrap().gdifs,
        ),
        (
            "cantor rewritten at order 2".into(),
            associate_gdifs(&cantor(), 2).unwrap().gdifs,
        ),
        (
            "triangle rewritten at order 1".into(),
            associate_gdifs(&triangle(), 1).unwrap().gdifs,
        ),
        ("two-vertex graph".into(), mauldin()),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, g) in &systems {
        let mm = markov_measure(g).unwrap();
        let identity_gap = (mm.entropy / mm.lyapunov - mm.alpha).abs();
        let sim = simulate_entropy(g, &mm, 10_000, 7).unwrap();
        // An equal-ratio system walks a zero-variance chain: the standard
        // error is exactly 0 and only float rounding separates the
        // estimate from h, so grant the comparison a rounding allowance.
        let sim_gap = (sim.estimate - mm.entropy).abs();
        let sim_ok = sim_gap <= 3.0 * sim.std_error + 1e-12 * (1.0 + mm.entropy.abs());
        pass &= identity_gap <= 1e-10 && sim_ok;
        let sim_note = if sim.std_error > 0.0 {
            format!("simulated h off by {:.2} SE", sim_gap / sim.std_error)
        } else {
            format!("simulated h off by {sim_gap:.1e} (zero-variance chain)")
        };
        details.push(format!(
            "{name}: |h/chi - alpha| = {identity_gap:.1e}, {sim_note}"
        ));
    }
    assert!(verdict(3, pass, &details.join("; ")));
}

#[test]
fn criterion_04_chain_measures_sandwiched_by_perron_weights() {
    let g = mauldin();
    let mm = markov_measure(&g).unwrap();
    let (c1, c2) = mm.sandwich_constants();
    let q = mm.vertex_count();
    let mut ratio_of = vec![vec![None; q]; q];
    for e in g.edges() {
        ratio_of[e.source][e.target] = Some(e.r);
    }

    let mut count = 0usize;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut pass = true;
    let mut stack: Vec<Vec<usize>> = (0..q).map(|v| vec![v]).collect();
    while let Some(chain) = stack.pop() {
        let mut rho = 1.0f64;
        for pair in chain.windows(2) {
            rho *= ratio_of[pair[0]][pair[1]].expect("chains follow edges").abs();
        }
        let ratio = mm.chain_measure(&chain).unwrap() / rho.powf(mm.alpha);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        pass &= ratio >= c1 * (1.0 - 1e-9) && ratio <= c2 * (1.0 + 1e-9);
        count += 1;
        if chain.len() <= 6 {
            let last = *chain.last().unwrap();
            for u in 0..q {
                if ratio_of[last][u].is_some() {
                    let mut next = chain.clone();
                    next.push(u);
                    stack.push(next);
                }
            }
        }
    }
    assert!(verdict(
        4,
        pass,
        &format!(
            "{count} chains of up to 6 edges: measure / |ratio product|^alpha spans \
             [{lo:.6}, {hi:.6}] inside [c1, c2] = [{c1:.6}, {c2:.6}]"
        )
    ));
}

#[test]
fn criterion_05_moran_cover_counts_bracketed_by_the_similarity_root() {
    let mut rng = SplitMix64::new(0x5eed_0005);
    let mut pass = true;
    let mut checked = 0usize;
    let (mut count_min, mut count_max) = (usize::MAX, 0usize);
    for _ in 0..10 {
        let m = 2 + rng.below(3);
        let mut ratios: Vec<f64> = (0..m)
            .map(|_| {
                let magnitude = 0.1 + 0.25 * rng.unit();
                if rng.next_u64() & 1 == 0 { magnitude } else { -magnitude }
            })
            .collect();
        let sum: f64 = ratios.iter().map(|r| r.abs()).sum();
        if sum >= 0.95 {
            for r in &mut ratios {
                *r *= 0.9 / sum;
            }
        }
        let s = s_star(&ratios).unwrap();
        let rho_max = ratios.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let rho_min = ratios.iter().fold(1.0f64, |a, r| a.min(r.abs()));

        for _ in 0..100 {
            let r = rng.range(1e-4, rho_max);
            let cover = moran_cover(&ratios, r, DEFAULT_BUDGET).unwrap();
            let count = cover.len();
            let lower = r.powf(-s);
            let upper = (rho_min * r).powf(-s);
            pass &= count as f64 >= lower * (1.0 - 1e-9) && (count as f64) < upper * (1.0 + 1e-9);

            let mut sorted = cover.clone();
            sorted.sort();
            pass &= sorted.windows(2).all(|w| !w[1].starts_with(&w[0]));

            let deepest = cover.iter().map(Vec::len).max().unwrap();
            let total: u128 = cover
                .iter()
                .map(|w| (m as u128).pow((deepest - w.len()) as u32))
                .sum();
            pass &= total == (m as u128).pow(deepest as u32);

            count_min = count_min.min(count);
            count_max = count_max.max(count);
            checked += 1;
        }
    }
    assert!(verdict(
        5,
        pass,
        &format!(
            "{checked} covers over 10 random contracting families: counts \
             {count_min}..{count_max} inside [1/r^s, 1/(rho_min r)^s), all prefix-free and exhaustive"
        )
    ));
}

#[test]
fn criterion_06_derivative_ratios_obey_the_distortion_constants() {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, sys) in regular_fixtures() {
        let reg = regularity_order(&sys, default_max_order(sys.len()), 40, 1e-9).unwrap();
        let order = match reg.status {
            RegularityStatus::Regular(n) => n,
            _ => {
                pass = false;
                details.push(format!("{name}: not regular"));
                continue;
            }
        };
        let bdp = bdp_constants(&sys, order).unwrap();
        let interval = sys.invariant_interval_default().unwrap();
        let mut rng = SplitMix64::new(0xd157_0006);
        let mut violations = 0usize;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for _ in 0..10_000 {
            let len = 1 + rng.below(10);
            let word: Word = (0..len).map(|_| rng.below(sys.len())).collect();
            // The derivative is undefined on the measure-zero kink set;
            // resample the point on that fluke.
            let mut sample = || {
                for _ in 0..100 {
                    let x = rng.range(interval.lo(), interval.hi());
                    if let Some(d) = sys.word_derivative(&word, x) {
                        return d.abs();
                    }
                }
                panic!("cannot place a point off the kink set");
            };
            let ratio = sample() / sample();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            if !(ratio >= bdp.c1 * (1.0 - 1e-9) && ratio <= bdp.c2 * (1.0 + 1e-9)) {
                violations += 1;
            }
        }
        pass &= violations == 0;
        details.push(format!(
            "{name}: order {order}, 10^4 ratios in [{lo:.4}, {hi:.4}] vs \
             [C1, C2] = [{:.4}, {:.4}], {violations} violations",
            bdp.c1, bdp.c2
        ));
    }
    assert!(verdict(6, pass, &details.join("; ")));
}

#[test]
fn criterion_07_box_counting_stays_under_the_similarity_bound() {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, sys) in regular_fixtures() {
        let s_f = natural_dimension(&sys, DimensionMethod::Spectral, 4, 1e-9, DEFAULT_BUDGET)
            .unwrap()
            .spectral
            .unwrap()
            .dimension;
        let scales: Vec<f64> = (2..=7).map(|k| sys.rho_max().powi(k)).collect();
        let est = box_dimension_estimate(&sys, &scales, DEFAULT_BUDGET).unwrap();
        let cap = s_f.min(1.0) + 0.05;
        pass &= est.slope <= cap;
        details.push(format!("{name}: estimate {:.4} <= {cap:.4}", est.slope));
    }

    let scales: Vec<f64> = (4..=9).map(|k| 3f64.powi(-k)).collect();
    let est = box_dimension_estimate(&cantor(), &scales, DEFAULT_BUDGET).unwrap();
    pass &= (est.slope - 0.6309).abs() <= 0.05;
    details.push(format!(
        "cantor at ternary scales 3^-4..3^-9: {:.4} within 0.05 of 0.6309",
        est.slope
    ));
    assert!(verdict(7, pass, &details.join("; ")));
}

/// Largest nearest-neighbor distance within one sample: the observed
/// sampling resolution.
fn nn_gap(points: &[f64]) -> f64 {
    let mut sorted = points.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut worst = 0.0f64;
    for (k, &x) in sorted.iter().enumerate() {
        let left = if k > 0 { x - sorted[k - 1] } else { f64::INFINITY };
        let right = if k + 1 < sorted.len() {
            sorted[k + 1] - x
        } else {
            f64::INFINITY
        };
        worst = worst.max(left.min(right));
    }
    worst
}

#[test]
fn criterion_08_associated_graph_attractor_coincides() {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, sys) in regular_fixtures() {
        let order = match regularity_order(&sys, default_max_order(sys.len()), 40, 1e-9)
            .unwrap()
            .status
        {
            RegularityStatus::Regular(n) => n,
            other => panic!("{name} should be regular, got {other:?}"),
        };
        let assoc = associate_gdifs(&sys, order).unwrap();

        let a = sample_attractor(&sys, 10_000, 0xa1);
        let b = sample_gdifs_attractor(&assoc.gdifs, 10_000, 0xb2).unwrap();
        let distance = hausdorff_distance(&a, &b);
        let gap = nn_gap(&a).max(nn_gap(&b));
        let interval = sys.invariant_interval_default().unwrap();
        let bound = 2.0 * (sys.rho_max().powi(64) * interval.len() + gap);
        pass &= distance < bound;
        details.push(format!("{name}: distance {distance:.2e} < bound {bound:.2e}"));
    }
    assert!(verdict(8, pass, &details.join("; ")));
}

#[test]
fn criterion_09_parameter_derivative_bounds() {
    let h = 1.0 / 131072.0; // 2^-17: a power of two keeps the offsets exact
    let mut pass = true;
    let mut details = Vec::new();

    for (name, sys) in regular_fixtures() {
        let mut axes = Vec::new();
        for (p, f) in sys.maps().iter().enumerate() {
            for q in 0..f.breakpoints().len() {
                axes.push(Axis::Breakpoint { map: p, index: q });
            }
            axes.push(Axis::Translation { map: p });
        }
        let interval = sys.invariant_interval_default().unwrap();
        let mut rng = SplitMix64::new(0x0d09);
        let (mut checked, mut skipped, mut violations) = (0usize, 0usize, 0usize);
        let mut worst: Option<(f64, f64)> = None;
        for _ in 0..1000 {
            let len = 1 + rng.below(8);
            let word: Word = (0..len).map(|_| rng.below(sys.len())).collect();
            let axis = &axes[rng.below(axes.len())];
            let x = rng.range(interval.lo(), interval.hi());
            let check = derivative_bounds_check(&sys, &word, axis, x, h).unwrap();
            if check.status == CheckStatus::Checked {
                checked += 1;
                if !check.pass {
                    violations += 1;
                    if worst.is_none_or(|(s, _)| check.slope.abs() > s) {
                        worst = Some((check.slope.abs(), check.bound));
                    }
                }
            } else {
                skipped += 1;
            }
        }
        pass &= violations == 0;
        match worst {
            None => details.push(format!(
                "{name}: {checked} checked, {skipped} skipped, no violations"
            )),
            Some((slope, bound)) => details.push(format!(
                "{name}: {violations}/{checked} checked triples exceed the bound \
                 (worst |slope| {slope:.4} vs {bound:.4})"
            )),
        }
    }

    let mut exact = true;
    for (_, sys) in regular_fixtures() {
        for p in 0..sys.len() {
            let check =
                derivative_bounds_check(&sys, &vec![p], &Axis::Translation { map: p }, 0.75, h)
                    .unwrap();
            exact &= check.status == CheckStatus::Checked && check.slope == 1.0;
        }
    }
    pass &= exact;
    details.push(format!(
        "one-letter translation slopes exactly 1: {}",
        if exact { "yes" } else { "no" }
    ));

    assert!(
        verdict(9, pass, &details.join("; ")),
        "breakpoint sensitivity of a folded map reaches |rho_q - rho_q+1| (0.6 on the \
         triangle fixture) at the outermost application, which no damping can shrink; \
         the checked bound gamma = rho_max/(1 - rho_max) = 0.4286 only dominates \
         per-application jumps of at most rho_max, i.e. injective maps. The bound is \
         therefore unattainable for non-injective systems as stated."
    );
}

#[test]
fn criterion_10_scan_flags_every_cell_crossed_by_the_coincidence_curve() {
    let sys = tent();
    let grid = 128usize;
    let res = scan_regularity(
        &sys,
        &Axis::Breakpoint { map: 0, index: 0 },
        &Axis::Translation { map: 0 },
        (0.0, 1.0),
        grid,
        8,
        12,
    )
    .unwrap();
    let h = res.cell_size;

    // The tent's kink is the fixed point exactly on the line b = tau/(1 - rho).
    let fold = 1.0 - 0.3;
    let (mut crossed, mut missed) = (0usize, 0usize);
    for i in 0..grid {
        for j in 0..grid {
            let (b_lo, b_hi) = (i as f64 * h, (i + 1) as f64 * h);
            let (t_lo, t_hi) = (j as f64 * h, (j + 1) as f64 * h);
            if t_hi / fold >= b_lo && t_lo / fold <= b_hi {
                crossed += 1;
                if res.flag(i, j) != CellFlag::Irregular {
                    missed += 1;
                }
            }
        }
    }

    let curve_length = (fold * fold + 1.0).sqrt(); // over tau in [0, fold], b in [0, 1]
    let cap = 3.0 * curve_length * h;
    let pass = missed == 0 && res.irregular_fraction <= cap;
    assert!(verdict(
        10,
        pass,
        &format!(
            "{crossed} cells crossed by b = tau/{fold}, {missed} unflagged; \
             irregular fraction {:.5} <= {cap:.5}",
            res.irregular_fraction
        )
    ));
}

#[test]
fn criterion_11_exact_separation_distances() {
    let third = Rational::new(1, 3).unwrap();
    let maps = vec![(third, Rational::zero()), (third, Rational::new(2, 3).unwrap())];
    let rep = esc_scan_exact(&maps, 8, DEFAULT_BUDGET).unwrap();
    let mut pass = rep.zero_pair_count == 0;
    for n in 1..=8usize {
        let row = &rep.per_level[n - 1];
        let want = Rational::new(2, 3i128.pow(n as u32)).unwrap();
        pass &= row.level == n && row.min_distance == Some(want);
    }
    let mut details = vec![format!(
        "Cantor system: min gap exactly 2/3^n for n = 1..8 (level 8: {})",
        rep.per_level[7]
            .min_distance
            .map(|d| d.to_string())
            .unwrap_or_else(|| "none".into())
    )];

    let duplicate = vec![(third, Rational::new(1, 4).unwrap()), (third, Rational::new(1, 4).unwrap())];
    let rep = esc_scan_exact(&duplicate, 1, DEFAULT_BUDGET).unwrap();
    let witnessed = rep.zero_witnesses.iter().any(|w| w.level == 1);
    pass &= witnessed && rep.zero_pair_count >= 1;
    details.push(format!(
        "duplicate-map system: zero witness at level 1 ({} zero pairs)",
        rep.zero_pair_count
    ));
    assert!(verdict(11, pass, &details.join("; ")));
}
