//! Spectral comparison of stationary strategies: reduced matrices, Perron
//! roots, λ2 ordering, one-row mixing scans, genericity diagnostics, and
//! selection of the spectrally optimal pure stationary strategy.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Perron};
use crate::mdp::{Mdp, Objective};
use crate::strategy::{
    enumerate_pure_stationary, induced_matrix, StationaryStrategy, TransitionMatrix,
    DEFAULT_STRATEGY_CAP,
};

/// Minimum pairwise λ2 separation for declaring an instance generic.
pub const DEFAULT_GAP_TOL: f64 = 1e-9;

/// Transition matrix restricted to non-target states. Rows of states that
/// cannot be reached from the first non-target state are zeroed, so the
/// Perron root reflects only the dynamics the chain can actually visit.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    pub matrix: DMatrix<f64>,
    pub states: Vec<String>,
    pub zeroed_rows: Vec<usize>,
    /// Some row leaks mass to the target (strict substochasticity observed).
    pub substochastic_strict: bool,
}

impl ReducedMatrix {
    /// Wraps a raw nonnegative matrix as-is (no zeroing), for inputs that
    /// are already reduced.
    pub fn from_matrix(matrix: DMatrix<f64>) -> ReducedMatrix {
        let states = (1..=matrix.nrows()).map(|i| format!("r{i}")).collect();
        let substochastic_strict = matrix
            .row_iter()
            .any(|row| row.iter().sum::<f64>() < 1.0 - 1e-12);
        ReducedMatrix {
            matrix,
            states,
            zeroed_rows: Vec::new(),
            substochastic_strict,
        }
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Drops the target row and column, preserving state order, and zeroes the
/// rows of non-target states unreachable from the first non-target state.
pub fn reduced_matrix(tm: &TransitionMatrix) -> ReducedMatrix {
    let n = tm.order();
    let keep: Vec<usize> = (0..n).filter(|&s| s != tm.target).collect();

    let mut reachable = vec![false; n];
    reachable[keep[0]] = true;
    let mut stack = vec![keep[0]];
    while let Some(s) = stack.pop() {
        for z in 0..n {
            if z != tm.target && !reachable[z] && tm.matrix[(s, z)] > 0.0 {
                reachable[z] = true;
                stack.push(z);
            }
        }
    }

    let m = keep.len();
    let mut matrix = DMatrix::zeros(m, m);
    let mut zeroed_rows = Vec::new();
    for (i, &s) in keep.iter().enumerate() {
        if !reachable[s] {
            zeroed_rows.push(i);
            continue;
        }
        for (j, &z) in keep.iter().enumerate() {
            matrix[(i, j)] = tm.matrix[(s, z)];
        }
    }
    let substochastic_strict = (0..m).any(|i| {
        !zeroed_rows.contains(&i) && matrix.row(i).iter().sum::<f64>() < 1.0 - 1e-12
    });

    ReducedMatrix {
        matrix,
        states: keep.iter().map(|&s| tm.states[s].clone()).collect(),
        zeroed_rows,
        substochastic_strict,
    }
}

/// Largest eigenvalue of a nonnegative matrix, by power iteration
/// cross-checked against the QR spectrum; the Perron vector comes along.
pub fn perron_root(m: &ReducedMatrix) -> Result<Perron> {
    linalg::perron_root(&m.matrix)
}

/// Second-largest-modulus eigenvalue of the strategy's full matrix, DEFINED
/// as the Perron root of the reduced matrix; under positivity the two
/// descriptions must agree and the disagreement is an error.
pub fn lambda2(mdp: &Mdp, sigma: &StationaryStrategy) -> Result<f64> {
    Ok(lambda2_checked(mdp, sigma, mdp.validate().positivity)?.0)
}

fn lambda2_checked(
    mdp: &Mdp,
    sigma: &StationaryStrategy,
    positivity: bool,
) -> Result<(f64, Vec<Complex64>, Option<f64>)> {
    let tm = induced_matrix(mdp, sigma);
    let root = perron_root(&reduced_matrix(&tm))?.root;
    let spectrum = linalg::eigenvalues(&tm.matrix)?;
    let cross = if positivity {
        let qr = spectrum[1].norm();
        let gap = (qr - root).abs();
        if gap > 1e-8 {
            return Err(Error::SpectralRouteMismatch { power: root, qr });
        }
        Some(gap)
    } else {
        None
    };
    Ok((root, spectrum, cross))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralOrdering {
    First,
    Second,
    Tie,
}

/// Predicts the overtaking direction from λ2 values: smaller λ2 wins under
/// Reach, larger under Safety; Tie within gap_tol.
pub fn spectral_compare(
    mdp: &Mdp,
    sigma: &StationaryStrategy,
    sigma2: &StationaryStrategy,
    gap_tol: f64,
) -> Result<SpectralOrdering> {
    let l1 = lambda2(mdp, sigma)?;
    let l2 = lambda2(mdp, sigma2)?;
    let (better, worse) = match mdp.objective() {
        Objective::Reach => (l1 < l2 - gap_tol, l2 < l1 - gap_tol),
        Objective::Safety => (l1 > l2 + gap_tol, l2 > l1 + gap_tol),
    };
    Ok(if better {
        SpectralOrdering::First
    } else if worse {
        SpectralOrdering::Second
    } else {
        SpectralOrdering::Tie
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategySpectrum {
    pub index: usize,
    pub profile: String,
    pub lambda2: f64,
    pub full_spectrum: Vec<Complex64>,
    /// |Perron(A′) − |λ2(A)|| when positivity allowed the cross-check.
    pub cross_check_gap: Option<f64>,
    /// Distance to the nearest other strategy's λ2 (+∞ if alone).
    pub gap_to_nearest: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub rows: Vec<StrategySpectrum>,
    pub min_gap: f64,
    pub generic: bool,
    pub selected: usize,
}

impl SpectralReport {
    /// One row per pure strategy plus a trailing summary row naming the
    /// selected strategy.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy_index,action_profile,lambda2,generic_gap\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e}\n",
                row.index, row.profile, row.lambda2, row.gap_to_nearest
            ));
        }
        out.push_str(&format!(
            "selected,{},{},generic={}\n",
            self.selected, self.rows[self.selected].profile, self.generic
        ));
        out
    }

    /// Parses what to_csv emits. Spectra and cross-checks are not carried by
    /// the CSV and come back empty.
    pub fn from_csv(text: &str) -> Result<SpectralReport> {
        let bad = |line: usize, what: &str| Error::Parse {
            context: format!("spectral csv line {line}"),
            detail: what.to_string(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "strategy_index,action_profile,lambda2,generic_gap")) => {}
            _ => return Err(bad(1, "missing header")),
        }
        let mut rows = Vec::new();
        let mut summary = None;
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad(i + 1, "expected 4 fields"));
            }
            if fields[0] == "selected" {
                let index: usize = fields[1].parse().map_err(|_| bad(i + 1, "bad index"))?;
                let generic = match fields[3] {
                    "generic=true" => true,
                    "generic=false" => false,
                    _ => return Err(bad(i + 1, "bad generic flag")),
                };
                summary = Some((index, generic));
                continue;
            }
            rows.push(StrategySpectrum {
                index: fields[0].parse().map_err(|_| bad(i + 1, "bad index"))?,
                profile: fields[1].to_string(),
                lambda2: fields[2].parse().map_err(|_| bad(i + 1, "bad lambda2"))?,
                full_spectrum: Vec::new(),
                cross_check_gap: None,
                gap_to_nearest: fields[3].parse().map_err(|_| bad(i + 1, "bad gap"))?,
            });
        }
        let (selected, generic) = summary.ok_or_else(|| Error::Parse {
            context: "spectral csv".into(),
            detail: "missing selected summary row".into(),
        })?;
        let min_gap = rows
            .iter()
            .map(|r| r.gap_to_nearest)
            .fold(f64::INFINITY, f64::min);
        Ok(SpectralReport {
            rows,
            min_gap,
            generic,
            selected,
        })
    }
}

fn report_with_strategies(
    mdp: &Mdp,
    gap_tol: f64,
) -> Result<(Vec<StationaryStrategy>, SpectralReport)> {
    let positivity = mdp.validate().positivity;
    let strategies = enumerate_pure_stationary(mdp, DEFAULT_STRATEGY_CAP)?;
    let mut rows = Vec::with_capacity(strategies.len());
    for (index, sigma) in strategies.iter().enumerate() {
        let (lambda2, full_spectrum, cross_check_gap) = lambda2_checked(mdp, sigma, positivity)?;
        rows.push(StrategySpectrum {
            index,
            profile: sigma.profile_string(mdp),
            lambda2,
            full_spectrum,
            cross_check_gap,
            gap_to_nearest: f64::INFINITY,
        });
    }
    for i in 0..rows.len() {
        for j in 0..rows.len() {
            if i != j {
                let gap = (rows[i].lambda2 - rows[j].lambda2).abs();
                if gap < rows[i].gap_to_nearest {
                    rows[i].gap_to_nearest = gap;
                }
            }
        }
    }
    let min_gap = rows
        .iter()
        .map(|r| r.gap_to_nearest)
        .fold(f64::INFINITY, f64::min);
    let generic = min_gap > gap_tol;
    let mut selected = 0;
    for (i, row) in rows.iter().enumerate() {
        let better = match mdp.objective() {
            Objective::Reach => row.lambda2 < rows[selected].lambda2,
            Objective::Safety => row.lambda2 > rows[selected].lambda2,
        };
        if better {
            selected = i;
        }
    }
    Ok((
        strategies,
        SpectralReport {
            rows,
            min_gap,
            generic,
            selected,
        },
    ))
}

/// Full per-strategy λ2 report with pairwise gaps; generic iff the smallest
/// gap clears gap_tol.
pub fn genericity_check(mdp: &Mdp, gap_tol: f64) -> Result<SpectralReport> {
    Ok(report_with_strategies(mdp, gap_tol)?.1)
}

/// Pure stationary strategy with the smallest λ2 (largest under Safety).
/// Non-generic instances still select deterministically (lowest index) but
/// the report says so.
pub fn best_pure_stationary(
    mdp: &Mdp,
    gap_tol: f64,
) -> Result<(StationaryStrategy, SpectralReport)> {
    let (strategies, report) = report_with_strategies(mdp, gap_tol)?;
    Ok((strategies[report.selected].clone(), report))
}

/// λ1 along the segment (1−α)·A + α·B for matrices equal outside one row,
/// where Perron monotonicity applies row-wise. Strictly positive inputs
/// differing in two or more rows are outside the theorem and rejected.
pub fn mix_one_row_scan(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    grid: usize,
) -> Result<Vec<(f64, f64)>> {
    if a.nrows() != a.ncols() || a.shape() != b.shape() {
        return Err(Error::Domain("expected square matrices of equal size".into()));
    }
    if grid < 3 {
        return Err(Error::Domain("mixing grid needs at least 3 points".into()));
    }
    if a.iter().any(|&v| v <= 0.0) || b.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain("mixing scan requires strictly positive matrices".into()));
    }
    let differing: Vec<usize> = (0..a.nrows())
        .filter(|&r| (0..a.ncols()).any(|c| a[(r, c)] != b[(r, c)]))
        .collect();
    if differing.len() > 1 {
        return Err(Error::MixRowsDiffer {
            rows: differing.len(),
        });
    }

    let mut out = Vec::with_capacity(grid);
    for k in 0..grid {
        let alpha = k as f64 / (grid - 1) as f64;
        let m = a * (1.0 - alpha) + b * alpha;
        out.push((alpha, linalg::perron_root(&m)?.root));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example1(objective: Objective) -> Mdp {
        Mdp::build(
            &["x", "y", "z", "s*"],
            "s*",
            objective,
            &[
                ("x", "a", &[("y", 0.89), ("s*", 0.11)]),
                ("x", "b", &[("z", 0.5), ("s*", 0.5)]),
                ("y", "c", &[("y", 0.89), ("s*", 0.11)]),
                ("z", "d", &[("z", 0.9), ("s*", 0.1)]),
            ],
        )
        .unwrap()
    }

    fn pure_x(mdp: &Mdp, x_action: &str) -> StationaryStrategy {
        StationaryStrategy::pure(mdp, &[("x", x_action), ("y", "c"), ("z", "d")]).unwrap()
    }

    // The 3×3 pair with entries {98, 1}/300 whose halfway mix has Perron
    // root exactly 1/3 (constant row sums) while each endpoint's root is
    // larger; used to pin the multi-row failure mode of mixing.
    fn mixing_counterexample() -> (DMatrix<f64>, DMatrix<f64>) {
        let a = DMatrix::from_row_slice(3, 3, &[98.0, 98.0, 1.0, 98.0, 1.0, 1.0, 1.0, 1.0, 1.0])
            / 300.0;
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 1.0, 1.0, 1.0, 98.0, 1.0, 98.0, 98.0])
            / 300.0;
        (a, b)
    }

    #[test]
    fn reduced_matrix_zeroes_rows_unreachable_from_the_first_state() {
        let mdp = example1(Objective::Reach);
        let rm_a = reduced_matrix(&induced_matrix(&mdp, &pure_x(&mdp, "a")));
        assert_eq!(rm_a.order(), 3);
        assert_eq!(rm_a.zeroed_rows, vec![2]);
        let expect =
            DMatrix::from_row_slice(3, 3, &[0.0, 0.89, 0.0, 0.0, 0.89, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(rm_a.matrix, expect);
        assert!(rm_a.substochastic_strict);

        let rm_b = reduced_matrix(&induced_matrix(&mdp, &pure_x(&mdp, "b")));
        assert_eq!(rm_b.zeroed_rows, vec![1]);
    }

    #[test]
    fn identity_with_absorbing_target_reduces_to_the_stay_probability() {
        let mdp = Mdp::build(
            &["x", "t"],
            "t",
            Objective::Reach,
            &[("x", "a", &[("x", 0.7), ("t", 0.3)])],
        )
        .unwrap();
        let rm = reduced_matrix(&induced_matrix(&mdp, &StationaryStrategy::uniform(&mdp)));
        assert_eq!(rm.order(), 1);
        assert_eq!(rm.matrix[(0, 0)], 0.7);
        assert!((perron_root(&rm).unwrap().root - 0.7).abs() <= 1e-12);
    }

    #[test]
    fn example1_lambda2_values_are_the_survival_rates() {
        let mdp = example1(Objective::Reach);
        let la = lambda2(&mdp, &pure_x(&mdp, "a")).unwrap();
        let lb = lambda2(&mdp, &pure_x(&mdp, "b")).unwrap();
        assert!((la - 0.89).abs() <= 1e-12);
        assert!((lb - 0.90).abs() <= 1e-12);
    }

    #[test]
    fn halfway_mix_of_the_counterexample_pair_has_root_one_third() {
        let (a, b) = mixing_counterexample();
        let ra = linalg::perron_root(&a).unwrap().root;
        let rb = linalg::perron_root(&b).unwrap().root;
        assert!((ra - 0.529522).abs() <= 1e-5);
        assert!((rb - 0.529522).abs() <= 1e-5);
        let mix = (&a + &b) * 0.5;
        let rm = linalg::perron_root(&mix).unwrap().root;
        assert!((rm - 1.0 / 3.0).abs() <= 1e-9);
        assert!(rm < ra.min(rb));
    }

    #[test]
    fn mixing_scan_rejects_pairs_differing_in_many_rows() {
        let (a, b) = mixing_counterexample();
        match mix_one_row_scan(&a, &b, 11) {
            Err(Error::MixRowsDiffer { rows }) => assert_eq!(rows, 3),
            other => panic!("expected row-count error, got {other:?}"),
        }
    }

    #[test]
    fn mixing_scan_of_equal_matrices_is_constant() {
        let (a, _) = mixing_counterexample();
        let scan = mix_one_row_scan(&a, &a.clone(), 5).unwrap();
        let first = scan[0].1;
        for (_, lam) in &scan {
            assert!((lam - first).abs() <= 1e-8);
        }
    }

    fn random_positive(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |_, _| rng.gen_range(0.05..1.0))
    }

    #[test]
    fn one_row_scans_are_monotone_between_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let a = random_positive(&mut rng, 3);
            let mut b = a.clone();
            for c in 0..3 {
                b[(0, c)] = rng.gen_range(0.05..1.0);
            }
            let scan = mix_one_row_scan(&a, &b, 11).unwrap();
            let lams: Vec<f64> = scan.iter().map(|&(_, l)| l).collect();
            let end_gap = lams[0] - lams[10];
            let increasing = end_gap < 0.0;
            for w in lams.windows(2) {
                if increasing {
                    assert!(w[1] >= w[0] - 1e-10);
                } else {
                    assert!(w[1] <= w[0] + 1e-10);
                }
            }
            if end_gap.abs() > 1e-6 {
                for w in lams.windows(2) {
                    if increasing {
                        assert!(w[1] > w[0]);
                    } else {
                        assert!(w[1] < w[0]);
                    }
                }
            }
            let min_scan = lams.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min_scan >= lams[0].min(lams[10]) - 1e-10);
        }
    }

    #[test]
    fn spectral_compare_follows_lambda2_and_flips_for_safety() {
        let reach = example1(Objective::Reach);
        let a = pure_x(&reach, "a");
        let b = pure_x(&reach, "b");
        assert_eq!(
            spectral_compare(&reach, &a, &b, DEFAULT_GAP_TOL).unwrap(),
            SpectralOrdering::First
        );
        assert_eq!(
            spectral_compare(&reach, &a, &a, DEFAULT_GAP_TOL).unwrap(),
            SpectralOrdering::Tie
        );
        let safety = example1(Objective::Safety);
        let a = pure_x(&safety, "a");
        let b = pure_x(&safety, "b");
        assert_eq!(
            spectral_compare(&safety, &a, &b, DEFAULT_GAP_TOL).unwrap(),
            SpectralOrdering::Second
        );
    }

    #[test]
    fn best_pure_stationary_selects_the_smaller_lambda2_on_example1() {
        let mdp = example1(Objective::Reach);
        let (sigma, report) = best_pure_stationary(&mdp, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(report.selected, 0);
        assert_eq!(sigma.chosen_action(0), Some(0));
        assert!(report.generic);
        assert!((report.min_gap - 0.01).abs() <= 1e-9);
    }

    #[test]
    fn duplicate_actions_produce_a_zero_gap_and_nongeneric_report() {
        let mdp = Mdp::build(
            &["x", "t"],
            "t",
            Objective::Reach,
            &[
                ("x", "a", &[("x", 0.6), ("t", 0.4)]),
                ("x", "b", &[("x", 0.6), ("t", 0.4)]),
            ],
        )
        .unwrap();
        let report = genericity_check(&mdp, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(report.min_gap, 0.0);
        assert!(!report.generic);
        assert_eq!(report.selected, 0);
    }

    #[test]
    fn sampled_instance_has_pairwise_distinct_lambda2() {
        let mdp = crate::mdp::sample_generic(4, 2, 1, 1.0).unwrap();
        let report = genericity_check(&mdp, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(report.rows.len(), 8);
        assert!(report.generic, "min gap {}", report.min_gap);
        for row in &report.rows {
            assert!(row.lambda2 > 0.0 && row.lambda2 < 1.0);
            assert!(row.cross_check_gap.unwrap() <= 1e-8);
        }
    }

    #[test]
    fn report_csv_round_trips() {
        let mdp = example1(Objective::Reach);
        let report = genericity_check(&mdp, DEFAULT_GAP_TOL).unwrap();
        let csv = report.to_csv();
        let parsed = SpectralReport::from_csv(&csv).unwrap();
        assert_eq!(parsed.to_csv(), csv);
        assert_eq!(parsed.selected, report.selected);
        assert_eq!(parsed.generic, report.generic);
    }

    proptest! {
        // Reduced-root and full-spectrum routes must agree on positive
        // instances; also λ2 < 1 strictly there.
        #[test]
        fn reduced_root_matches_full_spectrum_on_generic_instances(seed in 0u64..60) {
            let mdp = crate::mdp::sample_generic(4, 2, seed, 1.0).unwrap();
            for sigma in enumerate_pure_stationary(&mdp, 100).unwrap() {
                let tm = induced_matrix(&mdp, &sigma);
                let root = perron_root(&reduced_matrix(&tm)).unwrap();
                let spectrum = linalg::eigenvalues(&tm.matrix).unwrap();
                prop_assert!((spectrum[1].norm() - root.root).abs() <= 1e-8);
                prop_assert!(root.root < 1.0);
                prop_assert!(root.vector.iter().all(|&v| v > 0.0));
            }
        }
    }
}
