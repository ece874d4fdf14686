//! Finite-horizon reach curves, exact hitting quantities, discounted values,
//! average-payoff prefixes, and the finite-window overtaking classifier.

use nalgebra::{DMatrix, DVector};

use crate::blackwell::AverageMdp;
use crate::error::{Error, Result};
use crate::linalg;
use crate::mdp::{Mdp, Objective};
use crate::strategy::{induced_matrix, MarkovPlan, StationaryStrategy, TransitionMatrix};

/// Default equality tolerance for curve comparison.
pub const DEFAULT_EQ_TOL: f64 = 1e-10;

/// Survival mass is rescaled once it drops below this, so log-survival stays
/// exact far past f64 underflow.
const RESCALE_FLOOR: f64 = 1e-100;

/// t ↦ P(target reached within the first t periods), periods counted with
/// the initial state as period 1, so values[0] = v_1 = 0 and v_t uses t−1
/// transitions. log_survival[t−1] = log(1 − v_t), exact below underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachCurve {
    pub initial: String,
    pub values: Vec<f64>,
    pub log_survival: Vec<f64>,
}

impl ReachCurve {
    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    /// v_t, 1-based.
    pub fn value(&self, t: usize) -> f64 {
        self.values[t - 1]
    }

    /// log(1 − v_t), 1-based; −∞ once all mass is absorbed.
    pub fn log_survival_at(&self, t: usize) -> f64 {
        self.log_survival[t - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,prob\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{:.16e}\n", i + 1, v));
        }
        out
    }

    pub fn values_from_csv(text: &str) -> Result<Vec<f64>> {
        let mut lines = text.lines();
        match lines.next() {
            Some("t,prob") => {}
            other => {
                return Err(Error::Parse {
                    context: "curve csv".into(),
                    detail: format!("expected header t,prob, got {other:?}"),
                })
            }
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (t, v) = line.split_once(',').ok_or_else(|| Error::Parse {
                context: format!("curve csv line {}", i + 2),
                detail: "expected t,prob".into(),
            })?;
            let parse_err = |what: &str| Error::Parse {
                context: format!("curve csv line {}", i + 2),
                detail: format!("bad {what}"),
            };
            let t: usize = t.parse().map_err(|_| parse_err("period"))?;
            if t != i + 1 {
                return Err(parse_err("period ordering"));
            }
            values.push(v.parse().map_err(|_| parse_err("probability"))?);
        }
        Ok(values)
    }
}

// Reduced transition structure: matrix over non-target states in declaration
// order, plus the one-step column into the target.
fn reduced_parts(tm: &TransitionMatrix) -> (Vec<usize>, DMatrix<f64>, DVector<f64>) {
    let n = tm.order();
    let keep: Vec<usize> = (0..n).filter(|&s| s != tm.target).collect();
    let m = keep.len();
    let mut a = DMatrix::zeros(m, m);
    let mut b = DVector::zeros(m);
    for (i, &s) in keep.iter().enumerate() {
        for (j, &z) in keep.iter().enumerate() {
            a[(i, j)] = tm.matrix[(s, z)];
        }
        b[i] = tm.matrix[(s, tm.target)];
    }
    (keep, a, b)
}

pub fn reach_curve(
    mdp: &Mdp,
    sigma: &StationaryStrategy,
    s0: usize,
    t_max: usize,
) -> Result<ReachCurve> {
    reach_curve_plan(mdp, &MarkovPlan::stationary(sigma.clone()), s0, t_max)
}

/// Forward propagation of the surviving (non-target) mass under the plan's
/// per-period matrices. v_{t+1} = v_t + mass absorbed by the t-th transition.
pub fn reach_curve_plan(
    mdp: &Mdp,
    plan: &MarkovPlan,
    s0: usize,
    t_max: usize,
) -> Result<ReachCurve> {
    if mdp.is_target(s0) {
        return Err(Error::Domain(
            "reach curve from the target state is undefined".into(),
        ));
    }
    if t_max < 1 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }

    let parts_of = |sigma: &StationaryStrategy| {
        let tm = induced_matrix(mdp, sigma);
        let (keep, a, b) = reduced_parts(&tm);
        (keep, a, b)
    };
    let prefix: Vec<_> = plan.rows.iter().map(|r| parts_of(r)).collect();
    let tail = parts_of(&plan.tail);
    let pos = tail.0.iter().position(|&s| s == s0).unwrap();
    let m = tail.0.len();

    let mut u = DVector::zeros(m);
    u[pos] = 1.0;
    let mut offset = 0.0f64;
    let mut absorbed = 0.0f64;
    let mut values = vec![0.0f64];
    let mut log_survival = vec![0.0f64];

    for t in 1..t_max {
        let (a, b) = if t <= prefix.len() {
            (&prefix[t - 1].1, &prefix[t - 1].2)
        } else {
            (&tail.1, &tail.2)
        };
        absorbed += offset.exp() * u.dot(b);
        u = a.transpose() * &u;
        let sum = u.sum();
        if sum <= 0.0 {
            for _ in t..t_max {
                values.push(absorbed.min(1.0));
                log_survival.push(f64::NEG_INFINITY);
            }
            break;
        }
        values.push(absorbed.min(1.0));
        log_survival.push(offset + sum.ln());
        if sum < RESCALE_FLOOR {
            offset += sum.ln();
            u /= sum;
        }
    }

    Ok(ReachCurve {
        initial: mdp.state_name(s0).to_string(),
        values,
        log_survival,
    })
}

/// Exact hitting probability with a note on how it was obtained: the linear
/// system when it is well posed, otherwise the minimal nonnegative solution
/// by monotone iteration (recurrent non-target classes make I − A′ singular).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hitting {
    pub value: f64,
    pub via_iteration: bool,
}

fn hitting_vector(mdp: &Mdp, sigma: &StationaryStrategy) -> (DVector<f64>, bool) {
    let tm = induced_matrix(mdp, sigma);
    let (_, a, b) = reduced_parts(&tm);
    let m = a.nrows();
    let sys = DMatrix::identity(m, m) - &a;

    if let Ok(x) = linalg::solve(&sys, &b) {
        let residual = (&sys * &x - &b).amax();
        let in_range = x.iter().all(|&v| (-1e-8..=1.0 + 1e-8).contains(&v));
        if residual <= 1e-10 && in_range {
            return (x.map(|v| v.clamp(0.0, 1.0)), false);
        }
    }

    // Minimal nonnegative solution: x ← A′x + b from 0 is monotone and
    // converges to the hitting probabilities even with λ = 1 substructure.
    let mut x = DVector::zeros(m);
    for _ in 0..500_000 {
        let next = &a * &x + &b;
        let delta = (&next - &x).amax();
        x = next;
        if delta < 1e-15 {
            break;
        }
    }
    (x.map(|v| v.clamp(0.0, 1.0)), true)
}

pub fn hitting_probability(mdp: &Mdp, sigma: &StationaryStrategy, s0: usize) -> Result<Hitting> {
    if mdp.is_target(s0) {
        return Err(Error::Domain(
            "hitting probability from the target state is undefined".into(),
        ));
    }
    let (x, via_iteration) = hitting_vector(mdp, sigma);
    let pos = mdp.non_target_states().iter().position(|&s| s == s0).unwrap();
    Ok(Hitting {
        value: x[pos],
        via_iteration,
    })
}

/// E[first hitting period − 1] counted in transitions… specifically the
/// expected number of periods until arrival with the start counted as one
/// step, via (I − A′)h = 1 on the sure-hitting part; +∞ when hitting is not
/// almost sure.
pub fn expected_hitting_time(mdp: &Mdp, sigma: &StationaryStrategy, s0: usize) -> Result<f64> {
    if mdp.is_target(s0) {
        return Err(Error::Domain(
            "hitting time from the target state is undefined".into(),
        ));
    }
    let (x, _) = hitting_vector(mdp, sigma);
    let non_target = mdp.non_target_states();
    let pos = non_target.iter().position(|&s| s == s0).unwrap();
    if x[pos] < 1.0 - 1e-9 {
        return Ok(f64::INFINITY);
    }

    // States hitting almost surely are closed under transitions among
    // non-target states, so the restricted system is nonsingular.
    let sure: Vec<usize> = (0..non_target.len())
        .filter(|&i| x[i] >= 1.0 - 1e-9)
        .collect();
    let tm = induced_matrix(mdp, sigma);
    let (_, a, _) = reduced_parts(&tm);
    let k = sure.len();
    let mut sys = DMatrix::identity(k, k);
    for (i, &si) in sure.iter().enumerate() {
        for (j, &sj) in sure.iter().enumerate() {
            sys[(i, j)] -= a[(si, sj)];
        }
    }
    let h = linalg::solve(&sys, &DVector::from_element(k, 1.0))?;
    let pos_in_sure = sure.iter().position(|&i| i == pos).unwrap();
    Ok(h[pos_in_sure])
}

/// Normalized β-discounted value of the reward that pays 1 in the target
/// every period: equals E[β^{t*−1}], solved from (I − βA′)d = βb.
pub fn discounted_value(
    mdp: &Mdp,
    sigma: &StationaryStrategy,
    beta: f64,
    s0: usize,
) -> Result<f64> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::Domain(format!(
            "discount factor must lie in (0,1), got {beta}"
        )));
    }
    if mdp.is_target(s0) {
        return Err(Error::Domain(
            "discounted value from the target state is undefined".into(),
        ));
    }
    let tm = induced_matrix(mdp, sigma);
    let (keep, a, b) = reduced_parts(&tm);
    let m = a.nrows();
    let sys = DMatrix::identity(m, m) - &a * beta;
    let d = linalg::solve(&sys, &(b * beta))?;
    let pos = keep.iter().position(|&s| s == s0).unwrap();
    Ok(d[pos])
}

/// Prefix averages (1/t)·Σ_{k≤t} u′(s_k, a_k) along an explicit action path
/// of a deterministic average-payoff MDP.
pub fn avg_prefix_payoffs(
    avg: &AverageMdp,
    s0: usize,
    actions: &[&str],
    t_max: usize,
) -> Result<Vec<f64>> {
    if actions.len() < t_max {
        return Err(Error::Domain(format!(
            "path of length {} cannot cover horizon {t_max}",
            actions.len()
        )));
    }
    let mut s = s0;
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(t_max);
    for (k, name) in actions.iter().take(t_max).enumerate() {
        let a = avg.action_index(s, name)?;
        let act = &avg.actions[s][a];
        sum += act.payoff;
        s = act.successor;
        out.push(sum / (k + 1) as f64);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Overtakes,
    Overtaken,
    WeaklyOvertakes,
    WeaklyOvertaken,
    EqualOnWindow,
    Incomparable,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Overtakes => "Overtakes",
            VerdictKind::Overtaken => "Overtaken",
            VerdictKind::WeaklyOvertakes => "WeaklyOvertakes",
            VerdictKind::WeaklyOvertaken => "WeaklyOvertaken",
            VerdictKind::EqualOnWindow => "EqualOnWindow",
            VerdictKind::Incomparable => "Incomparable",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "Overtakes" => VerdictKind::Overtakes,
            "Overtaken" => VerdictKind::Overtaken,
            "WeaklyOvertakes" => VerdictKind::WeaklyOvertakes,
            "WeaklyOvertaken" => VerdictKind::WeaklyOvertaken,
            "EqualOnWindow" => VerdictKind::EqualOnWindow,
            "Incomparable" => VerdictKind::Incomparable,
            other => {
                return Err(Error::Parse {
                    context: "verdict".into(),
                    detail: format!("unknown verdict {other}"),
                })
            }
        })
    }
}

/// Finite-window classification with its supporting periods. A surrogate for
/// the tail definitions: the window stands in for "all t ≥ T" and
/// `min_strict_periods` for "infinitely many t".
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub window: (usize, usize),
    pub eq_tol: f64,
    pub min_strict_periods: usize,
    pub strict_above: Vec<usize>,
    pub strict_below: Vec<usize>,
}

impl Verdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "verdict": self.kind.as_str(),
            "window": [self.window.0, self.window.1],
            "eq_tol": self.eq_tol,
            "min_strict_periods": self.min_strict_periods,
            "strict_above": self.strict_above,
            "strict_below": self.strict_below,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Verdict> {
        let bad = |what: &str| Error::Parse {
            context: "verdict json".into(),
            detail: format!("missing or malformed {what}"),
        };
        let kind = VerdictKind::parse(value["verdict"].as_str().ok_or_else(|| bad("verdict"))?)?;
        let window = value["window"].as_array().ok_or_else(|| bad("window"))?;
        let periods = |key: &str| -> Result<Vec<usize>> {
            value[key]
                .as_array()
                .ok_or_else(|| bad(key))?
                .iter()
                .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| bad(key)))
                .collect()
        };
        Ok(Verdict {
            kind,
            window: (
                window[0].as_u64().ok_or_else(|| bad("window"))? as usize,
                window[1].as_u64().ok_or_else(|| bad("window"))? as usize,
            ),
            eq_tol: value["eq_tol"].as_f64().ok_or_else(|| bad("eq_tol"))?,
            min_strict_periods: value["min_strict_periods"]
                .as_u64()
                .ok_or_else(|| bad("min_strict_periods"))? as usize,
            strict_above: periods("strict_above")?,
            strict_below: periods("strict_below")?,
        })
    }
}

/// Classifies d_t = v_t(A) − v_t(B) (sign flipped for Safety) on the window:
/// Overtakes when strictly above throughout; WeaklyOvertakes when never
/// below tolerance and strictly above at ≥ ⌈(T1−T0)/10⌉ periods;
/// EqualOnWindow when inside tolerance throughout; symmetric downward cases;
/// Incomparable otherwise.
pub fn compare(
    a: &ReachCurve,
    b: &ReachCurve,
    window: (usize, usize),
    objective: Objective,
    eq_tol: f64,
) -> Result<Verdict> {
    if a.initial != b.initial {
        return Err(Error::Domain(format!(
            "curves start at different states ({} vs {})",
            a.initial, b.initial
        )));
    }
    let (t0, t1) = window;
    if t0 < 1 || t0 > t1 {
        return Err(Error::Domain(format!("bad window [{t0}, {t1}]")));
    }
    if t1 > a.horizon() || t1 > b.horizon() {
        return Err(Error::Domain(format!(
            "window end {t1} exceeds curve horizons ({}, {})",
            a.horizon(),
            b.horizon()
        )));
    }
    if eq_tol < 0.0 {
        return Err(Error::Domain("eq_tol must be nonnegative".into()));
    }

    let mut strict_above = Vec::new();
    let mut strict_below = Vec::new();
    for t in t0..=t1 {
        let mut d = a.value(t) - b.value(t);
        if objective == Objective::Safety {
            d = -d;
        }
        if d > eq_tol {
            strict_above.push(t);
        } else if d < -eq_tol {
            strict_below.push(t);
        }
    }

    let len = t1 - t0 + 1;
    let need = (t1 - t0).div_ceil(10);
    let (above, below) = (strict_above.len(), strict_below.len());
    let kind = if above == len {
        VerdictKind::Overtakes
    } else if below == len {
        VerdictKind::Overtaken
    } else if above == 0 && below == 0 {
        VerdictKind::EqualOnWindow
    } else if below == 0 && above >= need {
        VerdictKind::WeaklyOvertakes
    } else if above == 0 && below >= need {
        VerdictKind::WeaklyOvertaken
    } else {
        VerdictKind::Incomparable
    };

    Ok(Verdict {
        kind,
        window,
        eq_tol,
        min_strict_periods: need,
        strict_above,
        strict_below,
    })
}
