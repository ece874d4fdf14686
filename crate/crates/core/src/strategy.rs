//! Strategies over an MDP: stationary (pure or mixed), time-dependent Markov
//! plans with a stationary tail, pure-strategy enumeration, and induced
//! transition matrices.

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::mdp::Mdp;

/// Enumeration refuses to materialize more pure strategies than this.
pub const DEFAULT_STRATEGY_CAP: u64 = 1_000_000;

const WEIGHT_TOL: f64 = 1e-12;

/// Per non-target state, a probability vector over that state's actions in
/// declaration order. The target's entry is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryStrategy {
    weights: Vec<Vec<f64>>,
}

impl StationaryStrategy {
    // Trusted constructor for weights already validated by the caller.
    pub(crate) fn from_raw_weights(weights: Vec<Vec<f64>>) -> Self {
        StationaryStrategy { weights }
    }

    /// Validates shapes and weight sums against the MDP. Weight vectors
    /// within 1e-12 of total 1 are renormalized; anything farther off is an
    /// error.
    pub fn from_weights(mdp: &Mdp, weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.len() != mdp.n_states() {
            return Err(Error::Domain(format!(
                "strategy has {} state entries, MDP has {} states",
                weights.len(),
                mdp.n_states()
            )));
        }
        let mut weights = weights;
        for (s, w) in weights.iter_mut().enumerate() {
            if mdp.is_target(s) {
                if !w.is_empty() {
                    return Err(Error::Domain("target state cannot act".into()));
                }
                continue;
            }
            if w.len() != mdp.actions(s).len() {
                return Err(Error::Domain(format!(
                    "state {} has {} actions, strategy gives {} weights",
                    mdp.state_name(s),
                    mdp.actions(s).len(),
                    w.len()
                )));
            }
            if w.iter().any(|&p| p < 0.0) {
                return Err(Error::Domain(format!(
                    "negative action weight at state {}",
                    mdp.state_name(s)
                )));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_TOL {
                return Err(Error::Domain(format!(
                    "action weights at state {} sum to {sum}",
                    mdp.state_name(s)
                )));
            }
            if sum != 1.0 {
                for p in w.iter_mut() {
                    *p /= sum;
                }
            }
        }
        Ok(StationaryStrategy { weights })
    }

    /// Pure strategy from (state, action) name pairs covering every
    /// non-target state.
    pub fn pure(mdp: &Mdp, choices: &[(&str, &str)]) -> Result<Self> {
        let mut weights = vec![Vec::new(); mdp.n_states()];
        for (state, action) in choices {
            let s = mdp.state_index(state)?;
            let a = mdp.action_index(s, action)?;
            let mut w = vec![0.0; mdp.actions(s).len()];
            w[a] = 1.0;
            weights[s] = w;
        }
        for s in mdp.non_target_states() {
            if weights[s].is_empty() {
                return Err(Error::Domain(format!(
                    "no action chosen for state {}",
                    mdp.state_name(s)
                )));
            }
        }
        Ok(StationaryStrategy { weights })
    }

    /// Pure strategy from per-state action indices (target index ignored).
    pub fn from_action_indices(mdp: &Mdp, indices: &[usize]) -> Result<Self> {
        let mut weights = vec![Vec::new(); mdp.n_states()];
        for s in mdp.non_target_states() {
            let k = mdp.actions(s).len();
            let a = indices[s];
            if a >= k {
                return Err(Error::Domain(format!(
                    "action index {a} out of range at state {}",
                    mdp.state_name(s)
                )));
            }
            let mut w = vec![0.0; k];
            w[a] = 1.0;
            weights[s] = w;
        }
        Ok(StationaryStrategy { weights })
    }

    pub fn uniform(mdp: &Mdp) -> Self {
        let mut weights = vec![Vec::new(); mdp.n_states()];
        for s in mdp.non_target_states() {
            let k = mdp.actions(s).len();
            weights[s] = vec![1.0 / k as f64; k];
        }
        StationaryStrategy { weights }
    }

    pub fn weights(&self, state: usize) -> &[f64] {
        &self.weights[state]
    }

    pub fn is_pure(&self) -> bool {
        self.weights
            .iter()
            .all(|w| w.is_empty() || w.iter().any(|&p| p >= 1.0 - WEIGHT_TOL))
    }

    /// For a pure strategy, the chosen action index at a state.
    pub fn chosen_action(&self, state: usize) -> Option<usize> {
        self.weights[state]
            .iter()
            .position(|&p| p >= 1.0 - WEIGHT_TOL)
    }

    /// Action names of a pure strategy joined by `|`, in state order.
    pub fn profile_string(&self, mdp: &Mdp) -> String {
        let mut parts = Vec::new();
        for s in mdp.non_target_states() {
            match self.chosen_action(s) {
                Some(a) => parts.push(mdp.actions(s)[a].name.clone()),
                None => {
                    let mix: Vec<String> = self.weights[s]
                        .iter()
                        .zip(mdp.actions(s))
                        .filter(|(&p, _)| p > 0.0)
                        .map(|(&p, a)| format!("{}:{p}", a.name))
                        .collect();
                    parts.push(format!("({})", mix.join(",")));
                }
            }
        }
        parts.join("|")
    }

    pub fn from_json(mdp: &Mdp, value: &Value) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            context: "strategy".into(),
            detail: "expected an object keyed by state".into(),
        })?;
        let mut weights = vec![Vec::new(); mdp.n_states()];
        for (state, entry) in obj {
            let s = mdp.state_index(state)?;
            if mdp.is_target(s) {
                return Err(Error::Parse {
                    context: format!("strategy.{state}"),
                    detail: "target state cannot act".into(),
                });
            }
            let mut w = vec![0.0; mdp.actions(s).len()];
            match entry {
                Value::String(action) => {
                    let a = mdp.action_index(s, action)?;
                    w[a] = 1.0;
                }
                Value::Object(mix) => {
                    for (action, p) in mix {
                        let a = mdp.action_index(s, action)?;
                        w[a] = p.as_f64().ok_or_else(|| Error::Parse {
                            context: format!("strategy.{state}.{action}"),
                            detail: "expected a number".into(),
                        })?;
                    }
                }
                _ => {
                    return Err(Error::Parse {
                        context: format!("strategy.{state}"),
                        detail: "expected an action name or an action→probability object".into(),
                    })
                }
            }
            weights[s] = w;
        }
        for s in mdp.non_target_states() {
            if weights[s].is_empty() {
                return Err(Error::Parse {
                    context: "strategy".into(),
                    detail: format!("no entry for state {}", mdp.state_name(s)),
                });
            }
        }
        StationaryStrategy::from_weights(mdp, weights)
    }

    /// Pure states serialize as the action name, mixed states as an
    /// action→probability object; states in declaration order.
    pub fn to_json(&self, mdp: &Mdp) -> Value {
        let mut obj = Map::new();
        for s in mdp.non_target_states() {
            let entry = match self.chosen_action(s) {
                Some(a) => Value::String(mdp.actions(s)[a].name.clone()),
                None => {
                    let mut mix = Map::new();
                    for (a, &p) in self.weights[s].iter().enumerate() {
                        if p > 0.0 {
                            mix.insert(mdp.actions(s)[a].name.clone(), json!(p));
                        }
                    }
                    Value::Object(mix)
                }
            };
            obj.insert(mdp.state_name(s).to_string(), entry);
        }
        Value::Object(obj)
    }
}

/// Time-dependent strategy: explicit per-period rows for periods
/// 1..=rows.len(), then a stationary tail forever after.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPlan {
    pub rows: Vec<StationaryStrategy>,
    pub tail: StationaryStrategy,
}

impl MarkovPlan {
    pub fn stationary(tail: StationaryStrategy) -> Self {
        MarkovPlan {
            rows: Vec::new(),
            tail,
        }
    }

    pub fn horizon(&self) -> usize {
        self.rows.len()
    }

    /// Strategy in force at a 1-based period.
    pub fn at(&self, period: usize) -> &StationaryStrategy {
        if period >= 1 && period <= self.rows.len() {
            &self.rows[period - 1]
        } else {
            &self.tail
        }
    }

    pub fn from_json(mdp: &Mdp, value: &Value) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            context: "plan".into(),
            detail: "expected an object with rows and tail".into(),
        })?;
        let rows = obj
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse {
                context: "plan.rows".into(),
                detail: "expected an array of strategies".into(),
            })?
            .iter()
            .map(|v| StationaryStrategy::from_json(mdp, v))
            .collect::<Result<Vec<_>>>()?;
        let tail = StationaryStrategy::from_json(
            mdp,
            obj.get("tail").ok_or_else(|| Error::Parse {
                context: "plan.tail".into(),
                detail: "missing tail strategy".into(),
            })?,
        )?;
        Ok(MarkovPlan { rows, tail })
    }

    pub fn to_json(&self, mdp: &Mdp) -> Value {
        json!({
            "rows": self.rows.iter().map(|r| r.to_json(mdp)).collect::<Vec<_>>(),
            "tail": self.tail.to_json(mdp),
        })
    }
}

/// Row-stochastic one-step matrix induced by a stationary strategy, with the
/// target row pinned to its own unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub matrix: DMatrix<f64>,
    pub states: Vec<String>,
    pub target: usize,
}

impl TransitionMatrix {
    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }
}

/// All pure stationary strategies in lexicographic order of per-state action
/// indices (first declared state most significant).
pub fn enumerate_pure_stationary(mdp: &Mdp, cap: u64) -> Result<Vec<StationaryStrategy>> {
    let non_target = mdp.non_target_states();
    let mut count: u128 = 1;
    for &s in &non_target {
        count = count.saturating_mul(mdp.actions(s).len() as u128);
    }
    if count > cap as u128 {
        return Err(Error::StrategyCap { count, cap });
    }

    let mut strategies = Vec::with_capacity(count as usize);
    let mut indices = vec![0usize; mdp.n_states()];
    loop {
        strategies.push(StationaryStrategy::from_action_indices(mdp, &indices)?);
        // Odometer step, last state fastest.
        let mut advanced = false;
        for &s in non_target.iter().rev() {
            if indices[s] + 1 < mdp.actions(s).len() {
                indices[s] += 1;
                advanced = true;
                break;
            }
            indices[s] = 0;
        }
        if !advanced {
            break;
        }
    }
    Ok(strategies)
}

/// One-step matrix A(s,z) = Σ_a σ(a|s)·p(z|s,a).
pub fn induced_matrix(mdp: &Mdp, sigma: &StationaryStrategy) -> TransitionMatrix {
    let n = mdp.n_states();
    let mut m = DMatrix::zeros(n, n);
    for s in 0..n {
        if mdp.is_target(s) {
            m[(s, s)] = 1.0;
            continue;
        }
        for (a, action) in mdp.actions(s).iter().enumerate() {
            let w = sigma.weights(s)[a];
            if w == 0.0 {
                continue;
            }
            for z in 0..n {
                m[(s, z)] += w * action.row[z];
            }
        }
    }
    TransitionMatrix {
        matrix: m,
        states: mdp.state_names().to_vec(),
        target: mdp.target(),
    }
}

/// Stationary strategy that plays a given first-period mixed action at every
/// state, forever.
pub fn stationary_from_first_actions(
    mdp: &Mdp,
    per_state: &[(String, Vec<(String, f64)>)],
) -> Result<StationaryStrategy> {
    let mut weights = vec![Vec::new(); mdp.n_states()];
    for (state, mix) in per_state {
        let s = mdp.state_index(state)?;
        let mut w = vec![0.0; mdp.actions(s).len()];
        for (action, p) in mix {
            let a = mdp.action_index(s, action)?;
            w[a] = *p;
        }
        weights[s] = w;
    }
    for s in mdp.non_target_states() {
        if weights[s].is_empty() {
            return Err(Error::Domain(format!(
                "no mixed action given for state {}",
                mdp.state_name(s)
            )));
        }
    }
    StationaryStrategy::from_weights(mdp, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::Objective;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn example1() -> Mdp {
        Mdp::build(
            &["x", "y", "z", "s*"],
            "s*",
            Objective::Reach,
            &[
                ("x", "a", &[("y", 0.89), ("s*", 0.11)]),
                ("x", "b", &[("z", 0.5), ("s*", 0.5)]),
                ("y", "c", &[("y", 0.89), ("s*", 0.11)]),
                ("z", "d", &[("z", 0.9), ("s*", 0.1)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let mdp = example1();
        let all = enumerate_pure_stationary(&mdp, DEFAULT_STRATEGY_CAP).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].chosen_action(0), Some(0));
        assert_eq!(all[1].chosen_action(0), Some(1));
        assert!(all.iter().all(|s| s.is_pure()));
        assert_ne!(all[0], all[1]);
    }

    #[test]
    fn enumeration_cap_reports_the_count() {
        let mdp = example1();
        match enumerate_pure_stationary(&mdp, 1) {
            Err(Error::StrategyCap { count, cap }) => {
                assert_eq!(count, 2);
                assert_eq!(cap, 1);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn induced_matrix_matches_hand_rows() {
        let mdp = example1();
        let sigma = StationaryStrategy::pure(&mdp, &[("x", "a"), ("y", "c"), ("z", "d")]).unwrap();
        let tm = induced_matrix(&mdp, &sigma);
        assert_eq!(
            tm.matrix.row(0).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 0.89, 0.0, 0.11]
        );
        assert_eq!(
            tm.matrix.row(3).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn single_state_mixture_is_affine_in_the_matrix() {
        let mdp = example1();
        let p0 = StationaryStrategy::pure(&mdp, &[("x", "a"), ("y", "c"), ("z", "d")]).unwrap();
        let p1 = StationaryStrategy::pure(&mdp, &[("x", "b"), ("y", "c"), ("z", "d")]).unwrap();
        let alpha = 0.3;
        let mixed = StationaryStrategy::from_weights(
            &mdp,
            vec![vec![alpha, 1.0 - alpha], vec![1.0], vec![1.0], vec![]],
        )
        .unwrap();
        let m0 = induced_matrix(&mdp, &p0).matrix;
        let m1 = induced_matrix(&mdp, &p1).matrix;
        let mm = induced_matrix(&mdp, &mixed).matrix;
        let blend = &m0 * alpha + &m1 * (1.0 - alpha);
        assert_abs_diff_eq!(mm, blend, epsilon = 1e-15);
    }

    #[test]
    fn deterministic_rows_have_at_most_two_nonzeros() {
        let mdp = example1();
        for sigma in enumerate_pure_stationary(&mdp, 100).unwrap() {
            let tm = induced_matrix(&mdp, &sigma);
            for s in mdp.non_target_states() {
                let nonzero = tm.matrix.row(s).iter().filter(|&&p| p > 0.0).count();
                assert!(nonzero <= 2);
            }
        }
    }

    #[test]
    fn first_actions_construction_matches_enumeration_head() {
        let mdp = example1();
        let alpha = stationary_from_first_actions(
            &mdp,
            &[
                ("x".into(), vec![("a".into(), 1.0)]),
                ("y".into(), vec![("c".into(), 1.0)]),
                ("z".into(), vec![("d".into(), 1.0)]),
            ],
        )
        .unwrap();
        let all = enumerate_pure_stationary(&mdp, 100).unwrap();
        assert_eq!(alpha, all[0]);
    }

    #[test]
    fn first_actions_missing_state_is_an_error() {
        let mdp = example1();
        let err = stationary_from_first_actions(&mdp, &[("x".into(), vec![("a".into(), 1.0)])])
            .unwrap_err();
        assert!(err.to_string().contains('y'));
    }

    #[test]
    fn strategy_json_round_trips_pure_and_mixed() {
        let mdp = example1();
        let pure = StationaryStrategy::pure(&mdp, &[("x", "b"), ("y", "c"), ("z", "d")]).unwrap();
        let back = StationaryStrategy::from_json(&mdp, &pure.to_json(&mdp)).unwrap();
        assert_eq!(pure, back);
        assert_eq!(pure.to_json(&mdp)["x"], Value::String("b".into()));

        let mixed = StationaryStrategy::from_weights(
            &mdp,
            vec![vec![0.25, 0.75], vec![1.0], vec![1.0], vec![]],
        )
        .unwrap();
        let back = StationaryStrategy::from_json(&mdp, &mixed.to_json(&mdp)).unwrap();
        assert_eq!(mixed, back);
    }

    #[test]
    fn plan_json_round_trips_and_periods_dispatch() {
        let mdp = example1();
        let a = StationaryStrategy::pure(&mdp, &[("x", "a"), ("y", "c"), ("z", "d")]).unwrap();
        let b = StationaryStrategy::pure(&mdp, &[("x", "b"), ("y", "c"), ("z", "d")]).unwrap();
        let plan = MarkovPlan {
            rows: vec![a.clone(), a.clone()],
            tail: b.clone(),
        };
        assert_eq!(plan.at(1), &a);
        assert_eq!(plan.at(2), &a);
        assert_eq!(plan.at(3), &b);
        assert_eq!(plan.at(100), &b);
        let back = MarkovPlan::from_json(&mdp, &plan.to_json(&mdp)).unwrap();
        assert_eq!(plan, back);
    }

    proptest! {
        #[test]
        fn enumeration_count_is_the_action_product(
            seed in 0u64..200, n in 2usize..5, k in 1usize..4
        ) {
            let mdp = crate::mdp::sample_generic(n, k, seed, 1.0).unwrap();
            let all = enumerate_pure_stationary(&mdp, DEFAULT_STRATEGY_CAP).unwrap();
            prop_assert_eq!(all.len(), k.pow((n - 1) as u32));
            for sigma in &all {
                let tm = induced_matrix(&mdp, sigma);
                for s in 0..tm.order() {
                    let sum: f64 = tm.matrix.row(s).iter().sum();
                    prop_assert!((sum - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
