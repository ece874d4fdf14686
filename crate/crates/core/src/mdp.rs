//! MDP model: states, per-state actions, transition kernel, absorbing target,
//! and the objective (reach the target, or avoid it). Includes validation,
//! normalization (removal of forced one-step jumps to the target), and a
//! seeded generator of strictly positive random instances.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Row-sum slack accepted on input; rows inside it are renormalized once.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Reach,
    Safety,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Reach => "reach",
            Objective::Safety => "safety",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "reach" => Ok(Objective::Reach),
            "safety" => Ok(Objective::Safety),
            other => Err(Error::Parse {
                context: "objective".into(),
                detail: format!("expected \"reach\" or \"safety\", got \"{other}\""),
            }),
        }
    }
}

/// One action at one state: a dense probability row over all states in
/// declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionRow {
    pub name: String,
    pub row: Vec<f64>,
}

/// A finite MDP with an absorbing target state. The target has no actions;
/// every other state has an ordered, nonempty action list. Immutable after
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    states: Vec<String>,
    target: usize,
    objective: Objective,
    actions: Vec<Vec<ActionRow>>,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<(String, String)>,
    pub determinism: bool,
    pub positivity: bool,
}

impl Mdp {
    /// Builds an MDP from explicit parts. Kernel entries are
    /// (state, action, sparse row); declaration order is preserved and
    /// determines all internal indices. Rows within [`ROW_SUM_TOL`] of total
    /// mass 1 are renormalized once; rows farther off are kept as given so
    /// that [`Mdp::validate`] can report them.
    pub fn build(
        states: &[&str],
        target: &str,
        objective: Objective,
        kernel: &[(&str, &str, &[(&str, f64)])],
    ) -> Result<Mdp> {
        let state_names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let unique: BTreeSet<&str> = states.iter().copied().collect();
        if unique.len() != states.len() {
            return Err(Error::Parse {
                context: "states".into(),
                detail: "duplicate state identifiers".into(),
            });
        }
        let target_idx = states
            .iter()
            .position(|s| *s == target)
            .ok_or_else(|| Error::UnknownState(target.to_string()))?;

        let n = states.len();
        let mut actions: Vec<Vec<ActionRow>> = vec![Vec::new(); n];
        for (state, action, pairs) in kernel {
            let s = state_names
                .iter()
                .position(|x| x == state)
                .ok_or_else(|| Error::UnknownState(state.to_string()))?;
            if s == target_idx {
                return Err(Error::Parse {
                    context: format!("kernel.{state}"),
                    detail: "target state cannot have outgoing actions".into(),
                });
            }
            if actions[s].iter().any(|a| a.name == *action) {
                return Err(Error::Parse {
                    context: format!("kernel.{state}.{action}"),
                    detail: "duplicate action identifier".into(),
                });
            }
            let mut row = vec![0.0f64; n];
            for (z, p) in pairs.iter() {
                let zi = state_names
                    .iter()
                    .position(|x| x == z)
                    .ok_or_else(|| Error::UnknownState(z.to_string()))?;
                row[zi] = *p;
            }
            renormalize_row(&mut row);
            actions[s].push(ActionRow {
                name: action.to_string(),
                row,
            });
        }

        Ok(Mdp {
            states: state_names,
            target: target_idx,
            objective,
            actions,
        })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, idx: usize) -> &str {
        &self.states[idx]
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn is_target(&self, idx: usize) -> bool {
        idx == self.target
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    /// Same kernel under the other reading of "reaching the target is good".
    pub fn with_objective(mut self, objective: Objective) -> Mdp {
        self.objective = objective;
        self
    }

    pub fn actions(&self, state: usize) -> &[ActionRow] {
        &self.actions[state]
    }

    pub fn action_index(&self, state: usize, action: &str) -> Result<usize> {
        self.actions[state]
            .iter()
            .position(|a| a.name == action)
            .ok_or_else(|| Error::UnknownAction {
                state: self.states[state].clone(),
                action: action.to_string(),
            })
    }

    /// Non-target state indices in declaration order.
    pub fn non_target_states(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&s| s != self.target).collect()
    }

    /// Reports all structural and numeric problems without failing, along
    /// with the determinism and positivity diagnostics used by the
    /// deterministic-MDP and generic-MDP pipelines.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let mut determinism = true;
        let mut positivity = true;

        for s in self.non_target_states() {
            if self.actions[s].is_empty() {
                issues.push((self.states[s].clone(), "state has no actions".into()));
                continue;
            }
            for a in &self.actions[s] {
                let loc = format!("{}.{}", self.states[s], a.name);
                let mut sum = 0.0;
                for (&p, name) in a.row.iter().zip(&self.states) {
                    if p < 0.0 {
                        issues.push((loc.clone(), format!("negative probability at {name}")));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    issues.push((loc.clone(), format!("row sums to {sum}, expected 1")));
                }
                let positive_non_target = (0..self.states.len())
                    .filter(|&z| z != self.target && a.row[z] > 0.0)
                    .count();
                if positive_non_target > 1 {
                    determinism = false;
                }
                if positive_non_target + 1 < self.states.len() {
                    positivity = false;
                }
            }
        }

        ValidationReport {
            ok: issues.is_empty(),
            issues,
            determinism,
            positivity,
        }
    }

    /// Removes forced one-step jumps to the target, iterated to a fixed
    /// point. Reach: a state with an action jumping to the target with
    /// probability 1 is deleted and inbound mass is rerouted to the target.
    /// Safety: such actions are deleted; states left with no actions are
    /// then removed the same way. Fails if no non-target state survives.
    pub fn normalize(&self) -> Result<Mdp> {
        let mut current = self.clone();
        loop {
            let jump = |a: &ActionRow| a.row[current.target] >= 1.0 - ROW_SUM_TOL;
            let doomed: Vec<usize> = match current.objective {
                Objective::Reach => current
                    .non_target_states()
                    .into_iter()
                    .filter(|&s| current.actions[s].iter().any(jump))
                    .collect(),
                Objective::Safety => {
                    let mut pruned = current.clone();
                    for s in pruned.non_target_states() {
                        pruned.actions[s].retain(|a| !jump(a));
                    }
                    let doomed: Vec<usize> = pruned
                        .non_target_states()
                        .into_iter()
                        .filter(|&s| pruned.actions[s].is_empty())
                        .collect();
                    current = pruned;
                    doomed
                }
            };
            if doomed.is_empty() {
                break;
            }
            current = current.without_states(&doomed)?;
        }
        if current.states.len() < 2 {
            return Err(Error::NormalizeEmptied);
        }
        Ok(current)
    }

    // Deletes the given non-target states, rerouting their inbound mass to
    // the target.
    fn without_states(&self, doomed: &[usize]) -> Result<Mdp> {
        let keep: Vec<usize> = (0..self.states.len())
            .filter(|s| !doomed.contains(s))
            .collect();
        if keep.len() < 2 {
            return Err(Error::NormalizeEmptied);
        }
        let states: Vec<String> = keep.iter().map(|&s| self.states[s].clone()).collect();
        let target = keep.iter().position(|&s| s == self.target).unwrap();
        let mut actions: Vec<Vec<ActionRow>> = vec![Vec::new(); keep.len()];
        for (new_s, &old_s) in keep.iter().enumerate() {
            if old_s == self.target {
                continue;
            }
            for a in &self.actions[old_s] {
                let mut row = vec![0.0f64; keep.len()];
                for (new_z, &old_z) in keep.iter().enumerate() {
                    row[new_z] = a.row[old_z];
                }
                for &d in doomed {
                    row[target] += a.row[d];
                }
                actions[new_s].push(ActionRow {
                    name: a.name.clone(),
                    row,
                });
            }
        }
        Ok(Mdp {
            states,
            target,
            objective: self.objective,
            actions,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Mdp> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: "document".into(),
            detail: e.to_string(),
        })?;
        Mdp::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Mdp> {
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            context: "document".into(),
            detail: "expected a JSON object".into(),
        })?;
        let states: Vec<String> = obj
            .get("states")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse {
                context: "states".into(),
                detail: "expected an array of strings".into(),
            })?
            .iter()
            .map(|v| {
                v.as_str().map(str::to_string).ok_or_else(|| Error::Parse {
                    context: "states".into(),
                    detail: "state identifiers must be strings".into(),
                })
            })
            .collect::<Result<_>>()?;
        let target = obj
            .get("target")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse {
                context: "target".into(),
                detail: "expected a string".into(),
            })?;
        let objective = Objective::parse(obj.get("objective").and_then(Value::as_str).ok_or_else(
            || Error::Parse {
                context: "objective".into(),
                detail: "expected a string".into(),
            },
        )?)?;
        let kernel = obj
            .get("kernel")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse {
                context: "kernel".into(),
                detail: "expected an object keyed by state".into(),
            })?;

        let mut triples: Vec<(String, String, Vec<(String, f64)>)> = Vec::new();
        for (state, per_action) in kernel {
            let per_action = per_action.as_object().ok_or_else(|| Error::Parse {
                context: format!("kernel.{state}"),
                detail: "expected an object keyed by action".into(),
            })?;
            for (action, row) in per_action {
                let row = row.as_object().ok_or_else(|| Error::Parse {
                    context: format!("kernel.{state}.{action}"),
                    detail: "expected an object keyed by successor state".into(),
                })?;
                let mut pairs = Vec::new();
                for (z, p) in row {
                    let p = p.as_f64().ok_or_else(|| Error::Parse {
                        context: format!("kernel.{state}.{action}.{z}"),
                        detail: "expected a number".into(),
                    })?;
                    pairs.push((z.clone(), p));
                }
                triples.push((state.clone(), action.clone(), pairs));
            }
        }

        let state_refs: Vec<&str> = states.iter().map(String::as_str).collect();
        let kernel_refs: Vec<(&str, &str, Vec<(&str, f64)>)> = triples
            .iter()
            .map(|(s, a, pairs)| {
                (
                    s.as_str(),
                    a.as_str(),
                    pairs.iter().map(|(z, p)| (z.as_str(), *p)).collect(),
                )
            })
            .collect();
        let kernel_slices: Vec<(&str, &str, &[(&str, f64)])> = kernel_refs
            .iter()
            .map(|(s, a, pairs)| (*s, *a, pairs.as_slice()))
            .collect();
        Mdp::build(&state_refs, target, objective, &kernel_slices)
    }

    /// JSON document with states, actions, and row entries in declaration
    /// order; zero-probability entries are omitted.
    pub fn to_json(&self) -> Value {
        let mut kernel = Map::new();
        for s in self.non_target_states() {
            let mut per_action = Map::new();
            for a in &self.actions[s] {
                let mut row = Map::new();
                for (z, name) in self.states.iter().enumerate() {
                    if a.row[z] != 0.0 {
                        row.insert(name.clone(), json!(a.row[z]));
                    }
                }
                per_action.insert(a.name.clone(), Value::Object(row));
            }
            kernel.insert(self.states[s].clone(), Value::Object(per_action));
        }
        json!({
            "states": self.states,
            "target": self.states[self.target],
            "objective": self.objective.as_str(),
            "kernel": kernel,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("MDP serialization cannot fail")
    }
}

fn renormalize_row(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    if sum != 1.0 && (sum - 1.0).abs() <= ROW_SUM_TOL && sum > 0.0 {
        for p in row.iter_mut() {
            *p /= sum;
        }
    }
}

/// Samples a Reach MDP whose transition rows are i.i.d. symmetric Dirichlet
/// over all `n_states` states, so every row is strictly positive. The last
/// state is the absorbing target. Output is a pure function of the seed.
pub fn sample_generic(
    n_states: usize,
    actions_per_state: usize,
    seed: u64,
    concentration: f64,
) -> Result<Mdp> {
    if n_states < 2 {
        return Err(Error::Domain("sample_generic needs at least 2 states".into()));
    }
    if actions_per_state < 1 {
        return Err(Error::Domain(
            "sample_generic needs at least 1 action per state".into(),
        ));
    }
    if !(concentration > 0.0) {
        return Err(Error::Domain(
            "Dirichlet concentration must be positive".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirichlet =
        Dirichlet::new(&vec![concentration; n_states]).map_err(|e| Error::Domain(e.to_string()))?;

    let states: Vec<String> = (1..=n_states).map(|i| format!("s{i}")).collect();
    let target = n_states - 1;
    let mut actions: Vec<Vec<ActionRow>> = vec![Vec::new(); n_states];
    for s in 0..n_states - 1 {
        for a in 1..=actions_per_state {
            // Resample until comfortably interior; keeps positivity checks
            // and row tolerances honest downstream.
            let mut row: Vec<f64>;
            loop {
                row = dirichlet.sample(&mut rng);
                if row.iter().all(|&p| p >= 1e-9) {
                    break;
                }
            }
            let sum: f64 = row.iter().sum();
            for p in row.iter_mut() {
                *p /= sum;
            }
            actions[s].push(ActionRow {
                name: format!("a{a}"),
                row,
            });
        }
    }

    Ok(Mdp {
        states,
        target,
        objective: Objective::Reach,
        actions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn example1_json() -> String {
        r#"{
            "states": ["x", "y", "z", "s*"],
            "target": "s*",
            "objective": "reach",
            "kernel": {
                "x": {
                    "a": {"y": 0.89, "s*": 0.11},
                    "b": {"z": 0.5, "s*": 0.5}
                },
                "y": {"c": {"y": 0.89, "s*": 0.11}},
                "z": {"d": {"z": 0.9, "s*": 0.1}}
            }
        }"#
        .to_string()
    }

    #[test]
    fn loads_states_and_actions_in_declaration_order() {
        let mdp = Mdp::from_json_str(&example1_json()).unwrap();
        assert_eq!(mdp.state_names(), &["x", "y", "z", "s*"]);
        assert_eq!(mdp.target(), 3);
        let names: Vec<&str> = mdp.actions(0).iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["a", "b"]);
        assert_eq!(mdp.actions(0)[0].row, vec![0.0, 0.89, 0.0, 0.11]);
    }

    #[test]
    fn validate_flags_example1_as_deterministic_without_positivity() {
        let mdp = Mdp::from_json_str(&example1_json()).unwrap();
        let report = mdp.validate();
        assert!(report.ok, "issues: {:?}", report.issues);
        assert!(report.determinism);
        assert!(!report.positivity);
    }

    #[test]
    fn near_unit_row_sums_are_renormalized_once() {
        let mdp = Mdp::build(
            &["x", "t"],
            "t",
            Objective::Reach,
            &[("x", "a", &[("x", 0.5 + 3e-13), ("t", 0.5)])],
        )
        .unwrap();
        let sum: f64 = mdp.actions(0)[0].row.iter().sum();
        assert_eq!(sum, 1.0);
        assert!(mdp.validate().ok);
    }

    #[test]
    fn bad_row_sum_is_reported_not_rejected() {
        let mdp = Mdp::build(
            &["x", "t"],
            "t",
            Objective::Reach,
            &[("x", "a", &[("x", 0.5), ("t", 0.4)])],
        )
        .unwrap();
        let report = mdp.validate();
        assert!(!report.ok);
        assert_eq!(report.issues.len(), 1);
        assert!(report.issues[0].1.contains("row sums to"));
    }

    #[test]
    fn target_with_actions_is_a_parse_error() {
        let text = r#"{
            "states": ["x", "t"], "target": "t", "objective": "reach",
            "kernel": {"x": {"a": {"t": 1.0}}, "t": {"a": {"t": 1.0}}}
        }"#;
        assert!(matches!(
            Mdp::from_json_str(text),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn normalize_reroutes_forced_jump_states_for_reach() {
        let mdp = Mdp::build(
            &["x", "y", "t"],
            "t",
            Objective::Reach,
            &[
                ("x", "a", &[("y", 0.3), ("x", 0.5), ("t", 0.2)]),
                ("y", "a", &[("t", 1.0)]),
            ],
        )
        .unwrap();
        let norm = mdp.normalize().unwrap();
        assert_eq!(norm.state_names(), &["x", "t"]);
        assert_eq!(norm.actions(0)[0].row, vec![0.5, 0.5]);
        assert_eq!(norm.normalize().unwrap(), norm);
    }

    #[test]
    fn normalize_deletes_only_actions_for_safety_until_states_empty() {
        let mdp = Mdp::build(
            &["x", "y", "t"],
            "t",
            Objective::Safety,
            &[
                ("x", "stay", &[("x", 0.9), ("t", 0.1)]),
                ("x", "leap", &[("t", 1.0)]),
                ("y", "leap", &[("t", 1.0)]),
            ],
        )
        .unwrap();
        let norm = mdp.normalize().unwrap();
        assert_eq!(norm.state_names(), &["x", "t"]);
        let names: Vec<&str> = norm.actions(0).iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["stay"]);
    }

    #[test]
    fn normalize_that_empties_the_state_set_is_an_error() {
        let mdp = Mdp::build(
            &["x", "t"],
            "t",
            Objective::Reach,
            &[("x", "a", &[("t", 1.0)])],
        )
        .unwrap();
        assert!(matches!(mdp.normalize(), Err(Error::NormalizeEmptied)));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = sample_generic(3, 2, 7, 1.0).unwrap();
        let b = sample_generic(3, 2, 7, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_rows_are_strictly_positive_and_stochastic() {
        let mdp = sample_generic(3, 2, 7, 1.0).unwrap();
        let report = mdp.validate();
        assert!(report.ok);
        assert!(report.positivity);
        for s in mdp.non_target_states() {
            for a in mdp.actions(s) {
                assert!(a.row.iter().all(|&p| p > 0.0));
                let sum: f64 = a.row.iter().sum();
                assert!((sum - 1.0).abs() <= ROW_SUM_TOL);
            }
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mdp = sample_generic(4, 2, 11, 1.0).unwrap();
        let back = Mdp::from_json_str(&mdp.to_json_string()).unwrap();
        assert_eq!(mdp, back);
    }

    proptest! {
        #[test]
        fn sampled_instances_validate_with_positivity(
            seed in 0u64..500,
            n in 2usize..6,
            k in 1usize..4,
        ) {
            let mdp = sample_generic(n, k, seed, 1.0).unwrap();
            let report = mdp.validate();
            prop_assert!(report.ok);
            prop_assert!(report.positivity);
        }

        #[test]
        fn normalize_is_idempotent_on_sampled_instances(seed in 0u64..200) {
            let mdp = sample_generic(4, 2, seed, 0.5).unwrap();
            let once = mdp.normalize().unwrap();
            prop_assert_eq!(once.normalize().unwrap(), once);
        }
    }
}
