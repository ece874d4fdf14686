//! Deterministic-MDP analysis: the log transform to an average-payoff MDP,
//! simple-loop enumeration, Blackwell-optimal policy search over a discount
//! grid, and the pure-path oracle certifying that a candidate is not weakly
//! overtaken.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mdp::{Mdp, Objective};
use crate::strategy::StationaryStrategy;

/// Path enumeration refuses to walk more pure action paths than this.
pub const DEFAULT_PATH_CAP: u64 = 1_000_000;

/// Simple-cycle enumeration refuses instances with more states than this.
pub const DEFAULT_LOOP_STATE_CAP: usize = 12;

/// Log-survival comparisons treat differences inside this as ties.
const LOG_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AvgAction {
    pub name: String,
    pub successor: usize,
    pub payoff: f64,
}

/// Deterministic average-payoff MDP over the source's non-target states,
/// with enough of the source recorded to map policies back onto it.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageMdp {
    pub states: Vec<String>,
    pub actions: Vec<Vec<AvgAction>>,
    pub source_n: usize,
    pub source_target: usize,
    /// Source state index of each average-MDP state.
    pub source_state_indices: Vec<usize>,
}

impl AverageMdp {
    /// Hand-built instance not derived from an Mdp; states map to source
    /// indices 0..m with a virtual target appended last.
    pub fn standalone(states: Vec<String>, actions: Vec<Vec<AvgAction>>) -> AverageMdp {
        let m = states.len();
        AverageMdp {
            states,
            actions,
            source_n: m + 1,
            source_target: m,
            source_state_indices: (0..m).collect(),
        }
    }

    pub fn action_index(&self, state: usize, name: &str) -> Result<usize> {
        self.actions[state]
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAction {
                state: self.states[state].clone(),
                action: name.to_string(),
            })
    }
}

// Deterministic view of one action: the unique surviving successor (compact
// non-target index) and its branch probability; successor None when the
// action sends all mass to the target.
struct DetEdge {
    successor: Option<usize>,
    survival: f64,
}

fn deterministic_graph(mdp: &Mdp) -> Result<Vec<Vec<DetEdge>>> {
    let non_target = mdp.non_target_states();
    let compact: Vec<Option<usize>> = {
        let mut map = vec![None; mdp.n_states()];
        for (i, &s) in non_target.iter().enumerate() {
            map[s] = Some(i);
        }
        map
    };
    let mut violations = Vec::new();
    let mut graph = Vec::with_capacity(non_target.len());
    for &s in &non_target {
        let mut edges = Vec::new();
        for action in mdp.actions(s) {
            let positive: Vec<usize> = mdp
                .non_target_states()
                .into_iter()
                .filter(|&z| action.row[z] > 0.0)
                .collect();
            if positive.len() > 1 {
                violations.push((mdp.state_name(s).to_string(), action.name.clone()));
                continue;
            }
            match positive.first() {
                Some(&z) => edges.push(DetEdge {
                    successor: Some(compact[z].unwrap()),
                    survival: action.row[z],
                }),
                None => edges.push(DetEdge {
                    successor: None,
                    survival: 0.0,
                }),
            }
        }
        graph.push(edges);
    }
    if !violations.is_empty() {
        return Err(Error::NonDeterministic { pairs: violations });
    }
    Ok(graph)
}

/// Log transform of a deterministic MDP: successor ω(s,a) is the unique
/// surviving state, payoff −log p(ω|s,a) under Reach and +log p under
/// Safety. Requires a normalized input (no action may jump to the target
/// with probability 1, or the payoff would be infinite).
pub fn to_average_mdp(mdp: &Mdp) -> Result<AverageMdp> {
    let graph = deterministic_graph(mdp)?;
    let non_target = mdp.non_target_states();
    let mut actions: Vec<Vec<AvgAction>> = Vec::with_capacity(non_target.len());
    for (i, &s) in non_target.iter().enumerate() {
        let mut row = Vec::new();
        for (a, edge) in graph[i].iter().enumerate() {
            let successor = edge.successor.ok_or_else(|| {
                Error::Domain(format!(
                    "action {} at state {} jumps to the target with probability 1; normalize first",
                    mdp.actions(s)[a].name,
                    mdp.state_name(s)
                ))
            })?;
            let payoff = match mdp.objective() {
                Objective::Reach => -edge.survival.ln(),
                Objective::Safety => edge.survival.ln(),
            };
            row.push(AvgAction {
                name: mdp.actions(s)[a].name.clone(),
                successor,
                payoff,
            });
        }
        actions.push(row);
    }
    Ok(AverageMdp {
        states: non_target
            .iter()
            .map(|&s| mdp.state_name(s).to_string())
            .collect(),
        actions,
        source_n: mdp.n_states(),
        source_target: mdp.target(),
        source_state_indices: non_target,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub label: String,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopReport {
    pub loops: Vec<Loop>,
    /// Largest strictly negative loop value, when one exists.
    pub delta: Option<f64>,
}

impl LoopReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,phi\n");
        for l in &self.loops {
            out.push_str(&format!("{},{:.16e}\n", l.label, l.phi));
        }
        match self.delta {
            Some(d) => out.push_str(&format!("delta,{d:.16e}\n")),
            None => out.push_str("delta,none\n"),
        }
        out
    }

    /// Parses what to_csv emits; loop labels come back without their typed
    /// index lists.
    pub fn from_csv(text: &str) -> Result<LoopReport> {
        let bad = |line: usize, what: &str| Error::Parse {
            context: format!("loop csv line {line}"),
            detail: what.to_string(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "cycle,phi")) => {}
            _ => return Err(bad(1, "missing header")),
        }
        let mut loops = Vec::new();
        let mut delta = None;
        let mut saw_delta = false;
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (label, value) = line
                .split_once(',')
                .ok_or_else(|| bad(i + 1, "expected label,value"))?;
            if label == "delta" {
                saw_delta = true;
                if value != "none" {
                    delta = Some(value.parse().map_err(|_| bad(i + 1, "bad delta"))?);
                }
                continue;
            }
            loops.push(Loop {
                states: Vec::new(),
                actions: Vec::new(),
                label: label.to_string(),
                phi: value.parse().map_err(|_| bad(i + 1, "bad phi"))?,
            });
        }
        if !saw_delta {
            return Err(Error::Parse {
                context: "loop csv".into(),
                detail: "missing delta summary row".into(),
            });
        }
        Ok(LoopReport { loops, delta })
    }
}

fn cycles_from(
    avg: &AverageMdp,
    root: usize,
    current: usize,
    path_states: &mut Vec<usize>,
    path_actions: &mut Vec<usize>,
    on_path: &mut Vec<bool>,
    out: &mut Vec<(Vec<usize>, Vec<usize>)>,
) {
    for (a, action) in avg.actions[current].iter().enumerate() {
        let succ = action.successor;
        if succ == root {
            let mut actions = path_actions.clone();
            actions.push(a);
            out.push((path_states.clone(), actions));
        } else if succ > root && !on_path[succ] {
            on_path[succ] = true;
            path_states.push(succ);
            path_actions.push(a);
            cycles_from(avg, root, succ, path_states, path_actions, on_path, out);
            path_actions.pop();
            path_states.pop();
            on_path[succ] = false;
        }
    }
}

/// Enumerates all simple cycles of the successor multigraph with their
/// payoff sums. Each cycle is rooted at its minimal state index, so every
/// cycle appears exactly once.
pub fn loop_report(avg: &AverageMdp, state_cap: usize) -> Result<LoopReport> {
    let m = avg.states.len();
    if m > state_cap {
        return Err(Error::Domain(format!(
            "loop enumeration limited to {state_cap} states, instance has {m}"
        )));
    }
    let mut raw = Vec::new();
    for root in 0..m {
        let mut on_path = vec![false; m];
        on_path[root] = true;
        let mut states = vec![root];
        let mut actions = Vec::new();
        cycles_from(avg, root, root, &mut states, &mut actions, &mut on_path, &mut raw);
    }

    let loops: Vec<Loop> = raw
        .into_iter()
        .map(|(states, actions)| {
            let phi: f64 = states
                .iter()
                .zip(&actions)
                .map(|(&s, &a)| avg.actions[s][a].payoff)
                .sum();
            let label = states
                .iter()
                .zip(&actions)
                .map(|(&s, &a)| format!("{}:{}", avg.states[s], avg.actions[s][a].name))
                .collect::<Vec<_>>()
                .join("|");
            Loop {
                states,
                actions,
                label,
                phi,
            }
        })
        .collect();
    let delta = loops
        .iter()
        .map(|l| l.phi)
        .filter(|&phi| phi < 0.0)
        .fold(None, |acc: Option<f64>, phi| {
            Some(acc.map_or(phi, |best| best.max(phi)))
        });
    Ok(LoopReport { loops, delta })
}

/// Discount grid as distances from 1; β = 1 − eps keeps the normalized
/// evaluation exact where 1 − β would cancel.
const BETA_EPS_GRID: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

// Normalized discounted value v̄(s) = (1−β)·Σ β^{t−1} payoff_t of a pure
// policy, via orbit decomposition: closed form on the policy's limit cycle,
// then back-substitution along the tail. Stays accurate at β = 1 − 1e-6
// where a naive linear solve loses half the digits.
fn eval_policy_normalized(avg: &AverageMdp, policy: &[usize], eps: f64) -> Vec<f64> {
    let beta = 1.0 - eps;
    let ln_beta = (-eps).ln_1p();
    let m = avg.states.len();
    let f = |s: usize| avg.actions[s][policy[s]].successor;
    let g = |s: usize| avg.actions[s][policy[s]].payoff;

    let mut vbar = vec![0.0f64; m];
    let mut color = vec![0u8; m];
    for start in 0..m {
        if color[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut s = start;
        while color[s] == 0 {
            color[s] = 1;
            path.push(s);
            s = f(s);
        }
        if color[s] == 1 {
            let pos = path.iter().position(|&x| x == s).unwrap();
            let cycle = &path[pos..];
            let l = cycle.len();
            let denom = -(l as f64 * ln_beta).exp_m1();
            for j in 0..l {
                let mut sum = 0.0;
                let mut bpow = 1.0;
                for i in 0..l {
                    sum += bpow * g(cycle[(j + i) % l]);
                    bpow *= beta;
                }
                vbar[cycle[j]] = eps * sum / denom;
            }
            for &c in cycle {
                color[c] = 2;
            }
            for &t in path[..pos].iter().rev() {
                vbar[t] = eps * g(t) + beta * vbar[f(t)];
                color[t] = 2;
            }
        } else {
            for &t in path.iter().rev() {
                vbar[t] = eps * g(t) + beta * vbar[f(t)];
                color[t] = 2;
            }
        }
    }
    vbar
}

fn beta_optimal_policy(avg: &AverageMdp, eps: f64, start: &[usize]) -> Result<Vec<usize>> {
    let beta = 1.0 - eps;
    let m = avg.states.len();
    let mut policy = start.to_vec();
    for _ in 0..1000 {
        let vbar = eval_policy_normalized(avg, &policy, eps);
        let mut changed = false;
        for s in 0..m {
            let q = |a: usize| {
                let act = &avg.actions[s][a];
                eps * act.payoff + beta * vbar[act.successor]
            };
            // Ties keep the incumbent, so iteration is deterministic and
            // cannot oscillate.
            let mut best = policy[s];
            let mut best_q = q(best);
            for a in 0..avg.actions[s].len() {
                if q(a) > best_q {
                    best = a;
                    best_q = q(a);
                }
            }
            if best != policy[s] {
                policy[s] = best;
                changed = true;
            }
        }
        if !changed {
            let vbar = eval_policy_normalized(avg, &policy, eps);
            let residual = (0..m)
                .flat_map(|s| {
                    let vbar = &vbar;
                    (0..avg.actions[s].len()).map(move |a| {
                        let act = &avg.actions[s][a];
                        eps * act.payoff + beta * vbar[act.successor] - vbar[s]
                    })
                })
                .fold(0.0f64, f64::max);
            if residual > 1e-10 {
                return Err(Error::BlackwellUnstable);
            }
            return Ok(policy);
        }
    }
    Err(Error::BlackwellUnstable)
}

/// Pure stationary policy that is β-optimal at every grid point and stable
/// across the last three, mapped back onto the source MDP's states.
pub fn blackwell_optimal(avg: &AverageMdp) -> Result<StationaryStrategy> {
    let mut policy = vec![0usize; avg.states.len()];
    let mut tail_policies = Vec::new();
    for (i, &eps) in BETA_EPS_GRID.iter().enumerate() {
        policy = beta_optimal_policy(avg, eps, &policy)?;
        if i >= BETA_EPS_GRID.len() - 3 {
            tail_policies.push(policy.clone());
        }
    }
    if !tail_policies.iter().all(|p| *p == tail_policies[0]) {
        return Err(Error::BlackwellUnstable);
    }

    let mut weights = vec![Vec::new(); avg.source_n];
    for (i, &src) in avg.source_state_indices.iter().enumerate() {
        let mut w = vec![0.0; avg.actions[i].len()];
        w[policy[i]] = 1.0;
        weights[src] = w;
    }
    Ok(StationaryStrategy::from_raw_weights(weights))
}

/// Average payoff of the policy's limit cycle from each state.
pub fn policy_gains(avg: &AverageMdp, policy: &[usize]) -> Vec<f64> {
    let m = avg.states.len();
    let f = |s: usize| avg.actions[s][policy[s]].successor;
    let mut gains = vec![f64::NAN; m];
    for start in 0..m {
        if !gains[start].is_nan() {
            continue;
        }
        let mut seen = vec![usize::MAX; m];
        let mut order = Vec::new();
        let mut s = start;
        while seen[s] == usize::MAX && gains[s].is_nan() {
            seen[s] = order.len();
            order.push(s);
            s = f(s);
        }
        let gain = if gains[s].is_nan() {
            let cycle = &order[seen[s]..];
            cycle
                .iter()
                .map(|&c| avg.actions[c][policy[c]].payoff)
                .sum::<f64>()
                / cycle.len() as f64
        } else {
            gains[s]
        };
        for &t in &order {
            gains[t] = gain;
        }
    }
    gains
}

/// Best simple-cycle mean payoff over all cycles reachable from s under any
/// action choices; the optimal average payoff of a deterministic MDP.
pub fn max_reachable_cycle_mean(avg: &AverageMdp, s: usize, state_cap: usize) -> Result<f64> {
    let m = avg.states.len();
    let mut reach = vec![false; m];
    reach[s] = true;
    let mut stack = vec![s];
    while let Some(u) = stack.pop() {
        for a in &avg.actions[u] {
            if !reach[a.successor] {
                reach[a.successor] = true;
                stack.push(a.successor);
            }
        }
    }
    let report = loop_report(avg, state_cap)?;
    report
        .loops
        .iter()
        .filter(|l| reach[l.states[0]])
        .map(|l| l.phi / l.states.len() as f64)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |best| best.max(v)))
        })
        .ok_or_else(|| Error::Domain("no cycle reachable; successor map is not total".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathWitness {
    pub initial: String,
    pub actions: Vec<String>,
    pub strict_periods: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotWeaklyOvertaken {
    pub passed: bool,
    pub witness: Option<PathWitness>,
    /// Strict periods demanded of a witness: max(2, ⌈(H−ws)/10⌉), so a
    /// single favorable commitment bump does not count as weak overtaking.
    pub min_strict_periods: usize,
}

fn count_paths(graph: &[Vec<DetEdge>], depth: usize) -> u128 {
    let m = graph.len();
    let mut counts = vec![1u128; m];
    for _ in 0..depth {
        let mut next = vec![0u128; m];
        for s in 0..m {
            for e in &graph[s] {
                let add = match e.successor {
                    Some(z) => counts[z],
                    None => 1,
                };
                next[s] = next[s].saturating_add(add);
            }
        }
        counts = next;
    }
    counts.iter().fold(0u128, |acc, &c| acc.saturating_add(c))
}

struct PathSearch<'a> {
    graph: &'a [Vec<DetEdge>],
    action_names: &'a [Vec<String>],
    cand_ls: &'a [f64],
    h: usize,
    window_start: usize,
    need: usize,
    reach: bool,
    ls: Vec<f64>,
    actions: Vec<usize>,
    witness: Option<(Vec<usize>, Vec<usize>)>,
}

impl PathSearch<'_> {
    // Walks every pure action path; at full depth decides whether the path
    // weakly dominates the candidate on the window.
    fn dfs(&mut self, state: Option<usize>) {
        if self.witness.is_some() {
            return;
        }
        let t = self.ls.len();
        if t == self.h {
            self.evaluate();
            return;
        }
        match state {
            None => {
                self.ls.push(f64::NEG_INFINITY);
                self.dfs(None);
                self.ls.pop();
            }
            Some(s) => {
                for (a, e) in self.graph[s].iter().enumerate() {
                    let prev = self.ls[t - 1];
                    self.ls.push(prev + e.survival.ln());
                    self.actions.push(a);
                    self.dfs(e.successor);
                    self.actions.pop();
                    self.ls.pop();
                    if self.witness.is_some() {
                        return;
                    }
                }
            }
        }
    }

    fn evaluate(&mut self) {
        let mut strict = Vec::new();
        for t in self.window_start..=self.h {
            let path = self.ls[t - 1];
            let cand = self.cand_ls[t - 1];
            // Reach favors lower survival; Safety favors higher.
            let (favored, unfavored) = if self.reach {
                (path < cand - LOG_TIE_TOL, path > cand + LOG_TIE_TOL)
            } else {
                (path > cand + LOG_TIE_TOL, path < cand - LOG_TIE_TOL)
            };
            if unfavored {
                return;
            }
            if favored {
                strict.push(t);
            }
        }
        if strict.len() >= self.need {
            self.witness = Some((self.actions.clone(), strict));
        }
    }
}

/// Checks that no pure action path from any non-target initial state weakly
/// dominates the candidate's curve on [window_start, H]: at least as good
/// throughout (within a log-survival tie tolerance) and strictly better at
/// `min_strict_periods` periods. Curves are cumulative log-survival sums.
pub fn not_weakly_overtaken_check(
    mdp: &Mdp,
    candidate: &StationaryStrategy,
    h: usize,
    window_start: usize,
    cap: u64,
) -> Result<NotWeaklyOvertaken> {
    if !candidate.is_pure() {
        return Err(Error::Domain("candidate must be a pure strategy".into()));
    }
    if window_start < 1 || window_start > h || h < 2 {
        return Err(Error::Domain(format!(
            "bad window [{window_start}, {h}]"
        )));
    }
    let graph = deterministic_graph(mdp)?;
    let total = count_paths(&graph, h - 1);
    if total > cap as u128 {
        return Err(Error::PathCap { count: total, cap });
    }

    let non_target = mdp.non_target_states();
    let action_names: Vec<Vec<String>> = non_target
        .iter()
        .map(|&s| mdp.actions(s).iter().map(|a| a.name.clone()).collect())
        .collect();
    let need = 2usize.max((h - window_start).div_ceil(10));
    let reach = mdp.objective() == Objective::Reach;

    for (i, &s0) in non_target.iter().enumerate() {
        // Candidate's own log-survival sequence from this start.
        let mut cand_ls = vec![0.0f64];
        let mut state = Some(i);
        for _ in 1..h {
            match state {
                Some(s) => {
                    let a = candidate.chosen_action(non_target[s]).unwrap();
                    let e = &graph[s][a];
                    cand_ls.push(cand_ls.last().unwrap() + e.survival.ln());
                    state = e.successor;
                }
                None => cand_ls.push(f64::NEG_INFINITY),
            }
        }

        let mut search = PathSearch {
            graph: &graph,
            action_names: &action_names,
            cand_ls: &cand_ls,
            h,
            window_start,
            need,
            reach,
            ls: vec![0.0],
            actions: Vec::new(),
            witness: None,
        };
        search.dfs(Some(i));
        if let Some((actions, strict)) = search.witness {
            // Rebuild the named action sequence along the witness path.
            let mut names = Vec::new();
            let mut s = i;
            for &a in &actions {
                names.push(search.action_names[s][a].clone());
                match graph[s][a].successor {
                    Some(z) => s = z,
                    None => break,
                }
            }
            return Ok(NotWeaklyOvertaken {
                passed: false,
                witness: Some(PathWitness {
                    initial: mdp.state_name(s0).to_string(),
                    actions: names,
                    strict_periods: strict,
                }),
                min_strict_periods: need,
            });
        }
    }
    Ok(NotWeaklyOvertaken {
        passed: true,
        witness: None,
        min_strict_periods: need,
    })
}

/// Seeded deterministic Reach MDP: every action splits mass between one
/// non-target successor and the target. Instances are resampled (still
/// seed-deterministically) until the pure action paths to `depth` fit the
/// cap, so the path oracle stays tractable.
pub fn sample_deterministic(
    n_states: usize,
    max_actions: usize,
    seed: u64,
    depth: usize,
    cap: u64,
) -> Result<Mdp> {
    if n_states < 2 || max_actions < 1 {
        return Err(Error::Domain(
            "need at least 2 states and 1 action per state".into(),
        ));
    }
    let m = n_states - 1;
    let state_names: Vec<String> = (1..=n_states).map(|i| format!("s{i}")).collect();
    let action_names: Vec<String> = (1..=max_actions).map(|i| format!("a{i}")).collect();

    for attempt in 0u64..1000 {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9E3779B97F4A7C15)));
        let mut spec: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        for _ in 0..m {
            let k = rng.gen_range(1..=max_actions);
            let mut actions = Vec::with_capacity(k);
            for _ in 0..k {
                let succ = rng.gen_range(0..m);
                let survival = rng.gen_range(0.1..0.9);
                actions.push((succ, survival));
            }
            spec.push(actions);
        }

        let graph: Vec<Vec<DetEdge>> = spec
            .iter()
            .map(|actions| {
                actions
                    .iter()
                    .map(|&(succ, survival)| DetEdge {
                        successor: Some(succ),
                        survival,
                    })
                    .collect()
            })
            .collect();
        if count_paths(&graph, depth) > cap as u128 {
            continue;
        }

        let mut kernel: Vec<(&str, &str, Vec<(&str, f64)>)> = Vec::new();
        for (s, actions) in spec.iter().enumerate() {
            for (a, &(succ, survival)) in actions.iter().enumerate() {
                kernel.push((
                    &state_names[s],
                    &action_names[a],
                    vec![
                        (state_names[succ].as_str(), survival),
                        (state_names[m].as_str(), 1.0 - survival),
                    ],
                ));
            }
        }
        let kernel_slices: Vec<(&str, &str, &[(&str, f64)])> = kernel
            .iter()
            .map(|(s, a, row)| (*s, *a, row.as_slice()))
            .collect();
        let state_refs: Vec<&str> = state_names.iter().map(String::as_str).collect();
        return Mdp::build(&state_refs, &state_names[m], Objective::Reach, &kernel_slices);
    }
    Err(Error::Domain(
        "no deterministic instance fits the path cap for this seed".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::reach_curve;

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

    fn example2() -> Mdp {
        Mdp::build(
            &["x", "y", "z", "s*"],
            "s*",
            Objective::Reach,
            &[
                ("x", "a", &[("x", 0.5), ("s*", 0.5)]),
                ("x", "b", &[("y", 0.25), ("s*", 0.75)]),
                ("y", "d", &[("z", 1.0)]),
                ("z", "e", &[("z", 0.5), ("s*", 0.5)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn transform_of_example1_has_expected_successors_and_payoffs() {
        let avg = to_average_mdp(&example1(Objective::Reach)).unwrap();
        assert_eq!(avg.states, ["x", "y", "z"]);
        let xa = &avg.actions[0][0];
        assert_eq!(xa.successor, 1);
        assert!((xa.payoff - -(0.89f64.ln())).abs() <= 1e-15);
        let xb = &avg.actions[0][1];
        assert_eq!(xb.successor, 2);
        assert!((xb.payoff - -(0.5f64.ln())).abs() <= 1e-15);
    }

    #[test]
    fn transform_signs_flip_for_safety() {
        let reach = to_average_mdp(&example1(Objective::Reach)).unwrap();
        let safety = to_average_mdp(&example1(Objective::Safety)).unwrap();
        for (r, s) in reach.actions.iter().flatten().zip(safety.actions.iter().flatten()) {
            assert_eq!(r.payoff, -s.payoff);
        }
    }

    #[test]
    fn transform_of_example2_action_b_pays_log_four() {
        let avg = to_average_mdp(&example2()).unwrap();
        let xb = &avg.actions[0][1];
        assert_eq!(xb.successor, 1);
        assert!((xb.payoff - -(0.25f64.ln())).abs() <= 1e-15);
        // Full-survival step costs nothing.
        assert_eq!(avg.actions[1][0].payoff, 0.0);
    }

    #[test]
    fn transform_rejects_nondeterministic_rows() {
        let mdp = Mdp::build(
            &["x", "y", "t"],
            "t",
            Objective::Reach,
            &[
                ("x", "a", &[("x", 0.4), ("y", 0.4), ("t", 0.2)]),
                ("y", "c", &[("y", 0.5), ("t", 0.5)]),
            ],
        )
        .unwrap();
        match to_average_mdp(&mdp) {
            Err(Error::NonDeterministic { pairs }) => {
                assert_eq!(pairs, vec![("x".to_string(), "a".to_string())]);
            }
            other => panic!("expected determinism error, got {other:?}"),
        }
    }

    #[test]
    fn transform_rejects_unnormalized_target_jumps() {
        let mdp = Mdp::build(
            &["x", "y", "t"],
            "t",
            Objective::Reach,
            &[
                ("x", "a", &[("y", 0.5), ("t", 0.5)]),
                ("y", "c", &[("t", 1.0)]),
            ],
        )
        .unwrap();
        let err = to_average_mdp(&mdp).unwrap_err();
        assert!(err.to_string().contains("normalize"));
    }

    #[test]
    fn example1_loops_are_two_positive_self_loops() {
        let avg = to_average_mdp(&example1(Objective::Reach)).unwrap();
        let report = loop_report(&avg, DEFAULT_LOOP_STATE_CAP).unwrap();
        assert_eq!(report.loops.len(), 2);
        let labels: Vec<&str> = report.loops.iter().map(|l| l.label.as_str()).collect();
        assert_eq!(labels, ["y:c", "z:d"]);
        assert!((report.loops[0].phi - -(0.89f64.ln())).abs() <= 1e-15);
        assert!(report.loops.iter().all(|l| l.phi > 0.0));
        assert_eq!(report.delta, None);
    }

    fn chain_of_self_loops(payoffs: &[f64]) -> AverageMdp {
        let states: Vec<String> = (0..payoffs.len()).map(|i| format!("v{i}")).collect();
        let actions = payoffs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                vec![AvgAction {
                    name: "loop".into(),
                    successor: i,
                    payoff: p,
                }]
            })
            .collect();
        AverageMdp::standalone(states, actions)
    }

    #[test]
    fn delta_is_the_largest_negative_loop_value() {
        let report = loop_report(&chain_of_self_loops(&[-1.0, -2.0]), 12).unwrap();
        assert_eq!(report.delta, Some(-1.0));
    }

    #[test]
    fn zero_loops_do_not_enter_delta() {
        let report = loop_report(&chain_of_self_loops(&[0.0]), 12).unwrap();
        assert_eq!(report.delta, None);
        assert_eq!(report.loops[0].phi, 0.0);
    }

    #[test]
    fn loop_enumeration_covers_longer_cycles_once() {
        // Two states with a 2-cycle plus a self-loop at each.
        let avg = AverageMdp::standalone(
            vec!["u".into(), "v".into()],
            vec![
                vec![
                    AvgAction { name: "stay".into(), successor: 0, payoff: 1.0 },
                    AvgAction { name: "go".into(), successor: 1, payoff: 2.0 },
                ],
                vec![
                    AvgAction { name: "stay".into(), successor: 1, payoff: 3.0 },
                    AvgAction { name: "back".into(), successor: 0, payoff: 4.0 },
                ],
            ],
        );
        let report = loop_report(&avg, 12).unwrap();
        let labels: Vec<&str> = report.loops.iter().map(|l| l.label.as_str()).collect();
        assert_eq!(labels, ["u:stay", "u:go|v:back", "v:stay"]);
        assert_eq!(report.loops[1].phi, 6.0);
    }

    #[test]
    fn loop_state_cap_is_enforced() {
        let avg = chain_of_self_loops(&vec![0.5; 13]);
        assert!(loop_report(&avg, 12).is_err());
    }

    #[test]
    fn loop_csv_round_trips() {
        let avg = to_average_mdp(&example1(Objective::Reach)).unwrap();
        let report = loop_report(&avg, 12).unwrap();
        let csv = report.to_csv();
        assert_eq!(LoopReport::from_csv(&csv).unwrap().to_csv(), csv);
        let negatives = loop_report(&chain_of_self_loops(&[-1.0]), 12).unwrap();
        let csv = negatives.to_csv();
        assert_eq!(LoopReport::from_csv(&csv).unwrap().to_csv(), csv);
    }

    #[test]
    fn blackwell_picks_the_overtaking_action_on_example1() {
        let mdp = example1(Objective::Reach);
        let avg = to_average_mdp(&mdp).unwrap();
        let policy = blackwell_optimal(&avg).unwrap();
        assert_eq!(policy.chosen_action(0), Some(0));
        assert!(policy.is_pure());
    }

    #[test]
    fn blackwell_on_example2_prefers_the_committing_action() {
        // Both actions tie in long-run curve terms; b is strictly better at
        // every discount factor, so the grid settles on it.
        let avg = to_average_mdp(&example2()).unwrap();
        let policy = blackwell_optimal(&avg).unwrap();
        assert_eq!(policy.chosen_action(0), Some(1));
    }

    #[test]
    fn single_action_instances_return_the_unique_policy() {
        let mdp = Mdp::build(
            &["x", "t"],
            "t",
            Objective::Reach,
            &[("x", "a", &[("x", 0.3), ("t", 0.7)])],
        )
        .unwrap();
        let avg = to_average_mdp(&mdp).unwrap();
        let policy = blackwell_optimal(&avg).unwrap();
        assert_eq!(policy.chosen_action(0), Some(0));
    }

    #[test]
    fn blackwell_gains_match_best_reachable_cycle_means() {
        for seed in 0..10 {
            let mdp = sample_deterministic(5, 3, seed, 19, DEFAULT_PATH_CAP).unwrap();
            let avg = to_average_mdp(&mdp).unwrap();
            let strategy = blackwell_optimal(&avg).unwrap();
            let policy: Vec<usize> = avg
                .source_state_indices
                .iter()
                .map(|&src| strategy.chosen_action(src).unwrap())
                .collect();
            let gains = policy_gains(&avg, &policy);
            for s in 0..avg.states.len() {
                let best = max_reachable_cycle_mean(&avg, s, 12).unwrap();
                assert!(
                    (gains[s] - best).abs() <= 1e-10,
                    "seed {seed} state {s}: gain {} vs best cycle mean {best}",
                    gains[s]
                );
            }
        }
    }

    #[test]
    fn survival_identity_links_transform_and_curves() {
        let mdp = example1(Objective::Reach);
        let sigma =
            StationaryStrategy::pure(&mdp, &[("x", "a"), ("y", "c"), ("z", "d")]).unwrap();
        let curve = reach_curve(&mdp, &sigma, 0, 40).unwrap();
        let avg = to_average_mdp(&mdp).unwrap();
        // Payoff sum along the candidate orbit equals −log survival.
        let mut sum = 0.0;
        let mut s = 0usize;
        for t in 2..=40 {
            sum += avg.actions[s][0].payoff;
            s = avg.actions[s][0].successor;
            let survival = 1.0 - curve.value(t);
            assert!((survival - (-sum).exp()).abs() <= 1e-12);
        }
    }

    #[test]
    fn candidate_a_forever_is_not_weakly_overtaken_in_example1() {
        let mdp = example1(Objective::Reach);
        let a = StationaryStrategy::pure(&mdp, &[("x", "a"), ("y", "c"), ("z", "d")]).unwrap();
        let out = not_weakly_overtaken_check(&mdp, &a, 200, 60, DEFAULT_PATH_CAP).unwrap();
        assert!(out.passed, "witness: {:?}", out.witness);
    }

    #[test]
    fn candidate_b_is_weakly_overtaken_by_the_a_path_in_example1() {
        let mdp = example1(Objective::Reach);
        let b = StationaryStrategy::pure(&mdp, &[("x", "b"), ("y", "c"), ("z", "d")]).unwrap();
        let out = not_weakly_overtaken_check(&mdp, &b, 200, 60, DEFAULT_PATH_CAP).unwrap();
        assert!(!out.passed);
        let witness = out.witness.unwrap();
        assert_eq!(witness.initial, "x");
        assert_eq!(witness.actions[0], "a");
        assert!(witness.strict_periods.len() >= out.min_strict_periods);
    }

    #[test]
    fn commitment_bumps_do_not_witness_against_a_forever_in_example2() {
        let mdp = example2();
        let a = StationaryStrategy::pure(&mdp, &[("x", "a"), ("y", "d"), ("z", "e")]).unwrap();
        let out = not_weakly_overtaken_check(&mdp, &a, 12, 6, DEFAULT_PATH_CAP).unwrap();
        assert!(out.passed, "witness: {:?}", out.witness);
        // The committing policy passes symmetrically.
        let b = StationaryStrategy::pure(&mdp, &[("x", "b"), ("y", "d"), ("z", "e")]).unwrap();
        let out = not_weakly_overtaken_check(&mdp, &b, 12, 6, DEFAULT_PATH_CAP).unwrap();
        assert!(out.passed, "witness: {:?}", out.witness);
    }

    #[test]
    fn path_cap_is_reported_with_the_count() {
        let mdp = example2();
        let a = StationaryStrategy::pure(&mdp, &[("x", "a"), ("y", "d"), ("z", "e")]).unwrap();
        match not_weakly_overtaken_check(&mdp, &a, 12, 6, 3) {
            Err(Error::PathCap { count, cap }) => {
                assert!(count > 3);
                assert_eq!(cap, 3);
            }
            other => panic!("expected path cap error, got {other:?}"),
        }
    }

    #[test]
    fn sampled_deterministic_instances_are_deterministic_and_capped() {
        for seed in 0..10 {
            let mdp = sample_deterministic(5, 3, seed, 19, DEFAULT_PATH_CAP).unwrap();
            let report = mdp.validate();
            assert!(report.ok);
            assert!(report.determinism);
            let again = sample_deterministic(5, 3, seed, 19, DEFAULT_PATH_CAP).unwrap();
            assert_eq!(mdp, again);
            let graph = deterministic_graph(&mdp).unwrap();
            assert!(count_paths(&graph, 19) <= DEFAULT_PATH_CAP as u128);
        }
    }
}
