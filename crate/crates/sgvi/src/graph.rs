//! Graph analysis: end components, bottom SCCs, attractors and the states
//! with infinite total reward.

use crate::error::{Error, Result};
use crate::model::{Objective, ObjectiveKind, Player, StochasticGame};

/// A set of states together with a set of their actions such that the
/// actions never leave the set and the induced graph is strongly connected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EndComponent {
    /// Sorted state indices.
    pub states: Vec<usize>,
    /// Sorted `(state, action)` pairs.
    pub actions: Vec<(usize, usize)>,
}

/// An action of a component's state whose support leaves the component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExitAction {
    pub state: usize,
    pub action: usize,
}

impl EndComponent {
    pub fn new(mut states: Vec<usize>, mut actions: Vec<(usize, usize)>) -> Self {
        states.sort_unstable();
        states.dedup();
        actions.sort_unstable();
        actions.dedup();
        EndComponent { states, actions }
    }

    pub fn contains(&self, s: usize) -> bool {
        self.states.binary_search(&s).is_ok()
    }

    pub fn actions_of(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.actions.partition_point(|&(t, _)| t < s);
        self.actions[start..].iter().take_while(move |&&(t, _)| t == s).map(|&(_, a)| a)
    }

    pub fn member_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &s in &self.states {
            mask[s] = true;
        }
        mask
    }

    /// All actions of the component's states in `game` that leave it.
    pub fn exits(&self, game: &StochasticGame) -> Vec<ExitAction> {
        let member = self.member_mask(game.num_states());
        let mut out = Vec::new();
        for &s in &self.states {
            for (a, action) in game.actions(s).iter().enumerate() {
                if !action.stays_within(&member) {
                    out.push(ExitAction { state: s, action: a });
                }
            }
        }
        out
    }

    /// Checks the definition directly: non-empty, every state has an action,
    /// actions stay inside, and the action graph is strongly connected.
    pub fn is_valid_in(&self, game: &StochasticGame) -> bool {
        let n = game.num_states();
        if self.states.is_empty() || self.states.iter().any(|&s| s >= n) {
            return false;
        }
        let member = self.member_mask(n);
        for &(s, a) in &self.actions {
            if !member[s] || a >= game.actions(s).len() || !game.actions(s)[a].stays_within(&member) {
                return false;
            }
        }
        if self.states.iter().any(|&s| self.actions_of(s).next().is_none()) {
            return false;
        }
        let reach_from = |start: usize, forward: bool| {
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &(s, a) in &self.actions {
                    for t in game.actions(s)[a].support() {
                        let (from, to) = if forward { (s, t) } else { (t, s) };
                        if from == u && !seen[to] {
                            seen[to] = true;
                            stack.push(to);
                        }
                    }
                }
            }
            seen
        };
        let root = self.states[0];
        let fwd = reach_from(root, true);
        let bwd = reach_from(root, false);
        self.states.iter().all(|&s| fwd[s] && bwd[s])
    }
}

/// Strongly connected components (Tarjan, iterative). Returns the component
/// id of every node; nodes with `alive[v] == false` get `usize::MAX`.
pub(crate) fn scc_ids(adjacency: &[Vec<usize>], alive: &[bool]) -> Vec<usize> {
    let n = adjacency.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if !alive[root] || index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if let Some(&w) = adjacency[v].get(*edge) {
                *edge += 1;
                if !alive[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack holds the component");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Maximal end components of the sub-game where state `s` may only use the
/// actions `a` with `allowed[s][a]`. Ordered by smallest state index.
pub fn mecs_within(game: &StochasticGame, allowed: &[Vec<bool>]) -> Vec<EndComponent> {
    let n = game.num_states();
    let mut allowed = allowed.to_vec();
    let mut alive: Vec<bool> = allowed.iter().map(|acts| acts.iter().any(|&b| b)).collect();
    loop {
        let adjacency: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                let mut succ: Vec<usize> = game
                    .actions(s)
                    .iter()
                    .enumerate()
                    .filter(|&(a, _)| alive[s] && allowed[s][a])
                    .flat_map(|(_, act)| act.support())
                    .collect();
                succ.sort_unstable();
                succ.dedup();
                succ
            })
            .collect();
        let comp = scc_ids(&adjacency, &alive);
        let mut changed = false;
        for s in 0..n {
            if !(alive[s]) {
                continue;
            }
            for (a, action) in game.actions(s).iter().enumerate() {
                if allowed[s][a] && action.support().any(|t| !alive[t] || comp[t] != comp[s]) {
                    allowed[s][a] = false;
                    changed = true;
                }
            }
            if !allowed[s].iter().any(|&b| b) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut groups: Vec<(usize, EndComponent)> = Vec::new();
            for s in 0..n {
                if !(alive[s]) {
                    continue;
                }
                let acts = (0..game.actions(s).len()).filter(|&a| allowed[s][a]).map(|a| (s, a));
                match groups.iter_mut().find(|(c, _)| *c == comp[s]) {
                    Some((_, ec)) => {
                        ec.states.push(s);
                        ec.actions.extend(acts);
                    }
                    None => groups.push((comp[s], EndComponent { states: vec![s], actions: acts.collect() })),
                }
            }
            return groups.into_iter().map(|(_, ec)| ec).collect();
        }
    }
}

pub(crate) fn all_actions(game: &StochasticGame) -> Vec<Vec<bool>> {
    (0..game.num_states()).map(|s| vec![true; game.actions(s).len()]).collect()
}

/// Maximal end components, ordered by smallest state index.
pub fn mecs(game: &StochasticGame) -> Vec<EndComponent> {
    mecs_within(game, &all_actions(game))
}

/// Bottom strongly connected components of a Markov chain.
pub fn bsccs(chain: &StochasticGame) -> Result<Vec<Vec<usize>>> {
    if let Some(s) = (0..chain.num_states()).find(|&s| chain.actions(s).len() != 1) {
        return Err(Error::NotMarkovChain(s));
    }
    let n = chain.num_states();
    let adjacency: Vec<Vec<usize>> = (0..n).map(|s| chain.actions(s)[0].support().collect()).collect();
    let comp = scc_ids(&adjacency, &vec![true; n]);
    let num = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut bottom = vec![true; num];
    for s in 0..n {
        if adjacency[s].iter().any(|&t| comp[t] != comp[s]) {
            bottom[comp[s]] = false;
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; num];
    for s in 0..n {
        let c = comp[s];
        if !bottom[c] {
            continue;
        }
        if slot[c] == usize::MAX {
            slot[c] = out.len();
            out.push(Vec::new());
        }
        out[slot[c]].push(s);
    }
    Ok(out)
}

/// States from which `player` can force a positive probability of reaching
/// `target`: the player needs one action hitting the set, the opponent must
/// hit it with every action.
pub fn positive_attractor(game: &StochasticGame, target: &[bool], player: Player) -> Vec<bool> {
    let n = game.num_states();
    let mut attr = target.to_vec();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !(!attr[s]) {
                continue;
            }
            let hits = |a: &crate::model::Action| a.support().any(|t| attr[t]);
            let joins = if game.owner(s) == player {
                game.actions(s).iter().any(hits)
            } else {
                game.actions(s).iter().all(hits)
            };
            if joins {
                attr[s] = true;
                changed = true;
            }
        }
        if !changed {
            return attr;
        }
    }
}

/// States with a path to `target` when both players cooperate.
pub fn can_reach(game: &StochasticGame, target: &[bool]) -> Vec<bool> {
    let n = game.num_states();
    let mut reach = target.to_vec();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !(!reach[s]) {
                continue;
            }
            if game.actions(s).iter().any(|a| a.support().any(|t| reach[t])) {
                reach[s] = true;
                changed = true;
            }
        }
        if !changed {
            return reach;
        }
    }
}

/// End components that may be simple for some assignment in an MDP induced
/// by fixing `fixed`'s strategy. For total reward with Maximizer fixed,
/// positive-reward states are excluded since Minimizer never stays there.
pub fn msecs(mdp: &StochasticGame, objective: &Objective, fixed: Player) -> Result<Vec<EndComponent>> {
    if !mdp.choices_only_for(fixed.opponent()) {
        return Err(Error::TwoOwner);
    }
    let mut allowed = all_actions(mdp);
    if objective.kind == ObjectiveKind::TotalReward && fixed == Player::Max {
        for s in (0..mdp.num_states()).filter(|&s| mdp.reward(s) > 0.0) {
            allowed[s].iter_mut().for_each(|b| *b = false);
        }
    }
    Ok(mecs_within(mdp, &allowed))
}

/// States from which Maximizer can make the expected total reward infinite:
/// the states where Maximizer wins, with positive probability, the objective
/// of visiting positive-reward states infinitely often.
pub fn infinite_total_reward_states(game: &StochasticGame) -> Vec<bool> {
    let n = game.num_states();
    let positive: Vec<bool> = (0..n).map(|s| game.reward(s) > 0.0).collect();
    let mut win = vec![false; n];
    loop {
        let region: Vec<bool> = win.iter().map(|&w| !w).collect();
        let core = almost_sure_buchi(game, &region, &positive);
        if !core.iter().any(|&b| b) {
            return win;
        }
        let target: Vec<bool> = (0..n).map(|s| win[s] || core[s]).collect();
        win = positive_attractor(game, &target, Player::Max);
    }
}

/// Maximizer's almost-sure winning region for visiting `buchi` infinitely
/// often, in the sub-game on `region` where Minimizer only uses actions that
/// stay inside `region`.
fn almost_sure_buchi(game: &StochasticGame, region: &[bool], buchi: &[bool]) -> Vec<bool> {
    let n = game.num_states();
    let min_usable = |s: usize, a: &crate::model::Action| game.owner(s) == Player::Max || a.stays_within(region);
    let mut z = region.to_vec();
    loop {
        let mut reach: Vec<bool> = (0..n).map(|s| z[s] && buchi[s]).collect();
        loop {
            let mut changed = false;
            for s in 0..n {
                if !(z[s] && !reach[s]) {
                    continue;
                }
                let actions = game.actions(s);
                let joins = match game.owner(s) {
                    Player::Max => actions.iter().any(|a| a.stays_within(&z) && a.support().any(|t| reach[t])),
                    Player::Min => actions.iter().filter(|a| min_usable(s, a)).all(|a| a.support().any(|t| reach[t])),
                };
                if joins {
                    reach[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if (0..n).all(|s| !z[s] || reach[s]) {
            return z;
        }
        let mut bad: Vec<bool> = (0..n).map(|s| !z[s] || !reach[s]).collect();
        loop {
            let mut changed = false;
            for s in 0..n {
                if !(!bad[s]) {
                    continue;
                }
                let actions = game.actions(s);
                let joins = match game.owner(s) {
                    Player::Max => actions.iter().all(|a| a.support().any(|t| bad[t])),
                    Player::Min => actions.iter().filter(|a| min_usable(s, a)).any(|a| a.support().any(|t| bad[t])),
                };
                if joins {
                    bad[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for s in 0..n {
            z[s] = z[s] && !bad[s];
        }
    }
}
