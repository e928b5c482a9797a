//! Exact analysis of Markov chains over any [`Scalar`].

use crate::error::{Error, Result};
use crate::graph::scc_ids;
use crate::model::{Objective, ObjectiveKind, StochasticGame};
use crate::numeric::Scalar;

/// A game with probabilities and rewards converted to `T`.
#[derive(Debug, Clone)]
pub struct NumericGame<T> {
    pub actions: Vec<Vec<Vec<(usize, T)>>>,
    pub reward: Vec<T>,
}

/// A Markov chain: one distribution per state.
#[derive(Debug, Clone)]
pub struct Chain<T> {
    pub succ: Vec<Vec<(usize, T)>>,
    pub reward: Vec<T>,
}

impl<T: Scalar> NumericGame<T> {
    /// Converts every probability and reward. Distributions are rescaled to
    /// sum to exactly one in `T`.
    pub fn from_game(game: &StochasticGame) -> Result<Self> {
        let mut actions = Vec::with_capacity(game.num_states());
        let mut reward = Vec::with_capacity(game.num_states());
        for st in game.states() {
            reward.push(T::from_f64(st.reward)?);
            let mut converted = Vec::with_capacity(st.actions.len());
            for action in &st.actions {
                let mut dist = Vec::with_capacity(action.successors.len());
                for &(t, p) in action.successors.iter().filter(|e| e.1 > 0.0) {
                    dist.push((t, T::from_f64(p)?));
                }
                let sum = dist.iter().fold(T::zero(), |acc, (_, p)| acc + p.clone());
                if sum != T::one() {
                    for entry in &mut dist {
                        entry.1 = entry.1.clone() / sum.clone();
                    }
                }
                converted.push(dist);
            }
            actions.push(converted);
        }
        Ok(NumericGame { actions, reward })
    }

    /// The chain where state `s` plays `choice[s]`.
    pub fn chain(&self, choice: &[usize]) -> Chain<T> {
        Chain {
            succ: self.actions.iter().zip(choice).map(|(acts, &a)| acts[a].clone()).collect(),
            reward: self.reward.clone(),
        }
    }
}

impl Chain<f64> {
    pub fn from_game(game: &StochasticGame) -> Result<Self> {
        if let Some(s) = (0..game.num_states()).find(|&s| game.actions(s).len() != 1) {
            return Err(Error::NotMarkovChain(s));
        }
        Ok(NumericGame::<f64>::from_game(game)?.chain(&vec![0; game.num_states()]))
    }
}

impl<T: Scalar> Chain<T> {
    fn len(&self) -> usize {
        self.succ.len()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        self.succ.iter().map(|d| d.iter().map(|(t, _)| *t).collect()).collect()
    }

    fn reaching(&self, target: &[bool]) -> Vec<bool> {
        let mut reach = target.to_vec();
        loop {
            let mut changed = false;
            for s in 0..self.len() {
                if !reach[s] && self.succ[s].iter().any(|(t, _)| reach[*t]) {
                    reach[s] = true;
                    changed = true;
                }
            }
            if !changed {
                return reach;
            }
        }
    }

    /// Component id of every state and whether each component is bottom.
    fn bottom_components(&self) -> (Vec<usize>, Vec<bool>) {
        let adjacency = self.adjacency();
        let comp = scc_ids(&adjacency, &vec![true; self.len()]);
        let count = comp.iter().max().map_or(0, |m| m + 1);
        let mut bottom = vec![true; count];
        for (s, succ) in adjacency.iter().enumerate() {
            if succ.iter().any(|&t| comp[t] != comp[s]) {
                bottom[comp[s]] = false;
            }
        }
        (comp, bottom)
    }

    /// Solves `x(s) = b(s) + sum_t P(s,t) x(t)` on `unknown`, where states
    /// outside it have the fixed values `known`.
    fn solve_on(&self, unknown: &[bool], b: &[T], known: &[T]) -> Result<Vec<T>> {
        let index: Vec<usize> = (0..self.len()).filter(|&s| unknown[s]).collect();
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &s) in index.iter().enumerate() {
            pos[s] = i;
        }
        let m = index.len();
        let mut a = vec![vec![T::zero(); m]; m];
        let mut rhs = Vec::with_capacity(m);
        for (i, &s) in index.iter().enumerate() {
            a[i][i] = T::one();
            let mut acc = b[s].clone();
            for (t, p) in &self.succ[s] {
                if unknown[*t] {
                    a[i][pos[*t]] = a[i][pos[*t]].clone() - p.clone();
                } else {
                    acc = acc + p.clone() * known[*t].clone();
                }
            }
            rhs.push(acc);
        }
        let solution = if m == 0 { Vec::new() } else { T::solve_transient(a, rhs)? };
        let mut out = known.to_vec();
        for (i, &s) in index.iter().enumerate() {
            out[s] = solution[i].clone();
        }
        Ok(out)
    }

    fn reach_probability(&self, target: &[bool]) -> Result<Vec<T>> {
        let can = self.reaching(target);
        let unknown: Vec<bool> = (0..self.len()).map(|s| can[s] && !target[s]).collect();
        let known: Vec<T> = target.iter().map(|&t| if t { T::one() } else { T::zero() }).collect();
        self.solve_on(&unknown, &vec![T::zero(); self.len()], &known)
    }

    /// Gain and bias of every state: `g = P g` and `g + h = r + P h`, with
    /// `h` averaging to zero under the stationary distribution of every
    /// bottom component.
    pub fn gain_bias(&self) -> Result<(Vec<T>, Vec<T>)> {
        let n = self.len();
        let (comp, bottom) = self.bottom_components();
        let mut gain = vec![T::zero(); n];
        let mut bias = vec![T::zero(); n];
        for c in (0..bottom.len()).filter(|&c| bottom[c]) {
            let members: Vec<usize> = (0..n).filter(|&s| comp[s] == c).collect();
            let pi = self.stationary_of(&members)?;
            let g = members.iter().zip(&pi).fold(T::zero(), |acc, (&s, w)| acc + w.clone() * self.reward[s].clone());
            let mut unknown = vec![false; n];
            let mut b = vec![T::zero(); n];
            for &s in &members[1..] {
                unknown[s] = true;
            }
            for &s in &members {
                gain[s] = g.clone();
                b[s] = self.reward[s].clone() - g.clone();
            }
            let h = self.solve_on(&unknown, &b, &vec![T::zero(); n])?;
            let shift = members.iter().zip(&pi).fold(T::zero(), |acc, (&s, w)| acc + w.clone() * h[s].clone());
            for &s in &members {
                bias[s] = h[s].clone() - shift.clone();
            }
        }
        let transient: Vec<bool> = (0..n).map(|s| !bottom[comp[s]]).collect();
        let gain = self.solve_on(&transient, &vec![T::zero(); n], &gain)?;
        let b: Vec<T> = (0..n).map(|s| self.reward[s].clone() - gain[s].clone()).collect();
        let bias = self.solve_on(&transient, &b, &bias)?;
        Ok((gain, bias))
    }

    fn stationary_of(&self, members: &[usize]) -> Result<Vec<T>> {
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &s) in members.iter().enumerate() {
            pos[s] = i;
        }
        let m = members.len();
        let mut p = vec![vec![T::zero(); m]; m];
        for (i, &s) in members.iter().enumerate() {
            for (t, q) in &self.succ[s] {
                p[i][pos[*t]] = p[i][pos[*t]].clone() + q.clone();
            }
        }
        T::stationary(&p)
    }

    /// Value of every state; `None` stands for an infinite value.
    pub fn solve(&self, objective: &Objective) -> Result<Vec<Option<T>>> {
        let n = self.len();
        match objective.kind {
            ObjectiveKind::Reachability => {
                let target: Vec<bool> = (0..n).map(|s| objective.is_target(s)).collect();
                Ok(self.reach_probability(&target)?.into_iter().map(Some).collect())
            }
            ObjectiveKind::Safety => {
                let avoid: Vec<bool> = (0..n).map(|s| objective.is_target(s)).collect();
                let hit = self.reach_probability(&avoid)?;
                Ok(hit.into_iter().map(|p| Some(T::one() - p)).collect())
            }
            ObjectiveKind::TotalReward => {
                let (comp, bottom) = self.bottom_components();
                let mut positive = vec![false; bottom.len()];
                for s in 0..n {
                    if bottom[comp[s]] && self.reward[s] != T::zero() {
                        positive[comp[s]] = true;
                    }
                }
                let seeds: Vec<bool> = (0..n).map(|s| positive[comp[s]]).collect();
                let infinite = self.reaching(&seeds);
                let unknown: Vec<bool> = (0..n).map(|s| !infinite[s] && !bottom[comp[s]]).collect();
                let values = self.solve_on(&unknown, &self.reward, &vec![T::zero(); n])?;
                Ok((0..n).map(|s| (!infinite[s]).then(|| values[s].clone())).collect())
            }
            ObjectiveKind::MeanPayoff => {
                let (comp, bottom) = self.bottom_components();
                let mut known = vec![T::zero(); n];
                for c in (0..bottom.len()).filter(|&c| bottom[c]) {
                    let members: Vec<usize> = (0..n).filter(|&s| comp[s] == c).collect();
                    let pi = self.stationary_of(&members)?;
                    let gain = members
                        .iter()
                        .zip(&pi)
                        .fold(T::zero(), |acc, (&s, w)| acc + w.clone() * self.reward[s].clone());
                    for &s in &members {
                        known[s] = gain.clone();
                    }
                }
                let unknown: Vec<bool> = (0..n).map(|s| !bottom[comp[s]]).collect();
                let values = self.solve_on(&unknown, &vec![T::zero(); n], &known)?;
                Ok(values.into_iter().map(Some).collect())
            }
        }
    }
}

/// Value of a Markov chain for `objective`, with `f64::INFINITY` for
/// infinite total reward.
pub fn solve_mc(chain: &StochasticGame, objective: &Objective) -> Result<crate::model::Assignment> {
    objective.validate(chain)?;
    let values = Chain::<f64>::from_game(chain)?.solve(objective)?;
    Ok(values.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect::<Vec<_>>().into())
}
