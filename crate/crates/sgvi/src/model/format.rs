//! JSON game documents.
//!
//! ```json
//! {"states": [{"id": "p", "player": "max", "reward": 0,
//!              "actions": [{"name": "a", "dist": {"q": "1/3", "t": "2/3"}}]}]}
//! ```
//!
//! Probabilities may be JSON numbers or fraction strings.

use std::collections::HashMap;

use num::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Action, Player, State, StochasticGame};
use crate::error::{Error, Result};
use crate::numeric::parse_fraction;

#[derive(Deserialize, Serialize)]
struct GameDoc {
    states: Vec<StateDoc>,
}

#[derive(Deserialize, Serialize)]
struct StateDoc {
    id: String,
    player: PlayerDoc,
    #[serde(default)]
    reward: f64,
    actions: Vec<ActionDoc>,
}

#[derive(Deserialize, Serialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum PlayerDoc {
    Max,
    Min,
}

#[derive(Deserialize, Serialize)]
struct ActionDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    dist: serde_json::Map<String, Value>,
}

fn probability(value: &Value) -> Option<f64> {
    match value {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_fraction(s).and_then(|r| r.to_f64()),
        _ => None,
    }
}

/// Parses a game document, validating it as [`StochasticGame::new`] does and
/// additionally rejecting negative rewards and duplicate state ids.
pub fn parse_game(text: &str) -> Result<StochasticGame> {
    let doc: GameDoc = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    if doc.states.is_empty() {
        return Err(Error::EmptyGame);
    }
    let mut index = HashMap::new();
    for (i, st) in doc.states.iter().enumerate() {
        if index.insert(st.id.as_str(), i).is_some() {
            return Err(Error::DuplicateState(st.id.clone()));
        }
    }
    let mut states = Vec::with_capacity(doc.states.len());
    for st in &doc.states {
        if st.reward < 0.0 {
            return Err(Error::NegativeReward { state: st.id.clone(), reward: st.reward });
        }
        let mut actions = Vec::with_capacity(st.actions.len());
        for (a, act) in st.actions.iter().enumerate() {
            let mut successors = Vec::with_capacity(act.dist.len());
            for (target, value) in &act.dist {
                let t = *index
                    .get(target.as_str())
                    .ok_or_else(|| Error::DanglingSuccessor { state: st.id.clone(), successor: target.clone() })?;
                let p = probability(value)
                    .ok_or_else(|| Error::Malformed(format!("state {}, action {a}: bad probability {value}", st.id)))?;
                successors.push((t, p));
            }
            actions.push(Action { name: act.name.clone(), ..Action::new(successors) });
        }
        let owner = match st.player {
            PlayerDoc::Max => Player::Max,
            PlayerDoc::Min => Player::Min,
        };
        states.push(State { label: st.id.clone(), owner, reward: st.reward, actions });
    }
    StochasticGame::new(states)
}

/// Renders a game as a JSON document that [`parse_game`] reads back to an
/// equal game.
pub fn render_game(game: &StochasticGame) -> String {
    let doc = GameDoc {
        states: game
            .states()
            .iter()
            .map(|st| StateDoc {
                id: st.label.clone(),
                player: match st.owner {
                    Player::Max => PlayerDoc::Max,
                    Player::Min => PlayerDoc::Min,
                },
                reward: st.reward,
                actions: st
                    .actions
                    .iter()
                    .map(|a| ActionDoc {
                        name: a.name.clone(),
                        dist: a.successors.iter().map(|&(t, p)| (game.label(t).to_string(), Value::from(p))).collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("game documents always serialize")
}
