//! On-disk formats: game sets, reward tables, strength profiles, metric tables
//! and baseline files.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use interplay_core::augment::{game_from_rewards, RewardTable};
use interplay_core::cache::{CachedGame, DEFAULT_CAPACITY};
use interplay_core::scorer::protocol::{ExternalGame, ExternalScorer};
use interplay_core::scorer::{make_game, BuiltinScorer, MaskSpec, OutputKind, OutputSelector, Scorer};
use interplay_core::search::{MetricTable, Polarity};
use interplay_core::strength::StrengthProfile;
use interplay_core::{AdditiveGame, AndGame, Coalition, Error, Game, GameSpec, TableGame};
use serde::{Deserialize, Serialize};

use crate::config::MaskOptions;

/// A set of games sharing one player count, e.g. one model evaluated on several inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSetFile {
    pub games: Vec<GameEntry>,
}

// `deny_unknown_fields` does not combine with `flatten`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameEntry {
    pub id: String,
    #[serde(flatten)]
    pub source: GameSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameSource {
    /// `values[bits]` for every coalition.
    Table { n: usize, values: Vec<f64> },
    /// `scale` when both `i` and `j` are present, else 0.
    And {
        n: usize,
        i: usize,
        j: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    Additive {
        weights: Vec<f64>,
        #[serde(default)]
        bias: f64,
    },
    Rewards { table: RewardTableFile },
    /// A built-in scorer applied to a masked input. Players come from the mask grid.
    Masked {
        input: Vec<f64>,
        shape: Vec<usize>,
        scorer: BuiltinScorer,
        #[serde(default)]
        class: usize,
        #[serde(default = "logit")]
        output: OutputKind,
    },
    /// An input held by the external scorer process.
    External {
        input_id: String,
        #[serde(default)]
        class: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn logit() -> OutputKind {
    OutputKind::Logit
}

/// Shared state needed to turn entries into games.
pub struct GameContext<'a> {
    pub mask: &'a MaskOptions,
    pub baseline: Option<Vec<f64>>,
    pub scorer: Option<Arc<ExternalScorer>>,
}

impl GameEntry {
    pub fn build(&self, ctx: &GameContext<'_>) -> Result<Box<dyn Game>> {
        let game: Box<dyn Game> = match &self.source {
            GameSource::Table { n, values } => Box::new(TableGame::new(GameSpec::new(*n)?, values.clone())?),
            GameSource::And { n, i, j, scale } => Box::new(AndGame::scaled(*n, *i, *j, *scale)?),
            GameSource::Additive { weights, bias } => Box::new(AdditiveGame::new(weights.clone(), *bias)?),
            GameSource::Rewards { table } => Box::new(game_from_rewards(&table.to_table()?)?),
            GameSource::Masked { input, shape, scorer, class, output } => {
                let mut mask = MaskSpec::grid(shape.clone(), ctx.mask.rows, ctx.mask.cols)?;
                if let Some(b) = &ctx.baseline {
                    mask = mask.with_baseline(b.clone())?;
                }
                let scorer: Arc<dyn Scorer> = Arc::new(scorer.clone());
                let game = make_game(input.clone(), mask, scorer, OutputSelector { class: *class, kind: *output })?;
                Box::new(CachedGame::new(game, DEFAULT_CAPACITY))
            }
            GameSource::External { input_id, class } => {
                let scorer = ctx
                    .scorer
                    .clone()
                    .ok_or_else(|| Error::ScorerUnavailable(format!("game `{}` needs an external scorer", self.id)))?;
                Box::new(CachedGame::new(ExternalGame::new(scorer, input_id.clone(), *class)?, DEFAULT_CAPACITY))
            }
        };
        Ok(game)
    }
}

impl GameSetFile {
    pub fn needs_scorer(&self) -> bool {
        self.games.iter().any(|g| matches!(g.source, GameSource::External { .. }))
    }
}

/// `{"n", "pair": [i, j], "max_order", "rewards": [{"context": [players], "reward"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardTableFile {
    pub n: usize,
    pub pair: [usize; 2],
    pub max_order: usize,
    pub rewards: Vec<RewardEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardEntry {
    pub context: Vec<usize>,
    pub reward: f64,
}

impl RewardTableFile {
    pub fn to_table(&self) -> Result<RewardTable> {
        let mut rewards = BTreeMap::new();
        for e in &self.rewards {
            let t = Coalition::from_members(self.n, &e.context)?;
            if rewards.insert(t.bits(), e.reward).is_some() {
                return Err(Error::InvalidTable(format!("context {:?} listed twice", e.context)).into());
            }
        }
        Ok(RewardTable::new(self.n, (self.pair[0], self.pair[1]), self.max_order, rewards)?)
    }

    pub fn from_table(table: &RewardTable) -> Self {
        let n = table.n();
        let rewards = table
            .rewards()
            .iter()
            .map(|(&t, &reward)| RewardEntry { context: (0..n).filter(|&k| t >> k & 1 == 1).collect(), reward })
            .collect();
        let (i, j) = table.pair();
        Self { n, pair: [i, j], max_order: table.max_order(), rewards }
    }
}

/// `{"model_id", "n", "orders": [m / n], "J": [...]}`, plus provenance when written by this tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub model_id: String,
    pub n: usize,
    pub orders: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl ProfileFile {
    pub fn from_profile(p: &StrengthProfile, tool_version: &str, config_hash: &str) -> Self {
        Self {
            model_id: p.model_id.clone(),
            n: p.n,
            orders: p.normalized_orders(),
            j: p.j.clone(),
            tool_version: Some(tool_version.to_string()),
            config_hash: Some(config_hash.to_string()),
        }
    }

    pub fn to_profile(&self) -> Result<StrengthProfile> {
        let n = self.n as f64;
        let orders = self
            .orders
            .iter()
            .map(|&x| {
                let m = (x * n).round();
                if (x * n - m).abs() > 1e-6 || m < 0.0 {
                    Err(Error::InvalidConfig(format!("order {x} is not a multiple of 1/{}", self.n)))
                } else {
                    Ok(m as usize)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StrengthProfile::new(self.model_id.clone(), self.n, orders, self.j.clone())?)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())).into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricRow {
    model_id: String,
    metric: String,
    value: f64,
    polarity: Polarity,
}

/// CSV with header `model_id,metric,value,polarity`; `#` lines are comments.
pub fn parse_metrics(text: &str) -> Result<MetricTable> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["model_id", "metric", "value", "polarity"] {
        return Err(Error::InvalidConfig(format!("metric table header must be model_id,metric,value,polarity, got {headers:?}")).into());
    }
    let mut table = MetricTable::new();
    for row in rdr.deserialize() {
        let row: MetricRow = row.map_err(|e| Error::InvalidConfig(format!("metric table: {e}")))?;
        table.insert(&row.model_id, &row.metric, row.value, row.polarity)?;
    }
    Ok(table)
}

/// A JSON array of numbers, or raw little-endian f64 values.
pub fn parse_baseline(bytes: &[u8]) -> Result<Vec<f64>> {
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
    let values: Vec<f64> = if first == Some(&b'[') {
        serde_json::from_slice(bytes).map_err(|e| Error::InvalidConfig(format!("baseline: {e}")))?
    } else {
        if !bytes.len().is_multiple_of(8) {
            return Err(Error::InvalidConfig(format!("binary baseline length {} is not a multiple of 8", bytes.len())).into());
        }
        bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("baseline contains non-finite values".into()).into());
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn game_entry_kinds_parse() {
        let text = r#"{"games": [
            {"id": "a", "kind": "and", "n": 4, "i": 0, "j": 1},
            {"id": "t", "kind": "table", "n": 1, "values": [0.0, 2.0]},
            {"id": "s", "kind": "additive", "weights": [1.0, 2.0]}
        ]}"#;
        let set: GameSetFile = serde_json::from_str(text).unwrap();
        assert_eq!(set.games.len(), 3);
        assert_eq!(set.games[0].source, GameSource::And { n: 4, i: 0, j: 1, scale: 1.0 });
        assert!(!set.needs_scorer());
        assert!(serde_json::from_str::<GameSetFile>(r#"{"games": [{"id": "x", "kind": "nope"}]}"#).is_err());
    }

    #[test]
    fn reward_table_round_trip() {
        let t = RewardTable::from_fn(5, (0, 3), 2, |s| s.len() as f64 + 0.5).unwrap();
        let file = RewardTableFile::from_table(&t);
        assert_eq!(file.to_table().unwrap(), t);
        let mut dup = file.clone();
        dup.rewards.push(dup.rewards[0].clone());
        assert!(dup.to_table().is_err());
    }

    #[test]
    fn profile_orders_round_trip() {
        let p = StrengthProfile::new("m", 10, vec![0, 1, 3, 8], vec![1.0, 2.0, 0.5, 0.5]).unwrap();
        let file = ProfileFile::from_profile(&p, "0", "h");
        assert_eq!(file.to_profile().unwrap(), p);
        let bad = ProfileFile { orders: vec![0.0, 0.15, 0.3, 0.8], ..file };
        assert!(bad.to_profile().is_err());
    }

    #[test]
    fn metrics_csv() {
        let t = parse_metrics("# comment\nmodel_id,metric,value,polarity\na,mce,0.3,lower\nb,mce,0.2,lower\n").unwrap();
        assert_eq!(t.get("b", "mce").unwrap(), 0.2);
        assert!(parse_metrics("model,metric,value,polarity\n").is_err());
        assert!(parse_metrics("model_id,metric,value,polarity\na,x,1,sideways\n").is_err());
    }

    #[test]
    fn baseline_formats() {
        assert_eq!(parse_baseline(b" [1, 2.5]").unwrap(), vec![1.0, 2.5]);
        let raw: Vec<u8> = [0.5f64, -1.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        assert_eq!(parse_baseline(&raw).unwrap(), vec![0.5, -1.0]);
        assert!(parse_baseline(&raw[..7]).is_err());
    }
}
