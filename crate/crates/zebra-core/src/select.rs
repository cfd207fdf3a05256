//! Anchoring strategies and zero-annotation preference assignment.
//!
//! Given the models available for one instruction, a strategy picks a pair
//! and orients it: the member with the higher MB-SUP becomes the chosen
//! response, the other the rejected one. No response text is ever scored.
//!
//! * `sup` ranks the available models by MB-SUP and pairs the top two.
//! * `sim` keeps pairs whose MB-SIM clears the `tau` gate and takes the most
//!   similar one.
//! * `sup-sim` scores gated pairs by a convex blend of pair-mean MB-SUP and
//!   MB-SIM, weighted by `lambda`.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{InstructionRecord, ModelResponse, PairSide, PreferencePair};
use crate::error::{Error, Result};
use crate::profile::{AbilityProfile, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Sup,
    Sim,
    SupSim,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Strategy::Sup => "sup",
            Strategy::Sim => "sim",
            Strategy::SupSim => "sup-sim",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sup" => Ok(Strategy::Sup),
            "sim" => Ok(Strategy::Sim),
            "sup-sim" | "sup_sim" | "sup+sim" => Ok(Strategy::SupSim),
            other => Err(Error::Config(format!(
                "unknown strategy `{other}` (expected sup, sim, or sup-sim)"
            ))),
        }
    }
}

/// What to do when two candidates have exactly equal MB-SUP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// The lexicographically smaller model name becomes the chosen side.
    Lexicographic,
    /// Refuse to orient the pair; the instruction is skipped.
    Skip,
}

impl std::str::FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lexicographic" => Ok(TieBreak::Lexicographic),
            "skip" => Ok(TieBreak::Skip),
            other => Err(Error::Config(format!(
                "unknown tie-break `{other}` (expected lexicographic or skip)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    /// Minimum MB-SIM for a pair to be eligible under `sim` and `sup-sim`.
    pub tau: f64,
    /// Hybrid weight on pair-mean MB-SUP (the rest goes to MB-SIM).
    pub lambda: f64,
    pub tie_break: TieBreak,
    /// `sup` only: anchor every instruction on the pool-wide top-two models
    /// instead of ranking per instruction.
    #[serde(default)]
    pub global_top2: bool,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            strategy: Strategy::Sup,
            tau: 0.1,
            lambda: 0.5,
            tie_break: TieBreak::Lexicographic,
            global_top2: false,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.tau) || !self.tau.is_finite() {
            return Err(Error::Config(format!(
                "tau must lie in [-1, 1], got {}",
                self.tau
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) || !self.lambda.is_finite() {
            return Err(Error::Config(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.global_top2 && self.strategy != Strategy::Sup {
            return Err(Error::Config(
                "global top-2 anchoring applies to the sup strategy only".into(),
            ));
        }
        Ok(())
    }
}

/// The responses available for one instruction.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub instruction_id: String,
    pub candidates: Vec<ModelResponse>,
}

impl From<&InstructionRecord> for CandidateSet {
    fn from(record: &InstructionRecord) -> Self {
        CandidateSet {
            instruction_id: record.instruction_id.clone(),
            candidates: record.responses.clone(),
        }
    }
}

/// An oriented model pair with the scores that justified it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedPair {
    pub chosen_model: String,
    pub rejected_model: String,
    pub chosen_sup: f64,
    pub rejected_sup: f64,
    pub mb_sim: f64,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoPairReason {
    /// Fewer than two candidates were available.
    InsufficientCandidates,
    /// No candidate pair reached the `tau` similarity gate.
    BelowTau,
    /// An exact MB-SUP tie with `tie_break = skip`.
    TieSkipped,
    /// Global top-2 anchoring, but the anchor models did not both respond.
    AnchorUnavailable,
}

impl NoPairReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoPairReason::InsufficientCandidates => "insufficient_candidates",
            NoPairReason::BelowTau => "below_tau",
            NoPairReason::TieSkipped => "tie_skipped",
            NoPairReason::AnchorUnavailable => "anchor_unavailable",
        }
    }
}

/// Outcome of pair selection for one instruction.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    Pair(SelectedPair),
    NoPair(NoPairReason),
}

struct ModelLookup<'a> {
    by_name: HashMap<&'a str, (usize, f64)>,
    sim: &'a SimilarityMatrix,
}

impl<'a> ModelLookup<'a> {
    fn new(profiles: &'a [AbilityProfile], sim: &'a SimilarityMatrix) -> Result<Self> {
        let mut by_name = HashMap::with_capacity(profiles.len());
        for p in profiles {
            let idx = sim
                .index_of(&p.model)
                .ok_or_else(|| Error::Lookup(p.model.clone()))?;
            by_name.insert(p.model.as_str(), (idx, p.mb_sup));
        }
        Ok(ModelLookup { by_name, sim })
    }

    fn resolve(&self, model: &str) -> Result<(usize, f64)> {
        self.by_name
            .get(model)
            .copied()
            .ok_or_else(|| Error::Lookup(model.to_string()))
    }

    fn sim(&self, i: usize, j: usize) -> f64 {
        self.sim.sim[i][j]
    }
}

struct Resolved<'a> {
    model: &'a str,
    sup: f64,
    sim_idx: usize,
}

/// Selects and orients a pair for one instruction under `cfg`.
pub fn select_pair(
    candidates: &CandidateSet,
    profiles: &[AbilityProfile],
    sim: &SimilarityMatrix,
    cfg: &StrategyConfig,
) -> Result<Selection> {
    cfg.validate()?;
    let lookup = ModelLookup::new(profiles, sim)?;
    let global = if cfg.global_top2 {
        Some(global_anchor_pair(profiles)?)
    } else {
        None
    };
    select_with_lookup(candidates, &lookup, global.as_ref(), cfg)
}

/// Pool-wide top-two models by (MB-SUP desc, name asc).
fn global_anchor_pair(profiles: &[AbilityProfile]) -> Result<(String, String)> {
    if profiles.len() < 2 {
        return Err(Error::Config(
            "global top-2 anchoring needs at least two profiled models".into(),
        ));
    }
    let mut order: Vec<&AbilityProfile> = profiles.iter().collect();
    order.sort_by(|a, b| {
        b.mb_sup
            .partial_cmp(&a.mb_sup)
            .unwrap()
            .then_with(|| a.model.cmp(&b.model))
    });
    Ok((order[0].model.clone(), order[1].model.clone()))
}

fn select_with_lookup(
    candidates: &CandidateSet,
    lookup: &ModelLookup<'_>,
    global_anchor: Option<&(String, String)>,
    cfg: &StrategyConfig,
) -> Result<Selection> {
    let cands = &candidates.candidates;
    if cands.len() < 2 {
        return Ok(Selection::NoPair(NoPairReason::InsufficientCandidates));
    }
    for (i, c) in cands.iter().enumerate() {
        if cands[..i].iter().any(|d| d.model == c.model) {
            return Err(Error::Validation(format!(
                "instruction `{}`: duplicate candidate model `{}`",
                candidates.instruction_id, c.model
            )));
        }
    }

    let resolved: Vec<Resolved<'_>> = cands
        .iter()
        .map(|c| {
            let (sim_idx, sup) = lookup.resolve(&c.model)?;
            Ok(Resolved {
                model: &c.model,
                sup,
                sim_idx,
            })
        })
        .collect::<Result<_>>()?;

    match cfg.strategy {
        Strategy::Sup => {
            if let Some((top, second)) = global_anchor {
                let a = resolved.iter().find(|r| r.model == top);
                let b = resolved.iter().find(|r| r.model == second);
                return Ok(match (a, b) {
                    (Some(a), Some(b)) => orient(a, b, lookup, cfg)?,
                    _ => Selection::NoPair(NoPairReason::AnchorUnavailable),
                });
            }
            let mut order: Vec<&Resolved<'_>> = resolved.iter().collect();
            order.sort_by(|a, b| {
                b.sup
                    .partial_cmp(&a.sup)
                    .unwrap()
                    .then_with(|| a.model.cmp(b.model))
            });
            orient(order[0], order[1], lookup, cfg)
        }
        Strategy::Sim | Strategy::SupSim => {
            let mut best: Option<(f64, &Resolved<'_>, &Resolved<'_>)> = None;
            for i in 0..resolved.len() {
                for j in (i + 1)..resolved.len() {
                    let (a, b) = (&resolved[i], &resolved[j]);
                    let s = lookup.sim(a.sim_idx, b.sim_idx);
                    if s < cfg.tau {
                        continue;
                    }
                    let score = match cfg.strategy {
                        Strategy::Sim => s,
                        Strategy::SupSim => {
                            cfg.lambda * (a.sup + b.sup) / 2.0 + (1.0 - cfg.lambda) * s
                        }
                        Strategy::Sup => unreachable!(),
                    };
                    let replace = match &best {
                        None => true,
                        Some((best_score, ba, bb)) => {
                            score > *best_score
                                || (score == *best_score
                                    && sorted_names(a, b) < sorted_names(ba, bb))
                        }
                    };
                    if replace {
                        best = Some((score, a, b));
                    }
                }
            }
            match best {
                None => Ok(Selection::NoPair(NoPairReason::BelowTau)),
                Some((_, a, b)) => orient(a, b, lookup, cfg),
            }
        }
    }
}

fn sorted_names<'a>(a: &Resolved<'a>, b: &Resolved<'a>) -> (&'a str, &'a str) {
    if a.model <= b.model {
        (a.model, b.model)
    } else {
        (b.model, a.model)
    }
}

/// Orients a pair: higher MB-SUP becomes chosen. Exact ties fall to the
/// configured tie-break.
fn orient(
    a: &Resolved<'_>,
    b: &Resolved<'_>,
    lookup: &ModelLookup<'_>,
    cfg: &StrategyConfig,
) -> Result<Selection> {
    let mb_sim = lookup.sim(a.sim_idx, b.sim_idx);
    let (chosen, rejected) = if a.sup > b.sup {
        (a, b)
    } else if b.sup > a.sup {
        (b, a)
    } else {
        match cfg.tie_break {
            TieBreak::Skip => return Ok(Selection::NoPair(NoPairReason::TieSkipped)),
            TieBreak::Lexicographic => {
                if a.model <= b.model {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        }
    };
    Ok(Selection::Pair(SelectedPair {
        chosen_model: chosen.model.to_string(),
        rejected_model: rejected.model.to_string(),
        chosen_sup: chosen.sup,
        rejected_sup: rejected.sup,
        mb_sim,
        strategy: cfg.strategy,
    }))
}

/// Per-model chosen/rejected tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub chosen: u64,
    pub rejected: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoPairCounts {
    pub insufficient_candidates: u64,
    pub below_tau: u64,
    pub tie_skipped: u64,
    pub anchor_unavailable: u64,
}

impl NoPairCounts {
    fn bump(&mut self, reason: NoPairReason) {
        match reason {
            NoPairReason::InsufficientCandidates => self.insufficient_candidates += 1,
            NoPairReason::BelowTau => self.below_tau += 1,
            NoPairReason::TieSkipped => self.tie_skipped += 1,
            NoPairReason::AnchorUnavailable => self.anchor_unavailable += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.insufficient_candidates + self.below_tau + self.tie_skipped + self.anchor_unavailable
    }
}

/// A per-instruction problem recorded while the stream kept going.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub instruction_id: Option<String>,
    pub message: String,
}

/// Summary of one binarization run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub instructions: u64,
    pub pairs_emitted: u64,
    pub no_pair: NoPairCounts,
    pub errors: Vec<ReportEntry>,
    pub frequencies: BTreeMap<String, PairCounts>,
}

/// Runs pair selection over a whole pool, calling `on_pair` for each emitted
/// pair in input order. In strict mode any per-instruction error aborts;
/// otherwise it is recorded in the report and the stream continues.
pub fn binarize_pool<I, F>(
    pool: I,
    profiles: &[AbilityProfile],
    sim: &SimilarityMatrix,
    cfg: &StrategyConfig,
    strict: bool,
    mut on_pair: F,
) -> Result<SelectionReport>
where
    I: IntoIterator<Item = Result<InstructionRecord>>,
    F: FnMut(&PreferencePair) -> Result<()>,
{
    cfg.validate()?;
    let lookup = ModelLookup::new(profiles, sim)?;
    let global = if cfg.global_top2 {
        Some(global_anchor_pair(profiles)?)
    } else {
        None
    };
    let mut report = SelectionReport::default();

    for record in pool {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                if strict {
                    return Err(e);
                }
                report.errors.push(ReportEntry {
                    instruction_id: None,
                    message: e.to_string(),
                });
                continue;
            }
        };
        report.instructions += 1;
        let candidates = CandidateSet::from(&record);
        let selection = match select_with_lookup(&candidates, &lookup, global.as_ref(), cfg) {
            Ok(s) => s,
            Err(e) => {
                if strict {
                    return Err(e);
                }
                report.errors.push(ReportEntry {
                    instruction_id: Some(record.instruction_id.clone()),
                    message: e.to_string(),
                });
                continue;
            }
        };
        match selection {
            Selection::NoPair(reason) => {
                log::debug!(
                    "instruction `{}`: no pair ({})",
                    record.instruction_id,
                    reason.as_str()
                );
                report.no_pair.bump(reason);
            }
            Selection::Pair(selected) => {
                let pair = assemble_pair(&record, &selected)?;
                on_pair(&pair)?;
                report.pairs_emitted += 1;
                report
                    .frequencies
                    .entry(selected.chosen_model.clone())
                    .or_default()
                    .chosen += 1;
                report
                    .frequencies
                    .entry(selected.rejected_model.clone())
                    .or_default()
                    .rejected += 1;
            }
        }
    }
    Ok(report)
}

fn assemble_pair(record: &InstructionRecord, selected: &SelectedPair) -> Result<PreferencePair> {
    let text_of = |model: &str| -> Result<&str> {
        record
            .responses
            .iter()
            .find(|r| r.model == model)
            .map(|r| r.text.as_str())
            .ok_or_else(|| Error::Lookup(model.to_string()))
    };
    let chosen_text = text_of(&selected.chosen_model)?;
    let rejected_text = text_of(&selected.rejected_model)?;
    let mut flags = Vec::new();
    if chosen_text == rejected_text {
        flags.push("degenerate_text".to_string());
    }
    Ok(PreferencePair {
        instruction_id: record.instruction_id.clone(),
        instruction: record.instruction.clone(),
        chosen: PairSide {
            model: selected.chosen_model.clone(),
            text: chosen_text.to_string(),
            mb_sup: selected.chosen_sup,
        },
        rejected: PairSide {
            model: selected.rejected_model.clone(),
            text: rejected_text.to_string(),
            mb_sup: selected.rejected_sup,
        },
        mb_sim: selected.mb_sim,
        strategy: selected.strategy,
        flags,
    })
}
