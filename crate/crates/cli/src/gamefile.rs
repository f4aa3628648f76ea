//! The textual game-file format.
//!
//! Line-oriented and diff-friendly: `#` starts a comment, sections `agents`,
//! `model` and `actions` are opened by bare header lines, and everything
//! else is one construct per line:
//!
//! ```text
//! agents
//!   a exists
//!   b forall
//! model
//!   world w turn=a p
//!   world v turn=a
//!   rel a w v
//! actions
//!   event e turn=a
//!   pre e p
//!   post e p false
//!   event f turn=a
//!   rel b e f
//! init w
//! objective F K[a] !p
//! mode objective
//! horizon 8
//! depth 4
//! ```
//!
//! Atoms are interned on first sight (in worlds, postconditions or
//! formulas); agents, worlds and events must be declared before use.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use delgame_core::del::ActionModel;
use delgame_core::formulas::{parse_formula_at, Formula};
use delgame_core::kripke::{
    Agent, Atom, ClosureWarnings, EpistemicModel, Event, World,
};
use delgame_core::symbols::{AgentSet, Symbols, Team};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileError {
    pub line: u32,
    pub message: String,
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for FileError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Objective,
    Subjective,
}

/// A parsed game file: presentation parts, optional objective, options.
#[derive(Debug, Clone)]
pub struct GameFile {
    pub symbols: Symbols,
    pub agents: AgentSet,
    pub model: EpistemicModel,
    pub model_warnings: ClosureWarnings,
    pub actions: ActionModel,
    pub action_warnings: ClosureWarnings,
    pub init: BTreeSet<World>,
    pub objective: Option<Formula>,
    pub mode: Mode,
    pub horizon: Option<usize>,
    pub depth: Option<usize>,
}

#[derive(Default)]
struct Draft {
    teams: Vec<Team>,
    worlds: Vec<(BTreeSet<Atom>, Agent)>,
    world_rels: Vec<(Agent, World, World)>,
    events: Vec<(Formula, Option<Agent>)>,
    event_rels: Vec<(Agent, Event, Event)>,
    posts: BTreeMap<(Event, Atom), Formula>,
    init: BTreeSet<World>,
    objective: Option<Formula>,
    mode: Mode,
    horizon: Option<usize>,
    depth: Option<usize>,
}

#[derive(PartialEq)]
enum Section {
    Top,
    Agents,
    Model,
    Actions,
}

fn err(line: u32, message: impl Into<String>) -> FileError {
    FileError { line, message: message.into() }
}

pub fn parse(text: &str) -> Result<GameFile, FileError> {
    let mut sym = Symbols::new();
    let mut draft = Draft::default();
    let mut section = Section::Top;
    let mut any_content = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = (lineno + 1) as u32;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        any_content = true;
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        match head {
            "agents" => {
                expect_end(words, line_no)?;
                section = Section::Agents;
            }
            "model" => {
                expect_end(words, line_no)?;
                section = Section::Model;
            }
            "actions" => {
                expect_end(words, line_no)?;
                section = Section::Actions;
            }
            "world" if section == Section::Model => {
                let name = next_word(&mut words, line_no, "world name")?;
                if sym.world(name).is_some() {
                    return Err(err(line_no, format!("world `{name}` declared twice")));
                }
                let turn = parse_turn_field(&mut words, &sym, line_no)?;
                let mut atoms = BTreeSet::new();
                for w in words {
                    atoms.insert(sym.intern_atom(w));
                }
                sym.add_world(name);
                draft.worlds.push((atoms, turn));
            }
            "rel" if section == Section::Model => {
                let a = parse_agent(&mut words, &sym, line_no)?;
                let u = parse_world(&mut words, &sym, line_no)?;
                let v = parse_world(&mut words, &sym, line_no)?;
                expect_end(words, line_no)?;
                draft.world_rels.push((a, u, v));
            }
            "event" if section == Section::Actions => {
                let name = next_word(&mut words, line_no, "event name")?;
                if sym.event(name).is_some() {
                    return Err(err(line_no, format!("event `{name}` declared twice")));
                }
                let turn = parse_turn_field(&mut words, &sym, line_no)?;
                expect_end(words, line_no)?;
                sym.add_event(name);
                draft.events.push((Formula::True, Some(turn)));
            }
            "pre" if section == Section::Actions => {
                let e = parse_event(&mut words, &sym, line_no)?;
                let rest = rest_of(line, 2);
                let f = parse_formula_at(rest, &mut sym, line_no - 1)
                    .map_err(|e| err(line_no, format!("in precondition: {}", e.message)))?;
                draft.events[e.index()].0 = f;
            }
            "post" if section == Section::Actions => {
                let e = parse_event(&mut words, &sym, line_no)?;
                let atom_name = next_word(&mut words, line_no, "atom name")?;
                let atom = sym.intern_atom(atom_name);
                let rest = rest_of(line, 3);
                if rest.trim().is_empty() {
                    return Err(err(line_no, "missing postcondition formula"));
                }
                let f = parse_formula_at(rest, &mut sym, line_no - 1)
                    .map_err(|e| err(line_no, format!("in postcondition: {}", e.message)))?;
                draft.posts.insert((e, atom), f);
            }
            "rel" if section == Section::Actions => {
                let a = parse_agent(&mut words, &sym, line_no)?;
                let e1 = parse_event(&mut words, &sym, line_no)?;
                let e2 = parse_event(&mut words, &sym, line_no)?;
                expect_end(words, line_no)?;
                draft.event_rels.push((a, e1, e2));
            }
            "init" => {
                let mut got = false;
                for w in words {
                    let world = sym
                        .world(w)
                        .ok_or_else(|| err(line_no, format!("unknown world `{w}`")))?;
                    draft.init.insert(World::new(world));
                    got = true;
                }
                if !got {
                    return Err(err(line_no, "init needs at least one world"));
                }
            }
            "objective" => {
                let rest = rest_of(line, 1);
                let f = parse_formula_at(rest, &mut sym, line_no - 1)
                    .map_err(|e| err(line_no, format!("in objective: {}", e.message)))?;
                draft.objective = Some(f);
            }
            "mode" => {
                let m = next_word(&mut words, line_no, "mode")?;
                draft.mode = match m {
                    "objective" => Mode::Objective,
                    "subjective" => Mode::Subjective,
                    other => return Err(err(line_no, format!("unknown mode `{other}`"))),
                };
                expect_end(words, line_no)?;
            }
            "horizon" => {
                draft.horizon = Some(parse_number(&mut words, line_no)?);
                expect_end(words, line_no)?;
            }
            "depth" => {
                draft.depth = Some(parse_number(&mut words, line_no)?);
                expect_end(words, line_no)?;
            }
            other => {
                if section == Section::Agents {
                    // agent declaration: NAME exists|forall
                    if sym.agent(other).is_some() {
                        return Err(err(line_no, format!("agent `{other}` declared twice")));
                    }
                    let team = next_word(&mut words, line_no, "team (exists or forall)")?;
                    let team = match team {
                        "exists" => Team::Exists,
                        "forall" => Team::Forall,
                        t => return Err(err(line_no, format!("unknown team `{t}`"))),
                    };
                    expect_end(words, line_no)?;
                    sym.add_agent(other);
                    draft.teams.push(team);
                } else {
                    return Err(err(line_no, format!("unknown construct `{other}`")));
                }
            }
        }
    }

    if !any_content {
        return Err(err(1, "empty game file"));
    }
    if draft.teams.is_empty() {
        return Err(err(1, "no agents declared"));
    }
    if draft.worlds.is_empty() {
        return Err(err(1, "no worlds declared"));
    }
    if draft.events.is_empty() {
        return Err(err(1, "no events declared"));
    }
    if draft.init.is_empty() {
        return Err(err(1, "no initial worlds declared"));
    }

    let num_agents = draft.teams.len();
    let num_atoms = sym.num_atoms();
    let (model, model_warnings) =
        EpistemicModel::from_pairs(num_agents, draft.worlds, &draft.world_rels)
            .map_err(|e| err(1, format!("{e}")))?;
    let events: Vec<(Formula, Agent)> = draft
        .events
        .into_iter()
        .map(|(pre, t)| (pre, t.expect("event turn parsed")))
        .collect();
    let (actions, action_warnings) = ActionModel::from_pairs(
        num_agents,
        num_atoms,
        events,
        &draft.event_rels,
        draft.posts,
    )
    .map_err(|e| err(1, format!("{e}")))?;

    Ok(GameFile {
        symbols: sym,
        agents: AgentSet::new(draft.teams),
        model,
        model_warnings,
        actions,
        action_warnings,
        init: draft.init,
        objective: draft.objective,
        mode: draft.mode,
        horizon: draft.horizon,
        depth: draft.depth,
    })
}

fn next_word<'a>(
    words: &mut impl Iterator<Item = &'a str>,
    line: u32,
    what: &str,
) -> Result<&'a str, FileError> {
    words.next().ok_or_else(|| err(line, format!("missing {what}")))
}

fn expect_end<'a>(mut words: impl Iterator<Item = &'a str>, line: u32) -> Result<(), FileError> {
    match words.next() {
        None => Ok(()),
        Some(w) => Err(err(line, format!("unexpected trailing `{w}`"))),
    }
}

fn parse_turn_field<'a>(
    words: &mut impl Iterator<Item = &'a str>,
    sym: &Symbols,
    line: u32,
) -> Result<Agent, FileError> {
    let w = next_word(words, line, "turn=AGENT")?;
    let name = w
        .strip_prefix("turn=")
        .ok_or_else(|| err(line, format!("expected turn=AGENT, found `{w}`")))?;
    sym.agent(name)
        .ok_or_else(|| err(line, format!("unknown agent `{name}`")))
}

fn parse_agent<'a>(
    words: &mut impl Iterator<Item = &'a str>,
    sym: &Symbols,
    line: u32,
) -> Result<Agent, FileError> {
    let w = next_word(words, line, "agent name")?;
    sym.agent(w).ok_or_else(|| err(line, format!("unknown agent `{w}`")))
}

fn parse_world<'a>(
    words: &mut impl Iterator<Item = &'a str>,
    sym: &Symbols,
    line: u32,
) -> Result<World, FileError> {
    let w = next_word(words, line, "world name")?;
    sym.world(w)
        .map(World::new)
        .ok_or_else(|| err(line, format!("unknown world `{w}`")))
}

fn parse_event<'a>(
    words: &mut impl Iterator<Item = &'a str>,
    sym: &Symbols,
    line: u32,
) -> Result<Event, FileError> {
    let w = next_word(words, line, "event name")?;
    sym.event(w)
        .map(Event::new)
        .ok_or_else(|| err(line, format!("unknown event `{w}`")))
}

fn parse_number<'a>(
    words: &mut impl Iterator<Item = &'a str>,
    line: u32,
) -> Result<usize, FileError> {
    let w = next_word(words, line, "number")?;
    w.parse().map_err(|_| err(line, format!("not a number: `{w}`")))
}

/// The tail of `line` after its first `n` whitespace-separated words.
fn rest_of(line: &str, n: usize) -> &str {
    let mut rest = line;
    for _ in 0..n {
        rest = rest.trim_start();
        match rest.find(char::is_whitespace) {
            Some(i) => rest = &rest[i..],
            None => return "",
        }
    }
    rest.trim()
}
