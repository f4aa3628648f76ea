//! Name tables shared by parsers, printers and reports.
//!
//! The algorithmic types work on dense integer indices; a [`Symbols`] table
//! maps those indices back to the user-facing names of agents, atoms, worlds
//! and events. Agents additionally carry their team.

use alloc::string::String;
use alloc::vec::Vec;

use crate::kripke::{Agent, Atom};

/// Which of the two antagonistic teams an agent plays for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Team {
    Exists,
    Forall,
}

/// The finite agent set with its team partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSet {
    teams: Vec<Team>,
}

impl AgentSet {
    pub fn new(teams: Vec<Team>) -> Self {
        AgentSet { teams }
    }

    pub fn len(&self) -> usize {
        self.teams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teams.is_empty()
    }

    pub fn team(&self, a: Agent) -> Team {
        self.teams[a.index()]
    }

    pub fn is_exists(&self, a: Agent) -> bool {
        self.team(a) == Team::Exists
    }

    pub fn iter(&self) -> impl Iterator<Item = Agent> + '_ {
        (0..self.teams.len()).map(|i| Agent::new(i))
    }

    pub fn exists_agents(&self) -> Vec<Agent> {
        self.iter().filter(|a| self.is_exists(*a)).collect()
    }

    pub fn forall_agents(&self) -> Vec<Agent> {
        self.iter().filter(|a| !self.is_exists(*a)).collect()
    }

    /// Successor in the circular declaration order (round-robin turn order).
    pub fn next(&self, a: Agent) -> Agent {
        Agent::new((a.index() + 1) % self.teams.len())
    }
}

/// Interned names for everything a presentation mentions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Symbols {
    agents: Vec<String>,
    atoms: Vec<String>,
    worlds: Vec<String>,
    events: Vec<String>,
}

impl Symbols {
    pub fn new() -> Self {
        Symbols::default()
    }

    pub fn add_agent(&mut self, name: &str) -> Agent {
        self.agents.push(String::from(name));
        Agent::new(self.agents.len() - 1)
    }

    pub fn agent(&self, name: &str) -> Option<Agent> {
        self.agents.iter().position(|n| n == name).map(Agent::new)
    }

    pub fn agent_name(&self, a: Agent) -> &str {
        &self.agents[a.index()]
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    /// Returns the id of `name`, interning it if new.
    pub fn intern_atom(&mut self, name: &str) -> Atom {
        if let Some(i) = self.atoms.iter().position(|n| n == name) {
            return Atom::new(i);
        }
        self.atoms.push(String::from(name));
        Atom::new(self.atoms.len() - 1)
    }

    pub fn atom(&self, name: &str) -> Option<Atom> {
        self.atoms.iter().position(|n| n == name).map(Atom::new)
    }

    pub fn atom_name(&self, p: Atom) -> &str {
        &self.atoms[p.index()]
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn add_world(&mut self, name: &str) -> usize {
        self.worlds.push(String::from(name));
        self.worlds.len() - 1
    }

    pub fn world(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|n| n == name)
    }

    pub fn world_name(&self, i: usize) -> &str {
        &self.worlds[i]
    }

    pub fn add_event(&mut self, name: &str) -> usize {
        self.events.push(String::from(name));
        self.events.len() - 1
    }

    pub fn event(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|n| n == name)
    }

    pub fn event_name(&self, i: usize) -> &str {
        &self.events[i]
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }
}
