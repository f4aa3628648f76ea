//! DOT export for arenas and the sidecar table for quotient provenance.

use std::fmt::Write as _;

use delgame_core::arena::GameArena;
use delgame_core::fold::{Entry, FoldedArena, Provenance};
use delgame_core::kripke::Agent;
use delgame_core::symbols::Symbols;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders an arena as a digraph: nodes labeled with valuation and turn
/// owner, solid action-labeled edges for transitions, dashed undirected
/// edges per agent for indistinguishability, initial positions
/// double-circled.
pub fn arena_dot(arena: &GameArena, sym: &Symbols, labels: Option<&[String]>) -> String {
    let mut out = String::new();
    writeln!(out, "digraph arena {{").unwrap();
    writeln!(out, "    rankdir=LR").unwrap();
    for p in arena.positions() {
        let atoms: Vec<&str> = arena
            .valuation(p)
            .iter()
            .map(|a| sym.atom_name(*a))
            .collect();
        let name = match labels {
            Some(ls) => ls[p.index()].clone(),
            None => format!("v{}", p.index()),
        };
        let label = format!(
            "{name}\\n{{{}}} turn={}",
            atoms.join(","),
            sym.agent_name(arena.turn(p))
        );
        let peripheries = if arena.init().contains(&p) { 2 } else { 1 };
        writeln!(
            out,
            "    p{} [shape=ellipse peripheries={} label=\"{}\"]",
            p.index(),
            peripheries,
            escape(&label)
        )
        .unwrap();
    }
    for p in arena.positions() {
        for (c, q) in arena.transitions(p) {
            let act = if c.index() < sym.num_events() {
                sym.event_name(c.index()).to_string()
            } else {
                format!("c{}", c.index())
            };
            writeln!(out, "    p{} -> p{} [label=\"{}\"]", p.index(), q.index(), escape(&act))
                .unwrap();
        }
    }
    for a in 0..arena.num_agents() {
        let agent = Agent::new(a);
        for p in arena.positions() {
            for q in arena.positions() {
                if p < q && arena.related(agent, p, q) {
                    writeln!(
                        out,
                        "    p{} -> p{} [dir=none style=dashed label=\"{}\"]",
                        p.index(),
                        q.index(),
                        escape(sym.agent_name(agent))
                    )
                    .unwrap();
                }
            }
        }
    }
    writeln!(out, "}}").unwrap();
    out
}

/// Short display labels for folded positions.
pub fn position_labels(folded: &FoldedArena, sym: &Symbols) -> Vec<String> {
    folded
        .provenance
        .iter()
        .map(|prov| match prov {
            Provenance::World { world } => sym.world_name(world.index()).to_string(),
            Provenance::EventVal { event, valuation, .. } => {
                let atoms: Vec<&str> =
                    valuation.iter().map(|a| sym.atom_name(*a)).collect();
                format!("({},{{{}}})", sym.event_name(event.index()), atoms.join(","))
            }
            Provenance::Class { entry, sample, .. } => {
                let mut s = sym.world_name(sample.base.index()).to_string();
                for e in &sample.events {
                    s.push('.');
                    s.push_str(sym.event_name(e.index()));
                }
                match entry {
                    Entry::Root => s,
                    Entry::Via(_) => format!("[{s}]"),
                }
            }
        })
        .collect()
}

/// Sidecar table mapping quotient classes to their representative pointed
/// models, in the textual model format.
pub fn sidecar(folded: &FoldedArena, sym: &Symbols) -> String {
    let mut out = String::new();
    writeln!(out, "# class id -> representative pointed model").unwrap();
    for p in folded.arena.positions() {
        match &folded.provenance[p.index()] {
            Provenance::Class { entry, representative, sample, .. } => {
                writeln!(out, "position p{}", p.index()).unwrap();
                match entry {
                    Entry::Root => writeln!(out, "  entry root").unwrap(),
                    Entry::Via(e) => {
                        writeln!(out, "  entry via {}", sym.event_name(e.index())).unwrap()
                    }
                }
                let mut hist = sym.world_name(sample.base.index()).to_string();
                for e in &sample.events {
                    hist.push(' ');
                    hist.push_str(sym.event_name(e.index()));
                }
                writeln!(out, "  sample {hist}").unwrap();
                let m = &representative.model;
                for w in m.worlds() {
                    let atoms: Vec<&str> =
                        m.valuation(w).iter().map(|x| sym.atom_name(*x)).collect();
                    let marker = if w == representative.point { " point" } else { "" };
                    let atom_part = if atoms.is_empty() {
                        String::new()
                    } else {
                        format!(" {}", atoms.join(" "))
                    };
                    writeln!(
                        out,
                        "  world {} turn={}{}{}",
                        m.describe_world(w, sym),
                        sym.agent_name(m.turn(w)),
                        atom_part,
                        marker
                    )
                    .unwrap();
                }
                for a in 0..m.num_agents() {
                    let agent = Agent::new(a);
                    for u in m.worlds() {
                        for v in m.worlds() {
                            if u < v && m.related(agent, u, v) {
                                writeln!(
                                    out,
                                    "  rel {} {} {}",
                                    sym.agent_name(agent),
                                    m.describe_world(u, sym),
                                    m.describe_world(v, sym)
                                )
                                .unwrap();
                            }
                        }
                    }
                }
            }
            Provenance::World { world } => {
                writeln!(out, "position p{}", p.index()).unwrap();
                writeln!(out, "  world {}", sym.world_name(world.index())).unwrap();
            }
            Provenance::EventVal { event, valuation, turn } => {
                writeln!(out, "position p{}", p.index()).unwrap();
                let atoms: Vec<&str> =
                    valuation.iter().map(|a| sym.atom_name(*a)).collect();
                writeln!(
                    out,
                    "  pair {} {{{}}} turn={}",
                    sym.event_name(event.index()),
                    atoms.join(","),
                    sym.agent_name(*turn)
                )
                .unwrap();
            }
        }
    }
    out
}
