//! Textual reports for the check and solve commands.

use std::fmt::Write as _;

use delgame_core::arena::ActId;
use delgame_core::del::{
    check_h1, check_h2, check_h3, classify_actions, H1Report, H2Report, HistoryDesc, Presentation,
};
use delgame_core::fold::check_hierarchical;
use delgame_core::kripke::ClosureWarnings;
use delgame_core::solve::{Certificate, SolveResult, StrategyTree};
use delgame_core::symbols::Symbols;

use crate::gamefile::GameFile;

fn history_str(sym: &Symbols, h: &HistoryDesc) -> String {
    let mut s = sym.world_name(h.base.index()).to_string();
    for e in &h.events {
        s.push(' ');
        s.push_str(sym.event_name(e.index()));
    }
    s
}

pub fn closure_warnings(out: &mut String, what: &str, sym: &Symbols, w: &ClosureWarnings, world_names: bool) {
    if w.is_empty() {
        return;
    }
    writeln!(out, "warning: {what} relation closure added pairs:").unwrap();
    for (a, u, v) in &w.added {
        let (un, vn) = if world_names {
            (sym.world_name(u.index()), sym.world_name(v.index()))
        } else {
            (sym.event_name(u.index()), sym.event_name(v.index()))
        };
        writeln!(out, "  agent {}: {} ~ {}", sym.agent_name(*a), un, vn).unwrap();
    }
}

/// Renders the hypothesis/classification report; the boolean says whether
/// every check passed.
pub fn check_report(game: &GameFile, depth: usize) -> (String, bool) {
    let mut out = String::new();
    let sym = &game.symbols;
    closure_warnings(&mut out, "model", sym, &game.model_warnings, true);
    closure_warnings(&mut out, "action", sym, &game.action_warnings, false);

    let mut ok = true;
    match check_h1(&game.model) {
        H1Report::Pass { owner } => {
            writeln!(out, "H1 (starting player known): pass (agent {})", sym.agent_name(owner))
                .unwrap();
        }
        H1Report::Fail { w1, a1, w2, a2 } => {
            ok = false;
            writeln!(
                out,
                "H1 (starting player known): FAIL ({} owned by {}, {} owned by {})",
                sym.world_name(w1.index()),
                sym.agent_name(a1),
                sym.world_name(w2.index()),
                sym.agent_name(a2)
            )
            .unwrap();
        }
    }
    match check_h2(&game.actions) {
        H2Report::Pass => writeln!(out, "H2 (turn stays known): pass").unwrap(),
        H2Report::Fail { agent, e1, e2, t1, t2 } => {
            ok = false;
            writeln!(
                out,
                "H2 (turn stays known): FAIL (agent {} confuses {} [turn {}] with {} [turn {}])",
                sym.agent_name(agent),
                sym.event_name(e1.index()),
                sym.agent_name(t1),
                sym.event_name(e2.index()),
                sym.agent_name(t2)
            )
            .unwrap();
        }
    }
    match check_h3(&game.model, &game.actions, depth) {
        Ok(r) if r.passed() => {
            writeln!(out, "H3 (available actions known): pass (verified to depth {depth})")
                .unwrap();
        }
        Ok(r) => {
            ok = false;
            if let Some(v) = &r.violation {
                writeln!(
                    out,
                    "H3 (available actions known): FAIL (agent {} confuses `{}` with `{}` but their available actions differ)",
                    sym.agent_name(v.agent),
                    history_str(sym, &v.h1),
                    history_str(sym, &v.h2)
                )
                .unwrap();
            }
            if let Some(d) = &r.dead_end {
                writeln!(
                    out,
                    "availability: FAIL (no action available after `{}`)",
                    history_str(sym, d)
                )
                .unwrap();
            }
        }
        Err(e) => {
            ok = false;
            writeln!(out, "H3 (available actions known): FAIL ({e})").unwrap();
        }
    }

    let cls = classify_actions(&game.actions);
    writeln!(out, "propositional: {}", if cls.propositional { "yes" } else { "no" }).unwrap();
    let publics: Vec<&str> = game
        .actions
        .events()
        .filter(|e| cls.public[e.index()])
        .map(|e| sym.event_name(e.index()))
        .collect();
    if cls.all_public() {
        writeln!(out, "public actions: all").unwrap();
    } else {
        writeln!(out, "public actions: {}", if publics.is_empty() { "none".into() } else { publics.join(" ") }).unwrap();
    }
    let anns: Vec<&str> = game
        .actions
        .events()
        .filter(|e| cls.announcement[e.index()])
        .map(|e| sym.event_name(e.index()))
        .collect();
    if cls.all_announcements() {
        writeln!(out, "announcements: all").unwrap();
    } else {
        writeln!(out, "announcements: {}", if anns.is_empty() { "none".into() } else { anns.join(" ") }).unwrap();
    }

    let pres = Presentation::assemble(
        game.model.clone(),
        game.actions.clone(),
        game.agents.clone(),
        game.init.clone(),
    );
    match pres {
        Ok(p) => match check_hierarchical(&p) {
            Some(order) => {
                let names: Vec<&str> =
                    order.iter().map(|a| sym.agent_name(*a)).collect();
                writeln!(out, "hierarchical information: yes ({})", names.join(" < ")).unwrap();
            }
            None => writeln!(out, "hierarchical information: no").unwrap(),
        },
        Err(e) => {
            ok = false;
            writeln!(out, "presentation: invalid ({e})").unwrap();
        }
    }
    (out, ok)
}

fn action_name(sym: &Symbols, c: ActId) -> String {
    if c.index() < sym.num_events() {
        sym.event_name(c.index()).to_string()
    } else {
        format!("c{}", c.index())
    }
}

fn path_str(sym: &Symbols, init_names: &[String], init_index: u32, path: &[ActId]) -> String {
    let mut s = format!("({})", init_names[init_index as usize]);
    for c in path {
        s.push(' ');
        s.push_str(&action_name(sym, *c));
    }
    s
}

fn strategy_str(sym: &Symbols, init_names: &[String], tree: &StrategyTree) -> String {
    let mut out = String::new();
    for (agent, m) in &tree.choices {
        writeln!(out, "  agent {}:", sym.agent_name(*agent)).unwrap();
        for ((ii, path), act) in m {
            writeln!(
                out,
                "    {} -> {}",
                path_str(sym, init_names, *ii, path),
                action_name(sym, *act)
            )
            .unwrap();
        }
    }
    if out.is_empty() {
        out.push_str("  (no decisions required)\n");
    }
    out
}

/// Renders a solve result: verdict, strategy tree, certificate.
pub fn solve_report(sym: &Symbols, init_names: &[String], r: &SolveResult) -> String {
    let mut out = String::new();
    writeln!(out, "verdict: {}", r.verdict).unwrap();
    if let Some(tree) = &r.strategy {
        writeln!(out, "strategy (histories up to depth {}):", tree.depth).unwrap();
        out.push_str(&strategy_str(sym, init_names, tree));
    }
    match &r.certificate {
        Some(Certificate::Positional(map)) => {
            writeln!(out, "counter-strategy (positional):").unwrap();
            for (p, c) in map {
                writeln!(out, "    v{} -> {}", p.index(), action_name(sym, *c)).unwrap();
            }
        }
        Some(Certificate::ByHistory(map)) => {
            writeln!(out, "counter-strategy:").unwrap();
            for ((ii, path), act) in map {
                writeln!(
                    out,
                    "    {} -> {}",
                    path_str(sym, init_names, *ii, path),
                    action_name(sym, *act)
                )
                .unwrap();
            }
        }
        Some(Certificate::LosingPlay { init_index, actions }) => {
            writeln!(
                out,
                "losing play: {}",
                path_str(sym, init_names, *init_index, actions)
            )
            .unwrap();
        }
        None => {}
    }
    out
}
