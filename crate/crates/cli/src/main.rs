//! Command-line driver: check game hypotheses, fold induced arenas into
//! finite ones, and solve for distributed winning strategies.
//!
//! Exit codes: 0 = WIN (or success for check/fold), 1 = LOSE, 2 = UNKNOWN,
//! 3 = precondition refusal, 4 = input error.

mod dot;
mod gamefile;
mod report;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use delgame_core::arena::{KScope, LazyArena, PosId, Verdict};
use delgame_core::del::{subjective_init, Presentation, PresentationError};
use delgame_core::fold::{fold_propositional, quotient_public, FoldError, FoldedArena};
use delgame_core::kripke::World;
use delgame_core::solve::{
    oracle_solve, solve_announcement, solve_reach_safe, AnnounceError, AnnounceOptions,
    OracleOptions, ReachSafe, SolveError,
};

use gamefile::{GameFile, Mode};

const EXIT_WIN: u8 = 0;
const EXIT_LOSE: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_REFUSAL: u8 = 3;
const EXIT_INPUT: u8 = 4;

/// Distributed strategy synthesis for epistemic games given as dynamic
/// epistemic logic presentations.
#[derive(Parser)]
#[command(name = "delgame", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    /// Propositional folding (worlds plus event-valuation pairs).
    Prop,
    /// Public-action quotient by pointed isomorphism of attached models.
    Public,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Objective,
    Subjective,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    /// Attractor/safety solving on the public quotient (F/G objectives).
    Reach,
    /// Depth-first eager-strategy search for round-robin announcement games.
    Announce,
    /// Bounded brute-force reference search (three-valued).
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum KScopeArg {
    /// Knowledge ranges over histories from every world of the model.
    All,
    /// Knowledge restricted to histories from the initial worlds.
    Init,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the game hypotheses and classify the action model.
    Check {
        file: PathBuf,
        /// Depth for the exhaustive H3 check.
        #[arg(long)]
        depth: Option<usize>,
        /// Reserved for randomized harnesses; current commands are deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fold the induced arena into an equivalent finite one.
    Fold {
        file: PathBuf,
        /// Which finite construction to build.
        #[arg(value_enum)]
        construction: Construction,
        /// Objective or subjective initial set.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Write the arena as DOT to this path (plus a .sidecar.txt for the
        /// public quotient); defaults to stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Reserved for randomized harnesses.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decide the game and synthesize a distributed strategy.
    Solve {
        file: PathBuf,
        /// Which solving engine to dispatch to.
        #[arg(long, value_enum)]
        engine: EngineArg,
        /// Objective or subjective initial set.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Horizon for the bounded oracle.
        #[arg(long)]
        horizon: Option<usize>,
        /// Depth for the H3 validity check of the presentation.
        #[arg(long)]
        depth: Option<usize>,
        /// Disable the stutter-round leaf rule of the announcement search.
        #[arg(long)]
        strict_leaves: bool,
        /// Scope of knowledge quantification for the oracle.
        #[arg(long, value_enum, default_value = "all")]
        k_scope: KScopeArg,
        /// Write the solved arena (reach engine) as DOT to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Reserved for randomized harnesses.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Check { file, depth, .. } => cmd_check(&file, depth),
        Cmd::Fold { file, construction, mode, dot, .. } => {
            cmd_fold(&file, construction, mode, dot)
        }
        Cmd::Solve { file, engine, mode, horizon, depth, strict_leaves, k_scope, dot, .. } => {
            cmd_solve(&file, engine, mode, horizon, depth, strict_leaves, k_scope, dot)
        }
    };
    ExitCode::from(code)
}

fn load(path: &PathBuf) -> Result<GameFile, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_INPUT
    })?;
    gamefile::parse(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_INPUT
    })
}

fn budget_from_env() -> u64 {
    std::env::var("DELGAME_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(50_000_000)
}

fn cmd_check(path: &PathBuf, depth: Option<usize>) -> u8 {
    let game = match load(path) {
        Ok(g) => g,
        Err(c) => return c,
    };
    let depth = depth.or(game.depth).unwrap_or(4);
    let (text, ok) = report::check_report(&game, depth);
    print!("{text}");
    if ok {
        EXIT_WIN
    } else {
        EXIT_REFUSAL
    }
}

/// Applies the init mode, returning the effective initial world set.
fn effective_init(game: &GameFile, mode: Option<ModeArg>) -> Result<BTreeSet<World>, u8> {
    let mode = match mode {
        Some(ModeArg::Objective) => Mode::Objective,
        Some(ModeArg::Subjective) => Mode::Subjective,
        None => game.mode,
    };
    match mode {
        Mode::Objective => Ok(game.init.clone()),
        Mode::Subjective => {
            if game.init.len() != 1 {
                eprintln!(
                    "refusal: subjective mode needs a unique initial world to take the team's view of (got {})",
                    game.init.len()
                );
                return Err(EXIT_REFUSAL);
            }
            let w = *game.init.iter().next().unwrap();
            let team = game.agents.exists_agents();
            Ok(subjective_init(&game.model, w, &team))
        }
    }
}

fn print_warnings(game: &GameFile) {
    let mut buf = String::new();
    report::closure_warnings(&mut buf, "model", &game.symbols, &game.model_warnings, true);
    report::closure_warnings(&mut buf, "action", &game.symbols, &game.action_warnings, false);
    print!("{buf}");
}

fn cmd_fold(
    path: &PathBuf,
    construction: Construction,
    mode: Option<ModeArg>,
    dot_path: Option<PathBuf>,
) -> u8 {
    let game = match load(path) {
        Ok(g) => g,
        Err(c) => return c,
    };
    print_warnings(&game);
    let init = match effective_init(&game, mode) {
        Ok(i) => i,
        Err(c) => return c,
    };
    let pres = match Presentation::assemble(
        game.model.clone(),
        game.actions.clone(),
        game.agents.clone(),
        init,
    ) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let folded = match construction {
        Construction::Prop => fold_propositional(&pres),
        Construction::Public => quotient_public(&pres),
    };
    let folded = match folded {
        Ok(f) => f,
        Err(FoldError::NotPropositional { event }) => {
            eprintln!(
                "refusal: event `{}` has an epistemic precondition; the propositional folding needs propositional actions",
                game.symbols.event_name(event.index())
            );
            return EXIT_REFUSAL;
        }
        Err(FoldError::NotPublic { event }) => {
            eprintln!(
                "refusal: event `{}` is not public; the quotient construction needs public actions",
                game.symbols.event_name(event.index())
            );
            return EXIT_REFUSAL;
        }
        Err(e) => {
            eprintln!("refusal: {e}");
            return EXIT_REFUSAL;
        }
    };
    println!(
        "positions: {} (theoretical bound {})",
        folded.arena.num_positions(),
        folded.bound
    );
    emit_fold(&game, &folded, matches!(construction, Construction::Public), dot_path)
}

fn emit_fold(
    game: &GameFile,
    folded: &FoldedArena,
    with_sidecar: bool,
    dot_path: Option<PathBuf>,
) -> u8 {
    let labels = dot::position_labels(folded, &game.symbols);
    let dot_text = dot::arena_dot(&folded.arena, &game.symbols, Some(&labels));
    match dot_path {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, dot_text) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return EXIT_INPUT;
            }
            println!("dot: {}", p.display());
            if with_sidecar {
                let sp = p.with_extension("sidecar.txt");
                if let Err(e) = std::fs::write(&sp, dot::sidecar(folded, &game.symbols)) {
                    eprintln!("error: cannot write {}: {e}", sp.display());
                    return EXIT_INPUT;
                }
                println!("sidecar: {}", sp.display());
            }
        }
        None => {
            print!("{dot_text}");
            if with_sidecar {
                print!("{}", dot::sidecar(folded, &game.symbols));
            }
        }
    }
    EXIT_WIN
}

fn presentation_refusal(e: &PresentationError) -> String {
    match e {
        PresentationError::H1Failed(_) => {
            "the presentation violates H1 (the starting player is not known)".into()
        }
        PresentationError::H2Failed(_) => {
            "the presentation violates H2 (the turn does not stay known)".into()
        }
        PresentationError::H3Failed(r) if r.dead_end.is_some() => {
            "a reachable situation has no available action".into()
        }
        PresentationError::H3Failed(_) => {
            "the presentation violates H3 (players do not always know their available actions)"
                .into()
        }
        other => format!("{other}"),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    path: &PathBuf,
    engine: EngineArg,
    mode: Option<ModeArg>,
    horizon: Option<usize>,
    depth: Option<usize>,
    strict_leaves: bool,
    k_scope: KScopeArg,
    dot_path: Option<PathBuf>,
) -> u8 {
    let game = match load(path) {
        Ok(g) => g,
        Err(c) => return c,
    };
    print_warnings(&game);
    let Some(objective) = game.objective.clone() else {
        eprintln!("error: the game file declares no objective");
        return EXIT_INPUT;
    };
    let init = match effective_init(&game, mode) {
        Ok(i) => i,
        Err(c) => return c,
    };
    let h3_depth = depth.or(game.depth).unwrap_or(4);
    let pres = match Presentation::new(
        game.model.clone(),
        game.actions.clone(),
        game.agents.clone(),
        init.clone(),
        h3_depth,
    ) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("refusal: {}", presentation_refusal(&e));
            return EXIT_REFUSAL;
        }
    };
    let init_names: Vec<String> = pres
        .init
        .iter()
        .map(|w| game.symbols.world_name(w.index()).to_string())
        .collect();

    let result = match engine {
        EngineArg::Reach => {
            let folded = match quotient_public(&pres) {
                Ok(f) => f,
                Err(FoldError::NotPublic { event }) => {
                    eprintln!(
                        "refusal: the reach engine solves on the public quotient, but event `{}` is not public",
                        game.symbols.event_name(event.index())
                    );
                    return EXIT_REFUSAL;
                }
                Err(e) => {
                    eprintln!("refusal: {e}");
                    return EXIT_REFUSAL;
                }
            };
            let Some(obj) = ReachSafe::from_formula(&objective) else {
                eprintln!(
                    "refusal: the reach engine needs an objective of the form F phi or G phi with phi epistemic"
                );
                return EXIT_REFUSAL;
            };
            let arena_init: Vec<PosId> = folded.arena.init().to_vec();
            let accept_pi = arena_init.len() > 1;
            if accept_pi {
                println!(
                    "note: {} initial positions; solving with perfect-information semantics (positional strategies need not be uniform across initial uncertainty)",
                    arena_init.len()
                );
            }
            match solve_reach_safe(&folded, &pres.agents, &obj, &arena_init, accept_pi) {
                Ok(r) => {
                    if let Some(p) = dot_path {
                        let labels = dot::position_labels(&folded, &game.symbols);
                        let text = dot::arena_dot(&folded.arena, &game.symbols, Some(&labels));
                        if std::fs::write(&p, text).is_ok() {
                            println!("dot: {}", p.display());
                        }
                    }
                    let labels = dot::position_labels(&folded, &game.symbols);
                    let names: Vec<String> =
                        arena_init.iter().map(|p| labels[p.index()].clone()).collect();
                    print!("{}", report::solve_report(&game.symbols, &names, &r));
                    return verdict_code(&r.verdict);
                }
                Err(SolveError::NotPublicArena) => {
                    eprintln!("refusal: the folded arena has non-public actions");
                    return EXIT_REFUSAL;
                }
                Err(e) => {
                    eprintln!("refusal: {e}");
                    return EXIT_REFUSAL;
                }
            }
        }
        EngineArg::Announce => {
            let opts = AnnounceOptions { strict_leaves };
            match solve_announcement(&pres, &objective, &opts) {
                Ok(r) => r,
                Err(AnnounceError::NotAnnouncement { event }) => {
                    eprintln!(
                        "refusal: the announcement engine needs public announcements, but event `{}` is not one",
                        game.symbols.event_name(event.index())
                    );
                    return EXIT_REFUSAL;
                }
                Err(AnnounceError::MultiInit { inits }) => {
                    eprintln!(
                        "refusal: the announcement engine needs a unique initial world, got {inits}"
                    );
                    return EXIT_REFUSAL;
                }
                Err(AnnounceError::FragmentViolation { .. }) => {
                    eprintln!(
                        "refusal: the announcement engine accepts objectives without X and without temporal operators under K"
                    );
                    return EXIT_REFUSAL;
                }
                Err(AnnounceError::NotRoundRobin { owner, event, got, expected }) => {
                    eprintln!(
                        "refusal: not round-robin: at a state owned by `{}`, event `{}` passes the turn to `{}` (expected `{}`)",
                        game.symbols.agent_name(owner),
                        game.symbols.event_name(event.index()),
                        game.symbols.agent_name(got),
                        game.symbols.agent_name(expected)
                    );
                    return EXIT_REFUSAL;
                }
                Err(e) => {
                    eprintln!("refusal: {e}");
                    return EXIT_REFUSAL;
                }
            }
        }
        EngineArg::Oracle => {
            let lazy = LazyArena::new(pres.clone());
            let arena_init: Vec<PosId> = pres.init.iter().map(|&w| lazy.root_of(w)).collect();
            let default_h = pres.num_agents() * pres.model.num_worlds() + pres.num_agents();
            let opts = OracleOptions {
                horizon: horizon.or(game.horizon).unwrap_or(default_h).max(1),
                k_scope: match k_scope {
                    KScopeArg::All => KScope::AllRoots,
                    KScopeArg::Init => KScope::InitOnly,
                },
                uniform: true,
                budget: budget_from_env(),
            };
            oracle_solve(&lazy, &pres.agents, &objective, &arena_init, &opts)
        }
    };
    print!("{}", report::solve_report(&game.symbols, &init_names, &result));
    verdict_code(&result.verdict)
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Win => EXIT_WIN,
        Verdict::Lose => EXIT_LOSE,
        Verdict::Unknown(_) => EXIT_UNKNOWN,
    }
}
