use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use foml::coalesce::{coalesce_obligation_fol, coalesce_obligation_ml, CanonicalOrder, FolOptions, SymbolTable};
use foml::emit::solver::{run_solver, Answer};
use foml::emit::{emit_ml, emit_smt, emit_tptp, parse_mlseq};
use foml::fuzz::{self, Property, Scale};
use foml::leibniz::{compute_leibniz, render_table};
use foml::par::Exec;
use foml::prime::{action_obligation, first_order_env, safety_obligations, SafetyProblem};
use foml::prover::{prove_ml, Frame, Frames, Limits, MlSequent, Verdict};
use foml::semantics::{
    eval, find_fol_countermodel, parse_model, print_model, Bounds, FolStructure, KripkeModel, Relation,
};
use foml::syntax::print::{self, pretty};
use foml::syntax::{parse_problem, parse_problem_file, Env, Expr, Mode, Obligation};

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(name = "foml", version, about = "First-order modal logic obligations: translate, prove, check")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Order {
    Binding,
    Appearance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Smt,
    Tptp,
    Mlseq,
}

#[derive(clap::Args, Clone, Debug)]
struct FolFlags {
    /// Order of the abstracted binders of a coalesced symbol.
    #[arg(long, value_enum, default_value = "binding")]
    canonical_order: Order,
    /// Rewrite `nabla e` for rigid `e` before coalescing; the `--frame`
    /// decides whether the frame is reflexive.
    #[arg(long)]
    rewrite_rigid_box: bool,
    #[arg(long, default_value = "k")]
    frame: Frame,
}

impl FolFlags {
    fn options(&self) -> FolOptions {
        FolOptions {
            order: match self.canonical_order {
                Order::Binding => CanonicalOrder::Binding,
                Order::Appearance => CanonicalOrder::Appearance,
            },
            rewrite_rigid_box: self.rewrite_rigid_box.then_some(self.frame.reflexive),
        }
    }
}

#[derive(clap::Args, Clone, Debug)]
struct SearchFlags {
    /// Look for a first-order countermodel of the translation with at most
    /// U elements (the S part is ignored).
    #[arg(long)]
    search: bool,
    #[arg(long, default_value = "2,2", value_parser = parse_bounds)]
    bounds: (usize, usize),
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Coalesce modal subexpressions into fresh first-order symbols.
    CoalesceFol {
        file: PathBuf,
        #[command(flatten)]
        fol: FolFlags,
        #[command(flatten)]
        search: SearchFlags,
        #[arg(long, value_enum)]
        emit: Option<Format>,
        #[arg(long)]
        solver: Option<PathBuf>,
    },
    /// Coalesce first-order subexpressions into propositional atoms.
    CoalesceMl {
        file: PathBuf,
        #[arg(long, value_enum)]
        emit: Option<Format>,
        #[arg(long, default_value = "k")]
        frame: Frame,
        #[arg(long, default_value = "k")]
        prime_frame: Frame,
    },
    /// Decide a propositional modal sequent (an .mlseq file, or a problem
    /// file coalesced first).
    ProveMl {
        file: PathBuf,
        #[arg(long)]
        frame: Option<Frame>,
        #[arg(long)]
        prime_frame: Option<Frame>,
        #[arg(long, default_value_t = Limits::default().max_worlds)]
        max_worlds: usize,
    },
    /// Leibniz positions of every defined operator.
    Leibniz { file: PathBuf },
    /// Translate an action obligation to first-order logic.
    Action {
        file: PathBuf,
        #[command(flatten)]
        search: SearchFlags,
        #[arg(long, value_enum)]
        emit: Option<Format>,
        #[arg(long)]
        solver: Option<PathBuf>,
    },
    /// The obligations of an invariance proof.
    Safety {
        file: PathBuf,
        /// Write initiation.foml, consecution.foml, conclusion.foml and
        /// glue.mlseq here instead of printing them.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Evaluate an obligation in a model: exit 1 when the model refutes it.
    CheckModel { model: PathBuf, file: PathBuf },
    /// Random checks of the translations against the evaluator.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        iters: u64,
        /// First iteration; with `--iters 1` this replays one report.
        #[arg(long, default_value_t = 0)]
        start: u64,
        #[arg(long, default_value = "3,3", value_parser = parse_bounds)]
        bounds: (usize, usize),
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        sequential: bool,
    },
    /// Emit a translated obligation for an external prover.
    Emit {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "smt")]
        format: Format,
        #[command(flatten)]
        fol: FolFlags,
        #[arg(long, default_value = "k")]
        prime_frame: Frame,
        #[arg(long)]
        solver: Option<PathBuf>,
    },
}

fn parse_bounds(s: &str) -> Result<(usize, usize), String> {
    let (u, w) = s.split_once(',').ok_or("expected U,S")?;
    let u: usize = u.trim().parse().map_err(|_| "universe bound must be a number")?;
    let w: usize = w.trim().parse().map_err(|_| "state bound must be a number")?;
    if u < 2 || w < 1 {
        return Err("bounds need U >= 2 and S >= 1".into());
    }
    Ok((u, w))
}

/// A failure with its exit status.
struct Failure(u8, String);

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure(EXIT_USAGE, msg.to_string())
}

fn data(msg: impl std::fmt::Display) -> Failure {
    Failure(EXIT_DATA, msg.to_string())
}

fn internal(msg: impl std::fmt::Display) -> Failure {
    Failure(EXIT_INTERNAL, msg.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Obligation, Failure> {
    parse_problem(&read(path)?).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(Failure(code, msg)) => {
            eprintln!("foml: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cmd: Cmd) -> Result<(String, u8), Failure> {
    match cmd {
        Cmd::CoalesceFol {
            file,
            fol,
            search,
            emit,
            solver,
        } => {
            let ob = load(&file)?;
            let seq = coalesce_obligation_fol(&ob, fol.options());
            let fo = first_order(&ob.env, &seq.table, seq.hypotheses, seq.goal)?;
            finish_fol(&fo, &seq.table, emit, solver.as_deref(), &search)
        }
        Cmd::CoalesceMl {
            file,
            emit,
            frame,
            prime_frame,
        } => {
            let ob = load(&file)?;
            let t = coalesce_obligation_ml(&ob);
            let seq = MlSequent {
                hypotheses: t.all_hypotheses(),
                goal: t.goal.clone(),
                frames: Frames {
                    nabla: frame,
                    prime: prime_frame,
                },
            };
            match emit {
                Some(Format::Mlseq) => Ok((emit_ml(&seq), 0)),
                Some(_) => Err(usage("coalesce-ml emits only mlseq")),
                None => {
                    let mut out = String::from("(atoms");
                    for a in t.table.entries() {
                        let _ = write!(out, "\n  ({} {})", a.name, pretty(&a.source));
                    }
                    out.push_str(")\n");
                    block(&mut out, "hypotheses", &t.rigidity);
                    for h in &t.hypotheses {
                        let _ = writeln!(out, "(assume {})", pretty(h));
                    }
                    let _ = writeln!(out, "(goal {})", pretty(&t.goal));
                    Ok((out, 0))
                }
            }
        }
        Cmd::ProveMl {
            file,
            frame,
            prime_frame,
            max_worlds,
        } => {
            let text = read(&file)?;
            let mut seq = match parse_mlseq(&text) {
                Ok(s) => s,
                Err(ml_err) => {
                    let ob = parse_problem(&text).map_err(|e| {
                        data(format!("{}: not an ML sequent ({ml_err}) nor a problem ({e})", file.display()))
                    })?;
                    let t = coalesce_obligation_ml(&ob);
                    MlSequent::new(t.all_hypotheses(), t.goal)
                }
            };
            if let Some(f) = frame {
                seq.frames.nabla = f;
            }
            if let Some(f) = prime_frame {
                seq.frames.prime = f;
            }
            match prove_ml(&seq, Limits { max_worlds }).map_err(internal)? {
                Verdict::Proved => Ok(("proved\n".into(), 0)),
                Verdict::Countermodel { model, state } => {
                    let k = model.to_kripke();
                    let out = format!("countermodel at {}\n{}", k.states[state], print_model(&k));
                    Ok((out, 1))
                }
                Verdict::ResourceOut => Ok(("resource limit reached\n".into(), 2)),
            }
        }
        Cmd::Leibniz { file } => {
            let ob = load(&file)?;
            Ok((render_table(&ob.env, &compute_leibniz(&ob.env)), 0))
        }
        Cmd::Action {
            file,
            search,
            emit,
            solver,
        } => {
            let ob = load(&file)?;
            let (fo, table) = action_obligation(&ob).map_err(data)?;
            finish_fol(&fo, &table, emit, solver.as_deref(), &search)
        }
        Cmd::Safety { file, out, search } => {
            let text = read(&file)?;
            let pf = parse_problem_file(&text).map_err(|e| data(format!("{}: {e}", file.display())))?;
            let problem = SafetyProblem::from_file(pf).map_err(data)?;
            let obs = safety_obligations(&problem).map_err(data)?;
            let parts = [
                ("initiation.foml", &obs.initiation),
                ("consecution.foml", &obs.consecution),
                ("conclusion.foml", &obs.conclusion),
            ];
            let mut report = String::new();
            let mut refuted = false;
            for (name, ob) in parts {
                let mut text = print::obligation(ob);
                if name == "consecution.foml" && !obs.table.is_empty() {
                    text = with_symbols(&text, &obs.table);
                }
                match &out {
                    Some(dir) => write_file(&dir.join(name), &text)?,
                    None => {
                        let _ = write!(report, "; {name}\n{text}\n");
                    }
                }
                if search.search {
                    match fol_search(ob, &search)? {
                        Some(s) => {
                            refuted = true;
                            let _ = write!(report, "; {name}: countermodel\n{}\n", print_model(&structure_model(&s, &ob.env)));
                        }
                        None => {
                            let _ = writeln!(report, "; {name}: no countermodel with at most {} elements", search.bounds.0);
                        }
                    }
                }
            }
            let glue = emit_ml(&obs.glue);
            match &out {
                Some(dir) => write_file(&dir.join("glue.mlseq"), &glue)?,
                None => {
                    let _ = write!(report, "; glue.mlseq\n{glue}");
                }
            }
            Ok((report, u8::from(refuted)))
        }
        Cmd::CheckModel { model, file } => {
            let m = parse_model(&read(&model)?).map_err(|e| data(format!("{}: {e}", model.display())))?;
            let ob = load(&file)?;
            check_model(&m, &ob)
        }
        Cmd::Fuzz {
            seed,
            iters,
            start,
            bounds,
            depth,
            sequential,
        } => {
            let scale = Scale {
                max_universe: bounds.0,
                max_states: bounds.1,
                max_depth: depth,
            };
            let exec = if sequential { Exec::Sequential } else { Exec::Parallel };
            let report = fuzz::run(&Property::ALL, seed, start, iters, scale, exec);
            let mut out = format!(
                "seed {seed}, iterations {start}..{}, {} checks: {} discrepancies\n",
                start + iters,
                report.checks,
                report.discrepancies.len()
            );
            if let Some(d) = report.first() {
                let _ = writeln!(out, "first: {d}");
                let _ = writeln!(out, "replay: foml fuzz --seed {seed} --start {} --iters 1", d.iteration);
                return Ok((out, EXIT_INTERNAL));
            }
            Ok((out, 0))
        }
        Cmd::Emit {
            file,
            format,
            fol,
            prime_frame,
            solver,
        } => {
            let ob = load(&file)?;
            if format == Format::Mlseq || ob.mode == Mode::Ml {
                if format != Format::Mlseq {
                    return Err(usage("an ml-mode obligation can only be emitted as mlseq"));
                }
                let t = coalesce_obligation_ml(&ob);
                let seq = MlSequent {
                    hypotheses: t.all_hypotheses(),
                    goal: t.goal,
                    frames: Frames {
                        nabla: fol.frame,
                        prime: prime_frame,
                    },
                };
                return Ok((emit_ml(&seq), 0));
            }
            let none = SearchFlags {
                search: false,
                bounds: (2, 2),
                sequential: false,
            };
            let (fo, table) = if ob.mode == Mode::Action {
                action_obligation(&ob).map_err(data)?
            } else {
                let seq = coalesce_obligation_fol(&ob, fol.options());
                let fo = first_order(&ob.env, &seq.table, seq.hypotheses, seq.goal)?;
                (fo, seq.table)
            };
            finish_fol(&fo, &table, Some(format), solver.as_deref(), &none)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn block(out: &mut String, name: &str, items: &[Expr]) {
    out.push('(');
    out.push_str(name);
    for e in items {
        let _ = write!(out, "\n  {}", pretty(e));
    }
    out.push_str(")\n");
}

fn first_order(env: &Env, table: &SymbolTable, hypotheses: Vec<Expr>, goal: Expr) -> Result<Obligation, Failure> {
    let env = first_order_env(env, table).map_err(internal)?;
    Ok(Obligation::new(env, hypotheses, goal))
}

/// Problem-file text with the symbol block after the declarations.
fn with_symbols(text: &str, table: &SymbolTable) -> String {
    let mut sym = String::from("(symbols");
    for e in table.entries() {
        let _ = write!(sym, "\n  ({} |{}|)", e.name, e.key);
    }
    sym.push_str(")\n");
    let split = text
        .find("(assume ")
        .or_else(|| text.find("(goal "))
        .unwrap_or(text.len());
    format!("{}{sym}{}", &text[..split], &text[split..])
}

fn finish_fol(
    fo: &Obligation,
    table: &SymbolTable,
    emit: Option<Format>,
    solver: Option<&Path>,
    search: &SearchFlags,
) -> Result<(String, u8), Failure> {
    let (text, ext) = match emit {
        None => (with_symbols(&print::obligation(fo), table), None),
        Some(Format::Smt) => (emit_smt(&fo.hypotheses, &fo.goal, Some(table)), Some("smt2")),
        Some(Format::Tptp) => (emit_tptp(&fo.hypotheses, &fo.goal, Some(table)), Some("p")),
        Some(Format::Mlseq) => return Err(usage("a first-order sequent cannot be emitted as mlseq")),
    };
    let mut out = text.clone();
    let mut code = 0;
    if let Some(path) = solver {
        let (text, ext) = match ext {
            Some(ext) => (text, ext),
            None => (emit_smt(&fo.hypotheses, &fo.goal, Some(table)), "smt2"),
        };
        let (answer, _) = run_solver(path, &text, ext).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let word = match answer {
            Answer::Valid => "valid",
            Answer::Invalid => {
                code = 1;
                "invalid"
            }
            Answer::Unknown => {
                code = 2;
                "unknown"
            }
        };
        let _ = writeln!(out, "; solver: {word}");
    }
    if search.search {
        match fol_search(fo, search)? {
            Some(s) => {
                code = 1;
                let _ = write!(out, "; countermodel\n{}", print_model(&structure_model(&s, &fo.env)));
            }
            None => {
                let _ = writeln!(out, "; no countermodel with at most {} elements", search.bounds.0);
            }
        }
    }
    Ok((out, code))
}

fn fol_search(fo: &Obligation, search: &SearchFlags) -> Result<Option<FolStructure>, Failure> {
    let mut bounds = Bounds::new(search.bounds.0, 1);
    if search.sequential {
        bounds.exec = Exec::Sequential;
    }
    find_fol_countermodel(&fo.hypotheses, &fo.goal, &bounds).map_err(data)
}

/// A first-order structure as a one-state model, flexible variables taking
/// their values at that state.
fn structure_model(s: &FolStructure, env: &Env) -> KripkeModel {
    let flex: Vec<&String> = env.flex_vars().iter().filter(|v| s.xi.contains_key(*v)).collect();
    KripkeModel {
        universe: s.universe.clone(),
        tt: s.tt,
        ff: s.ff,
        ops: s.ops.clone(),
        xi: s.xi.iter().filter(|(k, _)| !env.is_flex(k)).map(|(k, v)| (k.clone(), *v)).collect(),
        states: vec!["s0".into()],
        r: Relation::empty(1),
        zeta: flex.into_iter().map(|v| (v.clone(), vec![s.xi[v]])).collect(),
        prime_r: None,
    }
}

fn check_model(m: &KripkeModel, ob: &Obligation) -> Result<(String, u8), Failure> {
    for (i, h) in ob.hypotheses.iter().enumerate() {
        for w in 0..m.state_count() {
            if eval(m, w, h, &ob.env).map_err(data)? != m.tt {
                let out = format!("hypothesis {} fails at {}: not a countermodel\n", i + 1, m.states[w]);
                return Ok((out, 0));
            }
        }
    }
    for w in 0..m.state_count() {
        if eval(m, w, &ob.goal, &ob.env).map_err(data)? != m.tt {
            return Ok((format!("countermodel: the goal fails at {}\n", m.states[w]), 1));
        }
    }
    Ok(("the goal holds at every state\n".into(), 0))
}
