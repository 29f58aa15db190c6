use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use cascata::automaton::{Equivalence, FlatAutomaton, FlatAutomatonFile};
use cascata::cascade::{Cascade, FlattenOptions};
use cascata::complexity::{
    all_strings, bounds_table, class_descriptor, class_growth_bound, graph_dimension, growth, log2_big,
    render_rows_csv, render_rows_text, sample_bound_finite, vc_dimension, BoundRow, ClassDescriptor, PatternTable,
};
use cascata::learner::{erm_select, estimate_risk, exact_risk, trial_seed, Experiment, LabeledSample, StringDistribution};
use cascata::scenario::{
    datalog_oracle, example3_counter_cascade, example3_flipflop_cascade, example4_class, generate_traces, parse_trace,
    task_alphabet, DEFAULT_WEIGHTS,
};
use cascata::spec::{CascadeClassSpec, CascadeSpec, ExperimentConfig};
use cascata::{Caps, Error};

const EXIT_GENERAL: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "cascata", version, about = "Automata cascades: evaluation, flattening, bounds and learning experiments")]
struct Cli {
    /// Seed for every random choice; overrides the seed of an experiment config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Size cap applied to every exhaustive procedure.
    #[arg(long, global = true, env = "CASCATA_CAP")]
    cap: Option<u64>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Output of a cascade on each trace of a file (one trace per line).
    Run { spec: PathBuf, traces: PathBuf },
    /// Product automaton of a cascade.
    Flatten {
        spec: PathBuf,
        /// Keep unreachable product states.
        #[arg(long)]
        full: bool,
    },
    /// Minimal automaton of a cascade spec or automaton file.
    Minimize { input: PathBuf },
    /// Compares two cascades or automata.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        /// Longest string compared when the alphabets differ.
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
    /// Checks whether the transition monoid is aperiodic.
    Aperiodic { input: PathBuf },
    /// Cardinality, growth, dimension and sample-size bounds.
    Bounds {
        /// Class descriptor file.
        descriptor: Option<PathBuf>,
        /// Derive the descriptor from an enumerable class spec instead.
        #[arg(long, conflicts_with = "descriptor")]
        class: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        max_len: u64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        /// Compute the graph dimension of each input-function class exactly.
        #[arg(long)]
        exact_dimension: bool,
    },
    /// Exact growth and shattering dimension of an enumerable class on short strings.
    Growth {
        class: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        ell: Vec<usize>,
    },
    /// Empirical risk minimisation over an enumerable class.
    Learn {
        config: PathBuf,
        class: PathBuf,
        /// Trace file; with `--labels`, replaces generated samples.
        #[arg(long, requires = "labels")]
        traces: Option<PathBuf>,
        #[arg(long, requires = "traces")]
        labels: Option<PathBuf>,
        /// Write the selected cascade spec here.
        #[arg(long)]
        winner: Option<PathBuf>,
    },
    /// Files for the crafting-task example.
    Scenario {
        #[command(subcommand)]
        what: ScenarioCommand,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Spec of the flip-flop cascade.
    Flipflop,
    /// Spec of the counter cascade.
    Counter,
    /// Class spec of the DNF family with `d` components.
    Family {
        #[arg(long, default_value_t = 5)]
        d: usize,
    },
    /// Descriptor of the DNF family with `d` components.
    Descriptor {
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        max_len: u64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
    },
    /// Random traces, one per line.
    Traces {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        /// Six letter weights; the built-in defaults when absent.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Task-completion labels of a trace file, from the rule-based reference.
    Labels { traces: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_cap() {
            EXIT_CAP
        } else if e.is_parse() {
            EXIT_PARSE
        } else {
            EXIT_GENERAL
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

/// Errors found while loading an input document; caps keep their own code.
fn input_error(path: &Path, e: Error) -> Failure {
    let code = if e.is_cap() { EXIT_CAP } else { EXIT_PARSE };
    Failure::new(code, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_GENERAL, format!("{}: {e}", path.display())))
}

fn json_error(path: &Path, e: serde_json::Error) -> Failure {
    Failure::new(EXIT_PARSE, format!("{}: {e}", path.display()))
}

fn load_cascade(path: &Path) -> Outcome<Cascade> {
    let text = read(path)?;
    CascadeSpec::parse(&text)
        .and_then(|s| s.build())
        .map_err(|e| input_error(path, e))
}

fn load_class(path: &Path) -> Outcome<cascata::family::CascadeClass> {
    let text = read(path)?;
    CascadeClassSpec::parse(&text)
        .and_then(|s| s.build())
        .map_err(|e| input_error(path, e))
}

/// A cascade spec (flattened) or an automaton file.
fn load_automaton(path: &Path, caps: &Caps) -> Outcome<FlatAutomaton> {
    let text = read(path)?;
    let doc: Json = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    if doc.get("components").is_some() {
        let cascade = load_cascade(path)?;
        Ok(cascade.flatten(FlattenOptions {
            reachable_only: true,
            cap: caps.product_states,
        })?)
    } else {
        let file: FlatAutomatonFile = serde_json::from_value(doc).map_err(|e| json_error(path, e))?;
        FlatAutomaton::from_file(&file).map_err(|e| input_error(path, e))
    }
}

fn emit(cli: &Cli, text: &str) -> Outcome {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::new(EXIT_GENERAL, format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::new(EXIT_GENERAL, format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

fn caps(cli: &Cli) -> Caps {
    cli.cap.map(Caps::uniform).unwrap_or_default()
}

fn unsupported(format: Format, command: &str) -> Failure {
    let name = match format {
        Format::Text => "text",
        Format::Csv => "csv",
        Format::Dot => "dot",
        Format::Json => "json",
    };
    Failure::new(EXIT_GENERAL, format!("`{command}` has no {name} output"))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_run(cli: &Cli, spec: &Path, traces: &Path) -> Outcome {
    let cascade = load_cascade(spec)?;
    let text = read(traces)?;
    let mut results = Vec::new();
    let mut failed = 0;
    for (i, line) in text.lines().enumerate() {
        let outcome = if line.trim().is_empty() {
            Err(Error::EmptyString)
        } else {
            cascade.run_trace(line)
        };
        if let Err(e) = &outcome {
            failed += 1;
            eprintln!("{}:{}: {e}", traces.display(), i + 1);
        }
        results.push((i + 1, line, outcome));
    }
    let out = match cli.format {
        Format::Text => results.iter().fold(String::new(), |mut acc, (_, _, r)| {
            let _ = writeln!(acc, "{}", r.as_deref().unwrap_or("error"));
            acc
        }),
        Format::Csv => results.iter().fold(String::from("line,trace,output,error\n"), |mut acc, (n, l, r)| {
            let (o, e) = match r {
                Ok(o) => (o.clone(), String::new()),
                Err(e) => (String::new(), e.to_string()),
            };
            let _ = writeln!(acc, "{n},{},{},{}", csv_field(l), csv_field(&o), csv_field(&e));
            acc
        }),
        Format::Json => pretty(
            &results
                .iter()
                .map(|(n, l, r)| match r {
                    Ok(o) => json!({"line": n, "trace": l, "output": o}),
                    Err(e) => json!({"line": n, "trace": l, "error": e.to_string()}),
                })
                .collect::<Vec<_>>(),
        ),
        Format::Dot => return Err(unsupported(cli.format, "run")),
    };
    emit(cli, &out)?;
    if failed > 0 {
        return Err(Failure::new(EXIT_PARSE, format!("{failed} trace line(s) could not be evaluated")));
    }
    Ok(())
}

fn render_automaton(cli: &Cli, a: &FlatAutomaton) -> Outcome<String> {
    Ok(match cli.format {
        Format::Text => format!("# states: {}\n{}", a.num_states(), a.to_text()),
        Format::Json => pretty(&a.to_file()),
        Format::Dot => a.to_dot(),
        Format::Csv => {
            let file = a.to_file();
            let mut out = String::from("from,letter,to,output\n");
            for t in &file.transitions {
                let _ = writeln!(out, "{},{},{},{}", csv_field(&t.from), csv_field(&t.letter), csv_field(&t.to), csv_field(&t.output));
            }
            out
        }
    })
}

fn cmd_flatten(cli: &Cli, spec: &Path, full: bool) -> Outcome {
    let cascade = load_cascade(spec)?;
    let flat = cascade.flatten(FlattenOptions {
        reachable_only: !full,
        cap: caps(cli).product_states,
    })?;
    eprintln!("states: {} (product of component state counts: {})", flat.num_states(), cascade.product_size());
    emit(cli, &render_automaton(cli, &flat)?)
}

fn cmd_minimize(cli: &Cli, input: &Path) -> Outcome {
    let flat = load_automaton(input, &caps(cli))?;
    let min = flat.minimize();
    eprintln!("states: {} (before minimisation: {})", min.num_states(), flat.num_states());
    emit(cli, &render_automaton(cli, &min)?)
}

fn cmd_equiv(cli: &Cli, left: &Path, right: &Path, max_len: usize) -> Outcome {
    let caps = caps(cli);
    let a = load_automaton(left, &caps)?;
    let b = load_automaton(right, &caps)?;
    let verdict = a.equivalent(&b, max_len)?;
    let out = match (&verdict, cli.format) {
        (Equivalence::Equivalent, Format::Json) => pretty(&json!({"equivalent": true})),
        (Equivalence::Equivalent, Format::Text) => "equivalent\n".to_string(),
        (Equivalence::Equivalent, Format::Csv) => "equivalent,counterexample,left,right\ntrue,,,\n".to_string(),
        (Equivalence::Counterexample { word, left, right }, f) => {
            let w = a.alphabet().render_word(word);
            match f {
                Format::Json => pretty(&json!({"equivalent": false, "counterexample": w, "left": left, "right": right})),
                Format::Csv => format!("equivalent,counterexample,left,right\nfalse,{},{},{}\n", csv_field(&w), csv_field(left), csv_field(right)),
                _ => format!("not equivalent\ncounterexample: {w}\nleft: {left}\nright: {right}\n"),
            }
        }
        (_, Format::Dot) => return Err(unsupported(cli.format, "equiv")),
    };
    emit(cli, &out)?;
    if verdict.is_equivalent() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, "the automata are not equivalent"))
    }
}

fn cmd_aperiodic(cli: &Cli, input: &Path) -> Outcome {
    let caps = caps(cli);
    let flat = load_automaton(input, &caps)?;
    let report = flat.is_aperiodic(caps.monoid)?;
    let witness = report.witness.as_ref().map(|w| flat.alphabet().render_word(w));
    let out = match cli.format {
        Format::Json => pretty(&json!({"aperiodic": report.aperiodic, "monoid_size": report.monoid_size, "witness": witness})),
        Format::Csv => format!(
            "aperiodic,monoid_size,witness\n{},{},{}\n",
            report.aperiodic,
            report.monoid_size.map_or(String::new(), |n| n.to_string()),
            csv_field(witness.as_deref().unwrap_or(""))
        ),
        Format::Text => {
            let mut s = format!("{}\n", if report.aperiodic { "aperiodic" } else { "not aperiodic" });
            if let Some(n) = report.monoid_size {
                let _ = writeln!(s, "monoid size: {n}");
            }
            if let Some(w) = &witness {
                let _ = writeln!(s, "witness: {w}");
            }
            s
        }
        Format::Dot => return Err(unsupported(cli.format, "aperiodic")),
    };
    emit(cli, &out)?;
    if report.aperiodic {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, "the transition monoid contains a non-trivial group"))
    }
}

fn render_rows(cli: &Cli, rows: &[BoundRow], command: &str) -> Outcome<String> {
    Ok(match cli.format {
        Format::Text => render_rows_text(rows),
        Format::Csv => render_rows_csv(rows),
        Format::Json => pretty(
            &rows
                .iter()
                .map(|r| json!({"quantity": r.quantity, "value": r.value, "note": r.note}))
                .collect::<Vec<_>>(),
        ),
        Format::Dot => return Err(unsupported(cli.format, command)),
    })
}

fn cmd_bounds(cli: &Cli, cmd: &Command) -> Outcome {
    let Command::Bounds {
        descriptor,
        class,
        max_len,
        epsilon,
        eta,
        exact_dimension,
    } = cmd
    else {
        unreachable!()
    };
    let desc: ClassDescriptor = match (descriptor, class) {
        (Some(path), _) => serde_json::from_str(&read(path)?).map_err(|e| json_error(path, e))?,
        (None, Some(path)) => {
            let class = load_class(path)?;
            let cap = exact_dimension.then(|| caps(cli).enumeration);
            class_descriptor(&class, *max_len, *epsilon, *eta, cap)?
        }
        (None, None) => return Err(Failure::new(EXIT_PARSE, "give a descriptor file or --class")),
    };
    let rows = bounds_table(&desc)?;
    emit(cli, &render_rows(cli, &rows, "bounds")?)
}

fn cmd_growth(cli: &Cli, path: &Path, max_len: usize, ells: &[usize]) -> Outcome {
    let caps = caps(cli);
    let class = load_class(path)?;
    let hyps = class.enumerate_flat(caps.enumeration, caps.product_states)?;
    let universe = all_strings(class.external().size(), max_len);
    let table = PatternTable::from_automata(&hyps, &universe)?;
    let mut rows = vec![BoundRow {
        quantity: "functions".into(),
        value: format!("{} ({} distinct on strings up to length {max_len})", hyps.len(), table.dedup().functions()),
        note: String::new(),
    }];
    let seed = cli.seed.unwrap_or(0);
    for &ell in ells {
        let g = growth(&table, ell, caps.growth_samples, seed);
        let bound = class_growth_bound(&class, ell, max_len, caps.growth_samples)?;
        rows.push(BoundRow {
            quantity: format!("N(F, X_{ell})"),
            value: g.count.to_string(),
            note: format!(
                "bound {bound:.6e}; {}; witness {}",
                if g.exact { "exact" } else { "heuristic lower bound" },
                g.witness
                    .iter()
                    .map(|&i| class.external().render_word(&universe[i]))
                    .collect::<Vec<_>>()
                    .join(" | ")
            ),
        });
    }
    let dim = if table.outputs() <= 2 {
        vc_dimension(&table, caps.growth_samples)?
    } else {
        graph_dimension(&table, caps.growth_samples)?
    };
    let desc = class_descriptor(&class, max_len as u64, 0.1, 0.1, Some(caps.enumeration))?;
    let bound = match desc.dimension_bound() {
        Ok(b) => format!("bound {b:.4}"),
        Err(e) => format!("bound N/A: {e}"),
    };
    rows.push(BoundRow {
        quantity: if table.outputs() <= 2 { "VC dimension" } else { "graph dimension" }.into(),
        value: dim.dimension.to_string(),
        note: format!("{bound}; {}", if dim.exact { "exact" } else { "search stopped at the cap" }),
    });
    emit(cli, &render_rows(cli, &rows, "growth")?)
}

fn read_labels(path: &Path, outputs: &[String]) -> Outcome<Vec<usize>> {
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            outputs.iter().position(|o| o == l.trim()).ok_or_else(|| {
                Failure::new(EXIT_PARSE, format!("{}:{}: label `{}` is not an output ({})", path.display(), i + 1, l.trim(), outputs.join(", ")))
            })
        })
        .collect()
}

fn cmd_learn(cli: &Cli, config: &Path, class_path: &Path, files: Option<(&Path, &Path)>, winner: Option<&Path>) -> Outcome {
    let cfg = ExperimentConfig::parse(&read(config)?).map_err(|e| input_error(config, e))?;
    let mut caps = cfg.caps.map(|c| c.apply(Caps::default())).unwrap_or_default();
    if let Some(cap) = cli.cap {
        caps = Caps::uniform(cap);
    }
    let seed = cli.seed.unwrap_or(cfg.seed);
    let class = load_class(class_path)?;
    let cardinality = class.cardinality();
    let cascades = class.enumerate(caps.enumeration)?;
    let options = FlattenOptions {
        reachable_only: true,
        cap: caps.product_states,
    };
    let hyps = cascades.iter().map(|c| c.flatten(options)).collect::<Result<Vec<_>, _>>()?;
    let bound = sample_bound_finite(&cardinality, cfg.epsilon, cfg.eta)?;
    let letters = class.external().size();
    let dist = StringDistribution::weighted(cfg.normalized_weights(letters)?, cfg.max_len)?;
    let target = match &cfg.target {
        Some(t) => Some(
            t.build()
                .and_then(|c| c.flatten(options))
                .map_err(|e| input_error(config, e))?,
        ),
        None => None,
    };

    let mut report = serde_json::Map::new();
    report.insert("class_size".into(), json!(cardinality.to_string()));
    report.insert("log2_class_size".into(), json!(log2_big(&cardinality)));
    report.insert("sample_bound_finite".into(), json!(bound));
    report.insert(
        "sample_bound_note".into(),
        json!("instantiation ceil(ln(2|F|/eta)/(2 eps^2)), not a constant stated with the guarantee"),
    );
    report.insert("epsilon".into(), json!(cfg.epsilon));
    report.insert("eta".into(), json!(cfg.eta));
    report.insert("seed".into(), json!(seed));

    let chosen = match files {
        Some((traces, labels)) => {
            let text = read(traces)?;
            let strings = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| {
                    class
                        .external()
                        .parse_word(l)
                        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}:{}: {e}", traces.display(), i + 1)))
                })
                .collect::<Outcome<Vec<_>>>()?;
            let labels = read_labels(labels, hyps[0].outputs())?;
            if strings.len() != labels.len() {
                return Err(Failure::new(
                    EXIT_PARSE,
                    format!("{} traces but {} labels", strings.len(), labels.len()),
                ));
            }
            let sample = LabeledSample::from_parts(strings, labels)?;
            let erm = erm_select(&hyps, &sample)?;
            report.insert("sample_size".into(), json!(sample.len()));
            report.insert("empirical_risk".into(), json!(erm.empirical_risk));
            report.insert("ties".into(), json!(erm.ties));
            if let Some(t) = &target {
                let experiment = Experiment::new(&hyps, t, &dist)?;
                report.insert("true_risk".into(), json!(experiment.risk(erm.index)));
                report.insert("class_min_risk".into(), json!(experiment.min_risk()));
                report.insert("gap".into(), json!(experiment.risk(erm.index) - experiment.min_risk()));
            }
            erm.index
        }
        None => {
            let t = target
                .as_ref()
                .ok_or_else(|| Failure::new(EXIT_PARSE, "generated samples need a `target` in the config"))?;
            let ell = cfg.sample_size.unwrap_or(bound) as usize;
            let experiment = Experiment::new(&hyps, t, &dist)?;
            let mut successes = 0;
            let mut total_gap = 0.0;
            let mut first = None;
            for k in 0..cfg.trials {
                let trial = experiment.trial(ell, trial_seed(seed, k as u64))?;
                if trial.gap <= cfg.epsilon + 1e-12 {
                    successes += 1;
                }
                total_gap += trial.gap;
                first.get_or_insert(trial);
            }
            let first = first.expect("at least one trial");
            let h = &hyps[first.erm.index];
            let target_fn = |x: &[usize]| t.run(x).expect("non-empty");
            let h_fn = |x: &[usize]| h.run(x).expect("non-empty");
            let mc = estimate_risk(&h_fn, &target_fn, &dist, 10_000, seed)?;
            report.insert("sample_size".into(), json!(ell));
            report.insert("trials".into(), json!(cfg.trials));
            report.insert("successes".into(), json!(successes));
            report.insert("mean_gap".into(), json!(total_gap / cfg.trials as f64));
            report.insert("empirical_risk".into(), json!(first.erm.empirical_risk));
            report.insert("true_risk".into(), json!(exact_risk(h, t, &dist)?));
            report.insert("estimated_risk".into(), json!(mc.mean));
            report.insert("estimated_risk_stderr".into(), json!(mc.stderr));
            report.insert("class_min_risk".into(), json!(experiment.min_risk()));
            report.insert("gap".into(), json!(first.gap));
            first.erm.index
        }
    };
    let spec = CascadeSpec::describe(&cascades[chosen])?;
    report.insert("winner_index".into(), json!(chosen));
    if let Some(path) = winner {
        fs::write(path, spec.to_json() + "\n").map_err(|e| Failure::new(EXIT_GENERAL, format!("{}: {e}", path.display())))?;
    } else {
        report.insert("winner".into(), serde_json::to_value(&spec).expect("plain data"));
    }
    let out = match cli.format {
        Format::Json => pretty(&Json::Object(report)),
        Format::Text => report.iter().fold(String::new(), |mut acc, (k, v)| {
            match v {
                Json::String(s) => {
                    let _ = writeln!(acc, "{k}: {s}");
                }
                Json::Object(_) => {
                    let _ = writeln!(acc, "{k}:\n{}", serde_json::to_string_pretty(v).expect("plain data"));
                }
                other => {
                    let _ = writeln!(acc, "{k}: {other}");
                }
            }
            acc
        }),
        Format::Csv => {
            let mut s = String::from("key,value\n");
            for (k, v) in &report {
                if !v.is_object() {
                    let v = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
                    let _ = writeln!(s, "{k},{}", csv_field(&v));
                }
            }
            s
        }
        Format::Dot => return Err(unsupported(cli.format, "learn")),
    };
    emit(cli, &out)
}

fn cmd_scenario(cli: &Cli, what: &ScenarioCommand) -> Outcome {
    let out = match what {
        ScenarioCommand::Flipflop => CascadeSpec::describe(&example3_flipflop_cascade())?.to_json() + "\n",
        ScenarioCommand::Counter => CascadeSpec::describe(&example3_counter_cascade())?.to_json() + "\n",
        ScenarioCommand::Family { d } => CascadeClassSpec::describe(&example4_class(*d)?)?.to_json() + "\n",
        ScenarioCommand::Descriptor { d, max_len, epsilon, eta } => {
            pretty(&class_descriptor(&example4_class(*d)?, *max_len, *epsilon, *eta, None)?)
        }
        ScenarioCommand::Traces { n, max_len, weights } => {
            let weights = weights.clone().unwrap_or_else(|| DEFAULT_WEIGHTS.to_vec());
            let traces = generate_traces(&weights, *n, *max_len, cli.seed.unwrap_or(0))?;
            let alphabet = task_alphabet();
            traces.iter().fold(String::new(), |mut acc, t| {
                let _ = writeln!(acc, "{}", alphabet.render_word(t));
                acc
            })
        }
        ScenarioCommand::Labels { traces } => {
            let text = read(traces)?;
            let mut out = String::new();
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let t = parse_trace(line).map_err(|e| Failure::new(EXIT_PARSE, format!("{}:{}: {e}", traces.display(), i + 1)))?;
                let label = datalog_oracle(&t).last().copied().unwrap_or(false);
                let _ = writeln!(out, "{}", u8::from(label));
            }
            out
        }
    };
    emit(cli, &out)
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Run { spec, traces } => cmd_run(cli, spec, traces),
        Command::Flatten { spec, full } => cmd_flatten(cli, spec, *full),
        Command::Minimize { input } => cmd_minimize(cli, input),
        Command::Equiv { left, right, max_len } => cmd_equiv(cli, left, right, *max_len),
        Command::Aperiodic { input } => cmd_aperiodic(cli, input),
        cmd @ Command::Bounds { .. } => cmd_bounds(cli, cmd),
        Command::Growth { class, max_len, ell } => cmd_growth(cli, class, *max_len, ell),
        Command::Learn {
            config,
            class,
            traces,
            labels,
            winner,
        } => {
            let files = traces.as_deref().zip(labels.as_deref());
            cmd_learn(cli, config, class, files, winner.as_deref())
        }
        Command::Scenario { what } => cmd_scenario(cli, what),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cascata: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
