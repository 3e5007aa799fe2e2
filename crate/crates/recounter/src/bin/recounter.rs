use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use recounter::bench::{measure_throughput, pair_curve};
use recounter::format::{load_machine, save_machine, LoadError};
use recounter::stream::{
    scan_reader, to_json_line, EventRecord, ScanSummary, SummaryRecord, CHUNK_SIZE,
};
use recounter::verify::{run_verify, show_word, Finding, VerifyConfig, VerifyError};
use recounter_core::{
    export_dot, parse_ruleset_with_mode, size_report, BuildError, CompileConfig, CounterMachine,
    DfaError, MachineError, Mode, Ruleset, WindowMode,
};

/// Exit statuses.
const EXIT_MATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_CORRUPT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "recounter",
    version,
    about = "Compile signature rules into a DFA with counters and scan byte streams"
)]
#[command(
    after_help = "Exit status: 0 ok, 1 match signalled (scan --fail-on-match) or verification failed, \
2 usage or input error, 3 state cap exceeded, 4 corrupt machine file."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Plain,
    #[value(name = "double_counting", alias = "double-counting")]
    DoubleCounting,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Plain => Mode::Plain,
            ModeArg::DoubleCounting => Mode::DoubleCounting,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Paper,
    Exact,
}

impl From<WindowArg> for WindowMode {
    fn from(w: WindowArg) -> WindowMode {
        match w {
            WindowArg::Paper => WindowMode::Paper,
            WindowArg::Exact => WindowMode::Exact,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Rule mode; overrides a `mode=` line in the ruleset.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Gap and counted-prefix tracking.
    #[arg(long, value_enum, default_value = "paper")]
    window: WindowArg,
    /// Maximum number of detector states.
    #[arg(long, env = "RECOUNTER_STATE_CAP", default_value_t = recounter_core::DEFAULT_STATE_CAP)]
    state_cap: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a ruleset into a machine file.
    Compile {
        #[arg(short = 'r', long)]
        rules: PathBuf,
        #[arg(short = 'o', long)]
        out: PathBuf,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Scan inputs (stdin if none) and print one JSON record per event.
    ///
    /// Records are `{"rule","stage","offset","kind"}` with kind `stage_advance`
    /// or `rule_match`, followed by a summary record. With several inputs each
    /// record also names its input.
    Scan {
        #[arg(short = 'm', long)]
        machine: PathBuf,
        /// Input files; `-` reads stdin.
        #[arg(short = 'i', long = "input")]
        inputs: Vec<PathBuf>,
        /// Print nothing.
        #[arg(long)]
        quiet: bool,
        /// Exit with status 1 if any rule matched.
        #[arg(long)]
        fail_on_match: bool,
        /// Inputs scanned concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = CHUNK_SIZE, hide = true)]
        chunk_size: usize,
    },
    /// Check the machine against the oracle and the classical DFA.
    Verify {
        #[arg(short = 'r', long)]
        rules: PathBuf,
        /// Symbols of the enumerated and random words.
        #[arg(long, default_value = "abcd")]
        alphabet: String,
        /// Every word up to this length is checked.
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        /// Random words of length up to 64.
        #[arg(long, default_value_t = 100_000)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Measure scan throughput, or print the blow-up curve.
    Bench {
        #[arg(short = 'm', long, conflicts_with = "rules")]
        machine: Option<PathBuf>,
        #[arg(short = 'r', long)]
        rules: Option<PathBuf>,
        #[arg(short = 'i', long)]
        input: Option<PathBuf>,
        /// Print the classical vs counter-machine curve for n = 1..N as CSV.
        #[arg(long)]
        curve: Option<usize>,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Export a machine as Graphviz DOT.
    Graph {
        #[arg(short = 'm', long)]
        machine: PathBuf,
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile { rules, out, build } => compile(&rules, &out, &build),
        Command::Scan {
            machine,
            inputs,
            quiet,
            fail_on_match,
            jobs,
            chunk_size,
        } => scan(&machine, &inputs, quiet, fail_on_match, jobs, chunk_size),
        Command::Verify {
            rules,
            alphabet,
            max_len,
            random,
            seed,
            build,
        } => verify(&rules, alphabet.as_bytes(), max_len, random, seed, &build),
        Command::Bench {
            machine,
            rules,
            input,
            curve,
            build,
        } => bench(
            machine.as_deref(),
            rules.as_deref(),
            input.as_deref(),
            curve,
            &build,
        ),
        Command::Graph { machine, out } => graph(&machine, &out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("recounter: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| fail(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn load_rules(path: &Path, mode: Option<ModeArg>) -> Result<Ruleset, Failure> {
    let text = read_file(path)?;
    parse_ruleset_with_mode(&text, mode.map(Mode::from))
        .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn machine_failure(e: MachineError) -> Failure {
    match e {
        MachineError::Build(BuildError::Dfa(DfaError::StateCap { cap })) => fail(
            EXIT_CAP,
            format!("detector automaton exceeds the state cap of {cap}"),
        ),
        e => fail(EXIT_USAGE, e.to_string()),
    }
}

fn build_machine(rules: &Path, build: &BuildArgs) -> Result<CounterMachine, Failure> {
    let ruleset = load_rules(rules, build.mode)?;
    CounterMachine::compile(
        &ruleset,
        CompileConfig {
            window_mode: build.window.into(),
            state_cap: build.state_cap,
        },
    )
    .map_err(machine_failure)
}

fn open_machine(path: &Path) -> Result<CounterMachine, Failure> {
    load_machine(path).map_err(|e| match e {
        LoadError::Io { .. } => fail(EXIT_USAGE, e.to_string()),
        LoadError::Format(f) => fail(EXIT_CORRUPT, format!("{}: {f}", path.display())),
    })
}

fn compile(rules: &Path, out: &Path, build: &BuildArgs) -> Outcome {
    let machine = build_machine(rules, build)?;
    save_machine(&machine, out)
        .map_err(|e| fail(EXIT_USAGE, format!("cannot write {}: {e}", out.display())))?;
    let r = size_report(&machine);
    println!("rules: {}", r.n_rules);
    println!("block1 states: {}", r.block1_states);
    println!("channels: {}", r.n_channels);
    println!(
        "block1 bits: {} (transitions {}, outputs {})",
        r.block1_bits(),
        r.transition_bits,
        r.output_bits
    );
    println!(
        "counters: {} ({} bits, {} register bits)",
        r.counters, r.counter_bits, r.register_bits
    );
    println!("triggers: {}", r.triggers);
    println!("gates: {}", r.gates);
    println!("wrote {}", out.display());
    Ok(0)
}

fn open_input(path: &Path) -> Result<Box<dyn Read + Send>, Failure> {
    if path == Path::new("-") {
        return Ok(Box::new(io::stdin()));
    }
    File::open(path)
        .map(|f| Box::new(f) as Box<dyn Read + Send>)
        .map_err(|e| fail(EXIT_USAGE, format!("cannot open {}: {e}", path.display())))
}

fn scan_one(
    machine: &CounterMachine,
    reader: impl Read,
    label: Option<&str>,
    quiet: bool,
    chunk_size: usize,
    out: &mut impl Write,
) -> Result<ScanSummary, Failure> {
    let mut write_err = None;
    let mut emit = |line: String, out: &mut dyn Write| {
        if !quiet && write_err.is_none() {
            if let Err(e) = out.write_all(line.as_bytes()) {
                write_err = Some(e);
            }
        }
    };
    let summary = scan_reader(machine, reader, chunk_size, |e| {
        emit(to_json_line(&EventRecord::new(&e, label)), out)
    })
    .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", label.unwrap_or("input"))))?;
    emit(to_json_line(&SummaryRecord::new(&summary, label)), out);
    match write_err {
        Some(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(summary),
        Some(e) => Err(fail(EXIT_USAGE, format!("cannot write output: {e}"))),
        None => Ok(summary),
    }
}

fn scan(
    machine: &Path,
    inputs: &[PathBuf],
    quiet: bool,
    fail_on_match: bool,
    jobs: usize,
    chunk_size: usize,
) -> Outcome {
    let machine = open_machine(machine)?;
    let stdin_only = [PathBuf::from("-")];
    let inputs = if inputs.is_empty() {
        &stdin_only[..]
    } else {
        inputs
    };
    let labels: Vec<Option<String>> = if inputs.len() > 1 {
        inputs
            .iter()
            .map(|p| Some(p.display().to_string()))
            .collect()
    } else {
        vec![None]
    };
    let stdout = io::stdout();
    let mut matched = false;

    if jobs <= 1 || inputs.len() == 1 {
        let mut out = BufWriter::new(stdout.lock());
        for (path, label) in inputs.iter().zip(&labels) {
            let summary = scan_one(
                &machine,
                open_input(path)?,
                label.as_deref(),
                quiet,
                chunk_size,
                &mut out,
            )?;
            matched |= summary.output.any();
        }
        out.flush().ok();
    } else {
        // Each input is buffered and printed in input order.
        let next = AtomicUsize::new(0);
        let results: Vec<Mutex<Option<Result<(ScanSummary, Vec<u8>), Failure>>>> =
            inputs.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|s| {
            for _ in 0..jobs.min(inputs.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= inputs.len() {
                        break;
                    }
                    let mut buf = Vec::new();
                    let r = open_input(&inputs[i])
                        .and_then(|reader| {
                            scan_one(
                                &machine,
                                reader,
                                labels[i].as_deref(),
                                quiet,
                                chunk_size,
                                &mut buf,
                            )
                        })
                        .map(|summary| (summary, buf));
                    *results[i].lock().unwrap() = Some(r);
                });
            }
        });
        let mut out = stdout.lock();
        for r in results {
            let (summary, buf) = r.into_inner().unwrap().expect("every input scanned")?;
            out.write_all(&buf).ok();
            matched |= summary.output.any();
        }
    }
    Ok(if fail_on_match && matched {
        EXIT_MATCH
    } else {
        0
    })
}

fn print_findings(title: &str, count: u64, findings: &[Finding]) {
    println!("{title}: {count}");
    for f in findings.iter().take(10) {
        println!(
            "  rule {} word \"{}\": machine {} oracle {} ({:?})",
            f.rule,
            show_word(&f.word),
            u8::from(f.machine),
            u8::from(f.oracle),
            f.kind
        );
    }
}

fn verify(
    rules: &Path,
    alphabet: &[u8],
    max_len: usize,
    random: usize,
    seed: u64,
    build: &BuildArgs,
) -> Outcome {
    if alphabet.is_empty() {
        return Err(fail(EXIT_USAGE, "empty alphabet"));
    }
    let ruleset = load_rules(rules, build.mode)?;
    let config = VerifyConfig {
        alphabet: alphabet.to_vec(),
        max_len,
        random,
        seed,
        window: build.window.into(),
        state_cap: build.state_cap,
        ..VerifyConfig::default()
    };
    let report = run_verify(&ruleset, &config).map_err(|e| match e {
        VerifyError::Machine(e) => machine_failure(e),
        e => fail(EXIT_USAGE, e.to_string()),
    })?;
    println!(
        "words checked: {} ({} exhaustive, {} random)",
        report.words_checked(),
        report.exhaustive_words,
        report.random_words
    );
    println!(
        "classical pipeline: {}",
        if report.classical_checked {
            "checked"
        } else {
            "skipped for rules over the state cap"
        }
    );
    print_findings(
        "disagreements",
        report.disagreement_count,
        &report.disagreements,
    );
    print_findings(
        "paper-mode divergences (missed matches, never over-acceptance)",
        report.divergence_count,
        &report.divergences,
    );
    Ok(if report.passed() { 0 } else { EXIT_MATCH })
}

fn bench(
    machine: Option<&Path>,
    rules: Option<&Path>,
    input: Option<&Path>,
    curve: Option<usize>,
    build: &BuildArgs,
) -> Outcome {
    if input.is_none() && curve.is_none() {
        return Err(fail(EXIT_USAGE, "bench needs --input or --curve"));
    }
    if let Some(path) = input {
        let machine = match (machine, rules) {
            (Some(m), _) => open_machine(m)?,
            (None, Some(r)) => build_machine(r, build)?,
            (None, None) => return Err(fail(EXIT_USAGE, "bench needs --machine or --rules")),
        };
        let data = read_file(path)?;
        let report = measure_throughput(&machine, &data);
        println!("bytes: {}", report.bytes);
        println!("seconds: {:.6}", report.elapsed.as_secs_f64());
        println!("throughput: {:.1} MB/s", report.bytes_per_second() / 1e6);
        println!(
            "scan state: {} bytes before, {} bytes after",
            report.footprint_before, report.footprint_after
        );
        println!("matched: {}", report.matched);
    }
    if let Some(n) = curve {
        let curve = pair_curve(n, 2, build.state_cap).map_err(machine_failure)?;
        print!("{}", curve.to_csv());
    }
    Ok(0)
}

fn graph(machine: &Path, out: &Path) -> Outcome {
    let machine = open_machine(machine)?;
    fs::write(out, export_dot(&machine))
        .map_err(|e| fail(EXIT_USAGE, format!("cannot write {}: {e}", out.display())))?;
    Ok(0)
}
