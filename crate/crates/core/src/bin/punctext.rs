use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use punctext::corpus::{tokenize, Dictionary};
use punctext::ice::{word_character_trace, FilterBank, Ice, KeepRatio, ScoreParams, Scorer, Selection};
use punctext::recover::{indicate, DictionaryRecoverer, LlmConfig, LlmFlavor, LlmRecoverer, Recoverer};
use punctext::runner::{sweep, RunConfig};
use punctext::spellkit::{Pattern, SpellIndex};

#[derive(Parser)]
#[command(name = "punctext", version, about = "Character-punctured text transmission simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep from a config file; exits 1 if any trial failed.
    Run(RunArgs),
    /// Print the importance score of every character of a word or text.
    Score(ScoreArgs),
    /// Puncture a text with the proposed (or a random) filter per window.
    Puncture(PunctureArgs),
    /// Re-insert '*' markers into a received payload.
    Indicate(IndicateArgs),
    /// Fill in the '*' markers of an indicated text.
    Recover(RecoverArgs),
    /// Candidate-lookup throughput of the spell index.
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` config file; omitted keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set snr_db=0,10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DictArgs {
    /// Word list (`word` or `word count` per line); the bundled one by default.
    #[arg(long)]
    dictionary: Option<PathBuf>,
}

impl DictArgs {
    fn dictionary(&self) -> Result<Dictionary> {
        Ok(match &self.dictionary {
            Some(p) => Dictionary::from_path(p).with_context(|| format!("loading {}", p.display()))?,
            None => Dictionary::bundled(),
        })
    }

    fn index(&self) -> Result<Arc<SpellIndex>> {
        Ok(Arc::new(SpellIndex::new(&self.dictionary()?)))
    }
}

#[derive(Args)]
struct ScoreParamArgs {
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 2.0)]
    delta: f64,
}

impl ScoreParamArgs {
    fn params(&self) -> Result<ScoreParams> {
        let p = ScoreParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            delta: self.delta,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct BankArgs {
    #[arg(long, default_value_t = 0.9)]
    keep: f64,
    #[arg(long, default_value_t = 64)]
    filters: usize,
    #[arg(long, default_value_t = 40)]
    window: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl BankArgs {
    fn bank(&self) -> Result<FilterBank> {
        Ok(FilterBank::generate(self.seed, self.filters, self.window, KeepRatio::new(self.keep)?)?)
    }
}

#[derive(Args)]
struct ScoreArgs {
    text: String,
    #[command(flatten)]
    dict: DictArgs,
    #[command(flatten)]
    params: ScoreParamArgs,
}

#[derive(Args)]
struct PunctureArgs {
    text: String,
    /// Choose filters uniformly with this seed instead of by score.
    #[arg(long)]
    random: Option<u64>,
    #[command(flatten)]
    bank: BankArgs,
    #[command(flatten)]
    dict: DictArgs,
    #[command(flatten)]
    params: ScoreParamArgs,
}

#[derive(Args)]
struct IndicateArgs {
    payload: String,
    /// Filter index per window, comma separated.
    #[arg(long, value_delimiter = ',')]
    indices: Vec<u32>,
    /// The last window was sent unpunctured.
    #[arg(long)]
    tail: bool,
    #[command(flatten)]
    bank: BankArgs,
}

#[derive(Args)]
struct RecoverArgs {
    indicated: String,
    /// `deterministic` or `llm`.
    #[arg(long, default_value = "deterministic")]
    backend: String,
    #[arg(long, env = "PUNCTEXT_LLM_URL", default_value = "http://127.0.0.1:8000")]
    llm_url: String,
    #[arg(long, default_value = "gpt-3.5-turbo")]
    llm_model: String,
    /// `chat` or `sidecar`.
    #[arg(long, default_value = "chat")]
    llm_flavor: String,
    #[command(flatten)]
    dict: DictArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 10_000)]
    patterns: usize,
    #[arg(long, default_value_t = 2)]
    distance: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    dict: DictArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(a) => run(a),
        Command::Score(a) => score(a).map(|_| ExitCode::SUCCESS),
        Command::Puncture(a) => puncture(a).map(|_| ExitCode::SUCCESS),
        Command::Indicate(a) => indicate_cmd(a).map(|_| ExitCode::SUCCESS),
        Command::Recover(a) => recover(a).map(|_| ExitCode::SUCCESS),
        Command::Bench(a) => bench(a).map(|_| ExitCode::SUCCESS),
    }
}

fn run(a: RunArgs) -> Result<ExitCode> {
    let cfg = match &a.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    let mut overrides = Vec::new();
    if let Some(v) = a.seed {
        overrides.push(format!("seed={v}"));
    }
    if let Some(v) = a.trials {
        overrides.push(format!("trials={v}"));
    }
    if let Some(v) = &a.output {
        overrides.push(format!("output={}", v.display()));
    }
    if let Some(v) = &a.backend {
        overrides.push(format!("backend={v}"));
    }
    if let Some(v) = a.threads {
        overrides.push(format!("threads={v}"));
    }
    overrides.extend(a.overrides);
    let cfg = cfg.with_overrides(overrides.iter().map(String::as_str))?;
    let started = Instant::now();
    let s = sweep(&cfg)?;
    println!(
        "{} records ({} frames lost, {} failed) in {:.1}s",
        s.records,
        s.frame_lost,
        s.failed,
        started.elapsed().as_secs_f64()
    );
    println!("results:   {}", s.results.display());
    println!("aggregate: {}", s.aggregate.display());
    Ok(if s.failed > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn score(a: ScoreArgs) -> Result<()> {
    let index = a.dict.index()?;
    let params = a.params.params()?;
    let is_word = !a.text.is_empty() && a.text.bytes().all(|b| b.is_ascii_alphabetic());
    if is_word {
        let t = word_character_trace(&a.text.to_ascii_lowercase(), &index, &params);
        println!("pos char  K1  K2    score");
        for (i, c) in a.text.chars().enumerate() {
            let k2 = t.second_counts.get(i).copied().flatten();
            println!(
                "{i:>3} {c:>4} {:>3} {:>3} {:>8.4}",
                t.first_counts.get(i).copied().unwrap_or(0),
                k2.map_or("-".to_string(), |k| k.to_string()),
                t.scores[i]
            );
        }
        if let (Some(f), Some(s)) = (t.first, t.second) {
            println!("first pick: {f}, second pick: {s}");
        }
        return Ok(());
    }
    let text = tokenize(&a.text)?;
    let scorer = Scorer::new(index, params);
    let scores = scorer.score_window(&text, 0..text.len());
    for (i, s) in scores.scores.iter().enumerate() {
        println!("{i:>3} {:?} {s:>8.4}", text.char_at(i));
    }
    Ok(())
}

fn puncture(a: PunctureArgs) -> Result<()> {
    let index = a.dict.index()?;
    let scorer = Arc::new(Scorer::new(index, a.params.params()?));
    let ice = Ice::new(scorer, Arc::new(a.bank.bank()?));
    let text = tokenize(&a.text)?;
    let selection = a.random.map_or(Selection::Proposed, Selection::Random);
    let p = ice.puncture_text(&text, selection);
    let indices: Vec<String> = p.filter_indices().iter().map(ToString::to_string).collect();
    println!("indices: {}", indices.join(","));
    println!("tail:    {}", p.tail_unpunctured);
    println!("payload: {}", p.payload());
    Ok(())
}

fn indicate_cmd(a: IndicateArgs) -> Result<()> {
    let m = indicate(&a.payload, &a.indices, &a.bank.bank()?, a.tail)?;
    println!("{}", m.as_str());
    Ok(())
}

fn recover(a: RecoverArgs) -> Result<()> {
    let m = punctext::IndicatedText::from_marked(&a.indicated);
    let dictionary = DictionaryRecoverer::new(a.dict.index()?);
    let out = match a.backend.as_str() {
        "deterministic" => dictionary.recover(&m),
        "llm" => {
            let flavor = match a.llm_flavor.as_str() {
                "chat" => LlmFlavor::Chat,
                "sidecar" => LlmFlavor::Sidecar,
                f => bail!("unknown flavor {f:?}"),
            };
            let cfg = LlmConfig {
                base_url: a.llm_url,
                model: a.llm_model,
                flavor,
                ..LlmConfig::default()
            };
            LlmRecoverer::new(cfg, dictionary).recover(&m)
        }
        b => bail!("unknown backend {b:?}"),
    };
    println!("{}", out.text);
    if out.fallback {
        eprintln!("note: endpoint unusable, dictionary fallback used");
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let dict = a.dict.dictionary()?;
    let index = SpellIndex::new(&dict);
    let words = dict.words();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let patterns: Vec<Pattern> = (0..a.patterns)
        .map(|_| {
            let w = &words[rng.random_range(0..words.len())];
            let mut b = w.as_bytes().to_vec();
            for _ in 0..rng.random_range(1..=a.distance.max(1)) {
                let i = rng.random_range(0..b.len());
                b[i] = b'*';
            }
            Pattern::new(std::str::from_utf8(&b).expect("ascii")).expect("letters and stars")
        })
        .collect();
    let started = Instant::now();
    let mut total = 0usize;
    for p in &patterns {
        total += index.candidates(p, a.distance).len();
    }
    let elapsed = started.elapsed().max(Duration::from_nanos(1));
    println!(
        "{} lookups at d={} in {:.3}s: {:.0} lookups/s, {:.2} candidates on average",
        patterns.len(),
        a.distance,
        elapsed.as_secs_f64(),
        patterns.len() as f64 / elapsed.as_secs_f64(),
        total as f64 / patterns.len().max(1) as f64
    );
    Ok(())
}
