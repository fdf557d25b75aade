use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use jvmfuzz::campaign::{self, CampaignConfig, ConfigError};
use jvmfuzz::generator::{generate_ir_program, GenConfig};
use jvmfuzz::harness::{self, RunDirs, TestVerdict};
use jvmfuzz::ir::{validate, IrProgram};
use jvmfuzz::minimizer::{self, HarnessOracle};
use jvmfuzz::mutators::{self, MutatorConfig, MutatorKind};
use jvmfuzz::render;
use jvmfuzz::rng::Rng;

const EXIT_FINDINGS: u8 = 10;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "jvmfuzz", version, about = "Cross-language JVM compiler fuzzer")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Normal,
    Differential,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate one program and print its IR as JSON.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Campaign config whose `gen` table is used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also render the sources into this directory.
        #[arg(long)]
        render: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Apply one mutation to a program.
    Mutate {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mutator to apply; drawn from the enabled set when absent.
        #[arg(long)]
        mutator: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Render a program to sources.
    Render {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Compile a program with the configured toolchains.
    Test {
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Normal)]
        mode: Mode,
        /// Index into `differential_pairs`.
        #[arg(long, default_value_t = 0)]
        pair: usize,
    },
    /// Reduce a trigger program while it keeps its verdict.
    Minimize {
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Normal)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        pair: usize,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Run a full campaign.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_programs: Option<usize>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        minimize: bool,
    },
    /// Summarize the findings of a campaign directory.
    Report { dir: PathBuf },
    /// Scripted compiler used in hermetic tests.
    #[command(hide = true)]
    MockCompiler {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        args: Vec<String>,
    },
}

fn read_program(path: &Path) -> Result<IrProgram> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(IrProgram::from_json(&text)?)
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<CampaignConfig> {
    Ok(CampaignConfig::load(path)?)
}

fn plans_for(cfg: &CampaignConfig, mode: Mode, pair: usize) -> Result<Vec<harness::ToolchainPlan>> {
    Ok(match mode {
        Mode::Normal => vec![cfg.latest_plan()],
        Mode::Differential => {
            let Some(p) = cfg.differential_pairs.get(pair) else {
                return Err(ConfigError::Invalid(format!("no differential pair #{pair}")).into());
            };
            let (a, b) = cfg.pair_plans(p)?;
            vec![a, b]
        }
    })
}

fn flagged_exit(v: &TestVerdict) -> u8 {
    if v.result.is_flagged() {
        EXIT_FINDINGS
    } else {
        0
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Cmd::Generate { seed, config, render: render_dir, output } => {
            let gen = match config {
                Some(p) => load_config(&p)?.gen,
                None => GenConfig::default(),
            };
            let program = generate_ir_program(&gen.with_seed(seed))?;
            if let Some(dir) = render_dir {
                render::render(&program)?.write_to(&dir)?;
            }
            emit(&program.to_canonical_json(), output.as_deref())?;
        }
        Cmd::Mutate { input, seed, mutator, output } => {
            let program = read_program(&input)?;
            let mut cfg = MutatorConfig { languages: program.languages(), ..MutatorConfig::default() };
            cfg.languages.extend(MutatorConfig::default().languages);
            let mut rng = Rng::from_seed(seed);
            let (mutant, _) = match mutator {
                Some(name) => {
                    let kind: MutatorKind = name.parse().map_err(anyhow::Error::msg)?;
                    mutators::mutate(&program, kind, &mut rng, &cfg)?
                }
                None => mutators::mutate_random(&program, &mut rng, &cfg)?,
            };
            emit(&mutant.to_canonical_json(), output.as_deref())?;
        }
        Cmd::Render { input, output } => {
            let program = read_program(&input)?;
            render::render(&program)?.write_to(&output)?;
        }
        Cmd::Test { input, config, mode, pair } => {
            let cfg = load_config(&config)?;
            let program = read_program(&input)?;
            if matches!(mode, Mode::Normal) && !validate(&program).is_valid() {
                bail!("normal testing needs a valid program; use --mode differential for mutants");
            }
            let bundle = render::render(&program)?;
            let plans = plans_for(&cfg, mode, pair)?;
            let dirs = RunDirs::new(&cfg.output_dir.join("runs"), &cfg.run_id);
            let verdict = match mode {
                Mode::Normal => harness::normal_test(&bundle, &plans[0], &dirs, &program.id())?,
                Mode::Differential => harness::differential_test(&bundle, (&plans[0], &plans[1]), &dirs, &program.id())?,
            };
            println!("{}", serde_json::to_string_pretty(&verdict)?);
            return Ok(flagged_exit(&verdict));
        }
        Cmd::Minimize { input, config, mode, pair, output } => {
            let cfg = load_config(&config)?;
            let program = read_program(&input)?;
            let plans = plans_for(&cfg, mode, pair)?;
            let test_mode = match mode {
                Mode::Normal => harness::TestMode::Normal,
                Mode::Differential => harness::TestMode::Differential,
            };
            let mut oracle = HarnessOracle::new(test_mode, plans, cfg.output_dir.join("runs"), "minimize");
            let result = minimizer::minimize(&program, &mut oracle, &cfg.minimizer)?;
            render::render(&result.minimized)?.write_to(&output)?;
            std::fs::write(output.join("program.json"), result.minimized.to_canonical_json())?;
            std::fs::write(output.join("trail.json"), serde_json::to_string_pretty(&result.trail)? + "\n")?;
            eprintln!(
                "minimized {} -> {} declarations, {} -> {} methods",
                program.declarations.len(),
                result.minimized.declarations.len(),
                program.method_count(),
                result.minimized.method_count()
            );
        }
        Cmd::Campaign { config, seed, max_programs, output_dir, workers, minimize } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.campaign_seed = s;
            }
            if let Some(n) = max_programs {
                cfg.max_programs = n;
            }
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            cfg.minimize |= minimize;
            let summary = campaign::run_campaign(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            return Ok(if summary.has_findings() { EXIT_FINDINGS } else { 0 });
        }
        Cmd::Report { dir } => {
            let report = campaign::write_report(&dir)?;
            print!("{}", campaign::render_markdown(&report));
        }
        Cmd::MockCompiler { args } => {
            let code = harness::mock::main_with_args(&args);
            return Ok(u8::try_from(code).unwrap_or(1));
        }
    }
    Ok(0)
}

fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<ConfigError>().is_some()
            || matches!(c.downcast_ref::<campaign::CampaignError>(), Some(campaign::CampaignError::Config(_)))
            || c.downcast_ref::<jvmfuzz::generator::GenError>().is_some()
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("jvmfuzz: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
