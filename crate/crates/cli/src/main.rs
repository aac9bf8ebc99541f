//! `bbc`: key generation, enrollment, scenario simulation and chain queries.
//!
//! Exit codes: 0 ok, 1 domain failure (tampered chain, rejected query),
//! 2 usage, 3 IO or malformed file.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bbc_core::biometric::{derive_key, synthetic, ActorRegistry, BiometricTemplate, Role, ScramblingKey};
use bbc_core::chainfile;
use bbc_core::constants::DEFAULT_THRESHOLD;
use bbc_core::ledger::{validate_chain, validate_chain_with_head, Chain, Stage};
use bbc_core::provenance::{self, ItemIndex, ProvenanceError};
use bbc_core::scenario::{self, ScenarioError};
use bbc_core::Hash32;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bbc", version, about = "Biometric-attested supply-chain ledger")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive a scrambling key from a seed and write it as JSON.
    Keygen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        key_id: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic capture: a fresh template, or a noisy recapture of --base.
    Capture {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, default_value_t = synthetic::GENUINE_NOISE)]
        noise: i16,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enroll an actor into a registry file, creating it if missing.
    Enroll {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        actor_id: u32,
        #[arg(long, value_parser = parse_role)]
        role: Role,
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        key: PathBuf,
    },
    /// Run a scenario to quiescence and write the committed chain.
    RunSim {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a chain file against a registry.
    Verify {
        #[command(flatten)]
        chain: ChainArgs,
        /// Committed head hash (hex) to anchor the tip block.
        #[arg(long)]
        head: Option<String>,
    },
    /// Custody trace of one item.
    Trace {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        item: String,
    },
    /// Compare ingredients added along an item's path with its retail label.
    Audit {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        item: String,
    },
    /// Actor who attested one stage of an item.
    Responsible {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        item: String,
        #[arg(long, value_parser = parse_stage)]
        stage: Stage,
    },
    /// Flip one byte of a block in a chain file.
    Tamper {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        block: usize,
        /// Byte offset from the start of the block's encoding.
        #[arg(long)]
        offset: usize,
        #[arg(long, default_value_t = 0x01)]
        xor: u8,
        /// Write here instead of rewriting the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a chain file as JSON.
    Export {
        #[arg(long)]
        chain: PathBuf,
    },
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    chain: PathBuf,
    #[arg(long)]
    registry: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u64,
}

fn parse_role(s: &str) -> Result<Role, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_uppercase())).map_err(|_| format!("unknown role {s}"))
}

fn parse_stage(s: &str) -> Result<Stage, String> {
    s.to_ascii_uppercase().parse().map_err(|_| format!("unknown stage {s}"))
}

enum Failure {
    /// Domain outcome reported on stdout as JSON.
    Domain(serde_json::Value),
    /// Domain failure whose output has already been written.
    Reported,
    Io(String),
}

type CmdResult = Result<(), Failure>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(value).expect("serializable output") + "\n";
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    scenario::read_json(path).map_err(|e| Failure::Io(e.to_string()))
}

fn load_chain(path: &Path) -> Result<Chain, Failure> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    chainfile::decode_chain(&bytes).map_err(|e| io_err(path, e))
}

fn load_indexed(args: &ChainArgs) -> Result<(Chain, ItemIndex), Failure> {
    let chain = load_chain(&args.chain)?;
    let registry: ActorRegistry = read_json(&args.registry)?;
    let idx = provenance::build_index(&chain, &registry, args.threshold).map_err(provenance_failure)?;
    Ok((chain, idx))
}

fn provenance_failure(e: ProvenanceError) -> Failure {
    match e {
        ProvenanceError::InvalidChain(fault) => Failure::Domain(serde_json::json!({
            "error": "INVALID_CHAIN",
            "fault": fault,
        })),
        other => Failure::Domain(serde_json::to_value(&other).expect("serializable error")),
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Keygen { seed, key_id, out } => write_json(&out, &derive_key(seed, key_id)),
        Command::Capture { seed, base, noise, out } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let template = match base {
                None => synthetic::template(&mut rng),
                Some(path) => synthetic::genuine_probe(&read_json::<BiometricTemplate>(&path)?, noise, &mut rng),
            };
            write_json(&out, &template)
        }
        Command::Enroll { registry, actor_id, role, template, key } => {
            let mut reg = if registry.exists() { read_json(&registry)? } else { ActorRegistry::new() };
            let t: BiometricTemplate = read_json(&template)?;
            let k: ScramblingKey = read_json(&key)?;
            if let Err(e) = reg.enroll(actor_id, role, &t, &k) {
                return Err(Failure::Domain(serde_json::json!({"error": e.to_string()})));
            }
            write_json(&registry, &reg)
        }
        Command::RunSim { scenario, out } => {
            let outcome = scenario::run_scenario(&scenario).map_err(|e| match e {
                ScenarioError::Sim(e) => Failure::Domain(serde_json::json!({"error": e.to_string()})),
                other => Failure::Io(other.to_string()),
            })?;
            fs::write(&out, chainfile::encode_chain(&outcome.chain)).map_err(|e| io_err(&out, e))?;
            print_json(&outcome.summary);
            match outcome.error {
                None => Ok(()),
                Some(e) => {
                    eprintln!("error: BUDGET_EXCEEDED: {e}");
                    Err(Failure::Reported)
                }
            }
        }
        Command::Verify { chain: args, head } => {
            let chain = load_chain(&args.chain)?;
            let registry: ActorRegistry = read_json(&args.registry)?;
            let result = match head {
                None => validate_chain(&chain, &registry, args.threshold),
                Some(hex) => {
                    let head = Hash32::from_hex(&hex)
                        .map_err(|_| Failure::Io(format!("--head is not a 32-byte hex hash: {hex}")))?;
                    validate_chain_with_head(&chain, &registry, args.threshold, &head)
                }
            };
            match result {
                Ok(()) => {
                    print_json(&serde_json::json!({
                        "status": "OK",
                        "height": chain.height(),
                        "head": chain.tip().hash(),
                    }));
                    Ok(())
                }
                Err(fault) => Err(Failure::Domain(serde_json::to_value(&fault).expect("serializable fault"))),
            }
        }
        Command::Trace { chain: args, item } => {
            let (chain, idx) = load_indexed(&args)?;
            print_json(&provenance::trace_item(&idx, &chain, &item));
            Ok(())
        }
        Command::Audit { chain: args, item } => {
            let (chain, idx) = load_indexed(&args)?;
            if idx.locations(&item).is_empty() {
                print_json(&Vec::<provenance::LabelViolation>::new());
                return Ok(());
            }
            print_json(&provenance::audit_labels(&idx, &chain, &item).map_err(provenance_failure)?);
            Ok(())
        }
        Command::Responsible { chain: args, item, stage } => {
            let (chain, idx) = load_indexed(&args)?;
            let actor_id = provenance::responsible_actor(&idx, &chain, &item, stage).map_err(provenance_failure)?;
            print_json(&serde_json::json!({"item_id": item, "stage": stage, "actor_id": actor_id}));
            Ok(())
        }
        Command::Tamper { chain, block, offset, xor, out } => {
            let mut bytes = fs::read(&chain).map_err(|e| io_err(&chain, e))?;
            let spans = chainfile::block_spans(&bytes).map_err(|e| io_err(&chain, e))?;
            let span = spans
                .get(block)
                .ok_or_else(|| Failure::Domain(serde_json::json!({"error": format!("no block {block}")})))?;
            if offset >= span.len() {
                return Err(Failure::Domain(serde_json::json!({
                    "error": format!("block {block} is {} bytes, offset {offset} is outside it", span.len())
                })));
            }
            bytes[span.start + offset] ^= xor;
            let target = out.unwrap_or(chain);
            fs::write(&target, bytes).map_err(|e| io_err(&target, e))
        }
        Command::Export { chain } => {
            println!("{}", chainfile::to_json(&load_chain(&chain)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(report)) => {
            print_json(&report);
            ExitCode::from(1)
        }
        Err(Failure::Reported) => ExitCode::from(1),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
