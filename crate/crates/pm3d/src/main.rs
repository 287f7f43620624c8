use std::io::{Read, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use pm3d_core::bench::{default_ladder, run_benchmark, DEFAULT_ARGS, DEFAULT_RUNS};
use pm3d_core::generator::{generate, GenSpec};
use pm3d_core::mapping::{validate_config, MappingConfig};
use pm3d_core::model::ProcessModel;
use pm3d_core::parser::{parse_named, serialize, ParseError};
use pm3d_core::pipeline::render;
use pm3d_core::scene::{to_json, BackdropKind, SceneOptions};
use pm3d_service::{ServiceConfig, DEFAULT_BODY_LIMIT, DEFAULT_CAPACITY};

/// Process models as 3D scenes.
///
/// Set PM3D_LOG (error, warn, info, debug, trace) for diagnostics on stderr.
#[derive(Parser)]
#[command(name = "pm3d", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read and validate a pm3d-1 XML file and print a summary.
    Parse {
        /// Input file, `-` for stdin.
        input: String,
        /// Only validate; print nothing on success.
        #[arg(long)]
        check: bool,
        /// Also write the model back out as canonical XML (`-` for stdout).
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Write a random process model as pm3d-1 XML.
    Generate {
        #[arg(long)]
        nodes: usize,
        /// Control-flow blocks (parallel, xor, loop).
        #[arg(long, default_value_t = 0)]
        cf: usize,
        /// Attributes attr0..attrN per task.
        #[arg(long, default_value_t = 0)]
        args: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Map, lay out and export a model as a scene3dviz-1 file.
    Scene {
        /// Model file, `-` for stdin.
        input: String,
        /// Mapping config file.
        config: String,
        #[arg(short, long, default_value = "-")]
        output: String,
        /// none, grid or room.
        #[arg(long, default_value = "none")]
        backdrop: BackdropKind,
    },
    /// Time the pipeline over generated models of growing size.
    Bench {
        /// `default` or a list like `2:1,4:2,8:4` of nodes:blocks.
        #[arg(long, default_value = "default")]
        ladder: String,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = DEFAULT_ARGS)]
        args: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Built viewer assets, served under /ui.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        /// Models kept in memory before the least recently used is dropped.
        #[arg(long, default_value_t = DEFAULT_CAPACITY)]
        capacity: usize,
        /// Largest accepted request body in bytes.
        #[arg(long, default_value_t = DEFAULT_BODY_LIMIT)]
        body_limit: usize,
        /// Backdrop for scene requests that do not name one.
        #[arg(long, default_value = "room")]
        backdrop: BackdropKind,
    },
}

/// Exit 1 for bad input, 2 for I/O trouble.
enum Failure {
    Invalid(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure::Invalid(anyhow!(msg.into()))
    }
}

type Outcome = Result<(), Failure>;

fn read_input(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading stdin")
            .map_err(Failure::Io)?;
    } else {
        text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {path}"))
            .map_err(Failure::Io)?;
    }
    Ok(text)
}

fn write_output(path: &str, text: &str) -> Outcome {
    let result = if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes()).and_then(|_| out.flush())
    } else {
        std::fs::write(path, text)
    };
    result
        .with_context(|| format!("cannot write {path}"))
        .map_err(Failure::Io)
}

fn display_name(path: &str) -> &str {
    if path == "-" {
        "<stdin>"
    } else {
        path
    }
}

fn parse_error(file: &str, e: &ParseError) -> Failure {
    let text = e.to_string();
    match e.line() {
        Some(line) => {
            let prefix = format!("line {line}: ");
            let msg = text.strip_prefix(&prefix).unwrap_or(&text);
            Failure::invalid(format!("{file}:{line}: {msg}"))
        }
        None => Failure::invalid(format!("{file}: {text}")),
    }
}

fn load_model(path: &str) -> Result<ProcessModel, Failure> {
    let text = read_input(path)?;
    let name = display_name(path);
    parse_named(&text, name)
        .map(|(m, _)| m)
        .map_err(|e| parse_error(name, &e))
}

fn load_config(path: &str, model: &ProcessModel) -> Result<MappingConfig, Failure> {
    let text = read_input(path)?;
    let name = display_name(path);
    let config = MappingConfig::parse(&text)
        .map_err(|e| Failure::invalid(format!("{name}:{}: {}", e.line, e.message)))?;
    let violations = validate_config(model, &config);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| format!("{name}: {v}")).collect();
        return Err(Failure::invalid(lines.join("\n")));
    }
    Ok(config)
}

fn parse_ladder(text: &str) -> Result<Vec<(usize, usize)>, Failure> {
    if text == "default" {
        return Ok(default_ladder());
    }
    text.split(',')
        .map(|pair| {
            let (n, c) = pair.split_once(':').ok_or_else(|| {
                Failure::invalid(format!("ladder entry `{pair}` is not nodes:blocks"))
            })?;
            let num = |s: &str| {
                s.trim().parse::<usize>().map_err(|_| {
                    Failure::invalid(format!("ladder entry `{pair}` is not nodes:blocks"))
                })
            };
            Ok((num(n)?, num(c)?))
        })
        .collect()
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Parse {
            input,
            check,
            output,
        } => {
            let model = load_model(&input)?;
            if !check {
                println!(
                    "{}: {} nodes, {} tasks",
                    model.name(),
                    model.nodes().len(),
                    model.task_count()
                );
                for (name, info) in model.attribute_index() {
                    println!(
                        "  {name}: {:?}, {} carriers",
                        info.kind,
                        info.carriers.len()
                    );
                }
            }
            if let Some(out) = output {
                let xml = serialize(&model).map_err(|e| Failure::invalid(e.to_string()))?;
                write_output(&out, &xml)?;
            }
            Ok(())
        }
        Command::Generate {
            nodes,
            cf,
            args,
            seed,
            output,
        } => {
            let model = generate(&GenSpec::new(nodes, cf, args, seed))
                .map_err(|e| Failure::invalid(e.to_string()))?;
            let xml = serialize(&model).map_err(|e| Failure::invalid(e.to_string()))?;
            write_output(&output, &xml)
        }
        Command::Scene {
            input,
            config,
            output,
            backdrop,
        } => {
            let model = load_model(&input)?;
            let mapping = load_config(&config, &model)?;
            let scene = render(&model, &mapping, &SceneOptions { backdrop })
                .map_err(|e| Failure::invalid(e.to_string()))?;
            write_output(&output, &to_json(&scene))?;
            eprintln!(
                "{}: {} nodes, {} connectors, {} lanes, legend {}",
                display_name(&output),
                scene.node_elements().count(),
                scene.elements.len() - scene.node_elements().count(),
                scene.lanes.len(),
                if scene.legend.is_some() { "on" } else { "off" }
            );
            Ok(())
        }
        Command::Bench {
            ladder,
            runs,
            args,
            seed,
            output,
        } => {
            let sizes = parse_ladder(&ladder)?;
            let report = run_benchmark(&sizes, runs, args, seed)
                .map_err(|e| Failure::invalid(e.to_string()))?;
            write_output(&output, &report.to_text())
        }
        Command::Serve {
            addr,
            ui_dir,
            capacity,
            body_limit,
            backdrop,
        } => {
            let config = ServiceConfig {
                capacity,
                body_limit,
                ui_dir,
                default_backdrop: backdrop,
            };
            let runtime = tokio::runtime::Runtime::new()
                .context("starting runtime")
                .map_err(Failure::Io)?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .with_context(|| format!("cannot bind {addr}"))
                    .map_err(Failure::Io)?;
                let local = listener
                    .local_addr()
                    .context("reading bound address")
                    .map_err(Failure::Io)?;
                eprintln!("pm3d listening on http://{local}");
                pm3d_service::serve_on(listener, config)
                    .await
                    .context("serving")
                    .map_err(Failure::Io)
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PM3D_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
