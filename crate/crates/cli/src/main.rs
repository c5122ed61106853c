mod args;
mod failure;
mod manifest;
mod settings;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Parser;
use patternforge::evaluation::MetricAccumulator;
use patternforge::experiments::{bench_scaling, builtin_case, case_table, write_sweep_outputs, SweepMode, SweepSpec};
use patternforge::generators::params_for;
use patternforge::pattern::text::{read_patterns, write_patterns, GridHeader};
use patternforge::romtools::{decode_rom, encode_rom, read_images, simulate_driver, write_archive};
use patternforge::units::{parse_frequency, parse_time};
use patternforge::{generate_bag, validate_pattern, DerivedParams};
use serde::Serialize;

use args::{Cli, Command, RomCommand};
use failure::{classify, CliError};
use manifest::{manifest_path, RunManifest};

const SEED_ENV: &str = "PATTERNFORGE_SEED";

/// What a command wrote, for the manifest.
#[derive(Default)]
struct Produced {
    /// `(out, is_dir)` when results went to the filesystem.
    out: Option<(PathBuf, bool)>,
    files: Vec<PathBuf>,
    config: Option<serde_json::Value>,
    seed: Option<u64>,
}

fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer")).into()),
        Err(_) => Ok(0),
    }
}

/// Runs `body` against the output file, or stdout when there is none.
fn with_output<F>(out: Option<&Path>, body: F) -> anyhow::Result<Vec<PathBuf>>
where
    F: FnOnce(&mut dyn Write) -> anyhow::Result<()>,
{
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
            Ok(vec![path.to_path_buf()])
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
            Ok(Vec::new())
        }
    }
}

fn write_json<T: Serialize + ?Sized>(w: &mut dyn Write, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

fn read_pattern_file(path: &Path) -> anyhow::Result<(GridHeader, Vec<patternforge::Pattern>)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_patterns(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn file_output(out: Option<PathBuf>) -> Option<(PathBuf, bool)> {
    out.map(|p| (p, false))
}

fn execute(command: Command) -> anyhow::Result<Produced> {
    match command {
        Command::Generate { cfg, generator, n, seed, out } => {
            let config = settings::resolve(&cfg)?;
            let seed = resolve_seed(seed)?;
            let bag = generate_bag(generator, &config, n, seed)?;
            let header = GridHeader { k_grid: bag.params.k_grid, t_grid: bag.params.t_grid };
            let files = with_output(out.as_deref(), |w| Ok(write_patterns(w, header, &bag.patterns)?))?;
            Ok(Produced { out: file_output(out), files, config: Some(settings::echo(&config)), seed: Some(seed) })
        }
        Command::Evaluate { input, cfg, out } => {
            let config = settings::resolve(&cfg)?;
            let d = DerivedParams::realize(&config)?;
            let (header, patterns) = read_pattern_file(&input)?;
            if header.k_grid != d.k_grid {
                return Err(patternforge::evaluation::EvalError::GridMismatch { expected: d.k_grid, found: header.k_grid })
                    .with_context(|| format!("{} does not match the configuration", input.display()));
            }
            let mut acc = MetricAccumulator::new(&d);
            for p in &patterns {
                acc.accumulate(p, &validate_pattern(p, &d))?;
            }
            let report = acc.finalize().with_context(|| format!("{} holds no patterns", input.display()))?;
            let files = with_output(out.as_deref(), |w| write_json(w, &report))?;
            Ok(Produced { out: file_output(out), files, config: Some(settings::echo(&config)), seed: None })
        }
        Command::Sweep { cfg, generators, desk_scale, sigma2_grid, zero_point, cap, eta_at, seed, out } => {
            let config = settings::resolve(&cfg)?;
            let seed = resolve_seed(seed)?;
            let mode = if desk_scale { SweepMode::Desk } else { SweepMode::Full };
            let mut spec = match cfg.case.as_deref().and_then(builtin_case) {
                Some(case) => SweepSpec::experiment2(&case, mode),
                None => SweepSpec::experiment1(mode),
            };
            spec.base = config;
            if !generators.is_empty() {
                spec.generators = generators;
            }
            if !sigma2_grid.is_empty() {
                spec.sigma2_grid = sigma2_grid;
            }
            spec.zero_point = zero_point;
            if let Some(cap) = cap {
                spec.cap = cap;
            }
            if let Some(eta_at) = eta_at {
                spec.eta_at = eta_at;
            }
            let report = patternforge::experiments::run_sweep(&spec, seed)?;
            let files = write_sweep_outputs(&report, &out)?;
            Ok(Produced { out: Some((out, true)), files, config: Some(settings::echo(&config)), seed: Some(seed) })
        }
        Command::Cases { json } => {
            let rows = case_table();
            with_output(None, |w| {
                if json {
                    return write_json(w, &rows);
                }
                let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x}"));
                let opt_k = |v: Option<u32>| v.map_or("-".to_string(), |x| x.to_string());
                writeln!(
                    w,
                    "{:<4} {:>8} {:>10} {:>9} {:>8} {:>8} {:>9} {:>7} {:>6} {:>6} {:>6}",
                    "case", "tau[ms]", "T_g[us]", "f[kHz]", "t_min", "t_max", "K_g", "K_req", "K_min", "K_max", "N_avg"
                )?;
                for r in &rows {
                    writeln!(
                        w,
                        "{:<4} {:>8} {:>10} {:>9} {:>8} {:>8} {:>9} {:>7} {:>6} {:>6} {:>6}",
                        r.case,
                        r.tau_ms,
                        r.t_grid_us,
                        r.f_req_khz,
                        opt(r.t_min_ms),
                        opt(r.t_max_ms),
                        r.k_grid,
                        r.k_req,
                        opt_k(r.k_min),
                        opt_k(r.k_max),
                        r.n_avg
                    )?;
                }
                Ok(())
            })?;
            Ok(Produced::default())
        }
        Command::Rom(rom) => execute_rom(rom),
        Command::Bench { cfg, generator, freqs, n, seed, out } => {
            let config = settings::resolve(&cfg)?;
            let seed = resolve_seed(seed)?;
            let freqs = freqs.iter().map(|f| parse_frequency(f)).collect::<Result<Vec<_>, _>>()?;
            // Each point needs a feasible configuration of its own.
            for &f in &freqs {
                let mut c = config;
                c.f_req = f;
                params_for(generator, &c)?;
            }
            let points = bench_scaling(generator, &config, &freqs, n, seed)?;
            // Timings vary run to run, so no manifest is kept.
            with_output(out.as_deref(), |w| write_json(w, &points))?;
            Ok(Produced::default())
        }
        Command::Replay { manifest } => replay(&manifest),
    }
}

fn execute_rom(rom: RomCommand) -> anyhow::Result<Produced> {
    match rom {
        RomCommand::Encode { input, out } => {
            let (_, patterns) = read_pattern_file(&input)?;
            let images = patterns.iter().map(encode_rom).collect::<Result<Vec<_>, _>>()?;
            let bytes = if images.len() == 1 { images[0].to_bytes() } else { write_archive(&images) };
            let files = with_output(Some(&out), |w| Ok(w.write_all(&bytes)?))?;
            Ok(Produced { out: Some((out, false)), files, ..Default::default() })
        }
        RomCommand::Decode { input, t_grid, out } => {
            let t_grid = parse_time(&t_grid)?;
            let bytes = std::fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let images = read_images(&bytes).with_context(|| format!("decoding {}", input.display()))?;
            let Some(first) = images.first() else {
                return Err(CliError::Malformed(format!("{} holds no images", input.display())).into());
            };
            let k_grid = first.k_grid();
            if images.iter().any(|i| i.k_grid() != k_grid) {
                return Err(CliError::Malformed(format!("{}: images on different grids", input.display())).into());
            }
            let patterns = images.iter().map(|i| decode_rom(i, t_grid)).collect::<Result<Vec<_>, _>>()?;
            let files = with_output(out.as_deref(), |w| Ok(write_patterns(w, GridHeader { k_grid, t_grid }, &patterns)?))?;
            Ok(Produced { out: file_output(out), files, ..Default::default() })
        }
        RomCommand::Simulate { input, clock_div, out } => {
            #[derive(Serialize)]
            struct Trace {
                k_grid: u32,
                clock_div: u32,
                events: Vec<u64>,
            }
            let bytes = std::fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let images = read_images(&bytes).with_context(|| format!("decoding {}", input.display()))?;
            let traces = images
                .iter()
                .map(|img| {
                    simulate_driver(img, clock_div).map(|t| Trace { k_grid: img.k_grid(), clock_div, events: t.events })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let files = with_output(out.as_deref(), |w| write_json(w, &traces))?;
            Ok(Produced { out: file_output(out), files, ..Default::default() })
        }
    }
}

fn replace_out(args: &mut [String], new_out: &Path) -> bool {
    let new = new_out.display().to_string();
    for i in 0..args.len() {
        if args[i] == "--out" && i + 1 < args.len() {
            args[i + 1] = new;
            return true;
        }
        if args[i].starts_with("--out=") {
            args[i] = format!("--out={new}");
            return true;
        }
    }
    false
}

fn replay(path: &Path) -> anyhow::Result<Produced> {
    let recorded = RunManifest::read(path)?;
    let mut args = recorded.command_line.clone();
    let scratch = tempfile::tempdir()?;
    let name = args
        .iter()
        .position(|a| a == "--out")
        .and_then(|i| args.get(i + 1))
        .map(|o| Path::new(o).file_name().unwrap_or_default().to_os_string())
        .or_else(|| args.iter().find_map(|a| a.strip_prefix("--out=")).map(|o| Path::new(o).file_name().unwrap_or_default().to_os_string()))
        .ok_or_else(|| CliError::Malformed(format!("{}: recorded command has no --out", path.display())))?;
    replace_out(&mut args, &scratch.path().join(name));
    if let Some(seed) = recorded.seed {
        if !args.iter().any(|a| a == "--seed" || a.starts_with("--seed=")) {
            args.push("--seed".into());
            args.push(seed.to_string());
        }
    }
    let cli = Cli::try_parse_from(&args).map_err(|e| CliError::Malformed(format!("recorded command line: {e}")))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(CliError::Malformed("a manifest cannot replay a replay".into()).into());
    }
    let cwd = std::env::current_dir()?;
    if recorded.working_dir.is_dir() {
        std::env::set_current_dir(&recorded.working_dir)?;
    }
    let rerun = run(cli.command, args.clone());
    std::env::set_current_dir(cwd)?;
    let rerun = rerun?.ok_or_else(|| CliError::Malformed("replayed command wrote no files".into()))?;

    let mismatched: Vec<&str> = recorded
        .outputs
        .iter()
        .filter(|o| !rerun.outputs.contains(o))
        .map(|o| o.file.as_str())
        .collect();
    if !mismatched.is_empty() || rerun.outputs.len() != recorded.outputs.len() {
        return Err(CliError::ReplayMismatch(format!("outputs differ from the manifest: {mismatched:?}")).into());
    }
    println!("replay ok: {} output(s) match", recorded.outputs.len());
    Ok(Produced::default())
}

/// Executes a command and writes its manifest when it produced files.
fn run(command: Command, argv: Vec<String>) -> anyhow::Result<Option<RunManifest>> {
    let produced = execute(command)?;
    let Some((out, is_dir)) = produced.out else {
        return Ok(None);
    };
    let mpath = manifest_path(&out, is_dir);
    let base = mpath.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut m = RunManifest::new(argv, produced.config, produced.seed);
    m.record_outputs(&base, &produced.files)?;
    m.write(&mpath)?;
    Ok(Some(m))
}

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            std::process::exit(0);
        }
        Err(e) => {
            let record = failure::ErrorRecord {
                error: "usage",
                code: failure::EXIT_USAGE,
                message: e.render().to_string().trim_end().to_string(),
                constraint: None,
            };
            eprintln!("{}", serde_json::to_string(&record).unwrap());
            std::process::exit(failure::EXIT_USAGE);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("{}", serde_json::json!({"error": "usage", "code": failure::EXIT_USAGE, "message": e.to_string()}));
            std::process::exit(failure::EXIT_USAGE);
        }
    }
    if let Err(err) = run(cli.command, argv) {
        let record = classify(&err);
        eprintln!("{}", serde_json::to_string(&record).unwrap());
        std::process::exit(record.code);
    }
}
