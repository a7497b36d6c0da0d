use clap::{Parser, Subcommand};
use seamstress::adapt::MethodToggles;
use seamstress::defects::{load_instance, sample_instance, save_instance, DefectInstance};
use seamstress::harness::{
    parse_toggles, run_compile, run_golden, run_golden_zz, run_scan, scan_csv, scan_summary_json,
    MethodSelection, ScanConfig,
};
use seamstress::lattice::{build_layout, MergeType};
use seamstress::stream::{generate_stream, majority_extract};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_ASSERTION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "seamstress",
    about = "Defect-adaptive lattice-surgery merge compiler",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile one defect instance and emit its report JSON.
    Compile {
        /// Instance JSON file; omit to sample one instead.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 9)]
        d: usize,
        #[arg(long, default_value_t = 0.01)]
        q_data: f64,
        #[arg(long, default_value_t = 0.005)]
        q_anc: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// standard | proposed | comma list of fused,strategy-b,orient.
        #[arg(long, default_value = "proposed")]
        toggles: String,
        #[arg(long, default_value = "xx")]
        merge: String,
        /// Probe B column 1 instead of column 3 for horizontal feasibility.
        #[arg(long)]
        probe_literal: bool,
        /// Report the merged-configuration distance instead of the per-patch minimum.
        #[arg(long)]
        merged_deff: bool,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the sampled instance JSON here.
        #[arg(long)]
        save_instance: Option<PathBuf>,
    },
    /// Sweep a (d, q) grid and emit per-cell CSV rows plus a summary.
    Scan {
        /// Comma-separated odd distances.
        #[arg(long, default_value = "9,11,13")]
        d: String,
        #[arg(long, default_value = "0.005,0.01,0.02")]
        q_data: String,
        #[arg(long, default_value = "0.005,0.01,0.02")]
        q_anc: String,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// standard | proposed | both.
        #[arg(long, default_value = "both")]
        method: String,
        #[arg(long, default_value = "xx")]
        merge: String,
        #[arg(long)]
        probe_literal: bool,
        #[arg(long)]
        merged_deff: bool,
        /// Output directory for scan.csv and summary.json; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv | json (stdout format when --out is omitted).
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Replay the three-defect worked example bit for bit.
    Golden {
        /// Also run the transposed ZZ witness.
        #[arg(long)]
        zz: bool,
        /// Negative control: corrupt the fusion rule and expect a diff.
        #[arg(long)]
        negative_control: bool,
    },
    /// Simulate raw outcome streams for a compiled instance.
    Stream {
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 9)]
        d: usize,
        #[arg(long, default_value_t = 0.01)]
        q_data: f64,
        #[arg(long, default_value_t = 0.005)]
        q_anc: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "proposed")]
        toggles: String,
        #[arg(long, default_value = "xx")]
        merge: String,
        #[arg(long)]
        probe_literal: bool,
        /// Rounds per shot (odd for the majority vote).
        #[arg(long, default_value_t = 9)]
        rounds: usize,
        /// Per-bit measurement flip probability.
        #[arg(long, default_value_t = 0.01)]
        p_m: f64,
        #[arg(long, default_value_t = 10_000)]
        shots: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_merge(s: &str) -> Result<MergeType, String> {
    match s {
        "xx" => Ok(MergeType::Xx),
        "zz" => Ok(MergeType::Zz),
        other => Err(format!("unknown merge type '{other}' (expected xx or zz)")),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| format!("bad {what} value '{p}'"))
        })
        .collect()
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| format!("writing {}: {e}", p.display())),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn obtain_instance(
    path: &Option<PathBuf>,
    d: usize,
    q_data: f64,
    q_anc: f64,
    seed: u64,
    merge: MergeType,
) -> Result<DefectInstance, (u8, String)> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| (EXIT_IO, format!("reading {}: {e}", p.display())))?;
            load_instance(&text).map_err(|e| (EXIT_USAGE, e.to_string()))
        }
        None => {
            let layout = build_layout(d, merge).map_err(|e| (EXIT_USAGE, e.to_string()))?;
            sample_instance(&layout, q_data, q_anc, seed).map_err(|e| (EXIT_USAGE, e.to_string()))
        }
    }
}

fn toggles_for(s: &str, probe_literal: bool) -> Result<MethodToggles, (u8, String)> {
    parse_toggles(s, probe_literal).map_err(|e| (EXIT_USAGE, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, (u8, String)> {
    match cli.command {
        Command::Compile {
            instance,
            d,
            q_data,
            q_anc,
            seed,
            toggles,
            merge,
            probe_literal,
            merged_deff,
            out,
            save_instance: save_path,
        } => {
            let merge = parse_merge(&merge).map_err(|e| (EXIT_USAGE, e))?;
            let toggles = toggles_for(&toggles, probe_literal)?;
            let inst = obtain_instance(&instance, d, q_data, q_anc, seed, merge)?;
            if let Some(p) = &save_path {
                std::fs::write(p, save_instance(&inst))
                    .map_err(|e| (EXIT_IO, format!("writing {}: {e}", p.display())))?;
            }
            let report = run_compile(&inst, toggles, merged_deff);
            write_or_print(&out, &report.to_json()).map_err(|e| (EXIT_IO, e))?;
            Ok(EXIT_OK)
        }
        Command::Scan {
            d,
            q_data,
            q_anc,
            instances,
            seed,
            method,
            merge,
            probe_literal,
            merged_deff,
            out,
            format,
        } => {
            let config = ScanConfig {
                d_list: parse_list(&d, "distance").map_err(|e| (EXIT_USAGE, e))?,
                q_data_list: parse_list(&q_data, "q_data").map_err(|e| (EXIT_USAGE, e))?,
                q_anc_list: parse_list(&q_anc, "q_anc").map_err(|e| (EXIT_USAGE, e))?,
                instances,
                master_seed: seed,
                methods: MethodSelection::parse(&method)
                    .ok_or((EXIT_USAGE, format!("unknown method '{method}'")))?,
                merge_type: parse_merge(&merge).map_err(|e| (EXIT_USAGE, e))?,
                probe_literal,
                merged_deff,
            };
            if config.d_list.is_empty()
                || config.q_data_list.is_empty()
                || config.q_anc_list.is_empty()
                || config.instances == 0
            {
                return Err((EXIT_USAGE, "empty grid".into()));
            }
            for &d in &config.d_list {
                if d < 3 || d % 2 == 0 {
                    return Err((EXIT_USAGE, format!("distance {d} must be odd and >= 3")));
                }
            }
            // Fail before computing if the output location is unusable.
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir)
                    .map_err(|e| (EXIT_IO, format!("creating {}: {e}", dir.display())))?;
                let probe = dir.join(".write-probe");
                std::fs::write(&probe, b"")
                    .map_err(|e| (EXIT_IO, format!("output dir not writable: {e}")))?;
                let _ = std::fs::remove_file(&probe);
            }
            let rows = run_scan(&config);
            let csv = scan_csv(&rows);
            let summary = scan_summary_json(&config, &rows);
            match &out {
                Some(dir) => {
                    std::fs::write(dir.join("scan.csv"), &csv)
                        .map_err(|e| (EXIT_IO, e.to_string()))?;
                    std::fs::write(dir.join("summary.json"), &summary)
                        .map_err(|e| (EXIT_IO, e.to_string()))?;
                    eprintln!(
                        "wrote {} and {}",
                        dir.join("scan.csv").display(),
                        dir.join("summary.json").display()
                    );
                }
                None => {
                    if format == "json" {
                        println!("{summary}");
                    } else {
                        print!("{csv}");
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Golden {
            zz,
            negative_control,
        } => {
            let report = run_golden(negative_control);
            report.print();
            let mut ok = report.passed;
            if negative_control {
                // The control passes when the corruption is detected.
                ok = !report.passed;
                println!(
                    "negative control: {}",
                    if ok { "PASS (diff detected)" } else { "FAIL" }
                );
            }
            if zz {
                let zz_report = run_golden_zz();
                zz_report.print();
                ok &= zz_report.passed;
            }
            Ok(if ok { EXIT_OK } else { EXIT_ASSERTION })
        }
        Command::Stream {
            instance,
            d,
            q_data,
            q_anc,
            seed,
            toggles,
            merge,
            probe_literal,
            rounds,
            p_m,
            shots,
            out,
        } => {
            let merge = parse_merge(&merge).map_err(|e| (EXIT_USAGE, e))?;
            let toggles = toggles_for(&toggles, probe_literal)?;
            let inst = obtain_instance(&instance, d, q_data, q_anc, seed, merge)?;
            let artifacts = seamstress::harness::compile_artifacts(&inst, toggles)
                .map_err(|e| (EXIT_ASSERTION, format!("instance does not compile: {e}")))?;
            if rounds == 0 || rounds % 2 == 0 {
                return Err((EXIT_USAGE, "rounds must be odd and >= 1".into()));
            }
            let mut flip_count = 0usize;
            let mut majority_errors = 0usize;
            for s in 0..shots {
                let shot_seed = seamstress::defects::derive_seed(&[seed, s as u64]);
                let clean =
                    generate_stream(&artifacts.family, &artifacts.certificate, 1, 0.0, shot_seed)
                        .map_err(|e| (EXIT_USAGE, e.to_string()))?;
                let noisy = generate_stream(
                    &artifacts.family,
                    &artifacts.certificate,
                    rounds,
                    p_m,
                    shot_seed,
                )
                .map_err(|e| (EXIT_USAGE, e.to_string()))?;
                flip_count += noisy
                    .parities
                    .iter()
                    .filter(|&&p| p != clean.parities[0])
                    .count();
                if majority_extract(&noisy.parities).map_err(|e| (EXIT_USAGE, e.to_string()))?
                    != clean.parities[0]
                {
                    majority_errors += 1;
                }
            }
            let k = artifacts.certificate.beta.weight();
            let stats = serde_json::json!({
                "shots": shots,
                "rounds": rounds,
                "p_m": p_m,
                "beta_weight": k,
                "per_round_flip_rate": flip_count as f64 / (shots * rounds) as f64,
                "expected_flip_rate": seamstress::stream::expected_flip_rate(p_m, k),
                "majority_error_rate": majority_errors as f64 / shots as f64,
                "rule": artifacts.certificate.rule,
            });
            write_or_print(&out, &serde_json::to_string_pretty(&stats).unwrap())
                .map_err(|e| (EXIT_IO, e))?;
            Ok(EXIT_OK)
        }
    }
}
