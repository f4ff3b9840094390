use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use nestrank::analysis::{
    border_violations, pack, render_csv, render_pgm, scaling_csv, scaling_study, separate_groups,
    ModelSpec, PerturbationStudy,
};
use nestrank::analytic::{fcm_blocked_ratios, mem_ratios, RatioReport};
use nestrank::bimatrix::{
    canonical_order, extract_profile, format_matrix, read_matrix, BinaryBipartiteMatrix, Remap,
};
use nestrank::ingest::{binarize, load_csv, rca, read_id_list, Schema};
use nestrank::metrics::{run, Algo, RunOptions};
use serde::Serialize;
use serde_json::json;

use crate::{Cli, Command, Metric, ModelArgs, ModelKind, Outcome};

/// Scores this close to the clamp floor carry no ratio information.
const FLOORED: f64 = 1e-290;

pub(crate) fn dispatch(cli: &Cli) -> anyhow::Result<Outcome> {
    let config = serde_json::to_value(cli)?;
    match &cli.command {
        Command::Rank {
            input,
            run: args,
            out,
        } => {
            let (m, remap) = load(input)?;
            let (state, report) = run(&m, args.algo()?, &args.options())?;
            let body = json!({
                "rows": remap.rows,
                "cols": remap.cols,
                "state": state,
                "report": report,
            });
            emit(out.output.as_deref(), &to_json(&body)?, &config)?;
            Ok(converged(report.converged))
        }
        Command::Analytic {
            input,
            algo,
            verify,
            epsilon,
            max_iter,
            out,
        } => {
            let (m, remap) = load(input)?;
            let profile = extract_profile(&m).with_context(|| input.display().to_string())?;
            let (report, iter_algo) = match algo {
                Metric::Fcm => (fcm_blocked_ratios(&profile), Algo::Fcm),
                Metric::Mem => (mem_ratios(&profile), Algo::Mem),
                Metric::Gamma => bail!("closed forms exist only for fcm and mem"),
            };
            let (rows, cols) = canonical_order(&m);
            let mut body = json!({
                "rows": rows.iter().map(|&i| remap.rows[i]).collect::<Vec<_>>(),
                "cols": cols.iter().map(|&a| remap.cols[a]).collect::<Vec<_>>(),
                "ratios": report,
                "groups": separate_groups(&report),
            });
            let mut outcome = Outcome::Done;
            if *verify {
                let opts = RunOptions {
                    epsilon: *epsilon,
                    max_iter: *max_iter,
                    ..RunOptions::default()
                };
                let (state, run_report) = run(&profile.to_matrix(), iter_algo, &opts)?;
                let (gap, skipped) = discrepancy(&report, &state.fitness, &state.complexity);
                eprintln!(
                    "max discrepancy {gap:e} after {} iterations ({skipped} floored pairs skipped)",
                    run_report.halt_iteration
                );
                body["verify"] = json!({
                    "max_discrepancy": gap,
                    "floored_pairs": skipped,
                    "iterations": run_report.halt_iteration,
                    "converged": run_report.converged,
                });
                outcome = converged(run_report.converged);
            }
            emit(out.output.as_deref(), &to_json(&body)?, &config)?;
            Ok(outcome)
        }
        Command::Pack {
            input,
            run: args,
            pgm,
            csv,
            out,
        } => {
            let (m, remap) = load(input)?;
            let packing = pack(&m, args.algo()?, &args.options())?;
            if let Some(path) = pgm {
                write(path, &render_pgm(&m, &packing)?)?;
            }
            if let Some(path) = csv {
                write(path, &render_csv(&m, &packing)?)?;
            }
            let body = json!({
                "rows": packing.row_order.iter().map(|&i| remap.rows[i]).collect::<Vec<_>>(),
                "cols": packing.col_order.iter().map(|&a| remap.cols[a]).collect::<Vec<_>>(),
                "border_violations": border_violations(&m, &packing)?,
                "packing": packing,
            });
            emit(out.output.as_deref(), &to_json(&body)?, &config)?;
            Ok(converged(packing.converged))
        }
        Command::Perturb {
            input,
            run: args,
            eta,
            region,
            seed,
            trials,
            out,
        } => {
            let (m, _) = load(input)?;
            let study = PerturbationStudy::new(&m, args.algo()?, &args.options())?;
            let mut lines = String::new();
            let mut all_converged = true;
            for k in 0..*trials {
                let seed = seed.checked_add(k).context("seed + trials overflows u64")?;
                let r = study.trial(*eta, (*region).into(), seed)?;
                all_converged &= r.converged;
                lines.push_str(&serde_json::to_string(&r)?);
                lines.push('\n');
            }
            emit(out.output.as_deref(), &lines, &config)?;
            Ok(converged(all_converged))
        }
        Command::Ingest {
            input,
            year,
            threshold,
            countries,
            products,
            country_column,
            product_column,
            year_column,
            value_column,
            output,
        } => {
            let schema = Schema {
                country: country_column.clone(),
                product: product_column.clone(),
                year: year_column.clone(),
                value: value_column.clone(),
            };
            let (table, log) = load_csv(input, &schema)?;
            log::info!(
                "{} rows read, {} duplicates merged",
                log.rows_read,
                log.duplicates_merged
            );
            let keep_c = countries.as_deref().map(read_id_list).transpose()?;
            let keep_p = products.as_deref().map(read_id_list).transpose()?;
            let table = table.filter(keep_c.as_ref(), keep_p.as_ref());
            let (m, labels) = binarize(&rca(&table, *year)?, *threshold, true)?;
            write(output, &format_matrix(&m))?;
            write(&sidecar(output, "labels.json"), &to_json(&labels)?)?;
            write(&sidecar(output, "config.json"), &to_json(&config)?)?;
            Ok(Outcome::Done)
        }
        Command::Generate { model, n, out } => {
            let m = spec(model).generate(*n)?;
            emit(out.output.as_deref(), &format_matrix(&m), &config)?;
            Ok(Outcome::Done)
        }
        Command::Scaling {
            model,
            sizes,
            run: args,
            out,
        } => {
            let points = scaling_study(&spec(model), sizes, args.algo()?, &args.options())?;
            emit(out.output.as_deref(), &scaling_csv(&points), &config)?;
            Ok(converged(points.iter().all(|p| p.converged)))
        }
    }
}

fn converged(ok: bool) -> Outcome {
    if ok {
        Outcome::Done
    } else {
        Outcome::NotConverged
    }
}

fn load(path: &Path) -> anyhow::Result<(BinaryBipartiteMatrix, Remap)> {
    Ok(read_matrix(path, true)?)
}

fn spec(m: &ModelArgs) -> ModelSpec {
    match m.model {
        ModelKind::A => ModelSpec::A {
            alpha: m.alpha,
            m_ratio: m.m_ratio,
        },
        ModelKind::B => ModelSpec::B {
            x: m.x,
            alpha: m.alpha,
            k1: m.k1,
            k2: m.k2,
        },
    }
}

/// Largest gap between closed-form and iterated ratios, and the number of
/// pairs skipped because a score sank to the clamp floor.
fn discrepancy(report: &RatioReport, fitness: &[f64], complexity: &[f64]) -> (f64, usize) {
    let pairs = |v: &[f64]| {
        v.windows(2)
            .map(|w| (w[0] / w[1], w[0].min(w[1]) < FLOORED))
            .collect::<Vec<_>>()
    };
    let (fr, qr) = (pairs(fitness), pairs(complexity));
    let mut gap: f64 = 0.0;
    let mut skipped = 0;
    for (a, &(it, floored)) in report
        .row_ratios
        .iter()
        .zip(&fr)
        .chain(report.col_ratios.iter().zip(&qr))
    {
        if floored {
            skipped += 1;
        } else {
            gap = gap.max((a - it).abs());
        }
    }
    (gap, skipped)
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string(v)?;
    s.push('\n');
    Ok(s)
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, body: &str) -> anyhow::Result<()> {
    fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(output: Option<&Path>, body: &str, config: &serde_json::Value) -> anyhow::Result<()> {
    match output {
        Some(path) => {
            write(path, body)?;
            write(&sidecar(path, "config.json"), &to_json(config)?)
        }
        None => {
            print!("{body}");
            eprintln!("config: {config}");
            Ok(())
        }
    }
}
