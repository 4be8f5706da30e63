//! Subcommand implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sinnamon::analysis::{
    empirical_error_profile, error_cdf, error_cdf_gaussian, error_mean_std, mean_std, min_sketch_rows,
    prob_overestimate, prob_overestimate_gaussian, simulate_z, SketchParams, ValueDist, ZSimSpec,
};
use sinnamon::datagen::{generate_parallel, GenSpec};
use sinnamon::eval::{bench_delete, bench_insert, mrr_at, ndcg_at, recall_wrt_exact, Qrels, Run};
use sinnamon::storage::{read_vectors, write_vectors, VectorFormat, BINARY_MAGIC};
use sinnamon::{Budget, Collection, QueryParams, SinnamonConfig, SparseVector};

use crate::args::*;
use crate::UsageError;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Index(a) => index(a),
        Command::Query(a) => query(a),
        Command::BenchInsert(a) => cmd_bench_insert(a),
        Command::BenchDelete(a) => cmd_bench_delete(a),
        Command::Analyze(a) => analyze(a),
        Command::Eval(a) => eval(a),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn detect_format(path: &Path) -> Result<VectorFormat> {
    let mut head = [0u8; 8];
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let n = f.read(&mut head)?;
    Ok(if n == 8 && head == BINARY_MAGIC { VectorFormat::Binary } else { VectorFormat::Text })
}

fn load_vectors(path: &Path, format: Option<VectorFormat>) -> Result<Vec<SparseVector>> {
    let format = match format {
        Some(f) => f,
        None => detect_format(path)?,
    };
    read_vectors(path, format).with_context(|| format!("reading {}", path.display()))
}

fn gen(a: GenArgs) -> Result<()> {
    if a.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    let spec = GenSpec { count: a.count, dims: a.dims, psi: a.psi, dist: a.dist, seed: a.seed };
    let vectors = generate_parallel(&spec, a.threads)?;
    write_vectors(&a.out, a.format, vectors.iter()).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

/// Builds an empty collection, rejecting sketch flags on LinScan engines.
fn engine_collection(e: &EngineArgs) -> Result<Collection> {
    let config = if e.engine.is_sinnamon() {
        let m = e.m.ok_or_else(|| usage(format!("--engine {} requires --m", e.engine)))?;
        SinnamonConfig::new(e.dims, m, e.h.unwrap_or(1)).with_seed(e.seed.unwrap_or(0))
    } else {
        let given: Vec<&str> = [("--m", e.m.is_some()), ("--h", e.h.is_some()), ("--seed", e.seed.is_some())]
            .iter()
            .filter(|f| f.1)
            .map(|f| f.0)
            .collect();
        if !given.is_empty() {
            return Err(usage(format!("--engine {} takes no sketch flags, got {}", e.engine, given.join(" "))));
        }
        SinnamonConfig::new(e.dims, 1, 1)
    };
    Ok(Collection::new(e.engine, config)?)
}

fn index(a: IndexArgs) -> Result<()> {
    let mut c = engine_collection(&a.engine)?;
    for v in load_vectors(&a.input, a.format)? {
        c.insert(v)?;
    }
    c.save(&a.out).with_context(|| format!("writing index {}", a.out.display()))?;
    Ok(())
}

fn load_index(path: &Path) -> Result<Collection> {
    Collection::load(path).with_context(|| format!("loading index {}", path.display()))
}

fn query(a: QueryArgs) -> Result<()> {
    let mut params = QueryParams::new(a.k).with_threads(a.threads);
    if let Some(kp) = a.kprime {
        params = params.with_k_prime(kp);
    }
    if let Some(ms) = a.budget_ms {
        params = params.with_budget(Budget::millis(ms));
    }
    params.validate()?;
    let c = load_index(&a.index)?;
    let queries = load_vectors(&a.queries, a.format)?;
    let mut run = Run::new();
    for q in &queries {
        run.insert(q.ext_id().to_string(), &c.query(q, &params)?);
    }
    let tag = a.tag.unwrap_or_else(|| c.kind().to_string());
    run.write(output(a.out.as_deref())?, &tag)?;
    Ok(())
}

fn cmd_bench_insert(a: BenchInsertArgs) -> Result<()> {
    let template = engine_collection(&a.engine)?;
    let vectors = load_vectors(&a.input, a.format)?;
    let report = bench_insert(&template, &vectors, a.bucket, a.trials)?;
    output(a.out.as_deref())?.write_all(report.to_tsv().as_bytes())?;
    eprintln!("{:?}", report.counters);
    Ok(())
}

fn cmd_bench_delete(a: BenchDeleteArgs) -> Result<()> {
    let c = load_index(&a.index)?;
    let mut ids: Vec<u64> = c.id_map().live().map(|(_, ext)| ext).collect();
    ids.sort_unstable();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(a.order_seed));
    if let Some(n) = a.count {
        if n > ids.len() {
            return Err(usage(format!("--count {n} exceeds the {} live vectors", ids.len())));
        }
        ids.truncate(n);
    }
    let report = bench_delete(&c, &ids, a.bucket, a.trials)?;
    output(a.out.as_deref())?.write_all(report.to_tsv().as_bytes())?;
    eprintln!("{:?}", report.counters);
    Ok(())
}

fn check_unused(flags: &[(&str, bool)], context: &str) -> Result<()> {
    let given: Vec<&str> = flags.iter().filter(|f| f.1).map(|f| f.0).collect();
    if given.is_empty() {
        Ok(())
    } else {
        Err(usage(format!("{context} does not take {}", given.join(" "))))
    }
}

fn zero_mean_sigma(dist: &ValueDist) -> Option<f64> {
    match *dist {
        ValueDist::Gaussian { mu: 0.0, sigma } => Some(sigma),
        _ => None,
    }
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let name = format!("--formula {}", a.formula.to_possible_value().expect("no skipped variants").get_name());
    let sim_flags = [
        ("--psi-q", a.psi_q.is_some()),
        ("--query-dist", a.query_dist.is_some()),
        ("--trials", a.trials.is_some()),
        ("--seed", a.seed.is_some()),
    ];
    match a.formula {
        Formula::Prob | Formula::Expected => {
            check_unused(&[("--delta", !a.delta.is_empty()), ("--epsilon", a.epsilon.is_some())], &name)?;
            check_unused(&sim_flags, &name)?;
        }
        Formula::Cdf => {
            check_unused(&[("--epsilon", a.epsilon.is_some())], &name)?;
            check_unused(&sim_flags, &name)?;
            if a.delta.is_empty() {
                return Err(usage("--formula cdf requires --delta"));
            }
        }
        Formula::MinRows => {
            check_unused(&[("--m", !a.m.is_empty()), ("--index", a.index.is_some())], &name)?;
            check_unused(&sim_flags, &name)?;
            if a.delta.is_empty() || a.epsilon.is_none() {
                return Err(usage("--formula min-rows requires --delta and --epsilon"));
            }
        }
        Formula::ZSim => {
            check_unused(
                &[("--delta", !a.delta.is_empty()), ("--epsilon", a.epsilon.is_some()), ("--index", a.index.is_some())],
                &name,
            )?;
        }
    }
    if a.index.is_some() {
        check_unused(&[("--m", !a.m.is_empty()), ("--h", !a.h.is_empty()), ("--np", a.np.is_some())], &format!("{name} with --index"))?;
    }
    if a.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    let mut out = output(None)?;
    if let Some(path) = &a.index {
        return analyze_index(&a, path, &mut out);
    }
    let ms = if a.m.is_empty() { vec![60, 120, 240] } else { a.m.clone() };
    let hs = if a.h.is_empty() { vec![1] } else { a.h.clone() };
    let np = a.np.unwrap_or(120.0);
    let sigma0 = zero_mean_sigma(&a.dist);
    match a.formula {
        Formula::Prob => {
            writeln!(out, "m\th\tprob_overestimate{}", if sigma0.is_some() { "\tclosed_form" } else { "" })?;
            for &h in &hs {
                for &m in &ms {
                    let p = SketchParams::new(f64::from(m), h, np)?;
                    write!(out, "{m}\t{h}\t{:.6}", prob_overestimate(&a.dist, &p)?)?;
                    if sigma0.is_some() {
                        write!(out, "\t{:.6}", prob_overestimate_gaussian(&p))?;
                    }
                    writeln!(out)?;
                }
            }
        }
        Formula::Cdf => {
            writeln!(out, "m\th\tdelta\tcdf{}", if sigma0.is_some() { "\tclosed_form" } else { "" })?;
            for &h in &hs {
                for &m in &ms {
                    let p = SketchParams::new(f64::from(m), h, np)?;
                    for &d in &a.delta {
                        write!(out, "{m}\t{h}\t{d}\t{:.6}", error_cdf(&a.dist, &p, d)?)?;
                        if let Some(s) = sigma0 {
                            write!(out, "\t{:.6}", error_cdf_gaussian(s, &p, d))?;
                        }
                        writeln!(out)?;
                    }
                }
            }
        }
        Formula::Expected => {
            writeln!(out, "m\th\texpected_error\tstd_error")?;
            for &h in &hs {
                for &m in &ms {
                    let (mean, std) = error_mean_std(&a.dist, &SketchParams::new(f64::from(m), h, np)?)?;
                    writeln!(out, "{m}\t{h}\t{mean:.6}\t{std:.6}")?;
                }
            }
        }
        Formula::MinRows => {
            let sigma = sigma0.ok_or_else(|| usage("--formula min-rows needs a zero-mean gaussian --dist"))?;
            let eps = a.epsilon.unwrap_or_default();
            writeln!(out, "h\tdelta\tepsilon\tmin_rows")?;
            for &h in &hs {
                for &d in &a.delta {
                    writeln!(out, "{h}\t{d}\t{eps}\t{}", min_sketch_rows(sigma, d, eps, h, np)?)?;
                }
            }
        }
        Formula::ZSim => {
            writeln!(out, "m\th\tmean_z\tstd_z")?;
            for &h in &hs {
                for &m in &ms {
                    let spec = ZSimSpec {
                        dist: a.dist.clone(),
                        params: SketchParams::new(f64::from(m), h, np)?,
                        psi_q: a.psi_q.unwrap_or(16),
                        query_dist: a.query_dist.clone().unwrap_or(ValueDist::gaussian(0.0, 1.0)?),
                        trials: a.trials.unwrap_or(10_000),
                        seed: a.seed.unwrap_or(0),
                        workers: a.threads,
                    };
                    let (mean, std) = mean_std(&simulate_z(&spec)?);
                    writeln!(out, "{m}\t{h}\t{mean:.6}\t{std:.6}")?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Theory evaluated at the index's own m, h and mean vector size next to
/// errors decoded from its sketch.
fn analyze_index(a: &AnalyzeArgs, path: &Path, out: &mut dyn Write) -> Result<()> {
    let c = load_index(path)?;
    let index = c.sinnamon().ok_or_else(|| usage(format!("--index needs a Sinnamon index, found {}", c.kind())))?;
    let config = index.config();
    let live = c.len().max(1) as f64;
    let np = c.store().sorted().iter().map(|v| v.nnz() as f64).sum::<f64>() / live;
    let params = SketchParams::new(f64::from(config.m), config.h, np)?;
    let profile = empirical_error_profile(index, c.store(), &[])?;
    writeln!(out, "# m={} h={} np={np:.3}", config.m, config.h)?;
    match a.formula {
        Formula::Prob => {
            writeln!(out, "quantity\ttheory\tempirical")?;
            writeln!(out, "prob_overestimate\t{:.6}\t{:.6}", prob_overestimate(&a.dist, &params)?, profile.prob_overestimate())?;
        }
        Formula::Cdf => {
            writeln!(out, "delta\ttheory\tempirical")?;
            for &d in &a.delta {
                writeln!(out, "{d}\t{:.6}\t{:.6}", error_cdf(&a.dist, &params, d)?, profile.ecdf(d))?;
            }
        }
        Formula::Expected => {
            writeln!(out, "quantity\ttheory\tempirical")?;
            let (mean, _) = error_mean_std(&a.dist, &params)?;
            writeln!(out, "expected_error\t{mean:.6}\t{:.6}", profile.mean_error())?;
        }
        Formula::MinRows | Formula::ZSim => unreachable!("rejected during flag checks"),
    }
    out.flush()?;
    Ok(())
}

fn read_run(path: &Path) -> Result<Run> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Run::read(BufReader::new(f)).with_context(|| format!("reading run {}", path.display()))
}

fn eval(a: EvalArgs) -> Result<()> {
    let report = match a.metric {
        Metric::Recall => {
            check_unused(&[("--qrels", a.qrels.is_some()), ("--cutoff", a.cutoff.is_some())], "--metric recall")?;
            let exact = a.exact.as_deref().ok_or_else(|| usage("--metric recall requires --exact"))?;
            let k = a.k.unwrap_or(10);
            if k == 0 {
                return Err(usage("--k must be at least 1"));
            }
            recall_wrt_exact(&read_run(&a.run)?, &read_run(exact)?, k)
        }
        Metric::Mrr | Metric::Ndcg => {
            if a.exact.is_some() || a.k.is_some() {
                return Err(usage("--metric mrr/ndcg take --qrels and --cutoff, not --exact or --k"));
            }
            let path = a.qrels.as_deref().ok_or_else(|| usage("--metric mrr/ndcg require --qrels"))?;
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let qrels = Qrels::read(BufReader::new(f)).with_context(|| format!("reading qrels {}", path.display()))?;
            let run = read_run(&a.run)?;
            let cutoff = a.cutoff.unwrap_or(if a.metric == Metric::Mrr { 10 } else { 1000 });
            if cutoff == 0 {
                return Err(usage("--cutoff must be at least 1"));
            }
            if a.metric == Metric::Mrr {
                mrr_at(&run, &qrels, cutoff)
            } else {
                ndcg_at(&run, &qrels, cutoff)
            }
        }
    };
    let mut out = output(a.out.as_deref())?;
    out.write_all(report.to_tsv().as_bytes())?;
    out.flush()?;
    Ok(())
}
