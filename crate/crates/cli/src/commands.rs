use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use otp_core::analysis::{Check, LemmaOptions};
use otp_core::experiment::{
    lower_bound_rows, run_campaign, CampaignParams, CampaignResult, ExperimentError, ExperimentRow,
};
use otp_core::greedy::TieBreak;
use otp_core::instance::{gen_lower_bound, gen_random, parse_instance, serialize_instance, Instance, RandomParams};
use otp_core::num::{parse_decimal, Number, Rational};
use otp_core::pipeline::{run_instance, verify_instance};
use serde_json::{json, Value};

use crate::{CampaignArgs, Cli, Command, ExperimentArgs, Family, GenerateFamily, Policy, VerifyArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
    Usage,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Ok => ExitCode::SUCCESS,
            Status::Failed => ExitCode::from(1),
            Status::Usage => ExitCode::from(2),
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<Status> {
    match &cli.command {
        Command::Generate { family } => generate(cli, family),
        Command::Run { instance, policy, with_opt } => run(cli, instance, *policy, *with_opt),
        Command::Verify(args) => verify(cli, args),
        Command::Experiment(args) => experiment(cli, args),
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn epsilon(text: &str) -> Result<Rational> {
    parse_decimal(text).ok_or_else(|| anyhow!("epsilon `{text}` is not a decimal number"))
}

fn print_json(value: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn generate(cli: &Cli, family: &GenerateFamily) -> Result<Status> {
    let (inst, out) = match family {
        GenerateFamily::Lowerbound { k, m, epsilon: eps, out } => (gen_lower_bound(*k, *m, &epsilon(eps)?)?, out),
        GenerateFamily::Random { sites, requests, k, kind, capacity_max, out } => {
            let params = RandomParams {
                sites: *sites,
                requests: *requests,
                k: *k,
                kind: (*kind).into(),
                capacity_max: *capacity_max,
                seed: cli.seed,
            };
            (gen_random(&params)?, out)
        }
    };
    let text = serialize_instance(&inst);
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(Status::Ok)
}

fn run(cli: &Cli, path: &Path, policy: Policy, with_opt: bool) -> Result<Status> {
    let inst = read_instance(path)?;
    let summary = run_instance(&inst, policy.into(), with_opt)?;
    let ratio = summary.opt_cost.as_ref().and_then(|o| summary.greedy_cost.ratio(o));
    if cli.json {
        print_json(&json!({
            "policy": TieBreak::from(policy).name(),
            "greedy_cost": summary.greedy_cost.to_json(cli.exact),
            "opt_cost": summary.opt_cost.as_ref().map(|o| o.to_json(cli.exact)),
            "ratio": ratio.as_ref().map(|r| r.to_json(cli.exact)),
            "mapping": summary.mapping,
        }))?;
    } else {
        println!("greedy_cost {}", summary.greedy_cost.render(cli.exact));
        if let Some(opt) = &summary.opt_cost {
            println!("opt_cost {}", opt.render(cli.exact));
            println!("ratio {}", ratio.map_or("undefined".into(), |r| r.render(cli.exact)));
        }
    }
    Ok(Status::Ok)
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<Status> {
    if let Some(per_k) = args.random_campaign {
        return campaign(cli, campaign_params(cli, &args.campaign, per_k, args.policy.into()));
    }
    let path = args.instance.as_deref().expect("clap requires an instance without a campaign");
    let inst = read_instance(path)?;
    if inst.k() < 3 {
        bail!("refusing to verify k = {}: the analysis needs k >= 3 (the bound 1 + 2/(k-2) diverges)", inst.k());
    }
    let options = LemmaOptions { detailed: args.detailed, ..Default::default() };
    let out = verify_instance(&inst, args.policy.into(), &options)?;
    if cli.json {
        print_json(&out.to_json(cli.exact))?;
    } else {
        let e = cli.exact;
        println!("greedy_cost {}", out.greedy_cost().render(e));
        println!("opt_cost {}", out.opt_cost().render(e));
        println!("ratio {}", out.ratio().map_or("undefined".into(), |r| r.render(e)));
        println!("bound {}", out.bound().render(e));
        println!("trees {}", out.tree_count());
        for (check, t) in Check::ALL.iter().zip(out.tallies()) {
            println!("check {} {}/{} passed", check.name(), t.checked - t.failed, t.checked);
        }
        for line in out.failure_lines() {
            println!("failure {line}");
        }
        println!("{}", if out.passed() { "PASS" } else { "FAIL" });
    }
    Ok(if out.passed() { Status::Ok } else { Status::Failed })
}

fn campaign_params(cli: &Cli, args: &CampaignArgs, per_k: usize, policy: TieBreak) -> CampaignParams {
    CampaignParams {
        per_k,
        ks: args.ks.clone(),
        max_sites: args.max_sites,
        max_requests: args.max_requests,
        capacity_max: args.capacity_max,
        kinds: args.kinds.iter().map(|&k| k.into()).collect(),
        master_seed: cli.seed,
        threads: args.threads,
        policy,
    }
}

fn checked_campaign(params: &CampaignParams) -> Result<Vec<CampaignResult>> {
    if let Some(k) = params.ks.iter().find(|&&k| k < 3) {
        bail!("refusing k = {k}: the analysis needs k >= 3");
    }
    Ok(run_campaign(params)?)
}

fn campaign(cli: &Cli, params: CampaignParams) -> Result<Status> {
    let results = checked_campaign(&params)?;
    let failed: Vec<&CampaignResult> = results.iter().filter(|r| !r.row.lemma_pass).collect();
    if cli.json {
        let rows: Vec<Value> = results
            .iter()
            .map(|r| {
                let mut v = row_json(&r.row, cli.exact);
                v["kind"] = json!(r.params.kind.name());
                v["sites"] = json!(r.params.sites);
                v["requests"] = json!(r.params.requests);
                v["failures"] = json!(r.failures);
                v
            })
            .collect();
        print_json(&json!({
            "master_seed": params.master_seed,
            "instances": results.len(),
            "failed": failed.len(),
            "rows": rows,
        }))?;
    } else {
        for r in &failed {
            println!(
                "FAIL instance {} seed {} (k={}, {} sites, {} requests)",
                r.row.instance_id, r.params.seed, r.row.k, r.params.sites, r.params.requests
            );
            for line in &r.failures {
                println!("  {line}");
            }
        }
        let worst = results.iter().filter_map(|r| r.row.ratio.as_ref().map(Number::to_f64)).fold(0.0, f64::max);
        println!(
            "campaign master_seed {} instances {} failed {} max_ratio {worst}",
            params.master_seed,
            results.len(),
            failed.len()
        );
        println!("{}", if failed.is_empty() { "PASS" } else { "FAIL" });
    }
    Ok(if failed.is_empty() { Status::Ok } else { Status::Failed })
}

fn row_json(row: &ExperimentRow, exact: bool) -> Value {
    json!({
        "instance_id": row.instance_id,
        "k": row.k,
        "m_or_seed": row.m_or_seed,
        "greedy_cost": row.greedy_cost.to_json(exact),
        "opt_cost": row.opt_cost.to_json(exact),
        "ratio": row.ratio.as_ref().map(|r| r.to_json(exact)),
        "bound": row.bound.to_json(exact),
        "lemma_pass": row.lemma_pass,
    })
}

fn parse_range(text: &str) -> Result<(u32, u32)> {
    let parse = |s: &str| s.trim().parse::<u32>().map_err(|_| anyhow!("invalid m range `{text}`"));
    match text.split_once("..") {
        Some((a, b)) => Ok((parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?)),
        None => {
            let m = parse(text)?;
            Ok((m, m))
        }
    }
}

fn experiment(cli: &Cli, args: &ExperimentArgs) -> Result<Status> {
    let rows = match args.family {
        Family::Lowerbound => {
            let k = args.k.expect("clap requires --k");
            let (a, b) = parse_range(args.m_range.as_deref().expect("clap requires --m-range"))?;
            let policy = args.policy.unwrap_or(Policy::Highest).into();
            match lower_bound_rows(k, a..=b, policy, &epsilon(&args.epsilon)?) {
                Ok(rows) => rows,
                Err(e @ ExperimentError::ClosedForm { .. }) => {
                    eprintln!("error: {e}");
                    return Ok(Status::Failed);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Family::Random => {
            let policy = args.policy.unwrap_or(Policy::Lowest).into();
            let params = campaign_params(cli, &args.campaign, args.count, policy);
            checked_campaign(&params)?.into_iter().map(|r| r.row).collect()
        }
    };
    if cli.json {
        print_json(&Value::Array(rows.iter().map(|r| row_json(r, cli.exact)).collect()))?;
    } else {
        let mut w = csv::Writer::from_writer(io::stdout().lock());
        w.write_record(ExperimentRow::HEADER)?;
        for row in &rows {
            w.write_record(row.record(cli.exact))?;
        }
        w.flush()?;
    }
    Ok(if rows.iter().all(|r| r.lemma_pass) { Status::Ok } else { Status::Failed })
}
