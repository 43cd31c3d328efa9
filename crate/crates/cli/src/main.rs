mod config;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dynprice::allocator::opt_welfare;
use dynprice::gslab::{self, ForgedMarket};
use dynprice::io::{self, PriceFile};
use dynprice::pricer::{price_market, PricingDetail};
use dynprice::simulator::{
    adversarial_verify, price_vector_failures, run_once, Algorithm1Pricer, NaivePricer, Pricer, StaticPricer,
    VerifyOptions,
};
use dynprice::{Market, Rat};
use serde_json::{json, Value};

use config::{Config, Format};

#[derive(Parser, Debug)]
#[command(name = "dynprice", version, about = "Dynamic pricing for small multi-demand markets")]
struct Cli {
    /// JSON config file; defaults to the file named by DYNPRICE_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format (overrides the config).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Opening-round prices for a market, as a price file.
    Price {
        market: PathBuf,
        /// Also print the preference graphs, classes and marks.
        #[arg(long)]
        debug: bool,
    },
    /// Run buyers through the market under a pricing strategy.
    Simulate {
        market: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        branch_cap: Option<u64>,
        /// algorithm1, naive, or file:<prices.json>
        #[arg(long, default_value = "algorithm1")]
        pricer: String,
    },
    /// Check that every demanded bundle under fixed prices extends to an
    /// optimal allocation.
    VerifyPrices { market: PathBuf, prices: PathBuf },
    /// Legal buyers per item and the item classes of the base allocation.
    Legality { market: PathBuf },
    /// Gross-substitutes checks on a single valuation.
    Gs {
        #[command(subcommand)]
        action: GsAction,
    },
    /// Build a market with no Walrasian equilibrium around a non-GS valuation.
    Forge {
        valuation: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Decide whether a market has a Walrasian equilibrium.
    WeCheck { market: PathBuf },
    /// Built-in scenarios.
    Scenario {
        #[command(subcommand)]
        which: ScenarioName,
    },
}

#[derive(Subcommand, Debug)]
enum GsAction {
    Check { valuation: PathBuf },
    Witness { valuation: PathBuf },
}

#[derive(Subcommand, Debug)]
enum ScenarioName {
    /// Budget-additive market with a scripted two-phase pricing.
    AppendixD {
        #[arg(long)]
        epsilon: Option<Rat>,
        #[arg(long)]
        branch_cap: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Random,
}

/// What a command produced: a report and whether its verdict held.
struct Outcome {
    value: Value,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, ok)) => {
            // A closed pipe is not worth a panic.
            let _ = writeln!(std::io::stdout(), "{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(String, bool)> {
    let cfg = Config::load(cli.config.as_deref())?;
    let format = cli.format.unwrap_or(cfg.output_format);
    let out = dispatch(cli.command, &cfg, format)?;
    Ok((report::emit(&out.value, format), out.ok))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_market(path: &Path) -> Result<Market> {
    io::parse_market(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_valuation(path: &Path) -> Result<(Vec<String>, dynprice::Valuation)> {
    io::parse_valuation(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn dispatch(cmd: Command, cfg: &Config, format: Format) -> Result<Outcome> {
    match cmd {
        Command::Price { market, debug } => price(&load_market(&market)?, debug, format),
        Command::Simulate {
            market,
            mode,
            seed,
            branch_cap,
            pricer,
        } => {
            let m = load_market(&market)?;
            let pricer = make_pricer(&pricer, &m)?;
            match mode {
                Mode::Exhaustive => {
                    let opts = verify_options(branch_cap, cfg)?;
                    let r = adversarial_verify(&m, pricer.as_ref(), opts)?;
                    let mut value = report::verification(&m, &r);
                    value["pricer"] = json!(pricer.name());
                    Ok(Outcome { value, ok: r.verdict })
                }
                Mode::Random => {
                    let seed = seed.unwrap_or(cfg.seed);
                    let t = run_once(&m, pricer.as_ref(), seed)?;
                    let opt = opt_welfare(&m)?;
                    let ok = t.final_welfare == opt;
                    let mut value = report::trace(&m, &t);
                    value["verdict"] = json!(ok);
                    value["opt"] = json!(opt);
                    value["seed"] = json!(seed);
                    value["pricer"] = json!(pricer.name());
                    Ok(Outcome { value, ok })
                }
            }
        }
        Command::VerifyPrices { market, prices } => {
            let m = load_market(&market)?;
            let p = io::parse_prices(&read(&prices)?, m.items()).with_context(|| format!("in {}", prices.display()))?;
            let failures = price_vector_failures(&m, &p)?;
            let ok = failures.is_empty();
            let listed: Vec<Value> = failures
                .iter()
                .map(|(i, s)| json!({"buyer": m.buyers()[*i].name, "bundle": report::bundle(&m, s)}))
                .collect();
            Ok(Outcome {
                value: json!({"verdict": ok, "failures": listed}),
                ok,
            })
        }
        Command::Legality { market } => legality(&load_market(&market)?),
        Command::Gs { action } => match action {
            GsAction::Check { valuation } => {
                let (items, v) = load_valuation(&valuation)?;
                let r = gslab::check_gs(&v.to_table()?)?;
                let label = |x: usize| items[x].clone();
                let bundle = |s: &dynprice::Bundle| format!("{{{}}}", dynprice::model::bundle_label(s, &items));
                let sm: Vec<Value> = r
                    .sm_violations
                    .iter()
                    .map(|t| json!({"s": bundle(&t.s), "x": label(t.x), "y": label(t.y)}))
                    .collect();
                let rgp: Vec<Value> = r
                    .rgp_violations
                    .iter()
                    .map(|t| json!({"s": bundle(&t.s), "x": label(t.x), "y": label(t.y), "z": label(t.z)}))
                    .collect();
                Ok(Outcome {
                    value: json!({"is_gs": r.is_gs, "sm_violations": sm, "rgp_violations": rgp}),
                    ok: r.is_gs,
                })
            }
            GsAction::Witness { valuation } => {
                let (items, v) = load_valuation(&valuation)?;
                let w = gslab::gs_witness(&v.to_table()?)?;
                let bundle = |s: &dynprice::Bundle| format!("{{{}}}", dynprice::model::bundle_label(s, &items));
                let prices = report::prices(&items, &w.p);
                Ok(Outcome {
                    value: json!({"a": bundle(&w.a), "b": bundle(&w.b), "prices": prices, "verified": true}),
                    ok: true,
                })
            }
        },
        Command::Forge { valuation, output } => {
            let (items, v) = load_valuation(&valuation)?;
            let f = gslab::forge_counterexample(&items, &v)?;
            std::fs::write(&output, io::market_to_json(&f.market) + "\n")
                .with_context(|| format!("writing {}", output.display()))?;
            let cert = certificate(&f, &items);
            let cert_path = certificate_path(&output);
            std::fs::write(&cert_path, serde_json::to_string_pretty(&cert)? + "\n")
                .with_context(|| format!("writing {}", cert_path.display()))?;
            let mut value = cert;
            value["market_file"] = json!(output.display().to_string());
            value["certificate_file"] = json!(cert_path.display().to_string());
            Ok(Outcome { value, ok: true })
        }
        Command::WeCheck { market } => {
            let m = load_market(&market)?;
            let w = gslab::walrasian_exists(&m)?;
            let mut value = json!({
                "exists": w.exists,
                "verdict": w.exists,
                "allocations_checked": w.allocations_checked,
            });
            if let (Some(a), Some(p)) = (&w.allocation, &w.prices) {
                value["allocation"] = report::allocation(&m, a);
                value["prices"] = report::prices(m.items(), p);
            } else {
                value["dynamic_pricing"] = json!("none: a dynamic pricing would yield a Walrasian equilibrium");
            }
            Ok(Outcome { value, ok: w.exists })
        }
        Command::Scenario {
            which: ScenarioName::AppendixD { epsilon, branch_cap },
        } => {
            let eps = epsilon.unwrap_or_else(|| cfg.scenario_epsilon.clone());
            if !eps.is_positive() {
                return Err(anyhow!("epsilon must be positive"));
            }
            let opts = verify_options(branch_cap, cfg)?;
            let m = gslab::appendix_d_market();
            let r = gslab::appendix_d_scenario(eps.clone(), opts)?;
            let we = gslab::walrasian_exists(&m)?;
            let mut value = report::verification(&m, &r);
            value["epsilon"] = json!(eps);
            value["walrasian_equilibrium"] = json!(we.exists);
            Ok(Outcome { value, ok: r.verdict })
        }
    }
}

fn verify_options(branch_cap: Option<u64>, cfg: &Config) -> Result<VerifyOptions> {
    let cap = branch_cap.unwrap_or(cfg.branch_cap);
    if cap == 0 {
        return Err(anyhow!("--branch-cap must be positive"));
    }
    Ok(VerifyOptions {
        branch_cap: cap,
        ..VerifyOptions::default()
    })
}

fn make_pricer(spec: &str, m: &Market) -> Result<Box<dyn Pricer>> {
    Ok(match spec {
        "algorithm1" => Box::new(Algorithm1Pricer),
        "naive" => Box::new(NaivePricer),
        _ => match spec.strip_prefix("file:") {
            Some(path) => {
                let p = io::parse_prices(&read(Path::new(path))?, m.items()).with_context(|| format!("in {path}"))?;
                Box::new(StaticPricer(p))
            }
            None => return Err(anyhow!("unknown pricer {spec:?}; expected algorithm1, naive or file:<path>")),
        },
    })
}

fn certificate_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.certificate.json"))
}

fn certificate(f: &ForgedMarket, items: &[String]) -> Value {
    let bundle = |s: &dynprice::Bundle| format!("{{{}}}", dynprice::model::bundle_label(s, items));
    let family: Vec<Value> = f
        .family
        .iter()
        .zip(&f.family_welfare)
        .map(|(a, w)| json!({"allocation": report::allocation(&f.market, a), "welfare": w}))
        .collect();
    json!({
        "witness": {
            "a": bundle(&f.witness.a),
            "b": bundle(&f.witness.b),
            "prices": report::prices(items, &f.witness.p),
        },
        "params": f.params,
        "family": family,
        "family_welfare_distinct": true,
        "walrasian_equilibrium": f.walrasian.exists,
        "dynamic_pricing": if f.admits_dynamic_pricing() { "possible" } else { "none" },
    })
}

fn price(m: &Market, debug: bool, format: Format) -> Result<Outcome> {
    let r = price_market(m)?;
    let file = PriceFile::from_prices(m.items(), &r.prices, r.epsilon().cloned());
    let mut value = serde_json::to_value(&file)?;
    if debug || format == Format::Table {
        if let Some(d) = &r.detail {
            value["debug"] = detail_dump(m, d);
        }
    }
    Ok(Outcome { value, ok: true })
}

fn aug_label(m: &Market, d: &PricingDetail, x: usize) -> String {
    match d.item_map.get(x) {
        Some(&orig) => m.items()[orig].clone(),
        None => d.aug.label(x),
    }
}

fn detail_dump(m: &Market, d: &PricingDetail) -> Value {
    let lab = |x: usize| aug_label(m, d, x);
    let graph = |g: &dynprice::pricer::PreferenceGraph| -> Vec<Value> {
        g.edges
            .iter()
            .map(|((x, y), w)| json!(format!("{} -> {}: {}", lab(*x), lab(*y), w)))
            .collect()
    };
    let classes: serde_json::Map<String, Value> = d
        .partition
        .classes
        .iter()
        .map(|(k, s)| {
            let names: Vec<String> = s.iter().map(lab).collect();
            (k.to_string(), json!(format!("{{{}}}", names.join(","))))
        })
        .collect();
    let marks: Vec<Value> = d.marks.iter().map(|(a, b)| json!(format!("{a} -> {b}"))).collect();
    let deleted: Vec<Value> = d
        .deleted_edges()
        .into_iter()
        .map(|(x, y)| json!(format!("{} -> {}", lab(x), lab(y))))
        .collect();
    json!({
        "delta": d.delta,
        "epsilon": d.epsilon,
        "base_allocation": d.base.bundles.iter().enumerate().map(|(i, s)| {
            let names: Vec<String> = s.iter().map(lab).collect();
            json!({"buyer": m.buyers()[d.buyer_map[i]].name, "bundle": format!("{{{}}}", names.join(","))})
        }).collect::<Vec<_>>(),
        "classes": classes,
        "marks": marks,
        "deleted_edges": deleted,
        "h": graph(&d.h),
        "h_prime": graph(&d.h_prime),
    })
}

fn legality(m: &Market) -> Result<Outcome> {
    let r = price_market(m)?;
    let Some(d) = &r.detail else {
        return Ok(Outcome {
            value: json!({"note": "fewer than two buyers or no valued items; every supported item is legal for the lone buyer"}),
            ok: true,
        });
    };
    let lab = |x: usize| aug_label(m, d, x);
    let buyer = |i: usize| m.buyers()[d.buyer_map[i]].name.clone();
    let mut matrix = serde_json::Map::new();
    for x in 0..d.aug.num_items() {
        let legal: Vec<String> = d.legality.buyers(x).into_iter().map(buyer).collect();
        let class = d.partition.class_of(x).map(|k| k.to_string());
        matrix.insert(lab(x), json!({"legal_for": legal, "class": class}));
    }
    let pruned: Vec<String> = (0..m.num_items())
        .filter(|x| !d.item_map.contains(x))
        .map(|x| m.items()[x].clone())
        .collect();
    Ok(Outcome {
        value: json!({"opt": d.aug.opt(), "items": matrix, "pruned": pruned}),
        ok: true,
    })
}
