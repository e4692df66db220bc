//! `natord`: discriminants, certificates, lattice metrics and simulations for
//! the bundled cyclic-algebra setups.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use natord::catalog::{self, enumerate_minimality, load_catalog, Family, Setup};
use natord::cda::{verify_setup, DiscriminantReport};
use natord::mimosim::{simulate, CodebookRef, LoadedCodebook, SimConfig};
use natord::stlattice::{
    lattice_basis, lattice_metrics, min_determinant, Codebook, Constellation, LatticeMetrics, Mode, DEFAULT_PREC,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "natord", version, arg_required_else_help = true)]
#[command(about = "Natural orders of cyclic division algebras and their space-time codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Symmetric,
    Block,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Symmetric => Mode::Symmetric,
            ModeArg::Block => Mode::Block,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// List the catalog setups
    List {
        #[arg(long)]
        json: bool,
    },
    /// Recompute discriminants, bounds, certificates and lattice metrics
    Verify {
        /// setup id, or "all" (default)
        #[arg(long, default_value = "all")]
        setup: String,
        /// fail when the computed discriminant differs from the theorem value
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive minimum determinant over coordinates in {-M..M}
    Mindet {
        #[arg(long)]
        setup: String,
        #[arg(long, default_value_t = 1)]
        bound: i64,
        /// search the difference set of this constellation instead (qam4, qam16, symM)
        #[arg(long)]
        constellation: Option<String>,
        /// defaults to symmetric when L = F and block otherwise
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        json: bool,
    },
    /// Write a codebook CSV
    Export {
        #[arg(long)]
        setup: String,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "qam4")]
        constellation: String,
    },
    /// Monte Carlo codeword error rates
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search a family for the smallest discriminant bound
    Enumerate {
        #[arg(long)]
        family: String,
        #[arg(long)]
        bound: i64,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Usage(String),
    Mismatch(String),
}

type Outcome = Result<(), Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

struct Catalog {
    setups: Vec<Setup>,
    reference: Vec<Setup>,
}

impl Catalog {
    fn find(&self, id: &str) -> Result<&Setup, Failure> {
        catalog::find(&self.setups, id)
            .or_else(|| catalog::find(&self.reference, id))
            .ok_or_else(|| {
                let ids: Vec<&str> = self.setups.iter().chain(&self.reference).map(|s| s.id.as_str()).collect();
                Failure::Usage(format!("unknown setup {id:?}; known: {}", ids.join(", ")))
            })
    }
}

fn catalog_text() -> Result<(String, String), String> {
    match std::env::var_os("CDA_CATALOG") {
        Some(p) => {
            let text = fs::read_to_string(&p).map_err(|e| format!("cannot read CDA_CATALOG {}: {e}", p.to_string_lossy()))?;
            Ok((text, p.to_string_lossy().into_owned()))
        }
        None => Ok((catalog::DEFAULT_CATALOG.to_string(), "bundled".into())),
    }
}

fn load() -> Result<Catalog, Failure> {
    let (text, source) = catalog_text().map_err(Failure::Usage)?;
    let setups = load_catalog(&text).map_err(|e| Failure::Usage(format!("catalog {source}: {e}")))?;
    Ok(Catalog { setups, reference: catalog::reference_catalog() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsEntry {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<LatticeMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unavailable: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub report: DiscriminantReport,
    pub lattice: Vec<MetricsEntry>,
    pub theorem_agrees: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub tool_version: String,
    pub catalog_sha256: String,
    pub strict: bool,
    pub records: Vec<VerifyRecord>,
}

fn metrics_for(setup: &Setup) -> Vec<MetricsEntry> {
    [Mode::Symmetric, Mode::Block]
        .into_iter()
        .map(|mode| match lattice_metrics(setup, mode, DEFAULT_PREC) {
            Ok(m) => MetricsEntry { mode, metrics: Some(m), unavailable: None },
            Err(e) => MetricsEntry { mode, metrics: None, unavailable: Some(e.to_string()) },
        })
        .collect()
}

fn print_record(r: &VerifyRecord) {
    let d = &r.report;
    println!("{}  centre {}  n={} n_r={} n_t={} rate {}", d.setup, d.centre, d.n, d.n_r, d.n_t, d.rate);
    println!("  discriminant (formula)     {} = {}", d.formula, d.formula.value());
    println!("  discriminant (trace form)  {}", d.traceform);
    let flag = |a: &Option<natord::cda::Agreement>| match a {
        Some(a) if a.agrees => format!("{} (agrees)", a.claimed),
        Some(a) => format!("{} (DISAGREES, computed {})", a.claimed, d.formula),
        None => "-".into(),
    };
    println!("  table value                {}", flag(&d.table));
    println!("  theorem value              {}", flag(&d.theorem));
    println!(
        "  lower bound                {}  holds={} attained={}",
        d.bound, d.bound_holds, d.bound_attained
    );
    let lam = match (&d.lambda.printed, d.lambda.printed_matches) {
        (Some(p), Some(false)) => format!("{} (catalog value {p} differs)", d.lambda.value),
        _ => d.lambda.value.clone(),
    };
    println!("  lambda                     {lam}");
    if let Some(b) = &d.balance_d {
        println!("  balance quantity           {b}");
    }
    if let Some(c) = &d.competitor {
        println!("  competitor                 {} {} beaten={}", c.label, c.disc_norm, c.beaten);
    }
    let kinds: Vec<String> = d.division.checks.iter().map(|(p, e)| format!("p={p}: {}", e.detail)).collect();
    println!("  division algebra           {}  [{}]", d.division.is_division, kinds.join("; "));
    if let Some(u) = &d.unit_exhaustion {
        println!(
            "  unit exhaustion at {}      cannot conclude for every unit: {}",
            u.prime, u.cannot_conclude_for_every_unit
        );
    }
    for m in &r.lattice {
        match (&m.metrics, &m.unavailable) {
            (Some(x), _) => {
                let norm = x
                    .normalized
                    .as_ref()
                    .map(|n| format!("delta={:.6e} mu={:.6e} |delta-mu^(n/k)|/delta={:.1e}", n.delta, n.mu, n.identity_rel_error))
                    .unwrap_or_else(|| "delta_min unavailable".into());
                let tag = if x.degenerate_block { " (single block)" } else { "" };
                println!(
                    "  {:<9} k={} size={}{tag} nu={:.6e} (+-{:.1e}) Delta_min={} [{}] {norm} nu/|disc|={:.6}",
                    m.mode.name(),
                    x.k,
                    x.size,
                    x.nu,
                    x.nu_radius,
                    x.delta_min.map(|v| v.to_string()).unwrap_or("-".into()),
                    x.delta_min_certificate,
                    x.disc_ratio
                );
            }
            (None, Some(why)) => println!("  {:<9} not a lattice here: {why}", m.mode.name()),
            _ => {}
        }
    }
}

fn cmd_verify(cat: &Catalog, sha: &str, setup: &str, strict: bool, json: bool) -> Outcome {
    let targets: Vec<&Setup> = if setup == "all" { cat.setups.iter().collect() } else { vec![cat.find(setup)?] };
    let mut records = Vec::new();
    let mut mismatches = Vec::new();
    for s in targets {
        let report = match verify_setup(s) {
            Ok(r) => r,
            Err(natord::cda::CdaError::DiscriminantMismatch { formula, traceform }) => {
                mismatches.push(format!("{}: formula {formula} != trace form {traceform}", s.id));
                continue;
            }
            Err(e) => return Err(Failure::Usage(format!("{}: {e}", s.id))),
        };
        let theorem_agrees = report.theorem.as_ref().is_none_or(|a| a.agrees);
        if strict && !theorem_agrees {
            mismatches.push(format!(
                "{}: computed {} differs from the theorem value {}",
                s.id,
                report.formula,
                report.theorem.as_ref().unwrap().claimed
            ));
        }
        records.push(VerifyRecord { report, lattice: metrics_for(s), theorem_agrees });
    }
    let out = VerifyOutput { tool_version: VERSION.into(), catalog_sha256: sha.into(), strict, records };
    if json {
        println!("{}", serde_json::to_string_pretty(&out).map_err(usage)?);
    } else {
        for r in &out.records {
            print_record(r);
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(mismatches.join("\n")))
    }
}

fn cmd_list(cat: &Catalog, json: bool) -> Outcome {
    let rows: Vec<serde_json::Value> = cat
        .setups
        .iter()
        .chain(&cat.reference)
        .map(|s| {
            serde_json::json!({
                "id": s.id, "centre": s.base.id(), "L": s.l.id(), "E": s.e.id(),
                "n": s.n, "n_r": s.n_r, "n_t": s.n_t,
                "rate": natord::exactfield::rational_to_string(&s.rate),
                "gamma": s.gamma.to_strings(),
            })
        })
        .collect();
    if json {
        println!("{}", serde_json::to_string_pretty(&rows).map_err(usage)?);
    } else {
        println!("{:<8} {:<6} {:<6} {:<8} {:>2} {:>4} {:>4} {:>5}", "id", "centre", "L", "E", "n", "n_r", "n_t", "rate");
        for r in &rows {
            println!(
                "{:<8} {:<6} {:<6} {:<8} {:>2} {:>4} {:>4} {:>5}",
                r["id"].as_str().unwrap(),
                r["centre"].as_str().unwrap(),
                r["L"].as_str().unwrap(),
                r["E"].as_str().unwrap(),
                r["n"],
                r["n_r"],
                r["n_t"],
                r["rate"].as_str().unwrap()
            );
        }
    }
    Ok(())
}

fn cmd_mindet(cat: &Catalog, id: &str, bound: i64, constellation: Option<&str>, mode: Option<ModeArg>, json: bool) -> Outcome {
    let s = cat.find(id)?;
    if bound < 1 {
        return Err(Failure::Usage("--bound must be at least 1".into()));
    }
    let set = match constellation {
        Some(c) => Constellation::parse(c).ok_or_else(|| Failure::Usage(format!("unknown constellation {c:?}")))?.differences(),
        None => (-bound..=bound).collect(),
    };
    let mode = mode.map(Mode::from).unwrap_or(if s.n == 1 { Mode::Symmetric } else { Mode::Block });
    let basis = lattice_basis(s, mode, DEFAULT_PREC).map_err(usage)?;
    let r = min_determinant(&basis, &set).map_err(usage)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&r).map_err(usage)?);
    } else {
        println!("{} {} mode, coordinates in {:?}: {} nonzero points", r.setup, mode.name(), r.coordinate_set, r.points);
        println!("  zero reduced norms        {}", r.zero_norm_points);
        println!("  min |Nm(nr)|              {} at {:?}", r.min_abs_norm, r.min_norm_coords);
        println!("  min |det|^2 (float)       {} at {:?}", r.delta_min_float, r.delta_coords);
        if let Some(e) = &r.delta_min_exact {
            println!("  Delta_min (exact)         {e}");
        }
        if let Some(e) = r.max_float_exact_rel_err {
            println!("  float vs exact rel. error {e:.2e}");
        }
    }
    Ok(())
}

fn cmd_export(cat: &Catalog, id: &str, mode: ModeArg, out: &Path, constellation: &str) -> Outcome {
    let s = cat.find(id)?;
    let c = Constellation::parse(constellation).ok_or_else(|| Failure::Usage(format!("unknown constellation {constellation:?}")))?;
    let mode = Mode::from(mode);
    if mode == Mode::Block && s.n == 1 {
        eprintln!("note: block mode with a single block is the symmetric lattice");
    }
    if mode == Mode::Symmetric && s.n > 1 {
        eprintln!("warning: symmetric matrices of {id} are linearly dependent over R; distinct codewords may collide");
    }
    let basis = lattice_basis(s, mode, DEFAULT_PREC).map_err(usage)?;
    let cb = Codebook::new(basis, c).map_err(usage)?;
    let f = fs::File::create(out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    cb.write_csv(std::io::BufWriter::new(f)).map_err(usage)?;
    println!("wrote {} codewords ({}x{}) to {}", cb.len(), cb.basis.size, cb.basis.size, out.display());
    Ok(())
}

fn resolve_codebook(cat: &Catalog, cfg: &SimConfig, config_path: &Path) -> Result<LoadedCodebook, Failure> {
    match &cfg.codebook {
        CodebookRef::Path { path } => {
            let p = config_path.parent().unwrap_or(Path::new(".")).join(path);
            let text = fs::read_to_string(&p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            LoadedCodebook::from_csv(path, &text).map_err(usage)
        }
        CodebookRef::Setup { setup, mode, constellation } => {
            let s = cat.find(setup)?;
            let mode = Mode::parse(mode).ok_or_else(|| Failure::Usage(format!("unknown mode {mode:?}")))?;
            let c = Constellation::parse(constellation)
                .ok_or_else(|| Failure::Usage(format!("unknown constellation {constellation:?}")))?;
            let cb = Codebook::new(lattice_basis(s, mode, DEFAULT_PREC).map_err(usage)?, c).map_err(usage)?;
            LoadedCodebook::from_codebook(&cb).map_err(usage)
        }
    }
}

fn cmd_simulate(cat: &Catalog, config: &Path, out: &Path) -> Outcome {
    let text = fs::read_to_string(config).map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    let cfg: SimConfig = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    cfg.validate().map_err(usage)?;
    let cb = resolve_codebook(cat, &cfg, config)?;
    let table = simulate(&cfg, &cb).map_err(usage)?;
    fs::write(out, table.to_csv_string()).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    println!("snr_db  trials  errors  cwer");
    for r in &table.rows {
        println!("{:>6} {:>7} {:>7}  {:.3e} +- {:.1e}", r.snr_db, r.trials, r.errors, r.cwer, r.ci95_halfwidth);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_enumerate(family: &str, bound: i64, json: bool) -> Outcome {
    let fam = Family::parse(family).ok_or_else(|| Failure::Usage(format!("unknown family {family:?}; use Q-2 or Q-2-2")))?;
    let r = enumerate_minimality(fam, bound).map_err(Failure::Usage)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&r).map_err(usage)?);
        return Ok(());
    }
    println!("{:<20} {:<8} {:>10} {:>8} {:>10}  bound", "params", "case", "|disc E|", "rel", "lambda");
    for c in &r.candidates {
        println!(
            "{:<20} {:<8} {:>10} {:>8} {:>10}  {} = {}",
            format!("{:?}", c.params),
            c.case,
            c.field_disc,
            c.relative_disc,
            c.lambda,
            c.bound,
            c.bound.value()
        );
    }
    println!(
        "winner {:?} bound {} = {} (unique: {})",
        r.winner.params,
        r.winner.bound,
        r.winner.bound.value(),
        r.winner_unique
    );
    Ok(())
}

fn main() -> ExitCode {
    let (sha, source) = match catalog_text() {
        Ok((text, source)) => (format!("{:x}", Sha256::digest(text.as_bytes())), source),
        Err(e) => (format!("unavailable ({e})"), "unreadable".into()),
    };
    eprintln!("natord {VERSION} catalog={source} sha256={sha}");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = (|| -> Outcome {
        match cli.cmd {
            Cmd::Enumerate { family, bound, json } => cmd_enumerate(&family, bound, json),
            cmd => {
                let cat = load()?;
                match cmd {
                    Cmd::List { json } => cmd_list(&cat, json),
                    Cmd::Verify { setup, strict, json } => cmd_verify(&cat, &sha, &setup, strict, json),
                    Cmd::Mindet { setup, bound, constellation, mode, json } => {
                        cmd_mindet(&cat, &setup, bound, constellation.as_deref(), mode, json)
                    }
                    Cmd::Export { setup, mode, out, constellation } => cmd_export(&cat, &setup, mode, &out, &constellation),
                    Cmd::Simulate { config, out } => cmd_simulate(&cat, &config, &out),
                    Cmd::Enumerate { .. } => unreachable!(),
                }
            }
        }
    })();
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(m)) => {
            eprintln!("mismatch:\n{m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_output_round_trips() {
        let records = catalog::default_catalog()
            .iter()
            .filter_map(|s| verify_setup(s).ok().map(|report| VerifyRecord { report, lattice: metrics_for(s), theorem_agrees: true }))
            .collect();
        let out = VerifyOutput { tool_version: VERSION.into(), catalog_sha256: "x".into(), strict: false, records };
        let text = serde_json::to_string_pretty(&out).unwrap();
        let back: VerifyOutput = serde_json::from_str(&text).unwrap();
        assert_eq!(back.records.len(), 5);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    }
}
