use std::ffi::OsString;
use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use cryptarg_core::af::complete_labellings;
use cryptarg_core::case::{
    build_framework, save_case, statement_status, to_json, CaseFile, ChainSource,
};
use cryptarg_core::chain::{parse_chain_file, validate_set, FindingKind, ValidationReport};
use cryptarg_core::scheme::catalog;
use cryptarg_core::{
    Answer, CaseSession, EvalOptions, Evaluation, Label, Labelling, TransactionSet,
};

use crate::output::table;
use crate::server::{self, ServeOptions};
use crate::store::{valid_case_id, CaseStore};
use crate::views::{cluster_view, cq_rows, CaseSummary, ClusterView, CqFilter, CqRow};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cryptarg",
    version,
    about = "Argument-based reasoning over cryptocurrency transaction evidence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create a case file from a chain file.
    Ingest(IngestArgs),
    /// Check a chain for negative fees, dangling outpoints and double spends.
    Validate(ValidateArgs),
    /// Multi-input address clusters with merge provenance.
    Cluster(ClusterArgs),
    /// Instantiate clustering schemes wherever the chain supports them.
    AutoArgs(CaseArg),
    /// List or answer critical questions.
    #[command(subcommand)]
    Cq(CqCommand),
    /// Label every argument and argued statement.
    Evaluate(EvaluateArgs),
    /// Suspicion report.
    Report(ReportArgs),
    /// Run the HTTP API over a directory of case files.
    Serve(ServeArgs),
    /// Write the argumentation framework.
    ExportAf(ExportArgs),
    /// Summaries of the cases in a directory.
    Cases(CasesArgs),
    /// Print a case file.
    Show(CaseArg),
    /// List the arguments of a case.
    Arguments(FormatArgs),
    /// The scheme catalog.
    Schemes(SchemesArgs),
}

#[derive(Debug, Subcommand)]
enum CqCommand {
    List(CqListArgs),
    Answer(CqAnswerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Md,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AfFormat {
    Apx,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Semantics {
    Grounded,
    Complete,
}

#[derive(Debug, Args)]
struct CaseArg {
    #[arg(long, value_name = "CASE")]
    case: PathBuf,
}

#[derive(Debug, Args)]
struct EvalFlags {
    /// Open assumption questions do not count against their argument.
    #[arg(long)]
    lenient: bool,
}

impl EvalFlags {
    fn options(&self) -> EvalOptions {
        EvalOptions {
            open_assumptions_attack: !self.lenient,
        }
    }
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long, value_name = "FILE")]
    chain: PathBuf,
    #[arg(long, value_name = "CASE")]
    out: PathBuf,
    /// Defaults to the file stem of --out.
    #[arg(long)]
    case_id: Option<String>,
    #[arg(long, default_value = "")]
    title: String,
    /// Reference the chain file by path instead of embedding it.
    #[arg(long)]
    link: bool,
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
struct SourceArgs {
    #[arg(long, value_name = "CASE", group = "source")]
    case: Option<PathBuf>,
    #[arg(long, value_name = "FILE", group = "source")]
    chain: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long, value_name = "CASE")]
    case: PathBuf,
    /// Also merge the inputs of transactions flagged as CoinJoin.
    #[arg(long)]
    no_coinjoin_filter: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct CqListArgs {
    #[arg(long, value_name = "CASE")]
    case: PathBuf,
    #[arg(long, value_enum, default_value = "open")]
    status: CqFilter,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct CqAnswerArgs {
    #[arg(long, value_name = "CASE")]
    case: PathBuf,
    #[arg(long = "arg", value_name = "ARG")]
    arg_id: String,
    #[arg(long = "cq", value_name = "CQ")]
    cq_id: String,
    #[arg(long, value_parser = parse_answer)]
    answer: Answer,
    #[arg(long, value_name = "TEXT", default_value = "")]
    why: String,
    #[command(flatten)]
    eval: EvalFlags,
}

fn parse_answer(s: &str) -> Result<Answer, String> {
    s.parse()
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long, value_name = "CASE")]
    case: PathBuf,
    #[arg(long, value_enum, default_value = "grounded")]
    semantics: Semantics,
    #[command(flatten)]
    eval: EvalFlags,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long, value_name = "CASE")]
    case: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    format: ReportFormat,
    #[command(flatten)]
    eval: EvalFlags,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, value_name = "DIR")]
    case_dir: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Static files served at `/`.
    #[arg(long, value_name = "DIR")]
    ui_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long, value_name = "CASE")]
    case: PathBuf,
    #[arg(long, value_enum, default_value = "apx")]
    format: AfFormat,
    #[command(flatten)]
    eval: EvalFlags,
}

#[derive(Debug, Args)]
struct CasesArgs {
    #[arg(long, value_name = "DIR")]
    case_dir: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct FormatArgs {
    #[arg(long, value_name = "CASE")]
    case: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct SchemesArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// Names of all subcommands, including nested ones as `parent child`.
pub fn subcommand_names() -> Vec<String> {
    use clap::CommandFactory;
    let cmd = Cli::command();
    let mut names = Vec::new();
    for sub in cmd.get_subcommands() {
        names.push(sub.get_name().to_owned());
        for nested in sub.get_subcommands() {
            names.push(format!("{} {}", sub.get_name(), nested.get_name()));
        }
    }
    names
}

/// Parses `argv` (program name first) and runs one command. Machine output
/// goes to `out`, diagnostics to `err`. Returns the process exit code:
/// 0 on success, 1 on a domain error, 2 on a usage error.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = if color {
                e.render().ansi().to_string()
            } else {
                e.render().to_string()
            };
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, out, err, color) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(
    cmd: Command,
    out: &mut dyn Write,
    err: &mut dyn Write,
    color: bool,
) -> Result<(), CliError> {
    match cmd {
        Command::Ingest(a) => ingest(a, out, err),
        Command::Validate(a) => validate(a, out),
        Command::Cluster(a) => cluster(a, out),
        Command::AutoArgs(a) => auto_args(a, out),
        Command::Cq(CqCommand::List(a)) => cq_list(a, out),
        Command::Cq(CqCommand::Answer(a)) => cq_answer(a, out, color),
        Command::Evaluate(a) => evaluate(a, out, color),
        Command::Report(a) => report(a, out),
        Command::Serve(a) => serve(a, err),
        Command::ExportAf(a) => export_af(a, out),
        Command::Cases(a) => cases(a, out, err),
        Command::Show(a) => {
            let case = open(&a.case)?.into_case();
            emit(out, &to_json(&case))
        }
        Command::Arguments(a) => arguments(a, out),
        Command::Schemes(a) => schemes(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(CliError::Output)
}

fn json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    emit(out, &s)
}

fn open(path: &Path) -> Result<CaseSession, CliError> {
    Ok(CaseSession::open(path)?)
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn ingest(a: IngestArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let raw = read(&a.chain)?;
    let ts = parse_chain_file(&raw)?;
    let case_id = match a.case_id {
        Some(id) => id,
        None => a
            .out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    if !valid_case_id(&case_id) {
        return Err(CliError::Invalid(format!(
            "case id `{case_id}` may only contain letters, digits, `-`, `_` and `.`"
        )));
    }
    if a.out.exists() && !a.force {
        return Err(CliError::Invalid(format!(
            "{} already exists (use --force to overwrite)",
            a.out.display()
        )));
    }
    let source = if a.link {
        let abs = std::fs::canonicalize(&a.chain).map_err(|source| CliError::Io {
            path: a.chain.display().to_string(),
            source,
        })?;
        ChainSource::Path(abs.display().to_string())
    } else {
        ChainSource::Embedded(ts.to_chain_file())
    };
    let mut case = CaseFile::new(case_id, source);
    case.title = a.title;
    save_case(&case, &a.out)?;
    let report = validate_set(&ts);
    if !report.is_valid() {
        let _ = writeln!(
            err,
            "warning: chain has {} validation finding(s); run `validate` for details",
            report.findings.len()
        );
    }
    emit(
        out,
        &format!(
            "case {}: {} transactions, {} addresses -> {}\n",
            case.case_id,
            ts.len(),
            ts.addresses().count(),
            a.out.display()
        ),
    )
}

fn validation_text(report: &ValidationReport) -> String {
    let mut rows = vec![(None, vec!["TXID".to_owned(), "FEE".to_owned()])];
    for f in &report.fees {
        let fee = f.fee.map(|v| v.to_string()).unwrap_or_else(|| "?".into());
        rows.push((None, vec![f.txid.clone(), fee]));
    }
    let mut s = table(&rows, false);
    s.push('\n');
    if report.findings.is_empty() {
        s.push_str("findings: none\n");
    } else {
        s.push_str("findings:\n");
        for f in &report.findings {
            let what = match &f.kind {
                FindingKind::NegativeFee { fee } => format!("negative fee {fee}"),
                FindingKind::DanglingOutpoint { outpoint } => {
                    format!("dangling outpoint {outpoint}")
                }
                FindingKind::DoubleSpend {
                    outpoint,
                    first_spender,
                } => format!("double spend of {outpoint}, first spent by {first_spender}"),
            };
            s.push_str(&format!("  {}: {what}\n", f.txid));
        }
    }
    s.push_str(&format!(
        "minted {} = fees {} + unspent {}: {}\n",
        report.coinbase_total,
        report.fee_total,
        report.unspent_total,
        if report.value_conserved() {
            "yes"
        } else {
            "no"
        }
    ));
    s
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ts: TransactionSet = match (a.source.case, a.source.chain) {
        (Some(case), _) => {
            let mut s = open(&case)?;
            s.transactions()?.clone()
        }
        (None, Some(chain)) => parse_chain_file(&read(&chain)?)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let report = validate_set(&ts);
    match a.format {
        Format::Json => json(out, &report)?,
        Format::Text => emit(out, &validation_text(&report))?,
    }
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Findings(report.findings.len()))
    }
}

fn cluster_text(view: &ClusterView) -> String {
    let p = &view.partition;
    let mut s = format!(
        "coinjoin filter: {}\nclusters: {}\n",
        if view.coinjoin_filter { "on" } else { "off" },
        p.len()
    );
    for (i, c) in p.clusters.iter().enumerate() {
        s.push_str(&format!("[{}] {}\n", i + 1, c.join(" ")));
        for m in p.merges_for(&c[0]) {
            s.push_str(&format!(
                "    {} joins {} and {}\n",
                m.txid, m.left, m.right
            ));
        }
    }
    if !view.coinjoins.is_empty() {
        s.push_str("coinjoin transactions:\n");
        for cj in &view.coinjoins {
            s.push_str(&format!("  {}: {}\n", cj.txid, cj.reason));
        }
    }
    s
}

fn cluster(a: ClusterArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut session = open(&a.case)?;
    let mut params = session.case().heuristics;
    if a.no_coinjoin_filter {
        params.apply_coinjoin_filter = false;
    }
    let view = cluster_view(session.transactions()?, &params);
    match a.format {
        Format::Json => json(out, &view),
        Format::Text => emit(out, &cluster_text(&view)),
    }
}

fn auto_args(a: CaseArg, out: &mut dyn Write) -> Result<(), CliError> {
    let mut session = open(&a.case)?;
    let created = session.auto_instantiate()?;
    if !created.is_empty() {
        session.save(&a.case)?;
    }
    if created.is_empty() {
        return emit(out, "no new arguments\n");
    }
    let rows: Vec<_> = created
        .iter()
        .map(|arg| {
            (
                None,
                vec![
                    arg.arg_id.clone(),
                    arg.scheme_id.clone(),
                    arg.conclusion.to_string(),
                ],
            )
        })
        .collect();
    emit(out, &table(&rows, false))
}

fn cq_text(rows: &[CqRow]) -> String {
    if rows.is_empty() {
        return "no matching questions\n".into();
    }
    let mut s = String::new();
    for r in rows {
        s.push_str(&format!(
            "{} {} [{}, {}] {}\n",
            r.arg_id, r.cq_id, r.kind, r.status, r.text
        ));
        if !r.justification.is_empty() {
            s.push_str(&format!("    because: {}\n", r.justification));
        }
    }
    s
}

fn cq_list(a: CqListArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let session = open(&a.case)?;
    let rows = cq_rows(session.case(), a.status);
    match a.format {
        Format::Json => json(out, &rows),
        Format::Text => emit(out, &cq_text(&rows)),
    }
}

fn cq_answer(a: CqAnswerArgs, out: &mut dyn Write, color: bool) -> Result<(), CliError> {
    let mut session = open(&a.case)?;
    session.set_options(a.eval.options());
    session.answer_cq(&a.arg_id, &a.cq_id, a.answer, &a.why)?;
    session.save(&a.case)?;
    let eval = session.evaluation().clone();
    emit(out, &evaluation_text(session.case(), &eval, color))
}

fn statement_rows(case: &CaseFile, labelling: &Labelling) -> Vec<(Option<Label>, Vec<String>)> {
    let mut rows = vec![(
        None,
        vec!["STATUS".into(), "STATEMENT".into(), "ARGUMENTS".into()],
    )];
    for s in case.argued_statements() {
        let status = statement_status(case, labelling, s);
        let args: Vec<&str> = case
            .arguments
            .iter()
            .filter(|a| &a.conclusion == s)
            .map(|a| a.arg_id.as_str())
            .collect();
        rows.push((
            Some(status),
            vec![status.to_string(), s.to_string(), args.join(",")],
        ));
    }
    rows
}

fn evaluation_text(case: &CaseFile, eval: &Evaluation, color: bool) -> String {
    let mut s = table(&statement_rows(case, &eval.labelling), color);
    s.push('\n');
    let mut rows = vec![(
        None,
        vec!["LABEL".into(), "NODE".into(), "SCHEME OR QUESTION".into()],
    )];
    for node in &eval.framework.nodes {
        let label = eval.labelling.get(&node.id).unwrap_or(Label::Undec);
        let what = match &node.kind {
            cryptarg_core::af::NodeKind::Argument => case
                .argument(&node.id)
                .map(|a| a.scheme_id.clone())
                .unwrap_or_default(),
            cryptarg_core::af::NodeKind::Objection { arg_id, cq_id } => {
                format!("{cq_id} against {arg_id}")
            }
        };
        rows.push((Some(label), vec![label.to_string(), node.id.clone(), what]));
    }
    s.push_str(&table(&rows, color));
    s
}

fn evaluate(a: EvaluateArgs, out: &mut dyn Write, color: bool) -> Result<(), CliError> {
    let mut session = open(&a.case)?;
    session.set_options(a.eval.options());
    match a.semantics {
        Semantics::Grounded => {
            let eval = session.evaluation().clone();
            match a.format {
                Format::Json => json(out, &eval),
                Format::Text => emit(out, &evaluation_text(session.case(), &eval, color)),
            }
        }
        Semantics::Complete => {
            let af = build_framework(session.case(), &a.eval.options());
            let all = complete_labellings(&af)?;
            match a.format {
                Format::Json => json(out, &all),
                Format::Text => {
                    let mut s = format!("{} complete labelling(s)\n", all.len());
                    for (i, l) in all.iter().enumerate() {
                        s.push_str(&format!("\nlabelling {}\n", i + 1));
                        s.push_str(&table(&statement_rows(session.case(), l), color));
                    }
                    emit(out, &s)
                }
            }
        }
    }
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut session = open(&a.case)?;
    session.set_options(a.eval.options());
    let report = session.report()?;
    match a.format {
        ReportFormat::Md => emit(out, &report.to_markdown()),
        ReportFormat::Json => emit(out, &report.to_json()),
    }
}

fn export_af(a: ExportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let session = open(&a.case)?;
    let af = build_framework(session.case(), &a.eval.options());
    match a.format {
        AfFormat::Apx => emit(out, &af.to_apx()),
        AfFormat::Json => json(out, &af),
    }
}

fn cases(a: CasesArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (good, bad) = CaseStore::new(&a.case_dir).list()?;
    for (file, e) in &bad {
        let _ = writeln!(err, "warning: skipping {file}: {e}");
    }
    match a.format {
        Format::Json => json(out, &good),
        Format::Text => {
            let mut rows = vec![(
                None,
                vec![
                    "CASE".into(),
                    "ARGUMENTS".into(),
                    "OPEN CQS".into(),
                    "TITLE".into(),
                ],
            )];
            rows.extend(good.iter().map(|c: &CaseSummary| {
                (
                    None,
                    vec![
                        c.case_id.clone(),
                        c.arguments.to_string(),
                        c.open_cqs.to_string(),
                        c.title.clone(),
                    ],
                )
            }));
            emit(out, &table(&rows, false))
        }
    }
}

fn arguments(a: FormatArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let case = open(&a.case)?.into_case();
    match a.format {
        Format::Json => json(out, &case.arguments),
        Format::Text => {
            let mut s = String::new();
            for arg in &case.arguments {
                s.push_str(&format!("{} ({})\n", arg.arg_id, arg.scheme_id));
                for (k, v) in &arg.bindings {
                    s.push_str(&format!("  {k} = {v}\n"));
                }
                for (p, sup) in arg.premises.iter().zip(&arg.premise_support) {
                    s.push_str(&format!("  premise {p}  <- {sup}\n"));
                }
                s.push_str(&format!("  => {}\n", arg.conclusion));
            }
            emit(out, &s)
        }
    }
}

fn schemes(a: SchemesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    match a.format {
        Format::Json => json(out, &catalog()),
        Format::Text => {
            let rows: Vec<_> = catalog()
                .iter()
                .map(|s| (None, vec![s.scheme_id.clone(), s.name.clone()]))
                .collect();
            emit(out, &table(&rows, false))
        }
    }
}

fn serve(a: ServeArgs, err: &mut dyn Write) -> Result<(), CliError> {
    if !a.case_dir.is_dir() {
        return Err(CliError::Invalid(format!(
            "{} is not a directory",
            a.case_dir.display()
        )));
    }
    let opts = ServeOptions {
        case_dir: a.case_dir,
        host: a.host,
        port: a.port,
        ui_dir: a.ui_dir,
        write_timeout: server::DEFAULT_WRITE_TIMEOUT,
    };
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(CliError::Output)?;
    rt.block_on(async {
        let listener = server::bind(&opts).await?;
        let addr = listener.local_addr().map_err(CliError::Output)?;
        let _ = writeln!(err, "serving {} on http://{addr}", opts.case_dir.display());
        server::serve(listener, &opts).await
    })
}
