use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use ttp_core::instances::{parse_robinx, write_robinx, FamilyKind, InstanceError, InstanceFamily};
use ttp_core::lp::{external_command_from_env, solve_external, solve_simplex, LpStatus, SolveMode, EXTERNAL_SOLVER_ENV};
use ttp_core::model::export::{export_lp, export_mps};
use ttp_core::model::{build, BuildOptions, Model};
use ttp_core::polyhedra::{run_suite, Sample, Suite, SuiteOptions};
use ttp_core::tables::{
    enumeration_optimum, format_table2, format_table3, percent, table2_line, table3_line, Column, Table3Line,
};
use ttp_core::{Instance, Rational};

#[derive(Parser)]
#[command(name = "ttp", version, about = "Traveling tournament formulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as RobinX XML.
    Gen {
        #[arg(value_enum)]
        family: FamilyArg,
        n: usize,
        /// Output file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a model, report its size and optionally export it.
    Build {
        /// Generated instance such as `circ4`, or a RobinX file.
        instance: String,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, requires = "output")]
        export: Option<ExportFormat>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve the LP relaxation.
    Lp {
        instance: String,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Float)]
        mode: ModeArg,
        /// Best known objective for the ratio; four-team instances are
        /// enumerated when omitted.
        #[arg(long)]
        best: Option<String>,
    },
    /// Optimal tournament for a four-team instance by enumeration.
    Ip4 {
        instance: String,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Exact verification of the structural claims.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Face checks per family (rows spread over the family).
        #[arg(long, default_value_t = 3)]
        sample: usize,
        /// Check every row of every family.
        #[arg(long, conflicts_with = "sample")]
        all_rows: bool,
        /// Team counts for the equation-system checks.
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 6])]
        sizes: Vec<usize>,
        /// Write the JSON summary here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Model sizes for n = 4, 6, 8, ...
    Table2 {
        #[arg(long, default_value_t = 8)]
        max_n: usize,
    },
    /// LP bounds relative to the best known solutions.
    Table3 {
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = FamilyArg::all())]
        families: Vec<FamilyArg>,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        /// Directory with RobinX files named like `NL4.xml`.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Float)]
        mode: ModeArg,
        /// Best known values for instances that cannot be enumerated, as
        /// `NAME=VALUE` (`NAME-M=VALUE` for the mirrored variant).
        #[arg(long = "best")]
        best: Vec<String>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Con,
    Circ,
    Line,
    Incr,
}

impl FamilyArg {
    fn all() -> Vec<FamilyArg> {
        vec![FamilyArg::Con, FamilyArg::Circ, FamilyArg::Line, FamilyArg::Incr]
    }

    fn kind(self) -> FamilyKind {
        match self {
            FamilyArg::Con => FamilyKind::Con,
            FamilyArg::Circ => FamilyKind::Circ,
            FamilyArg::Line => FamilyKind::Line,
            FamilyArg::Incr => FamilyKind::Incr,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Lp,
    Mps,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Float,
    Exact,
    External,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Dimension,
    Basis,
    Redundancy,
    Facets,
    #[value(alias = "face15")]
    FlowFace,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColumnArg {
    Base,
    Lifted,
    Flow,
    HomeFlow,
    HsrtFlow,
    Full,
    FullNoLifted,
    FullNoHomeFlow,
    FullNoHsrtFlow,
}

impl ColumnArg {
    fn column(self) -> Column {
        match self {
            ColumnArg::Base => Column::Base,
            ColumnArg::Lifted => Column::AddLifted,
            ColumnArg::Flow => Column::AddFlow,
            ColumnArg::HomeFlow => Column::AddHomeFlowEquations,
            ColumnArg::HsrtFlow => Column::AddHsrtFlow,
            ColumnArg::Full => Column::Full,
            ColumnArg::FullNoLifted => Column::FullWithoutLifted,
            ColumnArg::FullNoHomeFlow => Column::FullWithoutHomeFlowEquations,
            ColumnArg::FullNoHsrtFlow => Column::FullWithoutHsrtFlow,
        }
    }
}

const CUT_FLAGS: [&str; 7] =
    ["lifted", "keep_unlifted", "flow", "flow_home_venue", "home_flow", "flow_equations", "hsrt_flow"];

#[derive(Args, Clone)]
struct ModelArgs {
    /// Drop the default no-repeater and stand/trip rows.
    #[arg(long)]
    plain: bool,
    #[arg(long)]
    mirrored: bool,
    /// Longest allowed home stand / road trip (3 unless --plain).
    #[arg(long)]
    u: Option<usize>,
    #[arg(long)]
    lifted: bool,
    #[arg(long, requires = "lifted")]
    keep_unlifted: bool,
    /// Flow rows for venues other than the team's own.
    #[arg(long)]
    flow: bool,
    /// Flow rows at the team's own venue.
    #[arg(long)]
    flow_home_venue: bool,
    #[arg(long)]
    home_flow: bool,
    #[arg(long)]
    flow_equations: bool,
    #[arg(long)]
    hsrt_flow: bool,
    /// Model of a table column (replaces the flags above except --mirrored).
    #[arg(long, value_enum, conflicts_with_all = CUT_FLAGS, conflicts_with_all = ["plain", "u"])]
    column: Option<ColumnArg>,
}

impl ModelArgs {
    fn options(&self) -> BuildOptions {
        if let Some(c) = self.column {
            return c.column().options(self.mirrored);
        }
        let u = match (self.u, self.plain) {
            (Some(u), _) => Some(u),
            (None, false) => Some(3),
            (None, true) => None,
        };
        BuildOptions {
            mirrored: self.mirrored,
            no_repeaters: !self.plain,
            u,
            lifted_away_away: self.lifted,
            lifted_home_away: self.lifted,
            keep_unlifted: self.keep_unlifted,
            flow: self.flow,
            flow_home_venue: self.flow_home_venue,
            home_flow: self.home_flow,
            flow_equations: self.flow_equations,
            hsrt_flow: self.hsrt_flow,
        }
    }
}

/// Failure with its exit code: 1 verification, 2 usage, 3 solver/runtime.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, error: e.into() }
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 3, error: e.into() }
}

type CmdResult = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { family, n, output } => cmd_gen(family, n, output.as_deref()),
        Command::Build { instance, model, export, output } => cmd_build(&instance, &model, export, output.as_deref()),
        Command::Lp { instance, model, mode, best } => cmd_lp(&instance, &model, mode, best.as_deref()),
        Command::Ip4 { instance, model } => cmd_ip4(&instance, &model),
        Command::Verify { suite, sample, all_rows, sizes, json, corrupt } => {
            let sample = if all_rows { Sample::All } else { Sample::Spread(sample) };
            cmd_verify(suite, SuiteOptions { sample, equation_sizes: sizes, corrupt }, json.as_deref())
        }
        Command::Table2 { max_n } => cmd_table2(max_n),
        Command::Table3 { families, max_n, data_dir, mode, best, json } => {
            cmd_table3(&families, max_n, data_dir.as_deref(), mode, &best, json.as_deref())
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load(spec: &str) -> Result<Instance, Failure> {
    let family = InstanceFamily::parse(spec).map_err(usage)?;
    family.load().map_err(|e| match e {
        InstanceError::Io { .. } => runtime(e),
        e => usage(e),
    })
}

fn build_model(inst: &Instance, args: &ModelArgs) -> Result<(BuildOptions, Model), Failure> {
    let opts = args.options();
    let model = build(inst, &opts).map_err(usage)?;
    Ok((opts, model))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) if p == Path::new("-") => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(runtime),
    }
}

fn cmd_gen(family: FamilyArg, n: usize, output: Option<&Path>) -> CmdResult {
    let inst = family.kind().generate(n).map_err(usage)?;
    write_output(output, &write_robinx(&inst))?;
    Ok(true)
}

/// Rows contributed by each enabled cut family on top of the variant rows.
fn additions(inst: &Instance, opts: &BuildOptions) -> Result<Vec<(&'static str, i64)>, Failure> {
    let reference = BuildOptions {
        mirrored: opts.mirrored,
        no_repeaters: opts.no_repeaters,
        u: opts.u,
        ..BuildOptions::plain()
    };
    let rows = |o: &BuildOptions| build(inst, o).map(|m| m.num_constraints() as i64).map_err(usage);
    let r0 = rows(&reference)?;
    let mut out = Vec::new();
    let parts: [(&str, bool, BuildOptions); 6] = [
        (
            "lifted",
            opts.lifted_away_away,
            BuildOptions { lifted_away_away: true, lifted_home_away: true, keep_unlifted: opts.keep_unlifted, ..reference.clone() },
        ),
        ("flow", opts.flow, BuildOptions { flow: true, ..reference.clone() }),
        ("flow-home-venue", opts.flow_home_venue, BuildOptions { flow_home_venue: true, ..reference.clone() }),
        ("home-flow", opts.home_flow, BuildOptions { home_flow: true, ..reference.clone() }),
        ("flow-equations", opts.flow_equations, BuildOptions { flow_equations: true, ..reference.clone() }),
        ("hsrt-flow", opts.hsrt_flow, BuildOptions { hsrt_flow: true, ..reference.clone() }),
    ];
    for (name, on, o) in parts {
        if on {
            out.push((name, rows(&o)? - r0));
        }
    }
    Ok(out)
}

fn cmd_build(spec: &str, args: &ModelArgs, export: Option<ExportFormat>, output: Option<&Path>) -> CmdResult {
    let inst = load(spec)?;
    let (opts, model) = build_model(&inst, args)?;
    println!("instance {} (n = {})", inst.name(), inst.n());
    println!("{} variables", model.num_vars());
    println!("{} constraints", model.num_constraints());
    println!("{} nonzeros", model.num_nonzeros());
    for (name, delta) in additions(&inst, &opts)? {
        println!("{delta:+} constraints ({name})");
    }
    if let (Some(fmt), Some(path)) = (export, output) {
        let written = match fmt {
            ExportFormat::Lp => export_lp(&model, path),
            ExportFormat::Mps => export_mps(&model, path),
        };
        written.with_context(|| format!("writing {}", path.display())).map_err(runtime)?;
        println!("written to {}", path.display());
    }
    Ok(true)
}

fn parse_rational(s: &str) -> Result<Rational, Failure> {
    if let Ok(r) = s.parse::<Rational>() {
        return Ok(r);
    }
    let v: f64 = s.parse().map_err(|_| usage(anyhow!("not a number: {s:?}")))?;
    Rational::from_float(v).ok_or_else(|| usage(anyhow!("not a finite number: {s:?}")))
}

fn cmd_lp(spec: &str, args: &ModelArgs, mode: ModeArg, best: Option<&str>) -> CmdResult {
    let inst = load(spec)?;
    let (opts, model) = build_model(&inst, args)?;
    let relaxed = model.relax();
    let result = match mode {
        ModeArg::Float => solve_simplex(&relaxed, SolveMode::default()).map_err(runtime)?,
        ModeArg::Exact => solve_simplex(&relaxed, SolveMode::Exact).map_err(runtime)?,
        ModeArg::External => {
            let template = external_command_from_env()
                .ok_or_else(|| usage(anyhow!("set {EXTERNAL_SOLVER_ENV} to use --mode external")))?;
            solve_external(&relaxed, &template).map_err(runtime)?
        }
    };
    println!("instance {} ({} rows)", inst.name(), relaxed.num_constraints());
    println!("status {}", result.status);
    if result.status != LpStatus::Optimal {
        return Err(runtime(anyhow!("LP ended with status {}", result.status)));
    }
    match &result.exact_objective {
        Some(q) => println!("objective {q} (exact, {:.6})", q.to_f64().unwrap_or(f64::NAN)),
        None => println!("objective {:.9}", result.objective),
    }
    if mode != ModeArg::External {
        println!("iterations {}", result.iterations);
    }
    let best = match best {
        Some(b) => Some((parse_rational(b)?, "given")),
        None if inst.n() == 4 => Some((enumeration_optimum(&inst, &opts).map_err(runtime)?.value, "enumeration")),
        None => None,
    };
    if let Some((b, source)) = best {
        println!("best {b} ({source})");
        println!("ratio {:.1}%", percent(result.objective, &b));
    }
    Ok(true)
}

fn cmd_ip4(spec: &str, args: &ModelArgs) -> CmdResult {
    let inst = load(spec)?;
    if inst.n() != 4 {
        return Err(usage(anyhow!("ip4 needs a four-team instance, {} has {} teams", inst.name(), inst.n())));
    }
    let opts = args.options();
    opts.validate(inst.n()).map_err(usage)?;
    let best = enumeration_optimum(&inst, &opts).map_err(runtime)?;
    let t = &best.tournament;
    println!("instance {}", inst.name());
    println!("optimum {}", best.value);
    println!("feasible tournaments {}", best.feasible);
    println!("{}", t.grid());
    for team in 1..=inst.n() {
        let stops: Vec<String> = t.itinerary(team).iter().map(|v| v.to_string()).collect();
        let d = itinerary_length(&inst, &t.itinerary(team).iter().map(|v| v.get()).collect::<Vec<_>>());
        println!("team {team}: {} (distance {d})", stops.join(" -> "));
    }
    let total = t.total_distance(&inst).map_err(runtime)?;
    println!("total distance {total}");
    Ok(total == best.value)
}

fn itinerary_length(inst: &Instance, stops: &[usize]) -> Rational {
    stops.windows(2).filter(|w| w[0] != w[1]).map(|w| inst.distance(w[0], w[1]).clone()).sum()
}

fn cmd_verify(suite: SuiteArg, opts: SuiteOptions, json: Option<&Path>) -> CmdResult {
    let suite = match suite {
        SuiteArg::Dimension => Suite::Dimension,
        SuiteArg::Basis => Suite::Basis,
        SuiteArg::Redundancy => Suite::Redundancy,
        SuiteArg::Facets => Suite::Facets,
        SuiteArg::FlowFace => Suite::FlowFace,
        SuiteArg::All => Suite::All,
    };
    let report = run_suite(suite, &opts).map_err(runtime)?;
    if json.is_none_or(|p| p != Path::new("-")) {
        print!("{}", report.text());
    }
    if let Some(p) = json {
        write_output(Some(p), &format!("{}\n", report.json()))?;
    }
    Ok(report.all_pass())
}

fn cmd_table2(max_n: usize) -> CmdResult {
    if max_n < 4 {
        return Err(usage(anyhow!("--max-n must be at least 4")));
    }
    let lines = (4..=max_n).step_by(2).map(table2_line).collect::<Result<Vec<_>, _>>().map_err(runtime)?;
    print!("{}", format_table2(&lines));
    Ok(lines.iter().all(|l| l.passes()))
}

struct Table3Job {
    inst: Instance,
    class: String,
}

fn data_file(dir: &Path, name: &str) -> Option<PathBuf> {
    let entries = std::fs::read_dir(dir).ok()?;
    entries.flatten().map(|e| e.path()).find(|p| {
        p.extension().is_some_and(|x| x.eq_ignore_ascii_case("xml"))
            && p.file_stem().and_then(|s| s.to_str()).is_some_and(|s| s.eq_ignore_ascii_case(name))
    })
}

fn cmd_table3(
    families: &[FamilyArg],
    max_n: usize,
    data_dir: Option<&Path>,
    mode: ModeArg,
    best: &[String],
    json: Option<&Path>,
) -> CmdResult {
    let mode = match mode {
        ModeArg::Float => SolveMode::default(),
        ModeArg::Exact => SolveMode::Exact,
        ModeArg::External => return Err(usage(anyhow!("table3 runs the internal simplex only"))),
    };
    let mut given = Vec::new();
    for b in best {
        let (name, value) = b.split_once('=').ok_or_else(|| usage(anyhow!("--best expects NAME=VALUE, got {b:?}")))?;
        given.push((name.to_ascii_uppercase(), parse_rational(value)?));
    }
    let mut jobs = Vec::new();
    for n in (4..=max_n).step_by(2) {
        if let Some(dir) = data_dir {
            for class in ["NL", "SUP", "GAL"] {
                if let Some(path) = data_file(dir, &format!("{class}{n}")) {
                    let inst = parse_robinx(&path).map_err(usage)?;
                    jobs.push(Table3Job { inst, class: class.to_string() });
                }
            }
        }
        for f in families {
            let kind = f.kind();
            jobs.push(Table3Job { inst: kind.generate(n).map_err(usage)?, class: kind.label().to_string() });
        }
    }
    let mut lines: Vec<Table3Line> = Vec::new();
    for job in &jobs {
        for mirrored in [false, true] {
            let key = format!("{}{}", job.inst.name().to_ascii_uppercase(), if mirrored { "-M" } else { "" });
            let best = match given.iter().find(|(k, _)| *k == key) {
                Some((_, v)) => Some(v.clone()),
                None if job.inst.n() == 4 => {
                    let opts = Column::Base.options(mirrored);
                    Some(enumeration_optimum(&job.inst, &opts).map_err(runtime)?.value)
                }
                None => None,
            };
            let line = table3_line(&job.inst, Some(&job.class), mirrored, best.as_ref(), mode).map_err(runtime)?;
            lines.push(line);
        }
    }
    print!("{}", format_table3(&lines));
    let mut summary = String::new();
    let compared: Vec<bool> = lines.iter().flat_map(|l| l.cells.iter().filter_map(|c| c.pass())).collect();
    let _ = writeln!(summary, "{} of {} compared cells within tolerance", compared.iter().filter(|p| **p).count(), compared.len());
    print!("{summary}");
    if let Some(p) = json {
        let text = serde_json::to_string_pretty(&lines).map_err(runtime)?;
        write_output(Some(p), &format!("{text}\n"))?;
    }
    Ok(compared.iter().all(|p| *p))
}
