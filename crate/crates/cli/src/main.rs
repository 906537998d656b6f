use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use qmultiple::composite::{build_y, check_renorm_invariance};
use qmultiple::connection::{
    build_dynkin_connection, build_group_connection, check_gybe, cyclic_group,
    random_control_connection, symmetric_group_s3, ConnectionSquare,
};
use qmultiple::fusion::{
    build_bratteli, builtin_ring, check_pf, fusion_identity_check, index_report, FusionRing,
};
use qmultiple::io::{connection_to_string, read_connection, read_fusion, read_group};
use qmultiple::lattice::{LatticePath, LatticePoint};
use qmultiple::state_sum::StateSum;
use qmultiple::string_algebra::{SpanningSet, StringAlgebra};
use qmultiple::Error;

#[derive(Parser)]
#[command(
    name = "qmultiple",
    version,
    about = "Verification runs for composite biunitary connections and multiple inclusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Tolerance for every residual.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for randomized constructions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest path basis per block.
    #[arg(long, default_value_t = qmultiple::state_sum::DEFAULT_CAP)]
    cap: usize,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct Source {
    /// Connection file, or builtin:a2|a3|a4|z2|z3|s3|control.
    #[arg(long, conflicts_with = "group")]
    connection: Option<String>,
    /// Group file; the group connection is built from it.
    #[arg(long)]
    group: Option<String>,
    /// Replace the connection by its composite Y.
    #[arg(long)]
    composite: bool,
}

#[derive(Args, Clone)]
struct FusionSource {
    /// Fusion file, or builtin:trivial|z2|z3|s3|fib|su2-<k>.
    #[arg(long)]
    fusion: String,
}

#[derive(Subcommand)]
enum Command {
    /// Biunitarity of a connection.
    VerifyConnection {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        common: Common,
    },
    /// Build the composite Y and write it as a connection file.
    BuildY {
        #[command(flatten)]
        src: Source,
        /// Output file; without it the connection goes to stdout.
        #[arg(long)]
        output: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Generalized Yang-Baxter equation.
    Gybe {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        common: Common,
    },
    /// Independence of the transport from the swap sequence.
    Transport {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        paths: PathArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Singular values of the path pairing.
    Gram {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        paths: PathArgs,
        #[command(flatten)]
        common: Common,
    },
    /// The square A_n, A_{n+e_i}, A_{n+e_j}, A_{n+e_i+e_j}.
    CommutingSquare {
        #[command(flatten)]
        src: Source,
        /// Lattice point, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        /// Test every matrix unit instead of the bimodule generators.
        #[arg(long)]
        units: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Join of the corner algebras at n against n + 1.
    Multileg {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Floor j of the tower at n against n + 1.
    Floor {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// s-fusion Bratteli diagram and its Perron-Frobenius data.
    Bratteli {
        #[command(flatten)]
        fusion: FusionSource,
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Sum over s-tuples of N^Y μ against ω^{s-1} μ_Y.
    FusionIdentity {
        #[command(flatten)]
        fusion: FusionSource,
        #[arg(long)]
        s: usize,
        /// Single label; all labels by default.
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// The built-in example suite.
    Demo {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct PathArgs {
    /// Number of lattice directions.
    #[arg(long)]
    s: usize,
    /// Start word, comma separated; defaults to 0,1,..,s-1.
    #[arg(long, value_delimiter = ',')]
    from: Option<Vec<usize>>,
    /// End word; defaults to the reverse of the start word.
    #[arg(long, value_delimiter = ',')]
    to: Option<Vec<usize>>,
}

struct Report {
    check: String,
    fields: Vec<(String, Value)>,
    pass: bool,
}

impl Report {
    fn new(check: &str) -> Self {
        Report {
            check: check.into(),
            fields: Vec::new(),
            pass: true,
        }
    }

    fn field(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.fields.push((key.into(), v.into()));
        self
    }

    fn require(&mut self, ok: bool) -> &mut Self {
        self.pass &= ok;
        self
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("check".into(), self.check.clone().into());
        for (k, v) in &self.fields {
            m.insert(k.clone(), v.clone());
        }
        m.insert("pass".into(), self.pass.into());
        Value::Object(m)
    }

    fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.check);
        for (k, v) in &self.fields {
            out.push_str(&format!("  {k}: {}\n", text_value(v)));
        }
        out.push_str(&format!(
            "  result: {}\n",
            if self.pass { "pass" } else { "FAIL" }
        ));
        out
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.3e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(text_value).collect::<Vec<_>>().join(", "),
        other => other.to_string(),
    }
}

/// NaN and infinities are not JSON numbers.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn builtin_connection(name: &str, seed: u64) -> qmultiple::Result<ConnectionSquare> {
    Ok(match name {
        "a2" => build_dynkin_connection(2),
        "a3" => build_dynkin_connection(3),
        "a4" => build_dynkin_connection(4),
        "z2" => build_group_connection(&cyclic_group(2))?,
        "z3" => build_group_connection(&cyclic_group(3))?,
        "s3" => build_group_connection(&symmetric_group_s3())?,
        "control" => random_control_connection(seed)?,
        _ => {
            return Err(Error::Parse(format!(
                "unknown built-in connection `{name}`"
            )))
        }
    })
}

fn load_connection(src: &Source, common: &Common) -> qmultiple::Result<ConnectionSquare> {
    let w = match (&src.connection, &src.group) {
        (Some(c), _) => match c.strip_prefix("builtin:") {
            Some(name) => builtin_connection(name, common.seed)?,
            None => read_connection(c)?,
        },
        (None, Some(g)) => build_group_connection(&read_group(g)?)?,
        (None, None) => {
            return Err(Error::Parse(
                "one of --connection or --group is required".into(),
            ))
        }
    };
    if src.composite {
        build_y(&w)
    } else {
        Ok(w)
    }
}

fn load_fusion(f: &FusionSource) -> qmultiple::Result<FusionRing> {
    match f.fusion.strip_prefix("builtin:") {
        Some(name) => builtin_ring(name),
        None => read_fusion(&f.fusion),
    }
}

fn biunitarity(w: &ConnectionSquare, tol: f64) -> Report {
    let rep = w.check_biunitarity(tol);
    let mut r = Report::new("biunitarity");
    r.field("cells", w.cells().len())
        .field("beta", num(w.beta()))
        .field("plain", num(rep.plain))
        .field("renormalized", num(rep.renormalized))
        .field("structural", rep.structural.clone())
        .require(rep.pass());
    r
}

fn gybe(y: &ConnectionSquare, tol: f64) -> qmultiple::Result<Report> {
    let rep = check_gybe(y, tol)?;
    let mut r = Report::new("generalized Yang-Baxter equation");
    r.field("configurations", rep.configurations)
        .field("residual", num(rep.residual));
    if !rep.pass() {
        if let Some(loc) = &rep.location {
            r.field("location", loc.to_vec())
                .field("lhs", vec![num(rep.lhs.re), num(rep.lhs.im)])
                .field("rhs", vec![num(rep.rhs.re), num(rep.rhs.im)]);
        }
    }
    r.require(rep.pass());
    Ok(r)
}

fn paths(p: &PathArgs) -> qmultiple::Result<(LatticePath, LatticePath)> {
    let from = p.from.clone().unwrap_or_else(|| (0..p.s).collect());
    let to =
        p.to.clone()
            .unwrap_or_else(|| from.iter().rev().copied().collect());
    Ok((
        LatticePath::from_origin(p.s, from)?,
        LatticePath::from_origin(p.s, to)?,
    ))
}

fn transport(y: &ConnectionSquare, p: &PathArgs, common: &Common) -> qmultiple::Result<Report> {
    let ss = StateSum::new(y, common.cap)?;
    let (from, to) = paths(p)?;
    let rep = ss.check_well_defined(&from, &to, common.tol)?;
    let mut r = Report::new("transport well-definedness");
    r.field("from", from.word.clone())
        .field("to", to.word.clone())
        .field("routes", rep.routes)
        .field("residual", num(rep.residual))
        .field("unitarity", num(rep.unitarity))
        .require(rep.pass() && rep.unitarity <= common.tol);
    Ok(r)
}

fn gram(y: &ConnectionSquare, p: &PathArgs, common: &Common) -> qmultiple::Result<Report> {
    let ss = StateSum::new(y, common.cap)?;
    let (from, to) = paths(p)?;
    let rep = ss.gram_report(&from, &to, common.tol)?;
    let mut r = Report::new("path pairing");
    r.field("from", from.word.clone())
        .field("to", to.word.clone())
        .field("blocks", rep.blocks)
        .field("min singular value", num(rep.min_singular))
        .field("max singular value", num(rep.max_singular))
        .require(rep.pass());
    Ok(r)
}

fn square_report(name: &str, rep: &qmultiple::string_algebra::SquareReport) -> Report {
    let mut r = Report::new(name);
    r.field("tested", rep.tested)
        .field("residual", num(rep.residual))
        .require(rep.pass());
    r
}

fn bratteli(ring: &FusionRing, s: usize, tol: f64) -> qmultiple::Result<Report> {
    let d = build_bratteli(ring, s, qmultiple::fusion::DEFAULT_TUPLE_CAP)?;
    let pf = check_pf(&d, ring, tol);
    let idx = index_report(ring, s)?;
    let valid = ring.validate(tol);
    let mut r = Report::new("Bratteli diagram");
    r.field("s", s)
        .field("tuples", d.tuples.len())
        .field("edges", d.edge_count())
        .field("beta_L", num(pf.beta_l))
        .field("omega^((s-1)/2)", num(pf.expected))
        .field("eigen residual", num(pf.eigen_residual))
        .field("residual", num(pf.residual()))
        .field("omega", num(idx.omega))
        .field("index", num(idx.index))
        .field("irreducible", idx.irreducible)
        .field("ring violations", valid.violations.clone())
        .require(pf.pass() && valid.valid());
    Ok(r)
}

fn fusion_identity(
    ring: &FusionRing,
    s: usize,
    label: Option<&str>,
    tol: f64,
) -> qmultiple::Result<Report> {
    let labels: Vec<usize> = match label {
        Some(l) => vec![ring
            .label_index(l)
            .ok_or_else(|| Error::Parse(format!("unknown label `{l}`")))?],
        None => (0..ring.rank()).collect(),
    };
    let mut r = Report::new("fusion identity");
    r.field("s", s);
    let mut worst: f64 = 0.0;
    for y in labels {
        let res = fusion_identity_check(ring, s, y, qmultiple::fusion::DEFAULT_TUPLE_CAP)?;
        worst = worst.max(res);
        r.field(&format!("residual {}", ring.labels()[y]), num(res));
    }
    r.field("residual", num(worst)).require(worst <= tol);
    Ok(r)
}

fn demo(common: &Common) -> qmultiple::Result<Vec<Report>> {
    let tol = common.tol;
    let mut out = Vec::new();
    let cases: Vec<(&str, ConnectionSquare)> = vec![
        ("A3", build_dynkin_connection(3)),
        ("A4", build_dynkin_connection(4)),
        ("Z2", build_group_connection(&cyclic_group(2))?),
        ("Z3", build_group_connection(&cyclic_group(3))?),
        ("S3", build_group_connection(&symmetric_group_s3())?),
    ];
    for (name, w) in &cases {
        let tag = |r: Report| Report {
            check: format!("{name}: {}", r.check),
            ..r
        };
        out.push(tag(biunitarity(w, tol)));
        let y = build_y(w)?;
        let mut yb = biunitarity(&y, tol);
        yb.check = format!("composite {}", yb.check);
        out.push(tag(yb));
        let inv = check_renorm_invariance(&y, tol)?;
        let mut r = Report::new("renormalization invariance");
        r.field("horizontal", num(inv.horizontal))
            .field("vertical", num(inv.vertical))
            .field("both", num(inv.both))
            .require(inv.pass());
        out.push(tag(r));
        out.push(tag(gybe(&y, tol)?));
        out.push(tag(transport(
            &y,
            &PathArgs {
                s: 3,
                from: None,
                to: None,
            },
            common,
        )?));
        let a = StringAlgebra::new(&y, common.cap)?;
        let mut worst: f64 = 0.0;
        let mut tested = 0;
        for n in [vec![0, 0], vec![1, 0], vec![0, 1]] {
            for (i, j) in [(0, 1), (1, 0)] {
                let rep = a.check_commuting_square(
                    &LatticePoint(n.clone()),
                    i,
                    j,
                    tol,
                    SpanningSet::Generators,
                )?;
                worst = worst.max(rep.residual);
                tested += rep.tested;
            }
        }
        let mut r = Report::new("commuting squares |n| <= 1");
        r.field("tested", tested)
            .field("residual", num(worst))
            .require(worst <= tol);
        out.push(tag(r));
        out.push(tag(square_report(
            "multileg s=2 n=0",
            &a.check_multileg_square(0, 2, tol)?,
        )));
        out.push(tag(square_report(
            "flatness n=m=1",
            &a.check_flat_commutation(2, 1, 1, 0, 1, tol)?,
        )));
    }
    let control = random_control_connection(common.seed)?;
    let rep = check_gybe(&control, tol)?;
    let mut r = Report::new("control: violates the generalized Yang-Baxter equation");
    r.field("residual", num(rep.residual))
        .require(rep.residual > qmultiple::connection::CONTROL_GYBE_FLOOR);
    out.push(r);
    for name in ["trivial", "z2", "z3", "s3", "fib"] {
        let ring = builtin_ring(name)?;
        for s in [2, 3] {
            let r = bratteli(&ring, s, tol)?;
            out.push(Report {
                check: format!("{name}: {} s={s}", r.check),
                ..r
            });
        }
        let r = fusion_identity(&ring, 3, None, tol)?;
        out.push(Report {
            check: format!("{name}: {} s=3", r.check),
            ..r
        });
    }
    Ok(out)
}

fn run(cli: Cli) -> qmultiple::Result<(Vec<Report>, Option<String>, bool)> {
    let mut raw = None;
    let json;
    let reports = match cli.command {
        Command::VerifyConnection { src, common } => {
            json = common.json;
            vec![biunitarity(&load_connection(&src, &common)?, common.tol)]
        }
        Command::BuildY {
            src,
            output,
            common,
        } => {
            json = common.json;
            let w = load_connection(&src, &common)?;
            let y = build_y(&w)?;
            let mut rep = biunitarity(&y, common.tol);
            rep.check = "composite biunitarity".into();
            let inv = check_renorm_invariance(&y, common.tol)?;
            rep.field("renormalization invariance", num(inv.residual()))
                .require(inv.pass());
            let text = connection_to_string(&y)?;
            match output {
                Some(path) => {
                    std::fs::write(&path, text + "\n")?;
                    rep.field("written", path);
                }
                None => raw = Some(text),
            }
            vec![rep]
        }
        Command::Gybe { src, common } => {
            json = common.json;
            vec![gybe(&load_connection(&src, &common)?, common.tol)?]
        }
        Command::Transport { src, paths, common } => {
            json = common.json;
            vec![transport(
                &load_connection(&src, &common)?,
                &paths,
                &common,
            )?]
        }
        Command::Gram { src, paths, common } => {
            json = common.json;
            vec![gram(&load_connection(&src, &common)?, &paths, &common)?]
        }
        Command::CommutingSquare {
            src,
            n,
            i,
            j,
            units,
            common,
        } => {
            json = common.json;
            let a = StringAlgebra::new(&load_connection(&src, &common)?, common.cap)?;
            let span = if units {
                SpanningSet::MatrixUnits
            } else {
                SpanningSet::Generators
            };
            let rep = a.check_commuting_square(&LatticePoint(n.clone()), i, j, common.tol, span)?;
            let mut r = square_report("commuting square", &rep);
            r.fields.insert(0, ("n".into(), json!(n)));
            r.fields.insert(1, ("i".into(), json!(i)));
            r.fields.insert(2, ("j".into(), json!(j)));
            vec![r]
        }
        Command::Multileg { src, s, n, common } => {
            json = common.json;
            let a = StringAlgebra::new(&load_connection(&src, &common)?, common.cap)?;
            let mut r = square_report(
                "multileg commuting square",
                &a.check_multileg_square(n, s, common.tol)?,
            );
            r.fields.insert(0, ("s".into(), json!(s)));
            r.fields.insert(1, ("n".into(), json!(n)));
            vec![r]
        }
        Command::Floor {
            src,
            s,
            j,
            n,
            common,
        } => {
            json = common.json;
            let a = StringAlgebra::new(&load_connection(&src, &common)?, common.cap)?;
            let mut r = square_report(
                "floor commuting square",
                &a.check_floor_square(n, j, s, common.tol)?,
            );
            r.fields.insert(0, ("s".into(), json!(s)));
            r.fields.insert(1, ("j".into(), json!(j)));
            r.fields.insert(2, ("n".into(), json!(n)));
            vec![r]
        }
        Command::Bratteli { fusion, s, common } => {
            json = common.json;
            vec![bratteli(&load_fusion(&fusion)?, s, common.tol)?]
        }
        Command::FusionIdentity {
            fusion,
            s,
            label,
            common,
        } => {
            json = common.json;
            vec![fusion_identity(
                &load_fusion(&fusion)?,
                s,
                label.as_deref(),
                common.tol,
            )?]
        }
        Command::Demo { common } => {
            json = common.json;
            demo(&common)?
        }
    };
    Ok((reports, raw, json))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((reports, raw, json)) => {
            let pass = reports.iter().all(|r| r.pass);
            if let Some(text) = raw {
                println!("{text}");
                for r in &reports {
                    eprint!("{}", r.to_text());
                }
            } else if json {
                let v = if reports.len() == 1 {
                    reports[0].to_json()
                } else {
                    json!({ "reports": reports.iter().map(Report::to_json).collect::<Vec<_>>(), "pass": pass })
                };
                println!(
                    "{}",
                    serde_json::to_string_pretty(&v).expect("report serializes")
                );
            } else {
                for r in &reports {
                    print!("{}", r.to_text());
                }
                if reports.len() > 1 {
                    let failed = reports.iter().filter(|r| !r.pass).count();
                    println!("{} checks, {failed} failed", reports.len());
                }
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
