//! Command-line front end. Every command writes one pretty-printed JSON
//! document (or CSV for `sweep --table -`) followed by a newline.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geography;
use crate::lattice::{self, HomClass, IntLattice};
use crate::ledger::{EmbeddedSurface, ManifoldLedger, SurfaceKind};
use crate::report::{Check, Report};
use crate::sw::{self, FilterMode};
use crate::verify;

pub const SCHEMA_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_CONSISTENCY: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

const SAFE_INTEGER: i64 = 1 << 53;

/// An integer that serializes as a JSON number when it fits in 53 bits and
/// as a decimal string otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JsonInt(pub i64);

impl Serialize for JsonInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.unsigned_abs() > SAFE_INTEGER as u64 {
            s.serialize_str(&self.0.to_string())
        } else {
            s.serialize_i64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(JsonInt(v)),
            Raw::Str(s) => s.parse().map(JsonInt).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDocument {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    pub genus: JsonInt,
    pub self_int: JsonInt,
    pub symplectic: bool,
    pub kind: SurfaceKind,
    pub complement_simply_connected: Option<bool>,
}

impl From<&EmbeddedSurface> for SurfaceDocument {
    fn from(s: &EmbeddedSurface) -> Self {
        SurfaceDocument {
            label: s.label.clone(),
            class: s.cls.as_ref().map(ToString::to_string),
            genus: JsonInt(s.genus),
            self_int: JsonInt(s.self_int),
            symplectic: s.symplectic,
            kind: s.kind,
            complement_simply_connected: s.complement_simply_connected,
        }
    }
}

/// The serialized form of a manifold ledger together with the checks that
/// produced it. `provenance[0]` is the command that regenerates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerDocument {
    pub schema_version: String,
    pub name: String,
    pub e: JsonInt,
    pub sign: JsonInt,
    pub b_plus: JsonInt,
    pub b_minus: JsonInt,
    pub chi_h: JsonInt,
    pub c1_sq: JsonInt,
    pub simply_connected: Option<bool>,
    pub symplectic: bool,
    pub surfaces: Vec<SurfaceDocument>,
    pub provenance: Vec<String>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub data: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

const COMMAND_PREFIX: &str = "command: ";

impl LedgerDocument {
    pub fn new(command: &str, m: &ManifoldLedger, report: Report) -> Self {
        let mut provenance = vec![format!("{COMMAND_PREFIX}{command}")];
        provenance.extend(m.provenance().iter().cloned());
        LedgerDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            name: m.name().to_string(),
            e: JsonInt(m.e()),
            sign: JsonInt(m.sign()),
            b_plus: JsonInt(m.b_plus()),
            b_minus: JsonInt(m.b_minus()),
            chi_h: JsonInt(m.chi_h()),
            c1_sq: JsonInt(m.c1sq()),
            simply_connected: m.simply_connected(),
            symplectic: m.symplectic(),
            surfaces: m.surfaces().iter().map(SurfaceDocument::from).collect(),
            provenance,
            checks: report.checks,
            data: report.data,
            generated_at: None,
        }
    }

    pub fn command(&self) -> Option<&str> {
        self.provenance.first()?.strip_prefix(COMMAND_PREFIX)
    }

    /// Checks the ledger identities on the stored numbers, then reruns the
    /// originating command and compares everything but the timestamp.
    pub fn revalidate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::precondition(format!(
                "unsupported schema_version {:?}",
                self.schema_version
            )));
        }
        if self.checks.is_empty() {
            return Err(Error::consistency("document has no checks"));
        }
        let m = crate::ledger::make_ledger(&self.name, self.e.0, self.sign.0, Default::default())?;
        let stored = (self.b_plus.0, self.b_minus.0, self.chi_h.0, self.c1_sq.0);
        if stored != (m.b_plus(), m.b_minus(), m.chi_h(), m.c1sq()) {
            return Err(Error::consistency(format!(
                "{}: stored (b+, b-, chi_h, c1^2) = {stored:?} violates the ledger identities",
                self.name
            )));
        }
        let command = self
            .command()
            .ok_or_else(|| Error::precondition("provenance does not start with a command"))?;
        let args = command.split_whitespace().map(str::to_string);
        let cli = Cli::try_parse_from(std::iter::once("blowdown-lab".to_string()).chain(args))
            .map_err(|e| Error::precondition(format!("stored command does not parse: {}", e.kind())))?;
        let Command::Construct { what } = cli.command else {
            return Err(Error::precondition("stored command is not a construction"));
        };
        let mut fresh = construct(&what)?;
        fresh.generated_at = self.generated_at;
        if fresh.checks != self.checks {
            return Err(Error::consistency(format!("{}: checks differ on rerun", self.name)));
        }
        if &fresh != self {
            return Err(Error::consistency(format!("{}: document differs on rerun", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct ReportDocument<'a> {
    schema_version: &'a str,
    command: String,
    title: String,
    checks: Vec<Check>,
    data: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
}

#[derive(Debug, Parser)]
#[command(name = "blowdown-lab", version, about = "Exact bookkeeping for rational blowdowns and fiber sums of 4-manifolds")]
pub struct Cli {
    /// Add a generation timestamp (seconds since the epoch) to documents.
    #[arg(long, global = true)]
    pub timestamps: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a manifold and emit its ledger document.
    Construct {
        #[command(subcommand)]
        what: ConstructCmd,
    },
    /// Run a verifier and emit its check report.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// List the basic classes of E(x) blown up k times, optionally filtered
    /// through the rational blowdown of C_{x+2k-2}.
    BasicClasses {
        #[arg(long, allow_negative_numbers = true)]
        x: i64,
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        #[arg(long)]
        filter: bool,
    },
    /// Recipe realizing (chi_h, c1^2) = (x, c), executed and checked.
    Geography {
        #[arg(long, allow_negative_numbers = true)]
        x: i64,
        #[arg(long, allow_negative_numbers = true)]
        c: i64,
    },
    /// Cover every lattice point of the region up to x_max.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        x_max: i64,
        /// Write an SVG scatter of the region.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the coverage table as CSV; `-` sends it to stdout instead of
        /// the JSON summary.
        #[arg(long)]
        table: Option<String>,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 600)]
        height: u32,
    },
    /// Exact utilities on a lattice described by a JSON file.
    Lattice {
        #[command(subcommand)]
        op: LatticeCmd,
    },
    /// Re-read a ledger document and rerun its command.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum ConstructCmd {
    /// R(2p-3) fiber summed with S(p).
    Xp {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
    },
    /// R(2p-4) fiber summed with S'(p).
    XpPrime {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
    },
    /// X_p (or X'_p with --odd) with k further C_2 blowdowns.
    Xpk {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        #[arg(long)]
        odd: bool,
    },
    /// E(x) blown up k times with C_{x+2k-2} blown down.
    Z {
        #[arg(long, allow_negative_numbers = true)]
        x: i64,
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
    },
}

impl ConstructCmd {
    fn canonical(&self) -> String {
        match self {
            ConstructCmd::Xp { p } => format!("construct xp --p {p}"),
            ConstructCmd::XpPrime { p } => format!("construct xp-prime --p {p}"),
            ConstructCmd::Xpk { p, k, odd: false } => format!("construct xpk --p {p} --k {k}"),
            ConstructCmd::Xpk { p, k, odd: true } => format!("construct xpk --p {p} --k {k} --odd"),
            ConstructCmd::Z { x, k } => format!("construct z --x {x} --k {k}"),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Check the C_{2p-6} configuration in R(2p-3) and the image of Sigma after blowing down
    PropP {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
    },
    /// Same check for the C_{2p-8} configuration in R(2p-4)
    PropPPrime {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
    },
    /// Solve for the square-zero horizontal fiber of R(q+1) and compare with Sigma
    HorizontalFiber {
        #[arg(long, allow_negative_numbers = true)]
        q: i64,
    },
    /// Compare E(x) built directly with E(x) built as a fiber sum
    EFibersum {
        #[arg(long, allow_negative_numbers = true)]
        x: i64,
    },
}

#[derive(Debug, Subcommand)]
pub enum LatticeCmd {
    /// Pairing of the two listed classes.
    Pair {
        #[arg(long)]
        input: PathBuf,
    },
    /// Square of every listed class.
    Square {
        #[arg(long)]
        input: PathBuf,
    },
    /// Integral basis of the orthogonal complement of the listed classes.
    Complement {
        #[arg(long)]
        input: PathBuf,
    },
    /// Gram matrix of the listed classes (or of the lattice if none).
    Gram {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Deserialize)]
struct LatticeInput {
    labels: Vec<String>,
    gram: Vec<Vec<i64>>,
    #[serde(default)]
    classes: Vec<ClassInput>,
}

#[derive(Debug, Deserialize)]
struct ClassInput {
    coeffs: Vec<i64>,
}

fn usize_arg(v: i64, name: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::precondition(format!("{name} ≥ 0 fails: {name} = {v}")))
}

fn construct(cmd: &ConstructCmd) -> Result<LedgerDocument> {
    let (m, rep) = match *cmd {
        ConstructCmd::Xp { p } => geography::construct_xp(p)?,
        ConstructCmd::XpPrime { p } => geography::construct_xp_prime(p)?,
        ConstructCmd::Xpk { p, k, odd } => geography::construct_xpk(p, k, odd)?,
        ConstructCmd::Z { x, k } => geography::construct_z(x, k)?,
    };
    Ok(LedgerDocument::new(&cmd.canonical(), &m, rep))
}

fn report_document(command: String, rep: Report) -> ReportDocument<'static> {
    ReportDocument {
        schema_version: SCHEMA_VERSION,
        command,
        title: rep.title,
        checks: rep.checks,
        data: rep.data,
        generated_at: None,
    }
}

fn class_strings(set: &sw::BasicClassSet) -> Vec<String> {
    set.iter().map(|b| b.to_string()).collect()
}

fn basic_classes(x: i64, k: i64, filter: bool) -> Result<Value> {
    let k = usize_arg(k, "k")?;
    let base = sw::blowup_formula(&sw::basic_classes_e(x)?, k)?;
    let listed = base.len() <= sw::EXPLICIT_LIMIT;
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": format!("basic-classes --x {x} --k {k}{}", if filter { " --filter" } else { "" }),
        "manifold": base.manifold(),
        "count": JsonInt(i64::try_from(base.len()).unwrap_or(i64::MAX)),
        "negation_closed": base.is_negation_closed(),
    });
    if listed {
        doc["classes"] = json!(class_strings(&base));
    }
    if filter {
        let config = sw::config_in_e_blowup(x, k)?;
        let outcome = sw::taut_filter_with(&base, &config, FilterMode::Auto)?;
        doc["filter"] = json!({
            "configuration": format!("C_{}", config.n()),
            "mode": outcome.mode,
            "checked": JsonInt(i64::try_from(outcome.checked).unwrap_or(i64::MAX)),
            "max_pairing": outcome.max_pairing,
            "survivors": class_strings(&outcome.survivors),
        });
    }
    Ok(doc)
}

#[derive(Debug, Serialize)]
struct GeographyDocument {
    schema_version: &'static str,
    command: String,
    x: i64,
    c: i64,
    recipe: geography::Recipe,
    alternative: Option<geography::Recipe>,
    result: LedgerDocument,
}

fn geography_point(x: i64, c: i64) -> Result<GeographyDocument> {
    let plan = geography::geography_recipe(x, c)?;
    let (m, rep) = plan.recipe.execute()?;
    let command = format!("geography --x {x} --c {c}");
    let result = LedgerDocument::new(&command, &m, rep);
    Ok(GeographyDocument {
        schema_version: SCHEMA_VERSION,
        command,
        x,
        c,
        recipe: plan.recipe,
        alternative: plan.alternative,
        result,
    })
}

/// The coverage table as CSV, header first.
pub fn sweep_csv(rows: &[geography::SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::precondition(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::precondition(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::precondition(format!("csv: {e}")))
}

fn read_lattice(path: &Path) -> Result<(std::sync::Arc<IntLattice>, Vec<HomClass>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::precondition(format!("cannot read {}: {e}", path.display())))?;
    let input: LatticeInput = serde_json::from_str(&text)
        .map_err(|e| Error::precondition(format!("{}: {e}", path.display())))?;
    let lat = IntLattice::new(input.labels, input.gram)?;
    let classes = input
        .classes
        .into_iter()
        .map(|c| lat.from_coeffs(c.coeffs))
        .collect::<Result<Vec<_>>>()?;
    Ok((lat, classes))
}

fn lattice_op(op: &LatticeCmd) -> Result<Value> {
    match op {
        LatticeCmd::Pair { input } => {
            let (_, cls) = read_lattice(input)?;
            let [a, b] = cls.as_slice() else {
                return Err(Error::precondition(format!("pair needs exactly 2 classes, got {}", cls.len())));
            };
            Ok(json!({
                "classes": [a.to_string(), b.to_string()],
                "pair": JsonInt(lattice::pair(a, b)?),
            }))
        }
        LatticeCmd::Square { input } => {
            let (_, cls) = read_lattice(input)?;
            let squares = cls
                .iter()
                .map(|c| Ok(json!({"class": c.to_string(), "square": JsonInt(c.square()?)})))
                .collect::<Result<Vec<_>>>()?;
            Ok(json!({ "squares": squares }))
        }
        LatticeCmd::Complement { input } => {
            let (lat, cls) = read_lattice(input)?;
            let basis = lattice::orthogonal_complement(&lat, &cls)?;
            let gram = lattice::gram_of(&basis)?;
            Ok(json!({
                "basis": basis
                    .iter()
                    .map(|b| json!({"class": b.to_string(), "coeffs": b.coeffs()}))
                    .collect::<Vec<_>>(),
                "gram": gram,
            }))
        }
        LatticeCmd::Gram { input } => {
            let (lat, cls) = read_lattice(input)?;
            let sub = if cls.is_empty() { lat } else { IntLattice::spanned_by(&cls, None)? };
            let (pos, neg, zero) = sub.inertia();
            Ok(json!({
                "gram": sub.gram(),
                "inertia": {"positive": pos, "negative": neg, "zero": zero},
                "determinant": sub.determinant().to_string(),
            }))
        }
    }
}

fn now_secs() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}

fn stamp(v: &mut Value, timestamps: bool) {
    if timestamps {
        if let Some(obj) = v.as_object_mut() {
            obj.insert("generated_at".into(), json!(now_secs()));
        }
    }
}

/// Text for stdout plus whether every check passed.
fn execute(cli: &Cli) -> Result<(String, bool)> {
    let ts = cli.timestamps.then(now_secs);
    match &cli.command {
        Command::Construct { what } => {
            let mut doc = construct(what)?;
            doc.generated_at = ts;
            let ok = doc.checks.iter().all(|c| c.status != crate::report::CheckStatus::Failed);
            Ok((to_json(&doc), ok))
        }
        Command::Verify { what } => {
            let (command, rep) = match *what {
                VerifyCmd::PropP { p } => (format!("verify prop-p --p {p}"), verify::verify_prop_p(p)?),
                VerifyCmd::PropPPrime { p } => (format!("verify prop-p-prime --p {p}"), verify::verify_prop_p_prime(p)?),
                VerifyCmd::HorizontalFiber { q } => {
                    (format!("verify horizontal-fiber --q {q}"), verify::verify_horizontal_fiber(q)?)
                }
                VerifyCmd::EFibersum { x } => (format!("verify e-fibersum --x {x}"), verify::verify_e_fibersum(x)?),
            };
            let ok = rep.all_passed();
            let mut doc = report_document(command, rep);
            doc.generated_at = ts;
            Ok((to_json(&doc), ok))
        }
        Command::BasicClasses { x, k, filter } => {
            let mut v = basic_classes(*x, *k, *filter)?;
            stamp(&mut v, cli.timestamps);
            Ok((to_json(&v), true))
        }
        Command::Geography { x, c } => {
            let mut doc = geography_point(*x, *c)?;
            doc.result.generated_at = ts;
            let ok = doc.result.checks.iter().all(|c| c.status != crate::report::CheckStatus::Failed);
            Ok((to_json(&doc), ok))
        }
        Command::Sweep {
            x_max,
            svg,
            table,
            width,
            height,
        } => {
            let rows = geography::sweep_rows(*x_max)?;
            let ok = rows.iter().all(|r| r.status == "pass");
            if let Some(path) = svg {
                write_file(path, &crate::svg::region_svg(&rows, *width, *height))?;
            }
            let csv = sweep_csv(&rows)?;
            match table.as_deref() {
                Some("-") => return Ok((csv, ok)),
                Some(path) => write_file(Path::new(path), &csv)?,
                None => {}
            }
            let failures: Vec<String> = rows
                .iter()
                .filter(|r| r.status != "pass")
                .map(|r| format!("({}, {})", r.x, r.c))
                .collect();
            let mut v = json!({
                "schema_version": SCHEMA_VERSION,
                "command": format!("sweep --x-max {x_max}"),
                "points": rows.len(),
                "below_noether_points": rows.iter().filter(|r| r.below_noether).count(),
                "fiber_sum_alternatives": rows.iter().filter(|r| !r.alternative.is_empty()).count(),
                "failures": failures,
                "rows": rows,
            });
            stamp(&mut v, cli.timestamps);
            Ok((to_json(&v), ok))
        }
        Command::Lattice { op } => {
            let mut v = lattice_op(op)?;
            v["schema_version"] = json!(SCHEMA_VERSION);
            stamp(&mut v, cli.timestamps);
            Ok((to_json(&v), true))
        }
        Command::Validate { input } => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| Error::precondition(format!("cannot read {}: {e}", input.display())))?;
            let doc: LedgerDocument = serde_json::from_str(&text)
                .map_err(|e| Error::precondition(format!("{}: {e}", input.display())))?;
            doc.revalidate()?;
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "validated": doc.name,
                "command": doc.command(),
                "checks": doc.checks.len(),
            });
            Ok((to_json(&v), true))
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::precondition(format!("cannot write {}: {e}", path.display())))
}

/// Exit code for an error: consistency failures are 2, everything else 1.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_consistency() {
        EXIT_CONSISTENCY
    } else {
        EXIT_DOMAIN
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli) {
        Ok((text, ok)) => {
            let _ = out.write_all(text.as_bytes());
            if ok {
                EXIT_OK
            } else {
                let _ = writeln!(err, "error: some checks failed");
                EXIT_CONSISTENCY
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Convenience for tests and the demo: run and capture stdout, stderr.
pub fn run_captured<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}
