use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sublaplace::conformal::{analyze_commutation, frames_equivalent, verify_identity, Residual};
use sublaplace::heisenberg::{
    build_isometry, heisenberg_group, isometry_decision, symplectic_spectrum,
};
use sublaplace::io::{
    from_json, matrix_strings, operator_text, vector_strings, FramesSpec, GroupSpec,
    HeisenbergSpec, OperatorSpec, PolyMapSpec,
};
use sublaplace::linalg::{format_rational, parse_rational};
use sublaplace::operators::CoordinateGroup;
use sublaplace::{Error, Polynomial};

#[derive(Parser)]
#[command(name = "sublaplace")]
#[command(about = "Exact sub-Laplacian and conformal-map checks on nilpotent Lie groups")]
#[command(version)]
struct Cli {
    /// Comparison tolerance for floating-point spectra
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Maximum degree of the polynomial probes
    #[arg(long, global = true, default_value_t = 4)]
    probe_degree: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check antisymmetry and the Jacobi identity of a bracket table
    Validate { group: PathBuf },
    /// Stratify the algebra with the polarization as first layer
    Stratify { group: PathBuf },
    /// Print the sub-Laplacian in exponential coordinates
    Sublaplacian { group: PathBuf },
    /// Decide whether two horizontal frames give the same sub-Laplacian
    EquivFrames { frames: PathBuf },
    /// Symplectic spectrum of a (form, metric) pair
    HeisSpectrum { pair: PathBuf },
    /// Decide isometry of two Heisenberg structures and build the map
    HeisIsometry { first: PathBuf, second: PathBuf },
    /// Decide whether a polynomial map commutes with the sub-Laplacians
    AnalyzeMap {
        map: PathBuf,
        source: PathBuf,
        target: PathBuf,
    },
    /// Check the commutation identity for a given factor and first-order term
    Verify {
        map: PathBuf,
        source: PathBuf,
        target: PathBuf,
        /// Squared conformal factor, a polynomial in x1..xn
        #[arg(long)]
        lambda_sq: String,
        /// Comma-separated components of b
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<String>,
    },
    /// Emit the group spec of H^n with metric g_r
    HeisGroup {
        /// Comma-separated nondecreasing radii
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<String>,
        #[arg(long)]
        name: Option<String>,
    },
}

struct Outcome {
    positive: bool,
    doc: Value,
    text: String,
}

impl Outcome {
    fn new(positive: bool, doc: Value, text: impl Into<String>) -> Self {
        Outcome {
            positive,
            doc,
            text: text.into(),
        }
    }
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_json(&text).with_context(|| format!("in {}", path.display()))
}

fn read_group(path: &Path) -> anyhow::Result<CoordinateGroup> {
    let spec: GroupSpec = read(path)?;
    let group = spec
        .to_group()
        .with_context(|| format!("in {}", path.display()))?;
    CoordinateGroup::new(group).with_context(|| format!("in {}", path.display()))
}

fn residuals_json(rs: &[Residual]) -> Value {
    json!(rs
        .iter()
        .map(|r| json!({ "label": r.label, "polynomial": r.polynomial.to_string() }))
        .collect::<Vec<_>>())
}

fn residuals_text(rs: &[Residual]) -> String {
    rs.iter()
        .map(|r| format!("  {}: {}\n", r.label, r.polynomial))
        .collect()
}

fn decimals(v: impl IntoIterator<Item = f64>) -> Vec<String> {
    v.into_iter().map(|x| format!("{x:.12}")).collect()
}

fn validate(path: &Path) -> anyhow::Result<Outcome> {
    let spec: GroupSpec = read(path)?;
    let algebra = spec.algebra()?;
    let report = algebra.validate();
    let anti: Vec<Value> = report
        .antisymmetry
        .iter()
        .map(|v| {
            json!({
                "i": v.i + 1, "j": v.j + 1, "k": v.k + 1,
                "c_ij": format_rational(&v.c_ij), "c_ji": format_rational(&v.c_ji),
            })
        })
        .collect();
    let jacobi: Vec<Value> = report
        .jacobi
        .iter()
        .map(|v| json!({ "i": v.i + 1, "j": v.j + 1, "k": v.k + 1, "residual": vector_strings(&v.residual) }))
        .collect();
    let valid = report.is_valid();
    let mut text = format!(
        "{}: {} antisymmetry and {} Jacobi violations\n",
        if valid { "valid" } else { "invalid" },
        anti.len(),
        jacobi.len()
    );
    for v in &report.antisymmetry {
        text.push_str(&format!(
            "  c[{},{}]^{} = {} but c[{},{}]^{} = {}\n",
            v.i + 1,
            v.j + 1,
            v.k + 1,
            v.c_ij,
            v.j + 1,
            v.i + 1,
            v.k + 1,
            v.c_ji
        ));
    }
    for v in &report.jacobi {
        text.push_str(&format!(
            "  Jacobi fails on (e{}, e{}, e{}): {:?}\n",
            v.i + 1,
            v.j + 1,
            v.k + 1,
            vector_strings(&v.residual)
        ));
    }
    let mut doc = json!({
        "verdict": if valid { "valid" } else { "invalid" },
        "dim": algebra.dim(),
        "antisymmetry": anti,
        "jacobi": jacobi,
    });
    if valid {
        let step = algebra.nilpotency_step();
        doc["nilpotency_step"] = json!(step);
        doc["unimodular"] = json!(algebra.is_unimodular());
        match step {
            Some(s) => text.push_str(&format!("nilpotent of step {s}\n")),
            None => text.push_str("not nilpotent\n"),
        }
        if !spec.polarization.is_empty() {
            let (generating, dims) = algebra.bracket_generating(&spec.polarization()?)?;
            doc["bracket_generating"] = json!(generating);
            doc["filtration_dims"] = json!(dims);
            text.push_str(&format!(
                "polarization bracket generating: {generating} {dims:?}\n"
            ));
        }
    }
    Ok(Outcome::new(valid, doc, text))
}

fn stratify(path: &Path) -> anyhow::Result<Outcome> {
    let spec: GroupSpec = read(path)?;
    let group = spec.to_group()?;
    match group.algebra().stratify(group.polarization()) {
        Ok(strata) => {
            let layers: Vec<Value> = strata
                .layers
                .iter()
                .map(|l| json!(l.iter().map(|v| vector_strings(v)).collect::<Vec<_>>()))
                .collect();
            let text = format!("stratified, layer dimensions {:?}\n", strata.dims());
            Ok(Outcome::new(
                true,
                json!({ "verdict": "stratified", "dims": strata.dims(), "layers": layers }),
                text,
            ))
        }
        Err(Error::NotStratifiable(why)) => Ok(Outcome::new(
            false,
            json!({ "verdict": "not stratifiable", "reason": why }),
            format!("not stratifiable: {why}\n"),
        )),
        Err(e) => Err(e.into()),
    }
}

fn sublaplacian(path: &Path) -> anyhow::Result<Outcome> {
    let g = read_group(path)?;
    let op = g.sublaplacian();
    let mut doc = serde_json::to_value(OperatorSpec::from_operator(&op))?;
    doc["verdict"] = json!("ok");
    Ok(Outcome::new(true, doc, operator_text(&op)))
}

fn equiv_frames(path: &Path) -> anyhow::Result<Outcome> {
    let spec: FramesSpec = read(path)?;
    let (x, y) = spec.frames()?;
    let r = frames_equivalent(&x, &y)?;
    let verdict = if r.equivalent {
        "equivalent"
    } else {
        "not equivalent"
    };
    let a = matrix_strings(&r.change_of_frame);
    let mut text = format!("{verdict}\n");
    if r.equivalent {
        text.push_str("orthogonal witness A (Y_i = sum_j A[i][j] X_j):\n");
        for row in &a {
            text.push_str(&format!("  {}\n", row.join(" ")));
        }
    }
    Ok(Outcome::new(
        r.equivalent,
        json!({
            "verdict": verdict,
            "witness": r.witness().map(matrix_strings),
            "change_of_frame": a,
        }),
        text,
    ))
}

fn heis_spectrum(path: &Path, tol: f64) -> anyhow::Result<Outcome> {
    let spec: HeisenbergSpec = read(path)?;
    let (omega, g) = spec.to_pair()?;
    let s = symplectic_spectrum(&omega, &g, tol)?;
    let r = decimals(s.r.iter().copied());
    let text = format!("r = ({})  [tolerance {:e}]\n", r.join(", "), s.tolerance);
    Ok(Outcome::new(
        true,
        json!({ "verdict": "ok", "r": r, "tolerance": s.tolerance }),
        text,
    ))
}

fn heis_isometry(first: &Path, second: &Path, tol: f64) -> anyhow::Result<Outcome> {
    let (o1, g1) = read::<HeisenbergSpec>(first)?.to_pair()?;
    let (o2, g2) = read::<HeisenbergSpec>(second)?.to_pair()?;
    if o1.dim() != o2.dim() {
        bail!("pairs have dimensions {} and {}", o1.dim(), o2.dim());
    }
    let s1 = symplectic_spectrum(&o1, &g1, tol)?;
    let s2 = symplectic_spectrum(&o2, &g2, tol)?;
    let spectra = json!([
        decimals(s1.r.iter().copied()),
        decimals(s2.r.iter().copied())
    ]);
    if isometry_decision(&s1, &s2, tol).is_none() {
        let text = format!(
            "not isometric: no rho with r1 = rho * r2\n  r1 = {:?}\n  r2 = {:?}\n",
            s1.r, s2.r
        );
        return Ok(Outcome::new(
            false,
            json!({ "verdict": "not isometric", "rho": null, "spectra": spectra, "tolerance": tol }),
            text,
        ));
    }
    let iso = build_isometry(&o1, &g1, &o2, &g2, tol)?;
    let (rg, rw) = iso.residuals(&o1, &g1, &o2, &g2);
    let psi: Vec<Vec<String>> = iso
        .psi
        .row_iter()
        .map(|r| decimals(r.iter().copied()))
        .collect();
    let mut text = format!("isometric, rho = {:.12}\nPsi:\n", iso.rho);
    for row in &psi {
        text.push_str(&format!("  {}\n", row.join(" ")));
    }
    text.push_str(&format!("residuals: metric {rg:e}, form {rw:e}\n"));
    Ok(Outcome::new(
        true,
        json!({
            "verdict": "isometric",
            "rho": format!("{:.12}", iso.rho),
            "psi": psi,
            "spectra": spectra,
            "residuals": { "metric": rg, "form": rw },
            "tolerance": tol,
        }),
        text,
    ))
}

fn analyze_map(
    map: &Path,
    source: &Path,
    target: &Path,
    probe_degree: usize,
) -> anyhow::Result<Outcome> {
    let f = read::<PolyMapSpec>(map)?.to_map()?;
    let g = read_group(source)?;
    let h = read_group(target)?;
    let r = analyze_commutation(&f, &g, &h, probe_degree)?;
    let b: Option<Vec<String>> =
        r.b.as_ref()
            .map(|b| b.iter().map(ToString::to_string).collect());
    let lambda_sq = r.lambda_sq.as_ref().map(ToString::to_string);
    let mut text = format!("{}\ncontact: {}\n", r.verdict(), r.contact);
    if let Some(l) = &lambda_sq {
        text.push_str(&format!("lambda^2 = {l}\n"));
    }
    if let Some(b) = &b {
        text.push_str(&format!("b = ({})\n", b.join(", ")));
    }
    if !r.residuals.is_empty() {
        text.push_str("residuals:\n");
        text.push_str(&residuals_text(&r.residuals));
    }
    Ok(Outcome::new(
        r.conformal,
        json!({
            "verdict": r.verdict(),
            "contact": r.contact,
            "conformal": r.conformal,
            "lambda_sq": lambda_sq,
            "b": b,
            "residuals": residuals_json(&r.residuals),
            "probe_degree": probe_degree,
        }),
        text,
    ))
}

fn verify(
    map: &Path,
    source: &Path,
    target: &Path,
    lambda_sq: &str,
    b: &[String],
    probe_degree: usize,
) -> anyhow::Result<Outcome> {
    let f = read::<PolyMapSpec>(map)?.to_map()?;
    let g = read_group(source)?;
    let h = read_group(target)?;
    let lambda_sq: Polynomial = lambda_sq.parse().context("in --lambda-sq")?;
    let b = b
        .iter()
        .enumerate()
        .map(|(k, s)| {
            s.trim()
                .parse::<Polynomial>()
                .with_context(|| format!("in --b component {}", k + 1))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let residuals = verify_identity(&f, &g, &h, &lambda_sq, &b, probe_degree)?;
    let holds = residuals.is_empty();
    let verdict = if holds {
        "identity holds"
    } else {
        "identity fails"
    };
    let text = format!("{verdict}\n{}", residuals_text(&residuals));
    Ok(Outcome::new(
        holds,
        json!({ "verdict": verdict, "residuals": residuals_json(&residuals), "probe_degree": probe_degree }),
        text,
    ))
}

fn heis_group(r: &[String], name: Option<String>) -> anyhow::Result<Outcome> {
    let r = r
        .iter()
        .map(|s| parse_rational(s.trim()))
        .collect::<Result<Vec<_>, _>>()
        .context("in --r")?;
    let group = heisenberg_group(&r)?;
    let spec = GroupSpec::from_group(&group, name);
    let text = serde_json::to_string_pretty(&spec)? + "\n";
    let mut doc = serde_json::to_value(&spec)?;
    doc["verdict"] = json!("ok");
    Ok(Outcome::new(true, doc, text))
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        bail!("--tol must be a positive number");
    }
    if cli.probe_degree < 2 {
        bail!("--probe-degree must be at least 2");
    }
    match &cli.command {
        Command::Validate { group } => validate(group),
        Command::Stratify { group } => stratify(group),
        Command::Sublaplacian { group } => sublaplacian(group),
        Command::EquivFrames { frames } => equiv_frames(frames),
        Command::HeisSpectrum { pair } => heis_spectrum(pair, cli.tol),
        Command::HeisIsometry { first, second } => heis_isometry(first, second, cli.tol),
        Command::AnalyzeMap {
            map,
            source,
            target,
        } => analyze_map(map, source, target, cli.probe_degree),
        Command::Verify {
            map,
            source,
            target,
            lambda_sq,
            b,
        } => verify(map, source, target, lambda_sq, b, cli.probe_degree),
        Command::HeisGroup { r, name } => heis_group(r, name.clone()),
    }
}

fn emit(cli: &Cli, body: &str) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| {
        let body = match cli.format {
            Format::Json => serde_json::to_string_pretty(&outcome.doc)? + "\n",
            Format::Text => outcome.text,
        };
        emit(&cli, &body)?;
        Ok(outcome.positive)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if cli.format == Format::Json {
                let doc = json!({ "verdict": "error", "error": format!("{e:#}") });
                let _ = emit(&cli, &(doc.to_string() + "\n"));
            }
            ExitCode::from(2)
        }
    }
}
