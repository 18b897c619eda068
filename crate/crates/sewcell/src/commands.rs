//! The `verify`, `nullity`, `sew` and `catalog` commands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sewcell_core::catalog::{catalog, lookup};
use sewcell_core::geometry::{cube_norm, HIdentities};
use sewcell_core::nullity::{check_generalized, fit_nullity, NullityConvention};
use sewcell_core::sewing::{
    extrinsic_report, sew, verify_f_structure, verify_lift_laws, verify_sewing_theorems, HPrimeNormalization,
};
use sewcell_core::{
    classify, sample_leaf_groups, sample_points, validate_structure, CellDefinition, Chart, Classification,
    Error, LocalGeometry, PointSample, Structure, StructureClass,
};

use crate::file::{load, FileError, ManifoldFile, Provenance, SewnFrom};
use crate::report::{FileDigest, NullityRow, NullityTable, Report, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] Error),
}

impl CommandError {
    /// 2 for unusable input, 1 when the engine fails on a well-formed one.
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::File(_) | CommandError::Usage(_) => 2,
            CommandError::Engine(e) => match e {
                Error::Parse(_)
                | Error::Chart(_)
                | Error::Tensor(_)
                | Error::Parameter(_)
                | Error::NotAdapted(_)
                | Error::Precondition(_)
                | Error::Sampling(_) => 2,
                _ => 1,
            },
        }
    }
}

pub type CommandResult<T> = Result<T, CommandError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionChoice {
    Raw,
    Kenmotsu,
}

impl ConventionChoice {
    pub fn label(self) -> &'static str {
        match self {
            ConventionChoice::Raw => "raw",
            ConventionChoice::Kenmotsu => "kenmotsu",
        }
    }
}

fn digest(path: &Path, sha256: &str) -> FileDigest {
    FileDigest {
        path: path.display().to_string(),
        sha256: sha256.to_string(),
    }
}

/// Leaves of the adapted coordinate when there are enough points for the
/// generalized check, otherwise independent draws.
pub fn samples_for(chart: &Chart, points: usize, seed: u64) -> CommandResult<Vec<PointSample>> {
    if points == 0 {
        return Err(CommandError::Usage("--points must be at least 1".into()));
    }
    if chart.adapted().is_none() || points < 6 {
        return Ok(sample_points(chart, points, seed)?);
    }
    let per = (points / 3).clamp(2, 5);
    let mut s = sample_leaf_groups(chart, points.div_ceil(per), per, seed)?;
    s.truncate(points);
    Ok(s)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn class_text(c: &Classification) -> String {
    match &c.class {
        StructureClass::AlmostAlphaKenmotsu(a) => format!("{} (alpha = {:.9})", c.class.label(), a),
        other => other.label().to_string(),
    }
}

fn weight_text(c: &Classification) -> String {
    let mean = c.weights.iter().sum::<f64>() / c.weights.len() as f64;
    format!("{:.9} (spread {:.2e})", mean, c.weight_spread)
}

/// Axioms, curvature symmetries and, for almost cosymplectic or almost
/// α-Kenmotsu structures, the identities for `∇ξ`, `∇φ` and `h`.
pub fn verify_structure(report: &mut Report, structure: &Structure, settings: &Settings) -> CommandResult<()> {
    let tol = settings.tol;
    let subject = structure.name();
    let samples = sample_points(structure.chart(), settings.points, settings.seed)?;
    let v = validate_structure(structure, &samples, tol)?;
    for (name, residual) in v.checks() {
        report.check(subject, "axioms", name, residual, tol);
    }
    report.flag(subject, "axioms", "positive_definite", v.positive_definite);
    if let Some(ok) = v.adapted_eta {
        report.flag(subject, "axioms", "eta_is_dt", ok);
    }
    let class = classify(structure, &samples, tol)?;
    let propositions = matches!(
        class.class,
        StructureClass::AlmostCosymplectic | StructureClass::AlmostAlphaKenmotsu(_)
    );
    let mut curvature = [0.0f64; 3];
    let mut prop = [0.0f64; 6];
    let mut normality: f64 = 0.0;
    for s in &samples {
        let local = LocalGeometry::at(structure, &s.coords).map_err(|e| match e {
            Error::Eval(source) => Error::EvalAt {
                draw: s.draw,
                coords: s.coords.clone(),
                source,
            },
            e => e,
        })?;
        let sym = local.curvature.symmetry(local.g());
        curvature = [
            curvature[0].max(sym.antisymmetry),
            curvature[1].max(sym.bianchi),
            curvature[2].max(sym.g_skew),
        ];
        normality = normality.max(cube_norm(&local.normality()));
        if propositions {
            let h = HIdentities::at(&local);
            let now = [
                local.nabla_xi_xi().amax(),
                local.nabla_xi_phi().amax(),
                h.g_symmetry,
                h.annihilates_xi,
                h.anticommutes_phi,
                h.trace,
            ];
            for (p, n) in prop.iter_mut().zip(now) {
                *p = p.max(n);
            }
        }
    }
    for (name, r) in ["antisymmetry", "first_bianchi", "metric_skew"].iter().zip(curvature) {
        report.check(subject, "curvature", name, r, tol);
    }
    if propositions {
        let names = ["nabla_xi_xi", "nabla_xi_phi", "h_symmetric", "h_xi", "h_anticommutes_phi", "h_trace"];
        for (name, r) in names.iter().zip(prop) {
            report.check(subject, "propositions", name, r, tol);
        }
    }
    report.verdict(subject, "class", class_text(&class));
    report.verdict(subject, "weight", weight_text(&class));
    report.verdict(subject, "cosymplectic", format!("{} (max |nabla phi| {:.2e})", class.is_cosymplectic, class.max_nabla_phi));
    report.verdict(subject, "normal", format!("{} (max |N| {:.2e})", normality <= tol, normality));
    Ok(())
}

pub fn cmd_verify(paths: &[PathBuf], settings: Settings) -> CommandResult<Report> {
    if paths.is_empty() {
        return Err(CommandError::Usage("verify needs at least one file".into()));
    }
    let mut report = Report::new("verify", settings.clone());
    let files = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    for f in &files {
        report.inputs.push(digest(&f.path, &f.sha256));
    }
    for f in &files {
        verify_structure(&mut report, &f.structure, &settings)?;
    }
    Ok(report)
}

fn convention_for(
    choice: ConventionChoice,
    class: &Classification,
    subject: &str,
) -> CommandResult<NullityConvention> {
    match choice {
        ConventionChoice::Raw => Ok(NullityConvention::Raw),
        ConventionChoice::Kenmotsu => match class.class.alpha() {
            Some(a) => Ok(NullityConvention::Kenmotsu(a)),
            None => Err(CommandError::Usage(format!(
                "the kenmotsu convention needs an almost alpha-Kenmotsu structure; {} is {}",
                subject,
                class.class.label()
            ))),
        },
    }
}

/// Per-sample fits plus the leafwise constancy verdicts.
pub fn nullity_of(
    report: &mut Report,
    structure: &Structure,
    settings: &Settings,
    choice: ConventionChoice,
) -> CommandResult<()> {
    let tol = settings.tol;
    let subject = structure.name();
    let samples = samples_for(structure.chart(), settings.points, settings.seed)?;
    let class = classify(structure, &samples, tol)?;
    let convention = convention_for(choice, &class, subject)?;
    report.verdict(subject, "class", class_text(&class));
    let mut rows = Vec::with_capacity(samples.len());
    for s in &samples {
        rows.push(NullityRow::new(s, &fit_nullity(structure, &s.coords, convention)?));
    }
    report.check(subject, "nullity", "fit_residual", max_of(rows.iter().map(|r| r.residual)), tol);
    match check_generalized(structure, &samples, tol, convention) {
        Ok(g) => {
            report.check(subject, "nullity", "leaf_spread", max_of(g.leaf_spread), tol);
            report.verdict(subject, "eta_aligned", g.eta_aligned);
            for (name, constant, spread) in [
                ("constant_kappa", g.constant_kappa, g.global_spread[0]),
                ("constant_mu", g.constant_mu, g.global_spread[1]),
                ("constant_mu_prime", g.constant_mu_prime, g.global_spread[2]),
            ] {
                report.verdict(subject, name, format!("{} (spread {:.2e})", constant, spread));
            }
        }
        Err(Error::Precondition(why)) => report.verdict(subject, "eta_aligned", format!("not checked: {}", why)),
        Err(e) => return Err(e.into()),
    }
    report.nullity.push(NullityTable {
        subject: subject.to_string(),
        convention: convention.label().to_string(),
        coords: structure.chart().names().to_vec(),
        rows,
    });
    Ok(())
}

pub fn cmd_nullity(path: &Path, mut settings: Settings, choice: ConventionChoice) -> CommandResult<Report> {
    settings.convention = Some(choice.label().into());
    let f = load(path)?;
    let mut report = Report::new("nullity", settings.clone());
    report.inputs.push(digest(&f.path, &f.sha256));
    nullity_of(&mut report, &f.structure, &settings, choice)?;
    Ok(report)
}

/// Sew `copies` of `cell`, check the product, the submanifold and the
/// transfer theorems, and return the sewn definition alongside the report.
pub fn sew_and_check(
    report: &mut Report,
    cell: CellDefinition,
    copies: usize,
    settings: &Settings,
) -> CommandResult<Structure> {
    if copies < 2 {
        return Err(CommandError::Usage(format!("--copies must be at least 2, got {}", copies)));
    }
    let tol = settings.tol;
    let cell_samples = sample_points(cell.chart(), settings.points, settings.seed)?;
    let cell_class = classify(&cell, &cell_samples, tol)?;
    let sewn = sew(&vec![cell; copies])?;
    let product = sewn.product()?;
    let name = sewn.structure().name().to_string();

    let psamples = sample_points(product.chart(), settings.points, settings.seed)?;
    let f = verify_f_structure(&product, &psamples, tol)?;
    for (check, r) in [
        ("f_cubed_plus_f", f.f_cubed_plus_f),
        ("skew", f.skew),
        ("kills_framing", f.kills_framing),
        ("framing_orthonormal", f.framing_orthonormal),
        ("median_unit", f.median_unit),
        ("d_coframing", f.d_coframing),
        ("kernel_span", f.kernel_span),
    ] {
        report.check("product", "f_structure", check, r, tol);
    }
    report.flag("product", "f_structure", "kernel_rank_is_k", f.kernel_matches());
    let l = verify_lift_laws(&product, &psamples, tol)?;
    for (check, r) in [
        ("connection_lift", l.connection_lift),
        ("connection_cross", l.connection_cross),
        ("curvature_lift", l.curvature_lift),
        ("curvature_cross", l.curvature_cross),
        ("involutivity", l.involutivity),
    ] {
        report.check("product", "lift_laws", check, r, tol);
    }

    let samples = samples_for(sewn.structure().chart(), settings.points, settings.seed)?;
    let v = validate_structure(sewn.structure(), &samples, tol)?;
    for (check, r) in v.checks() {
        report.check(&name, "axioms", check, r, tol);
    }
    report.flag(&name, "axioms", "positive_definite", v.positive_definite);
    let e = extrinsic_report(&sewn, &samples)?;
    for (check, r) in e.max.checks() {
        report.check(&name, "extrinsic", check, r, tol);
    }
    report.verdict(&name, "second_fundamental_form", format!("{:.6e}", e.max_second_fundamental_form));

    let normalization = match cell_class.class {
        StructureClass::AlmostCosymplectic => Some(HPrimeNormalization::Raw),
        StructureClass::AlmostAlphaKenmotsu(_) => Some(HPrimeNormalization::Kenmotsu),
        _ => None,
    };
    let t = verify_sewing_theorems(&sewn, &samples, tol, normalization)?;
    report.verdict("cell", "class", class_text(&cell_class));
    report.verdict(&name, "class", class_text(&t.classification.sewn));
    if let Some(ok) = t.classification.passed {
        report.flag(&name, "theorems", "classification_transfer", ok);
    }
    for (check, r) in t.operators.checks() {
        report.check(&name, "operators", check, r, tol);
    }
    if let Some(n) = &t.nullity {
        for (check, r) in [
            ("kappa_transfer", n.max_deviation[0]),
            ("mu_transfer", n.max_deviation[1]),
            ("mu_prime_transfer", n.max_deviation[2]),
            ("sewn_fit_residual", n.max_sewn_residual),
        ] {
            report.check(&name, "theorems", check, r, tol);
        }
        report.verdict(&name, "h_prime_normalization", n.normalization.label());
        report.nullity.push(NullityTable {
            subject: name.clone(),
            convention: n.normalization.label().into(),
            coords: sewn.structure().chart().names().to_vec(),
            rows: samples
                .iter()
                .zip(&n.comparisons)
                .map(|(s, c)| NullityRow::new(s, &c.sewn))
                .collect(),
        });
    } else {
        report.verdict(&name, "nullity_transfer", "not checked: cell is not almost cosymplectic or almost alpha-Kenmotsu");
    }
    if let Some(g) = &t.generalized {
        report.check(&name, "theorems", "leaf_spread", max_of(g.leaf_spread), tol);
        report.verdict(&name, "constant_kappa", format!("{} (spread {:.2e})", g.constant_kappa, g.global_spread[0]));
    }
    Ok(sewn.into_structure())
}

pub fn cmd_sew(path: &Path, copies: usize, out: &Path, mut settings: Settings) -> CommandResult<Report> {
    settings.copies = Some(copies);
    let f = load(path)?;
    let cell = CellDefinition::new(f.structure.clone())?;
    let mut report = Report::new("sew", settings.clone());
    report.inputs.push(digest(&f.path, &f.sha256));
    let sewn = sew_and_check(&mut report, cell, copies, &settings)?;
    let provenance = Provenance {
        sewn_from: Some(SewnFrom {
            cell: f.structure.name().to_string(),
            sha256: Some(f.sha256.clone()),
            copies,
        }),
        ..Provenance::default()
    };
    let sha = ManifoldFile::from_structure(&sewn, Some(provenance)).save(out)?;
    report.outputs.push(digest(out, &sha));
    Ok(report)
}

pub fn catalog_listing() -> String {
    let mut out = String::new();
    for e in catalog() {
        let params: Vec<String> = e
            .parameters
            .iter()
            .map(|p| format!("{}={} ({})", p.name, p.default, p.constraint))
            .collect();
        out.push_str(&format!("{:<28} {}\n", e.name, e.summary));
        if !params.is_empty() {
            out.push_str(&format!("{:<28} {}\n", "", params.join(", ")));
        }
    }
    out
}

/// Definition file for a catalog entry; `values` override the defaults
/// positionally.
pub fn catalog_export(name: &str, values: &[f64]) -> CommandResult<ManifoldFile> {
    let entry = lookup(name).ok_or_else(|| {
        let names: Vec<&str> = catalog().iter().map(|e| e.name).collect();
        CommandError::Usage(format!("no catalog entry `{}`; known: {}", name, names.join(", ")))
    })?;
    let cell = entry.build(values)?;
    let parameters: BTreeMap<String, f64> = entry
        .parameters
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.to_string(), values.get(i).copied().unwrap_or(p.default)))
        .collect();
    Ok(ManifoldFile::from_structure(
        cell.structure(),
        Some(Provenance {
            catalog: Some(entry.name.to_string()),
            parameters,
            sewn_from: None,
        }),
    ))
}
