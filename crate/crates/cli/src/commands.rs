//! Subcommand implementations. Each returns `Ok(true)` on success,
//! `Ok(false)` when some entry failed, and `Err` for unusable input.

use std::io::Read;
use std::path::Path;

use fiblab::catalog::{self, Catalog, Mode};
use fiblab::classifier::{classify, degree_profile};
use fiblab::discovery::{self, parse_range, parse_targets, Basis, Products};
use fiblab::dsl::{expand_umbral, render, Identity, UmbralVariant};
use fiblab::evaluator::{check_identity, Sweep};
use fiblab::prover::{prove, summarize, ProofStatus};
use fiblab::tiling::{self, analyze, generate, ExportFormat};
use serde_json::json;

use crate::output::{Format, Sink};
use crate::records;
use crate::{
    CatalogAction, CheckArgs, Command, GeometryArg, GridArgs, ModeArg, ProductsArg, ProveArgs,
    SearchArgs, SpiralArgs, UmbralArgs, VariantArg,
};

type Outcome = Result<bool, String>;

pub fn run(cmd: &Command, out: &mut Sink) -> Outcome {
    match cmd {
        Command::Check(a) => check(a, out),
        Command::Prove(a) => prove_cmd(a, out),
        Command::Classify(a) => classify_cmd(&read_identities(&a.file)?, out),
        Command::Catalog { action } => catalog_cmd(action, out),
        Command::Search(a) => search(a, out),
        Command::Spiral(a) => spiral(a, out),
        Command::Umbral(a) => umbral(a, out),
    }
}

fn read_text(path: &Path) -> Result<String, String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("stdin: {e}"))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_identities(path: &Path) -> Result<Vec<Identity>, String> {
    let text = read_text(path)?;
    catalog::load_identities(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_catalog(path: Option<&Path>) -> Result<Catalog, String> {
    match path {
        None => Ok(Catalog::shipped()),
        Some(p) => catalog::load(&read_text(p)?).map_err(|e| format!("{}: {e}", p.display())),
    }
}

fn apply_grid(ids: &mut [Identity], grid: &GridArgs) -> Result<(), String> {
    for g in &grid.grid {
        let (name, range) = g
            .split_once('=')
            .ok_or_else(|| format!("bad grid `{g}` (expected NAME=LO..HI)"))?;
        let (lo, hi) = parse_range(range)?;
        for id in ids.iter_mut() {
            for p in id.params.iter_mut().filter(|p| p.name == name.trim()) {
                p.lo = lo;
                p.hi = hi;
            }
        }
    }
    Ok(())
}

fn check(a: &CheckArgs, out: &mut Sink) -> Outcome {
    let mut ids = read_identities(&a.input.file)?;
    apply_grid(&mut ids, &a.grid)?;
    let sweep = Sweep::with_len(a.range.max(1));
    let mut ok = true;
    for id in &ids {
        match check_identity(id, &sweep) {
            Ok(r) => {
                ok &= r.all_equal();
                out.record(records::check(&r), || records::check_text(&r));
            }
            Err(e) => {
                ok = false;
                out.record(records::error(id.id(), &e), || format!("{}: error: {e}", id.id()));
            }
        }
    }
    Ok(ok)
}

fn prove_cmd(a: &ProveArgs, out: &mut Sink) -> Outcome {
    let mut ids = read_identities(&a.input.file)?;
    apply_grid(&mut ids, &a.grid)?;
    let mut ok = true;
    for id in &ids {
        match prove(id) {
            Ok(outcomes) => {
                for o in &outcomes {
                    ok &= !matches!(o.status, ProofStatus::Falsified { .. });
                    out.record(records::proof(o, a.trace), || records::proof_text(o));
                }
            }
            Err(e) => {
                ok = false;
                out.record(records::error(id.id(), &e), || format!("{}: error: {e}", id.id()));
            }
        }
    }
    Ok(ok)
}

fn classify_cmd(ids: &[Identity], out: &mut Sink) -> Outcome {
    let mut mismatches = Vec::new();
    for id in ids {
        let profile = degree_profile(id);
        let class = classify(id);
        if let Some(claimed) = id.meta.claimed_class {
            if !class.agrees_with(claimed) {
                mismatches.push(id.id().to_string());
            }
        }
        out.record(records::class(id, class, &profile), || {
            let claimed = id
                .meta
                .claimed_class
                .map(|c| format!(" (stated: {c})"))
                .unwrap_or_default();
            format!("{}: {class}{claimed}; degrees {:?}", id.id(), profile.degrees)
        });
    }
    out.record(json!({ "mismatches": mismatches }), || {
        if mismatches.is_empty() {
            "mismatches: none".to_string()
        } else {
            format!("mismatches: {}", mismatches.join(", "))
        }
    });
    Ok(true)
}

fn catalog_cmd(action: &CatalogAction, out: &mut Sink) -> Outcome {
    match action {
        CatalogAction::Verify { mode, file, range } => {
            let c = read_catalog(file.as_deref())?;
            let mode = match mode {
                ModeArg::Numeric => Mode::Numeric,
                ModeArg::Symbolic => Mode::Symbolic,
                ModeArg::Both => Mode::Both,
            };
            let report = catalog::verify_all_with(&c, mode, &Sweep::with_len((*range).max(1)));
            for e in &report.entries {
                out.record(serde_json::to_value(e).expect("entry serializes"), || {
                    let mut s = format!("{}:", e.id);
                    if let Some(n) = &e.numeric {
                        s += &format!(" numeric {}", n.status);
                    }
                    if let Some(p) = &e.symbolic {
                        s += &format!(" symbolic {}", p.status);
                        if let Some(m) = &p.method {
                            s += &format!(" ({m})");
                        }
                    }
                    for err in [
                        e.numeric.as_ref().and_then(|n| n.error.as_ref()),
                        e.symbolic.as_ref().and_then(|p| p.error.as_ref()),
                    ]
                    .into_iter()
                    .flatten()
                    {
                        s += &format!("; {err}");
                    }
                    s
                });
            }
            let counts = report.counts();
            let ok = report.ok();
            out.record(
                json!({"summary": counts, "entries": report.entries.len(), "ok": ok}),
                || {
                    let parts: Vec<String> = counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    format!("{} entries; {}; ok={ok}", report.entries.len(), parts.join(" "))
                },
            );
            Ok(ok)
        }
        CatalogAction::List { file } => {
            let c = read_catalog(file.as_deref())?;
            for e in &c.entries {
                let m = &e.identity.meta;
                out.record(
                    json!({
                        "id": m.id,
                        "paper_tag": m.paper_tag,
                        "class": e.claimed_class().as_str(),
                        "identity": render(&e.identity),
                    }),
                    || format!("{}\t{}\t{}", m.id, e.claimed_class(), render(&e.identity)),
                );
            }
            Ok(true)
        }
        CatalogAction::Show { file } => {
            out.raw(&read_catalog(file.as_deref())?.render());
            Ok(true)
        }
    }
}

fn search(a: &SearchArgs, out: &mut Sink) -> Outcome {
    let (lo, hi) = parse_range(&a.window)?;
    let targets = parse_targets(&a.targets)?;
    let products = match a.products {
        ProductsArg::Cubes => Products::Cubes,
        ProductsArg::Split12 => Products::Split12,
        ProductsArg::Distinct => Products::Distinct,
        ProductsArg::All => Products::All,
    };
    let basis = Basis::cubic(lo..=hi, products, &targets).map_err(|e| e.to_string())?;
    let samples = match a.samples {
        Some(n) => {
            let n0 = basis.first_index();
            (n0..n0 + n as i64).collect()
        }
        None => basis.default_samples(),
    };
    let candidates =
        discovery::search(&basis, &samples, a.max_terms).map_err(|e| e.to_string())?;
    let found = discovery::confirm(&candidates);
    match out.format {
        Format::Jsonl => {
            for d in &found {
                out.line(&records::discovery(d).to_string());
            }
            out.line(
                &json!({
                    "basis": basis.len(),
                    "samples": samples.len(),
                    "candidates": candidates.iter().map(records::candidate).collect::<Vec<_>>(),
                    "proven": found.len(),
                })
                .to_string(),
            );
        }
        Format::Text => {
            let mut c = discovery::to_catalog(&found);
            c.header.push(format!(
                "# search: window {lo}..{hi}, products {:?}, targets [{}], {} basis elements, {} samples",
                a.products,
                a.targets,
                basis.len(),
                samples.len()
            ));
            c.header.push(format!(
                "# {} candidate relation(s), {} proven",
                candidates.len(),
                found.len()
            ));
            out.raw(&c.render());
        }
    }
    Ok(true)
}

fn spiral(a: &SpiralArgs, out: &mut Sink) -> Outcome {
    let boxes = generate(a.map, a.n).map_err(|e| e.to_string())?;
    let report = a.check.then(|| analyze(&boxes, a.map));
    let ok = report.as_ref().is_none_or(|r| {
        r.sides_are_fibonacci && r.interiors_disjoint && (a.map != 1 || r.coplanar_x_eq_y)
    });
    match (a.format, &report) {
        (Some(GeometryArg::Obj), _) => {
            out.raw(&tiling::export(&boxes, ExportFormat::Obj));
            if let Some(r) = report.as_ref() {
                out.line(&format!("# report: {}", records::packing(r)));
            }
        }
        (Some(GeometryArg::Json), None) => out.raw(&tiling::export(&boxes, ExportFormat::Json)),
        (Some(GeometryArg::Json), Some(r)) => {
            let geometry: serde_json::Value =
                serde_json::from_str(&tiling::export(&boxes, ExportFormat::Json))
                    .expect("export is valid JSON");
            let doc = json!({"boxes": geometry, "report": records::packing(r)});
            out.raw(&serde_json::to_string_pretty(&doc).expect("serializes"));
        }
        (None, Some(r)) => out.record(records::packing(r), || records::packing_text(r).join("\n")),
        (None, None) => {
            for b in &boxes {
                out.record(
                    json!({
                        "n": b.n,
                        "min": b.min.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "max": b.max.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    }),
                    || b.to_string(),
                );
            }
        }
    }
    Ok(ok)
}

fn umbral(a: &UmbralArgs, out: &mut Sink) -> Outcome {
    let variant = match a.variant {
        VariantArg::Plus => UmbralVariant::Plus,
        VariantArg::Minus => UmbralVariant::Minus,
    };
    let id = expand_umbral(a.p, variant);
    let outcomes = prove(&id).map_err(|e| e.to_string())?;
    let (status, method) = summarize(&outcomes).ok_or("no proof outcome")?;
    let ok = !matches!(status, ProofStatus::Falsified { .. });
    let text = render(&id);
    out.record(
        json!({
            "p": a.p,
            "variant": variant.to_string(),
            "identity": text,
            "status": status.name(),
            "method": method.name(),
        }),
        || format!("{text}\n{} via {}", status.name(), method.name()),
    );
    Ok(ok)
}
