//! Stable JSON shapes for every record the CLI emits.

use fiblab::classifier::{Class, DegreeProfile};
use fiblab::discovery::{small_coeffs, Discovery, RelationCandidate};
use fiblab::dsl::{render, Identity};
use fiblab::evaluator::{CheckReport, CheckStatus, IndexRange};
use fiblab::prover::{ProofOutcome, ProofStatus};
use fiblab::tiling::PackingReport;
use serde_json::{json, Map, Value};

pub fn pairs(xs: &[(String, i64)]) -> Value {
    Value::Object(xs.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>())
}

pub fn ranges(rs: &[IndexRange]) -> Value {
    rs.iter()
        .map(|r| json!({"var": r.var, "start": r.start, "end": r.end}))
        .collect()
}

pub fn ranges_text(rs: &[IndexRange]) -> String {
    rs.iter()
        .map(|r| format!("{} {}..{}", r.var, r.start, r.end))
        .collect::<Vec<_>>()
        .join(", ")
}

fn assignment_text(xs: &[(String, i64)]) -> String {
    xs.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn check(r: &CheckReport) -> Value {
    let (status, counterexample) = match &r.status {
        CheckStatus::AllEqual => ("AllEqual", Value::Null),
        CheckStatus::CounterexampleAt {
            assignment,
            pair,
            left,
            right,
        } => (
            "Counterexample",
            json!({
                "assignment": pairs(assignment),
                "pair": pair,
                "left": left.to_string(),
                "right": right.to_string(),
            }),
        ),
    };
    json!({
        "id": r.id,
        "status": status,
        "instances": r.instances,
        "assignments": r.assignments,
        "ranges": ranges(&r.ranges),
        "counterexample": counterexample,
        "millis": r.elapsed.as_millis() as u64,
    })
}

pub fn check_text(r: &CheckReport) -> String {
    match &r.status {
        CheckStatus::AllEqual => format!(
            "{}: AllEqual ({} assignments over {} instance(s); {})",
            r.id,
            r.assignments,
            r.instances,
            ranges_text(&r.ranges)
        ),
        CheckStatus::CounterexampleAt {
            assignment,
            pair,
            left,
            right,
        } => format!(
            "{}: counterexample at {} (sides {} and {}: {} != {})",
            r.id,
            assignment_text(assignment),
            pair,
            pair + 1,
            left,
            right
        ),
    }
}

pub fn error(id: &str, e: &dyn std::fmt::Display) -> Value {
    json!({"id": id, "status": "Error", "error": e.to_string()})
}

pub fn proof(o: &ProofOutcome, trace: bool) -> Value {
    let mut v = json!({
        "id": o.id,
        "bindings": pairs(&o.bindings),
        "status": o.status.name(),
        "method": o.method.name(),
        "base_cases": o.base_cases,
        "parity_cases": o.trace.len(),
        "diagnostic": o.diagnostic,
    });
    match &o.status {
        ProofStatus::Proven => {}
        ProofStatus::VerifiedUpTo { ranges: rs } => v["ranges"] = ranges(rs),
        ProofStatus::Falsified { assignment } => v["counterexample"] = pairs(assignment),
    }
    if trace {
        v["trace"] = o
            .trace
            .iter()
            .map(|c| {
                json!({
                    "pair": c.pair,
                    "signs": c.signs.iter().map(|(k, s)| (k.clone(), json!(s))).collect::<Map<_, _>>(),
                    "residual": c.residual.to_string(),
                })
            })
            .collect();
    }
    v
}

pub fn proof_text(o: &ProofOutcome) -> String {
    let mut s = o.id.clone();
    if !o.bindings.is_empty() {
        s += &format!(" [{}]", assignment_text(&o.bindings));
    }
    s += &format!(": {} via {}", o.status.name(), o.method.name());
    match &o.status {
        ProofStatus::Proven => {}
        ProofStatus::VerifiedUpTo { ranges: rs } => s += &format!(" ({})", ranges_text(rs)),
        ProofStatus::Falsified { assignment } => s += &format!(" at {}", assignment_text(assignment)),
    }
    if !o.base_cases.is_empty() {
        s += &format!("; base cases {:?}", o.base_cases);
    }
    if let Some(d) = &o.diagnostic {
        s += &format!("; {d}");
    }
    s
}

pub fn class(id: &Identity, class: Class, profile: &DegreeProfile) -> Value {
    let claimed = id.meta.claimed_class;
    json!({
        "id": id.meta.id,
        "class": class.to_string(),
        "claimed": claimed.map(|c| c.as_str()),
        "agrees": claimed.map(|c| class.agrees_with(c)),
        "degrees": profile.degrees,
        "max_degree": profile.max_degree,
        "has_constant": profile.has_constant,
        "index_count": profile.index_count,
    })
}

pub fn candidate(c: &RelationCandidate) -> Value {
    json!({
        "id": c.identity.meta.id,
        "identity": render(&c.identity),
        "coeffs": small_coeffs(c).map_or_else(
            || c.coeffs.iter().map(|x| json!(x.to_string())).collect(),
            |v| v.into_iter().map(|x| json!(x)).collect::<Value>(),
        ),
    })
}

pub fn discovery(d: &Discovery) -> Value {
    json!({
        "id": d.identity.meta.id,
        "identity": render(&d.identity),
        "status": d.outcome.status.name(),
        "method": d.outcome.method.name(),
    })
}

pub fn packing(r: &PackingReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

pub fn packing_text(r: &PackingReport) -> Vec<String> {
    let mut lines = vec![
        format!("map {}: {} cubes", r.map, r.sides.len()),
        format!("sides are Fibonacci numbers: {}", r.sides_are_fibonacci),
        format!("centers on plane x = y: {}", r.coplanar_x_eq_y),
        format!(
            "interiors pairwise disjoint: {}{}",
            r.interiors_disjoint,
            r.first_overlap
                .map(|(a, b)| format!(" (first overlap C{a}, C{b})"))
                .unwrap_or_default()
        ),
    ];
    if let Some(last) = r.two_step_ratios.last() {
        lines.push(format!("last two-step displacement ratio: {last:.10}"));
    }
    lines
}
