//! JSON and Wavefront OBJ output for box arrangements.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{Cuboid, TilingError, Q, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Obj,
}

impl FromStr for ExportFormat {
    type Err = TilingError;

    fn from_str(s: &str) -> Result<Self, TilingError> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "obj" => Ok(ExportFormat::Obj),
            other => Err(TilingError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Record {
    n: u32,
    min: [String; 3],
    max: [String; 3],
    min_f: [f64; 3],
    max_f: [f64; 3],
}

/// Always `p/q`, including integers.
fn ratio(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn parse_ratio(s: &str) -> Result<Q, TilingError> {
    let bad = || TilingError::Malformed(format!("bad rational `{s}`"));
    let (p, d) = s.split_once('/').ok_or_else(bad)?;
    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Q::new(p, d))
}

fn floats(v: &Vec3) -> [f64; 3] {
    v.each_ref().map(|x| x.to_f64().unwrap_or(f64::NAN))
}

fn record(b: &Cuboid) -> Record {
    Record {
        n: b.n,
        min: b.min.each_ref().map(ratio),
        max: b.max.each_ref().map(ratio),
        min_f: floats(&b.min),
        max_f: floats(&b.max),
    }
}

/// Float with 12 significant digits, trailing zeros trimmed.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn obj(boxes: &[Cuboid]) -> String {
    let mut out = String::from("# Fibonacci cube arrangement\n");
    // Corner k uses max on axis i iff bit i of k is set.
    const FACES: [[usize; 4]; 6] = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    for (bi, b) in boxes.iter().enumerate() {
        let _ = writeln!(out, "g cube_{}", b.n);
        let lo = floats(&b.min);
        let hi = floats(&b.max);
        for k in 0..8 {
            let p: [f64; 3] = std::array::from_fn(|i| if k >> i & 1 == 1 { hi[i] } else { lo[i] });
            let _ = writeln!(out, "v {} {} {}", sig12(p[0]), sig12(p[1]), sig12(p[2]));
        }
        let base = bi * 8 + 1;
        for f in FACES {
            let _ = writeln!(
                out,
                "f {} {} {} {}",
                base + f[0],
                base + f[1],
                base + f[2],
                base + f[3]
            );
        }
    }
    out
}

/// Serialize boxes in the requested format.
pub fn export(boxes: &[Cuboid], format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => {
            let records: Vec<Record> = boxes.iter().map(record).collect();
            serde_json::to_string_pretty(&records).expect("records serialize")
        }
        ExportFormat::Obj => obj(boxes),
    }
}

/// Read boxes back from the JSON export; only the exact fields are used.
pub fn from_json(text: &str) -> Result<Vec<Cuboid>, TilingError> {
    let records: Vec<Record> =
        serde_json::from_str(text).map_err(|e| TilingError::Malformed(e.to_string()))?;
    records
        .into_iter()
        .map(|r| {
            let parse = |xs: &[String; 3]| -> Result<Vec3, TilingError> {
                Ok([parse_ratio(&xs[0])?, parse_ratio(&xs[1])?, parse_ratio(&xs[2])?])
            };
            Ok(Cuboid {
                n: r.n,
                min: parse(&r.min)?,
                max: parse(&r.max)?,
            })
        })
        .collect()
}
