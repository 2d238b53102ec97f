//! Exact text formats.
//!
//! Tables are CSV with header `two_beta_1,...,two_beta_c,six_n,value` and
//! values written as `p/q` strings. Torus elements and rational forms are
//! JSON. Every writer emits a canonical form that its reader accepts back
//! unchanged, and output order is fixed by the underlying sorted maps.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, UCoefficient};
use crate::lattice::{ChernVector, ConeSpec, GeometryData};
use crate::poly::Poly;
use crate::rational::{format_rational, parse_rational, Rat};
use crate::rationality::RationalForm;
use crate::series::ChargeKey;
use crate::torus::TorusElement;

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

pub fn table_header(curve_rank: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=curve_rank).map(|j| format!("two_beta_{j}")).collect();
    h.push("six_n".into());
    h.push("value".into());
    h
}

fn parse_int(field: &str, line: u64) -> Result<i64> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: {field:?} is not an integer")))
}

/// Reads a table keyed by `(2 beta, 6 n)`. Repeated keys are rejected.
pub fn read_table_csv<R: Read>(reader: R, curve_rank: usize) -> Result<BTreeMap<ChargeKey, Rat>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(parse_err)?.iter().map(str::to_owned).collect();
    let expected = table_header(curve_rank);
    if header != expected {
        return Err(Error::Parse(format!(
            "table header {header:?} does not match {expected:?}"
        )));
    }
    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(parse_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let two_beta = (0..curve_rank)
            .map(|j| parse_int(&record[j], line))
            .collect::<Result<Vec<_>>>()?;
        let six_n = parse_int(&record[curve_rank], line)?;
        let value = parse_rational(&record[curve_rank + 1])
            .map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        let key = ChargeKey::new(two_beta, six_n);
        if out.insert(key.clone(), value).is_some() {
            return Err(Error::Parse(format!("line {line}: repeated entry {key}")));
        }
    }
    Ok(out)
}

pub fn write_table_csv<W: Write>(writer: W, curve_rank: usize, table: &BTreeMap<ChargeKey, Rat>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(table_header(curve_rank)).map_err(parse_err)?;
    for (k, v) in table {
        let mut row: Vec<String> = k.two_beta.iter().map(i64::to_string).collect();
        row.push(k.six_n.to_string());
        row.push(format_rational(v));
        wtr.write_record(&row).map_err(parse_err)?;
    }
    wtr.flush().map_err(|e| Error::Parse(e.to_string()))
}

pub fn table_to_csv_string(curve_rank: usize, table: &BTreeMap<ChargeKey, Rat>) -> String {
    let mut buf = Vec::new();
    write_table_csv(&mut buf, curve_rank, table).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    r: i64,
    d: Vec<i64>,
    two_beta: Vec<i64>,
    six_n: i64,
    /// `[u_power, "p/q"]` pairs of the numerator.
    coeff: Vec<(i64, String)>,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    pole_order: u32,
}

fn is_zero_u32(k: &u32) -> bool {
    *k == 0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TorusDoc {
    cone: ConeSpec,
    terms: Vec<TermDoc>,
}

pub fn torus_to_json(x: &TorusElement) -> String {
    let terms = x
        .terms()
        .iter()
        .map(|(v, c)| TermDoc {
            r: v.r,
            d: v.d.clone(),
            two_beta: v.two_beta.clone(),
            six_n: v.six_n,
            coeff: c.numerator().terms().map(|(k, q)| (k, format_rational(q))).collect(),
            pole_order: c.pole_order(),
        })
        .collect();
    let doc = TorusDoc { cone: x.cone().clone(), terms };
    serde_json::to_string_pretty(&doc).expect("torus documents serialize")
}

pub fn torus_from_json(g: &GeometryData, text: &str) -> Result<TorusElement> {
    let doc: TorusDoc = serde_json::from_str(text).map_err(parse_err)?;
    doc.cone.window.validate()?;
    let cone = match &doc.cone.kind {
        crate::lattice::ConeKind::Sharp => ConeSpec::sharp(doc.cone.window),
        crate::lattice::ConeKind::ShiftedByRD { r, d } => ConeSpec::shifted(g, *r, d.clone(), doc.cone.window)?,
    };
    let mut terms = Vec::with_capacity(doc.terms.len());
    for t in doc.terms {
        let mut powers = Vec::with_capacity(t.coeff.len());
        for (k, q) in &t.coeff {
            powers.push((*k, parse_rational(q)?));
        }
        let c = UCoefficient::with_pole(LaurentPoly::from_terms(powers), t.pole_order);
        terms.push((ChernVector::new(t.r, t.d, t.two_beta, t.six_n), c));
    }
    TorusElement::from_terms(g, cone, terms)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalFormDoc {
    numerator: Vec<String>,
    denominator: Vec<String>,
    laurent: Vec<(i64, String)>,
}

fn poly_strings(p: &Poly) -> Vec<String> {
    p.coeffs().iter().map(format_rational).collect()
}

fn parse_poly(v: &[String]) -> Result<Poly> {
    Ok(Poly::new(v.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?))
}

pub fn rational_form_to_json(form: &RationalForm) -> String {
    let doc = RationalFormDoc {
        numerator: poly_strings(form.numerator()),
        denominator: poly_strings(form.denominator()),
        laurent: form.laurent().terms().map(|(k, c)| (k, format_rational(c))).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("rational forms serialize")
}

pub fn rational_form_from_json(text: &str) -> Result<RationalForm> {
    let doc: RationalFormDoc = serde_json::from_str(text).map_err(parse_err)?;
    let mut laurent = Vec::with_capacity(doc.laurent.len());
    for (k, q) in &doc.laurent {
        laurent.push((*k, parse_rational(q)?));
    }
    RationalForm::new(parse_poly(&doc.numerator)?, parse_poly(&doc.denominator)?, LaurentPoly::from_terms(laurent))
}
