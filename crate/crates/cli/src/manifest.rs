//! Result manifest and CSV artifacts.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::io::{self, Write};

use levy_whf::whf::{DensityTerm, HalfPlaneFactor};
use levy_whf::{ExtremaDensity, Extremum, Factorization};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::RunConfig;

/// `[re, im]`.
pub type ComplexPair = [f64; 2];

#[derive(Debug, Clone, Serialize)]
pub struct TermRecord {
    pub side: &'static str,
    pub coefficient: ComplexPair,
    pub rate: ComplexPair,
    pub degree: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootRecord {
    pub at: ComplexPair,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorRecord {
    pub zeros: Vec<RootRecord>,
    pub poles: Vec<RootRecord>,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisRecord {
    pub form: String,
    pub rate: f64,
    pub oscillation: f64,
    pub power: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuinRecord {
    pub reserves: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Same bound as the densities.
    pub bound_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infinite: Option<InfiniteRuinRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfiniteRuinRecord {
    pub reserve: f64,
    pub rates: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: Option<f64>,
    pub monotone: bool,
    pub failures: Vec<FailureRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub rate: f64,
    pub stage: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationRecord {
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub bridge: bool,
    pub ks_sup: f64,
    pub ks_inf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub family: &'static str,
    pub poles: Vec<ComplexPair>,
    pub basis: Vec<BasisRecord>,
    pub coefficients: Vec<f64>,
    pub a0: f64,
    pub fit_error: f64,
    pub bound_p: f64,
    pub bound_value: f64,
    pub factor_plus: FactorRecord,
    pub factor_minus: FactorRecord,
    pub rescale_plus: f64,
    pub rescale_minus: f64,
    pub atom_sup: f64,
    pub atom_inf: f64,
    pub density_terms: Vec<TermRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ruin: Option<RuinRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationRecord>,
    pub config: RunConfig,
}

fn pair(z: num_complex::Complex64) -> ComplexPair {
    [z.re, z.im]
}

fn factor_record(f: &HalfPlaneFactor) -> FactorRecord {
    let roots = |r: &[levy_whf::whf::Root]| r.iter().map(|r| RootRecord { at: pair(r.at), multiplicity: r.multiplicity }).collect();
    FactorRecord { zeros: roots(f.zeros()), poles: roots(f.poles()), scale: f.scale() }
}

fn term_record(side: &'static str, t: &DensityTerm) -> TermRecord {
    TermRecord { side, coefficient: pair(t.coefficient), rate: pair(t.rate), degree: t.degree }
}

impl Manifest {
    pub fn new(command: &'static str, family: &'static str, f: &Factorization, bound_p: f64, config: &RunConfig) -> Self {
        let r = &f.fit.approximant;
        let density_terms = f
            .supremum
            .terms()
            .iter()
            .map(|t| term_record("sup", t))
            .chain(f.infimum.terms().iter().map(|t| term_record("inf", t)))
            .collect();
        Manifest {
            command,
            family,
            poles: f.poles.all().map(|p| pair(p.at)).collect(),
            basis: f
                .basis
                .iter()
                .map(|b| BasisRecord {
                    form: format!("{:?}", b.form()).to_lowercase(),
                    rate: b.rate(),
                    oscillation: b.oscillation(),
                    power: b.power(),
                })
                .collect(),
            coefficients: r.coefficients(),
            a0: r.a0(),
            fit_error: f.fit.error,
            bound_p,
            bound_value: f.bound,
            factor_plus: factor_record(&f.raw_plus),
            factor_minus: factor_record(&f.raw_minus),
            rescale_plus: f.factors.rescale_plus,
            rescale_minus: f.factors.rescale_minus,
            atom_sup: f.supremum.atom(),
            atom_inf: f.infimum.atom(),
            density_terms,
            ruin: None,
            validation: None,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits::default());
        self.serialize(&mut ser).expect("manifest serializes to memory");
        out.push(b'\n');
        out
    }
}

/// 17 significant digits, e.g. `1.2500000000000000e-1`.
pub fn fixed(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "nan".into()
    }
}

/// Pretty JSON with every float in [`fixed`] form; non-finite floats
/// become `null`.
#[derive(Default)]
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(fixed(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Number of rows in a density file.
pub const DENSITY_ROWS: usize = 2001;

/// `x,density` over `[0, 10 / min rate]`, mirrored for the infimum.
pub fn density_csv(d: &ExtremaDensity) -> String {
    let reach = 10.0 / d.min_rate().unwrap_or(1.0);
    let sign = match d.side() {
        Extremum::Supremum => 1.0,
        Extremum::Infimum => -1.0,
    };
    let mut out = String::from("x,density\n");
    for k in 0..DENSITY_ROWS {
        let x = match k {
            0 => 0.0,
            _ => sign * reach * k as f64 / (DENSITY_ROWS - 1) as f64,
        };
        writeln!(out, "{},{}", fixed(x), fixed(d.density(x))).expect("write to string");
    }
    out
}

pub fn ruin_csv(reserves: &[f64], probabilities: &[f64]) -> String {
    let mut out = String::from("u,ruin_probability\n");
    for (u, p) in reserves.iter().zip(probabilities) {
        writeln!(out, "{},{}", fixed(*u), fixed(*p)).expect("write to string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_digits() {
        assert_eq!(fixed(0.125), "1.2500000000000000e-1");
        assert_eq!(fixed(-3.0), "-3.0000000000000000e0");
        assert_eq!(fixed(0.1).len(), "1.0000000000000001e-1".len());
    }

    #[test]
    fn json_floats_use_fixed_digits() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            c: f64,
        }
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits::default());
        S { a: 0.5, b: vec![1.0, 2.5e-8], c: f64::NAN }.serialize(&mut ser).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("\"a\": 5.0000000000000000e-1"), "{text}");
        assert!(text.contains("2.4999999999999999e-8"), "{text}");
        assert!(text.contains("\"c\": null"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"][1].as_f64(), Some(2.5e-8));
    }

    #[test]
    fn density_file_shape() {
        let d = ExtremaDensity::new(
            Extremum::Infimum,
            0.0,
            vec![DensityTerm {
                coefficient: num_complex::Complex64::new(2.0, 0.0),
                rate: num_complex::Complex64::new(2.0, 0.0),
                degree: 0,
            }],
        )
        .unwrap();
        let csv = density_csv(&d);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), DENSITY_ROWS + 1);
        assert_eq!(lines[0], "x,density");
        assert!(lines[DENSITY_ROWS].starts_with("-5.0000000000000000e0,"));
    }
}
