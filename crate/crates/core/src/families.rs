//! Standard representatives of the nine SLOCC families of four-qubit pure
//! states, the table of which ones carry no localized quadripartite
//! entanglement when the first qubit is traced, and parameter sweeps that
//! compare that table against numerical estimates.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexroof::RoofConfig;
use crate::error::{Error, Result};
use crate::qstate::{StateVector, C64};
use crate::tau4::{certify_report, tau4_pure4, DEFAULT_CERTIFY_GAP};

/// Parameters whose moduli agree within this are treated as equal.
pub const MODULUS_TOL: f64 = 1e-12;
/// Estimates at or below this count as zero in sweeps.
pub const ZERO_TOL: f64 = 2e-3;
/// Predictions refer to tracing this site.
pub const PREDICTION_SITE: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyId {
    #[serde(rename = "Gabcd")]
    Gabcd,
    #[serde(rename = "Labc2")]
    Labc2,
    #[serde(rename = "La2b2")]
    La2b2,
    #[serde(rename = "Lab3")]
    Lab3,
    #[serde(rename = "La4")]
    La4,
    #[serde(rename = "La2_03plus1")]
    La2O3Plus1,
    #[serde(rename = "L05plus3bar")]
    L05Plus3Bar,
    #[serde(rename = "L07plus1bar")]
    L07Plus1Bar,
    #[serde(rename = "L03_03")]
    L03O3,
}

impl FamilyId {
    pub const ALL: [FamilyId; 9] = [
        FamilyId::Gabcd,
        FamilyId::Labc2,
        FamilyId::La2b2,
        FamilyId::Lab3,
        FamilyId::La4,
        FamilyId::La2O3Plus1,
        FamilyId::L05Plus3Bar,
        FamilyId::L07Plus1Bar,
        FamilyId::L03O3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Gabcd => "Gabcd",
            FamilyId::Labc2 => "Labc2",
            FamilyId::La2b2 => "La2b2",
            FamilyId::Lab3 => "Lab3",
            FamilyId::La4 => "La4",
            FamilyId::La2O3Plus1 => "La2_03plus1",
            FamilyId::L05Plus3Bar => "L05plus3bar",
            FamilyId::L07Plus1Bar => "L07plus1bar",
            FamilyId::L03O3 => "L03_03",
        }
    }

    /// How many of `a, b, c, d` the family uses, in that order.
    pub fn parameter_count(self) -> usize {
        match self {
            FamilyId::Gabcd => 4,
            FamilyId::Labc2 => 3,
            FamilyId::La2b2 | FamilyId::Lab3 => 2,
            FamilyId::La4 | FamilyId::La2O3Plus1 => 1,
            FamilyId::L05Plus3Bar | FamilyId::L07Plus1Bar | FamilyId::L03O3 => 0,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = FamilyId::ALL.iter().map(|id| id.name()).collect();
                Error::Parse(format!("unknown family {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyId,
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl FamilySpec {
    /// Unused trailing parameters may be omitted and default to zero.
    pub fn new(family: FamilyId, params: &[C64]) -> Result<Self> {
        if params.len() > 4 {
            return Err(Error::InvalidConfig(format!(
                "{} parameters given, at most 4",
                params.len()
            )));
        }
        let mut p = [C64::new(0.0, 0.0); 4];
        p[..params.len()].copy_from_slice(params);
        Ok(Self {
            family,
            a: p[0],
            b: p[1],
            c: p[2],
            d: p[3],
        })
    }

    pub fn real(family: FamilyId, params: &[f64]) -> Result<Self> {
        let p: Vec<C64> = params.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(family, &p)
    }

    pub fn params(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

fn idx(bits: &str) -> usize {
    usize::from_str_radix(bits, 2).expect("four-bit label")
}

/// Amplitudes of the standard state before normalization, big-endian.
pub fn family_amplitudes(spec: &FamilySpec) -> [C64; 16] {
    let mut v = [C64::new(0.0, 0.0); 16];
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let FamilySpec { a, b, c, d, .. } = *spec;
    let mut put = |coef: C64, labels: &[&str]| {
        for l in labels {
            v[idx(l)] += coef;
        }
    };
    match spec.family {
        FamilyId::Gabcd => {
            put((a + d) / 2.0, &["0000", "1111"]);
            put((a - d) / 2.0, &["0011", "1100"]);
            put((b + c) / 2.0, &["0101", "1010"]);
            put((b - c) / 2.0, &["0110", "1001"]);
        }
        FamilyId::Labc2 => {
            put((a + b) / 2.0, &["0000", "1111"]);
            put((a - b) / 2.0, &["0011", "1100"]);
            put(c, &["0101", "1010"]);
            put(one, &["0110"]);
        }
        FamilyId::La2b2 => {
            put(a, &["0000", "1111"]);
            put(b, &["0101", "1010"]);
            put(one, &["0110", "0011"]);
        }
        FamilyId::Lab3 => {
            put(a, &["0000", "1111"]);
            put((a + b) / 2.0, &["0101", "1010"]);
            put(i * std::f64::consts::FRAC_1_SQRT_2, &["0001", "0010", "0111", "1011"]);
            put((a - b) / 2.0, &["0110", "1001"]);
        }
        FamilyId::La4 => {
            put(a, &["0000", "0101", "1010", "1111"]);
            put(i, &["0001"]);
            put(one, &["0110"]);
            put(-one, &["1011"]);
        }
        FamilyId::La2O3Plus1 => {
            put(a, &["0000", "1111"]);
            put(one, &["0011", "0101", "0110"]);
        }
        FamilyId::L05Plus3Bar => put(one, &["0000", "0101", "1000", "1110"]),
        FamilyId::L07Plus1Bar => put(one, &["0000", "1011", "1101", "1110"]),
        FamilyId::L03O3 => put(one, &["0000", "0111"]),
    }
    v
}

/// The normalized standard state.
pub fn family_state(spec: &FamilySpec) -> Result<StateVector> {
    let raw = StateVector::new(vec![2; 4], family_amplitudes(spec).to_vec())?;
    if raw.norm_sqr() == 0.0 {
        return Err(Error::ZeroNorm);
    }
    raw.normalize()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    Zero,
    Nonzero,
    Unspecified,
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expected::Zero => "zero",
            Expected::Nonzero => "nonzero",
            Expected::Unspecified => "unspecified",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub family: FamilyId,
    pub condition: String,
    pub expected: Expected,
    pub traced_site: usize,
}

fn same_modulus(x: C64, y: C64) -> bool {
    (x.norm() - y.norm()).abs() <= MODULUS_TOL
}

fn vanishes(x: C64) -> bool {
    x.norm() <= MODULUS_TOL
}

/// Expected character of `τ₄` with the first qubit traced.
pub fn predicted_zero(spec: &FamilySpec) -> Prediction {
    let FamilySpec { a, b, c, d, family } = *spec;
    let zero = |cond: &str| (cond.to_string(), Expected::Zero);
    let (condition, expected) = match family {
        FamilyId::Gabcd => {
            let p = [a, b, c, d];
            let vanishing = p.iter().filter(|&&x| vanishes(x)).count();
            if same_modulus(a, b) && same_modulus(a, c) && same_modulus(a, d) && !vanishes(a) {
                zero("|a|=|b|=|c|=|d|")
            } else if vanishing == 3 {
                zero("exactly three parameters vanish")
            } else {
                ("none".into(), Expected::Unspecified)
            }
        }
        FamilyId::Labc2 if same_modulus(a, c) => zero("|a|=|c|"),
        FamilyId::Labc2 if same_modulus(b, c) => zero("|b|=|c|"),
        FamilyId::La2b2 | FamilyId::Lab3 if same_modulus(a, b) => zero("|a|=|b|"),
        FamilyId::La4 | FamilyId::La2O3Plus1 if vanishes(a) => zero("a=0"),
        FamilyId::L05Plus3Bar | FamilyId::L03O3 => zero("always"),
        FamilyId::L07Plus1Bar => ("always".into(), Expected::Nonzero),
        _ => ("none".into(), Expected::Unspecified),
    };
    Prediction {
        family,
        condition,
        expected,
        traced_site: PREDICTION_SITE,
    }
}

/// Real parameter points covering every stated zero condition (at least two
/// per condition wherever the condition leaves a free parameter) plus the
/// parameter-free families.
pub fn prediction_points() -> Vec<FamilySpec> {
    use FamilyId::*;
    let pts: &[(FamilyId, &[f64])] = &[
        (Gabcd, &[1.0, 1.0, 1.0, 1.0]),
        (Gabcd, &[1.0, -1.0, 1.0, -1.0]),
        (Gabcd, &[0.5, 0.5, -0.5, -0.5]),
        (Gabcd, &[1.0, 0.0, 0.0, 0.0]),
        (Gabcd, &[0.0, 0.7, 0.0, 0.0]),
        (Gabcd, &[0.0, 0.0, 0.0, 1.0]),
        (Labc2, &[1.0, 0.5, 1.0]),
        (Labc2, &[-1.0, 0.5, 1.0]),
        (Labc2, &[0.6, 0.2, 0.6]),
        (Labc2, &[0.5, 1.0, 1.0]),
        (Labc2, &[0.3, -0.8, 0.8]),
        (La2b2, &[1.0, 1.0]),
        (La2b2, &[0.5, -0.5]),
        (La2b2, &[0.0, 0.0]),
        (Lab3, &[1.0, 1.0]),
        (Lab3, &[0.5, -0.5]),
        (Lab3, &[0.0, 0.0]),
        (La4, &[0.0]),
        (La2O3Plus1, &[0.0]),
        (L05Plus3Bar, &[]),
        (L03O3, &[]),
        (L07Plus1Bar, &[]),
    ];
    pts.iter()
        .map(|(f, p)| FamilySpec::real(*f, p).expect("at most four parameters"))
        .collect()
}

/// Cartesian grid over the parameters a family uses.
pub fn parameter_grid(family: FamilyId, values: &[C64]) -> Vec<FamilySpec> {
    let n = family.parameter_count();
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<C64>| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|p| FamilySpec::new(family, &p).expect("at most four parameters"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub spec: FamilySpec,
    pub tau4: Option<f64>,
    pub certified_lower: Option<f64>,
    pub prediction: Prediction,
    pub agree: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub zero_tol: f64,
    pub min_gap: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            zero_tol: ZERO_TOL,
            min_gap: DEFAULT_CERTIFY_GAP,
        }
    }
}

/// Estimates `τ₄` (first qubit traced) at every point and checks it against
/// the table. Zero-norm points are kept as rows with a note and no estimate.
pub fn sweep(points: &[FamilySpec], config: &RoofConfig, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    points
        .par_iter()
        .map(|spec| {
            let prediction = predicted_zero(spec);
            let state = match family_state(spec) {
                Ok(s) => s,
                Err(Error::ZeroNorm) => {
                    return Ok(SweepRow {
                        spec: *spec,
                        tau4: None,
                        certified_lower: None,
                        prediction,
                        agree: true,
                        note: Some("skipped: parameters give the zero vector".into()),
                    })
                }
                Err(e) => return Err(e),
            };
            let report = tau4_pure4(&state, PREDICTION_SITE, config)?;
            let agree = match prediction.expected {
                Expected::Zero => report.tau4 <= opts.zero_tol,
                Expected::Nonzero => certify_report(&report, opts.min_gap).is_nonzero(),
                Expected::Unspecified => true,
            };
            Ok(SweepRow {
                spec: *spec,
                tau4: Some(report.tau4),
                certified_lower: Some(report.certified_lower),
                prediction,
                agree,
                note: None,
            })
        })
        .collect()
}

fn normalized(terms: &[(f64, &str)]) -> StateVector {
    let t: Vec<(C64, &str)> = terms.iter().map(|&(x, l)| (C64::new(x, 0.0), l)).collect();
    StateVector::from_terms(&t)
        .and_then(|s| s.normalize())
        .expect("fixed nonzero state")
}

/// `(|0000⟩+|1111⟩)/√2`
pub fn ghz4() -> StateVector {
    normalized(&[(1.0, "0000"), (1.0, "1111")])
}

/// `(|0001⟩+|0010⟩+|0100⟩+|1000⟩)/2`
pub fn w4() -> StateVector {
    normalized(&[(1.0, "0001"), (1.0, "0010"), (1.0, "0100"), (1.0, "1000")])
}

/// `|Φ⁺⟩_AB ⊗ |Φ⁺⟩_CD`
pub fn bell_pair_product() -> StateVector {
    let bell = normalized(&[(1.0, "00"), (1.0, "11")]);
    bell.tensor(&bell)
}
