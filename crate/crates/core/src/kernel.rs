//! Infection rate kernels `f` and the metadata the threshold analysis needs.
//!
//! Every kernel satisfies `f(0) = 0` and is nonnegative on the nonnegative
//! integers. Concavity and the derivative at zero are declared, not derived:
//! concavity is checked on integer increments, `f'(0)` is a fixed property of
//! each closed-form variant.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

const CONCAVITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    Identity,
    Arctan,
    /// `scale * ln(1 + x)`
    LogOnePlus { scale: f64 },
    /// `min(cap, x)`
    SaturatingMin { cap: u32 },
    /// `c2 * 1(x >= c1)`
    Threshold { c1: u32, c2: f64 },
    /// `values[l]` for integer `l`; no continuous extension.
    Tabulated { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct InfectionFunction {
    kind: KernelKind,
    declared_concave: bool,
    fprime_zero: Option<f64>,
}

impl InfectionFunction {
    pub fn identity() -> Self {
        InfectionFunction {
            kind: KernelKind::Identity,
            declared_concave: true,
            fprime_zero: Some(1.0),
        }
    }

    pub fn arctan() -> Self {
        InfectionFunction {
            kind: KernelKind::Arctan,
            declared_concave: true,
            fprime_zero: Some(1.0),
        }
    }

    pub fn log_one_plus(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Validation(format!(
                "log1p scale must be positive, got {scale}"
            )));
        }
        Ok(InfectionFunction {
            kind: KernelKind::LogOnePlus { scale },
            declared_concave: true,
            fprime_zero: Some(scale),
        })
    }

    pub fn saturating_min(cap: u32) -> Result<Self> {
        if cap == 0 {
            return Err(Error::Validation("min kernel cap must be positive".into()));
        }
        Ok(InfectionFunction {
            kind: KernelKind::SaturatingMin { cap },
            declared_concave: true,
            fprime_zero: Some(1.0),
        })
    }

    pub fn threshold(c1: u32, c2: f64) -> Result<Self> {
        if c1 == 0 {
            return Err(Error::Validation("threshold c1 must be at least 1".into()));
        }
        if !(c2.is_finite() && c2 > 0.0) {
            return Err(Error::Validation(format!(
                "threshold c2 must be positive, got {c2}"
            )));
        }
        Ok(InfectionFunction {
            kind: KernelKind::Threshold { c1, c2 },
            declared_concave: false,
            fprime_zero: None,
        })
    }

    /// Tabulated kernel `f(l) = values[l]` for `l = 0..values.len()`.
    /// A declared-concave table is checked over its whole range.
    pub fn tabulated(
        values: Vec<f64>,
        declared_concave: bool,
        fprime_zero: Option<f64>,
    ) -> Result<Self> {
        match values.first() {
            None => return Err(Error::Validation("kernel table is empty".into())),
            Some(&v) if v != 0.0 => {
                return Err(Error::Validation(format!(
                    "kernel table must start with f(0) = 0, got {v}"
                )))
            }
            _ => {}
        }
        if let Some((l, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::Validation(format!(
                "kernel table entry f({l}) = {v} is not a nonnegative number"
            )));
        }
        if let Some(d) = fprime_zero {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::Validation(format!(
                    "declared f'(0) must be nonnegative, got {d}"
                )));
            }
        }
        let f = InfectionFunction {
            kind: KernelKind::Tabulated { values },
            declared_concave,
            fprime_zero,
        };
        if declared_concave {
            let last = f.table_len().unwrap() - 1;
            f.verify_concavity(last)?;
        }
        Ok(f)
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn is_declared_concave(&self) -> bool {
        self.declared_concave
    }

    fn table_len(&self) -> Option<usize> {
        match &self.kind {
            KernelKind::Tabulated { values } => Some(values.len()),
            _ => None,
        }
    }

    /// `f(l)` at a nonnegative integer.
    ///
    /// Tabulated kernels panic beyond their table; [`InfectionFunction::check_support`]
    /// guards model construction against that.
    pub fn eval_int(&self, l: usize) -> f64 {
        if l == 0 {
            return 0.0;
        }
        let x = l as f64;
        match &self.kind {
            KernelKind::Identity => x,
            KernelKind::Arctan => x.atan(),
            KernelKind::LogOnePlus { scale } => scale * x.ln_1p(),
            KernelKind::SaturatingMin { cap } => x.min(*cap as f64),
            KernelKind::Threshold { c1, c2 } => {
                if l >= *c1 as usize {
                    *c2
                } else {
                    0.0
                }
            }
            KernelKind::Tabulated { values } => *values.get(l).unwrap_or_else(|| {
                panic!("kernel table covers 0..={} but f({l}) was requested", values.len() - 1)
            }),
        }
    }

    /// Continuous-argument extension used by the expectation-commuted model.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        Ok(match &self.kind {
            KernelKind::Identity => x,
            KernelKind::Arctan => x.atan(),
            KernelKind::LogOnePlus { scale } => scale * x.ln_1p(),
            KernelKind::SaturatingMin { cap } => x.min(*cap as f64),
            KernelKind::Threshold { c1, c2 } => {
                if x >= *c1 as f64 {
                    *c2
                } else {
                    0.0
                }
            }
            KernelKind::Tabulated { .. } => {
                return Err(Error::Unsupported(
                    "tabulated kernels have no continuous extension".into(),
                ))
            }
        })
    }

    /// Whether [`InfectionFunction::eval_real`] is defined.
    pub fn has_continuous_extension(&self) -> bool {
        !matches!(self.kind, KernelKind::Tabulated { .. })
    }

    /// Fails when a tabulated kernel does not reach `max_size`.
    pub fn check_support(&self, max_size: usize) -> Result<()> {
        match self.table_len() {
            Some(len) if len <= max_size => Err(Error::Validation(format!(
                "kernel table covers 0..={} but hyperedges of size {max_size} need f({max_size})",
                len - 1
            ))),
            _ => Ok(()),
        }
    }

    /// `max_{x = 1..=K} f(x) / x`.
    pub fn c_f(&self, max_size: usize) -> Result<f64> {
        if max_size == 0 {
            return Err(Error::Validation("c_f needs K >= 1".into()));
        }
        self.check_support(max_size)?;
        let best = (1..=max_size)
            .map(|x| self.eval_int(x) / x as f64)
            .fold(0.0_f64, f64::max);
        if best > 0.0 {
            Ok(best)
        } else {
            Err(Error::Domain(format!(
                "f vanishes on 1..={max_size}; threshold analysis is undefined"
            )))
        }
    }

    pub fn f_one(&self) -> f64 {
        self.eval_int(1)
    }

    /// Declared `f'(0)`.
    pub fn fprime_zero(&self) -> Result<f64> {
        self.fprime_zero.ok_or_else(|| match self.kind {
            KernelKind::Threshold { .. } => {
                Error::Unsupported("threshold kernels are not differentiable at 0".into())
            }
            _ => Error::Unsupported(format!("kernel {self} declares no f'(0)")),
        })
    }

    /// `c2 / c1` for threshold kernels.
    pub fn threshold_ratio(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Threshold { c1, c2 } => Some(c2 / c1 as f64),
            _ => None,
        }
    }

    pub fn threshold_params(&self) -> Option<(u32, f64)> {
        match self.kind {
            KernelKind::Threshold { c1, c2 } => Some((c1, c2)),
            _ => None,
        }
    }

    /// Checks that `f(l+1) - f(l)` is nonincreasing for `l = 0..K-1`.
    pub fn verify_concavity(&self, max_size: usize) -> Result<()> {
        self.check_support(max_size)?;
        let mut prev = f64::INFINITY;
        for l in 0..max_size {
            let inc = self.eval_int(l + 1) - self.eval_int(l);
            if inc > prev + CONCAVITY_SLACK {
                return Err(Error::Validation(format!(
                    "kernel {self} is not concave: increment at {l} is {inc} > {prev}"
                )));
            }
            prev = inc;
        }
        Ok(())
    }
}

impl fmt::Display for InfectionFunction {
    /// Same syntax that [`FromStr`] accepts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            KernelKind::Identity => f.write_str("identity"),
            KernelKind::Arctan => f.write_str("arctan"),
            KernelKind::LogOnePlus { scale } => write!(f, "log1p:{scale}"),
            KernelKind::SaturatingMin { cap } => write!(f, "min:{cap}"),
            KernelKind::Threshold { c1, c2 } => write!(f, "threshold:{c1},{c2}"),
            KernelKind::Tabulated { values } => {
                let vals: Vec<String> = values.iter().map(f64::to_string).collect();
                write!(f, "table:{}", vals.join(","))
            }
        }
    }
}

impl FromStr for InfectionFunction {
    type Err = Error;

    /// `identity`, `arctan`, `log1p[:a]`, `min:c`, `threshold:c1,c2`,
    /// `table:f0,f1,...` (a trailing `;concave` declares concavity).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((name, args)) => (name.trim(), Some(args.trim())),
            None => (s, None),
        };
        let bad = |msg: String| Error::Validation(format!("kernel `{s}`: {msg}"));
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("bad number `{v}`: {e}")))
        };
        let int = |v: &str| -> Result<u32> {
            v.trim()
                .parse::<u32>()
                .map_err(|e| bad(format!("bad integer `{v}`: {e}")))
        };
        match (name, args) {
            ("identity", None) => Ok(Self::identity()),
            ("arctan", None) => Ok(Self::arctan()),
            ("log1p", None) => Self::log_one_plus(1.0),
            ("log1p", Some(a)) => Self::log_one_plus(num(a)?),
            ("min", Some(c)) => Self::saturating_min(int(c)?),
            ("threshold", Some(args)) => {
                let (c1, c2) = args
                    .split_once(',')
                    .ok_or_else(|| bad("expected threshold:c1,c2".into()))?;
                Self::threshold(int(c1)?, num(c2)?)
            }
            ("table", Some(args)) => {
                let (vals, concave) = match args.strip_suffix(";concave") {
                    Some(v) => (v, true),
                    None => (args, false),
                };
                let values = vals.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Self::tabulated(values, concave, None)
            }
            _ => Err(bad("unknown kernel or missing parameters".into())),
        }
    }
}

/// Config-file form of a kernel, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Identity,
    Arctan,
    Log1p {
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    Min {
        cap: u32,
    },
    Threshold {
        c1: u32,
        c2: f64,
    },
    Table {
        values: Vec<f64>,
        #[serde(default)]
        concave: bool,
        #[serde(default)]
        fprime_zero: Option<f64>,
    },
}

fn unit_scale() -> f64 {
    1.0
}

impl TryFrom<KernelSpec> for InfectionFunction {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        match spec {
            KernelSpec::Identity => Ok(Self::identity()),
            KernelSpec::Arctan => Ok(Self::arctan()),
            KernelSpec::Log1p { scale } => Self::log_one_plus(scale),
            KernelSpec::Min { cap } => Self::saturating_min(cap),
            KernelSpec::Threshold { c1, c2 } => Self::threshold(c1, c2),
            KernelSpec::Table {
                values,
                concave,
                fprime_zero,
            } => Self::tabulated(values, concave, fprime_zero),
        }
    }
}

impl From<InfectionFunction> for KernelSpec {
    fn from(f: InfectionFunction) -> Self {
        match f.kind {
            KernelKind::Identity => KernelSpec::Identity,
            KernelKind::Arctan => KernelSpec::Arctan,
            KernelKind::LogOnePlus { scale } => KernelSpec::Log1p { scale },
            KernelKind::SaturatingMin { cap } => KernelSpec::Min { cap },
            KernelKind::Threshold { c1, c2 } => KernelSpec::Threshold { c1, c2 },
            KernelKind::Tabulated { values } => KernelSpec::Table {
                values,
                concave: f.declared_concave,
                fprime_zero: f.fprime_zero,
            },
        }
    }
}

/// Which kernel applies to which hyperedge.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernels {
    /// One kernel for every hyperedge.
    Single(InfectionFunction),
    /// `kernels[s - 1]` applies to edges of family `s`.
    PerFamily(Vec<InfectionFunction>),
}

impl Kernels {
    /// Checks that every edge has a kernel defined up to its size.
    pub fn validate(&self, hg: &Hypergraph) -> Result<()> {
        match self {
            Kernels::Single(f) => f.check_support(hg.max_edge_size()),
            Kernels::PerFamily(list) => {
                let families = hg.families().ok_or_else(|| {
                    Error::Validation(
                        "per-family kernels need a hypergraph with family tags".into(),
                    )
                })?;
                for (h, &s) in families.iter().enumerate() {
                    let f = list.get(s as usize - 1).ok_or_else(|| Error::InvalidEdge {
                        edge: h,
                        reason: format!("family {s} has no kernel ({} given)", list.len()),
                    })?;
                    f.check_support(hg.edge(h).len())?;
                }
                Ok(())
            }
        }
    }

    /// Kernel of edge `h`; call [`Kernels::validate`] first.
    pub fn for_edge<'a>(&'a self, hg: &Hypergraph, h: usize) -> &'a InfectionFunction {
        match self {
            Kernels::Single(f) => f,
            Kernels::PerFamily(list) => {
                let s = hg.family_of(h).expect("validated family tags");
                &list[s as usize - 1]
            }
        }
    }

    pub fn all(&self) -> &[InfectionFunction] {
        match self {
            Kernels::Single(f) => std::slice::from_ref(f),
            Kernels::PerFamily(list) => list,
        }
    }

    pub fn has_continuous_extension(&self) -> bool {
        self.all().iter().all(InfectionFunction::has_continuous_extension)
    }
}

impl From<InfectionFunction> for Kernels {
    fn from(f: InfectionFunction) -> Self {
        Kernels::Single(f)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, LN_2};

    use super::*;

    fn all_closed_form() -> Vec<InfectionFunction> {
        vec![
            InfectionFunction::identity(),
            InfectionFunction::arctan(),
            InfectionFunction::log_one_plus(2.0).unwrap(),
            InfectionFunction::log_one_plus(0.3).unwrap(),
            InfectionFunction::saturating_min(3).unwrap(),
            InfectionFunction::threshold(2, 2.0).unwrap(),
            InfectionFunction::threshold(5, 0.7).unwrap(),
        ]
    }

    #[test]
    fn integer_values() {
        assert_eq!(InfectionFunction::arctan().eval_int(1), FRAC_PI_4);
        let t = InfectionFunction::threshold(5, 1.5).unwrap();
        assert_eq!(t.eval_int(4), 0.0);
        assert_eq!(t.eval_int(5), 1.5);
        assert_eq!(InfectionFunction::saturating_min(3).unwrap().eval_int(7), 3.0);
        for f in all_closed_form() {
            assert_eq!(f.eval_int(0), 0.0, "{f}");
        }
    }

    #[test]
    fn real_values() {
        let t = InfectionFunction::threshold(2, 2.0).unwrap();
        assert_eq!(t.eval_real(1.0).unwrap(), 0.0);
        let l = InfectionFunction::log_one_plus(2.0).unwrap();
        assert!((l.eval_real(1.0).unwrap() - 2.0 * LN_2).abs() < 1e-15);
        assert_eq!(InfectionFunction::identity().eval_real(0.37).unwrap(), 0.37);
        let table = InfectionFunction::tabulated(vec![0.0, 1.0, 1.5], true, None).unwrap();
        assert!(matches!(table.eval_real(1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn real_and_integer_agree_at_integers() {
        for f in all_closed_form() {
            for l in 0..12 {
                assert_eq!(f.eval_real(l as f64).unwrap(), f.eval_int(l), "{f} at {l}");
            }
        }
    }

    #[test]
    fn c_f_values() {
        assert_eq!(InfectionFunction::identity().c_f(7).unwrap(), 1.0);
        assert_eq!(InfectionFunction::arctan().c_f(5).unwrap(), FRAC_PI_4);
        // f(x)/x for x = 1..5 under threshold(2, 2): 0, 1, 2/3, 1/2, 2/5
        assert_eq!(InfectionFunction::threshold(2, 2.0).unwrap().c_f(5).unwrap(), 1.0);
        assert!(InfectionFunction::threshold(6, 1.0).unwrap().c_f(5).is_err());
        assert!(InfectionFunction::identity().c_f(0).is_err());
    }

    #[test]
    fn metadata_accessors() {
        let a = InfectionFunction::arctan();
        assert_eq!(a.f_one(), FRAC_PI_4);
        assert_eq!(a.fprime_zero().unwrap(), 1.0);
        let l = InfectionFunction::log_one_plus(2.0).unwrap();
        assert!((l.f_one() - 1.386_294_361_119_890_6).abs() < 1e-15);
        assert_eq!(l.fprime_zero().unwrap(), 2.0);
        let i = InfectionFunction::identity();
        assert_eq!((i.f_one(), i.fprime_zero().unwrap()), (1.0, 1.0));
        assert!(InfectionFunction::threshold(2, 1.0).unwrap().fprime_zero().is_err());
        assert!(InfectionFunction::tabulated(vec![0.0, 1.0], false, None)
            .unwrap()
            .fprime_zero()
            .is_err());
    }

    #[test]
    fn concave_metadata_properties() {
        for f in all_closed_form().into_iter().filter(|f| f.is_declared_concave()) {
            f.verify_concavity(30).unwrap();
            assert!(f.fprime_zero().unwrap() >= f.f_one(), "{f}");
            for k in 1..30 {
                assert_eq!(f.c_f(k).unwrap(), f.f_one(), "{f} K={k}");
            }
        }
    }

    #[test]
    fn threshold_c_f_bound() {
        for c1 in 1..6u32 {
            for c2 in [0.5, 1.0, 3.0] {
                let f = InfectionFunction::threshold(c1, c2).unwrap();
                let ratio = c2 / c1 as f64;
                for k in c1 as usize..20 {
                    let c = f.c_f(k).unwrap();
                    assert!(c <= ratio + 1e-15);
                    assert_eq!(c, ratio);
                }
            }
        }
    }

    #[test]
    fn non_concave_table_rejected() {
        assert!(InfectionFunction::tabulated(vec![0.0, 1.0, 3.0], true, None).is_err());
        assert!(InfectionFunction::tabulated(vec![1.0, 1.0], false, None).is_err());
        assert!(InfectionFunction::tabulated(vec![0.0, -1.0], false, None).is_err());
        assert!(InfectionFunction::threshold(2, 1.0).unwrap().verify_concavity(4).is_err());
    }

    #[test]
    fn table_support_check() {
        let t = InfectionFunction::tabulated(vec![0.0, 1.0, 2.0], false, None).unwrap();
        t.check_support(2).unwrap();
        assert!(t.check_support(3).is_err());
    }

    #[test]
    fn string_and_json_forms() {
        for text in ["identity", "arctan", "log1p:2", "min:3", "threshold:2,2", "table:0,1,1.5"] {
            let f: InfectionFunction = text.parse().unwrap();
            assert_eq!(f.to_string(), text);
            let json = serde_json::to_string(&f).unwrap();
            let back: InfectionFunction = serde_json::from_str(&json).unwrap();
            assert_eq!(back, f);
        }
        let f: InfectionFunction = serde_json::from_str(r#"{"kind": "log1p"}"#).unwrap();
        assert_eq!(f, InfectionFunction::log_one_plus(1.0).unwrap());
        assert!(serde_json::from_str::<InfectionFunction>(r#"{"kind": "min", "cap": 0}"#).is_err());
        assert!("cubic".parse::<InfectionFunction>().is_err());
        assert!("threshold:2".parse::<InfectionFunction>().is_err());
        let concave: InfectionFunction = "table:0,1,1.5;concave".parse().unwrap();
        assert!(concave.is_declared_concave());
    }

    #[test]
    fn per_family_validation() {
        let hg = Hypergraph::build(3, vec![vec![0, 1], vec![0, 1, 2]], Some(vec![1, 2])).unwrap();
        let ok = Kernels::PerFamily(vec![InfectionFunction::identity(), InfectionFunction::arctan()]);
        ok.validate(&hg).unwrap();
        assert_eq!(ok.for_edge(&hg, 1), &InfectionFunction::arctan());
        let short = Kernels::PerFamily(vec![InfectionFunction::identity()]);
        assert!(short.validate(&hg).is_err());
        let untagged = Hypergraph::build(3, vec![vec![0, 1]], None).unwrap();
        assert!(ok.validate(&untagged).is_err());
    }
}
