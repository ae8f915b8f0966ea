//! Polynomial aerodynamic coefficient model.
//!
//! Each of the six coefficients is a sum of monomials over the variables that
//! coefficient is allowed to depend on:
//!
//! | coefficient | arguments                              |
//! |-------------|----------------------------------------|
//! | `CD`, `CL`, `Cm` | alpha, q, de                      |
//! | `CY`, `Cl`, `Cn` | alpha, beta, p, r, de, da, dr     |
//!
//! Terms flagged `nondim` (the default) see body rates as `p*b/(2V)`,
//! `q*c/(2V)` and `r*b/(2V)`; other terms see raw rad/s.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sanity bound on any evaluated coefficient.
pub const COEFFICIENT_BOUND: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AeroVar {
    Alpha,
    Beta,
    P,
    Q,
    R,
    De,
    Da,
    Dr,
}

impl AeroVar {
    pub const ALL: [AeroVar; 8] = [
        AeroVar::Alpha,
        AeroVar::Beta,
        AeroVar::P,
        AeroVar::Q,
        AeroVar::R,
        AeroVar::De,
        AeroVar::Da,
        AeroVar::Dr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AeroVar::Alpha => "alpha",
            AeroVar::Beta => "beta",
            AeroVar::P => "p",
            AeroVar::Q => "q",
            AeroVar::R => "r",
            AeroVar::De => "de",
            AeroVar::Da => "da",
            AeroVar::Dr => "dr",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    fn is_rate(self) -> bool {
        matches!(self, AeroVar::P | AeroVar::Q | AeroVar::R)
    }
}

impl fmt::Display for AeroVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coefficient {
    Drag,
    Lift,
    Side,
    Roll,
    Pitch,
    Yaw,
}

impl Coefficient {
    pub const ALL: [Coefficient; 6] = [
        Coefficient::Drag,
        Coefficient::Lift,
        Coefficient::Side,
        Coefficient::Roll,
        Coefficient::Pitch,
        Coefficient::Yaw,
    ];

    /// Key used in the config file.
    pub fn key(self) -> &'static str {
        match self {
            Coefficient::Drag => "CD",
            Coefficient::Lift => "CL",
            Coefficient::Side => "CY",
            Coefficient::Roll => "Cl",
            Coefficient::Pitch => "Cm",
            Coefficient::Yaw => "Cn",
        }
    }

    /// Variables the coefficient may depend on.
    pub fn signature(self) -> &'static [AeroVar] {
        use AeroVar::*;
        match self {
            Coefficient::Drag | Coefficient::Lift | Coefficient::Pitch => &[Alpha, Q, De],
            Coefficient::Side | Coefficient::Roll | Coefficient::Yaw => &[Alpha, Beta, P, R, De, Da, Dr],
        }
    }
}

/// One monomial: `coef * prod(var^exp)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeroTerm {
    #[serde(default)]
    pub vars: BTreeMap<String, u32>,
    pub coef: f64,
    #[serde(default = "default_nondim")]
    pub nondim: bool,
}

fn default_nondim() -> bool {
    true
}

impl AeroTerm {
    pub fn new(vars: &[(AeroVar, u32)], coef: f64) -> Self {
        AeroTerm {
            vars: vars.iter().map(|(v, e)| (v.name().to_string(), *e)).collect(),
            coef,
            nondim: true,
        }
    }
}

/// On-disk aero model description.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AeroModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(rename = "CD", default)]
    pub drag: Vec<AeroTerm>,
    #[serde(rename = "CL", default)]
    pub lift: Vec<AeroTerm>,
    #[serde(rename = "CY", default)]
    pub side: Vec<AeroTerm>,
    #[serde(rename = "Cl", default)]
    pub roll: Vec<AeroTerm>,
    #[serde(rename = "Cm", default)]
    pub pitch: Vec<AeroTerm>,
    #[serde(rename = "Cn", default)]
    pub yaw: Vec<AeroTerm>,
}

impl AeroModelConfig {
    pub fn terms(&self, c: Coefficient) -> &[AeroTerm] {
        match c {
            Coefficient::Drag => &self.drag,
            Coefficient::Lift => &self.lift,
            Coefficient::Side => &self.side,
            Coefficient::Roll => &self.roll,
            Coefficient::Pitch => &self.pitch,
            Coefficient::Yaw => &self.yaw,
        }
    }

    pub fn terms_mut(&mut self, c: Coefficient) -> &mut Vec<AeroTerm> {
        match c {
            Coefficient::Drag => &mut self.drag,
            Coefficient::Lift => &mut self.lift,
            Coefficient::Side => &mut self.side,
            Coefficient::Roll => &mut self.roll,
            Coefficient::Pitch => &mut self.pitch,
            Coefficient::Yaw => &mut self.yaw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub cd: f64,
    pub cl: f64,
    pub cy: f64,
    pub c_roll: f64,
    pub c_pitch: f64,
    pub c_yaw: f64,
}

impl CoefficientSet {
    pub fn get(&self, c: Coefficient) -> f64 {
        match c {
            Coefficient::Drag => self.cd,
            Coefficient::Lift => self.cl,
            Coefficient::Side => self.cy,
            Coefficient::Roll => self.c_roll,
            Coefficient::Pitch => self.c_pitch,
            Coefficient::Yaw => self.c_yaw,
        }
    }

    fn slot(&mut self, c: Coefficient) -> &mut f64 {
        match c {
            Coefficient::Drag => &mut self.cd,
            Coefficient::Lift => &mut self.cl,
            Coefficient::Side => &mut self.cy,
            Coefficient::Roll => &mut self.c_roll,
            Coefficient::Pitch => &mut self.c_pitch,
            Coefficient::Yaw => &mut self.c_yaw,
        }
    }
}

/// Flight condition seen by the coefficient model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AeroInputs {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub v: f64,
    pub de: f64,
    pub da: f64,
    pub dr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondimensionalRates {
    pub p_hat: f64,
    pub q_hat: f64,
    pub r_hat: f64,
}

impl NondimensionalRates {
    pub fn new(p: f64, q: f64, r: f64, v: f64, span: f64, chord: f64) -> Self {
        let k = 0.5 / v;
        NondimensionalRates {
            p_hat: p * span * k,
            q_hat: q * chord * k,
            r_hat: r * span * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledTerm {
    coef: f64,
    factors: Vec<(AeroVar, u32)>,
    nondim: bool,
}

/// Validated, immutable coefficient model.
#[derive(Debug, Clone, PartialEq)]
pub struct AeroModel {
    config: AeroModelConfig,
    compiled: [Vec<CompiledTerm>; 6],
}

impl AeroModel {
    /// Model with every coefficient identically zero.
    pub fn zero() -> Self {
        Self::from_config(AeroModelConfig::default()).expect("empty config is valid")
    }

    pub fn from_config(config: AeroModelConfig) -> Result<Self> {
        let mut compiled: [Vec<CompiledTerm>; 6] = Default::default();
        for (slot, c) in compiled.iter_mut().zip(Coefficient::ALL) {
            for (i, term) in config.terms(c).iter().enumerate() {
                let at = || format!("{}[{}]", c.key(), i);
                if !term.coef.is_finite() {
                    return Err(Error::config(format!("{}: non-finite coefficient {}", at(), term.coef)));
                }
                let mut factors = Vec::with_capacity(term.vars.len());
                for (name, &exp) in &term.vars {
                    let var = AeroVar::from_name(name)
                        .ok_or_else(|| Error::config(format!("{}: unknown variable {name:?}", at())))?;
                    if !c.signature().contains(&var) {
                        return Err(Error::config(format!(
                            "{}: {} may not depend on {var} (allowed: {})",
                            at(),
                            c.key(),
                            c.signature().iter().map(|v| v.name()).collect::<Vec<_>>().join(", ")
                        )));
                    }
                    if exp > 0 {
                        factors.push((var, exp));
                    }
                }
                slot.push(CompiledTerm {
                    coef: term.coef,
                    factors,
                    nondim: term.nondim,
                });
            }
        }
        Ok(AeroModel { config, compiled })
    }

    pub fn config(&self) -> &AeroModelConfig {
        &self.config
    }

    /// Evaluate all six coefficients. `span` and `chord` are used for the
    /// nondimensional rates.
    pub fn evaluate(&self, x: &AeroInputs, span: f64, chord: f64) -> Result<CoefficientSet> {
        if !(x.v > 0.0) {
            return Err(Error::Domain(format!("aero evaluation needs V > 0, got {}", x.v)));
        }
        let hat = NondimensionalRates::new(x.p, x.q, x.r, x.v, span, chord);
        let mut out = CoefficientSet::default();
        for (terms, c) in self.compiled.iter().zip(Coefficient::ALL) {
            let mut sum = 0.0;
            for term in terms {
                let mut value = term.coef;
                for &(var, exp) in &term.factors {
                    let base = match var {
                        AeroVar::Alpha => x.alpha,
                        AeroVar::Beta => x.beta,
                        AeroVar::P if term.nondim => hat.p_hat,
                        AeroVar::Q if term.nondim => hat.q_hat,
                        AeroVar::R if term.nondim => hat.r_hat,
                        AeroVar::P => x.p,
                        AeroVar::Q => x.q,
                        AeroVar::R => x.r,
                        AeroVar::De => x.de,
                        AeroVar::Da => x.da,
                        AeroVar::Dr => x.dr,
                    };
                    value *= base.powi(exp as i32);
                }
                sum += value;
            }
            if !sum.is_finite() || sum.abs() >= COEFFICIENT_BOUND {
                return Err(Error::Numerical(format!("{} evaluated to {sum}", c.key())));
            }
            *out.slot(c) = sum;
        }
        Ok(out)
    }

    /// Whether any term of `c` reads body rates in nondimensional form.
    pub fn uses_nondim_rates(&self, c: Coefficient) -> bool {
        self.compiled[Coefficient::ALL.iter().position(|&k| k == c).unwrap()]
            .iter()
            .any(|t| t.nondim && t.factors.iter().any(|(v, _)| v.is_rate()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.config).expect("aero config serializes")
    }

    /// Same model with every term coefficient multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let mut config = self.config.clone();
        for c in Coefficient::ALL {
            for term in config.terms_mut(c) {
                term.coef *= k;
            }
        }
        Self::from_config(config)
    }
}

/// Parse and validate aero model text (JSON).
pub fn load_aero_config(text: &str) -> Result<AeroModel> {
    let config: AeroModelConfig =
        serde_json::from_str(text).map_err(|e| Error::config(format!("aero config: {e}")))?;
    AeroModel::from_config(config)
}

pub fn load_aero_file(path: impl AsRef<std::path::Path>) -> Result<AeroModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_aero_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// The shipped high-alpha model.
pub const DEFAULT_AERO_JSON: &str = include_str!("../../../configs/aero_harv.json");

pub fn default_aero_model() -> AeroModel {
    load_aero_config(DEFAULT_AERO_JSON).expect("shipped aero config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs() -> AeroInputs {
        AeroInputs {
            alpha: 0.4,
            beta: 0.05,
            p: -0.3,
            q: 0.2,
            r: 0.9,
            v: 300.0,
            de: -0.1,
            da: 0.05,
            dr: -0.2,
        }
    }

    #[test]
    fn zero_model_evaluates_to_zero() {
        let c = AeroModel::zero().evaluate(&inputs(), 37.42, 11.52).unwrap();
        assert_eq!(c, CoefficientSet::default());
    }

    #[test]
    fn thin_airfoil_lift() {
        let config = AeroModelConfig {
            lift: vec![AeroTerm::new(&[(AeroVar::Alpha, 1)], 2.0 * std::f64::consts::PI)],
            ..Default::default()
        };
        let model = AeroModel::from_config(config).unwrap();
        let x = AeroInputs { alpha: 0.1, v: 200.0, ..Default::default() };
        let c = model.evaluate(&x, 37.42, 11.52).unwrap();
        assert!((c.cl - 0.6283).abs() < 1e-4);
        assert_eq!(c.cd, 0.0);
        assert_eq!(c.c_pitch, 0.0);
    }

    #[test]
    fn empty_text_is_valid_zero_model() {
        let m = load_aero_config("{}").unwrap();
        assert_eq!(m, AeroModel::zero());
        let m = load_aero_config(r#"{"CD": [], "CL": [], "CY": [], "Cl": [], "Cm": [], "Cn": []}"#).unwrap();
        assert_eq!(m.evaluate(&inputs(), 1.0, 1.0).unwrap(), CoefficientSet::default());
    }

    #[test]
    fn pitch_may_not_read_sideslip() {
        let err = load_aero_config(r#"{"Cm": [{"vars": {"beta": 1}, "coef": 0.1}]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config(_)));
        assert!(msg.contains("Cm[0]") && msg.contains("beta"), "{msg}");
    }

    #[test]
    fn unknown_variable_is_rejected() {
        let err = load_aero_config(r#"{"CL": [{"vars": {"mach": 1}, "coef": 0.1}]}"#).unwrap_err();
        assert!(err.to_string().contains("unknown variable"), "{err}");
    }

    #[test]
    fn unknown_coefficient_key_is_rejected() {
        assert!(load_aero_config(r#"{"CX": []}"#).is_err());
    }

    #[test]
    fn non_finite_coefficient_is_rejected() {
        let mut config = AeroModelConfig::default();
        config.drag.push(AeroTerm::new(&[], f64::NAN));
        assert!(matches!(AeroModel::from_config(config), Err(Error::Config(_))));
        assert!(load_aero_config(r#"{"CD": [{"coef": 1e999}]}"#).is_err());
    }

    #[test]
    fn nondim_flag_switches_rate_scaling() {
        let mut term = AeroTerm::new(&[(AeroVar::P, 1)], 1.0);
        let x = AeroInputs { p: 2.0, v: 100.0, ..Default::default() };
        let span = 40.0;
        let nondim = AeroModel::from_config(AeroModelConfig { roll: vec![term.clone()], ..Default::default() }).unwrap();
        assert!((nondim.evaluate(&x, span, 10.0).unwrap().c_roll - 2.0 * 40.0 / 200.0).abs() < 1e-15);
        assert!(nondim.uses_nondim_rates(Coefficient::Roll));
        term.nondim = false;
        let raw = AeroModel::from_config(AeroModelConfig { roll: vec![term], ..Default::default() }).unwrap();
        assert_eq!(raw.evaluate(&x, span, 10.0).unwrap().c_roll, 2.0);
        assert!(!raw.uses_nondim_rates(Coefficient::Roll));
    }

    #[test]
    fn pitch_rate_uses_chord() {
        let m = load_aero_config(r#"{"Cm": [{"vars": {"q": 1}, "coef": 1.0}]}"#).unwrap();
        let x = AeroInputs { q: 1.0, v: 50.0, ..Default::default() };
        assert!((m.evaluate(&x, 37.42, 11.52).unwrap().c_pitch - 11.52 / 100.0).abs() < 1e-15);
    }

    #[test]
    fn zero_airspeed_is_domain_error() {
        let x = AeroInputs { v: 0.0, ..Default::default() };
        assert!(matches!(AeroModel::zero().evaluate(&x, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn out_of_bound_coefficient_is_numerical_error() {
        let m = load_aero_config(r#"{"CD": [{"vars": {"alpha": 2}, "coef": 1000.0}]}"#).unwrap();
        let x = AeroInputs { alpha: 1.0, v: 100.0, ..Default::default() };
        assert!(matches!(m.evaluate(&x, 1.0, 1.0), Err(Error::Numerical(_))));
    }

    #[test]
    fn shipped_default_round_trips() {
        let model = default_aero_model();
        let again = load_aero_config(&model.to_json()).unwrap();
        assert_eq!(model, again);
        assert_eq!(again.to_json(), model.to_json());
    }

    fn arb_inputs() -> impl Strategy<Value = AeroInputs> {
        (
            (-0.244f64..1.571, -0.5f64..0.5, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0),
            (50.0f64..900.0, -0.436f64..0.175, -0.436f64..0.436, -0.524f64..0.524),
        )
            .prop_map(|((alpha, beta, p, q, r), (v, de, da, dr))| AeroInputs {
                alpha,
                beta,
                p,
                q,
                r,
                v,
                de,
                da,
                dr,
            })
    }

    proptest! {
        #[test]
        fn non_arguments_do_not_leak(x in arb_inputs(), delta in -0.3f64..0.3) {
            let model = default_aero_model();
            let base = model.evaluate(&x, 37.42, 11.52).unwrap();
            for var in AeroVar::ALL {
                let mut y = x;
                match var {
                    AeroVar::Alpha => y.alpha += delta,
                    AeroVar::Beta => y.beta += delta,
                    AeroVar::P => y.p += delta,
                    AeroVar::Q => y.q += delta,
                    AeroVar::R => y.r += delta,
                    AeroVar::De => y.de += delta,
                    AeroVar::Da => y.da += delta,
                    AeroVar::Dr => y.dr += delta,
                }
                let Ok(perturbed) = model.evaluate(&y, 37.42, 11.52) else { continue };
                for c in Coefficient::ALL {
                    if !c.signature().contains(&var) {
                        prop_assert_eq!(base.get(c).to_bits(), perturbed.get(c).to_bits());
                    }
                }
            }
        }

        #[test]
        fn linear_in_term_coefficients(x in arb_inputs(), k in -3.0f64..3.0) {
            let model = default_aero_model();
            let base = model.evaluate(&x, 37.42, 11.52).unwrap();
            let scaled = model.scaled(k).unwrap();
            if let Ok(s) = scaled.evaluate(&x, 37.42, 11.52) {
                for c in Coefficient::ALL {
                    prop_assert!((s.get(c) - k * base.get(c)).abs() <= 1e-12 * (1.0 + base.get(c).abs() * k.abs()));
                }
            }
        }
    }
}
