//! JSON model descriptors and their builders.

use mlz_core::analytic::{
    bowtie_alpha, dtcm4_probabilities, dtcm5_probabilities, five_state_probabilities,
    six_state_probabilities, AnalyticSolution,
};
use mlz_core::model::{invert_permutation, permute_matrix};
use mlz_core::{
    build_bowtie, build_chain, build_dtcm, build_five_state, build_four_state, build_generic,
    build_six_state, Complex64, MlzModel,
};
use serde_json::Value;

use crate::schema::{child, index, Checker};

pub const FAMILIES: [&str; 7] = [
    "generic",
    "bowtie",
    "chain",
    "dtcm",
    "four_state",
    "five_state",
    "six_state",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Generic {
        beta: Vec<f64>,
        couplings: Vec<(usize, usize, Complex64)>,
    },
    Bowtie {
        beta0: f64,
        outer: Vec<(f64, f64)>,
    },
    Chain {
        beta: Vec<f64>,
        g: Vec<f64>,
    },
    Dtcm {
        n_states: usize,
        g: f64,
        n_b: f64,
        beta_scale: f64,
    },
    FourState {
        beta: f64,
        beta1: f64,
        beta2: f64,
        g1: f64,
        g2: f64,
    },
    FiveState {
        b: f64,
        b3: f64,
        b4: f64,
        b5: f64,
        g13: f64,
        g14: f64,
        taus: [i8; 3],
    },
    SixState {
        beta1: f64,
        beta2: f64,
        beta3: f64,
        g12: f64,
        g13: f64,
        g23: f64,
    },
}

/// Model descriptor `{ "family": ..., "params": {...} }` as written in the
/// config, kept as JSON so sweeps can override single parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: String,
    pub params: Value,
}

impl ModelSpec {
    pub fn parse(c: &mut Checker, v: &Value, pointer: &str) -> Option<Self> {
        let map = c.object(v, pointer, &["family", "params"])?;
        let family = c
            .required(map, pointer, "family")
            .and_then(|f| c.one_of(f, &child(pointer, "family"), &FAMILIES));
        let params = c.required(map, pointer, "params");
        let spec = Self {
            family: family?.to_string(),
            params: params?.clone(),
        };
        let base = c.violations.len();
        if let Some(family) = spec.family_at(c, &child(pointer, "params"), &[]) {
            if c.violations.len() == base {
                if let Err(e) = family.build() {
                    c.fail(child(pointer, "params"), e.to_string());
                }
            }
        }
        Some(spec)
    }

    /// Typed parameters with each `(pointer, value)` of `set` replacing the
    /// number at `/params{pointer}`.
    pub fn family_at(
        &self,
        c: &mut Checker,
        pointer: &str,
        set: &[(String, f64)],
    ) -> Option<Family> {
        let mut params = self.params.clone();
        for (at, value) in set {
            match params.pointer_mut(at) {
                Some(slot) if slot.is_number() => *slot = Value::from(*value),
                _ => {
                    c.fail(
                        format!("{pointer}{at}"),
                        "sweep parameter must name a number",
                    );
                    return None;
                }
            }
        }
        parse_family(c, &self.family, &params, pointer)
    }

    /// Typed parameters as written.
    pub fn family_as_written(&self) -> Result<Family, String> {
        self.family_with(&[])
    }

    pub fn family_with(&self, set: &[(String, f64)]) -> Result<Family, String> {
        let mut c = Checker::default();
        self.family_at(&mut c, "/model/params", set)
            .filter(|_| c.is_clean())
            .ok_or_else(|| {
                c.violations
                    .iter()
                    .map(|v| format!("{}: {}", v.pointer, v.message))
                    .collect::<Vec<_>>()
                    .join("; ")
            })
    }
}

fn parse_family(c: &mut Checker, family: &str, v: &Value, p: &str) -> Option<Family> {
    let keys: &[&str] = match family {
        "generic" => &["beta", "couplings"],
        "bowtie" => &["beta0", "outer"],
        "chain" => &["beta", "g"],
        "dtcm" => &["n_states", "g", "n_b", "beta_scale"],
        "four_state" => &["beta", "beta1", "beta2", "g1", "g2"],
        "five_state" => &["b", "b3", "b4", "b5", "g13", "g14", "taus"],
        "six_state" => &["beta1", "beta2", "beta3", "g12", "g13", "g23"],
        _ => unreachable!("family names are validated first"),
    };
    let m = c.object(v, p, keys)?;
    let num = |c: &mut Checker, key: &str| c.req_number(m, p, key);
    let family = match family {
        "generic" => {
            let beta = c
                .required(m, p, "beta")
                .and_then(|b| c.numbers(b, &child(p, "beta")));
            if let Some(beta) = &beta {
                c.distinct(beta, &child(p, "beta"));
            }
            let couplings = c
                .required(m, p, "couplings")
                .and_then(|v| c.array_of(v, &child(p, "couplings"), coupling));
            Family::Generic {
                beta: beta?,
                couplings: couplings?,
            }
        }
        "bowtie" => {
            let beta0 = num(c, "beta0");
            let outer = c.required(m, p, "outer").and_then(|v| {
                c.array_of(v, &child(p, "outer"), |c, x, q| {
                    let o = c.object(x, q, &["beta", "g"])?;
                    Some((c.req_number(o, q, "beta")?, c.req_number(o, q, "g")?))
                })
            });
            if let (Some(b0), Some(outer)) = (beta0, &outer) {
                let all: Vec<f64> = std::iter::once(b0)
                    .chain(outer.iter().map(|o| o.0))
                    .collect();
                c.distinct(&all[1..], &child(p, "outer"));
                if let Some(k) = outer.iter().position(|o| o.0 == b0) {
                    c.fail(child(&index(&child(p, "outer"), k), "beta"), "equals beta0");
                }
            }
            Family::Bowtie {
                beta0: beta0?,
                outer: outer?,
            }
        }
        "chain" => {
            let beta = c
                .required(m, p, "beta")
                .and_then(|b| c.numbers(b, &child(p, "beta")));
            if let Some(beta) = &beta {
                c.distinct(beta, &child(p, "beta"));
            }
            let g = c
                .required(m, p, "g")
                .and_then(|b| c.numbers(b, &child(p, "g")));
            Family::Chain { beta: beta?, g: g? }
        }
        "dtcm" => {
            let n_states = c
                .required(m, p, "n_states")
                .and_then(|v| c.count(v, &child(p, "n_states")));
            Family::Dtcm {
                n_states: n_states?,
                g: num(c, "g")?,
                n_b: c.opt_number(m, p, "n_b", 0.0)?,
                beta_scale: c.opt_number(m, p, "beta_scale", 1.0)?,
            }
        }
        "four_state" => {
            let vals = ["beta", "beta1", "beta2", "g1", "g2"].map(|k| num(c, k));
            let [beta, beta1, beta2, g1, g2] = vals;
            Family::FourState {
                beta: beta?,
                beta1: beta1?,
                beta2: beta2?,
                g1: g1?,
                g2: g2?,
            }
        }
        "five_state" => {
            let vals = ["b", "b3", "b4", "b5", "g13", "g14"].map(|k| num(c, k));
            let taus = match m.get("taus") {
                None => Some([1, 1, 1]),
                Some(v) => {
                    let q = child(p, "taus");
                    c.array_of(v, &q, |c, x, q| match x.as_i64() {
                        Some(t @ (-1 | 1)) => Some(t as i8),
                        _ => {
                            c.fail(q, "expected 1 or -1");
                            None
                        }
                    })
                    .and_then(|t| match <[i8; 3]>::try_from(t) {
                        Ok(t) => Some(t),
                        Err(_) => {
                            c.fail(q, "expected exactly three signs");
                            None
                        }
                    })
                }
            };
            let [b, b3, b4, b5, g13, g14] = vals;
            Family::FiveState {
                b: b?,
                b3: b3?,
                b4: b4?,
                b5: b5?,
                g13: g13?,
                g14: g14?,
                taus: taus?,
            }
        }
        "six_state" => {
            let vals = ["beta1", "beta2", "beta3", "g12", "g13", "g23"].map(|k| num(c, k));
            let [beta1, beta2, beta3, g12, g13, g23] = vals;
            Family::SixState {
                beta1: beta1?,
                beta2: beta2?,
                beta3: beta3?,
                g12: g12?,
                g13: g13?,
                g23: g23?,
            }
        }
        _ => unreachable!(),
    };
    Some(family)
}

/// `{"i": 0, "j": 1, "g": 0.3}` or with `"g": [re, im]`.
fn coupling(c: &mut Checker, v: &Value, p: &str) -> Option<(usize, usize, Complex64)> {
    let m = c.object(v, p, &["i", "j", "g"])?;
    let i = c
        .required(m, p, "i")
        .and_then(|x| c.count(x, &child(p, "i")));
    let j = c
        .required(m, p, "j")
        .and_then(|x| c.count(x, &child(p, "j")));
    let g = c.required(m, p, "g").and_then(|x| {
        let q = child(p, "g");
        match x {
            Value::Array(_) => {
                let parts = c.numbers(x, &q)?;
                match parts[..] {
                    [re, im] => Some(Complex64::new(re, im)),
                    _ => {
                        c.fail(q, "complex coupling must be [re, im]");
                        None
                    }
                }
            }
            _ => c.number(x, &q).map(|re| Complex64::new(re, 0.0)),
        }
    });
    Some((i?, j?, g?))
}

impl Family {
    pub fn build(&self) -> mlz_core::Result<MlzModel> {
        match self {
            Self::Generic { beta, couplings } => build_generic(beta, couplings),
            Self::Bowtie { beta0, outer } => build_bowtie(*beta0, outer),
            Self::Chain { beta, g } => build_chain(beta, g),
            &Self::Dtcm {
                n_states,
                g,
                n_b,
                beta_scale,
            } => build_dtcm(n_states, g, n_b, beta_scale),
            &Self::FourState {
                beta,
                beta1,
                beta2,
                g1,
                g2,
            } => build_four_state(beta, beta1, beta2, g1, g2),
            &Self::FiveState {
                b,
                b3,
                b4,
                b5,
                g13,
                g14,
                taus,
            } => build_five_state(b, b3, b4, b5, g13, g14, taus),
            &Self::SixState {
                beta1,
                beta2,
                beta3,
                g12,
                g13,
                g23,
            } => build_six_state(beta1, beta2, beta3, g12, g13, g23),
        }
    }

    /// Closed-form solution in model order, or a reason why none exists.
    pub fn analytic(&self) -> Result<mlz_core::Result<AnalyticSolution>, String> {
        match self {
            Self::Bowtie { .. } => Ok(self.build().and_then(|m| {
                let mut sol = bowtie_alpha(&m)?.solution;
                let inv = invert_permutation(&sol.states);
                sol.p = permute_matrix(&sol.p, &inv);
                sol.s = sol.s.map(|s| permute_matrix(&s, &inv));
                sol.states = (0..m.n()).collect();
                Ok(sol)
            })),
            &Self::Dtcm {
                n_states,
                g,
                n_b,
                beta_scale,
            } => {
                if n_b != 0.0 || beta_scale <= 0.0 || !matches!(n_states, 4 | 5) {
                    return Err(
                        "closed forms exist for dtcm with n_states 4 or 5, n_b = 0 and \
                                positive beta_scale"
                            .into(),
                    );
                }
                // Probabilities depend on g only through g² / beta_scale.
                let g = g / beta_scale.sqrt();
                Ok(Ok(if n_states == 4 {
                    dtcm4_probabilities(g)
                } else {
                    dtcm5_probabilities(g)
                }))
            }
            &Self::FiveState {
                b,
                b3,
                b4,
                b5,
                g13,
                g14,
                taus,
            } => Ok(five_state_probabilities(b, b3, b4, b5, g13, g14, taus)),
            &Self::SixState {
                beta1,
                beta2,
                beta3,
                g12,
                g13,
                g23,
            } => Ok(six_state_probabilities(beta1, beta2, beta3, g12, g13, g23)),
            Self::Generic { .. } | Self::Chain { .. } | Self::FourState { .. } => {
                Err("no closed-form solution for this family".into())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn parse(v: Value) -> (Option<ModelSpec>, Checker) {
        let mut c = Checker::default();
        let spec = ModelSpec::parse(&mut c, &v, "/model");
        (spec, c)
    }

    #[test]
    fn minimal_two_state() {
        let (spec, mut c) = parse(json!({
            "family": "generic",
            "params": {"beta": [1, -1], "couplings": [{"i": 0, "j": 1, "g": 0.25}]}
        }));
        assert!(c.is_clean(), "{:?}", c.violations);
        let model = spec
            .unwrap()
            .family_at(&mut c, "", &[])
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(model.n(), 2);
    }

    #[test]
    fn duplicated_beta_names_the_field() {
        let (_, c) = parse(json!({
            "family": "chain",
            "params": {"beta": [1, 0, 1], "g": [0.1, 0.2]}
        }));
        assert_eq!(c.violations.len(), 1);
        assert_eq!(c.violations[0].pointer, "/model/params/beta/2");
    }

    #[test]
    fn builder_errors_point_at_params() {
        let (_, c) = parse(json!({
            "family": "six_state",
            "params": {"beta1": 1, "beta2": 2, "beta3": 3, "g12": 0.1, "g13": 0.1, "g23": 0.1}
        }));
        assert_eq!(c.violations[0].pointer, "/model/params");
    }

    #[test]
    fn every_field_error_is_listed() {
        let (_, c) = parse(json!({
            "family": "four_state",
            "params": {"beta": "x", "beta1": 1, "g1": 0.1, "g2": null, "extra": 1}
        }));
        let mut pointers: Vec<&str> = c.violations.iter().map(|v| v.pointer.as_str()).collect();
        pointers.sort();
        assert_eq!(
            pointers,
            [
                "/model/params/beta",
                "/model/params/beta2",
                "/model/params/extra",
                "/model/params/g2"
            ]
        );
    }

    #[test]
    fn sweep_override_replaces_one_entry() {
        let (spec, _) = parse(json!({
            "family": "chain",
            "params": {"beta": [5, 2, 1, 0], "g": [0.5, 0.5, 0.1]}
        }));
        let f = spec.unwrap().family_with(&[("/g/2".into(), 0.47)]).unwrap();
        assert_eq!(
            f,
            Family::Chain {
                beta: vec![5.0, 2.0, 1.0, 0.0],
                g: vec![0.5, 0.5, 0.47]
            }
        );
    }

    #[test]
    fn scaled_dtcm_matches_unit_scale() {
        let scaled = Family::Dtcm {
            n_states: 4,
            g: 0.4,
            n_b: 0.0,
            beta_scale: 4.0,
        };
        let unit = Family::Dtcm {
            n_states: 4,
            g: 0.2,
            n_b: 0.0,
            beta_scale: 1.0,
        };
        let a = scaled.analytic().unwrap().unwrap().p;
        let b = unit.analytic().unwrap().unwrap().p;
        assert!((a - b).abs().max() < 1e-15);
    }

    #[test]
    fn bowtie_solution_is_in_model_order() {
        let f = Family::Bowtie {
            beta0: 0.0,
            outer: vec![(1.0, 0.3), (2.0, 0.4)],
        };
        let sol = f.analytic().unwrap().unwrap();
        let model = f.build().unwrap();
        // Only the centre couples, so the steepest outer level's survival
        // probability is the two-level one.
        let p22 = (-2.0 * std::f64::consts::PI * 0.16 / 2.0).exp();
        assert!((sol.p[(2, 2)] - p22).abs() < 1e-12);
        assert_eq!(sol.states, (0..model.n()).collect::<Vec<_>>());
    }
}
