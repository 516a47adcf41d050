use growth_tight::products::{Exponent, Factor};
use growth_tight::quotients::QuotientOracle;
use growth_tight::tree_geometry::{ghat_automaton, Axis};
use growth_tight::words::EnumerationLimits;
use growth_tight::{avoid_factors, reduced_word_automaton, Alphabet, ProductSpec, ReducedWord};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Count,
    Exponent,
    Avoid,
    Ghat,
    Product,
    Quotient,
    Tightness,
    Axioms,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Count => "count",
            Command::Exponent => "exponent",
            Command::Avoid => "avoid",
            Command::Ghat => "ghat",
            Command::Product => "product",
            Command::Quotient => "quotient",
            Command::Tightness => "tightness",
            Command::Axioms => "axioms",
        }
    }

    fn default_radius(self) -> usize {
        match self {
            Command::Count | Command::Avoid | Command::Ghat | Command::Tightness => 12,
            Command::Exponent => 14,
            Command::Product => 10,
            Command::Quotient => 6,
            Command::Axioms => 0,
        }
    }

    fn default_tolerance(self) -> f64 {
        match self {
            Command::Tightness => 0.08,
            Command::Product => 0.2,
            Command::Ghat => 0.01,
            _ => 1e-9,
        }
    }
}

/// Enumeration budget; either field may be overridden from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    #[serde(default = "default_max_words")]
    pub max_words: u64,
    #[serde(default = "default_max_radius")]
    pub max_radius: usize,
}

fn default_max_words() -> u64 {
    EnumerationLimits::default().max_words as u64
}

fn default_max_radius() -> usize {
    EnumerationLimits::default().max_radius
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_words: default_max_words(),
            max_radius: default_max_radius(),
        }
    }
}

impl Budget {
    pub fn limits(&self) -> EnumerationLimits {
        EnumerationLimits {
            max_radius: self.max_radius,
            max_words: self.max_words as u128,
        }
    }
}

/// One coordinate of a product: a free group, optionally cut down by
/// forbidden factors or by the Ĝ condition for an element `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDoc {
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghat: Option<GhatDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhatDoc {
    pub h: String,
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductDoc {
    pub p: String,
    pub factors: Vec<FactorDoc>,
}

/// The input document. Fields irrelevant to `command` must be absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub version: u32,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<ProductDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<QuotientOracle>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sample: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub budget: Budget,
}

/// Command-line values that take precedence over the document.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub radius: Option<usize>,
    pub tolerance: Option<f64>,
    pub max_words: Option<u64>,
    pub max_radius: Option<usize>,
}

/// Parses a job document. When `command` is given, the document may omit its
/// own `command` field but must not contradict it.
pub fn parse_job(text: &str, command: Option<Command>) -> Result<JobSpec, CliError> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("job document: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Parse("job document must be a JSON object".into()))?;
    if let Some(cmd) = command {
        match obj.get("command") {
            None => {
                obj.insert("command".into(), serde_json::Value::from(cmd.name()));
            }
            Some(v) if v.as_str() == Some(cmd.name()) => {}
            Some(v) => {
                return Err(CliError::Parse(format!(
                    "document command {v} does not match subcommand {:?}",
                    cmd.name()
                )))
            }
        }
    }
    let job: JobSpec =
        serde_json::from_value(value).map_err(|e| CliError::Parse(format!("job document: {e}")))?;
    if job.version != SCHEMA_VERSION {
        return Err(CliError::Parse(format!(
            "unsupported schema version {}, expected {SCHEMA_VERSION}",
            job.version
        )));
    }
    Ok(job)
}

impl JobSpec {
    /// Applies overrides, fills defaults and checks which fields are present.
    pub fn resolve(mut self, o: &Overrides) -> Result<JobSpec, CliError> {
        let cmd = self.command;
        self.radius = o.radius.or(self.radius);
        self.tolerance = o.tolerance.or(self.tolerance);
        if let Some(w) = o.max_words {
            self.budget.max_words = w;
        }
        if let Some(r) = o.max_radius {
            self.budget.max_radius = r;
        }
        if self.budget.max_words == 0 {
            return Err(CliError::invalid("budget.max_words must be positive"));
        }
        if cmd != Command::Axioms {
            self.radius.get_or_insert(cmd.default_radius());
        }
        let tol = *self.tolerance.get_or_insert(cmd.default_tolerance());
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(CliError::invalid(format!("tolerance must be positive, got {tol}")));
        }

        let uses_rank = matches!(
            cmd,
            Command::Count | Command::Exponent | Command::Avoid | Command::Ghat | Command::Axioms
        );
        let uses_product = matches!(cmd, Command::Product | Command::Quotient | Command::Tightness);
        let present = [
            ("rank", self.rank.is_some(), uses_rank),
            (
                "forbidden",
                !self.forbidden.is_empty(),
                matches!(cmd, Command::Count | Command::Exponent | Command::Avoid),
            ),
            ("h", self.h.is_some(), cmd == Command::Ghat),
            ("m", self.m.is_some(), cmd == Command::Ghat),
            ("product", self.product.is_some(), uses_product),
            (
                "oracle",
                self.oracle.is_some(),
                matches!(cmd, Command::Quotient | Command::Tightness),
            ),
            ("axes", !self.axes.is_empty(), cmd == Command::Axioms),
            ("sample", !self.sample.is_empty(), cmd == Command::Axioms),
            ("xi", self.xi.is_some(), cmd == Command::Axioms),
            ("radius", self.radius.is_some(), cmd != Command::Axioms),
        ];
        for (field, here, allowed) in present {
            if here && !allowed {
                return Err(CliError::invalid(format!("field {field:?} is not used by {}", cmd.name())));
            }
        }
        let require = |field: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(CliError::invalid(format!("{} requires field {field:?}", cmd.name())))
            }
        };
        if uses_rank {
            require("rank", self.rank.is_some())?;
        }
        if cmd == Command::Avoid {
            require("forbidden", !self.forbidden.is_empty())?;
        }
        if uses_product {
            require("product", self.product.is_some())?;
        }
        if matches!(cmd, Command::Quotient | Command::Tightness) {
            require("oracle", self.oracle.is_some())?;
        }
        if cmd == Command::Axioms {
            require("axes", !self.axes.is_empty())?;
        }
        if cmd == Command::Ghat {
            require("h", self.h.is_some())?;
            let h = self.word("h", self.h.as_deref().unwrap_or(""))?;
            if self.m.is_none() {
                let ax = Axis::new(&h).map_err(|e| CliError::core("h", e))?;
                self.m = Some(ax.d_prime() + 1);
            }
        }
        if let Some(r) = self.radius {
            if r > self.budget.max_radius {
                return Err(CliError::Core {
                    context: "radius".into(),
                    source: growth_tight::Error::ResourceLimit(format!(
                        "radius {r} exceeds budget.max_radius {}",
                        self.budget.max_radius
                    )),
                });
            }
        }
        Ok(self)
    }

    pub fn alphabet(&self) -> Result<Alphabet, CliError> {
        let rank = self.rank.ok_or_else(|| CliError::invalid("missing rank"))?;
        Alphabet::new(rank).map_err(|e| CliError::core("rank", e))
    }

    /// Parses a word over the job's alphabet, naming the field on failure.
    pub fn word(&self, field: &str, text: &str) -> Result<ReducedWord, CliError> {
        self.alphabet()?
            .parse_word(text)
            .map_err(|e| CliError::core(format!("{field} {text:?}"), e))
    }

    pub fn words(&self, field: &str, texts: &[String]) -> Result<Vec<ReducedWord>, CliError> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| self.word(&format!("{field}[{i}]"), t))
            .collect()
    }

    pub fn radius(&self) -> usize {
        self.radius.unwrap_or(0)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(1e-9)
    }

    pub fn product_spec(&self) -> Result<ProductSpec, CliError> {
        let doc = self
            .product
            .as_ref()
            .ok_or_else(|| CliError::invalid("missing product"))?;
        let p = Exponent::parse(&doc.p).map_err(|e| CliError::core("product.p", e))?;
        let factors = doc
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| f.build(i))
            .collect::<Result<Vec<_>, _>>()?;
        ProductSpec::new(factors, p).map_err(|e| CliError::core("product", e))
    }
}

impl FactorDoc {
    fn build(&self, index: usize) -> Result<Factor, CliError> {
        let here = |what: &str| format!("product.factors[{index}]{what}");
        let alphabet = Alphabet::new(self.rank).map_err(|e| CliError::core(here(".rank"), e))?;
        if !self.forbidden.is_empty() && self.ghat.is_some() {
            return Err(CliError::invalid(format!(
                "{}: give at most one of forbidden and ghat",
                here("")
            )));
        }
        if let Some(g) = &self.ghat {
            let h = alphabet
                .parse_word(&g.h)
                .map_err(|e| CliError::core(here(".ghat.h"), e))?;
            let aut = ghat_automaton(alphabet, &h, g.m).map_err(|e| CliError::core(here(".ghat"), e))?;
            return Ok(Factor::Language(aut));
        }
        if self.forbidden.is_empty() {
            return Ok(Factor::Free(alphabet));
        }
        let words = self
            .forbidden
            .iter()
            .enumerate()
            .map(|(j, t)| {
                alphabet
                    .parse_word(t)
                    .map_err(|e| CliError::core(here(&format!(".forbidden[{j}] {t:?}")), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let aut = avoid_factors(&reduced_word_automaton(alphabet), &words)
            .map_err(|e| CliError::core(here(".forbidden"), e))?;
        Ok(Factor::Language(aut))
    }
}
