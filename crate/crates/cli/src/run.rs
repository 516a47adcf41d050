use growth_tight::automata::AutomatonDocument;
use growth_tight::growth::{bracket_from_counts, check_subadditivity, strict_gap_check, GapReport, Regime, Subadditivity};
use growth_tight::products::verify_duality;
use growth_tight::quotients::{minimal_section, section_counts, tightness_verdict, CosetKey, Verdict};
use growth_tight::tree_geometry::{check_projection_axioms, ghat_automaton, shorten_threshold, AxiomReport, Axis};
use growth_tight::{
    avoid_factors, count_lengths, perron_root, reduced_word_automaton, Bracket, CountSequence, Duality, Tightness,
};
use num_bigint::BigUint;
use serde::Serialize;

use crate::job::{Command, JobSpec};
use crate::CliError;

pub const TOOL: &str = "growth-tight";

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub spec: JobSpec,
    pub result: Outcome,
}

/// Exact counts, written as decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountsDoc {
    pub spheres: Vec<String>,
    pub balls: Vec<String>,
}

impl CountsDoc {
    fn new(seq: &CountSequence) -> Self {
        let show = |v: &[BigUint]| v.iter().map(|n| n.to_string()).collect();
        CountsDoc {
            spheres: show(seq.spheres()),
            balls: show(&seq.balls()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CountOutcome {
    pub counts: CountsDoc,
    /// Absent below radius 1.
    pub subadditivity: Option<Subadditivity<f64>>,
    pub fekete: Option<Bracket>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentOutcome {
    pub states: usize,
    pub spectral: Bracket,
    pub fekete: Bracket,
    pub counts: CountsDoc,
}

#[derive(Clone, Debug, Serialize)]
pub struct AvoidOutcome {
    pub automaton: AutomatonDocument,
    pub spectral: Bracket,
    pub counts: CountsDoc,
}

#[derive(Clone, Debug, Serialize)]
pub struct GhatOutcome {
    pub m: usize,
    pub core: String,
    pub conjugator: String,
    pub d_prime: usize,
    pub language_is_exact: bool,
    pub shorten_threshold: usize,
    pub automaton: AutomatonDocument,
    pub spectral: Bracket,
    pub full: Bracket,
    pub gap: GapReport<f64>,
    pub counts: CountsDoc,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductOutcome {
    #[serde(flatten)]
    pub duality: Duality,
    pub counts: CountsDoc,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionRow {
    pub key: CosetKey,
    pub representative: Vec<String>,
    pub lengths: Vec<usize>,
    pub length: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientOutcome {
    pub cosets: usize,
    pub section: Vec<SectionRow>,
    pub counts: CountsDoc,
    pub fekete: Bracket,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxisRow {
    pub h: String,
    pub core: String,
    pub conjugator: String,
    pub d_prime: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomsOutcome {
    pub axes: Vec<AxisRow>,
    #[serde(flatten)]
    pub report: AxiomReport,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Count(CountOutcome),
    Exponent(ExponentOutcome),
    Avoid(AvoidOutcome),
    Ghat(Box<GhatOutcome>),
    Product(ProductOutcome),
    Quotient(QuotientOutcome),
    Tightness(Tightness),
    Axioms(AxiomsOutcome),
}

impl Report {
    pub fn counts(&self) -> Option<&CountsDoc> {
        match &self.result {
            Outcome::Count(o) => Some(&o.counts),
            Outcome::Exponent(o) => Some(&o.counts),
            Outcome::Avoid(o) => Some(&o.counts),
            Outcome::Ghat(o) => Some(&o.counts),
            Outcome::Product(o) => Some(&o.counts),
            Outcome::Quotient(o) => Some(&o.counts),
            Outcome::Tightness(_) | Outcome::Axioms(_) => None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

impl CountsDoc {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,sphere,ball\n");
        for (r, (s, b)) in self.spheres.iter().zip(&self.balls).enumerate() {
            out.push_str(&format!("{r},{s},{b}\n"));
        }
        out
    }
}

/// Runs a resolved job.
pub fn run(job: &JobSpec) -> Result<Report, CliError> {
    let result = match job.command {
        Command::Count => count(job)?,
        Command::Exponent => exponent(job)?,
        Command::Avoid => avoid(job)?,
        Command::Ghat => ghat(job)?,
        Command::Product => product(job)?,
        Command::Quotient => quotient(job)?,
        Command::Tightness => tightness(job)?,
        Command::Axioms => axioms(job)?,
    };
    Ok(Report {
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        spec: job.clone(),
        result,
    })
}

fn language(job: &JobSpec) -> Result<growth_tight::CountingAutomaton, CliError> {
    let base = reduced_word_automaton(job.alphabet()?);
    if job.forbidden.is_empty() {
        return Ok(base);
    }
    let words = job.words("forbidden", &job.forbidden)?;
    avoid_factors(&base, &words).map_err(|e| CliError::core("forbidden", e))
}

fn count(job: &JobSpec) -> Result<Outcome, CliError> {
    let seq = count_lengths(&language(job)?, job.radius());
    let (subadditivity, fekete) = if seq.len() < 2 {
        (None, None)
    } else {
        let sub = check_subadditivity::<f64>(&seq.balls(), None).map_err(|e| CliError::core("counts", e))?;
        let fekete = bracket_from_counts(&seq).map_err(|e| CliError::core("counts", e))?;
        (Some(sub), Some(fekete))
    };
    Ok(Outcome::Count(CountOutcome {
        counts: CountsDoc::new(&seq),
        subadditivity,
        fekete,
    }))
}

fn exponent(job: &JobSpec) -> Result<Outcome, CliError> {
    let aut = language(job)?;
    let spectral = perron_root(&aut, job.tolerance()).map_err(|e| CliError::core("spectral radius", e))?;
    let seq = count_lengths(&aut, job.radius());
    let fekete = bracket_from_counts(&seq).map_err(|e| CliError::core("counts", e))?;
    Ok(Outcome::Exponent(ExponentOutcome {
        states: aut.num_states(),
        spectral,
        fekete,
        counts: CountsDoc::new(&seq),
    }))
}

fn avoid(job: &JobSpec) -> Result<Outcome, CliError> {
    let aut = language(job)?;
    let spectral = perron_root(&aut, job.tolerance()).map_err(|e| CliError::core("spectral radius", e))?;
    let seq = count_lengths(&aut, job.radius());
    Ok(Outcome::Avoid(AvoidOutcome {
        automaton: aut.to_document(),
        spectral,
        counts: CountsDoc::new(&seq),
    }))
}

fn ghat(job: &JobSpec) -> Result<Outcome, CliError> {
    let alphabet = job.alphabet()?;
    let h = job.word("h", job.h.as_deref().unwrap_or(""))?;
    let ax = Axis::new(&h).map_err(|e| CliError::core("h", e))?;
    let m = job.m.unwrap_or(ax.d_prime() + 1);
    let aut = ghat_automaton(alphabet, &h, m).map_err(|e| CliError::core("ghat", e))?;
    let tight_tol = 1e-9;
    let spectral = perron_root(&aut, tight_tol).map_err(|e| CliError::core("spectral radius", e))?;
    let full = perron_root(&reduced_word_automaton(alphabet), tight_tol)
        .map_err(|e| CliError::core("spectral radius", e))?;
    let gap = strict_gap_check(&spectral, &full, job.tolerance());
    let seq = count_lengths(&aut, job.radius());
    Ok(Outcome::Ghat(Box::new(GhatOutcome {
        m,
        core: ax.core().to_string(),
        conjugator: ax.conjugator().to_string(),
        d_prime: ax.d_prime(),
        language_is_exact: m > ax.d_prime(),
        shorten_threshold: shorten_threshold(&h).map_err(|e| CliError::core("h", e))?,
        automaton: aut.to_document(),
        spectral,
        full,
        gap,
        counts: CountsDoc::new(&seq),
    })))
}

fn product(job: &JobSpec) -> Result<Outcome, CliError> {
    let spec = job.product_spec()?;
    let r = job.radius();
    let counts = spec.factor_counts(r);
    let duality = verify_duality(&spec, &counts, r, job.tolerance()).map_err(|e| CliError::core("product", e))?;
    let seq = growth_tight::products::product_count_sequence(&spec, &counts, r)
        .map_err(|e| CliError::core("product", e))?;
    Ok(Outcome::Product(ProductOutcome {
        duality,
        counts: CountsDoc::new(&seq),
    }))
}

fn quotient(job: &JobSpec) -> Result<Outcome, CliError> {
    let spec = job.product_spec()?;
    let oracle = job.oracle.as_ref().ok_or_else(|| CliError::invalid("missing oracle"))?;
    let section = minimal_section(&spec, oracle, job.radius(), &job.budget.limits())
        .map_err(|e| CliError::core("quotient", e))?;
    let seq = section_counts(spec.p(), &section);
    let mut fekete = bracket_from_counts::<f64>(&seq).map_err(|e| CliError::core("quotient counts", e))?;
    fekete.regime = Regime::Limsup;
    let p = spec.p();
    let mut entries: Vec<_> = section.entries.into_iter().collect();
    entries.sort_by(|(_, x), (_, y)| {
        p.cmp_norms(&x.lengths, &y.lengths)
            .then_with(|| x.representative.cmp(&y.representative))
    });
    let section: Vec<SectionRow> = entries
        .into_iter()
        .map(|(key, e)| SectionRow {
            key,
            representative: e.representative.coords().iter().map(|w| w.to_string()).collect(),
            lengths: e.lengths,
            length: e.length,
        })
        .collect();
    Ok(Outcome::Quotient(QuotientOutcome {
        cosets: section.len(),
        section,
        counts: CountsDoc::new(&seq),
        fekete,
    }))
}

fn tightness(job: &JobSpec) -> Result<Outcome, CliError> {
    let spec = job.product_spec()?;
    let oracle = job.oracle.as_ref().ok_or_else(|| CliError::invalid("missing oracle"))?;
    let report = tightness_verdict(&spec, oracle, job.radius(), job.tolerance(), &job.budget.limits())
        .map_err(|e| CliError::core("tightness", e))?;
    Ok(Outcome::Tightness(report))
}

fn axioms(job: &JobSpec) -> Result<Outcome, CliError> {
    let hs = job.words("axes", &job.axes)?;
    let sample = job.words("sample", &job.sample)?;
    let axes = hs
        .iter()
        .enumerate()
        .map(|(i, h)| Axis::new(h).map_err(|e| CliError::core(format!("axes[{i}]"), e)))
        .collect::<Result<Vec<_>, _>>()?;
    let report = check_projection_axioms(&axes, &sample, job.xi).map_err(|e| CliError::core("axes", e))?;
    let rows = axes
        .iter()
        .map(|a| AxisRow {
            h: a.h().to_string(),
            core: a.core().to_string(),
            conjugator: a.conjugator().to_string(),
            d_prime: a.d_prime(),
        })
        .collect();
    Ok(Outcome::Axioms(AxiomsOutcome {
        axes: rows,
        passed: report.violations.is_empty(),
        report,
    }))
}

impl Outcome {
    pub fn verdict(&self) -> Option<Verdict> {
        match self {
            Outcome::Tightness(t) => Some(t.verdict),
            _ => None,
        }
    }
}
