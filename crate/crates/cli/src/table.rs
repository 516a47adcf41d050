use growth_tight::Bracket;

use crate::run::{CountsDoc, Outcome, Report};

/// Columns separated by two spaces. A column is right-aligned when every cell
/// below the first row is a number.
pub fn columns(rows: &[Vec<String>]) -> String {
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut width = vec![0; ncol];
    let mut numeric = vec![true; ncol];
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            width[j] = width[j].max(cell.chars().count());
            if i > 0 && cell.parse::<f64>().is_err() && cell != "-inf" {
                numeric[j] = false;
            }
        }
    }
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let w = width[j];
                if numeric[j] {
                    format!("{c:>w$}")
                } else {
                    format!("{c:<w$}")
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn num(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.6}");
        if s.trim_start_matches('-').trim_matches(|c| c == '0' || c == '.').is_empty() {
            "0.000000".into()
        } else {
            s
        }
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn bracket_row(name: &str, b: &Bracket) -> Vec<String> {
    vec![
        name.into(),
        num(b.lower),
        num(b.estimate),
        num(b.upper),
        format!("{:?}", b.method).to_lowercase(),
        if b.radii == [0, 0] {
            "-".into()
        } else {
            format!("{}..{}", b.radii[0], b.radii[1])
        },
    ]
}

fn brackets(rows: &[(&str, &Bracket)]) -> String {
    let mut t = vec![["exponent", "lower", "estimate", "upper", "method", "radii"]
        .map(String::from)
        .to_vec()];
    t.extend(rows.iter().map(|(n, b)| bracket_row(n, b)));
    columns(&t)
}

fn counts(c: &CountsDoc) -> String {
    let mut t = vec![["r", "sphere", "ball"].map(String::from).to_vec()];
    for (r, (s, b)) in c.spheres.iter().zip(&c.balls).enumerate() {
        t.push(vec![r.to_string(), s.clone(), b.clone()]);
    }
    columns(&t)
}

fn pairs(items: &[(&str, String)]) -> String {
    columns(&items.iter().map(|(k, v)| vec![k.to_string(), v.clone()]).collect::<Vec<_>>())
}

/// Human-readable rendering of a report.
pub fn render(report: &Report) -> String {
    let mut out = format!(
        "{} {}  command: {}\n\n",
        report.tool,
        report.version,
        report.spec.command.name()
    );
    let sections: Vec<String> = match &report.result {
        Outcome::Count(o) => {
            let mut v = Vec::new();
            if let (Some(f), Some(sub)) = (&o.fekete, &o.subadditivity) {
                v.push(brackets(&[("fekete", f)]));
                v.push(pairs(&[
                    ("subadditivity b", num(sub.b)),
                    ("exactly subadditive", sub.exact.to_string()),
                ]));
            }
            v.push(counts(&o.counts));
            v
        }
        Outcome::Exponent(o) => vec![
            pairs(&[("automaton states", o.states.to_string())]),
            brackets(&[("spectral", &o.spectral), ("fekete", &o.fekete)]),
            counts(&o.counts),
        ],
        Outcome::Avoid(o) => vec![
            pairs(&[
                ("automaton states", o.automaton.states.to_string()),
                ("transitions", o.automaton.transitions.len().to_string()),
            ]),
            brackets(&[("spectral", &o.spectral)]),
            counts(&o.counts),
        ],
        Outcome::Ghat(o) => vec![
            pairs(&[
                ("core", o.core.clone()),
                ("conjugator", o.conjugator.clone()),
                ("D'", o.d_prime.to_string()),
                ("m", o.m.to_string()),
                ("exact language", o.language_is_exact.to_string()),
                ("shortening threshold", o.shorten_threshold.to_string()),
                ("automaton states", o.automaton.states.to_string()),
                ("gap margin", num(o.gap.margin)),
                ("strict gap", o.gap.strict_gap.to_string()),
                ("certified", o.gap.certified.to_string()),
            ]),
            brackets(&[("ghat", &o.spectral), ("free group", &o.full)]),
            counts(&o.counts),
        ],
        Outcome::Product(o) => {
            let d = &o.duality;
            let mut rows: Vec<(String, &Bracket)> = d
                .factor_exponents
                .iter()
                .enumerate()
                .map(|(i, b)| (format!("factor {i}"), b))
                .collect();
            rows.push(("predicted".into(), &d.predicted));
            rows.push(("measured".into(), &d.measured));
            let named: Vec<(&str, &Bracket)> = rows.iter().map(|(n, b)| (n.as_str(), *b)).collect();
            vec![
                pairs(&[
                    ("deviation", num(d.deviation)),
                    ("bracket distance", num(d.margin)),
                ]),
                brackets(&named),
                counts(&o.counts),
            ]
        }
        Outcome::Quotient(o) => {
            let mut t = vec![["representative", "lengths", "length"].map(String::from).to_vec()];
            for row in &o.section {
                t.push(vec![
                    format!("({})", row.representative.join(", ")),
                    format!("{:?}", row.lengths),
                    num(row.length),
                ]);
            }
            vec![
                pairs(&[("cosets", o.cosets.to_string())]),
                brackets(&[("quotient", &o.fekete)]),
                columns(&t),
                counts(&o.counts),
            ]
        }
        Outcome::Tightness(t) => vec![
            pairs(&[
                ("verdict", crate::verdict_name(t.verdict)),
                ("gap", num(t.gap)),
                ("structural witness", t.structural_witness.to_string()),
            ]),
            brackets(&[
                ("G", &t.delta_g),
                ("G/N", &t.delta_gn),
                ("G (counts)", &t.delta_g_counts),
                ("G/N (counts)", &t.delta_gn_counts),
            ]),
        ],
        Outcome::Axioms(o) => {
            let mut t = vec![["h", "core", "conjugator", "D'"].map(String::from).to_vec()];
            t.extend(
                o.axes
                    .iter()
                    .map(|a| vec![a.h.clone(), a.core.clone(), a.conjugator.clone(), a.d_prime.to_string()]),
            );
            vec![
                columns(&t),
                pairs(&[
                    ("family size", o.report.family_size.to_string()),
                    ("max projection diameter", o.report.p0_max.to_string()),
                    ("xi observed", o.report.xi_observed.to_string()),
                    ("tree bound", o.report.tree_bound.to_string()),
                    ("xi tested", o.report.xi_tested.to_string()),
                    ("violations", o.report.violations.len().to_string()),
                ]),
            ]
        }
    };
    out.push_str(&sections.join("\n"));
    out
}
