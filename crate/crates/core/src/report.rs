//! Plain-text tables rendered from a summary document.

use crate::policy::PolicyKind;
use crate::population::UserTag;
use crate::scenario::{SummaryDocument, UserResult, ViewAggregate, ViewResult};

/// Row labels of the single-user table.
pub const USER_ROWS: [&str; 7] = [
    "Coverage Probability [%]",
    "Avg. Access [min]",
    "# Visible Satellites",
    "Avg. # Visible Satellites",
    "FSPL [dB]",
    "Avg. FSPL [dB]",
    "Max. Doppler [kHz]",
];

/// Row labels of the population table.
pub const POPULATION_ROWS: [&str; 7] = [
    "Min. FSPL [dB]",
    "Avg. FSPL [dB]",
    "Max. FSPL [dB]",
    "Max. Doppler Offset [kHz]",
    "Avg. Access Duration [min]",
    "Max. Access Duration [min]",
    "Overall Coverage [%]",
];

fn f2(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

fn column_title(view: &ViewResult) -> String {
    view.constellations.join(" + ")
}

fn user_column(user: &UserResult) -> Vec<String> {
    let s = &user.summary;
    let fspl = match (s.fspl_min_db, s.fspl_max_db) {
        (Some(lo), Some(hi)) => format!("[{lo:.2}, {hi:.2}]"),
        _ => "-".to_string(),
    };
    vec![
        format!("{:.2}", 100.0 * s.coverage_probability),
        f2(s.avg_access_min),
        format!("[{}, {}]", s.visible_min, s.visible_max),
        format!("{:.2}", s.visible_avg),
        fspl,
        f2(s.fspl_avg_db),
        f2(s.max_doppler_khz),
    ]
}

fn population_column(a: &ViewAggregate) -> Vec<String> {
    vec![
        f2(a.fspl_min_db),
        f2(a.fspl_avg_db),
        f2(a.fspl_max_db),
        f2(a.max_doppler_khz),
        f2(a.avg_access_min),
        f2(a.max_access_min),
        f2(a.coverage_percent),
    ]
}

/// Left-aligned label column, right-aligned value columns.
fn table(header: &[String], rows: &[(String, Vec<String>)]) -> String {
    let label_width = rows
        .iter()
        .map(|r| r.0.len())
        .chain([header[0].len()])
        .max()
        .unwrap_or(0);
    let columns = header.len() - 1;
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .map(|r| r.1[c].len())
                .chain([header[c + 1].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |label: &str, cells: &[String]| {
        let mut s = format!("{label:<label_width$}");
        for (cell, w) in cells.iter().zip(&widths) {
            s.push_str(&format!("  {cell:>w$}"));
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&header[0], &header[1..]);
    for (label, cells) in rows {
        out.push_str(&line(label, cells));
    }
    out
}

fn usage_row(
    views: &[&ViewResult],
    usage: impl Fn(&ViewResult) -> Vec<(String, f64)>,
) -> Option<(String, Vec<String>)> {
    let cells: Vec<String> = views
        .iter()
        .map(|v| {
            let shares = usage(v);
            if shares.is_empty() {
                "-".to_string()
            } else {
                shares
                    .iter()
                    .map(|(n, p)| format!("{n} {p:.2}"))
                    .collect::<Vec<_>>()
                    .join(" / ")
            }
        })
        .collect();
    cells
        .iter()
        .any(|c| c != "-")
        .then(|| ("Serving Share [%]".to_string(), cells))
}

fn user_table(doc: &SummaryDocument, index: usize) -> String {
    let views: Vec<&ViewResult> = doc.views.iter().collect();
    let mut header = vec!["System".to_string()];
    header.extend(views.iter().map(|v| column_title(v)));
    let columns: Vec<Vec<String>> = views.iter().map(|v| user_column(&v.users[index])).collect();
    let mut rows: Vec<(String, Vec<String>)> = USER_ROWS
        .iter()
        .enumerate()
        .map(|(r, label)| (label.to_string(), columns.iter().map(|c| c[r].clone()).collect()))
        .collect();
    let covered_share = |v: &ViewResult| {
        let s = &v.users[index].summary;
        s.fleet_usage
            .iter()
            .map(|u| (u.name.clone(), 100.0 * u.fraction))
            .collect()
    };
    rows.extend(usage_row(&views, covered_share));
    table(&header, &rows)
}

fn population_table(doc: &SummaryDocument) -> String {
    let views: Vec<&ViewResult> = doc.views.iter().collect();
    let mut header = vec!["Constellation".to_string()];
    header.extend(views.iter().map(|v| column_title(v)));
    let columns: Vec<Vec<String>> = views.iter().map(|v| population_column(&v.aggregate)).collect();
    let mut rows: Vec<(String, Vec<String>)> = POPULATION_ROWS
        .iter()
        .enumerate()
        .map(|(r, label)| (label.to_string(), columns.iter().map(|c| c[r].clone()).collect()))
        .collect();
    rows.extend(usage_row(&views, |v| {
        v.aggregate
            .fleet_usage
            .iter()
            .map(|u| (u.name.clone(), u.percent))
            .collect()
    }));
    table(&header, &rows)
}

fn describe(user: &UserResult) -> String {
    let kind = match user.tag {
        UserTag::IssPreset => "iss",
        UserTag::SsoPreset => "sso_eo",
        other => other.as_str(),
    };
    format!(
        "User {} ({kind}, {:.1} km, {:.2} deg)",
        user.user_id, user.alt_km, user.inc_deg
    )
}

/// Population runs get one aggregate table; otherwise one table per user.
pub fn render(doc: &SummaryDocument) -> String {
    let policy = match doc.config.policy {
        PolicyKind::Random => "random",
        PolicyKind::Closest => "closest",
    };
    let mut out = format!(
        "Min. elevation {} deg, carrier {:.3} GHz, policy {policy}, {} steps of {} s\n\n",
        doc.config.min_elevation,
        doc.config.carrier_frequency / 1e9,
        doc.steps,
        doc.config.step
    );
    let Some(first) = doc.views.first() else {
        return out;
    };
    if doc.is_monte_carlo() {
        out.push_str(&format!(
            "{} users, {} in the headline set\n",
            first.aggregate.users, first.aggregate.headline_users
        ));
        out.push_str(&population_table(doc));
    } else {
        for (i, user) in first.users.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&describe(user));
            out.push('\n');
            out.push_str(&user_table(doc, i));
        }
    }
    out
}
