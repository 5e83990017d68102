//! Markdown summary of evaluation and weight-search artifacts.

use std::fmt::Write;

use aeskit_core::corpus::CorpusStats;
use aeskit_core::ensemble::WeightSearchReport;
use aeskit_core::metrics::EvalReport;

use crate::error::{CliError, CliResult};

pub struct NamedEval {
    pub name: String,
    pub report: EvalReport,
}

pub fn render(stats: Option<&CorpusStats>, evals: &[NamedEval], weights: Option<&WeightSearchReport>) -> CliResult<String> {
    if evals.is_empty() {
        return Err(CliError::Usage("report needs at least one evaluation artifact".into()));
    }
    let mut out = String::from("# Scoring report\n");
    if let Some(s) = stats {
        let _ = writeln!(out, "\n## Dataset\n");
        let _ = writeln!(out, "- scored essays: {}", s.n_essays);
        if s.n_unscored > 0 {
            let _ = writeln!(out, "- unscored essays: {}", s.n_unscored);
        }
        let _ = writeln!(out, "- words per essay: min {}, max {}, mean {:.1}", s.word_length_min, s.word_length_max, s.word_length_mean);
        let _ = writeln!(out, "- essays over 500 words: {}", s.n_over_500_words);
        let _ = writeln!(out, "\n| Score | 1 | 2 | 3 | 4 | 5 | 6 |\n|---|---|---|---|---|---|---|");
        let cells: Vec<String> = s.score_histogram.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "| Essays | {} |", cells.join(" | "));
    }

    let _ = writeln!(out, "\n## Models\n\n| Model | QWK | Accuracy | Essays |\n|---|---|---|---|");
    for e in evals {
        let _ = writeln!(out, "| {} | {:.4} | {:.4} | {} |", e.name, e.report.qwk, e.report.accuracy, e.report.n_evaluated);
    }

    if let Some(w) = weights {
        let _ = writeln!(out, "\n## Ensemble weights\n");
        let chosen: Vec<String> = w.best.as_slice().iter().map(|v| format!("{v:.2}")).collect();
        let _ = writeln!(out, "Chosen weights ({}) with validation QWK {:.4}.\n", chosen.join(", "), w.best_qwk);
        let _ = writeln!(out, "| Weights | Validation QWK |\n|---|---|");
        for row in &w.table {
            let ws: Vec<String> = row.weights.iter().map(|v| format!("{v:.2}")).collect();
            let q = row.qwk.map_or_else(|| "degenerate".to_string(), |q| format!("{q:.4}"));
            let _ = writeln!(out, "| {} | {} |", ws.join(" / "), q);
        }
    }

    let _ = writeln!(out, "\n## Confusion matrices\n\nRows are true scores, columns predicted scores.");
    for e in evals {
        let _ = writeln!(out, "\n### {}\n\n| | 1 | 2 | 3 | 4 | 5 | 6 |\n|---|---|---|---|---|---|---|", e.name);
        for (i, row) in e.report.confusion.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "| **{}** | {} |", i + 1, cells.join(" | "));
        }
    }
    Ok(out)
}
