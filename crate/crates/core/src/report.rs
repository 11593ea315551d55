//! Text renderings of harness results as TSV or JSON.

use serde_json::{json, Value};

use crate::harness::properties::PropertyReport;
use crate::harness::{ChainRun, CensusReport, ReplayReport, SuffixReport, WordSpaceReport};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Tsv,
    Json,
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

/// One line per chain step: `word  c-vector  |R|  series  rank-so-far`. The
/// vector is the one placed in column `q`, in the automaton's own numbering.
pub fn chain(run: &ChainRun, format: Format) -> String {
    let rows: Vec<(String, String, usize, i64, usize, bool)> = run
        .chain
        .lines
        .iter()
        .map(|l| {
            (
                run.dfa.format_word(&l.word),
                run.restore(&l.column).to_vector(),
                l.image.len(),
                l.series,
                l.rank_so_far,
                l.substituted,
            )
        })
        .collect();
    match format {
        Format::Tsv => {
            let mut out = String::from("word\tc-vector\t|R|\tseries\trank-so-far\n");
            for (w, c, r, s, k, _) in &rows {
                out.push_str(&format!("{w}\t{c}\t{r}\t{s}\t{k}\n"));
            }
            out.push_str(&format!("# rank {} of {}\n", run.chain.rank, run.chain.target()));
            out
        }
        Format::Json => pretty(&json!({
            "states": run.chain.n,
            "sink": run.sink() + 1,
            "rank": run.chain.rank,
            "target": run.chain.target(),
            "lines": rows.iter().map(|(w, c, r, s, k, sub)| json!({
                "word": w, "c_vector": c, "image_size": r, "series": s,
                "rank_so_far": k, "substituted": sub,
            })).collect::<Vec<_>>(),
        })),
    }
}

pub fn replay(report: &ReplayReport, format: Format) -> String {
    match format {
        Format::Tsv => {
            let mut out = String::from("line\tword\tprinted\tcomputed\tstatus\n");
            for r in &report.rows {
                let status = if r.matches() { "ok" } else { "MISMATCH" };
                out.push_str(&format!("{}\t{}\t{}\t{}\t{status}\n", r.line, r.word, r.printed, r.computed));
            }
            out
        }
        Format::Json => pretty(&serde_json::to_value(report).expect("report serializes")),
    }
}

pub fn census(report: &CensusReport, format: Format) -> String {
    match format {
        Format::Tsv => {
            let mut out = String::new();
            let max = report.max_reset.map_or("-".to_owned(), |m| m.to_string());
            out.push_str(&format!("n\t{}\nk\t{}\n", report.n, report.k));
            out.push_str(&format!("tables\t{}\nexamined\t{}\npartial\t{}\n", report.tables_total, report.tables_examined, report.partial));
            out.push_str(&format!("strongly-connected\t{}\nsynchronizing\t{}\n", report.strongly_connected, report.synchronizing));
            out.push_str(&format!("max-reset\t{max}\nextremal-tables\t{}\nextremal-classes\t{}\n", report.extremal_tables, report.extremal_classes));
            out.push_str(&format!("cerny-bound\t{}\nfrankl-bound\t{}\n", report.cerny_bound_holds, report.frankl_bound_holds));
            for (len, count) in &report.histogram {
                out.push_str(&format!("length\t{len}\t{count}\n"));
            }
            out
        }
        Format::Json => pretty(&serde_json::to_value(report).expect("report serializes")),
    }
}

pub fn properties(reports: &[PropertyReport], format: Format) -> String {
    match format {
        Format::Tsv => {
            let mut out = String::from("property\tcases\tfailures\tfirst-failure\n");
            for r in reports {
                let first = r.first_failure.as_ref().map_or("-".to_owned(), |(i, m)| format!("case {i}: {m}"));
                out.push_str(&format!("{}\t{}\t{}\t{first}\n", r.property, r.cases, r.failures));
            }
            out
        }
        Format::Json => pretty(&serde_json::to_value(reports).expect("reports serialize")),
    }
}

pub fn word_space(report: &WordSpaceReport, format: Format) -> String {
    match format {
        Format::Tsv => format!(
            "n\t{}\nk\t{}\nmatrices\t{}\ndimension\t{}\nexpected\t{}\ncanonical-rank\t{}\ncanonical-spans\t{}\ncoefficients-exact\t{}\n",
            report.n,
            report.k,
            report.matrices,
            report.dimension,
            report.expected,
            report.canonical_rank,
            report.canonical_spans,
            report.coefficients_exact
        ),
        Format::Json => pretty(&serde_json::to_value(report).expect("report serializes")),
    }
}

pub fn suffixes(report: &SuffixReport, format: Format) -> String {
    match format {
        Format::Tsv => format!(
            "suffixes\t{}\ndistinct\t{}\nrank\t{}\nindependent\t{}\n",
            report.suffixes,
            report.distinct,
            report.rank,
            report.independent()
        ),
        Format::Json => pretty(&json!({
            "suffixes": report.suffixes,
            "distinct": report.distinct,
            "rank": report.rank,
            "independent": report.independent(),
        })),
    }
}
