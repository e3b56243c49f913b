//! CSV forms of menus, offers, selections and experiment metrics.
//!
//! Comma-separated with a header row and LF line endings. Indices (`k`, `m`,
//! `n`) are 1-based. Linear quantities use the shortest round-trip decimal
//! form; dB values carry four decimals.

use std::io::{Read, Write};

use crate::contract::{information_rent, ContractMenu};
use crate::error::{Error, Result};
use crate::selection::{OfferMatrix, SelectionResult};
use crate::sim::{ContractTableRow, MetricsTable};

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
}

pub fn menu_csv(menu: &ContractMenu) -> Result<String> {
    let rents = information_rent(menu).rents;
    let mut w = writer(Vec::new());
    w.write_record(["k", "delta", "gamma_linear", "gamma_db", "transfer", "rent"])?;
    for (k, (pair, delta)) in menu.pairs().iter().zip(menu.deltas()).enumerate() {
        w.write_record([
            (k + 1).to_string(),
            delta.to_string(),
            pair.snr.to_string(),
            format!("{:.4}", pair.snr_db()),
            pair.transfer.to_string(),
            rents[k].to_string(),
        ])?;
    }
    finish(w)
}

/// Types with probabilities, first-best pair, second-best pair and rent,
/// rounded to four decimals.
pub fn contract_table_csv(rows: &[ContractTableRow]) -> Result<String> {
    let mut w = writer(Vec::new());
    w.write_record([
        "k",
        "delta",
        "pi",
        "fb_gamma_db",
        "fb_transfer",
        "sb_gamma_db",
        "sb_transfer",
        "rent",
    ])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.delta.to_string(),
            format!("{:.4}", r.prob),
            format!("{:.4}", r.first_best.snr_db()),
            format!("{:.4}", r.first_best.transfer),
            format!("{:.4}", r.second_best.snr_db()),
            format!("{:.4}", r.second_best.transfer),
            // avoid printing "-0.0000" for a rent that is zero up to rounding
            format!("{:.4}", r.rent + 0.0).replace("-0.0000", "0.0000"),
        ])?;
    }
    finish(w)
}

/// Non-null offers only.
pub fn offers_csv(offers: &OfferMatrix) -> Result<String> {
    let mut w = writer(Vec::new());
    w.write_record(["m", "n", "gamma_linear", "transfer"])?;
    for m in 0..offers.relays() {
        for n in 0..offers.subcarriers() {
            if offers.is_offer(m, n) {
                w.write_record([
                    (m + 1).to_string(),
                    (n + 1).to_string(),
                    offers.snr(m, n).to_string(),
                    offers.transfer(m, n).to_string(),
                ])?;
            }
        }
    }
    finish(w)
}

/// Reads `m,n,gamma_linear,transfer` rows. The matrix is sized by the
/// largest indices seen unless `dims` is given; absent cells are null offers.
pub fn read_offers_csv<R: Read>(input: R, dims: Option<(usize, usize)>) -> Result<OfferMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let expected = ["m", "n", "gamma_linear", "transfer"];
    if !headers.is_empty() && headers.iter().ne(expected) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}", expected.join(",")),
        });
    }
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse { line, message };
        if record.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", record.len())));
        }
        let index = |i: usize| -> Result<usize> {
            match record[i].parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(bad(format!(
                    "{} must be a positive integer, got {:?}",
                    expected[i], &record[i]
                ))),
            }
        };
        let number = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("{} is not a number: {:?}", expected[i], &record[i])))
        };
        entries.push((line, index(0)?, index(1)?, number(2)?, number(3)?));
    }
    let (relays, subcarriers) = dims.unwrap_or_else(|| {
        entries
            .iter()
            .fold((0, 0), |(rm, rn), e| (rm.max(e.1 + 1), rn.max(e.2 + 1)))
    });
    let mut offers = OfferMatrix::empty(relays, subcarriers);
    let mut seen = vec![false; relays * subcarriers];
    for (line, m, n, snr, transfer) in entries {
        if m < relays && n < subcarriers {
            if seen[m * subcarriers + n] {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate offer for m={}, n={}", m + 1, n + 1),
                });
            }
            seen[m * subcarriers + n] = true;
        }
        offers.set(m, n, snr, transfer).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
    }
    Ok(offers)
}

/// One row per method and subcarrier; `selected_m_list` joins relay indices with `;`.
pub fn selection_csv(offers: &OfferMatrix, results: &[SelectionResult]) -> Result<String> {
    let mut w = writer(Vec::new());
    w.write_record(["method", "n", "selected_m_list", "capacity", "spend"])?;
    for r in results {
        for (n, subset) in r.subsets.iter().enumerate() {
            let snr: f64 = subset.iter().map(|&m| offers.snr(m, n)).sum();
            let spend: f64 = subset.iter().map(|&m| offers.transfer(m, n)).sum();
            let list = subset
                .iter()
                .map(|m| (m + 1).to_string())
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                r.method.label().to_string(),
                (n + 1).to_string(),
                list,
                (1.0 + snr).log2().to_string(),
                spend.to_string(),
            ])?;
        }
    }
    finish(w)
}

pub fn metrics_csv(table: &MetricsTable) -> Result<String> {
    let mut w = writer(Vec::new());
    w.write_record([
        "M",
        "budget",
        "method",
        "mean_capacity_per_subcarrier",
        "stderr",
        "mean_spend",
    ])?;
    for r in &table.rows {
        w.write_record([
            r.relays.to_string(),
            r.budget.to_string(),
            r.series.label().to_string(),
            r.mean_capacity.to_string(),
            r.stderr.to_string(),
            r.mean_spend.to_string(),
        ])?;
    }
    finish(w)
}
