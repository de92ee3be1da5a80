#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mfm/eval.hpp"

namespace mfm {

/// A named row in a results table.
struct ReportRow {
  std::string name;
  EvalReport report;
};

/// Columns: name, scope, Auth, Care, Fair, Loya, Sanc (per-class F1), Acc,
/// Cov, Fw, Fm, n_documents, n_scope. Values are printed with six decimals.
void write_summary_csv(std::ostream& out, const std::vector<ReportRow>& rows);

/// Same columns as a Markdown table, two decimals, without the count columns.
void write_summary_markdown(std::ostream& out, const std::vector<ReportRow>& rows);

/// Per-class precision / recall / F1 / support and raw counts for one report.
void write_detail_csv(std::ostream& out, const EvalReport& report);

/// Binary per-foundation table: rows "0", "1", Acc, Fm, Fw; one column per
/// foundation in report order, then Avg.
void write_binary_markdown(std::ostream& out, const std::vector<BinaryReport>& reports);
void write_binary_csv(std::ostream& out, const std::vector<BinaryReport>& reports);

/// Fixed-point formatting independent of the stream locale.
std::string format_fixed(double value, int decimals);

}  // namespace mfm
