#include "mfm/report.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <functional>

#include "mfm/csv.hpp"
#include "mfm/error.hpp"

namespace mfm {

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  // Values that round to zero print without a sign.
  if (buf[0] == '-' && std::strspn(buf + 1, "0.") == std::strlen(buf + 1)) return buf + 1;
  return buf;
}

namespace {

std::vector<std::string> metric_cells(const EvalReport& r, int decimals) {
  std::vector<std::string> cells;
  for (Label f : kReportOrder) cells.push_back(format_fixed(r[f].f1, decimals));
  cells.push_back(format_fixed(r.accuracy, decimals));
  cells.push_back(format_fixed(r.coverage, decimals));
  cells.push_back(format_fixed(r.f1_weighted, decimals));
  cells.push_back(format_fixed(r.f1_macro, decimals));
  return cells;
}

std::vector<std::string> metric_headers() {
  std::vector<std::string> h;
  for (Label f : kReportOrder) h.emplace_back(short_name(f));
  for (const char* c : {"Acc", "Cov", "Fw", "Fm"}) h.emplace_back(c);
  return h;
}

void markdown_row(std::ostream& out, const std::vector<std::string>& cells) {
  out << '|';
  for (const auto& c : cells) out << ' ' << c << " |";
  out << '\n';
}

void markdown_rule(std::ostream& out, std::size_t n) {
  out << '|';
  for (std::size_t i = 0; i < n; ++i) out << (i == 0 ? " --- |" : " ---: |");
  out << '\n';
}

}  // namespace

void write_summary_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  std::vector<std::string> header{"name", "scope"};
  for (auto& h : metric_headers()) header.push_back(std::move(h));
  header.emplace_back("n_documents");
  header.emplace_back("n_scope");
  csv::write_row(out, header);
  for (const auto& row : rows) {
    std::vector<std::string> cells{row.name, std::string(to_string(row.report.scope))};
    for (auto& c : metric_cells(row.report, 6)) cells.push_back(std::move(c));
    cells.push_back(std::to_string(row.report.n_documents));
    cells.push_back(std::to_string(row.report.n_scope));
    csv::write_row(out, cells);
  }
}

void write_summary_markdown(std::ostream& out, const std::vector<ReportRow>& rows) {
  std::vector<std::string> header{"Approach", "Scope"};
  for (auto& h : metric_headers()) header.push_back(std::move(h));
  markdown_row(out, header);
  markdown_rule(out, header.size());
  for (const auto& row : rows) {
    std::vector<std::string> cells{row.name, std::string(to_string(row.report.scope))};
    for (auto& c : metric_cells(row.report, 2)) cells.push_back(std::move(c));
    markdown_row(out, cells);
  }
}

void write_detail_csv(std::ostream& out, const EvalReport& r) {
  csv::write_row(out, {"class", "precision", "recall", "f1", "support", "tp", "fp", "fn"});
  for (Label f : kReportOrder) {
    const auto& m = r[f];
    csv::write_row(out, {std::string(to_string(f)), format_fixed(m.precision, 6), format_fixed(m.recall, 6),
                         format_fixed(m.f1, 6), std::to_string(m.support), std::to_string(m.tp),
                         std::to_string(m.fp), std::to_string(m.fn)});
  }
}

namespace {

using BinaryField = std::function<double(const BinaryReport&)>;

const std::array<std::pair<const char*, BinaryField>, 5>& binary_rows() {
  static const std::array<std::pair<const char*, BinaryField>, 5> rows{{
      {"0", [](const BinaryReport& r) { return r.negative.f1; }},
      {"1", [](const BinaryReport& r) { return r.positive.f1; }},
      {"Acc", [](const BinaryReport& r) { return r.accuracy; }},
      {"Fm", [](const BinaryReport& r) { return r.f1_macro; }},
      {"Fw", [](const BinaryReport& r) { return r.f1_weighted; }},
  }};
  return rows;
}

std::vector<const BinaryReport*> in_report_order(const std::vector<BinaryReport>& reports) {
  std::vector<const BinaryReport*> ordered;
  for (Label f : kReportOrder) {
    for (const auto& r : reports) {
      if (r.foundation == f) ordered.push_back(&r);
    }
  }
  if (ordered.size() != reports.size()) throw ValidationError("binary reports: duplicate or invalid foundation");
  return ordered;
}

std::vector<std::vector<std::string>> binary_table(const std::vector<BinaryReport>& reports, int decimals,
                                                   bool short_names) {
  auto ordered = in_report_order(reports);
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"metric"};
  for (const auto* r : ordered) {
    header.emplace_back(short_names ? short_name(r->foundation) : to_string(r->foundation));
  }
  header.emplace_back(short_names ? "Avg" : "average");
  table.push_back(std::move(header));
  for (const auto& [name, field] : binary_rows()) {
    std::vector<std::string> row{name};
    double sum = 0.0;
    for (const auto* r : ordered) {
      row.push_back(format_fixed(field(*r), decimals));
      sum += field(*r);
    }
    row.push_back(ordered.empty() ? "" : format_fixed(sum / static_cast<double>(ordered.size()), decimals));
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace

void write_binary_markdown(std::ostream& out, const std::vector<BinaryReport>& reports) {
  auto table = binary_table(reports, 2, true);
  table[0][0] = "";
  markdown_row(out, table[0]);
  markdown_rule(out, table[0].size());
  for (std::size_t i = 1; i < table.size(); ++i) markdown_row(out, table[i]);
}

void write_binary_csv(std::ostream& out, const std::vector<BinaryReport>& reports) {
  for (const auto& row : binary_table(reports, 6, false)) csv::write_row(out, row);
}

}  // namespace mfm
