#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace blab::io {

/// Marker for a value whose defining ratio has a vanishing denominator.
struct Degenerate {};

using Cell = std::variant<std::string, double, long long, Degenerate>;

/// Streaming RFC-4180 writer: rows go straight to the stream, nothing is buffered.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(&os), columns_(header.size()) {
    if (header.empty()) throw std::invalid_argument("CSV header must not be empty");
    std::vector<Cell> h(header.begin(), header.end());
    write_cells(h);
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) {
      throw std::invalid_argument("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(columns_));
    }
    write_cells(cells);
  }

  static std::string format_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("CSV value is not finite; mark it degenerate instead");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
  }

  static std::string quote(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

 private:
  void write_cells(const std::vector<Cell>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) *os_ << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
              *os_ << quote(v);
            } else if constexpr (std::is_same_v<T, double>) {
              *os_ << format_double(v);
            } else if constexpr (std::is_same_v<T, long long>) {
              *os_ << v;
            } else {
              *os_ << "degenerate";
            }
          },
          cells[i]);
    }
    *os_ << "\r\n";
    if (!*os_) throw std::runtime_error("CSV write failed");
  }

  std::ostream* os_;
  std::size_t columns_;
};

/// One metric value. `t` is simulation time (not wall clock) so that outputs are reproducible.
struct ResultRow {
  std::string run_id;
  double t = 0.0;
  std::string metric;
  std::optional<long long> index;
  std::optional<double> value;  // nullopt: degenerate
};

inline const std::vector<std::string>& result_header() {
  static const std::vector<std::string> h{"run_id", "t", "metric", "index", "value"};
  return h;
}

inline std::vector<Cell> to_cells(const ResultRow& r) {
  return {r.run_id, r.t, r.metric, r.index ? Cell(*r.index) : Cell(std::string()),
          r.value ? Cell(*r.value) : Cell(Degenerate{})};
}

/// Streaming sink for ResultRow.
class ResultWriter {
 public:
  explicit ResultWriter(const std::string& path) : file_(path, std::ios::binary | std::ios::trunc) {
    if (!file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    writer_.emplace(file_, result_header());
  }
  void write(const ResultRow& r) { writer_->row(to_cells(r)); }
  void flush() { file_.flush(); }

 private:
  std::ofstream file_;
  std::optional<CsvWriter> writer_;
};

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  ResultWriter w(path);
  for (const auto& r : rows) w.write(r);
}

inline void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  CsvWriter w(os, result_header());
  for (const auto& r : rows) w.row(to_cells(r));
}

}  // namespace blab::io
