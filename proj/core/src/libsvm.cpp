#include "mbl/libsvm.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "mbl/errors.hpp"

namespace mbl {

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no, const std::string& source)
      : line_(line), line_no_(line_no), source_(source) {}

  bool at_end() {
    skip_space();
    return pos_ >= line_.size();
  }

  std::string_view token() {
    skip_space();
    start_ = pos_;
    while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') ++pos_;
    return line_.substr(start_, pos_ - start_);
  }

  [[noreturn]] void fail(const std::string& what, std::size_t offset = 0) const {
    throw DataError(source_ + ":" + std::to_string(line_no_) + ":" +
                    std::to_string(start_ + offset + 1) + ": " + what);
  }

  double number(std::string_view text, std::size_t offset, const char* what) const {
    // from_chars rejects a leading '+', which LIBSVM labels commonly carry.
    if (!text.empty() && text.front() == '+') {
      text.remove_prefix(1);
      ++offset;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
        !std::isfinite(v)) {
      fail(std::string("invalid ") + what + " '" + std::string(text) + "'", offset);
    }
    return v;
  }

 private:
  void skip_space() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }

  std::string_view line_;
  std::size_t line_no_;
  const std::string& source_;
  std::size_t pos_ = 0;
  std::size_t start_ = 0;
};

}  // namespace

Dataset parse_libsvm(std::istream& in, std::size_t dimension_override,
                     const std::string& source) {
  std::vector<SparseExample> rows;
  std::size_t max_index = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    LineParser p(line, line_no, source);
    if (p.at_end()) continue;

    SparseExample row;
    const std::string_view label_tok = p.token();
    const double label = p.number(label_tok, 0, "label");
    if (label == 1.0) {
      row.label = 1.0;
    } else if (label == -1.0 || label == 0.0) {
      row.label = -1.0;
    } else {
      p.fail("label must be one of -1, 0, +1");
    }

    while (!p.at_end()) {
      const std::string_view tok = p.token();
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) p.fail("expected <index>:<value>");
      const std::string_view idx_text = tok.substr(0, colon);
      std::size_t idx = 0;
      const auto [ptr, ec] =
          std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
      if (idx_text.empty() || ec != std::errc() || ptr != idx_text.data() + idx_text.size()) {
        p.fail("invalid feature index '" + std::string(idx_text) + "'");
      }
      if (idx == 0) p.fail("feature indices are 1-based");
      if (!row.indices.empty() && idx - 1 <= row.indices.back()) {
        p.fail("feature indices must be strictly increasing");
      }
      const double value = p.number(tok.substr(colon + 1), colon + 1, "feature value");
      if (dimension_override > 0 && idx > dimension_override) {
        p.fail("feature index " + std::to_string(idx) + " exceeds dimension " +
               std::to_string(dimension_override));
      }
      row.indices.push_back(idx - 1);
      row.values.push_back(value);
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(source + ": no examples");
  const std::size_t d = dimension_override > 0 ? dimension_override : std::max<std::size_t>(max_index, 1);
  return Dataset(std::move(rows), d);
}

Dataset parse_libsvm(const std::filesystem::path& path, std::size_t dimension_override) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open");
  return parse_libsvm(in, dimension_override, path.string());
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  char buf[64];
  for (const auto& row : data.examples()) {
    out << (row.label > 0 ? "+1" : "-1");
    for (std::size_t j = 0; j < row.indices.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row.values[j]);
      out << ' ' << (row.indices[j] + 1) << ':' << buf;
    }
    out << '\n';
  }
}

}  // namespace mbl
