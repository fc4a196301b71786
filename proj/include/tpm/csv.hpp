#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

namespace tpm {

/// Locale-independent shortest round-trip double formatting.
inline std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, p);
}

/// Minimal CSV builder: header row, '.' decimal, ',' separator, '\n' rows.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    explicit Row(CsvTable& t) : t_(t) {}
    Row& add(const std::string& s) {
      cells_.push_back(s);
      return *this;
    }
    Row& add(double x) { return add(format_double(x)); }
    Row& add(int x) { return add(std::to_string(x)); }
    Row& add(uint64_t x) { return add(std::to_string(x)); }
    ~Row() { t_.push(cells_); }

   private:
    CsvTable& t_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(*this); }

  std::string str() const {
    std::string out = join(header_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

  size_t n_rows() const { return rows_.size(); }

 private:
  friend class Row;
  void push(const std::vector<std::string>& cells) { rows_.push_back(cells); }
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    line += '\n';
    return line;
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace tpm
