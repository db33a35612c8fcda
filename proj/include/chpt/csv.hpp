#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace chpt {

// Incremental RFC-4180-style reader: quoted fields may contain commas,
// doubled quotes, and newlines. Blank lines between records are skipped.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Fills `fields` with the next record; returns false at end of input.
  bool next(std::vector<std::string>& fields);

  // 1-based line number on which the last record started.
  long record_line() const { return record_line_; }

 private:
  std::istream& in_;
  long line_ = 1;
  long record_line_ = 0;
};

std::string csv_escape(std::string_view field);

}  // namespace chpt
