#include "chpt/csv.hpp"

namespace chpt {

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;

  int ci;
  while ((ci = in_.get()) != std::char_traits<char>::eof()) {
    char c = static_cast<char>(ci);
    if (!saw_any) {
      // skip blank lines between records
      if (c == '\n') {
        ++line_;
        continue;
      }
      if (c == '\r') continue;
      saw_any = true;
      record_line_ = line_;
    }
    if (in_quotes) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        break;
      case '\r':
        break;
      case '\n':
        ++line_;
        fields.push_back(std::move(field));
        return true;
      default:
        field.push_back(c);
    }
  }
  if (!saw_any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string csv_escape(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace chpt
