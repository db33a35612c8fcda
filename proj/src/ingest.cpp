#include "chpt/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "chpt/csv.hpp"
#include "chpt/errors.hpp"

namespace chpt {

std::string normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

CategoryMap CategoryMap::defaults() {
  CategoryMap m;
  auto rule = [&m](std::string_view raw, std::string_view canonical) {
    m.add_rule(raw, canonical);
  };
  // spelling/short-form variants
  rule("casual dining", "Casual Dining");
  rule("cd", "Casual Dining");
  rule("microbrewery", "Microbrewery");
  rule("bar", "Bar");
  rule("quick bites", "Quick Bites");
  // compound categories; the scraped labels vary in spacing around '/'
  const std::pair<const char*, const char*> compounds[] = {
      {"bar/cd", "Bar/CD"},
      {"cd/bar", "Bar/CD"},
      {"casual dining/bar", "Bar/CD"},
      {"bar/casual dining", "Bar/CD"},
      {"microbrewery/cd", "Microbrewery/CD"},
      {"cd/microbrewery", "Microbrewery/CD"},
      {"casual dining/microbrewery", "Microbrewery/CD"},
      {"microbrewery/casual dining", "Microbrewery/CD"},
      {"quick bites/cafe", "Quick Bites/Cafe"},
      {"casual dining/lounge", "Casual Dining/Lounge"},
      {"casual dining/cafe", "Casual Dining/Cafe"},
      {"casual dining/pub", "Casual Dining/Pub"},
  };
  for (auto [raw, canonical] : compounds) {
    std::string base(raw);
    rule(base, canonical);
    std::size_t slash = base.find('/');
    rule(base.substr(0, slash) + " / " + base.substr(slash + 1), canonical);
    rule(base.substr(0, slash) + " /" + base.substr(slash + 1), canonical);
    rule(base.substr(0, slash) + "/ " + base.substr(slash + 1), canonical);
  }
  return m;
}

CategoryMap CategoryMap::load(std::istream& in) {
  CategoryMap m;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t arrow = line.find("=>");
    if (arrow == std::string::npos) {
      if (normalize_text(line).empty()) continue;
      throw_error(ErrorKind::Schema, "category map line " + std::to_string(line_no) +
                                         ": expected 'raw => canonical'");
    }
    std::string raw = line.substr(0, arrow);
    std::string canonical = line.substr(arrow + 2);
    // canonical keeps its spelling apart from surrounding whitespace
    auto trim = [](std::string& s) {
      std::size_t b = s.find_first_not_of(" \t");
      std::size_t e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    trim(canonical);
    if (normalize_text(raw).empty() || canonical.empty())
      throw_error(ErrorKind::Schema,
                  "category map line " + std::to_string(line_no) + ": empty side");
    m.add_rule(raw, canonical);
  }
  return m;
}

void CategoryMap::add_rule(std::string_view pattern, std::string_view canonical) {
  rules_.emplace_back(normalize_text(pattern), std::string(canonical));
  // keep the map idempotent: the canonical label must map to itself
  std::string canon_key = normalize_text(canonical);
  bool covered = false;
  for (const auto& [key, value] : rules_) {
    if (key == canon_key) {
      covered = true;
      break;
    }
  }
  if (!covered) rules_.emplace_back(canon_key, std::string(canonical));
}

std::string CategoryMap::apply(std::string_view raw) const {
  std::string key = normalize_text(raw);
  for (const auto& [pattern, canonical] : rules_) {
    if (pattern == key) return canonical;
  }
  return key;
}

std::string normalize_category(std::string_view raw, const CategoryMap& map) {
  return map.apply(raw);
}

Sentiment classify_sentiment(double rating) {
  if (!(rating >= 0.0 && rating <= 5.0))
    throw_error(ErrorKind::Domain,
                "rating " + std::to_string(rating) + " outside [0, 5]");
  if (rating >= 4.0) return Sentiment::Positive;
  if (rating <= 2.0) return Sentiment::Negative;
  return Sentiment::Neutral;
}

ParseResult parse_reviews(std::istream& csv, const ReviewCsvSchema& schema) {
  CsvReader reader(csv);
  std::vector<std::string> fields;
  if (!reader.next(fields))
    throw_error(ErrorKind::Schema, "reviews file is empty (no header row)");

  auto find_col = [&](const std::string& name) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::string header = fields[i];
      std::size_t b = header.find_first_not_of(" \t\r");
      std::size_t e = header.find_last_not_of(" \t\r");
      header = b == std::string::npos ? std::string() : header.substr(b, e - b + 1);
      if (header == name) return i;
    }
    throw_error(ErrorKind::Schema, "required column '" + name + "' not found in header");
  };
  std::size_t date_i = find_col(schema.date_col);
  std::size_t rating_i = find_col(schema.rating_col);
  std::size_t category_i = find_col(schema.category_col);
  std::size_t min_cols = std::max({date_i, rating_i, category_i}) + 1;

  ParseResult result;
  while (reader.next(fields)) {
    long line = reader.record_line();
    if (fields.size() < min_cols) {
      result.rejects.push_back({line, "too few columns"});
      continue;
    }
    auto date = parse_date(fields[date_i]);
    if (!date) {
      result.rejects.push_back({line, "unparseable date '" + fields[date_i] + "'"});
      continue;
    }
    double rating;
    try {
      std::size_t used = 0;
      rating = std::stod(fields[rating_i], &used);
      if (used != fields[rating_i].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      result.rejects.push_back({line, "unparseable rating '" + fields[rating_i] + "'"});
      continue;
    }
    if (!(rating >= 0.0 && rating <= 5.0)) {
      result.rejects.push_back({line, "rating " + fields[rating_i] + " outside [0, 5]"});
      continue;
    }
    result.records.push_back({*date, rating, fields[category_i]});
  }
  return result;
}

WeeklySeries aggregate_weekly(const std::vector<ReviewRecord>& records,
                              const std::string& category, int min_year,
                              const CategoryMap& map) {
  std::string wanted = category.empty() ? std::string() : map.apply(category);

  std::vector<const ReviewRecord*> kept;
  kept.reserve(records.size());
  for (const auto& r : records) {
    if (year_of(r.posted_at) < min_year) continue;
    if (!wanted.empty() && map.apply(r.category) != wanted) continue;
    kept.push_back(&r);
  }
  if (kept.empty())
    throw_error(ErrorKind::Domain,
                "no records left after filtering (category '" + category + "', min year " +
                    std::to_string(min_year) + ")");

  Date start = kept.front()->posted_at;
  Date last = start;
  for (const auto* r : kept) {
    start = std::min(start, r->posted_at);
    last = std::max(last, r->posted_at);
  }
  Eigen::Index weeks = (last - start).count() / 7 + 1;

  WeeklySeries s;
  s.start_date = start;
  s.positive = Eigen::ArrayXi::Zero(weeks);
  s.negative = Eigen::ArrayXi::Zero(weeks);
  s.neutral = Eigen::ArrayXi::Zero(weeks);
  for (const auto* r : kept) {
    Eigen::Index week = (r->posted_at - start).count() / 7;
    switch (classify_sentiment(r->rating)) {
      case Sentiment::Positive: ++s.positive[week]; break;
      case Sentiment::Negative: ++s.negative[week]; break;
      case Sentiment::Neutral: ++s.neutral[week]; break;
    }
  }
  s.total = s.positive + s.negative + s.neutral;
  s.target_positive = transform_log1p(s.positive);
  s.target_negative = transform_log1p(s.negative);
  return s;
}

}  // namespace chpt
