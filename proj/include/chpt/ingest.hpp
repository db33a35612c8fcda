#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chpt/dates.hpp"
#include "chpt/series.hpp"

namespace chpt {

struct ReviewRecord {
  Date posted_at{};
  double rating = 0.0;   // [0, 5], half-stars allowed
  std::string category;  // free-form label as scraped
};

struct RejectedRow {
  long line = 0;
  std::string reason;
};

struct ReviewCsvSchema {
  std::string date_col = "date";
  std::string rating_col = "rating";
  std::string category_col = "category";
};

struct ParseResult {
  std::vector<ReviewRecord> records;
  std::vector<RejectedRow> rejects;
};

// trim, collapse internal whitespace runs, ASCII case-fold
std::string normalize_text(std::string_view raw);

// Ordered first-match rules over normalized text. Canonical labels are
// themselves rules, so applying the map twice equals applying it once.
class CategoryMap {
 public:
  // the merges shipped with the tool (spelling variants, short forms,
  // and the compound-category merges)
  static CategoryMap defaults();

  // one "raw => canonical" rule per line, '#' comments
  static CategoryMap load(std::istream& in);

  void add_rule(std::string_view pattern, std::string_view canonical);

  // normalized input -> canonical label, or the normalized input itself
  // when no rule matches
  std::string apply(std::string_view raw) const;

  std::size_t size() const { return rules_.size(); }

 private:
  std::vector<std::pair<std::string, std::string>> rules_;
};

std::string normalize_category(std::string_view raw, const CategoryMap& map);

// positive iff rating >= 4, negative iff rating <= 2, neutral otherwise;
// throws outside [0, 5]
Sentiment classify_sentiment(double rating);

// One record per well-formed row; malformed rows are collected, not dropped.
// Throws a schema error when a required column is missing from the header.
ParseResult parse_reviews(std::istream& csv, const ReviewCsvSchema& schema);

// Buckets records into 7-day weeks anchored at the earliest retained date.
// Retained = posted in year >= min_year and, when `category` is non-empty,
// mapping to the same canonical category. Weeks with no reviews stay in the
// series with zero counts. Throws when nothing survives the filter.
WeeklySeries aggregate_weekly(const std::vector<ReviewRecord>& records,
                              const std::string& category, int min_year,
                              const CategoryMap& map);

}  // namespace chpt
