#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "chpt/dates.hpp"

namespace chpt {

enum class Sentiment { Positive, Negative, Neutral };

std::string_view sentiment_name(Sentiment s);
std::optional<Sentiment> parse_sentiment(std::string_view text);

// target[i] = ln(counts[i] + 1); throws on negative counts.
Eigen::ArrayXd transform_log1p(const Eigen::ArrayXi& counts);

// Regularly spaced weekly counts. Week k covers the seven days starting at
// start_date + 7k; the implicit week_index is the array position, contiguous
// by construction and validated on load. The target columns hold the series
// actually regressed on and are authoritative when read from file (synthetic
// series carry exact targets with back-filled counts).
struct WeeklySeries {
  Date start_date{};
  Eigen::ArrayXi positive, negative, neutral, total;
  Eigen::ArrayXd target_positive, target_negative;

  Eigen::Index size() const { return positive.size(); }

  Date week_date(Eigen::Index k) const { return start_date + Days{7 * k}; }

  // log1p target for the selected sentiment; Neutral has no target column.
  const Eigen::ArrayXd& target(Sentiment s) const;
};

// CSV layout: week_index,week_start_date,positive,negative,neutral,total,
//             target_positive,target_negative
void write_series_csv(const WeeklySeries& s, std::ostream& out);
WeeklySeries read_series_csv(std::istream& in);

}  // namespace chpt
