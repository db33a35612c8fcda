#include "chpt/series.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "chpt/csv.hpp"
#include "chpt/errors.hpp"

namespace chpt {

std::string_view sentiment_name(Sentiment s) {
  switch (s) {
    case Sentiment::Positive: return "positive";
    case Sentiment::Negative: return "negative";
    case Sentiment::Neutral: return "neutral";
  }
  return "?";
}

std::optional<Sentiment> parse_sentiment(std::string_view text) {
  if (text == "positive") return Sentiment::Positive;
  if (text == "negative") return Sentiment::Negative;
  if (text == "neutral") return Sentiment::Neutral;
  return std::nullopt;
}

Eigen::ArrayXd transform_log1p(const Eigen::ArrayXi& counts) {
  if (counts.size() > 0 && counts.minCoeff() < 0)
    throw_error(ErrorKind::Domain, "transform_log1p: negative count");
  Eigen::ArrayXd out(counts.size());
  for (Eigen::Index i = 0; i < counts.size(); ++i)
    out[i] = std::log1p(static_cast<double>(counts[i]));
  return out;
}

const Eigen::ArrayXd& WeeklySeries::target(Sentiment s) const {
  switch (s) {
    case Sentiment::Positive: return target_positive;
    case Sentiment::Negative: return target_negative;
    default: break;
  }
  throw_error(ErrorKind::Domain, "no target column for sentiment 'neutral'");
}

namespace {

const char* kHeader =
    "week_index,week_start_date,positive,negative,neutral,total,"
    "target_positive,target_negative";

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int parse_count(const std::string& s, long line, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw_error(ErrorKind::Schema, std::string("series line ") + std::to_string(line) +
                                       ": bad " + what + " value '" + s + "'");
  }
}

double parse_real(const std::string& s, long line, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw_error(ErrorKind::Schema, std::string("series line ") + std::to_string(line) +
                                       ": bad " + what + " value '" + s + "'");
  }
}

}  // namespace

void write_series_csv(const WeeklySeries& s, std::ostream& out) {
  out << kHeader << '\n';
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out << i << ',' << format_date(s.week_date(i)) << ',' << s.positive[i] << ','
        << s.negative[i] << ',' << s.neutral[i] << ',' << s.total[i] << ','
        << fmt_double(s.target_positive[i]) << ',' << fmt_double(s.target_negative[i])
        << '\n';
  }
}

WeeklySeries read_series_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields))
    throw_error(ErrorKind::Schema, "series file is empty");
  if (fields.size() != 8 || fields[0] != "week_index" || fields[1] != "week_start_date" ||
      fields[2] != "positive" || fields[3] != "negative" || fields[4] != "neutral" ||
      fields[5] != "total" || fields[6] != "target_positive" ||
      fields[7] != "target_negative")
    throw_error(ErrorKind::Schema, "series file header does not match expected schema");

  std::vector<int> pos, neg, neu, tot;
  std::vector<double> tpos, tneg;
  std::vector<Date> dates;
  Eigen::Index expect = 0;
  while (reader.next(fields)) {
    long line = reader.record_line();
    if (fields.size() != 8)
      throw_error(ErrorKind::Schema,
                  "series line " + std::to_string(line) + ": expected 8 columns");
    int idx = parse_count(fields[0], line, "week_index");
    if (idx != expect)
      throw_error(ErrorKind::Schema, "series line " + std::to_string(line) +
                                         ": week_index not contiguous (expected " +
                                         std::to_string(expect) + ")");
    auto date = parse_date(fields[1]);
    if (!date)
      throw_error(ErrorKind::Schema,
                  "series line " + std::to_string(line) + ": bad week_start_date");
    dates.push_back(*date);
    pos.push_back(parse_count(fields[2], line, "positive"));
    neg.push_back(parse_count(fields[3], line, "negative"));
    neu.push_back(parse_count(fields[4], line, "neutral"));
    tot.push_back(parse_count(fields[5], line, "total"));
    if (tot.back() != pos.back() + neg.back() + neu.back())
      throw_error(ErrorKind::Schema, "series line " + std::to_string(line) +
                                         ": total != positive + negative + neutral");
    tpos.push_back(parse_real(fields[6], line, "target_positive"));
    tneg.push_back(parse_real(fields[7], line, "target_negative"));
    ++expect;
  }
  if (expect == 0) throw_error(ErrorKind::Schema, "series file has no data rows");

  WeeklySeries s;
  s.start_date = dates[0];
  for (Eigen::Index i = 0; i < expect; ++i) {
    if (dates[i] != s.start_date + Days{7 * i})
      throw_error(ErrorKind::Schema,
                  "week_start_date of week " + std::to_string(i) +
                      " is not start_date + 7 * week_index");
  }
  auto to_arrayi = [&](const std::vector<int>& v) {
    return Eigen::Map<const Eigen::ArrayXi>(v.data(), static_cast<Eigen::Index>(v.size()))
        .eval();
  };
  s.positive = to_arrayi(pos);
  s.negative = to_arrayi(neg);
  s.neutral = to_arrayi(neu);
  s.total = to_arrayi(tot);
  s.target_positive =
      Eigen::Map<const Eigen::ArrayXd>(tpos.data(), static_cast<Eigen::Index>(tpos.size()));
  s.target_negative =
      Eigen::Map<const Eigen::ArrayXd>(tneg.data(), static_cast<Eigen::Index>(tneg.size()));
  return s;
}

}  // namespace chpt
