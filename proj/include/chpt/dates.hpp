#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace chpt {

using Date = std::chrono::sys_days;
using Days = std::chrono::days;

// Strict ISO-8601 calendar date, YYYY-MM-DD. Returns nullopt on anything else.
std::optional<Date> parse_date(std::string_view text);

std::string format_date(Date d);

int year_of(Date d);

}  // namespace chpt
