#include "selfchain/csv.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace selfchain {

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_samples_csv(std::ostream& os, const std::string& column_prefix,
                       const std::vector<std::vector<double>>& rows, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (i) os << ',';
    os << column_prefix << (i + 1);
  }
  os << '\n';
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != dim)
      throw std::invalid_argument("write_samples_csv: row width mismatch");
    for (int i = 0; i < dim; ++i) {
      if (i) os << ',';
      os << format_double(row[i]);
    }
    os << '\n';
  }
}

}  // namespace selfchain
