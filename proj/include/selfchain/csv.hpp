#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace selfchain {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double x);

/// Writes rows of doubles with a header like "u1,u2,..." or "tau1,tau2,...".
void write_samples_csv(std::ostream& os, const std::string& column_prefix,
                       const std::vector<std::vector<double>>& rows, int dim);

}  // namespace selfchain
