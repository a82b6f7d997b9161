#pragma once

// Textual interchange: CPLEX-style LP files for the model and name=value
// solution files coming back from an external solver.

#include "mirrorvlc/design.hpp"
#include "mirrorvlc/lp.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

namespace mirrorvlc {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every variable is listed in the Bounds section in index order, so reading
/// the file back reproduces the variable order.
void write_lp(const lp::LinearModel& model, std::ostream& out);
[[nodiscard]] lp::LinearModel read_lp(std::istream& in);

void export_model(const DesignModel& model, const std::filesystem::path& path);

/// name=value (or name value) per line; '#' starts a comment.
[[nodiscard]] std::map<std::string, double> read_solution(std::istream& in);

/// Validates the point against the model (scaled tolerance 1e-6, binaries
/// integral, rho within 1e-6 of chi * P) and returns it with status feasible.
/// Variables absent from the file are taken as 0.
[[nodiscard]] MirrorDesign accept_solution(const DesignModel& model,
                                           const std::map<std::string, double>& values);
[[nodiscard]] MirrorDesign import_solution(const DesignModel& model,
                                           const std::filesystem::path& path);

}  // namespace mirrorvlc
