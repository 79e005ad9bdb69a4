#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pkrect/harness.hpp"
#include "pkrect/matrix.hpp"
#include "pkrect/prior.hpp"
#include "pkrect/zop_solver.hpp"

// File formats: headerless comma-separated matrices (one sample per row),
// one integer label per line, and JSON for structured objects. Reals are
// written with 9 significant digits.

namespace pkrect::io {

using json = nlohmann::json;

/// Unreadable or malformed input files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_real(double v);
/// v rounded to 9 significant digits, so JSON output matches format_real.
double round_real(double v);

std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

Matrix parse_matrix_csv(const std::string& text, const std::string& origin = "<input>");
std::vector<int> parse_labels(const std::string& text, const std::string& origin = "<input>");
Matrix read_matrix_csv(const std::filesystem::path& path);
std::vector<int> read_labels(const std::filesystem::path& path);

std::string matrix_to_csv(const Matrix& m);
std::string labels_to_text(std::span<const int> labels);

json prior_to_json(const PriorKnowledge& k);
PriorKnowledge prior_from_json(const json& j);

/// A bare probability vector: either a JSON array or {"probs": [...]}.
ClassPrior class_prior_from_json(const json& j);

json report_to_json(const SolveReport& r);

harness::SyntheticDomainSpec domain_spec_from_json(const json& j);
json record_to_json(const harness::IterationRecord& r);

/// Pretty JSON with a trailing newline.
std::string dump(const json& j);

}  // namespace pkrect::io
