#include "pkrect/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pkrect/error.hpp"

namespace pkrect::io {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double round_real(double v) { return std::strtod(format_real(v).c_str(), nullptr); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, const std::string& origin, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw IoError(origin + ":" + std::to_string(line) + ": cannot parse '" + std::string(field) + "'");
  return value;
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad field '") + key + "': " + e.what());
  }
}

Matrix matrix_from_json(const json& j, const char* key) {
  auto rows = get_field<std::vector<std::vector<double>>>(j, key);
  return Matrix::from_rows(rows);
}

}  // namespace

Matrix parse_matrix_csv(const std::string& text, const std::string& origin) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0, line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    std::size_t count = 0;
    while (true) {
      const auto comma = view.find(',');
      values.push_back(parse_number<double>(view.substr(0, comma), origin, line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      view.remove_prefix(comma + 1);
    }
    if (rows == 0) cols = count;
    if (count != cols)
      throw IoError(origin + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                    " columns, found " + std::to_string(count));
    ++rows;
  }
  if (rows == 0) throw IoError(origin + ": no rows");
  return Matrix(rows, cols, std::move(values));
}

std::vector<int> parse_labels(const std::string& text, const std::string& origin) {
  std::vector<int> labels;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    const int y = parse_number<int>(view, origin, line_no);
    if (y < 0) throw IoError(origin + ":" + std::to_string(line_no) + ": negative label");
    labels.push_back(y);
  }
  if (labels.empty()) throw IoError(origin + ": no labels");
  return labels;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(read_text(path), path.string());
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  return parse_labels(read_text(path), path.string());
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_real(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string labels_to_text(std::span<const int> labels) {
  std::string out;
  for (int y : labels) {
    out += std::to_string(y);
    out += '\n';
  }
  return out;
}

json prior_to_json(const PriorKnowledge& k) {
  json j;
  j["num_classes"] = k.num_classes;
  j["unary_bounds"] = json::array();
  for (const auto& u : k.unary)
    j["unary_bounds"].push_back(
        {{"class", u.class_index}, {"lower", round_real(u.lower)}, {"upper", round_real(u.upper)}});
  j["binary_relationships"] = json::array();
  for (const auto& b : k.binary)
    j["binary_relationships"].push_back(
        {{"greater", b.greater}, {"lesser", b.lesser}, {"delta", round_real(b.delta)}});
  return j;
}

PriorKnowledge prior_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("prior knowledge must be a JSON object");
  PriorKnowledge k;
  k.num_classes = get_field<int>(j, "num_classes");
  if (j.contains("unary_bounds"))
    for (const auto& u : j.at("unary_bounds"))
      k.unary.push_back({get_field<int>(u, "class"), get_field<double>(u, "lower"),
                         get_field<double>(u, "upper")});
  if (j.contains("binary_relationships"))
    for (const auto& b : j.at("binary_relationships"))
      k.binary.push_back({get_field<int>(b, "greater"), get_field<int>(b, "lesser"),
                          b.contains("delta") ? get_field<double>(b, "delta") : 0.0});
  k.validate();
  return k;
}

ClassPrior class_prior_from_json(const json& j) {
  const json& arr = j.is_object() ? j.at("probs") : j;
  try {
    return ClassPrior(arr.get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad class prior: ") + e.what());
  }
}

json report_to_json(const SolveReport& r) {
  json j;
  j["objective"] = round_real(r.objective);
  j["penalty"] = round_real(r.penalty);
  j["total"] = round_real(r.total());
  j["class_counts"] = r.class_counts;
  j["unary_slacks"] = json::array();
  for (const auto& s : r.unary_slacks)
    j["unary_slacks"].push_back(
        {{"class", s.class_index}, {"lower", round_real(s.lower)}, {"upper", round_real(s.upper)}});
  j["binary_slacks"] = json::array();
  for (const auto& s : r.binary_slacks)
    j["binary_slacks"].push_back(
        {{"greater", s.greater}, {"lesser", s.lesser}, {"slack", round_real(s.slack)}});
  j["certified_optimal"] = r.certified_optimal;
  j["feasible"] = r.feasible;
  return j;
}

harness::SyntheticDomainSpec domain_spec_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("domain spec must be a JSON object");
  harness::SyntheticDomainSpec spec;
  spec.num_classes = get_field<int>(j, "num_classes");
  spec.feature_dim = get_field<int>(j, "feature_dim");
  spec.class_means = matrix_from_json(j, "class_means");
  spec.class_scales = get_field<std::vector<double>>(j, "class_scales");
  spec.source_prior = ClassPrior(get_field<std::vector<double>>(j, "source_prior"));
  spec.target_prior = ClassPrior(get_field<std::vector<double>>(j, "target_prior"));
  spec.n_source = get_field<int>(j, "n_source");
  spec.n_target = get_field<int>(j, "n_target");
  if (j.contains("mean_shift"))
    spec.mean_shift = matrix_from_json(j, "mean_shift");
  else
    spec.mean_shift = Matrix(spec.class_means.rows(), spec.class_means.cols());
  spec.validate();
  return spec;
}

json record_to_json(const harness::IterationRecord& r) {
  auto opt = [](const std::optional<double>& v) -> json {
    return v ? json(round_real(*v)) : json(nullptr);
  };
  json j;
  j["iteration"] = r.iteration;
  j["acc_argmax"] = round_real(r.acc_argmax);
  j["acc_stage1"] = round_real(r.acc_stage1);
  j["acc_pseudo"] = round_real(r.acc_pseudo);
  j["per_class_acc"] = round_real(r.per_class_acc);
  j["kl_labels"] = opt(r.kl_labels);
  j["kl_teacher"] = opt(r.kl_teacher);
  j["kl_blend"] = opt(r.kl_blend);
  j["histogram"] = r.histogram;
  j["changed"] = r.changed;
  j["slack_sum"] = round_real(r.slack_sum);
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace pkrect::io
