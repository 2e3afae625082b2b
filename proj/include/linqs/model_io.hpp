#pragma once

// Model files (JSON) and trajectory CSV files.
//
// Model schema, all other top-level keys rejected:
//   n_modes              integer N >= 1                        (required)
//   hamiltonian          2N×2N array of reals                  (required)
//   coupling             K×2N array of [re, im] pairs          (required)
//   initial_mean         2N reals, default zeros
//   initial_cov          2N×2N reals, default I/2
//   labels               array of strings, or object of strings
//   quadrature_ordering  "block" (default); "interleaved" is rejected
//
// Trajectory CSV: optional '#' metadata lines, then the header
//   t,mean_1,...,mean_2N,cov_11,cov_12,...,cov_2N2N
// with the covariance upper triangle in row-major order, then one row per
// sample, every value printed with 17 significant digits.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "linqs/core_model.hpp"
#include "linqs/errors.hpp"
#include "linqs/moment_dynamics.hpp"

namespace linqs {

/// Schema-checked but not yet physically validated contents of a model file.
struct ModelFile {
  LinearOpenSystem system;
  std::optional<VectorXd> initial_mean;
  std::optional<MatrixXd> initial_cov;
  std::vector<std::string> labels;
  QuadratureOrdering ordering = QuadratureOrdering::block;
};

struct LoadedModel {
  LinearOpenSystem system;  // validated, M symmetrized
  GaussianMomentState initial;
  std::vector<std::string> labels;
};

namespace detail {

using nlohmann::json;

inline std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  const std::size_t begin = text.rfind('\n', byte == 0 ? 0 : byte - 1);
  const std::size_t from = begin == std::string_view::npos ? 0 : begin + 1;
  const std::size_t end = text.find('\n', from);
  std::ostringstream os;
  os << "line " << line << ", column " << col << ": "
     << text.substr(from, end == std::string_view::npos ? std::string_view::npos : end - from);
  return os.str();
}

inline double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  return j.get<double>();
}

inline MatrixXd real_matrix(const json& j, const std::string& key) {
  if (!j.is_array()) throw ParseError(key + ": expected an array of rows");
  const auto rows = static_cast<Index>(j.size());
  Index cols = -1;
  MatrixXd out;
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw ParseError(key + "[" + std::to_string(i) + "]: expected an array");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      out.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      throw ParseError(key + ": rows have different lengths");
    }
    for (Index k = 0; k < cols; ++k)
      out(i, k) = number_at(row[static_cast<std::size_t>(k)],
                            key + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  if (rows == 0) out.resize(0, 0);
  return out;
}

inline MatrixXcd complex_matrix(const json& j, const std::string& key) {
  if (!j.is_array()) throw ParseError(key + ": expected an array of rows");
  const auto rows = static_cast<Index>(j.size());
  Index cols = -1;
  MatrixXcd out;
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw ParseError(key + "[" + std::to_string(i) + "]: expected an array");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      out.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      throw ParseError(key + ": rows have different lengths");
    }
    for (Index k = 0; k < cols; ++k) {
      const std::string where = key + "[" + std::to_string(i) + "][" + std::to_string(k) + "]";
      const json& z = row[static_cast<std::size_t>(k)];
      if (!z.is_array() || z.size() != 2)
        throw ParseError(where + ": complex entries must be [re, im] pairs");
      out(i, k) = Complex(number_at(z[0], where + "[0]"), number_at(z[1], where + "[1]"));
    }
  }
  if (rows == 0) out.resize(0, 0);
  return out;
}

}  // namespace detail

inline ModelFile parse_model(std::string_view text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("malformed model file at " + detail::line_context(text, e.byte) + " (" +
                     e.what() + ")");
  }
  if (!doc.is_object()) throw ParseError("model file must be a JSON object");

  static const char* const known[] = {"n_modes",      "hamiltonian", "coupling",
                                      "initial_mean", "initial_cov", "labels",
                                      "quadrature_ordering"};
  for (const auto& item : doc.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ParseError("unknown key \"" + item.key() + "\" in model file");
  }
  for (const char* k : {"n_modes", "hamiltonian", "coupling"})
    if (!doc.contains(k)) throw ParseError(std::string("missing required key \"") + k + "\"");

  ModelFile model;
  const json& n = doc["n_modes"];
  if (!n.is_number_integer()) throw ParseError("n_modes: expected an integer");
  model.system.n_modes = n.get<Index>();
  model.system.hamiltonian = detail::real_matrix(doc["hamiltonian"], "hamiltonian");
  model.system.coupling = detail::complex_matrix(doc["coupling"], "coupling");

  if (doc.contains("initial_mean")) {
    const json& m = doc["initial_mean"];
    if (!m.is_array()) throw ParseError("initial_mean: expected an array");
    VectorXd v(static_cast<Index>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
      v(static_cast<Index>(i)) = detail::number_at(m[i], "initial_mean[" + std::to_string(i) + "]");
    model.initial_mean = std::move(v);
  }
  if (doc.contains("initial_cov"))
    model.initial_cov = detail::real_matrix(doc["initial_cov"], "initial_cov");

  if (doc.contains("labels")) {
    const json& l = doc["labels"];
    if (l.is_array()) {
      for (const auto& s : l) {
        if (!s.is_string()) throw ParseError("labels: entries must be strings");
        model.labels.push_back(s.get<std::string>());
      }
    } else if (l.is_object()) {
      for (const auto& item : l.items()) {
        if (!item.value().is_string()) throw ParseError("labels: values must be strings");
        model.labels.push_back(item.key() + "=" + item.value().get<std::string>());
      }
    } else {
      throw ParseError("labels: expected an array or object of strings");
    }
  }

  if (doc.contains("quadrature_ordering")) {
    const json& o = doc["quadrature_ordering"];
    if (!o.is_string()) throw ParseError("quadrature_ordering: expected a string");
    const auto s = o.get<std::string>();
    if (s == "block")
      model.ordering = QuadratureOrdering::block;
    else if (s == "interleaved")
      model.ordering = QuadratureOrdering::interleaved;
    else
      throw ParseError("quadrature_ordering: expected \"block\", got \"" + s + "\"");
  }
  return model;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline ModelFile read_model(const std::string& path) { return parse_model(read_file(path)); }

/// Validates the system (throws ValidationError with the full report) and
/// applies the initial-state defaults.
inline LoadedModel finalize_model(const ModelFile& model) {
  if (model.ordering != QuadratureOrdering::block)
    throw ValidationError(
        "quadrature_ordering \"interleaved\" is not supported; reorder rows/columns to "
        "(q1..qN, p1..pN)");
  LoadedModel out{validated(model.system, model.ordering), {}, model.labels};
  const Index dim = out.system.dim();
  VectorXd mean = model.initial_mean.value_or(VectorXd::Zero(dim));
  MatrixXd cov = model.initial_cov.value_or(0.5 * MatrixXd::Identity(dim, dim));
  if (mean.size() != dim)
    throw ValidationError("initial_mean has " + std::to_string(mean.size()) +
                          " entries, expected " + std::to_string(dim));
  if (cov.rows() != dim || cov.cols() != dim)
    throw ValidationError("initial_cov must be " + std::to_string(dim) + "x" +
                          std::to_string(dim));
  if (!mean.allFinite() || !cov.allFinite())
    throw ValidationError("initial state has non-finite entries");
  if (max_abs(cov - cov.transpose()) > kSymmetryTol)
    throw ValidationError("initial_cov is not symmetric");
  out.initial = GaussianMomentState(0.0, std::move(mean), cov);
  return out;
}

inline LoadedModel load_model(const std::string& path) { return finalize_model(read_model(path)); }

// ---------------------------------------------------------------------------
// Trajectory CSV

inline std::string format_double(double v, int precision = 17) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, canonical_zero(v), std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

inline std::string trajectory_header(Index dim) {
  std::string h = "t";
  for (Index i = 1; i <= dim; ++i) h += ",mean_" + std::to_string(i);
  for (Index i = 1; i <= dim; ++i)
    for (Index j = i; j <= dim; ++j) h += ",cov_" + std::to_string(i) + std::to_string(j);
  return h;
}

inline void write_trajectory(const Trajectory& traj, std::ostream& out) {
  if (!traj.integrator.empty()) out << "# integrator: " << traj.integrator << '\n';
  if (traj.step > 0.0) out << "# dt: " << format_double(traj.step) << '\n';
  if (!traj.fingerprint.empty()) out << "# fingerprint: " << traj.fingerprint << '\n';
  const Index dim = traj.empty() ? traj.dimension : traj[0].dim();
  out << trajectory_header(dim) << '\n';
  for (const auto& s : traj.samples()) {
    out << format_double(s.time());
    for (Index i = 0; i < dim; ++i) out << ',' << format_double(s.mean()(i));
    for (Index i = 0; i < dim; ++i)
      for (Index j = i; j < dim; ++j) out << ',' << format_double(s.covariance()(i, j));
    out << '\n';
  }
}

inline void save_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  write_trajectory(traj, out);
  out.flush();
  if (!out) throw Error("I/O failure while writing " + path);
}

inline Trajectory parse_trajectory(std::string_view text) {
  Trajectory traj;
  bool have_header = false;
  Index dim = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto parse_number = [&](std::string_view field) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
      throw ParseError("trajectory line " + std::to_string(line_no) + ": bad number \"" +
                       std::string(field) + "\"");
    return v;
  };

  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (line.front() == '#') {
      auto meta = line.substr(1);
      while (!meta.empty() && meta.front() == ' ') meta.remove_prefix(1);
      const auto colon = meta.find(": ");
      if (colon == std::string_view::npos) continue;
      const auto key = meta.substr(0, colon);
      const auto value = meta.substr(colon + 2);
      if (key == "integrator") traj.integrator = std::string(value);
      if (key == "fingerprint") traj.fingerprint = std::string(value);
      if (key == "dt") traj.step = parse_number(value);
      continue;
    }

    std::vector<std::string_view> fields;
    for (std::size_t a = 0;;) {
      const std::size_t b = line.find(',', a);
      fields.push_back(line.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
      if (b == std::string_view::npos) break;
      a = b + 1;
    }

    if (!have_header) {
      // 1 + n + n(n+1)/2 columns.
      const auto cols = static_cast<Index>(fields.size());
      for (Index n = 0; n <= cols; ++n)
        if (1 + n + n * (n + 1) / 2 == cols) dim = n;
      if (trajectory_header(dim) != line)
        throw ParseError("trajectory line " + std::to_string(line_no) + ": unrecognized header");
      have_header = true;
      traj.dimension = dim;
      continue;
    }

    if (static_cast<Index>(fields.size()) != 1 + dim + dim * (dim + 1) / 2)
      throw ParseError("trajectory line " + std::to_string(line_no) + ": wrong column count");
    std::size_t f = 0;
    const double t = parse_number(fields[f++]);
    VectorXd mean(dim);
    for (Index i = 0; i < dim; ++i) mean(i) = parse_number(fields[f++]);
    MatrixXd cov(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = i; j < dim; ++j) cov(i, j) = cov(j, i) = parse_number(fields[f++]);
    traj.push_back(GaussianMomentState(t, std::move(mean), cov));
  }
  if (!have_header) throw ParseError("trajectory file has no header row");
  return traj;
}

inline Trajectory load_trajectory(const std::string& path) {
  return parse_trajectory(read_file(path));
}

}  // namespace linqs
