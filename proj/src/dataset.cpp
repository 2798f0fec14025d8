#include "classr/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "classr/json_util.hpp"

namespace classr {

using nlohmann::json;

double MultiDataset::y_mean() const {
  double sum = 0.0;
  Eigen::Index n = 0;
  for (const auto& r : realizations) {
    sum += r.y.sum();
    n += r.n_samples();
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

double MultiDataset::y_std() const {
  const double mean = y_mean();
  double ss = 0.0;
  Eigen::Index n = 0;
  for (const auto& r : realizations) {
    ss += (r.y.array() - mean).square().sum();
    n += r.n_samples();
  }
  return n > 0 ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
}

void MultiDataset::validate() const {
  if (realizations.empty())
    throw std::invalid_argument("dataset has no realizations");
  const Eigen::Index nv = realizations.front().n_vars();
  for (const auto& r : realizations) {
    if (r.X.rows() != r.y.size())
      throw std::invalid_argument("realization '" + r.name +
                                  "': X rows != y length");
    if (r.n_vars() != nv)
      throw std::invalid_argument("realization '" + r.name +
                                  "': inconsistent variable count");
    if (!r.X.allFinite() || !r.y.allFinite())
      throw std::invalid_argument("realization '" + r.name +
                                  "': non-finite entries");
  }
  if (!var_units.empty() && static_cast<Eigen::Index>(var_units.size()) != nv)
    throw std::invalid_argument("var_units length != variable count");
}

// ---------------------------------------------------------------------------

Realization load_realization_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty CSV " + path.string());

  int n_cols = 1;
  for (char c : line)
    if (c == ',') ++n_cols;
  if (n_cols < 2)
    throw std::runtime_error("CSV needs at least x0 and y columns: " + path.string());
  const int n_vars = n_cols - 1;

  std::vector<double> values;
  Eigen::Index n_rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++col;
    }
    if (col != n_cols)
      throw std::runtime_error("ragged CSV row in " + path.string());
    ++n_rows;
  }

  Realization r;
  r.name = path.stem().string();
  r.X.resize(n_rows, n_vars);
  r.y.resize(n_rows);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    for (int j = 0; j < n_vars; ++j)
      r.X(i, j) = values[static_cast<size_t>(i * n_cols + j)];
    r.y(i) = values[static_cast<size_t>(i * n_cols + n_vars)];
  }
  return r;
}

void save_realization_csv(const Realization& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV " + path.string());
  for (int j = 0; j < r.n_vars(); ++j) out << "x" << j << ",";
  out << "y\n";
  char buf[40];
  for (Eigen::Index i = 0; i < r.n_samples(); ++i) {
    for (int j = 0; j < r.n_vars(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", r.X(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", r.y(i));
    out << buf << "\n";
  }
}

namespace {

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(s));
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  }
  throw std::runtime_error("unit exponent must be an integer or a 'p/q' string");
}

json rational_to_json(const Rational& r) {
  if (r.den == 1) return json(r.num);
  return json(r.str());
}

}  // namespace

UnitVector unit_vector_from_json(const json& j) {
  if (!j.is_array() || j.size() != UnitVector::kDims)
    throw std::runtime_error("unit vector must be an array of 7 exponents");
  std::vector<Rational> exps;
  for (const auto& e : j) exps.push_back(rational_from_json(e));
  return UnitVector::from_exponents(exps);
}

json unit_vector_to_json(const UnitVector& u) {
  json j = json::array();
  for (int i = 0; i < UnitVector::kDims; ++i) j.push_back(rational_to_json(u[i]));
  return j;
}

MultiDataset load_multidataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("manifest " + manifest_path.string() + ": " + e.what());
  }

  MultiDataset data;
  const auto base = manifest_path.parent_path();
  if (!j.contains("realizations") || !j["realizations"].is_array() ||
      j["realizations"].empty())
    throw std::runtime_error("manifest needs a non-empty 'realizations' array");
  for (const auto& rj : j["realizations"]) {
    const std::string rel = rj.is_string() ? rj.get<std::string>()
                                           : rj.at("path").get<std::string>();
    Realization r = load_realization_csv(base / rel);
    if (rj.is_object() && rj.contains("name")) r.name = rj["name"].get<std::string>();
    data.realizations.push_back(std::move(r));
  }
  if (j.contains("var_units")) {
    for (const auto& u : j["var_units"])
      data.var_units.push_back(unit_vector_from_json(u));
    data.has_units = true;
  }
  if (j.contains("y_units")) {
    data.y_units = unit_vector_from_json(j["y_units"]);
    data.has_units = true;
  }
  data.validate();
  return data;
}

void save_multidataset(const MultiDataset& data, const std::filesystem::path& manifest_path) {
  const auto base = manifest_path.parent_path();
  std::filesystem::create_directories(base);
  json j;
  j["realizations"] = json::array();
  int idx = 0;
  for (const auto& r : data.realizations) {
    const std::string fname =
        (r.name.empty() ? "realization_" + std::to_string(idx) : r.name) + ".csv";
    save_realization_csv(r, base / fname);
    j["realizations"].push_back({{"name", r.name}, {"path", fname}});
    ++idx;
  }
  if (data.has_units) {
    j["var_units"] = json::array();
    for (const auto& u : data.var_units) j["var_units"].push_back(unit_vector_to_json(u));
    j["y_units"] = unit_vector_to_json(data.y_units);
  }
  std::ofstream out(manifest_path);
  out << j.dump(2) << "\n";
}

}  // namespace classr
