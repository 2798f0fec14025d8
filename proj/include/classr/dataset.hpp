#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "classr/units.hpp"

namespace classr {

// One dataset: a single observation of the phenomenon with its own
// realization-specific parameter values.
struct Realization {
  Eigen::MatrixXd X;  // n_samples x n_vars
  Eigen::VectorXd y;  // n_samples
  std::string name;

  Eigen::Index n_samples() const { return y.size(); }
  Eigen::Index n_vars() const { return X.cols(); }
};

// Ordered collection of realizations sharing one variable layout.
struct MultiDataset {
  std::vector<Realization> realizations;
  std::vector<UnitVector> var_units;  // empty => units unconstrained
  UnitVector y_units;
  bool has_units = false;

  Eigen::Index n_vars() const {
    return realizations.empty() ? 0 : realizations.front().n_vars();
  }
  Eigen::Index n_realizations() const {
    return static_cast<Eigen::Index>(realizations.size());
  }
  Eigen::Index total_samples() const {
    Eigen::Index n = 0;
    for (const auto& r : realizations) n += r.n_samples();
    return n;
  }

  // Pooled mean / population standard deviation of all targets.
  double y_mean() const;
  double y_std() const;

  // Throws std::invalid_argument on shape mismatches or non-finite entries.
  void validate() const;
};

// CSV with header "x0,x1,...,y", one file per realization; the manifest JSON
// lists realization paths and the unit declarations.
Realization load_realization_csv(const std::filesystem::path& path);
void save_realization_csv(const Realization& r, const std::filesystem::path& path);

MultiDataset load_multidataset(const std::filesystem::path& manifest_path);
void save_multidataset(const MultiDataset& data, const std::filesystem::path& manifest_path);

}  // namespace classr
