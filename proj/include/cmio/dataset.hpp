#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cmio {

enum class Role { treatment, outcome, covariate };

std::string_view to_string(Role r);

struct Column {
  std::string name;
  Role role = Role::covariate;
};

/// n x m table of observations with exactly one treatment and one outcome
/// column. Values are finite; latent variables never appear here.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Column> columns, Eigen::MatrixXd values);

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return columns_.size(); }

  const std::vector<Column>& columns() const { return columns_; }
  const Eigen::MatrixXd& values() const { return values_; }
  auto column(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }

  /// Throws std::invalid_argument for unknown names.
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::string& name(std::size_t j) const { return columns_.at(j).name; }

  std::size_t treatment() const { return treatment_; }
  std::size_t outcome() const { return outcome_; }
  /// Covariate column indices in column order.
  const std::vector<std::size_t>& covariates() const { return covariates_; }
  std::vector<std::string> covariate_names() const;

  /// Same values with treatment/outcome roles reassigned; every other
  /// column becomes a covariate.
  Dataset with_roles(std::string_view treatment, std::string_view outcome) const;

 private:
  std::vector<Column> columns_;
  Eigen::MatrixXd values_;
  std::size_t treatment_ = 0;
  std::size_t outcome_ = 0;
  std::vector<std::size_t> covariates_;
};

/// CSV with a single header line of `name:role` cells (role is one of
/// treatment, outcome, covariate). Values are written with 17 significant
/// digits so a write/read cycle is exact.
void write_csv(std::ostream& out, const Dataset& d);
void write_csv_file(const std::string& path, const Dataset& d);

/// Reads the format above. Bare `name` cells are covariates; `treatment`
/// and `outcome`, when given, override whatever the header says.
Dataset read_csv(std::istream& in, std::optional<std::string> treatment = std::nullopt,
                 std::optional<std::string> outcome = std::nullopt);
Dataset read_csv_file(const std::string& path, std::optional<std::string> treatment = std::nullopt,
                      std::optional<std::string> outcome = std::nullopt);

/// Shortest round-trip representation used by every text writer.
std::string format_double(double v);

}  // namespace cmio
