#include "cmio/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cmio {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::treatment: return "treatment";
    case Role::outcome: return "outcome";
    case Role::covariate: return "covariate";
  }
  return "covariate";
}

Dataset::Dataset(std::vector<Column> columns, Eigen::MatrixXd values)
    : columns_(std::move(columns)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.cols()) != columns_.size())
    throw std::invalid_argument("dataset: column count does not match value matrix");
  std::size_t n_treat = 0;
  std::size_t n_out = 0;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i)
      if (columns_[i].name == columns_[j].name)
        throw std::invalid_argument("dataset: duplicate column " + columns_[j].name);
    switch (columns_[j].role) {
      case Role::treatment: treatment_ = j; ++n_treat; break;
      case Role::outcome: outcome_ = j; ++n_out; break;
      case Role::covariate: covariates_.push_back(j); break;
    }
  }
  if (n_treat != 1 || n_out != 1)
    throw std::invalid_argument("dataset needs exactly one treatment and one outcome column");
  if (!values_.allFinite()) throw std::invalid_argument("dataset contains non-finite values");
}

std::size_t Dataset::index_of(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (columns_[j].name == name) return j;
  throw std::invalid_argument("unknown column: " + std::string(name));
}

bool Dataset::contains(std::string_view name) const {
  for (const auto& c : columns_)
    if (c.name == name) return true;
  return false;
}

std::vector<std::string> Dataset::covariate_names() const {
  std::vector<std::string> out;
  out.reserve(covariates_.size());
  for (std::size_t j : covariates_) out.push_back(columns_[j].name);
  return out;
}

Dataset Dataset::with_roles(std::string_view treatment, std::string_view outcome) const {
  const std::size_t t = index_of(treatment);
  const std::size_t o = index_of(outcome);
  if (t == o) throw std::invalid_argument("treatment and outcome must be different columns");
  auto cols = columns_;
  for (std::size_t j = 0; j < cols.size(); ++j)
    cols[j].role = j == t ? Role::treatment : (j == o ? Role::outcome : Role::covariate);
  return Dataset(std::move(cols), values_);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const Dataset& d) {
  for (std::size_t j = 0; j < d.cols(); ++j) {
    if (j) out << ',';
    out << d.name(j) << ':' << to_string(d.columns()[j].role);
  }
  out << '\n';
  const auto& v = d.values();
  std::string line;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (j) line += ',';
      line += format_double(v(i, j));
    }
    line += '\n';
    out << line;
  }
}

void write_csv_file(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, d);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    out.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

Dataset read_csv(std::istream& in, std::optional<std::string> treatment,
                 std::optional<std::string> outcome) {
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("csv: empty input");
  std::vector<Column> columns;
  for (auto& cell : split(header, ',')) {
    Column c;
    if (auto colon = cell.rfind(':'); colon != std::string::npos) {
      const std::string role = cell.substr(colon + 1);
      c.name = cell.substr(0, colon);
      if (role == "treatment") c.role = Role::treatment;
      else if (role == "outcome") c.role = Role::outcome;
      else if (role == "covariate") c.role = Role::covariate;
      else throw std::invalid_argument("csv: unknown role '" + role + "' in header");
    } else {
      c.name = cell;
    }
    if (c.name.empty()) throw std::invalid_argument("csv: empty column name in header");
    columns.push_back(std::move(c));
  }

  std::vector<double> flat;
  std::string line;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    if (cells.size() != columns.size())
      throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(columns.size()) + " fields");
    for (const auto& cell : cells) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw std::invalid_argument("csv line " + std::to_string(line_no) + ": bad number '" +
                                    cell + "'");
      flat.push_back(v);
    }
    ++rows;
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < columns.size(); ++j)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * columns.size() + j];

  if (treatment || outcome) {
    auto find = [&](const std::string& name, Role role) -> std::string {
      for (const auto& c : columns)
        if (c.name == name) return name;
      throw std::invalid_argument("unknown column: " + name + " (" + std::string(to_string(role)) + ")");
    };
    std::string t, o;
    for (const auto& c : columns) {
      if (c.role == Role::treatment) t = c.name;
      if (c.role == Role::outcome) o = c.name;
    }
    if (treatment) t = find(*treatment, Role::treatment);
    if (outcome) o = find(*outcome, Role::outcome);
    for (auto& c : columns) c.role = Role::covariate;
    for (auto& c : columns) {
      if (c.name == t) c.role = Role::treatment;
      else if (c.name == o) c.role = Role::outcome;
    }
  }
  return Dataset(std::move(columns), std::move(values));
}

Dataset read_csv_file(const std::string& path, std::optional<std::string> treatment,
                      std::optional<std::string> outcome) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return read_csv(in, std::move(treatment), std::move(outcome));
}

}  // namespace cmio
