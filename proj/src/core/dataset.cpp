#include "pnn/core/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "pnn/core/error.hpp"

namespace pnn {

Matrix Dataset::features() const {
  Matrix x(static_cast<Eigen::Index>(samples.size()), dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = samples[i].features.transpose();
  }
  return x;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

Dataset Dataset::head(std::size_t n) const {
  Dataset out{.samples = {}, .n_classes = n_classes, .dim = dim, .split = split};
  const auto count = std::min(n, samples.size());
  out.samples.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

void Dataset::validate() const {
  if (n_classes < 1) throw ConsistencyError("dataset declares no classes");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.features.size() != dim) {
      throw ConsistencyError("sample " + std::to_string(i) + " has dimension " +
                             std::to_string(s.features.size()) + ", expected " +
                             std::to_string(dim));
    }
    if (s.label < 0 || s.label >= n_classes) {
      throw ConsistencyError("sample " + std::to_string(i) + " has label " +
                             std::to_string(s.label) + " outside [0," +
                             std::to_string(n_classes) + ")");
    }
    if (!s.features.allFinite() || s.features.minCoeff() < 0.0 || s.features.maxCoeff() > 1.0) {
      throw ConsistencyError("sample " + std::to_string(i) + " has features outside [0,1]");
    }
  }
}

void save_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "dim,n_classes\n" << data.dim << ',' << data.n_classes << '\n';
  out << std::setprecision(17);
  for (const auto& s : data.samples) {
    for (Eigen::Index j = 0; j < s.features.size(); ++j) out << s.features[j] << ',';
    out << s.label << '\n';
  }
}

Dataset load_dataset_csv(const std::filesystem::path& path, Split split) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "dim,n_classes") {
    throw FormatError(path.string() + ": missing 'dim,n_classes' header");
  }
  Dataset data;
  data.split = split;
  char comma = 0;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing shape line");
  std::istringstream shape(line);
  if (!(shape >> data.dim >> comma >> data.n_classes) || comma != ',') {
    throw FormatError(path.string() + ": malformed shape line");
  }
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != static_cast<std::size_t>(data.dim) + 1) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(data.dim + 1) + " fields");
    }
    Sample s;
    s.features = Eigen::Map<const Vector>(values.data(), data.dim);
    s.label = static_cast<int>(values.back());
    data.samples.push_back(std::move(s));
  }
  data.validate();
  return data;
}

}  // namespace pnn
