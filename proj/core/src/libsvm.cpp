#include "aadmm/problems.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace aadmm {

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& detail) {
  std::ostringstream os;
  os << "libsvm: malformed line " << line << ": " << detail;
  throw std::runtime_error(os.str());
}

double parse_real(std::string_view token, std::size_t line) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    malformed(line, "bad number '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

void scale_features(Matrix& x, FeatureScaling scaling) {
  if (scaling == FeatureScaling::kNone || x.rows() == 0) return;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    auto col = x.col(j);
    if (scaling == FeatureScaling::kStandardize) {
      const double mean = col.mean();
      col.array() -= mean;
      const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(x.rows()));
      if (sd > 0.0) col /= sd;
    } else {
      const double peak = col.cwiseAbs().maxCoeff();
      if (peak > 0.0) col /= peak;
    }
  }
}

LibsvmData parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  std::vector<double> labels;
  std::vector<std::tuple<std::size_t, Eigen::Index, double>> entries;
  Eigen::Index width = options.min_features;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream tokens(raw);
    std::string token;
    if (!(tokens >> token)) continue;  // blank line
    const std::size_t row = labels.size();
    labels.push_back(parse_real(token, line_no));
    Eigen::Index last_index = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0) malformed(line_no, "expected idx:val, got '" + token + "'");
      long long index = 0;
      const std::string_view idx_text(token.data(), colon);
      const auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), index);
      if (ec != std::errc() || ptr != idx_text.data() + idx_text.size() || index < 1) {
        malformed(line_no, "bad feature index '" + std::string(idx_text) + "'");
      }
      if (index <= last_index) malformed(line_no, "feature indices must increase");
      last_index = static_cast<Eigen::Index>(index);
      const double value = parse_real(std::string_view(token).substr(colon + 1), line_no);
      entries.emplace_back(row, last_index - 1, value);
      width = std::max(width, last_index);
    }
  }
  if (labels.empty()) throw std::runtime_error("libsvm: no samples in input");

  const auto rows = static_cast<std::size_t>(labels.size());
  if (width > 0 && rows > options.max_entries / static_cast<std::size_t>(width)) {
    std::ostringstream os;
    os << "libsvm: dense size " << rows << " x " << width << " exceeds the cap of "
       << options.max_entries << " entries";
    throw std::runtime_error(os.str());
  }

  LibsvmData data;
  data.features = Matrix::Zero(static_cast<Eigen::Index>(rows), width);
  data.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Eigen::Index>(rows));
  for (const auto& [r, c, v] : entries) data.features(static_cast<Eigen::Index>(r), c) = v;
  scale_features(data.features, options.scaling);
  return data;
}

LibsvmData read_libsvm(const std::filesystem::path& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("libsvm: cannot open " + path.string());
  return parse_libsvm(in, options);
}

void write_libsvm(std::ostream& out, const LibsvmData& data) {
  require_same_size(data.features.rows(), data.labels.size(), "write_libsvm");
  char buf[40];
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", data.labels(i));
    out << buf;
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      const double v = data.features(i, j);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ' ' << (j + 1) << ':' << buf;
    }
    out << '\n';
  }
}

}  // namespace aadmm
