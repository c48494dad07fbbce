#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "fedreverse/crypto.hpp"
#include "fedreverse/error.hpp"
#include "fedreverse/model_io.hpp"

namespace fedreverse {

CoverSelection select_cover(const WeightContainer& container, const SelectionSpec& spec) {
  const Tensor& tensor = container.at(spec.tensor_name);
  const std::size_t n = tensor.element_count();
  if (spec.count == 0 || spec.count > n) {
    throw Error(ErrorKind::kParameter,
                "selection count " + std::to_string(spec.count) + " outside [1, " +
                    std::to_string(n) + "] for tensor " + spec.tensor_name);
  }
  CoverSelection out;
  if (spec.permute) {
    ChaChaStream stream(spec.location_seed);
    out.indices = shuffled_prefix(stream, n, spec.count);
  } else {
    out.indices.resize(spec.count);
    std::iota(out.indices.begin(), out.indices.end(), std::size_t{0});
  }
  out.values.reserve(spec.count);
  for (std::size_t idx : out.indices) out.values.push_back(tensor.get(idx));
  return out;
}

WeightContainer write_back(const WeightContainer& container, std::string_view tensor_name,
                           std::span<const std::size_t> indices,
                           std::span<const double> values) {
  if (indices.size() != values.size()) {
    throw Error(ErrorKind::kLengthMismatch, "write_back needs one value per index");
  }
  WeightContainer out = container;
  Tensor& tensor = out.at(tensor_name);
  for (std::size_t i = 0; i < indices.size(); ++i) tensor.set(indices[i], values[i]);
  return out;
}

double Histogram::bin_left(std::size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(counts.size());
}

double Histogram::bin_right(std::size_t i) const {
  return i + 1 == counts.size() ? hi : bin_left(i + 1);
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Histogram histogram(std::span<const double> values, std::size_t num_bins,
                    std::optional<std::pair<double, double>> range) {
  if (num_bins == 0) throw Error(ErrorKind::kParameter, "histogram needs at least one bin");
  if (values.empty()) throw Error(ErrorKind::kParameter, "histogram of empty input");
  Histogram h;
  if (range) {
    if (!(range->first <= range->second)) {
      throw Error(ErrorKind::kParameter, "histogram range is reversed");
    }
    h.lo = range->first;
    h.hi = range->second;
  } else {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    h.lo = *mn;
    h.hi = *mx;
  }
  h.counts.assign(num_bins, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(num_bins);
  for (double v : values) {
    if (!(v >= h.lo && v <= h.hi)) continue;
    std::size_t bin = 0;
    if (width > 0.0) {
      bin = static_cast<std::size_t>(std::floor((v - h.lo) / width));
      bin = std::min(bin, num_bins - 1);
    }
    ++h.counts[bin];
  }
  return h;
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  std::ostringstream line;
  line << std::setprecision(17);
  os << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    line.str("");
    line << h.bin_left(i) << ',' << h.bin_right(i) << ',' << h.counts[i];
    os << line.str() << '\n';
  }
}

}  // namespace fedreverse
