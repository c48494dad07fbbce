#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedreverse/multiparty.hpp"

namespace fedreverse {

enum class DType { kF32, kF64 };

std::size_t dtype_size(DType dtype);
std::string_view to_string(DType dtype);
DType parse_dtype(std::string_view name);

/// Row-major tensor stored as little-endian bytes.
struct Tensor {
  std::string name;
  DType dtype = DType::kF64;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> bytes;

  static Tensor from_values(std::string name, DType dtype, std::vector<std::size_t> shape,
                            std::span<const double> values);

  std::size_t element_count() const;
  double get(std::size_t index) const;
  /// Casts to dtype; f32 rounds to nearest even.
  void set(std::size_t index, double value);
  std::vector<double> values() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Named tensors in insertion order (the FRWC1 file order).
class WeightContainer {
 public:
  void add(Tensor tensor);
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor* find(std::string_view name) const;
  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::vector<Tensor>& tensors() { return tensors_; }

  friend bool operator==(const WeightContainer&, const WeightContainer&) = default;

 private:
  std::vector<Tensor> tensors_;
};

inline constexpr std::string_view kContainerMagic = "FRWC1\n";

/// FRWC1: magic, 8-byte little-endian manifest length, canonical JSON
/// manifest {"tensors":[{byte_length, byte_offset, dtype, name, shape}]},
/// then the tensors' raw bytes back to back.
std::string serialize_container(const WeightContainer& container);
WeightContainer parse_container(std::string_view bytes);

WeightContainer read_container(const std::filesystem::path& path);
void write_container(const std::filesystem::path& path, const WeightContainer& container);

/// Wraps a raw little-endian float dump as a single tensor.
Tensor import_raw(std::string_view bytes, std::string name, DType dtype,
                  std::vector<std::size_t> shape);

struct SelectionSpec {
  std::string tensor_name;
  std::size_t count = 0;
  bool permute = false;
  std::array<std::uint8_t, 32> location_seed{};
};

struct CoverSelection {
  std::vector<double> values;
  std::vector<std::size_t> indices;
};

/// permute = false: flat indices 0..count-1. permute = true: the first count
/// entries of a ChaCha20-driven Fisher-Yates shuffle keyed by location_seed.
CoverSelection select_cover(const WeightContainer& container, const SelectionSpec& spec);

/// Copy of `container` with `values` written at `indices` of one tensor.
WeightContainer write_back(const WeightContainer& container, std::string_view tensor_name,
                           std::span<const std::size_t> indices,
                           std::span<const double> values);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  double bin_left(std::size_t i) const;
  double bin_right(std::size_t i) const;
  std::size_t total() const;
};

/// Equal-width bins over `range` (default [min, max]); bins are right-open
/// except the last, which is closed. Values outside the range are dropped.
Histogram histogram(std::span<const double> values, std::size_t num_bins,
                    std::optional<std::pair<double, double>> range = std::nullopt);

/// "bin_left,bin_right,count" rows.
void write_histogram_csv(std::ostream& os, const Histogram& h);

inline constexpr std::string_view kPlanFormat = "fedreverse-plan/1";

/// Everything needed to replay an embedding for extraction or recovery.
struct PlanManifest {
  struct ClientBits {
    std::string id;
    std::size_t bit_length = 0;
  };

  SelectionSpec selection;
  std::size_t dimension = 0;
  std::size_t num_blocks = 0;
  std::size_t tail_length = 0;
  std::vector<ClientBits> clients;
  std::string key_file_sha256;  // hex digest of the key file bytes

  void validate() const;
  EmbeddingPlan embedding_plan() const;
  const ClientBits* find(std::string_view client_id) const;
};

std::string serialize_plan(const PlanManifest& plan);
PlanManifest parse_plan(std::string_view text);
PlanManifest read_plan(const std::filesystem::path& path);
void write_plan(const std::filesystem::path& path, const PlanManifest& plan);

}  // namespace fedreverse
