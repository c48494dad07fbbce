#include <algorithm>
#include <bit>
#include <cstring>
#include <functional>
#include <nlohmann/json.hpp>
#include <numeric>

#include "fedreverse/error.hpp"
#include "fedreverse/key_file.hpp"
#include "fedreverse/model_io.hpp"

namespace fedreverse {

using nlohmann::json;

namespace {

template <typename UInt>
UInt load_le(const std::uint8_t* p) {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(p[i]) << (8 * i);
  return v;
}

template <typename UInt>
void store_le(std::uint8_t* p, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const std::vector<std::size_t>& shape, const std::string& name) {
  if (shape.empty() ||
      std::any_of(shape.begin(), shape.end(), [](std::size_t d) { return d == 0; })) {
    throw Error(ErrorKind::kInconsistent,
                "tensor " + name + ": shape must be a non-empty list of positive dims");
  }
}

}  // namespace

std::size_t dtype_size(DType dtype) { return dtype == DType::kF32 ? 4 : 8; }

std::string_view to_string(DType dtype) { return dtype == DType::kF32 ? "f32" : "f64"; }

DType parse_dtype(std::string_view name) {
  if (name == "f32") return DType::kF32;
  if (name == "f64") return DType::kF64;
  throw Error(ErrorKind::kFormat, "unknown dtype '" + std::string(name) + "'");
}

Tensor Tensor::from_values(std::string name, DType dtype, std::vector<std::size_t> shape,
                           std::span<const double> values) {
  check_shape(shape, name);
  if (shape_product(shape) != values.size()) {
    throw Error(ErrorKind::kInconsistent, "tensor " + name + ": shape does not match data");
  }
  Tensor t;
  t.name = std::move(name);
  t.dtype = dtype;
  t.shape = std::move(shape);
  t.bytes.resize(values.size() * dtype_size(dtype));
  for (std::size_t i = 0; i < values.size(); ++i) t.set(i, values[i]);
  return t;
}

std::size_t Tensor::element_count() const { return bytes.size() / dtype_size(dtype); }

double Tensor::get(std::size_t index) const {
  if (index >= element_count()) throw Error(ErrorKind::kIndexRange, "tensor index out of range");
  const std::uint8_t* p = bytes.data() + index * dtype_size(dtype);
  if (dtype == DType::kF32) return std::bit_cast<float>(load_le<std::uint32_t>(p));
  return std::bit_cast<double>(load_le<std::uint64_t>(p));
}

void Tensor::set(std::size_t index, double value) {
  if (index >= element_count()) throw Error(ErrorKind::kIndexRange, "tensor index out of range");
  std::uint8_t* p = bytes.data() + index * dtype_size(dtype);
  if (dtype == DType::kF32) {
    store_le(p, std::bit_cast<std::uint32_t>(static_cast<float>(value)));
  } else {
    store_le(p, std::bit_cast<std::uint64_t>(value));
  }
}

std::vector<double> Tensor::values() const {
  std::vector<double> out(element_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = get(i);
  return out;
}

void WeightContainer::add(Tensor tensor) {
  if (find(tensor.name) != nullptr) {
    throw Error(ErrorKind::kInconsistent, "duplicate tensor name " + tensor.name);
  }
  check_shape(tensor.shape, tensor.name);
  if (shape_product(tensor.shape) * dtype_size(tensor.dtype) != tensor.bytes.size()) {
    throw Error(ErrorKind::kInconsistent, "tensor " + tensor.name + ": byte length != shape");
  }
  tensors_.push_back(std::move(tensor));
}

const Tensor* WeightContainer::find(std::string_view name) const {
  for (const Tensor& t : tensors_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const Tensor& WeightContainer::at(std::string_view name) const {
  const Tensor* t = find(name);
  if (t == nullptr) throw Error(ErrorKind::kUnknownTensor, "no tensor named " + std::string(name));
  return *t;
}

Tensor& WeightContainer::at(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).at(name));
}

std::string serialize_container(const WeightContainer& container) {
  json entries = json::array();
  std::size_t offset = 0;
  for (const Tensor& t : container.tensors()) {
    entries.push_back({{"name", t.name},
                       {"dtype", to_string(t.dtype)},
                       {"shape", t.shape},
                       {"byte_offset", offset},
                       {"byte_length", t.bytes.size()}});
    offset += t.bytes.size();
  }
  const std::string manifest = json{{"tensors", entries}}.dump();

  std::string out(kContainerMagic);
  std::uint8_t len[8];
  store_le<std::uint64_t>(len, manifest.size());
  out.append(reinterpret_cast<const char*>(len), 8);
  out += manifest;
  for (const Tensor& t : container.tensors()) {
    out.append(reinterpret_cast<const char*>(t.bytes.data()), t.bytes.size());
  }
  return out;
}

WeightContainer parse_container(std::string_view bytes) {
  const std::size_t magic_len = kContainerMagic.size();
  if (bytes.substr(0, magic_len) != kContainerMagic.substr(0, std::min(magic_len, bytes.size()))) {
    throw Error(ErrorKind::kBadMagic, "not an FRWC1 container (bad magic)");
  }
  if (bytes.size() < magic_len + 8) throw Error(ErrorKind::kTruncated, "container header truncated");
  const auto manifest_len = load_le<std::uint64_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data() + magic_len));
  const std::size_t data_start = magic_len + 8;
  if (manifest_len > bytes.size() - data_start) {
    throw Error(ErrorKind::kTruncated, "container manifest truncated");
  }
  const std::string_view manifest = bytes.substr(data_start, manifest_len);
  const std::string_view data = bytes.substr(data_start + manifest_len);

  json doc;
  try {
    doc = json::parse(manifest);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInconsistent, std::string("container manifest is not JSON: ") + e.what());
  }

  WeightContainer out;
  std::size_t expected_offset = 0;
  try {
    for (const json& entry : doc.at("tensors")) {
      Tensor t;
      t.name = entry.at("name").get<std::string>();
      t.dtype = parse_dtype(entry.at("dtype").get<std::string>());
      t.shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("byte_offset").get<std::size_t>();
      const auto length = entry.at("byte_length").get<std::size_t>();
      check_shape(t.shape, t.name);
      if (length != shape_product(t.shape) * dtype_size(t.dtype)) {
        throw Error(ErrorKind::kInconsistent,
                    "tensor " + t.name + ": byte_length does not match shape and dtype");
      }
      if (offset != expected_offset) {
        throw Error(ErrorKind::kInconsistent, "tensor " + t.name + ": unexpected byte_offset");
      }
      if (offset + length > data.size()) {
        throw Error(ErrorKind::kTruncated, "tensor " + t.name + ": data truncated");
      }
      t.bytes.assign(reinterpret_cast<const std::uint8_t*>(data.data() + offset),
                     reinterpret_cast<const std::uint8_t*>(data.data() + offset + length));
      expected_offset = offset + length;
      out.add(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInconsistent, std::string("malformed container manifest: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kFormat) throw Error(ErrorKind::kInconsistent, e.what());
    throw;
  }
  if (expected_offset != data.size()) {
    throw Error(ErrorKind::kInconsistent, "container has trailing data after the last tensor");
  }
  return out;
}

WeightContainer read_container(const std::filesystem::path& path) {
  return parse_container(read_file_bytes(path));
}

void write_container(const std::filesystem::path& path, const WeightContainer& container) {
  write_file_bytes(path, serialize_container(container));
}

Tensor import_raw(std::string_view bytes, std::string name, DType dtype,
                  std::vector<std::size_t> shape) {
  check_shape(shape, name);
  if (bytes.size() != shape_product(shape) * dtype_size(dtype)) {
    throw Error(ErrorKind::kInconsistent,
                "raw file holds " + std::to_string(bytes.size()) + " bytes, shape needs " +
                    std::to_string(shape_product(shape) * dtype_size(dtype)));
  }
  Tensor t;
  t.name = std::move(name);
  t.dtype = dtype;
  t.shape = std::move(shape);
  t.bytes.assign(bytes.begin(), bytes.end());
  return t;
}

}  // namespace fedreverse
