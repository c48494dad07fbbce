#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fedreverse/keygen.hpp"

namespace fedreverse {

inline constexpr std::string_view kKeyFileFormat = "fedreverse-keys/1";

/// On-disk key set ("fedreverse-keys/1"). A client's quota is the number of
/// partial vectors it holds.
struct KeyFile {
  std::size_t dimension = 0;
  int bits_per_entry = 0;
  std::uint64_t entry_range = 0;
  std::vector<ClientKey> clients;

  const ClientKey* find(std::string_view client_id) const;
};

/// Canonical JSON text: sorted keys, two-space indent, shortest round-trip
/// decimal for every double, trailing newline.
std::string serialize_key_file(const KeyFile& keys);
KeyFile parse_key_file(std::string_view text);

void write_key_file(const std::filesystem::path& path, const KeyFile& keys);
KeyFile read_key_file(const std::filesystem::path& path);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace fedreverse
