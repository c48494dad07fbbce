#include "fedreverse/key_file.hpp"

#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "fedreverse/error.hpp"

namespace fedreverse {

using nlohmann::json;

const ClientKey* KeyFile::find(std::string_view client_id) const {
  for (const auto& c : clients) {
    if (c.client_id == client_id) return &c;
  }
  return nullptr;
}

std::string serialize_key_file(const KeyFile& keys) {
  json clients = json::array();
  for (const ClientKey& c : keys.clients) {
    clients.push_back({
        {"id", c.client_id},
        {"quota", c.partial_vectors.size()},
        {"partial_vectors", c.partial_vectors},
        {"active_vector", c.active_vector},
        {"delta", c.dc.delta},
        {"alpha", c.dc.alpha},
        {"bits", c.dc.bits},
        {"dither", c.dc.dither},
    });
  }
  json doc = {
      {"format", kKeyFileFormat},
      {"r", keys.dimension},
      {"B", keys.bits_per_entry},
      {"q", keys.entry_range},
      {"clients", clients},
  };
  return doc.dump(2) + "\n";
}

KeyFile parse_key_file(std::string_view text) {
  KeyFile out;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kKeyFileFormat) {
      throw Error(ErrorKind::kFormat, "unsupported key file format");
    }
    out.dimension = doc.at("r").get<std::size_t>();
    out.bits_per_entry = doc.at("B").get<int>();
    out.entry_range = doc.at("q").get<std::uint64_t>();
    for (const json& c : doc.at("clients")) {
      ClientKey key;
      key.client_id = c.at("id").get<std::string>();
      key.partial_vectors = c.at("partial_vectors").get<std::vector<Vector>>();
      key.active_vector = c.at("active_vector").get<Vector>();
      key.dc.delta = c.at("delta").get<double>();
      key.dc.alpha = c.at("alpha").get<double>();
      key.dc.bits = c.at("bits").get<int>();
      key.dc.dither = c.at("dither").get<double>();
      if (c.at("quota").get<std::size_t>() != key.partial_vectors.size()) {
        throw Error(ErrorKind::kFormat,
                    "client " + key.client_id + ": quota disagrees with partial vectors");
      }
      out.clients.push_back(std::move(key));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed key file: ") + e.what());
  }

  for (std::size_t i = 0; i < out.clients.size(); ++i) {
    const ClientKey& key = out.clients[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (out.clients[j].client_id == key.client_id) {
        throw Error(ErrorKind::kFormat, "duplicate client id " + key.client_id);
      }
    }
    if (!key.dc.valid()) {
      throw Error(ErrorKind::kFormat, "client " + key.client_id + " has invalid DcParams");
    }
    for (const Vector& v : key.partial_vectors) {
      if (v.size() != out.dimension) {
        throw Error(ErrorKind::kFormat, "client " + key.client_id + ": vector length != r");
      }
    }
    if (!key.active_vector.empty() && key.active_vector.size() != out.dimension) {
      throw Error(ErrorKind::kFormat, "client " + key.client_id + ": active vector length != r");
    }
  }
  try {
    check_key_family(out.clients);
  } catch (const Error& e) {
    throw Error(ErrorKind::kKey, std::string("key file: ") + e.what());
  }
  return out;
}

void write_key_file(const std::filesystem::path& path, const KeyFile& keys) {
  write_file_bytes(path, serialize_key_file(keys));
}

KeyFile read_key_file(const std::filesystem::path& path) {
  return parse_key_file(read_file_bytes(path));
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

}  // namespace fedreverse
