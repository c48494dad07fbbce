#include <algorithm>
#include <nlohmann/json.hpp>

#include "fedreverse/crypto.hpp"
#include "fedreverse/error.hpp"
#include "fedreverse/key_file.hpp"
#include "fedreverse/model_io.hpp"

namespace fedreverse {

using nlohmann::json;

void PlanManifest::validate() const {
  if (dimension == 0) throw Error(ErrorKind::kFormat, "plan dimension must be positive");
  if (dimension * num_blocks + tail_length != selection.count) {
    throw Error(ErrorKind::kFormat, "plan blocks and tail do not add up to the selection count");
  }
  if (tail_length >= dimension) {
    throw Error(ErrorKind::kFormat, "plan tail must be shorter than one block");
  }
  if (clients.size() > dimension) {
    throw Error(ErrorKind::kFormat, "plan has more clients than block dimension");
  }
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i].bit_length > num_blocks) {
      throw Error(ErrorKind::kFormat, "client " + clients[i].id + " bit length exceeds capacity");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (clients[j].id == clients[i].id) {
        throw Error(ErrorKind::kFormat, "duplicate client " + clients[i].id + " in plan");
      }
    }
  }
}

EmbeddingPlan PlanManifest::embedding_plan() const {
  EmbeddingPlan plan;
  plan.dimension = dimension;
  plan.num_blocks = num_blocks;
  for (const ClientBits& c : clients) plan.client_order.push_back(c.id);
  return plan;
}

const PlanManifest::ClientBits* PlanManifest::find(std::string_view client_id) const {
  auto it = std::find_if(clients.begin(), clients.end(),
                         [&](const ClientBits& c) { return c.id == client_id; });
  return it == clients.end() ? nullptr : &*it;
}

std::string serialize_plan(const PlanManifest& plan) {
  plan.validate();
  json clients = json::array();
  for (const auto& c : plan.clients) clients.push_back({{"id", c.id}, {"bit_length", c.bit_length}});
  json doc = {
      {"format", kPlanFormat},
      {"selection",
       {{"tensor", plan.selection.tensor_name},
        {"count", plan.selection.count},
        {"permute", plan.selection.permute},
        {"location_seed", to_hex(plan.selection.location_seed)}}},
      {"dimension", plan.dimension},
      {"num_blocks", plan.num_blocks},
      {"tail_length", plan.tail_length},
      {"clients", clients},
      {"key_file_sha256", plan.key_file_sha256},
  };
  return doc.dump(2) + "\n";
}

PlanManifest parse_plan(std::string_view text) {
  PlanManifest plan;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kPlanFormat) {
      throw Error(ErrorKind::kFormat, "unsupported plan format");
    }
    const json& sel = doc.at("selection");
    plan.selection.tensor_name = sel.at("tensor").get<std::string>();
    plan.selection.count = sel.at("count").get<std::size_t>();
    plan.selection.permute = sel.at("permute").get<bool>();
    const auto seed = from_hex(sel.at("location_seed").get<std::string>());
    if (seed.size() != plan.selection.location_seed.size()) {
      throw Error(ErrorKind::kFormat, "location_seed must be 32 bytes");
    }
    std::copy(seed.begin(), seed.end(), plan.selection.location_seed.begin());
    plan.dimension = doc.at("dimension").get<std::size_t>();
    plan.num_blocks = doc.at("num_blocks").get<std::size_t>();
    plan.tail_length = doc.at("tail_length").get<std::size_t>();
    for (const json& c : doc.at("clients")) {
      plan.clients.push_back({c.at("id").get<std::string>(), c.at("bit_length").get<std::size_t>()});
    }
    plan.key_file_sha256 = doc.at("key_file_sha256").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed plan manifest: ") + e.what());
  }
  plan.validate();
  return plan;
}

PlanManifest read_plan(const std::filesystem::path& path) {
  return parse_plan(read_file_bytes(path));
}

void write_plan(const std::filesystem::path& path, const PlanManifest& plan) {
  write_file_bytes(path, serialize_plan(plan));
}

}  // namespace fedreverse
