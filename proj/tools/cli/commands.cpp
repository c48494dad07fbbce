#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "fedreverse/crypto.hpp"
#include "fedreverse/error.hpp"
#include "fedreverse/key_file.hpp"
#include "fedreverse/keygen.hpp"
#include "fedreverse/metrics.hpp"
#include "fedreverse/model_io.hpp"
#include "fedreverse/multiparty.hpp"

namespace fedreverse::cli {

namespace {

/// Raised for inputs that are well-formed files but bad invocations.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParameter:
    case ErrorKind::kCapacity:
    case ErrorKind::kUnsupported:
      return kUsage;
    default:
      return kDataError;
  }
}

template <typename T>
std::vector<T> broadcast(const std::vector<T>& values, std::size_t n, const char* flag) {
  if (values.size() == n) return values;
  if (values.size() == 1) return std::vector<T>(n, values.front());
  throw UsageError(std::string(flag) + " takes one value or one per client");
}

std::string bytes_of(std::span<const std::uint8_t> b) {
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

std::vector<std::uint8_t> as_bytes(std::string_view s) {
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

/// "id=hex" or "id=@path".
Payload parse_payload_arg(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("payload '" + arg + "' must look like id=hexbytes or id=@path");
  }
  const std::string id = arg.substr(0, eq);
  const std::string value = arg.substr(eq + 1);
  if (!value.empty() && value.front() == '@') {
    return Payload::from_bytes(id, as_bytes(read_file_bytes(value.substr(1))));
  }
  try {
    return Payload::from_bytes(id, from_hex(value));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::array<std::uint8_t, 32> parse_seed32(const std::string& hex) {
  std::array<std::uint8_t, 32> seed{};
  if (hex.empty()) return seed;
  std::vector<std::uint8_t> bytes;
  try {
    bytes = from_hex(hex);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (bytes.size() != seed.size()) throw UsageError("--location-seed must be 64 hex digits");
  std::copy(bytes.begin(), bytes.end(), seed.begin());
  return seed;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

// ---------------------------------------------------------------- keygen

struct KeygenOptions {
  std::size_t r = 0;
  std::string clients;
  int bits_per_entry = 2;
  std::uint64_t q = 32768;
  std::vector<double> delta{0.1};
  std::vector<double> alpha{0.9};
  int bits = 1;
  std::vector<std::string> contrib_files;
  std::string key_int;
  std::vector<double> dither;
  std::vector<std::string> coefs;
  std::string out;
};

std::vector<double> default_coefficients(const BigUint& key_int, const std::string& id,
                                         std::size_t count) {
  std::vector<std::uint8_t> material = as_bytes("fedreverse-coef");
  const auto key_bytes = to_big_endian(key_int);
  material.insert(material.end(), key_bytes.begin(), key_bytes.end());
  material.insert(material.end(), id.begin(), id.end());
  ChaChaStream stream(sha256(material));
  std::vector<double> coefs(count);
  for (double& c : coefs) c = static_cast<double>(1 + stream.next_below(32));
  return coefs;
}

int cmd_keygen(const KeygenOptions& opt, std::ostream& out) {
  KeygenConfig cfg;
  cfg.bits_per_entry = opt.bits_per_entry;
  cfg.dimension = opt.r;
  cfg.entry_range = opt.q;
  cfg.client_quotas = parse_size_list(opt.clients, "--clients");
  const std::size_t n = cfg.client_quotas.size();

  if (!opt.key_int.empty()) {
    try {
      cfg.key_int = BigUint(opt.key_int);
    } catch (const std::exception&) {
      throw UsageError("--key-int must be a non-negative decimal integer");
    }
    if (cfg.key_int < 0) throw UsageError("--key-int must be non-negative");
  } else {
    if (opt.contrib_files.empty()) throw UsageError("keygen needs --contrib files or --key-int");
    std::vector<std::vector<std::uint8_t>> contributions;
    for (const auto& path : opt.contrib_files) contributions.push_back(as_bytes(read_file_bytes(path)));
    cfg.key_int = master_key_int(contributions, cfg.bit_budget());
  }

  const auto deltas = broadcast(opt.delta, n, "--delta");
  const auto alphas = broadcast(opt.alpha, n, "--alpha");
  // Reject bad lattice parameters before the (possibly retried) key search.
  for (std::size_t i = 0; i < n; ++i) DcParams{deltas[i], alphas[i], opt.bits, 0.0}.validate();

  const KeyFamily family = generate_key_family(cfg);

  std::vector<double> dithers;
  if (!opt.dither.empty()) dithers = broadcast(opt.dither, n, "--dither");

  std::vector<std::string> ids;
  std::vector<DcParams> params;
  const auto seed_bytes = to_big_endian(family.config.key_int);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(default_client_id(i));
    DcParams p;
    p.delta = deltas[i];
    p.alpha = alphas[i];
    p.bits = opt.bits;
    if (!dithers.empty()) {
      p.dither = dithers[i];
    } else if (p.delta > 0.0) {
      std::vector<std::uint8_t> secret = seed_bytes;
      secret.push_back(':');
      secret.insert(secret.end(), ids[i].begin(), ids[i].end());
      p.dither = derive_dither(secret, p.delta);
    }
    p.validate();
    params.push_back(p);
  }

  auto keys = assign_keys(family.directions, cfg.client_quotas, params, ids);

  // Explicit combinations: "clientK=c1,c2,...".
  for (const std::string& spec : opt.coefs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--coefs must look like id=c1,c2,...");
    const std::string id = spec.substr(0, eq);
    auto it = std::find_if(keys.begin(), keys.end(), [&](const ClientKey& k) { return k.client_id == id; });
    if (it == keys.end()) throw UsageError("--coefs names unknown client " + id);
    std::vector<double> coefs;
    std::stringstream ss(spec.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        coefs.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw UsageError("--coefs: '" + item + "' is not a number");
      }
    }
    it->active_vector = combine_partial_keys(it->partial_vectors, coefs);
  }
  for (ClientKey& key : keys) {
    if (key.active_vector.empty()) {
      key.active_vector = combine_partial_keys(
          key.partial_vectors,
          default_coefficients(family.config.key_int, key.client_id, key.partial_vectors.size()));
    }
  }
  check_key_family(keys);

  KeyFile file{opt.r, opt.bits_per_entry, opt.q, std::move(keys)};
  const std::string text = serialize_key_file(file);
  write_file_bytes(opt.out, text);

  out << "key_matrix_sha256=" << key_matrix_digest(family.matrix) << "\n";
  out << "attempts=" << family.attempts << "\n";
  out << "clients=" << n << "\n";
  out << "key_file_sha256=" << to_hex(sha256(text)) << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------- embed

struct EmbedOptions {
  std::string weights, keys, tensor, out, manifest, location_seed;
  std::size_t count = 0;
  std::size_t dim = 0;
  bool permute = false;
  std::vector<std::string> payloads;
};

void print_storage_note(std::ostream& out, DType dtype) {
  out << "storage=" << to_string(dtype) << "\n";
  if (dtype == DType::kF32) {
    out << "note=f32 storage rounds each write; recovery is exact to about 1.2e-7 relative\n";
  }
}

int cmd_embed(const EmbedOptions& opt, std::ostream& out) {
  const std::string key_text = read_file_bytes(opt.keys);
  const KeyFile keys = parse_key_file(key_text);
  const WeightContainer container = read_container(opt.weights);

  SelectionSpec sel;
  sel.tensor_name = opt.tensor;
  sel.count = opt.count;
  sel.permute = opt.permute;
  sel.location_seed = parse_seed32(opt.location_seed);
  if (opt.dim != keys.dimension) {
    throw Error(ErrorKind::kKey, "--dim " + std::to_string(opt.dim) +
                                     " does not match key dimension " + std::to_string(keys.dimension));
  }
  const CoverSelection cover = select_cover(container, sel);

  std::vector<std::string> order;
  for (const ClientKey& k : keys.clients) order.push_back(k.client_id);
  const EmbeddingPlan plan = EmbeddingPlan::for_cover(cover.values.size(), opt.dim, order);

  std::vector<Payload> payloads;
  for (const auto& arg : opt.payloads) payloads.push_back(parse_payload_arg(arg));
  for (const Payload& p : payloads) {
    if (keys.find(p.client_id) == nullptr) {
      throw Error(ErrorKind::kKey, "payload for client " + p.client_id + " not in key file");
    }
  }

  const auto watermarked = embed_payloads(cover.values, plan, payloads, keys.clients);
  const WeightContainer result = write_back(container, sel.tensor_name, cover.indices, watermarked);
  write_container(opt.out, result);

  PlanManifest manifest;
  manifest.selection = sel;
  manifest.dimension = plan.dimension;
  manifest.num_blocks = plan.num_blocks;
  manifest.tail_length = cover.values.size() - plan.covered_length();
  for (const std::string& id : order) {
    auto it = std::find_if(payloads.begin(), payloads.end(),
                           [&](const Payload& p) { return p.client_id == id; });
    manifest.clients.push_back({id, it == payloads.end() ? 0 : it->bit_length});
  }
  manifest.key_file_sha256 = to_hex(sha256(key_text));
  write_plan(opt.manifest, manifest);

  // Metrics on what was actually stored (after any f32 cast).
  const CoverSelection stored = select_cover(result, sel);
  out << "blocks=" << plan.num_blocks << "\n";
  out << "tail=" << manifest.tail_length << "\n";
  out << "capacity_bits=" << plan.capacity_bits() << "\n";
  out << "mse=" << fmt(empirical_mse(cover.values, stored.values)) << "\n";
  out << "mse_theory=" << fmt(theoretical_mse_per_element(keys.clients, plan.dimension)) << "\n";
  try {
    out << "swr_db=" << fmt(empirical_swr(cover.values, stored.values)) << "\n";
  } catch (const Error&) {
    out << "swr_db=undefined\n";
  }
  print_storage_note(out, container.at(sel.tensor_name).dtype);
  return kSuccess;
}

// ---------------------------------------------------------------- extract

struct ExtractOptions {
  std::string weights, keys, client, manifest;
  std::optional<std::string> expect;
};

int cmd_extract(const ExtractOptions& opt, std::ostream& out) {
  const KeyFile keys = read_key_file(opt.keys);
  const PlanManifest manifest = read_plan(opt.manifest);
  const WeightContainer container = read_container(opt.weights);

  const ClientKey* key = keys.find(opt.client);
  if (key == nullptr) throw Error(ErrorKind::kKey, "client " + opt.client + " not in key file");
  const auto* bits = manifest.find(opt.client);
  if (bits == nullptr) throw Error(ErrorKind::kKey, "client " + opt.client + " not in plan");

  const CoverSelection cover = select_cover(container, manifest.selection);
  const auto payload =
      extract_payload(cover.values, manifest.embedding_plan(), *key, bits->bit_length);
  out << "client=" << opt.client << "\n";
  out << "bit_length=" << bits->bit_length << "\n";
  out << "payload=" << to_hex(payload) << "\n";

  if (opt.expect) {
    std::vector<std::uint8_t> expected;
    if (!opt.expect->empty() && opt.expect->front() == '@') {
      expected = as_bytes(read_file_bytes(opt.expect->substr(1)));
    } else {
      try {
        expected = from_hex(*opt.expect);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
    const bool match = expected == payload;
    out << "verified=" << (match ? "true" : "false") << "\n";
    if (!match) throw VerificationFailure("extracted payload differs from --expect");
  }
  return kSuccess;
}

// ---------------------------------------------------------------- recover

struct RecoverOptions {
  std::string weights, keys, manifest, out, original;
};

int cmd_recover(const RecoverOptions& opt, std::ostream& out) {
  const std::string key_text = read_file_bytes(opt.keys);
  const PlanManifest manifest = read_plan(opt.manifest);
  if (to_hex(sha256(key_text)) != manifest.key_file_sha256) {
    throw Error(ErrorKind::kDigest, "key file digest does not match the plan manifest");
  }
  const KeyFile keys = parse_key_file(key_text);
  const WeightContainer container = read_container(opt.weights);

  const CoverSelection cover = select_cover(container, manifest.selection);
  const auto restored = recover_sequence(cover.values, manifest.embedding_plan(), keys.clients);
  const WeightContainer result =
      write_back(container, manifest.selection.tensor_name, cover.indices, restored);
  write_container(opt.out, result);

  out << "restored_elements=" << manifest.dimension * manifest.num_blocks << "\n";
  if (!opt.original.empty()) {
    const WeightContainer reference = read_container(opt.original);
    double max_err = 0.0;
    for (const Tensor& t : result.tensors()) {
      const Tensor& ref = reference.at(t.name);
      if (ref.element_count() != t.element_count()) {
        throw Error(ErrorKind::kLengthMismatch, "tensor " + t.name + " differs in size from --original");
      }
      for (std::size_t i = 0; i < t.element_count(); ++i) {
        max_err = std::max(max_err, std::abs(t.get(i) - ref.get(i)));
      }
    }
    out << "max_abs_error=" << fmt(max_err) << "\n";
  }
  print_storage_note(out, container.at(manifest.selection.tensor_name).dtype);
  return kSuccess;
}

// ---------------------------------------------------------------- attack

struct AttackOptions {
  std::string weights, kind, out, tensor;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

int cmd_attack(const AttackOptions& opt, std::ostream& out) {
  AttackSpec spec;
  spec.kind = parse_attack_kind(opt.kind);
  spec.magnitude = opt.magnitude;
  spec.seed = opt.seed;
  spec.validate();

  WeightContainer container = read_container(opt.weights);
  if (!opt.tensor.empty()) container.at(opt.tensor);
  ChaChaStream stream = ChaChaStream::from_seed(spec.seed);
  std::size_t touched = 0;
  for (Tensor& t : container.tensors()) {
    if (!opt.tensor.empty() && t.name != opt.tensor) continue;
    const auto attacked = apply_attack(t.values(), spec, stream);
    for (std::size_t i = 0; i < attacked.size(); ++i) t.set(i, attacked[i]);
    touched += attacked.size();
  }
  write_container(opt.out, container);
  out << "kind=" << to_string(spec.kind) << "\n";
  out << "magnitude=" << fmt(spec.magnitude) << "\n";
  out << "seed=" << spec.seed << "\n";
  out << "elements=" << touched << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------- metrics

struct MetricsOptions {
  std::string original, watermarked, keys, manifest, tensor, csv, json;
  std::vector<std::string> payloads;
};

std::vector<double> gather(const WeightContainer& c, const MetricsOptions& opt,
                           const std::optional<PlanManifest>& manifest) {
  if (!opt.tensor.empty()) return c.at(opt.tensor).values();
  if (manifest) return select_cover(c, manifest->selection).values;
  std::vector<double> all;
  for (const Tensor& t : c.tensors()) {
    const auto v = t.values();
    all.insert(all.end(), v.begin(), v.end());
  }
  return all;
}

int cmd_metrics(const MetricsOptions& opt, std::ostream& out) {
  const WeightContainer original = read_container(opt.original);
  const WeightContainer marked = read_container(opt.watermarked);
  std::optional<PlanManifest> manifest;
  if (!opt.manifest.empty()) manifest = read_plan(opt.manifest);
  std::optional<KeyFile> keys;
  if (!opt.keys.empty()) keys = read_key_file(opt.keys);

  const auto a = gather(original, opt, manifest);
  const auto b = gather(marked, opt, manifest);

  MetricsRow row;
  row.mse_emp = empirical_mse(a, b);
  out << "elements=" << a.size() << "\n";
  out << "mse=" << fmt(row.mse_emp) << "\n";
  if (keys && !keys->clients.empty()) {
    row.n = keys->clients.size();
    row.r = manifest ? manifest->dimension : keys->dimension;
    row.delta = keys->clients.front().dc.delta;
    row.alpha = keys->clients.front().dc.alpha;
    row.mse_theory = theoretical_mse_per_element(keys->clients, row.r);
    out << "mse_theory=" << fmt(row.mse_theory) << "\n";
  }

  if (!opt.payloads.empty()) {
    if (!manifest || !keys) throw UsageError("BER needs --manifest and --keys");
    const CoverSelection cover = select_cover(marked, manifest->selection);
    std::size_t total_bits = 0;
    double errors = 0.0;
    for (const auto& arg : opt.payloads) {
      const Payload expected = parse_payload_arg(arg);
      const ClientKey* key = keys->find(expected.client_id);
      if (key == nullptr) throw Error(ErrorKind::kKey, "client " + expected.client_id + " not in key file");
      const auto got =
          extract_payload(cover.values, manifest->embedding_plan(), *key, expected.bit_length);
      errors += bit_error_rate(expected.data, got, expected.bit_length) *
                static_cast<double>(expected.bit_length);
      total_bits += expected.bit_length;
    }
    row.ber = total_bits == 0 ? 0.0 : errors / static_cast<double>(total_bits);
    out << "ber=" << fmt(*row.ber) << "\n";
  }

  std::optional<Error> swr_error;
  try {
    row.swr_db = empirical_swr(a, b);
    out << "swr_db=" << fmt(*row.swr_db) << "\n";
  } catch (const Error& e) {
    swr_error = e;
  }

  const MetricsRow rows[] = {row};
  if (!opt.csv.empty()) {
    std::ostringstream csv;
    write_metrics_csv(csv, rows);
    write_file_bytes(opt.csv, csv.str());
  }
  if (!opt.json.empty()) write_file_bytes(opt.json, metrics_json(rows));
  if (swr_error) throw *swr_error;
  return kSuccess;
}

// ---------------------------------------------------------------- hist

struct HistOptions {
  std::string weights, tensor, csv;
  std::size_t bins = 50;
  std::vector<double> range;
};

int cmd_hist(const HistOptions& opt, std::ostream& out) {
  const WeightContainer container = read_container(opt.weights);
  const auto values = container.at(opt.tensor).values();
  std::optional<std::pair<double, double>> range;
  if (!opt.range.empty()) {
    if (opt.range.size() != 2) throw UsageError("--range takes lo,hi");
    range = std::make_pair(opt.range[0], opt.range[1]);
  }
  const Histogram h = histogram(values, opt.bins, range);
  if (!opt.csv.empty()) {
    std::ostringstream csv;
    write_histogram_csv(csv, h);
    write_file_bytes(opt.csv, csv.str());
  }
  out << "bins=" << h.counts.size() << "\n";
  out << "lo=" << fmt(h.lo) << "\n";
  out << "hi=" << fmt(h.hi) << "\n";
  out << "total=" << h.total() << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------- import / export

struct ImportOptions {
  std::string raw, dtype = "f32", shape, name, out, into;
};

int cmd_import(const ImportOptions& opt, std::ostream& out) {
  WeightContainer container;
  if (!opt.into.empty()) container = read_container(opt.into);
  const DType dtype = [&] {
    try {
      return parse_dtype(opt.dtype);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }();
  Tensor t = import_raw(read_file_bytes(opt.raw), opt.name, dtype, parse_size_list(opt.shape, "--shape"));
  out << "elements=" << t.element_count() << "\n";
  container.add(std::move(t));
  write_container(opt.out, container);
  out << "tensors=" << container.tensors().size() << "\n";
  return kSuccess;
}

struct ExportOptions {
  std::string weights, tensor, raw;
};

int cmd_export(const ExportOptions& opt, std::ostream& out) {
  const WeightContainer container = read_container(opt.weights);
  const Tensor& t = container.at(opt.tensor);
  write_file_bytes(opt.raw, bytes_of(t.bytes));
  out << "dtype=" << to_string(t.dtype) << "\n";
  out << "elements=" << t.element_count() << "\n";
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiparty reversible watermarking of model weights"};
  app.require_subcommand(1);
  std::function<int()> action;

  KeygenOptions kg;
  auto* keygen = app.add_subcommand("keygen", "Generate orthogonal client keys");
  keygen->add_option("--r", kg.r, "Key dimension r")->required()->check(CLI::PositiveNumber);
  keygen->add_option("--clients", kg.clients, "Comma-separated quotas n1,n2,... summing to r")->required();
  keygen->add_option("--B", kg.bits_per_entry, "Bits per matrix entry")->capture_default_str();
  keygen->add_option("--q", kg.q, "Matrix entry range (power of two)")->capture_default_str();
  keygen->add_option("--delta", kg.delta, "Lattice spacing, one or per client")->delimiter(',')->capture_default_str();
  keygen->add_option("--alpha", kg.alpha, "Contraction alpha, one or per client")->delimiter(',')->capture_default_str();
  keygen->add_option("--bits", kg.bits, "Message bits per coefficient")->capture_default_str();
  keygen->add_option("--contrib", kg.contrib_files, "Client random contribution files");
  keygen->add_option("--key-int", kg.key_int, "Literal key integer (bypasses hashing)");
  keygen->add_option("--dither", kg.dither, "Explicit dithers, one or per client")->delimiter(',');
  keygen->add_option("--coefs", kg.coefs, "Partial-key combination id=c1,c2,...");
  keygen->add_option("--out", kg.out, "Output key file")->required();
  keygen->callback([&] { action = [&] { return cmd_keygen(kg, out); }; });

  EmbedOptions em;
  auto* embed = app.add_subcommand("embed", "Embed client payloads into a weight tensor");
  embed->add_option("--weights", em.weights)->required();
  embed->add_option("--keys", em.keys)->required();
  embed->add_option("--tensor", em.tensor)->required();
  embed->add_option("--count", em.count, "Number of cover elements")->required();
  embed->add_option("--dim", em.dim, "Block dimension r")->required();
  embed->add_option("--payload", em.payloads, "id=hexbytes or id=@path");
  embed->add_flag("--permute", em.permute, "Select cover elements by seeded shuffle");
  embed->add_option("--location-seed", em.location_seed, "32-byte hex seed for --permute");
  embed->add_option("--out", em.out)->required();
  embed->add_option("--manifest", em.manifest)->required();
  embed->callback([&] { action = [&] { return cmd_embed(em, out); }; });

  ExtractOptions ex;
  std::string expect;
  auto* extract = app.add_subcommand("extract", "Extract one client's payload");
  extract->add_option("--weights", ex.weights)->required();
  extract->add_option("--keys", ex.keys)->required();
  extract->add_option("--client", ex.client)->required();
  extract->add_option("--manifest", ex.manifest)->required();
  auto* expect_opt = extract->add_option("--expect", expect, "Expected payload (hex or @path)");
  extract->callback([&] {
    if (expect_opt->count() > 0) ex.expect = expect;
    action = [&] { return cmd_extract(ex, out); };
  });

  RecoverOptions rc;
  auto* recover = app.add_subcommand("recover", "Restore the original weights with all keys");
  recover->add_option("--weights", rc.weights)->required();
  recover->add_option("--keys", rc.keys)->required();
  recover->add_option("--manifest", rc.manifest)->required();
  recover->add_option("--out", rc.out)->required();
  recover->add_option("--original", rc.original, "Reference container for error reporting");
  recover->callback([&] { action = [&] { return cmd_recover(rc, out); }; });

  AttackOptions at;
  auto* attack = app.add_subcommand("attack", "Apply a seeded noise or pruning attack");
  attack->add_option("--weights", at.weights)->required();
  attack->add_option("--kind", at.kind)->required()->check(
      CLI::IsMember({"gaussian", "uniform", "prune_smallest", "prune_random"}));
  attack->add_option("--magnitude", at.magnitude)->required();
  attack->add_option("--seed", at.seed)->capture_default_str();
  attack->add_option("--tensor", at.tensor, "Only attack this tensor");
  attack->add_option("--out", at.out)->required();
  attack->callback([&] { action = [&] { return cmd_attack(at, out); }; });

  MetricsOptions mt;
  auto* metrics = app.add_subcommand("metrics", "Distortion, SWR and BER between two containers");
  metrics->add_option("--original", mt.original)->required();
  metrics->add_option("--watermarked", mt.watermarked)->required();
  metrics->add_option("--keys", mt.keys);
  metrics->add_option("--manifest", mt.manifest);
  metrics->add_option("--tensor", mt.tensor);
  metrics->add_option("--payload", mt.payloads, "Expected payload id=hex for BER");
  metrics->add_option("--csv", mt.csv);
  metrics->add_option("--json", mt.json);
  metrics->callback([&] { action = [&] { return cmd_metrics(mt, out); }; });

  HistOptions hs;
  auto* hist = app.add_subcommand("hist", "Histogram of one tensor");
  hist->add_option("--weights", hs.weights)->required();
  hist->add_option("--tensor", hs.tensor)->required();
  hist->add_option("--bins", hs.bins)->capture_default_str()->check(CLI::PositiveNumber);
  hist->add_option("--range", hs.range, "lo,hi")->delimiter(',');
  hist->add_option("--csv", hs.csv);
  hist->callback([&] { action = [&] { return cmd_hist(hs, out); }; });

  ImportOptions im;
  auto* import = app.add_subcommand("import", "Wrap a raw little-endian float file as a tensor");
  import->add_option("--raw", im.raw)->required();
  import->add_option("--dtype", im.dtype)->capture_default_str();
  import->add_option("--shape", im.shape, "Comma-separated dims")->required();
  import->add_option("--name", im.name)->required();
  import->add_option("--into", im.into, "Existing container to extend");
  import->add_option("--out", im.out)->required();
  import->callback([&] { action = [&] { return cmd_import(im, out); }; });

  ExportOptions xp;
  auto* exp = app.add_subcommand("export", "Dump one tensor as raw little-endian floats");
  exp->add_option("--weights", xp.weights)->required();
  exp->add_option("--tensor", xp.tensor)->required();
  exp->add_option("--raw", xp.raw)->required();
  exp->callback([&] { action = [&] { return cmd_export(xp, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const VerificationFailure& e) {
    err << "verification failed: " << e.what() << "\n";
    return kVerificationFailed;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"fedreverse"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fedreverse::cli
