#include "motifrep/model/checkpoint.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "motifrep/error.h"

namespace motifrep {
namespace {

constexpr char kMagic[8] = {'M', 'O', 'T', 'I', 'F', 'R', 'E', 'P'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
  void put_string(const std::string& s) {
    put(static_cast<uint32_t>(s.size()));
    put_bytes(s.data(), s.size());
  }
  void put_matrix(const Mat<float>& m) { put_bytes(m.data(), sizeof(float) * static_cast<std::size_t>(m.size())); }

  std::vector<uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> b) : bytes_(b) {}
  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  std::string get_string() {
    const auto n = get<uint32_t>();
    const auto* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  void get_matrix(Mat<float>& m) {
    std::memcpy(m.data(), take(sizeof(float) * static_cast<std::size_t>(m.size())), sizeof(float) * static_cast<std::size_t>(m.size()));
  }
  std::size_t offset() const { return pos_; }

 private:
  const uint8_t* take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
    const uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::span<const uint8_t> bytes_;
  std::size_t pos_ = 0;
};

ModelState decode(std::span<const uint8_t> bytes, const ModelConfig* expected) {
  if (bytes.size() < sizeof kMagic + sizeof(uint32_t) + sizeof(uint64_t)) throw CheckpointError("checkpoint truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw CheckpointError("not a checkpoint (bad magic)");
  uint32_t version;
  std::memcpy(&version, bytes.data() + sizeof kMagic, sizeof version);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto body = bytes.first(bytes.size() - sizeof(uint64_t));
  uint64_t stored;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);
  if (fnv1a(body) != stored) throw CheckpointError("checkpoint checksum mismatch (corrupt or truncated file)");

  Reader r(body);
  r.get<std::array<char, 8>>();
  r.get<uint32_t>();
  ModelConfig config;
  try {
    config = model_config_from_json(nlohmann::json::parse(r.get_string()));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad config block: ") + e.what());
  } catch (const SchemaError& e) {
    throw CheckpointError(std::string("bad config block: ") + e.what());
  }
  const auto variant_byte = r.get<uint8_t>();
  if (variant_byte > static_cast<uint8_t>(Variant::RR)) throw CheckpointError("bad variant tag");
  const auto seed = r.get<uint64_t>();
  const auto step = r.get<int64_t>();
  ModelState state(expected ? *expected : config, static_cast<Variant>(variant_byte), seed);
  state.step = static_cast<long>(step);
  auto& params = state.model.parameters();
  const auto count = r.get<uint32_t>();
  if (count != params.size()) {
    throw CheckpointError("shape mismatch: checkpoint has " + std::to_string(count) + " tensors, model expects " +
                          std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const std::string name = r.get_string();
    const auto rows = r.get<uint32_t>();
    const auto cols = r.get<uint32_t>();
    if (name != p.name) throw CheckpointError("shape mismatch: tensor " + std::to_string(i) + " is '" + name + "', expected '" + p.name + "'");
    if (rows != p.value.rows() || cols != p.value.cols()) {
      throw CheckpointError("shape mismatch: " + name + " is " + std::to_string(rows) + "x" + std::to_string(cols) +
                            ", expected " + std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
    }
    r.get_matrix(p.value);
    r.get_matrix(state.adam.m[i]);
    r.get_matrix(state.adam.v[i]);
  }
  if (r.offset() != body.size()) throw CheckpointError("trailing bytes after the last tensor");
  return state;
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

uint64_t fnv1a(std::span<const uint8_t> bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<uint8_t> serialize_checkpoint(const ModelState& state) {
  Writer w;
  w.put_bytes(kMagic, sizeof kMagic);
  w.put(kCheckpointVersion);
  w.put_string(to_json(state.model.config()).dump());
  w.put(static_cast<uint8_t>(state.variant));
  w.put(static_cast<uint64_t>(state.seed));
  w.put(static_cast<int64_t>(state.step));
  const auto& params = state.model.parameters();
  w.put(static_cast<uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    w.put_string(params[i].name);
    w.put(static_cast<uint32_t>(params[i].value.rows()));
    w.put(static_cast<uint32_t>(params[i].value.cols()));
    w.put_matrix(params[i].value);
    w.put_matrix(state.adam.m[i]);
    w.put_matrix(state.adam.v[i]);
  }
  w.put(fnv1a(w.bytes));
  return std::move(w.bytes);
}

ModelState deserialize_checkpoint(std::span<const uint8_t> bytes) { return decode(bytes, nullptr); }

ModelState deserialize_checkpoint(std::span<const uint8_t> bytes, const ModelConfig& expected) {
  return decode(bytes, &expected);
}

void save_checkpoint(const ModelState& state, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(state);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for " + path.string());
}

ModelState load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

ModelState load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  return deserialize_checkpoint(read_file(path), expected);
}

std::string checkpoint_hash(const ModelState& state) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(serialize_checkpoint(state))));
  return buf;
}

}  // namespace motifrep
