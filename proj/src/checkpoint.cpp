#include "sentlab/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "sentlab/errors.hpp"

namespace sentlab::model {

namespace {

constexpr char kMagic[4] = {'D', 'D', 'E', 'C'};
constexpr uint32_t kVersion = 1;

enum ConfigTag : uint8_t {
  kTagEncoder = 1,
  kTagDecoder = 2,
  kTagEmbedDim = 3,
  kTagHiddenDim = 4,
  kTagVocabSize = 5,
  kTagMaxLen = 6,
  kTagSeed = 7,
  kTagLearningRate = 8,
  kTagBatchSize = 9,
  kTagEpochs = 10,
  kTagSoftmaxBias = 11,
};
constexpr uint32_t kConfigFieldCount = 11;

void put_bytes(std::ostream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), std::streamsize(n));
}

void put_u8(std::ostream& out, uint8_t v) { put_bytes(out, &v, 1); }

void put_u32(std::ostream& out, uint32_t v) {
  char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
  put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  put_u32(out, uint32_t(v));
  put_u32(out, uint32_t(v >> 32));
}

void put_f32(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

bool get_bytes(std::istream& in, void* p, size_t n) {
  in.read(static_cast<char*>(p), std::streamsize(n));
  return size_t(in.gcount()) == n;
}

struct Reader {
  std::istream& in;
  std::string where;  // current structure, for truncation messages

  void need(void* p, size_t n) {
    if (!get_bytes(in, p, n))
      throw CheckpointError(CheckpointError::Kind::Truncated,
                            "checkpoint truncated while reading " + where);
  }
  uint8_t u8() {
    uint8_t v;
    need(&v, 1);
    return v;
  }
  uint32_t u32() {
    unsigned char b[4];
    need(b, 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
           uint32_t(b[3]) << 24;
  }
  uint64_t u64() {
    uint64_t lo = u32();
    uint64_t hi = u32();
    return lo | (hi << 32);
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

}  // namespace

void save_checkpoint(const Parameters<float>& params, const ModelConfig& cfg,
                     std::ostream& out) {
  put_bytes(out, kMagic, 4);
  put_u32(out, kVersion);

  put_u32(out, kConfigFieldCount);
  put_u8(out, kTagEncoder);
  put_u8(out, cfg.encoder == Arch::rnn ? 1 : 0);
  put_u8(out, kTagDecoder);
  put_u8(out, cfg.decoder == Arch::rnn ? 1 : 0);
  put_u8(out, kTagEmbedDim);
  put_u32(out, cfg.embed_dim);
  put_u8(out, kTagHiddenDim);
  put_u32(out, cfg.hidden_dim);
  put_u8(out, kTagVocabSize);
  put_u32(out, cfg.vocab_size);
  put_u8(out, kTagMaxLen);
  put_u32(out, cfg.max_len);
  put_u8(out, kTagSeed);
  put_u64(out, cfg.seed);
  put_u8(out, kTagLearningRate);
  put_f32(out, cfg.learning_rate);
  put_u8(out, kTagBatchSize);
  put_u32(out, cfg.batch_size);
  put_u8(out, kTagEpochs);
  put_u32(out, cfg.epochs);
  put_u8(out, kTagSoftmaxBias);
  put_u8(out, cfg.softmax_bias ? 1 : 0);

  for_each_tensor(params, [&](const std::string& name,
                              std::span<const float> data,
                              std::vector<uint32_t> dims) {
    put_u32(out, uint32_t(name.size()));
    put_bytes(out, name.data(), name.size());
    put_u32(out, uint32_t(dims.size()));
    for (uint32_t d : dims) put_u32(out, d);
    for (float v : data) put_f32(out, v);
  });
}

void save_checkpoint(const Parameters<float>& params, const ModelConfig& cfg,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw CheckpointError(CheckpointError::Kind::Io, "cannot open " + path);
  save_checkpoint(params, cfg, out);
  out.flush();
  if (!out)
    throw CheckpointError(CheckpointError::Kind::Io, "write failed: " + path);
}

std::pair<Parameters<float>, ModelConfig> load_checkpoint(std::istream& in) {
  char magic[4];
  if (!get_bytes(in, magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointError(CheckpointError::Kind::BadMagic,
                          "bad magic bytes (expected \"DDEC\")");
  Reader r{in, "format version"};
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw CheckpointError(CheckpointError::Kind::BadVersion,
                          "unsupported format version " +
                              std::to_string(version));

  r.where = "config block";
  ModelConfig cfg;
  const uint32_t n_fields = r.u32();
  for (uint32_t i = 0; i < n_fields; ++i) {
    switch (r.u8()) {
      case kTagEncoder: cfg.encoder = r.u8() ? Arch::rnn : Arch::bow; break;
      case kTagDecoder: cfg.decoder = r.u8() ? Arch::rnn : Arch::bow; break;
      case kTagEmbedDim: cfg.embed_dim = r.u32(); break;
      case kTagHiddenDim: cfg.hidden_dim = r.u32(); break;
      case kTagVocabSize: cfg.vocab_size = r.u32(); break;
      case kTagMaxLen: cfg.max_len = r.u32(); break;
      case kTagSeed: cfg.seed = r.u64(); break;
      case kTagLearningRate: cfg.learning_rate = r.f32(); break;
      case kTagBatchSize: cfg.batch_size = r.u32(); break;
      case kTagEpochs: cfg.epochs = r.u32(); break;
      case kTagSoftmaxBias: cfg.softmax_bias = r.u8() != 0; break;
      default:
        throw CheckpointError(CheckpointError::Kind::BadVersion,
                              "unknown config tag in checkpoint");
    }
  }

  struct LoadedTensor {
    std::vector<uint32_t> dims;
    std::vector<float> data;
  };
  std::map<std::string, LoadedTensor> tensors;
  for (;;) {
    uint32_t name_len;
    {
      unsigned char b[4];
      in.read(reinterpret_cast<char*>(b), 4);
      if (in.gcount() == 0) break;  // clean end of directory
      if (in.gcount() != 4)
        throw CheckpointError(CheckpointError::Kind::Truncated,
                              "checkpoint truncated in tensor header");
      name_len = uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
                 uint32_t(b[3]) << 24;
    }
    if (name_len == 0 || name_len > 256)
      throw CheckpointError(CheckpointError::Kind::BadDims,
                            "implausible tensor name length");
    std::string name(name_len, '\0');
    r.where = "tensor name";
    r.need(name.data(), name_len);
    r.where = "tensor '" + name + "'";
    LoadedTensor t;
    const uint32_t rank = r.u32();
    if (rank == 0 || rank > 4)
      throw CheckpointError(CheckpointError::Kind::BadDims,
                            "tensor '" + name + "' has implausible rank");
    size_t count = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      t.dims.push_back(r.u32());
      count *= t.dims.back();
    }
    t.data.resize(count);
    for (size_t i = 0; i < count; ++i) t.data[i] = r.f32();
    tensors.emplace(std::move(name), std::move(t));
  }

  Parameters<float> params;
  try {
    params = make_parameters<float>(cfg);
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointError::Kind::BadDims,
                          std::string("config block invalid: ") + e.what());
  }
  size_t used = 0;
  for_each_tensor(params, [&](const std::string& name, std::span<float> data,
                              std::vector<uint32_t> dims) {
    auto it = tensors.find(name);
    if (it == tensors.end())
      throw CheckpointError(CheckpointError::Kind::BadDims,
                            "missing tensor '" + name + "'");
    if (it->second.dims != dims || it->second.data.size() != data.size())
      throw CheckpointError(CheckpointError::Kind::BadDims,
                            "tensor '" + name + "' dims inconsistent with config");
    std::copy(it->second.data.begin(), it->second.data.end(), data.begin());
    ++used;
  });
  if (used != tensors.size())
    throw CheckpointError(CheckpointError::Kind::BadDims,
                          "checkpoint contains unexpected tensors");
  return {std::move(params), cfg};
}

std::pair<Parameters<float>, ModelConfig> load_checkpoint(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError(CheckpointError::Kind::Io, "cannot open " + path);
  return load_checkpoint(in);
}

std::string model_fingerprint(const Parameters<float>& params,
                              const ModelConfig& cfg) {
  std::ostringstream buf(std::ios::binary);
  save_checkpoint(params, cfg, buf);
  const std::string bytes = buf.str();
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return std::string(hex);
}

}  // namespace sentlab::model
