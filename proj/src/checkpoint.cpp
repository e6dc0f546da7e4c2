#include "factedit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace factedit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::string get_str(std::istream& is) {
  const auto n = get_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

}  // namespace

std::uint64_t payload_checksum(const std::vector<float>& payload) {
  // FNV-1a over the raw payload bytes.
  std::uint64_t h = 14695981039346656037ull;
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  const std::size_t n = payload.size() * sizeof(float);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

Checkpoint snapshot(const std::string& kind, const std::vector<std::string>& vocab,
                    const std::vector<TensorPtr>& params) {
  Checkpoint c;
  c.kind = kind;
  c.vocab = vocab;
  for (const auto& p : params) {
    c.manifest.emplace_back(p->name, p->shape);
    for (double v : p->values) c.payload.push_back(static_cast<float>(v));
  }
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot write checkpoint: " + path);
  os.write(Checkpoint::kMagic, 5);
  put_u32(os, Checkpoint::kVersion);
  put_str(os, ckpt.kind);
  put_u32(os, static_cast<std::uint32_t>(ckpt.vocab.size()));
  for (const auto& w : ckpt.vocab) put_str(os, w);
  put_u32(os, static_cast<std::uint32_t>(ckpt.manifest.size()));
  for (const auto& [name, shape] : ckpt.manifest) {
    put_str(os, name);
    put_u32(os, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put_u64(os, d);
  }
  put_u64(os, ckpt.payload.size());
  os.write(reinterpret_cast<const char*>(ckpt.payload.data()),
           static_cast<std::streamsize>(ckpt.payload.size() * sizeof(float)));
  put_u64(os, payload_checksum(ckpt.payload));
  if (!os) throw CheckpointError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, Checkpoint::kMagic, 5) != 0)
    throw CheckpointError("bad checkpoint magic in " + path);
  const auto version = get_u32(is);
  if (version != Checkpoint::kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.kind = get_str(is);
  const auto nv = get_u32(is);
  c.vocab.reserve(nv);
  for (std::uint32_t i = 0; i < nv; ++i) c.vocab.push_back(get_str(is));
  const auto nm = get_u32(is);
  std::size_t expected = 0;
  for (std::uint32_t i = 0; i < nm; ++i) {
    std::string name = get_str(is);
    const auto rank = get_u32(is);
    std::vector<std::size_t> shape(rank);
    std::size_t prod = 1;
    for (auto& d : shape) {
      d = get_u64(is);
      prod *= d;
    }
    expected += prod;
    c.manifest.emplace_back(std::move(name), std::move(shape));
  }
  const auto payload_len = get_u64(is);
  if (payload_len != expected)
    throw CheckpointError("payload length does not match manifest in " + path);
  c.payload.resize(payload_len);
  is.read(reinterpret_cast<char*>(c.payload.data()),
          static_cast<std::streamsize>(payload_len * sizeof(float)));
  const auto stored = get_u64(is);
  if (!is) throw CheckpointError("truncated checkpoint: " + path);
  if (stored != payload_checksum(c.payload))
    throw CheckpointError("checksum mismatch in " + path);
  return c;
}

void restore_params(const Checkpoint& ckpt, const std::vector<TensorPtr>& params) {
  if (ckpt.manifest.size() != params.size())
    throw CheckpointError("parameter count mismatch: checkpoint has " +
                          std::to_string(ckpt.manifest.size()) + ", model has " +
                          std::to_string(params.size()));
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, shape] = ckpt.manifest[i];
    if (params[i]->name != name || params[i]->shape != shape)
      throw CheckpointError("parameter mismatch at '" + name + "' vs '" +
                            params[i]->name + "'");
    for (auto& v : params[i]->values) v = static_cast<double>(ckpt.payload[offset++]);
  }
}

}  // namespace factedit
