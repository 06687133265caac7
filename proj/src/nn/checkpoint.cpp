#include "fpforge/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace fpforge::nn {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xff),
                            static_cast<unsigned char>((v >> 8) & 0xff),
                            static_cast<unsigned char>((v >> 16) & 0xff),
                            static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

struct Reader {
  std::ifstream in;
  explicit Reader(const std::filesystem::path& path) : in(path, std::ios::binary) {}

  bool read_u32(std::uint32_t& v) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (in.gcount() == 0) return false;  // clean EOF
    if (in.gcount() != 4) throw ParseError("checkpoint: truncated record");
    v = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
        (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
    return true;
  }

  std::uint32_t require_u32(const char* what) {
    std::uint32_t v;
    if (!read_u32(v)) throw ParseError(std::string("checkpoint: truncated ") + what);
    return v;
  }

  void read_exact(void* dst, std::size_t bytes, const char* what) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes)
      throw ParseError(std::string("checkpoint: truncated ") + what);
  }
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& config_json,
                     const std::vector<const ParamStore<float>*>& stores) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write("FPFN", 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(config_json.size()));
  out.write(config_json.data(), static_cast<std::streamsize>(config_json.size()));
  for (const ParamStore<float>* store : stores) {
    for (const auto& entry : store->entries) {
      put_u32(out, static_cast<std::uint32_t>(entry.name.size()));
      out.write(entry.name.data(), static_cast<std::streamsize>(entry.name.size()));
      put_u32(out, 4);
      for (int d : entry.value.shape) put_u32(out, static_cast<std::uint32_t>(d));
      out.write(reinterpret_cast<const char*>(entry.value.data.data()),
                static_cast<std::streamsize>(entry.value.data.size() * sizeof(float)));
    }
  }
  if (!out) throw IoError("short write to checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  if (!r.in) throw IoError("cannot open checkpoint: " + path.string());

  char magic[4];
  r.in.read(magic, 4);
  if (r.in.gcount() != 4 || std::memcmp(magic, "FPFN", 4) != 0)
    throw ParseError("checkpoint: bad magic");

  const std::uint32_t version = r.require_u32("version");
  if (version > kCheckpointVersion)
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));

  Checkpoint ckpt;
  const std::uint32_t config_len = r.require_u32("config length");
  ckpt.config_json.resize(config_len);
  if (config_len > 0) r.read_exact(ckpt.config_json.data(), config_len, "config block");

  std::uint32_t name_len;
  while (r.read_u32(name_len)) {
    NamedTensor t;
    t.name.resize(name_len);
    if (name_len > 0) r.read_exact(t.name.data(), name_len, "record");
    const std::uint32_t rank = r.require_u32("record");
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint32_t dim = r.require_u32("record");
      t.dims.push_back(dim);
      count *= dim;
    }
    t.values.resize(count);
    if (count > 0) r.read_exact(t.values.data(), count * sizeof(float), "record");
    ckpt.params.push_back(std::move(t));
  }
  return ckpt;
}

void restore_params(const Checkpoint& ckpt, const std::vector<ParamStore<float>*>& stores) {
  std::size_t expected = 0;
  for (const ParamStore<float>* s : stores) expected += s->entries.size();
  if (ckpt.params.size() != expected)
    throw ParseError("checkpoint: parameter count does not match model");
  std::size_t i = 0;
  for (ParamStore<float>* store : stores) {
    for (auto& entry : store->entries) {
      const NamedTensor& t = ckpt.params[i++];
      if (t.name != entry.name)
        throw ParseError("checkpoint: parameter name mismatch at \"" + t.name + "\"");
      if (t.dims.size() != 4 || t.values.size() != entry.value.size())
        throw ParseError("checkpoint: parameter shape mismatch at \"" + t.name + "\"");
      for (int d = 0; d < 4; ++d) {
        if (static_cast<int>(t.dims[d]) != entry.value.shape[d])
          throw ParseError("checkpoint: parameter shape mismatch at \"" + t.name + "\"");
      }
      std::copy(t.values.begin(), t.values.end(), entry.value.data.begin());
    }
  }
}

}  // namespace fpforge::nn
