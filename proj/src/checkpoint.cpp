#include "bsuv/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "bsuv/config.hpp"
#include "bsuv/error.hpp"

namespace bsuv {

namespace {

constexpr char kMagic[8] = {'B', 'S', 'U', 'V', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& in, const std::string& what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error(Errc::CheckpointFormat, "truncated " + what);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SegmentationNet& net, std::int64_t step) {
  json header;
  header["network"] = to_json(net.config());
  header["step"] = step;
  header["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const ParamTensor& t : net.parameters().tensors()) {
    header["tensors"].push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"count", t.numel()}});
    offset += t.numel();
  }
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write beside the target and rename so a crash never leaves a torn file.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const ParamTensor& t : net.parameters().tensors()) {
      out.write(reinterpret_cast<const char*>(t.value.data()), static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    if (!out) throw Error(Errc::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(Errc::CheckpointFormat, path.string() + ": bad magic");
  }
  const auto version = take<std::uint32_t>(in, "version");
  if (version != kVersion) throw Error(Errc::CheckpointFormat, fmt::format("{}: version {}", path.string(), version));
  const auto header_len = take<std::uint64_t>(in, "header length");
  if (header_len > (1u << 26)) throw Error(Errc::CheckpointFormat, path.string() + ": header too large");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
    throw Error(Errc::CheckpointFormat, path.string() + ": truncated header");
  }
  const json header = json::parse(text, nullptr, false);
  if (header.is_discarded() || !header.contains("network") || !header.contains("tensors")) {
    throw Error(Errc::CheckpointFormat, path.string() + ": malformed header");
  }

  NetworkConfig cfg;
  try {
    cfg = network_config_from_json(header.at("network"));
    cfg.validate();
  } catch (const Error& e) {
    throw Error(Errc::CheckpointFormat, path.string() + ": " + e.what());
  }
  Checkpoint ck{SegmentationNet::empty(cfg), header.value("step", std::int64_t{0})};
  auto& tensors = ck.net.parameters().tensors();
  const json& listed = header.at("tensors");
  if (!listed.is_array() || listed.size() != tensors.size()) {
    throw Error(Errc::CheckpointFormat, path.string() + ": tensor list does not match the network layout");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const json& e = listed[i];
    ParamTensor& t = tensors[i];
    if (e.value("name", std::string{}) != t.name || e.value("shape", std::vector<int>{}) != t.shape ||
        e.value("count", std::size_t{0}) != t.numel()) {
      throw Error(Errc::CheckpointFormat, fmt::format("{}: tensor {} does not match '{}'", path.string(), i, t.name));
    }
    if (!in.read(reinterpret_cast<char*>(t.value.data()), static_cast<std::streamsize>(t.numel() * sizeof(double)))) {
      throw Error(Errc::CheckpointFormat, path.string() + ": truncated tensor data for " + t.name);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(Errc::CheckpointFormat, path.string() + ": trailing bytes");
  }
  return ck;
}

}  // namespace bsuv
