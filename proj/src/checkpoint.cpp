#include "gfte/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace gfte {

namespace {

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32le(std::string& out, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  put_u32le(out, u);
}

float get_f32le(const unsigned char* p) {
  const std::uint32_t u = get_u32le(p);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

}  // namespace

void save_checkpoint(const GfteModel<float>& model, const std::string& path) {
  std::string blob;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, t] : model.params().entries()) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = t.shape().dims();
    entry["offset"] = blob.size();
    tensors.push_back(entry);
    for (Index i = 0; i < t.numel(); ++i) put_f32le(blob, t.value()[i]);
  }

  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["config"] = nlohmann::json::parse(model.config().to_json());
  manifest["vocab"] = nlohmann::json::parse(model.vocab().to_json());
  manifest["tensors"] = tensors;
  manifest["blob_bytes"] = blob.size();
  manifest["blob_fnv1a64"] = to_hex(fnv1a64(blob));
  const std::string mtext = manifest.dump();

  std::string file;
  file.reserve(8 + 4 + mtext.size() + blob.size());
  file.append(kCheckpointMagic, 8);
  put_u32le(file, static_cast<std::uint32_t>(mtext.size()));
  file += mtext;
  file += blob;

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("checkpoint " + path + ": cannot open for writing");
  os.write(file.data(), static_cast<std::streamsize>(file.size()));
  if (!os) throw DataError("checkpoint " + path + ": write failed");
}

GfteModel<float> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint " + path + ": cannot open");
  std::string file((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  if (file.size() < 12 || file.compare(0, 7, "GFTECKP") != 0)
    throw DataError("checkpoint " + path + ": bad magic (not a gfte checkpoint)");
  if (file.compare(0, 8, kCheckpointMagic) != 0)
    throw DataError("checkpoint " + path + ": unsupported format version (magic " +
                    file.substr(0, 8) + ")");

  const auto* bytes = reinterpret_cast<const unsigned char*>(file.data());
  const std::uint32_t mlen = get_u32le(bytes + 8);
  if (12 + static_cast<std::size_t>(mlen) > file.size())
    throw DataError("checkpoint " + path + ": corrupt blob (truncated manifest)");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(file.substr(12, mlen));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint " + path + ": corrupt manifest: " + e.what());
  }

  ModelConfig cfg;
  Vocabulary vocab;
  std::string blob_hash;
  std::size_t blob_bytes = 0;
  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != kCheckpointVersion)
      throw DataError("checkpoint " + path + ": unsupported format version " +
                      std::to_string(version));
    cfg = ModelConfig::from_json(manifest.at("config"));
    vocab = Vocabulary::from_json(manifest.at("vocab").dump());
    blob_bytes = manifest.at("blob_bytes").get<std::size_t>();
    blob_hash = manifest.at("blob_fnv1a64").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint " + path + ": corrupt manifest: " + e.what());
  }

  const std::string blob = file.substr(12 + mlen);
  if (blob.size() != blob_bytes)
    throw DataError("checkpoint " + path + ": corrupt blob (expected " +
                    std::to_string(blob_bytes) + " bytes, have " + std::to_string(blob.size()) +
                    ")");
  if (to_hex(fnv1a64(blob)) != blob_hash)
    throw DataError("checkpoint " + path + ": corrupt blob (checksum mismatch)");

  GfteModel<float> model = GfteModel<float>::build(cfg, vocab);

  const auto& tensors = manifest.at("tensors");
  if (!tensors.is_array() || tensors.size() != model.params().size())
    throw DataError("checkpoint " + path + ": parameter set mismatch (manifest has " +
                    std::to_string(tensors.size()) + " tensors, architecture expects " +
                    std::to_string(model.params().size()) + ")");
  for (const auto& entry : tensors) {
    std::string name;
    std::vector<Index> dims;
    std::size_t offset = 0;
    try {
      name = entry.at("name").get<std::string>();
      dims = entry.at("shape").get<std::vector<Index>>();
      offset = entry.at("offset").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("checkpoint " + path + ": corrupt manifest: " + e.what());
    }
    if (!model.params().contains(name))
      throw DataError("checkpoint " + path + ": parameter set mismatch (unexpected tensor '" +
                      name + "')");
    Tensor<float> t = model.params().at(name);
    if (Shape(dims) != t.shape())
      throw DataError("checkpoint " + path + ": shape mismatch for " + name + ": manifest " +
                      Shape(dims).str() + " vs model " + t.shape().str());
    const std::size_t need = offset + static_cast<std::size_t>(t.numel()) * 4;
    if (need > blob.size())
      throw DataError("checkpoint " + path + ": corrupt blob (tensor '" + name +
                      "' overruns blob)");
    const auto* src = reinterpret_cast<const unsigned char*>(blob.data()) + offset;
    for (Index i = 0; i < t.numel(); ++i) t.value()[i] = get_f32le(src + 4 * i);
  }
  return model;
}

}  // namespace gfte
