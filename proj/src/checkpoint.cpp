#include "bcpo/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace bcpo::nd {

using nlohmann::json;

void save_checkpoint(const ParamStore& store, const std::string& stem) {
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + stem + ".bin");
  json manifest;
  manifest["format"] = "bcpo-tensors-v1";
  manifest["tensors"] = json::array();
  long offset = 0;
  for (const Param* p : store.all()) {
    bin.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.numel() * sizeof(double)));
    manifest["tensors"].push_back({{"name", p->name},
                                   {"shape", p->value.shape()},
                                   {"dtype", "f64"},
                                   {"offset", offset},
                                   {"count", p->value.numel()}});
    offset += p->value.numel();
  }
  bin.close();
  std::ofstream mf(stem + ".json");
  if (!mf) throw std::runtime_error("cannot write " + stem + ".json");
  mf << manifest.dump(2) << "\n";
}

void load_checkpoint(ParamStore& store, const std::string& stem) {
  std::ifstream mf(stem + ".json");
  if (!mf) throw std::runtime_error("cannot read " + stem + ".json");
  json manifest = json::parse(mf);
  if (manifest.value("format", "") != "bcpo-tensors-v1")
    throw std::runtime_error("unexpected checkpoint format in " + stem + ".json");
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + stem + ".bin");
  for (const auto& entry : manifest["tensors"]) {
    const std::string name = entry["name"];
    if (!store.contains(name))
      throw std::runtime_error("checkpoint tensor not registered: " + name);
    Param& p = store[name];
    const std::vector<long> shape = entry["shape"];
    if (shape != p.value.shape())
      throw std::runtime_error("checkpoint shape mismatch for " + name);
    const long offset = entry["offset"];
    const long count = entry["count"];
    if (count != p.value.numel())
      throw std::runtime_error("checkpoint count mismatch for " + name);
    bin.seekg(static_cast<std::streamoff>(offset * sizeof(double)));
    bin.read(reinterpret_cast<char*>(p.value.data()),
             static_cast<std::streamsize>(count * sizeof(double)));
    if (!bin) throw std::runtime_error("checkpoint payload truncated for " + name);
  }
}

}  // namespace bcpo::nd
