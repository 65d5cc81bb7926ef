#include <fstream>

#include <json.hpp>

#include "tsre/dmrg.hpp"
#include "tsre/errors.hpp"

namespace tsre {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void save_checkpoint(const MatrixProductState& mps, const CheckpointInfo& info,
                     const std::filesystem::path& stem) {
  nlohmann::json meta;
  meta["format"] = "tsre-mps";
  meta["version"] = 1;
  meta["n_sites"] = mps.n_sites();
  meta["canonical_center"] = mps.canonical_center;
  meta["seed"] = info.seed;
  meta["realization_index"] = info.realization_index;
  meta["sweep_log"] = info.sweep_log;
  nlohmann::json shapes = nlohmann::json::array();

  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw ResourceError("cannot open " + with_suffix(stem, ".bin").string());
  for (const auto& site : mps.tensors) {
    shapes.push_back({site[0].rows(), site[0].cols()});
    for (const Matrix& m : site)
      bin.write(reinterpret_cast<const char*>(m.data()),
                static_cast<std::streamsize>(m.size() * sizeof(Complex)));
  }
  meta["shapes"] = shapes;
  if (!bin) throw ResourceError("write failed for " + with_suffix(stem, ".bin").string());

  std::ofstream js(with_suffix(stem, ".json"));
  if (!js) throw ResourceError("cannot open " + with_suffix(stem, ".json").string());
  js << meta.dump(2) << '\n';
}

MatrixProductState load_checkpoint(const std::filesystem::path& stem, CheckpointInfo* info) {
  std::ifstream js(with_suffix(stem, ".json"));
  if (!js) throw ResourceError("cannot open " + with_suffix(stem, ".json").string());
  const nlohmann::json meta = nlohmann::json::parse(js);
  if (meta.value("format", "") != "tsre-mps") throw ShapeError("not an MPS checkpoint");

  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw ResourceError("cannot open " + with_suffix(stem, ".bin").string());
  MatrixProductState mps;
  mps.canonical_center = meta.at("canonical_center").get<int>();
  for (const auto& shape : meta.at("shapes")) {
    const auto rows = shape.at(0).get<Eigen::Index>();
    const auto cols = shape.at(1).get<Eigen::Index>();
    std::array<Matrix, 2> site;
    for (Matrix& m : site) {
      m.resize(rows, cols);
      bin.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(Complex)));
    }
    if (!bin) throw ShapeError("checkpoint data shorter than its manifest");
    mps.tensors.push_back(std::move(site));
  }
  if (static_cast<int>(mps.tensors.size()) != meta.at("n_sites").get<int>())
    throw ShapeError("checkpoint site count mismatch");
  if (info) {
    info->seed = meta.at("seed").get<std::uint64_t>();
    info->realization_index = meta.at("realization_index").get<std::uint64_t>();
    info->sweep_log = meta.at("sweep_log").get<std::vector<double>>();
  }
  return mps;
}

}  // namespace tsre
