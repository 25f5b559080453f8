#include "fpclust/draws_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fpclust/error.hpp"
#include "fpclust/hash.hpp"

namespace fpclust {

static_assert(std::endian::native == std::endian::little, "draw files are little-endian");

namespace {

namespace fs = std::filesystem;
using Index = Eigen::Index;

template <class T>
void append(std::string& buffer, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buffer.append(bytes, sizeof(T));
}

template <class T>
T extract(const std::string& buffer, std::size_t& offset) {
  if (offset + sizeof(T) > buffer.size()) throw FormatError("draw file is truncated");
  T value;
  std::memcpy(&value, buffer.data() + offset, sizeof(T));
  offset += sizeof(T);
  return value;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

struct Block {
  const char* name;
  const char* dtype;
  // shape of one snapshot
  std::vector<Index> shape;
};

std::vector<Block> blocks(Index n, Index k, Index j) {
  return {{"xi", "f64", {n, k}},  {"c", "i32", {n, k}},     {"mu", "f64", {j, k}},
          {"s", "f64", {j, k}},   {"p_raw", "f64", {j, k}}, {"p", "f64", {j, k}},
          {"alpha", "f64", {k}},  {"tau", "f64", {}}};
}

void encode(const McmcState& s, const std::string& block, std::string& buffer) {
  auto matrix = [&](const Matrix& m) {
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) append<double>(buffer, m(r, c));
  };
  if (block == "xi") matrix(s.xi);
  else if (block == "c") {
    for (Index r = 0; r < s.c.rows(); ++r)
      for (Index c = 0; c < s.c.cols(); ++c) append<std::int32_t>(buffer, s.c(r, c) + 1);
  } else if (block == "mu") matrix(s.mu);
  else if (block == "s") matrix(s.s);
  else if (block == "p_raw") matrix(s.p_raw);
  else if (block == "p") matrix(s.p);
  else if (block == "alpha") {
    for (Index k = 0; k < s.alpha.size(); ++k) append<double>(buffer, s.alpha(k));
  } else if (block == "tau") append<double>(buffer, s.tau);
}

void decode(McmcState& s, const std::string& block, const std::string& buffer, std::size_t& offset) {
  auto matrix = [&](Matrix& m) {
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = extract<double>(buffer, offset);
  };
  if (block == "xi") matrix(s.xi);
  else if (block == "c") {
    for (Index r = 0; r < s.c.rows(); ++r)
      for (Index c = 0; c < s.c.cols(); ++c) s.c(r, c) = extract<std::int32_t>(buffer, offset) - 1;
  } else if (block == "mu") matrix(s.mu);
  else if (block == "s") matrix(s.s);
  else if (block == "p_raw") matrix(s.p_raw);
  else if (block == "p") matrix(s.p);
  else if (block == "alpha") {
    for (Index k = 0; k < s.alpha.size(); ++k) s.alpha(k) = extract<double>(buffer, offset);
  } else if (block == "tau") s.tau = extract<double>(buffer, offset);
}

}  // namespace

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const nlohmann::json& j, const fs::path& path) { write_file(path, j.dump(2) + "\n"); }

nlohmann::json save_draws(const PosteriorDraws& draws, const fs::path& dir) {
  fs::create_directories(dir);
  const Index n = draws.n;
  const Index k = draws.model.k();
  const Index j = draws.model.clusters();

  nlohmann::json files = nlohmann::json::array();
  std::string combined;
  for (std::size_t chain = 0; chain < draws.chains.size(); ++chain) {
    const auto& snaps = draws.chains[chain];
    for (const auto& block : blocks(n, k, j)) {
      std::string buffer;
      for (const auto& s : snaps) encode(s, block.name, buffer);
      const std::string file =
          "chain" + std::to_string(chain) + "_" + block.name + "." + block.dtype;
      write_file(dir / file, buffer);
      const std::string hash = git_blob_hash(buffer);
      combined += hash;
      std::vector<Index> shape{static_cast<Index>(snaps.size())};
      shape.insert(shape.end(), block.shape.begin(), block.shape.end());
      files.push_back({{"chain", chain},
                       {"block", block.name},
                       {"path", file},
                       {"dtype", block.dtype},
                       {"shape", shape},
                       {"sha1", hash}});
    }
  }

  nlohmann::json manifest{
      {"schema", "fpclust.posterior_draws"},
      {"schema_version", kDrawsSchemaVersion},
      {"model", to_json(draws.model)},
      {"mcmc", to_json(draws.mcmc)},
      {"seed", draws.mcmc.seed},
      {"thinning", draws.mcmc.thinning},
      {"dimensions",
       {{"n", n},
        {"time_points", draws.time_points},
        {"K", k},
        {"J", j},
        {"chains", draws.chains.size()},
        {"snapshots_per_chain", draws.chains.empty() ? 0 : draws.chains.front().size()}}},
      {"label_base", 1},
      {"files", files},
      {"draws_hash", git_blob_hash(combined)},
  };
  write_json(manifest, dir / "manifest.json");
  // Kept out of the manifest so that reruns produce identical manifests.
  write_json({{"wall_seconds", draws.wall_seconds}}, dir / "timing.json");
  return manifest;
}

PosteriorDraws load_draws(const fs::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  if (manifest.value("schema", "") != "fpclust.posterior_draws")
    throw FormatError(dir.string() + " does not hold posterior draws");
  if (manifest.at("schema_version").get<int>() != kDrawsSchemaVersion)
    throw FormatError("unsupported draws schema version " +
                      manifest.at("schema_version").dump());

  PosteriorDraws draws;
  draws.model = model_config_from_json(manifest.at("model"));
  draws.mcmc = mcmc_config_from_json(manifest.at("mcmc"));
  if (fs::exists(dir / "timing.json")) draws.wall_seconds = read_json(dir / "timing.json").value("wall_seconds", 0.0);
  const auto& dims = manifest.at("dimensions");
  draws.n = dims.at("n").get<Index>();
  draws.time_points = dims.at("time_points").get<Index>();
  const Index k = dims.at("K").get<Index>();
  const Index j = dims.at("J").get<Index>();
  const auto chains = dims.at("chains").get<std::size_t>();
  if (k != draws.model.k() || j != draws.model.clusters())
    throw FormatError("draws manifest dimensions disagree with its model");

  draws.chains.resize(chains);
  for (const auto& entry : manifest.at("files")) {
    const auto chain = entry.at("chain").get<std::size_t>();
    const auto block = entry.at("block").get<std::string>();
    const auto snapshots = entry.at("shape").at(0).get<std::size_t>();
    if (chain >= chains) throw FormatError("draws manifest references an unknown chain");
    const std::string buffer = read_file(dir / entry.at("path").get<std::string>());
    if (git_blob_hash(buffer) != entry.at("sha1").get<std::string>())
      throw FormatError("hash mismatch for " + entry.at("path").get<std::string>());
    auto& snaps = draws.chains[chain];
    if (snaps.empty()) {
      McmcState blank;
      blank.xi.resize(draws.n, k);
      blank.c.resize(draws.n, k);
      blank.mu.resize(j, k);
      blank.s.resize(j, k);
      blank.p_raw.resize(j, k);
      blank.p.resize(j, k);
      blank.alpha.resize(k);
      snaps.assign(snapshots, blank);
    } else if (snaps.size() != snapshots) {
      throw FormatError("parameter blocks of one chain hold different snapshot counts");
    }
    std::size_t offset = 0;
    for (auto& s : snaps) decode(s, block, buffer, offset);
    if (offset != buffer.size()) throw FormatError("draw file has trailing bytes");
  }
  return draws;
}

}  // namespace fpclust
