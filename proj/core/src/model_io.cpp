#include "dt6d/nn/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dt6d/errors.hpp"

static_assert(std::endian::native == std::endian::little, "serialization assumes little-endian");

namespace dt6d::nn {

namespace {

constexpr char kMagic[8] = {'D', 'T', '6', 'D', 'M', 'O', 'D', 'L'};
constexpr uint32_t kVersion = 1;

template <typename V>
void put(std::ofstream& f, const V& value) {
  f.write(reinterpret_cast<const char*>(&value), sizeof(V));
}

template <typename V>
V get(std::ifstream& f, const std::string& path) {
  V value;
  f.read(reinterpret_cast<char*>(&value), sizeof(V));
  if (!f) throw FormatError("model: truncated file: " + path);
  return value;
}

void write_config(std::ofstream& f, const NetConfig& cfg) {
  put<int32_t>(f, cfg.input_side);
  put<int32_t>(f, cfg.in_channels);
  put<int32_t>(f, cfg.branch_filters);
  put<int32_t>(f, cfg.branch_kernel);
  put<int32_t>(f, cfg.trunk_filters);
  put<int32_t>(f, cfg.trunk_kernel);
  put<int32_t>(f, cfg.trunk_blocks);
  put<int32_t>(f, cfg.fc_units);
  put<int32_t>(f, cfg.out_units);
  put<double>(f, cfg.bn_momentum);
  put<double>(f, cfg.bn_eps);
  put<double>(f, cfg.dropout_keep);
}

NetConfig read_config(std::ifstream& f, const std::string& path) {
  NetConfig cfg;
  cfg.input_side = get<int32_t>(f, path);
  cfg.in_channels = get<int32_t>(f, path);
  cfg.branch_filters = get<int32_t>(f, path);
  cfg.branch_kernel = get<int32_t>(f, path);
  cfg.trunk_filters = get<int32_t>(f, path);
  cfg.trunk_kernel = get<int32_t>(f, path);
  cfg.trunk_blocks = get<int32_t>(f, path);
  cfg.fc_units = get<int32_t>(f, path);
  cfg.out_units = get<int32_t>(f, path);
  cfg.bn_momentum = get<double>(f, path);
  cfg.bn_eps = get<double>(f, path);
  cfg.dropout_keep = get<double>(f, path);
  return cfg;
}

}  // namespace

template <typename T>
void save_model(NetworkParams<T>& params, const ChannelStats& stats, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("model: cannot open for writing: " + path);
  f.write(kMagic, 8);
  put<uint32_t>(f, kVersion);
  put<uint32_t>(f, sizeof(T));
  write_config(f, params.cfg);
  for (int c = 0; c < 4; ++c) put<double>(f, stats.mean[c]);
  for (int c = 0; c < 4; ++c) put<double>(f, stats.stddev[c]);
  put<uint64_t>(f, params.total_count());

  auto dump = [&f](const std::string&, std::span<T> span) {
    f.write(reinterpret_cast<const char*>(span.data()),
            static_cast<std::streamsize>(span.size() * sizeof(T)));
  };
  params.for_each_trainable(dump);
  params.for_each_state(dump);
  if (!f) throw FormatError("model: short write: " + path);
}

template <typename T>
LoadedModel<T> load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("model: cannot open: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0) throw FormatError("model: bad magic: " + path);
  if (get<uint32_t>(f, path) != kVersion) throw FormatError("model: unsupported version: " + path);
  if (get<uint32_t>(f, path) != sizeof(T))
    throw FormatError("model: value width mismatch (expected " + std::to_string(sizeof(T)) +
                      " bytes): " + path);
  const NetConfig cfg = read_config(f, path);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model: invalid architecture: ") + e.what());
  }

  LoadedModel<T> model;
  for (int c = 0; c < 4; ++c) model.stats.mean[c] = get<double>(f, path);
  for (int c = 0; c < 4; ++c) model.stats.stddev[c] = get<double>(f, path);
  const uint64_t count = get<uint64_t>(f, path);

  model.params = NetworkParams<T>::initialized(cfg, 0);
  if (count != model.params.total_count())
    throw FormatError("model: payload count does not match architecture: " + path);
  auto slurp = [&f, &path](const std::string&, std::span<T> span) {
    f.read(reinterpret_cast<char*>(span.data()),
           static_cast<std::streamsize>(span.size() * sizeof(T)));
    if (!f) throw FormatError("model: truncated payload: " + path);
  };
  model.params.for_each_trainable(slurp);
  model.params.for_each_state(slurp);
  return model;
}

template <typename T>
LoadedModel<T> load_model_expect(const std::string& path, const NetConfig& expected) {
  LoadedModel<T> model = load_model<T>(path);
  if (!(model.params.cfg == expected))
    throw FormatError("model: architecture mismatch (input side " +
                      std::to_string(model.params.cfg.input_side) + " vs expected " +
                      std::to_string(expected.input_side) + "): " + path);
  return model;
}

template void save_model<float>(NetworkParams<float>&, const ChannelStats&, const std::string&);
template void save_model<double>(NetworkParams<double>&, const ChannelStats&, const std::string&);
template LoadedModel<float> load_model<float>(const std::string&);
template LoadedModel<double> load_model<double>(const std::string&);
template LoadedModel<float> load_model_expect<float>(const std::string&, const NetConfig&);
template LoadedModel<double> load_model_expect<double>(const std::string&, const NetConfig&);

}  // namespace dt6d::nn
