#pragma once

#include <string>

#include "dt6d/nn/network.hpp"
#include "dt6d/normalize.hpp"

namespace dt6d::nn {

/// Model container: header (magic, version, value width, architecture,
/// channel stats) followed by a flat payload of every parameter and batch-
/// norm statistic in enumeration order. Payload byte size is exactly
/// total_count() * sizeof(T).
template <typename T>
void save_model(NetworkParams<T>& params, const ChannelStats& stats, const std::string& path);

template <typename T>
struct LoadedModel {
  NetworkParams<T> params;
  ChannelStats stats;
};

/// Throws FormatError on bad magic/version/width or truncated payload.
template <typename T>
LoadedModel<T> load_model(const std::string& path);

/// load_model plus an architecture check against the expected config.
template <typename T>
LoadedModel<T> load_model_expect(const std::string& path, const NetConfig& expected);

extern template void save_model<float>(NetworkParams<float>&, const ChannelStats&, const std::string&);
extern template void save_model<double>(NetworkParams<double>&, const ChannelStats&, const std::string&);
extern template LoadedModel<float> load_model<float>(const std::string&);
extern template LoadedModel<double> load_model<double>(const std::string&);
extern template LoadedModel<float> load_model_expect<float>(const std::string&, const NetConfig&);
extern template LoadedModel<double> load_model_expect<double>(const std::string&, const NetConfig&);

}  // namespace dt6d::nn
