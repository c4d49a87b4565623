#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "dt6d/augment.hpp"
#include "dt6d/normalize.hpp"
#include "dt6d/pose.hpp"

namespace dt6d {

/// One training example: normalized predicted/observed inputs plus the
/// scaled delta label.
struct SamplePair {
  NormalizedInput x_pred;
  NormalizedInput x_obs;
  Label6 y;
};

struct DatasetHeader {
  uint32_t version = 1;
  uint32_t side = 0;
  uint32_t channels = 4;
  uint64_t count = 0;
  uint64_t seed = 0;
  ChannelStats stats;
  AugmentConfig augment;
};

/// Chunked binary container: fixed header, then `count` records of two
/// side*side*4 half-precision grids and six float32 labels.
class DatasetWriter {
public:
  DatasetWriter(const std::string& path, const DatasetHeader& header);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void append(const SamplePair& sample);
  /// Flushes and verifies exactly header.count records were appended.
  void close();

  static size_t record_stride(int side);
  static size_t header_bytes();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Memory-mapped read-only dataset.
class Dataset {
public:
  static Dataset open(const std::string& path);
  Dataset() = default;
  ~Dataset();
  Dataset(Dataset&&) noexcept;
  Dataset& operator=(Dataset&&) noexcept;
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;

  const DatasetHeader& header() const { return header_; }
  size_t size() const { return static_cast<size_t>(header_.count); }

  /// Expands record i into float buffers: x_pred/x_obs of side*side*4, label of 6.
  void load_pair(size_t i, float* x_pred, float* x_obs, float* label) const;
  SamplePair sample(size_t i) const;

  /// Deterministic 75/25 split keyed on the record index alone, so the
  /// assignment is stable across files and runs.
  static bool validation_split(uint64_t index);
  bool is_validation(size_t i) const { return validation_split(i); }

private:
  DatasetHeader header_;
  const unsigned char* map_ = nullptr;
  size_t map_bytes_ = 0;
};

}  // namespace dt6d
