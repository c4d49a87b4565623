#include "dt6d/dataset.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dt6d/errors.hpp"
#include "dt6d/half.hpp"

static_assert(std::endian::native == std::endian::little, "serialization assumes little-endian");

namespace dt6d {

namespace {

constexpr char kMagic[8] = {'D', 'T', '6', 'D', 'D', 'A', 'T', 'A'};
// magic + version/side/channels/pad + count + seed + stats(8 f64) + augment(6 f64)
constexpr size_t kHeaderBytes = 8 + 4 * 4 + 8 + 8 + 8 * 8 + 6 * 8;

void serialize_header(unsigned char* out, const DatasetHeader& h) {
  unsigned char* p = out;
  std::memcpy(p, kMagic, 8);
  p += 8;
  auto put32 = [&p](uint32_t v) { std::memcpy(p, &v, 4); p += 4; };
  auto put64 = [&p](uint64_t v) { std::memcpy(p, &v, 8); p += 8; };
  auto putf = [&p](double v) { std::memcpy(p, &v, 8); p += 8; };
  put32(h.version);
  put32(h.side);
  put32(h.channels);
  put32(0);
  put64(h.count);
  put64(h.seed);
  for (int c = 0; c < 4; ++c) putf(h.stats.mean[c]);
  for (int c = 0; c < 4; ++c) putf(h.stats.stddev[c]);
  putf(h.augment.p_noise);
  putf(h.augment.sigma_lo);
  putf(h.augment.sigma_hi);
  putf(h.augment.p_blur);
  putf(h.augment.p_occluder);
  putf(h.augment.hue_lum_range);
}

DatasetHeader parse_header(const unsigned char* in, const std::string& path) {
  if (std::memcmp(in, kMagic, 8) != 0) throw FormatError("dataset: bad magic: " + path);
  const unsigned char* p = in + 8;
  auto get32 = [&p]() { uint32_t v; std::memcpy(&v, p, 4); p += 4; return v; };
  auto get64 = [&p]() { uint64_t v; std::memcpy(&v, p, 8); p += 8; return v; };
  auto getf = [&p]() { double v; std::memcpy(&v, p, 8); p += 8; return v; };
  DatasetHeader h;
  h.version = get32();
  if (h.version != 1) throw FormatError("dataset: unsupported version: " + path);
  h.side = get32();
  h.channels = get32();
  get32();  // pad
  if (h.channels != 4) throw FormatError("dataset: unsupported channel count: " + path);
  h.count = get64();
  h.seed = get64();
  for (int c = 0; c < 4; ++c) h.stats.mean[c] = getf();
  for (int c = 0; c < 4; ++c) h.stats.stddev[c] = getf();
  h.augment.p_noise = getf();
  h.augment.sigma_lo = getf();
  h.augment.sigma_hi = getf();
  h.augment.p_blur = getf();
  h.augment.p_occluder = getf();
  h.augment.hue_lum_range = getf();
  return h;
}

}  // namespace

size_t DatasetWriter::record_stride(int side) {
  return static_cast<size_t>(side) * side * 4 * 2 * 2 + 6 * sizeof(float);
}

size_t DatasetWriter::header_bytes() { return kHeaderBytes; }

struct DatasetWriter::Impl {
  std::ofstream file;
  DatasetHeader header;
  uint64_t written = 0;
  std::string path;
  std::vector<unsigned char> record_buf;
};

DatasetWriter::DatasetWriter(const std::string& path, const DatasetHeader& header)
    : impl_(std::make_unique<Impl>()) {
  impl_->header = header;
  impl_->path = path;
  impl_->file.open(path, std::ios::binary);
  if (!impl_->file) throw FormatError("dataset: cannot open for writing: " + path);
  unsigned char buf[kHeaderBytes];
  serialize_header(buf, header);
  impl_->file.write(reinterpret_cast<const char*>(buf), kHeaderBytes);
  impl_->record_buf.resize(record_stride(static_cast<int>(header.side)));
}

DatasetWriter::~DatasetWriter() = default;

void DatasetWriter::append(const SamplePair& sample) {
  const int side = static_cast<int>(impl_->header.side);
  const size_t grid = static_cast<size_t>(side) * side * 4;
  if (sample.x_pred.data.size() != grid || sample.x_obs.data.size() != grid)
    throw std::invalid_argument("dataset: sample side mismatch");

  unsigned char* p = impl_->record_buf.data();
  auto put_grid = [&p](const NormalizedInput& input) {
    for (float value : input.data) {
      const uint16_t h = float_to_half(value);
      std::memcpy(p, &h, 2);
      p += 2;
    }
  };
  put_grid(sample.x_pred);
  put_grid(sample.x_obs);
  for (int i = 0; i < 6; ++i) {
    const float y = static_cast<float>(sample.y.y[i]);
    std::memcpy(p, &y, 4);
    p += 4;
  }
  impl_->file.write(reinterpret_cast<const char*>(impl_->record_buf.data()),
                    static_cast<std::streamsize>(impl_->record_buf.size()));
  ++impl_->written;
}

void DatasetWriter::close() {
  impl_->file.flush();
  if (!impl_->file) throw FormatError("dataset: write failure: " + impl_->path);
  if (impl_->written != impl_->header.count)
    throw std::logic_error("dataset: appended " + std::to_string(impl_->written) + " of " +
                           std::to_string(impl_->header.count) + " records");
  impl_->file.close();
}

Dataset Dataset::open(const std::string& path) {
  const int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) throw FormatError("dataset: cannot open: " + path);
  struct stat st{};
  if (fstat(fd, &st) != 0) {
    ::close(fd);
    throw FormatError("dataset: stat failed: " + path);
  }
  const size_t bytes = static_cast<size_t>(st.st_size);
  if (bytes < kHeaderBytes) {
    ::close(fd);
    throw FormatError("dataset: file shorter than header: " + path);
  }
  void* map = mmap(nullptr, bytes, PROT_READ, MAP_PRIVATE, fd, 0);
  ::close(fd);
  if (map == MAP_FAILED) throw FormatError("dataset: mmap failed: " + path);

  Dataset ds;
  ds.map_ = static_cast<const unsigned char*>(map);
  ds.map_bytes_ = bytes;
  try {
    ds.header_ = parse_header(ds.map_, path);
  } catch (...) {
    munmap(map, bytes);
    ds.map_ = nullptr;
    throw;
  }
  const size_t want = kHeaderBytes + ds.header_.count * DatasetWriter::record_stride(static_cast<int>(ds.header_.side));
  if (bytes != want) {
    munmap(map, bytes);
    ds.map_ = nullptr;
    throw FormatError("dataset: truncated or oversized file: " + path);
  }
  return ds;
}

Dataset::~Dataset() {
  if (map_) munmap(const_cast<unsigned char*>(map_), map_bytes_);
}

Dataset::Dataset(Dataset&& o) noexcept
    : header_(o.header_), map_(o.map_), map_bytes_(o.map_bytes_) {
  o.map_ = nullptr;
  o.map_bytes_ = 0;
}

Dataset& Dataset::operator=(Dataset&& o) noexcept {
  if (this != &o) {
    if (map_) munmap(const_cast<unsigned char*>(map_), map_bytes_);
    header_ = o.header_;
    map_ = o.map_;
    map_bytes_ = o.map_bytes_;
    o.map_ = nullptr;
    o.map_bytes_ = 0;
  }
  return *this;
}

void Dataset::load_pair(size_t i, float* x_pred, float* x_obs, float* label) const {
  if (i >= header_.count) throw std::out_of_range("dataset: record index out of range");
  const int side = static_cast<int>(header_.side);
  const size_t grid = static_cast<size_t>(side) * side * 4;
  const unsigned char* p = map_ + kHeaderBytes + i * DatasetWriter::record_stride(side);
  for (size_t j = 0; j < grid; ++j) {
    uint16_t h;
    std::memcpy(&h, p + j * 2, 2);
    x_pred[j] = half_to_float(h);
  }
  p += grid * 2;
  for (size_t j = 0; j < grid; ++j) {
    uint16_t h;
    std::memcpy(&h, p + j * 2, 2);
    x_obs[j] = half_to_float(h);
  }
  p += grid * 2;
  std::memcpy(label, p, 6 * sizeof(float));
}

SamplePair Dataset::sample(size_t i) const {
  const int side = static_cast<int>(header_.side);
  SamplePair s;
  s.x_pred = NormalizedInput(side);
  s.x_obs = NormalizedInput(side);
  float label[6];
  load_pair(i, s.x_pred.data.data(), s.x_obs.data.data(), label);
  for (int j = 0; j < 6; ++j) s.y.y[j] = label[j];
  return s;
}

bool Dataset::validation_split(uint64_t index) {
  uint64_t state = index;
  return splitmix64(state) % 4 == 0;
}

}  // namespace dt6d
