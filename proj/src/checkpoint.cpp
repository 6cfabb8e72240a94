#include "trackforge/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace trackforge {
namespace {

constexpr char kParamsMagic[8] = {'T', 'F', 'N', 'E', 'T', '\0', '\r', '\n'};
constexpr char kAdamMagic[8] = {'T', 'F', 'A', 'D', 'A', 'M', '\r', '\n'};
constexpr std::uint32_t kMaxLayerSize = 1u << 24;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  void tensor(const std::vector<double>& v) {
    for (double x : v) put(x);
  }
  std::string finish() {
    const std::uint64_t sum = fnv1a64(out_.data(), out_.size());
    put(sum);
    return std::move(out_);
  }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& origin, const char* magic)
      : bytes_(bytes), origin_(origin) {
    if (bytes_.size() < 8 + sizeof(std::uint64_t)) fail("file too short");
    if (std::memcmp(bytes_.data(), magic, 8) != 0) fail("bad magic");
    const std::size_t body = bytes_.size() - sizeof(std::uint64_t);
    std::uint64_t stored;
    std::memcpy(&stored, bytes_.data() + body, sizeof(stored));
    if (stored != fnv1a64(bytes_.data(), body)) fail("checksum mismatch");
    end_ = body;
    pos_ = 8;
  }

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > end_) fail("truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::vector<double> tensor(std::size_t n) {
    if (n > (end_ - pos_) / sizeof(double)) fail("truncated tensor");
    std::vector<double> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  void expect_end() {
    if (pos_ != end_) fail("trailing bytes");
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::kMalformedFile, origin_ + ": " + why);
  }
  const std::string& origin() const { return origin_; }

 private:
  const std::string& bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

void put_shape(Writer& w, const GradientSet& g) {
  w.put(static_cast<std::uint32_t>(g.w.size()));
  for (std::size_t i = 0; i < g.w.size(); ++i) {
    w.put(static_cast<std::uint64_t>(g.w[i].size()));
    w.put(static_cast<std::uint64_t>(g.b[i].size()));
  }
  w.put(static_cast<std::uint64_t>(g.log_std.size()));
}

void put_tensors(Writer& w, const GradientSet& g) {
  for (std::size_t i = 0; i < g.w.size(); ++i) {
    w.tensor(g.w[i]);
    w.tensor(g.b[i]);
  }
  w.tensor(g.log_std);
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string serialize_params(const MlpParams& p) {
  Writer w;
  w.raw(kParamsMagic, 8);
  w.put(kCheckpointVersion);
  const auto sizes = p.layer_sizes();
  w.put(static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) w.put(static_cast<std::uint32_t>(s));
  w.put(static_cast<std::uint32_t>(p.hidden));
  w.put(p.hidden_gain);
  w.put(p.output_gain);
  w.put(static_cast<std::uint32_t>(p.log_std.size()));
  for (const auto& l : p.layers) {
    w.tensor(l.w);
    w.tensor(l.b);
  }
  w.tensor(p.log_std);
  return w.finish();
}

MlpParams parse_params(const std::string& bytes, const std::string& origin) {
  Reader r(bytes, origin, kParamsMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                origin + ": checkpoint version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }
  const auto count = r.get<std::uint32_t>();
  if (count < 2 || count > 64) r.fail("bad layer count");
  std::vector<int> sizes(count);
  for (auto& s : sizes) {
    const auto v = r.get<std::uint32_t>();
    if (v == 0 || v > kMaxLayerSize) r.fail("bad layer size");
    s = static_cast<int>(v);
  }
  MlpParams p;
  const auto act = r.get<std::uint32_t>();
  if (act > 1) r.fail("unknown activation tag");
  p.hidden = static_cast<Activation>(act);
  p.hidden_gain = r.get<double>();
  p.output_gain = r.get<double>();
  const auto log_std_size = r.get<std::uint32_t>();
  if (log_std_size != 0 && log_std_size != static_cast<std::uint32_t>(sizes.back())) {
    r.fail("log_std size does not match the output size");
  }
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer l;
    l.in = sizes[k];
    l.out = sizes[k + 1];
    l.w = r.tensor(static_cast<std::size_t>(l.in) * l.out);
    l.b = r.tensor(l.out);
    p.layers.push_back(std::move(l));
  }
  p.log_std = r.tensor(log_std_size);
  r.expect_end();
  return p;
}

std::string serialize_adam(const AdamState& s) {
  Writer w;
  w.raw(kAdamMagic, 8);
  w.put(kCheckpointVersion);
  w.put(s.step);
  w.put(s.beta1);
  w.put(s.beta2);
  w.put(s.eps);
  put_shape(w, s.m);
  put_tensors(w, s.m);
  put_tensors(w, s.v);
  return w.finish();
}

AdamState parse_adam(const std::string& bytes, const std::string& origin) {
  Reader r(bytes, origin, kAdamMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, origin + ": optimizer state version mismatch");
  }
  AdamState s;
  s.step = r.get<std::int64_t>();
  s.beta1 = r.get<double>();
  s.beta2 = r.get<double>();
  s.eps = r.get<double>();
  const auto layers = r.get<std::uint32_t>();
  if (layers > 64) r.fail("bad layer count");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> shape(layers);
  for (auto& [w, b] : shape) {
    w = r.get<std::uint64_t>();
    b = r.get<std::uint64_t>();
  }
  const auto ls = r.get<std::uint64_t>();
  for (GradientSet* g : {&s.m, &s.v}) {
    for (const auto& [w, b] : shape) {
      g->w.push_back(r.tensor(w));
      g->b.push_back(r.tensor(b));
    }
    g->log_std = r.tensor(ls);
  }
  r.expect_end();
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp + ": " + ec.message());
}

void save_params(const MlpParams& p, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_params(p));
}

MlpParams load_params(const std::filesystem::path& path) {
  return parse_params(read_file(path), path.string());
}

void save_adam(const AdamState& s, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_adam(s));
}

AdamState load_adam(const std::filesystem::path& path) {
  return parse_adam(read_file(path), path.string());
}

}  // namespace trackforge
