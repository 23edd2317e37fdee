#include "breps/projection_head.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "breps/error.hpp"

namespace breps {
namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& buf, double v) {
  put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::uint32_t u32() {
    if (pos_ + 4 > bytes_.size()) throw Error(Errc::TruncatedFile, "head file is truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_ + i]);
    pos_ += 4;
    return v;
  }

  double f32() { return std::bit_cast<float>(u32()); }
  bool done() const { return pos_ == bytes_.size(); }
  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw Error(Errc::TruncatedFile, "head file is truncated");
    std::string_view out(bytes_.data() + pos_, n);
    pos_ += n;
    return out;
  }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
std::vector<double> project_impl(std::span<const T> v, std::span<const double> matrix,
                                 std::size_t in, std::size_t out) {
  if (v.size() != in) {
    throw Error(Errc::DimensionMismatch, "projection expects dim " + std::to_string(in) +
                                             ", got " + std::to_string(v.size()));
  }
  std::vector<double> y(out, 0.0);
  for (std::size_t i = 0; i < in; ++i) {
    const double vi = v[i];
    const double* row = matrix.data() + i * out;
    for (std::size_t j = 0; j < out; ++j) y[j] += vi * row[j];
  }
  return y;
}

}  // namespace

ProjectionHead::ProjectionHead(std::size_t input_dim, std::size_t output_dim)
    : input_dim_(input_dim), output_dim_(output_dim), matrix_(input_dim * output_dim, 0.0) {
  if (input_dim == 0 || output_dim == 0) {
    throw Error(Errc::InvalidArgument, "projection head dimensions must be >= 1");
  }
}

ProjectionHead ProjectionHead::identity(std::size_t input_dim, std::size_t output_dim) {
  ProjectionHead head(input_dim, output_dim);
  for (std::size_t i = 0; i < std::min(input_dim, output_dim); ++i) head.at(i, i) = 1.0;
  return head;
}

ProjectionHead ProjectionHead::near_identity(std::size_t input_dim, std::size_t output_dim,
                                             std::uint64_t seed, double noise) {
  ProjectionHead head = identity(input_dim, output_dim);
  std::uint64_t state = seed;
  for (double& x : head.matrix_) {
    // splitmix64
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    const double unit = static_cast<double>(z >> 11) * 0x1.0p-53;
    x += noise * (2.0 * unit - 1.0);
  }
  return head;
}

std::vector<double> ProjectionHead::project(std::span<const float> v) const {
  return project_impl(v, matrix(), input_dim_, output_dim_);
}

std::vector<double> ProjectionHead::project(std::span<const double> v) const {
  return project_impl(v, matrix(), input_dim_, output_dim_);
}

void save_head(const std::filesystem::path& path, const ProjectionHead& head,
               const std::optional<std::vector<double>>& weights) {
  std::string buf(kHeadMagic);
  put_u32(buf, static_cast<std::uint32_t>(head.input_dim()));
  put_u32(buf, static_cast<std::uint32_t>(head.output_dim()));
  for (const double x : head.matrix()) put_f32(buf, x);
  if (weights) {
    put_u32(buf, static_cast<std::uint32_t>(weights->size()));
    for (const double w : *weights) put_f32(buf, w);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(Errc::IoError, "cannot write head file " + path.string());
}

HeadFile load_head(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open head file " + path.string());
  Reader reader{std::string(std::istreambuf_iterator<char>(in), {})};
  if (reader.take(kHeadMagic.size()) != kHeadMagic) {
    throw Error(Errc::BadMagic, path.string() + " is not a BREPSPJ1 head file");
  }
  const std::uint32_t in_dim = reader.u32();
  const std::uint32_t out_dim = reader.u32();
  HeadFile file{ProjectionHead(in_dim, out_dim), std::nullopt};
  for (double& x : file.head.matrix()) {
    x = reader.f32();
    if (!std::isfinite(x)) throw Error(Errc::IoError, "head file holds a non-finite entry");
  }
  if (!reader.done()) {
    const std::uint32_t k = reader.u32();
    std::vector<double> w(k);
    for (double& x : w) x = reader.f32();
    file.weights = std::move(w);
  }
  if (!reader.done()) throw Error(Errc::IoError, "unexpected trailing bytes in head file");
  return file;
}

}  // namespace breps
