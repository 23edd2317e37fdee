#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "breps/embedding.hpp"

namespace breps {

/// Trainable linear map applied to frozen base embeddings: y = M^T v, with M
/// stored row-major as input_dim x output_dim.
class ProjectionHead {
 public:
  ProjectionHead(std::size_t input_dim, std::size_t output_dim);

  /// Rectangular identity (ones on the main diagonal).
  static ProjectionHead identity(std::size_t input_dim, std::size_t output_dim);

  /// Identity plus uniform noise in [-noise, noise], reproducible from `seed`.
  static ProjectionHead near_identity(std::size_t input_dim, std::size_t output_dim,
                                      std::uint64_t seed, double noise = 1e-3);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }

  double at(std::size_t row, std::size_t col) const { return matrix_[row * output_dim_ + col]; }
  double& at(std::size_t row, std::size_t col) { return matrix_[row * output_dim_ + col]; }

  std::span<const double> matrix() const noexcept { return matrix_; }
  std::span<double> matrix() noexcept { return matrix_; }

  std::vector<double> project(std::span<const float> v) const;
  std::vector<double> project(std::span<const double> v) const;

  bool operator==(const ProjectionHead&) const = default;

 private:
  std::size_t input_dim_;
  std::size_t output_dim_;
  std::vector<double> matrix_;
};

inline constexpr std::string_view kHeadMagic = "BREPSPJ1";

struct HeadFile {
  ProjectionHead head;
  std::optional<std::vector<double>> weights;
};

/// "BREPSPJ1" | u32 D_in | u32 D_out | row-major f32 matrix | [u32 k | k f32]
void save_head(const std::filesystem::path& path, const ProjectionHead& head,
               const std::optional<std::vector<double>>& weights = std::nullopt);

HeadFile load_head(const std::filesystem::path& path);

}  // namespace breps
