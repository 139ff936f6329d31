#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "tgp/grid.hpp"

namespace tgp {

struct Crater {
  double row = 0.0;     // center, in cells
  double col = 0.0;
  double radius = 1.0;  // in cells
};

struct SynthParams {
  std::size_t size = 128;
  double cellsize = 1.0;
  // Power spectrum of the fractal base falls off as |k|^-roughness.
  double roughness = 3.0;
  // Standard deviation of the fractal base in meters; 0 disables it.
  double amplitude = 2.0;
  std::size_t craters = 8;
  double min_radius = 3.0;
  double max_radius = 12.0;
  // Bowl depth as a fraction of crater diameter.
  double depth_ratio = 0.15;
  // Rim height as a fraction of bowl depth.
  double rim_fraction = 0.25;
  // Placed in addition to the `craters` random ones.
  std::vector<Crater> fixed_craters;
  double sun_azimuth = 135.0;
  double sun_elevation = 20.0;
  double var_dark = 0.1;
  double var_lit = 0.01;
  std::uint64_t seed = 0;

  // Throws kInvalidConfig.
  void validate() const;
};

DemGrid synth_terrain(const SynthParams& params);

// Lambertian shading in [0, 1]. Azimuth is clockwise from north.
DemGrid hillshade(const DemGrid& dem, double azimuth_deg, double elevation_deg);

DemGrid shadow_uncertainty(const DemGrid& shade, double var_dark, double var_lit);

// Western half (columns < ncols / 2) gets var_left, the rest var_right.
DemGrid split_uncertainty(const DemGrid& like, double var_left, double var_right);

DemGrid inject_noise(const DemGrid& dem, const DemGrid& var_grid, std::uint64_t seed);

enum class NoiseMode { kShadow, kSplit };

NoiseMode parse_noise_mode(std::string_view name);

struct SyntheticScene {
  DemGrid truth;        // full resolution, noise free
  DemGrid dem;          // truth plus injected noise
  DemGrid train;        // dem decimated by 2
  DemGrid uncertainty;  // noise variance on the train grid
  DemGrid prior;        // truth decimated by 5
};

inline constexpr std::size_t kTrainFactor = 2;
inline constexpr std::size_t kPriorFactor = 5;

// kSplit puts var_lit on the western half and var_dark on the eastern half.
SyntheticScene make_scene(const SynthParams& params, NoiseMode mode = NoiseMode::kShadow);

}  // namespace tgp
