#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "floq/evolve.hpp"
#include "floq/potential.hpp"
#include "floq/wavepacket.hpp"

namespace floq {

struct TimeGrid {
  double start = 0.0;
  double stop = 100.0;
  int count = 50;
  enum class Spacing { linear, log } spacing = Spacing::linear;

  std::vector<double> materialize() const;
};

struct InitialState {
  enum class Kind { delta, gaussian, file } kind = Kind::delta;
  std::int64_t site = 0;      // delta position / gaussian center
  double width = 5.0;         // gaussian
  double momentum = 0.0;      // gaussian carrier e^{i momentum n}
  double l1 = 1.0;            // packet is normalized to this l1 norm
  std::string path;           // file mode
};

// Parsed and validated run configuration; unknown keys are rejected.
struct RunConfig {
  std::vector<double> potential;
  int lattice_radius = 0;  // 0 = auto from the ballistic cone
  Boundary boundary = Boundary::ring;
  int ring_cells = 0;      // 0 = auto
  TimeGrid times;
  int k_grid = 0;          // 0 = max(1024, 16p)
  double sigma = 6.0;
  int nonlinearity_sign = +1;  // defocusing +1, focusing -1
  InitialState initial;
  std::map<std::string, double> tolerances;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::string digest;      // FNV-1a of the source text

  PeriodicPotential make_potential() const { return PeriodicPotential(potential); }
  WavePacket make_initial() const;
  int effective_k_grid() const;
};

// Throws Error(config_error) with field path and reason on any defect.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

std::uint64_t fnv1a(const std::string& data);

}  // namespace floq
