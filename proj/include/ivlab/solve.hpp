#pragma once

#include <optional>
#include <variant>

#include "ivlab/variation.hpp"

namespace ivlab {

struct SolveConfig {
  Real tolerance = 1e-8;        // residual sup-norm target
  std::int64_t max_iters = 200000;
  enum class StepRule { fixed, barzilai_borwein } step_rule = StepRule::barzilai_borwein;
  Real fixed_step = 1e-3;
  enum class Constraint { none, gl_pair_involution } constraint = Constraint::none;
  std::vector<Real> ladder;  // strictly decreasing epsilons

  void validate(const TorusDomain& dom) const {
    if (!(tolerance > 0)) throw std::invalid_argument("SolveConfig: tolerance must be positive");
    for (size_t i = 1; i < ladder.size(); ++i)
      if (!(ladder[i] < ladder[i - 1]))
        throw std::invalid_argument("SolveConfig: ladder must be strictly decreasing");
    for (Real e : ladder)
      if (!(e >= 2.0 * dom.max_spacing()))
        throw std::invalid_argument("SolveConfig: ladder entry below the 2h guard");
  }
};

struct SolverAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using FieldState = std::variant<ScalarField, GaugePair>;

struct CriticalPoint {
  FieldState state;
  Real residual_sup = 0;
  Real energy = 0;
  std::int64_t iterations = 0;
  SolveConfig::Constraint constraint = SolveConfig::Constraint::none;
};

/// Two opposite unit vortices at half-period offset along axis 0 (scalar
/// model) with tanh core profiles; the phase is generated from an exactly
/// flux-quantised discrete stream function, so local windings are +-1.
ScalarField gl_pair_ansatz(const TorusDomain& dom, Real epsilon, const Point& center_plus);

/// Degree-d section/potential pair: uniform-flux twisted background plus a
/// periodic correction concentrating the flux at one plaquette, tanh profile,
/// parallel-transported phase. bundle_degree(result) == d by construction.
GaugePair ymh_vortex_ansatz(const TorusDomain& dom, Real epsilon, int degree,
                            const Point& center);

/// For 3D runs: extrude a 2D state along axis 2.
ScalarField extrude(const ScalarField& f2, const TorusDomain& dom3);
GaugePair extrude(const GaugePair& p2, const TorusDomain& dom3);

CriticalPoint minimize(const ScalarField& start, const SolveConfig& cfg);
CriticalPoint minimize(const GaugePair& start, const SolveConfig& cfg);

struct ContinuationStage {
  Real epsilon = 0;
  bool skipped = false;   // epsilon below the grid guard
  std::string note;
  std::optional<CriticalPoint> point;
};

/// Warm-started solves along a decreasing epsilon ladder; optional grid per
/// stage (states are transferred by cubic regridding). Topology is checked
/// between stages and a change aborts the stage.
std::vector<ContinuationStage> epsilon_continuation(const FieldState& initial,
                                                    const SolveConfig& cfg,
                                                    const std::vector<TorusDomain>& grids = {});

/// Winding census of a scalar state: plaquette phase circulations / 2 pi.
struct WindingCensus {
  int plus = 0;
  int minus = 0;
  std::vector<Point> zeros;  // plaquette centers carrying nonzero winding
};
WindingCensus winding_census(const ScalarField& f);

}  // namespace ivlab
