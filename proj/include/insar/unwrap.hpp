#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "insar/raster.hpp"

namespace insar::unwrap {

/// Residue charges on the (width-1) x (height-1) lattice of 2x2 cells. Cell
/// (r, c) has corners (r, c), (r, c+1), (r+1, c+1), (r+1, c).
struct ResidueMap {
  GridMeta meta;
  int cells_w = 0;
  int cells_h = 0;
  std::vector<std::int8_t> charges;
  std::vector<std::uint8_t> defined;  // 0 where a corner pixel is masked

  int charge(int r, int c) const { return charges[static_cast<std::size_t>(r) * cells_w + c]; }
  int count_nonzero() const;
  int net_charge() const;
};

ResidueMap compute_residues(const RealRaster& phase);

/// Which wrapped gradient an arc crosses. Horizontal gradient (r, c) joins
/// pixels (r, c) -> (r, c+1); vertical gradient (r, c) joins (r, c) -> (r+1, c).
enum class EdgeKind : std::uint8_t { Horizontal, Vertical };

struct Arc {
  int from = 0;
  int to = 0;
  std::int64_t cost = 1;
  EdgeKind edge = EdgeKind::Horizontal;
  int edge_row = 0;
  int edge_col = 0;
};

/// Residue cells plus one boundary node (the last node). Horizontal-gradient
/// arcs run from the cell below the gradient to the cell above it; vertical
/// gradient arcs run from the cell right of the gradient to the cell left of
/// it. Off-lattice ends attach to the boundary node.
struct FlowProblem {
  int num_nodes = 0;
  int cells_w = 0;
  int cells_h = 0;
  std::vector<std::int64_t> supplies;
  std::vector<Arc> arcs;

  int boundary_node() const { return num_nodes - 1; }
};

inline constexpr int kCostScale = 100;

/// Interior arc cost round(K (1 - gamma_edge)) + 1 with gamma_edge the mean
/// coherence of the two pixels the gradient joins. Boundary arcs and arcs
/// touching a masked pixel cost 1.
FlowProblem build_flow(const ResidueMap& res, const RealRaster& coherence);

/// Integer minimum-cost flow by successive shortest paths (Dijkstra with
/// potentials). Returns the signed flow per arc (positive: from -> to).
std::vector<std::int64_t> solve_mcf(const FlowProblem& fp);

std::int64_t flow_cost(const FlowProblem& fp, const std::vector<std::int64_t>& flows);

/// Integer 2 pi corrections per wrapped gradient implied by a flow.
struct GradientCorrection {
  int width = 0;
  int height = 0;
  std::vector<std::int64_t> horizontal;  // height x (width-1)
  std::vector<std::int64_t> vertical;    // (height-1) x width
};

GradientCorrection gradient_corrections(const FlowProblem& fp,
                                        const std::vector<std::int64_t>& flows,
                                        const GridMeta& meta);

/// Integrates corrected wrapped gradients by breadth-first flood fill, one
/// seed per connected component (highest coherence when given). Output is
/// congruent to the input modulo 2 pi on every unmasked pixel.
RealRaster integrate_unwrapped(const RealRaster& phase, const GradientCorrection& corr,
                               const RealRaster* coherence = nullptr);

/// Residues, flow network, solve and integrate in one call.
RealRaster unwrap_mcf(const RealRaster& phase, const RealRaster& coherence);

/// Region growing from the highest-coherence unmasked pixel, always
/// extending to the highest-coherence frontier pixel next.
RealRaster unwrap_quality_guided(const RealRaster& phase, const RealRaster& coherence);

/// 4-connected set of unmasked pixels reachable from `seed` (1 = member).
std::vector<std::uint8_t> connected_component(const RealRaster& raster, Pixel seed);

}  // namespace insar::unwrap
