#pragma once

#include <vector>

#include "diamond/system.hpp"
#include "diamond/types.hpp"

namespace diamond {

/// Uniform periodic diamond mesh on [a,b]: N diamonds per level, each of
/// width dx = (b-a)/N and height dt; lambda = dt/dx.
struct MeshParams {
  int N = 0;
  double a = 0.0, b = 0.0;
  double dx = 0.0, dt = 0.0, lambda = 0.0;
  int r = 1;
};

/// dt is derived as lambda * dx and lambda re-stored as dt/dx so the
/// invariant holds to machine precision.
MeshParams make_mesh(int N, double a, double b, double lambda, int r);

/// K and L mapped to the unit-square coordinates:
/// K_tilde = K/dt - L/dx, L_tilde = K/dt + L/dx. Both stay skew.
struct TransformedCoeffs {
  Mat K_tilde, L_tilde;
};

TransformedCoeffs transform_coeffs(const MultiHamiltonianSystem& sys,
                                   const MeshParams& params);

enum class Edge { left, bottom, right, top };

struct NodeXT {
  double x, t;
};

/// Physical coordinates of an edge node. The diamond d at level j has its
/// bottom corner at x = a + (d + (j mod 2)/2) dx, t = j dt/2; the square
/// edge parameter c_k maps back through the inverse of the square
/// transform: x = x_corner + dx/2 (xt - tt), t = t_corner + dt/2 (xt + tt)
/// with (xt, tt) on the unit square. x is wrapped into [a, b).
/// stage runs over 1..r.
NodeXT square_coords(const MeshParams& params, const Vec& c, long level,
                     int diamond, Edge edge, int stage);

/// Same, addressed by zig-zag slot: slot 0 is the bottom corner, slots
/// 1..r the lower-left (square left) edge, slots r+1..2r the lower-right
/// (square bottom) edge.
NodeXT node_coords(const MeshParams& params, const Vec& c, long level,
                   int diamond, int slot);

/// One zig-zag level of edge data: N diamonds times (2r+1) state vectors,
/// laid out per diamond as [corner, left 1..r, bottom 1..r]. Read-only
/// during a half-step; each diamond writes disjoint slots of the next
/// state.
struct ZigzagState {
  long level = 0;
  int N = 0, r = 0, n = 0;
  std::vector<Vec> values;

  int stride() const { return 2 * r + 1; }
  Vec& at(int d, int slot) { return values[static_cast<size_t>(d) * stride() + slot]; }
  const Vec& at(int d, int slot) const {
    return values[static_cast<size_t>(d) * stride() + slot];
  }
};

ZigzagState make_zigzag(long level, int N, int r, int n);

/// What one diamond produces in a half-step: its right and top edges plus
/// the two corner candidates (corner_right = z_r^0 at the physical right
/// corner, corner_top = z_t_0 at the physical left corner).
struct DiamondOutput {
  std::vector<Vec> right, top;
  Vec corner_right, corner_top;
};

/// Builds the level j+1 zig-zag from the level-j outputs. For even j the
/// next diamond d takes its left edge from diamond d's right edge and its
/// bottom edge from diamond (d+1) mod N's top edge; for odd j from
/// diamonds (d-1) mod N and d respectively (the periodic extension
/// alternates sides between half-steps). Slot 0 becomes the mean of the
/// two corner candidates meeting at the shared corner.
ZigzagState advance_reindex(const std::vector<DiamondOutput>& outputs,
                            const MeshParams& params, long input_level);

}  // namespace diamond
