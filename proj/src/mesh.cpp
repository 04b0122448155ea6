#include "diamond/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace diamond {

MeshParams make_mesh(int N, double a, double b, double lambda, int r) {
  if (N < 1) throw std::invalid_argument("make_mesh: N must be >= 1");
  if (!(b > a)) throw std::invalid_argument("make_mesh: need b > a");
  if (!(lambda > 0.0)) throw std::invalid_argument("make_mesh: lambda must be > 0");
  if (r < 1) throw std::invalid_argument("make_mesh: r must be >= 1");
  MeshParams p;
  p.N = N;
  p.a = a;
  p.b = b;
  p.r = r;
  p.dx = (b - a) / N;
  p.dt = lambda * p.dx;
  p.lambda = p.dt / p.dx;
  return p;
}

TransformedCoeffs transform_coeffs(const MultiHamiltonianSystem& sys,
                                   const MeshParams& params) {
  TransformedCoeffs out;
  out.K_tilde = sys.K / params.dt - sys.L / params.dx;
  out.L_tilde = sys.K / params.dt + sys.L / params.dx;
  return out;
}

namespace {

double wrap_x(double x, const MeshParams& p) {
  double width = p.b - p.a;
  double y = std::fmod(x - p.a, width);
  if (y < 0.0) y += width;
  return p.a + y;
}

NodeXT from_square(const MeshParams& p, long level, int diamond, double xt,
                   double tt) {
  double corner_x = p.a + (diamond + (level % 2 ? 0.5 : 0.0)) * p.dx;
  double corner_t = level * p.dt / 2.0;
  NodeXT node;
  node.x = wrap_x(corner_x + 0.5 * p.dx * (xt - tt), p);
  node.t = corner_t + 0.5 * p.dt * (xt + tt);
  return node;
}

}  // namespace

NodeXT square_coords(const MeshParams& params, const Vec& c, long level,
                     int diamond, Edge edge, int stage) {
  if (diamond < 0 || diamond >= params.N)
    throw std::out_of_range("square_coords: diamond index out of range");
  if (stage < 1 || stage > c.size())
    throw std::out_of_range("square_coords: stage out of range");
  double ck = c[stage - 1];
  switch (edge) {
    case Edge::left:
      return from_square(params, level, diamond, 0.0, ck);
    case Edge::bottom:
      return from_square(params, level, diamond, ck, 0.0);
    case Edge::right:
      return from_square(params, level, diamond, 1.0, ck);
    case Edge::top:
      return from_square(params, level, diamond, ck, 1.0);
  }
  throw std::logic_error("square_coords: bad edge");
}

NodeXT node_coords(const MeshParams& params, const Vec& c, long level,
                   int diamond, int slot) {
  const int r = static_cast<int>(c.size());
  if (slot == 0) return from_square(params, level, diamond, 0.0, 0.0);
  if (slot <= r) return square_coords(params, c, level, diamond, Edge::left, slot);
  if (slot <= 2 * r)
    return square_coords(params, c, level, diamond, Edge::bottom, slot - r);
  throw std::out_of_range("node_coords: slot out of range");
}

ZigzagState make_zigzag(long level, int N, int r, int n) {
  ZigzagState s;
  s.level = level;
  s.N = N;
  s.r = r;
  s.n = n;
  s.values.assign(static_cast<size_t>(N) * (2 * r + 1), Vec::Zero(n));
  return s;
}

ZigzagState advance_reindex(const std::vector<DiamondOutput>& outputs,
                            const MeshParams& params, long input_level) {
  const int N = params.N;
  if (static_cast<int>(outputs.size()) != N)
    throw std::invalid_argument("advance_reindex: expected one output per diamond");
  const int r = static_cast<int>(outputs[0].right.size());
  const int n = static_cast<int>(outputs[0].right[0].size());
  ZigzagState next = make_zigzag(input_level + 1, N, r, n);

  const bool even = (input_level % 2) == 0;
  for (int d = 0; d < N; ++d) {
    int from_right = even ? d : (d - 1 + N) % N;  // supplies the new left edge
    int from_top = even ? (d + 1) % N : d;        // supplies the new bottom edge
    next.at(d, 0) =
        0.5 * (outputs[from_right].corner_right + outputs[from_top].corner_top);
    for (int k = 1; k <= r; ++k) {
      next.at(d, k) = outputs[from_right].right[k - 1];
      next.at(d, r + k) = outputs[from_top].top[k - 1];
    }
  }
  return next;
}

}  // namespace diamond
