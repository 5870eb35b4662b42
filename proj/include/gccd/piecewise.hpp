#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace gccd {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pieces narrower than this are absorbed into a neighbour.
constexpr double kSplinterWidth = 1e-12;

// a(m - center)^2 + floor with a >= 0, or +inf everywhere.
//
// Square losses only ever produce parabolas and constants, so the vertex form
// is complete; it also keeps the minimum value exact when thousands of losses
// have been accumulated, where expanded a/b/c coefficients would cancel.
class Quad {
 public:
  Quad() = default;

  static Quad vertex(double curvature, double center, double floor);
  static Quad constant(double value) { return vertex(0.0, 0.0, value); }
  // Expanded form; a == 0 requires b == 0 (linear pieces cannot arise).
  static Quad coefficients(double a, double b, double c);
  static Quad infinite();

  bool finite() const { return finite_; }
  double curvature() const { return a_; }
  double center() const { return x0_; }
  double floor() const { return v0_; }

  double a() const { return a_; }
  double b() const { return -2.0 * a_ * x0_; }
  double c() const { return a_ * x0_ * x0_ + v0_; }

  double operator()(double m) const {
    if (!finite_) return kInf;
    const double d = m - x0_;
    return a_ * d * d + v0_;
  }

  // Leftmost minimiser over [lo, hi].
  double argmin(double lo, double hi) const;

  // (m - y)^2 added.
  Quad plus_loss(double y) const;
  Quad plus(double k) const;
  Quad shifted(double delta) const;  // m -> m - delta
  Quad mirrored() const;             // m -> -m

  friend bool operator==(const Quad& x, const Quad& y);

 private:
  double a_ = 0.0;
  double x0_ = 0.0;
  double v0_ = 0.0;
  bool finite_ = true;
};

// Where a piece's value came from. The dynamic program stores these so the
// optimal means and states can be recovered backwards in time.
struct Origin {
  // 0 means no change (the segment continues); otherwise a graph edge id.
  int edge = 0;
  // The change sits between samples `position` and `position + 1` (1-based).
  std::size_t position = 0;
  // Mean before the change. NaN means it follows the current mean: m - shift.
  double prev_mean = std::numeric_limits<double>::quiet_NaN();
  double shift = 0.0;

  static Origin stay() { return {}; }
  static Origin change(int edge, std::size_t position) { return {edge, position}; }

  bool is_change() const { return edge != 0; }
  double previous_mean(double m) const;
  Origin mirrored() const;

  friend bool operator==(const Origin& x, const Origin& y);
};

struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  Quad f;
  Origin origin;

  bool feasible() const { return f.finite(); }
  friend bool operator==(const Piece&, const Piece&) = default;
};

// Which of two adjacent pieces owns their shared boundary: the one with the
// lower value there; on a tie a feasible piece, then "no change", then the
// lower edge id, then the left piece.
bool right_owns_boundary(const Piece& left, const Piece& right);

enum class Direction { up, down };

struct Minimum {
  double cost;
  double mean;
  Origin origin;
};

// A function of the segment mean over [lo, hi], tiled by quadratic pieces.
// Values are immutable; every operation returns a new function.
class PiecewiseQuad {
 public:
  PiecewiseQuad() = default;
  // Throws std::invalid_argument unless the pieces tile an interval.
  explicit PiecewiseQuad(std::vector<Piece> pieces);

  static PiecewiseQuad single(double lo, double hi, Quad f, Origin origin = {});

  double lo() const { return pieces_.front().lo; }
  double hi() const { return pieces_.back().hi; }
  std::span<const Piece> pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }

  // Index of the piece that owns m; see right_owns_boundary.
  std::size_t locate(double m) const;
  double operator()(double m) const;
  double evaluate(double m) const { return (*this)(m); }

  PiecewiseQuad add_point_loss(double y) const;
  PiecewiseQuad add_constant(double k) const;
  PiecewiseQuad with_origin(const Origin& origin) const;
  // Stamps edge and position on every piece, keeping each piece's argmin locator.
  PiecewiseQuad with_change(int edge, std::size_t position) const;
  PiecewiseQuad mirrored() const;

  // Lowest value and its leftmost mean. Equal values prefer the origin that
  // right_owns_boundary would.
  Minimum global_min() const;

  friend bool operator==(const PiecewiseQuad&, const PiecewiseQuad&) = default;

 private:
  std::vector<Piece> pieces_;
};

// Pointwise minimum; ties go to f.
PiecewiseQuad point_min(const PiecewiseQuad& f, const PiecewiseQuad& g);

// up:   result(m) = min over m' <= m - gap of f(m')
// down: result(m) = min over m' >= m + gap of f(m')
// +inf where no m' in the domain qualifies. Output origins keep the argmin
// piece's origin, with prev_mean/shift locating the argmin relative to m.
PiecewiseQuad min_transform(const PiecewiseQuad& f, Direction direction, double gap);

// Drops splinters and merges adjacent identical pieces.
std::vector<Piece> normalize(std::vector<Piece> pieces);

}  // namespace gccd
