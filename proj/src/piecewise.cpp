#include "gccd/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gccd/error.hpp"

namespace gccd {

Quad Quad::vertex(double curvature, double center, double floor) {
  if (!(curvature >= 0.0) || !std::isfinite(curvature) || !std::isfinite(center) ||
      !std::isfinite(floor)) {
    throw std::invalid_argument("quad coefficients must be finite with curvature >= 0");
  }
  Quad q;
  q.a_ = curvature;
  q.x0_ = curvature == 0.0 ? 0.0 : center;
  q.v0_ = floor;
  return q;
}

Quad Quad::coefficients(double a, double b, double c) {
  if (a == 0.0) {
    if (b != 0.0) throw std::invalid_argument("linear quad pieces are not representable");
    return constant(c);
  }
  if (!(a > 0.0)) throw std::invalid_argument("quad curvature must be >= 0");
  const double x0 = -b / (2.0 * a);
  return vertex(a, x0, c - a * x0 * x0);
}

Quad Quad::infinite() {
  Quad q;
  q.finite_ = false;
  return q;
}

double Quad::argmin(double lo, double hi) const {
  if (a_ == 0.0) return lo;
  return std::clamp(x0_, lo, hi);
}

Quad Quad::plus_loss(double y) const {
  if (!finite_) return *this;
  // a(m - x0)^2 + (m - y)^2 = (a + 1)(m - x')^2 + v0 + a/(a + 1) (x0 - y)^2
  const double a1 = a_ + 1.0;
  Quad q;
  q.a_ = a1;
  q.x0_ = (a_ * x0_ + y) / a1;
  const double d = x0_ - y;
  q.v0_ = v0_ + (a_ / a1) * d * d;
  return q;
}

Quad Quad::plus(double k) const {
  if (!finite_) return *this;
  Quad q = *this;
  q.v0_ += k;
  return q;
}

Quad Quad::shifted(double delta) const {
  if (!finite_ || a_ == 0.0) return *this;
  Quad q = *this;
  q.x0_ += delta;
  return q;
}

Quad Quad::mirrored() const {
  if (!finite_ || a_ == 0.0) return *this;
  Quad q = *this;
  q.x0_ = -x0_;
  return q;
}

bool operator==(const Quad& x, const Quad& y) {
  if (x.finite_ != y.finite_) return false;
  if (!x.finite_) return true;
  return x.a_ == y.a_ && x.x0_ == y.x0_ && x.v0_ == y.v0_;
}

double Origin::previous_mean(double m) const {
  return std::isnan(prev_mean) ? m - shift : prev_mean;
}

Origin Origin::mirrored() const {
  Origin o = *this;
  o.prev_mean = -prev_mean;
  o.shift = -shift;
  return o;
}

bool operator==(const Origin& x, const Origin& y) {
  const bool same_mean =
      (std::isnan(x.prev_mean) && std::isnan(y.prev_mean)) || x.prev_mean == y.prev_mean;
  return x.edge == y.edge && x.position == y.position && same_mean && x.shift == y.shift;
}

namespace {

// Strict preference between origins of equal value.
bool preferred(const Origin& a, const Origin& b) {
  if (a.edge == 0 || b.edge == 0) return a.edge == 0 && b.edge != 0;
  return a.edge < b.edge;
}

}  // namespace

bool right_owns_boundary(const Piece& left, const Piece& right) {
  if (!right.feasible()) return false;
  if (!left.feasible()) return true;
  const double vl = left.f(left.hi);
  const double vr = right.f(right.lo);
  if (vr != vl) return vr < vl;
  return preferred(right.origin, left.origin);
}

std::vector<Piece> normalize(std::vector<Piece> pieces) {
  std::vector<Piece> out;
  out.reserve(pieces.size());
  bool pending = false;
  double pending_lo = 0.0;
  for (Piece& p : pieces) {
    if (pending) {
      p.lo = pending_lo;
      pending = false;
    }
    if (p.hi - p.lo < kSplinterWidth) {
      // Prefer handing the sliver to a feasible neighbour.
      if (!out.empty() && (out.back().feasible() || !p.feasible())) {
        out.back().hi = p.hi;
      } else {
        pending = true;
        pending_lo = p.lo;
      }
      continue;
    }
    if (!out.empty() && out.back().f == p.f && out.back().origin == p.origin) {
      out.back().hi = p.hi;
      continue;
    }
    out.push_back(p);
  }
  if (pending) {
    if (out.empty()) {
      Piece last = pieces.back();
      last.lo = pending_lo;
      out.push_back(last);
    } else {
      out.back().hi = pieces.back().hi;
    }
  }
  return out;
}

PiecewiseQuad::PiecewiseQuad(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw std::invalid_argument("piecewise function needs at least one piece");
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const Piece& p = pieces_[k];
    if (!(p.lo < p.hi) || !std::isfinite(p.lo) || !std::isfinite(p.hi)) {
      throw std::invalid_argument("piece " + std::to_string(k) + " has an empty or non-finite interval");
    }
    if (k > 0 && pieces_[k - 1].hi != p.lo) {
      throw std::invalid_argument("pieces do not tile the domain at piece " + std::to_string(k));
    }
  }
}

PiecewiseQuad PiecewiseQuad::single(double lo, double hi, Quad f, Origin origin) {
  return PiecewiseQuad({Piece{lo, hi, f, origin}});
}

std::size_t PiecewiseQuad::locate(double m) const {
  if (!(m >= lo() && m <= hi())) {
    throw std::domain_error("mean " + std::to_string(m) + " outside [" + std::to_string(lo()) +
                            ", " + std::to_string(hi()) + "]");
  }
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), m,
                             [](const Piece& p, double x) { return p.hi < x; });
  auto k = static_cast<std::size_t>(it - pieces_.begin());
  if (k + 1 < pieces_.size() && m == pieces_[k].hi && right_owns_boundary(pieces_[k], pieces_[k + 1])) ++k;
  return k;
}

double PiecewiseQuad::operator()(double m) const { return pieces_[locate(m)].f(m); }

PiecewiseQuad PiecewiseQuad::add_point_loss(double y) const {
  PiecewiseQuad out = *this;
  for (Piece& p : out.pieces_) p.f = p.f.plus_loss(y);
  return out;
}

PiecewiseQuad PiecewiseQuad::add_constant(double k) const {
  if (!(k >= 0.0) || !std::isfinite(k)) {
    throw std::invalid_argument("added constant must be finite and >= 0");
  }
  PiecewiseQuad out = *this;
  for (Piece& p : out.pieces_) p.f = p.f.plus(k);
  return out;
}

PiecewiseQuad PiecewiseQuad::with_origin(const Origin& origin) const {
  std::vector<Piece> pieces = pieces_;
  for (Piece& p : pieces) p.origin = origin;
  return PiecewiseQuad(normalize(std::move(pieces)));
}

PiecewiseQuad PiecewiseQuad::with_change(int edge, std::size_t position) const {
  std::vector<Piece> pieces = pieces_;
  for (Piece& p : pieces) {
    p.origin.edge = edge;
    p.origin.position = position;
  }
  return PiecewiseQuad(normalize(std::move(pieces)));
}

PiecewiseQuad PiecewiseQuad::mirrored() const {
  std::vector<Piece> pieces;
  pieces.reserve(pieces_.size());
  for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
    pieces.push_back(Piece{-it->hi, -it->lo, it->f.mirrored(), it->origin.mirrored()});
  }
  return PiecewiseQuad(std::move(pieces));
}

Minimum PiecewiseQuad::global_min() const {
  Minimum best{kInf, 0.0, {}};
  for (const Piece& p : pieces_) {
    if (!p.feasible()) continue;
    const double x = p.f.argmin(p.lo, p.hi);
    const double v = p.f(x);
    if (v < best.cost || (v == best.cost && preferred(p.origin, best.origin))) best = {v, x, p.origin};
  }
  if (best.cost == kInf) throw InfeasibleError("cost function is +inf over its whole domain");
  return best;
}

namespace {

// f - g on an interval, expanded around its midpoint s: A u^2 + B u + C, u = m - s.
struct Difference {
  double A, B, C, s;

  Difference(const Quad& f, const Quad& g, double s) : s(s) {
    const double p1 = f.center() - s;
    const double p2 = g.center() - s;
    const double a1 = f.curvature();
    const double a2 = g.curvature();
    A = a1 - a2;
    B = -2.0 * (a1 * p1 - a2 * p2);
    C = a1 * p1 * p1 - a2 * p2 * p2 + (f.floor() - g.floor());
  }

  double operator()(double m) const {
    const double u = m - s;
    return (A * u + B) * u + C;
  }

  // Sign changes strictly inside (lo, hi), ascending.
  std::vector<double> crossings(double lo, double hi) const {
    std::vector<double> roots;
    if (A == 0.0) {
      if (B != 0.0) roots.push_back(s - C / B);
    } else {
      const double disc = B * B - 4.0 * A * C;
      if (disc > 0.0) {
        const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
        roots.push_back(s + q / A);
        if (q != 0.0) roots.push_back(s + C / q);
      }
    }
    std::vector<double> inside;
    for (double r : roots) {
      if (r > lo && r < hi) inside.push_back(r);
    }
    std::sort(inside.begin(), inside.end());
    return inside;
  }
};

void push_min(std::vector<Piece>& out, double lo, double hi, const Piece& pf, const Piece& pg) {
  if (!pg.feasible()) {
    out.push_back({lo, hi, pf.f, pf.origin});
    return;
  }
  if (!pf.feasible()) {
    out.push_back({lo, hi, pg.f, pg.origin});
    return;
  }
  const Difference d(pf.f, pg.f, 0.5 * (lo + hi));
  std::vector<double> cuts = d.crossings(lo, hi);
  cuts.insert(cuts.begin(), lo);
  cuts.push_back(hi);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    double diff = d(0.5 * (a + b));
    // A zero at the midpoint can be a tangency; look at the quartiles instead.
    if (diff == 0.0) diff = d(a + 0.25 * (b - a)) + d(a + 0.75 * (b - a));
    const Piece& win = diff <= 0.0 ? pf : pg;
    out.push_back({a, b, win.f, win.origin});
  }
}

}  // namespace

PiecewiseQuad point_min(const PiecewiseQuad& f, const PiecewiseQuad& g) {
  if (f.lo() != g.lo() || f.hi() != g.hi()) {
    throw std::invalid_argument("point_min requires functions on the same domain");
  }
  const auto fp = f.pieces();
  const auto gp = g.pieces();
  std::vector<Piece> out;
  out.reserve(fp.size() + gp.size() + 2);
  std::size_t i = 0;
  std::size_t j = 0;
  double cur = f.lo();
  while (i < fp.size() && j < gp.size()) {
    const double end = std::min(fp[i].hi, gp[j].hi);
    if (end > cur) push_min(out, cur, end, fp[i], gp[j]);
    cur = end;
    if (fp[i].hi == end) ++i;
    if (gp[j].hi == end) ++j;
  }
  return PiecewiseQuad(normalize(std::move(out)));
}

namespace {

// Running minimum R(x) = min over m' <= x of f(m'), leftmost argmin.
std::vector<Piece> running_min(const PiecewiseQuad& f, double gap) {
  std::vector<Piece> out;
  out.reserve(f.size() * 3);
  double best = kInf;
  double best_at = 0.0;
  Origin best_origin;

  auto emit_best = [&](double lo, double hi) {
    if (best == kInf) {
      out.push_back({lo, hi, Quad::infinite(), {}});
      return;
    }
    Origin o = best_origin;
    o.prev_mean = best_at;
    o.shift = 0.0;
    out.push_back({lo, hi, Quad::constant(best), o});
  };

  for (const Piece& p : f.pieces()) {
    if (!p.feasible()) {
      emit_best(p.lo, p.hi);
      continue;
    }
    const double xv = p.f.argmin(p.lo, p.hi);
    const double qmin = p.f(xv);
    if (!(qmin < best)) {
      emit_best(p.lo, p.hi);
      continue;
    }
    double enter = p.lo;
    if (best != kInf && p.f(p.lo) > best) {
      // Left root of q(x) = best; the quad is strictly convex here.
      const double r = p.f.center() - std::sqrt((best - p.f.floor()) / p.f.curvature());
      enter = std::clamp(r, p.lo, xv);
    }
    if (enter > p.lo) emit_best(p.lo, enter);
    if (xv > enter) {
      Origin o = p.origin;
      o.prev_mean = std::numeric_limits<double>::quiet_NaN();
      o.shift = gap;
      out.push_back({enter, xv, p.f, o});
    }
    best = qmin;
    best_at = xv;
    best_origin = p.origin;
    if (p.hi > xv) emit_best(xv, p.hi);
  }
  return out;
}

}  // namespace

PiecewiseQuad min_transform(const PiecewiseQuad& f, Direction direction, double gap) {
  if (!(gap >= 0.0) || !std::isfinite(gap)) {
    throw std::invalid_argument("gap must be finite and >= 0");
  }
  if (direction == Direction::down) return min_transform(f.mirrored(), Direction::up, gap).mirrored();

  const double lo = f.lo();
  const double hi = f.hi();
  if (lo + gap >= hi) return PiecewiseQuad::single(lo, hi, Quad::infinite());

  std::vector<Piece> out;
  if (gap > 0.0) out.push_back({lo, lo + gap, Quad::infinite(), {}});
  for (Piece p : running_min(f, gap)) {
    p.lo += gap;
    if (p.lo >= hi) break;
    p.hi = std::min(p.hi + gap, hi);
    p.f = p.f.shifted(gap);
    out.push_back(p);
  }
  out.back().hi = hi;
  return PiecewiseQuad(normalize(std::move(out)));
}

}  // namespace gccd
