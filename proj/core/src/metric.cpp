#include "symco/metric.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace symco {

StepPath::StepPath(double horizon, std::vector<double> times, std::vector<double> values)
    : horizon_(horizon), times_(std::move(times)), values_(std::move(values)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw std::invalid_argument("StepPath: horizon must be positive");
  if (times_.empty() || times_.size() != values_.size())
    throw std::invalid_argument("StepPath: times and values must be non-empty and of equal length");
  if (times_.front() != 0.0) throw std::invalid_argument("StepPath: first time must be 0");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw std::invalid_argument("StepPath: times must be strictly increasing");
  if (times_.back() > horizon_) throw std::invalid_argument("StepPath: time beyond horizon");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("StepPath: non-finite value");
}

StepPath StepPath::constant(double horizon, double value) { return StepPath(horizon, {0.0}, {value}); }

double StepPath::value_at(double t) const {
  if (t < 0.0 || t > horizon_) throw std::out_of_range("StepPath::value_at: time outside [0, T]");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

std::vector<double> StepPath::jump_times() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (values_[i] != values_[i - 1]) out.push_back(times_[i]);
  return out;
}

Srt::Srt(double horizon, std::vector<std::pair<double, double>> knots) : horizon_(horizon), knots_(std::move(knots)) {
  if (knots_.size() < 2 || knots_.front() != std::make_pair(0.0, 0.0) ||
      knots_.back() != std::make_pair(horizon_, horizon_))
    throw std::invalid_argument("Srt: knots must start at (0,0) and end at (T,T)");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].first > knots_[i - 1].first) || !(knots_[i].second > knots_[i - 1].second))
      throw std::invalid_argument("Srt: knots must be strictly increasing in both coordinates");
  }
}

Srt Srt::identity(double horizon) { return Srt(horizon, {{0.0, 0.0}, {horizon, horizon}}); }

double Srt::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= horizon_) return horizon_;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double v, const std::pair<double, double>& k) { return v < k.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  return lo.second + (t - lo.first) * (hi.second - lo.second) / (hi.first - lo.first);
}

Srt Srt::inverse() const {
  std::vector<std::pair<double, double>> k;
  k.reserve(knots_.size());
  for (const auto& [a, b] : knots_) k.emplace_back(b, a);
  return Srt(horizon_, std::move(k));
}

double Srt::sup_deviation() const {
  double d = 0.0;
  for (const auto& [a, b] : knots_) d = std::max(d, std::abs(a - b));
  return d;
}

ExclusionSet::ExclusionSet(std::vector<std::pair<double, double>> intervals) : intervals_(std::move(intervals)) {
  std::sort(intervals_.begin(), intervals_.end());
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (!(intervals_[i].second > intervals_[i].first)) throw std::invalid_argument("ExclusionSet: empty interval");
    if (i > 0 && intervals_[i].first < intervals_[i - 1].second)
      throw std::invalid_argument("ExclusionSet: intervals overlap");
  }
}

double ExclusionSet::measure() const {
  double m = 0.0;
  for (const auto& [a, b] : intervals_) m += b - a;
  return m;
}

bool ExclusionSet::contains(double t) const {
  const auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                                   [](double v, const std::pair<double, double>& iv) { return v < iv.first; });
  if (it == intervals_.begin()) return false;
  return t < (it - 1)->second;
}

double DLambdaTerms::value() const { return std::max({kept_mismatch, time_deviation, excluded_measure, final_gap}); }

namespace {

void require_same_horizon(const StepPath& x, const StepPath& y) {
  if (x.horizon() != y.horizon()) throw std::invalid_argument("paths have different horizons");
}

struct Segment {
  double a, b, mismatch;
};

// |x(t) - y(f(t))| on [0, T) as constant pieces.
std::vector<Segment> mismatch_profile(const StepPath& x, const StepPath& y, const Srt& f) {
  const double T = x.horizon();
  const Srt finv = f.inverse();
  std::vector<double> cuts{0.0, T};
  for (double t : x.times())
    if (t < T) cuts.push_back(t);
  for (double t : y.times())
    if (t < T) cuts.push_back(finv(t));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Segment> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    const double m = std::abs(x.value_at(mid) - y.value_at(f(mid)));
    if (!out.empty() && out.back().mismatch == m) {
      out.back().b = b;
    } else {
      out.push_back({a, b, m});
    }
  }
  return out;
}

// Values of a path on [t_i, t_{i+1}) for the jump times strictly inside (0, T).
struct JumpView {
  std::vector<double> times;   // jump times in (0, T)
  std::vector<double> values;  // values[i] holds on [times[i-1], times[i]), values[0] from 0
};

JumpView jump_view(const StepPath& p) {
  JumpView v;
  v.values.push_back(p.values().front());
  for (std::size_t i = 1; i < p.times().size(); ++i) {
    if (p.times()[i] >= p.horizon()) break;
    if (p.values()[i] == v.values.back()) continue;
    v.times.push_back(p.times()[i]);
    v.values.push_back(p.values()[i]);
  }
  return v;
}

// sup |x - y(f)| on [u0, u1) where f is linear from (u0, v0) to (u1, v1);
// x holds values xv[ix0..ix1] and y holds yv[iy0..iy1] across the interval.
double segment_mismatch(const JumpView& x, const JumpView& y, std::size_t ix0, std::size_t ix1, std::size_t iy0,
                        std::size_t iy1, double u0, double u1, double v0, double v1) {
  double best = 0.0;
  std::size_t i = ix0, j = iy0;
  const double slope = (u1 - u0) / (v1 - v0);
  while (true) {
    best = std::max(best, std::abs(x.values[i] - y.values[j]));
    if (i == ix1 && j == iy1) break;
    // next breakpoints: x jump at x.times[i], y jump mapped back
    const double nx = i < ix1 ? x.times[i] : INFINITY;
    const double ny = j < iy1 ? u0 + (y.times[j] - v0) * slope : INFINITY;
    if (nx < ny) {
      ++i;
    } else if (ny < nx) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return best;
}

}  // namespace

double uniform_distance(const StepPath& x, const StepPath& y) {
  require_same_horizon(x, y);
  double d = std::abs(x.final_value() - y.final_value());
  for (const auto& s : mismatch_profile(x, y, Srt::identity(x.horizon()))) d = std::max(d, s.mismatch);
  return d;
}

J1Result j1_match(const StepPath& x, const StepPath& y, std::size_t budget) {
  require_same_horizon(x, y);
  const double T = x.horizon();
  const JumpView xv = jump_view(x);
  const JumpView yv = jump_view(y);
  const std::size_t p = xv.times.size();
  const std::size_t q = yv.times.size();
  const double final_gap = std::abs(x.final_value() - y.final_value());
  const double id_cost = uniform_distance(x, y);
  const bool unlimited = p <= 12 && q <= 12;
  const std::size_t window = unlimited ? std::max(p, q) + 1 : 5;

  // candidate pairs (1-based): |a_i - b_j| must beat the identity cost
  struct Cand {
    double gap;
    std::size_t i, j;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 1; i <= p; ++i)
    for (std::size_t j = 1; j <= q; ++j) {
      const double gap = std::abs(xv.times[i - 1] - yv.times[j - 1]);
      if (gap < id_cost) cands.push_back({gap, i, j});
    }
  bool restricted = false;
  if (cands.size() > budget) {
    restricted = true;
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.gap < b.gap; });
    cands.resize(budget);
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });

  const std::size_t S = cands.size();
  std::vector<double> best(S, INFINITY);
  std::vector<long> pred(S, -2);  // -1 means start
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  for (std::size_t s = 0; s < S; ++s) index[{cands[s].i, cands[s].j}] = s;

  auto knot_x = [&](std::size_t i) { return i == 0 ? 0.0 : (i == p + 1 ? T : xv.times[i - 1]); };
  auto knot_y = [&](std::size_t j) { return j == 0 ? 0.0 : (j == q + 1 ? T : yv.times[j - 1]); };
  // edge from knot (i0, j0) to (i1, j1); x values ix in [i0, i1-1], y values in [j0, j1-1]
  auto edge = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
    const double u0 = knot_x(i0), u1 = knot_x(i1), v0 = knot_y(j0), v1 = knot_y(j1);
    return std::max(std::abs(u1 - v1), segment_mismatch(xv, yv, i0, i1 - 1, j0, j1 - 1, u0, u1, v0, v1));
  };

  double incumbent = std::max(id_cost, final_gap);
  for (std::size_t s = 0; s < S; ++s) {
    const auto [gap, i, j] = cands[s];
    if (gap >= incumbent) continue;
    if (i - 1 < window && j - 1 < window) {
      best[s] = edge(0, 0, i, j);
      pred[s] = -1;
    }
    const std::size_t ilo = i > window ? i - window : 1;
    const std::size_t jlo = j > window ? j - window : 1;
    for (std::size_t pi = ilo; pi < i; ++pi) {
      for (std::size_t pj = jlo; pj < j; ++pj) {
        const auto it = index.find({pi, pj});
        if (it == index.end()) continue;
        const std::size_t ps = it->second;
        if (best[ps] >= best[s]) continue;
        const double c = std::max(best[ps], edge(pi, pj, i, j));
        if (c < best[s]) {
          best[s] = c;
          pred[s] = static_cast<long>(ps);
        }
      }
    }
  }
  long end_pred = -1;
  double end_cost = incumbent;
  for (std::size_t s = 0; s < S; ++s) {
    const auto [gap, i, j] = cands[s];
    if (!(best[s] < end_cost)) continue;
    if (p - i >= window || q - j >= window) continue;
    const double c = std::max({best[s], edge(i, j, p + 1, q + 1), final_gap});
    if (c < end_cost) {
      end_cost = c;
      end_pred = static_cast<long>(s);
    }
  }
  std::vector<std::pair<double, double>> knots{{T, T}};
  for (long s = end_pred; s >= 0; s = pred[s]) knots.emplace_back(knot_x(cands[s].i), knot_y(cands[s].j));
  knots.emplace_back(0.0, 0.0);
  std::reverse(knots.begin(), knots.end());
  J1Result r;
  r.distance = end_cost;
  r.f = Srt(T, std::move(knots));
  r.exact = p == q && unlimited && !restricted;
  return r;
}

double j1_distance(const StepPath& x, const StepPath& y, std::size_t budget) { return j1_match(x, y, budget).distance; }

DLambdaTerms evaluate_dlambda_terms(const StepPath& x, const StepPath& y, const ExclusionSet& kept, const Srt& f) {
  require_same_horizon(x, y);
  const double T = x.horizon();
  if (f.horizon() != T) throw std::invalid_argument("evaluate_dlambda_terms: SRT horizon mismatch");
  for (const auto& [a, b] : kept.intervals())
    if (a < 0.0 || b > T) throw std::invalid_argument("evaluate_dlambda_terms: A outside [0, T]");
  std::vector<double> pts{0.0, T};
  for (double t : x.times()) pts.push_back(t);
  const Srt finv = f.inverse();
  for (double t : y.times()) pts.push_back(finv(t));
  for (const auto& [a, b] : kept.intervals()) {
    pts.push_back(a);
    pts.push_back(b);
  }
  std::sort(pts.begin(), pts.end());
  DLambdaTerms terms;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i]) || pts[i] >= T) continue;
    const double mid = 0.5 * (pts[i] + std::min(pts[i + 1], T));
    if (!kept.contains(mid)) continue;
    terms.kept_mismatch = std::max(terms.kept_mismatch, std::abs(x.value_at(mid) - y.value_at(f(mid))));
  }
  terms.time_deviation = f.sup_deviation();
  terms.excluded_measure = std::max(0.0, T - kept.measure());
  terms.final_gap = std::abs(x.final_value() - y.final_value());
  return terms;
}

DLambdaResult d_lambda_for_f(const StepPath& x, const StepPath& y, const Srt& f) {
  require_same_horizon(x, y);
  const auto segs = mismatch_profile(x, y, f);
  const double fixed = std::max(f.sup_deviation(), std::abs(x.final_value() - y.final_value()));
  std::vector<double> levels;
  for (const auto& s : segs) levels.push_back(s.mismatch);
  levels.push_back(0.0);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  // keep segments with mismatch <= theta
  double best_value = INFINITY;
  double best_theta = levels.front();
  for (double theta : levels) {
    double excluded = 0.0;
    double kept_max = 0.0;
    for (const auto& s : segs) {
      if (s.mismatch > theta) {
        excluded += s.b - s.a;
      } else {
        kept_max = std::max(kept_max, s.mismatch);
      }
    }
    const double v = std::max({kept_max, excluded, fixed});
    if (v < best_value) {
      best_value = v;
      best_theta = theta;
    }
  }
  std::vector<std::pair<double, double>> kept;
  for (const auto& s : segs) {
    if (s.mismatch > best_theta) continue;
    if (!kept.empty() && kept.back().second == s.a) {
      kept.back().second = s.b;
    } else {
      kept.emplace_back(s.a, s.b);
    }
  }
  DLambdaResult r;
  r.witness.kept = ExclusionSet(std::move(kept));
  r.witness.f = f;
  r.terms = evaluate_dlambda_terms(x, y, r.witness.kept, f);
  r.bound = r.terms.value();
  return r;
}

DLambdaResult d_lambda_upper(const StepPath& x, const StepPath& y, std::size_t budget, std::span<const Srt> hints) {
  require_same_horizon(x, y);
  const double T = x.horizon();
  DLambdaResult best;
  best.bound = INFINITY;
  auto consider = [&](const StepPath& a, const StepPath& b, const Srt& f, bool swapped) {
    DLambdaResult r = d_lambda_for_f(a, b, f);
    r.witness.swapped = swapped;
    if (r.bound < best.bound) best = std::move(r);
  };
  // both directions are always searched, so the bound is symmetric
  auto search = [&](const StepPath& a, const StepPath& b, bool swapped) {
    consider(a, b, Srt::identity(T), swapped);
    consider(a, b, j1_match(a, b, budget).f, swapped);
    for (const auto& h : hints) {
      consider(a, b, h, swapped);
      consider(a, b, h.inverse(), swapped);
    }
  };
  search(x, y, false);
  search(y, x, true);
  return best;
}

std::vector<NamedTestFunction> default_test_functions(double horizon) {
  const double w = 2.0 * std::numbers::pi / horizon;
  auto clip = [](double v) { return std::clamp(v, 0.0, 1.0); };
  std::vector<NamedTestFunction> out;
  out.push_back({"v", [](double, double v) { return v; }, [](double s, double v) { return s * v; }});
  out.push_back({"v^2", [](double, double v) { return v * v; }, [](double s, double v) { return s * v * v; }});
  out.push_back({"v^3", [](double, double v) { return v * v * v; }, [](double s, double v) { return s * v * v * v; }});
  out.push_back({"s*v", [](double s, double v) { return s * v; }, [](double s, double v) { return 0.5 * s * s * v; }});
  out.push_back({"s^2*v", [](double s, double v) { return s * s * v; },
                 [](double s, double v) { return s * s * s * v / 3.0; }});
  out.push_back({"s*v^2", [](double s, double v) { return s * v * v; },
                 [](double s, double v) { return 0.5 * s * s * v * v; }});
  out.push_back({"sin(ws)*clip(v)", [=](double s, double v) { return std::sin(w * s) * clip(v); },
                 [=](double s, double v) { return (1.0 - std::cos(w * s)) / w * clip(v); }});
  out.push_back({"cos(ws)*clip(v)", [=](double s, double v) { return std::cos(w * s) * clip(v); },
                 [=](double s, double v) { return std::sin(w * s) / w * clip(v); }});
  return out;
}

std::vector<double> convergence_in_measure_stat(const StepPath& x, const StepPath& y,
                                                std::span<const NamedTestFunction> tests) {
  require_same_horizon(x, y);
  const double T = x.horizon();
  auto integral = [T](const StepPath& p, const NamedTestFunction& g) {
    double total = 0.0;
    const auto& ts = p.times();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double a = ts[i];
      const double b = i + 1 < ts.size() ? ts[i + 1] : T;
      if (b > a) total += g.primitive(b, p.values()[i]) - g.primitive(a, p.values()[i]);
    }
    return total;
  };
  std::vector<double> out;
  for (const auto& g : tests) out.push_back(std::abs(integral(x, g) - integral(y, g)));
  out.push_back(std::abs(x.final_value() - y.final_value()));
  return out;
}

void write_path_csv(std::ostream& out, const StepPath& p) {
  out << std::setprecision(17);
  out << "# horizon=" << p.horizon() << '\n' << "time,value\n";
  for (std::size_t i = 0; i < p.times().size(); ++i) out << p.times()[i] << ',' << p.values()[i] << '\n';
}

StepPath read_path_csv(std::istream& in) {
  std::string line;
  double horizon = NAN;
  std::vector<double> times, values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# horizon=", 0) == 0) {
      horizon = std::stod(line.substr(10));
      continue;
    }
    if (line[0] == '#' || line.rfind("time", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("read_path_csv: malformed row: " + line);
    times.push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (std::isnan(horizon)) throw std::invalid_argument("read_path_csv: missing '# horizon=' header");
  return StepPath(horizon, std::move(times), std::move(values));
}

}  // namespace symco
