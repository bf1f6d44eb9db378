#include "vclock/time_change.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "vclock/errors.hpp"

namespace vclock {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_num(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError("time change '" + key + "': cannot parse '" + s + "'");
  return v;
}

}  // namespace

TimeChangeFn TimeChangeFn::identity() { return TimeChangeFn(); }

TimeChangeFn TimeChangeFn::linear(double a1) {
  if (!(a1 > 0.0) || !std::isfinite(a1)) throw ConfigError("linear time change: a1 must be > 0");
  TimeChangeFn f;
  f.kind_ = Kind::Linear;
  f.a1_ = a1;
  f.growth_ = a1;
  return f;
}

TimeChangeFn TimeChangeFn::linear_plus_quadratic(double a1, double a2) {
  if (!(a1 >= 0.0) || !(a2 >= 0.0) || !(a1 + a2 > 0.0) || !std::isfinite(a1 + a2))
    throw ConfigError("quadratic time change: need a1, a2 >= 0 and a1 + a2 > 0");
  TimeChangeFn f;
  f.kind_ = Kind::LinearPlusQuadratic;
  f.a1_ = a1;
  f.a2_ = a2;
  f.growth_ = std::max(a1, 2.0 * a2);
  return f;
}

TimeChangeFn TimeChangeFn::power(double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("power time change: p must lie in [1, 2]");
  TimeChangeFn f;
  f.kind_ = Kind::Power;
  f.p_ = p;
  f.growth_ = p;
  return f;
}

TimeChangeFn TimeChangeFn::tabulated(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("tabulated time change: need >= 2 matching points");
  if (x[0] != 0.0 || y[0] != 0.0) throw ConfigError("tabulated time change: must start at (0, 0)");
  double growth = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw ConfigError("tabulated time change: x must be strictly increasing");
    if (!(y[i] >= y[i - 1])) throw ConfigError("tabulated time change: y must be non-decreasing");
    growth = std::max(growth, (y[i] - y[i - 1]) / (x[i] - x[i - 1]));
  }
  if (!(y.back() > y[y.size() - 2])) throw ConfigError("tabulated time change: last piece must be increasing");
  TimeChangeFn f;
  f.kind_ = Kind::Tabulated;
  f.growth_ = growth;
  f.xs_ = std::make_shared<const std::vector<double>>(std::move(x));
  f.ys_ = std::make_shared<const std::vector<double>>(std::move(y));
  return f;
}

double TimeChangeFn::operator()(double x) const {
  if (!(x >= 0.0)) {
    if (x > -1e-300) return 0.0;
    throw DomainError("time change: x must be >= 0");
  }
  switch (kind_) {
    case Kind::Identity:
      return x;
    case Kind::Linear:
      return a1_ * x;
    case Kind::LinearPlusQuadratic:
      return x * (a1_ + a2_ * x);
    case Kind::Power:
      return std::pow(x, p_);
    case Kind::Tabulated: {
      const auto& xs = *xs_;
      const auto& ys = *ys_;
      std::size_t i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
      i = std::min(std::max<std::size_t>(i, 1), xs.size() - 1);
      const double slope = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
      return ys[i - 1] + slope * (x - xs[i - 1]);
    }
  }
  return x;
}

double TimeChangeFn::derivative(double x) const {
  switch (kind_) {
    case Kind::Identity:
      return 1.0;
    case Kind::Linear:
      return a1_;
    case Kind::LinearPlusQuadratic:
      return a1_ + 2.0 * a2_ * x;
    case Kind::Power:
      return p_ == 1.0 ? 1.0 : p_ * std::pow(x, p_ - 1.0);
    case Kind::Tabulated: {
      const auto& xs = *xs_;
      const auto& ys = *ys_;
      std::size_t i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
      i = std::min(std::max<std::size_t>(i, 1), xs.size() - 1);
      return (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
    }
  }
  return 1.0;
}

double TimeChangeFn::inverse(double y) const {
  if (!(y > 0.0)) return 0.0;
  switch (kind_) {
    case Kind::Identity:
      return y;
    case Kind::Linear:
      return y / a1_;
    case Kind::LinearPlusQuadratic:
      if (a2_ == 0.0) return y / a1_;
      // positive root of a2 x^2 + a1 x - y, written without cancellation
      return 2.0 * y / (a1_ + std::sqrt(a1_ * a1_ + 4.0 * a2_ * y));
    case Kind::Power:
      return std::pow(y, 1.0 / p_);
    case Kind::Tabulated: {
      const auto& xs = *xs_;
      const auto& ys = *ys_;
      // first node with ys >= y, then step back into the piece that reaches y
      std::size_t i = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y) - ys.begin());
      if (i >= ys.size()) {
        const std::size_t n = xs.size();
        const double slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return xs[n - 1] + (y - ys[n - 1]) / slope;
      }
      if (ys[i] == y) return xs[i];
      return xs[i - 1] + (y - ys[i - 1]) * (xs[i] - xs[i - 1]) / (ys[i] - ys[i - 1]);
    }
  }
  return y;
}

double TimeChangeFn::quadratic_part() const {
  if (kind_ == Kind::LinearPlusQuadratic) return a2_;
  if (kind_ == Kind::Power && p_ == 2.0) return 1.0;
  return 0.0;
}

double TimeChangeFn::solve_crossing(double c1, double c2, double c3, double lo, double hi) const {
  if (!(hi >= lo)) throw DomainError("solve_crossing: empty bracket");
  double x = std::nan("");
  if (affine() || (kind_ == Kind::LinearPlusQuadratic && a2_ == 0.0)) {
    const double slope = c1 - c2 * a1_;
    if (slope > 0.0) x = c3 / slope;
  } else if (kind_ == Kind::LinearPlusQuadratic) {
    // -c2 a2 x^2 + (c1 - c2 a1) x - c3 = 0
    const double A = -c2 * a2_, B = c1 - c2 * a1_, C = -c3;
    if (A == 0.0) {
      if (B > 0.0) x = c3 / B;
    } else {
      const double disc = B * B - 4.0 * A * C;
      if (disc >= 0.0) {
        const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
        const double r1 = q / A, r2 = q != 0.0 ? C / q : r1;
        const double slack = 1e-12 * (1.0 + std::abs(hi));
        double best = std::nan("");
        for (double r : {r1, r2})
          if (r >= lo - slack && r <= hi + slack && !(r >= best)) best = r;
        x = best;
      }
    }
  }
  if (std::isnan(x) || x < lo - 1e-9 * (1.0 + std::abs(hi)) || x > hi + 1e-9 * (1.0 + std::abs(hi))) {
    auto h = [&](double v) { return c1 * v - c2 * (*this)(v) - c3; };
    const double glo = h(lo), ghi = h(hi);
    if (!(glo < 0.0)) return lo;
    if (!(ghi >= 0.0)) return hi;
    std::uintmax_t iters = 100;
    auto r = boost::math::tools::toms748_solve(h, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(50),
                                               iters);
    // keep the side where the crossing has happened
    x = h(r.first) >= 0.0 ? r.first : r.second;
  }
  return std::clamp(x, lo, hi);
}

std::string TimeChangeFn::to_string() const {
  switch (kind_) {
    case Kind::Identity:
      return "identity";
    case Kind::Linear:
      return "linear:a1=" + fmt(a1_);
    case Kind::LinearPlusQuadratic:
      return "quadratic:a1=" + fmt(a1_) + ",a2=" + fmt(a2_);
    case Kind::Power:
      return "power:p=" + fmt(p_);
    case Kind::Tabulated: {
      std::string s = "tabulated:x=";
      for (std::size_t i = 0; i < xs_->size(); ++i) s += (i ? ";" : "") + fmt((*xs_)[i]);
      s += ",y=";
      for (std::size_t i = 0; i < ys_->size(); ++i) s += (i ? ";" : "") + fmt((*ys_)[i]);
      return s;
    }
  }
  return "identity";
}

TimeChangeFn TimeChangeFn::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string fam = text.substr(0, colon);
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("time change: expected key=value, got '" + item + "'");
      kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto num = [&](const std::string& k, double def) { return kv.count(k) ? parse_num(k, kv[k]) : def; };
  auto list = [&](const std::string& k) {
    std::vector<double> v;
    std::stringstream ss(kv.at(k));
    std::string item;
    while (std::getline(ss, item, ';')) v.push_back(parse_num(k, item));
    return v;
  };
  if (fam == "identity") return identity();
  if (fam == "linear") return linear(num("a1", 1.0));
  if (fam == "quadratic") return linear_plus_quadratic(num("a1", 1.0), num("a2", 0.5));
  if (fam == "power") return power(num("p", 1.0));
  if (fam == "tabulated") {
    if (kv.count("file")) {
      std::ifstream in(kv["file"]);
      if (!in) throw ConfigError("tabulated time change: cannot open '" + kv["file"] + "'");
      std::vector<double> x, y;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto c = line.find(',');
        if (c == std::string::npos) throw ConfigError("tabulated time change: expected two columns");
        try {
          x.push_back(std::stod(line.substr(0, c)));
          y.push_back(std::stod(line.substr(c + 1)));
        } catch (const std::invalid_argument&) {
          if (x.empty()) continue;  // header
          throw ConfigError("tabulated time change: bad line '" + line + "'");
        }
      }
      return tabulated(std::move(x), std::move(y));
    }
    if (!kv.count("x") || !kv.count("y")) throw ConfigError("tabulated time change: need x=...,y=... or file=...");
    return tabulated(list("x"), list("y"));
  }
  throw ConfigError("time change: unknown family '" + fam + "'");
}

}  // namespace vclock
