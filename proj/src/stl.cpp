#include "stlsynth/stl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "stlsynth/error.hpp"

namespace stlsynth::stl {

bool Predicate::operator==(const Predicate& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case PredKind::InSet:
    case PredKind::NotInObstacles: return region == o.region;
    case PredKind::InfNormBall:
      return projection == o.projection && point.size() == o.point.size() &&
             point == o.point && radius == o.radius;
  }
  return false;
}

double Formula::horizon() const {
  switch (op) {
    case Op::Top:
    case Op::Pred: return 0.0;
    case Op::Not: return children[0]->horizon();
    case Op::And: {
      double h = 0.0;
      for (const auto& c : children) h = std::max(h, c->horizon());
      return h;
    }
    case Op::Always:
    case Op::Eventually: return interval.b + children[0]->horizon();
    case Op::Until:
      return interval.b + std::max(children[0]->horizon(), children[1]->horizon());
  }
  return 0.0;
}

bool Formula::is_state_formula() const {
  switch (op) {
    case Op::Top:
    case Op::Pred: return true;
    case Op::Not:
    case Op::And:
      return std::all_of(children.begin(), children.end(),
                         [](const FormulaPtr& c) { return c->is_state_formula(); });
    default: return false;
  }
}

bool equal(const FormulaPtr& x, const FormulaPtr& y) {
  if (x->op != y->op || x->children.size() != y->children.size()) return false;
  if (x->op == Op::Pred && !(x->pred == y->pred)) return false;
  if ((x->op == Op::Always || x->op == Op::Eventually || x->op == Op::Until) &&
      !(x->interval == y->interval)) {
    return false;
  }
  for (std::size_t i = 0; i < x->children.size(); ++i)
    if (!equal(x->children[i], y->children[i])) return false;
  return true;
}

namespace {

FormulaPtr make(Op op, Interval i, std::vector<FormulaPtr> children) {
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->interval = i;
  f->children = std::move(children);
  return f;
}

void check_interval(const Interval& i) {
  if (!std::isfinite(i.a) || !std::isfinite(i.b) || i.a < 0.0 || i.a > i.b) {
    throw Error(ErrorKind::MalformedInterval,
                "interval [" + std::to_string(i.a) + ", " + std::to_string(i.b) +
                    "] must satisfy 0 <= a <= b");
  }
}

}  // namespace

FormulaPtr top() { return make(Op::Top, {}, {}); }

FormulaPtr pred(Predicate p) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Pred;
  f->pred = std::move(p);
  return f;
}

FormulaPtr negate(FormulaPtr child) {
  if (child->op != Op::Pred) {
    throw Error(ErrorKind::UnsupportedFragment, "negation applies to predicates only");
  }
  return make(Op::Not, {}, {std::move(child)});
}

FormulaPtr conj(std::vector<FormulaPtr> children) {
  if (children.empty()) return top();
  if (children.size() == 1) return children[0];
  return make(Op::And, {}, std::move(children));
}

FormulaPtr always(Interval i, FormulaPtr child) {
  check_interval(i);
  return make(Op::Always, i, {std::move(child)});
}

FormulaPtr eventually(Interval i, FormulaPtr child) {
  check_interval(i);
  return make(Op::Eventually, i, {std::move(child)});
}

FormulaPtr until(Interval i, FormulaPtr left, FormulaPtr right) {
  check_interval(i);
  return make(Op::Until, i, {std::move(left), std::move(right)});
}

Predicate in_region(const std::string& name) {
  Predicate p;
  p.kind = PredKind::InSet;
  p.region = name;
  return p;
}

Predicate avoid(const std::string& group) {
  Predicate p;
  p.kind = PredKind::NotInObstacles;
  p.region = group;
  return p;
}

Predicate inf_norm_ball(Projection idx, VectorXd center, double radius) {
  if (static_cast<int>(idx.size()) != center.size()) {
    throw Error(ErrorKind::DimensionMismatch, "norm ball index count != center length");
  }
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "norm ball radius must be > 0");
  Predicate p;
  p.kind = PredKind::InfNormBall;
  p.projection = std::move(idx);
  p.point = std::move(center);
  p.radius = radius;
  return p;
}

bool RegionTable::has(const std::string& name) const { return regions.count(name) > 0; }

const RegionEntry& RegionTable::at(const std::string& name) const {
  const auto it = regions.find(name);
  if (it == regions.end()) throw Error(ErrorKind::UnknownRegion, "unknown region '" + name + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(const std::string& text, const RegionTable* regions) : s_(text), regions_(regions) {}

  FormulaPtr parse_all() {
    FormulaPtr f = conjunction();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::SyntaxError,
                "syntax error at position " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(const std::string& tok) {
    skip();
    return s_.compare(pos_, tok.size(), tok) == 0;
  }

  bool accept(const std::string& tok) {
    if (!peek(tok)) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(const std::string& tok) {
    if (!accept(tok)) fail("expected '" + tok + "'");
  }

  // Temporal keyword followed by an interval bracket.
  bool temporal(char k) {
    skip();
    if (pos_ + 1 >= s_.size() || s_[pos_] != k) return false;
    std::size_t q = pos_ + 1;
    while (q < s_.size() && std::isspace(static_cast<unsigned char>(s_[q]))) ++q;
    if (q >= s_.size() || s_[q] != '[') return false;
    pos_ = q;
    return true;
  }

  double number() {
    skip();
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    double v = 0.0;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc()) fail("expected a number");
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return v;
  }

  int integer() {
    skip();
    const char* begin = s_.data() + pos_;
    int v = 0;
    const auto res = std::from_chars(begin, s_.data() + s_.size(), v);
    if (res.ec != std::errc() || v < 0) fail("expected a state index");
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return v;
  }

  std::string name() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
            s_[pos_] == '&')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a region name");
    return s_.substr(start, pos_ - start);
  }

  Interval interval() {
    expect("[");
    const std::size_t at = pos_;
    Interval i;
    i.a = number();
    expect(",");
    i.b = number();
    expect("]");
    if (i.a < 0.0 || i.a > i.b) {
      throw Error(ErrorKind::MalformedInterval,
                  "malformed interval at position " + std::to_string(at) + ": [" +
                      std::to_string(i.a) + ", " + std::to_string(i.b) + "]");
    }
    return i;
  }

  FormulaPtr conjunction() {
    std::vector<FormulaPtr> parts;
    parts.push_back(until_expr());
    while (accept("&&")) parts.push_back(until_expr());
    return conj(std::move(parts));
  }

  FormulaPtr until_expr() {
    FormulaPtr left = unary();
    if (temporal('U')) {
      const Interval i = interval();
      FormulaPtr right = unary();
      return until(i, left, right);
    }
    return left;
  }

  FormulaPtr unary() {
    if (accept("!")) {
      const std::size_t at = pos_;
      FormulaPtr child = unary();
      if (child->op != Op::Pred) {
        pos_ = at;
        throw Error(ErrorKind::UnsupportedFragment,
                    "negation at position " + std::to_string(at) + " applies to predicates only");
      }
      return negate(child);
    }
    if (temporal('G')) {
      const Interval i = interval();
      return always(i, unary());
    }
    if (temporal('F')) {
      const Interval i = interval();
      return eventually(i, unary());
    }
    if (accept("(")) {
      FormulaPtr f = conjunction();
      expect(")");
      return f;
    }
    return atom();
  }

  FormulaPtr atom() {
    if (accept("true")) return top();
    if (accept("in")) {
      expect("(");
      const std::size_t at = pos_;
      const std::string n = name();
      expect(")");
      if (regions_ && !regions_->has(n)) {
        throw Error(ErrorKind::UnknownRegion,
                    "unknown region '" + n + "' at position " + std::to_string(at));
      }
      return pred(in_region(n));
    }
    if (accept("avoid")) {
      expect("(");
      const std::size_t at = pos_;
      const std::string n = name();
      expect(")");
      if (regions_ && n != "obstacles" && !regions_->has(n)) {
        throw Error(ErrorKind::UnknownRegion,
                    "unknown obstacle group '" + n + "' at position " + std::to_string(at));
      }
      return pred(avoid(n));
    }
    if (accept("norm_inf")) {
      expect("(");
      expect("x");
      expect("[");
      Projection idx;
      do {
        const int first = integer();
        if (accept("..")) {
          const int last = integer();
          if (last < first) fail("descending index range");
          for (int k = first; k <= last; ++k) idx.push_back(k);
        } else {
          idx.push_back(first);
        }
      } while (accept(","));
      expect("]");
      expect("-");
      expect("(");
      std::vector<double> c;
      do {
        c.push_back(number());
      } while (accept(","));
      expect(")");
      expect(")");
      expect("<=");
      const double r = number();
      if (c.size() != idx.size()) fail("center length differs from index count");
      if (!(r > 0.0)) fail("radius must be positive");
      return pred(inf_norm_ball(idx, Eigen::Map<VectorXd>(c.data(), static_cast<int>(c.size())), r));
    }
    fail("expected a predicate, '!', 'G[', 'F[' or '('");
  }

  const std::string& s_;
  const RegionTable* regions_;
  std::size_t pos_ = 0;
};

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool needs_parens(const FormulaPtr& f) { return f->op == Op::And || f->op == Op::Until; }

std::string wrapped(const FormulaPtr& f) {
  return needs_parens(f) ? "(" + print(f) + ")" : print(f);
}

}  // namespace

FormulaPtr parse(const std::string& text, const RegionTable* regions) {
  return Parser(text, regions).parse_all();
}

std::string print(const FormulaPtr& f) {
  switch (f->op) {
    case Op::Top: return "true";
    case Op::Pred: {
      const Predicate& p = f->pred;
      switch (p.kind) {
        case PredKind::InSet: return "in(" + p.region + ")";
        case PredKind::NotInObstacles: return "avoid(" + p.region + ")";
        case PredKind::InfNormBall: {
          std::string s = "norm_inf(x[";
          for (std::size_t i = 0; i < p.projection.size(); ++i)
            s += (i ? "," : "") + std::to_string(p.projection[i]);
          s += "] - (";
          for (int i = 0; i < p.point.size(); ++i) s += (i ? "," : "") + num(p.point[i]);
          return s + ")) <= " + num(p.radius);
        }
      }
      return "";
    }
    case Op::Not: return "!" + print(f->children[0]);
    case Op::And: {
      std::string s;
      for (std::size_t i = 0; i < f->children.size(); ++i)
        s += (i ? " && " : "") + wrapped(f->children[i]);
      return s;
    }
    case Op::Always:
    case Op::Eventually:
      return std::string(f->op == Op::Always ? "G" : "F") + "[" + num(f->interval.a) + "," +
             num(f->interval.b) + "] " + wrapped(f->children[0]);
    case Op::Until:
      return "(" + print(f->children[0]) + ") U[" + num(f->interval.a) + "," +
             num(f->interval.b) + "] (" + print(f->children[1]) + ")";
  }
  return "";
}

FormulaPtr rewrite_until(const FormulaPtr& f, std::optional<double> t_prime) {
  switch (f->op) {
    case Op::Top:
    case Op::Pred:
    case Op::Not: return f;
    case Op::And: {
      std::vector<FormulaPtr> c;
      for (const auto& ch : f->children) c.push_back(rewrite_until(ch, t_prime));
      return conj(std::move(c));
    }
    case Op::Always: return always(f->interval, rewrite_until(f->children[0], t_prime));
    case Op::Eventually: return eventually(f->interval, rewrite_until(f->children[0], t_prime));
    case Op::Until: {
      const Interval w = f->interval;
      const double t = t_prime.value_or(0.5 * (w.a + w.b));
      if (t < w.a || t > w.b) {
        throw Error(ErrorKind::OutOfWindow,
                    "split time " + num(t) + " outside [" + num(w.a) + ", " + num(w.b) + "]");
      }
      return conj({always({w.a, t}, rewrite_until(f->children[0], t_prime)),
                   eventually({t, t}, rewrite_until(f->children[1], t_prime))});
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Monitor
// ---------------------------------------------------------------------------

namespace {

VectorXd select(const VectorXd& x, const Projection& idx) {
  if (idx.empty()) return x;
  VectorXd z(static_cast<int>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= x.size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "state index " + std::to_string(idx[i]) + " out of range");
    }
    z[static_cast<int>(i)] = x[idx[i]];
  }
  return z;
}

// Sample range [lo, hi) whose times fall in [t + a, t + b].
std::pair<std::size_t, std::size_t> window(const std::vector<double>& t, std::size_t k,
                                           const Interval& w) {
  constexpr double eps = 1e-9;
  const auto lo = std::lower_bound(t.begin() + static_cast<long>(k), t.end(), t[k] + w.a - eps);
  const auto hi = std::upper_bound(lo, t.end(), t[k] + w.b + eps);
  return {static_cast<std::size_t>(lo - t.begin()), static_cast<std::size_t>(hi - t.begin())};
}

}  // namespace

bool holds(const Predicate& p, const VectorXd& x, const RegionTable& regions, double tol) {
  switch (p.kind) {
    case PredKind::InSet: {
      const RegionEntry& e = regions.at(p.region);
      return contains_point(e.set, select(x, e.projection), tol);
    }
    case PredKind::NotInObstacles: {
      const VectorXd z = select(x, regions.obstacle_projection);
      for (const auto& o : regions.obstacles)
        if (o.contains(z)) return false;
      return true;
    }
    case PredKind::InfNormBall:
      return (select(x, p.projection) - p.point).lpNorm<Eigen::Infinity>() <= p.radius + tol;
  }
  return false;
}

std::vector<char> evaluate_samples(const FormulaPtr& f, const SampledTrajectory& tr,
                                   const RegionTable& regions) {
  const std::size_t n = tr.times.size();
  std::vector<char> out(n, 0);
  switch (f->op) {
    case Op::Top: std::fill(out.begin(), out.end(), 1); break;
    case Op::Pred:
      for (std::size_t k = 0; k < n; ++k) out[k] = holds(f->pred, tr.states[k], regions);
      break;
    case Op::Not: {
      const auto c = evaluate_samples(f->children[0], tr, regions);
      for (std::size_t k = 0; k < n; ++k) out[k] = !c[k];
      break;
    }
    case Op::And: {
      std::fill(out.begin(), out.end(), 1);
      for (const auto& ch : f->children) {
        const auto c = evaluate_samples(ch, tr, regions);
        for (std::size_t k = 0; k < n; ++k) out[k] = out[k] && c[k];
      }
      break;
    }
    case Op::Always:
    case Op::Eventually: {
      const auto c = evaluate_samples(f->children[0], tr, regions);
      const bool all = f->op == Op::Always;
      for (std::size_t k = 0; k < n; ++k) {
        const auto [lo, hi] = window(tr.times, k, f->interval);
        bool v = all;
        for (std::size_t j = lo; j < hi; ++j) {
          if (all && !c[j]) { v = false; break; }
          if (!all && c[j]) { v = true; break; }
        }
        out[k] = v;
      }
      break;
    }
    case Op::Until: {
      const auto l = evaluate_samples(f->children[0], tr, regions);
      const auto r = evaluate_samples(f->children[1], tr, regions);
      for (std::size_t k = 0; k < n; ++k) {
        const auto [lo, hi] = window(tr.times, k, f->interval);
        bool v = false;
        bool left_ok = true;
        for (std::size_t j = k; j < hi && left_ok; ++j) {
          if (j >= lo && r[j]) { v = true; break; }
          left_ok = l[j];
        }
        out[k] = v;
      }
      break;
    }
  }
  return out;
}

MonitorResult monitor(const FormulaPtr& f, const SampledTrajectory& tr,
                      const RegionTable& regions) {
  if (tr.times.empty() || tr.times.size() != tr.states.size()) {
    throw Error(ErrorKind::HorizonTooShort, "trajectory is empty or malformed");
  }
  const double span = tr.times.back() - tr.times.front();
  if (span < f->horizon() - 1e-9) {
    throw Error(ErrorKind::HorizonTooShort,
                "trajectory spans " + num(span) + " s, formula needs " + num(f->horizon()) + " s");
  }
  MonitorResult res;
  res.satisfied = evaluate_samples(f, tr, regions)[0] != 0;

  // Witness from the first relevant conjunct.
  std::vector<FormulaPtr> parts =
      f->op == Op::And ? f->children : std::vector<FormulaPtr>{f};
  for (const auto& part : parts) {
    if (part->op != Op::Always && part->op != Op::Eventually) continue;
    const bool is_g = part->op == Op::Always;
    if (is_g == res.satisfied) continue;  // G witnesses violations, F satisfaction
    const auto c = evaluate_samples(part->children[0], tr, regions);
    const auto [lo, hi] = window(tr.times, 0, part->interval);
    if (res.satisfied) {
      bool ok = false;
      for (std::size_t j = lo; j < hi && !ok; ++j)
        if (c[j]) { res.witness = tr.times[j]; ok = true; }
      if (ok) break;
    } else {
      bool bad = false;
      for (std::size_t j = lo; j < hi && !bad; ++j)
        if (!c[j]) { res.witness = tr.times[j]; bad = true; }
      if (bad) break;
    }
  }
  if (!res.satisfied && !res.witness) {
    // Failed F conjunct: report the window end.
    for (const auto& part : parts) {
      if (part->op == Op::Eventually) {
        res.witness = tr.times.front() + part->interval.b;
        break;
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// LTL abstraction
// ---------------------------------------------------------------------------

namespace {

void flatten(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (f->op == Op::And) {
    for (const auto& c : f->children) flatten(c, out);
  } else {
    out.push_back(f);
  }
}

}  // namespace

LtlAbstraction induced_ltl_targets(const FormulaPtr& f, const RegionTable& regions) {
  std::vector<FormulaPtr> parts;
  flatten(f, parts);
  LtlAbstraction out;
  int region_counter = 0;
  for (const auto& part : parts) {
    if (part->op == Op::Top) continue;
    if (part->op == Op::Until) {
      throw Error(ErrorKind::UnsupportedFragment, "rewrite Until before abstraction");
    }
    if ((part->op != Op::Always && part->op != Op::Eventually) ||
        !part->children[0]->is_state_formula()) {
      throw Error(ErrorKind::UnsupportedFragment,
                  "conjunct '" + print(part) + "' is not G or F over a state formula");
    }
    const FormulaPtr body = part->children[0];
    if (part->op == Op::Always && part->interval.a == 0.0) {
      out.constraints.push_back({part->interval, body});
      continue;
    }
    if (body->op != Op::Pred || body->pred.kind == PredKind::NotInObstacles) {
      throw Error(ErrorKind::UnsupportedFragment,
                  "region of interest in '" + print(part) + "' must be a single membership predicate");
    }
    Target t;
    t.op = part->op;
    t.interval = part->interval;
    t.source = part;
    ++region_counter;
    t.name = "pr" + std::to_string(region_counter);
    if (body->pred.kind == PredKind::InSet) {
      const RegionEntry& e = regions.at(body->pred.region);
      t.region = e.set;
      t.projection = e.projection;
    } else {
      const VectorXd r = VectorXd::Constant(body->pred.point.size(), body->pred.radius);
      t.region = CZ(Box(body->pred.point - r, body->pred.point + r));
      t.projection = body->pred.projection;
    }
    out.targets.push_back(std::move(t));
  }
  return out;
}

}  // namespace stlsynth::stl
