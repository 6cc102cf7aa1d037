#include "profile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "dual.hpp"
#include "error.hpp"
#include "format.hpp"

namespace adiasim {

namespace {

bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

bool is_integral_literal(double v) {
  return std::nearbyint(v) == v && std::abs(v) <= 1e9;
}

std::string snippet(const std::string& src, size_t offset) {
  const size_t n = std::min<size_t>(src.size() - std::min(offset, src.size()), 24);
  return src.substr(std::min(offset, src.size()), n);
}

} // namespace

class Profile::Parser {
public:
  Parser(std::string_view src, std::vector<Node>& nodes) : src_(src), nodes_(nodes) {}

  int run() {
    int root = parse_expr(0);
    skip_ws();
    if (pos_ != src_.size())
      fail(Errc::parse, "syntax error at offset " + std::to_string(pos_) + ": unexpected '" +
                            std::string(1, src_[pos_]) + "'",
           static_cast<std::ptrdiff_t>(pos_));
    return root;
  }

private:
  std::string_view src_;
  std::vector<Node>& nodes_;
  size_t pos_ = 0;

  [[noreturn]] void syntax(const std::string& what) {
    fail(Errc::parse, "syntax error at offset " + std::to_string(pos_) + ": " + what,
         static_cast<std::ptrdiff_t>(pos_));
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add_node(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int parse_expr(int depth) {
    if (depth > 200) syntax("expression too deeply nested");
    int lhs = parse_term(depth + 1);
    for (;;) {
      skip_ws();
      const unsigned off = static_cast<unsigned>(pos_);
      if (accept('+'))
        lhs = add_node({Op::add, 0.0, lhs, parse_term(depth + 1), off});
      else if (accept('-'))
        lhs = add_node({Op::sub, 0.0, lhs, parse_term(depth + 1), off});
      else
        return lhs;
    }
  }

  int parse_term(int depth) {
    int lhs = parse_factor(depth + 1);
    for (;;) {
      skip_ws();
      const unsigned off = static_cast<unsigned>(pos_);
      if (accept('*'))
        lhs = add_node({Op::mul, 0.0, lhs, parse_factor(depth + 1), off});
      else if (accept('/'))
        lhs = add_node({Op::div, 0.0, lhs, parse_factor(depth + 1), off});
      else
        return lhs;
    }
  }

  // '^' binds tighter than unary minus, so "-tau^2" is -(tau^2); this is
  // what profile strings like "2 - 0.5*exp(-tau^2)" mean.
  int parse_factor(int depth) {
    if (depth > 200) syntax("expression too deeply nested");
    skip_ws();
    const unsigned off = static_cast<unsigned>(pos_);
    if (accept('-')) {
      int inner = parse_factor(depth + 1);
      // Fold a negated literal so "2^-2" hits the integer path.
      if (nodes_[static_cast<size_t>(inner)].op == Op::number) {
        nodes_[static_cast<size_t>(inner)].number = -nodes_[static_cast<size_t>(inner)].number;
        return inner;
      }
      return add_node({Op::neg, 0.0, inner, -1, off});
    }
    int base = parse_primary(depth + 1);
    skip_ws();
    const unsigned off2 = static_cast<unsigned>(pos_);
    if (accept('^')) {
      int expo = parse_factor(depth + 1); // right-associative
      // Integer-literal exponents are dispatched to the exact integer-power
      // path, which permits negative bases.
      const Node& e = nodes_[static_cast<size_t>(expo)];
      if (e.op == Op::number && is_integral_literal(e.number))
        return add_node({Op::pow_int, e.number, base, -1, off2});
      return add_node({Op::pow, 0.0, base, expo, off2});
    }
    return base;
  }

  int parse_primary(int depth) {
    skip_ws();
    if (pos_ >= src_.size()) syntax("unexpected end of input");
    const unsigned off = static_cast<unsigned>(pos_);
    const char c = src_[pos_];

    if (c == '(') {
      ++pos_;
      int inner = parse_expr(depth + 1);
      if (!accept(')')) syntax("expected ')'");
      return inner;
    }

    if ((c >= '0' && c <= '9') || c == '.') {
      double value = 0.0;
      auto res = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value);
      if (res.ec != std::errc{}) syntax("malformed number");
      pos_ = static_cast<size_t>(res.ptr - src_.data());
      return add_node({Op::number, value, -1, -1, off});
    }

    if (is_ident_char(c)) {
      size_t start = pos_;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
      const std::string_view name = src_.substr(start, pos_ - start);
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '(') {
        ++pos_;
        Op op;
        if (name == "sin") op = Op::fsin;
        else if (name == "cos") op = Op::fcos;
        else if (name == "tan") op = Op::ftan;
        else if (name == "exp") op = Op::fexp;
        else if (name == "tanh") op = Op::ftanh;
        else if (name == "sqrt") op = Op::fsqrt;
        else if (name == "atan") op = Op::fatan;
        else
          fail(Errc::parse, "unknown function '" + std::string(name) + "' at offset " +
                                std::to_string(start),
               static_cast<std::ptrdiff_t>(start));
        int arg = parse_expr(depth + 1);
        if (!accept(')')) syntax("expected ')'");
        return add_node({op, 0.0, arg, -1, off});
      }
      if (name == "tau") return add_node({Op::tau, 0.0, -1, -1, off});
      if (name == "pi") return add_node({Op::number, std::numbers::pi, -1, -1, off});
      if (name == "e") return add_node({Op::number, std::numbers::e, -1, -1, off});
      fail(Errc::parse, "unknown identifier '" + std::string(name) + "' at offset " +
                            std::to_string(start),
           static_cast<std::ptrdiff_t>(start));
    }

    syntax(std::string("unexpected '") + c + "'");
  }
};

Profile Profile::parse(std::string_view source) {
  Profile p;
  p.source_.assign(source);
  Parser parser(p.source_, p.nodes_);
  p.root_ = parser.run();
  return p;
}

namespace {

struct EvalCtx {
  const std::string& source;

  [[noreturn]] void domain(const std::string& what, unsigned offset) const {
    fail(Errc::domain, what + " at offset " + std::to_string(offset) + " in '" +
                           snippet(source, offset) + "'",
         static_cast<std::ptrdiff_t>(offset));
  }
};

} // namespace

ProfileValue Profile::eval(double tau) const {
  const EvalCtx ctx{source_};
  // Non-recursive post-order walk; node children always precede parents is
  // NOT guaranteed by the parser, so evaluate recursively via an explicit
  // lambda instead.
  auto rec = [&](auto&& self, int idx) -> Taylor2 {
    const Node& n = nodes_[static_cast<size_t>(idx)];
    switch (n.op) {
      case Op::number: return taylor_const(n.number);
      case Op::tau: return taylor_var(tau);
      case Op::add: return self(self, n.a) + self(self, n.b);
      case Op::sub: return self(self, n.a) - self(self, n.b);
      case Op::mul: return self(self, n.a) * self(self, n.b);
      case Op::div: {
        Taylor2 num = self(self, n.a), den = self(self, n.b);
        if (den.v == 0.0) ctx.domain("division by zero", n.offset);
        return num / den;
      }
      case Op::pow_int: {
        Taylor2 base = self(self, n.a);
        const long long e = static_cast<long long>(n.number);
        if (base.v == 0.0 && e < 0) ctx.domain("zero raised to a negative power", n.offset);
        return powi(base, e);
      }
      case Op::pow: {
        Taylor2 base = self(self, n.a), expo = self(self, n.b);
        if (base.v <= 0.0) ctx.domain("non-integer power of a non-positive base", n.offset);
        return adiasim::pow(base, expo);
      }
      case Op::neg: return -self(self, n.a);
      case Op::fsin: return adiasim::sin(self(self, n.a));
      case Op::fcos: return adiasim::cos(self(self, n.a));
      case Op::ftan: return adiasim::tan(self(self, n.a));
      case Op::fexp: return adiasim::exp(self(self, n.a));
      case Op::ftanh: return adiasim::tanh(self(self, n.a));
      case Op::fsqrt: {
        Taylor2 arg = self(self, n.a);
        if (arg.v <= 0.0) ctx.domain("sqrt of a non-positive value", n.offset);
        return adiasim::sqrt(arg);
      }
      case Op::fatan: return adiasim::atan(self(self, n.a));
    }
    fail(Errc::internal, "corrupt profile node");
  };
  const Taylor2 r = rec(rec, root_);
  if (!std::isfinite(r.v) || !std::isfinite(r.d1) || !std::isfinite(r.d2))
    fail(Errc::domain, "profile evaluation produced a non-finite value at tau=" +
                           format_double(tau));
  return {r.v, r.d1, r.d2};
}

void Profile::format_node(int idx, std::string& out) const {
  const Node& n = nodes_[static_cast<size_t>(idx)];
  auto binary = [&](const char* op) {
    out += '(';
    format_node(n.a, out);
    out += op;
    format_node(n.b, out);
    out += ')';
  };
  auto func = [&](const char* name) {
    out += name;
    out += '(';
    format_node(n.a, out);
    out += ')';
  };
  switch (n.op) {
    case Op::number:
      if (n.number < 0) {
        out += "(-";
        out += format_double(-n.number);
        out += ')';
      } else {
        out += format_double(n.number);
      }
      return;
    case Op::tau: out += "tau"; return;
    case Op::add: binary(" + "); return;
    case Op::sub: binary(" - "); return;
    case Op::mul: binary("*"); return;
    case Op::div: binary("/"); return;
    case Op::pow: binary("^"); return;
    case Op::pow_int:
      out += '(';
      format_node(n.a, out);
      out += '^';
      if (n.number < 0) {
        out += "(-" + format_double(-n.number) + ')';
      } else {
        out += format_double(n.number);
      }
      out += ')';
      return;
    case Op::neg:
      out += "(-";
      format_node(n.a, out);
      out += ')';
      return;
    case Op::fsin: func("sin"); return;
    case Op::fcos: func("cos"); return;
    case Op::ftan: func("tan"); return;
    case Op::fexp: func("exp"); return;
    case Op::ftanh: func("tanh"); return;
    case Op::fsqrt: func("sqrt"); return;
    case Op::fatan: func("atan"); return;
  }
}

std::string Profile::format() const {
  std::string out;
  format_node(root_, out);
  return out;
}

PositivityReport Profile::check_positive(double tau_lo, double tau_hi, double d_min,
                                         long min_grid) const {
  if (!(d_min > 0.0)) fail(Errc::invalid_argument, "d_min must be positive");
  if (!(tau_hi >= tau_lo)) fail(Errc::invalid_argument, "empty positivity interval");

  PositivityReport rep;
  rep.d_min_required = d_min;

  const double span = tau_hi - tau_lo;
  long n = std::max<long>(min_grid, static_cast<long>(64.0 * span));
  n = std::min<long>(n, 4'000'000);
  if (span == 0.0) n = 1;
  rep.grid_points = n + 1;

  auto consider = [&](double tau, const ProfileValue& pv) {
    if (pv.d < rep.min_d) {
      rep.min_d = pv.d;
      rep.tau_min = tau;
    }
    if (std::abs(pv.d1) > rep.max_abs_d1) rep.max_abs_d1 = std::abs(pv.d1);
  };

  double prev_tau = tau_lo;
  ProfileValue prev = eval(tau_lo);
  rep.min_d = prev.d;
  rep.tau_min = tau_lo;
  rep.max_abs_d1 = std::abs(prev.d1);

  // Bisection refinement of a sign change of g between a and b.
  auto refine = [&](double a, double b, auto&& g) {
    double ga = g(a);
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      const double gm = g(m);
      if ((ga <= 0.0) == (gm <= 0.0)) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };

  for (long i = 1; i <= n; ++i) {
    const double tau = tau_lo + span * static_cast<double>(i) / static_cast<double>(n);
    const ProfileValue pv = eval(tau);
    consider(tau, pv);
    // A d' sign change brackets a stationary point of d: refine and sample it.
    if (prev.d1 != 0.0 && pv.d1 != 0.0 && (prev.d1 < 0.0) != (pv.d1 < 0.0)) {
      const double ts = refine(prev_tau, tau, [&](double t) { return eval(t).d1; });
      consider(ts, eval(ts));
    }
    // A d'' sign change brackets an extremum of d': refine the |d'| bound.
    if (prev.d2 != 0.0 && pv.d2 != 0.0 && (prev.d2 < 0.0) != (pv.d2 < 0.0)) {
      const double ts = refine(prev_tau, tau, [&](double t) { return eval(t).d2; });
      consider(ts, eval(ts));
    }
    prev_tau = tau;
    prev = pv;
  }

  rep.accepted = rep.min_d >= d_min;
  return rep;
}

} // namespace adiasim
